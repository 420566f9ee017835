use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::kinds::{InequalityKind, MapName};
use crate::error::{input, Result};
use crate::ncalg::{Filtration, Levels, TracedAlgebra, TracedElement};
use crate::stepfn::StepFunction;

/// Caps on the randomly drawn instance sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub max_dim: usize,
    pub max_levels: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Dims { max_dim: 64, max_levels: 8 }
    }
}

impl Dims {
    pub const HARD_DIM: usize = 256;
    pub const HARD_LEVELS: usize = 16;

    pub fn validate(&self) -> Result<()> {
        if self.max_dim < 2 || self.max_dim > Self::HARD_DIM {
            return input(format!("dimension cap must lie in [2, {}]", Self::HARD_DIM));
        }
        if self.max_levels < 1 || self.max_levels > Self::HARD_LEVELS {
            return input(format!("level cap must lie in [1, {}]", Self::HARD_LEVELS));
        }
        Ok(())
    }
}

/// Reproduction handle for one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Digest {
    pub kind: String,
    pub seed: u64,
    /// Block dimensions of the main algebra (empty for function instances).
    pub dims: Vec<usize>,
    pub levels: usize,
}

/// Randomly generated input of a check.
#[derive(Clone, Debug)]
pub enum Instance {
    /// A sequence `x_k` adapted to nothing in particular.
    Sequence { filt: Filtration, xs: Vec<TracedElement> },
    /// Positive `a_k`.
    Positive { filt: Filtration, xs: Vec<TracedElement> },
    /// A single element whose martingale differences are examined.
    Martingale { filt: Filtration, x: TracedElement },
    /// Martingale with multipliers in a normalized auxiliary algebra.
    Generalized { filt: Filtration, x: TracedElement, xis: Vec<TracedElement> },
    /// Element plus an extra scaling parameter.
    Scaled { x: TracedElement, t: f64 },
    /// Square matrix with corner cuts.
    Corner { a: TracedElement, cuts: Vec<usize> },
    /// Elements of one algebra for the column embedding.
    Columns { xs: Vec<TracedElement> },
    /// Decreasing step function.
    Step { f: StepFunction },
    /// Two step functions.
    StepPair { f: StepFunction, g: StepFunction },
    /// Element of a small matrix algebra (tensor-with-sequence bound).
    Element { x: TracedElement },
    /// Filtration whose axioms are sampled with the given seed.
    Axioms { filt: Filtration, seed: u64 },
    /// Element plus the filtration a built-in linear map acts on.
    Mapped { filt: Filtration, x: TracedElement, map: MapName },
}

impl Instance {
    /// The same instance read with every trace weight multiplied by `s`.
    pub fn rescaled(&self, s: f64) -> Result<Instance> {
        let move_all = |xs: &[TracedElement], f: &Filtration| -> Result<Vec<TracedElement>> {
            xs.iter().map(|x| x.with_algebra(f.algebra())).collect()
        };
        Ok(match self {
            Instance::Sequence { filt, xs } => {
                let filt = filt.rescaled(s)?;
                Instance::Sequence { xs: move_all(xs, &filt)?, filt }
            }
            Instance::Positive { filt, xs } => {
                let filt = filt.rescaled(s)?;
                Instance::Positive { xs: move_all(xs, &filt)?, filt }
            }
            Instance::Martingale { filt, x } => {
                let filt = filt.rescaled(s)?;
                Instance::Martingale { x: x.with_algebra(filt.algebra())?, filt }
            }
            _ => return input("only sequence and martingale instances can be rescaled"),
        })
    }

    pub fn digest(&self, kind: &InequalityKind, seed: u64) -> Digest {
        let (alg, levels) = match self {
            Instance::Sequence { filt, .. }
            | Instance::Positive { filt, .. }
            | Instance::Martingale { filt, .. }
            | Instance::Generalized { filt, .. }
            | Instance::Mapped { filt, .. }
            | Instance::Axioms { filt, .. } => (Some(filt.algebra().clone()), filt.len()),
            Instance::Scaled { x, .. } | Instance::Element { x } => (Some(x.algebra().clone()), 0),
            Instance::Corner { a, cuts } => (Some(a.algebra().clone()), cuts.len()),
            Instance::Columns { xs } => (Some(xs[0].algebra().clone()), xs.len()),
            Instance::Step { .. } | Instance::StepPair { .. } => (None, 0),
        };
        Digest {
            kind: kind.to_string(),
            seed,
            dims: alg.map(|a| a.blocks().iter().map(|b| b.dim).collect()).unwrap_or_default(),
            levels,
        }
    }
}

/// Stable per-kind stream selector so kinds sharing a seed draw
/// independent instances.
pub fn stream_of(kind: &InequalityKind) -> u64 {
    // FNV-1a over the display name
    let mut h: u64 = 0xcbf29ce484222325;
    for b in kind.to_string().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn rng_for(kind: &InequalityKind, seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_of(kind));
    rng
}

fn weight<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (rng.gen_range(-1.5f64..1.5)).exp()
}

/// Sorted distinct cut points in `1..n` of the requested count, plus `n`.
fn random_cuts<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut inner: Vec<usize> = (1..n).collect();
    inner.shuffle(rng);
    let mut cuts: Vec<usize> = inner.into_iter().take(k - 1).collect();
    cuts.sort_unstable();
    cuts.push(n);
    cuts
}

/// Random filtration among the three families, within `dims`.
pub fn random_filtration<R: Rng + ?Sized>(rng: &mut R, dims: &Dims) -> Filtration {
    match rng.gen_range(0..3) {
        0 => random_corner(rng, dims),
        1 => random_tensor(rng, dims),
        _ => random_atomic(rng, dims),
    }
}

pub fn random_corner<R: Rng + ?Sized>(rng: &mut R, dims: &Dims) -> Filtration {
    let n = rng.gen_range(2..=dims.max_dim);
    let k = rng.gen_range(1..=dims.max_levels.min(n));
    let alg = TracedAlgebra::matrix(n, weight(rng)).expect("valid block");
    Filtration::new(&alg, Levels::Corner { cuts: random_cuts(rng, n, k) }).expect("valid cuts")
}

pub fn random_tensor<R: Rng + ?Sized>(rng: &mut R, dims: &Dims) -> Filtration {
    let mut factors = Vec::new();
    let mut n = 1;
    loop {
        let d = rng.gen_range(2..=3);
        if n * d > dims.max_dim || factors.len() + 1 >= dims.max_levels.max(2) {
            break;
        }
        factors.push(d);
        n *= d;
        if rng.gen_bool(0.3) {
            break;
        }
    }
    if factors.is_empty() {
        factors.push(2);
        n = 2;
    }
    let m = factors.len();
    // start at scalars or at the first factor
    let start = if rng.gen_bool(0.5) || m == 1 { 0 } else { 1 };
    let prefixes: Vec<usize> = (start..=m).collect();
    let prefixes = if prefixes.len() > dims.max_levels { prefixes[prefixes.len() - dims.max_levels..].to_vec() } else { prefixes };
    let alg = TracedAlgebra::matrix(n, weight(rng)).expect("valid block");
    Filtration::new(&alg, Levels::Tensor { dims: factors, prefixes }).expect("valid tensor levels")
}

/// Nested interval partitions of `n` weighted atoms.
pub fn random_atomic<R: Rng + ?Sized>(rng: &mut R, dims: &Dims) -> Filtration {
    let n = rng.gen_range(2..=dims.max_dim);
    let k = rng.gen_range(1..=dims.max_levels.min(n));
    let weights: Vec<f64> = (0..n).map(|_| weight(rng)).collect();
    atomic_with(rng, &weights, k)
}

fn atomic_with<R: Rng + ?Sized>(rng: &mut R, weights: &[f64], k: usize) -> Filtration {
    let n = weights.len();
    // boundaries ⊂ 1..n, growing with the level; last level all of them
    let mut order: Vec<usize> = (1..n).collect();
    order.shuffle(rng);
    let mut counts: Vec<usize> = (0..k - 1).map(|_| rng.gen_range(0..n)).collect();
    counts.sort_unstable();
    counts.push(n - 1);
    let labels = counts
        .iter()
        .map(|&c| {
            let mut bounds: Vec<usize> = order[..c].to_vec();
            bounds.sort_unstable();
            (0..n).map(|i| bounds.partition_point(|&b| b <= i)).collect()
        })
        .collect();
    let alg = TracedAlgebra::commutative(weights).expect("positive weights");
    Filtration::new(&alg, Levels::Atomic { labels }).expect("nested partitions")
}

/// Gaussian element with a log-normal column spread, so singular values
/// range over several orders of magnitude.
pub fn spread_element<R: Rng + ?Sized>(rng: &mut R, alg: &TracedAlgebra) -> TracedElement {
    let g = alg.gaussian(rng);
    let sigma = rng.gen_range(0.0..2.0);
    let blocks: Vec<_> = g
        .blocks()
        .iter()
        .map(|m| {
            let mut m = m.clone();
            for j in 0..m.ncols() {
                let z: f64 = rng.sample(StandardNormal);
                let s = (sigma * z).exp();
                m.column_mut(j).scale_mut(s);
            }
            m
        })
        .collect();
    TracedElement::new(alg, blocks).expect("finite entries")
}

/// Positive element `g*g` with random rank, rejecting condition numbers
/// above `1e12` on the range.
pub fn positive_element<R: Rng + ?Sized>(rng: &mut R, alg: &TracedAlgebra) -> TracedElement {
    loop {
        let g = spread_element(rng, alg);
        let keep = rng.gen_range(0.3..=1.0);
        let g = g.map_blocks(|m| {
            let mut m = m.clone();
            let r = ((m.nrows() as f64 * keep).ceil() as usize).max(1);
            for i in r..m.nrows() {
                m.row_mut(i).fill(Default::default());
            }
            m
        });
        let a = g.abs_sq();
        let sv: Vec<f64> = a.singular_values().into_iter().flatten().collect();
        let max = sv.iter().copied().fold(0.0, f64::max);
        let min_nonzero = sv.iter().copied().filter(|&s| s > 1e-14 * max).fold(f64::INFINITY, f64::min);
        if max > 0.0 && max / min_nonzero <= 1e12 {
            return a;
        }
    }
}

/// Decreasing step function with up to `max_pieces` pieces and values,
/// lengths spread over several orders of magnitude.
pub fn random_step<R: Rng + ?Sized>(rng: &mut R, max_pieces: usize) -> StepFunction {
    let n = rng.gen_range(1..=max_pieces);
    let spread: f64 = rng.gen_range(0.5..4.0);
    let atoms: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let l = rng.gen_range(-spread..spread).exp();
            let v = rng.gen_range(-spread..spread).exp();
            (l, v)
        })
        .collect();
    StepFunction::rearrange(atoms).expect("positive atoms")
}

/// Random step function rescaled to have support inside `(0, 1)`.
pub fn random_unit_step<R: Rng + ?Sized>(rng: &mut R, max_pieces: usize) -> StepFunction {
    let f = random_step(rng, max_pieces);
    let s = rng.gen_range(0.05..1.0) / f.support();
    f.dilate(s).expect("positive dilation")
}

/// Builds the instance of `kind` for trial seed `seed`.
pub fn generate_instance(kind: &InequalityKind, dims: &Dims, seed: u64) -> Result<Instance> {
    use super::kinds::IdentityKind as I;
    use InequalityKind as K;
    dims.validate()?;
    kind.validate()?;
    let mut rng = rng_for(kind, seed);
    let rng = &mut rng;
    Ok(match kind {
        K::Dst | K::St(_) => {
            let filt = random_filtration(rng, dims);
            let xs = (0..filt.len()).map(|_| spread_element(rng, filt.algebra())).collect();
            Instance::Sequence { filt, xs }
        }
        K::Ddd | K::Dd(_) => {
            let filt = random_filtration(rng, dims);
            let xs = (0..filt.len()).map(|_| positive_element(rng, filt.algebra())).collect();
            Instance::Positive { filt, xs }
        }
        K::Dmt | K::DbgLower | K::DbgUpper | K::Mt(_) | K::Bg(_) => {
            let filt = random_filtration(rng, dims);
            let x = spread_element(rng, filt.algebra());
            Instance::Martingale { filt, x }
        }
        K::Weak11 => {
            let filt = random_filtration(rng, dims);
            let x = spread_element(rng, filt.algebra());
            let m = rng.gen_range(1..=3);
            let aux = TracedAlgebra::matrix(m, 1.0 / m as f64)?;
            let xis = (0..filt.len())
                .map(|_| {
                    let g = aux.gaussian(rng);
                    g.scale(1.0 / g.op_norm())
                })
                .collect();
            Instance::Generalized { filt, x, xis }
        }
        K::Gundy(_) => {
            let f = random_atomic(rng, dims);
            let vals: Vec<f64> = (0..f.algebra().blocks().len())
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    sign * (1.5 * z).exp()
                })
                .collect();
            let x = TracedElement::diagonal(f.algebra(), &vals)?;
            Instance::Martingale { filt: f, x }
        }
        K::GundyNc(_) => {
            let filt = random_filtration(rng, dims);
            let x = spread_element(rng, filt.algebra()).real_part();
            Instance::Martingale { filt, x }
        }
        K::QbPair(_) => {
            // normalized trace: τ(1) = 1
            let mut filt = random_filtration(rng, dims);
            let total = filt.algebra().total_trace();
            filt = filt.rescaled(1.0 / total)?;
            let xs: Vec<TracedElement> = (0..filt.len()).map(|_| spread_element(rng, filt.algebra())).collect();
            match kind {
                K::QbPair(super::kinds::QbWhich::Stein) => Instance::Sequence { filt, xs },
                _ => Instance::Martingale { x: xs[0].clone(), filt },
            }
        }
        K::MomentEq | K::CstarFact | K::CNorm(_) | K::PhiLem(_) | K::Identity(I::LogKernel) => {
            Instance::Step { f: random_step(rng, 24) }
        }
        K::MarcOrlicz => Instance::Step { f: random_unit_step(rng, 24) },
        K::Identity(I::Duality) => Instance::StepPair { f: random_step(rng, 16), g: random_step(rng, 16) },
        K::CornerDemo | K::Identity(I::Corner) => {
            let n = rng.gen_range(2..=dims.max_dim.clamp(2, 32));
            let k = rng.gen_range(1..=dims.max_levels.min(n));
            let alg = TracedAlgebra::matrix(n, weight(rng))?;
            Instance::Corner { a: spread_element(rng, &alg), cuts: random_cuts(rng, n, k) }
        }
        K::Dfww(_) => {
            let alg = TracedAlgebra::matrix(8, 1.0)?;
            Instance::Element { x: spread_element(rng, &alg) }
        }
        K::Identity(I::TraceScaling) => {
            let nb = rng.gen_range(1..=3);
            let pairs: Vec<(usize, f64)> = (0..nb).map(|_| (rng.gen_range(1..=dims.max_dim.min(32) / 2 + 1), weight(rng))).collect();
            let alg = TracedAlgebra::from_pairs(&pairs)?;
            let t = rng.gen_range(-2.0f64..2.0).exp();
            Instance::Scaled { x: spread_element(rng, &alg), t }
        }
        K::Identity(I::Column) => {
            let nb = rng.gen_range(1..=2);
            let pairs: Vec<(usize, f64)> = (0..nb).map(|_| (rng.gen_range(1..=dims.max_dim.min(16)), weight(rng))).collect();
            let alg = TracedAlgebra::from_pairs(&pairs)?;
            let k = rng.gen_range(1..=dims.max_levels.min(4));
            Instance::Columns { xs: (0..k).map(|_| spread_element(rng, &alg)).collect() }
        }
        K::Identity(I::CondExp) => {
            let small = Dims { max_dim: dims.max_dim.min(32), max_levels: dims.max_levels };
            Instance::Axioms { filt: random_filtration(rng, &small), seed: rng.gen() }
        }
        K::Extrap1(map) | K::Extrap2(map) => match map {
            MapName::Burkholder => {
                let depth = rng.gen_range(1..=(dims.max_levels - 1).clamp(1, 6)) as u32;
                let n = 1usize << depth;
                let weights: Vec<f64> = vec![1.0 / n as f64; n];
                let alg = TracedAlgebra::commutative(&weights)?;
                let filt = Filtration::dyadic(&alg, depth)?;
                let vals: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * 2.0).map(f64::exp).collect();
                let x = TracedElement::diagonal(&alg, &vals)?;
                Instance::Mapped { filt, x, map: *map }
            }
            MapName::CondExp => {
                let filt = random_filtration(rng, dims);
                let x = spread_element(rng, filt.algebra());
                Instance::Mapped { filt, x, map: *map }
            }
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::kinds::suite;

    #[test]
    fn generation_is_deterministic() {
        for k in suite("all").unwrap() {
            let a = generate_instance(&k, &Dims::default(), 0).unwrap();
            let b = generate_instance(&k, &Dims::default(), 0).unwrap();
            assert_eq!(a.digest(&k, 0), b.digest(&k, 0));
            assert_eq!(format!("{a:?}"), format!("{b:?}"));
        }
    }

    #[test]
    fn positive_instances_are_positive() {
        for seed in 0..20 {
            if let Instance::Positive { xs, .. } = generate_instance(&InequalityKind::Ddd, &Dims::default(), seed).unwrap() {
                for a in xs {
                    let scale = a.max_abs();
                    assert!(a.min_eigenvalue().unwrap() >= -1e-10 * scale);
                }
            } else {
                panic!("wrong instance");
            }
        }
    }

    #[test]
    fn gundy_instances_are_self_adjoint() {
        for seed in 0..20 {
            for k in [InequalityKind::Gundy(0.5), InequalityKind::GundyNc(0.5)] {
                match generate_instance(&k, &Dims::default(), seed).unwrap() {
                    Instance::Martingale { x, .. } => assert!(x.is_self_adjoint(1e-14)),
                    _ => panic!("wrong instance"),
                }
            }
        }
    }

    #[test]
    fn caps_are_enforced() {
        assert!(generate_instance(&InequalityKind::Dst, &Dims { max_dim: 1, max_levels: 3 }, 0).is_err());
        assert!(generate_instance(&InequalityKind::Dst, &Dims { max_dim: 4096, max_levels: 3 }, 0).is_err());
        for seed in 0..50 {
            let d = generate_instance(&InequalityKind::Dst, &Dims { max_dim: 9, max_levels: 3 }, seed).unwrap().digest(&InequalityKind::Dst, seed);
            assert!(d.dims.iter().sum::<usize>() <= 9 && d.levels <= 3, "{d:?}");
        }
    }
}
