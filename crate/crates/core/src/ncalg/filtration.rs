use rand::Rng;
use serde::{Deserialize, Serialize};

use super::element::{Mat, TracedAlgebra, TracedElement, C64};
use crate::error::{input, Result};

/// Level descriptors of a filtration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Levels {
    /// Commutative algebra of `n` atoms; `labels[k][i]` is the cell of atom
    /// `i` at level `k`. Partitions refine with `k` and the last level is
    /// the partition into singletons.
    Atomic { labels: Vec<Vec<usize>> },
    /// One `n × n` block; level `k` is `p M p ⊕ ⊕_{l>k} B_l M B_l` where
    /// `p` projects on the first `cuts[k]` coordinates and `B_l` on
    /// `[cuts[l-1], cuts[l])`. The last cut is `n`.
    Corner { cuts: Vec<usize> },
    /// One block of dimension `Π dims`, Kronecker-ordered; level `k` keeps
    /// the first `prefixes[k]` factors. The last prefix is `dims.len()`.
    Tensor { dims: Vec<usize>, prefixes: Vec<usize> },
}

/// An increasing chain of subalgebras ending at the full algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Filtration {
    alg: TracedAlgebra,
    levels: Levels,
}

impl Filtration {
    pub fn new(alg: &TracedAlgebra, levels: Levels) -> Result<Self> {
        match &levels {
            Levels::Atomic { labels } => {
                if !alg.is_commutative() {
                    return input("atomic filtrations need a commutative algebra");
                }
                let n = alg.blocks().len();
                if labels.is_empty() {
                    return input("a filtration needs at least one level");
                }
                if labels.iter().any(|l| l.len() != n) {
                    return input(format!("every level must label all {n} atoms"));
                }
                for w in labels.windows(2) {
                    // finer level: same cell ⇒ same coarse cell
                    for i in 0..n {
                        for j in 0..n {
                            if w[1][i] == w[1][j] && w[0][i] != w[0][j] {
                                return input("atomic levels must refine");
                            }
                        }
                    }
                }
                let last = labels.last().unwrap();
                let mut seen = last.clone();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() != n {
                    return input("the last level must separate every atom");
                }
            }
            Levels::Corner { cuts } => {
                let n = single_block(alg)?;
                if cuts.is_empty() || cuts[0] == 0 || cuts.windows(2).any(|w| w[0] >= w[1]) {
                    return input("corner cuts must be positive and strictly increasing");
                }
                if *cuts.last().unwrap() != n {
                    return input(format!("the last corner cut must equal the block size {n}"));
                }
            }
            Levels::Tensor { dims, prefixes } => {
                let n = single_block(alg)?;
                if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != n {
                    return input("tensor factor dimensions must multiply to the block size");
                }
                if prefixes.is_empty() || prefixes.windows(2).any(|w| w[0] >= w[1]) {
                    return input("tensor prefixes must increase strictly");
                }
                if *prefixes.last().unwrap() != dims.len() {
                    return input("the last tensor prefix must cover every factor");
                }
            }
        }
        Ok(Self { alg: alg.clone(), levels })
    }

    /// Coarsest-to-finest dyadic partitions of `2^depth` atoms; level `k`
    /// has `2^k` cells.
    pub fn dyadic(alg: &TracedAlgebra, depth: u32) -> Result<Self> {
        let n = 1usize << depth;
        if alg.blocks().len() != n {
            return input(format!("dyadic filtration of depth {depth} needs {n} atoms"));
        }
        let labels = (0..=depth).map(|k| (0..n).map(|i| i >> (depth - k)).collect()).collect();
        Self::new(alg, Levels::Atomic { labels })
    }

    pub fn algebra(&self) -> &TracedAlgebra {
        &self.alg
    }

    pub fn levels(&self) -> &Levels {
        &self.levels
    }

    /// Number of levels `K`; valid indices are `0..K`.
    pub fn len(&self) -> usize {
        match &self.levels {
            Levels::Atomic { labels } => labels.len(),
            Levels::Corner { cuts } => cuts.len(),
            Levels::Tensor { prefixes, .. } => prefixes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `E_k x`.
    pub fn cond_exp(&self, k: usize, x: &TracedElement) -> Result<TracedElement> {
        if k >= self.len() {
            return input(format!("level {k} out of range 0..{}", self.len()));
        }
        if x.algebra() != &self.alg {
            return input("element does not belong to the filtration's algebra");
        }
        Ok(match &self.levels {
            Levels::Atomic { labels } => {
                let lab = &labels[k];
                let ncell = lab.iter().copied().max().unwrap_or(0) + 1;
                let mut mass = vec![C64::new(0.0, 0.0); ncell];
                let mut wt = vec![0.0; ncell];
                for (i, b) in self.alg.blocks().iter().enumerate() {
                    mass[lab[i]] += x.blocks()[i][(0, 0)] * b.weight;
                    wt[lab[i]] += b.weight;
                }
                let mats = lab.iter().map(|&c| Mat::from_element(1, 1, mass[c] / wt[c])).collect();
                TracedElement::new(&self.alg, mats)?
            }
            Levels::Corner { cuts } => {
                let m = &x.blocks()[0];
                let n = m.nrows();
                let mut out = Mat::zeros(n, n);
                let c = cuts[k];
                out.view_mut((0, 0), (c, c)).copy_from(&m.view((0, 0), (c, c)));
                for l in k + 1..cuts.len() {
                    let (a, b) = (cuts[l - 1], cuts[l]);
                    out.view_mut((a, a), (b - a, b - a)).copy_from(&m.view((a, a), (b - a, b - a)));
                }
                TracedElement::new(&self.alg, vec![out])?
            }
            Levels::Tensor { dims, prefixes } => {
                let m = &x.blocks()[0];
                let head: usize = dims[..prefixes[k]].iter().product();
                let tail: usize = dims[prefixes[k]..].iter().product();
                let mut out = Mat::zeros(head * tail, head * tail);
                let inv = C64::new(1.0 / tail as f64, 0.0);
                for a in 0..head {
                    for a2 in 0..head {
                        let mut s = C64::new(0.0, 0.0);
                        for b in 0..tail {
                            s += m[(a * tail + b, a2 * tail + b)];
                        }
                        s *= inv;
                        for b in 0..tail {
                            out[(a * tail + b, a2 * tail + b)] = s;
                        }
                    }
                }
                TracedElement::new(&self.alg, vec![out])?
            }
        })
    }

    /// Same levels over the algebra with every weight multiplied by `s`.
    pub fn rescaled(&self, s: f64) -> Result<Self> {
        Self::new(&self.alg.rescaled(s)?, self.levels.clone())
    }

    /// Randomized check of the conditional-expectation axioms and the tower
    /// law; never fails, returns every violated axiom with a witness.
    pub fn validate<R: Rng + ?Sized>(&self, rng: &mut R, samples: usize, tol: f64) -> AxiomReport {
        let mut report = AxiomReport { samples, ..Default::default() };
        let one = self.alg.identity();
        for _ in 0..samples {
            let x = self.alg.gaussian(rng);
            let y = self.alg.gaussian(rng);
            let scale = x.max_abs().max(1.0);
            for k in 0..self.len() {
                let e = |z: &TracedElement| self.cond_exp(k, z).expect("valid level");
                let ex = e(&x);
                let mut note = |axiom: &'static str, dev: f64, bound: f64| {
                    report.max_deviation = report.max_deviation.max(dev);
                    if dev > bound {
                        report.failures.push(AxiomFailure { axiom: axiom.to_string(), level: k, deviation: dev, witness: x.to_json() });
                    }
                };
                note("unital", e(&one).max_abs_diff(&one), tol);
                note("adjoint", e(&x.adjoint()).max_abs_diff(&ex.adjoint()), tol * scale);
                let exx = e(&x.abs_sq());
                let pos = -exx.min_eigenvalue().unwrap_or(f64::NEG_INFINITY);
                note("positivity", pos.max(0.0), tol * scale * scale);
                note("idempotent", e(&ex).max_abs_diff(&ex), tol * scale);
                let ks = exx.sub(&ex.abs_sq());
                let ks_min = ks.min_eigenvalue().unwrap_or(f64::NEG_INFINITY);
                note("kadison_schwarz", (-ks_min).max(0.0), tol * scale * scale);
                let dt = (ex.trace() - x.trace()).norm();
                note("trace", dt, tol * scale * self.alg.total_trace().max(1.0));
                let l1 = ex.p_norm(1.0) - x.p_norm(1.0);
                note("l1_contraction", l1.max(0.0), tol * x.p_norm(1.0).max(1.0));
                let linf = ex.op_norm() - x.op_norm();
                note("linf_contraction", linf.max(0.0), tol * x.op_norm().max(1.0));
                let a = e(&y);
                let b = e(&y.adjoint().add(&x));
                let lhs = e(&a.mul(&x).mul(&b));
                let rhs = a.mul(&ex).mul(&b);
                let bscale = (a.max_abs() * b.max_abs()).max(1.0) * scale;
                note("bimodular", lhs.max_abs_diff(&rhs), tol * bscale * a.algebra().blocks()[0].dim.max(1) as f64);
                for l in 0..self.len() {
                    let el = self.cond_exp(l, &x).expect("valid level");
                    let lhs = e(&el);
                    let rhs = self.cond_exp(k.min(l), &x).expect("valid level");
                    note("tower", lhs.max_abs_diff(&rhs), tol * scale);
                }
            }
        }
        report
    }
}

fn single_block(alg: &TracedAlgebra) -> Result<usize> {
    match alg.blocks() {
        [b] => Ok(b.dim),
        _ => input("this filtration needs a single matrix block"),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AxiomFailure {
    pub axiom: String,
    pub level: usize,
    pub deviation: f64,
    /// JSON of the random element that exposed the failure.
    pub witness: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub max_deviation: f64,
    pub failures: Vec<AxiomFailure>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn atomic_cell_averages() {
        let a = TracedAlgebra::commutative(&[1.0; 4]).unwrap();
        let f = Filtration::new(&a, Levels::Atomic { labels: vec![vec![0, 0, 1, 1], vec![0, 1, 2, 3]] }).unwrap();
        let x = TracedElement::diagonal(&a, &[1.0, 3.0, 5.0, 7.0]).unwrap();
        let e = f.cond_exp(0, &x).unwrap();
        assert_eq!(e, TracedElement::diagonal(&a, &[2.0, 2.0, 6.0, 6.0]).unwrap());
        assert_eq!(f.cond_exp(1, &x).unwrap(), x);
    }

    #[test]
    fn tensor_partial_trace() {
        let alg = TracedAlgebra::matrix(4, 1.0).unwrap();
        let f = Filtration::new(&alg, Levels::Tensor { dims: vec![2, 2], prefixes: vec![1, 2] }).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -3.0, 0.5]);
        let x = a.kronecker(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 3.0])));
        let x = TracedElement::from_real(&alg, vec![x]).unwrap();
        let want = TracedElement::from_real(&alg, vec![a.kronecker(&(DMatrix::identity(2, 2) * 2.0))]).unwrap();
        assert!(f.cond_exp(0, &x).unwrap().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn corner_two_by_two() {
        let alg = TracedAlgebra::matrix(2, 1.0).unwrap();
        let f = Filtration::new(&alg, Levels::Corner { cuts: vec![1, 2] }).unwrap();
        let x = TracedElement::from_real(&alg, vec![DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0])]).unwrap();
        let want = TracedElement::diagonal(&alg, &[1.0, 4.0]).unwrap();
        assert_eq!(f.cond_exp(0, &x).unwrap(), want);
        assert_eq!(f.cond_exp(1, &x).unwrap(), x);
    }

    #[test]
    fn non_refining_partition_is_rejected() {
        let a = TracedAlgebra::commutative(&[1.0; 4]).unwrap();
        let bad = Levels::Atomic { labels: vec![vec![0, 0, 1, 1], vec![0, 1, 1, 2], vec![0, 1, 2, 3]] };
        assert!(Filtration::new(&a, bad).is_err());
        let unfinished = Levels::Atomic { labels: vec![vec![0, 0, 1, 1]] };
        assert!(Filtration::new(&a, unfinished).is_err());
    }

    #[test]
    fn axioms_hold_for_every_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let comm = TracedAlgebra::commutative(&[0.5, 1.0, 2.0, 0.25, 1.0, 1.0, 3.0, 0.1]).unwrap();
        let cases = vec![
            Filtration::dyadic(&comm, 3).unwrap(),
            Filtration::new(&TracedAlgebra::matrix(7, 0.3).unwrap(), Levels::Corner { cuts: vec![2, 3, 6, 7] }).unwrap(),
            Filtration::new(&TracedAlgebra::matrix(12, 2.0).unwrap(), Levels::Tensor { dims: vec![2, 3, 2], prefixes: vec![0, 1, 2, 3] })
                .unwrap(),
        ];
        for f in cases {
            let r = f.validate(&mut rng, 20, 1e-10);
            assert!(r.passed(), "{:?}", r.failures.first().map(|x| (x.axiom.clone(), x.deviation)));
        }
    }
}
