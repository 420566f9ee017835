//! Martingale differences over a [`Filtration`], transforms, square
//! functions, the Stein and dual-Doob maps, column embeddings and a
//! Gundy-type decomposition.

use serde::{Deserialize, Serialize};

use crate::error::{input, internal, Result};
use crate::ncalg::{Filtration, Mat, TracedAlgebra, TracedElement, C64};

/// Relative tolerance for the martingale-difference conditions.
pub const DIFF_TOL: f64 = 1e-10;
/// Eigenvalue floor (relative) below which an input counts as non-positive.
pub const PSD_TOL: f64 = 1e-8;

/// `d_0, …, d_{K-1}` with `d_k = E_k d_k` and `E_{k-1} d_k = 0`.
#[derive(Clone, Debug)]
pub struct DifferenceSequence {
    filt: Filtration,
    d: Vec<TracedElement>,
}

impl DifferenceSequence {
    /// Validates both difference conditions to `DIFF_TOL`.
    pub fn new(filt: &Filtration, d: Vec<TracedElement>) -> Result<Self> {
        if d.len() > filt.len() {
            return input(format!("{} differences exceed {} levels", d.len(), filt.len()));
        }
        for (k, dk) in d.iter().enumerate() {
            let scale = dk.max_abs().max(f64::MIN_POSITIVE);
            if filt.cond_exp(k, dk)?.max_abs_diff(dk) > DIFF_TOL * scale.max(1.0) {
                return input(format!("d_{k} is not measurable at level {k}"));
            }
            if k > 0 && filt.cond_exp(k - 1, dk)?.max_abs() > DIFF_TOL * scale.max(1.0) {
                return input(format!("E_{} d_{k} does not vanish", k - 1));
            }
        }
        Ok(Self { filt: filt.clone(), d })
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filt
    }

    pub fn terms(&self) -> &[TracedElement] {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn sum(&self) -> TracedElement {
        let mut acc = self.filt.algebra().zero();
        for dk in &self.d {
            acc = acc.add(dk);
        }
        acc
    }
}

/// `d_0 = E_0 x`, `d_k = E_k x − E_{k−1} x`.
pub fn differences(x: &TracedElement, filt: &Filtration) -> Result<DifferenceSequence> {
    let mut d = Vec::with_capacity(filt.len());
    let mut prev: Option<TracedElement> = None;
    for k in 0..filt.len() {
        let ek = filt.cond_exp(k, x)?;
        d.push(match &prev {
            None => ek.clone(),
            Some(p) => ek.sub(p),
        });
        prev = Some(ek);
    }
    Ok(DifferenceSequence { filt: filt.clone(), d })
}

/// `Σ ε_k d_k`.
pub fn transform_signs(d: &DifferenceSequence, signs: &[i8]) -> Result<TracedElement> {
    if signs.len() != d.len() {
        return input(format!("{} signs for {} differences", signs.len(), d.len()));
    }
    let mut acc = d.filt.algebra().zero();
    for (dk, &e) in d.d.iter().zip(signs) {
        match e {
            1 => acc = acc.add(dk),
            -1 => acc = acc.sub(dk),
            _ => return input(format!("sign must be ±1, got {e}")),
        }
    }
    Ok(acc)
}

/// `Σ d_k ⊗ ξ_k` in `A ⊗ N`, where every `ξ_k` lives in the same
/// normalized algebra `N` (`τ(1) = 1`).
pub fn transform_general(d: &DifferenceSequence, xis: &[TracedElement]) -> Result<TracedElement> {
    if xis.len() != d.len() {
        return input(format!("{} multipliers for {} differences", xis.len(), d.len()));
    }
    let Some(first) = xis.first() else {
        return Ok(d.filt.algebra().zero());
    };
    let aux = first.algebra();
    if (aux.total_trace() - 1.0).abs() > 1e-12 {
        return input(format!("auxiliary algebra must be normalized, τ(1) = {}", aux.total_trace()));
    }
    if xis.iter().any(|xi| xi.algebra() != aux) {
        return input("all multipliers must share one auxiliary algebra");
    }
    let mut acc = d.filt.algebra().tensor(aux).zero();
    for (dk, xi) in d.d.iter().zip(xis) {
        acc = acc.add(&dk.tensor(xi));
    }
    Ok(acc)
}

/// Column `Σ d_k* d_k` and row `Σ d_k d_k*`, negative rounding clipped.
pub fn square_functions(d: &DifferenceSequence) -> (TracedElement, TracedElement) {
    let alg = d.filt.algebra();
    let (mut col, mut row) = (alg.zero(), alg.zero());
    for dk in &d.d {
        col = col.add(&dk.abs_sq());
        row = row.add(&dk.abs_sq_row());
    }
    (clip_psd(&col), clip_psd(&row))
}

fn clip_psd(x: &TracedElement) -> TracedElement {
    x.hermitian_fn(|l| l.max(0.0)).expect("sums of squares are self-adjoint")
}

/// `x_k ↦ E_k x_k`.
pub fn stein_map(xs: &[TracedElement], filt: &Filtration) -> Result<Vec<TracedElement>> {
    if xs.len() > filt.len() {
        return input(format!("{} inputs exceed {} levels", xs.len(), filt.len()));
    }
    xs.iter().enumerate().map(|(k, x)| filt.cond_exp(k, x)).collect()
}

/// `Σ_k E_k a_k` for positive `a_k`.
pub fn dual_doob_sum(as_: &[TracedElement], filt: &Filtration) -> Result<TracedElement> {
    if as_.len() > filt.len() {
        return input(format!("{} inputs exceed {} levels", as_.len(), filt.len()));
    }
    let mut acc = filt.algebra().zero();
    for (k, a) in as_.iter().enumerate() {
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let min = a.min_eigenvalue()?;
        if min < -PSD_TOL * scale {
            return input(format!("a_{k} is not positive semidefinite (eigenvalue {min})"));
        }
        acc = acc.add(&filt.cond_exp(k, a)?);
    }
    Ok(clip_psd(&acc))
}

/// `Σ_k x_k ⊗ e_{k0}` in `A ⊗ M_K` (standard trace on `M_K`), with the
/// identity `|X|² = (Σ x_k* x_k) ⊗ e_{00}` checked on every call.
pub fn column_embed(xs: &[TracedElement]) -> Result<TracedElement> {
    let Some(first) = xs.first() else {
        return input("column embedding needs at least one element");
    };
    let alg = first.algebra();
    if xs.iter().any(|x| x.algebra() != alg) {
        return input("column entries must share one algebra");
    }
    let k = xs.len();
    let mk = TracedAlgebra::matrix(k, 1.0)?;
    let unit = |i: usize, j: usize| {
        let mut m = Mat::zeros(k, k);
        m[(i, j)] = C64::new(1.0, 0.0);
        TracedElement::new(&mk, vec![m]).expect("matrix unit")
    };
    let mut col = alg.tensor(&mk).zero();
    let mut sq = alg.zero();
    for (i, x) in xs.iter().enumerate() {
        col = col.add(&x.tensor(&unit(i, 0)));
        sq = sq.add(&x.abs_sq());
    }
    let lhs = col.abs_sq();
    let rhs = sq.tensor(&unit(0, 0));
    let dev = lhs.max_abs_diff(&rhs);
    if dev > 1e-10 * rhs.max_abs().max(1.0) {
        return internal(format!("column embedding identity off by {dev}"));
    }
    Ok(col)
}

/// Outcome of [`gundy_decompose`]: the four martingale difference
/// sequences and their sums.
#[derive(Clone, Debug)]
pub struct Gundy {
    pub alpha: Vec<TracedElement>,
    pub beta: Vec<TracedElement>,
    pub gamma: Vec<TracedElement>,
    pub delta: Vec<TracedElement>,
    pub report: GundyReport,
}

impl Gundy {
    fn total(v: &[TracedElement], alg: &TracedAlgebra) -> TracedElement {
        v.iter().fold(alg.zero(), |acc, t| acc.add(t))
    }

    /// `(α, β, γ, δ)` as elements.
    pub fn parts(&self) -> [TracedElement; 4] {
        let alg = self.alpha[0].algebra();
        [
            Self::total(&self.alpha, alg),
            Self::total(&self.beta, alg),
            Self::total(&self.gamma, alg),
            Self::total(&self.delta, alg),
        ]
    }
}

/// Normalized constants of the decomposition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GundyReport {
    pub lambda: f64,
    pub x_l1: f64,
    /// `‖α‖_2² / (λ‖x‖_1)`.
    pub c_alpha: f64,
    /// `Σ ‖β_k‖_1 / ‖x‖_1`.
    pub c_beta: f64,
    /// `τ(∨ right supports of γ_k) · λ / ‖x‖_1`.
    pub c_gamma: f64,
    /// `τ(∨ left supports of δ_k) · λ / ‖x‖_1`.
    pub c_delta: f64,
    /// `max |x − (α+β+γ+δ)|`.
    pub reconstruction_error: f64,
}

pub const GUNDY_BOUNDS: [f64; 4] = [2.0, 4.0, 1.0, 1.0];

impl GundyReport {
    pub fn constants(&self) -> [f64; 4] {
        [self.c_alpha, self.c_beta, self.c_gamma, self.c_delta]
    }

    pub fn within_bounds(&self, slack: f64) -> bool {
        self.constants().iter().zip(GUNDY_BOUNDS).all(|(c, b)| *c <= b * (1.0 + slack))
    }
}

/// Decomposition of a self-adjoint `x` at level `λ` from the Cuculescu
/// projections `q_k = q_{k−1} χ_{[0,λ]}(q_{k−1} E_k|x| q_{k−1})`.
pub fn gundy_decompose(x: &TracedElement, filt: &Filtration, lambda: f64) -> Result<Gundy> {
    if !x.is_self_adjoint(1e-12) {
        return input("Gundy decomposition needs a self-adjoint element");
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return input(format!("λ must be positive, got {lambda}"));
    }
    let alg = filt.algebra();
    let d = differences(x, filt)?;
    let absx = x.abs();
    let one = alg.identity();
    let mut q_prev = one.clone();
    let (mut alpha, mut beta, mut gamma, mut delta) = (vec![], vec![], vec![], vec![]);
    for (k, dk) in d.d.iter().enumerate() {
        let y = filt.cond_exp(k, &absx)?;
        let qyq = q_prev.mul(&y).mul(&q_prev).real_part();
        let tol = 1e-12 * lambda.max(y.max_abs());
        let q = q_prev.mul(&qyq.hermitian_fn(|l| if l <= lambda + tol { 1.0 } else { 0.0 })?).real_part();
        let qdq = q.mul(dk).mul(&q);
        let pdp = q_prev.mul(dk).mul(&q_prev);
        let comp = one.sub(&q_prev);
        let (a, b) = if k == 0 {
            (qdq.clone(), pdp.sub(&qdq))
        } else {
            let a = qdq.sub(&filt.cond_exp(k - 1, &qdq)?);
            let mid = pdp.sub(&qdq);
            let b = mid.sub(&filt.cond_exp(k - 1, &mid)?);
            (a, b)
        };
        alpha.push(a);
        beta.push(b);
        gamma.push(dk.mul(&comp));
        delta.push(comp.mul(dk).mul(&q_prev));
        q_prev = q;
    }

    let x_l1 = x.p_norm(1.0);
    let mut report = GundyReport { lambda, x_l1, ..Default::default() };
    let sum_all = |v: &[TracedElement]| v.iter().fold(alg.zero(), |acc, t| acc.add(t));
    let recon = sum_all(&alpha).add(&sum_all(&beta)).add(&sum_all(&gamma)).add(&sum_all(&delta));
    report.reconstruction_error = recon.max_abs_diff(x);
    if x_l1 > 0.0 {
        let a2 = sum_all(&alpha).p_norm(2.0);
        report.c_alpha = a2 * a2 / (lambda * x_l1);
        report.c_beta = beta.iter().map(|b| b.p_norm(1.0)).sum::<f64>() / x_l1;
        let support_trace = |s: TracedElement| -> f64 {
            let s = clip_psd(&s);
            let scale = s.max_abs();
            if scale == 0.0 {
                return 0.0;
            }
            s.hermitian_fn(|l| if l > 1e-10 * scale { 1.0 } else { 0.0 }).expect("self-adjoint").trace().re
        };
        let gs = gamma.iter().fold(alg.zero(), |acc, g| acc.add(&g.abs_sq()));
        let ds = delta.iter().fold(alg.zero(), |acc, g| acc.add(&g.abs_sq_row()));
        report.c_gamma = support_trace(gs) * lambda / x_l1;
        report.c_delta = support_trace(ds) * lambda / x_l1;
    }
    Ok(Gundy { alpha, beta, gamma, delta, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncalg::Levels;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_cell() -> (TracedAlgebra, Filtration) {
        let a = TracedAlgebra::commutative(&[1.0; 4]).unwrap();
        let f = Filtration::new(&a, Levels::Atomic { labels: vec![vec![0, 0, 1, 1], vec![0, 1, 2, 3]] }).unwrap();
        (a, f)
    }

    #[test]
    fn hand_computed_differences() {
        let (a, f) = two_cell();
        let x = TracedElement::diagonal(&a, &[1.0, 3.0, 5.0, 7.0]).unwrap();
        let d = differences(&x, &f).unwrap();
        assert_eq!(d.terms()[0], TracedElement::diagonal(&a, &[2.0, 2.0, 6.0, 6.0]).unwrap());
        assert_eq!(d.terms()[1], TracedElement::diagonal(&a, &[-1.0, 1.0, -1.0, 1.0]).unwrap());
        assert!(DifferenceSequence::new(&f, d.terms().to_vec()).is_ok());
    }

    #[test]
    fn sign_transforms_are_l2_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let alg = TracedAlgebra::matrix(6, 0.5).unwrap();
        let f = Filtration::new(&alg, Levels::Corner { cuts: vec![1, 3, 4, 6] }).unwrap();
        let x = alg.gaussian(&mut rng);
        let d = differences(&x, &f).unwrap();
        assert!(d.sum().max_abs_diff(&x) < 1e-12);
        for bits in 0..16u32 {
            let s: Vec<i8> = (0..4).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect();
            let y = transform_signs(&d, &s).unwrap();
            assert!((y.p_norm(2.0) - x.p_norm(2.0)).abs() < 1e-12 * x.p_norm(2.0));
        }
        assert!(transform_signs(&d, &[1, 1, 1, 1]).unwrap().max_abs_diff(&x) < 1e-12);
        assert!(transform_signs(&d, &[1, 0, 1, 1]).is_err());
    }

    #[test]
    fn generalized_transform_with_unit_multipliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let alg = TracedAlgebra::matrix(4, 1.0).unwrap();
        let f = Filtration::new(&alg, Levels::Corner { cuts: vec![2, 4] }).unwrap();
        let x = alg.gaussian(&mut rng);
        let d = differences(&x, &f).unwrap();
        let n = TracedAlgebra::matrix(2, 0.5).unwrap();
        let y = transform_general(&d, &[n.identity(), n.identity()]).unwrap();
        assert!(y.max_abs_diff(&x.tensor(&n.identity())) < 1e-12);
        let bad = TracedAlgebra::matrix(2, 1.0).unwrap();
        assert!(transform_general(&d, &[bad.identity(), bad.identity()]).is_err());
    }

    #[test]
    fn square_functions_trace_to_l2() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let alg = TracedAlgebra::matrix(5, 1.0).unwrap();
        let f = Filtration::new(&alg, Levels::Corner { cuts: vec![2, 3, 5] }).unwrap();
        let x = alg.gaussian(&mut rng);
        let (c, r) = square_functions(&differences(&x, &f).unwrap());
        let l2 = x.p_norm(2.0).powi(2);
        assert!((c.trace().re - l2).abs() < 1e-10 * l2);
        assert!((r.trace().re - l2).abs() < 1e-10 * l2);
    }

    #[test]
    fn dual_doob_rejects_indefinite_input() {
        let (a, f) = two_cell();
        let bad = TracedElement::diagonal(&a, &[1.0, -1.0, 0.0, 0.0]).unwrap();
        assert!(dual_doob_sum(&[bad], &f).is_err());
        let good = TracedElement::diagonal(&a, &[1.0, 3.0, 0.0, 0.0]).unwrap();
        let s = dual_doob_sum(std::slice::from_ref(&good), &f).unwrap();
        assert!((s.trace().re - good.trace().re).abs() < 1e-14);
    }

    #[test]
    fn column_embedding_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let alg = TracedAlgebra::from_pairs(&[(3, 0.4), (2, 1.5)]).unwrap();
        let xs: Vec<_> = (0..3).map(|_| alg.gaussian(&mut rng)).collect();
        let col = column_embed(&xs).unwrap();
        let sq = xs.iter().fold(alg.zero(), |a, x| a.add(&x.abs_sq())).psd_sqrt().unwrap();
        for p in [1.0, 2.0, 3.5] {
            assert!((col.p_norm(p) - sq.p_norm(p)).abs() < 1e-10 * sq.p_norm(p));
        }
    }

    #[test]
    fn gundy_trivial_cases() {
        let (a, f) = two_cell();
        let x = TracedElement::diagonal(&a, &[1.0, -3.0, 5.0, 0.5]).unwrap();
        let g = gundy_decompose(&x, &f, 10.0).unwrap();
        let [al, be, ga, de] = g.parts();
        assert!(al.max_abs_diff(&x) < 1e-14 && be.max_abs() < 1e-14 && ga.max_abs() == 0.0 && de.max_abs() == 0.0);
        let z = gundy_decompose(&a.zero(), &f, 1.0).unwrap();
        assert_eq!(z.report.constants(), [0.0; 4]);
    }

    #[test]
    fn gundy_dyadic_crossing() {
        let a = TracedAlgebra::commutative(&[0.25; 4]).unwrap();
        let f = Filtration::dyadic(&a, 2).unwrap();
        let x = TracedElement::diagonal(&a, &[8.0, 0.0, 1.0, -1.0]).unwrap();
        let g = gundy_decompose(&x, &f, 1.5).unwrap();
        assert!(g.report.reconstruction_error < 1e-12);
        assert!(g.report.within_bounds(1e-12), "{:?}", g.report);
        assert!(g.report.c_gamma > 0.0);
    }
}
