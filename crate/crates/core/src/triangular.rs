//! Triangular truncations, the corner splitting of a matrix along a
//! corner filtration, and the Hilbert-matrix growth demonstration.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, internal, Result};
use crate::martingale;
use crate::ncalg::{Filtration, Levels, Mat, TracedElement, C64};
use crate::stepfn::StepFunction;

/// Tolerance for the exact corner identities.
pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TruncMode {
    /// Keep entries `(i, j)` with `j > i`.
    StrictUpper,
    /// Keep block `(k, l)` iff `k ≤ l`; blocks are `[cuts[k-1], cuts[k])`.
    BlockUpper(Vec<usize>),
}

fn single(a: &TracedElement) -> Result<&Mat> {
    match a.blocks() {
        [m] => Ok(m),
        _ => input("truncation needs a single square block"),
    }
}

fn block_ranges(cuts: &[usize], n: usize) -> Result<Vec<(usize, usize)>> {
    if cuts.is_empty() || cuts[0] == 0 || cuts.windows(2).any(|w| w[0] >= w[1]) || *cuts.last().unwrap() != n {
        return input(format!("cuts must increase strictly from a positive value to {n}"));
    }
    let mut prev = 0;
    Ok(cuts
        .iter()
        .map(|&c| {
            let r = (prev, c);
            prev = c;
            r
        })
        .collect())
}

fn keep_blocks(m: &Mat, ranges: &[(usize, usize)], keep: impl Fn(usize, usize) -> bool) -> Mat {
    let n = m.nrows();
    let mut out = Mat::zeros(n, n);
    for (k, &(r0, r1)) in ranges.iter().enumerate() {
        for (l, &(c0, c1)) in ranges.iter().enumerate() {
            if keep(k, l) {
                out.view_mut((r0, c0), (r1 - r0, c1 - c0)).copy_from(&m.view((r0, c0), (r1 - r0, c1 - c0)));
            }
        }
    }
    out
}

pub fn truncate(a: &TracedElement, mode: &TruncMode) -> Result<TracedElement> {
    let m = single(a)?;
    let n = m.nrows();
    let out = match mode {
        TruncMode::StrictUpper => Mat::from_fn(n, n, |i, j| if j > i { m[(i, j)] } else { C64::new(0.0, 0.0) }),
        TruncMode::BlockUpper(cuts) => {
            let ranges = block_ranges(cuts, n)?;
            let upper = keep_blocks(m, &ranges, |k, l| k <= l);
            let strict = keep_blocks(m, &ranges, |k, l| k < l);
            let diag = keep_blocks(m, &ranges, |k, l| k == l);
            if (&strict + &diag - &upper).iter().any(|z| z.norm() != 0.0) {
                return internal("block-upper truncation does not split into strict and diagonal parts");
            }
            let (nu, ns, nd) = (op_norm(&upper), op_norm(&strict), op_norm(&diag));
            if nu > (ns + nd) * (1.0 + 1e-10) + 1e-300 {
                return internal(format!("triangle bound violated: {nu} > {ns} + {nd}"));
            }
            upper
        }
    };
    TracedElement::new(a.algebra(), vec![out])
}

fn op_norm(m: &Mat) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Columns-of-blocks splitting `a_k = a(p_{k+1} − p_k)` with its images
/// under the corner conditional expectations.
#[derive(Clone, Debug)]
pub struct CornerSplit {
    pub cuts: Vec<usize>,
    pub columns: Vec<TracedElement>,
    pub projected: Vec<TracedElement>,
    /// `P(a)`, the block-upper truncation.
    pub truncated: TracedElement,
    /// `max |Σ a_k a_k* − aa*|`.
    pub column_identity_error: f64,
    /// `max |Σ E_k(a_k) E_k(a_k)* − P(a)P(a)*|`.
    pub projected_identity_error: f64,
    /// `μ((Σ E_k(a_k) E_k(a_k)*)^{1/2})`.
    pub mu_lhs: StepFunction,
    /// `μ(|P(a)*|)`.
    pub mu_rhs: StepFunction,
}

/// Splits `a` along the corner filtration with the given cuts and asserts
/// both identities to `IDENTITY_TOL` (relative).
pub fn corner_split(a: &TracedElement, cuts: &[usize]) -> Result<CornerSplit> {
    let m = single(a)?;
    let n = m.nrows();
    let ranges = block_ranges(cuts, n)?;
    let filt = Filtration::new(a.algebra(), Levels::Corner { cuts: cuts.to_vec() })?;
    let mut columns = Vec::with_capacity(ranges.len());
    for &(c0, c1) in &ranges {
        let mut col = Mat::zeros(n, n);
        col.view_mut((0, c0), (n, c1 - c0)).copy_from(&m.view((0, c0), (n, c1 - c0)));
        columns.push(TracedElement::new(a.algebra(), vec![col])?);
    }
    let projected = martingale::stein_map(&columns, &filt)?;
    let truncated = truncate(a, &TruncMode::BlockUpper(cuts.to_vec()))?;

    let sum_rows = |xs: &[TracedElement]| xs.iter().fold(a.algebra().zero(), |acc, x| acc.add(&x.abs_sq_row()));
    let lhs1 = sum_rows(&columns);
    let rhs1 = a.abs_sq_row();
    let lhs2 = sum_rows(&projected);
    let rhs2 = truncated.abs_sq_row();
    let scale = rhs1.max_abs().max(1.0);
    let e1 = lhs1.max_abs_diff(&rhs1);
    let e2 = lhs2.max_abs_diff(&rhs2);
    if e1 > IDENTITY_TOL * scale || e2 > IDENTITY_TOL * scale {
        return internal(format!("corner identities off by {e1:e} and {e2:e}"));
    }
    let mu_lhs = lhs2.psd_sqrt()?.mu();
    let mu_rhs = truncated.adjoint().abs().mu();
    Ok(CornerSplit {
        cuts: cuts.to_vec(),
        columns,
        projected,
        truncated,
        column_identity_error: e1,
        projected_identity_error: e2,
        mu_lhs,
        mu_rhs,
    })
}

/// `A_n` with entries `1/(i − j)` off the diagonal.
pub fn hilbert_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 / (i as f64 - j as f64) })
}

fn real_op_norm(m: &DMatrix<f64>) -> f64 {
    let g = m.transpose() * m;
    SymmetricEigen::new(g).eigenvalues.iter().copied().fold(0.0, f64::max).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HilbertRow {
    pub n: usize,
    pub opnorm_full: f64,
    pub opnorm_truncated: f64,
    pub log_n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HilbertDemo {
    pub rows: Vec<HilbertRow>,
    /// Least-squares slope of `opnorm_truncated` against `log n`.
    pub slope: f64,
}

impl HilbertDemo {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,opnorm_full,opnorm_truncated,log_n\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:.12},{:.12},{:.12}\n", r.n, r.opnorm_full, r.opnorm_truncated, r.log_n));
        }
        s
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Operator norms of `A_n` and its strict upper truncation for each size.
pub fn hilbert_demo(sizes: &[usize]) -> Result<HilbertDemo> {
    if sizes.iter().any(|&n| n < 2) {
        return input("Hilbert demo sizes must be at least 2");
    }
    if sizes.len() < 2 {
        return input("a slope needs at least two sizes");
    }
    let rows: Vec<HilbertRow> = sizes
        .par_iter()
        .map(|&n| {
            let a = hilbert_matrix(n);
            let u = a.upper_triangle() - DMatrix::from_diagonal(&a.diagonal());
            HilbertRow { n, opnorm_full: real_op_norm(&a), opnorm_truncated: real_op_norm(&u), log_n: (n as f64).ln() }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.log_n).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.opnorm_truncated).collect();
    Ok(HilbertDemo { slope: ls_slope(&xs, &ys), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncalg::TracedAlgebra;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn real(n: usize, v: &[f64]) -> TracedElement {
        TracedElement::from_real(&TracedAlgebra::matrix(n, 1.0).unwrap(), vec![DMatrix::from_row_slice(n, n, v)]).unwrap()
    }

    #[test]
    fn truncation_examples() {
        let a = real(2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(truncate(&a, &TruncMode::StrictUpper).unwrap(), real(2, &[0.0, 2.0, 0.0, 0.0]));
        assert_eq!(truncate(&a, &TruncMode::BlockUpper(vec![1, 2])).unwrap(), real(2, &[1.0, 2.0, 0.0, 4.0]));
        assert_eq!(truncate(&a, &TruncMode::BlockUpper(vec![2])).unwrap(), a);
        assert!(truncate(&a, &TruncMode::BlockUpper(vec![1])).is_err());
    }

    #[test]
    fn two_by_two_split() {
        let a = real(2, &[1.0, 2.0, 3.0, 4.0]);
        let s = corner_split(&a, &[1, 2]).unwrap();
        assert_eq!(s.columns[0], real(2, &[1.0, 0.0, 3.0, 0.0]));
        assert_eq!(s.projected[0], real(2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(s.projected[1], real(2, &[0.0, 2.0, 0.0, 4.0]));
    }

    #[test]
    fn random_split_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let alg = TracedAlgebra::matrix(8, 1.0).unwrap();
        let a = alg.gaussian(&mut rng);
        let s = corner_split(&a, &[2, 4, 6, 8]).unwrap();
        assert!(s.column_identity_error < 1e-12 && s.projected_identity_error < 1e-12);
        let gap = crate::stepfn::domination_ratio(&s.mu_lhs, &s.mu_rhs, crate::stepfn::DominationMode::Pointwise, 1e-12);
        assert!((gap.ratio - 1.0).abs() < 1e-8);
    }

    #[test]
    fn hilbert_small_case() {
        let u = hilbert_matrix(2).upper_triangle() - DMatrix::from_diagonal(&hilbert_matrix(2).diagonal());
        assert_eq!(u, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 0.0, 0.0]));
        let d = hilbert_demo(&[2, 16, 64]).unwrap();
        assert!((d.rows[0].opnorm_truncated - 1.0).abs() < 1e-12);
        assert!(d.rows.iter().all(|r| r.opnorm_full <= std::f64::consts::PI + 1e-6));
        assert!(d.to_csv().lines().count() == 4);
    }
}
