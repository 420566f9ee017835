use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Error, Result};
use crate::stepfn::StepFunction;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;

/// Relative cut below which singular values count as zero.
pub const RANK_CUT: f64 = 1e-14;
/// Relative tolerance for the Hermitian symmetrization guard.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

/// `⊕_j M_{d_j}` with trace `τ(x) = Σ_j w_j Tr(x_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TracedAlgebra {
    blocks: Vec<Block>,
}

impl TracedAlgebra {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return input("an algebra needs at least one block");
        }
        for b in &blocks {
            if b.dim == 0 {
                return input("block dimensions must be positive");
            }
            if !(b.weight > 0.0 && b.weight.is_finite()) {
                return input(format!("block weights must be positive and finite, got {}", b.weight));
            }
        }
        Ok(Self { blocks })
    }

    /// Shorthand for `new` from `(dim, weight)` pairs.
    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(dim, weight)| Block { dim, weight }).collect())
    }

    /// `M_n` with trace `w·Tr`.
    pub fn matrix(n: usize, w: f64) -> Result<Self> {
        Self::from_pairs(&[(n, w)])
    }

    /// `ℓ_∞^n` with the given atom weights.
    pub fn commutative(weights: &[f64]) -> Result<Self> {
        Self::new(weights.iter().map(|&weight| Block { dim: 1, weight }).collect())
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn total_trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.dim as f64 * b.weight).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|b| b.dim == 1)
    }

    /// All pairs of blocks, `(d_a d_b, w_a w_b)`, in lexicographic order.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut blocks = Vec::with_capacity(self.blocks.len() * other.blocks.len());
        for a in &self.blocks {
            for b in &other.blocks {
                blocks.push(Block { dim: a.dim * b.dim, weight: a.weight * b.weight });
            }
        }
        Self { blocks }
    }

    /// Same blocks with every weight multiplied by `s > 0`.
    pub fn rescaled(&self, s: f64) -> Result<Self> {
        Self::new(self.blocks.iter().map(|b| Block { dim: b.dim, weight: b.weight * s }).collect())
    }

    pub fn zero(&self) -> TracedElement {
        TracedElement {
            alg: self.clone(),
            mats: self.blocks.iter().map(|b| Mat::zeros(b.dim, b.dim)).collect(),
        }
    }

    pub fn identity(&self) -> TracedElement {
        TracedElement {
            alg: self.clone(),
            mats: self.blocks.iter().map(|b| Mat::identity(b.dim, b.dim)).collect(),
        }
    }

    /// i.i.d. standard complex Gaussian entries.
    pub fn gaussian<R: Rng + ?Sized>(&self, rng: &mut R) -> TracedElement {
        let mats = self
            .blocks
            .iter()
            .map(|b| {
                Mat::from_fn(b.dim, b.dim, |_, _| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
            })
            .collect();
        TracedElement { alg: self.clone(), mats }
    }

    /// Real Gaussian entries (self-adjoint after symmetrization by callers).
    pub fn gaussian_real<R: Rng + ?Sized>(&self, rng: &mut R) -> TracedElement {
        let mats = self
            .blocks
            .iter()
            .map(|b| Mat::from_fn(b.dim, b.dim, |_, _| C64::new(rng.sample(StandardNormal), 0.0)))
            .collect();
        TracedElement { alg: self.clone(), mats }
    }
}

/// A block-diagonal element of a [`TracedAlgebra`].
#[derive(Clone, Debug, PartialEq)]
pub struct TracedElement {
    alg: TracedAlgebra,
    mats: Vec<Mat>,
}

impl TracedElement {
    pub fn new(alg: &TracedAlgebra, mats: Vec<Mat>) -> Result<Self> {
        if mats.len() != alg.blocks.len() {
            return input(format!("expected {} blocks, got {}", alg.blocks.len(), mats.len()));
        }
        for (m, b) in mats.iter().zip(&alg.blocks) {
            if m.nrows() != b.dim || m.ncols() != b.dim {
                return input(format!("block of shape {}x{} does not match dimension {}", m.nrows(), m.ncols(), b.dim));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return input("non-finite matrix entry");
            }
        }
        Ok(Self { alg: alg.clone(), mats })
    }

    /// Real matrices, one per block.
    pub fn from_real(alg: &TracedAlgebra, mats: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::new(alg, mats.into_iter().map(|m| m.map(|v| C64::new(v, 0.0))).collect())
    }

    /// Concatenated diagonals across blocks.
    pub fn diagonal(alg: &TracedAlgebra, values: &[f64]) -> Result<Self> {
        let total: usize = alg.blocks.iter().map(|b| b.dim).sum();
        if values.len() != total {
            return input(format!("expected {total} diagonal entries, got {}", values.len()));
        }
        let mut mats = Vec::with_capacity(alg.blocks.len());
        let mut off = 0;
        for b in &alg.blocks {
            let d = DVector::from_iterator(b.dim, values[off..off + b.dim].iter().map(|&v| C64::new(v, 0.0)));
            mats.push(Mat::from_diagonal(&d));
            off += b.dim;
        }
        Self::new(alg, mats)
    }

    pub fn algebra(&self) -> &TracedAlgebra {
        &self.alg
    }

    pub fn blocks(&self) -> &[Mat] {
        &self.mats
    }

    /// The same matrices read in another algebra with identical block dims.
    pub fn with_algebra(&self, alg: &TracedAlgebra) -> Result<Self> {
        Self::new(alg, self.mats.clone())
    }

    fn zip(&self, other: &Self, f: impl Fn(&Mat, &Mat) -> Mat) -> Self {
        assert!(self.same_shape(other), "elements live in different algebras");
        Self { alg: self.alg.clone(), mats: self.mats.iter().zip(&other.mats).map(|(a, b)| f(a, b)).collect() }
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.alg.blocks.len() == other.alg.blocks.len()
            && self.alg.blocks.iter().zip(&other.alg.blocks).all(|(a, b)| a.dim == b.dim)
    }

    pub fn map_blocks(&self, f: impl Fn(&Mat) -> Mat) -> Self {
        Self { alg: self.alg.clone(), mats: self.mats.iter().map(f).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_blocks(|m| m * C64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|m| m.adjoint())
    }

    /// `x*x`.
    pub fn abs_sq(&self) -> Self {
        self.map_blocks(|m| m.adjoint() * m)
    }

    /// `xx*`.
    pub fn abs_sq_row(&self) -> Self {
        self.map_blocks(|m| m * m.adjoint())
    }

    /// `(x + x*)/2`.
    pub fn real_part(&self) -> Self {
        self.map_blocks(|m| (m + m.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.mats.iter().zip(&self.alg.blocks).map(|(m, b)| m.trace() * b.weight).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.mats.iter().flat_map(|m| m.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.sub(&self.adjoint()).max_abs() <= tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    fn hermitian_blocks(&self) -> Result<Vec<SymmetricEigen<C64, nalgebra::Dyn>>> {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        if self.sub(&self.adjoint()).max_abs() > HERMITIAN_TOL * scale.max(1.0) {
            return domain("functional calculus needs a self-adjoint element");
        }
        Ok(self.mats.iter().map(|m| SymmetricEigen::new((m + m.adjoint()) * C64::new(0.5, 0.0))).collect())
    }

    /// Eigenvalues per block, increasing.
    pub fn eigenvalues(&self) -> Result<Vec<Vec<f64>>> {
        Ok(self
            .hermitian_blocks()?
            .into_iter()
            .map(|e| {
                let mut v: Vec<f64> = e.eigenvalues.iter().copied().collect();
                v.sort_by(f64::total_cmp);
                v
            })
            .collect())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.into_iter().flatten().fold(f64::INFINITY, f64::min))
    }

    /// `f(x)` for self-adjoint `x`.
    pub fn hermitian_fn(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let eig = self.hermitian_blocks()?;
        let mats = eig
            .into_iter()
            .map(|e| {
                let d = DVector::from_iterator(e.eigenvalues.len(), e.eigenvalues.iter().map(|&l| C64::new(f(l), 0.0)));
                &e.eigenvectors * Mat::from_diagonal(&d) * e.eigenvectors.adjoint()
            })
            .collect();
        Ok(Self { alg: self.alg.clone(), mats })
    }

    /// Square root of a self-adjoint element, negative eigenvalues clipped.
    pub fn psd_sqrt(&self) -> Result<Self> {
        self.hermitian_fn(|l| l.max(0.0).sqrt())
    }

    /// `|x| = (x*x)^{1/2}`.
    pub fn abs(&self) -> Self {
        self.abs_sq().psd_sqrt().expect("x*x is self-adjoint")
    }

    /// Singular values per block (unsorted).
    pub fn singular_values(&self) -> Vec<Vec<f64>> {
        self.mats.iter().map(|m| m.singular_values().iter().copied().collect()).collect()
    }

    /// Singular value function: each singular value of block `j` is a
    /// piece of length `w_j`; values below `RANK_CUT·max` are dropped.
    pub fn mu(&self) -> StepFunction {
        let sv = self.singular_values();
        let max = sv.iter().flatten().copied().fold(0.0, f64::max);
        let cut = RANK_CUT * max;
        let atoms = sv
            .iter()
            .zip(&self.alg.blocks)
            .flat_map(|(s, b)| s.iter().filter(move |&&v| v > cut).map(move |&v| (b.weight, v)));
        StepFunction::rearrange(atoms).expect("finite singular values")
    }

    /// `‖x‖_∞`.
    pub fn op_norm(&self) -> f64 {
        self.singular_values().into_iter().flatten().fold(0.0, f64::max)
    }

    /// `τ(|x|^p)^{1/p}`, `p = ∞` for the operator norm.
    pub fn p_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.op_norm();
        }
        let sv = self.singular_values();
        let m = sv.iter().flatten().copied().fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        let s: f64 = sv.iter().zip(&self.alg.blocks).map(|(s, b)| b.weight * s.iter().map(|v| (v / m).powf(p)).sum::<f64>()).sum();
        m * s.powf(1.0 / p)
    }

    /// Kronecker product blockwise, living in `A ⊗ B`.
    pub fn tensor(&self, other: &Self) -> Self {
        let alg = self.alg.tensor(&other.alg);
        let mut mats = Vec::with_capacity(alg.blocks.len());
        for a in &self.mats {
            for b in &other.mats {
                mats.push(a.kronecker(b));
            }
        }
        Self { alg, mats }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ElementJson::from(self)).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: ElementJson = serde_json::from_str(s).map_err(|e| Error::Input(format!("element JSON: {e}")))?;
        j.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockJson {
    dim: usize,
    weight: f64,
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

/// Wire format `{"blocks": [{"dim", "weight", "re", "im"}]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementJson {
    blocks: Vec<BlockJson>,
}

impl From<&TracedElement> for ElementJson {
    fn from(x: &TracedElement) -> Self {
        let rows = |m: &Mat, f: fn(&C64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect();
        ElementJson {
            blocks: x
                .mats
                .iter()
                .zip(&x.alg.blocks)
                .map(|(m, b)| BlockJson { dim: b.dim, weight: b.weight, re: rows(m, |z| z.re), im: Some(rows(m, |z| z.im)) })
                .collect(),
        }
    }
}

impl TryFrom<ElementJson> for TracedElement {
    type Error = Error;

    fn try_from(j: ElementJson) -> Result<Self> {
        let alg = TracedAlgebra::new(j.blocks.iter().map(|b| Block { dim: b.dim, weight: b.weight }).collect())?;
        let mut mats = Vec::with_capacity(j.blocks.len());
        for b in &j.blocks {
            let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == b.dim && rows.iter().all(|r| r.len() == b.dim);
            if !shape_ok(&b.re) || b.im.as_ref().is_some_and(|im| !shape_ok(im)) {
                return input(format!("block entries do not match dimension {}", b.dim));
            }
            mats.push(Mat::from_fn(b.dim, b.dim, |i, k| {
                C64::new(b.re[i][k], b.im.as_ref().map_or(0.0, |im| im[i][k]))
            }));
        }
        TracedElement::new(&alg, mats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mu_reference_values() {
        let a = TracedAlgebra::matrix(3, 1.0).unwrap();
        let x = TracedElement::diagonal(&a, &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(x.mu().pieces(), &[(1.0, 3.0), (1.0, 2.0), (1.0, 1.0)]);

        let a = TracedAlgebra::matrix(2, 0.5).unwrap();
        assert_eq!(a.identity().mu().pieces(), &[(1.0, 1.0)]);

        let a = TracedAlgebra::matrix(2, 1.0).unwrap();
        let mut e12 = Mat::zeros(2, 2);
        e12[(0, 1)] = C64::new(1.0, 0.0);
        let x = TracedElement::new(&a, vec![e12]).unwrap();
        assert_eq!(x.mu().pieces(), &[(1.0, 1.0)]);
    }

    #[test]
    fn tensor_reference_values() {
        let a = TracedAlgebra::matrix(2, 1.0).unwrap();
        let b = TracedAlgebra::matrix(3, 1.0).unwrap();
        assert_eq!(a.tensor(&b).blocks(), &[Block { dim: 6, weight: 1.0 }]);
        let sx = TracedElement::from_real(&a, vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])]).unwrap();
        assert_eq!(sx.tensor(&b.identity()).trace().norm(), 0.0);
        assert_eq!(TracedAlgebra::matrix(2, 0.5).unwrap().identity().trace().re, 1.0);
    }

    #[test]
    fn trace_of_powers_matches_mu() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = TracedAlgebra::from_pairs(&[(3, 0.7), (2, 1.9), (1, 0.2)]).unwrap();
        let x = a.gaussian(&mut rng);
        let mu = x.mu();
        for p in [1.0, 2.0, 3.0, 7.5] {
            let lhs = mu.integral_pow(p);
            let rhs = x.p_norm(p).powf(p);
            assert!((lhs - rhs).abs() <= 1e-10 * rhs, "p={p}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = TracedAlgebra::from_pairs(&[(2, 0.5), (1, 3.0)]).unwrap();
        let x = a.gaussian(&mut rng);
        let y = TracedElement::from_json(&x.to_json()).unwrap();
        assert_eq!(x, y);
        assert!(TracedElement::from_json(r#"{"blocks":[{"dim":2,"weight":1,"re":[[1]]}]}"#).is_err());
        assert!(TracedElement::from_json(r#"{"blocks":[{"dim":1,"weight":-1,"re":[[1]]}]}"#).is_err());
    }

    #[test]
    fn hermitian_calculus_rejects_non_normal_input() {
        let a = TracedAlgebra::matrix(2, 1.0).unwrap();
        let x = TracedElement::from_real(&a, vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])]).unwrap();
        assert!(x.hermitian_fn(|l| l).is_err());
        let s = x.abs_sq().psd_sqrt().unwrap();
        assert!(s.max_abs_diff(&x.abs()) < 1e-15);
    }
}
