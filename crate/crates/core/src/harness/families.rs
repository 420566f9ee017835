//! Deterministic extremal families and growth curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{corner_dst_ratio, singular_sequence};
use crate::error::Result;
use crate::hardy::{self, DiscreteHardyKind, HardyKind};
use crate::martingale;
use crate::ncalg::{Filtration, Levels, TracedAlgebra, TracedElement};
use crate::spaces::{self, SpaceSpec};
use crate::stepfn::{safe_ratio, PiecewiseLogPoly, StepFunction};
use crate::triangular::{self, ls_slope};

pub const FAMILY_PIECES: usize = 512;
pub const FAMILY_FLOOR: f64 = 1e-30;
/// Exponents of the classical-versus-distributional curves.
pub const CURVE_PS: [f64; 7] = [2.0, 5.0, 10.0, 20.0, 30.0, 50.0, 100.0];
pub const CURVE_SIZE: usize = 256;
pub const GROWTH_SIZES: [usize; 3] = [16, 64, 256];

fn geometric(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..=n).map(|i| (la + (lb - la) * i as f64 / n as f64).exp()).collect()
}

/// Lower step approximation of `t^{−1/p+ε}` on `(0, 1)`.
pub fn c_family(p: f64, eps: f64) -> Result<StepFunction> {
    let a = 1.0 / p - eps;
    let b = geometric(FAMILY_FLOOR, 1.0, FAMILY_PIECES);
    let mut pieces = vec![(b[0], b[0].powf(-a))];
    pieces.extend(b.windows(2).map(|w| (w[1] - w[0], w[1].powf(-a))));
    StepFunction::new(pieces)
}

/// Step approximation of `t^{−1/p−ε}` on `(1, T)`, zero elsewhere.
pub fn cstar_family(p: f64, eps: f64, t_max: f64) -> Result<PiecewiseLogPoly> {
    let a = 1.0 / p + eps;
    let g = geometric(1.0, t_max, FAMILY_PIECES);
    let mut breaks = vec![0.0];
    breaks.extend(&g);
    let mut values = vec![0.0];
    values.extend(g.windows(2).map(|w| w[1].powf(-a)));
    PiecewiseLogPoly::piecewise_constant(&breaks, &values)
}

/// `‖Cf‖_p / ‖f‖_p` on the extremal family.
pub fn c_family_ratio(p: f64, eps: f64) -> Result<f64> {
    let f = c_family(p, eps)?;
    let num = spaces::norm_plp(&hardy::hardy_transform(&f, HardyKind::C)?, &SpaceSpec::Lp(p))?;
    Ok(num / spaces::norm(&f, &SpaceSpec::Lp(p)))
}

/// `‖C*f‖_p / ‖f‖_p` on the dual family.
pub fn cstar_family_ratio(p: f64, eps: f64, t_max: f64) -> Result<f64> {
    let f = cstar_family(p, eps, t_max)?;
    let num = spaces::norm_plp(&hardy::apply(&f, HardyKind::Cstar)?, &SpaceSpec::Lp(p))?;
    Ok(num / spaces::norm_plp(&f, &SpaceSpec::Lp(p))?)
}

/// An `(x, y)` curve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Curve {
    pub fn to_csv(&self, xname: &str, yname: &str) -> String {
        let mut s = format!("{xname},{yname}\n");
        for (x, y) in self.x.iter().zip(&self.y) {
            s.push_str(&format!("{x},{y:.12}\n"));
        }
        s
    }
}

/// The Hilbert surrogate `A_n` as a single-block element of `M_n`.
pub fn hilbert_element(n: usize) -> Result<TracedElement> {
    let alg = TracedAlgebra::matrix(n, 1.0)?;
    TracedElement::from_real(&alg, vec![triangular::hilbert_matrix(n)])
}

fn singleton_cuts(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

/// Classical and distributional ratios of the corner split of `A_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: usize,
    /// `‖P(A_n)‖_∞ / ‖A_n‖_∞`.
    pub classical: f64,
    /// `max_j s_j(P(A_n)) / (S_d s(A_n))_j`.
    pub distributional: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Growth {
    pub rows: Vec<GrowthRow>,
    /// Slope of `classical` against `log n`.
    pub classical_slope: f64,
}

pub fn corner_growth(sizes: &[usize]) -> Result<Growth> {
    let rows = sizes
        .par_iter()
        .map(|&n| {
            let a = hilbert_element(n)?;
            let s = triangular::corner_split(&a, &singleton_cuts(n))?;
            Ok(GrowthRow {
                n,
                classical: safe_ratio(s.truncated.op_norm(), a.op_norm()),
                distributional: corner_dst_ratio(&a, &s.truncated).0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.classical).collect();
    Ok(Growth { classical_slope: ls_slope(&xs, &ys), rows })
}

/// `ST`, `MT`, `DST`, `DMT` curves over `ps` on the corner split of `A_n`.
///
/// `ST(p) = ‖P(A)‖_p/‖A‖_p`; `MT(p)` uses the alternating transform of
/// `A` along the singleton corner filtration; the distributional columns
/// compare singular values against `S_d`.
pub fn classical_curves(n: usize, ps: &[f64]) -> Result<Vec<(String, Curve)>> {
    let a = hilbert_element(n)?;
    let cuts = singleton_cuts(n);
    let split = triangular::corner_split(&a, &cuts)?;
    let filt = Filtration::new(a.algebra(), Levels::Corner { cuts })?;
    let d = martingale::differences(&a, &filt)?;
    let signs: Vec<i8> = (0..d.len()).map(|k| if k % 2 == 0 { 1 } else { -1 }).collect();
    let t = martingale::transform_signs(&d, &signs)?;

    let schatten = |m: &TracedElement| -> Vec<f64> { singular_sequence(m) };
    let (sa, sp, st) = (schatten(&a), schatten(&split.truncated), schatten(&t));
    let pnorm = |s: &[f64], p: f64| -> f64 {
        let m = s.iter().copied().fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        m * s.iter().map(|v| (v / m).powf(p)).sum::<f64>().powf(1.0 / p)
    };
    let sd = hardy::hardy_transform_seq(&sa, DiscreteHardyKind::Sd);
    let seq_ratio = |s: &[f64]| s.iter().zip(&sd).map(|(a, b)| safe_ratio(*a, *b)).fold(0.0, f64::max);
    let (dst, dmt) = (seq_ratio(&sp), seq_ratio(&st));

    let curve = |f: &dyn Fn(f64) -> f64| Curve { x: ps.to_vec(), y: ps.iter().map(|&p| f(p)).collect() };
    Ok(vec![
        ("ST".to_string(), curve(&|p| pnorm(&sp, p) / pnorm(&sa, p))),
        ("MT".to_string(), curve(&|p| pnorm(&st, p) / pnorm(&sa, p))),
        ("DST".to_string(), curve(&|_| dst)),
        ("DMT".to_string(), curve(&|_| dmt)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_family_approaches_conjugate_exponent() {
        let r: Vec<f64> = [0.1, 0.01, 0.001].iter().map(|&e| c_family_ratio(2.0, e).unwrap()).collect();
        assert!(r[0] < r[1] && r[1] <= r[2] + 1e-9, "{r:?}");
        assert!(r[2] >= 1.8 && r[2] <= 2.0, "{r:?}");
    }

    #[test]
    fn cstar_family_reaches_band() {
        let r = cstar_family_ratio(2.0, 0.01, 1e4).unwrap();
        assert!(r >= 1.7 && r <= 2.0, "{r}");
    }

    #[test]
    fn small_curves_are_well_formed() {
        let c = classical_curves(16, &[2.0, 4.0]).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|(_, c)| c.y.iter().all(|v| v.is_finite() && *v > 0.0)));
        assert_eq!(c[2].1.y[0], c[2].1.y[1]);
    }
}
