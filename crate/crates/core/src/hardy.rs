//! Cesàro `C`, dual Cesàro `C*` and Calderón `S = C + C*` operators, in
//! continuous form on step functions and in discrete form on sequences.

use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Result};
use crate::stepfn::{PiecewiseLogPoly, StepFunction, Terms};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HardyKind {
    C,
    Cstar,
    S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscreteHardyKind {
    Cd,
    CdStar,
    Sd,
}

/// Exact image of a step function.
pub fn hardy_transform(f: &StepFunction, kind: HardyKind) -> Result<PiecewiseLogPoly> {
    apply(&PiecewiseLogPoly::from_step(f), kind)
}

/// Exact image of any piecewise-constant function (not necessarily
/// decreasing).
pub fn apply(f: &PiecewiseLogPoly, kind: HardyKind) -> Result<PiecewiseLogPoly> {
    match kind {
        HardyKind::C => cesaro(f),
        HardyKind::Cstar => dual_cesaro(f),
        HardyKind::S => {
            let (c, cs) = calderon_parts(f)?;
            Ok(c.add(&cs))
        }
    }
}

/// The two summands of `S f`, kept apart for inspection.
pub fn calderon_parts(f: &PiecewiseLogPoly) -> Result<(PiecewiseLogPoly, PiecewiseLogPoly)> {
    Ok((cesaro(f)?, dual_cesaro(f)?))
}

/// `(Cf)(t) = t⁻¹ ∫_0^t f`; defined for every log-polynomial whose
/// Cesàro image stays inside the monomial box.
pub fn cesaro(f: &PiecewiseLogPoly) -> Result<PiecewiseLogPoly> {
    f.cesaro()
}

/// `(C*f)(t) = ∫_t^∞ f(s) ds/s` for piecewise-constant `f` vanishing at ∞.
pub fn dual_cesaro(f: &PiecewiseLogPoly) -> Result<PiecewiseLogPoly> {
    if !f.is_piecewise_constant() {
        return input("C* is implemented on piecewise-constant functions only");
    }
    let breaks = f.breaks();
    let vals: Vec<f64> = f.terms().iter().map(|t| t.get(0, 0)).collect();
    let n = vals.len();
    if vals[n - 1] != 0.0 {
        return domain("not in Λ_log: nonzero constant tail makes C* diverge");
    }
    let mut terms = vec![Terms::default(); n];
    let mut rest = 0.0;
    for i in (0..n - 1).rev() {
        let (a, b, v) = (breaks[i], breaks[i + 1], vals[i]);
        let mut t = Terms::default();
        t.set(0, 0, v * b.ln() + rest);
        t.set(0, 1, -v);
        terms[i] = t;
        if a > 0.0 {
            rest += v * (b / a).ln();
        }
    }
    PiecewiseLogPoly::new(breaks.to_vec(), terms)
}

/// Pointwise square of a transform, `(Tf)²`.
pub fn square(g: &PiecewiseLogPoly) -> Result<PiecewiseLogPoly> {
    g.square()
}

/// Discrete Hardy operators on a finite sequence (zeros beyond its end).
pub fn hardy_transform_seq(a: &[f64], kind: DiscreteHardyKind) -> Vec<f64> {
    let n = a.len();
    let mut cd = vec![0.0; n];
    let mut acc = 0.0;
    for (i, &x) in a.iter().enumerate() {
        acc += x;
        cd[i] = acc / (i as f64 + 1.0);
    }
    let mut cds = vec![0.0; n];
    let mut tail = 0.0;
    for i in (0..n).rev() {
        tail += a[i] / (i as f64 + 1.0);
        cds[i] = tail;
    }
    match kind {
        DiscreteHardyKind::Cd => cd,
        DiscreteHardyKind::CdStar => cds,
        DiscreteHardyKind::Sd => cd.iter().zip(&cds).map(|(x, y)| x + y).collect(),
    }
}

/// `∫_0^t f(s) log(t/s) ds` for a step function, in closed form.
pub fn log_kernel_integral(f: &StepFunction, t: f64) -> f64 {
    // ∫_a^b log(t/s) ds = [s (1 + log(t/s))]_a^b
    let prim = |s: f64| if s == 0.0 { 0.0 } else { s * (1.0 + (t / s).ln()) };
    let mut acc = 0.0;
    let mut start = 0.0;
    for &(len, v) in f.pieces() {
        if start >= t {
            break;
        }
        let end = (start + len).min(t);
        acc += v * (prim(end) - prim(start));
        start += len;
    }
    acc
}

/// `⟨f, g⟩ = ∫_0^∞ f g` for a piecewise-constant `f` and a log-polynomial
/// `g`, exact piece by piece.
pub fn pairing(f: &PiecewiseLogPoly, g: &PiecewiseLogPoly) -> Result<f64> {
    let mut acc = 0.0;
    let fb = f.breaks();
    for (i, t) in f.terms().iter().enumerate() {
        let v = t.get(0, 0);
        if v != 0.0 {
            acc += v * g.integral(fb[i], fb[i + 1])?;
        }
    }
    Ok(acc)
}
