use serde::{Deserialize, Serialize};

use super::{PiecewiseLogPoly, StepFunction};

/// Anything that can be sampled and prefix-integrated on `(0, ∞)`.
pub trait Profile {
    /// Finite positive breakpoints, increasing.
    fn knots(&self) -> Vec<f64>;
    fn value(&self, t: f64) -> f64;
    fn value_left(&self, t: f64) -> f64;
    fn prefix(&self, t: f64) -> f64;
    /// `∫_0^∞`, possibly infinite.
    fn mass(&self) -> f64;
}

impl Profile for StepFunction {
    fn knots(&self) -> Vec<f64> {
        self.breakpoints().into_iter().filter(|b| b.is_finite()).collect()
    }
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }
    fn value_left(&self, t: f64) -> f64 {
        self.eval_left(t)
    }
    fn prefix(&self, t: f64) -> f64 {
        self.prefix_integral(t)
    }
    fn mass(&self) -> f64 {
        self.total_mass()
    }
}

impl Profile for PiecewiseLogPoly {
    fn knots(&self) -> Vec<f64> {
        self.interior_breaks().to_vec()
    }
    fn value(&self, t: f64) -> f64 {
        self.eval(t)
    }
    fn value_left(&self, t: f64) -> f64 {
        self.eval_left(t)
    }
    fn prefix(&self, t: f64) -> f64 {
        self.prefix_integral(t).unwrap_or(f64::INFINITY)
    }
    fn mass(&self) -> f64 {
        self.integral(0.0, f64::INFINITY).unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DominationMode {
    Pointwise,
    Submajorization,
}

/// Outcome of [`domination_ratio`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub ratio: f64,
    /// Point where the supremum was observed (`∞` for the mass limit).
    pub witness: f64,
    /// Whether the witness value is a left limit.
    pub left_limit: bool,
    pub samples_per_piece: usize,
}

/// `0/0 := 1`, `x/0 := ∞`.
pub fn safe_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Head room used on the unbounded end pieces of the sampling grid.
const HEAD_SPAN: f64 = 1e-6;
const TAIL_SPAN: f64 = 1e4;
const MAX_SAMPLES: usize = 64;

/// Supremum of `f/g` (pointwise) or `∫_0^t f / ∫_0^t g` (submajorization)
/// over breakpoints and geometrically spaced interior samples, refined by
/// doubling until the supremum moves by less than `tol`.
pub fn domination_ratio(f: &dyn Profile, g: &dyn Profile, mode: DominationMode, tol: f64) -> RatioRecord {
    let mut knots = f.knots();
    knots.extend(g.knots());
    knots.retain(|t| *t > 0.0 && t.is_finite());
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let mut best = RatioRecord { ratio: f64::NEG_INFINITY, witness: 0.0, left_limit: false, samples_per_piece: 0 };
    let consider = |r: f64, t: f64, left: bool, best: &mut RatioRecord| {
        if r > best.ratio || best.ratio == f64::NEG_INFINITY {
            best.ratio = r;
            best.witness = t;
            best.left_limit = left;
        }
    };

    let eval = |t: f64, left: bool| -> f64 {
        match mode {
            DominationMode::Pointwise => {
                if left {
                    safe_ratio(f.value_left(t), g.value_left(t))
                } else {
                    safe_ratio(f.value(t), g.value(t))
                }
            }
            DominationMode::Submajorization => safe_ratio(f.prefix(t), g.prefix(t)),
        }
    };

    for &t in &knots {
        consider(eval(t, false), t, false, &mut best);
        if mode == DominationMode::Pointwise {
            consider(eval(t, true), t, true, &mut best);
        }
    }
    if mode == DominationMode::Submajorization {
        let (mf, mg) = (f.mass(), g.mass());
        if mf.is_finite() && mg.is_finite() {
            consider(safe_ratio(mf, mg), f64::INFINITY, false, &mut best);
        }
    }

    let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(knots.len() + 1);
    match (knots.first(), knots.last()) {
        (Some(&first), Some(&last)) => {
            intervals.push((first * HEAD_SPAN, first));
            intervals.extend(knots.windows(2).map(|w| (w[0], w[1])));
            intervals.push((last, last * TAIL_SPAN));
        }
        _ => intervals.push((HEAD_SPAN, 1.0 / HEAD_SPAN)),
    }

    let mut n = 8;
    let mut prev = best.ratio;
    loop {
        for &(lo, hi) in &intervals {
            let ratio = (hi / lo).ln();
            for s in 0..=n + 1 {
                let t = lo * (ratio * s as f64 / (n + 1) as f64).exp();
                consider(eval(t, false), t, false, &mut best);
            }
        }
        best.samples_per_piece = n;
        let moved = (best.ratio - prev).abs();
        if best.ratio.is_infinite() || moved < tol || n >= MAX_SAMPLES {
            break;
        }
        prev = best.ratio;
        n *= 2;
    }
    best
}
