//! Gauss–Legendre quadrature on geometric sub-intervals, used for norms of
//! log-polynomials that have no closed form (non-integer powers).

use std::sync::OnceLock;

const NODES: usize = 20;

fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = NODES;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
        }
        out
    })
}

/// `∫_a^b h` with one Gauss–Legendre panel.
pub fn panel(h: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    gauss_legendre().iter().map(|&(x, w)| w * h(m + r * x)).sum::<f64>() * r
}

/// `∫_a^b h` for `0 < a < b < ∞`, panels equally spaced in `log t`.
pub fn integrate_finite(h: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let span = (b / a).ln();
    let panels = (span / 0.5).ceil().max(1.0) as usize;
    let mut acc = 0.0;
    for i in 0..panels {
        let lo = a * (span * i as f64 / panels as f64).exp();
        let hi = if i + 1 == panels { b } else { a * (span * (i + 1) as f64 / panels as f64).exp() };
        // substitute t = e^u on each panel
        let g = |u: f64| {
            let t = u.exp();
            h(t) * t
        };
        acc += panel(&g, lo.ln(), hi.ln());
    }
    acc
}

/// `∫_0^b h` for integrands with at most logarithmic growth at 0.
pub fn integrate_head(h: &dyn Fn(f64) -> f64, b: f64) -> f64 {
    // t = b e^{-u}
    let g = |u: f64| {
        let t = b * (-u).exp();
        h(t) * t
    };
    let mut acc = 0.0;
    let (mut lo, mut hi) = (0.0, 0.5);
    while lo < 700.0 {
        let part = panel(&g, lo, hi);
        acc += part;
        if hi > 40.0 && part.abs() <= 1e-17 * acc.abs() {
            break;
        }
        lo = hi;
        hi = (hi * 1.5).min(hi + 8.0);
    }
    acc
}

/// `∫_a^∞ h` for integrands decaying at least like `t^{-1-δ}`.
pub fn integrate_tail(h: &dyn Fn(f64) -> f64, a: f64) -> f64 {
    let g = |u: f64| {
        let t = a * u.exp();
        h(t) * t
    };
    let mut acc = 0.0;
    let (mut lo, mut hi) = (0.0, 0.5);
    while lo < 700.0 {
        let part = panel(&g, lo, hi);
        acc += part;
        if part.abs() <= 1e-16 * acc.abs() {
            break;
        }
        lo = hi;
        hi = (hi * 1.5).min(hi + 8.0);
    }
    acc
}
