//! Black-box extrapolation checks: a linear map with certified `L_p`
//! bounds is tested against the distributional conclusions
//! `μ(Tx) ≺≺ c Sμ(x)` and `μ(Tx)² ≺≺ c (C*μ(x))²`.

use super::kinds::MapName;
use crate::error::{domain, Result};
use crate::hardy::{self, HardyKind};
use crate::martingale;
use crate::ncalg::{Filtration, TracedElement};
use crate::stepfn::{domination_ratio, safe_ratio, DominationMode};

/// Exponents at which the certified bounds are spot-checked.
pub const HYPOTHESIS_PS: [f64; 4] = [1.5, 2.0, 4.0, 8.0];

/// A linear map on one traced algebra together with certified bounds
/// `‖T‖_{L_p → L_p} ≤ lp_bound(p)`.
pub trait LinearMap: Send + Sync {
    fn name(&self) -> String;
    fn apply(&self, x: &TracedElement) -> Result<TracedElement>;
    fn lp_bound(&self, p: f64) -> f64;
}

/// Alternating-sign martingale transform.
pub struct Burkholder {
    pub filt: Filtration,
}

impl LinearMap for Burkholder {
    fn name(&self) -> String {
        "burkholder".into()
    }

    fn apply(&self, x: &TracedElement) -> Result<TracedElement> {
        let d = martingale::differences(x, &self.filt)?;
        let signs: Vec<i8> = (0..d.len()).map(|k| if k % 2 == 0 { 1 } else { -1 }).collect();
        martingale::transform_signs(&d, &signs)
    }

    fn lp_bound(&self, p: f64) -> f64 {
        p.max(p / (p - 1.0)) - 1.0
    }
}

/// Coarsest conditional expectation.
pub struct CoarsestExpectation {
    pub filt: Filtration,
}

impl LinearMap for CoarsestExpectation {
    fn name(&self) -> String {
        "condexp".into()
    }

    fn apply(&self, x: &TracedElement) -> Result<TracedElement> {
        self.filt.cond_exp(0, x)
    }

    fn lp_bound(&self, _p: f64) -> f64 {
        1.0
    }
}

pub fn builtin_map(name: MapName, filt: &Filtration) -> Box<dyn LinearMap> {
    match name {
        MapName::Burkholder => Box::new(Burkholder { filt: filt.clone() }),
        MapName::CondExp => Box::new(CoarsestExpectation { filt: filt.clone() }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conclusion {
    /// `μ(Tx) ≺≺ c Sμ(x)`.
    Calderon,
    /// `μ(Tx)² ≺≺ c (C*μ(x))²`.
    DualSquare,
}

impl Conclusion {
    pub fn lhs(self) -> &'static str {
        match self {
            Conclusion::Calderon => "mu(T x)",
            Conclusion::DualSquare => "mu(T x)^2",
        }
    }

    pub fn rhs(self) -> &'static str {
        match self {
            Conclusion::Calderon => "S mu(x)",
            Conclusion::DualSquare => "(C* mu(x))^2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtrapResult {
    pub ratio: f64,
    pub witness: f64,
    /// `max_p ‖Tx‖_p / (lp_bound(p)‖x‖_p)` over [`HYPOTHESIS_PS`].
    pub hypothesis: f64,
}

/// Verifies the hypothesis on `x` and returns the submajorization ratio
/// of the requested conclusion.
pub fn extrapolation_ratio(map: &dyn LinearMap, x: &TracedElement, which: Conclusion) -> Result<ExtrapResult> {
    let tx = map.apply(x)?;
    let mut hypothesis = 0.0f64;
    for p in HYPOTHESIS_PS {
        hypothesis = hypothesis.max(safe_ratio(tx.p_norm(p), map.lp_bound(p) * x.p_norm(p)));
    }
    if hypothesis > 1.0 + 1e-9 {
        return domain(format!("{} exceeds its certified L_p bound by a factor {hypothesis}", map.name()));
    }
    let mx = x.mu();
    let (lhs, rhs) = match which {
        Conclusion::Calderon => (tx.mu(), hardy::hardy_transform(&mx, HardyKind::S)?),
        Conclusion::DualSquare => (tx.mu().powf(2.0), hardy::square(&hardy::hardy_transform(&mx, HardyKind::Cstar)?)?),
    };
    let r = domination_ratio(&lhs, &rhs, DominationMode::Submajorization, 1e-9);
    Ok(ExtrapResult { ratio: r.ratio, witness: r.witness, hypothesis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncalg::TracedAlgebra;

    struct Doubling;

    impl LinearMap for Doubling {
        fn name(&self) -> String {
            "doubling".into()
        }
        fn apply(&self, x: &TracedElement) -> Result<TracedElement> {
            Ok(x.scale(2.0))
        }
        fn lp_bound(&self, _p: f64) -> f64 {
            1.0
        }
    }

    #[test]
    fn false_certificate_is_rejected() {
        let alg = TracedAlgebra::commutative(&[1.0, 1.0]).unwrap();
        let x = TracedElement::diagonal(&alg, &[1.0, 2.0]).unwrap();
        assert!(extrapolation_ratio(&Doubling, &x, Conclusion::Calderon).is_err());
    }

    #[test]
    fn identity_like_maps_have_small_ratios() {
        let alg = TracedAlgebra::commutative(&[0.25; 4]).unwrap();
        let filt = Filtration::dyadic(&alg, 2).unwrap();
        let x = TracedElement::diagonal(&alg, &[4.0, 1.0, 2.0, 0.5]).unwrap();
        let e = extrapolation_ratio(&CoarsestExpectation { filt: filt.clone() }, &x, Conclusion::Calderon).unwrap();
        // E_0 x is the mean, dominated by Cμ(x) ≤ Sμ(x)
        assert!(e.ratio <= 1.0 + 1e-12 && e.hypothesis <= 1.0 + 1e-12);
        let b = extrapolation_ratio(&Burkholder { filt }, &x, Conclusion::DualSquare).unwrap();
        assert!(b.ratio.is_finite() && b.hypothesis <= 1.0 + 1e-9);
    }
}
