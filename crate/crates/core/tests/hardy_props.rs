use ncmart::hardy::{self, HardyKind};
use ncmart::spaces::{self, SpaceSpec};
use ncmart::stepfn::{PiecewiseLogPoly, StepFunction};
use proptest::prelude::*;

const REL: f64 = 1e-9;

fn step() -> impl Strategy<Value = StepFunction> {
    prop::collection::vec((0.01f64..10.0, 0.01f64..5.0), 1..12).prop_map(|raw| {
        let total: f64 = raw.iter().map(|r| r.1).sum();
        let mut v = total;
        let pieces = raw
            .iter()
            .map(|&(len, drop)| {
                let piece = (len, v);
                v -= drop;
                piece
            })
            .collect();
        StepFunction::new(pieces).unwrap()
    })
}

fn grid(f: &StepFunction) -> Vec<f64> {
    let mut out = vec![];
    let mut prev = 0.0;
    for b in f.breakpoints() {
        out.extend([b, b * (1.0 - 1e-3), b * (1.0 + 1e-3), 0.5 * (prev + b)]);
        prev = b;
    }
    out.push(2.0 * f.support());
    out.retain(|t| *t > 0.0 && t.is_finite());
    out
}

fn close_le(a: f64, b: f64) -> bool {
    a <= b + REL * b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cesaro_dominates_decreasing_input(f in step()) {
        let cf = hardy::hardy_transform(&f, HardyKind::C).unwrap();
        for t in grid(&f) {
            prop_assert!(close_le(f.eval(t), cf.eval(t)), "t = {t}");
        }
    }

    #[test]
    fn squared_dual_bound(f in step()) {
        let g = hardy::hardy_transform(&f, HardyKind::Cstar).unwrap();
        let g2 = hardy::square(&g).unwrap();
        let lhs_a = hardy::hardy_transform(&f.powf(2.0), HardyKind::C).unwrap();
        let rhs = hardy::cesaro(&g2).unwrap();
        for t in grid(&f) {
            let lhs = lhs_a.eval(t) + g2.eval(t);
            prop_assert!(close_le(lhs, 2.0 * rhs.eval(t)), "t = {t}: {lhs} vs {}", 2.0 * rhs.eval(t));
        }
    }

    #[test]
    fn cesaro_and_dual_are_formally_adjoint(f in step(), g in step()) {
        let (pf, pg) = (PiecewiseLogPoly::from_step(&f), PiecewiseLogPoly::from_step(&g));
        let a = hardy::pairing(&pg, &hardy::cesaro(&pf).unwrap()).unwrap();
        let b = hardy::pairing(&pf, &hardy::dual_cesaro(&pg).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn cesaro_prefix_is_log_kernel(f in step()) {
        let cf = hardy::hardy_transform(&f, HardyKind::C).unwrap();
        for t in f.breakpoints() {
            let a = cf.prefix_integral(t).unwrap();
            let b = hardy::log_kernel_integral(&f, t);
            prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn cesaro_lp_bound(f in step(), p in prop::sample::select(vec![1.5, 2.0, 4.0])) {
        let cf = hardy::hardy_transform(&f, HardyKind::C).unwrap();
        let r = spaces::norm_plp(&cf, &SpaceSpec::Lp(p)).unwrap() / spaces::norm(&f, &SpaceSpec::Lp(p));
        prop_assert!(r <= p / (p - 1.0) + 1e-9, "{r}");
    }

    #[test]
    fn calderon_is_sum_of_parts(f in step()) {
        let s = hardy::hardy_transform(&f, HardyKind::S).unwrap();
        let c = hardy::hardy_transform(&f, HardyKind::C).unwrap();
        let cs = hardy::hardy_transform(&f, HardyKind::Cstar).unwrap();
        for t in grid(&f) {
            let want = c.eval(t) + cs.eval(t);
            prop_assert!((s.eval(t) - want).abs() <= 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn json_round_trip(f in step()) {
        prop_assert_eq!(StepFunction::from_json(&f.to_json()).unwrap(), f);
    }
}

#[test]
fn dual_cesaro_rejects_infinite_support() {
    let f = StepFunction::new(vec![(1.0, 2.0), (f64::INFINITY, 1.0)]).unwrap();
    assert!(hardy::hardy_transform(&f, HardyKind::Cstar).is_err());
}
