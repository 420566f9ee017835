use ncmart::harness::{random_filtration, Dims};
use ncmart::martingale::{self, GUNDY_BOUNDS};
use ncmart::ncalg::{Filtration, TracedAlgebra, TracedElement};
use ncmart::triangular;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;
const SMALL: Dims = Dims { max_dim: 16, max_levels: 5 };

fn setups(count: u64) -> impl Iterator<Item = (Filtration, TracedElement, ChaCha8Rng)> {
    (0..count).map(|seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let filt = random_filtration(&mut rng, &SMALL);
        let x = filt.algebra().gaussian(&mut rng);
        (filt, x, rng)
    })
}

#[test]
fn differences_telescope_and_are_orthogonal() {
    for (filt, x, _) in setups(40) {
        let d = martingale::differences(&x, &filt).unwrap();
        assert!(d.sum().max_abs_diff(&x) <= TOL * x.max_abs().max(1.0));
        let energy: f64 = d.terms().iter().map(|dk| dk.p_norm(2.0).powi(2)).sum();
        let total = x.p_norm(2.0).powi(2);
        assert!((energy - total).abs() <= 1e-9 * total, "{energy} vs {total}");
    }
}

#[test]
fn conditional_expectations_are_idempotent_and_trace_preserving() {
    for (filt, x, _) in setups(40) {
        for k in 0..filt.len() {
            let e = filt.cond_exp(k, &x).unwrap();
            let ee = filt.cond_exp(k, &e).unwrap();
            assert!(ee.max_abs_diff(&e) <= TOL * x.max_abs());
            assert!((e.trace() - x.trace()).norm() <= 1e-9 * x.p_norm(1.0).max(1.0));
            if k > 0 {
                let tower = filt.cond_exp(k - 1, &e).unwrap();
                assert!(tower.max_abs_diff(&filt.cond_exp(k - 1, &x).unwrap()) <= TOL * x.max_abs());
            }
        }
    }
}

#[test]
fn sign_transforms_preserve_two_norm() {
    for (filt, x, mut rng) in setups(30) {
        let d = martingale::differences(&x, &filt).unwrap();
        let signs: Vec<i8> = (0..d.len()).map(|_| if rng.gen() { 1 } else { -1 }).collect();
        let t = martingale::transform_signs(&d, &signs).unwrap();
        assert!((t.p_norm(2.0) - x.p_norm(2.0)).abs() <= 1e-9 * x.p_norm(2.0));
    }
}

#[test]
fn square_function_traces_match_energy() {
    for (filt, x, _) in setups(30) {
        let d = martingale::differences(&x, &filt).unwrap();
        let (col, row) = martingale::square_functions(&d);
        let e = x.p_norm(2.0).powi(2);
        assert!((col.trace().re - e).abs() <= 1e-9 * e);
        assert!((row.trace().re - e).abs() <= 1e-9 * e);
    }
}

#[test]
fn commutative_gundy_meets_bounds() {
    let alg = TracedAlgebra::commutative(&[0.125; 8]).unwrap();
    let filt = Filtration::dyadic(&alg, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let v: Vec<f64> = (0..8).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let x = TracedElement::diagonal(&alg, &v).unwrap();
        let lambda = 0.5 * x.op_norm();
        let g = martingale::gundy_decompose(&x, &filt, lambda).unwrap();
        assert!(g.report.reconstruction_error <= 1e-9);
        assert!(g.report.within_bounds(1e-9), "{:?} vs {GUNDY_BOUNDS:?}", g.report.constants());
        assert_eq!(g.report.c_delta, 0.0);
    }
}

#[test]
fn corner_split_identities_hold_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [2usize, 5, 9, 16] {
        let alg = TracedAlgebra::matrix(n, 1.0).unwrap();
        let a = alg.gaussian(&mut rng);
        let mut cuts: Vec<usize> = (1..n).filter(|_| rng.gen_bool(0.5)).collect();
        cuts.push(n);
        let s = triangular::corner_split(&a, &cuts).unwrap();
        assert!(s.truncated.op_norm().is_finite());
    }
}

#[test]
fn hilbert_surrogate_norms_stay_below_pi() {
    let d = triangular::hilbert_demo(&[16, 64, 128]).unwrap();
    assert!(d.rows.iter().all(|r| r.opnorm_full <= std::f64::consts::PI + 1e-6));
    assert!(d.rows.windows(2).all(|w| w[1].opnorm_truncated > w[0].opnorm_truncated));
}
