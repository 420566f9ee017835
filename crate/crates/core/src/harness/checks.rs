use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::budgets::default_budget;
use super::extrap::{builtin_map, extrapolation_ratio, Conclusion};
use super::gen::Instance;
use super::kinds::{IdentityKind, InequalityKind, QbWhich};
use crate::error::{input, Error, Result};
use crate::hardy::{self, DiscreteHardyKind, HardyKind};
use crate::martingale::{self, DifferenceSequence};
use crate::ncalg::{Filtration, TracedAlgebra, TracedElement};
use crate::spaces::{self, Domain, OrliczFn, Phi, Regime, SpaceSpec};
use crate::stepfn::{domination_ratio, safe_ratio, DominationMode, PiecewiseLogPoly, Profile, StepFunction};
use crate::triangular;

/// Refinement tolerance handed to [`domination_ratio`].
pub const RATIO_TOL: f64 = 1e-9;
/// Exhaustive sign search up to this many levels (first sign fixed).
pub const MAX_EXHAUSTIVE_LEVELS: usize = 12;
/// Random patterns drawn beyond [`MAX_EXHAUSTIVE_LEVELS`].
pub const RANDOM_SIGN_PATTERNS: usize = 256;

/// Outcome of a single check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub kind: String,
    pub lhs: String,
    pub rhs: String,
    /// Supremum of the normalized ratio, or deviation for identities.
    pub ratio: f64,
    /// Point of `(0, ∞)` (or exponent, or index) where the sup was attained.
    pub witness: f64,
    pub budget: f64,
    pub pass: bool,
    /// Free-form extra numbers (secondary ratios, per-constant values).
    pub detail: Vec<(String, f64)>,
}

struct Raw {
    lhs: &'static str,
    rhs: &'static str,
    ratio: f64,
    witness: f64,
    detail: Vec<(String, f64)>,
}

impl Raw {
    fn new(lhs: &'static str, rhs: &'static str, ratio: f64, witness: f64) -> Self {
        Raw { lhs, rhs, ratio, witness, detail: vec![] }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.detail.push((key.to_string(), v));
        self
    }
}

/// Runs `kind` on `instance` against its default budget.
pub fn check(kind: &InequalityKind, instance: &Instance, tol: f64) -> Result<CheckResult> {
    check_with_budget(kind, instance, tol, default_budget(kind, tol))
}

pub fn check_with_budget(kind: &InequalityKind, instance: &Instance, tol: f64, budget: f64) -> Result<CheckResult> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return input(format!("tolerance must lie in (0, 1e-3], got {tol}"));
    }
    let raw = evaluate(kind, instance, tol)?;
    let pass = match kind {
        InequalityKind::Gundy(_) => raw.ratio <= budget * (1.0 + 1e-12),
        _ => raw.ratio <= budget,
    };
    Ok(CheckResult {
        kind: kind.to_string(),
        lhs: raw.lhs.to_string(),
        rhs: raw.rhs.to_string(),
        ratio: raw.ratio,
        witness: raw.witness,
        budget,
        pass: pass && !raw.ratio.is_nan(),
        detail: raw.detail,
    })
}

fn mismatch(kind: &InequalityKind) -> Error {
    Error::Input(format!("instance does not match {kind}"))
}

fn sum(xs: &[TracedElement], alg: &TracedAlgebra) -> TracedElement {
    xs.iter().fold(alg.zero(), |acc, x| acc.add(x))
}

fn sqrt_sum_sq(xs: &[TracedElement], alg: &TracedAlgebra) -> Result<TracedElement> {
    sum(&xs.iter().map(TracedElement::abs_sq).collect::<Vec<_>>(), alg).psd_sqrt()
}

fn plp(f: &StepFunction) -> PiecewiseLogPoly {
    PiecewiseLogPoly::from_step(f)
}

fn hardy(f: &StepFunction, kind: HardyKind) -> Result<PiecewiseLogPoly> {
    hardy::hardy_transform(f, kind)
}

fn squared(f: &PiecewiseLogPoly) -> Result<PiecewiseLogPoly> {
    hardy::square(f)
}

fn pointwise(f: &dyn Profile, g: &dyn Profile) -> (f64, f64) {
    let r = domination_ratio(f, g, DominationMode::Pointwise, RATIO_TOL);
    (r.ratio, r.witness)
}

fn submaj(f: &dyn Profile, g: &dyn Profile) -> (f64, f64) {
    let r = domination_ratio(f, g, DominationMode::Submajorization, RATIO_TOL);
    (r.ratio, r.witness)
}

/// Every `±1` pattern with `ε_0 = +1` when short enough, otherwise
/// [`RANDOM_SIGN_PATTERNS`] patterns seeded by `k`.
pub fn sign_patterns(k: usize) -> Vec<Vec<i8>> {
    if k == 0 {
        return vec![vec![]];
    }
    if k <= MAX_EXHAUSTIVE_LEVELS {
        (0..1u32 << (k - 1))
            .map(|m| (0..k).map(|i| if i > 0 && (m >> (i - 1)) & 1 == 1 { -1 } else { 1 }).collect())
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        (0..RANDOM_SIGN_PATTERNS)
            .map(|_| (0..k).map(|i| if i == 0 || rng.gen::<bool>() { 1 } else { -1 }).collect())
            .collect()
    }
}

fn max_over_signs(d: &DifferenceSequence, f: impl Fn(&TracedElement) -> Result<(f64, f64)>) -> Result<(f64, f64)> {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for s in sign_patterns(d.len()) {
        let r = f(&martingale::transform_signs(d, &s)?)?;
        if r.0 > best.0 {
            best = r;
        }
    }
    Ok(best)
}

fn conj(p: f64) -> f64 {
    p / (p - 1.0)
}

fn lp_ratio(num: &TracedElement, den: &TracedElement, p: f64) -> f64 {
    safe_ratio(num.p_norm(p), den.p_norm(p))
}

/// `max_j a_j / b_j` with `0/0 = 1`, returning the maximizing index.
fn seq_pointwise(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for j in 0..a.len().max(b.len()) {
        let r = safe_ratio(*a.get(j).unwrap_or(&0.0), *b.get(j).unwrap_or(&0.0));
        if r > best.0 {
            best = (r, j as f64);
        }
    }
    best
}

/// Sorted singular values with multiplicity (single block).
pub fn singular_sequence(x: &TracedElement) -> Vec<f64> {
    let mut s: Vec<f64> = x.singular_values().into_iter().flatten().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `max_j s_j(P(a)) / (S_d s(a))_j` with `P` the block-upper truncation.
pub fn corner_dst_ratio(a: &TracedElement, truncated: &TracedElement) -> (f64, f64) {
    let sa = singular_sequence(a);
    let sd = hardy::hardy_transform_seq(&sa, DiscreteHardyKind::Sd);
    seq_pointwise(&singular_sequence(truncated), &sd)
}

fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// `sup_t |∫_0^t f − ∫_0^t g| / ∫_0^∞ g` over the breakpoints of both.
fn profile_gap(f: &StepFunction, g: &StepFunction) -> f64 {
    let mut ts = f.breakpoints();
    ts.extend(g.breakpoints());
    ts.retain(|t| t.is_finite() && *t > 0.0);
    let scale = g.total_mass().max(f.total_mass()).max(f64::MIN_POSITIVE);
    let mut dev = (f.total_mass() - g.total_mass()).abs() / scale;
    for t in ts {
        dev = dev.max((f.prefix_integral(t) - g.prefix_integral(t)).abs() / scale);
    }
    dev
}

fn evaluate(kind: &InequalityKind, inst: &Instance, tol: f64) -> Result<Raw> {
    use InequalityKind as K;
    match (kind, inst) {
        (K::Dst, Instance::Sequence { filt, xs }) => {
            let alg = filt.algebra();
            let lhs = sqrt_sum_sq(&martingale::stein_map(xs, filt)?, alg)?.mu();
            let rhs = hardy(&sqrt_sum_sq(xs, alg)?.mu(), HardyKind::S)?;
            let (r, t) = pointwise(&lhs, &rhs);
            Ok(Raw::new("mu((sum |E_k x_k|^2)^(1/2))", "S mu((sum |x_k|^2)^(1/2))", r, t))
        }
        (K::St(p), Instance::Sequence { filt, xs }) => {
            let alg = filt.algebra();
            let num = sqrt_sum_sq(&martingale::stein_map(xs, filt)?, alg)?;
            let den = sqrt_sum_sq(xs, alg)?;
            let raw = lp_ratio(&num, &den, *p);
            let order = p.max(conj(*p));
            Ok(Raw::new("||(sum |E_k x_k|^2)^(1/2)||_p", "max(p,p')||(sum |x_k|^2)^(1/2)||_p", raw / order, *p).with("raw", raw))
        }
        (K::Ddd, Instance::Positive { filt, xs }) => {
            let lhs = martingale::dual_doob_sum(xs, filt)?.mu();
            let root = sum(xs, filt.algebra()).psd_sqrt()?.mu();
            let rhs = squared(&hardy(&root, HardyKind::Cstar)?)?;
            let (r, t) = submaj(&lhs, &rhs);
            Ok(Raw::new("mu(sum E_k a_k)", "(C* mu((sum a_k)^(1/2)))^2", r, t))
        }
        (K::Dd(p), Instance::Positive { filt, xs }) => {
            let num = martingale::dual_doob_sum(xs, filt)?;
            let den = sum(xs, filt.algebra());
            let raw = lp_ratio(&num, &den, *p);
            Ok(Raw::new("||sum E_k a_k||_p", "p^2 ||sum a_k||_p", raw / (p * p), *p).with("raw", raw))
        }
        (K::Dmt, Instance::Martingale { filt, x }) => {
            let d = martingale::differences(x, filt)?;
            let rhs = hardy(&x.mu(), HardyKind::S)?;
            let (r, t) = max_over_signs(&d, |y| Ok(pointwise(&y.mu(), &rhs)))?;
            Ok(Raw::new("mu(sum eps_k d_k)", "S mu(x)", r, t))
        }
        (K::Mt(p), Instance::Martingale { filt, x }) => {
            let d = martingale::differences(x, filt)?;
            let den = x.p_norm(*p);
            let (raw, _) = max_over_signs(&d, |y| Ok((safe_ratio(y.p_norm(*p), den), 0.0)))?;
            let order = p.max(conj(*p));
            Ok(Raw::new("max_eps ||sum eps_k d_k||_p", "max(p,p')||x||_p", raw / order, *p).with("raw", raw))
        }
        (K::DbgLower, Instance::Martingale { filt, x }) => {
            let (col, row) = martingale::square_functions(&martingale::differences(x, filt)?);
            let lhs = col.add(&row).mu();
            let rhs = squared(&hardy(&x.mu(), HardyKind::Cstar)?)?;
            let (r, t) = submaj(&lhs, &rhs);
            Ok(Raw::new("mu(sum d_k* d_k + d_k d_k*)", "(C* mu(x))^2", r, t))
        }
        (K::DbgUpper, Instance::Martingale { filt, x }) => {
            let (col, row) = martingale::square_functions(&martingale::differences(x, filt)?);
            let lhs = x.mu().powf(2.0);
            let root = col.add(&row).psd_sqrt()?.mu();
            let rhs = squared(&hardy(&root, HardyKind::Cstar)?)?;
            let (r, t) = submaj(&lhs, &rhs);
            Ok(Raw::new("mu(x)^2", "(C* mu((sum d_k* d_k + d_k d_k*)^(1/2)))^2", r, t))
        }
        (K::Bg(p), Instance::Martingale { filt, x }) => {
            let (col, row) = martingale::square_functions(&martingale::differences(x, filt)?);
            let sq = col.add(&row).psd_sqrt()?;
            let raw = lp_ratio(x, &sq, *p);
            Ok(Raw::new("||x||_p", "p ||(sum d_k* d_k + d_k d_k*)^(1/2)||_p", raw / p, *p).with("raw", raw))
        }
        (K::Weak11, Instance::Generalized { filt, x, xis }) => {
            let d = martingale::differences(x, filt)?;
            let t = martingale::transform_general(&d, xis)?;
            let weak = spaces::norm(&t.mu(), &SpaceSpec::WeakL1);
            let xi_sup = xis.iter().map(TracedElement::op_norm).fold(0.0, f64::max);
            let raw = safe_ratio(weak, x.p_norm(1.0) * xi_sup);
            Ok(Raw::new("||sum d_k (x) xi_k||_{1,inf}", "||x||_1 sup ||xi_k||", raw, 0.0)
                .with("over_proof_constant", raw / (16.0 * (4.0 + 2f64.sqrt()))))
        }
        (K::Gundy(r) | K::GundyNc(r), Instance::Martingale { filt, x }) => {
            let lambda = r * x.op_norm();
            if lambda == 0.0 {
                return Ok(Raw::new("Gundy constants", "(2, 4, 1, 1)", 0.0, 0.0));
            }
            let g = martingale::gundy_decompose(x, filt, lambda)?;
            let c = g.report.constants();
            let (mut worst, mut at) = (0.0f64, 0.0);
            for (i, (ci, bi)) in c.iter().zip(martingale::GUNDY_BOUNDS).enumerate() {
                if ci / bi > worst {
                    worst = ci / bi;
                    at = i as f64;
                }
            }
            let scale = x.max_abs().max(f64::MIN_POSITIVE);
            let recon = g.report.reconstruction_error / scale;
            if recon > tol.max(1e-9) {
                worst = f64::INFINITY;
            }
            Ok(Raw::new("Gundy constants / bounds", "1", worst, at)
                .with("alpha", c[0])
                .with("beta", c[1])
                .with("gamma", c[2])
                .with("delta", c[3])
                .with("reconstruction", recon))
        }
        (K::MomentEq, Instance::Step { f }) => {
            let m = spaces::moment_sup(f, Regime::Full).value;
            let marc = spaces::norm(f, &SpaceSpec::Marcinkiewicz(Phi::MomentLog));
            let r = safe_ratio(m, marc);
            Ok(Raw::new("sup_p w(p)||f||_p", "||f||_{M_phi}", r.max(1.0 / r), 0.0).with("ratio", r))
        }
        (K::MarcOrlicz, Instance::Step { f }) => {
            let marc = spaces::norm(f, &SpaceSpec::Marcinkiewicz(Phi::MomentLog));
            let orl = spaces::norm(f, &SpaceSpec::Orlicz(OrliczFn::ExpM1, Domain::Unit));
            let r = safe_ratio(marc, orl);
            Ok(Raw::new("||f||_{M_phi}", "||f||_{exp-1}", r.max(1.0 / r), 0.0).with("ratio", r))
        }
        (K::CstarFact, Instance::Step { f }) => {
            let lhs = spaces::norm_plp(&hardy(f, HardyKind::Cstar)?, &SpaceSpec::L1PlusLinf)?;
            let rhs = spaces::norm(f, &SpaceSpec::LambdaLog);
            Ok(Raw::new("||C* f||_{L1+Linf}", "||f||_{Lambda_log}", safe_ratio(lhs, rhs), 0.0))
        }
        (K::CNorm(p), Instance::Step { f }) => {
            let lhs = spaces::norm_plp(&hardy(f, HardyKind::C)?, &SpaceSpec::Lp(*p))?;
            let rhs = spaces::norm(f, &SpaceSpec::Lp(*p));
            Ok(Raw::new("||C f||_p", "||f||_p", safe_ratio(lhs, rhs), *p))
        }
        (K::PhiLem(phi), Instance::Step { f }) => {
            let lhs = spaces::norm_plp(&hardy(f, HardyKind::C)?, &SpaceSpec::WeakOrlicz(*phi))?;
            let rhs = spaces::norm(f, &SpaceSpec::Orlicz(*phi, Domain::HalfLine));
            Ok(Raw::new("||C f||_{Phi,inf}", "||f||_Phi", safe_ratio(lhs, rhs), 0.0))
        }
        (K::CornerDemo, Instance::Corner { a, cuts }) => {
            let s = triangular::corner_split(a, cuts)?;
            let (r, j) = corner_dst_ratio(a, &s.truncated);
            Ok(Raw::new("s_j(P(a))", "(S_d s(a))_j", r, j).with("classical", safe_ratio(s.truncated.op_norm(), a.op_norm())))
        }
        (K::Dfww(n), Instance::Element { x }) => {
            let (r, t) = dfww_ratio(x, *n)?;
            Ok(Raw::new("mu(x (x) z_N) vs C mu(x)", "1", r, t))
        }
        (K::QbPair(which), inst) => {
            let (num, den) = match (which, inst) {
                (QbWhich::Stein, Instance::Sequence { filt, xs }) => {
                    let alg = filt.algebra();
                    (sqrt_sum_sq(&martingale::stein_map(xs, filt)?, alg)?.mu(), sqrt_sum_sq(xs, alg)?.mu())
                }
                (QbWhich::Mt, Instance::Martingale { filt, x }) => {
                    let d = martingale::differences(x, filt)?;
                    let mut best = (f64::NEG_INFINITY, StepFunction::zero());
                    for s in sign_patterns(d.len()) {
                        let m = martingale::transform_signs(&d, &s)?.mu();
                        let v = m.prefix_integral(1.0);
                        if v > best.0 {
                            best = (v, m);
                        }
                    }
                    (best.1, x.mu())
                }
                _ => return Err(mismatch(kind)),
            };
            let l1 = num.prefix_integral(1.0);
            let llogl = spaces::norm(&den, &SpaceSpec::Orlicz(OrliczFn::TLog1p, Domain::Unit));
            Ok(Raw::new("||T x||_{L1(0,1)}", "||x||_{LlogL(0,1)}", safe_ratio(l1, llogl), 0.0))
        }
        (K::Extrap1(_) | K::Extrap2(_), Instance::Mapped { filt, x, map }) => {
            let m = builtin_map(*map, filt);
            let which = if matches!(kind, K::Extrap1(_)) { Conclusion::Calderon } else { Conclusion::DualSquare };
            let e = extrapolation_ratio(m.as_ref(), x, which)?;
            let raw = Raw::new(which.lhs(), which.rhs(), e.ratio, e.witness);
            Ok(raw.with("hypothesis", e.hypothesis))
        }
        (K::Identity(id), inst) => identity(*id, inst, tol),
        _ => Err(mismatch(kind)),
    }
}

/// `max(sup μ(x⊗z)/Cμ(x), sup_{t ≤ N/4} ½Cμ(x)/μ(x⊗z))`, exact on pieces.
fn dfww_ratio(x: &TracedElement, n: usize) -> Result<(f64, f64)> {
    let sv: Vec<f64> = x.singular_values().into_iter().flatten().collect();
    let w = x.algebra().blocks()[0].weight;
    let mu = x.mu();
    let atoms = sv.iter().flat_map(|&s| (1..=n).map(move |k| (w, s / k as f64)));
    let tens = StepFunction::rearrange(atoms)?;
    let c = hardy(&mu, HardyKind::C)?;
    let mut best = (0.0f64, 0.0);
    let mut a = 0.0;
    for &(len, v) in tens.pieces() {
        let b = a + len;
        // μ(x⊗z) ≡ v on [a, b), Cμ decreasing: worst at the ends
        let upper = safe_ratio(v, c.eval_left(b));
        if upper > best.0 {
            best = (upper, b);
        }
        if a < n as f64 / 4.0 {
            let lower = safe_ratio(0.5 * c.eval(a.max(f64::MIN_POSITIVE)), v);
            if lower > best.0 {
                best = (lower, a);
            }
        }
        a = b;
    }
    Ok(best)
}

fn identity(id: IdentityKind, inst: &Instance, tol: f64) -> Result<Raw> {
    match (id, inst) {
        (IdentityKind::LogKernel, Instance::Step { f }) => {
            let c = hardy(f, HardyKind::C)?;
            let mut ts = f.breakpoints();
            ts.retain(|t| t.is_finite() && *t > 0.0);
            let extra: Vec<f64> = ts.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();
            ts.extend(extra);
            if let Some(&last) = ts.iter().max_by(|a, b| a.total_cmp(b)) {
                ts.push(last * 3.0);
            }
            let (mut dev, mut at) = (0.0f64, 0.0);
            for t in ts {
                let d = rel_dev(c.prefix_integral(t)?, hardy::log_kernel_integral(f, t));
                if d > dev {
                    (dev, at) = (d, t);
                }
            }
            Ok(Raw::new("int_0^t C f", "int_0^t f(s) log(t/s) ds", dev, at))
        }
        (IdentityKind::TraceScaling, Instance::Scaled { x, t }) => {
            let y = x.with_algebra(&x.algebra().rescaled(*t)?)?;
            let dev = profile_gap(&y.mu(), &x.mu().dilate(*t)?);
            Ok(Raw::new("mu(x) under t tau", "mu(x)(./t)", dev, *t))
        }
        (IdentityKind::Corner, Instance::Corner { a, cuts }) => {
            let s = triangular::corner_split(a, cuts)?;
            let scale = a.abs_sq_row().max_abs().max(1.0);
            let dev = (s.column_identity_error / scale)
                .max(s.projected_identity_error / scale)
                .max(profile_gap(&s.mu_lhs, &s.mu_rhs));
            Ok(Raw::new("sum a_k a_k*, sum E(a_k)E(a_k)*", "a a*, P(a)P(a)*", dev, 0.0))
        }
        (IdentityKind::Column, Instance::Columns { xs }) => {
            let col = martingale::column_embed(xs)?;
            let sq = sqrt_sum_sq(xs, xs[0].algebra())?;
            let mut dev = 0.0f64;
            for p in [1.0, 2.0, 3.0] {
                dev = dev.max(rel_dev(col.p_norm(p), sq.p_norm(p)));
            }
            dev = dev.max(rel_dev(col.op_norm(), sq.op_norm()));
            Ok(Raw::new("||sum x_k (x) e_k0||_p", "||(sum x_k* x_k)^(1/2)||_p", dev, 0.0))
        }
        (IdentityKind::CondExp, Instance::Axioms { filt, seed }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let rep = filt.validate(&mut rng, 1, tol);
            let dev = if rep.passed() { rep.max_deviation.min(tol) } else { rep.max_deviation.max(2.0 * tol) };
            Ok(Raw::new("E_k axioms", "exact", dev, 0.0).with("raw_deviation", rep.max_deviation))
        }
        (IdentityKind::Duality, Instance::StepPair { f, g }) => {
            let lhs = hardy::pairing(&plp(g), &hardy(f, HardyKind::C)?)?;
            let rhs = hardy::pairing(&plp(f), &hardy(g, HardyKind::Cstar)?)?;
            Ok(Raw::new("<g, C f>", "<C* g, f>", rel_dev(lhs, rhs), 0.0))
        }
        _ => input("instance does not match the identity"),
    }
}

/// Stein map of a sequence, exposed for callers building their own
/// instances.
pub fn stein_lhs_rhs(xs: &[TracedElement], filt: &Filtration) -> Result<(StepFunction, PiecewiseLogPoly)> {
    let alg = filt.algebra();
    let lhs = sqrt_sum_sq(&martingale::stein_map(xs, filt)?, alg)?.mu();
    let rhs = hardy(&sqrt_sum_sq(xs, alg)?.mu(), HardyKind::S)?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_patterns_fix_the_first_sign() {
        let short = sign_patterns(4);
        assert_eq!(short.len(), 8);
        assert!(short.iter().all(|s| s.len() == 4 && s[0] == 1));
        let long = sign_patterns(14);
        assert_eq!(long.len(), RANDOM_SIGN_PATTERNS);
        assert!(long.iter().all(|s| s.len() == 14 && s[0] == 1));
        assert_eq!(long, sign_patterns(14));
    }
}
