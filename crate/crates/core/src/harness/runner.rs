use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::budgets::budget_for;
use super::checks::{check_with_budget, CheckResult};
use super::families::{self, Curve, CURVE_PS, CURVE_SIZE, GROWTH_SIZES};
use super::gen::{generate_instance, Dims};
use super::kinds::{suite, BudgetSource, InequalityKind};
use crate::error::{Error, Result};

/// Every 10th trial of a scaling-checked kind is rerun with halved weights.
pub const SCALING_EVERY: usize = 10;
pub const SCALING_TOL: f64 = 1e-9;
/// Violations kept per kind in a report; the count is always exact.
pub const MAX_RECORDED_VIOLATIONS: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub trial: usize,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub levels: usize,
    pub t: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: String,
    pub trial: usize,
    pub seed: u64,
    pub ratio: Option<f64>,
    pub budget: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub kind: String,
    pub trials: usize,
    pub sup_ratio: Option<f64>,
    pub witness: Option<Witness>,
    pub budget: Option<f64>,
    pub budget_source: BudgetSource,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    /// Max of each detail entry across trials.
    pub detail_max: BTreeMap<String, Option<f64>>,
}

impl ConstantEstimate {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

/// `None` for non-finite values, which JSON cannot carry.
pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

struct Trial {
    index: usize,
    seed: u64,
    dims: Vec<usize>,
    levels: usize,
    outcome: std::result::Result<CheckResult, String>,
    scaling: Option<String>,
}

fn run_trial(kind: &InequalityKind, dims: &Dims, seed: u64, index: usize, tol: f64, budget: f64) -> Trial {
    let inst = match generate_instance(kind, dims, seed) {
        Ok(i) => i,
        Err(e) => return Trial { index, seed, dims: vec![], levels: 0, outcome: Err(e.to_string()), scaling: None },
    };
    let digest = inst.digest(kind, seed);
    let outcome = check_with_budget(kind, &inst, tol, budget)
        .map_err(|e| format!("{e} [kind {} seed {} dims {:?} levels {}]", digest.kind, seed, digest.dims, digest.levels));
    let mut scaling = None;
    if let Ok(res) = &outcome {
        if kind.scaling_checked() && index % SCALING_EVERY == 0 {
            let again = inst.rescaled(0.5).and_then(|i| check_with_budget(kind, &i, tol, budget));
            scaling = match again {
                Ok(r2) => {
                    let dev = (r2.ratio - res.ratio).abs() / res.ratio.abs().max(f64::MIN_POSITIVE);
                    (dev > SCALING_TOL).then(|| format!("ratio {} changed to {} under halved weights", res.ratio, r2.ratio))
                }
                Err(e) => Some(format!("rescaled rerun failed: {e}")),
            };
        }
    }
    Trial { index, seed, dims: digest.dims, levels: digest.levels, outcome, scaling }
}

/// Runs `trials` instances of `kind` with seeds `seed + i` on the current
/// rayon pool; the result does not depend on the pool size.
pub fn estimate_constant(
    kind: &InequalityKind,
    dims: &Dims,
    trials: usize,
    seed: u64,
    tol: f64,
    overrides: &BTreeMap<String, f64>,
) -> Result<ConstantEstimate> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    dims.validate()?;
    kind.validate()?;
    let (budget, source) = budget_for(kind, tol, overrides);
    let results: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(kind, dims, seed.wrapping_add(i as u64), i, tol, budget))
        .collect();

    let name = kind.to_string();
    let mut est = ConstantEstimate {
        kind: name.clone(),
        trials,
        sup_ratio: None,
        witness: None,
        budget: finite(budget),
        budget_source: source,
        violation_count: 0,
        violations: vec![],
        detail_max: BTreeMap::new(),
    };
    let mut sup = f64::NEG_INFINITY;
    let violation = |est: &mut ConstantEstimate, t: &Trial, ratio: Option<f64>, detail: String| {
        est.violation_count += 1;
        if est.violations.len() < MAX_RECORDED_VIOLATIONS {
            est.violations.push(Violation { kind: name.clone(), trial: t.index, seed: t.seed, ratio, budget: finite(budget), detail });
        }
    };
    for t in &results {
        match &t.outcome {
            Ok(r) => {
                if r.ratio > sup || (r.ratio.is_nan() && !sup.is_nan()) {
                    sup = r.ratio;
                    est.witness = Some(Witness { trial: t.index, seed: t.seed, dims: t.dims.clone(), levels: t.levels, t: finite(r.witness) });
                }
                for (k, v) in &r.detail {
                    let e = est.detail_max.entry(k.clone()).or_insert(Some(f64::NEG_INFINITY));
                    *e = match (*e, finite(*v)) {
                        (Some(a), Some(b)) => Some(a.max(b)),
                        _ => None,
                    };
                }
                if !r.pass {
                    violation(&mut est, t, finite(r.ratio), format!("{} vs {}", r.lhs, r.rhs));
                }
            }
            Err(msg) => violation(&mut est, t, None, msg.clone()),
        }
        if let Some(msg) = &t.scaling {
            violation(&mut est, t, None, msg.clone());
        }
    }
    est.sup_ratio = finite(sup);
    Ok(est)
}

/// Everything a suite run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub suite: String,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub dims: Dims,
    pub parallelism: usize,
    pub budgets: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { suite: "all".into(), trials: 100, seed: 0, tol: 1e-10, dims: Dims::default(), parallelism: 1, budgets: BTreeMap::new() }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-3) {
            return Err(Error::Config(format!("tol must lie in (0, 1e-3], got {}", self.tol)));
        }
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        self.dims.validate().map_err(|e| Error::Config(e.to_string()))?;
        suite(&self.suite).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

/// JSON report of a suite run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    pub caps: Dims,
    pub budget: BTreeMap<String, Option<f64>>,
    pub budget_source: BTreeMap<String, BudgetSource>,
    pub sup_ratio: BTreeMap<String, Option<f64>>,
    pub witness: BTreeMap<String, Option<Witness>>,
    pub detail_max: BTreeMap<String, BTreeMap<String, Option<f64>>>,
    pub violation_count: BTreeMap<String, usize>,
    pub violations: Vec<Violation>,
    pub curves: BTreeMap<String, Curve>,
    /// Wall-clock marker; the only field that varies between reruns.
    pub timestamp: String,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violation_count.values().all(|&c| c == 0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Input(format!("bad report: {e}")))
    }

    /// One line per kind: name, sup ratio, budget, verdict.
    pub fn summary_lines(&self) -> Vec<String> {
        let show = |v: Option<f64>| v.map_or("inf".to_string(), |x| format!("{x:.6e}"));
        self.sup_ratio
            .iter()
            .map(|(k, sup)| {
                let n = self.violation_count.get(k).copied().unwrap_or(0);
                let verdict = if n == 0 { "PASS".to_string() } else { format!("FAIL ({n} violations)") };
                let src = self.budget_source.get(k).map(|s| format!("{s:?}").to_lowercase()).unwrap_or_default();
                format!("{k:<22} sup {} budget {} [{src}] {verdict}", show(*sup), show(self.budget.get(k).copied().flatten()))
            })
            .collect()
    }

    /// `name.csv` contents for every curve.
    pub fn curves_csv(&self) -> Vec<(String, String)> {
        self.curves.iter().map(|(k, c)| (format!("{k}.csv"), c.to_csv("x", "y"))).collect()
    }
}

fn timestamp() -> String {
    let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("unix:{secs}")
}

/// Curves added to a report depending on the kinds it contains.
fn suite_curves(kinds: &[InequalityKind], estimates: &[ConstantEstimate]) -> Result<BTreeMap<String, Curve>> {
    let mut curves = BTreeMap::new();
    // per-p sup ratios of the random trials, grouped by head
    for (kind, est) in kinds.iter().zip(estimates) {
        let (head, p) = match kind {
            InequalityKind::St(p) => ("ST", *p),
            InequalityKind::Dd(p) => ("DD", *p),
            InequalityKind::Mt(p) => ("MT", *p),
            InequalityKind::Bg(p) => ("BG", *p),
            InequalityKind::CNorm(p) => ("CNORM", *p),
            _ => continue,
        };
        let c: &mut Curve = curves.entry(format!("sup_{head}")).or_default();
        c.x.push(p);
        c.y.push(est.sup_ratio.unwrap_or(f64::INFINITY));
    }
    if kinds.iter().any(|k| matches!(k, InequalityKind::St(_) | InequalityKind::Mt(_) | InequalityKind::CornerDemo)) {
        for (name, c) in families::classical_curves(CURVE_SIZE, &CURVE_PS)? {
            curves.insert(format!("corner_{name}"), c);
        }
    }
    if kinds.iter().any(|k| matches!(k, InequalityKind::CornerDemo)) {
        let g = families::corner_growth(&GROWTH_SIZES)?;
        let xs: Vec<f64> = g.rows.iter().map(|r| r.n as f64).collect();
        curves.insert("growth_classical".into(), Curve { x: xs.clone(), y: g.rows.iter().map(|r| r.classical).collect() });
        curves.insert("growth_dst".into(), Curve { x: xs, y: g.rows.iter().map(|r| r.distributional).collect() });
    }
    if let Some(p) = kinds.iter().find_map(|k| if let InequalityKind::CNorm(p) = k { Some(*p) } else { None }) {
        let eps = [0.1, 0.01, 0.001];
        let y = eps.iter().map(|&e| families::c_family_ratio(p, e)).collect::<Result<Vec<_>>>()?;
        curves.insert(format!("cnorm_family_p{p}"), Curve { x: eps.to_vec(), y });
    }
    Ok(curves)
}

/// Runs every kind of the configured suite on a pool of
/// `cfg.parallelism` threads.
pub fn run_suite(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let kinds = suite(&cfg.suite)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let (estimates, curves) = pool.install(|| -> Result<_> {
        let est = kinds
            .iter()
            .map(|k| estimate_constant(k, &cfg.dims, cfg.trials, cfg.seed, cfg.tol, &cfg.budgets))
            .collect::<Result<Vec<_>>>()?;
        let curves = suite_curves(&kinds, &est)?;
        Ok((est, curves))
    })?;
    let mut report = Report {
        suite: cfg.suite.clone(),
        seed: cfg.seed,
        trials: cfg.trials,
        tol: cfg.tol,
        caps: cfg.dims,
        budget: BTreeMap::new(),
        budget_source: BTreeMap::new(),
        sup_ratio: BTreeMap::new(),
        witness: BTreeMap::new(),
        detail_max: BTreeMap::new(),
        violation_count: BTreeMap::new(),
        violations: vec![],
        curves,
        timestamp: timestamp(),
    };
    for e in estimates {
        report.budget.insert(e.kind.clone(), e.budget);
        report.budget_source.insert(e.kind.clone(), e.budget_source);
        report.sup_ratio.insert(e.kind.clone(), e.sup_ratio);
        report.witness.insert(e.kind.clone(), e.witness);
        report.detail_max.insert(e.kind.clone(), e.detail_max);
        report.violation_count.insert(e.kind.clone(), e.violation_count);
        report.violations.extend(e.violations);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(suite: &str, trials: usize, parallelism: usize) -> RunConfig {
        RunConfig { suite: suite.into(), trials, dims: Dims { max_dim: 8, max_levels: 4 }, parallelism, ..Default::default() }
    }

    #[test]
    fn parallelism_does_not_change_reports() {
        let mut a = run_suite(&small("DST,DMT,GUNDY(0.5)", 12, 1)).unwrap();
        let mut b = run_suite(&small("DST,DMT,GUNDY(0.5)", 12, 3)).unwrap();
        a.timestamp.clear();
        b.timestamp.clear();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(Report::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(run_suite(&RunConfig { trials: 0, ..small("DST", 1, 1) }).is_err());
        assert!(run_suite(&RunConfig { tol: 0.1, ..small("DST", 1, 1) }).is_err());
        assert!(run_suite(&small("NOPE", 1, 1)).is_err());
    }

    #[test]
    fn failing_budget_is_reported() {
        let mut cfg = small("DST", 3, 1);
        cfg.budgets.insert("DST".into(), 1e-9);
        let r = run_suite(&cfg).unwrap();
        assert!(!r.passed());
        assert_eq!(r.violation_count["DST"], 3);
    }
}
