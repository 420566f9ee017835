//! Acceptance criteria, one pass/fail line each. Runs as a plain binary so
//! every criterion is evaluated and reported even when an earlier one fails.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use ncmart::harness::{self, estimate_constant, run_suite, Dims, IdentityKind, InequalityKind, Report, RunConfig};
use ncmart::triangular;

// criterion 1
const IDENTITY_TRIALS: usize = 1000;
const IDENTITY_TOL: f64 = 1e-10;
const IDENTITY_MAX_DIM: usize = 32;
const IDENTITY_TIME_LIMIT: Duration = Duration::from_secs(60);
// criterion 2
const GUNDY_TRIALS: usize = 500;
const WEAK11_TRIALS: usize = 2000;
const WEAK11_CONSTANT: f64 = 90.0;
const CNORM_TRIALS: usize = 500;
const CNORM_PS: [f64; 3] = [1.5, 2.0, 4.0];
const CNORM_EXTREMAL_FRACTION: f64 = 0.85;
const CNORM_EXTREMAL_EPS: f64 = 0.001;
const PHI_LEM_TRIALS: usize = 500;
const PHI_LEM_CONSTANT: f64 = 2.0;
// criterion 3
const DISTRIBUTIONAL_TRIALS: usize = 1000;
// criterion 4
const GROWTH_MIN_SLOPE: f64 = 0.1;
const HILBERT_SIZES: [usize; 3] = [64, 256, 1024];
const HILBERT_SLOPE_WINDOW: (f64, f64) = (0.2, 0.5);
const HILBERT_NORM_SLACK: f64 = 1e-6;
// criterion 5
const EQUIVALENCE_TRIALS: usize = 200;
// criterion 6
const CURVE_GROWTH_FROM: f64 = 20.0;
const CURVE_FLAT_TOL: f64 = 0.0;
// criterion 7 and the runtime bound
const DETERMINISM_TRIALS: &str = "10";
const DETERMINISM_SEED: &str = "1";
const FULL_TRIALS: &str = "100";
const FULL_TIME_LIMIT: Duration = Duration::from_secs(300);

struct Outcome {
    pass: bool,
    note: String,
}

fn outcome(pass: bool, note: impl Into<String>) -> Outcome {
    Outcome { pass, note: note.into() }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("inf".into(), |x| format!("{x:.6}"))
}

fn estimate(kind: &InequalityKind, trials: usize, dims: Dims) -> harness::ConstantEstimate {
    estimate_constant(kind, &dims, trials, 0, IDENTITY_TOL, &BTreeMap::new()).expect("estimate runs")
}

fn exact_identities() -> Outcome {
    let cfg = RunConfig {
        suite: "identities".into(),
        trials: IDENTITY_TRIALS,
        tol: IDENTITY_TOL,
        dims: Dims { max_dim: IDENTITY_MAX_DIM, ..Dims::default() },
        parallelism: 1,
        ..RunConfig::default()
    };
    let start = Instant::now();
    let report = run_suite(&cfg).expect("identity suite runs");
    let elapsed = start.elapsed();
    let worst = report.sup_ratio.values().map(|v| v.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    let all_kinds = IdentityKind::ALL.len() == report.sup_ratio.len();
    outcome(
        report.passed() && all_kinds && elapsed < IDENTITY_TIME_LIMIT,
        format!("{} kinds x {IDENTITY_TRIALS}, worst deviation {worst:.3e}, {:.1}s", report.sup_ratio.len(), elapsed.as_secs_f64()),
    )
}

fn stated_constants() -> Outcome {
    let dims = Dims::default();
    let mut notes = vec![];
    let mut pass = true;

    for r in [0.5, 0.1] {
        let e = estimate(&InequalityKind::Gundy(r), GUNDY_TRIALS, dims);
        pass &= e.passed() && e.sup_ratio.is_some_and(|s| s <= 1.0);
        notes.push(format!("GUNDY({r}) sup {}", fmt_opt(e.sup_ratio)));
    }

    let w = estimate(&InequalityKind::Weak11, WEAK11_TRIALS, dims);
    let proof = w.detail_max.get("over_proof_constant").copied().flatten();
    pass &= w.passed() && w.sup_ratio.is_some_and(|s| s <= WEAK11_CONSTANT) && proof.is_some_and(|p| p <= 1.0);
    notes.push(format!("WEAK11 sup {}", fmt_opt(w.sup_ratio)));

    for p in CNORM_PS {
        let conj = p / (p - 1.0);
        let e = estimate(&InequalityKind::CNorm(p), CNORM_TRIALS, dims);
        let ext = harness::c_family_ratio(p, CNORM_EXTREMAL_EPS).expect("extremal family");
        pass &= e.passed() && e.sup_ratio.is_some_and(|s| s <= conj) && ext >= CNORM_EXTREMAL_FRACTION * conj && ext <= conj;
        notes.push(format!("CNORM({p}) random {} extremal {:.4}/{conj:.4}", fmt_opt(e.sup_ratio), ext));
    }

    let phi = estimate(&"PHI_LEM(expm1)".parse().unwrap(), PHI_LEM_TRIALS, dims);
    pass &= phi.passed() && phi.sup_ratio.is_some_and(|s| s <= PHI_LEM_CONSTANT);
    notes.push(format!("PHI_LEM sup {}", fmt_opt(phi.sup_ratio)));
    outcome(pass, notes.join("; "))
}

fn distributional() -> Outcome {
    let mut pass = true;
    let mut notes = vec![];
    for name in ["DST", "DMT", "DDD", "DBG_LOWER", "DBG_UPPER"] {
        let kind: InequalityKind = name.parse().unwrap();
        let e = estimate(&kind, DISTRIBUTIONAL_TRIALS, Dims::default());
        let ok = e.passed() && e.sup_ratio.is_some() && e.budget.is_some();
        pass &= ok;
        notes.push(format!("{name} {}/{}", fmt_opt(e.sup_ratio), fmt_opt(e.budget)));
    }
    outcome(pass, notes.join("; "))
}

fn optimality() -> Outcome {
    let g = harness::corner_growth(&harness::GROWTH_SIZES).expect("corner growth");
    let budget = harness::default_budget(&InequalityKind::CornerDemo, IDENTITY_TOL);
    let dst_ok = g.rows.iter().all(|r| r.distributional <= budget);
    let d = triangular::hilbert_demo(&HILBERT_SIZES).expect("hilbert demo");
    let norms_ok = d.rows.iter().all(|r| r.opnorm_full <= std::f64::consts::PI + HILBERT_NORM_SLACK);
    let (lo, hi) = HILBERT_SLOPE_WINDOW;
    let slope_ok = d.slope >= lo && d.slope <= hi;
    outcome(
        g.classical_slope >= GROWTH_MIN_SLOPE && dst_ok && norms_ok && slope_ok,
        format!(
            "corner classical slope {:.4}, DST max {:.4} (budget {budget:.4}); Hilbert slope {:.4} (window [{lo}, {hi}]), norms <= pi: {norms_ok}",
            g.classical_slope,
            g.rows.iter().map(|r| r.distributional).fold(0.0, f64::max),
            d.slope
        ),
    )
}

fn equivalences() -> Outcome {
    let mut pass = true;
    let mut notes = vec![];
    for name in ["MOMENT_EQ", "MARC_ORLICZ"] {
        let kind: InequalityKind = name.parse().unwrap();
        let e = estimate(&kind, EQUIVALENCE_TRIALS, Dims::default());
        pass &= e.passed() && e.sup_ratio.is_some();
        notes.push(format!("{name} band [1/{0}, {0}] pinned {1}", fmt_opt(e.sup_ratio), fmt_opt(e.budget)));
    }
    outcome(pass, notes.join("; "))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ncmart"))
}

fn curves() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["verify", "--suite", "ST(2),MT(4)", "--trials", "5", "--csv-dir"])
        .arg(dir.path())
        .output()
        .expect("binary runs");
    let read = |name: &str| -> Vec<(f64, f64)> {
        let text = std::fs::read_to_string(dir.path().join(format!("{name}.csv"))).unwrap_or_default();
        text.lines()
            .skip(1)
            .filter_map(|l| l.split_once(',').map(|(x, y)| (x.parse().unwrap_or(f64::NAN), y.parse().unwrap_or(f64::NAN))))
            .collect()
    };
    let increasing = |c: &[(f64, f64)]| {
        let tail: Vec<f64> = c.iter().filter(|(p, _)| *p >= CURVE_GROWTH_FROM).map(|(_, y)| *y).collect();
        tail.len() >= 2 && tail.windows(2).all(|w| w[1] > w[0])
    };
    let flat = |c: &[(f64, f64)]| !c.is_empty() && c.iter().all(|(_, y)| (y - c[0].1).abs() <= CURVE_FLAT_TOL);
    let (st, mt, dst, dmt) = (read("corner_ST"), read("corner_MT"), read("corner_DST"), read("corner_DMT"));
    let last = |c: &[(f64, f64)]| c.last().map_or(f64::NAN, |v| v.1);
    outcome(
        status.status.code() == Some(0) && increasing(&st) && increasing(&mt) && flat(&dst) && flat(&dmt),
        format!("ST(100) {:.4}, MT(100) {:.4}, DST {:.4}, DMT {:.4}", last(&st), last(&mt), last(&dst), last(&dmt)),
    )
}

fn strip_timestamp(json: &str) -> String {
    let mut v: serde_json::Value = serde_json::from_str(json).expect("report is JSON");
    v.as_object_mut().unwrap().remove("timestamp");
    v.to_string()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |parallel: &str, name: &str| -> String {
        let out = dir.path().join(name);
        let st = bin()
            .args(["verify", "--suite", "all", "--trials", DETERMINISM_TRIALS, "--seed", DETERMINISM_SEED, "--parallel", parallel, "--out"])
            .arg(&out)
            .output()
            .expect("binary runs");
        assert!(st.status.code().is_some_and(|c| c <= 1));
        std::fs::read_to_string(out).expect("report written")
    };
    let a = run("1", "a.json");
    let b = run("1", "b.json");
    let c = run("4", "c.json");
    let schema = {
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        ["suite", "seed", "trials", "budget", "sup_ratio", "witness", "violations", "curves"].iter().all(|k| v.get(k).is_some())
            && Report::from_json(&a).is_ok()
    };
    let same = strip_timestamp(&a) == strip_timestamp(&b) && strip_timestamp(&a) == strip_timestamp(&c);
    outcome(same && schema, format!("reruns identical: {same}, schema keys present: {schema}"))
}

fn full_runtime() -> Outcome {
    let start = Instant::now();
    let st = bin().args(["verify", "--suite", "all", "--trials", FULL_TRIALS, "--seed", "0", "--parallel", "1"]).output().expect("binary runs");
    let elapsed = start.elapsed();
    outcome(
        st.status.code() == Some(0) && elapsed < FULL_TIME_LIMIT,
        format!("exit {:?}, {:.1}s", st.status.code(), elapsed.as_secs_f64()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 exact identities", exact_identities),
        ("2 stated constants", stated_constants),
        ("3 distributional budgets", distributional),
        ("4 optimality mechanism", optimality),
        ("5 norm equivalences", equivalences),
        ("6 constant curves", curves),
        ("7 determinism", determinism),
        ("8 full suite runtime", full_runtime),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let o = f();
        failed += usize::from(!o.pass);
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.note);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
