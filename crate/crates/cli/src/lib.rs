//! Command line front end: flag and config-file handling plus the four
//! subcommands `verify`, `estimate`, `demo` and `norm`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ncmart::harness::{self, BudgetSource, Dims, InequalityKind, Report, RunConfig};
use ncmart::ncalg::TracedElement;
use ncmart::spaces::{self, SpaceSpec};
use ncmart::stepfn::StepFunction;
use ncmart::triangular;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Window the Hilbert demo slope must fall in.
pub const DEMO_SLOPE_WINDOW: (f64, f64) = (0.2, 0.5);

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Run(String),
}

impl From<ncmart::error::Error> for CliError {
    fn from(e: ncmart::error::Error) -> Self {
        match e {
            ncmart::error::Error::Config(_) | ncmart::error::Error::Input(_) => CliError::Usage(e.to_string()),
            _ => CliError::Run(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "ncmart", version, about = "Matrix martingale inequality verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a suite and write a JSON report.
    Verify(RunFlags),
    /// Estimate the constant of one kind, or calibrate budgets.
    Estimate {
        #[command(flatten)]
        run: RunFlags,
        /// Kind to estimate, e.g. `DST` or `ST(4)`.
        #[arg(long)]
        kind: Option<String>,
        /// Emit a budget table at 2x the observed sups of every calibrated
        /// kind of the suite.
        #[arg(long)]
        calibrate: bool,
    },
    /// Deterministic demonstrations.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
    /// Norm of a step function or of the singular value function of an element.
    Norm {
        /// Space, e.g. `lp:3`, `orlicz:expm1:01`, `marcinkiewicz:phipaper`.
        #[arg(long)]
        space: String,
        /// Step function JSON, or `@path`.
        #[arg(long, conflicts_with = "element")]
        stepfn: Option<String>,
        /// Element JSON, or `@path`.
        #[arg(long)]
        element: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum Demo {
    /// Operator norms of the Hilbert surrogate `1/(i-j)` and its strict upper triangle.
    Triangular {
        #[arg(long, value_delimiter = ',', default_value = "64,256,1024")]
        sizes: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classical versus distributional ratios of corner splits.
    Growth {
        #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
        sizes: Vec<usize>,
    },
}

#[derive(Args, Debug, Default, Clone)]
pub struct RunFlags {
    /// Flat `key = value` config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_dim: Option<usize>,
    #[arg(long)]
    pub max_levels: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    pub parallel: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for one CSV file per curve.
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
    /// Budget override `KIND=value`, repeatable.
    #[arg(long = "budget", value_name = "KIND=VALUE")]
    pub budgets: Vec<String>,
}

/// Parses a flat `key = value` file; `#` starts a comment, keys are
/// case-sensitive and may not repeat.
pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key or value", i + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key {k:?}", i + 1)));
        }
    }
    Ok(out)
}

const KNOWN_KEYS: [&str; 9] = ["suite", "trials", "seed", "tol", "max_dim", "max_levels", "parallel", "out", "csv_dir"];

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse().map_err(|_| CliError::Usage(format!("bad value {v:?} for {key}")))
}

fn parse_budget_pair(s: &str) -> CliResult<(String, f64)> {
    let (k, v) = s.split_once('=').ok_or_else(|| CliError::Usage(format!("budget override {s:?} is not KIND=value")))?;
    let v: f64 = parse_value("budget", v.trim())?;
    if !(v > 0.0) {
        return Err(CliError::Usage(format!("budget for {k} must be positive")));
    }
    Ok((k.trim().to_ascii_uppercase(), v))
}

/// Fully resolved options of `verify` and `estimate`.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub run: RunConfig,
    pub out: Option<PathBuf>,
    pub csv_dir: Option<PathBuf>,
}

/// Merges the config file (if any) with the flags, flags winning.
pub fn resolve(flags: &RunFlags) -> CliResult<Resolved> {
    let file = match &flags.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };
    for k in file.keys() {
        if !KNOWN_KEYS.contains(&k.as_str()) && !k.starts_with("budget.") {
            return Err(CliError::Usage(format!("unknown config key {k:?}")));
        }
    }
    let get = |k: &str| file.get(k).map(String::as_str);
    let mut run = RunConfig::default();
    if let Some(v) = flags.suite.clone().or(get("suite").map(str::to_string)) {
        run.suite = v;
    }
    run.trials = match flags.trials {
        Some(t) => t,
        None => get("trials").map(|v| parse_value("trials", v)).transpose()?.unwrap_or(run.trials),
    };
    run.seed = match flags.seed {
        Some(s) => s,
        None => get("seed").map(|v| parse_value("seed", v)).transpose()?.unwrap_or(run.seed),
    };
    run.tol = match flags.tol {
        Some(t) => t,
        None => get("tol").map(|v| parse_value("tol", v)).transpose()?.unwrap_or(run.tol),
    };
    run.dims = Dims {
        max_dim: match flags.max_dim {
            Some(d) => d,
            None => get("max_dim").map(|v| parse_value("max_dim", v)).transpose()?.unwrap_or(run.dims.max_dim),
        },
        max_levels: match flags.max_levels {
            Some(d) => d,
            None => get("max_levels").map(|v| parse_value("max_levels", v)).transpose()?.unwrap_or(run.dims.max_levels),
        },
    };
    run.parallelism = match flags.parallel {
        Some(p) => p,
        None => get("parallel").map(|v| parse_value("parallel", v)).transpose()?.unwrap_or(run.parallelism),
    };
    for (k, v) in &file {
        if let Some(kind) = k.strip_prefix("budget.") {
            let (k, v) = parse_budget_pair(&format!("{kind}={v}"))?;
            run.budgets.insert(k, v);
        }
    }
    for b in &flags.budgets {
        let (k, v) = parse_budget_pair(b)?;
        run.budgets.insert(k, v);
    }
    run.validate()?;
    let out = flags.out.clone().or(get("out").map(PathBuf::from));
    let csv_dir = flags.csv_dir.clone().or(get("csv_dir").map(PathBuf::from));
    Ok(Resolved { run, out, csv_dir })
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Run(format!("cannot write {}: {e}", path.display())))
}

fn write_curves(report: &Report, dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Run(format!("cannot create {}: {e}", dir.display())))?;
    for (name, csv) in report.curves_csv() {
        write_file(&dir.join(name), &csv)?;
    }
    Ok(())
}

fn verify(flags: &RunFlags, out: &mut dyn std::io::Write) -> CliResult<i32> {
    let r = resolve(flags)?;
    let report = harness::run_suite(&r.run)?;
    for line in report.summary_lines() {
        writeln!(out, "{line}").ok();
    }
    if let Some(p) = &r.out {
        write_file(p, &report.to_json())?;
    }
    if let Some(d) = &r.csv_dir {
        write_curves(&report, d)?;
    }
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    writeln!(out, "{verdict}: suite {} seed {} trials {}", report.suite, report.seed, report.trials).ok();
    Ok(if report.passed() { EXIT_PASS } else { EXIT_VIOLATION })
}

/// Budget table with `2 × sup` for every calibrated kind of the suite and
/// a head line covering all exponents of the same family.
pub fn calibration_table(cfg: &RunConfig) -> CliResult<String> {
    let mut lines = vec![format!(
        "# 2x observed sup, seed {}, {} trials, max_dim {}, max_levels {}",
        cfg.seed, cfg.trials, cfg.dims.max_dim, cfg.dims.max_levels
    )];
    let mut heads: BTreeMap<String, f64> = BTreeMap::new();
    for kind in harness::suite(&cfg.suite)? {
        if kind.budget_source() != BudgetSource::Calibrated {
            continue;
        }
        let est = harness::estimate_constant(&kind, &cfg.dims, cfg.trials, cfg.seed, cfg.tol, &BTreeMap::new())?;
        let sup = est.sup_ratio.ok_or_else(|| CliError::Run(format!("{kind}: non-finite sup, cannot calibrate")))?;
        let name = kind.to_string();
        if let Some((head, _)) = name.split_once('(') {
            let h = heads.entry(head.to_string()).or_insert(0.0);
            *h = h.max(2.0 * sup);
        }
        lines.push(format!("{name} = {:e}", 2.0 * sup));
    }
    for (h, v) in heads {
        lines.push(format!("{h} = {v:e}"));
    }
    Ok(lines.join("\n") + "\n")
}

fn estimate(flags: &RunFlags, kind: Option<&str>, calibrate: bool, out: &mut dyn std::io::Write) -> CliResult<i32> {
    let r = resolve(flags)?;
    let pool = rayon_pool(r.run.parallelism)?;
    let text = if calibrate {
        pool.install(|| calibration_table(&r.run))?
    } else {
        let kind: InequalityKind = kind.ok_or_else(|| CliError::Usage("estimate needs --kind or --calibrate".into()))?.parse()?;
        let est = pool.install(|| harness::estimate_constant(&kind, &r.run.dims, r.run.trials, r.run.seed, r.run.tol, &r.run.budgets))?;
        serde_json::to_string_pretty(&est).expect("estimates serialize") + "\n"
    };
    match &r.out {
        Some(p) => write_file(p, &text)?,
        None => {
            write!(out, "{text}").ok();
        }
    }
    Ok(EXIT_PASS)
}

fn rayon_pool(n: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| CliError::Run(e.to_string()))
}

fn demo(which: &Demo, out: &mut dyn std::io::Write) -> CliResult<i32> {
    match which {
        Demo::Triangular { sizes, out: path } => {
            let d = triangular::hilbert_demo(sizes)?;
            let csv = d.to_csv();
            match path {
                Some(p) => write_file(p, &csv)?,
                None => {
                    write!(out, "{csv}").ok();
                }
            }
            let (lo, hi) = DEMO_SLOPE_WINDOW;
            let bounded = d.rows.iter().all(|r| r.opnorm_full <= std::f64::consts::PI + 1e-6);
            let inside = d.slope >= lo && d.slope <= hi;
            eprintln!("Hilbert surrogate 1/(i-j): slope {:.6} (window [{lo}, {hi}]), full norms bounded by pi: {bounded}", d.slope);
            Ok(if inside && bounded { EXIT_PASS } else { EXIT_VIOLATION })
        }
        Demo::Growth { sizes } => {
            let g = harness::corner_growth(sizes)?;
            writeln!(out, "n,classical,distributional").ok();
            for r in &g.rows {
                writeln!(out, "{},{:.12},{:.12}", r.n, r.classical, r.distributional).ok();
            }
            eprintln!("classical slope vs log n: {:.6}", g.classical_slope);
            Ok(EXIT_PASS)
        }
    }
}

fn read_arg(s: &str) -> CliResult<String> {
    match s.strip_prefix('@') {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {p}: {e}"))),
        None => Ok(s.to_string()),
    }
}

fn norm(space: &str, stepfn: Option<&str>, element: Option<&str>, out: &mut dyn std::io::Write) -> CliResult<i32> {
    let spec: SpaceSpec = space.parse()?;
    spec.validate()?;
    let f = match (stepfn, element) {
        (Some(s), None) => StepFunction::from_json(&read_arg(s)?)?,
        (None, Some(e)) => TracedElement::from_json(&read_arg(e)?)?.mu(),
        _ => return Err(CliError::Usage("norm needs exactly one of --stepfn, --element".into())),
    };
    writeln!(out, "{:e}", spaces::norm(&f, &spec)).ok();
    Ok(EXIT_PASS)
}

/// Runs the CLI on `args`, writing normal output to `out`; returns the
/// process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            e.print().ok();
            return code;
        }
    };
    let res = match &cli.command {
        Command::Verify(flags) => verify(flags, out),
        Command::Estimate { run, kind, calibrate } => estimate(run, kind.as_deref(), *calibrate, out),
        Command::Demo { which } => demo(which, out),
        Command::Norm { space, stepfn, element } => norm(space, stepfn.as_deref(), element.as_deref(), out),
    };
    match res {
        Ok(code) => code,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Run(m)) => {
            eprintln!("error: {m}");
            EXIT_VIOLATION
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c = parse_config("# header\nsuite = identities\ntrials=5 # inline\n\nbudget.DST = 3\n").unwrap();
        assert_eq!(c["suite"], "identities");
        assert_eq!(c["trials"], "5");
        assert_eq!(c["budget.DST"], "3");
        assert!(parse_config("suite identities").is_err());
        assert!(parse_config("a = 1\na = 2").is_err());
        assert!(parse_config(" = 1").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.conf");
        fs::write(&p, "suite = identities\ntrials = 7\nseed = 3\nbudget.DST = 4\n").unwrap();
        let flags = RunFlags { config: Some(p), trials: Some(2), budgets: vec!["dmt=5".into()], ..Default::default() };
        let r = resolve(&flags).unwrap();
        assert_eq!(r.run.suite, "identities");
        assert_eq!(r.run.trials, 2);
        assert_eq!(r.run.seed, 3);
        assert_eq!(r.run.budgets["DST"], 4.0);
        assert_eq!(r.run.budgets["DMT"], 5.0);
    }

    #[test]
    fn bad_configs_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.conf");
        fs::write(&p, "colour = blue\n").unwrap();
        assert!(matches!(resolve(&RunFlags { config: Some(p), ..Default::default() }), Err(CliError::Usage(_))));
        let missing = RunFlags { config: Some(dir.path().join("nope")), ..Default::default() };
        assert!(matches!(resolve(&missing), Err(CliError::Usage(_))));
        assert!(matches!(resolve(&RunFlags { tol: Some(0.5), ..Default::default() }), Err(CliError::Usage(_))));
    }

    #[test]
    fn exit_codes() {
        let mut sink = Vec::new();
        assert_eq!(run_with(["ncmart", "frobnicate"], &mut sink), EXIT_USAGE);
        assert_eq!(run_with(["ncmart", "verify", "--suite", "ID(log_kernel)", "--trials", "3"], &mut sink), EXIT_PASS);
        assert_eq!(run_with(["ncmart", "verify", "--suite", "DST", "--trials", "2", "--max-dim", "6", "--budget", "DST=1e-12"], &mut sink), EXIT_VIOLATION);
        assert_eq!(run_with(["ncmart", "norm", "--space", "lp:2", "--stepfn", r#"{"pieces":[[4,1]]}"#], &mut sink), EXIT_PASS);
        assert!(String::from_utf8_lossy(&sink).contains("2e0"));
    }

    fn run(args: &[&str]) -> (i32, String) {
        let mut sink = Vec::new();
        let code = run_with(std::iter::once("ncmart").chain(args.iter().copied()), &mut sink);
        (code, String::from_utf8_lossy(&sink).into_owned())
    }

    #[test]
    fn passing_suite_writes_report() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.json");
        let (code, text) = run(&["verify", "--suite", "identities", "--trials", "5", "--out", out.to_str().unwrap()]);
        assert_eq!(code, EXIT_PASS, "{text}");
        assert!(text.contains("PASS"));
        let r = harness::Report::from_json(&fs::read_to_string(out).unwrap()).unwrap();
        assert!(r.passed());
        assert_eq!(r.trials, 5);
    }

    #[test]
    fn usage_errors() {
        for args in [
            &["verify", "--suite", "NOPE"][..],
            &["verify", "--trials", "0"],
            &["verify", "--bogus"],
            &["verify", "--budget", "DST"],
            &["norm", "--space", "lp:0", "--stepfn", r#"{"pieces":[[1,1]]}"#],
            &["norm", "--space", "lp:2", "--stepfn", r#"{"pieces":[[1,1],[1,2]]}"#],
            &["norm", "--space", "lp:2"],
            &["estimate", "--suite", "DST"],
        ] {
            assert_eq!(run(args).0, EXIT_USAGE, "{args:?}");
        }
    }

    #[test]
    fn config_file_with_flag_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let conf = dir.path().join("run.conf");
        let out = dir.path().join("r.json");
        fs::write(&conf, format!("suite = identities\ntrials = 9\nseed = 4\nout = {}\n", out.display())).unwrap();
        assert_eq!(run(&["verify", "--config", conf.to_str().unwrap(), "--trials", "2"]).0, EXIT_PASS);
        let r = harness::Report::from_json(&fs::read_to_string(out).unwrap()).unwrap();
        assert_eq!((r.trials, r.seed), (2, 4));
    }

    #[test]
    fn element_norm() {
        let el = r#"{"blocks":[{"dim":2,"weight":1.0,"re":[[3,0],[0,4]]}]}"#;
        let (code, text) = run(&["norm", "--space", "lp:2", "--element", el]);
        assert_eq!(code, EXIT_PASS);
        assert!((text.trim().parse::<f64>().unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn calibration_table_parses_as_budgets() {
        let (code, text) = run(&["estimate", "--suite", "DST,ST(2),ST(4)", "--trials", "3", "--calibrate"]);
        assert_eq!(code, EXIT_PASS);
        let b = harness::parse_budgets(&text).unwrap();
        assert!(["DST", "ST(2)", "ST(4)", "ST"].iter().all(|k| b.contains_key(*k)), "{b:?}");
    }

    #[test]
    fn demos_emit_csv() {
        let (code, text) = run(&["demo", "growth", "--sizes", "8,16"]);
        assert_eq!(code, EXIT_PASS);
        assert_eq!(text.lines().count(), 3);
        let (code, text) = run(&["demo", "triangular", "--sizes", "8,16,32"]);
        assert!(code == EXIT_PASS || code == EXIT_VIOLATION);
        assert!(text.starts_with("n,opnorm_full,opnorm_truncated,log_n\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
