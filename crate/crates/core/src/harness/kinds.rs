use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::spaces::OrliczFn;

/// Exact identities exercised by the `identities` suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdentityKind {
    LogKernel,
    TraceScaling,
    Corner,
    Column,
    CondExp,
    Duality,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 6] = [
        IdentityKind::LogKernel,
        IdentityKind::TraceScaling,
        IdentityKind::Corner,
        IdentityKind::Column,
        IdentityKind::CondExp,
        IdentityKind::Duality,
    ];

    fn name(self) -> &'static str {
        match self {
            IdentityKind::LogKernel => "log_kernel",
            IdentityKind::TraceScaling => "trace_scaling",
            IdentityKind::Corner => "corner",
            IdentityKind::Column => "column",
            IdentityKind::CondExp => "condexp",
            IdentityKind::Duality => "duality",
        }
    }
}

/// Martingale inequality of the quasi-Banach pair `L log L(0,1) → L_1(0,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QbWhich {
    Stein,
    Mt,
}

/// Built-in linear maps for the extrapolation checkers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapName {
    /// Alternating-sign transform on a dyadic commutative filtration.
    Burkholder,
    /// Coarsest conditional expectation of a random filtration.
    CondExp,
}

/// Every check the harness knows how to run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InequalityKind {
    Dst,
    Ddd,
    Dmt,
    DbgLower,
    DbgUpper,
    St(f64),
    Dd(f64),
    Mt(f64),
    Bg(f64),
    Weak11,
    /// Commutative Gundy decomposition, `λ = r·‖x‖_∞`.
    Gundy(f64),
    /// Gundy construction on noncommutative filtrations.
    GundyNc(f64),
    MomentEq,
    MarcOrlicz,
    CstarFact,
    CNorm(f64),
    CornerDemo,
    Dfww(usize),
    PhiLem(OrliczFn),
    QbPair(QbWhich),
    Extrap1(MapName),
    Extrap2(MapName),
    Identity(IdentityKind),
}

/// How a kind's budget is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetSource {
    /// A constant stated as a bound.
    Stated,
    /// 2× the sup of the calibration run.
    Calibrated,
    /// A tolerance on an exact identity.
    Identity,
}

impl InequalityKind {
    /// Constant fixed by the statement itself, if any.
    pub fn fixed_budget(&self, tol: f64) -> Option<f64> {
        match *self {
            InequalityKind::Weak11 => Some(90.0),
            InequalityKind::Gundy(_) => Some(1.0),
            InequalityKind::CNorm(p) => Some(p / (p - 1.0)),
            InequalityKind::PhiLem(_) => Some(2.0),
            InequalityKind::Dfww(_) => Some(1.0 + 1e-12),
            InequalityKind::Identity(_) => Some(tol),
            _ => None,
        }
    }

    pub fn budget_source(&self) -> BudgetSource {
        match self {
            InequalityKind::Identity(_) => BudgetSource::Identity,
            k if k.fixed_budget(0.0).is_some() => BudgetSource::Stated,
            _ => BudgetSource::Calibrated,
        }
    }

    /// Kinds whose instances are rerun with halved weights.
    pub fn scaling_checked(&self) -> bool {
        matches!(self, InequalityKind::Dst | InequalityKind::Dmt)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InequalityKind::St(p) | InequalityKind::Dd(p) | InequalityKind::Mt(p) | InequalityKind::Bg(p) | InequalityKind::CNorm(p)
                if !(p > 1.0 && p.is_finite()) =>
            {
                input(format!("{self}: exponent must lie in (1, ∞)"))
            }
            InequalityKind::Gundy(r) | InequalityKind::GundyNc(r) if !(r > 0.0 && r.is_finite()) => {
                input(format!("{self}: level factor must be positive"))
            }
            InequalityKind::Dfww(n) if n < 4 => input("DFWW needs N ≥ 4"),
            InequalityKind::PhiLem(f) => f.validate(),
            _ => Ok(()),
        }
    }
}

fn fmt_p(p: f64) -> String {
    format!("{p}")
}

impl fmt::Display for InequalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InequalityKind::Dst => write!(f, "DST"),
            InequalityKind::Ddd => write!(f, "DDD"),
            InequalityKind::Dmt => write!(f, "DMT"),
            InequalityKind::DbgLower => write!(f, "DBG_LOWER"),
            InequalityKind::DbgUpper => write!(f, "DBG_UPPER"),
            InequalityKind::St(p) => write!(f, "ST({})", fmt_p(*p)),
            InequalityKind::Dd(p) => write!(f, "DD({})", fmt_p(*p)),
            InequalityKind::Mt(p) => write!(f, "MT({})", fmt_p(*p)),
            InequalityKind::Bg(p) => write!(f, "BG({})", fmt_p(*p)),
            InequalityKind::Weak11 => write!(f, "WEAK11"),
            InequalityKind::Gundy(r) => write!(f, "GUNDY({})", fmt_p(*r)),
            InequalityKind::GundyNc(r) => write!(f, "GUNDY_NC({})", fmt_p(*r)),
            InequalityKind::MomentEq => write!(f, "MOMENT_EQ"),
            InequalityKind::MarcOrlicz => write!(f, "MARC_ORLICZ"),
            InequalityKind::CstarFact => write!(f, "CSTAR_FACT"),
            InequalityKind::CNorm(p) => write!(f, "CNORM({})", fmt_p(*p)),
            InequalityKind::CornerDemo => write!(f, "CORNER_DEMO"),
            InequalityKind::Dfww(n) => write!(f, "DFWW({n})"),
            InequalityKind::PhiLem(phi) => write!(f, "PHI_LEM({})", phi.to_string().replace(':', "=")),
            InequalityKind::QbPair(QbWhich::Stein) => write!(f, "QB_PAIR(stein)"),
            InequalityKind::QbPair(QbWhich::Mt) => write!(f, "QB_PAIR(mt)"),
            InequalityKind::Extrap1(m) => write!(f, "EXTRAP1({})", map_name(*m)),
            InequalityKind::Extrap2(m) => write!(f, "EXTRAP2({})", map_name(*m)),
            InequalityKind::Identity(i) => write!(f, "ID({})", i.name()),
        }
    }
}

fn map_name(m: MapName) -> &'static str {
    match m {
        MapName::Burkholder => "burkholder",
        MapName::CondExp => "condexp",
    }
}

impl FromStr for InequalityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], Some(&s[i + 1..s.len() - 1])),
            Some(_) => return input(format!("unbalanced parentheses in {s:?}")),
            None => (s, None),
        };
        let real = |a: Option<&str>| -> Result<f64> {
            let a = a.ok_or_else(|| Error::Input(format!("{head} needs a parameter")))?;
            a.trim().parse::<f64>().map_err(|_| Error::Input(format!("bad parameter {a:?} for {head}")))
        };
        let kind = match (head.to_ascii_uppercase().as_str(), arg) {
            ("DST", None) => InequalityKind::Dst,
            ("DDD", None) => InequalityKind::Ddd,
            ("DMT", None) => InequalityKind::Dmt,
            ("DBG_LOWER", None) => InequalityKind::DbgLower,
            ("DBG_UPPER", None) => InequalityKind::DbgUpper,
            ("ST", a) => InequalityKind::St(real(a)?),
            ("DD", a) => InequalityKind::Dd(real(a)?),
            ("MT", a) => InequalityKind::Mt(real(a)?),
            ("BG", a) => InequalityKind::Bg(real(a)?),
            ("WEAK11", None) => InequalityKind::Weak11,
            ("GUNDY", a) => InequalityKind::Gundy(real(a)?),
            ("GUNDY_NC", a) => InequalityKind::GundyNc(real(a)?),
            ("MOMENT_EQ", None) => InequalityKind::MomentEq,
            ("MARC_ORLICZ", None) => InequalityKind::MarcOrlicz,
            ("CSTAR_FACT", None) => InequalityKind::CstarFact,
            ("CNORM", a) => InequalityKind::CNorm(real(a)?),
            ("CORNER_DEMO", None) => InequalityKind::CornerDemo,
            ("DFWW", Some(a)) => {
                InequalityKind::Dfww(a.trim().parse().map_err(|_| Error::Input(format!("bad DFWW size {a:?}")))?)
            }
            ("PHI_LEM", Some(a)) => {
                let spec = format!("weakorlicz:{}", a.replace('=', ":"));
                match spec.parse::<crate::spaces::SpaceSpec>()? {
                    crate::spaces::SpaceSpec::WeakOrlicz(f) => InequalityKind::PhiLem(f),
                    _ => unreachable!("weakorlicz prefix"),
                }
            }
            ("QB_PAIR", Some("stein")) => InequalityKind::QbPair(QbWhich::Stein),
            ("QB_PAIR", Some("mt")) => InequalityKind::QbPair(QbWhich::Mt),
            ("EXTRAP1", Some(m)) => InequalityKind::Extrap1(parse_map(m)?),
            ("EXTRAP2", Some(m)) => InequalityKind::Extrap2(parse_map(m)?),
            ("ID", Some(name)) => match IdentityKind::ALL.iter().find(|i| i.name() == name) {
                Some(&i) => InequalityKind::Identity(i),
                None => return input(format!("unknown identity {name:?}")),
            },
            _ => return input(format!("unknown inequality kind {s:?}")),
        };
        kind.validate()?;
        Ok(kind)
    }
}

fn parse_map(m: &str) -> Result<MapName> {
    match m {
        "burkholder" => Ok(MapName::Burkholder),
        "condexp" => Ok(MapName::CondExp),
        _ => input(format!("unknown linear map {m:?}")),
    }
}

/// Named groups of kinds.
pub fn suite(name: &str) -> Result<Vec<InequalityKind>> {
    use InequalityKind as K;
    let identities: Vec<K> = IdentityKind::ALL.iter().map(|&i| K::Identity(i)).collect();
    let constants = vec![
        K::Gundy(0.5),
        K::Gundy(0.1),
        K::Weak11,
        K::CNorm(1.5),
        K::CNorm(2.0),
        K::CNorm(4.0),
        K::PhiLem(OrliczFn::ExpM1),
        K::Dfww(1024),
    ];
    let distributional = vec![K::Dst, K::Ddd, K::Dmt, K::DbgLower, K::DbgUpper];
    let classical = vec![K::St(2.0), K::St(4.0), K::Dd(2.0), K::Dd(4.0), K::Mt(1.5), K::Mt(4.0), K::Bg(2.0), K::Bg(4.0)];
    let equivalences = vec![
        K::MomentEq,
        K::MarcOrlicz,
        K::CstarFact,
        K::QbPair(QbWhich::Stein),
        K::QbPair(QbWhich::Mt),
        K::GundyNc(0.5),
        K::Extrap1(MapName::Burkholder),
        K::Extrap1(MapName::CondExp),
        K::Extrap2(MapName::Burkholder),
        K::Extrap2(MapName::CondExp),
    ];
    let optimality = vec![K::CornerDemo];
    Ok(match name {
        "identities" => identities,
        "constants" => constants,
        "distributional" => distributional,
        "classical" => classical,
        "equivalences" => equivalences,
        "optimality" => optimality,
        "all" => [identities, constants, distributional, classical, equivalences, optimality].concat(),
        other => {
            // a single kind or a comma-separated list
            return other.split(',').map(str::parse).collect();
        }
    })
}

pub const SUITES: [&str; 7] = ["identities", "constants", "distributional", "classical", "equivalences", "optimality", "all"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in suite("all").unwrap() {
            let s = k.to_string();
            assert_eq!(s.parse::<InequalityKind>().unwrap(), k, "{s}");
        }
        assert!("ST(1)".parse::<InequalityKind>().is_err());
        assert!("FOO".parse::<InequalityKind>().is_err());
        assert!("ID(nope)".parse::<InequalityKind>().is_err());
        assert_eq!("PHI_LEM(pow=3)".parse::<InequalityKind>().unwrap(), InequalityKind::PhiLem(OrliczFn::Power(3.0)));
    }
}
