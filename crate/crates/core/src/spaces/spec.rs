use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// Concave increasing weight `φ` with `φ(0+) = 0`, `φ(∞) = ∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Phi {
    /// `log(1 + t)`.
    Log1p,
    /// `t log(e²/t)` on `(0, 1]`, `log(e² t)` afterwards.
    MomentLog,
    /// Linear interpolation through `(0, 0)` and the given points,
    /// extended with the last slope.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl Phi {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Phi::Log1p => t.ln_1p(),
            Phi::MomentLog => {
                if t <= 0.0 {
                    0.0
                } else if t <= 1.0 {
                    t * (2.0 - t.ln())
                } else {
                    2.0 + t.ln()
                }
            }
            Phi::PiecewiseLinear(pts) => {
                let (mut x0, mut y0) = (0.0, 0.0);
                for &(x, y) in pts {
                    if t <= x {
                        return y0 + (y - y0) * (t - x0) / (x - x0);
                    }
                    (x0, y0) = (x, y);
                }
                let n = pts.len();
                let (xp, yp) = if n >= 2 { pts[n - 2] } else { (0.0, 0.0) };
                y0 + (y0 - yp) / (x0 - xp) * (t - x0)
            }
        }
    }

    /// `lim_{t→0+} t/φ(t)`.
    pub fn slope_at_zero_inverse(&self) -> f64 {
        match self {
            Phi::Log1p => 1.0,
            Phi::MomentLog => 0.0,
            Phi::PiecewiseLinear(pts) => pts[0].0 / pts[0].1,
        }
    }

    /// Interior kinks where `φ` fails to be smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Phi::PiecewiseLinear(pts) => pts.iter().map(|p| p.0).collect(),
            Phi::MomentLog => vec![1.0],
            Phi::Log1p => Vec::new(),
        }
    }

    /// Structural and grid validation of the concavity contract.
    pub fn validate(&self) -> Result<()> {
        if let Phi::PiecewiseLinear(pts) = self {
            if pts.is_empty() {
                return input("piecewise φ needs at least one point");
            }
            let mut prev = (0.0, 0.0);
            let mut slope = f64::INFINITY;
            for &(x, y) in pts {
                if !(x.is_finite() && y.is_finite()) || x <= prev.0 || y <= prev.1 {
                    return input("piecewise φ must be strictly increasing through positive points");
                }
                let s = (y - prev.1) / (x - prev.0);
                if s > slope * (1.0 + 1e-12) {
                    return input("piecewise φ must be concave");
                }
                slope = s;
                prev = (x, y);
            }
        }
        let grid: Vec<f64> = (-60..=60).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| self.eval(t)).collect();
        if vals.windows(2).any(|w| !(w[1] > w[0])) {
            return input("φ must be increasing");
        }
        Ok(())
    }
}

/// Orlicz function `Φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum OrliczFn {
    /// `e^t − 1`.
    ExpM1,
    /// `t log(1 + t)`.
    TLog1p,
    /// `t^p`, `p ≥ 1`.
    Power(f64),
}

impl OrliczFn {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            OrliczFn::ExpM1 => t.exp_m1(),
            OrliczFn::TLog1p => t * t.ln_1p(),
            OrliczFn::Power(p) => t.powf(p),
        }
    }

    /// `Φ⁻¹(y)` for `y ≥ 0`.
    pub fn inverse(&self, y: f64) -> f64 {
        match *self {
            OrliczFn::ExpM1 => y.ln_1p(),
            OrliczFn::Power(p) => y.powf(1.0 / p),
            OrliczFn::TLog1p => {
                if y <= 0.0 {
                    return 0.0;
                }
                if y.is_infinite() {
                    return f64::INFINITY;
                }
                // t log(1+t) = y; bracket and bisect in log space
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                while self.eval(hi) < y {
                    lo = hi;
                    hi *= 2.0;
                }
                if lo == 0.0 {
                    lo = hi;
                    while self.eval(lo) > y && lo > 1e-300 {
                        hi = lo;
                        lo *= 0.5;
                    }
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.eval(mid) < y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-15 * hi {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let OrliczFn::Power(p) = *self {
            if !(p >= 1.0) || !p.is_finite() {
                return input(format!("Orlicz power must be finite and ≥ 1, got {p}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// `(0, ∞)`.
    HalfLine,
    /// `(0, 1)`.
    Unit,
}

/// A symmetric (quasi-)norm on functions of `(0, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpaceSpec {
    Lp(f64),
    WeakL1,
    L1PlusLinf,
    L1CapLinf,
    L2PlusLinf,
    Lorentz(Phi),
    Marcinkiewicz(Phi),
    Orlicz(OrliczFn, Domain),
    WeakOrlicz(OrliczFn),
    LambdaLog,
    MLog,
}

impl SpaceSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpaceSpec::Lp(p) if !(*p > 0.0) => input(format!("Lp exponent must be in (0, ∞], got {p}")),
            SpaceSpec::Lorentz(phi) | SpaceSpec::Marcinkiewicz(phi) => phi.validate(),
            SpaceSpec::Orlicz(f, _) | SpaceSpec::WeakOrlicz(f) => f.validate(),
            _ => Ok(()),
        }
    }
}

/// A symmetric norm on finite sequences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SeqSpaceSpec {
    Lp(f64),
    MLog,
    LambdaLogSeq,
}

fn num(tok: Option<&str>, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::Input(format!("missing {what}")))?;
    match tok {
        "inf" => Ok(f64::INFINITY),
        _ => tok.parse::<f64>().map_err(|_| Error::Input(format!("bad {what}: {tok:?}"))),
    }
}

fn parse_phi(toks: &[&str]) -> Result<Phi> {
    let phi = match toks {
        ["log1p"] => Phi::Log1p,
        ["phipaper"] => Phi::MomentLog,
        ["pw", pts] => {
            let mut out = Vec::new();
            for pair in pts.split(';') {
                let mut it = pair.split(',');
                let x = num(it.next(), "φ abscissa")?;
                let y = num(it.next(), "φ value")?;
                if it.next().is_some() {
                    return input(format!("bad φ point {pair:?}"));
                }
                out.push((x, y));
            }
            Phi::PiecewiseLinear(out)
        }
        _ => return input(format!("unknown φ {:?}", toks.join(":"))),
    };
    phi.validate()?;
    Ok(phi)
}

fn parse_orlicz(toks: &[&str]) -> Result<(OrliczFn, usize)> {
    let (f, used) = match toks.first().copied() {
        Some("expm1") => (OrliczFn::ExpM1, 1),
        Some("tlog1p") => (OrliczFn::TLog1p, 1),
        Some("pow") => (OrliczFn::Power(num(toks.get(1).copied(), "Orlicz power")?), 2),
        other => return input(format!("unknown Φ {other:?}")),
    };
    f.validate()?;
    Ok((f, used))
}

impl FromStr for SpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let toks: Vec<&str> = s.trim().split(':').collect();
        let spec = match toks.as_slice() {
            ["lp", p] => SpaceSpec::Lp(num(Some(p), "exponent")?),
            ["weakl1"] => SpaceSpec::WeakL1,
            ["l1+linf"] => SpaceSpec::L1PlusLinf,
            ["l1capinf"] | ["l1^linf"] => SpaceSpec::L1CapLinf,
            ["l2+linf"] => SpaceSpec::L2PlusLinf,
            ["lambdalog"] => SpaceSpec::LambdaLog,
            ["mlog"] => SpaceSpec::MLog,
            ["lorentz", rest @ ..] => SpaceSpec::Lorentz(parse_phi(rest)?),
            ["marcinkiewicz", rest @ ..] => SpaceSpec::Marcinkiewicz(parse_phi(rest)?),
            ["orlicz", rest @ ..] => {
                let (f, used) = parse_orlicz(rest)?;
                let dom = match &rest[used..] {
                    [] | ["0inf"] => Domain::HalfLine,
                    ["01"] => Domain::Unit,
                    other => return input(format!("unknown Orlicz domain {other:?}")),
                };
                SpaceSpec::Orlicz(f, dom)
            }
            ["weakorlicz", rest @ ..] => {
                let (f, used) = parse_orlicz(rest)?;
                if used != rest.len() {
                    return input("trailing tokens after weak Orlicz function");
                }
                SpaceSpec::WeakOrlicz(f)
            }
            _ => return input(format!("unknown space {s:?}")),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phi::Log1p => write!(f, "log1p"),
            Phi::MomentLog => write!(f, "phipaper"),
            Phi::PiecewiseLinear(pts) => {
                let s: Vec<String> = pts.iter().map(|(x, y)| format!("{},{}", fmt_num(*x), fmt_num(*y))).collect();
                write!(f, "pw:{}", s.join(";"))
            }
        }
    }
}

impl fmt::Display for OrliczFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrliczFn::ExpM1 => write!(f, "expm1"),
            OrliczFn::TLog1p => write!(f, "tlog1p"),
            OrliczFn::Power(p) => write!(f, "pow:{}", fmt_num(*p)),
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceSpec::Lp(p) => write!(f, "lp:{}", fmt_num(*p)),
            SpaceSpec::WeakL1 => write!(f, "weakl1"),
            SpaceSpec::L1PlusLinf => write!(f, "l1+linf"),
            SpaceSpec::L1CapLinf => write!(f, "l1capinf"),
            SpaceSpec::L2PlusLinf => write!(f, "l2+linf"),
            SpaceSpec::Lorentz(phi) => write!(f, "lorentz:{phi}"),
            SpaceSpec::Marcinkiewicz(phi) => write!(f, "marcinkiewicz:{phi}"),
            SpaceSpec::Orlicz(g, Domain::HalfLine) => write!(f, "orlicz:{g}:0inf"),
            SpaceSpec::Orlicz(g, Domain::Unit) => write!(f, "orlicz:{g}:01"),
            SpaceSpec::WeakOrlicz(g) => write!(f, "weakorlicz:{g}"),
            SpaceSpec::LambdaLog => write!(f, "lambdalog"),
            SpaceSpec::MLog => write!(f, "mlog"),
        }
    }
}

impl FromStr for SeqSpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let toks: Vec<&str> = s.trim().split(':').collect();
        match toks.as_slice() {
            ["lp", p] => {
                let p = num(Some(p), "exponent")?;
                if !(p > 0.0) {
                    return input("lp exponent must be positive");
                }
                Ok(SeqSpaceSpec::Lp(p))
            }
            ["mlog"] => Ok(SeqSpaceSpec::MLog),
            ["lambdalog"] => Ok(SeqSpaceSpec::LambdaLogSeq),
            _ => input(format!("unknown sequence space {s:?}")),
        }
    }
}
