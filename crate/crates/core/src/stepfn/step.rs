use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// A decreasing, right-continuous, nonnegative step function on `(0, ∞)`.
///
/// Stored as `(length, value)` pieces with strictly decreasing positive
/// values; the function vanishes after the last piece. Only the last piece
/// may have infinite length.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    pieces: Vec<(f64, f64)>,
}

impl StepFunction {
    /// Validates an explicit piece list. A trailing zero-valued piece is
    /// accepted and dropped.
    pub fn new(pieces: Vec<(f64, f64)>) -> Result<Self> {
        let n = pieces.len();
        let mut out = Vec::with_capacity(n);
        let mut prev = f64::INFINITY;
        for (i, &(len, val)) in pieces.iter().enumerate() {
            if !(len > 0.0) || len.is_nan() {
                return input(format!("piece {i}: length must be positive, got {len}"));
            }
            if len.is_infinite() && i + 1 != n {
                return input(format!("piece {i}: only the last piece may be infinite"));
            }
            if !val.is_finite() || val < 0.0 {
                return input(format!("piece {i}: value must be finite and nonnegative, got {val}"));
            }
            if val >= prev {
                return input(format!("piece {i}: values must strictly decrease"));
            }
            prev = val;
            if val > 0.0 {
                out.push((len, val));
            }
        }
        Ok(Self { pieces: out })
    }

    /// Decreasing rearrangement of an unordered list of `(length, value)`
    /// atoms. Equal values merge; zero values vanish; everything below an
    /// infinitely long atom is unreachable and dropped.
    pub fn rearrange(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        for &(len, val) in &atoms {
            if !(len >= 0.0) || !val.is_finite() || val < 0.0 {
                return input(format!("invalid atom ({len}, {val})"));
            }
        }
        atoms.retain(|&(len, val)| len > 0.0 && val > 0.0);
        atoms.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut pieces: Vec<(f64, f64)> = Vec::new();
        for (len, val) in atoms {
            match pieces.last_mut() {
                Some(last) if last.0.is_infinite() => break,
                Some(last) if last.1 == val => last.0 += len,
                _ => pieces.push((len, val)),
            }
        }
        Ok(Self { pieces })
    }

    pub fn zero() -> Self {
        Self { pieces: Vec::new() }
    }

    /// `value · χ_(0, len)`.
    pub fn indicator(len: f64, value: f64) -> Result<Self> {
        Self::new(vec![(len, value)])
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// True when the last piece is infinitely long with a positive value.
    pub fn has_infinite_tail(&self) -> bool {
        self.pieces.last().is_some_and(|p| p.0.is_infinite())
    }

    /// Right endpoints of all pieces (the last one may be `∞`).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.pieces
            .iter()
            .map(|&(len, _)| {
                acc += len;
                acc
            })
            .collect()
    }

    /// Measure of the support.
    pub fn support(&self) -> f64 {
        self.pieces.iter().map(|p| p.0).sum()
    }

    /// `μ(0)`, the largest value.
    pub fn sup(&self) -> f64 {
        self.pieces.first().map_or(0.0, |p| p.1)
    }

    /// Right-continuous evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        let mut end = 0.0;
        for &(len, val) in &self.pieces {
            end += len;
            if t < end {
                return val;
            }
        }
        0.0
    }

    /// Left limit `f(t−)`.
    pub fn eval_left(&self, t: f64) -> f64 {
        let mut end = 0.0;
        for &(len, val) in &self.pieces {
            end += len;
            if t <= end {
                return val;
            }
        }
        0.0
    }

    /// `n_f(s) = |{f > s}|`.
    pub fn distribution_at(&self, s: f64) -> f64 {
        self.pieces.iter().take_while(|p| p.1 > s).map(|p| p.0).sum()
    }

    /// `∫_0^t f`.
    pub fn prefix_integral(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut start = 0.0;
        for &(len, val) in &self.pieces {
            if t <= start {
                break;
            }
            let end = start + len;
            acc += val * (t.min(end) - start);
            start = end;
        }
        acc
    }

    /// `∫_0^∞ f`, infinite for a positive infinite tail.
    pub fn total_mass(&self) -> f64 {
        self.pieces.iter().map(|&(l, v)| l * v).sum()
    }

    /// `∫_0^∞ f^p` for `p > 0`.
    pub fn integral_pow(&self, p: f64) -> f64 {
        self.pieces.iter().map(|&(l, v)| l * v.powf(p)).sum()
    }

    /// Dilation `σ_s f(t) = f(t/s)`.
    pub fn dilate(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Input(format!("dilation factor must be positive, got {s}")));
        }
        Ok(Self { pieces: self.pieces.iter().map(|&(l, v)| (l * s, v)).collect() })
    }

    /// Pointwise power `f^p`, `p > 0` (still decreasing).
    pub fn powf(&self, p: f64) -> Self {
        Self::rearrange(self.pieces.iter().map(|&(l, v)| (l, v.powf(p))))
            .expect("powers of valid values stay valid")
    }

    /// `c · f` for `c ≥ 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return input(format!("scale must be finite and nonnegative, got {c}"));
        }
        Self::rearrange(self.pieces.iter().map(|&(l, v)| (l, c * v)))
    }

    /// `f · χ_(0, t)`.
    pub fn truncate(&self, t: f64) -> Self {
        let mut out = Vec::new();
        let mut start = 0.0;
        for &(len, val) in &self.pieces {
            if start >= t {
                break;
            }
            out.push(((start + len).min(t) - start, val));
            start += len;
        }
        Self { pieces: out }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&StepJson::from(self)).expect("step function JSON encoding")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: StepJson =
            serde_json::from_str(s).map_err(|e| Error::Input(format!("step function JSON: {e}")))?;
        Self::try_from(raw)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LengthJson {
    Finite(f64),
    Word(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepJson {
    pieces: Vec<(LengthJson, f64)>,
}

impl From<&StepFunction> for StepJson {
    fn from(f: &StepFunction) -> Self {
        let pieces = f
            .pieces
            .iter()
            .map(|&(l, v)| {
                let len = if l.is_infinite() { LengthJson::Word("inf".into()) } else { LengthJson::Finite(l) };
                (len, v)
            })
            .collect();
        StepJson { pieces }
    }
}

impl TryFrom<StepJson> for StepFunction {
    type Error = Error;

    fn try_from(raw: StepJson) -> Result<Self> {
        let mut pieces = Vec::with_capacity(raw.pieces.len());
        for (len, val) in raw.pieces {
            let len = match len {
                LengthJson::Finite(x) => x,
                LengthJson::Word(w) if w == "inf" => f64::INFINITY,
                LengthJson::Word(w) => return input(format!("unknown length token {w:?}")),
            };
            pieces.push((len, val));
        }
        StepFunction::new(pieces)
    }
}

impl Serialize for StepFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StepJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = StepJson::deserialize(d)?;
        StepFunction::try_from(raw).map_err(serde::de::Error::custom)
    }
}
