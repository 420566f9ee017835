use crate::error::{domain, input, internal, Result};

use super::StepFunction;

/// Smallest power of `t` in the monomial box.
pub const K_MIN: i32 = -2;
/// Largest power of `t` in the monomial box.
pub const K_MAX: i32 = 2;
/// Largest power of `log t` in the monomial box.
pub const J_MAX: usize = 3;

const NK: usize = (K_MAX - K_MIN + 1) as usize;
const NJ: usize = J_MAX + 1;

/// Coefficients of `Σ c_{k,j} t^k (log t)^j` on one piece.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Terms {
    c: [[f64; NJ]; NK],
}

fn kidx(k: i32) -> usize {
    (k - K_MIN) as usize
}

fn factorial_ratio(j: usize, i: usize) -> f64 {
    // j! / (j-i)!
    ((j - i + 1)..=j).map(|x| x as f64).product()
}

impl Terms {
    pub fn constant(v: f64) -> Self {
        let mut t = Self::default();
        t.c[kidx(0)][0] = v;
        t
    }

    pub fn get(&self, k: i32, j: usize) -> f64 {
        self.c[kidx(k)][j]
    }

    pub fn set(&mut self, k: i32, j: usize, v: f64) {
        self.c[kidx(k)][j] = v;
    }

    pub fn add_to(&mut self, k: i32, j: usize, v: f64) {
        self.c[kidx(k)][j] += v;
    }

    fn nonzero(&self) -> impl Iterator<Item = (i32, usize, f64)> + '_ {
        (K_MIN..=K_MAX).flat_map(move |k| {
            (0..NJ).filter_map(move |j| {
                let v = self.c[kidx(k)][j];
                (v != 0.0).then_some((k, j, v))
            })
        })
    }

    /// True when only the constant monomial is present.
    pub fn is_constant(&self) -> bool {
        self.nonzero().all(|(k, j, _)| k == 0 && j == 0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let l = t.ln();
        let mut acc = 0.0;
        for (k, j, c) in self.nonzero() {
            acc += c * t.powi(k) * l.powi(j as i32);
        }
        acc
    }

    fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        for row in out.c.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    fn plus(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.c.iter_mut().zip(other.c.iter()) {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += y;
            }
        }
        out
    }

    /// Antiderivative `F` of this piece evaluated at `t`, using
    /// `F(0) = 0` and `F(∞) = 0` as the limits of the table entries.
    fn antiderivative(&self, t: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (k, j, c) in self.nonzero() {
            acc += c * antiderivative_term(k, j, t)?;
        }
        Ok(acc)
    }
}

/// `∫ t^k (log t)^j dt`, normalized so that it vanishes at whichever
/// endpoint (0 or ∞) the monomial is integrable at.
fn antiderivative_term(k: i32, j: usize, t: f64) -> Result<f64> {
    if t == 0.0 {
        return if k >= 0 { Ok(0.0) } else { domain(format!("t^{k} log^{j} t is not integrable at 0")) };
    }
    if t.is_infinite() {
        return if k <= -2 { Ok(0.0) } else { domain(format!("t^{k} log^{j} t is not integrable at ∞")) };
    }
    let l = t.ln();
    if k == -1 {
        return Ok(l.powi(j as i32 + 1) / (j as f64 + 1.0));
    }
    let m = (k + 1) as f64;
    let mut s = 0.0;
    let mut sign = 1.0;
    for i in 0..=j {
        s += sign * factorial_ratio(j, i) * l.powi((j - i) as i32) / m.powi(i as i32 + 1);
        sign = -sign;
    }
    Ok(t.powf(m) * s)
}

/// A function on `(0, ∞)` given by a log-polynomial on each piece.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLogPoly {
    breaks: Vec<f64>,
    terms: Vec<Terms>,
    cum: Vec<f64>,
}

impl PiecewiseLogPoly {
    /// `breaks` must start at 0, increase strictly and end at `∞`;
    /// there is one `Terms` per piece.
    pub fn new(breaks: Vec<f64>, terms: Vec<Terms>) -> Result<Self> {
        if breaks.len() != terms.len() + 1 || terms.is_empty() {
            return input("need one coefficient block per piece");
        }
        if breaks[0] != 0.0 || *breaks.last().unwrap() != f64::INFINITY {
            return input("breakpoints must run from 0 to ∞");
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return input("breakpoints must increase strictly");
        }
        for t in &terms {
            if t.nonzero().any(|(_, _, c)| !c.is_finite()) {
                return input("non-finite coefficient");
            }
        }
        if terms[0].nonzero().any(|(k, _, _)| k < 0) {
            return domain("negative power of t on the piece adjoining 0");
        }
        let mut cum = Vec::with_capacity(breaks.len() - 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 0..terms.len() - 1 {
            acc += terms[i].antiderivative(breaks[i + 1])? - terms[i].antiderivative(breaks[i])?;
            cum.push(acc);
        }
        Ok(Self { breaks, terms, cum })
    }

    pub fn zero() -> Self {
        Self::new(vec![0.0, f64::INFINITY], vec![Terms::default()]).unwrap()
    }

    /// Exact embedding of a step function.
    pub fn from_step(f: &StepFunction) -> Self {
        let mut breaks = vec![0.0];
        let mut terms = Vec::new();
        for (b, &(_, v)) in f.breakpoints().into_iter().zip(f.pieces()) {
            breaks.push(b);
            terms.push(Terms::constant(v));
        }
        if *breaks.last().unwrap() != f64::INFINITY {
            breaks.push(f64::INFINITY);
            terms.push(Terms::default());
        }
        Self::new(breaks, terms).expect("step functions embed exactly")
    }

    /// General piecewise-constant function with values `values[i]` on
    /// `[breaks[i], breaks[i+1])`; the last break may be finite, in which
    /// case the function vanishes afterwards.
    pub fn piecewise_constant(breaks: &[f64], values: &[f64]) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return input("need one value per interval");
        }
        let mut b = breaks.to_vec();
        let mut terms: Vec<Terms> = values.iter().map(|&v| Terms::constant(v)).collect();
        if *b.last().unwrap() != f64::INFINITY {
            b.push(f64::INFINITY);
            terms.push(Terms::default());
        }
        Self::new(b, terms)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn terms(&self) -> &[Terms] {
        &self.terms
    }

    /// Finite positive breakpoints.
    pub fn interior_breaks(&self) -> &[f64] {
        let n = self.breaks.len();
        &self.breaks[1..n - 1]
    }

    fn piece_of(&self, t: f64) -> usize {
        // last i with breaks[i] <= t
        let i = self.breaks.partition_point(|&b| b <= t);
        i.saturating_sub(1).min(self.terms.len() - 1)
    }

    fn piece_of_left(&self, t: f64) -> usize {
        // last i with breaks[i] < t
        let i = self.breaks.partition_point(|&b| b < t);
        i.saturating_sub(1).min(self.terms.len() - 1)
    }

    /// Right-continuous evaluation at `t > 0`.
    pub fn eval(&self, t: f64) -> f64 {
        self.terms[self.piece_of(t)].eval(t)
    }

    /// Left limit at `t > 0`.
    pub fn eval_left(&self, t: f64) -> f64 {
        self.terms[self.piece_of_left(t)].eval(t)
    }

    /// `∫_0^t g` from the antiderivative table.
    pub fn prefix_integral(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let i = self.piece_of(t);
        let a = self.breaks[i];
        Ok(self.cum[i] + self.terms[i].antiderivative(t)? - self.terms[i].antiderivative(a)?)
    }

    /// `∫_a^b g` for `0 ≤ a ≤ b ≤ ∞`.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        if b.is_infinite() {
            let last = self.terms.len() - 1;
            let start = self.breaks[last];
            let tail = self.terms[last].antiderivative(f64::INFINITY)? - self.terms[last].antiderivative(start)?;
            let head = if a <= start { self.prefix_integral(start)? - self.prefix_integral(a)? } else {
                self.terms[last].antiderivative(start)? - self.terms[last].antiderivative(a)?
            };
            return Ok(head + tail);
        }
        Ok(self.prefix_integral(b)? - self.prefix_integral(a)?)
    }

    /// Restricts to a refinement containing every break in `extra`.
    fn refine(&self, extra: &[f64]) -> (Vec<f64>, Vec<Terms>) {
        let mut all: Vec<f64> = self.breaks.iter().chain(extra).copied().collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        let terms = all[..all.len() - 1].iter().map(|&a| self.terms[self.piece_of(a)]).collect();
        (all, terms)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (breaks, ta) = self.refine(&other.breaks);
        let (_, tb) = other.refine(&self.breaks);
        let terms = ta.iter().zip(&tb).map(|(a, b)| a.plus(b)).collect();
        Self::new(breaks, terms).expect("sum of valid log-polynomials")
    }

    pub fn scale(&self, s: f64) -> Self {
        let terms = self.terms.iter().map(|t| t.scaled(s)).collect();
        Self::new(self.breaks.clone(), terms).expect("scaled log-polynomial")
    }

    /// Exact square; every piece must use only `k ∈ [-1, 0]`, `j ∈ [0, 1]`.
    pub fn square(&self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut sq = Terms::default();
            let parts: Vec<_> = t.nonzero().collect();
            for &(k, j, _) in &parts {
                if !(-1..=0).contains(&k) || j > 1 {
                    return internal(format!("square outside the squarable box: t^{k} log^{j}"));
                }
            }
            for &(k1, j1, c1) in &parts {
                for &(k2, j2, c2) in &parts {
                    sq.add_to(k1 + k2, j1 + j2, c1 * c2);
                }
            }
            out.push(sq);
        }
        Self::new(self.breaks.clone(), out)
    }

    /// Cesàro mean `(1/t) ∫_0^t g`.
    pub fn cesaro(&self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (i, t) in self.terms.iter().enumerate() {
            let a = self.breaks[i];
            let mut r = Terms::default();
            // constant from the mass before the piece minus F(a)
            r.add_to(-1, 0, self.cum[i] - t.antiderivative(a)?);
            for (k, j, c) in t.nonzero() {
                if k == -1 {
                    if j + 1 > J_MAX {
                        return internal("Cesàro image leaves the log-degree box");
                    }
                    r.add_to(-1, j + 1, c / (j as f64 + 1.0));
                } else {
                    let m = (k + 1) as f64;
                    let mut sign = 1.0;
                    for ii in 0..=j {
                        r.add_to(k, j - ii, c * sign * factorial_ratio(j, ii) / m.powi(ii as i32 + 1));
                        sign = -sign;
                    }
                }
            }
            out.push(r);
        }
        Self::new(self.breaks.clone(), out)
    }

    /// True when every piece is constant.
    pub fn is_piecewise_constant(&self) -> bool {
        self.terms.iter().all(Terms::is_constant)
    }
}
