//! Pinned budgets for kinds whose constants are not fixed by a statement.
//!
//! `budgets.txt` holds flat `KIND = value` lines; a kind without its own
//! line falls back to the line of its head (`ST` for `ST(3)`).

use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::kinds::{BudgetSource, InequalityKind};
use crate::error::{Error, Result};

const PINNED: &str = include_str!("budgets.txt");

/// Parses `KIND = value` lines; `#` starts a comment.
pub fn parse_budgets(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected KIND = value", i + 1)))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Config(format!("line {}: bad number {:?}", i + 1, v.trim())))?;
        if !(v > 0.0) {
            return Err(Error::Config(format!("line {}: budget must be positive", i + 1)));
        }
        out.insert(k.trim().to_ascii_uppercase(), v);
    }
    Ok(out)
}

pub fn pinned() -> &'static BTreeMap<String, f64> {
    static TABLE: OnceLock<BTreeMap<String, f64>> = OnceLock::new();
    TABLE.get_or_init(|| parse_budgets(PINNED).expect("pinned budget table parses"))
}

fn lookup(table: &BTreeMap<String, f64>, kind: &InequalityKind) -> Option<f64> {
    let name = kind.to_string().to_ascii_uppercase();
    let head = name.split('(').next().unwrap_or(&name).to_string();
    table.get(&name).or_else(|| table.get(&head)).copied()
}

/// Budget of `kind`: override, then fixed constant, then pinned
/// calibration; `∞` if none applies.
pub fn budget_for(kind: &InequalityKind, tol: f64, overrides: &BTreeMap<String, f64>) -> (f64, BudgetSource) {
    if let Some(v) = lookup(overrides, kind) {
        return (v, kind.budget_source());
    }
    if let Some(v) = kind.fixed_budget(tol) {
        return (v, kind.budget_source());
    }
    (lookup(pinned(), kind).unwrap_or(f64::INFINITY), BudgetSource::Calibrated)
}

pub fn default_budget(kind: &InequalityKind, tol: f64) -> f64 {
    budget_for(kind, tol, &BTreeMap::new()).0
}
