//! Numerical laboratory for distributional martingale inequalities on
//! finite-dimensional traced matrix algebras.
//!
//! The crate is layered bottom-up:
//!
//! * [`stepfn`] holds decreasing step functions (singular value functions),
//!   piecewise log-polynomials and the domination ratio used by every check.
//! * [`hardy`] applies the Cesàro, dual Cesàro and Calderón operators exactly.
//! * [`spaces`] evaluates symmetric (quasi-)norms and moment suprema.
//! * [`ncalg`] models traced algebras, filtrations and conditional expectations.
//! * [`martingale`] builds difference sequences, transforms, square functions
//!   and the Gundy decomposition.
//! * [`triangular`] provides triangular truncations and the corner splitting.
//! * [`harness`] generates instances, runs checks and assembles reports.

pub mod error;
pub mod hardy;
pub mod harness;
pub mod martingale;
pub mod ncalg;
pub mod spaces;
pub mod stepfn;
pub mod triangular;

pub use error::{Error, Result};
