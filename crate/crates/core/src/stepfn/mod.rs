//! Decreasing rearrangements and their calculus.
//!
//! [`StepFunction`] is the home of singular value functions `μ(x)`;
//! [`PiecewiseLogPoly`] is the closed image of step functions under the
//! Hardy operators, squaring and Cesàro averaging. [`domination_ratio`]
//! compares two such profiles pointwise or in the Hardy–Littlewood–Pólya
//! (submajorization) order.

mod logpoly;
mod ratio;
mod step;

pub use logpoly::{PiecewiseLogPoly, Terms, J_MAX, K_MAX, K_MIN};
pub use ratio::{domination_ratio, safe_ratio, DominationMode, Profile, RatioRecord};
pub use step::StepFunction;

use crate::ncalg::TracedElement;

/// Singular value function of a traced element: every singular value of
/// block `j` becomes a piece of length `weight_j`.
pub fn mu_of_element(x: &TracedElement) -> StepFunction {
    x.mu()
}
