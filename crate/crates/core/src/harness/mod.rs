//! Random instance generation, inequality checkers, black-box
//! extrapolation checks and the suite runner.

mod budgets;
mod checks;
mod extrap;
mod families;
mod gen;
mod kinds;
mod runner;

pub use budgets::{budget_for, default_budget, parse_budgets, pinned};
pub use checks::{check, check_with_budget, corner_dst_ratio, sign_patterns, singular_sequence, stein_lhs_rhs, CheckResult, RATIO_TOL};
pub use extrap::{builtin_map, extrapolation_ratio, Burkholder, CoarsestExpectation, Conclusion, ExtrapResult, LinearMap, HYPOTHESIS_PS};
pub use families::{
    c_family, c_family_ratio, classical_curves, corner_growth, cstar_family, cstar_family_ratio, hilbert_element, Curve, Growth,
    GrowthRow, CURVE_PS, CURVE_SIZE, GROWTH_SIZES,
};
pub use gen::{generate_instance, random_filtration, rng_for, Digest, Dims, Instance};
pub use kinds::{suite, BudgetSource, IdentityKind, InequalityKind, MapName, QbWhich, SUITES};
pub use runner::{estimate_constant, finite, run_suite, ConstantEstimate, Report, RunConfig, Violation, Witness};
