//! Finite-dimensional traced algebras `⊕_j (M_{d_j}, w_j Tr)`, their
//! elements, and filtrations with trace-preserving conditional
//! expectations.

mod element;
mod filtration;

pub use element::{Block, ElementJson, Mat, TracedAlgebra, TracedElement, C64, HERMITIAN_TOL, RANK_CUT};
pub use filtration::{AxiomFailure, AxiomReport, Filtration, Levels};
