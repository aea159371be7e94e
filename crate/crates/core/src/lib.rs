//! Guaranteed error decomposition for 1D reaction-diffusion problems
//! `−u'' + γ |u|^(p−2) u = f` whose reaction coefficient `γ = γ∘ + δ` is only
//! known up to `‖δ‖∞ ≤ ε`.
//!
//! The duality gap of an approximate pair `(v, y)` splits into compound
//! functionals ([`energy`]). Its worst-case value over admissible `γ` splits
//! into an approximation part `E∘` and an indeterminacy part `E_ind`, for
//! which [`uncertainty`] computes two-sided bounds and an exact pointwise
//! value. [`solver`] produces discrete minimizers by BFGS, and
//! [`verification`] drives manufactured-solution studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod field;
pub mod function;
pub mod mesh;
pub mod par;
pub mod quadrature;
pub mod solver;
pub mod uncertainty;
pub mod verification;

pub use energy::{gap_breakdown, GapBreakdown, ProblemData};
pub use error::{Error, Result};
pub use field::{Degree, FeField};
pub use function::ScalarFn;
pub use mesh::{integrate, Mesh1D};
pub use quadrature::QuadratureRule;
pub use uncertainty::{IndeterminacyReport, UncertaintySpec};
