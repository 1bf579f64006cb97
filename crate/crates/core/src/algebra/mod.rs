//! Operator algebra: normal-ordered Hamiltonians, their phase-space symbols
//! and the reordering coefficients used by the current series.

pub mod fock;
pub mod normal;
pub mod reorder;

pub use fock::{fock_matrix_oracle, xp_fock_matrix};
pub use normal::{normal_order, DoubleWellParams, NormalOrderedHamiltonian, XPPolynomial, XPTerm};
pub use reorder::{binomial, r_coefficient, POWER_CAP};
