//! Resolvent norms `‖(H - λ)⁻¹‖` of one-dimensional Schrödinger operators
//! `H = -d²/dx² + V` with complex potentials, computed two ways: by
//! finite-difference discretization and by large-parameter asymptotic
//! formulas built on Airy-type model operators.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod airy;
pub mod asymptotics;
pub mod error;
pub mod inverse;
pub mod lambert;
pub mod linalg;
pub mod operator_lab;
pub mod pchip;
pub mod potential;
pub mod quad;
pub mod roots;
pub mod spectrum;

pub use error::{Error, Result};
