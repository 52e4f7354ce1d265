//! Finite-element spaces, quadrature, dof maps and assembly for the coupled
//! Stokes/Darcy weak formulation.

pub mod assemble;
pub mod dof;
pub mod element;
pub mod error;
pub mod quadrature;

pub use assemble::{
    assemble_bjs, assemble_darcy, assemble_divergence, assemble_interface_coupling,
    assemble_interface_load, assemble_load, assemble_mass, assemble_stokes_viscous,
    assemble_velocity_gradient,
};
pub use dof::{DofMap, ElementPair, ScalarSpace};
pub use element::Element;
pub use error::{
    evaluate_scalar, evaluate_velocity, scalar_error_norms, velocity_error_norms, Field,
    FieldErrors,
};
pub use quadrature::QuadratureRule;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FemError {
    #[error("unsupported element pair: {0}")]
    UnsupportedPair(&'static str),
    #[error("{0}")]
    NotSpd(&'static str),
}
