//! Variable-timestep DLN (Dahlquist–Liniger–Nevanlinna) one-leg time
//! integration applied to the coupled unsteady Stokes/Darcy model.
//!
//! The crate is organized bottom-up:
//!
//! * [`dln`] — the one-leg coefficient family, G-norms and the
//!   numerical-dissipation identity, plus constant-step BDF2 weights.
//! * [`mesh`] — structured conforming triangulations of the two stacked
//!   rectangular subdomains with tagged boundaries and a matched interface.
//! * [`sparse`] — compressed sparse row matrices and MatrixMarket export.
//! * [`fem`] — Lagrange elements (P1, P2, P1+bubble), quadrature, dof maps
//!   with essential boundary handling, and assembly of every bilinear and
//!   linear form of the coupled weak formulation.
//! * [`solver`] — sparse LU factorization of the per-stage saddle systems.
//! * [`model`] — physical parameters, the two manufactured problems, the
//!   transient DLN/BDF2 stepping loop and the per-step energy monitor.
//! * [`harness`] — experiment drivers (convergence study, variable-step
//!   stability run, coefficient dumps), error/rate machinery and CSV/table
//!   emission used by the CLI.

pub mod dln;
pub mod fem;
pub mod harness;
pub mod mesh;
pub mod model;
pub mod solver;
pub mod sparse;
pub mod vtk;
