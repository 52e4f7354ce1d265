//! The transient coupled Stokes/Darcy solver: physical parameters, the
//! manufactured problems, per-stage systems, the DLN/BDF2 stepping loop and
//! the per-step energy monitor.

pub mod problem;
pub mod stepping;

pub use problem::ManufacturedProblem;
pub use stepping::{
    energy_budget, run_transient, steady_solve, Discretization, EnergyEntry, EnergyLog,
    EnergyVerdict, RunStats, Scheme, TransientResult,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("nonpositive physical parameter: {0}")]
    BadParameter(&'static str),
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),
    #[error(transparent)]
    Fem(#[from] crate::fem::FemError),
    #[error(transparent)]
    Dln(#[from] crate::dln::DlnError),
    #[error("stage solve failed at step {step} (t = {t}): {source}")]
    Stage {
        step: usize,
        t: f64,
        source: crate::solver::SolveError,
    },
    #[error("states are not on consecutive grid points: {0}")]
    StateMismatch(String),
}

/// Physical parameters of the coupled model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Kinematic viscosity ν.
    pub nu: f64,
    /// Gravity g.
    pub g: f64,
    /// Specific mass storativity S₀.
    pub s0: f64,
    /// Hydraulic conductivity tensor K (SPD).
    pub k: [[f64; 2]; 2],
    /// Beavers-Joseph-Saffman slip parameter.
    pub mu_bjs: f64,
}

impl PhysicalParams {
    pub fn unit() -> Self {
        PhysicalParams {
            nu: 1.0,
            g: 1.0,
            s0: 1.0,
            k: [[1.0, 0.0], [0.0, 1.0]],
            mu_bjs: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.nu <= 0.0 {
            return Err(ModelError::BadParameter("nu"));
        }
        if self.g <= 0.0 {
            return Err(ModelError::BadParameter("g"));
        }
        if self.s0 <= 0.0 {
            return Err(ModelError::BadParameter("s0"));
        }
        if self.mu_bjs < 0.0 {
            return Err(ModelError::BadParameter("mu_bjs"));
        }
        let k = self.k;
        if k[0][0] <= 0.0 || k[0][0] * k[1][1] - k[0][1] * k[1][0] <= 0.0 {
            return Err(ModelError::BadParameter("k not positive definite"));
        }
        Ok(())
    }

    /// BJS interface coefficient μ ν √d / √(trace Π) with Π = ν K / g, d = 2.
    pub fn bjs_coefficient(&self) -> f64 {
        let trace_pi = self.nu * (self.k[0][0] + self.k[1][1]) / self.g;
        self.mu_bjs * self.nu * 2.0f64.sqrt() / trace_pi.sqrt()
    }
}

/// One time level of the coupled discrete solution.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub t: f64,
    /// Velocity dof vector (two components per scalar node, interleaved).
    pub u: Vec<f64>,
    /// Hydraulic head dof vector.
    pub phi: Vec<f64>,
    /// Pressure dof vector.
    pub p: Vec<f64>,
}

impl CoupledState {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.u.len() + self.phi.len() + self.p.len());
        out.extend_from_slice(&self.u);
        out.extend_from_slice(&self.phi);
        out.extend_from_slice(&self.p);
        out
    }

    pub fn from_flat(t: f64, flat: &[f64], dofs: &crate::fem::DofMap) -> Self {
        let nv = 2 * dofs.velocity.n_nodes;
        let nh = dofs.head.n_nodes;
        CoupledState {
            t,
            u: flat[..nv].to_vec(),
            phi: flat[nv..nv + nh].to_vec(),
            p: flat[nv + nh..].to_vec(),
        }
    }
}
