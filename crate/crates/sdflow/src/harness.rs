//! Configuration-driven experiment runners: the constant-step convergence
//! study (error tables and rates), the variable-step stability run, and
//! coefficient dumps, with deterministic CSV / aligned-table emission.

use crate::dln::{dln_coefficients, StepSchedule};
use crate::fem::{
    evaluate_scalar, evaluate_velocity, scalar_error_norms, velocity_error_norms, Element,
    ElementPair, Field, FieldErrors,
};
use crate::model::{
    energy_budget, run_transient, Discretization, EnergyVerdict, ManufacturedProblem, ModelError,
    RunStats, Scheme,
};
use crate::vtk::{write_legacy_vtk, PointData};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid rate inputs: {0}")]
    Rate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Convergence,
    VarStep,
    Coeffs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementChoice {
    Mini,
    TaylorHood,
}

impl ElementChoice {
    /// Velocity/pressure pair with the head space each experiment uses:
    /// MINI pairs with P1 head, Taylor-Hood with P2 head.
    pub fn pair(self) -> ElementPair {
        match self {
            ElementChoice::Mini => ElementPair::mini(Element::P1).expect("valid pair"),
            ElementChoice::TaylorHood => ElementPair::taylor_hood(Element::P2).expect("valid pair"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    Dln,
    Bdf2,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub thetas: Vec<f64>,
    pub elements: ElementChoice,
    pub resolutions: Vec<usize>,
    pub scheme: SchemeChoice,
    pub out_dir: Option<PathBuf>,
    /// Computed DLN steps of the variable-step run.
    pub varstep_steps: usize,
    /// Divisions along the longer side for the variable-step mesh.
    pub varstep_divisions: usize,
    /// Include the two finest paper resolutions in the convergence study.
    pub full: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Convergence,
            thetas: vec![0.2, 0.5, 0.7],
            elements: ElementChoice::Mini,
            resolutions: vec![10, 16, 22],
            scheme: SchemeChoice::Dln,
            out_dir: None,
            varstep_steps: 40,
            varstep_divisions: 100,
            full: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if !self.resolutions.windows(2).all(|w| w[0] < w[1]) {
            return Err(HarnessError::Config(
                "resolutions must be strictly increasing".into(),
            ));
        }
        for &t in &self.thetas {
            if !(0.0..=1.0).contains(&t) {
                return Err(HarnessError::Config(format!("theta {t} outside [0,1]")));
            }
        }
        if self.resolutions.is_empty() {
            return Err(HarnessError::Config("no resolutions given".into()));
        }
        Ok(())
    }

    /// Parses a flat key=value config file ('#' starts a comment).
    pub fn from_key_values(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let bad = |what: &str| HarnessError::Config(format!("bad {what}: {value}"));
        match key {
            "experiment" => {
                self.experiment = match value {
                    "convergence" => ExperimentKind::Convergence,
                    "varstep" => ExperimentKind::VarStep,
                    "coeffs" => ExperimentKind::Coeffs,
                    _ => return Err(bad("experiment")),
                }
            }
            "theta" => {
                self.thetas = value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("theta list"))?;
            }
            "elements" => {
                self.elements = match value {
                    "mini" => ElementChoice::Mini,
                    "taylor-hood" | "taylor_hood" | "th" => ElementChoice::TaylorHood,
                    _ => return Err(bad("elements")),
                }
            }
            "resolutions" | "n" => {
                self.resolutions = value
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("resolution list"))?;
            }
            "scheme" => {
                self.scheme = match value {
                    "dln" => SchemeChoice::Dln,
                    "bdf2" => SchemeChoice::Bdf2,
                    _ => return Err(bad("scheme")),
                }
            }
            "out" => self.out_dir = Some(PathBuf::from(value)),
            "varstep_steps" => {
                self.varstep_steps = value.parse().map_err(|_| bad("varstep_steps"))?
            }
            "varstep_divisions" => {
                self.varstep_divisions = value.parse().map_err(|_| bad("varstep_divisions"))?
            }
            "full" => self.full = value.parse().map_err(|_| bad("full"))?,
            _ => return Err(HarnessError::Config(format!("unknown key: {key}"))),
        }
        Ok(())
    }
}

/// Step-weighted discrete space-time norm (Σ_n k_n ‖v^{n+1}‖²)^{1/2}; one
/// spatial value per step endpoint.
pub fn discrete_space_time_norm(
    values: &[f64],
    schedule: &StepSchedule,
) -> Result<f64, HarnessError> {
    if values.len() != schedule.len() {
        return Err(HarnessError::Rate(format!(
            "{} spatial values for {} steps",
            values.len(),
            schedule.len()
        )));
    }
    Ok(values
        .iter()
        .zip(&schedule.steps)
        .map(|(v, k)| k * v * v)
        .sum::<f64>()
        .sqrt())
}

/// r = ln(e1/e2) / ln(dt1/dt2).
pub fn convergence_rate(e1: f64, e2: f64, dt1: f64, dt2: f64) -> Result<f64, HarnessError> {
    if e1 <= 0.0 || e2 <= 0.0 || dt1 <= 0.0 || dt2 <= 0.0 {
        return Err(HarnessError::Rate("all inputs must be positive".into()));
    }
    if dt1 == dt2 {
        return Err(HarnessError::Rate("equal step sizes".into()));
    }
    Ok((e1 / e2).ln() / (dt1 / dt2).ln())
}

/// One row of the convergence study: the five discrete space-time error
/// norms at a given (scheme, θ, n).
#[derive(Debug, Clone)]
pub struct ErrorRow {
    /// None for BDF2 rows.
    pub theta: Option<f64>,
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    /// [u L2, u H1, φ L2, φ H1, p L2]
    pub errors: [f64; 5],
    pub wall: Duration,
}

pub const ERROR_COLUMNS: [&str; 5] = [
    "err_u_l2",
    "err_u_h1",
    "err_phi_l2",
    "err_phi_h1",
    "err_p_l2",
];
pub const RATE_COLUMNS: [&str; 5] = [
    "rate_u_l2",
    "rate_u_h1",
    "rate_phi_l2",
    "rate_phi_h1",
    "rate_p_l2",
];

#[derive(Debug, Clone, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ErrorRow>,
}

impl ConvergenceReport {
    fn theta_keys(&self) -> Vec<Option<f64>> {
        let mut keys: Vec<Option<f64>> = Vec::new();
        for r in &self.rows {
            let seen = keys.iter().any(|t| match (t, r.theta) {
                (Some(a), Some(b)) => (a - b).abs() < 1e-12,
                (None, None) => true,
                _ => false,
            });
            if !seen {
                keys.push(r.theta);
            }
        }
        keys
    }

    /// Rows of one scheme/θ series, ordered by n.
    pub fn series(&self, theta: Option<f64>) -> Vec<&ErrorRow> {
        let mut rows: Vec<&ErrorRow> = self
            .rows
            .iter()
            .filter(|r| match (r.theta, theta) {
                (Some(a), Some(b)) => (a - b).abs() < 1e-12,
                (None, None) => true,
                _ => false,
            })
            .collect();
        rows.sort_by_key(|r| r.n);
        rows
    }

    /// Column-wise rates between consecutive rows of a series.
    pub fn rates(&self, theta: Option<f64>) -> Vec<(usize, [f64; 5])> {
        let rows = self.series(theta);
        rows.windows(2)
            .map(|w| {
                let mut r = [0.0; 5];
                for c in 0..5 {
                    r[c] = convergence_rate(w[0].errors[c], w[1].errors[c], w[0].dt, w[1].dt)
                        .unwrap_or(f64::NAN);
                }
                (w[1].n, r)
            })
            .collect()
    }
}

/// Space-time error norms of one transient run against the exact solution.
pub fn run_errors(
    disc: &Discretization,
    problem: &ManufacturedProblem,
    states: &[crate::model::CoupledState],
    schedule: &StepSchedule,
) -> Result<[f64; 5], HarnessError> {
    let mut per_step: [Vec<f64>; 5] = Default::default();
    for state in states.iter().skip(1) {
        let e = state_errors(disc, problem, state);
        per_step[0].push(e.u_l2);
        per_step[1].push(e.u_h1);
        per_step[2].push(e.phi_l2);
        per_step[3].push(e.phi_h1);
        per_step[4].push(e.p_l2);
    }
    let mut out = [0.0; 5];
    for c in 0..5 {
        out[c] = discrete_space_time_norm(&per_step[c], schedule)?;
    }
    Ok(out)
}

/// Spatial error norms of one state.
pub fn state_errors(
    disc: &Discretization,
    problem: &ManufacturedProblem,
    state: &crate::model::CoupledState,
) -> FieldErrors {
    let flat = state.flatten();
    let t = state.t;
    let (u_l2, u_h1) = velocity_error_norms(
        &disc.mesh,
        &disc.dofs,
        &flat,
        |x, y, tt| problem.velocity(x, y, tt),
        |x, y, tt| problem.velocity_grad(x, y, tt),
        t,
    );
    let (phi_l2, phi_h1) = scalar_error_norms(
        &disc.mesh,
        &disc.dofs,
        &disc.dofs.head,
        |n| disc.dofs.head_dof(n),
        &flat,
        |x, y, tt| problem.head(x, y, tt),
        |x, y, tt| problem.head_grad(x, y, tt),
        t,
    );
    let (p_l2, _) = scalar_error_norms(
        &disc.mesh,
        &disc.dofs,
        &disc.dofs.pressure,
        |n| disc.dofs.pressure_dof(n),
        &flat,
        |x, y, tt| problem.pressure(x, y, tt),
        |x, y, tt| problem.pressure_grad(x, y, tt),
        t,
    );
    FieldErrors {
        u_l2,
        u_h1,
        phi_l2,
        phi_h1,
        p_l2,
    }
}

/// Runs the constant-step convergence experiment: for each (θ, n) — or each
/// n with BDF2 — solve on [0,1] with h = Δt = 1/n and accumulate the five
/// space-time error norms. Independent runs execute in parallel.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport, HarnessError> {
    cfg.validate()?;
    let mut tasks: Vec<(Option<f64>, usize)> = Vec::new();
    match cfg.scheme {
        SchemeChoice::Dln => {
            for &theta in &cfg.thetas {
                for &n in &cfg.resolutions {
                    tasks.push((Some(theta), n));
                }
            }
        }
        SchemeChoice::Bdf2 => {
            for &n in &cfg.resolutions {
                tasks.push((None, n));
            }
        }
    }

    let rows: Result<Vec<ErrorRow>, HarnessError> = tasks
        .par_iter()
        .map(|&(theta, n)| convergence_run(theta, n, cfg.elements))
        .collect();
    let mut rows = rows?;
    rows.sort_by(|a, b| {
        a.theta
            .unwrap_or(-1.0)
            .total_cmp(&b.theta.unwrap_or(-1.0))
            .then(a.n.cmp(&b.n))
    });
    let report = ConvergenceReport { rows };

    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir)?;
        let label = match cfg.scheme {
            SchemeChoice::Dln => "dln",
            SchemeChoice::Bdf2 => "bdf2",
        };
        fs::write(
            dir.join(format!("convergence_{label}.csv")),
            convergence_csv(&report),
        )?;
        fs::write(
            dir.join(format!("convergence_{label}.txt")),
            convergence_table(&report),
        )?;
    }
    Ok(report)
}

/// One convergence run (exposed for the acceptance suite).
pub fn convergence_run(
    theta: Option<f64>,
    n: usize,
    elements: ElementChoice,
) -> Result<ErrorRow, HarnessError> {
    let started = Instant::now();
    let problem = ManufacturedProblem::convergence_test();
    let disc = Discretization::build(&problem, elements.pair(), n)?;
    let dt = 1.0 / n as f64;
    let schedule = StepSchedule::constant(0.0, dt, n).expect("positive steps");
    let scheme = match theta {
        Some(theta) => Scheme::Dln { theta },
        None => Scheme::Bdf2,
    };
    let result = run_transient(&disc, &problem, &schedule, scheme)?;
    let errors = run_errors(&disc, &problem, &result.states, &schedule)?;
    Ok(ErrorRow {
        theta,
        n,
        h: crate::mesh::mesh_statistics(&disc.mesh).h_max,
        dt,
        errors,
        wall: started.elapsed(),
    })
}

/// CSV with the fixed column set; deterministic for identical inputs (wall
/// time never enters the files).
pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut s = String::new();
    s.push_str("theta,n,h,dt");
    for c in ERROR_COLUMNS {
        let _ = write!(s, ",{c}");
    }
    for c in RATE_COLUMNS {
        let _ = write!(s, ",{c}");
    }
    s.push('\n');
    for theta in report.theta_keys() {
        let series = report.series(theta);
        let rates = report.rates(theta);
        for (i, row) in series.iter().enumerate() {
            match row.theta {
                Some(t) => {
                    let _ = write!(s, "{t}");
                }
                None => s.push_str("bdf2"),
            }
            let _ = write!(s, ",{},{:.6e},{:.6e}", row.n, row.h, row.dt);
            for c in 0..5 {
                let _ = write!(s, ",{:.6e}", row.errors[c]);
            }
            if i == 0 {
                s.push_str(",,,,,");
            } else {
                for c in 0..5 {
                    let _ = write!(s, ",{:.4}", rates[i - 1].1[c]);
                }
            }
            s.push('\n');
        }
    }
    s
}

/// Fixed-width table mirroring the CSV content.
pub fn convergence_table(report: &ConvergenceReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "H1 columns are full H1 norms (L2 part included); rates are column-wise vs the previous row."
    );
    let _ = writeln!(
        s,
        "{:>6} {:>4} {:>10} {:>12} {:>12} {:>12} {:>12} {:>12}  {:>7} {:>7} {:>7} {:>7} {:>7}",
        "theta",
        "n",
        "dt",
        "u_L2",
        "u_H1",
        "phi_L2",
        "phi_H1",
        "p_L2",
        "r_uL2",
        "r_uH1",
        "r_phL2",
        "r_phH1",
        "r_pL2"
    );
    for theta in report.theta_keys() {
        let series = report.series(theta);
        let rates = report.rates(theta);
        for (i, row) in series.iter().enumerate() {
            let label = match row.theta {
                Some(t) => format!("{t}"),
                None => "bdf2".to_string(),
            };
            let _ = write!(
                s,
                "{:>6} {:>4} {:>10.4e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} ",
                label,
                row.n,
                row.dt,
                row.errors[0],
                row.errors[1],
                row.errors[2],
                row.errors[3],
                row.errors[4]
            );
            if i == 0 {
                let _ = writeln!(s, " {:>7} {:>7} {:>7} {:>7} {:>7}", "-", "-", "-", "-", "-");
            } else {
                let r = rates[i - 1].1;
                let _ = writeln!(
                    s,
                    " {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
                    r[0], r[1], r[2], r[3], r[4]
                );
            }
        }
    }
    s
}

/// The paper's step law: k_n = 0.1 for n ≤ 10, then 0.1 + 0.05 sin(10 t_n).
pub fn varstep_step_law(n: usize, t_n: f64) -> f64 {
    if n <= 10 {
        0.1
    } else {
        0.1 + 0.05 * (10.0 * t_n).sin()
    }
}

/// Schedule with `computed_steps` DLN steps (`computed_steps + 1` intervals,
/// the first two covering the start levels).
pub fn varstep_schedule(computed_steps: usize) -> StepSchedule {
    let total = computed_steps + 1;
    let mut steps = Vec::with_capacity(total);
    let mut t = 0.0;
    for n in 0..total {
        let k = varstep_step_law(n, t);
        steps.push(k);
        t += k;
    }
    StepSchedule::new(0.0, steps).expect("step law stays positive")
}

/// Outcome of the variable-step stability run for one θ.
pub struct VarstepOutcome {
    pub theta: f64,
    pub verdict: EnergyVerdict,
    pub stats: RunStats,
    /// Relative L2 errors of velocity and head at the final time.
    pub final_rel_err_u: f64,
    pub final_rel_err_phi: f64,
    pub final_time: f64,
    pub energy: crate::model::EnergyLog,
}

/// Runs the variable-step stability experiment for every configured θ,
/// emitting energy logs, centerline samples and a VTK snapshot per θ.
pub fn run_varstep(cfg: &ExperimentConfig) -> Result<Vec<VarstepOutcome>, HarnessError> {
    cfg.validate()?;
    let problem = ManufacturedProblem::variable_step_test();
    let disc = Discretization::build(
        &problem,
        ElementPair::taylor_hood(Element::P2).expect("valid pair"),
        cfg.varstep_divisions,
    )?;
    let schedule = varstep_schedule(cfg.varstep_steps);

    let mut outcomes = Vec::new();
    for &theta in &cfg.thetas {
        let result = run_transient(&disc, &problem, &schedule, Scheme::Dln { theta })?;
        let energy = result.energy.clone().expect("DLN run carries an energy log");
        let verdict = energy_budget(&energy);
        let last = result.states.last().expect("nonempty trajectory");
        let e = state_errors(&disc, &problem, last);
        let (u_norm, phi_norm) = exact_norms(&disc, &problem, last.t);
        let outcome = VarstepOutcome {
            theta,
            verdict,
            stats: result.stats,
            final_rel_err_u: e.u_l2 / u_norm,
            final_rel_err_phi: e.phi_l2 / phi_norm,
            final_time: last.t,
            energy,
        };

        if let Some(dir) = &cfg.out_dir {
            fs::create_dir_all(dir)?;
            let tag = format!("theta{theta}");
            fs::write(
                dir.join(format!("varstep_energy_{tag}.csv")),
                energy_csv(&outcome.energy),
            )?;
            fs::write(
                dir.join(format!("varstep_samples_{tag}.csv")),
                sample_csv(&disc, &problem, last),
            )?;
            let mut vtk = fs::File::create(dir.join(format!("varstep_final_{tag}.vtk")))?;
            write_field_vtk(&mut vtk, &disc, last)?;
        }
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

/// L2 norms of the exact velocity / head fields at time `t` (quadrature on
/// the run mesh) for relative-error reporting.
fn exact_norms(disc: &Discretization, problem: &ManufacturedProblem, t: f64) -> (f64, f64) {
    let zero = vec![0.0; disc.dofs.n_total];
    let (u_norm, _) = velocity_error_norms(
        &disc.mesh,
        &disc.dofs,
        &zero,
        |x, y, tt| problem.velocity(x, y, tt),
        |x, y, tt| problem.velocity_grad(x, y, tt),
        t,
    );
    let (phi_norm, _) = scalar_error_norms(
        &disc.mesh,
        &disc.dofs,
        &disc.dofs.head,
        |n| disc.dofs.head_dof(n),
        &zero,
        |x, y, tt| problem.head(x, y, tt),
        |x, y, tt| problem.head_grad(x, y, tt),
        t,
    );
    (u_norm, phi_norm)
}

pub fn energy_csv(log: &crate::model::EnergyLog) -> String {
    let mut s = String::from(
        "step,t,k,g_energy,dissipation,a_work,forcing_work,identity_residual,divergence_inf\n",
    );
    for e in &log.entries {
        let _ = writeln!(
            s,
            "{},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.3e},{:.3e}",
            e.step,
            e.t,
            e.k,
            e.g_energy,
            e.dissipation,
            e.a_work,
            e.forcing_work,
            e.identity_residual,
            e.divergence_inf
        );
    }
    s
}

/// Centerline samples: discrete vs exact velocity along the fluid midline
/// and head along the porous midline.
pub fn sample_csv(
    disc: &Discretization,
    problem: &ManufacturedProblem,
    state: &crate::model::CoupledState,
) -> String {
    let flat = state.flatten();
    let t = state.t;
    let spec = &disc.mesh.spec;
    let y_f = 0.5 * (spec.fluid.y0 + spec.fluid.y1);
    let y_p = 0.5 * (spec.porous.y0 + spec.porous.y1);
    let mut s = String::from("x,u1_h,u1_exact,u2_h,u2_exact,phi_h,phi_exact\n");
    let samples = 101;
    for i in 0..samples {
        let x = spec.fluid.x0 + (i as f64 / (samples - 1) as f64) * spec.fluid.width();
        let x = x.min(spec.fluid.x1 - 1e-12).max(spec.fluid.x0 + 1e-12);
        let uh =
            evaluate_velocity(&disc.mesh, &disc.dofs, &flat, [x, y_f]).unwrap_or([f64::NAN; 2]);
        let ue = problem.velocity(x, y_f, t);
        let ph = evaluate_scalar(&disc.mesh, &disc.dofs, Field::Head, &flat, [x, y_p])
            .unwrap_or(f64::NAN);
        let pe = problem.head(x, y_p, t);
        let _ = writeln!(
            s,
            "{x:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{ph:.6e},{pe:.6e}",
            uh[0], ue[0], uh[1], ue[1]
        );
    }
    s
}

/// Legacy VTK snapshot with velocity, speed, head and pressure at vertices.
pub fn write_field_vtk<W: std::io::Write>(
    w: &mut W,
    disc: &Discretization,
    state: &crate::model::CoupledState,
) -> std::io::Result<()> {
    let flat = state.flatten();
    let nverts = disc.mesh.vertices.len();
    let mut vel = vec![[0.0; 2]; nverts];
    let mut speed = vec![0.0; nverts];
    let mut head = vec![0.0; nverts];
    let mut pressure = vec![0.0; nverts];
    for v in 0..nverts {
        if let Some(node) = disc.dofs.velocity.vertex_node(v) {
            let u = [
                flat[disc.dofs.vel_dof(node, 0)],
                flat[disc.dofs.vel_dof(node, 1)],
            ];
            vel[v] = u;
            speed[v] = (u[0] * u[0] + u[1] * u[1]).sqrt();
        }
        if let Some(node) = disc.dofs.head.vertex_node(v) {
            head[v] = flat[disc.dofs.head_dof(node)];
        }
        if let Some(node) = disc.dofs.pressure.vertex_node(v) {
            pressure[v] = flat[disc.dofs.pressure_dof(node)];
        }
    }
    write_legacy_vtk(
        w,
        &disc.mesh,
        &[
            PointData::Vector("velocity", &vel),
            PointData::Scalar("speed", &speed),
            PointData::Scalar("head", &head),
            PointData::Scalar("pressure", &pressure),
        ],
    )
}

/// Coefficient dump rows for the `coeffs` subcommand.
pub fn coefficients_csv(thetas: &[f64], pairs: &[(f64, f64)]) -> String {
    let mut s = String::from(
        "theta,k_prev,k_n,eps,alpha0,alpha1,alpha2,beta0,beta1,beta2,lambda0,lambda1,lambda2,k_hat,t_beta_offset\n",
    );
    for &theta in thetas {
        for &(k_prev, k_n) in pairs {
            match dln_coefficients(theta, k_n, k_prev) {
                Ok(c) => {
                    let _ = writeln!(
                        s,
                        "{theta},{k_prev},{k_n},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                        c.eps,
                        c.alpha[0], c.alpha[1], c.alpha[2],
                        c.beta[0], c.beta[1], c.beta[2],
                        c.lambda[0], c.lambda[1], c.lambda[2],
                        c.k_hat, c.t_beta_offset
                    );
                }
                Err(e) => {
                    let _ = writeln!(s, "{theta},{k_prev},{k_n},error: {e}");
                }
            }
        }
    }
    s
}

/// Writes MatrixMarket dumps of the assembled blocks (debug aid).
pub fn dump_matrices(disc: &Discretization, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    for (name, m) in [
        ("mass", &disc.system.mass),
        ("stiffness", &disc.system.stiffness),
        ("divergence", &disc.system.divergence),
    ] {
        let mut f = fs::File::create(dir.join(format!("{name}.mtx")))?;
        m.write_matrix_market(&mut f)?;
        f.flush()?;
    }
    Ok(())
}
