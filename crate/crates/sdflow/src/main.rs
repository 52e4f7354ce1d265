//! Experiment CLI: `convergence` reproduces the constant-step error/rate
//! tables, `varstep` runs the variable-step stability experiment, `coeffs`
//! dumps time-integration coefficients as CSV.

use clap::{Args, Parser, Subcommand};
use sdflow::harness::{
    self, coefficients_csv, convergence_csv, convergence_table, run_convergence, run_varstep,
    ElementChoice, ExperimentConfig, ExperimentKind, SchemeChoice,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sdflow", about = "Variable-timestep coupled Stokes/Darcy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Flat key=value config file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated DLN parameters.
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<f64>>,
    /// Comma-separated mesh/time resolutions (h = dt = 1/n).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Time scheme: dln or bdf2.
    #[arg(long)]
    scheme: Option<String>,
    /// Element pair: mini or taylor-hood.
    #[arg(long)]
    elements: Option<String>,
    /// Output directory for CSV/table/VTK files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Constant-step convergence study on the manufactured problem.
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
        /// Also run the two finest resolutions (n = 28, 34).
        #[arg(long)]
        full: bool,
    },
    /// Variable-step stability run with the sine step law.
    Varstep {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of computed steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Mesh divisions along the longer side.
        #[arg(long)]
        divisions: Option<usize>,
    },
    /// Dump DLN coefficients for step pairs as CSV.
    Coeffs {
        /// Comma-separated DLN parameters.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.5,0.7")]
        theta: Vec<f64>,
        /// Previous step size.
        #[arg(long, default_value_t = 0.1)]
        k_prev: f64,
        /// Comma-separated current step sizes.
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.15")]
        k: Vec<f64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn apply_common(
    cfg: &mut ExperimentConfig,
    common: &CommonArgs,
) -> Result<(), harness::HarnessError> {
    if let Some(thetas) = &common.theta {
        cfg.thetas = thetas.clone();
    }
    if let Some(ns) = &common.n {
        cfg.resolutions = ns.clone();
    }
    if let Some(s) = &common.scheme {
        cfg.set("scheme", s)?;
    }
    if let Some(e) = &common.elements {
        cfg.set("elements", e)?;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = Some(out.clone());
    }
    Ok(())
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig, Box<dyn std::error::Error>> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_key_values(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    apply_common(&mut cfg, common)?;
    Ok(cfg)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<(), Box<dyn std::error::Error>> {
    let cli = Cli::parse();
    match cli.command {
        Command::Convergence { common, full } => {
            let mut cfg = load_config(&common)?;
            cfg.experiment = ExperimentKind::Convergence;
            cfg.full = cfg.full || full;
            if cfg.full {
                for n in [28, 34] {
                    if !cfg.resolutions.contains(&n) {
                        cfg.resolutions.push(n);
                    }
                }
                cfg.resolutions.sort_unstable();
            }
            let scheme_label = match cfg.scheme {
                SchemeChoice::Dln => "DLN",
                SchemeChoice::Bdf2 => "BDF2",
            };
            let elems = match cfg.elements {
                ElementChoice::Mini => "MINI (P1b-P1) velocity/pressure, P1 head",
                ElementChoice::TaylorHood => "Taylor-Hood (P2-P1) velocity/pressure, P2 head",
            };
            eprintln!(
                "convergence study: {scheme_label}, {elems}, n = {:?}",
                cfg.resolutions
            );
            let report = run_convergence(&cfg)?;
            print!("{}", convergence_table(&report));
            for row in &report.rows {
                eprintln!(
                    "  run theta={:?} n={} took {:.2?}",
                    row.theta, row.n, row.wall
                );
            }
            if cfg.out_dir.is_none() {
                print!("{}", convergence_csv(&report));
            }
        }
        Command::Varstep {
            common,
            steps,
            divisions,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.experiment = ExperimentKind::VarStep;
            if let Some(s) = steps {
                cfg.varstep_steps = s;
            }
            if let Some(d) = divisions {
                cfg.varstep_divisions = d;
            }
            eprintln!(
                "variable-step run: {} computed steps, {} divisions, theta = {:?}",
                cfg.varstep_steps, cfg.varstep_divisions, cfg.thetas
            );
            let outcomes = run_varstep(&cfg)?;
            println!(
                "{:>6} {:>10} {:>14} {:>14} {:>14} {:>8}",
                "theta", "final_t", "max_identity", "rel_err_u", "rel_err_phi", "stable"
            );
            for o in &outcomes {
                println!(
                    "{:>6} {:>10.5} {:>14.3e} {:>14.5e} {:>14.5e} {:>8}",
                    o.theta,
                    o.final_time,
                    o.verdict.max_identity_residual,
                    o.final_rel_err_u,
                    o.final_rel_err_phi,
                    o.verdict.stable
                );
            }
        }
        Command::Coeffs {
            theta,
            k_prev,
            k,
            out,
        } => {
            let pairs: Vec<(f64, f64)> = k.iter().map(|&kn| (k_prev, kn)).collect();
            let csv = coefficients_csv(&theta, &pairs);
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}
