//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities (visible under `--nocapture`).

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use sdflow::dln::{dln_coefficients, euclidean, g_identity_residual, StepSchedule};
use sdflow::harness::{
    convergence_rate, convergence_run, run_varstep, ElementChoice, ExperimentConfig,
};
use sdflow::model::ManufacturedProblem;
use std::time::Instant;

/// Paper error tables (columns: u L2, u H1, φ L2, φ H1, p L2).
const TABLE_DLN: [(f64, [(usize, [f64; 5]); 5]); 3] = [
    (
        0.2,
        [
            (10, [0.0163655, 0.599657, 0.0143625, 0.552125, 0.175753]),
            (16, [0.00657067, 0.354318, 0.00587243, 0.359717, 0.0785158]),
            (22, [0.00353871, 0.255182, 0.00317754, 0.268333, 0.0490189]),
            (28, [0.00218857, 0.191492, 0.00198363, 0.2117, 0.0306542]),
            (34, [0.00150194, 0.160602, 0.00135819, 0.177254, 0.0213342]),
        ],
    ),
    (
        0.5,
        [
            (10, [0.01615, 0.506002, 0.0146238, 0.551755, 0.138243]),
            (16, [0.00652393, 0.311263, 0.00599802, 0.359655, 0.0637115]),
            (22, [0.00351853, 0.22917, 0.00324735, 0.268314, 0.04083]),
            (28, [0.00218086, 0.176397, 0.00202875, 0.211693, 0.0260884]),
            (34, [0.00149633, 0.148517, 0.0013883, 0.177249, 0.0184629]),
        ],
    ),
    (
        0.7,
        [
            (10, [0.0161161, 0.488013, 0.0150263, 0.551591, 0.128276]),
            (16, [0.00652022, 0.30443, 0.00616699, 0.359622, 0.0604363]),
            (22, [0.00351759, 0.225303, 0.00333733, 0.268301, 0.0393132]),
            (28, [0.00218125, 0.174198, 0.00208573, 0.211687, 0.0252779]),
            (34, [0.00149674, 0.14679, 0.00142616, 0.177246, 0.0179642]),
        ],
    ),
];

const TABLE_BDF2: [(usize, [f64; 5]); 3] = [
    (10, [0.0160291, 0.450396, 0.0165148, 0.551278, 0.116047]),
    (16, [0.00650765, 0.290462, 0.00680715, 0.359553, 0.0561277]),
    (22, [0.00351566, 0.2176, 0.0036845, 0.268273, 0.0373131]),
];

#[test]
fn criterion_1_g_stability_identity() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let theta: f64 = rng.random_range(0.0..=1.0);
        let k_n = 10f64.powf(rng.random_range(-3.0..2.0));
        let k_prev = 10f64.powf(rng.random_range(-3.0..2.0));
        let coeffs = dln_coefficients(theta, k_n, k_prev).unwrap();
        let dim = rng.random_range(1..=50);
        let mut draw = || -> Vec<f64> {
            (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect()
        };
        let (xp, xc, xn) = (draw(), draw(), draw());
        let r = g_identity_residual(&xp, &xc, &xn, &coeffs, euclidean).unwrap();
        let scale = [&xp, &xc, &xn]
            .iter()
            .map(|v| euclidean(v, v))
            .fold(1.0f64, f64::max);
        worst = worst.max(r.abs() / scale);
    }
    let elapsed = started.elapsed();
    assert!(worst <= 1e-12, "max relative identity residual {worst}");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 1: PASS — G-identity residual {worst:.2e} over 1000 trials in {elapsed:.2?}"
    );
}

#[test]
fn criterion_2_coefficient_algebra() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let theta: f64 = rng.random_range(0.0..=1.0);
        let k_n = 10f64.powf(rng.random_range(-6.0..3.0));
        let k_prev = 10f64.powf(rng.random_range(-6.0..3.0));
        let c = dln_coefficients(theta, k_n, k_prev).unwrap();
        let scale = k_n.max(k_prev);
        let alpha_sum = c.alpha.iter().sum::<f64>().abs();
        let beta_sum = (c.beta.iter().sum::<f64>() - 1.0).abs();
        let second = (c.alpha[2] * k_n * k_n + c.alpha[0] * k_prev * k_prev
            - 2.0 * c.k_hat * (c.beta[2] * k_n - c.beta[0] * k_prev))
            .abs()
            / (scale * scale);
        let half_sum = (k_n + k_prev) / 2.0;
        let lo = ((1.0 - theta) * half_sum - c.k_hat).max(0.0) / scale;
        let hi = (c.k_hat - (1.0 + theta) * half_sum).max(0.0) / scale;
        for v in [alpha_sum, beta_sum, second, lo, hi] {
            worst = worst.max(v);
        }
    }
    let elapsed = started.elapsed();
    assert!(worst <= 1e-12, "max relative residual {worst}");
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[acceptance] criterion 2: PASS — coefficient residual {worst:.2e} over 10^4 draws in {elapsed:.2?}"
    );
}

#[test]
fn criterion_3_scalar_ode_order() {
    let started = Instant::now();
    for &theta in &[0.2, 0.5, 0.7] {
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for level in 0..5 {
            let kmax = 0.08 / 2f64.powi(level);
            let schedule = bounded_ratio_schedule(kmax, 1.0, 900 + level as u64);
            errs.push(decay_error(theta, &schedule));
            hs.push(kmax);
        }
        let slope = lsq_slope(&hs, &errs);
        assert!(
            (slope - 2.0).abs() <= 0.1,
            "theta = {theta}: observed order {slope}"
        );
        println!("[acceptance] criterion 3: theta = {theta}: observed order {slope:.3}");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("[acceptance] criterion 3: PASS — order 2.0 ± 0.1 for all theta in {elapsed:.2?}");
}

#[test]
fn criterion_4_manufactured_forcing() {
    let started = Instant::now();
    for problem in [
        ManufacturedProblem::variable_step_test(),
        ManufacturedProblem::convergence_test(),
    ] {
        let r = problem.residual_check(200, 1e-4, (0.0, 1.0), 404);
        assert!(r <= 1e-5, "{}: FD residual {r}", problem.name);
        println!(
            "[acceptance] criterion 4: {}: FD residual {r:.2e} at 200 points",
            problem.name
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("[acceptance] criterion 4: PASS — both forcings validated in {elapsed:.2?}");
}

#[test]
fn criterion_5_table_reproduction() {
    table_reproduction(&[10, 16, 22]);
    println!("[acceptance] criterion 5: PASS — rates and magnitudes match at n = 10, 16, 22");
}

/// The two finest paper rows; run with `cargo test -- --ignored` (the
/// CLI `--full` analogue).
#[test]
#[ignore = "paper's finest resolutions; enable with --ignored (CLI --full)"]
fn criterion_5_full_resolutions() {
    table_reproduction(&[22, 28, 34]);
    println!("[acceptance] criterion 5 (full): PASS — rates and magnitudes match at n = 28, 34");
}

fn table_reproduction(resolutions: &[usize]) {
    for (theta, table) in TABLE_DLN {
        let mut rows = Vec::new();
        for &n in resolutions {
            let row = convergence_run(Some(theta), n, ElementChoice::Mini).unwrap();
            let reference = table
                .iter()
                .find(|(m, _)| *m == n)
                .map(|(_, e)| e)
                .expect("tabulated resolution");
            // (c) magnitudes within a factor of 2 of the paper entries
            for (c, (got, want)) in row.errors.iter().zip(reference).enumerate() {
                let ratio = got / want;
                assert!(
                    (0.5..=2.0).contains(&ratio),
                    "theta={theta} n={n} column {c}: {got:.6e} vs paper {want:.6e} (ratio {ratio:.3})"
                );
            }
            rows.push(row);
        }
        // (a) L2 rates for u and phi >= 1.8; (b) H1 rates in [0.85, 1.3]
        for w in rows.windows(2) {
            let r = |c: usize| {
                convergence_rate(w[0].errors[c], w[1].errors[c], w[0].dt, w[1].dt).unwrap()
            };
            let (r_u_l2, r_u_h1, r_phi_l2, r_phi_h1) = (r(0), r(1), r(2), r(3));
            assert!(
                r_u_l2 >= 1.8 && r_phi_l2 >= 1.8,
                "theta={theta} n={}->{}: L2 rates u {r_u_l2:.3}, phi {r_phi_l2:.3}",
                w[0].n,
                w[1].n
            );
            assert!(
                (0.85..=1.3).contains(&r_u_h1) && (0.85..=1.3).contains(&r_phi_h1),
                "theta={theta} n={}->{}: H1 rates u {r_u_h1:.3}, phi {r_phi_h1:.3}",
                w[0].n,
                w[1].n
            );
            println!(
                "[acceptance] criterion 5: theta={theta} n={}->{}: rates uL2 {r_u_l2:.3} uH1 {r_u_h1:.3} phiL2 {r_phi_l2:.3} phiH1 {r_phi_h1:.3}",
                w[0].n, w[1].n
            );
        }
        // monotone error decay (every paper table shows it)
        for c in 0..5 {
            for w in rows.windows(2) {
                assert!(
                    w[1].errors[c] < w[0].errors[c],
                    "theta={theta} column {c} not decreasing"
                );
            }
        }
    }
}

#[test]
fn criterion_6_bdf2_comparison() {
    let mut bdf2_rows = Vec::new();
    for &n in &[10usize, 16] {
        let row = convergence_run(None, n, ElementChoice::Mini).unwrap();
        let reference = TABLE_BDF2
            .iter()
            .find(|(m, _)| *m == n)
            .map(|(_, e)| e)
            .unwrap();
        for (c, (got, want)) in row.errors.iter().zip(reference).enumerate() {
            let ratio = got / want;
            assert!(
                (0.5..=2.0).contains(&ratio),
                "BDF2 n={n} column {c}: {got:.6e} vs paper {want:.6e}"
            );
        }
        bdf2_rows.push(row);
    }
    // BDF2 second order in the L2 columns
    let r_u = convergence_rate(
        bdf2_rows[0].errors[0],
        bdf2_rows[1].errors[0],
        bdf2_rows[0].dt,
        bdf2_rows[1].dt,
    )
    .unwrap();
    let r_phi = convergence_rate(
        bdf2_rows[0].errors[2],
        bdf2_rows[1].errors[2],
        bdf2_rows[0].dt,
        bdf2_rows[1].dt,
    )
    .unwrap();
    assert!(r_u >= 1.8 && r_phi >= 1.8, "BDF2 rates u {r_u:.3} phi {r_phi:.3}");

    // DLN theta = 0.2 beats BDF2 on the hydraulic head at both resolutions
    for (i, &n) in [10usize, 16].iter().enumerate() {
        let dln = convergence_run(Some(0.2), n, ElementChoice::Mini).unwrap();
        assert!(
            dln.errors[2] < bdf2_rows[i].errors[2],
            "n={n}: DLN phi L2 {:.6e} not below BDF2 {:.6e}",
            dln.errors[2],
            bdf2_rows[i].errors[2]
        );
        println!(
            "[acceptance] criterion 6: n={n}: DLN(0.2) phi L2 {:.6e} < BDF2 {:.6e}; BDF2 rates u {r_u:.3} phi {r_phi:.3}",
            dln.errors[2], bdf2_rows[i].errors[2]
        );
    }
    println!("[acceptance] criterion 6: PASS");
}

#[test]
fn criterion_7_variable_step_stability() {
    let cfg = ExperimentConfig {
        thetas: vec![0.2, 0.5, 0.7],
        ..ExperimentConfig::default()
    };
    let outcomes = run_varstep(&cfg).unwrap();
    for o in &outcomes {
        assert!(
            o.verdict.max_identity_residual <= 1e-8,
            "theta={}: energy identity residual {}",
            o.theta,
            o.verdict.max_identity_residual
        );
        assert!(o.verdict.stable, "theta={}: verdict {:?}", o.theta, o.verdict);
        assert!(
            o.final_rel_err_u <= 0.10 && o.final_rel_err_phi <= 0.10,
            "theta={}: final relative errors u {:.3e}, phi {:.3e}",
            o.theta,
            o.final_rel_err_u,
            o.final_rel_err_phi
        );
        assert_eq!(o.stats.steps, 40);
        // criterion 8 on this run
        assert!(
            o.stats.max_divergence_inf() <= 1e-9,
            "theta={}: divergence {:.3e}",
            o.theta,
            o.stats.max_divergence_inf()
        );
        println!(
            "[acceptance] criterion 7: theta={}: identity {:.2e}, rel err u {:.3e}, phi {:.3e} at t={:.4}",
            o.theta, o.verdict.max_identity_residual, o.final_rel_err_u, o.final_rel_err_phi, o.final_time
        );
    }
    println!("[acceptance] criterion 7: PASS — 40-step variable-step runs stable for all theta");
}

#[test]
fn criterion_8_discrete_divergence() {
    // representative constant-step and variable-step runs; criteria 5-7
    // additionally assert the same bound on their own trajectories
    use sdflow::dln::StepSchedule;
    use sdflow::fem::{Element, ElementPair};
    use sdflow::model::{run_transient, Discretization, Scheme};

    let problem = ManufacturedProblem::convergence_test();
    let disc =
        Discretization::build(&problem, ElementPair::mini(Element::P1).unwrap(), 10).unwrap();
    let schedule = StepSchedule::constant(0.0, 0.1, 10).unwrap();
    let mut worst = 0.0f64;
    for scheme in [Scheme::Dln { theta: 0.5 }, Scheme::Bdf2] {
        let result = run_transient(&disc, &problem, &schedule, scheme).unwrap();
        worst = worst.max(result.stats.max_divergence_inf());
    }
    let varying = StepSchedule::new(0.0, vec![0.1, 0.08, 0.12, 0.09, 0.11, 0.1]).unwrap();
    let result = run_transient(&disc, &problem, &varying, Scheme::Dln { theta: 0.2 }).unwrap();
    worst = worst.max(result.stats.max_divergence_inf());
    assert!(worst <= 1e-9, "max ||B u||_inf = {worst:.3e}");
    println!("[acceptance] criterion 8: PASS — max ||B u^n||_inf = {worst:.3e} <= 1e-9");
}

// -- criterion 3 helpers ----------------------------------------------------

fn bounded_ratio_schedule(kmax: f64, t_end: f64, seed: u64) -> StepSchedule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = Vec::new();
    let mut t = 0.0;
    while t < t_end {
        let mut k = kmax * rng.random_range(0.4..1.0);
        if t + k > t_end {
            k = t_end - t;
            if k < 1e-12 {
                break;
            }
        }
        steps.push(k);
        t += k;
    }
    StepSchedule::new(0.0, steps).unwrap()
}

fn decay_error(theta: f64, schedule: &StepSchedule) -> f64 {
    let ts = schedule.times();
    let mut y_prev = 1.0f64;
    let mut y_cur = (-ts[1]).exp();
    let mut max_err = 0.0f64;
    for n in 1..schedule.len() {
        let c = dln_coefficients(theta, schedule.steps[n], schedule.steps[n - 1]).unwrap();
        let y_next = (-c.k_hat * (c.beta[1] * y_cur + c.beta[0] * y_prev)
            - c.alpha[1] * y_cur
            - c.alpha[0] * y_prev)
            / (c.alpha[2] + c.k_hat * c.beta[2]);
        y_prev = y_cur;
        y_cur = y_next;
        max_err = max_err.max((y_cur - (-ts[n + 1]).exp()).abs());
    }
    max_err
}

fn lsq_slope(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
