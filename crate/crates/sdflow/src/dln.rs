//! The DLN one-parameter family of two-step, one-leg methods under variable
//! time steps, together with the G(θ)-norm machinery that makes the family
//! unconditionally stable, and the constant-step BDF2 baseline weights.
//!
//! For a step pair `(k_prev, k_n)` the scheme advances
//!
//! ```text
//! Σ_j α_j x_{n-1+j} = k̂ · f( Σ_j β_j t_{n-1+j}, Σ_j β_j x_{n-1+j} ),
//! k̂ = α₂ k_n − α₀ k_{n-1},
//! ```
//!
//! with coefficients chosen so that the scheme is second order and satisfies
//! the exact energy identity
//!
//! ```text
//! ⟨Σ α_j x_j, Σ β_j x_j⟩ = ‖(x_{n+1}, x_n)‖²_G − ‖(x_n, x_{n-1})‖²_G + ‖Σ λ_j x_j‖².
//! ```

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DlnError {
    #[error("time step must be positive and finite, got {0}")]
    NonPositiveStep(f64),
    #[error("theta must lie in [0, 1], got {0}")]
    ThetaOutOfRange(f64),
    #[error("degenerate implicit weight beta2 = {beta2:.3e} at theta = {theta}, eps = {eps}")]
    DegenerateBeta { theta: f64, eps: f64, beta2: f64 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("grid times inconsistent with coefficient steps: {0}")]
    InconsistentGrid(String),
}

/// Per-step DLN(θ) coefficient set for a step pair `(k_prev, k_n)`.
///
/// `alpha`, `beta`, `lambda` are ordered oldest-first: index 0 multiplies
/// the state at `t_{n-1}`, index 2 the new state at `t_{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DlnCoefficients {
    pub theta: f64,
    /// Stepsize ratio parameter (k_n − k_{n-1})/(k_n + k_{n-1}), in (−1, 1).
    pub eps: f64,
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
    /// Numerical-dissipation weights; identically zero at θ = 1.
    pub lambda: [f64; 3],
    /// Averaged step k̂ = α₂ k_n − α₀ k_{n-1}.
    pub k_hat: f64,
    /// Offset of the one-leg evaluation time: t_{n,β} − t_n = β₂ k_n − β₀ k_{n-1}.
    pub t_beta_offset: f64,
    pub k_n: f64,
    pub k_prev: f64,
}

/// Weights of the G(θ)-norm ‖(y, z)‖²_G = w_new ‖y‖² + w_old ‖z‖².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GNormWeights {
    pub theta: f64,
    pub w_new: f64,
    pub w_old: f64,
}

impl GNormWeights {
    pub fn new(theta: f64) -> Result<Self, DlnError> {
        check_theta(theta)?;
        Ok(Self {
            theta,
            w_new: (1.0 + theta) / 4.0,
            w_old: (1.0 - theta) / 4.0,
        })
    }
}

/// A variable-step time grid: `t_n = t0 + Σ_{j<n} steps[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSchedule {
    pub t0: f64,
    pub steps: Vec<f64>,
}

impl StepSchedule {
    pub fn new(t0: f64, steps: Vec<f64>) -> Result<Self, DlnError> {
        for &k in &steps {
            if !(k > 0.0) || !k.is_finite() {
                return Err(DlnError::NonPositiveStep(k));
            }
        }
        Ok(Self { t0, steps })
    }

    /// Constant-step schedule covering `[t0, t0 + n*k]`.
    pub fn constant(t0: f64, k: f64, n: usize) -> Result<Self, DlnError> {
        Self::new(t0, vec![k; n])
    }

    /// Grid points t_0 .. t_N.
    pub fn times(&self) -> Vec<f64> {
        let mut ts = Vec::with_capacity(self.steps.len() + 1);
        let mut t = self.t0;
        ts.push(t);
        for &k in &self.steps {
            t += k;
            ts.push(t);
        }
        ts
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn max_step(&self) -> f64 {
        self.steps.iter().cloned().fold(0.0, f64::max)
    }

    pub fn final_time(&self) -> f64 {
        self.t0 + self.steps.iter().sum::<f64>()
    }
}

fn check_theta(theta: f64) -> Result<(), DlnError> {
    if !(0.0..=1.0).contains(&theta) || !theta.is_finite() {
        return Err(DlnError::ThetaOutOfRange(theta));
    }
    Ok(())
}

fn check_step(k: f64) -> Result<(), DlnError> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(DlnError::NonPositiveStep(k));
    }
    Ok(())
}

/// Stepsize ratio parameter ε = (k_n − k_prev)/(k_n + k_prev).
///
/// Strictly inside (−1, 1) for positive steps.
pub fn step_ratio_epsilon(k_n: f64, k_prev: f64) -> Result<f64, DlnError> {
    check_step(k_n)?;
    check_step(k_prev)?;
    Ok((k_n - k_prev) / (k_n + k_prev))
}

/// DLN(θ) coefficients for the step pair `(k_prev, k_n)`.
///
/// The α are step-independent; the β depend on the steps through ε. The
/// middle coefficient is α₁ = −θ, the sign required by Σα = 0 and the
/// second-order condition.
pub fn dln_coefficients(theta: f64, k_n: f64, k_prev: f64) -> Result<DlnCoefficients, DlnError> {
    check_theta(theta)?;
    let eps = step_ratio_epsilon(k_n, k_prev)?;

    let alpha = [(theta - 1.0) / 2.0, -theta, (theta + 1.0) / 2.0];

    let denom = (1.0 + eps * theta).powi(2);
    let q = (1.0 - theta * theta) / denom;
    let r = eps * eps * theta * (1.0 - theta * theta) / denom;
    let beta = [
        0.25 * (1.0 + q - r - theta),
        0.5 * (1.0 - q),
        0.25 * (1.0 + q + r + theta),
    ];
    if beta[2] <= 1e-10 {
        return Err(DlnError::DegenerateBeta {
            theta,
            eps,
            beta2: beta[2],
        });
    }

    let lambda1 = -(theta * (1.0 - theta * theta)).sqrt() / (2f64.sqrt() * (1.0 + eps * theta));
    let lambda = [
        -(1.0 + eps) / 2.0 * lambda1,
        lambda1,
        -(1.0 - eps) / 2.0 * lambda1,
    ];

    let k_hat = alpha[2] * k_n - alpha[0] * k_prev;
    let t_beta_offset = beta[2] * k_n - beta[0] * k_prev;

    Ok(DlnCoefficients {
        theta,
        eps,
        alpha,
        beta,
        lambda,
        k_hat,
        t_beta_offset,
        k_n,
        k_prev,
    })
}

/// Squared G(θ)-norm of a state pair under a caller-supplied inner product:
/// (1+θ)/4 ⟨y,y⟩ + (1−θ)/4 ⟨z,z⟩.
pub fn g_norm_sq<F>(y: &[f64], z: &[f64], theta: f64, inner: F) -> Result<f64, DlnError>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    check_theta(theta)?;
    if y.len() != z.len() {
        return Err(DlnError::DimensionMismatch(y.len(), z.len()));
    }
    let w = GNormWeights::new(theta)?;
    Ok(w.w_new * inner(y, y) + w.w_old * inner(z, z))
}

/// Residual of the G-stability identity on a state triple; zero to rounding
/// for every input.
///
/// Returns ⟨Σαx, Σβx⟩ − [ ‖(x_next, x_cur)‖²_G − ‖(x_cur, x_prev)‖²_G + ‖Σλx‖² ].
pub fn g_identity_residual<F>(
    x_prev: &[f64],
    x_cur: &[f64],
    x_next: &[f64],
    coeffs: &DlnCoefficients,
    inner: F,
) -> Result<f64, DlnError>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let n = x_prev.len();
    if x_cur.len() != n {
        return Err(DlnError::DimensionMismatch(n, x_cur.len()));
    }
    if x_next.len() != n {
        return Err(DlnError::DimensionMismatch(n, x_next.len()));
    }
    let combo = |c: &[f64; 3]| -> Vec<f64> {
        (0..n)
            .map(|i| c[0] * x_prev[i] + c[1] * x_cur[i] + c[2] * x_next[i])
            .collect()
    };
    let ax = combo(&coeffs.alpha);
    let bx = combo(&coeffs.beta);
    let lx = combo(&coeffs.lambda);

    let lhs = inner(&ax, &bx);
    let g_new = g_norm_sq(x_next, x_cur, coeffs.theta, &inner)?;
    let g_old = g_norm_sq(x_cur, x_prev, coeffs.theta, &inner)?;
    let dissipation = inner(&lx, &lx);
    Ok(lhs - (g_new - g_old + dissipation))
}

/// The one-leg evaluation time t_{n,β} = β₂ t_next + β₁ t_cur + β₀ t_prev.
pub fn one_leg_point(
    t_prev: f64,
    t_cur: f64,
    t_next: f64,
    coeffs: &DlnCoefficients,
) -> Result<f64, DlnError> {
    let k_prev = t_cur - t_prev;
    let k_n = t_next - t_cur;
    let tol = 1e-9 * (coeffs.k_n + coeffs.k_prev);
    if (k_prev - coeffs.k_prev).abs() > tol || (k_n - coeffs.k_n).abs() > tol {
        return Err(DlnError::InconsistentGrid(format!(
            "grid steps ({k_prev}, {k_n}) vs coefficient steps ({}, {})",
            coeffs.k_prev, coeffs.k_n
        )));
    }
    Ok(coeffs.beta[2] * t_next + coeffs.beta[1] * t_cur + coeffs.beta[0] * t_prev)
}

/// Constant-step BDF2 weights (c₀, c₁, c₂) of (u^{n-1}, u^n, u^{n+1}) in the
/// difference quotient (3u^{n+1} − 4u^n + u^{n-1})/(2k).
pub fn bdf2_coefficients(k: f64) -> Result<[f64; 3], DlnError> {
    check_step(k)?;
    Ok([0.5 / k, -2.0 / k, 1.5 / k])
}

/// Euclidean dot product, the default inner product for the G-norm helpers.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn epsilon_examples() {
        assert_eq!(step_ratio_epsilon(0.1, 0.1).unwrap(), 0.0);
        assert_relative_eq!(step_ratio_epsilon(0.15, 0.05).unwrap(), 0.5);
        assert_relative_eq!(step_ratio_epsilon(0.05, 0.15).unwrap(), -0.5);
    }

    #[test]
    fn epsilon_rejects_nonpositive() {
        assert!(matches!(
            step_ratio_epsilon(0.0, 0.1),
            Err(DlnError::NonPositiveStep(_))
        ));
        assert!(matches!(
            step_ratio_epsilon(0.1, -1.0),
            Err(DlnError::NonPositiveStep(_))
        ));
    }

    #[test]
    fn coefficients_theta_one_is_midpoint() {
        let c = dln_coefficients(1.0, 0.3, 0.7).unwrap();
        assert_relative_eq!(c.alpha[0], 0.0);
        assert_relative_eq!(c.alpha[1], -1.0);
        assert_relative_eq!(c.alpha[2], 1.0);
        assert_relative_eq!(c.beta[0], 0.0);
        assert_relative_eq!(c.beta[1], 0.5);
        assert_relative_eq!(c.beta[2], 0.5);
        assert_eq!(c.lambda, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn coefficients_half_equal_steps() {
        let c = dln_coefficients(0.5, 1.0, 1.0).unwrap();
        assert_relative_eq!(c.alpha[0], -0.25);
        assert_relative_eq!(c.alpha[1], -0.5);
        assert_relative_eq!(c.alpha[2], 0.75);
        assert_relative_eq!(c.beta[0], 0.3125, epsilon = 1e-15);
        assert_relative_eq!(c.beta[1], 0.125, epsilon = 1e-15);
        assert_relative_eq!(c.beta[2], 0.5625, epsilon = 1e-15);
        assert_relative_eq!(c.beta.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        // lambda = (sqrt(3)/8, -sqrt(3)/4, sqrt(3)/8)
        let s3 = 3f64.sqrt();
        assert_relative_eq!(c.lambda[0], s3 / 8.0, epsilon = 1e-15);
        assert_relative_eq!(c.lambda[1], -s3 / 4.0, epsilon = 1e-15);
        assert_relative_eq!(c.lambda[2], s3 / 8.0, epsilon = 1e-15);
        assert_relative_eq!(c.k_hat, 1.0);
    }

    #[test]
    fn coefficients_half_uneven_steps() {
        let c = dln_coefficients(0.5, 0.15, 0.05).unwrap();
        assert_relative_eq!(c.eps, 0.5);
        assert_relative_eq!(c.beta[0], 0.23, epsilon = 1e-15);
        assert_relative_eq!(c.beta[1], 0.26, epsilon = 1e-15);
        assert_relative_eq!(c.beta[2], 0.51, epsilon = 1e-15);
        assert_relative_eq!(c.k_hat, 0.125, epsilon = 1e-15);
        // second-order condition, exact value 0.01625
        let lhs = c.alpha[2] * 0.15 * 0.15 + c.alpha[0] * 0.05 * 0.05;
        let rhs = 2.0 * c.k_hat * (c.beta[2] * 0.15 - c.beta[0] * 0.05);
        assert_relative_eq!(lhs, 0.01625, epsilon = 1e-15);
        assert!((lhs - rhs).abs() <= 1e-15);
    }

    #[test]
    fn coefficients_reject_bad_inputs() {
        assert!(matches!(
            dln_coefficients(-0.1, 1.0, 1.0),
            Err(DlnError::ThetaOutOfRange(_))
        ));
        assert!(matches!(
            dln_coefficients(1.5, 1.0, 1.0),
            Err(DlnError::ThetaOutOfRange(_))
        ));
        assert!(matches!(
            dln_coefficients(0.5, 0.0, 1.0),
            Err(DlnError::NonPositiveStep(_))
        ));
    }

    fn invariant_residuals(c: &DlnCoefficients) -> [f64; 4] {
        let alpha_sum = c.alpha.iter().sum::<f64>();
        let beta_sum = c.beta.iter().sum::<f64>() - 1.0;
        let khat = c.k_hat - ((1.0 + c.theta) * c.k_n + (1.0 - c.theta) * c.k_prev) / 2.0;
        let second = c.alpha[2] * c.k_n * c.k_n + c.alpha[0] * c.k_prev * c.k_prev
            - 2.0 * c.k_hat * (c.beta[2] * c.k_n - c.beta[0] * c.k_prev);
        [alpha_sum, beta_sum, khat, second]
    }

    #[test]
    fn invariants_hold_over_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10_000 {
            let theta: f64 = rng.random_range(0.0..=1.0);
            let k_n = 10f64.powf(rng.random_range(-6.0..3.0));
            let k_prev = 10f64.powf(rng.random_range(-6.0..3.0));
            let c = dln_coefficients(theta, k_n, k_prev).unwrap();
            let scale = k_n.max(k_prev);
            let [a, b, kh, second] = invariant_residuals(&c);
            assert!(a.abs() <= 1e-12, "alpha sum {a} at theta={theta}");
            assert!(b.abs() <= 1e-12, "beta sum {b} at theta={theta}");
            assert!(kh.abs() <= 1e-12 * scale, "k_hat {kh}");
            assert!(second.abs() <= 1e-12 * scale * scale, "order cond {second}");
            // lambda structure
            assert!((c.lambda[2] + (1.0 - c.eps) / 2.0 * c.lambda[1]).abs() <= 1e-15);
            assert!((c.lambda[0] + (1.0 + c.eps) / 2.0 * c.lambda[1]).abs() <= 1e-15);
            // averaged-step bounds
            let lo = (1.0 - theta) * (k_n + k_prev) / 2.0;
            let hi = (1.0 + theta) * (k_n + k_prev) / 2.0;
            assert!(c.k_hat >= lo - 1e-12 * scale && c.k_hat <= hi + 1e-12 * scale);
        }
    }

    #[test]
    fn g_norm_examples() {
        assert_eq!(g_norm_sq(&[0.0], &[0.0], 0.3, euclidean).unwrap(), 0.0);
        assert_relative_eq!(g_norm_sq(&[2.0], &[2.0], 0.5, euclidean).unwrap(), 2.0);
        assert_relative_eq!(g_norm_sq(&[1.0], &[1.0], 1.0, euclidean).unwrap(), 0.5);
        assert!(matches!(
            g_norm_sq(&[1.0], &[1.0, 2.0], 0.5, euclidean),
            Err(DlnError::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn g_identity_examples() {
        let c = dln_coefficients(0.5, 1.0, 1.0).unwrap();
        // linear sequence: dissipation vanishes
        let r = g_identity_residual(&[1.0], &[2.0], &[3.0], &c, euclidean).unwrap();
        assert!(r.abs() <= 1e-14);
        let lhs = euclidean(
            &[c.alpha[0] + 2.0 * c.alpha[1] + 3.0 * c.alpha[2]],
            &[c.beta[0] + 2.0 * c.beta[1] + 3.0 * c.beta[2]],
        );
        assert_relative_eq!(lhs, 2.25, epsilon = 1e-15);

        // curved sequence: dissipation = 3/64
        let r = g_identity_residual(&[1.0], &[2.0], &[4.0], &c, euclidean).unwrap();
        assert!(r.abs() <= 1e-14);
        let lx = c.lambda[0] + 2.0 * c.lambda[1] + 4.0 * c.lambda[2];
        assert_relative_eq!(lx * lx, 3.0 / 64.0, epsilon = 1e-14);
        let lhs = euclidean(
            &[c.alpha[0] + 2.0 * c.alpha[1] + 4.0 * c.alpha[2]],
            &[c.beta[0] + 2.0 * c.beta[1] + 4.0 * c.beta[2]],
        );
        assert_relative_eq!(lhs, 4.921875, epsilon = 1e-15);

        // theta = 1: zero dissipation for arbitrary data
        let c1 = dln_coefficients(1.0, 0.2, 0.4).unwrap();
        let r = g_identity_residual(&[0.3, -1.2], &[2.0, 0.7], &[-0.5, 1.1], &c1, euclidean)
            .unwrap();
        assert!(r.abs() <= 1e-14);
        assert_eq!(c1.lambda, [0.0; 3]);
    }

    #[test]
    fn g_identity_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let theta: f64 = rng.random_range(0.0..=1.0);
            let k_n = 10f64.powf(rng.random_range(-3.0..2.0));
            let k_prev = 10f64.powf(rng.random_range(-3.0..2.0));
            let c = dln_coefficients(theta, k_n, k_prev).unwrap();
            let dim = rng.random_range(1..=50);
            let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect()
            };
            let (xp, xc, xn) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
            let r = g_identity_residual(&xp, &xc, &xn, &c, euclidean).unwrap();
            let scale = [
                euclidean(&xp, &xp),
                euclidean(&xc, &xc),
                euclidean(&xn, &xn),
                1.0,
            ]
            .into_iter()
            .fold(0.0, f64::max);
            assert!(r.abs() <= 1e-12 * scale, "residual {r} exceeds 1e-12 rel");
        }
    }

    #[test]
    fn one_leg_point_examples() {
        let c = dln_coefficients(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(one_leg_point(0.0, 1.0, 2.0, &c).unwrap(), 1.5);

        let c = dln_coefficients(0.5, 1.0, 1.0).unwrap();
        assert_relative_eq!(one_leg_point(0.0, 1.0, 2.0, &c).unwrap(), 1.25);

        let c = dln_coefficients(0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(one_leg_point(0.0, 1.0, 2.0, &c).unwrap(), 1.0);

        assert!(matches!(
            one_leg_point(0.0, 0.5, 2.0, &c),
            Err(DlnError::InconsistentGrid(_))
        ));
    }

    #[test]
    fn bdf2_examples() {
        assert_eq!(bdf2_coefficients(1.0).unwrap(), [0.5, -2.0, 1.5]);
        assert_eq!(bdf2_coefficients(0.5).unwrap(), [1.0, -4.0, 3.0]);
        assert!(bdf2_coefficients(0.0).is_err());
        // exact on quadratics: u(t) = t^2 on {0,1,2} gives u'(2) = 4
        let c = bdf2_coefficients(1.0).unwrap();
        let q = c[0] * 0.0 + c[1] * 1.0 + c[2] * 4.0;
        assert_relative_eq!(q, 4.0);
    }

    #[test]
    fn schedule_validation_and_times() {
        let s = StepSchedule::new(0.0, vec![0.1, 0.2, 0.1]).unwrap();
        let ts = s.times();
        assert_eq!(ts.len(), 4);
        assert_relative_eq!(ts[3], 0.4, epsilon = 1e-15);
        assert_relative_eq!(s.final_time(), 0.4, epsilon = 1e-15);
        assert!(StepSchedule::new(0.0, vec![0.1, 0.0]).is_err());
        // derived epsilons strictly inside (-1, 1)
        for w in s.steps.windows(2) {
            let e = step_ratio_epsilon(w[1], w[0]).unwrap();
            assert!(e > -1.0 && e < 1.0);
        }
    }

    proptest! {
        // Quadratic exactness of the alpha-quotient and affine exactness of
        // the beta combination at t_{n,beta}, for arbitrary valid inputs.
        #[test]
        fn polynomial_exactness(
            theta in 0.0f64..=1.0,
            k_n in 1e-3f64..10.0,
            k_prev in 1e-3f64..10.0,
            t_cur in -5.0f64..5.0,
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            c0 in -3.0f64..3.0,
        ) {
            let c = dln_coefficients(theta, k_n, k_prev).unwrap();
            let (tp, tn) = (t_cur - k_prev, t_cur + k_n);
            let tb = one_leg_point(tp, t_cur, tn, &c).unwrap();
            prop_assert!(tb > tp && tb <= tn + 1e-12 * (k_n + k_prev));

            // quadratic y(t) = a t^2 + b t + c0
            let y = |t: f64| a * t * t + b * t + c0;
            let dy = |t: f64| 2.0 * a * t + b;
            let quot = (c.alpha[0] * y(tp) + c.alpha[1] * y(t_cur) + c.alpha[2] * y(tn)) / c.k_hat;
            let scale = 1.0 + dy(tb).abs() + a.abs() * (k_n + k_prev + t_cur.abs()).powi(2) / c.k_hat;
            prop_assert!((quot - dy(tb)).abs() <= 1e-10 * scale);

            // affine y: beta combination reproduces the value at t_{n,beta}
            let z = |t: f64| b * t + c0;
            let combo = c.beta[0] * z(tp) + c.beta[1] * z(t_cur) + c.beta[2] * z(tn);
            prop_assert!((combo - z(tb)).abs() <= 1e-10 * (1.0 + z(tb).abs()));
        }

        #[test]
        fn averaged_step_bounds(
            theta in 0.0f64..=1.0,
            k_n in 1e-6f64..1e3,
            k_prev in 1e-6f64..1e3,
        ) {
            let c = dln_coefficients(theta, k_n, k_prev).unwrap();
            let half_sum = (k_n + k_prev) / 2.0;
            prop_assert!(c.k_hat >= (1.0 - theta) * half_sum - 1e-12 * half_sum);
            prop_assert!(c.k_hat <= (1.0 + theta) * half_sum + 1e-12 * half_sum);
        }

        #[test]
        fn g_weights_ordered(theta in 0.0f64..=1.0) {
            let w = GNormWeights::new(theta).unwrap();
            prop_assert!(w.w_new >= 0.25 && 0.25 >= w.w_old && w.w_old >= 0.0);
            prop_assert!((w.w_new + w.w_old - 0.5).abs() <= 1e-15);
        }
    }

    /// DLN global order on y' = -y with random bounded-ratio steps. Kept
    /// here (rather than only in the acceptance suite) because it pins the
    /// alpha sign choice.
    #[test]
    fn scalar_ode_second_order() {
        for &theta in &[0.2, 0.5, 0.7] {
            let mut errs = Vec::new();
            let mut hs = Vec::new();
            for level in 0..5 {
                let kmax = 0.08 / 2f64.powi(level);
                let schedule = random_schedule(kmax, 1.0, 1234 + level as u64);
                let err = dln_decay_error(theta, &schedule);
                errs.push(err);
                hs.push(kmax);
            }
            // least-squares slope of log(err) vs log(h)
            let slope = lsq_slope(&hs, &errs);
            assert!(
                (slope - 2.0).abs() <= 0.1,
                "theta={theta}: observed order {slope}"
            );
        }
    }

    fn random_schedule(kmax: f64, t_end: f64, seed: u64) -> StepSchedule {
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

    fn dln_decay_error(theta: f64, schedule: &StepSchedule) -> f64 {
        let ts = schedule.times();
        let mut y_prev = 1.0f64;
        let mut y_cur = (-ts[1]).exp();
        let mut max_err: f64 = 0.0;
        for n in 1..schedule.len() {
            let c = dln_coefficients(theta, schedule.steps[n], schedule.steps[n - 1]).unwrap();
            // one-leg stage for f(y) = -y
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
}
