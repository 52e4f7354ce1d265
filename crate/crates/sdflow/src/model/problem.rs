//! Manufactured problems: exact fields with their analytic derivatives, the
//! forcing terms derived from the strong equations, and the natural interface
//! data the exact solution induces on Γ.
//!
//! Forcing is always derived from the full stress form
//! T(u, p) = −p I + 2 ν D(u) with solenoidal exact velocity, so
//! F₁ = u_t + ∇p − ν Δu and F₂ = S₀ φ_t − ∇·(K ∇φ). A finite-difference
//! oracle (`residual_check`) validates the derivation against the closures.

use super::PhysicalParams;
use crate::mesh::{domains, DomainSpec};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(f64, f64, f64) -> [f64; 2] + Send + Sync>;
type TensorFn = Arc<dyn Fn(f64, f64, f64) -> [[f64; 2]; 2] + Send + Sync>;
type SymHessFn = Arc<dyn Fn(f64, f64, f64) -> [f64; 3] + Send + Sync>;

pub struct ManufacturedProblem {
    pub name: &'static str,
    pub domain: DomainSpec,
    pub params: PhysicalParams,
    /// Uniform scaling of all fields (and hence all data); the problem stays
    /// an exact solution because everything is linear.
    pub scale: f64,
    velocity: VectorFn,
    velocity_t: VectorFn,
    /// [component][derivative direction]
    velocity_grad: TensorFn,
    velocity_laplace: VectorFn,
    pressure: ScalarFn,
    pressure_grad: VectorFn,
    head: ScalarFn,
    head_t: ScalarFn,
    head_grad: VectorFn,
    /// (φ_xx, φ_xy, φ_yy)
    head_hessian: SymHessFn,
}

impl ManufacturedProblem {
    pub fn velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let v = (self.velocity)(x, y, t);
        [self.scale * v[0], self.scale * v[1]]
    }
    pub fn velocity_t(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let v = (self.velocity_t)(x, y, t);
        [self.scale * v[0], self.scale * v[1]]
    }
    pub fn velocity_grad(&self, x: f64, y: f64, t: f64) -> [[f64; 2]; 2] {
        let g = (self.velocity_grad)(x, y, t);
        [
            [self.scale * g[0][0], self.scale * g[0][1]],
            [self.scale * g[1][0], self.scale * g[1][1]],
        ]
    }
    pub fn velocity_laplace(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let v = (self.velocity_laplace)(x, y, t);
        [self.scale * v[0], self.scale * v[1]]
    }
    pub fn pressure(&self, x: f64, y: f64, t: f64) -> f64 {
        self.scale * (self.pressure)(x, y, t)
    }
    pub fn pressure_grad(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let g = (self.pressure_grad)(x, y, t);
        [self.scale * g[0], self.scale * g[1]]
    }
    pub fn head(&self, x: f64, y: f64, t: f64) -> f64 {
        self.scale * (self.head)(x, y, t)
    }
    pub fn head_t(&self, x: f64, y: f64, t: f64) -> f64 {
        self.scale * (self.head_t)(x, y, t)
    }
    pub fn head_grad(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let g = (self.head_grad)(x, y, t);
        [self.scale * g[0], self.scale * g[1]]
    }
    pub fn head_hessian(&self, x: f64, y: f64, t: f64) -> [f64; 3] {
        let h = (self.head_hessian)(x, y, t);
        [self.scale * h[0], self.scale * h[1], self.scale * h[2]]
    }

    /// Stokes forcing F₁ = u_t + ∇p − ν Δu (∇·u ≡ 0).
    pub fn f1(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let ut = self.velocity_t(x, y, t);
        let gp = self.pressure_grad(x, y, t);
        let lu = self.velocity_laplace(x, y, t);
        let nu = self.params.nu;
        [ut[0] + gp[0] - nu * lu[0], ut[1] + gp[1] - nu * lu[1]]
    }

    /// Darcy forcing F₂ = S₀ φ_t − ∇·(K ∇φ) for constant K.
    pub fn f2(&self, x: f64, y: f64, t: f64) -> f64 {
        let k = self.params.k;
        let h = self.head_hessian(x, y, t);
        self.params.s0 * self.head_t(x, y, t)
            - (k[0][0] * h[0] + 2.0 * k[0][1] * h[1] + k[1][1] * h[2])
    }

    /// Tangential interface gap −τ·(T(u,p)·n_f) − c (u·τ) on the horizontal
    /// interface (n_f = (0,−1), τ = (1,0)); zero when the exact solution
    /// satisfies the homogeneous BJS condition.
    pub fn bjs_gap(&self, x: f64, t: f64) -> f64 {
        let y = self.domain.interface_y();
        let g = self.velocity_grad(x, y, t);
        let u = self.velocity(x, y, t);
        let d12 = 0.5 * (g[0][1] + g[1][0]);
        2.0 * self.params.nu * d12 - self.params.bjs_coefficient() * u[0]
    }

    /// Normal-stress interface gap −n·(T·n) − g φ on the interface.
    pub fn normal_gap(&self, x: f64, t: f64) -> f64 {
        let y = self.domain.interface_y();
        let g = self.velocity_grad(x, y, t);
        let p = self.pressure(x, y, t);
        let t22 = -p + 2.0 * self.params.nu * g[1][1];
        -t22 - self.params.g * self.head(x, y, t)
    }

    /// Mass-conservation interface gap u_f·n_f − K∇φ·n_p on the interface.
    pub fn mass_gap(&self, x: f64, t: f64) -> f64 {
        let y = self.domain.interface_y();
        let u = self.velocity(x, y, t);
        let gp = self.head_grad(x, y, t);
        let k = self.params.k;
        let kgrad_np = k[1][0] * gp[0] + k[1][1] * gp[1];
        -u[1] - kgrad_np
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// Strong-equation residuals at random space-time points, with every
    /// derivative taken by centered finite differences of the exact field
    /// closures (independent of the analytic derivative closures used to
    /// build the forcing).
    pub fn residual_check(
        &self,
        n_points: usize,
        fd_step: f64,
        t_range: (f64, f64),
        seed: u64,
    ) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = fd_step;
        let mut worst = 0.0f64;
        let u = |x: f64, y: f64, t: f64, c: usize| self.velocity(x, y, t)[c];
        let p = |x: f64, y: f64, t: f64| self.pressure(x, y, t);
        let phi = |x: f64, y: f64, t: f64| self.head(x, y, t);

        for _ in 0..n_points {
            let t = rng.random_range(t_range.0..t_range.1);
            // Stokes residual sampled in the fluid rectangle
            let x = rng.random_range(self.domain.fluid.x0..self.domain.fluid.x1);
            let y = rng.random_range(self.domain.fluid.y0..self.domain.fluid.y1);
            let nu = self.params.nu;
            let dxx = |c: usize| (u(x + h, y, t, c) - 2.0 * u(x, y, t, c) + u(x - h, y, t, c)) / (h * h);
            let dyy = |c: usize| (u(x, y + h, t, c) - 2.0 * u(x, y, t, c) + u(x, y - h, t, c)) / (h * h);
            let dxy = |c: usize| {
                (u(x + h, y + h, t, c) - u(x + h, y - h, t, c) - u(x - h, y + h, t, c)
                    + u(x - h, y - h, t, c))
                    / (4.0 * h * h)
            };
            let px = (p(x + h, y, t) - p(x - h, y, t)) / (2.0 * h);
            let py = (p(x, y + h, t) - p(x, y - h, t)) / (2.0 * h);
            let ut = |c: usize| (u(x, y, t + h, c) - u(x, y, t - h, c)) / (2.0 * h);
            // div T = (-px + 2 nu u1_xx + nu (u1_yy + u2_xy),
            //          -py + nu (u2_xx + u1_xy) + 2 nu u2_yy)
            let div_t = [
                -px + 2.0 * nu * dxx(0) + nu * (dyy(0) + dxy(1)),
                -py + nu * (dxx(1) + dxy(0)) + 2.0 * nu * dyy(1),
            ];
            let f1 = self.f1(x, y, t);
            worst = worst.max((ut(0) - div_t[0] - f1[0]).abs());
            worst = worst.max((ut(1) - div_t[1] - f1[1]).abs());

            // Darcy residual sampled in the porous rectangle
            let x = rng.random_range(self.domain.porous.x0..self.domain.porous.x1);
            let y = rng.random_range(self.domain.porous.y0..self.domain.porous.y1);
            let pxx = (phi(x + h, y, t) - 2.0 * phi(x, y, t) + phi(x - h, y, t)) / (h * h);
            let pyy = (phi(x, y + h, t) - 2.0 * phi(x, y, t) + phi(x, y - h, t)) / (h * h);
            let pxy = (phi(x + h, y + h, t) - phi(x + h, y - h, t) - phi(x - h, y + h, t)
                + phi(x - h, y - h, t))
                / (4.0 * h * h);
            let pt = (phi(x, y, t + h) - phi(x, y, t - h)) / (2.0 * h);
            let k = self.params.k;
            let div_kgrad = k[0][0] * pxx + 2.0 * k[0][1] * pxy + k[1][1] * pyy;
            let r2 = self.params.s0 * pt - div_kgrad - self.f2(x, y, t);
            worst = worst.max(r2.abs());
        }
        worst
    }

    /// Max |∇·u| at random fluid points by centered differences.
    pub fn divergence_residual(&self, n_points: usize, fd_step: f64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = fd_step;
        let mut worst = 0.0f64;
        for _ in 0..n_points {
            let t = rng.random_range(0.0..1.0);
            let x = rng.random_range(self.domain.fluid.x0..self.domain.fluid.x1);
            let y = rng.random_range(self.domain.fluid.y0..self.domain.fluid.y1);
            let u1x = (self.velocity(x + h, y, t)[0] - self.velocity(x - h, y, t)[0]) / (2.0 * h);
            let u2y = (self.velocity(x, y + h, t)[1] - self.velocity(x, y - h, t)[1]) / (2.0 * h);
            worst = worst.max((u1x + u2y).abs());
        }
        worst
    }

    /// Analytic divergence of the exact velocity from the gradient closure.
    pub fn divergence_analytic(&self, x: f64, y: f64, t: f64) -> f64 {
        let g = self.velocity_grad(x, y, t);
        g[0][0] + g[1][1]
    }

    /// The variable-step stability test problem: Ω_f = [0,π]×[0,1] over
    /// Ω_p = [0,π]×[−1,0], all parameters 1, exponential-in-time fields.
    pub fn variable_step_test() -> Self {
        let e = |t: f64| t.exp();
        ManufacturedProblem {
            name: "varstep",
            domain: domains::variable_step_test(),
            params: PhysicalParams::unit(),
            scale: 1.0,
            velocity: Arc::new(move |x, y, t| {
                [
                    (1.0 / PI) * (2.0 * PI * y).sin() * x.cos() * e(t),
                    (-2.0 + (PI * y).sin().powi(2) / (PI * PI)) * x.sin() * e(t),
                ]
            }),
            velocity_t: Arc::new(move |x, y, t| {
                [
                    (1.0 / PI) * (2.0 * PI * y).sin() * x.cos() * e(t),
                    (-2.0 + (PI * y).sin().powi(2) / (PI * PI)) * x.sin() * e(t),
                ]
            }),
            velocity_grad: Arc::new(move |x, y, t| {
                [
                    [
                        -(1.0 / PI) * (2.0 * PI * y).sin() * x.sin() * e(t),
                        2.0 * (2.0 * PI * y).cos() * x.cos() * e(t),
                    ],
                    [
                        (-2.0 + (PI * y).sin().powi(2) / (PI * PI)) * x.cos() * e(t),
                        (1.0 / PI) * (2.0 * PI * y).sin() * x.sin() * e(t),
                    ],
                ]
            }),
            velocity_laplace: Arc::new(move |x, y, t| {
                [
                    -(1.0 / PI + 4.0 * PI) * (2.0 * PI * y).sin() * x.cos() * e(t),
                    (2.0 - (PI * y).sin().powi(2) / (PI * PI) + 2.0 * (2.0 * PI * y).cos())
                        * x.sin()
                        * e(t),
                ]
            }),
            pressure: Arc::new(|_, _, _| 0.0),
            pressure_grad: Arc::new(|_, _, _| [0.0, 0.0]),
            head: Arc::new(move |x, y, t| (y.exp() - (-y).exp()) * x.sin() * e(t)),
            head_t: Arc::new(move |x, y, t| (y.exp() - (-y).exp()) * x.sin() * e(t)),
            head_grad: Arc::new(move |x, y, t| {
                [
                    (y.exp() - (-y).exp()) * x.cos() * e(t),
                    (y.exp() + (-y).exp()) * x.sin() * e(t),
                ]
            }),
            head_hessian: Arc::new(move |x, y, t| {
                let s = (y.exp() - (-y).exp()) * x.sin() * e(t);
                [-s, (y.exp() + (-y).exp()) * x.cos() * e(t), s]
            }),
        }
    }

    /// The constant-step convergence test problem: Ω_f = (0,1)×(1,2) over
    /// Ω_p = (0,1)×(0,1), cosine-in-time fields. The exact velocity does not
    /// satisfy the homogeneous BJS condition under the stress form, so
    /// `bjs_gap` is nonzero and enters the load as natural interface data.
    pub fn convergence_test() -> Self {
        let c = |t: f64| t.cos();
        ManufacturedProblem {
            name: "convergence",
            domain: domains::convergence_test(),
            params: PhysicalParams::unit(),
            scale: 1.0,
            velocity: Arc::new(move |x, y, t| {
                [
                    (x * x * (y - 1.0).powi(2) + y) * c(t),
                    (-(2.0 / 3.0) * x * (y - 1.0).powi(3) + 2.0 - PI * (PI * x).sin()) * c(t),
                ]
            }),
            velocity_t: Arc::new(move |x, y, t| {
                let s = -t.sin();
                [
                    (x * x * (y - 1.0).powi(2) + y) * s,
                    (-(2.0 / 3.0) * x * (y - 1.0).powi(3) + 2.0 - PI * (PI * x).sin()) * s,
                ]
            }),
            velocity_grad: Arc::new(move |x, y, t| {
                [
                    [
                        2.0 * x * (y - 1.0).powi(2) * c(t),
                        (2.0 * x * x * (y - 1.0) + 1.0) * c(t),
                    ],
                    [
                        (-(2.0 / 3.0) * (y - 1.0).powi(3) - PI * PI * (PI * x).cos()) * c(t),
                        -2.0 * x * (y - 1.0).powi(2) * c(t),
                    ],
                ]
            }),
            velocity_laplace: Arc::new(move |x, y, t| {
                [
                    (2.0 * (y - 1.0).powi(2) + 2.0 * x * x) * c(t),
                    (PI.powi(3) * (PI * x).sin() - 4.0 * x * (y - 1.0)) * c(t),
                ]
            }),
            pressure: Arc::new(move |x, y, t| {
                (2.0 - PI * (PI * x).sin()) * (0.5 * PI * y).sin() * c(t)
            }),
            pressure_grad: Arc::new(move |x, y, t| {
                [
                    -PI * PI * (PI * x).cos() * (0.5 * PI * y).sin() * c(t),
                    (2.0 - PI * (PI * x).sin()) * 0.5 * PI * (0.5 * PI * y).cos() * c(t),
                ]
            }),
            head: Arc::new(move |x, y, t| {
                (2.0 - PI * (PI * x).sin()) * (1.0 - y - (PI * y).cos()) * c(t)
            }),
            head_t: Arc::new(move |x, y, t| {
                -(2.0 - PI * (PI * x).sin()) * (1.0 - y - (PI * y).cos()) * t.sin()
            }),
            head_grad: Arc::new(move |x, y, t| {
                [
                    -PI * PI * (PI * x).cos() * (1.0 - y - (PI * y).cos()) * c(t),
                    (2.0 - PI * (PI * x).sin()) * (-1.0 + PI * (PI * y).sin()) * c(t),
                ]
            }),
            head_hessian: Arc::new(move |x, y, t| {
                [
                    PI.powi(3) * (PI * x).sin() * (1.0 - y - (PI * y).cos()) * c(t),
                    -PI * PI * (PI * x).cos() * (-1.0 + PI * (PI * y).sin()) * c(t),
                    (2.0 - PI * (PI * x).sin()) * PI * PI * (PI * y).cos() * c(t),
                ]
            }),
        }
    }

    /// All-zero fields on the given domain: zero forcing, zero boundary and
    /// initial data.
    pub fn quiescent(domain: DomainSpec, params: PhysicalParams) -> Self {
        ManufacturedProblem {
            name: "quiescent",
            domain,
            params,
            scale: 1.0,
            velocity: Arc::new(|_, _, _| [0.0, 0.0]),
            velocity_t: Arc::new(|_, _, _| [0.0, 0.0]),
            velocity_grad: Arc::new(|_, _, _| [[0.0, 0.0], [0.0, 0.0]]),
            velocity_laplace: Arc::new(|_, _, _| [0.0, 0.0]),
            pressure: Arc::new(|_, _, _| 0.0),
            pressure_grad: Arc::new(|_, _, _| [0.0, 0.0]),
            head: Arc::new(|_, _, _| 0.0),
            head_t: Arc::new(|_, _, _| 0.0),
            head_grad: Arc::new(|_, _, _| [0.0, 0.0]),
            head_hessian: Arc::new(|_, _, _| [0.0, 0.0, 0.0]),
        }
    }
}

impl Clone for ManufacturedProblem {
    fn clone(&self) -> Self {
        ManufacturedProblem {
            name: self.name,
            domain: self.domain,
            params: self.params,
            scale: self.scale,
            velocity: self.velocity.clone(),
            velocity_t: self.velocity_t.clone(),
            velocity_grad: self.velocity_grad.clone(),
            velocity_laplace: self.velocity_laplace.clone(),
            pressure: self.pressure.clone(),
            pressure_grad: self.pressure_grad.clone(),
            head: self.head.clone(),
            head_t: self.head_t.clone(),
            head_grad: self.head_grad.clone(),
            head_hessian: self.head_hessian.clone(),
        }
    }
}
