//! Quadrature evaluation of per-field L2/H1 errors against exact fields, and
//! point evaluation of discrete fields for samples and comparisons.

use super::dof::{DofMap, ScalarSpace};
use super::element::physical_grad;
use super::quadrature::QuadratureRule;
use crate::mesh::TriMesh;

/// Which field of the coupled dof vector to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Velocity,
    Head,
    Pressure,
}

/// L2 and full H1 (L2 part included) errors of a scalar field.
#[allow(clippy::too_many_arguments)]
pub fn scalar_error_norms<F, G>(
    mesh: &TriMesh,
    dofs: &DofMap,
    space: &ScalarSpace,
    dof_of_node: impl Fn(usize) -> usize,
    flat: &[f64],
    exact: F,
    exact_grad: G,
    t: f64,
) -> (f64, f64)
where
    F: Fn(f64, f64, f64) -> f64,
    G: Fn(f64, f64, f64) -> [f64; 2],
{
    let rule = QuadratureRule::default_rule();
    let mut nodes = Vec::new();
    let mut vals = Vec::new();
    let mut coeffs = Vec::new();
    let mut l2 = 0.0;
    let mut h1_semi = 0.0;

    for tri in 0..mesh.triangles.len() {
        if mesh.region_of_triangle[tri] != space.region {
            continue;
        }
        space.local_nodes(mesh, &dofs.edges, tri, &mut nodes);
        let gl = mesh.grad_lambda(tri);
        let jac = 2.0 * mesh.signed_area(tri);
        for (q, lam) in rule.tri_points.iter().enumerate() {
            let w = rule.tri_weights[q] * jac;
            let p = mesh.point_at(tri, *lam);
            space.element.eval(*lam, &mut vals);
            space.element.eval_grad_coeffs(*lam, &mut coeffs);
            let mut uh = 0.0;
            let mut guh = [0.0, 0.0];
            for (i, &n) in nodes.iter().enumerate() {
                let c = flat[dof_of_node(n)];
                uh += c * vals[i];
                let g = physical_grad(&coeffs[i], &gl);
                guh[0] += c * g[0];
                guh[1] += c * g[1];
            }
            let e = uh - exact(p[0], p[1], t);
            let ge = exact_grad(p[0], p[1], t);
            let gx = guh[0] - ge[0];
            let gy = guh[1] - ge[1];
            l2 += w * e * e;
            h1_semi += w * (gx * gx + gy * gy);
        }
    }
    (l2.sqrt(), (l2 + h1_semi).sqrt())
}

/// L2 and full H1 errors of the velocity field.
pub fn velocity_error_norms<F, G>(
    mesh: &TriMesh,
    dofs: &DofMap,
    flat: &[f64],
    exact: F,
    exact_grad: G,
    t: f64,
) -> (f64, f64)
where
    F: Fn(f64, f64, f64) -> [f64; 2],
    G: Fn(f64, f64, f64) -> [[f64; 2]; 2],
{
    let rule = QuadratureRule::default_rule();
    let space = &dofs.velocity;
    let mut nodes = Vec::new();
    let mut vals = Vec::new();
    let mut coeffs = Vec::new();
    let mut l2 = 0.0;
    let mut h1_semi = 0.0;

    for tri in 0..mesh.triangles.len() {
        if mesh.region_of_triangle[tri] != space.region {
            continue;
        }
        space.local_nodes(mesh, &dofs.edges, tri, &mut nodes);
        let gl = mesh.grad_lambda(tri);
        let jac = 2.0 * mesh.signed_area(tri);
        for (q, lam) in rule.tri_points.iter().enumerate() {
            let w = rule.tri_weights[q] * jac;
            let p = mesh.point_at(tri, *lam);
            space.element.eval(*lam, &mut vals);
            space.element.eval_grad_coeffs(*lam, &mut coeffs);
            let mut uh = [0.0, 0.0];
            let mut guh = [[0.0, 0.0], [0.0, 0.0]];
            for (i, &n) in nodes.iter().enumerate() {
                let g = physical_grad(&coeffs[i], &gl);
                for comp in 0..2 {
                    let c = flat[dofs.vel_dof(n, comp)];
                    uh[comp] += c * vals[i];
                    guh[comp][0] += c * g[0];
                    guh[comp][1] += c * g[1];
                }
            }
            let ue = exact(p[0], p[1], t);
            let ge = exact_grad(p[0], p[1], t);
            for comp in 0..2 {
                let e = uh[comp] - ue[comp];
                l2 += w * e * e;
                for d in 0..2 {
                    let eg = guh[comp][d] - ge[comp][d];
                    h1_semi += w * eg * eg;
                }
            }
        }
    }
    (l2.sqrt(), (l2 + h1_semi).sqrt())
}

/// Per-field errors (velocity L2/H1, head L2/H1, pressure L2) used by the
/// convergence tables.
pub struct FieldErrors {
    pub u_l2: f64,
    pub u_h1: f64,
    pub phi_l2: f64,
    pub phi_h1: f64,
    pub p_l2: f64,
}

/// Evaluates a scalar field of the coupled vector at a point.
pub fn evaluate_scalar(
    mesh: &TriMesh,
    dofs: &DofMap,
    field: Field,
    flat: &[f64],
    p: [f64; 2],
) -> Option<f64> {
    let space = match field {
        Field::Velocity => &dofs.velocity,
        Field::Head => &dofs.head,
        Field::Pressure => &dofs.pressure,
    };
    let (tri, lam) = locate_in_region(mesh, space, p)?;
    let mut nodes = Vec::new();
    let mut vals = Vec::new();
    space.local_nodes(mesh, &dofs.edges, tri, &mut nodes);
    space.element.eval(lam, &mut vals);
    let dof_of = |n: usize| match field {
        Field::Velocity => dofs.vel_dof(n, 0),
        Field::Head => dofs.head_dof(n),
        Field::Pressure => dofs.pressure_dof(n),
    };
    Some(
        nodes
            .iter()
            .enumerate()
            .map(|(i, &n)| flat[dof_of(n)] * vals[i])
            .sum(),
    )
}

/// Evaluates the velocity vector at a point in the fluid region.
pub fn evaluate_velocity(
    mesh: &TriMesh,
    dofs: &DofMap,
    flat: &[f64],
    p: [f64; 2],
) -> Option<[f64; 2]> {
    let (tri, lam) = locate_in_region(mesh, &dofs.velocity, p)?;
    let mut nodes = Vec::new();
    let mut vals = Vec::new();
    dofs.velocity.local_nodes(mesh, &dofs.edges, tri, &mut nodes);
    dofs.velocity.element.eval(lam, &mut vals);
    let mut u = [0.0, 0.0];
    for (i, &n) in nodes.iter().enumerate() {
        for comp in 0..2 {
            u[comp] += flat[dofs.vel_dof(n, comp)] * vals[i];
        }
    }
    Some(u)
}

fn locate_in_region(
    mesh: &TriMesh,
    space: &ScalarSpace,
    p: [f64; 2],
) -> Option<(usize, [f64; 3])> {
    let (tri, lam) = mesh.locate(p)?;
    if mesh.region_of_triangle[tri] != space.region {
        return None;
    }
    Some((tri, lam))
}
