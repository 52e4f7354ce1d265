//! Assembly of every bilinear and linear form of the coupled weak
//! formulation, on the full coupled dof space (no boundary elimination here;
//! the stepping layer imposes essential conditions on the stage system).

use super::dof::DofMap;
use super::element::physical_grad;
use super::quadrature::QuadratureRule;
use super::FemError;
use crate::mesh::{BoundaryTag, Region, TriMesh};
use crate::sparse::Csr;

/// Fluid outward unit normal and unit tangent of an interface edge. The
/// porous region lies below the fluid region, so for the stored orientation
/// (increasing x) the fluid outward normal points in −y.
fn interface_frame(mesh: &TriMesh, v0: usize, v1: usize) -> ([f64; 2], [f64; 2], f64) {
    let a = mesh.vertices[v0];
    let b = mesh.vertices[v1];
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    let len = (dx * dx + dy * dy).sqrt();
    let tau = [dx / len, dy / len];
    let normal = [tau[1], -tau[0]];
    (normal, tau, len)
}

/// Block-diagonal mass matrix of the ⟨·,·⟩₀ product: `w_fluid` times the
/// velocity block plus `w_porous` (= g·S₀) times the head block.
pub fn assemble_mass(mesh: &TriMesh, dofs: &DofMap, w_fluid: f64, w_porous: f64) -> Csr {
    let rule = QuadratureRule::default_rule();
    let mut triplets = Vec::new();
    let mut nodes = Vec::new();
    let mut vals = Vec::new();

    for t in 0..mesh.triangles.len() {
        let area = mesh.signed_area(t);
        let jac = 2.0 * area;
        match mesh.region_of_triangle[t] {
            Region::Fluid => {
                let space = &dofs.velocity;
                space.local_nodes(mesh, &dofs.edges, t, &mut nodes);
                let nn = nodes.len();
                let mut local = vec![0.0; nn * nn];
                for (q, lam) in rule.tri_points.iter().enumerate() {
                    let w = rule.tri_weights[q] * jac;
                    space.element.eval(*lam, &mut vals);
                    for i in 0..nn {
                        for j in 0..nn {
                            local[i * nn + j] += w * vals[i] * vals[j];
                        }
                    }
                }
                for i in 0..nn {
                    for j in 0..nn {
                        let m = w_fluid * local[i * nn + j];
                        for comp in 0..2 {
                            triplets.push((
                                dofs.vel_dof(nodes[i], comp),
                                dofs.vel_dof(nodes[j], comp),
                                m,
                            ));
                        }
                    }
                }
            }
            Region::Porous => {
                let space = &dofs.head;
                space.local_nodes(mesh, &dofs.edges, t, &mut nodes);
                let nn = nodes.len();
                for (q, lam) in rule.tri_points.iter().enumerate() {
                    let w = rule.tri_weights[q] * jac;
                    space.element.eval(*lam, &mut vals);
                    for i in 0..nn {
                        for j in 0..nn {
                            triplets.push((
                                dofs.head_dof(nodes[i]),
                                dofs.head_dof(nodes[j]),
                                w_porous * w * vals[i] * vals[j],
                            ));
                        }
                    }
                }
            }
        }
    }
    Csr::from_triplets(dofs.n_total, dofs.n_total, &triplets)
}

/// Viscous block `nu (D(u), D(v))` over the fluid region, with
/// D(u) = (∇u + ∇uᵀ)/2.
pub fn assemble_stokes_viscous(mesh: &TriMesh, dofs: &DofMap, nu: f64) -> Csr {
    let rule = QuadratureRule::default_rule();
    let mut triplets = Vec::new();
    let mut nodes = Vec::new();
    let mut coeffs = Vec::new();

    for t in 0..mesh.triangles.len() {
        if mesh.region_of_triangle[t] != Region::Fluid {
            continue;
        }
        let space = &dofs.velocity;
        space.local_nodes(mesh, &dofs.edges, t, &mut nodes);
        let nn = nodes.len();
        let gl = mesh.grad_lambda(t);
        let jac = 2.0 * mesh.signed_area(t);
        let mut grads = vec![[0.0f64; 2]; nn];
        // local[(i,alpha),(j,beta)]
        let mut local = vec![0.0; 4 * nn * nn];
        for (q, lam) in rule.tri_points.iter().enumerate() {
            let w = rule.tri_weights[q] * jac;
            space.element.eval_grad_coeffs(*lam, &mut coeffs);
            for i in 0..nn {
                grads[i] = physical_grad(&coeffs[i], &gl);
            }
            for i in 0..nn {
                for j in 0..nn {
                    let dot = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1];
                    for alpha in 0..2 {
                        for beta in 0..2 {
                            // D(phi_i e_alpha) : D(phi_j e_beta)
                            let same = if alpha == beta { dot } else { 0.0 };
                            let cross = grads[i][beta] * grads[j][alpha];
                            local[((i * 2 + alpha) * 2 + beta) * nn + j] +=
                                w * nu * 0.5 * (same + cross);
                        }
                    }
                }
            }
        }
        for i in 0..nn {
            for alpha in 0..2 {
                for j in 0..nn {
                    for beta in 0..2 {
                        triplets.push((
                            dofs.vel_dof(nodes[i], alpha),
                            dofs.vel_dof(nodes[j], beta),
                            local[((i * 2 + alpha) * 2 + beta) * nn + j],
                        ));
                    }
                }
            }
        }
    }
    Csr::from_triplets(dofs.n_total, dofs.n_total, &triplets)
}

/// Gradient form `nu (∇u, ∇v)` over the fluid region; the velocity part of
/// the ‖·‖_U norm.
pub fn assemble_velocity_gradient(mesh: &TriMesh, dofs: &DofMap, nu: f64) -> Csr {
    let rule = QuadratureRule::default_rule();
    let mut triplets = Vec::new();
    let mut nodes = Vec::new();
    let mut coeffs = Vec::new();

    for t in 0..mesh.triangles.len() {
        if mesh.region_of_triangle[t] != Region::Fluid {
            continue;
        }
        let space = &dofs.velocity;
        space.local_nodes(mesh, &dofs.edges, t, &mut nodes);
        let nn = nodes.len();
        let gl = mesh.grad_lambda(t);
        let jac = 2.0 * mesh.signed_area(t);
        let mut grads = vec![[0.0f64; 2]; nn];
        for (q, lam) in rule.tri_points.iter().enumerate() {
            let w = rule.tri_weights[q] * jac;
            space.element.eval_grad_coeffs(*lam, &mut coeffs);
            for i in 0..nn {
                grads[i] = physical_grad(&coeffs[i], &gl);
            }
            for i in 0..nn {
                for j in 0..nn {
                    let dot = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1];
                    for comp in 0..2 {
                        triplets.push((
                            dofs.vel_dof(nodes[i], comp),
                            dofs.vel_dof(nodes[j], comp),
                            nu * w * dot,
                        ));
                    }
                }
            }
        }
    }
    Csr::from_triplets(dofs.n_total, dofs.n_total, &triplets)
}

/// Beavers-Joseph-Saffman slip term `coeff (P_τ u, v)_Γ` on interface edges,
/// acting on the tangential velocity trace from the fluid side.
pub fn assemble_bjs(mesh: &TriMesh, dofs: &DofMap, coeff: f64) -> Csr {
    let rule = QuadratureRule::default_rule();
    let mut triplets = Vec::new();
    let mut nodes = Vec::new();
    let mut vals = Vec::new();

    for e in &mesh.boundary_edges {
        if e.tag != BoundaryTag::Interface {
            continue;
        }
        let (normal, _tau, len) = interface_frame(mesh, e.v[0], e.v[1]);
        let (t, la, lb) = mesh
            .region_triangle_of_edge(e.v[0], e.v[1], Region::Fluid)
            .expect("interface edge without fluid triangle");
        dofs.velocity.local_nodes(mesh, &dofs.edges, t, &mut nodes);
        for (q, s) in rule.edge_points.iter().enumerate() {
            let w = rule.edge_weights[q] * len;
            let mut lam = [0.0; 3];
            lam[la] = 1.0 - s;
            lam[lb] = *s;
            dofs.velocity.element.eval(lam, &mut vals);
            for (i, &ni) in nodes.iter().enumerate() {
                if vals[i] == 0.0 {
                    continue;
                }
                for (j, &nj) in nodes.iter().enumerate() {
                    if vals[j] == 0.0 {
                        continue;
                    }
                    for alpha in 0..2 {
                        for beta in 0..2 {
                            // P_tau(u) . v = u.v - (u.n)(v.n)
                            let delta = if alpha == beta { 1.0 } else { 0.0 };
                            let m = delta - normal[alpha] * normal[beta];
                            if m == 0.0 {
                                continue;
                            }
                            triplets.push((
                                dofs.vel_dof(ni, alpha),
                                dofs.vel_dof(nj, beta),
                                coeff * w * vals[i] * vals[j] * m,
                            ));
                        }
                    }
                }
            }
        }
    }
    Csr::from_triplets(dofs.n_total, dofs.n_total, &triplets)
}

/// Darcy block `g (K ∇φ, ∇ψ)` over the porous region. `K` must be SPD.
pub fn assemble_darcy(
    mesh: &TriMesh,
    dofs: &DofMap,
    g: f64,
    k: [[f64; 2]; 2],
) -> Result<Csr, FemError> {
    if (k[0][1] - k[1][0]).abs() > 1e-12 * (k[0][0].abs() + k[1][1].abs()) {
        return Err(FemError::NotSpd("conductivity tensor is not symmetric"));
    }
    if k[0][0] <= 0.0 || k[0][0] * k[1][1] - k[0][1] * k[1][0] <= 0.0 {
        return Err(FemError::NotSpd("conductivity tensor is not positive definite"));
    }
    let rule = QuadratureRule::default_rule();
    let mut triplets = Vec::new();
    let mut nodes = Vec::new();
    let mut coeffs = Vec::new();

    for t in 0..mesh.triangles.len() {
        if mesh.region_of_triangle[t] != Region::Porous {
            continue;
        }
        let space = &dofs.head;
        space.local_nodes(mesh, &dofs.edges, t, &mut nodes);
        let nn = nodes.len();
        let gl = mesh.grad_lambda(t);
        let jac = 2.0 * mesh.signed_area(t);
        let mut grads = vec![[0.0f64; 2]; nn];
        for (q, lam) in rule.tri_points.iter().enumerate() {
            let w = rule.tri_weights[q] * jac;
            space.element.eval_grad_coeffs(*lam, &mut coeffs);
            for i in 0..nn {
                grads[i] = physical_grad(&coeffs[i], &gl);
            }
            for i in 0..nn {
                let kg = [
                    k[0][0] * grads[i][0] + k[0][1] * grads[i][1],
                    k[1][0] * grads[i][0] + k[1][1] * grads[i][1],
                ];
                for j in 0..nn {
                    triplets.push((
                        dofs.head_dof(nodes[i]),
                        dofs.head_dof(nodes[j]),
                        g * w * (kg[0] * grads[j][0] + kg[1] * grads[j][1]),
                    ));
                }
            }
        }
    }
    Ok(Csr::from_triplets(dofs.n_total, dofs.n_total, &triplets))
}

/// Skew interface coupling `g (φ, v·n)_Γ − g (ψ, u·n)_Γ` with n the fluid
/// outward normal; contributes exactly zero to the quadratic form.
pub fn assemble_interface_coupling(mesh: &TriMesh, dofs: &DofMap, g: f64) -> Csr {
    let rule = QuadratureRule::default_rule();
    let mut triplets = Vec::new();
    let mut vel_nodes = Vec::new();
    let mut head_nodes = Vec::new();
    let mut vel_vals = Vec::new();
    let mut head_vals = Vec::new();

    for e in &mesh.boundary_edges {
        if e.tag != BoundaryTag::Interface {
            continue;
        }
        let (normal, _tau, len) = interface_frame(mesh, e.v[0], e.v[1]);
        let (tf, fla, flb) = mesh
            .region_triangle_of_edge(e.v[0], e.v[1], Region::Fluid)
            .expect("interface edge without fluid triangle");
        let (tp, pla, plb) = mesh
            .region_triangle_of_edge(e.v[0], e.v[1], Region::Porous)
            .expect("interface edge without porous triangle");
        dofs.velocity.local_nodes(mesh, &dofs.edges, tf, &mut vel_nodes);
        dofs.head.local_nodes(mesh, &dofs.edges, tp, &mut head_nodes);
        for (q, s) in rule.edge_points.iter().enumerate() {
            let w = rule.edge_weights[q] * len;
            let mut lamf = [0.0; 3];
            lamf[fla] = 1.0 - s;
            lamf[flb] = *s;
            dofs.velocity.element.eval(lamf, &mut vel_vals);
            let mut lamp = [0.0; 3];
            lamp[pla] = 1.0 - s;
            lamp[plb] = *s;
            dofs.head.element.eval(lamp, &mut head_vals);
            for (i, &vn) in vel_nodes.iter().enumerate() {
                if vel_vals[i] == 0.0 {
                    continue;
                }
                for (c, &hn) in head_nodes.iter().enumerate() {
                    if head_vals[c] == 0.0 {
                        continue;
                    }
                    for alpha in 0..2 {
                        if normal[alpha] == 0.0 {
                            continue;
                        }
                        let val = g * w * vel_vals[i] * head_vals[c] * normal[alpha];
                        triplets.push((dofs.vel_dof(vn, alpha), dofs.head_dof(hn), val));
                        triplets.push((dofs.head_dof(hn), dofs.vel_dof(vn, alpha), -val));
                    }
                }
            }
        }
    }
    Csr::from_triplets(dofs.n_total, dofs.n_total, &triplets)
}

/// Divergence constraint `b(v, q) = −(q, ∇·v)`: rows at pressure dofs,
/// columns at velocity dofs.
pub fn assemble_divergence(mesh: &TriMesh, dofs: &DofMap) -> Csr {
    let rule = QuadratureRule::default_rule();
    let mut triplets = Vec::new();
    let mut vel_nodes = Vec::new();
    let mut p_nodes = Vec::new();
    let mut coeffs = Vec::new();
    let mut p_vals = Vec::new();

    for t in 0..mesh.triangles.len() {
        if mesh.region_of_triangle[t] != Region::Fluid {
            continue;
        }
        dofs.velocity.local_nodes(mesh, &dofs.edges, t, &mut vel_nodes);
        dofs.pressure.local_nodes(mesh, &dofs.edges, t, &mut p_nodes);
        let gl = mesh.grad_lambda(t);
        let jac = 2.0 * mesh.signed_area(t);
        let mut grads = vec![[0.0f64; 2]; vel_nodes.len()];
        for (q, lam) in rule.tri_points.iter().enumerate() {
            let w = rule.tri_weights[q] * jac;
            dofs.velocity.element.eval_grad_coeffs(*lam, &mut coeffs);
            for i in 0..vel_nodes.len() {
                grads[i] = physical_grad(&coeffs[i], &gl);
            }
            dofs.pressure.element.eval(*lam, &mut p_vals);
            for (c, &pn) in p_nodes.iter().enumerate() {
                for (i, &vn) in vel_nodes.iter().enumerate() {
                    for alpha in 0..2 {
                        // -(q, d_alpha phi_i)
                        triplets.push((
                            dofs.pressure_dof(pn),
                            dofs.vel_dof(vn, alpha),
                            -w * p_vals[c] * grads[i][alpha],
                        ));
                    }
                }
            }
        }
    }
    Csr::from_triplets(dofs.n_total, dofs.n_total, &triplets)
}

/// Volume load `(F₁, v)_{Ω_f} + g (F₂, ψ)_{Ω_p}` at time `t`; essential
/// entries are zeroed.
pub fn assemble_load<F1, F2>(
    mesh: &TriMesh,
    dofs: &DofMap,
    t: f64,
    f1: F1,
    f2: F2,
    g: f64,
) -> Vec<f64>
where
    F1: Fn(f64, f64, f64) -> [f64; 2],
    F2: Fn(f64, f64, f64) -> f64,
{
    let rule = QuadratureRule::default_rule();
    let mut load = vec![0.0; dofs.n_total];
    let mut nodes = Vec::new();
    let mut vals = Vec::new();

    for tri in 0..mesh.triangles.len() {
        let jac = 2.0 * mesh.signed_area(tri);
        match mesh.region_of_triangle[tri] {
            Region::Fluid => {
                dofs.velocity.local_nodes(mesh, &dofs.edges, tri, &mut nodes);
                for (q, lam) in rule.tri_points.iter().enumerate() {
                    let w = rule.tri_weights[q] * jac;
                    let p = mesh.point_at(tri, *lam);
                    let f = f1(p[0], p[1], t);
                    dofs.velocity.element.eval(*lam, &mut vals);
                    for (i, &n) in nodes.iter().enumerate() {
                        for alpha in 0..2 {
                            load[dofs.vel_dof(n, alpha)] += w * f[alpha] * vals[i];
                        }
                    }
                }
            }
            Region::Porous => {
                dofs.head.local_nodes(mesh, &dofs.edges, tri, &mut nodes);
                for (q, lam) in rule.tri_points.iter().enumerate() {
                    let w = rule.tri_weights[q] * jac;
                    let p = mesh.point_at(tri, *lam);
                    let f = f2(p[0], p[1], t);
                    dofs.head.element.eval(*lam, &mut vals);
                    for (i, &n) in nodes.iter().enumerate() {
                        load[dofs.head_dof(n)] += g * w * f * vals[i];
                    }
                }
            }
        }
    }
    for (i, e) in dofs.essential.iter().enumerate() {
        if *e {
            load[i] = 0.0;
        }
    }
    load
}

/// Natural interface data derived from a manufactured solution: adds
/// `−∫_Γ (g_n (v·n) + g_τ (v·τ)) ds` to the velocity rows and
/// `−g ∫_Γ g_m ψ ds` to the head rows.
pub fn assemble_interface_load<Gn, Gt, Gm>(
    mesh: &TriMesh,
    dofs: &DofMap,
    t: f64,
    g_normal: Gn,
    g_tangential: Gt,
    g_mass: Gm,
    g: f64,
    load: &mut [f64],
) where
    Gn: Fn(f64, f64, f64) -> f64,
    Gt: Fn(f64, f64, f64) -> f64,
    Gm: Fn(f64, f64, f64) -> f64,
{
    let rule = QuadratureRule::default_rule();
    let mut vel_nodes = Vec::new();
    let mut head_nodes = Vec::new();
    let mut vals = Vec::new();

    for e in &mesh.boundary_edges {
        if e.tag != BoundaryTag::Interface {
            continue;
        }
        let (normal, tau, len) = interface_frame(mesh, e.v[0], e.v[1]);
        let (tf, fla, flb) = mesh
            .region_triangle_of_edge(e.v[0], e.v[1], Region::Fluid)
            .expect("interface edge without fluid triangle");
        let (tp, pla, plb) = mesh
            .region_triangle_of_edge(e.v[0], e.v[1], Region::Porous)
            .expect("interface edge without porous triangle");
        let a = mesh.vertices[e.v[0]];
        let b = mesh.vertices[e.v[1]];
        for (q, s) in rule.edge_points.iter().enumerate() {
            let w = rule.edge_weights[q] * len;
            let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            let gn = g_normal(p[0], p[1], t);
            let gt = g_tangential(p[0], p[1], t);
            let gm = g_mass(p[0], p[1], t);

            dofs.velocity.local_nodes(mesh, &dofs.edges, tf, &mut vel_nodes);
            let mut lam = [0.0; 3];
            lam[fla] = 1.0 - s;
            lam[flb] = *s;
            dofs.velocity.element.eval(lam, &mut vals);
            for (i, &n) in vel_nodes.iter().enumerate() {
                if vals[i] == 0.0 {
                    continue;
                }
                for alpha in 0..2 {
                    load[dofs.vel_dof(n, alpha)] -=
                        w * vals[i] * (gn * normal[alpha] + gt * tau[alpha]);
                }
            }

            dofs.head.local_nodes(mesh, &dofs.edges, tp, &mut head_nodes);
            let mut lam = [0.0; 3];
            lam[pla] = 1.0 - s;
            lam[plb] = *s;
            dofs.head.element.eval(lam, &mut vals);
            for (c, &n) in head_nodes.iter().enumerate() {
                if vals[c] == 0.0 {
                    continue;
                }
                load[dofs.head_dof(n)] -= g * w * vals[c] * gm;
            }
        }
    }
    for (i, e) in dofs.essential.iter().enumerate() {
        if *e {
            load[i] = 0.0;
        }
    }
}
