//! Structured conforming triangulations of two stacked rectangles (fluid
//! above, porous below) sharing a horizontal interface, with tagged outer
//! boundaries and matched interface edges.
//!
//! Meshes are deterministic: every cell of the tensor grid is split by its
//! lower-left to upper-right diagonal, so reruns are bit-for-bit identical
//! and refinement by doubling the division count exactly halves `h`.

use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("degenerate rectangle: {0}")]
    DegenerateRectangle(String),
    #[error("subdomains do not stack on a shared horizontal edge: {0}")]
    BadStacking(String),
    #[error("need at least 2 divisions, got {0}")]
    TooFewDivisions(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Fluid,
    Porous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    FluidOuter,
    PorousOuter,
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }
    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// The two stacked subdomains. The porous rectangle lies below the fluid
/// one and both span the same x-range; the shared edge is the interface Γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub fluid: Rect,
    pub porous: Rect,
}

impl DomainSpec {
    pub fn new(fluid: Rect, porous: Rect) -> Result<Self, MeshError> {
        for (name, r) in [("fluid", &fluid), ("porous", &porous)] {
            if !(r.width() > 0.0) || !(r.height() > 0.0) {
                return Err(MeshError::DegenerateRectangle(format!(
                    "{name} rectangle has nonpositive extent"
                )));
            }
        }
        if (fluid.y0 - porous.y1).abs() > 1e-14 * fluid.height().max(porous.height()) {
            return Err(MeshError::BadStacking(format!(
                "fluid bottom {} != porous top {}",
                fluid.y0, porous.y1
            )));
        }
        if (fluid.x0 - porous.x0).abs() > 1e-14 || (fluid.x1 - porous.x1).abs() > 1e-14 {
            return Err(MeshError::BadStacking(
                "subdomains must span the same x-range".into(),
            ));
        }
        Ok(DomainSpec { fluid, porous })
    }

    pub fn interface_y(&self) -> f64 {
        self.fluid.y0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    /// Vertex pair, oriented along increasing x (horizontal edges) or
    /// increasing y (vertical edges).
    pub v: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counter-clockwise vertex index triples.
    pub triangles: Vec<[usize; 3]>,
    pub region_of_triangle: Vec<Region>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Grid divisions actually used: (nx, ny_fluid, ny_porous).
    pub divisions: (usize, usize, usize),
    pub spec: DomainSpec,
    edge_to_tris: HashMap<(usize, usize), Vec<usize>>,
}

/// Builds the coupled mesh with `n` divisions along the longest rectangle
/// side; the other directions are divided proportionally (rounded) so cells
/// stay close to square.
pub fn build_coupled_mesh(spec: &DomainSpec, n: usize) -> Result<TriMesh, MeshError> {
    if n < 2 {
        return Err(MeshError::TooFewDivisions(n));
    }
    let w = spec.fluid.width();
    let hf = spec.fluid.height();
    let hp = spec.porous.height();
    let longest = w.max(hf).max(hp);
    let divisions = |len: f64| -> usize { ((n as f64) * len / longest).round().max(1.0) as usize };
    let nx = divisions(w).max(2);
    let ny_f = divisions(hf);
    let ny_p = divisions(hp);

    let x0 = spec.fluid.x0;
    let y_int = spec.interface_y();
    let dx = w / nx as f64;
    let dy_f = hf / ny_f as f64;
    let dy_p = hp / ny_p as f64;

    // Vertices: porous rows bottom-up (0..=ny_p, row ny_p is the interface),
    // then fluid rows above the interface (1..=ny_f).
    let n_cols = nx + 1;
    let mut vertices = Vec::with_capacity(n_cols * (ny_p + ny_f + 1));
    for j in 0..=ny_p {
        let y = spec.porous.y0 + j as f64 * dy_p;
        let y = if j == ny_p { y_int } else { y };
        for i in 0..=nx {
            vertices.push([x0 + i as f64 * dx, y]);
        }
    }
    for j in 1..=ny_f {
        let y = y_int + j as f64 * dy_f;
        for i in 0..=nx {
            vertices.push([x0 + i as f64 * dx, y]);
        }
    }
    let porous_vertex = |i: usize, j: usize| j * n_cols + i;
    let fluid_vertex = |i: usize, j: usize| {
        if j == 0 {
            porous_vertex(i, ny_p)
        } else {
            (ny_p + 1) * n_cols + (j - 1) * n_cols + i
        }
    };

    let mut triangles = Vec::with_capacity(2 * nx * (ny_p + ny_f));
    let mut region_of_triangle = Vec::with_capacity(2 * nx * (ny_p + ny_f));
    let mut push_cell = |a: usize, b: usize, c: usize, d: usize, region: Region| {
        // cell corners a,b,c,d counter-clockwise from lower-left; diagonal a-c
        triangles.push([a, b, c]);
        triangles.push([a, c, d]);
        region_of_triangle.push(region);
        region_of_triangle.push(region);
    };
    for j in 0..ny_p {
        for i in 0..nx {
            push_cell(
                porous_vertex(i, j),
                porous_vertex(i + 1, j),
                porous_vertex(i + 1, j + 1),
                porous_vertex(i, j + 1),
                Region::Porous,
            );
        }
    }
    for j in 0..ny_f {
        for i in 0..nx {
            push_cell(
                fluid_vertex(i, j),
                fluid_vertex(i + 1, j),
                fluid_vertex(i + 1, j + 1),
                fluid_vertex(i, j + 1),
                Region::Fluid,
            );
        }
    }

    let mut boundary_edges = Vec::new();
    for i in 0..nx {
        boundary_edges.push(BoundaryEdge {
            v: [porous_vertex(i, 0), porous_vertex(i + 1, 0)],
            tag: BoundaryTag::PorousOuter,
        });
        boundary_edges.push(BoundaryEdge {
            v: [fluid_vertex(i, ny_f), fluid_vertex(i + 1, ny_f)],
            tag: BoundaryTag::FluidOuter,
        });
        boundary_edges.push(BoundaryEdge {
            v: [porous_vertex(i, ny_p), porous_vertex(i + 1, ny_p)],
            tag: BoundaryTag::Interface,
        });
    }
    for j in 0..ny_p {
        for i in [0, nx] {
            boundary_edges.push(BoundaryEdge {
                v: [porous_vertex(i, j), porous_vertex(i, j + 1)],
                tag: BoundaryTag::PorousOuter,
            });
        }
    }
    for j in 0..ny_f {
        for i in [0, nx] {
            boundary_edges.push(BoundaryEdge {
                v: [fluid_vertex(i, j), fluid_vertex(i, j + 1)],
                tag: BoundaryTag::FluidOuter,
            });
        }
    }

    let mut edge_to_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let key = edge_key(tri[k], tri[(k + 1) % 3]);
            edge_to_tris.entry(key).or_default().push(t);
        }
    }

    Ok(TriMesh {
        vertices,
        triangles,
        region_of_triangle,
        boundary_edges,
        divisions: (nx, ny_f, ny_p),
        spec: *spec,
        edge_to_tris,
    })
}

pub fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStatistics {
    pub h_max: f64,
    pub triangle_count: usize,
    pub vertex_count: usize,
    pub interface_edge_count: usize,
}

pub fn mesh_statistics(mesh: &TriMesh) -> MeshStatistics {
    let mut h_max = 0.0f64;
    for tri in &mesh.triangles {
        for k in 0..3 {
            let a = mesh.vertices[tri[k]];
            let b = mesh.vertices[tri[(k + 1) % 3]];
            h_max = h_max.max(((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt());
        }
    }
    MeshStatistics {
        h_max,
        triangle_count: mesh.triangles.len(),
        vertex_count: mesh.vertices.len(),
        interface_edge_count: mesh
            .boundary_edges
            .iter()
            .filter(|e| e.tag == BoundaryTag::Interface)
            .count(),
    }
}

impl TriMesh {
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
    }

    /// Constant barycentric gradients ∇λ₀, ∇λ₁, ∇λ₂ on triangle `t`.
    pub fn grad_lambda(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        let inv2a = 1.0 / (2.0 * self.signed_area(t));
        [
            [(q[1] - r[1]) * inv2a, (r[0] - q[0]) * inv2a],
            [(r[1] - p[1]) * inv2a, (p[0] - r[0]) * inv2a],
            [(p[1] - q[1]) * inv2a, (q[0] - p[0]) * inv2a],
        ]
    }

    /// Physical coordinates of the barycentric point `lam` in triangle `t`.
    pub fn point_at(&self, t: usize, lam: [f64; 3]) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [
            lam[0] * p[0] + lam[1] * q[0] + lam[2] * r[0],
            lam[0] * p[1] + lam[1] * q[1] + lam[2] * r[1],
        ]
    }

    /// Triangles adjacent to the (undirected) edge `a-b`.
    pub fn tris_of_edge(&self, a: usize, b: usize) -> &[usize] {
        self.edge_to_tris
            .get(&edge_key(a, b))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// The adjacent triangle of edge `a-b` lying in `region`, with the local
    /// indices of `a` and `b` inside that triangle.
    pub fn region_triangle_of_edge(
        &self,
        a: usize,
        b: usize,
        region: Region,
    ) -> Option<(usize, usize, usize)> {
        for &t in self.tris_of_edge(a, b) {
            if self.region_of_triangle[t] == region {
                let tri = self.triangles[t];
                let la = tri.iter().position(|&v| v == a)?;
                let lb = tri.iter().position(|&v| v == b)?;
                return Some((t, la, lb));
            }
        }
        None
    }

    /// Locates the triangle holding `p` (clamped to the closure of the
    /// domain) together with its barycentric coordinates, exploiting the
    /// structured cell layout.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let (nx, ny_f, ny_p) = self.divisions;
        let y_int = self.spec.interface_y();
        let in_porous = p[1] <= y_int;
        let (rect, ny, row_offset) = if in_porous {
            (self.spec.porous, ny_p, 0)
        } else {
            (self.spec.fluid, ny_f, ny_p)
        };
        if p[0] < rect.x0 - 1e-12 || p[0] > rect.x1 + 1e-12 {
            return None;
        }
        if p[1] < self.spec.porous.y0 - 1e-12 || p[1] > self.spec.fluid.y1 + 1e-12 {
            return None;
        }
        let dx = rect.width() / nx as f64;
        let dy = rect.height() / ny as f64;
        let fx = ((p[0] - rect.x0) / dx).clamp(0.0, nx as f64 - 1e-12);
        let fy = ((p[1] - rect.y0) / dy).clamp(0.0, ny as f64 - 1e-12);
        let i = fx.floor() as usize;
        let j = fy.floor() as usize;
        let xi = fx - i as f64;
        let eta = fy - j as f64;
        // cells are split by the lower-left/upper-right diagonal; triangles
        // are stored in cell order, lower triangle (a,b,c) first
        let cell = (row_offset + j) * nx + i;
        if eta <= xi {
            Some((2 * cell, [1.0 - xi, xi - eta, eta]))
        } else {
            Some((2 * cell + 1, [1.0 - eta, xi, eta - xi]))
        }
    }

    pub fn region_area(&self, region: Region) -> f64 {
        (0..self.triangles.len())
            .filter(|&t| self.region_of_triangle[t] == region)
            .map(|t| self.signed_area(t))
            .sum()
    }

    /// Structural invariant checks used by tests: positive areas, conforming
    /// edges, correctly tagged boundary/interface tiling.
    pub fn validate(&self) -> Result<(), String> {
        for t in 0..self.triangles.len() {
            if self.signed_area(t) <= 0.0 {
                return Err(format!("triangle {t} has nonpositive area"));
            }
        }
        for (key, tris) in &self.edge_to_tris {
            match tris.len() {
                1 => {
                    let tagged = self
                        .boundary_edges
                        .iter()
                        .any(|e| edge_key(e.v[0], e.v[1]) == *key);
                    if !tagged {
                        return Err(format!("untagged boundary edge {key:?}"));
                    }
                }
                2 => {}
                n => return Err(format!("edge {key:?} shared by {n} triangles")),
            }
        }
        for e in &self.boundary_edges {
            let tris = self.tris_of_edge(e.v[0], e.v[1]);
            match e.tag {
                BoundaryTag::Interface => {
                    if tris.len() != 2 {
                        return Err(format!("interface edge {:?} not shared by 2 tris", e.v));
                    }
                    let mut has = (false, false);
                    for &t in tris {
                        match self.region_of_triangle[t] {
                            Region::Fluid => has.0 = true,
                            Region::Porous => has.1 = true,
                        }
                    }
                    if !(has.0 && has.1) {
                        return Err(format!(
                            "interface edge {:?} must join fluid and porous",
                            e.v
                        ));
                    }
                }
                BoundaryTag::FluidOuter | BoundaryTag::PorousOuter => {
                    if tris.len() != 1 {
                        return Err(format!("outer edge {:?} shared by {} tris", e.v, tris.len()));
                    }
                    let want = if e.tag == BoundaryTag::FluidOuter {
                        Region::Fluid
                    } else {
                        Region::Porous
                    };
                    if self.region_of_triangle[tris[0]] != want {
                        return Err(format!("edge {:?} tagged for wrong region", e.v));
                    }
                }
            }
        }
        Ok(())
    }

    /// Plain text export: vertex list, triangle list with region tags, tagged
    /// boundary edges.
    pub fn write_text<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "vertices {}", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(w, "{:.17e} {:.17e}", v[0], v[1])?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for (tri, reg) in self.triangles.iter().zip(&self.region_of_triangle) {
            let tag = match reg {
                Region::Fluid => "fluid",
                Region::Porous => "porous",
            };
            writeln!(w, "{} {} {} {tag}", tri[0], tri[1], tri[2])?;
        }
        writeln!(w, "boundary_edges {}", self.boundary_edges.len())?;
        for e in &self.boundary_edges {
            let tag = match e.tag {
                BoundaryTag::FluidOuter => "fluid_outer",
                BoundaryTag::PorousOuter => "porous_outer",
                BoundaryTag::Interface => "interface",
            };
            writeln!(w, "{} {} {tag}", e.v[0], e.v[1])?;
        }
        Ok(())
    }
}

/// The two paper domains.
pub mod domains {
    use super::{DomainSpec, Rect};
    use std::f64::consts::PI;

    /// Ω_f = [0,π]×[0,1] over Ω_p = [0,π]×[−1,0].
    pub fn variable_step_test() -> DomainSpec {
        DomainSpec::new(Rect::new(0.0, PI, 0.0, 1.0), Rect::new(0.0, PI, -1.0, 0.0)).unwrap()
    }

    /// Ω_f = (0,1)×(1,2) over Ω_p = (0,1)×(0,1).
    pub fn convergence_test() -> DomainSpec {
        DomainSpec::new(Rect::new(0.0, 1.0, 1.0, 2.0), Rect::new(0.0, 1.0, 0.0, 1.0)).unwrap()
    }
}
