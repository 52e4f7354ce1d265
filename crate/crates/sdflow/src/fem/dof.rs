//! Degree-of-freedom maps for the three fields of the coupled problem:
//! vector velocity on the fluid region, hydraulic head on the porous region,
//! pressure (always P1) on the fluid region.
//!
//! Global layout: velocity dofs first (two per scalar node, interleaved),
//! then head, then pressure. Essential dofs are velocity nodes on tagged
//! FluidOuter edges and head nodes on PorousOuter edges; interface nodes
//! stay free for both fields.

use super::element::Element;
use super::FemError;
use crate::mesh::{edge_key, BoundaryTag, Region, TriMesh};
use std::collections::HashMap;

/// Inf-sup-stable velocity/pressure pair plus the head space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementPair {
    pub velocity: Element,
    pub pressure: Element,
    pub head: Element,
}

impl ElementPair {
    /// Taylor-Hood (P2-P1) velocity/pressure.
    pub fn taylor_hood(head: Element) -> Result<Self, FemError> {
        Self::new(Element::P2, head)
    }

    /// MINI (P1b-P1) velocity/pressure.
    pub fn mini(head: Element) -> Result<Self, FemError> {
        Self::new(Element::P1Bubble, head)
    }

    pub fn new(velocity: Element, head: Element) -> Result<Self, FemError> {
        if !matches!(velocity, Element::P2 | Element::P1Bubble) {
            return Err(FemError::UnsupportedPair(
                "velocity must be P2 (Taylor-Hood) or P1+bubble (MINI)",
            ));
        }
        if !matches!(head, Element::P1 | Element::P2) {
            return Err(FemError::UnsupportedPair("head must be P1 or P2"));
        }
        Ok(ElementPair {
            velocity,
            pressure: Element::P1,
            head,
        })
    }
}

/// Global numbering of the unique mesh edges (for P2 midpoint nodes).
pub struct EdgeTable {
    map: HashMap<(usize, usize), usize>,
    pub count: usize,
}

impl EdgeTable {
    pub fn build(mesh: &TriMesh) -> Self {
        let mut map = HashMap::new();
        let mut count = 0;
        for tri in &mesh.triangles {
            for k in 0..3 {
                let key = edge_key(tri[k], tri[(k + 1) % 3]);
                map.entry(key).or_insert_with(|| {
                    let id = count;
                    count += 1;
                    id
                });
            }
        }
        EdgeTable { map, count }
    }

    pub fn id(&self, a: usize, b: usize) -> usize {
        self.map[&edge_key(a, b)]
    }
}

/// Scalar finite-element space restricted to one region of the mesh.
pub struct ScalarSpace {
    pub element: Element,
    pub region: Region,
    pub n_nodes: usize,
    vertex_node: Vec<Option<usize>>,
    edge_node: Vec<Option<usize>>,
    tri_node: Vec<Option<usize>>,
    /// Node coordinates (vertex position, edge midpoint, triangle centroid).
    pub node_pos: Vec<[f64; 2]>,
    /// Nodes lying on the region's tagged outer boundary.
    pub essential: Vec<bool>,
}

impl ScalarSpace {
    pub fn build(mesh: &TriMesh, edges: &EdgeTable, element: Element, region: Region) -> Self {
        let mut vertex_node = vec![None; mesh.vertices.len()];
        let mut edge_node = vec![None; edges.count];
        let mut tri_node = vec![None; mesh.triangles.len()];
        let mut node_pos = Vec::new();

        let alloc = |pos: [f64; 2], slot: &mut Option<usize>, node_pos: &mut Vec<[f64; 2]>| {
            if slot.is_none() {
                *slot = Some(node_pos.len());
                node_pos.push(pos);
            }
        };

        for (t, tri) in mesh.triangles.iter().enumerate() {
            if mesh.region_of_triangle[t] != region {
                continue;
            }
            for &v in tri {
                alloc(mesh.vertices[v], &mut vertex_node[v], &mut node_pos);
            }
            if element.has_edge_nodes() {
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                    let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
                    alloc(mid, &mut edge_node[edges.id(a, b)], &mut node_pos);
                }
            }
            if element.has_bubble() {
                let c = mesh.point_at(t, [1.0 / 3.0; 3]);
                alloc(c, &mut tri_node[t], &mut node_pos);
            }
        }

        let n_nodes = node_pos.len();
        let mut essential = vec![false; n_nodes];
        let outer_tag = match region {
            Region::Fluid => BoundaryTag::FluidOuter,
            Region::Porous => BoundaryTag::PorousOuter,
        };
        for e in &mesh.boundary_edges {
            if e.tag != outer_tag {
                continue;
            }
            for v in e.v {
                if let Some(n) = vertex_node[v] {
                    essential[n] = true;
                }
            }
            if element.has_edge_nodes() {
                if let Some(n) = edge_node[edges.id(e.v[0], e.v[1])] {
                    essential[n] = true;
                }
            }
        }

        ScalarSpace {
            element,
            region,
            n_nodes,
            vertex_node,
            edge_node,
            tri_node,
            node_pos,
            essential,
        }
    }

    /// Global scalar node ids of triangle `t`, in element-local order.
    /// `t` must belong to this space's region.
    pub fn local_nodes(&self, mesh: &TriMesh, edges: &EdgeTable, t: usize, out: &mut Vec<usize>) {
        out.clear();
        let tri = mesh.triangles[t];
        for &v in &tri {
            out.push(self.vertex_node[v].expect("vertex node missing"));
        }
        if self.element.has_edge_nodes() {
            for k in 0..3 {
                let id = edges.id(tri[k], tri[(k + 1) % 3]);
                out.push(self.edge_node[id].expect("edge node missing"));
            }
        }
        if self.element.has_bubble() {
            out.push(self.tri_node[t].expect("bubble node missing"));
        }
    }

    pub fn vertex_node(&self, v: usize) -> Option<usize> {
        self.vertex_node[v]
    }

    /// Nodal interpolation. The bubble coefficient matches the function value
    /// at the centroid on top of the linear part.
    pub fn interpolate<F: Fn(f64, f64) -> f64>(&self, mesh: &TriMesh, f: F) -> Vec<f64> {
        let mut vals = vec![0.0; self.n_nodes];
        for (v, node) in self.vertex_node.iter().enumerate() {
            if let Some(n) = *node {
                vals[n] = f(mesh.vertices[v][0], mesh.vertices[v][1]);
            }
        }
        for (e, node) in self.edge_node.iter().enumerate() {
            let _ = e;
            if let Some(n) = *node {
                let p = self.node_pos[n];
                vals[n] = f(p[0], p[1]);
            }
        }
        if self.element.has_bubble() {
            for (t, node) in self.tri_node.iter().enumerate() {
                if let Some(n) = *node {
                    let tri = mesh.triangles[t];
                    let c = self.node_pos[n];
                    let lin = tri
                        .iter()
                        .map(|&v| f(mesh.vertices[v][0], mesh.vertices[v][1]))
                        .sum::<f64>()
                        / 3.0;
                    vals[n] = f(c[0], c[1]) - lin;
                }
            }
        }
        vals
    }
}

pub struct DofMap {
    pub pair: ElementPair,
    pub velocity: ScalarSpace,
    pub head: ScalarSpace,
    pub pressure: ScalarSpace,
    pub edges: EdgeTable,
    pub n_total: usize,
    /// Per global dof; pressure dofs are never essential.
    pub essential: Vec<bool>,
}

impl DofMap {
    pub fn new(mesh: &TriMesh, pair: ElementPair) -> Self {
        let edges = EdgeTable::build(mesh);
        let velocity = ScalarSpace::build(mesh, &edges, pair.velocity, Region::Fluid);
        let head = ScalarSpace::build(mesh, &edges, pair.head, Region::Porous);
        let pressure = ScalarSpace::build(mesh, &edges, pair.pressure, Region::Fluid);
        let n_total = 2 * velocity.n_nodes + head.n_nodes + pressure.n_nodes;

        let mut essential = vec![false; n_total];
        for (n, e) in velocity.essential.iter().enumerate() {
            if *e {
                essential[2 * n] = true;
                essential[2 * n + 1] = true;
            }
        }
        let head_off = 2 * velocity.n_nodes;
        for (n, e) in head.essential.iter().enumerate() {
            if *e {
                essential[head_off + n] = true;
            }
        }

        DofMap {
            pair,
            velocity,
            head,
            pressure,
            edges,
            n_total,
            essential,
        }
    }

    pub fn vel_dof(&self, node: usize, comp: usize) -> usize {
        2 * node + comp
    }

    pub fn head_offset(&self) -> usize {
        2 * self.velocity.n_nodes
    }

    pub fn head_dof(&self, node: usize) -> usize {
        self.head_offset() + node
    }

    pub fn pressure_offset(&self) -> usize {
        self.head_offset() + self.head.n_nodes
    }

    pub fn pressure_dof(&self, node: usize) -> usize {
        self.pressure_offset() + node
    }

    pub fn n_free(&self) -> usize {
        self.essential.iter().filter(|e| !**e).count()
    }
}
