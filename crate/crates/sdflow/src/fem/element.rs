//! Scalar Lagrange elements on triangles: P1, P2 and P1 enriched with the
//! cubic bubble (the velocity component of the MINI pair).
//!
//! Local node order: vertices 0,1,2 first; P2 appends midpoints of edges
//! (0,1), (1,2), (2,0); the bubble node (27 λ0 λ1 λ2, value 1 at the
//! centroid) comes last.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element {
    P1,
    P2,
    P1Bubble,
}

impl Element {
    pub fn node_count(self) -> usize {
        match self {
            Element::P1 => 3,
            Element::P2 => 6,
            Element::P1Bubble => 4,
        }
    }

    pub fn has_edge_nodes(self) -> bool {
        self == Element::P2
    }

    pub fn has_bubble(self) -> bool {
        self == Element::P1Bubble
    }

    /// Basis values at the barycentric point.
    pub fn eval(self, lam: [f64; 3], out: &mut Vec<f64>) {
        out.clear();
        let [l0, l1, l2] = lam;
        match self {
            Element::P1 => out.extend_from_slice(&[l0, l1, l2]),
            Element::P2 => out.extend_from_slice(&[
                l0 * (2.0 * l0 - 1.0),
                l1 * (2.0 * l1 - 1.0),
                l2 * (2.0 * l2 - 1.0),
                4.0 * l0 * l1,
                4.0 * l1 * l2,
                4.0 * l2 * l0,
            ]),
            Element::P1Bubble => out.extend_from_slice(&[l0, l1, l2, 27.0 * l0 * l1 * l2]),
        }
    }

    /// Barycentric gradient coefficients: ∇φ_i = Σ_m out[i][m] ∇λ_m.
    pub fn eval_grad_coeffs(self, lam: [f64; 3], out: &mut Vec<[f64; 3]>) {
        out.clear();
        let [l0, l1, l2] = lam;
        match self {
            Element::P1 => out.extend_from_slice(&[
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ]),
            Element::P2 => out.extend_from_slice(&[
                [4.0 * l0 - 1.0, 0.0, 0.0],
                [0.0, 4.0 * l1 - 1.0, 0.0],
                [0.0, 0.0, 4.0 * l2 - 1.0],
                [4.0 * l1, 4.0 * l0, 0.0],
                [0.0, 4.0 * l2, 4.0 * l1],
                [4.0 * l2, 0.0, 4.0 * l0],
            ]),
            Element::P1Bubble => out.extend_from_slice(&[
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [27.0 * l1 * l2, 27.0 * l0 * l2, 27.0 * l0 * l1],
            ]),
        }
    }
}

/// Physical gradient of basis function `i` given the triangle's ∇λ.
pub fn physical_grad(coeffs: &[f64; 3], grad_lambda: &[[f64; 2]; 3]) -> [f64; 2] {
    [
        coeffs[0] * grad_lambda[0][0] + coeffs[1] * grad_lambda[1][0] + coeffs[2] * grad_lambda[2][0],
        coeffs[0] * grad_lambda[0][1] + coeffs[1] * grad_lambda[1][1] + coeffs[2] * grad_lambda[2][1],
    ]
}
