//! Fixed quadrature rules on the reference triangle and reference edge.
//!
//! The triangle rule is the 12-point degree-6 rule, exact for every bilinear
//! form assembled here (the highest-degree integrand is the bubble-bubble
//! mass product, degree 6). The edge rule is 3-point Gauss (degree 5), exact
//! for the P2 x P2 interface products.

/// Barycentric triangle points/weights plus parametric edge points/weights.
/// Triangle weights sum to the reference area 1/2; edge weights sum to 1.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub tri_points: Vec<[f64; 3]>,
    pub tri_weights: Vec<f64>,
    pub edge_points: Vec<f64>,
    pub edge_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn default_rule() -> Self {
        QuadratureRule {
            tri_points: tri_points_deg6(),
            tri_weights: tri_weights_deg6(),
            edge_points: EDGE_GAUSS3_POINTS.to_vec(),
            edge_weights: EDGE_GAUSS3_WEIGHTS.to_vec(),
        }
    }
}

// Dunavant degree-6 rule; weights normalized to sum 1 here, scaled by the
// reference area 1/2 below.
const D6_W1: f64 = 0.050844906370207;
const D6_A1: f64 = 0.873821971016996;
const D6_B1: f64 = 0.063089014491502;
const D6_W2: f64 = 0.116786275726379;
const D6_A2: f64 = 0.501426509658179;
const D6_B2: f64 = 0.249286745170910;
const D6_W3: f64 = 0.082851075618374;
const D6_A3: f64 = 0.636502499121399;
const D6_B3: f64 = 0.310352451033785;
const D6_C3: f64 = 0.053145049844816;

fn tri_points_deg6() -> Vec<[f64; 3]> {
    let mut pts = Vec::with_capacity(12);
    for (a, b) in [(D6_A1, D6_B1), (D6_A2, D6_B2)] {
        pts.push([a, b, b]);
        pts.push([b, a, b]);
        pts.push([b, b, a]);
    }
    let (a, b, c) = (D6_A3, D6_B3, D6_C3);
    pts.push([a, b, c]);
    pts.push([a, c, b]);
    pts.push([b, a, c]);
    pts.push([c, a, b]);
    pts.push([b, c, a]);
    pts.push([c, b, a]);
    pts
}

fn tri_weights_deg6() -> Vec<f64> {
    let mut w = vec![D6_W1; 3];
    w.extend_from_slice(&[D6_W2; 3]);
    w.extend_from_slice(&[D6_W3; 6]);
    for wi in &mut w {
        *wi *= 0.5;
    }
    w
}

// 3-point Gauss-Legendre on [0,1].
const EDGE_GAUSS3_POINTS: [f64; 3] = [
    0.112701665379258, // (1 - sqrt(3/5)) / 2
    0.5,
    0.887298334620742,
];
const EDGE_GAUSS3_WEIGHTS: [f64; 3] = [
    0.277777777777778, // 5/18
    0.444444444444444, // 8/18
    0.277777777777778,
];
