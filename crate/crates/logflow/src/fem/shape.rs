//! Six-node triangle shape functions, quadrature rules, and the
//! isoparametric mapping (including second derivatives, which the
//! stabilization terms need even on curved elements).
//!
//! Reference element: vertices at (0,0), (1,0), (0,1); barycentric
//! `L0 = 1-ξ-η`, `L1 = ξ`, `L2 = η`. Shape order matches the mesh:
//! `[v0, v1, v2, m01, m12, m20]`.

use crate::tensor2::{SymTensor2, Tensor2, Vec2};

/// Shape values at a reference point.
pub fn shape_values(xi: f64, eta: f64) -> [f64; 6] {
    let l0 = 1.0 - xi - eta;
    let (l1, l2) = (xi, eta);
    [
        l0 * (2.0 * l0 - 1.0),
        l1 * (2.0 * l1 - 1.0),
        l2 * (2.0 * l2 - 1.0),
        4.0 * l0 * l1,
        4.0 * l1 * l2,
        4.0 * l2 * l0,
    ]
}

/// Reference-coordinate gradients `(∂/∂ξ, ∂/∂η)` of the six shapes.
pub fn shape_ref_grads(xi: f64, eta: f64) -> [Vec2; 6] {
    let l0 = 1.0 - xi - eta;
    let (l1, l2) = (xi, eta);
    [
        Vec2::new(1.0 - 4.0 * l0, 1.0 - 4.0 * l0),
        Vec2::new(4.0 * l1 - 1.0, 0.0),
        Vec2::new(0.0, 4.0 * l2 - 1.0),
        Vec2::new(4.0 * (l0 - l1), -4.0 * l1),
        Vec2::new(4.0 * l2, 4.0 * l1),
        Vec2::new(-4.0 * l2, 4.0 * (l0 - l2)),
    ]
}

/// Reference-coordinate Hessians `[∂²/∂ξ², ∂²/∂ξ∂η, ∂²/∂η²]`; constant for
/// quadratic shapes.
pub const SHAPE_REF_HESS: [[f64; 3]; 6] = [
    [4.0, 4.0, 4.0],
    [4.0, 0.0, 0.0],
    [0.0, 0.0, 4.0],
    [-8.0, -4.0, 0.0],
    [0.0, 4.0, 0.0],
    [0.0, -4.0, -8.0],
];

/// A quadrature point on the reference triangle; weights sum to the
/// reference area 1/2.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub xi: f64,
    pub eta: f64,
    pub w: f64,
}

/// Seven-point, degree-5 rule (centroid plus two symmetric orbits).
pub fn interior_rule() -> &'static [QuadPoint; 7] {
    const A1: f64 = 0.059715871789770;
    const B1: f64 = 0.470142064105115;
    const W1: f64 = 0.132394152788506 * 0.5;
    const A2: f64 = 0.797426985353087;
    const B2: f64 = 0.101286507323456;
    const W2: f64 = 0.125939180544827 * 0.5;
    const RULE: [QuadPoint; 7] = [
        QuadPoint { xi: 1.0 / 3.0, eta: 1.0 / 3.0, w: 0.225 * 0.5 },
        QuadPoint { xi: B1, eta: B1, w: W1 },
        QuadPoint { xi: A1, eta: B1, w: W1 },
        QuadPoint { xi: B1, eta: A1, w: W1 },
        QuadPoint { xi: B2, eta: B2, w: W2 },
        QuadPoint { xi: A2, eta: B2, w: W2 },
        QuadPoint { xi: B2, eta: A2, w: W2 },
    ];
    &RULE
}

/// Four-point Gauss rule on `[-1, 1]` for edge integrals.
pub const EDGE_GAUSS: [(f64, f64); 4] = [
    (-0.8611363115940526, 0.3478548451374538),
    (-0.3399810435848563, 0.6521451548625461),
    (0.3399810435848563, 0.6521451548625461),
    (0.8611363115940526, 0.3478548451374538),
];

/// Reference coordinates along local edge `k` (vertex `k` → vertex
/// `(k+1) % 3`) at edge parameter `t ∈ [-1, 1]`.
pub fn edge_ref_point(local_edge: u8, t: f64) -> (f64, f64) {
    let s0 = 0.5 * (1.0 - t);
    let s1 = 0.5 * (1.0 + t);
    match local_edge {
        0 => (s1, 0.0),  // v0 → v1
        1 => (s0, s1),   // v1 → v2
        2 => (0.0, s0),  // v2 → v0
        _ => unreachable!("local edge index {local_edge}"),
    }
}

/// The isoparametric map of one element: node coordinates plus everything
/// derived from them at a reference point.
#[derive(Debug, Clone, Copy)]
pub struct ElementMap {
    pub nodes: [Vec2; 6],
}

/// Mapping data at a single reference point.
#[derive(Debug, Clone, Copy)]
pub struct MappedPoint {
    /// Physical position.
    pub x: Vec2,
    /// Jacobian determinant of the map (positive on valid elements).
    pub det: f64,
    /// Shape values.
    pub phi: [f64; 6],
    /// Physical gradients of the shapes.
    pub grad: [Vec2; 6],
}

/// Physical second derivatives, produced on demand for stabilization terms.
#[derive(Debug, Clone, Copy)]
pub struct MappedHessians {
    /// Physical Hessian of each shape.
    pub hess: [SymTensor2; 6],
}

impl ElementMap {
    pub fn from_mesh(mesh: &crate::mesh::Mesh, e: usize) -> ElementMap {
        let el = &mesh.elems[e];
        ElementMap {
            nodes: [
                mesh.coords[el[0]],
                mesh.coords[el[1]],
                mesh.coords[el[2]],
                mesh.coords[el[3]],
                mesh.coords[el[4]],
                mesh.coords[el[5]],
            ],
        }
    }

    /// Evaluate the map at a reference point.
    pub fn at(&self, xi: f64, eta: f64) -> MappedPoint {
        let phi = shape_values(xi, eta);
        let dref = shape_ref_grads(xi, eta);
        let mut x = Vec2::ZERO;
        let mut jac = Tensor2::ZERO; // jac_ab = ∂x_a/∂ξ_b
        for i in 0..6 {
            x += self.nodes[i] * phi[i];
            jac.xx += self.nodes[i].x * dref[i].x;
            jac.xy += self.nodes[i].x * dref[i].y;
            jac.yx += self.nodes[i].y * dref[i].x;
            jac.yy += self.nodes[i].y * dref[i].y;
        }
        let det = jac.det();
        let inv = jac.inverse();
        // ∇_x φ = J^{-T} ∇_ξ φ.
        let mut grad = [Vec2::ZERO; 6];
        for i in 0..6 {
            grad[i] = Vec2::new(
                inv.xx * dref[i].x + inv.yx * dref[i].y,
                inv.xy * dref[i].x + inv.yy * dref[i].y,
            );
        }
        MappedPoint { x, det, phi, grad }
    }

    /// Physical Hessians of all shapes at a reference point. On straight
    /// elements the geometric correction vanishes; on curved ones it removes
    /// the spurious curvature the plain chain rule would leave behind.
    pub fn hessians_at(&self, xi: f64, eta: f64, mp: &MappedPoint) -> MappedHessians {
        let _ = (xi, eta); // reference Hessians are constant for P2
        let dref_const = SHAPE_REF_HESS;
        // Second derivatives of the geometry map: T_c = Σ_i H_ref_i · X_i,c.
        let mut tx = SymTensor2::ZERO;
        let mut ty = SymTensor2::ZERO;
        for i in 0..6 {
            let h = dref_const[i];
            tx += SymTensor2::new(h[0], h[1], h[2]) * self.nodes[i].x;
            ty += SymTensor2::new(h[0], h[1], h[2]) * self.nodes[i].y;
        }
        // Recompute J^{-1} from the mapped point's data.
        let jac = self.jacobian(xi, eta);
        let inv = jac.inverse();
        let mut hess = [SymTensor2::ZERO; 6];
        for i in 0..6 {
            let h = dref_const[i];
            let corrected = SymTensor2::new(
                h[0] - mp.grad[i].x * tx.xx - mp.grad[i].y * ty.xx,
                h[1] - mp.grad[i].x * tx.xy - mp.grad[i].y * ty.xy,
                h[2] - mp.grad[i].x * tx.yy - mp.grad[i].y * ty.yy,
            );
            // H_phys = J^{-T} · corrected · J^{-1}.
            let full = inv.transpose() * corrected.to_tensor() * inv;
            hess[i] = full.sym_part();
        }
        MappedHessians { hess }
    }

    pub fn jacobian(&self, xi: f64, eta: f64) -> Tensor2 {
        let dref = shape_ref_grads(xi, eta);
        let mut jac = Tensor2::ZERO;
        for i in 0..6 {
            jac.xx += self.nodes[i].x * dref[i].x;
            jac.xy += self.nodes[i].x * dref[i].y;
            jac.yx += self.nodes[i].y * dref[i].x;
            jac.yy += self.nodes[i].y * dref[i].y;
        }
        jac
    }

    /// Invert the map: find reference coordinates for a physical point.
    /// Newton from the affine estimate; returns `None` if it fails to close
    /// or lands well outside the element (tolerance `pad` in reference
    /// units).
    pub fn invert(&self, target: Vec2, pad: f64) -> Option<(f64, f64)> {
        // Affine start from the vertex triangle.
        let [a, b, c] = [self.nodes[0], self.nodes[1], self.nodes[2]];
        let m = Tensor2::new(b.x - a.x, c.x - a.x, b.y - a.y, c.y - a.y);
        if m.det().abs() < 1e-30 {
            return None;
        }
        let r0 = m.inverse().matvec(target - a);
        let (mut xi, mut eta) = (r0.x, r0.y);
        for _ in 0..30 {
            let mp = self.at(xi, eta);
            let diff = target - mp.x;
            if diff.norm() < 1e-13 * (1.0 + target.norm()) {
                break;
            }
            let step = self.jacobian(xi, eta).inverse().matvec(diff);
            xi += step.x;
            eta += step.y;
        }
        let mp = self.at(xi, eta);
        if (target - mp.x).norm() > 1e-9 * (1.0 + target.norm()) {
            return None;
        }
        let inside = xi >= -pad && eta >= -pad && xi + eta <= 1.0 + pad;
        inside.then_some((xi, eta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shapes_interpolate_and_partition_unity() {
        let nodes_ref = [
            (0.0, 0.0),
            (1.0, 0.0),
            (0.0, 1.0),
            (0.5, 0.0),
            (0.5, 0.5),
            (0.0, 0.5),
        ];
        for (i, &(xi, eta)) in nodes_ref.iter().enumerate() {
            let phi = shape_values(xi, eta);
            for (j, &v) in phi.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-15, "phi[{j}] at node {i}");
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0xfe10_0001);
        for _ in 0..100 {
            let xi = rng.gen_range(0.0..1.0);
            let eta = rng.gen_range(0.0..(1.0 - xi));
            let phi = shape_values(xi, eta);
            let sum: f64 = phi.iter().sum();
            assert!((sum - 1.0).abs() < 1e-14);
            let grads = shape_ref_grads(xi, eta);
            let gsum = grads.iter().fold(Vec2::ZERO, |acc, g| acc + *g);
            assert!(gsum.norm() < 1e-14);
        }
    }

    #[test]
    fn ref_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xfe10_0002);
        let h = 1e-7;
        for _ in 0..50 {
            let xi = rng.gen_range(0.1..0.8);
            let eta = rng.gen_range(0.1..(0.9 - xi));
            let g = shape_ref_grads(xi, eta);
            let px = shape_values(xi + h, eta);
            let mx = shape_values(xi - h, eta);
            let py = shape_values(xi, eta + h);
            let my = shape_values(xi, eta - h);
            for i in 0..6 {
                assert!(((px[i] - mx[i]) / (2.0 * h) - g[i].x).abs() < 1e-6);
                assert!(((py[i] - my[i]) / (2.0 * h) - g[i].y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn ref_hessians_match_finite_differences() {
        let h = 1e-5;
        let (xi, eta) = (0.3, 0.4);
        for i in 0..6 {
            let f = |x: f64, y: f64| shape_values(x, y)[i];
            let dxx = (f(xi + h, eta) - 2.0 * f(xi, eta) + f(xi - h, eta)) / (h * h);
            let dyy = (f(xi, eta + h) - 2.0 * f(xi, eta) + f(xi, eta - h)) / (h * h);
            let dxy = (f(xi + h, eta + h) - f(xi + h, eta - h) - f(xi - h, eta + h)
                + f(xi - h, eta - h))
                / (4.0 * h * h);
            assert!((dxx - SHAPE_REF_HESS[i][0]).abs() < 1e-4);
            assert!((dxy - SHAPE_REF_HESS[i][1]).abs() < 1e-4);
            assert!((dyy - SHAPE_REF_HESS[i][2]).abs() < 1e-4);
        }
    }

    #[test]
    fn interior_rule_integrates_degree_five_exactly() {
        // ∫_T ξ^a η^b = a! b! / (a+b+2)! on the reference triangle.
        let exact = |a: u32, b: u32| -> f64 {
            let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
            fact(a) * fact(b) / fact(a + b + 2)
        };
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let quad: f64 = interior_rule()
                    .iter()
                    .map(|q| q.w * q.xi.powi(a as i32) * q.eta.powi(b as i32))
                    .sum();
                assert!(
                    (quad - exact(a, b)).abs() < 1e-14,
                    "ξ^{a} η^{b}: {quad} vs {}",
                    exact(a, b)
                );
            }
        }
    }

    #[test]
    fn edge_gauss_weights_and_symmetry() {
        let wsum: f64 = EDGE_GAUSS.iter().map(|g| g.1).sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // Exact for x^6 on [-1,1]: 2/7.
        let q: f64 = EDGE_GAUSS.iter().map(|&(x, w)| w * x.powi(6)).sum();
        assert!((q - 2.0 / 7.0).abs() < 1e-14);
    }

    fn straight_map() -> ElementMap {
        // An affine image of the reference triangle.
        let a = Vec2::new(0.2, -0.1);
        let b = Vec2::new(1.3, 0.3);
        let c = Vec2::new(0.4, 1.1);
        ElementMap {
            nodes: [a, b, c, (a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5],
        }
    }

    fn curved_map() -> ElementMap {
        let mut m = straight_map();
        m.nodes[3] += Vec2::new(0.03, 0.05); // bend one edge
        m
    }

    #[test]
    fn physical_gradients_differentiate_interpolants() {
        // Interpolate a quadratic u(x,y); its gradient must be reproduced
        // exactly on a straight element.
        let map = straight_map();
        let f = |p: Vec2| 1.5 + 0.3 * p.x - 0.7 * p.y + 0.25 * p.x * p.x
            - 0.4 * p.x * p.y
            + 0.6 * p.y * p.y;
        let fgrad = |p: Vec2| {
            Vec2::new(0.3 + 0.5 * p.x - 0.4 * p.y, -0.7 - 0.4 * p.x + 1.2 * p.y)
        };
        let vals: Vec<f64> = map.nodes.iter().map(|&p| f(p)).collect();
        for q in interior_rule() {
            let mp = map.at(q.xi, q.eta);
            let mut g = Vec2::ZERO;
            for i in 0..6 {
                g += mp.grad[i] * vals[i];
            }
            assert!((g - fgrad(mp.x)).norm() < 1e-12);
        }
    }

    #[test]
    fn physical_hessians_work_on_curved_elements() {
        // On a curved element, check each shape's physical Hessian by finite
        // differences of the inverse map: interpolate shape i, evaluate at
        // physical points near x0, difference twice.
        let map = curved_map();
        let (xi0, eta0) = (0.3, 0.35);
        let mp0 = map.at(xi0, eta0);
        let hs = map.hessians_at(xi0, eta0, &mp0);
        let x0 = mp0.x;
        let h = 1e-4;
        let eval_shape = |i: usize, p: Vec2| -> f64 {
            let (xi, eta) = map.invert(p, 0.5).expect("point near center inverts");
            map.at(xi, eta).phi[i]
        };
        for i in 0..6 {
            let f = |p: Vec2| eval_shape(i, p);
            let dxx = (f(x0 + Vec2::new(h, 0.0)) - 2.0 * f(x0) + f(x0 - Vec2::new(h, 0.0)))
                / (h * h);
            let dyy = (f(x0 + Vec2::new(0.0, h)) - 2.0 * f(x0) + f(x0 - Vec2::new(0.0, h)))
                / (h * h);
            let dxy = (f(x0 + Vec2::new(h, h)) - f(x0 + Vec2::new(h, -h))
                - f(x0 + Vec2::new(-h, h))
                + f(x0 + Vec2::new(-h, -h)))
                / (4.0 * h * h);
            assert!((dxx - hs.hess[i].xx).abs() < 2e-4, "shape {i} dxx");
            assert!((dxy - hs.hess[i].xy).abs() < 2e-4, "shape {i} dxy");
            assert!((dyy - hs.hess[i].yy).abs() < 2e-4, "shape {i} dyy");
        }
    }

    #[test]
    fn inverse_map_round_trips() {
        let map = curved_map();
        let mut rng = ChaCha8Rng::seed_from_u64(0xfe10_0003);
        for _ in 0..200 {
            let xi = rng.gen_range(0.05..0.9);
            let eta = rng.gen_range(0.05..(0.95 - xi));
            let x = map.at(xi, eta).x;
            let (xi2, eta2) = map.invert(x, 1e-6).expect("interior point must invert");
            assert!((xi - xi2).abs() < 1e-10 && (eta - eta2).abs() < 1e-10);
        }
        // A far-away point must not claim to be inside.
        assert!(map.invert(Vec2::new(50.0, 50.0), 1e-6).is_none());
    }

    #[test]
    fn edge_parameterization_covers_each_edge() {
        for k in 0..3u8 {
            let (x0, e0) = edge_ref_point(k, -1.0);
            let (x1, e1) = edge_ref_point(k, 1.0);
            let starts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
            let (sx, sy) = starts[k as usize];
            let (tx, ty) = starts[(k as usize + 1) % 3];
            assert!((x0 - sx).abs() < 1e-15 && (e0 - sy).abs() < 1e-15, "edge {k} start");
            assert!((x1 - tx).abs() < 1e-15 && (e1 - ty).abs() < 1e-15, "edge {k} end");
        }
    }
}
