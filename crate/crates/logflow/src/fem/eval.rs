//! Point evaluation of discrete fields and error norms against reference
//! solutions.

use crate::fem::shape::{interior_rule, shape_values, ElementMap};
use crate::fem::FieldState;
use crate::mesh::Mesh;
use crate::tensor2::{SymTensor2, Vec2};

/// Field values at one physical point.
#[derive(Debug, Clone, Copy)]
pub struct Sampled {
    pub u: Vec2,
    pub p: f64,
    pub psi: SymTensor2,
}

/// Locates physical points inside a mesh and interpolates nodal fields
/// there. Construction precomputes per-element bounding boxes; lookups scan
/// elements with a bbox reject, which is plenty for profile extraction.
pub struct FieldSampler<'a> {
    mesh: &'a Mesh,
    maps: Vec<ElementMap>,
    boxes: Vec<(Vec2, Vec2)>,
}

impl<'a> FieldSampler<'a> {
    pub fn new(mesh: &'a Mesh) -> FieldSampler<'a> {
        let maps: Vec<ElementMap> =
            (0..mesh.n_elems()).map(|e| ElementMap::from_mesh(mesh, e)).collect();
        let boxes = maps
            .iter()
            .map(|m| {
                let mut lo = m.nodes[0];
                let mut hi = m.nodes[0];
                for p in &m.nodes[1..] {
                    lo.x = lo.x.min(p.x);
                    lo.y = lo.y.min(p.y);
                    hi.x = hi.x.max(p.x);
                    hi.y = hi.y.max(p.y);
                }
                // Quadratic edges can bulge slightly past the node hull.
                let margin = 0.3 * (hi - lo).norm();
                (lo - Vec2::new(margin, margin), hi + Vec2::new(margin, margin))
            })
            .collect();
        FieldSampler { mesh, maps, boxes }
    }

    /// Find the element containing `x` and its reference coordinates.
    pub fn locate(&self, x: Vec2) -> Option<(usize, f64, f64)> {
        for (e, map) in self.maps.iter().enumerate() {
            let (lo, hi) = self.boxes[e];
            if x.x < lo.x || x.x > hi.x || x.y < lo.y || x.y > hi.y {
                continue;
            }
            if let Some((xi, eta)) = map.invert(x, 1e-8) {
                return Some((e, xi, eta));
            }
        }
        None
    }

    /// Interpolate all fields at `x`, or `None` if the point is outside the
    /// mesh.
    pub fn sample(&self, state: &FieldState, x: Vec2) -> Option<Sampled> {
        let (e, xi, eta) = self.locate(x)?;
        let phi = shape_values(xi, eta);
        let el = &self.mesh.elems[e];
        let mut u = Vec2::ZERO;
        let mut p = 0.0;
        let mut psi = SymTensor2::ZERO;
        for i in 0..6 {
            u += state.u(el[i]) * phi[i];
            p += state.p(el[i]) * phi[i];
            psi += state.psi(el[i]) * phi[i];
        }
        Some(Sampled { u, p, psi })
    }
}

/// Fill a state by evaluating closures at every node.
pub fn interpolate_fields(
    mesh: &Mesh,
    u_fn: impl Fn(Vec2) -> Vec2,
    p_fn: impl Fn(Vec2) -> f64,
    psi_fn: impl Fn(Vec2) -> SymTensor2,
) -> FieldState {
    let mut state = FieldState::zeros(mesh.n_nodes());
    for (n, &x) in mesh.coords.iter().enumerate() {
        state.set_u(n, u_fn(x));
        state.set_p(n, p_fn(x));
        state.set_psi(n, psi_fn(x));
    }
    state
}

/// L² norm of the log-state error against a reference field.
pub fn psi_l2_error(
    mesh: &Mesh,
    state: &FieldState,
    exact: impl Fn(Vec2) -> SymTensor2,
) -> f64 {
    let mut acc = 0.0;
    for e in 0..mesh.n_elems() {
        let map = ElementMap::from_mesh(mesh, e);
        let el = &mesh.elems[e];
        for q in interior_rule() {
            let mp = map.at(q.xi, q.eta);
            let mut psi = SymTensor2::ZERO;
            for i in 0..6 {
                psi += state.psi(el[i]) * mp.phi[i];
            }
            let diff = psi - exact(mp.x);
            acc += q.w * mp.det * diff.frobenius_norm().powi(2);
        }
    }
    acc.sqrt()
}

/// L² norm of the velocity error against a reference field.
pub fn velocity_l2_error(
    mesh: &Mesh,
    state: &FieldState,
    exact: impl Fn(Vec2) -> Vec2,
) -> f64 {
    let mut acc = 0.0;
    for e in 0..mesh.n_elems() {
        let map = ElementMap::from_mesh(mesh, e);
        let el = &mesh.elems[e];
        for q in interior_rule() {
            let mp = map.at(q.xi, q.eta);
            let mut u = Vec2::ZERO;
            for i in 0..6 {
                u += state.u(el[i]) * mp.phi[i];
            }
            let diff = u - exact(mp.x);
            acc += q.w * mp.det * diff.dot(diff);
        }
    }
    acc.sqrt()
}

/// Maximum velocity error over nodes and interior quadrature points.
pub fn velocity_max_error(
    mesh: &Mesh,
    state: &FieldState,
    exact: impl Fn(Vec2) -> Vec2,
) -> f64 {
    let mut max = 0.0f64;
    for (n, &x) in mesh.coords.iter().enumerate() {
        max = max.max((state.u(n) - exact(x)).norm());
    }
    for e in 0..mesh.n_elems() {
        let map = ElementMap::from_mesh(mesh, e);
        let el = &mesh.elems[e];
        for q in interior_rule() {
            let mp = map.at(q.xi, q.eta);
            let mut u = Vec2::ZERO;
            for i in 0..6 {
                u += state.u(el[i]) * mp.phi[i];
            }
            max = max.max((u - exact(mp.x)).norm());
        }
    }
    max
}
