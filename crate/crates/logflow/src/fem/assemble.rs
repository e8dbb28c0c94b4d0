//! Residual and Jacobian assembly for the stabilized, equal-order weak form
//! of the coupled momentum / continuity / log-state system.
//!
//! The Galerkin form is augmented elementwise with a least-squares momentum
//! term (which also stabilizes equal-order pressure) and a streamline term
//! on the log-state equation. The Jacobian is exact for every strong
//! residual; by default the derivatives of the *stabilization operators*
//! with respect to velocity (the τ values, the advective part of the
//! momentum test operator, and the streamline test weight) are omitted,
//! which keeps Newton robust at a negligible cost in asymptotic rate.
//! Setting [`AssemblyOptions::exact_stab_jacobian`] restores the test-side
//! velocity derivatives; the τ values stay frozen in both modes.

use crate::constitutive::{
    psi_residual_dpsi, psi_residual_du, psi_residual_steady, FluidParams, PointState,
};
use crate::fem::shape::{interior_rule, ElementMap};
use crate::fem::{dof, DofMap, FieldState, DOFS_PER_NODE, SLOT_P, SLOT_U, SLOT_V};
use crate::matfun::{exp_directional, exp_directional_dpsi, expm_sym};
use crate::mesh::Mesh;
use crate::solver::CsrMatrix;
use crate::tensor2::{SymTensor2, Tensor2, Vec2};

/// Switches of the weak form.
#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    /// Drop the inertial terms (and the advective part of the momentum
    /// stabilization) entirely.
    pub creeping: bool,
    /// Least-squares momentum stabilization.
    pub include_gls: bool,
    /// Streamline upwinding of the log-state equation.
    pub include_supg: bool,
    /// Differentiate the velocity inside the stabilization *test* operators
    /// too. The τ values are treated as constants either way.
    pub exact_stab_jacobian: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            creeping: true,
            include_gls: true,
            include_supg: true,
            exact_stab_jacobian: false,
        }
    }
}

/// Which state the stabilization data is evaluated from when assembling a
/// residual. `None` means the state being assembled — the production
/// setting. Freezing either part against a reference state makes the
/// residual an exactly differentiable function of the remaining arguments,
/// which is what the finite-difference checks of the Jacobian modes need.
#[derive(Default, Clone, Copy)]
pub struct StabFreeze<'a> {
    /// Source of the τ values.
    pub tau_state: Option<&'a FieldState>,
    /// Source of the velocity inside the test operators (advective momentum
    /// test and streamline weight).
    pub testop_state: Option<&'a FieldState>,
}

/// Momentum stabilization time scale: the diffusive limit `ρh²/(314μ)`
/// capped by the advective limit `h/(2|u|)`.
pub fn tau_momentum(params: &FluidParams, h: f64, speed: f64) -> f64 {
    let diffusive = params.rho * h * h / (314.0 * params.mu_total());
    if speed <= 0.0 {
        return diffusive;
    }
    diffusive.min(h / (2.0 * speed))
}

/// The factor `τ_mom/ρ` actually multiplying the least-squares momentum
/// term, written so that creeping flow (`ρ = 0`) takes the finite diffusive
/// limit `h²/(314μ)` instead of `0/0`.
pub fn gls_prefactor(params: &FluidParams, h: f64, speed: f64, creeping: bool) -> f64 {
    let diffusive = h * h / (314.0 * params.mu_total());
    if creeping || params.rho == 0.0 {
        return diffusive;
    }
    let advective = h / (2.0 * params.rho * speed);
    if advective.is_finite() {
        diffusive.min(advective)
    } else {
        diffusive
    }
}

/// Streamline stabilization time scale `(2|u|/h + 1/λ)⁻¹`.
pub fn tau_consistency(params: &FluidParams, h: f64, speed: f64) -> f64 {
    1.0 / (2.0 * speed / h + 1.0 / params.lambda)
}

/// Cached mapping data at one quadrature point of one element.
struct QpGeom {
    wdet: f64,
    phi: [f64; 6],
    grad: [Vec2; 6],
    /// Physical Laplacian of each shape (geometry-corrected on curved
    /// elements).
    lap: [f64; 6],
}

/// State-dependent data at one quadrature point.
struct QpData {
    u: Vec2,
    grad_u: Tensor2,
    psi: SymTensor2,
    point: PointState,
    conv: Vec2,
    div_u: f64,
    /// Total Cauchy stress deviator seen by the momentum test gradient:
    /// `2μ_s ε(u) + (μ_p/λ)(e^Ψ - I) - p I`.
    stress: SymTensor2,
    /// Strong-form momentum residual (meaningful when the least-squares term
    /// is on).
    r_m: Vec2,
    r_psi: SymTensor2,
    tau_gls: f64,
    tau_cons: f64,
    u_test: Vec2,
}

#[derive(Clone, Copy)]
struct TrialDeriv {
    d_conv: Vec2,
    d_stress: SymTensor2,
    d_divu: f64,
    d_rpsi: SymTensor2,
    d_rm: Vec2,
}

const ZERO_TRIAL: TrialDeriv = TrialDeriv {
    d_conv: Vec2::ZERO,
    d_stress: SymTensor2::ZERO,
    d_divu: 0.0,
    d_rpsi: SymTensor2::ZERO,
    d_rm: Vec2::ZERO,
};

const E_BASIS: [SymTensor2; 3] = [
    SymTensor2 { xx: 1.0, xy: 0.0, yy: 0.0 },
    SymTensor2 { xx: 0.0, xy: 1.0, yy: 0.0 },
    SymTensor2 { xx: 0.0, xy: 0.0, yy: 1.0 },
];

/// Assembles residual vectors and Jacobian matrices over the free dofs of a
/// [`DofMap`]. Geometry (mapped shapes, gradients, Laplacians, weights) is
/// computed once at construction and reused across Newton iterations.
pub struct Assembler<'a> {
    pub mesh: &'a Mesh,
    pub params: &'a FluidParams,
    pub dofmap: &'a DofMap,
    pub options: AssemblyOptions,
    qp_geoms: Vec<[QpGeom; 7]>,
    hs: Vec<f64>,
}

impl<'a> Assembler<'a> {
    pub fn new(
        mesh: &'a Mesh,
        params: &'a FluidParams,
        dofmap: &'a DofMap,
        options: AssemblyOptions,
    ) -> Assembler<'a> {
        let mut qp_geoms = Vec::with_capacity(mesh.n_elems());
        let mut hs = Vec::with_capacity(mesh.n_elems());
        for e in 0..mesh.n_elems() {
            let map = ElementMap::from_mesh(mesh, e);
            let geoms: [QpGeom; 7] = std::array::from_fn(|q| {
                let rule = interior_rule()[q];
                let mp = map.at(rule.xi, rule.eta);
                let hess = map.hessians_at(rule.xi, rule.eta, &mp);
                let mut lap = [0.0; 6];
                for i in 0..6 {
                    lap[i] = hess.hess[i].trace();
                }
                QpGeom { wdet: rule.w * mp.det, phi: mp.phi, grad: mp.grad, lap }
            });
            qp_geoms.push(geoms);
            hs.push(mesh.element_h(e));
        }
        Assembler { mesh, params, dofmap, options, qp_geoms, hs }
    }

    /// Element size used by the stabilization parameters.
    pub fn element_h(&self, e: usize) -> f64 {
        self.hs[e]
    }

    fn eval_u(geom: &QpGeom, nodes: &[usize; 6], state: &FieldState) -> Vec2 {
        let mut u = Vec2::ZERO;
        for i in 0..6 {
            u += state.u(nodes[i]) * geom.phi[i];
        }
        u
    }

    fn qp_data(
        &self,
        geom: &QpGeom,
        nodes: &[usize; 6],
        state: &FieldState,
        freeze: StabFreeze,
        h: f64,
    ) -> QpData {
        let params = self.params;
        let o = &self.options;
        let mut u = Vec2::ZERO;
        let mut grad_u = Tensor2::ZERO;
        let mut p = 0.0;
        let mut grad_p = Vec2::ZERO;
        let mut psi = SymTensor2::ZERO;
        let mut grad_psi = [SymTensor2::ZERO; 2];
        let mut lap_u = Vec2::ZERO;
        for i in 0..6 {
            let n = nodes[i];
            let phi = geom.phi[i];
            let g = geom.grad[i];
            let un = state.u(n);
            u += un * phi;
            grad_u.xx += un.x * g.x;
            grad_u.xy += un.x * g.y;
            grad_u.yx += un.y * g.x;
            grad_u.yy += un.y * g.y;
            let pn = state.p(n);
            p += pn * phi;
            grad_p += g * pn;
            let psin = state.psi(n);
            psi += psin * phi;
            grad_psi[0] += psin * g.x;
            grad_psi[1] += psin * g.y;
            lap_u += un * geom.lap[i];
        }
        let conv = grad_u.matvec(u);
        let div_u = grad_u.trace();

        let u_tau = match freeze.tau_state {
            Some(s) => Self::eval_u(geom, nodes, s),
            None => u,
        };
        let u_test = match freeze.testop_state {
            Some(s) => Self::eval_u(geom, nodes, s),
            None => u,
        };
        let tau_gls = gls_prefactor(params, h, u_tau.norm(), o.creeping);
        let tau_cons = tau_consistency(params, h, u_tau.norm());

        let point = PointState { u, grad_u, psi, grad_psi };
        let r_psi = psi_residual_steady(params, &point);
        let mu_p_l = params.mu_p / params.lambda;
        let expm = expm_sym(psi);
        let sigma_p = (expm - SymTensor2::IDENTITY) * mu_p_l;
        let eps = grad_u.sym_part();
        let stress = eps * (2.0 * params.mu_s) + sigma_p - SymTensor2::IDENTITY * p;

        let r_m = if o.include_gls {
            let dx_exp = exp_directional(psi, grad_psi[0]);
            let dy_exp = exp_directional(psi, grad_psi[1]);
            let div_exp = Vec2::new(dx_exp.xx + dy_exp.xy, dx_exp.xy + dy_exp.yy);
            let mut r = grad_p - lap_u * params.mu_s - div_exp * mu_p_l;
            if !o.creeping {
                r += conv * params.rho;
            }
            r
        } else {
            Vec2::ZERO
        };

        QpData { u, grad_u, psi, point, conv, div_u, stress, r_m, r_psi, tau_gls, tau_cons, u_test }
    }

    /// Assemble the residual over free dofs. Dirichlet values must already
    /// be present in `state`.
    pub fn residual(&self, state: &FieldState, freeze: StabFreeze) -> Vec<f64> {
        let mut out = vec![0.0; self.dofmap.n_free()];
        for e in 0..self.mesh.n_elems() {
            let mut local = [0.0f64; 36];
            self.element_residual(e, state, freeze, &mut local);
            let el = &self.mesh.elems[e];
            for (i, &node) in el.iter().enumerate() {
                for slot in 0..DOFS_PER_NODE {
                    if let Some(r) = self.dofmap.free_of_global[dof(node, slot)] {
                        out[r] += local[DOFS_PER_NODE * i + slot];
                    }
                }
            }
        }
        out
    }

    fn element_residual(
        &self,
        e: usize,
        state: &FieldState,
        freeze: StabFreeze,
        out: &mut [f64; 36],
    ) {
        let nodes = &self.mesh.elems[e];
        let h = self.hs[e];
        let o = &self.options;
        let params = self.params;
        let mu_p_l = params.mu_p / params.lambda;
        let half_weight = 0.5 * mu_p_l;
        for geom in &self.qp_geoms[e] {
            let qd = self.qp_data(geom, nodes, state, freeze, h);
            let wdet = geom.wdet;
            for i in 0..6 {
                let phi = geom.phi[i];
                let g = geom.grad[i];
                let b = DOFS_PER_NODE * i;

                let mut rx = qd.stress.xx * g.x + qd.stress.xy * g.y;
                let mut ry = qd.stress.xy * g.x + qd.stress.yy * g.y;
                if !o.creeping {
                    rx += params.rho * qd.conv.x * phi;
                    ry += params.rho * qd.conv.y * phi;
                }
                out[b + SLOT_U] += wdet * rx;
                out[b + SLOT_V] += wdet * ry;
                out[b + SLOT_P] += wdet * phi * qd.div_u;

                let mut w_i = phi;
                if o.include_supg {
                    w_i += qd.tau_cons * qd.u_test.dot(g);
                }
                let w_i = half_weight * w_i;
                out[b + 3] += wdet * w_i * qd.r_psi.xx;
                out[b + 4] += wdet * w_i * 2.0 * qd.r_psi.xy;
                out[b + 5] += wdet * w_i * qd.r_psi.yy;

                if o.include_gls {
                    let mut t_mom = params.mu_s * geom.lap[i];
                    if !o.creeping {
                        t_mom += params.rho * qd.u_test.dot(g);
                    }
                    let tg = wdet * qd.tau_gls;
                    out[b + SLOT_U] += tg * t_mom * qd.r_m.x;
                    out[b + SLOT_V] += tg * t_mom * qd.r_m.y;
                    out[b + SLOT_P] += tg * g.dot(qd.r_m);
                    let c = -mu_p_l * tg;
                    out[b + 3] += c * g.x * qd.r_m.x;
                    out[b + 4] += c * (g.y * qd.r_m.x + g.x * qd.r_m.y);
                    out[b + 5] += c * g.y * qd.r_m.y;
                }
            }
        }
    }

    /// Sparsity pattern of the Jacobian over free dofs, with zero values.
    pub fn jacobian_pattern(&self) -> CsrMatrix {
        let nn = self.mesh.n_nodes();
        let mut nbr: Vec<Vec<usize>> = vec![Vec::new(); nn];
        for el in &self.mesh.elems {
            for &a in el {
                for &b in el {
                    nbr[a].push(b);
                }
            }
        }
        for list in &mut nbr {
            list.sort_unstable();
            list.dedup();
        }
        let n = self.dofmap.n_free();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for node in 0..nn {
            for slot in 0..DOFS_PER_NODE {
                let Some(r) = self.dofmap.free_of_global[dof(node, slot)] else {
                    continue;
                };
                let cols = &mut rows[r];
                for &other in &nbr[node] {
                    for t in 0..DOFS_PER_NODE {
                        if let Some(c) = self.dofmap.free_of_global[dof(other, t)] {
                            cols.push(c);
                        }
                    }
                }
            }
        }
        CsrMatrix::from_pattern(n, n, rows)
    }

    /// Assemble the Jacobian into an existing pattern (values are reset).
    pub fn fill_jacobian(&self, state: &FieldState, jac: &mut CsrMatrix) {
        jac.set_zero();
        let mut local = vec![[0.0f64; 36]; 36];
        for e in 0..self.mesh.n_elems() {
            for row in local.iter_mut() {
                *row = [0.0; 36];
            }
            self.element_jacobian(e, state, &mut local);
            let el = &self.mesh.elems[e];
            for (i, &node_r) in el.iter().enumerate() {
                for slot_r in 0..DOFS_PER_NODE {
                    let Some(r) = self.dofmap.free_of_global[dof(node_r, slot_r)] else {
                        continue;
                    };
                    let row_vals = &local[DOFS_PER_NODE * i + slot_r];
                    for (j, &node_c) in el.iter().enumerate() {
                        for slot_c in 0..DOFS_PER_NODE {
                            if let Some(c) = self.dofmap.free_of_global[dof(node_c, slot_c)] {
                                let v = row_vals[DOFS_PER_NODE * j + slot_c];
                                if v != 0.0 {
                                    jac.add(r, c, v);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Convenience: pattern plus fill.
    pub fn jacobian(&self, state: &FieldState) -> CsrMatrix {
        let mut jac = self.jacobian_pattern();
        self.fill_jacobian(state, &mut jac);
        jac
    }

    fn element_jacobian(&self, e: usize, state: &FieldState, out: &mut [[f64; 36]]) {
        let nodes = &self.mesh.elems[e];
        let h = self.hs[e];
        let o = &self.options;
        let params = self.params;
        let mu_p_l = params.mu_p / params.lambda;
        let half_weight = 0.5 * mu_p_l;
        let zero_grad = [SymTensor2::ZERO; 2];
        for geom in &self.qp_geoms[e] {
            let qd = self.qp_data(geom, nodes, state, StabFreeze::default(), h);
            let wdet = geom.wdet;

            // Directional-derivative bases, reused across trial dofs.
            let g_dir: [SymTensor2; 3] = E_BASIS.map(|ek| exp_directional(qd.psi, ek));
            let a_dir: [SymTensor2; 3] =
                E_BASIS.map(|ek| psi_residual_dpsi(params, &qd.point, ek, zero_grad));
            let b_dir = [
                psi_residual_du(params, &qd.point, Vec2::new(1.0, 0.0), Tensor2::ZERO),
                psi_residual_du(params, &qd.point, Vec2::new(0.0, 1.0), Tensor2::ZERO),
            ];
            let outer = [
                [Tensor2::new(1.0, 0.0, 0.0, 0.0), Tensor2::new(0.0, 1.0, 0.0, 0.0)],
                [Tensor2::new(0.0, 0.0, 1.0, 0.0), Tensor2::new(0.0, 0.0, 0.0, 1.0)],
            ];
            let d_dir: [[SymTensor2; 2]; 2] = std::array::from_fn(|c| {
                std::array::from_fn(|b| psi_residual_du(params, &qd.point, Vec2::ZERO, outer[c][b]))
            });
            let p_dir: [[SymTensor2; 3]; 2] = if o.include_gls {
                std::array::from_fn(|b| {
                    std::array::from_fn(|k| {
                        exp_directional_dpsi(
                            qd.psi,
                            qd.point.grad_psi[b],
                            E_BASIS[k],
                            SymTensor2::ZERO,
                        )
                    })
                })
            } else {
                [[SymTensor2::ZERO; 3]; 2]
            };

            // Trial-side directional derivatives for all 36 local dofs.
            let mut trial = [ZERO_TRIAL; 36];
            for j in 0..6 {
                let phi = geom.phi[j];
                let g = geom.grad[j];
                let lap = geom.lap[j];
                for c in 0..2 {
                    let ec = if c == 0 { Vec2::new(1.0, 0.0) } else { Vec2::new(0.0, 1.0) };
                    let dgrad = if c == 0 {
                        Tensor2::new(g.x, g.y, 0.0, 0.0)
                    } else {
                        Tensor2::new(0.0, 0.0, g.x, g.y)
                    };
                    let mut td = ZERO_TRIAL;
                    td.d_stress = dgrad.sym_part() * (2.0 * params.mu_s);
                    td.d_divu = if c == 0 { g.x } else { g.y };
                    td.d_conv = qd.grad_u.matvec(ec) * phi + ec * qd.u.dot(g);
                    td.d_rpsi = b_dir[c] * phi + d_dir[c][0] * g.x + d_dir[c][1] * g.y;
                    if o.include_gls {
                        let mut rm = ec * (-params.mu_s * lap);
                        if !o.creeping {
                            rm += td.d_conv * params.rho;
                        }
                        td.d_rm = rm;
                    }
                    trial[DOFS_PER_NODE * j + c] = td;
                }
                {
                    let mut td = ZERO_TRIAL;
                    td.d_stress = SymTensor2::IDENTITY * (-phi);
                    if o.include_gls {
                        td.d_rm = g;
                    }
                    trial[DOFS_PER_NODE * j + SLOT_P] = td;
                }
                for k in 0..3 {
                    let mut td = ZERO_TRIAL;
                    td.d_stress = g_dir[k] * (mu_p_l * phi);
                    td.d_rpsi = a_dir[k] * phi + E_BASIS[k] * qd.u.dot(g);
                    if o.include_gls {
                        let ddiv = Vec2::new(
                            phi * (p_dir[0][k].xx + p_dir[1][k].xy)
                                + g.x * g_dir[k].xx
                                + g.y * g_dir[k].xy,
                            phi * (p_dir[0][k].xy + p_dir[1][k].yy)
                                + g.x * g_dir[k].xy
                                + g.y * g_dir[k].yy,
                        );
                        td.d_rm = ddiv * (-mu_p_l);
                    }
                    trial[DOFS_PER_NODE * j + 3 + k] = td;
                }
            }

            // Test-side contraction.
            for i in 0..6 {
                let phi_i = geom.phi[i];
                let g_i = geom.grad[i];
                let b = DOFS_PER_NODE * i;
                let mut t_mom = params.mu_s * geom.lap[i];
                if !o.creeping {
                    t_mom += params.rho * qd.u_test.dot(g_i);
                }
                let mut w_i = phi_i;
                if o.include_supg {
                    w_i += qd.tau_cons * qd.u_test.dot(g_i);
                }
                let w_i = half_weight * w_i;

                for (a, td) in trial.iter().enumerate() {
                    let mut mx = td.d_stress.xx * g_i.x + td.d_stress.xy * g_i.y;
                    let mut my = td.d_stress.xy * g_i.x + td.d_stress.yy * g_i.y;
                    if !o.creeping {
                        mx += params.rho * td.d_conv.x * phi_i;
                        my += params.rho * td.d_conv.y * phi_i;
                    }
                    let mut pc = phi_i * td.d_divu;
                    let mut sxx = w_i * td.d_rpsi.xx;
                    let mut sxy = w_i * 2.0 * td.d_rpsi.xy;
                    let mut syy = w_i * td.d_rpsi.yy;
                    if o.include_gls {
                        let tg = qd.tau_gls;
                        mx += tg * t_mom * td.d_rm.x;
                        my += tg * t_mom * td.d_rm.y;
                        pc += tg * g_i.dot(td.d_rm);
                        let cgl = -mu_p_l * tg;
                        sxx += cgl * g_i.x * td.d_rm.x;
                        sxy += cgl * (g_i.y * td.d_rm.x + g_i.x * td.d_rm.y);
                        syy += cgl * g_i.y * td.d_rm.y;
                    }
                    out[b + SLOT_U][a] += wdet * mx;
                    out[b + SLOT_V][a] += wdet * my;
                    out[b + SLOT_P][a] += wdet * pc;
                    out[b + 3][a] += wdet * sxx;
                    out[b + 4][a] += wdet * sxy;
                    out[b + 5][a] += wdet * syy;
                }

                if o.exact_stab_jacobian {
                    // Velocity dependence of the test operators themselves.
                    for j in 0..6 {
                        let phi_j = geom.phi[j];
                        for cp in 0..2 {
                            let a = DOFS_PER_NODE * j + cp;
                            let gic = if cp == 0 { g_i.x } else { g_i.y };
                            if o.include_gls && !o.creeping {
                                let f = wdet * qd.tau_gls * params.rho * phi_j * gic;
                                out[b + SLOT_U][a] += f * qd.r_m.x;
                                out[b + SLOT_V][a] += f * qd.r_m.y;
                            }
                            if o.include_supg {
                                let s = wdet * half_weight * qd.tau_cons * phi_j * gic;
                                out[b + 3][a] += s * qd.r_psi.xx;
                                out[b + 4][a] += s * 2.0 * qd.r_psi.xy;
                                out[b + 5][a] += s * qd.r_psi.yy;
                            }
                        }
                    }
                }
            }
        }
    }
}
