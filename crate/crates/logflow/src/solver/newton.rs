//! Newton iteration on the assembled system and parameter continuation with
//! step bisection.

use crate::fem::{Assembler, FieldState, StabFreeze};
use crate::solver::direct::direct_lu_solve;
use crate::solver::gmres::{gmres_solve, GmresConfig};
use crate::solver::ilut::ilut_factor;
use crate::solver::{CsrMatrix, SolverError};

/// Which linear solver backs the Newton steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Gmres,
    DirectLu,
}

/// Linear solver settings shared across Newton iterations.
#[derive(Debug, Clone, Copy)]
pub struct LinearConfig {
    pub backend: Backend,
    /// GMRES Krylov dimension per cycle.
    pub restart: usize,
    /// GMRES relative residual target.
    pub tol: f64,
    /// GMRES total step budget.
    pub max_iter: usize,
    /// ILUT per-row fill cap.
    pub ilut_fill: usize,
    /// ILUT relative drop tolerance.
    pub ilut_drop: f64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            backend: Backend::DirectLu,
            restart: 200,
            tol: 1e-9,
            max_iter: 2000,
            ilut_fill: 200,
            ilut_drop: 1e-4,
        }
    }
}

/// Newton settings.
#[derive(Debug, Clone, Copy)]
pub struct NewtonConfig {
    /// Absolute l² residual target.
    pub abs_tol: f64,
    pub max_iter: usize,
    /// Backtracking on the step length (off by default; the continuation
    /// driver handles globalization by shrinking parameter steps instead).
    pub line_search: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { abs_tol: 1e-8, max_iter: 30, line_search: false }
    }
}

/// One Newton iteration record: the residual *before* the step, the linear
/// iterations spent on it, and the accepted step scale.
#[derive(Debug, Clone, Copy)]
pub struct NewtonStep {
    pub residual: f64,
    pub linear_iters: usize,
    pub step_scale: f64,
}

#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub steps: Vec<NewtonStep>,
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solve one linear system with the configured backend. Returns the
/// solution and the iterative step count (zero for the direct path).
pub fn solve_linear(
    jac: &CsrMatrix,
    rhs: &[f64],
    cfg: &LinearConfig,
) -> Result<(Vec<f64>, usize), SolverError> {
    match cfg.backend {
        Backend::DirectLu => Ok((direct_lu_solve(jac, rhs)?, 0)),
        Backend::Gmres => {
            let pre = ilut_factor(jac, cfg.ilut_drop, cfg.ilut_fill)?;
            let gcfg = GmresConfig { restart: cfg.restart, tol: cfg.tol, max_iter: cfg.max_iter };
            gmres_solve(jac, rhs, Some(&pre), &gcfg)
        }
    }
}

/// Newton-Raphson on the assembled residual, updating `state` in place.
/// Dirichlet values must already be present in `state`; only free dofs move.
pub fn newton_solve(
    asm: &Assembler,
    state: &mut FieldState,
    lin: &LinearConfig,
    cfg: &NewtonConfig,
) -> Result<NewtonReport, SolverError> {
    let mut steps = Vec::new();
    let mut jac = asm.jacobian_pattern();
    for it in 0..cfg.max_iter {
        let r = asm.residual(state, StabFreeze::default());
        let rnorm = l2(&r);
        if rnorm <= cfg.abs_tol {
            return Ok(NewtonReport { iterations: it, final_residual: rnorm, steps });
        }
        asm.fill_jacobian(state, &mut jac);
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let (d, linear_iters) = solve_linear(&jac, &rhs, lin)?;

        let free0 = asm.dofmap.get_free(state);
        let mut alpha = 1.0;
        if cfg.line_search {
            // Simple backtracking: accept the first scale that reduces the
            // residual norm; fall back to the full step if none does.
            let mut best = 1.0;
            let mut found = false;
            for _ in 0..10 {
                let trial: Vec<f64> =
                    free0.iter().zip(&d).map(|(v, di)| v + alpha * di).collect();
                let mut trial_state = state.clone();
                asm.dofmap.set_free(&mut trial_state, &trial);
                let tn = l2(&asm.residual(&trial_state, StabFreeze::default()));
                if tn < (1.0 - 1e-4 * alpha) * rnorm {
                    best = alpha;
                    found = true;
                    break;
                }
                alpha *= 0.5;
            }
            alpha = if found { best } else { 1.0 };
        }
        let free: Vec<f64> = free0.iter().zip(&d).map(|(v, di)| v + alpha * di).collect();
        asm.dofmap.set_free(state, &free);
        steps.push(NewtonStep { residual: rnorm, linear_iters, step_scale: alpha });
    }
    let rnorm = l2(&asm.residual(state, StabFreeze::default()));
    if rnorm <= cfg.abs_tol {
        Ok(NewtonReport { iterations: cfg.max_iter, final_residual: rnorm, steps })
    } else {
        Err(SolverError::NewtonStall { residual: rnorm, iters: cfg.max_iter })
    }
}

/// Continuation settings: how many times a failed parameter step may be
/// bisected (per target) before giving up.
#[derive(Debug, Clone, Copy)]
pub struct ContinuationConfig {
    pub max_bisections: usize,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig { max_bisections: 4 }
    }
}

/// Result of one continuation target. `seconds` covers everything spent on
/// the target, bisection detours included.
#[derive(Debug, Clone)]
pub struct ContinuationStep {
    pub target: f64,
    pub report: NewtonReport,
    pub seconds: f64,
}

/// March `solve_at` through `targets` in order, warm-starting each solve
/// from the previous state. A failed solve rolls the state back and retries
/// at the midpoint between the last converged parameter and the failed one;
/// intermediate successes are kept as new warm starts but only the requested
/// targets are reported. The parameter of the initial state is taken as 0.
pub fn continuation<S: Clone>(
    targets: &[f64],
    state: &mut S,
    mut solve_at: impl FnMut(f64, &mut S) -> Result<NewtonReport, SolverError>,
    cfg: &ContinuationConfig,
) -> Result<Vec<ContinuationStep>, SolverError> {
    let mut out = Vec::with_capacity(targets.len());
    let mut base = 0.0f64;
    for &target in targets {
        let started = std::time::Instant::now();
        let mut depth = 0usize;
        let mut attempt = target;
        loop {
            let snapshot = state.clone();
            match solve_at(attempt, state) {
                Ok(report) => {
                    base = attempt;
                    if attempt == target {
                        let seconds = started.elapsed().as_secs_f64();
                        out.push(ContinuationStep { target, report, seconds });
                        break;
                    }
                    attempt = target;
                }
                Err(err) => {
                    *state = snapshot;
                    depth += 1;
                    if depth > cfg.max_bisections {
                        return Err(SolverError::ContinuationStall {
                            parameter: attempt,
                            source: Box::new(err),
                        });
                    }
                    attempt = 0.5 * (base + attempt);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{FluidParams, Model};
    use crate::fem::{
        AssemblyOptions, DirichletSpec, DofMap, SLOT_U, SLOT_V,
    };
    use crate::fem::eval::velocity_max_error;
    use crate::mesh::gen::gen_channel_mesh;
    use crate::mesh::BoundaryTag;
    use crate::tensor2::Vec2;

    fn poiseuille_setup() -> (crate::mesh::Mesh, FluidParams, DirichletSpec) {
        let mesh = gen_channel_mesh(3.0, 1.0, 5, 4);
        let params = FluidParams {
            model: Model::OldroydB,
            rho: 0.0,
            mu_s: 0.59,
            mu_p: 0.41,
            lambda: 0.8,
        };
        let profile = |p: Vec2| 1.5 * (1.0 - p.y * p.y);
        let spec = DirichletSpec::new()
            .constant(BoundaryTag::Outflow, SLOT_V, 0.0)
            .function(BoundaryTag::Inflow, SLOT_U, profile)
            .constant(BoundaryTag::Inflow, SLOT_V, 0.0)
            .constant(BoundaryTag::Wall, SLOT_U, 0.0)
            .constant(BoundaryTag::Wall, SLOT_V, 0.0);
        (mesh, params, spec)
    }

    #[test]
    fn clamped_stokes_converges_in_one_newton_iteration() {
        // With the log-state pinned and no inertia the system is linear, so
        // a single Newton step from zero must land on the exact solution —
        // which for this data is plane Poiseuille flow itself.
        let (mesh, params, spec) = poiseuille_setup();
        let dofmap = DofMap::build_with_psi_pinned(&mesh, &spec);
        let asm = Assembler::new(&mesh, &params, &dofmap, AssemblyOptions::default());
        let mut state = FieldState::zeros(mesh.n_nodes());
        dofmap.apply_to(&mut state);
        let lin = LinearConfig { backend: Backend::DirectLu, ..LinearConfig::default() };
        let cfg = NewtonConfig { abs_tol: 1e-9, ..NewtonConfig::default() };
        let report = newton_solve(&asm, &mut state, &lin, &cfg).expect("Stokes converges");
        assert_eq!(report.iterations, 1, "linear problem must need exactly one step");
        let err = velocity_max_error(&mesh, &state, |p| Vec2::new(1.5 * (1.0 - p.y * p.y), 0.0));
        assert!(err < 1e-9, "velocity error {err:e}");
    }

    #[test]
    fn gmres_and_direct_backends_agree_on_stokes() {
        let (mesh, params, spec) = poiseuille_setup();
        let dofmap = DofMap::build_with_psi_pinned(&mesh, &spec);
        let asm = Assembler::new(&mesh, &params, &dofmap, AssemblyOptions::default());
        let cfg = NewtonConfig { abs_tol: 1e-10, ..NewtonConfig::default() };

        let mut direct_state = FieldState::zeros(mesh.n_nodes());
        dofmap.apply_to(&mut direct_state);
        let lin_d = LinearConfig { backend: Backend::DirectLu, ..LinearConfig::default() };
        newton_solve(&asm, &mut direct_state, &lin_d, &cfg).unwrap();

        let mut gmres_state = FieldState::zeros(mesh.n_nodes());
        dofmap.apply_to(&mut gmres_state);
        let lin_g = LinearConfig { backend: Backend::Gmres, tol: 1e-12, ..LinearConfig::default() };
        newton_solve(&asm, &mut gmres_state, &lin_g, &cfg).unwrap();

        let diff: f64 = direct_state
            .values
            .iter()
            .zip(&gmres_state.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let scale: f64 =
            direct_state.values.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        assert!(diff / scale < 1e-8, "backend disagreement {:e}", diff / scale);
    }

    #[test]
    fn exhausted_iteration_budget_is_a_stall_error() {
        let (mesh, params, spec) = poiseuille_setup();
        let dofmap = DofMap::build_with_psi_pinned(&mesh, &spec);
        let asm = Assembler::new(&mesh, &params, &dofmap, AssemblyOptions::default());
        let mut state = FieldState::zeros(mesh.n_nodes());
        dofmap.apply_to(&mut state);
        let lin = LinearConfig { backend: Backend::DirectLu, ..LinearConfig::default() };
        let cfg = NewtonConfig { abs_tol: 1e-9, max_iter: 0, ..NewtonConfig::default() };
        match newton_solve(&asm, &mut state, &lin, &cfg) {
            Err(SolverError::NewtonStall { iters, .. }) => assert_eq!(iters, 0),
            other => panic!("expected a Newton stall, got {other:?}"),
        }
    }

    #[test]
    fn continuation_bisects_through_a_step_limit() {
        // A solver that only accepts parameter steps of at most 0.15 from
        // the last converged value: the driver must bisect its way to the
        // target and report only the requested targets.
        let solve = |wi: f64, state: &mut f64| {
            if wi - *state <= 0.15 + 1e-12 {
                *state = wi;
                Ok(NewtonReport { iterations: 1, final_residual: 0.0, steps: Vec::new() })
            } else {
                Err(SolverError::NewtonStall { residual: 1.0, iters: 30 })
            }
        };
        let mut state = 0.0;
        let steps =
            continuation(&[0.1, 0.5], &mut state, solve, &ContinuationConfig::default())
                .expect("bisection reaches the target");
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0].target, 0.1);
        assert_eq!(steps[1].target, 0.5);
        assert!((state - 0.5).abs() < 1e-15);

        let mut state = 0.0;
        let err = continuation(
            &[0.1, 0.5],
            &mut state,
            solve,
            &ContinuationConfig { max_bisections: 2 },
        );
        match err {
            Err(SolverError::ContinuationStall { parameter, .. }) => {
                assert!(parameter > 0.1 && parameter <= 0.5)
            }
            other => panic!("expected a continuation stall, got {other:?}"),
        }
    }
}
