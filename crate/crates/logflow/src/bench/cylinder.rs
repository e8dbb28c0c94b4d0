//! The confined-cylinder benchmark: a half-cylinder of radius `R` centered
//! in a channel of half-height `2R` (50% blockage), solved over a ramp of
//! Weissenberg numbers with warm-started continuation. Produces the drag
//! coefficient on the cylinder and the polymeric normal stress along the
//! cylinder surface and the wake centerline.

use crate::bench::inflow::{inflow_psi, inflow_velocity};
use crate::bench::{BenchConfig, BenchError, DragResult, MeshSelect};
use crate::constitutive::{polymer_stress, FluidParams};
use crate::fem::eval::FieldSampler;
use crate::fem::shape::{edge_ref_point, interior_rule, shape_values, ElementMap, EDGE_GAUSS};
use crate::fem::{
    Assembler, AssemblyOptions, DirichletSpec, DofMap, FieldState, SLOT_PSI_XY, SLOT_U, SLOT_V,
};
use crate::mesh::gen::{cylinder_class_size, gen_cylinder_mesh};
use crate::mesh::{BoundaryTag, Mesh};
use crate::solver::{
    continuation, newton_solve, Backend, ContinuationConfig, LinearConfig, NewtonReport,
};
use crate::tensor2::{SymTensor2, Tensor2, Vec2};

/// Everything a finished continuation sweep produced: per-target drag
/// results, converged states, and Newton histories.
#[derive(Debug)]
pub struct CylinderRun {
    pub mesh: Mesh,
    pub mesh_id: String,
    pub results: Vec<DragResult>,
    pub states: Vec<(f64, FieldState)>,
    pub reports: Vec<(f64, NewtonReport)>,
}

/// Build or load the benchmark mesh. Class names map to the generated
/// O-grid resolutions; anything else is a Gmsh 2.2 file path.
pub fn load_mesh(select: &MeshSelect, radius: f64) -> Result<(Mesh, String), BenchError> {
    match select {
        MeshSelect::Class(name) => {
            let n = cylinder_class_size(name)
                .ok_or_else(|| BenchError::Config(format!("unknown mesh class `{name}`")))?;
            Ok((gen_cylinder_mesh(radius, n), name.clone()))
        }
        MeshSelect::File(path) => {
            let mesh = crate::mesh::gmsh::import_gmsh_file(path)?;
            mesh.check()?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            Ok((mesh, id))
        }
    }
}

/// Boundary conditions of the benchmark. Later entries override earlier
/// ones on shared nodes, so the order fixes the corner conventions: the
/// inflow profile wins its corners, and no-slip wins over the symmetry
/// plane at the cylinder junctions.
///
/// * outflow: `v = 0`, `u` free (natural traction);
/// * symmetry plane `y = 0`: `v = 0` and `Ψ12 = 0` (mirror symmetry);
/// * cylinder and wall: no slip;
/// * inflow: full profile `u(y)`, `v = 0`, and the analytic shear
///   log-state.
///
/// The log-state is prescribed only where characteristics enter (the
/// inflow); the pressure level is set by the natural outflow condition, so
/// no pin is needed.
pub fn cylinder_bc_spec(cfg: &BenchConfig, lambda: f64) -> DirichletSpec {
    let (ubar, r) = (cfg.ubar, cfg.radius);
    let profile = move |p: Vec2| inflow_velocity(p.y, ubar, r);
    DirichletSpec::new()
        .constant(BoundaryTag::Outflow, SLOT_V, 0.0)
        .constant(BoundaryTag::Symmetry, SLOT_V, 0.0)
        .constant(BoundaryTag::Symmetry, SLOT_PSI_XY, 0.0)
        .constant(BoundaryTag::Cylinder, SLOT_U, 0.0)
        .constant(BoundaryTag::Cylinder, SLOT_V, 0.0)
        .constant(BoundaryTag::Wall, SLOT_U, 0.0)
        .constant(BoundaryTag::Wall, SLOT_V, 0.0)
        .function(BoundaryTag::Inflow, SLOT_U, profile)
        .constant(BoundaryTag::Inflow, SLOT_V, 0.0)
        .psi(BoundaryTag::Inflow, move |p: Vec2| inflow_psi(p.y, lambda, ubar, r))
}

/// Newtonian starting guess: the same geometry and velocity data with the
/// log-state clamped to zero. In the creeping default this is a single
/// linear solve.
pub fn stokes_start(mesh: &Mesh, cfg: &BenchConfig) -> Result<FieldState, BenchError> {
    let lambda = cfg.lambda_for(cfg.wi_schedule[0]);
    let spec = cylinder_bc_spec(cfg, lambda);
    let dofmap = DofMap::build_with_psi_pinned(mesh, &spec);
    let params = cfg.fluid_params(cfg.wi_schedule[0]);
    let options = AssemblyOptions { creeping: cfg.creeping, ..AssemblyOptions::default() };
    let asm = Assembler::new(mesh, &params, &dofmap, options);
    let mut state = FieldState::zeros(mesh.n_nodes());
    dofmap.apply_to(&mut state);
    // The clamped system is a pure saddle point, which the incomplete
    // factorization handles poorly at fine resolution; this is a single
    // linear solve, so always use the direct backend for it.
    let linear = LinearConfig { backend: Backend::DirectLu, ..cfg.linear.clone() };
    newton_solve(&asm, &mut state, &linear, &cfg.newton)?;
    Ok(state)
}

/// Run the full continuation sweep over `cfg.wi_schedule`, warm-starting
/// from a Newtonian solve. Failed targets are retried through bisection of
/// the Weissenberg step before the run gives up.
pub fn run_cylinder(cfg: &BenchConfig) -> Result<CylinderRun, BenchError> {
    cfg.validate()?;
    let (mesh, mesh_id) = load_mesh(&cfg.mesh, cfg.radius)?;
    let mut state = stokes_start(&mesh, cfg)?;

    let mut states: Vec<(f64, FieldState)> = Vec::new();
    let steps = continuation(
        &cfg.wi_schedule,
        &mut state,
        |wi, st: &mut FieldState| {
            let lambda = cfg.lambda_for(wi);
            let spec = cylinder_bc_spec(cfg, lambda);
            let dofmap = DofMap::build(&mesh, &spec);
            let params = cfg.fluid_params(wi);
            let options =
                AssemblyOptions { creeping: cfg.creeping, ..AssemblyOptions::default() };
            let asm = Assembler::new(&mesh, &params, &dofmap, options);
            dofmap.apply_to(st);
            let report = newton_solve(&asm, st, &cfg.linear, &cfg.newton)?;
            // Bisection midpoints always fall strictly between requested
            // targets, so an exact match identifies a scheduled one.
            if cfg.wi_schedule.iter().any(|&t| t == wi) {
                states.push((wi, st.clone()));
            }
            Ok(report)
        },
        &ContinuationConfig::default(),
    )?;

    let mut results = Vec::new();
    let mut reports = Vec::new();
    for step in steps {
        let (_, st) = states
            .iter()
            .find(|(w, _)| *w == step.target)
            .expect("every reported target has a recorded state");
        let params = cfg.fluid_params(step.target);
        let k = drag_coefficient(&mesh, st, &params, cfg.ubar)?;
        results.push(DragResult {
            wi: step.target,
            k,
            mesh_id: mesh_id.clone(),
            newton_iters: step.report.iterations,
            seconds: step.seconds,
        });
        reports.push((step.target, step.report));
    }
    Ok(CylinderRun { mesh, mesh_id, results, states, reports })
}

/// Dimensionless drag on the half-cylinder:
/// `K = (2/(μ·ū))·∮ ê_x·[−p·I + 2μ_s·ε(u) + (μ_p/λ)(e^Ψ − I)]·n ds`,
/// integrated with 4-point Gauss per curved boundary edge. Positions and
/// fields follow the isoparametric edge; the outward normal comes from the
/// exact circle.
pub fn drag_coefficient(
    mesh: &Mesh,
    state: &FieldState,
    params: &FluidParams,
    ubar: f64,
) -> Result<f64, BenchError> {
    let mut force_x = 0.0;
    let mut seen = false;
    for be in &mesh.boundary_edges {
        if be.tag != BoundaryTag::Cylinder {
            continue;
        }
        seen = true;
        let map = ElementMap::from_mesh(mesh, be.elem);
        let el = &mesh.elems[be.elem];
        let (a, b, m) = mesh.edge_nodes(be.elem, be.local_edge);
        let (pa, pb, pm) = (mesh.coords[a], mesh.coords[b], mesh.coords[m]);
        for &(t, w) in EDGE_GAUSS.iter() {
            let (xi, eta) = edge_ref_point(be.local_edge, t);
            let mp = map.at(xi, eta);

            let mut p = 0.0;
            let mut psi = SymTensor2::ZERO;
            let mut grad_u = Tensor2::ZERO;
            for i in 0..6 {
                p += state.p(el[i]) * mp.phi[i];
                psi += state.psi(el[i]) * mp.phi[i];
                let (u, g) = (state.u(el[i]), mp.grad[i]);
                grad_u += Tensor2::new(u.x * g.x, u.x * g.y, u.y * g.x, u.y * g.y);
            }
            let stress = grad_u.sym_part() * (2.0 * params.mu_s) + polymer_stress(params, psi)
                - SymTensor2::IDENTITY * p;

            // Arc length along the quadratic edge x(t) = Σ N_k(t)·x_k with
            // N_a = t(t-1)/2, N_b = t(t+1)/2, N_m = 1-t².
            let tangent = pa * (t - 0.5) + pb * (t + 0.5) + pm * (-2.0 * t);
            // Outward normal of the exact circle (cylinder centered at the
            // origin), pointing from the body into the fluid.
            let n = mp.x * (1.0 / mp.x.norm());
            force_x += w * tangent.norm() * stress.matvec(n).x;
        }
    }
    if !seen {
        return Err(BenchError::MissingBoundary("cylinder"));
    }
    Ok(2.0 * force_x / (params.mu_total() * ubar))
}

/// One point of the stress profile: arc/centerline coordinate `s` (starting
/// at the upstream stagnation point), position `x`, and the polymeric
/// normal stress `T11`.
#[derive(Debug, Clone, Copy)]
pub struct WakeSample {
    pub s: f64,
    pub x: f64,
    pub t11: f64,
}

/// `T11` along the cylinder surface (sampled at the boundary quadrature
/// points of the isoparametric edges, parameterized by arc length
/// `s = R·(π − θ)` from the upstream stagnation point) and along the
/// downstream centerline (`centerline_samples` points on `x ∈ [R, 15R]`,
/// `s = πR + (x − R)`).
pub fn wake_profile(
    mesh: &Mesh,
    state: &FieldState,
    params: &FluidParams,
    radius: f64,
    centerline_samples: usize,
) -> Result<Vec<WakeSample>, BenchError> {
    let mut arc = Vec::new();
    for be in &mesh.boundary_edges {
        if be.tag != BoundaryTag::Cylinder {
            continue;
        }
        let map = ElementMap::from_mesh(mesh, be.elem);
        let el = &mesh.elems[be.elem];
        for &(t, _) in EDGE_GAUSS.iter() {
            let (xi, eta) = edge_ref_point(be.local_edge, t);
            let mp = map.at(xi, eta);
            let mut psi = SymTensor2::ZERO;
            for i in 0..6 {
                psi += state.psi(el[i]) * mp.phi[i];
            }
            let theta = mp.x.y.atan2(mp.x.x).clamp(0.0, std::f64::consts::PI);
            arc.push(WakeSample {
                s: radius * (std::f64::consts::PI - theta),
                x: mp.x.x,
                t11: polymer_stress(params, psi).xx,
            });
        }
    }
    if arc.is_empty() {
        return Err(BenchError::MissingBoundary("cylinder"));
    }
    arc.sort_by(|a, b| a.s.total_cmp(&b.s));

    let sampler = FieldSampler::new(mesh);
    let n = centerline_samples.max(2);
    for i in 0..n {
        let x = radius + (15.0 * radius - radius) * i as f64 / (n - 1) as f64;
        let point = Vec2::new(x, 0.0);
        let sampled = sampler
            .sample(state, point)
            .or_else(|| sampler.sample(state, Vec2::new(x, 1e-9 * radius)))
            .ok_or(BenchError::SampleOutsideDomain { x: point.x, y: point.y })?;
        arc.push(WakeSample {
            s: std::f64::consts::PI * radius + (x - radius),
            x,
            t11: polymer_stress(params, sampled.psi).xx,
        });
    }
    Ok(arc)
}

/// Count interior quadrature points at which the reconstructed conformation
/// tensor `exp(Ψ^h)` fails to be symmetric positive definite (or finite) —
/// the structural guarantee of the log formulation, so the count must stay
/// zero on converged states.
pub fn spd_violations(mesh: &Mesh, state: &FieldState) -> usize {
    let mut violations = 0;
    for el in &mesh.elems {
        for q in interior_rule() {
            let phi = shape_values(q.xi, q.eta);
            let mut psi = SymTensor2::ZERO;
            for i in 0..6 {
                psi += state.psi(el[i]) * phi[i];
            }
            let sigma = crate::matfun::expm_sym(psi);
            let ok = sigma.xx.is_finite()
                && sigma.xy.is_finite()
                && sigma.yy.is_finite()
                && sigma.xx > 0.0
                && sigma.det() > 0.0;
            if !ok {
                violations += 1;
            }
        }
    }
    violations
}
