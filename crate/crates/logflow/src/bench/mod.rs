//! Confined-cylinder benchmark driver: boundary data, drag coefficient,
//! wake profiles, channel verification, kernel self-test suites, and the
//! CSV/VTK output they produce.

pub mod channel;
pub mod cylinder;
pub mod inflow;
pub mod output;
pub mod selftest;

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::solver::{Backend, LinearConfig, NewtonConfig};

pub use channel::{run_channel_verification, ChannelCase, ChannelOptions, ChannelReport};
pub use cylinder::{
    cylinder_bc_spec, drag_coefficient, run_cylinder, spd_violations, stokes_start,
    wake_profile, CylinderRun, WakeSample,
};
pub use inflow::{channel_pressure_slope, inflow_psi, inflow_psi_secondary, inflow_velocity};
pub use output::{
    compare_table, read_drag_csv, reference_drag, write_drag_csv, write_newton_csv,
    write_vtk, write_wake_csv, REFERENCE_DRAG,
};
pub use selftest::{run_all_suites, SuiteResult};

/// Errors from benchmark configuration and drivers.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config: {0}")]
    Config(String),
    #[error("mesh: {0}")]
    Mesh(#[from] crate::mesh::MeshError),
    #[error("solver: {0}")]
    Solver(#[from] crate::solver::SolverError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("mesh has no edges tagged {0}")]
    MissingBoundary(&'static str),
    #[error("sample point ({x}, {y}) lies outside the mesh")]
    SampleOutsideDomain { x: f64, y: f64 },
}

/// Which mesh the cylinder run uses: a generated resolution class or a
/// Gmsh 2.2 file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeshSelect {
    Class(String),
    File(PathBuf),
}

impl MeshSelect {
    pub fn parse(s: &str) -> MeshSelect {
        match crate::mesh::gen::cylinder_class_size(s) {
            Some(_) => MeshSelect::Class(s.to_ascii_uppercase()),
            None => MeshSelect::File(PathBuf::from(s)),
        }
    }
}

/// Benchmark parameters: geometry, fluid, Weissenberg schedule, solver
/// settings, and output location.
///
/// The relaxation time is not stored; it is derived per target from
/// `Wi = λ·ū/R` as `λ = Wi·R/ū`.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Cylinder radius; the channel half-height is `2R`.
    pub radius: f64,
    /// Average inflow velocity.
    pub ubar: f64,
    /// Solvent fraction `μ_s/μ` of the total viscosity.
    pub beta: f64,
    /// Total viscosity `μ = μ_s + μ_p`.
    pub mu: f64,
    /// Drop the advective momentum term and set the density to zero.
    pub creeping: bool,
    /// Density used when `creeping` is off.
    pub rho: f64,
    /// Weissenberg targets, strictly increasing.
    pub wi_schedule: Vec<f64>,
    pub mesh: MeshSelect,
    pub linear: LinearConfig,
    pub newton: NewtonConfig,
    pub out_dir: PathBuf,
    /// Points along the wake centerline (the arc adds its own samples).
    pub wake_samples: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            radius: 1.0,
            ubar: 1.0,
            beta: 0.59,
            mu: 1.0,
            creeping: true,
            rho: 1.0,
            wi_schedule: default_wi_schedule(0.7),
            mesh: MeshSelect::Class("M1".into()),
            linear: LinearConfig::default(),
            newton: NewtonConfig::default(),
            out_dir: PathBuf::from("out"),
            wake_samples: 281,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let err = |m: String| Err(BenchError::Config(m));
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return err(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.radius > 0.0 && self.ubar > 0.0 && self.mu > 0.0) {
            return err("radius, ubar, and mu must be positive".into());
        }
        if self.wi_schedule.is_empty() {
            return err("empty Weissenberg schedule".into());
        }
        if self.wi_schedule.iter().any(|&w| w <= 0.0) {
            return err("Weissenberg targets must be positive".into());
        }
        if self.wi_schedule.windows(2).any(|p| p[1] <= p[0]) {
            return err("Weissenberg schedule must increase strictly".into());
        }
        Ok(())
    }

    pub fn lambda_for(&self, wi: f64) -> f64 {
        wi * self.radius / self.ubar
    }

    pub fn fluid_params(&self, wi: f64) -> crate::constitutive::FluidParams {
        crate::constitutive::FluidParams {
            model: crate::constitutive::Model::OldroydB,
            rho: if self.creeping { 0.0 } else { self.rho },
            mu_s: self.beta * self.mu,
            mu_p: (1.0 - self.beta) * self.mu,
            lambda: self.lambda_for(wi),
        }
    }
}

/// The benchmark ramp: ΔWi = 0.1 up to 0.5, then 0.05 up to `wi_max`.
/// Values are built on an exact 0.05 grid; a `wi_max` off that grid is
/// appended as a final fractional step.
pub fn default_wi_schedule(wi_max: f64) -> Vec<f64> {
    assert!(wi_max > 0.0, "wi_max must be positive");
    let ticks_max = (wi_max * 100.0).floor() as i64;
    let mut out = Vec::new();
    let mut t = 0i64;
    loop {
        let step = if t < 50 { 10 } else { 5 };
        if t + step > ticks_max {
            break;
        }
        t += step;
        out.push(t as f64 / 100.0);
    }
    if out.last().copied().unwrap_or(0.0) + 1e-12 < wi_max {
        out.push(wi_max);
    }
    out
}

/// One drag measurement.
#[derive(Debug, Clone)]
pub struct DragResult {
    pub wi: f64,
    pub k: f64,
    pub mesh_id: String,
    pub newton_iters: usize,
    pub seconds: f64,
}

/// Flat `key = value` config file: `#` comments, blank lines ignored,
/// later keys override earlier ones. Unknown keys are errors so typos
/// cannot silently fall back to defaults.
pub fn parse_config_text(text: &str, cfg: &mut BenchConfig) -> Result<(), BenchError> {
    let mut pairs = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(BenchError::Config(format!(
                "line {}: expected `key = value`, got `{raw}`",
                i + 1
            )));
        };
        pairs.insert(key.trim().to_string(), value.trim().to_string());
    }
    for (key, value) in pairs {
        apply_config_key(cfg, &key, &value)?;
    }
    Ok(())
}

pub fn load_config_file(path: &std::path::Path, cfg: &mut BenchConfig) -> Result<(), BenchError> {
    let text = std::fs::read_to_string(path)?;
    parse_config_text(&text, cfg)
}

fn apply_config_key(cfg: &mut BenchConfig, key: &str, value: &str) -> Result<(), BenchError> {
    let bad = |what: &str| BenchError::Config(format!("key `{key}`: invalid {what} `{value}`"));
    let num = |value: &str| value.parse::<f64>().map_err(|_| bad("number"));
    let int = |value: &str| value.parse::<usize>().map_err(|_| bad("integer"));
    let boolean = |value: &str| match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(bad("boolean")),
    };
    match key {
        "bench.r" => cfg.radius = num(value)?,
        "bench.ubar" => cfg.ubar = num(value)?,
        "bench.creeping" => cfg.creeping = boolean(value)?,
        "bench.rho" => cfg.rho = num(value)?,
        "bench.wi" => cfg.wi_schedule = parse_wi_schedule(value).ok_or_else(|| bad("schedule"))?,
        "bench.wake_samples" => cfg.wake_samples = int(value)?,
        "fluid.beta" => cfg.beta = num(value)?,
        "fluid.mu" => cfg.mu = num(value)?,
        "mesh.class" | "mesh.file" => cfg.mesh = MeshSelect::parse(value),
        "solver.backend" => {
            cfg.linear.backend = match value.to_ascii_lowercase().as_str() {
                "gmres" => Backend::Gmres,
                "direct" | "directlu" | "lu" => Backend::DirectLu,
                _ => return Err(bad("backend")),
            }
        }
        "solver.restart" => cfg.linear.restart = int(value)?,
        "solver.tol" => cfg.linear.tol = num(value)?,
        "solver.max_iter" => cfg.linear.max_iter = int(value)?,
        "solver.ilut_fill" => cfg.linear.ilut_fill = int(value)?,
        "solver.ilut_drop" => cfg.linear.ilut_drop = num(value)?,
        "newton.tol" => cfg.newton.abs_tol = num(value)?,
        "newton.max_iter" => cfg.newton.max_iter = int(value)?,
        "newton.line_search" => cfg.newton.line_search = boolean(value)?,
        "output.dir" => cfg.out_dir = PathBuf::from(value),
        _ => return Err(BenchError::Config(format!("unknown key `{key}`"))),
    }
    Ok(())
}

/// Schedule syntax: either `start:stop:step` (inclusive endpoints on the
/// step grid) or a comma-separated list of values.
pub fn parse_wi_schedule(s: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (start, stop, step) = (
            parts[0].trim().parse::<f64>().ok()?,
            parts[1].trim().parse::<f64>().ok()?,
            parts[2].trim().parse::<f64>().ok()?,
        );
        if step <= 0.0 || stop < start || start <= 0.0 {
            return None;
        }
        let n = ((stop - start) / step + 1.5).floor() as usize;
        let out: Vec<f64> = (0..n)
            .map(|i| start + step * i as f64)
            .filter(|&w| w <= stop + 1e-12)
            .collect();
        return if out.is_empty() { None } else { Some(out) };
    }
    let vals: Option<Vec<f64>> =
        s.split(',').map(|p| p.trim().parse::<f64>().ok()).collect();
    let vals = vals?;
    if vals.is_empty() || vals.iter().any(|&w| w <= 0.0) {
        return None;
    }
    Some(vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_coarse_then_fine() {
        let s = default_wi_schedule(0.8);
        let expect = [0.1, 0.2, 0.3, 0.4, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8];
        assert_eq!(s.len(), expect.len());
        for (a, b) in s.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let s = default_wi_schedule(0.3);
        assert_eq!(s, vec![0.1, 0.2, 0.3]);
        // Off-grid maximum appended as a fractional last step.
        let s = default_wi_schedule(0.62);
        assert!((s.last().unwrap() - 0.62).abs() < 1e-12);
        assert!((s[s.len() - 2] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn config_text_round_trip_and_unknown_keys() {
        let mut cfg = BenchConfig::default();
        parse_config_text(
            "# comment\n\
             fluid.beta = 0.5\n\
             bench.wi = 0.1:0.3:0.1\n\
             mesh.class = M2\n\
             solver.backend = direct\n\
             newton.max_iter = 12\n",
            &mut cfg,
        )
        .unwrap();
        assert_eq!(cfg.beta, 0.5);
        assert_eq!(cfg.wi_schedule.len(), 3);
        assert_eq!(cfg.mesh, MeshSelect::Class("M2".into()));
        assert_eq!(cfg.linear.backend, Backend::DirectLu);
        assert_eq!(cfg.newton.max_iter, 12);
        cfg.validate().unwrap();

        let err = parse_config_text("solver.bakend = gmres\n", &mut cfg).unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let mut cfg = BenchConfig { beta: 1.0, ..BenchConfig::default() };
        assert!(cfg.validate().is_err());
        cfg.beta = 0.59;
        cfg.wi_schedule = vec![0.3, 0.2];
        assert!(cfg.validate().is_err());
        cfg.wi_schedule = vec![0.1, 0.2];
        cfg.validate().unwrap();
        assert!((cfg.lambda_for(0.2) - 0.2).abs() < 1e-15);
        let p = cfg.fluid_params(0.5);
        assert!((p.mu_s - 0.59).abs() < 1e-15);
        assert!((p.mu_p - 0.41).abs() < 1e-15);
        assert_eq!(p.rho, 0.0);
    }

    #[test]
    fn schedule_syntax_variants() {
        let s = parse_wi_schedule("0.1:0.7:0.1").unwrap();
        assert_eq!(s.len(), 7);
        assert!((s[6] - 0.7).abs() < 1e-9);
        let s = parse_wi_schedule("0.25, 0.5").unwrap();
        assert_eq!(s, vec![0.25, 0.5]);
        assert!(parse_wi_schedule("0.5:0.1:0.1").is_none());
        assert!(parse_wi_schedule("nope").is_none());
    }
}
