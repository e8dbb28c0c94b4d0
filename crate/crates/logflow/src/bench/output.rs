//! Result files: CSV tables, Newton histories, legacy-VTK field snapshots,
//! and the comparison against the published benchmark drag values.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::bench::cylinder::WakeSample;
use crate::bench::{BenchError, DragResult};
use crate::constitutive::{polymer_stress, FluidParams};
use crate::fem::FieldState;
use crate::mesh::Mesh;
use crate::solver::NewtonReport;

/// Published drag coefficients for the benchmark's generated mesh classes,
/// used by `tables --compare`. Keyed by (mesh id, Wi).
pub const REFERENCE_DRAG: &[(&str, f64, f64)] = &[
    ("M1", 0.10, 130.3706),
    ("M1", 0.20, 126.6609),
    ("M1", 0.30, 123.2622),
    ("M1", 0.40, 120.6953),
    ("M1", 0.50, 118.9615),
    ("M1", 0.60, 117.9542),
    ("M1", 0.70, 117.5430),
    ("M1", 0.75, 117.5108),
    ("M1", 0.80, 117.5639),
    ("M1", 0.85, 117.6809),
    ("M1", 0.90, 117.8442),
    ("M2", 0.10, 130.3613),
    ("M2", 0.20, 126.6288),
    ("M2", 0.30, 123.2008),
    ("M2", 0.40, 120.6080),
    ("M2", 0.50, 118.8505),
    ("M2", 0.60, 117.8048),
    ("M2", 0.70, 117.3416),
    ("M2", 0.75, 117.2940),
    ("M2", 0.80, 117.3539),
    ("M2", 0.85, 117.5116),
    ("M2", 0.90, 117.7584),
    ("M3", 0.10, 130.3620),
    ("M3", 0.20, 126.6254),
    ("M3", 0.30, 123.1922),
    ("M3", 0.40, 120.5931),
    ("M3", 0.50, 118.8291),
    ("M3", 0.60, 117.7798),
    ("M3", 0.70, 117.3193),
    ("M3", 0.75, 117.2747),
    ("M3", 0.80, 117.3365),
    ("M3", 0.85, 117.4925),
    ("M3", 0.90, 117.7312),
];

pub fn reference_drag(mesh_id: &str, wi: f64) -> Option<f64> {
    REFERENCE_DRAG
        .iter()
        .find(|(m, w, _)| *m == mesh_id && (w - wi).abs() < 1e-9)
        .map(|&(_, _, k)| k)
}

pub fn write_drag_csv(path: &Path, results: &[DragResult]) -> Result<(), BenchError> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "wi,K,mesh,newton_iters,seconds")?;
    for r in results {
        writeln!(f, "{},{:.10},{},{},{:.3}", r.wi, r.k, r.mesh_id, r.newton_iters, r.seconds)?;
    }
    Ok(())
}

pub fn read_drag_csv(path: &Path) -> Result<Vec<DragResult>, BenchError> {
    let bad = |line: usize, what: &str| {
        BenchError::Config(format!("{}:{line}: malformed drag row ({what})", path.display()))
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || (i == 0 && t.starts_with("wi,")) {
            continue;
        }
        let parts: Vec<&str> = t.split(',').collect();
        if parts.len() != 5 {
            return Err(bad(i + 1, "expected 5 fields"));
        }
        out.push(DragResult {
            wi: parts[0].parse().map_err(|_| bad(i + 1, "wi"))?,
            k: parts[1].parse().map_err(|_| bad(i + 1, "K"))?,
            mesh_id: parts[2].to_string(),
            newton_iters: parts[3].parse().map_err(|_| bad(i + 1, "iters"))?,
            seconds: parts[4].parse().map_err(|_| bad(i + 1, "seconds"))?,
        });
    }
    Ok(out)
}

pub fn write_wake_csv(path: &Path, samples: &[WakeSample]) -> Result<(), BenchError> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "# s runs along the cylinder surface from the upstream stagnation")?;
    writeln!(f, "# point, then continues down the wake centerline: s = piR + (x - R).")?;
    writeln!(f, "s,x,t11")?;
    for w in samples {
        writeln!(f, "{:.8},{:.8},{:.10e}", w.s, w.x, w.t11)?;
    }
    Ok(())
}

pub fn write_newton_csv(path: &Path, report: &NewtonReport) -> Result<(), BenchError> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "iter,residual,linear_iters,step_scale")?;
    for (i, s) in report.steps.iter().enumerate() {
        writeln!(f, "{},{:.6e},{},{}", i, s.residual, s.linear_iters, s.step_scale)?;
    }
    writeln!(f, "{},{:.6e},,", report.steps.len(), report.final_residual)?;
    Ok(())
}

/// Legacy-ASCII VTK snapshot of a state. Each quadratic triangle is split
/// into its four corner/midside sub-triangles so any viewer can render it;
/// point data carries velocity, pressure, the log-state components, and the
/// polymeric normal stress.
pub fn write_vtk(
    path: &Path,
    mesh: &Mesh,
    state: &FieldState,
    params: &FluidParams,
) -> Result<(), BenchError> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "# vtk DataFile Version 3.0")?;
    writeln!(f, "stationary viscoelastic benchmark state")?;
    writeln!(f, "ASCII")?;
    writeln!(f, "DATASET UNSTRUCTURED_GRID")?;

    writeln!(f, "POINTS {} double", mesh.n_nodes())?;
    for p in &mesh.coords {
        writeln!(f, "{:.10e} {:.10e} 0.0", p.x, p.y)?;
    }

    let n_cells = 4 * mesh.n_elems();
    writeln!(f, "CELLS {} {}", n_cells, 4 * n_cells)?;
    for el in &mesh.elems {
        let [v0, v1, v2, m01, m12, m20] = *el;
        for tri in [[v0, m01, m20], [m01, v1, m12], [m20, m12, v2], [m01, m12, m20]] {
            writeln!(f, "3 {} {} {}", tri[0], tri[1], tri[2])?;
        }
    }
    writeln!(f, "CELL_TYPES {n_cells}")?;
    for _ in 0..n_cells {
        writeln!(f, "5")?;
    }

    writeln!(f, "POINT_DATA {}", mesh.n_nodes())?;
    writeln!(f, "VECTORS velocity double")?;
    for n in 0..mesh.n_nodes() {
        let u = state.u(n);
        writeln!(f, "{:.10e} {:.10e} 0.0", u.x, u.y)?;
    }
    let scalar = |f: &mut BufWriter<File>, name: &str, get: &dyn Fn(usize) -> f64| {
        writeln!(f, "SCALARS {name} double 1")?;
        writeln!(f, "LOOKUP_TABLE default")?;
        for n in 0..mesh.n_nodes() {
            writeln!(f, "{:.10e}", get(n))?;
        }
        Ok::<(), std::io::Error>(())
    };
    scalar(&mut f, "pressure", &|n| state.p(n))?;
    scalar(&mut f, "psi_xx", &|n| state.psi(n).xx)?;
    scalar(&mut f, "psi_xy", &|n| state.psi(n).xy)?;
    scalar(&mut f, "psi_yy", &|n| state.psi(n).yy)?;
    scalar(&mut f, "t11", &|n| polymer_stress(params, state.psi(n)).xx)?;
    Ok(())
}

/// Side-by-side table of computed drag against the published values for the
/// same mesh class, with absolute deviations.
pub fn compare_table(results: &[DragResult]) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(s, "{:>6} {:>6} {:>12} {:>12} {:>10}", "Wi", "mesh", "K", "reference", "diff");
    for r in results {
        match reference_drag(&r.mesh_id, r.wi) {
            Some(k_ref) => {
                let _ = writeln!(
                    s,
                    "{:>6.2} {:>6} {:>12.4} {:>12.4} {:>10.4}",
                    r.wi,
                    r.mesh_id,
                    r.k,
                    k_ref,
                    r.k - k_ref
                );
            }
            None => {
                let _ = writeln!(
                    s,
                    "{:>6.2} {:>6} {:>12.4} {:>12} {:>10}",
                    r.wi, r.mesh_id, r.k, "-", "-"
                );
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::NewtonStep;

    #[test]
    fn drag_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("drag.csv");
        let rows = vec![
            DragResult { wi: 0.1, k: 130.37, mesh_id: "M1".into(), newton_iters: 5, seconds: 12.5 },
            DragResult { wi: 0.2, k: 126.66, mesh_id: "M1".into(), newton_iters: 4, seconds: 9.25 },
        ];
        write_drag_csv(&path, &rows).unwrap();
        let back = read_drag_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].newton_iters, 4);
        assert!((back[0].k - 130.37).abs() < 1e-9);
        assert!((back[1].seconds - 9.25).abs() < 1e-9);

        std::fs::write(&path, "wi,K,mesh,newton_iters,seconds\n0.1,abc,M1,3,1.0\n").unwrap();
        assert!(read_drag_csv(&path).is_err());
    }

    #[test]
    fn comparison_table_lines_up_references() {
        let rows = vec![
            DragResult { wi: 0.1, k: 130.0, mesh_id: "M1".into(), newton_iters: 5, seconds: 1.0 },
            DragResult { wi: 0.33, k: 99.0, mesh_id: "M1".into(), newton_iters: 5, seconds: 1.0 },
        ];
        let table = compare_table(&rows);
        assert!(table.contains("130.3706"), "{table}");
        assert!(table.lines().nth(2).unwrap().contains('-'), "{table}");
        assert_eq!(reference_drag("M2", 0.75), Some(117.2940));
        assert_eq!(reference_drag("M9", 0.1), None);
    }

    #[test]
    fn vtk_and_history_files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = crate::mesh::gen::gen_channel_mesh(1.0, 0.5, 2, 2);
        let state = FieldState::zeros(mesh.n_nodes());
        let params = crate::constitutive::FluidParams {
            model: crate::constitutive::Model::OldroydB,
            rho: 0.0,
            mu_s: 0.59,
            mu_p: 0.41,
            lambda: 0.1,
        };
        let vtk = dir.path().join("state.vtk");
        write_vtk(&vtk, &mesh, &state, &params).unwrap();
        let text = std::fs::read_to_string(&vtk).unwrap();
        assert!(text.starts_with("# vtk DataFile"));
        assert!(text.contains(&format!("POINTS {} double", mesh.n_nodes())));
        assert!(text.contains(&format!("CELL_TYPES {}", 4 * mesh.n_elems())));
        assert!(text.contains("SCALARS t11 double 1"));

        let hist = dir.path().join("newton.csv");
        let report = NewtonReport {
            iterations: 1,
            final_residual: 1e-12,
            steps: vec![NewtonStep { residual: 1.0, linear_iters: 7, step_scale: 1.0 }],
        };
        write_newton_csv(&hist, &report).unwrap();
        let text = std::fs::read_to_string(&hist).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().starts_with("0,1.0"));
    }
}
