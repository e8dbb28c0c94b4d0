//! Command-line front end: kernel self-tests, channel verification, the
//! confined-cylinder drag sweep, and comparison tables.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use logflow::bench::{
    compare_table, default_wi_schedule, load_config_file, read_drag_csv, run_all_suites,
    run_channel_verification, run_cylinder, spd_violations, wake_profile, write_drag_csv,
    write_newton_csv, write_vtk, write_wake_csv, BenchConfig, ChannelOptions, MeshSelect,
};

#[derive(Parser)]
#[command(name = "logflow", version, about = "Stationary viscoelastic flow benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the constitutive-kernel self-test suites and print a pass/fail table
    Selftest,
    /// Verify the solver on a planar channel with an analytic solution
    Channel {
        /// Weissenberg numbers to test, comma separated
        #[arg(long, value_delimiter = ',')]
        wi: Option<Vec<f64>>,
        /// Elements along the channel on the coarse mesh
        #[arg(long)]
        nx: Option<usize>,
        /// Elements across the channel on the coarse mesh
        #[arg(long)]
        ny: Option<usize>,
    },
    /// Sweep the confined-cylinder benchmark up to a target Weissenberg number
    Cylinder {
        /// Final Weissenberg number of the continuation schedule
        #[arg(long = "wi-max")]
        wi_max: Option<f64>,
        /// Mesh class (M1 | M2 | M3) or a Gmsh 2.2 file path
        #[arg(long)]
        mesh: Option<String>,
        /// Directory for drag.csv, wake/history CSVs, and VTK snapshots
        #[arg(long)]
        out: Option<PathBuf>,
        /// Flat `key = value` settings file; command-line flags override it
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print drag results, optionally next to the published reference values
    Tables {
        /// Show the published drag values alongside the computed ones
        #[arg(long)]
        compare: bool,
        /// Directory holding drag.csv from a previous cylinder run
        #[arg(long, default_value = "out")]
        results: PathBuf,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Selftest => cmd_selftest(),
        Command::Channel { wi, nx, ny } => cmd_channel(wi, nx, ny),
        Command::Cylinder { wi_max, mesh, out, config } => {
            cmd_cylinder(wi_max, mesh, out, config)
        }
        Command::Tables { compare, results } => cmd_tables(compare, &results),
    }
}

fn fail(err: impl std::error::Error) -> ExitCode {
    eprintln!("error: {err}");
    let mut source = err.source();
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
    ExitCode::from(1)
}

fn cmd_selftest() -> ExitCode {
    let suites = run_all_suites();
    let mut ok = true;
    for s in &suites {
        println!("{}", s.line());
        ok &= s.pass();
    }
    if ok {
        println!("all {} suites passed", suites.len());
        ExitCode::SUCCESS
    } else {
        eprintln!("error: self-test failures");
        ExitCode::from(1)
    }
}

fn cmd_channel(wi: Option<Vec<f64>>, nx: Option<usize>, ny: Option<usize>) -> ExitCode {
    let mut opts = ChannelOptions::default();
    if let Some(wi) = wi {
        opts.wis = wi;
    }
    if let Some(nx) = nx {
        opts.nx = nx;
    }
    if let Some(ny) = ny {
        opts.ny = ny;
    }
    match run_channel_verification(&opts) {
        Ok(report) => {
            print!("{}", report.summary());
            ExitCode::SUCCESS
        }
        Err(err) => fail(err),
    }
}

fn cmd_cylinder(
    wi_max: Option<f64>,
    mesh: Option<String>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
) -> ExitCode {
    let mut cfg = BenchConfig::default();
    if let Some(path) = config {
        if !path.is_file() {
            eprintln!("error: config file not found: {}", path.display());
            return ExitCode::from(2);
        }
        if let Err(err) = load_config_file(&path, &mut cfg) {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    }
    if let Some(w) = wi_max {
        if !(w > 0.0) {
            eprintln!("error: --wi-max must be positive, got {w}");
            return ExitCode::from(2);
        }
        cfg.wi_schedule = default_wi_schedule(w);
    }
    if let Some(m) = mesh {
        cfg.mesh = MeshSelect::parse(&m);
    }
    if let Some(dir) = out {
        cfg.out_dir = dir;
    }
    if let MeshSelect::File(path) = &cfg.mesh {
        if !path.is_file() {
            eprintln!("error: mesh file not found: {}", path.display());
            return ExitCode::from(2);
        }
    }
    if let Err(err) = std::fs::create_dir_all(&cfg.out_dir) {
        eprintln!("error: cannot create {}: {err}", cfg.out_dir.display());
        return ExitCode::from(1);
    }

    let run = match run_cylinder(&cfg) {
        Ok(run) => run,
        Err(err) => return fail(err),
    };

    for r in &run.results {
        println!(
            "Wi={:<5} K = {:10.4}   ({} Newton iters, {:.1} s)",
            r.wi, r.k, r.newton_iters, r.seconds
        );
    }

    let write = || -> Result<(), logflow::bench::BenchError> {
        write_drag_csv(&cfg.out_dir.join("drag.csv"), &run.results)?;
        for (wi, state) in &run.states {
            let params = cfg.fluid_params(*wi);
            let spd = spd_violations(&run.mesh, state);
            if spd > 0 {
                eprintln!("warning: Wi={wi}: {spd} quadrature points left the SPD cone");
            }
            let wake = wake_profile(&run.mesh, state, &params, cfg.radius, cfg.wake_samples)?;
            write_wake_csv(&cfg.out_dir.join(format!("wake_{wi}.csv")), &wake)?;
            write_vtk(&cfg.out_dir.join(format!("state_{wi}.vtk")), &run.mesh, state, &params)?;
        }
        for (wi, report) in &run.reports {
            write_newton_csv(&cfg.out_dir.join(format!("newton_{wi}.csv")), report)?;
        }
        Ok(())
    };
    match write() {
        Ok(()) => {
            println!("results written to {}", cfg.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(err) => fail(err),
    }
}

fn cmd_tables(compare: bool, results: &std::path::Path) -> ExitCode {
    let path = results.join("drag.csv");
    if !path.is_file() {
        eprintln!("error: no drag table at {}", path.display());
        return ExitCode::from(2);
    }
    let rows = match read_drag_csv(&path) {
        Ok(rows) => rows,
        Err(err) => return fail(err),
    };
    if compare {
        print!("{}", compare_table(&rows));
    } else {
        println!("{:>6} {:>6} {:>12} {:>8} {:>8}", "Wi", "mesh", "K", "iters", "sec");
        for r in &rows {
            println!(
                "{:>6.2} {:>6} {:>12.4} {:>8} {:>8.1}",
                r.wi, r.mesh_id, r.k, r.newton_iters, r.seconds
            );
        }
    }
    ExitCode::SUCCESS
}
