//! `plurienv`: scenario-driven runs of the envelope engine.
//!
//! Exit codes: 0 success, 2 validation failure, 3 disc centered in the
//! singular set, 4 oracle ill-posed on the grid, 5 optimizer exhausted
//! without a feasible disc. `compare` additionally exits 1 when a gap
//! exceeds the scenario tolerance.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use plurienv_core::runner;
use plurienv_core::scenario::{DiscJson, Scenario, ScenarioFile};
use plurienv_core::{
    omega_functional, poisson_functional, riesz_area, riesz_boundary, ComplexVector, Error,
};

#[derive(Parser)]
#[command(name = "plurienv", version, about = "Disc-functional envelopes and their grid oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (JSON, schema plurienv/1).
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for result files; stdout only when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario points; inline JSON such as `[[[0.5, 0.0]]]`.
    #[arg(long)]
    points: Option<String>,
    /// Override the compare tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Suppress progress notes on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the disc functionals for one disc against a scenario.
    Functional {
        #[command(flatten)]
        common: CommonArgs,
        /// Disc JSON: a file path or an inline object.
        #[arg(long)]
        disc: String,
    },
    /// Envelope estimates at the scenario points (CSV).
    Envelope {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Grid oracle for the supremum side (CSV + metadata JSON).
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Re-run at doubled resolution and report the refinement delta.
        #[arg(long)]
        resume: bool,
    },
    /// Oracle vs optimizer summary; exits 0 only if every gap passes.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Envelope sweep across the scenario's smoothing scales (CSV).
    Mollify {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::SingularCenter => 3,
        Error::OracleIllPosed { .. } => 4,
        Error::NoFeasibleDisc => 5,
        _ => 2,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code_for(&e))
}

fn load_scenario(common: &CommonArgs) -> Result<Scenario, Error> {
    let text = std::fs::read_to_string(&common.scenario)
        .map_err(|e| Error::Scenario(format!("{}: {e}", common.scenario.display())))?;
    let mut file = ScenarioFile::from_json(&text)?;
    if let Some(seed) = common.seed {
        file.seed = seed;
    }
    if let Some(points) = &common.points {
        file.points = serde_json::from_str(points)
            .map_err(|e| Error::Scenario(format!("--points: {e}")))?;
    }
    if let Some(tol) = common.tolerance {
        file.compare_tolerance = plurienv_core::scenario::Dec(tol);
    }
    file.compile()
}

fn write_or_print(out: &Option<PathBuf>, file_name: &str, content: &str) -> Result<(), Error> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| Error::Scenario(format!("{}: {e}", dir.display())))?;
            let path = dir.join(file_name);
            std::fs::write(&path, content)
                .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn note(quiet: bool, msg: &str) {
    if !quiet {
        eprintln!("{msg}");
    }
}

fn disc_from_arg(arg: &str) -> Result<plurienv_core::AnalyticDisc, Error> {
    let text = if Path::new(arg).exists() {
        std::fs::read_to_string(arg).map_err(|e| Error::Scenario(format!("{arg}: {e}")))?
    } else {
        arg.to_string()
    };
    DiscJson::from_json(&text)?.to_disc()
}

fn cmd_functional(common: &CommonArgs, disc_arg: &str) -> Result<(), Error> {
    let s = load_scenario(common)?;
    let f = disc_from_arg(disc_arg)?;
    if f.dimension() != s.dom.dimension() {
        return Err(Error::DimensionMismatch { expected: s.dom.dimension(), got: f.dimension() });
    }
    let q = &s.optimizer.quadrature;
    let pf = poisson_functional(&s.weight, &f, q)?;
    let of = omega_functional(&s.omega, &s.weight, &f, q)?;
    let mut lines = String::new();
    lines.push_str(&format!("scenario: {}\n", s.name));
    lines.push_str(&format!(
        "disc: kind={:?} degree={} radius={}\n",
        f.kind(),
        f.degree(),
        f.definition_radius()
    ));
    lines.push_str(&format!(
        "poisson_functional = {} (rejected {}/{}, reliable {})\n",
        pf.value, pf.n_rejected_boundary_nodes, pf.quadrature_used.n_circle, pf.reliable
    ));
    lines.push_str(&format!(
        "omega_functional   = {} (rejected {}/{}, reliable {})\n",
        of.value, of.n_rejected_boundary_nodes, of.quadrature_used.n_circle, of.reliable
    ));
    for (label, psi) in [("psi1", s.omega.psi1()), ("psi2", s.omega.psi2())] {
        let b = riesz_boundary(psi, &f, q)?;
        let line = match riesz_area(psi, &f, q) {
            Ok(a) => {
                let diff = b.value.finite().map(|bv| (a - bv).abs());
                format!(
                    "riesz[{label}]: boundary = {} area = {} |diff| = {}\n",
                    b.value,
                    a,
                    diff.map_or("n/a".to_string(), |d| format!("{d:.3e}"))
                )
            }
            Err(e) => format!("riesz[{label}]: boundary = {} area route: {e}\n", b.value),
        };
        lines.push_str(&line);
    }
    print!("{lines}");
    Ok(())
}

fn cmd_envelope(common: &CommonArgs) -> Result<(), Error> {
    let s = load_scenario(common)?;
    note(common.quiet, &format!("envelope: {} points, seed {}", s.points.len(), s.seed));
    let rows = runner::run_envelope(&s);
    let csv = output::envelope_csv(s.dom.dimension(), &rows);
    write_or_print(&common.out, "envelope.csv", &csv)?;
    // surface a singular-center or no-feasible-disc failure in the exit code
    for (_, r) in &rows {
        if let Err(e @ (Error::SingularCenter | Error::NoFeasibleDisc)) = r {
            return Err(match e {
                Error::SingularCenter => Error::SingularCenter,
                _ => Error::NoFeasibleDisc,
            });
        }
    }
    Ok(())
}

fn cmd_oracle(common: &CommonArgs, resume: bool) -> Result<(), Error> {
    let mut s = load_scenario(common)?;
    note(common.quiet, &format!("oracle: resolution {}", s.oracle.resolution));
    let coarse = runner::run_oracle(&s)?;
    let (grid, refinement_delta) = if resume {
        s.oracle.resolution *= 2;
        note(common.quiet, &format!("oracle resume: resolution {}", s.oracle.resolution));
        let fine = runner::run_oracle(&s)?;
        let mut delta: f64 = 0.0;
        for (p, v) in coarse.interior_nodes() {
            delta = delta.max((fine.value_at(&p)? - v).abs());
        }
        (fine, Some(delta))
    } else {
        (coarse, None)
    };
    let mut extra = vec![
        ("scenario", serde_json::json!(s.name)),
        ("rho_spacings", serde_json::json!(s.oracle.rho_spacings)),
        ("n_dirs", serde_json::json!(s.oracle.n_dirs)),
        ("tol", serde_json::json!(s.oracle.tol)),
    ];
    if let Some(d) = refinement_delta {
        extra.push(("refinement_delta", serde_json::json!(d)));
    }
    let meta = grid.metadata_json(&extra);
    let meta_text = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
    match &common.out {
        Some(_) => {
            write_or_print(&common.out, "oracle.csv", &grid.to_csv())?;
            write_or_print(&common.out, "oracle_meta.json", &meta_text)?;
        }
        None => print!("{meta_text}"),
    }
    Ok(())
}

fn cmd_compare(common: &CommonArgs) -> Result<bool, Error> {
    let s = load_scenario(common)?;
    note(common.quiet, &format!("compare: tolerance {}", s.compare_tolerance));
    let report = runner::run_compare(&s)?;
    print!("{}", output::compare_table(&report));
    if let Some(dir) = &common.out {
        let csv = output::compare_csv(s.dom.dimension(), &report);
        write_or_print(&Some(dir.clone()), "compare.csv", &csv)?;
    }
    Ok(report.all_pass)
}

fn cmd_mollify(common: &CommonArgs) -> Result<(), Error> {
    let s = load_scenario(common)?;
    for &delta in &s.mollifier_deltas {
        if delta >= s.dom.inradius() {
            return Err(Error::Scenario(format!(
                "delta {delta} is not below the domain inradius {}",
                s.dom.inradius()
            )));
        }
    }
    note(common.quiet, &format!("mollify: {} deltas", s.mollifier_deltas.len()));
    let rows: Vec<(ComplexVector, Result<_, Error>)> = if s.mollifier_deltas.is_empty() {
        Vec::new()
    } else {
        runner::run_mollify(&s)
    };
    let csv = output::mollify_csv(s.dom.dimension(), &rows);
    write_or_print(&common.out, "mollify.csv", &csv)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Functional { common, disc } => match cmd_functional(common, disc) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Command::Envelope { common } => match cmd_envelope(common) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Command::Oracle { common, resume } => match cmd_oracle(common, *resume) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Command::Compare { common } => match cmd_compare(common) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::FAILURE,
            Err(e) => fail(e),
        },
        Command::Mollify { common } => match cmd_mollify(common) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
    }
}
