use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cone_descent::harness::{self, HarnessError, Operation, OutputFormat, Problem, RunOptions};
use log::{error, info};

/// Cone-ordered steepest descent and envelope regularity analysis.
#[derive(Debug, Parser)]
#[command(name = "cone-descent", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iterate the steepest-descent direction to a critical point.
    Solve(RunArgs),
    /// Semicontinuity and c-regularity analysis of the fiber family at `analysis.point`.
    Regularity(RunArgs),
    /// Tabulate the variational gauge along one parameter axis.
    GaugeScan(RunArgs),
    /// Sensitivity of the descent direction to perturbations of (a, s, alpha).
    ProbeContinuity(RunArgs),
    /// List the bundled fixtures, optionally writing them out as JSON files.
    Catalog {
        #[arg(long, value_name = "DIR")]
        export: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Problem file, or `fixture:NAME` for a bundled fixture.
    #[arg(long, value_name = "PATH")]
    problem: String,
    #[arg(long, value_name = "PATH", default_value = "./out")]
    out: PathBuf,
    #[arg(long, value_name = "TOL", allow_hyphen_values = true)]
    tol_crit: Option<f64>,
    #[arg(long, value_name = "TOL", allow_hyphen_values = true)]
    tol_haus: Option<f64>,
    #[arg(long, value_name = "TOL", allow_hyphen_values = true)]
    tol_env: Option<f64>,
    #[arg(long, value_name = "U64", default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value = "both")]
    format: Format,
}

fn load(spec: &str) -> Result<Problem, HarnessError> {
    match spec.strip_prefix("fixture:") {
        Some(name) if !Path::new(spec).exists() => harness::load_fixture(name),
        _ => harness::load_problem(Path::new(spec)),
    }
}

fn execute(op: Operation, args: &RunArgs) -> Result<i32, HarnessError> {
    let problem = load(&args.problem)?;
    let opts = RunOptions {
        tol_crit: args.tol_crit,
        tol_haus: args.tol_haus,
        tol_env: args.tol_env,
        seed: Some(args.seed),
    };
    let report = harness::run(&problem, op, &opts)?;
    let format = match args.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
        Format::Both => OutputFormat::Both,
    };
    for path in harness::write_report(&report, &args.out, format)? {
        println!("{}", path.display());
    }
    if report.exit_code != 0 {
        error!("{} finished with an analysis failure; see the summary", op.as_str());
    }
    Ok(report.exit_code)
}

fn catalog(export: Option<&Path>) -> Result<i32, HarnessError> {
    if let Some(dir) = export {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
    }
    for f in harness::catalog() {
        println!("{:<20} {}", f.name, f.description);
        if let Some(dir) = export {
            let path = dir.join(format!("{}.json", f.name));
            std::fs::write(&path, f.source).map_err(|e| HarnessError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            info!("wrote {}", path.display());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONE_DESCENT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => execute(Operation::Solve, a),
        Command::Regularity(a) => execute(Operation::Regularity, a),
        Command::GaugeScan(a) => execute(Operation::GaugeScan, a),
        Command::ProbeContinuity(a) => execute(Operation::ProbeContinuity, a),
        Command::Catalog { export } => catalog(export.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
