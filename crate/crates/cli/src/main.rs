use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use laxmilgram::fem1d;
use laxmilgram::json;
use laxmilgram::laxmilgram::{galerkin_solve, solve, GalerkinOptions, ProblemSpec, SolveOptions};
use laxmilgram::operators::{dual_norm, riesz, riesz_constructive, LinearForm};
use laxmilgram::projection::{characterization_residual, decompose, project_minseq, Subspace};
use laxmilgram::space::{matrix_from_rows, HilbertSpace, Vector};
use laxmilgram::suite;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "laxmilgram", version, about = "Coercive variational problems by contraction iteration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the randomized invariant suite and report pass/fail counts.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        io: Io,
    },
    /// Solve a problem file by contraction iteration.
    Solve {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Step size; defaults to alpha / C^2.
        #[arg(long)]
        rho: Option<f64>,
        /// Iteration budget; derived from the a priori bound when omitted.
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Galerkin solve on the subspace spanned by the problem's "basis".
    Galerkin {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        cea_candidates: usize,
    },
    /// Riesz representative of a linear form, by direct solve and by construction.
    Riesz {
        #[command(flatten)]
        io: Io,
    },
    /// Orthogonal projection onto a subspace, by normal equations and by minimizing sequence.
    Project {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10_000_000)]
        step_budget: usize,
    },
    /// Convergence table for a manufactured 1D problem, as CSV.
    Poisson {
        #[arg(long = "case")]
        case_id: String,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Io {
    /// Input file; standard input when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failure classes, mapped onto exit codes.
enum Failure {
    /// Malformed or invalid input: exit 2.
    Input(String),
    /// A check or a solver budget failed: exit 1.
    Property(String),
}

impl From<laxmilgram::Error> for Failure {
    fn from(e: laxmilgram::Error) -> Self {
        match e {
            laxmilgram::Error::MaxIterationsExceeded { .. } | laxmilgram::Error::BudgetExceeded { .. } => {
                Failure::Property(e.to_string())
            }
            other => Failure::Input(other.to_string()),
        }
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String, Failure> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| Failure::Input(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Input(format!("malformed input: {e}")))
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    let result = match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().write_all(text.as_bytes()),
    };
    result.map_err(|e| Failure::Input(format!("cannot write output: {e}")))
}

fn write_json<T: Serialize>(path: &Option<PathBuf>, value: &T) -> Result<(), Failure> {
    let mut text = json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
    text.push('\n');
    write_output(path, &text)
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Input(format!("tolerance must be positive, got {tol}")))
    }
}

#[derive(Deserialize)]
struct GalerkinInput {
    #[serde(flatten)]
    problem: ProblemSpec,
    basis: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RieszInput {
    gram: Vec<Vec<f64>>,
    f: Vec<f64>,
}

#[derive(Serialize)]
struct RieszOutput {
    riesz: Vector,
    riesz_constructive: Vector,
    dual_norm: f64,
    riesz_norm: f64,
    isometry_gap: f64,
    constructive_deviation: f64,
}

#[derive(Deserialize)]
struct ProjectInput {
    gram: Vec<Vec<f64>>,
    basis: Vec<Vec<f64>>,
    u: Vec<f64>,
}

#[derive(Serialize)]
struct ProjectOutput {
    projection: Vector,
    complement: Vector,
    distance: f64,
    characterization_residual: f64,
    minseq_limit: Vector,
    minseq_delta: f64,
    minseq_steps: usize,
    minseq_deviation: f64,
}

#[derive(Serialize)]
struct CheckOutput {
    seed: u64,
    passed: usize,
    failed: usize,
    checks: Vec<suite::CheckOutcome>,
}

fn basis_vectors(space: &HilbertSpace, rows: &[Vec<f64>]) -> Result<Vec<Vector>, Failure> {
    if rows.is_empty() {
        return Err(Failure::Input("basis must contain at least one vector".into()));
    }
    let out: Vec<Vector> = rows.iter().map(|v| Vector::from_vec(v.clone())).collect();
    for v in &out {
        space.check_dim(v)?;
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Check { seed, io } => {
            let checks = suite::run(seed);
            let failed = checks.iter().filter(|c| !c.passed()).count();
            for c in &checks {
                eprintln!(
                    "{} {:<36} trials={:<6} failures={}",
                    if c.passed() { "PASS" } else { "FAIL" },
                    c.name,
                    c.trials,
                    c.failures
                );
            }
            eprintln!("{} passed, {} failed", checks.len() - failed, failed);
            write_json(&io.output, &CheckOutput { seed, passed: checks.len() - failed, failed, checks })?;
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Solve { io, tol, rho, max_iter } => {
            check_tol(tol)?;
            let problem = parse::<ProblemSpec>(&read_input(&io.input)?)?.into_problem()?;
            let report = solve(&problem, &SolveOptions { rho, tol, max_iter, ..SolveOptions::default() })?;
            write_json(&io.output, &report)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Galerkin { io, tol, seed, cea_candidates } => {
            check_tol(tol)?;
            let input = parse::<GalerkinInput>(&read_input(&io.input)?)?;
            let problem = input.problem.into_problem()?;
            let basis = basis_vectors(&problem.space, &input.basis)?;
            let sub = Subspace::from_vectors(&problem.space, &basis)?;
            let report = galerkin_solve(&problem, &sub, &GalerkinOptions { cea_candidates, seed, rel_tol: tol })?;
            write_json(&io.output, &report)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Riesz { io } => {
            let input = parse::<RieszInput>(&read_input(&io.input)?)?;
            let space = HilbertSpace::new(matrix_from_rows(&input.gram)?)?;
            let form = LinearForm::from_vec(input.f);
            let direct = riesz(&space, &form)?;
            let built = riesz_constructive(&space, &form)?;
            let dn = dual_norm(&space, &form)?;
            let rn = space.norm(&direct)?;
            let out = RieszOutput {
                constructive_deviation: space.distance(&direct, &built)?,
                riesz: direct,
                riesz_constructive: built,
                dual_norm: dn,
                riesz_norm: rn,
                isometry_gap: (rn - dn).abs(),
            };
            write_json(&io.output, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Project { io, tol, step_budget } => {
            check_tol(tol)?;
            let input = parse::<ProjectInput>(&read_input(&io.input)?)?;
            let space = HilbertSpace::new(matrix_from_rows(&input.gram)?)?;
            let basis = basis_vectors(&space, &input.basis)?;
            let sub = Subspace::from_vectors(&space, &basis)?;
            let u = Vector::from_vec(input.u);
            space.check_dim(&u)?;
            let (projection, complement) = decompose(&sub, &u)?;
            let seq = project_minseq(&sub, &u, tol, step_budget)?;
            let out = ProjectOutput {
                distance: space.norm(&complement)?,
                characterization_residual: characterization_residual(&sub, &u, &projection)?,
                minseq_deviation: space.distance(&seq.limit, &projection)?,
                minseq_steps: seq.iterates.len() - 1,
                minseq_delta: seq.delta,
                minseq_limit: seq.limit,
                projection,
                complement,
            };
            write_json(&io.output, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Poisson { case_id, levels, beta, c, output } => {
            let table = fem1d::convergence_study(&case_id, &levels, beta, c)?;
            write_output(&output, &table.to_csv())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Property(msg)) => {
            eprintln!("failure: {msg}");
            ExitCode::from(1)
        }
    }
}
