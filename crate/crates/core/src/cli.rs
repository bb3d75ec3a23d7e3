//! The `qmpb` command line: `bound`, `oracle`, `gen`, `check`.
//!
//! Exit codes: 0 success, 1 invalid input, 2 usage or kind mismatch,
//! 3 internal numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{
    applicable_pure_bound, chain_bound, mixed_state_bound, pure_tripartite_bound, single_party_bound, BoundReport,
    InstanceKind, QmpInstance,
};
use crate::error::{Error, Violation};
use crate::instances::{builtin, load, random_instance, save};
use crate::oracle::{dykstra_feasibility, pure_solution_search, verify_against_bound, OracleConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_INPUT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotAChain(_) | Error::NotSingleParty(_) | Error::SupportMismatch(_) | Error::UnknownBuiltin(_) => {
            EXIT_USAGE
        }
        Error::ConvergenceFailure | Error::InnerConvergenceFailure(_) | Error::Numerical(_) => EXIT_NUMERICAL,
        _ => EXIT_INVALID_INPUT,
    }
}

#[derive(Debug, Parser)]
#[command(name = "qmpb", version, about = "Entropic bounds and numerical oracles for the quantum marginal problem")]
pub struct Cli {
    /// Worker threads for the oracle's restarts (default: available parallelism).
    #[arg(long, global = true, env = "QMPB_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate entropic upper bounds on the number of orthogonal solutions.
    Bound {
        path: PathBuf,
        #[arg(long, value_enum)]
        formula: Option<FormulaSelector>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the feasibility oracle and the pure-solution search, and check them against the bound.
    Oracle {
        path: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write an instance file, either a builtin or marginals of a random joint state.
    Gen {
        /// singlet_monogamy, maximally_mixed_qubits, ghz_chain, product_pure, haar_unique(SEED)
        #[arg(long, conflicts_with_all = ["kind", "dims", "rank"])]
        builtin: Option<String>,
        #[arg(long, value_enum, default_value = "chain")]
        kind: GenKind,
        /// Local dimensions, e.g. `2,2,2`.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Rank of the Ginibre joint state (default: full rank).
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Validate an instance file.
    Check {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Machine-readable JSON on stdout.
    #[arg(long)]
    pub json: bool,
    /// Also write the JSON report to this path.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long = "max-iter", default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

impl SearchArgs {
    pub fn config(&self) -> OracleConfig {
        OracleConfig {
            max_iterations: self.max_iter,
            residual_tol: self.tol,
            restarts: self.restarts,
            seed: self.seed,
            ..OracleConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormulaSelector {
    Pure,
    Chain,
    Single,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Chain,
    #[value(name = "single_party", alias = "single")]
    SingleParty,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EntropyTermRecord {
    pub support: Vec<String>,
    pub entropy_bits: f64,
    pub coefficient: i32,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BoundRecord {
    pub formula: String,
    pub exponent_bits: f64,
    pub bound_value: f64,
    pub m_max: u64,
    pub entropy_terms: Vec<EntropyTermRecord>,
}

impl From<&BoundReport> for BoundRecord {
    fn from(r: &BoundReport) -> Self {
        BoundRecord {
            formula: r.formula.as_str().to_string(),
            exponent_bits: r.exponent_bits,
            bound_value: r.bound_value,
            m_max: r.m_max,
            entropy_terms: r
                .entropy_terms
                .iter()
                .map(|t| EntropyTermRecord {
                    support: t.support.clone(),
                    entropy_bits: t.entropy_bits,
                    coefficient: t.coefficient,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct OracleSummary {
    pub seed: u64,
    pub restarts: usize,
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub feasibility_status: String,
    pub feasibility_residual: f64,
    pub feasibility_iterations: usize,
    pub solutions_found: usize,
    pub solution_residuals: Vec<f64>,
    pub max_pairwise_overlap: f64,
    pub best_rejected_objective: Option<f64>,
}

/// Timing and other run-to-run varying data, kept apart from the stable fields.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Volatile {
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub instance_path: String,
    pub instance_kind: String,
    pub bounds: Vec<BoundRecord>,
    pub oracle: Option<OracleSummary>,
    pub theorem_check: Option<bool>,
    pub volatile: Volatile,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn is_tripartite_chain(instance: &QmpInstance) -> bool {
    instance.kind() == InstanceKind::Chain && instance.marginals().len() == 2
}

fn tripartite_pair(instance: &QmpInstance, formula: &str) -> crate::Result<(usize, usize)> {
    if !is_tripartite_chain(instance) {
        return Err(Error::NotAChain(format!(
            "`{formula}` needs a three-party chain, instance is {} with {} marginals",
            instance.kind(),
            instance.marginals().len()
        )));
    }
    Ok((0, 1))
}

/// Bounds selected by `selector`, or the default set for the instance kind.
pub fn evaluate_bounds(instance: &QmpInstance, selector: Option<FormulaSelector>) -> crate::Result<Vec<BoundReport>> {
    let ms = instance.marginals();
    match selector {
        Some(FormulaSelector::Pure) => {
            let (a, b) = tripartite_pair(instance, "pure")?;
            Ok(vec![pure_tripartite_bound(&ms[a].state, &ms[b].state)?])
        }
        Some(FormulaSelector::Mixed) => {
            let (a, b) = tripartite_pair(instance, "mixed")?;
            Ok(vec![mixed_state_bound(&ms[a].state, &ms[b].state)?])
        }
        Some(FormulaSelector::Chain) => Ok(vec![chain_bound(instance)?]),
        Some(FormulaSelector::Single) => Ok(vec![single_party_bound(instance)?]),
        None => match instance.kind() {
            InstanceKind::Chain if is_tripartite_chain(instance) => Ok(vec![
                pure_tripartite_bound(&ms[0].state, &ms[1].state)?,
                mixed_state_bound(&ms[0].state, &ms[1].state)?,
            ]),
            InstanceKind::Chain => Ok(vec![chain_bound(instance)?]),
            InstanceKind::SingleParty => Ok(vec![single_party_bound(instance)?]),
            InstanceKind::General => Err(Error::NotAChain(
                "no entropic bound is defined for general support patterns".into(),
            )),
        },
    }
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

pub fn cmd_bound(path: &Path, selector: Option<FormulaSelector>) -> crate::Result<RunReport> {
    let start = Instant::now();
    let instance = load(path)?;
    let bounds = evaluate_bounds(&instance, selector)?;
    Ok(RunReport {
        command: "bound".into(),
        instance_path: path.display().to_string(),
        instance_kind: instance.kind().as_str().into(),
        bounds: bounds.iter().map(BoundRecord::from).collect(),
        oracle: None,
        theorem_check: None,
        volatile: Volatile { wall_time_ms: elapsed_ms(start) },
    })
}

pub fn cmd_oracle(path: &Path, config: &OracleConfig) -> crate::Result<RunReport> {
    let start = Instant::now();
    let instance = load(path)?;
    let feasibility = dykstra_feasibility(&instance, config)?;
    let solutions = pure_solution_search(&instance, config)?;
    let (bounds, theorem_check) = match instance.kind() {
        InstanceKind::General => (Vec::new(), None),
        _ => {
            let report = applicable_pure_bound(&instance)?;
            let ok = verify_against_bound(&instance, &solutions, &report)?;
            (vec![BoundRecord::from(&report)], Some(ok))
        }
    };
    Ok(RunReport {
        command: "oracle".into(),
        instance_path: path.display().to_string(),
        instance_kind: instance.kind().as_str().into(),
        bounds,
        oracle: Some(OracleSummary {
            seed: config.seed,
            restarts: config.restarts,
            max_iterations: config.max_iterations,
            residual_tol: config.residual_tol,
            feasibility_status: feasibility.status.as_str().into(),
            feasibility_residual: feasibility.residual,
            feasibility_iterations: feasibility.iterations_used,
            solutions_found: solutions.len(),
            solution_residuals: solutions.per_state_residuals.clone(),
            max_pairwise_overlap: solutions.max_overlap(),
            best_rejected_objective: solutions.best_rejected_objective,
        }),
        theorem_check,
        volatile: Volatile { wall_time_ms: elapsed_ms(start) },
    })
}

/// Where `gen` takes its instance from.
#[derive(Debug, Clone, PartialEq)]
pub enum GenSource {
    Builtin(String),
    Random { kind: InstanceKind, dims: Vec<usize>, rank: Option<usize>, seed: u64 },
}

pub fn cmd_gen(source: &GenSource, output: &Path) -> crate::Result<QmpInstance> {
    let instance = match source {
        GenSource::Builtin(name) => builtin(name)?,
        GenSource::Random { kind, dims, rank, seed } => random_instance(dims, *kind, *rank, *seed)?,
    };
    save(&instance, output)?;
    Ok(instance)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckReport {
    pub path: String,
    pub valid: bool,
    pub violations: Vec<String>,
}

pub fn cmd_check(path: &Path) -> CheckReport {
    let violations = match load(path) {
        Ok(_) => Vec::new(),
        Err(Error::Validation(vs)) => vs.iter().map(Violation::to_string).collect(),
        Err(e) => vec![e.to_string()],
    };
    CheckReport {
        path: path.display().to_string(),
        valid: violations.is_empty(),
        violations,
    }
}

fn print_bounds(report: &RunReport) {
    println!("instance: {} ({})", report.instance_path, report.instance_kind);
    println!("{:<16} {:>12} {:>14} {:>8}", "formula", "exponent", "bound", "m_max");
    for b in &report.bounds {
        println!("{:<16} {:>12.6} {:>14.6} {:>8}", b.formula, b.exponent_bits, b.bound_value, b.m_max);
        for t in &b.entropy_terms {
            println!("    {:+} x S({}) = {:.6}", t.coefficient, t.support.join(","), t.entropy_bits);
        }
    }
}

fn print_oracle(report: &RunReport) {
    print_bounds(report);
    if let Some(o) = &report.oracle {
        println!(
            "feasibility: {} (residual {:.3e}, {} iterations)",
            o.feasibility_status, o.feasibility_residual, o.feasibility_iterations
        );
        println!("pure solutions found: {}", o.solutions_found);
        for (i, r) in o.solution_residuals.iter().enumerate() {
            println!("    #{i}: residual {r:.3e}");
        }
        if let Some(j) = o.best_rejected_objective {
            println!("best objective without acceptance: {j:.6e}");
        }
    }
    match report.theorem_check {
        Some(true) => println!("theorem check: ok"),
        Some(false) => println!("theorem check: VIOLATED"),
        None => println!("theorem check: not applicable"),
    }
}

fn emit(report: &RunReport, output: &OutputArgs, human: fn(&RunReport)) -> crate::Result<()> {
    if output.json {
        println!("{}", report.to_json());
    } else {
        human(report);
    }
    if let Some(path) = &output.output {
        std::fs::write(path, report.to_json() + "\n")?;
    }
    Ok(())
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> crate::Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn dispatch(cli: Cli) -> crate::Result<i32> {
    match cli.command {
        Command::Bound { path, formula, output } => {
            let report = cmd_bound(&path, formula)?;
            emit(&report, &output, print_bounds)?;
            Ok(EXIT_OK)
        }
        Command::Oracle { path, search, output } => {
            let config = search.config();
            let report = with_threads(cli.threads, || cmd_oracle(&path, &config))??;
            emit(&report, &output, print_oracle)?;
            Ok(EXIT_OK)
        }
        Command::Gen { builtin, kind, dims, rank, seed, output } => {
            let source = match (builtin, dims) {
                (Some(name), _) => GenSource::Builtin(name),
                (None, Some(dims)) => GenSource::Random {
                    kind: match kind {
                        GenKind::Chain => InstanceKind::Chain,
                        GenKind::SingleParty => InstanceKind::SingleParty,
                    },
                    dims,
                    rank,
                    seed,
                },
                (None, None) => {
                    eprintln!("error: gen needs --builtin NAME or --dims D1,D2,...");
                    return Ok(EXIT_USAGE);
                }
            };
            let instance = cmd_gen(&source, &output)?;
            println!(
                "wrote {} ({}, {} marginals)",
                output.display(),
                instance.kind(),
                instance.marginals().len()
            );
            Ok(EXIT_OK)
        }
        Command::Check { path, json } => {
            let report = cmd_check(&path);
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else if report.valid {
                println!("ok: {}", report.path);
            } else {
                for v in &report.violations {
                    println!("{}: {v}", report.path);
                }
            }
            Ok(if report.valid { EXIT_OK } else { EXIT_INVALID_INPUT })
        }
    }
}

/// Parses `args` (including the program name), runs the command, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main_with_args() -> i32 {
    run(std::env::args_os())
}
