use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sawbound::automaton::{build, BuildError, StateGraph};
use sawbound::persist::{load_graph, save_graph, PersistError};
use sawbound::report::{ablation_csv, ablation_features, run, solve_graph, Report, RunConfig};
use sawbound::verify::{erasure_exactness, never_undercount, soundness_violations};
use sawbound::Features;

const THREADS_ENV: &str = "SAW_BOUND_THREADS";

#[derive(Parser)]
#[command(
    name = "saw-bound",
    version,
    about = "Upper bounds on the square-lattice connective constant"
)]
struct Cli {
    /// Worker threads (overridden by SAW_BOUND_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the automaton and write it to a graph file.
    Build {
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the certified bound for a graph file or a fresh build.
    Solve {
        #[arg(long, conflicts_with = "k")]
        graph: Option<PathBuf>,
        #[command(flatten)]
        build: OptionalBuild,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare the allowance and two-pass combinations at one cutoff.
    Ablate {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        staged_children: bool,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exhaustively check candidate soundness and walk acceptance.
    Verify {
        #[command(flatten)]
        build: BuildArgs,
        /// Length of the walks followed through the automaton.
        #[arg(long, default_value_t = 12)]
        n: usize,
    },
}

#[derive(Args)]
struct Toggles {
    #[arg(long)]
    no_line_like: bool,
    #[arg(long)]
    no_lacking_simpl: bool,
    #[arg(long)]
    no_two_pass: bool,
    #[arg(long)]
    staged_children: bool,
    #[arg(long)]
    no_small_bridges: bool,
    #[arg(long)]
    no_large_bridges: bool,
    #[arg(long)]
    no_small_loops: bool,
    #[arg(long)]
    no_planar_a: bool,
    #[arg(long)]
    no_planar_b: bool,
}

impl Toggles {
    fn features(&self) -> Features {
        Features {
            line_like: !self.no_line_like,
            lacking_simpl: !self.no_lacking_simpl,
            small_bridges: !self.no_small_bridges,
            large_bridges: !self.no_large_bridges,
            small_loops: !self.no_small_loops,
            two_pass: !self.no_two_pass,
            staged_children: self.staged_children,
            planar_a: !self.no_planar_a,
            planar_b: !self.no_planar_b,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Loop cutoff (even, 4..=40).
    #[arg(long)]
    k: u32,
    #[command(flatten)]
    toggles: Toggles,
}

#[derive(Args)]
struct OptionalBuild {
    #[arg(long, required_unless_present = "graph")]
    k: Option<u32>,
    #[command(flatten)]
    toggles: Toggles,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 50)]
    rounds: usize,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also write the report as JSON to this path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

enum Failure {
    Usage(String),
    Io(String),
    Verification(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Internal(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
            Failure::Verification(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m)
            | Failure::Io(m)
            | Failure::Verification(m)
            | Failure::Internal(m) => m,
        }
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::BadK(_) => Failure::Usage(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<PersistError> for Failure {
    fn from(e: PersistError) -> Self {
        Failure::Io(e.to_string())
    }
}

fn config(k: u32, features: Features, solver: &SolverArgs) -> Result<RunConfig, Failure> {
    let c = RunConfig {
        tol: solver.tol,
        max_iter: solver.max_iter,
        rounds: solver.rounds,
        ..RunConfig::new(k, features)
    };
    c.validate().map_err(Failure::Usage)?;
    Ok(c)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn print_reports(reports: &[Report], output: &OutputArgs) -> Result<(), Failure> {
    match output.format {
        Format::Json => {
            let text = if reports.len() == 1 {
                serde_json::to_string_pretty(&reports[0])
            } else {
                serde_json::to_string_pretty(reports)
            };
            println!("{}", text.map_err(|e| Failure::Internal(e.to_string()))?);
        }
        Format::Text => {
            for r in reports {
                println!("{}", r.to_text());
            }
        }
        Format::Csv => print!("{}", ablation_csv(reports)),
    }
    if let Some(path) = &output.report {
        if reports.len() == 1 {
            write_json(path, &reports[0])?;
        } else {
            write_json(path, &reports)?;
        }
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Build { build: args, out } => {
            let started = Instant::now();
            let g = build(args.k, &args.toggles.features())?;
            let size = save_graph(&g, &out)?;
            println!(
                "k={} states={} transitions={} bytes={} seconds={:.2}",
                g.k,
                g.len(),
                g.transitions(),
                size,
                started.elapsed().as_secs_f64()
            );
        }
        Command::Solve {
            graph,
            build: args,
            solver,
            output,
        } => {
            let report = match graph {
                Some(path) => {
                    let started = Instant::now();
                    let g: StateGraph = load_graph(&path)?;
                    let c = config(g.k, g.features, &solver)?;
                    solve_graph(&g, &c, 0.0, started)
                }
                None => {
                    let k = args.k.expect("clap requires k without a graph");
                    run(&config(k, args.toggles.features(), &solver)?)?
                }
            };
            print_reports(&[report], &output)?;
        }
        Command::Ablate {
            k,
            staged_children,
            solver,
            output,
        } => {
            let mut reports = Vec::new();
            for f in ablation_features() {
                let f = Features {
                    staged_children: staged_children && (f.line_like || f.lacking_simpl),
                    ..f
                };
                let r = run(&config(k, f, &solver)?)?;
                eprintln!("{}: {:.9} ({} states)", r.label, r.bound, r.states);
                reports.push(r);
            }
            print_reports(&reports, &output)?;
        }
        Command::Verify { build: args, n } => {
            let features = args.toggles.features();
            let g = build(args.k, &features)?;
            let mut failures = Vec::new();
            let violations = soundness_violations(&g);
            println!("candidate soundness: {} violations", violations.len());
            if let Some(v) = violations.first() {
                failures.push(format!(
                    "unsound candidate {} for state {} move {:?}",
                    v.candidate, v.state, v.mv
                ));
            }
            match never_undercount(&g, n) {
                Ok(walks) => println!("walk acceptance: {walks} walks of {n} steps followed"),
                Err(r) => failures.push(format!(
                    "walk {} rejected at state {}: {:?}",
                    r.walk, r.state, r.reason
                )),
            }
            let exact = build(args.k, &Features::erasure_only())?;
            match erasure_exactness(&exact, n) {
                Ok(()) => println!("erasure-only counts: exact up to {n} steps"),
                Err((len, got, want)) => failures.push(format!(
                    "erasure-only count at {len} steps: {got} != {want}"
                )),
            }
            if !failures.is_empty() {
                return Err(Failure::Verification(failures.join("\n")));
            }
        }
    }
    Ok(())
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            Failure::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(flag),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads(cli.threads).and_then(|n| {
        if let Some(n) = n {
            if n == 0 {
                return Err(Failure::Usage("thread count must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::Internal(e.to_string()))?;
        }
        execute(cli.command)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
