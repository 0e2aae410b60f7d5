use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use sparsepca::report::{write_trace_csv_file, RunReport};
use sparsepca::{BbVariant, Method};
use sparsepca_bench::{
    dks, eigstudy, run_solve, sweep, write_csv, write_sweep_csv, DataParams, DatasetSelector,
    EigstudySpec, Overrides, SeedList, SweepSpec,
};

/// Sparse PCA and densest-k-subgraph experiments.
///
/// Set RUST_LOG (error, warn, info, debug) to control diagnostics on stderr.
#[derive(Parser)]
#[command(name = "sparsepca", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and write a JSON report and CSV trace per method.
    Solve(SolveArgs),
    /// Mean explained variance over seeded random matrices, per method, κ and m.
    Sweep(SweepArgs),
    /// Relative eigenvalue error per iteration at full cardinality.
    Eigstudy(EigArgs),
    /// Densest-k-subgraph relaxation on a graph.
    Dks(DksArgs),
}

#[derive(Args)]
struct SolverArgs {
    /// Iteration budget [default: 1000 for solve and dks, 6000 GPU/Tpower and
    /// 200 GPBB/mnewton for sweep, 6000 for eigstudy]
    #[arg(long)]
    max_iter: Option<usize>,
    /// Relative objective change regarded as stagnation
    #[arg(long)]
    tol: Option<f64>,
    /// Backtracking factor of the monotone method
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_max: Option<f64>,
    /// signed-rayleigh or magnitude-negated
    #[arg(long)]
    bb_variant: Option<BbVariant>,
    /// Diagonal shift c; the solver iterates on Σ + cI
    #[arg(long)]
    shift: Option<f64>,
    /// Fixed step of the gradient projection method
    #[arg(long)]
    step_size: Option<f64>,
}

impl SolverArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            max_iter: self.max_iter,
            tol: self.tol,
            sigma: self.sigma,
            alpha_min: self.alpha_min,
            alpha_max: self.alpha_max,
            bb_variant: self.bb_variant,
            shift: self.shift,
            step_size: self.step_size,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// pitprops, random, identity, mtx:<path> or csv:<path>
    #[arg(long, default_value = "pitprops")]
    dataset: DatasetSelector,
    /// Rows of the random data matrix
    #[arg(long, default_value_t = 250)]
    m: usize,
    /// Dimension of random and identity datasets
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// The CSV matrix file starts with a header row
    #[arg(long)]
    header: bool,
}

impl DataArgs {
    fn params(&self) -> DataParams {
        DataParams {
            m: self.m,
            n: self.n,
            seed: self.seed,
            csv_header: self.header,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    data: DataArgs,
    /// gpu, tpower, gpbb or mnewton; repeatable
    #[arg(long = "method", default_value = "gpbb")]
    methods: Vec<Method>,
    #[arg(long)]
    kappa: usize,
    /// Output prefix: writes <out>[-<method>].json and .trace.csv.
    /// Without it the JSON report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long = "method", default_values = ["gpu", "tpower", "gpbb"])]
    methods: Vec<Method>,
    /// Cardinalities, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,500")]
    kappa: Vec<usize>,
    /// Sample sizes, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "250")]
    m: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Comma list, a..b (end excluded) or a..=b
    #[arg(long, default_value = "1..=20")]
    seeds: SeedList,
    /// CSV output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct EigArgs {
    #[arg(long = "method", default_values = ["gpu", "tpower", "gpbb", "mnewton"])]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 250)]
    m: usize,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value = "1..=5")]
    seeds: SeedList,
    /// Relative error counted as reached in the summary
    #[arg(long, default_value_t = 1e-12)]
    threshold: f64,
    /// Per-iteration CSV file; the per-run summary then goes to stdout.
    /// Without it the trace goes to stdout and the summary to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct DksArgs {
    /// mtx:<path>
    #[arg(long)]
    dataset: DatasetSelector,
    /// Subgraph size
    #[arg(long)]
    k: usize,
    #[arg(long = "method", default_value = "gpbb")]
    methods: Vec<Method>,
    /// JSON output prefix [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

// `<out>.json` for a single method, `<out>-<method>.json` otherwise
fn output_path(prefix: &Path, method: Method, many: bool, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    if many {
        name.push(format!("-{method}"));
    }
    name.push(ext);
    PathBuf::from(name)
}

fn write_report(report: &RunReport, out: Option<&Path>, many: bool) -> Result<()> {
    match out {
        Some(prefix) => {
            let json = output_path(prefix, report.method, many, ".json");
            let trace = output_path(prefix, report.method, many, ".trace.csv");
            report.write_json(&json).with_context(|| format!("writing {}", json.display()))?;
            write_trace_csv_file(&trace, &report.trace).with_context(|| format!("writing {}", trace.display()))?;
            log::info!("wrote {} and {}", json.display(), trace.display());
        }
        None => print_stdout(&report.to_json()?)?,
    }
    Ok(())
}

fn print_stdout(text: &str) -> io::Result<()> {
    writeln!(io::stdout().lock(), "{text}")
}

fn csv_target(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(a) => {
            let ds = a.data.dataset.load(&a.data.params())?;
            for w in &ds.warnings {
                eprintln!("warning: {w}");
            }
            let overrides = a.solver.overrides();
            let many = a.methods.len() > 1;
            for &method in &a.methods {
                let report = run_solve(&ds, method, a.kappa, &overrides)?;
                write_report(&report, a.out.as_deref(), many)?;
            }
        }
        Command::Sweep(a) => {
            let spec = SweepSpec {
                methods: a.methods,
                kappas: a.kappa,
                ms: a.m,
                n: a.n,
                seeds: a.seeds.0,
                overrides: a.solver.overrides(),
            };
            let cells = sweep(&spec)?;
            write_sweep_csv(csv_target(a.out.as_deref())?, &cells)?;
            let failed: usize = cells.iter().map(|c| c.failed).sum();
            if failed > 0 {
                log::warn!("{failed} runs failed; see the failed column");
            }
        }
        Command::Eigstudy(a) => {
            let spec = EigstudySpec {
                methods: a.methods,
                m: a.m,
                n: a.n,
                seeds: a.seeds.0,
                overrides: a.solver.overrides(),
                threshold: a.threshold,
            };
            let (rows, summary) = eigstudy(&spec)?;
            write_csv(csv_target(a.out.as_deref())?, &rows)?;
            if a.out.is_some() {
                write_csv(io::stdout().lock(), &summary)?;
            } else {
                write_csv(io::stderr().lock(), &summary)?;
            }
        }
        Command::Dks(a) => {
            let ds = a.dataset.load(&DataParams::default())?;
            for w in &ds.warnings {
                eprintln!("warning: {w}");
            }
            let overrides = a.solver.overrides();
            let many = a.methods.len() > 1;
            for &method in &a.methods {
                let report = dks(&ds, a.k, method, &overrides)?;
                let json = serde_json::to_string_pretty(&report)?;
                match a.out.as_deref() {
                    Some(prefix) => {
                        let path = output_path(prefix, method, many, ".json");
                        std::fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
                    }
                    None => print_stdout(&json)?,
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        // a closed pipe (`| head`) is not a failure
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
