use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evobench_core::harness::{
    self, default_sweep_values, export_aggregate_json, export_csv, export_sweep_json, plot_series,
    read_document, render_svg, write_series_csv, Document, ExperimentSpec, PlotKind, SweepAxis, SweepSpec,
};
use evobench_core::{AlgorithmConfig, AlgorithmId, BackendSpec, Budget, Error, ProblemId};

#[derive(Parser)]
#[command(name = "evobench", version, about = "Benchmark evolutionary algorithms under fixed generation, evaluation or time budgets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its records as JSON.
    Run(RunArgs),
    /// Repeat an experiment across dimensions or population sizes.
    Sweep(SweepArgs),
    /// Turn a results file into a CSV table or an SVG chart.
    Report(ReportArgs),
    /// Show algorithms, problems and their defaults.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Serial,
    Parallel,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Dim,
    Pop,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum KindArg {
    QualityVsNfe,
    RuntimeVsAxis,
    Convergence,
    Diversity,
}

impl From<KindArg> for PlotKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::QualityVsNfe => PlotKind::QualityVsNfe,
            KindArg::RuntimeVsAxis => PlotKind::RuntimeVsAxis,
            KindArg::Convergence => PlotKind::Convergence,
            KindArg::Diversity => PlotKind::Diversity,
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    algo: String,
    #[arg(long)]
    problem: String,
    /// Decision-space dimension; defaults to the problem's standard size.
    #[arg(long)]
    dim: Option<usize>,
    /// Number of objectives for scalable multi-objective problems.
    #[arg(long = "objectives", short = 'm')]
    objectives: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pop: usize,
    /// gen:N, fe:N or time:SECONDS.
    #[arg(long, default_value = "gen:100")]
    budget: String,
    #[arg(long, default_value_t = 15)]
    reps: usize,
    #[arg(long, value_enum, default_value = "serial")]
    backend: BackendArg,
    /// Worker threads for the parallel backend; EVOBENCH_WORKERS overrides it.
    #[arg(long)]
    workers: Option<usize>,
    /// Rows per parallel work item.
    #[arg(long)]
    chunk: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON object of algorithm parameters merged onto the defaults.
    #[arg(long)]
    config: Option<String>,
    /// Generations between history samples.
    #[arg(long)]
    stride: Option<u64>,
    /// Shift/rotation data file for CEC 2022 problems.
    #[arg(long)]
    transform: Option<PathBuf>,
    /// Skip the per-sample diversity measurement.
    #[arg(long)]
    no_diversity: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    #[arg(long)]
    out: PathBuf,
    /// Also write the flat history table here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: AxisArg,
    /// Comma-separated, strictly increasing; defaults to 16,32,...,8192.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<usize>>,
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Budget of the runtime experiment at each value.
    #[arg(long, default_value = "gen:100")]
    timing_budget: String,
    /// Budget of the throughput experiment at each value.
    #[arg(long, default_value = "time:30")]
    throughput_budget: String,
    /// Skip the throughput experiment.
    #[arg(long)]
    no_throughput: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, value_enum, default_value = "svg")]
    format: FormatArg,
    #[arg(long)]
    out: PathBuf,
}

fn experiment(a: &ExperimentArgs) -> Result<ExperimentSpec, Error> {
    let algorithm: AlgorithmId = a.algo.parse()?;
    let problem: ProblemId = a.problem.parse()?;
    let budget: Budget = a.budget.parse()?;
    let mut backend = match a.backend {
        BackendArg::Serial => BackendSpec::serial(),
        BackendArg::Parallel => BackendSpec::parallel(
            a.workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
        ),
    };
    if let Some(c) = a.chunk {
        backend = backend.with_chunk(c);
    }
    let backend = backend.resolve_env()?;
    let config = match &a.config {
        Some(text) => Some(
            serde_json::from_str(text).map_err(|e| Error::Config(format!("--config is not valid JSON: {e}")))?,
        ),
        None => None,
    };
    let mut spec = ExperimentSpec::new(algorithm, problem, a.pop, budget, a.seed);
    spec.dim = a.dim.unwrap_or(spec.dim);
    spec.objectives = a.objectives.unwrap_or(spec.objectives);
    spec.reps = a.reps;
    spec.backend = backend;
    spec.config = config;
    spec.stride = a.stride;
    spec.transform = a.transform.clone();
    spec.track_diversity = !a.no_diversity;
    spec.validate()?;
    spec.resolved_config()?;
    algorithm.check_arity(&spec.instance()?)?;
    Ok(spec)
}

fn cmd_run(a: &RunArgs) -> Result<(), Error> {
    let spec = experiment(&a.exp)?;
    let runs = harness::run(&spec)?;
    export_aggregate_json(&spec, &runs, &a.out)?;
    if let Some(path) = &a.csv {
        export_csv(&runs, path)?;
    }
    let agg = harness::aggregate(&runs);
    println!(
        "{} on {} (D={}, N={}): quality {:.6e} ± {:.3e}, nfe {:.0}, {:.3} s over {} reps",
        spec.algorithm.as_str(),
        spec.problem.as_str(),
        spec.dim,
        spec.pop,
        agg.quality.mean,
        agg.quality.std,
        agg.nfe.mean,
        agg.elapsed_s.mean,
        agg.reps
    );
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), Error> {
    let base = experiment(&a.exp)?;
    let axis = match a.axis {
        AxisArg::Dim => SweepAxis::Dimension,
        AxisArg::Pop => SweepAxis::PopulationSize,
    };
    let mut spec = SweepSpec::new(axis, a.values.clone().unwrap_or_else(default_sweep_values), base);
    spec.timing = a.timing_budget.parse()?;
    spec.timing.validate()?;
    spec.throughput = if a.no_throughput {
        None
    } else {
        let b: Budget = a.throughput_budget.parse()?;
        b.validate()?;
        Some(b)
    };
    spec.validate()?;
    for &v in &spec.values {
        let e = spec.at(v, spec.timing);
        e.validate()?;
        spec.base.algorithm.check_arity(&e.instance()?)?;
    }
    let rows = harness::run_sweep(&spec)?;
    export_sweep_json(&spec, &rows, &a.out)?;
    println!("{:>8} {:>14} {:>14} {:>14}", "value", "runtime_s", "quality", "nfe_budgeted");
    for r in &rows {
        let t = r.throughput.as_ref();
        println!(
            "{:>8} {:>14.6} {:>14.6e} {:>14.0}",
            r.value,
            r.timing.elapsed_s.mean,
            r.timing.quality.mean,
            t.map_or(f64::NAN, |t| t.nfe.mean)
        );
    }
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> Result<(), Error> {
    let doc: Document = read_document(&a.input)?;
    let kind = PlotKind::from(a.kind);
    let series = plot_series(&doc, kind)?;
    match a.format {
        FormatArg::Svg => std::fs::write(&a.out, render_svg(&series, kind))?,
        FormatArg::Csv => write_series_csv(&series, &a.out)?,
    }
    Ok(())
}

fn cmd_list() {
    use std::fmt::Write as _;
    let mut o = String::new();
    let _ = writeln!(o, "algorithms:");
    for id in AlgorithmId::ALL {
        let kind = if id.is_multi_objective() { "multi-objective" } else { "single-objective" };
        let cfg = serde_json::to_string(&AlgorithmConfig::defaults(id)).unwrap_or_default();
        let _ = writeln!(o, "  {:<12} {:<17} min pop {:<3} {}", id.as_str(), kind, id.min_population(), cfg);
    }
    let _ = writeln!(o, "problems:");
    for p in ProblemId::ALL {
        let _ = writeln!(o, 
            "  {:<12} D={:<4} M={}",
            p.as_str(),
            p.default_dim(),
            p.default_objectives()
        );
    }
    let _ = writeln!(o, "defaults: pop 100, budget gen:100, reps 15, backend serial, seed 0");
    use std::io::Write as _;
    let _ = std::io::stdout().write_all(o.as_bytes());
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::IncompatibleArity { .. } | Error::SingleObjective { .. } => 3,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Transform { .. } => 4,
        Error::Evaluation { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Report(a) => cmd_report(a),
        Command::List => {
            cmd_list();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
