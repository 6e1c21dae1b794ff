use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use c2rf_core::bnb::{brute_force_solve, NodeSelection, SolverConfig};
use c2rf_core::dataset::{draw_sample, load_csv, scale, CsvOptions, Dataset, SamplingMode, SplitDataset};
use c2rf_core::forest::{train_forest, ForestConfig};
use c2rf_core::milp::{export_mps, write_lp};
use c2rf_core::model::{build_milp, ModelSpec};
use c2rf_core::pipeline::{aggregate, benchmark, run_approach, Approach, CellStatus, DataSource, ResultsBundle, RunConfig};
use c2rf_core::presolve::presolve;
use c2rf_core::synth::{two_gaussians, TwoGaussians};
use c2rf_core::tree::TreeParams;
use c2rf_core::votes::VoteMatrix;

#[derive(Parser)]
#[command(name = "c2rf", version, about = "Cardinality-constrained random forest experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a CSV file (or generate synthetic data), optionally scale it, save as JSON.
    Ingest(IngestArgs),
    /// Split a dataset into labeled and unlabeled parts.
    Sample(SampleArgs),
    /// Train a forest on the labeled part and write the vote matrix.
    Forest(ForestArgs),
    /// Solve one approach on a vote matrix.
    Solve(SolveArgs),
    /// Run full pipelines for one or more configurations.
    Benchmark(BenchmarkArgs),
    /// Aggregate the cells of a results directory into median and ECDF tables.
    Report(ReportArgs),
    /// Write the (optionally presolved) model as MPS.
    ExportMps(ExportArgs),
    /// Enumerate all assignments of a tiny instance.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// CSV file with a header row.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    csv: Option<PathBuf>,
    #[arg(long, default_value = "class")]
    label_column: String,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    #[arg(long, default_value = "1")]
    positive_label: String,
    /// Generate two Gaussian clouds instead of reading a file.
    #[arg(long)]
    synthetic: bool,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 2.0)]
    separation: f64,
    #[arg(long, default_value_t = 0.5)]
    positive_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep the raw feature values.
    #[arg(long)]
    no_scale: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Simple,
    Biased,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    fraction: f64,
    #[arg(long, value_enum, default_value = "biased")]
    mode: Mode,
    #[arg(long, default_value_t = 0.85)]
    p_pos: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ForestArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    split: PathBuf,
    #[arg(long, default_value_t = 20)]
    trees: usize,
    #[arg(long, default_value_t = 0.2)]
    subset_fraction: f64,
    #[arg(long, default_value_t = 10)]
    max_depth: usize,
    #[arg(long, default_value_t = 1)]
    min_leaf: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out: PathBuf,
    /// Vote matrix on the unlabeled points (`.csv` for the compact form).
    #[arg(long)]
    votes_out: Option<PathBuf>,
}

#[derive(Args)]
struct InstanceArgs {
    /// Vote matrix as JSON, or `.csv` with one line per tree.
    #[arg(long)]
    votes: PathBuf,
    /// Cardinality target; read from `--split` when omitted.
    #[arg(long, required_unless_present = "split")]
    lambda: Option<u64>,
    /// Split whose unlabeled positives give the target.
    #[arg(long)]
    split: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    #[arg(long, default_value_t = 100.0)]
    u: f64,
}

impl InstanceArgs {
    fn load(&self) -> Result<(VoteMatrix, u64, Option<SplitDataset>)> {
        let votes = read_votes(&self.votes)?;
        let split = self.split.as_ref().map(SplitDataset::load).transpose()?;
        let lambda = match (self.lambda, &split) {
            (Some(l), _) => l,
            (None, Some(s)) => s.lambda as u64,
            (None, None) => bail!("either --lambda or --split is required"),
        };
        Ok((votes, lambda, split))
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value = "p-c2rf")]
    approach: String,
    /// Solver settings as JSON; flags below take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long)]
    depth_first: bool,
    /// Per-node CSV trace.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Run configuration(s) as JSON; each becomes one row block of the report.
    #[arg(long)]
    config: Vec<PathBuf>,
    #[arg(long)]
    instance: Option<String>,
    #[arg(long, conflicts_with = "synthetic")]
    csv: Option<PathBuf>,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long)]
    synthetic: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    approaches: Option<Vec<String>>,
    #[arg(long)]
    labeled_fraction: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    p_pos: Option<f64>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    subset_fraction: Option<f64>,
    #[arg(long)]
    ell: Option<f64>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long)]
    no_scale: bool,
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Report accuracy and MCC on a 0-100 scale.
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    results_dir: PathBuf,
    /// Time limit used for the ECDF.
    #[arg(long, default_value_t = 7200.0)]
    time_limit: f64,
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Apply the reductions first and write the lifting map next to the model.
    #[arg(long)]
    presolve: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    map_out: Option<PathBuf>,
    /// Also write CPLEX LP text.
    #[arg(long)]
    lp_out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_votes(path: &Path) -> Result<VoteMatrix> {
    if path.extension().is_some_and(|e| e == "csv") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(VoteMatrix::from_csv(&text)?)
    } else {
        Ok(VoteMatrix::load(path)?)
    }
}

fn write_votes(r: &VoteMatrix, path: &Path) -> Result<()> {
    if path.extension().is_some_and(|e| e == "csv") {
        std::fs::write(path, r.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    } else {
        r.save(path)?;
    }
    Ok(())
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn ingest(a: IngestArgs) -> Result<ExitCode> {
    let d = match &a.csv {
        Some(path) => {
            let mut opts = CsvOptions::new(a.label_column.clone());
            opts.delimiter = u8::try_from(a.delimiter).context("delimiter must be ASCII")?;
            opts.positive_label = a.positive_label.clone();
            load_csv(path, &opts)?
        }
        None => {
            let spec = TwoGaussians {
                n: a.n,
                dim: a.dim,
                separation: a.separation,
                positive_fraction: a.positive_fraction,
            };
            two_gaussians(&spec, a.seed)?
        }
    };
    let d = if a.no_scale { d } else { scale(&d) };
    d.save(&a.out)?;
    print_json(&serde_json::json!({
        "points": d.len(),
        "dim": d.dim(),
        "positives": d.positives(),
        "out": a.out,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn sample(a: SampleArgs) -> Result<ExitCode> {
    let d = Dataset::load(&a.dataset)?;
    let mode = match a.mode {
        Mode::Simple => SamplingMode::Simple,
        Mode::Biased => SamplingMode::Biased { p_pos: a.p_pos },
    };
    let s = draw_sample(&d, a.fraction, mode, a.seed)?;
    s.save(&a.out)?;
    let labeled_pos = s.labeled_labels.iter().filter(|&&l| l == 1).count();
    print_json(&serde_json::json!({
        "labeled": s.n(),
        "labeled_positive": labeled_pos,
        "unlabeled": s.m(),
        "lambda": s.lambda,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn forest(a: ForestArgs) -> Result<ExitCode> {
    let d = Dataset::load(&a.dataset)?;
    let s = SplitDataset::load(&a.split)?;
    let cfg = ForestConfig {
        n_trees: a.trees,
        subset_fraction: a.subset_fraction,
        tree: TreeParams {
            max_depth: a.max_depth,
            min_samples_leaf: a.min_leaf,
        },
        parallel: a.parallel,
    };
    let f = train_forest(&d, &s, &cfg, a.seed)?;
    f.save(&a.out)?;
    if let Some(path) = &a.votes_out {
        write_votes(&f.votes_for(&d, &s)?, path)?;
    }
    print_json(&serde_json::json!({
        "trees": f.trees.len(),
        "max_depth": f.trees.iter().map(|t| t.depth()).max(),
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn solver_config(path: Option<&PathBuf>) -> Result<SolverConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?)
        }
        None => Ok(SolverConfig::default()),
    }
}

fn solve(a: SolveArgs) -> Result<ExitCode> {
    let (votes, lambda, split) = a.instance.load()?;
    let approach: Approach = a.approach.parse()?;
    let mut cfg = solver_config(a.config.as_ref())?;
    if let Some(t) = a.time_limit {
        cfg.time_limit_secs = Some(t);
    }
    if a.node_limit.is_some() {
        cfg.node_limit = a.node_limit;
    }
    if a.depth_first {
        cfg.node_selection = NodeSelection::DepthFirst;
    }
    cfg.trace |= a.trace.is_some();
    let out = run_approach(&votes, lambda, approach, a.instance.ell, a.instance.u, &cfg)?;
    let metrics = match &split {
        Some(s) if !out.predicted.is_empty() => {
            Some(c2rf_core::eval::Metrics::evaluate(&out.predicted, &s.unlabeled_truth)?)
        }
        _ => None,
    };
    if let (Some(path), Some(sol)) = (&a.trace, &out.solution) {
        std::fs::write(path, sol.trace_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    if let (Some(path), Some(sol)) = (&a.out, &out.solution) {
        c2rf_core::io::write_json(path, "c2rf-solution", sol)?;
    }
    let status = out.solution.as_ref().map(|s| s.status);
    print_json(&serde_json::json!({
        "approach": approach,
        "status": status,
        "objective": out.solution.as_ref().map(|s| s.objective),
        "bound": out.solution.as_ref().map(|s| s.bound),
        "nodes": out.solution.as_ref().map(|s| s.stats.nodes),
        "lp_iterations": out.solution.as_ref().map(|s| s.stats.lp_iterations),
        "model_dims": out.model_dims,
        "presolve": out.presolve,
        "predicted_positive": out.predicted.iter().filter(|&&p| p == 1).count(),
        "metrics": metrics,
        "wall_secs": out.wall_secs,
    }))?;
    let done = status.is_none_or(|s| {
        matches!(s, c2rf_core::bnb::SolveStatus::Optimal | c2rf_core::bnb::SolveStatus::Infeasible)
    });
    Ok(if done { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn apply_overrides(mut cfg: RunConfig, a: &BenchmarkArgs) -> Result<RunConfig> {
    if let Some(v) = &a.instance {
        cfg.instance = v.clone();
    }
    if let Some(path) = &a.csv {
        cfg.data = DataSource::Csv {
            path: path.clone(),
            label_column: a.label_column.clone().unwrap_or_else(|| "class".into()),
            delimiter: None,
            positive_label: None,
        };
    } else if a.synthetic || a.n.is_some() {
        let mut spec = match &cfg.data {
            DataSource::Synthetic { spec, .. } => *spec,
            _ => TwoGaussians::default(),
        };
        if let Some(n) = a.n {
            spec.n = n;
        }
        cfg.data = DataSource::Synthetic { spec, data_seed: None };
    }
    if let Some(v) = &a.seeds {
        cfg.seeds = v.clone();
    }
    if let Some(v) = &a.approaches {
        cfg.approaches = v.iter().map(|s| s.parse()).collect::<c2rf_core::Result<_>>()?;
    }
    if let Some(v) = a.labeled_fraction {
        cfg.labeled_fraction = v;
    }
    match (a.mode, a.p_pos) {
        (Some(Mode::Simple), _) => cfg.sampling = SamplingMode::Simple,
        (Some(Mode::Biased), p) => cfg.sampling = SamplingMode::Biased { p_pos: p.unwrap_or(0.85) },
        (None, Some(p)) => cfg.sampling = SamplingMode::Biased { p_pos: p },
        (None, None) => {}
    }
    if let Some(v) = a.trees {
        cfg.forest.n_trees = v;
    }
    if let Some(v) = a.subset_fraction {
        cfg.forest.subset_fraction = v;
    }
    if let Some(v) = a.ell {
        cfg.ell = v;
    }
    if let Some(v) = a.u {
        cfg.u = v;
    }
    if let Some(v) = a.time_limit {
        cfg.time_limit_secs = v;
    }
    if a.node_limit.is_some() {
        cfg.node_limit = a.node_limit;
    }
    cfg.scale &= !a.no_scale;
    cfg.parallel |= a.parallel;
    if let Some(dir) = &a.out_dir {
        cfg.output_dir = Some(dir.clone());
    }
    Ok(cfg)
}

fn run_benchmark(a: BenchmarkArgs) -> Result<ExitCode> {
    let bases = if a.config.is_empty() {
        vec![RunConfig::default()]
    } else {
        a.config.iter().map(|p| load_run_config(p)).collect::<Result<_>>()?
    };
    let configs: Vec<RunConfig> = bases
        .into_iter()
        .map(|c| apply_overrides(c, &a))
        .collect::<Result<_>>()?;
    let (bundle, report) = benchmark(&configs)?;
    if a.paper_scale {
        for dir in configs.iter().filter_map(|c| c.output_dir.as_ref()) {
            report.write(dir, true)?;
        }
    }
    emit(&report.medians_csv(a.paper_scale)?)?;
    summarize(&bundle)
}

fn summarize(bundle: &ResultsBundle) -> Result<ExitCode> {
    let open: Vec<String> = bundle
        .cells
        .iter()
        .filter(|c| !c.status.is_terminal())
        .map(|c| {
            let why = match (c.status, &c.error) {
                (CellStatus::Error, Some(e)) => format!("error: {e}"),
                (s, _) => serde_json::to_string(&s).unwrap_or_default(),
            };
            format!("{} seed {} {}: {why}", c.instance, c.seed, c.approach)
        })
        .collect();
    for line in &open {
        eprintln!("not finished: {line}");
    }
    Ok(if open.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn report(a: ReportArgs) -> Result<ExitCode> {
    let bundle = ResultsBundle::load_dir(&a.results_dir)?;
    if bundle.cells.is_empty() {
        bail!("no cells under {}", a.results_dir.display());
    }
    let report = aggregate(&bundle, a.time_limit)?;
    report.write(&a.results_dir, a.paper_scale)?;
    emit(&report.medians_csv(a.paper_scale)?)?;
    Ok(ExitCode::SUCCESS)
}

fn export(a: ExportArgs) -> Result<ExitCode> {
    let (votes, lambda, _) = a.instance.load()?;
    let spec = ModelSpec::new(a.instance.ell, a.instance.u, lambda);
    let model = if a.presolve {
        let p = presolve(&votes, &spec)?;
        if let Some(path) = &a.map_out {
            p.map.save(path)?;
        }
        build_milp(&p.reduced, &ModelSpec::new(spec.ell, spec.u, p.lambda))?
    } else {
        build_milp(&votes, &spec)?
    };
    export_mps(&model, &a.out)?;
    if let Some(path) = &a.lp_out {
        std::fs::write(path, write_lp(&model)).with_context(|| format!("writing {}", path.display()))?;
    }
    print_json(&serde_json::json!({
        "variables": model.num_vars(),
        "rows": model.num_rows(),
        "binaries": model.integer_vars().count(),
        "out": a.out,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn oracle(a: OracleArgs) -> Result<ExitCode> {
    let (votes, lambda, _) = a.instance.load()?;
    let sol = brute_force_solve(&votes, &ModelSpec::new(a.instance.ell, a.instance.u, lambda))?;
    if let Some(path) = &a.out {
        c2rf_core::io::write_json(path, "c2rf-solution", &sol)?;
    }
    print_json(&serde_json::json!({
        "status": sol.status,
        "objective": sol.objective,
        "z": sol.z,
        "alpha": sol.alpha,
        "checked": sol.stats.nodes,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Sample(a) => sample(a),
        Command::Forest(a) => forest(a),
        Command::Solve(a) => solve(a),
        Command::Benchmark(a) => run_benchmark(a),
        Command::Report(a) => report(a),
        Command::ExportMps(a) => export(a),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
