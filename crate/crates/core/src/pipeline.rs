//! End-to-end runs: data, sample, forest, then one optimization approach per
//! cell, with results persisted per cell and aggregated into tables.
//!
//! Output directory layout:
//!
//! ```text
//! <out>/cells/<instance>__s<seed>__<approach>.json   one envelope per cell
//! <out>/results.csv                                  one row per cell
//! <out>/medians.csv                                  per instance and approach
//! <out>/ecdf.csv                                     run-time ECDF breakpoints
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bnb::{branching_priorities, solve_milp, SolveStatus, Solution, SolverConfig};
use crate::dataset::{draw_sample, load_csv, scale, CsvOptions, Dataset, SamplingMode, SplitDataset};
use crate::error::{Error, Result};
use crate::eval::{deltas, ecdf, median, Ecdf, Metrics};
use crate::forest::{train_forest, ForestConfig};
use crate::model::{build_milp, ModelSpec};
use crate::presolve::{lift_solution, presolve, PresolveStats};
use crate::synth::{two_gaussians, TwoGaussians};
use crate::votes::{majority_vote, VoteMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Approach {
    #[serde(rename = "rf")]
    Rf,
    #[serde(rename = "c2rf")]
    C2rf,
    #[serde(rename = "p-c2rf")]
    PC2rf,
    #[serde(rename = "only-pp")]
    OnlyPp,
    #[serde(rename = "only-br")]
    OnlyBr,
}

impl Approach {
    pub const ALL: [Approach; 5] = [
        Approach::Rf,
        Approach::C2rf,
        Approach::PC2rf,
        Approach::OnlyPp,
        Approach::OnlyBr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Approach::Rf => "rf",
            Approach::C2rf => "c2rf",
            Approach::PC2rf => "p-c2rf",
            Approach::OnlyPp => "only-pp",
            Approach::OnlyBr => "only-br",
        }
    }

    pub fn uses_milp(self) -> bool {
        self != Approach::Rf
    }

    pub fn uses_presolve(self) -> bool {
        matches!(self, Approach::PC2rf | Approach::OnlyPp)
    }

    pub fn uses_priorities(self) -> bool {
        matches!(self, Approach::PC2rf | Approach::OnlyBr)
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Approach::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::invalid_arg(format!(
                    "unknown approach '{s}' (expected rf, c2rf, p-c2rf, only-pp or only-br)"
                ))
            })
    }
}

/// Result of one approach on one vote matrix.
#[derive(Clone, Debug)]
pub struct ApproachOutcome {
    pub predicted: Vec<i8>,
    /// Full-space solution (lifted when presolve ran); `None` for `rf`.
    pub solution: Option<Solution>,
    pub presolve: Option<PresolveStats>,
    /// `(trees, points)` of the model handed to the solver.
    pub model_dims: Option<(usize, usize)>,
    pub wall_secs: f64,
}

/// Runs `approach` on `r`; the solver config supplies limits and the
/// priorities field is managed here.
pub fn run_approach(
    r: &VoteMatrix,
    lambda: u64,
    approach: Approach,
    ell: f64,
    u: f64,
    solver: &SolverConfig,
) -> Result<ApproachOutcome> {
    let start = Instant::now();
    if !approach.uses_milp() {
        return Ok(ApproachOutcome {
            predicted: majority_vote(r),
            solution: None,
            presolve: None,
            model_dims: None,
            wall_secs: start.elapsed().as_secs_f64(),
        });
    }
    let spec = ModelSpec::new(ell, u, lambda);
    let (reduced, map) = if approach.uses_presolve() {
        let p = presolve(r, &spec)?;
        let spec = ModelSpec::new(ell, u, p.lambda);
        (Some((p.reduced, spec)), Some(p.map))
    } else {
        (None, None)
    };
    let (matrix, spec) = match &reduced {
        Some((m, s)) => (m, *s),
        None => (r, spec),
    };
    let model = build_milp(matrix, &spec)?;
    let cfg = SolverConfig {
        priorities: approach.uses_priorities().then(|| branching_priorities(matrix)),
        ..solver.clone()
    };
    let solution = solve_milp(&model, &cfg)?;
    let solution = match &map {
        Some(map) => lift_solution(&solution, map)?,
        None => solution,
    };
    let predicted = if solution.status.has_solution() {
        solution.z.iter().map(|&z| if z == 1 { 1 } else { -1 }).collect()
    } else {
        Vec::new()
    };
    Ok(ApproachOutcome {
        predicted,
        solution: Some(solution),
        presolve: map.map(|m| m.stats),
        model_dims: Some((matrix.n_trees(), matrix.n_points())),
        wall_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        label_column: String,
        #[serde(default)]
        delimiter: Option<char>,
        #[serde(default)]
        positive_label: Option<String>,
    },
    /// A dataset saved by `Dataset::save`.
    Dataset { path: PathBuf },
    /// Two Gaussian clouds; without `data_seed` every run seed draws a fresh dataset.
    Synthetic {
        #[serde(default)]
        spec: TwoGaussians,
        #[serde(default)]
        data_seed: Option<u64>,
    },
}

impl DataSource {
    pub fn load(&self, run_seed: u64) -> Result<Dataset> {
        match self {
            DataSource::Csv {
                path,
                label_column,
                delimiter,
                positive_label,
            } => {
                let mut opts = CsvOptions::new(label_column.clone());
                if let Some(d) = delimiter {
                    opts.delimiter = u8::try_from(*d)
                        .map_err(|_| Error::invalid_arg("delimiter must be an ASCII character"))?;
                }
                if let Some(p) = positive_label {
                    opts.positive_label = p.clone();
                }
                load_csv(path, &opts)
            }
            DataSource::Dataset { path } => Dataset::load(path),
            DataSource::Synthetic { spec, data_seed } => two_gaussians(spec, data_seed.unwrap_or(run_seed)),
        }
    }

    /// Whether the dataset depends on the run seed.
    fn per_seed(&self) -> bool {
        matches!(self, DataSource::Synthetic { data_seed: None, .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub instance: String,
    pub data: DataSource,
    pub scale: bool,
    pub labeled_fraction: f64,
    pub sampling: SamplingMode,
    pub seeds: Vec<u64>,
    pub forest: ForestConfig,
    pub ell: f64,
    pub u: f64,
    pub approaches: Vec<Approach>,
    pub time_limit_secs: f64,
    pub node_limit: Option<u64>,
    /// Run seeds on the rayon pool; each cell stays sequential.
    pub parallel: bool,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            instance: "synthetic".into(),
            data: DataSource::Synthetic {
                spec: TwoGaussians::default(),
                data_seed: None,
            },
            scale: true,
            labeled_fraction: 0.01,
            sampling: SamplingMode::Biased { p_pos: 0.85 },
            seeds: (1..=5).collect(),
            forest: ForestConfig::default(),
            ell: 1.0,
            u: 100.0,
            approaches: Approach::ALL.to_vec(),
            time_limit_secs: 7200.0,
            node_limit: None,
            parallel: false,
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        ModelSpec::new(self.ell, self.u, 0).check_bounds()?;
        if self.seeds.is_empty() || self.approaches.is_empty() {
            return Err(Error::invalid_arg("need at least one seed and one approach"));
        }
        if !(self.time_limit_secs > 0.0) {
            return Err(Error::invalid_arg("time limit must be positive"));
        }
        if self.instance.is_empty() || self.instance.contains(['/', '\\']) {
            return Err(Error::invalid_arg("instance name must be a plain file-name fragment"));
        }
        match &self.data {
            DataSource::Csv { path, .. } | DataSource::Dataset { path } if !path.exists() => {
                Err(Error::invalid_arg(format!("{} does not exist", path.display())))
            }
            _ => Ok(()),
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            time_limit_secs: Some(self.time_limit_secs),
            node_limit: self.node_limit,
            ..SolverConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    /// Majority vote computed.
    Baseline,
    Optimal,
    Feasible,
    Infeasible,
    LimitReached,
    Error,
}

impl CellStatus {
    /// Finished with a definitive answer.
    pub fn is_terminal(self) -> bool {
        matches!(self, CellStatus::Baseline | CellStatus::Optimal | CellStatus::Infeasible)
    }

    fn from_solve(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => CellStatus::Optimal,
            SolveStatus::Feasible => CellStatus::Feasible,
            SolveStatus::Infeasible => CellStatus::Infeasible,
            SolveStatus::LimitReached => CellStatus::LimitReached,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub instance: String,
    pub seed: u64,
    pub approach: Approach,
    pub status: CellStatus,
    pub error: Option<String>,
    pub lambda: u64,
    pub labeled: usize,
    pub unlabeled: usize,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub predicted_positive: Option<u64>,
    pub metrics: Option<Metrics>,
    pub wall_secs: f64,
    pub nodes: u64,
    pub lp_iterations: u64,
    pub model_trees: Option<usize>,
    pub model_points: Option<usize>,
    pub presolve: Option<PresolveStats>,
}

impl CellResult {
    fn file_name(&self) -> String {
        format!("{}__s{}__{}.json", self.instance, self.seed, self.approach)
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        crate::io::write_json(dir.join(self.file_name()), "c2rf-cell", self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        crate::io::read_json(path, "c2rf-cell")
    }

    /// Solve time for the ECDF: infinite unless the cell finished.
    pub fn solve_time(&self) -> f64 {
        if self.status.is_terminal() {
            self.wall_secs
        } else {
            f64::INFINITY
        }
    }
}

fn cell_from(
    cfg: &RunConfig,
    seed: u64,
    approach: Approach,
    split: &SplitDataset,
    outcome: Result<ApproachOutcome>,
) -> CellResult {
    let mut cell = CellResult {
        instance: cfg.instance.clone(),
        seed,
        approach,
        status: CellStatus::Error,
        error: None,
        lambda: split.lambda as u64,
        labeled: split.n(),
        unlabeled: split.m(),
        objective: None,
        bound: None,
        predicted_positive: None,
        metrics: None,
        wall_secs: 0.0,
        nodes: 0,
        lp_iterations: 0,
        model_trees: None,
        model_points: None,
        presolve: None,
    };
    let out = match outcome {
        Ok(o) => o,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    };
    cell.wall_secs = out.wall_secs;
    cell.presolve = out.presolve;
    cell.model_trees = out.model_dims.map(|d| d.0);
    cell.model_points = out.model_dims.map(|d| d.1);
    cell.status = match &out.solution {
        None => CellStatus::Baseline,
        Some(s) => {
            cell.nodes = s.stats.nodes;
            cell.lp_iterations = s.stats.lp_iterations;
            cell.bound = s.bound.is_finite().then_some(s.bound);
            cell.objective = s.status.has_solution().then_some(s.objective);
            CellStatus::from_solve(s.status)
        }
    };
    if !out.predicted.is_empty() || split.m() == 0 {
        cell.predicted_positive = Some(out.predicted.iter().filter(|&&p| p == 1).count() as u64);
        match Metrics::evaluate(&out.predicted, &split.unlabeled_truth) {
            Ok(m) => cell.metrics = Some(m),
            Err(e) => cell.error = Some(e.to_string()),
        }
    }
    cell
}

fn run_seed(cfg: &RunConfig, shared: Option<&Dataset>, seed: u64) -> Vec<CellResult> {
    let fail = |e: Error| -> Vec<CellResult> {
        cfg.approaches
            .iter()
            .map(|&a| CellResult {
                instance: cfg.instance.clone(),
                seed,
                approach: a,
                status: CellStatus::Error,
                error: Some(e.to_string()),
                lambda: 0,
                labeled: 0,
                unlabeled: 0,
                objective: None,
                bound: None,
                predicted_positive: None,
                metrics: None,
                wall_secs: 0.0,
                nodes: 0,
                lp_iterations: 0,
                model_trees: None,
                model_points: None,
                presolve: None,
            })
            .collect()
    };
    let prepared = (|| -> Result<(SplitDataset, VoteMatrix)> {
        let owned;
        let data = match shared {
            Some(d) => d,
            None => {
                let d = cfg.data.load(seed)?;
                owned = if cfg.scale { scale(&d) } else { d };
                &owned
            }
        };
        let split = draw_sample(data, cfg.labeled_fraction, cfg.sampling, seed)?;
        let forest = train_forest(data, &split, &cfg.forest, seed)?;
        let votes = forest.votes_for(data, &split)?;
        Ok((split, votes))
    })();
    let (split, votes) = match prepared {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let solver = cfg.solver_config();
    cfg.approaches
        .iter()
        .map(|&a| {
            let outcome = run_approach(&votes, split.lambda as u64, a, cfg.ell, cfg.u, &solver);
            let cell = cell_from(cfg, seed, a, &split, outcome);
            if let Some(dir) = &cfg.output_dir {
                if let Err(e) = cell.save(dir.join("cells")) {
                    eprintln!("warning: could not persist cell: {e}");
                }
            }
            cell
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsBundle {
    pub cells: Vec<CellResult>,
}

impl ResultsBundle {
    pub fn all_terminal(&self) -> bool {
        self.cells.iter().all(|c| c.status.is_terminal())
    }

    pub fn get(&self, seed: u64, approach: Approach) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.seed == seed && c.approach == approach)
    }

    /// Loads every cell file of an output directory.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().join("cells");
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut cells = paths.iter().map(CellResult::load).collect::<Result<Vec<_>>>()?;
        cells.sort_by(|a, b| (&a.instance, a.seed, a.approach).cmp(&(&b.instance, b.seed, b.approach)));
        Ok(ResultsBundle { cells })
    }

    pub fn results_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "instance",
            "seed",
            "approach",
            "status",
            "lambda",
            "objective",
            "accuracy",
            "mcc",
            "wall_secs",
            "nodes",
            "lp_iterations",
            "model_trees",
            "model_points",
            "error",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let optu = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.cells {
            w.write_record([
                c.instance.clone(),
                c.seed.to_string(),
                c.approach.to_string(),
                serde_json::to_value(c.status)?.as_str().unwrap_or_default().to_string(),
                c.lambda.to_string(),
                opt(c.objective),
                opt(c.metrics.map(|m| m.accuracy)),
                opt(c.metrics.map(|m| m.mcc)),
                c.wall_secs.to_string(),
                c.nodes.to_string(),
                c.lp_iterations.to_string(),
                optu(c.model_trees),
                optu(c.model_points),
                c.error.clone().unwrap_or_default(),
            ])?;
        }
        finish_csv(w)
    }
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Export(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Export(e.to_string()))
}

/// Runs every seed and approach of `cfg`. Stage failures are recorded in the
/// affected cells; only an invalid configuration is an error.
pub fn run_pipeline(cfg: &RunConfig) -> Result<ResultsBundle> {
    cfg.validate()?;
    let shared = if cfg.data.per_seed() {
        None
    } else {
        let d = cfg.data.load(0)?;
        Some(if cfg.scale { scale(&d) } else { d })
    };
    let per_seed: Vec<Vec<CellResult>> = if cfg.parallel {
        cfg.seeds.par_iter().map(|&s| run_seed(cfg, shared.as_ref(), s)).collect()
    } else {
        cfg.seeds.iter().map(|&s| run_seed(cfg, shared.as_ref(), s)).collect()
    };
    let bundle = ResultsBundle {
        cells: per_seed.into_iter().flatten().collect(),
    };
    if let Some(dir) = &cfg.output_dir {
        write_text(dir.join("results.csv"), &bundle.results_csv()?)?;
    }
    Ok(bundle)
}

fn write_text(path: PathBuf, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// One row of the median table. `None` medians print as `---`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MedianRow {
    pub instance: String,
    pub approach: Approach,
    pub seeds: usize,
    pub solved: usize,
    pub median_secs: Option<f64>,
    pub median_accuracy: Option<f64>,
    pub median_mcc: Option<f64>,
    /// Median over seeds of this approach's metric minus the `rf` metric.
    pub median_delta_accuracy: Option<f64>,
    pub median_delta_mcc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub medians: Vec<MedianRow>,
    pub ecdf: Vec<(String, Ecdf)>,
}

/// A median is reported only when more than half of the seeds finished.
pub fn min_solved(seeds: usize) -> usize {
    seeds / 2 + 1
}

/// Median tables and per-approach run-time ECDFs over all cells.
pub fn aggregate(bundle: &ResultsBundle, limit: f64) -> Result<Report> {
    let mut keys: Vec<(String, Approach)> = bundle
        .cells
        .iter()
        .map(|c| (c.instance.clone(), c.approach))
        .collect();
    keys.sort();
    keys.dedup();
    let mut medians = Vec::new();
    for (instance, approach) in &keys {
        let cells: Vec<&CellResult> = bundle
            .cells
            .iter()
            .filter(|c| &c.instance == instance && c.approach == *approach)
            .collect();
        let done: Vec<&&CellResult> = cells.iter().filter(|c| c.status.is_terminal()).collect();
        let enough = done.len() >= min_solved(cells.len());
        let med = |f: &dyn Fn(&CellResult) -> Option<f64>| -> Option<f64> {
            if !enough {
                return None;
            }
            median(&done.iter().filter_map(|c| f(c)).collect::<Vec<_>>())
        };
        let delta = |pick: fn(&Metrics) -> f64| -> Option<f64> {
            med(&|c: &CellResult| {
                let base = bundle
                    .cells
                    .iter()
                    .find(|b| b.instance == c.instance && b.seed == c.seed && b.approach == Approach::Rf)?;
                let d = deltas(c.metrics.as_ref()?, base.metrics.as_ref()?);
                Some(pick(&d))
            })
        };
        medians.push(MedianRow {
            instance: instance.clone(),
            approach: *approach,
            seeds: cells.len(),
            solved: done.len(),
            median_secs: med(&|c| Some(c.wall_secs)),
            median_accuracy: med(&|c| c.metrics.map(|m| m.accuracy)),
            median_mcc: med(&|c| c.metrics.map(|m| m.mcc)),
            median_delta_accuracy: delta(|m| m.accuracy),
            median_delta_mcc: delta(|m| m.mcc),
        });
    }
    let mut approaches: Vec<Approach> = keys.iter().map(|k| k.1).collect();
    approaches.sort();
    approaches.dedup();
    let ecdf = approaches
        .into_iter()
        .map(|a| {
            let times: Vec<f64> = bundle
                .cells
                .iter()
                .filter(|c| c.approach == a)
                .map(CellResult::solve_time)
                .collect();
            Ok((a.to_string(), ecdf(&times, limit)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Report { medians, ecdf })
}

impl Report {
    /// Median table; accuracy and MCC optionally on the percentage scale.
    pub fn medians_csv(&self, percent: bool) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "instance",
            "approach",
            "seeds",
            "solved",
            "median_secs",
            "median_accuracy",
            "median_mcc",
            "median_delta_accuracy",
            "median_delta_mcc",
        ])?;
        let show = |v: Option<f64>| v.map_or_else(|| "---".to_string(), |x| x.to_string());
        for r in &self.medians {
            let (acc, mcc, dacc, dmcc) = if percent {
                (
                    r.median_accuracy.map(|a| 100.0 * a),
                    r.median_mcc.map(crate::eval::mcc_percent),
                    r.median_delta_accuracy.map(|a| 100.0 * a),
                    r.median_delta_mcc.map(|m| 50.0 * m),
                )
            } else {
                (r.median_accuracy, r.median_mcc, r.median_delta_accuracy, r.median_delta_mcc)
            };
            w.write_record([
                r.instance.clone(),
                r.approach.to_string(),
                r.seeds.to_string(),
                r.solved.to_string(),
                show(r.median_secs),
                show(acc),
                show(mcc),
                show(dacc),
                show(dmcc),
            ])?;
        }
        finish_csv(w)
    }

    pub fn write(&self, dir: impl AsRef<Path>, percent: bool) -> Result<()> {
        let dir = dir.as_ref();
        write_text(dir.join("medians.csv"), &self.medians_csv(percent)?)?;
        write_text(dir.join("ecdf.csv"), &crate::eval::ecdf_csv(&self.ecdf)?)
    }
}

/// Runs several configurations and aggregates them into one report. The
/// ECDF limit is the largest configured time limit.
pub fn benchmark(configs: &[RunConfig]) -> Result<(ResultsBundle, Report)> {
    if configs.is_empty() {
        return Err(Error::invalid_arg("benchmark needs at least one configuration"));
    }
    let mut bundle = ResultsBundle::default();
    for cfg in configs {
        bundle.cells.extend(run_pipeline(cfg)?.cells);
    }
    let limit = configs.iter().map(|c| c.time_limit_secs).fold(0.0, f64::max);
    let report = aggregate(&bundle, limit)?;
    for dir in configs.iter().filter_map(|c| c.output_dir.as_ref()) {
        report.write(dir, false)?;
    }
    Ok((bundle, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> RunConfig {
        RunConfig {
            data: DataSource::Synthetic {
                spec: TwoGaussians { n: 120, ..Default::default() },
                data_seed: None,
            },
            labeled_fraction: 0.1,
            seeds: vec![1, 2],
            time_limit_secs: 30.0,
            ..Default::default()
        }
    }

    #[test]
    fn approach_names_round_trip() {
        for a in Approach::ALL {
            assert_eq!(a.name().parse::<Approach>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{}\"", a.name()));
        }
        assert!("pc2rf".parse::<Approach>().is_err());
    }

    #[test]
    fn rf_builds_no_model() {
        let r = VoteMatrix::from_columns(3, &[vec![1, 1, -1], vec![-1, -1, 1]]).unwrap();
        let o = run_approach(&r, 1, Approach::Rf, 1.0, 100.0, &SolverConfig::default()).unwrap();
        assert!(o.solution.is_none());
        assert_eq!(o.predicted, vec![1, -1]);
    }

    #[test]
    fn milp_approaches_agree() {
        let r = crate::synth::random_votes(5, 12, 3);
        let objs: Vec<f64> = Approach::ALL[1..]
            .iter()
            .map(|&a| {
                run_approach(&r, 4, a, 1.0, 100.0, &SolverConfig::default())
                    .unwrap()
                    .solution
                    .unwrap()
                    .objective
            })
            .collect();
        assert!(objs.iter().all(|&o| o == objs[0]));
    }

    #[test]
    fn pipeline_cells_and_report() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            output_dir: Some(dir.path().to_path_buf()),
            ..small_config()
        };
        let bundle = run_pipeline(&cfg).unwrap();
        assert_eq!(bundle.cells.len(), 10);
        for c in &bundle.cells {
            assert!(c.status.is_terminal(), "{:?} {:?} {}s", c.approach, c.status, c.wall_secs);
        }
        let c2rf = bundle.get(1, Approach::C2rf).unwrap().objective;
        assert_eq!(bundle.get(1, Approach::PC2rf).unwrap().objective, c2rf);
        assert_eq!(bundle.get(1, Approach::Rf).unwrap().nodes, 0);

        let reloaded = ResultsBundle::load_dir(dir.path()).unwrap();
        assert_eq!(reloaded.cells.len(), 10);
        assert!(dir.path().join("results.csv").exists());

        let report = aggregate(&bundle, cfg.time_limit_secs).unwrap();
        assert_eq!(report.ecdf.len(), 5);
        assert_eq!(report.medians.len(), 5);
        let rf = report.medians.iter().find(|r| r.approach == Approach::Rf).unwrap();
        assert_eq!(rf.median_delta_accuracy, Some(0.0));
    }

    #[test]
    fn reruns_are_reproducible() {
        let cfg = RunConfig {
            approaches: vec![Approach::Rf, Approach::PC2rf],
            ..small_config()
        };
        let a = run_pipeline(&cfg).unwrap();
        let b = run_pipeline(&cfg).unwrap();
        for (x, y) in a.cells.iter().zip(&b.cells) {
            assert_eq!(x.objective, y.objective);
            assert_eq!(x.metrics, y.metrics);
        }
    }

    #[test]
    fn dashes_when_too_few_seeds_finish() {
        let mut bundle = ResultsBundle::default();
        for seed in 0..5 {
            let status = if seed < 3 { CellStatus::Feasible } else { CellStatus::Optimal };
            bundle.cells.push(CellResult {
                instance: "x".into(),
                seed,
                approach: Approach::C2rf,
                status,
                error: None,
                lambda: 1,
                labeled: 1,
                unlabeled: 1,
                objective: Some(0.0),
                bound: Some(0.0),
                predicted_positive: Some(1),
                metrics: Some(Metrics { accuracy: 1.0, mcc: 1.0 }),
                wall_secs: 1.0,
                nodes: 1,
                lp_iterations: 1,
                model_trees: None,
                model_points: None,
                presolve: None,
            });
        }
        let report = aggregate(&bundle, 10.0).unwrap();
        assert_eq!(report.medians[0].median_secs, None);
        assert!(report.medians_csv(false).unwrap().contains("---"));
        assert_eq!(report.ecdf[0].1.solved_fraction(), 0.4);
    }

    #[test]
    fn stage_errors_stay_in_cells() {
        let cfg = RunConfig {
            labeled_fraction: 0.0001,
            approaches: vec![Approach::Rf],
            ..small_config()
        };
        let bundle = run_pipeline(&cfg).unwrap();
        assert!(bundle.cells.iter().all(|c| c.status == CellStatus::Error && c.error.is_some()));
        assert!(!bundle.all_terminal());
    }
}
