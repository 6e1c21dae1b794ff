//! LP-based branch and bound for models with binary (or general integer)
//! variables, with optional per-variable branching priorities.

mod oracle;
mod priority;

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use oracle::{brute_force_all_optima, brute_force_solve, OracleOptima, ORACLE_MAX_POINTS};
pub use priority::{branching_priorities, theta};

use crate::error::Result;
use crate::milp::{LpOptions, LpResult, LpSolver, LpStatus, MilpModel};
use crate::model::{meta, Layout};

/// Distance from the nearest integer above which a value counts as fractional.
pub const FRAC_TOL: f64 = 1e-6;
/// Row and bound tolerance for accepting an incumbent.
pub const FEAS_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeSelection {
    #[default]
    BestBound,
    DepthFirst,
}

/// Which child of a point's binary is explored first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchDirection {
    /// Follow the sign of the point's margin under the node's weights.
    #[default]
    Margin,
    /// Set the point to 1 while the points fixed to 1 fall short of the target.
    Cardinality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// One priority per integer variable, in variable order; higher branches first.
    pub priorities: Option<Vec<u32>>,
    /// Absolute optimality gap.
    pub gap: f64,
    pub time_limit_secs: Option<f64>,
    pub node_limit: Option<u64>,
    pub node_selection: NodeSelection,
    pub direction: BranchDirection,
    /// Try rounding the root relaxation into an incumbent.
    pub root_heuristic: bool,
    /// At every node, classify points by their margin under the relaxation's
    /// weights and offer the result as an incumbent.
    pub margin_heuristic: bool,
    /// Record one trace row per node.
    pub trace: bool,
    pub lp_max_iterations: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            priorities: None,
            gap: 1e-6,
            time_limit_secs: Some(7200.0),
            node_limit: None,
            node_selection: NodeSelection::BestBound,
            direction: BranchDirection::Margin,
            root_heuristic: true,
            margin_heuristic: false,
            trace: false,
            lp_max_iterations: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    /// Stopped at a limit with an incumbent.
    Feasible,
    Infeasible,
    /// Stopped at a limit without an incumbent.
    LimitReached,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Incumbent {
    pub node: u64,
    pub seconds: f64,
    pub objective: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub lp_iterations: u64,
    pub wall_secs: f64,
    pub max_depth: usize,
    pub incumbents: Vec<Incumbent>,
    /// Nodes whose relaxation could not be solved reliably; when nonzero the
    /// search cannot certify optimality.
    pub unresolved_nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub node: u64,
    pub depth: usize,
    pub bound: f64,
    pub fractional: usize,
    pub branch_var: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: SolveStatus,
    /// Objective of the incumbent (`NaN` without one).
    pub objective: f64,
    /// Best proven lower bound.
    pub bound: f64,
    /// All structural values of the incumbent.
    pub values: Vec<f64>,
    pub alpha: Vec<f64>,
    pub eta: f64,
    pub z: Vec<u8>,
    pub stats: SolveStats,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
}

impl Solution {
    pub(crate) fn empty(status: SolveStatus) -> Self {
        Solution {
            status,
            objective: f64::NAN,
            bound: f64::NEG_INFINITY,
            values: Vec::new(),
            alpha: Vec::new(),
            eta: f64::NAN,
            z: Vec::new(),
            stats: SolveStats::default(),
            trace: Vec::new(),
        }
    }

    /// Fills `alpha`, `eta` and `z` from `values` using the model layout.
    pub(crate) fn decode(&mut self, layout: Option<Layout>) {
        let Some(l) = layout else { return };
        if self.values.is_empty() {
            return;
        }
        self.alpha = l.alpha(&self.values).to_vec();
        self.eta = self.values[l.eta];
        self.z = l.zs(&self.values).iter().map(|&v| u8::from(v > 0.5)).collect();
    }

    /// Trace rows as CSV with a header line.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("node,depth,bound,fractional,branch_var\n");
        for r in &self.trace {
            let var = r.branch_var.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{},{}", r.node, r.depth, r.bound, r.fractional, var);
        }
        s
    }
}

/// Total order on finite-or-infinite bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Node {
    id: u64,
    depth: usize,
    /// Bound inherited from the parent.
    bound: f64,
    /// Branching decisions from the root: (variable, lower, upper).
    fixes: Vec<(usize, f64, f64)>,
}

/// Pops the smallest bound first, then the deepest node, then the lowest id.
struct Queued(Node);

impl Queued {
    fn key(&self) -> (Reverse<Key>, usize, Reverse<u64>) {
        (Reverse(Key(self.0.bound)), self.0.depth, Reverse(self.0.id))
    }
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

enum Open {
    Heap(BinaryHeap<Queued>),
    Stack(Vec<Node>),
}

impl Open {
    fn push(&mut self, n: Node) {
        match self {
            Open::Heap(h) => h.push(Queued(n)),
            Open::Stack(s) => s.push(n),
        }
    }

    fn pop(&mut self) -> Option<Node> {
        match self {
            Open::Heap(h) => h.pop().map(|q| q.0),
            Open::Stack(s) => s.pop(),
        }
    }

    fn min_bound(&self) -> f64 {
        let it: Box<dyn Iterator<Item = f64>> = match self {
            Open::Heap(h) => Box::new(h.iter().map(|q| q.0.bound)),
            Open::Stack(s) => Box::new(s.iter().map(|n| n.bound)),
        };
        it.fold(f64::INFINITY, f64::min)
    }

    fn is_empty(&self) -> bool {
        match self {
            Open::Heap(h) => h.is_empty(),
            Open::Stack(s) => s.is_empty(),
        }
    }
}

/// Cardinality information read from the model metadata.
struct Cardinality {
    /// (variable, weight) of the integer terms of the cardinality row.
    terms: Vec<(usize, f64)>,
    target: f64,
}

struct Search<'a> {
    model: &'a MilpModel,
    cfg: &'a SolverConfig,
    lp: LpSolver<'a>,
    lp_options: LpOptions,
    ints: Vec<usize>,
    priority: Vec<u32>,
    integral_objective: bool,
    card: Option<Cardinality>,
    root_lower: Vec<f64>,
    root_upper: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    incumbent: Option<(f64, Vec<f64>)>,
    stats: SolveStats,
    trace: Vec<TraceRow>,
    start: Instant,
    next_id: u64,
    /// Weight-variable part of each point's margin row, aligned with `card.terms`.
    margins: Option<Vec<Vec<(usize, f64)>>>,
    /// Best bound among open nodes when the search stops early.
    stats_bound: Option<f64>,
}

fn is_fractional(v: f64) -> bool {
    (v - v.round()).abs() > FRAC_TOL
}

impl<'a> Search<'a> {
    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn out_of_time(&self) -> bool {
        self.cfg.time_limit_secs.is_some_and(|t| self.elapsed() >= t)
    }

    fn out_of_nodes(&self) -> bool {
        self.cfg.node_limit.is_some_and(|n| self.stats.nodes >= n)
    }

    fn tighten(&self, bound: f64) -> f64 {
        if self.integral_objective {
            (bound - FRAC_TOL).ceil()
        } else {
            bound
        }
    }

    fn prunable(&self, bound: f64) -> bool {
        match &self.incumbent {
            Some((obj, _)) => self.tighten(bound) >= obj - self.cfg.gap,
            None => false,
        }
    }

    fn set_bounds(&mut self, fixes: &[(usize, f64, f64)]) {
        self.lower.copy_from_slice(&self.root_lower);
        self.upper.copy_from_slice(&self.root_upper);
        for &(j, l, u) in fixes {
            self.lower[j] = self.lower[j].max(l);
            self.upper[j] = self.upper[j].min(u);
        }
    }

    /// Solves the relaxation at the current bounds, retrying from a fresh
    /// basis when the warm-started solve does not finish cleanly.
    fn solve_lp(&mut self) -> LpResult {
        let mut r = self.lp.solve(&self.lower, &self.upper);
        self.stats.lp_iterations += r.iterations as u64;
        if !matches!(r.status, LpStatus::Optimal | LpStatus::Infeasible) {
            self.lp = LpSolver::new(self.model, self.lp_options);
            r = self.lp.solve(&self.lower, &self.upper);
            self.stats.lp_iterations += r.iterations as u64;
        }
        r
    }

    /// Offers an integral point; re-solves with the integers fixed so the
    /// continuous part is a clean vertex.
    fn offer(&mut self, values: &[f64]) -> bool {
        let mut lo = self.lower.clone();
        let mut hi = self.upper.clone();
        for &j in &self.ints {
            let v = values[j].round();
            lo[j] = v;
            hi[j] = v;
        }
        std::mem::swap(&mut self.lower, &mut lo);
        std::mem::swap(&mut self.upper, &mut hi);
        let r = self.solve_lp();
        std::mem::swap(&mut self.lower, &mut lo);
        std::mem::swap(&mut self.upper, &mut hi);

        let mut candidate = if r.status == LpStatus::Optimal {
            r.values
        } else {
            values.to_vec()
        };
        for &j in &self.ints {
            candidate[j] = candidate[j].round();
        }
        if self.model.max_violation(&candidate) > FEAS_TOL {
            return false;
        }
        let mut obj = self.model.objective_value(&candidate);
        if self.integral_objective && (obj - obj.round()).abs() <= FEAS_TOL {
            obj = obj.round();
        }
        let better = self
            .incumbent
            .as_ref()
            .is_none_or(|(best, _)| obj < best - self.cfg.gap);
        if better {
            self.stats.incumbents.push(Incumbent {
                node: self.stats.nodes,
                seconds: self.elapsed(),
                objective: obj,
            });
            self.incumbent = Some((obj, candidate));
        }
        better
    }

    fn pick_branch_var(&self, values: &[f64]) -> Option<(usize, usize)> {
        let mut best: Option<usize> = None;
        let mut count = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (k, &j) in self.ints.iter().enumerate() {
            let v = values[j];
            if !is_fractional(v) {
                continue;
            }
            count += 1;
            let score = match &self.cfg.priorities {
                Some(_) => f64::from(self.priority[k]),
                None => {
                    let f = v - v.floor();
                    f.min(1.0 - f)
                }
            };
            if score > best_score {
                best_score = score;
                best = Some(j);
            }
        }
        best.map(|j| (j, count))
    }

    /// `true` when the up branch (`x >= ceil`) should be explored first.
    fn up_first(&self, var: usize, value: f64, values: Option<&[f64]>) -> bool {
        if let (BranchDirection::Margin, Some(card), Some(margins), Some(v)) =
            (self.cfg.direction, &self.card, &self.margins, values)
        {
            if let Some(k) = card.terms.iter().position(|&(j, _)| j == var) {
                let s: f64 = margins[k].iter().map(|&(j, a)| a * v[j]).sum();
                if s.abs() > FRAC_TOL {
                    return s > 0.0;
                }
            }
        }
        match &self.card {
            Some(card) if card.terms.iter().any(|&(j, _)| j == var) => {
                let fixed_on: f64 = card
                    .terms
                    .iter()
                    .filter(|&&(j, _)| self.lower[j] >= 0.5)
                    .map(|&(_, w)| w)
                    .sum();
                fixed_on < card.target
            }
            _ => value - value.floor() >= 0.5,
        }
    }

    /// Classifies every point by the sign of its margin under the node's
    /// weights, scaled inside the box so that all margins reach 1.
    fn margin_heuristic(&mut self, values: &[f64]) {
        let (Some(margins), Some(card)) = (&self.margins, &self.card) else { return };
        let mut min_abs = f64::INFINITY;
        let mut on = 0.0;
        let mut signs = Vec::with_capacity(margins.len());
        for (row, &(_, w)) in margins.iter().zip(&card.terms) {
            let s: f64 = row.iter().map(|&(j, a)| a * values[j]).sum();
            min_abs = min_abs.min(s.abs());
            signs.push(s > 0.0);
            if s > 0.0 {
                on += w;
            }
        }
        if min_abs < 1e-9 {
            return;
        }
        let dev = (on - card.target).abs();
        if self.incumbent.as_ref().is_some_and(|(best, _)| dev >= best - self.cfg.gap) {
            return;
        }
        let c = (1.0 / min_abs).max(1.0) * (1.0 + 1e-9);
        let mut point = values.to_vec();
        // every margin row involves all weight variables
        if let Some(row) = margins.first() {
            for &(j, _) in row {
                point[j] = values[j] * c;
                if point[j] > self.root_upper[j] {
                    return;
                }
            }
        }
        for (&(j, _), &pos) in card.terms.iter().zip(&signs) {
            point[j] = if pos { 1.0 } else { 0.0 };
        }
        self.offer(&point);
    }

    fn root_heuristic(&mut self, values: &[f64]) {
        // round the relaxation as is
        let rounded: Vec<f64> = values.iter().map(|v| v.round()).collect();
        self.offer(&rounded);
        // and the top-weighted assignment that meets the cardinality target
        let Some(card) = &self.card else { return };
        let mut order: Vec<(usize, f64)> = card.terms.clone();
        order.sort_by(|a, b| values[b.0].total_cmp(&values[a.0]).then(a.0.cmp(&b.0)));
        let mut point = rounded;
        let mut acc = 0.0;
        for &(j, w) in &order {
            let on = acc + w <= card.target + FEAS_TOL;
            point[j] = if on { 1.0 } else { 0.0 };
            if on {
                acc += w;
            }
        }
        self.offer(&point);
    }

    fn run(&mut self) -> bool {
        let mut open = match self.cfg.node_selection {
            NodeSelection::BestBound => Open::Heap(BinaryHeap::new()),
            NodeSelection::DepthFirst => Open::Stack(Vec::new()),
        };
        let mut dive: Option<Node> = Some(Node {
            id: 0,
            depth: 0,
            bound: f64::NEG_INFINITY,
            fixes: Vec::new(),
        });
        self.next_id = 1;
        let mut exhausted = true;

        loop {
            let node = match dive.take().or_else(|| open.pop()) {
                Some(n) => n,
                None => break,
            };
            if self.prunable(node.bound) {
                continue;
            }
            if self.out_of_time() || self.out_of_nodes() {
                open.push(node);
                exhausted = false;
                break;
            }
            self.stats.nodes += 1;
            self.stats.max_depth = self.stats.max_depth.max(node.depth);
            self.set_bounds(&node.fixes);
            let r = self.solve_lp();

            let mut row = TraceRow {
                node: node.id,
                depth: node.depth,
                bound: f64::NAN,
                fractional: 0,
                branch_var: None,
            };
            let (bound, values) = match r.status {
                LpStatus::Infeasible => {
                    self.push_trace(row);
                    continue;
                }
                LpStatus::Optimal => (self.tighten(r.objective).max(node.bound), Some(r.values)),
                _ => {
                    self.stats.unresolved_nodes += 1;
                    (node.bound, None)
                }
            };
            row.bound = bound;
            if self.prunable(bound) {
                self.push_trace(row);
                continue;
            }

            let choice = match &values {
                Some(v) => {
                    if self.cfg.margin_heuristic {
                        self.margin_heuristic(v);
                        if self.prunable(bound) {
                            self.push_trace(row);
                            continue;
                        }
                    }
                    if node.depth == 0 && self.cfg.root_heuristic {
                        self.root_heuristic(v);
                        if self.prunable(bound) {
                            self.push_trace(row);
                            continue;
                        }
                    }
                    match self.pick_branch_var(v) {
                        Some((j, count)) => {
                            row.fractional = count;
                            Some((j, v[j]))
                        }
                        None => {
                            self.offer(v);
                            None
                        }
                    }
                }
                // no usable relaxation: split the first free integer variable
                None => self
                    .ints
                    .iter()
                    .find(|&&j| self.lower[j] < self.upper[j])
                    .map(|&j| (j, 0.5 * (self.lower[j] + self.upper[j]))),
            };
            let Some((var, value)) = choice else {
                self.push_trace(row);
                continue;
            };
            row.branch_var = Some(var);
            self.push_trace(row);

            let (down_hi, up_lo) = if is_fractional(value) {
                (value.floor(), value.ceil())
            } else {
                (value.floor(), value.floor() + 1.0)
            };
            let mut down = node.fixes.clone();
            down.push((var, self.lower[var], down_hi));
            let mut up = node.fixes;
            up.push((var, up_lo, self.upper[var]));
            let up_first = self.up_first(var, value, values.as_deref());
            let (first, second) = if up_first { (up, down) } else { (down, up) };
            let depth = node.depth + 1;
            let second = Node { id: self.next_id + 1, depth, bound, fixes: second };
            let first = Node { id: self.next_id, depth, bound, fixes: first };
            self.next_id += 2;
            match open {
                Open::Heap(_) => {
                    open.push(second);
                    dive = Some(first);
                }
                Open::Stack(_) => {
                    open.push(second);
                    open.push(first);
                }
            }
        }
        if !exhausted {
            let best_open = open.min_bound();
            self.stats_bound = Some(self.tighten(best_open));
        } else {
            debug_assert!(open.is_empty());
        }
        exhausted
    }

    fn push_trace(&mut self, row: TraceRow) {
        if self.cfg.trace {
            self.trace.push(row);
        }
    }
}

/// Solves `model` by LP-based branch and bound.
///
/// Models built by [`crate::model::build_milp`] carry metadata that enables
/// integral-bound rounding and cardinality-aware child ordering; any other
/// model is solved generically.
pub fn solve_milp(model: &MilpModel, cfg: &SolverConfig) -> Result<Solution> {
    model.validate()?;
    let start = Instant::now();
    let ints: Vec<usize> = model.integer_vars().collect();
    let mut is_int = vec![false; model.num_vars()];
    for &j in &ints {
        is_int[j] = true;
    }
    let priority = match &cfg.priorities {
        Some(p) if p.len() != ints.len() => {
            return Err(crate::Error::DimensionMismatch {
                expected: ints.len(),
                got: p.len(),
            })
        }
        Some(p) => p.clone(),
        None => vec![0; ints.len()],
    };
    let integral_objective = model
        .metadata
        .get(meta::INTEGRAL_OBJECTIVE)
        .is_some_and(|v| v == "true");
    let card = (|| {
        let row: usize = model.metadata.get(meta::CARDINALITY_ROW)?.parse().ok()?;
        let target: f64 = model.metadata.get(meta::CARDINALITY_TARGET)?.parse().ok()?;
        let terms = model
            .constraints()
            .get(row)?
            .coeffs
            .iter()
            .copied()
            .filter(|&(j, _)| is_int[j])
            .collect();
        Some(Cardinality { terms, target })
    })();
    let layout = Layout::from_model(model);
    let margins = match (&card, layout) {
        (Some(card), Some(l)) if model.num_rows() >= 2 * l.n_z => card
            .terms
            .iter()
            .map(|&(j, _)| {
                let row = model.constraints().get(2 * (j - l.z_start))?;
                row.coeffs.iter().any(|&(k, _)| k == j).then(|| {
                    row.coeffs.iter().copied().filter(|&(k, _)| k < l.n_alpha).collect()
                })
            })
            .collect::<Option<Vec<_>>>(),
        _ => None,
    };
    let root_lower: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
    let root_upper: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
    let lp_options = LpOptions {
        max_iterations: cfg.lp_max_iterations,
    };
    let mut search = Search {
        model,
        cfg,
        lp: LpSolver::new(model, lp_options),
        lp_options,
        ints,
        priority,
        integral_objective,
        card,
        lower: root_lower.clone(),
        upper: root_upper.clone(),
        root_lower,
        root_upper,
        incumbent: None,
        stats: SolveStats::default(),
        trace: Vec::new(),
        start,
        next_id: 0,
        stats_bound: None,
        margins,
    };
    let exhausted = search.run();
    let complete = exhausted && search.stats.unresolved_nodes == 0;
    let open_bound = search.stats_bound;
    let mut stats = std::mem::take(&mut search.stats);
    stats.wall_secs = start.elapsed().as_secs_f64();
    let trace = std::mem::take(&mut search.trace);

    let mut sol = match search.incumbent.take() {
        Some((obj, values)) => {
            let status = if complete { SolveStatus::Optimal } else { SolveStatus::Feasible };
            let bound = if complete { obj } else { open_bound.unwrap_or(f64::NEG_INFINITY).min(obj) };
            let mut s = Solution::empty(status);
            s.objective = obj;
            s.bound = bound;
            s.values = values;
            s
        }
        None if complete => Solution::empty(SolveStatus::Infeasible),
        None => {
            let mut s = Solution::empty(SolveStatus::LimitReached);
            s.bound = open_bound.unwrap_or(f64::NEG_INFINITY);
            s
        }
    };
    sol.stats = stats;
    sol.trace = trace;
    sol.decode(Layout::from_model(model));
    if sol.status.has_solution() && Layout::from_model(model).is_some() && integral_objective {
        sol.eta = sol.objective;
    }
    Ok(sol)
}
