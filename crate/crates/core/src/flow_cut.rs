//! Growth index, min-cuts, max-flows and the intermediate branching number.
//!
//! Every weight is carried as a natural log. A min-cut on an arena tree is the
//! recursion `m(v) = min(w(v), Σ m(children))`; on a spherically symmetric tree it
//! reduces to the cheapest level.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::generators::DegreeSequence;
use crate::numeric::{LogSum, LogValue};
use crate::tree::{Cutset, EdgeRef, FlowAssignment, Tree, VertexId};

/// Non-negative edge weights, evaluated in log space.
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeWeightProfile {
    /// `exp(-|e|^λ)`.
    Ibn { lambda: f64 },
    /// Open probability `exp(-|e|^(λ-1))`.
    Percolation { lambda: f64 },
    /// `base(e)^exponent`, e.g. `Ψ(e)^γ`.
    Power { base: Arc<EdgeWeightProfile>, exponent: f64 },
    /// Per-depth log weights, index = edge depth.
    DepthLog(Arc<Vec<f64>>),
    /// Per-edge log weights, index = child vertex.
    EdgeLog(Arc<Vec<f64>>),
    Constant(f64),
}

impl EdgeWeightProfile {
    /// `ln w(e)` for the edge into `v` at depth `depth`.
    pub fn log_weight(&self, v: VertexId, depth: usize) -> f64 {
        match self {
            Self::Power { base, exponent } => exponent * base.log_weight(v, depth),
            Self::EdgeLog(w) => w[v],
            _ => self.depth_log_weight(depth).expect("depth-only profile"),
        }
    }

    /// `ln w` when the profile depends on depth alone.
    pub fn depth_log_weight(&self, depth: usize) -> Option<f64> {
        let n = depth as f64;
        match self {
            Self::Ibn { lambda } => Some(-n.powf(*lambda)),
            Self::Percolation { lambda } => Some(-n.powf(lambda - 1.0)),
            Self::DepthLog(w) => Some(w[depth]),
            Self::Constant(c) => Some(c.ln()),
            Self::Power { base, exponent } => base.depth_log_weight(depth).map(|w| exponent * w),
            Self::EdgeLog(_) => None,
        }
    }

    pub fn weight(&self, v: VertexId, depth: usize) -> f64 {
        self.log_weight(v, depth).exp()
    }

    pub fn power(self, exponent: f64) -> Self {
        Self::Power { base: Arc::new(self), exponent }
    }
}

/// Truncation depths plus the two classification thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthSchedule {
    pub depths: Vec<usize>,
    pub eps_stop: f64,
    pub c_stay: f64,
}

pub const DEFAULT_EPS_STOP: f64 = 1e-6;
pub const DEFAULT_C_STAY: f64 = 1e-3;

impl DepthSchedule {
    pub fn new(depths: Vec<usize>, eps_stop: f64, c_stay: f64) -> Result<Self> {
        if depths.is_empty() || depths[0] == 0 || depths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("schedule depths must be positive and strictly increasing"));
        }
        if !(eps_stop > 0.0 && eps_stop < c_stay) {
            return Err(invalid("thresholds must satisfy 0 < eps_stop < c_stay"));
        }
        Ok(Self { depths, eps_stop, c_stay })
    }

    pub fn with_depths(depths: Vec<usize>) -> Result<Self> {
        Self::new(depths, DEFAULT_EPS_STOP, DEFAULT_C_STAY)
    }

    /// `from, 2·from, 4·from, …` up to `to`, with `to` appended if it is not a power-of-two step.
    pub fn doubling(from: usize, to: usize) -> Result<Self> {
        if from == 0 || from > to {
            return Err(invalid("doubling schedule needs 0 < from <= to"));
        }
        let mut depths: Vec<usize> = std::iter::successors(Some(from), |d| d.checked_mul(2))
            .take_while(|&d| d <= to)
            .collect();
        if *depths.last().expect("non-empty") != to {
            depths.push(to);
        }
        Self::with_depths(depths)
    }

    pub fn max_depth(&self) -> usize {
        *self.depths.last().expect("non-empty")
    }
}

/// Evenly spaced parameter values `start, start+step, …, ≤ stop`, rounded to 1e-9.
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return Err(invalid("grid needs step > 0 and stop >= start"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect())
}

/// The default λ grid `0.05, 0.10, …, 0.95`.
pub fn default_grid() -> Vec<f64> {
    grid(0.05, 0.95, 0.05).expect("valid constants")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Below,
    Above,
    Undecided,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Below => "below",
            Self::Above => "above",
            Self::Undecided => "undecided",
        })
    }
}

/// "below" if every value stays at least `c_stay`; "above" if the trajectory is
/// non-increasing and ends under `eps_stop`; otherwise "undecided".
pub fn classify(trajectory: &[LogValue], sched: &DepthSchedule) -> Classification {
    let stay = sched.c_stay.ln();
    let stop = sched.eps_stop.ln();
    if trajectory.iter().all(|v| v.ln >= stay) {
        return Classification::Below;
    }
    let monotone = trajectory.windows(2).all(|w| w[1].ln <= w[0].ln);
    match trajectory.last() {
        Some(last) if monotone && last.ln < stop => Classification::Above,
        _ => Classification::Undecided,
    }
}

/// Interval between the largest "below" and the smallest "above" parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    /// `None` when nothing classified below (the critical value sits at or under the grid).
    pub lower: Option<f64>,
    /// `None` when nothing classified above (the critical value lies beyond the grid).
    pub upper: Option<f64>,
    pub undecided: Vec<f64>,
    /// False when some "above" parameter is smaller than some "below" one.
    pub consistent: bool,
}

impl Bracket {
    pub fn from_classes(classes: &[(f64, Classification)]) -> Self {
        let below = classes.iter().filter(|c| c.1 == Classification::Below).map(|c| c.0);
        let above = classes.iter().filter(|c| c.1 == Classification::Above).map(|c| c.0);
        let lower = below.clone().reduce(f64::max);
        let upper = above.clone().reduce(f64::min);
        let consistent = match (lower, upper) {
            (Some(l), Some(u)) => l <= u,
            _ => true,
        };
        let undecided =
            classes.iter().filter(|c| c.1 == Classification::Undecided).map(|c| c.0).collect();
        Self { lower, upper, undecided, consistent }
    }

    pub fn lo(&self) -> f64 {
        self.lower.unwrap_or(f64::NEG_INFINITY)
    }

    pub fn hi(&self) -> f64 {
        self.upper.unwrap_or(f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo() <= x && x <= self.hi()
    }

    pub fn width(&self) -> f64 {
        self.hi() - self.lo()
    }

    pub fn overlaps(&self, other: &Bracket) -> bool {
        self.lo().max(other.lo()) <= self.hi().min(other.hi())
    }

    pub fn overlaps_interval(&self, lo: f64, hi: f64) -> bool {
        self.lo().max(lo) <= self.hi().min(hi)
    }
}

impl std::fmt::Display for Bracket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v}"));
        write!(f, "[{}, {}]", show(self.lower), show(self.upper))
    }
}

/// One value of a parameter sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub depth: usize,
    pub value: LogValue,
}

/// Trajectories for every parameter, their classification and the bracket.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub classes: Vec<(f64, Classification)>,
    pub bracket: Bracket,
}

impl Sweep {
    /// Evaluates `trajectory(param)` over the schedule for each parameter in parallel.
    pub fn run(
        params: &[f64],
        sched: &DepthSchedule,
        trajectory: impl Fn(f64) -> Result<Vec<LogValue>> + Sync,
    ) -> Result<Self> {
        let per_param: Vec<Vec<LogValue>> =
            params.par_iter().map(|&p| trajectory(p)).collect::<Result<_>>()?;
        let mut rows = Vec::new();
        let mut classes = Vec::new();
        for (&p, traj) in params.iter().zip(&per_param) {
            for (&depth, &value) in sched.depths.iter().zip(traj) {
                rows.push(SweepRow { param: p, depth, value });
            }
            classes.push((p, classify(traj, sched)));
        }
        let bracket = Bracket::from_classes(&classes);
        Ok(Self { rows, classes, bracket })
    }

    pub fn class_of(&self, param: f64) -> Option<Classification> {
        self.classes.iter().find(|c| (c.0 - param).abs() < 1e-9).map(|c| c.1)
    }
}

/// Where a min-cut may be placed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CutRange {
    /// Frontier depth `N`; the cut separates the root from `E_N`.
    pub frontier: usize,
    /// Edges shallower than this may not be cut.
    pub shallowest: usize,
}

impl CutRange {
    pub fn to(frontier: usize) -> Self {
        Self { frontier, shallowest: 1 }
    }
}

/// Minimum cut value with the cut that attains it.
#[derive(Clone, Debug, PartialEq)]
pub struct MinCut {
    pub value: LogValue,
    pub cut: CutShape,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CutShape {
    Edges(Cutset),
    /// All edges into one level of a spherically symmetric tree.
    Level(usize),
}

/// A tree on which cut values and level counts can be computed.
pub trait CutSource: Sync {
    fn horizon(&self) -> usize;
    /// `ln #E_n` for `n = 0..=upto`.
    fn log_level_sizes(&self, upto: usize) -> Vec<f64>;
    fn min_cut_in(&self, w: &EdgeWeightProfile, range: CutRange) -> Result<MinCut>;

    fn min_cut_value(&self, w: &EdgeWeightProfile, frontier: usize) -> Result<LogValue> {
        Ok(self.min_cut_in(w, CutRange::to(frontier))?.value)
    }
}

impl CutSource for Tree {
    fn horizon(&self) -> usize {
        self.height()
    }

    fn log_level_sizes(&self, upto: usize) -> Vec<f64> {
        (0..=upto).map(|n| (self.level_set(n).len() as f64).ln()).collect()
    }

    fn min_cut_in(&self, w: &EdgeWeightProfile, range: CutRange) -> Result<MinCut> {
        let table = cut_table(self, w, range)?;
        Ok(MinCut { value: LogValue::from_ln(table.m[Tree::ROOT]), cut: CutShape::Edges(table.cutset(self)) })
    }
}

impl CutSource for DegreeSequence {
    fn horizon(&self) -> usize {
        DegreeSequence::horizon(self)
    }

    fn log_level_sizes(&self, upto: usize) -> Vec<f64> {
        let mut all = DegreeSequence::log_level_sizes(self);
        all.truncate(upto + 1);
        all
    }

    fn min_cut_in(&self, w: &EdgeWeightProfile, range: CutRange) -> Result<MinCut> {
        if range.frontier > DegreeSequence::horizon(self) {
            return Err(Error::TooShallow { available: DegreeSequence::horizon(self), requested: range.frontier });
        }
        if range.frontier < range.shallowest.max(1) {
            return Err(invalid("empty cut range"));
        }
        let sizes = DegreeSequence::log_level_sizes(self);
        let mut best = (f64::INFINITY, 0usize);
        for n in range.shallowest.max(1)..=range.frontier {
            let lw = w
                .depth_log_weight(n)
                .ok_or_else(|| invalid("spherical reduction needs a depth-only weight profile"))?;
            let v = sizes[n] + lw;
            if v < best.0 {
                best = (v, n);
            }
        }
        Ok(MinCut { value: LogValue::from_ln(best.0), cut: CutShape::Level(best.1) })
    }
}

/// Per-vertex results of the min-cut recursion.
struct CutTable {
    /// `ln m(v)`; `-inf` below dead ends.
    m: Vec<f64>,
    /// `ln Σ_children m(c)`.
    below: Vec<f64>,
    /// Whether the edge into `v` is cut when `v` is reached.
    cut_here: Vec<bool>,
    frontier: usize,
}

fn cut_table(t: &Tree, w: &EdgeWeightProfile, range: CutRange) -> Result<CutTable> {
    let n = range.frontier;
    if n == 0 {
        return Err(invalid("frontier depth must be at least 1"));
    }
    if n > t.height() {
        return Err(Error::TooShallow { available: t.height(), requested: n });
    }
    if range.shallowest > n {
        return Err(invalid("empty cut range"));
    }
    let len = t.len();
    let mut m = vec![f64::NEG_INFINITY; len];
    let mut below = vec![f64::NEG_INFINITY; len];
    let mut cut_here = vec![false; len];
    // Children always carry larger ids than their parent.
    for v in (0..len).rev() {
        let d = t.depth(v);
        if d > n {
            continue;
        }
        let own = if v == Tree::ROOT { f64::INFINITY } else { w.log_weight(v, d) };
        if d == n {
            m[v] = own;
            cut_here[v] = true;
            continue;
        }
        let mut acc = LogSum::new();
        for &c in t.children(v) {
            acc.add(m[c]);
        }
        let s = acc.value();
        below[v] = s;
        if v != Tree::ROOT && d >= range.shallowest && own <= s {
            m[v] = own;
            cut_here[v] = true;
        } else {
            m[v] = s;
        }
    }
    Ok(CutTable { m, below, cut_here, frontier: n })
}

impl CutTable {
    fn cutset(&self, t: &Tree) -> Cutset {
        let mut edges = Vec::new();
        let mut stack: Vec<VertexId> = t.children(Tree::ROOT).to_vec();
        while let Some(v) = stack.pop() {
            if self.m[v] == f64::NEG_INFINITY {
                continue;
            }
            if self.cut_here[v] {
                edges.push(EdgeRef(v));
            } else if t.depth(v) < self.frontier {
                stack.extend_from_slice(t.children(v));
            }
        }
        Cutset::new(edges)
    }
}

/// Minimum of `Σ_{e∈π} w(e)` over cutsets `π` separating the root from `E_N`.
pub fn min_cut(t: &Tree, w: &EdgeWeightProfile, frontier: usize) -> Result<(LogValue, Cutset)> {
    let table = cut_table(t, w, CutRange::to(frontier))?;
    Ok((LogValue::from_ln(table.m[Tree::ROOT]), table.cutset(t)))
}

/// A maximal flow to `E_N` with per-edge log values kept alongside.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxFlow {
    pub flow: FlowAssignment,
    pub log_flow: Vec<f64>,
    pub strength: LogValue,
}

/// Builds a flow of strength equal to the min-cut, pushing flow top-down in
/// proportion to each child's subtree min-cut.
pub fn max_flow(t: &Tree, w: &EdgeWeightProfile, frontier: usize) -> Result<MaxFlow> {
    let table = cut_table(t, w, CutRange::to(frontier))?;
    let mut log_flow = vec![f64::NEG_INFINITY; t.len()];
    let total = table.m[Tree::ROOT];
    for v in 0..t.len() {
        if t.depth(v) >= frontier {
            continue;
        }
        let inflow = if v == Tree::ROOT { total } else { log_flow[v] };
        if inflow == f64::NEG_INFINITY {
            continue;
        }
        let s = table.below[v];
        for &c in t.children(v) {
            log_flow[c] = inflow + table.m[c] - s;
        }
    }
    let flow = FlowAssignment {
        values: log_flow.iter().enumerate().map(|(v, lf)| if v == 0 { 0.0 } else { lf.exp() }).collect(),
    };
    Ok(MaxFlow { flow, log_flow, strength: LogValue::from_ln(total) })
}

/// Growth index at depth `N` with its raw log-log diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub estimate: f64,
    /// `ln ln #E_N / ln N`.
    pub loglog_ratio: f64,
}

/// Largest grid λ for which `#E_n · 2^(-n^λ)` stays at least 1 over the upper
/// half `⌈N/2⌉ ≤ n ≤ N` of the truncation; the grid minimum when none does.
pub fn igr_estimate(t: &dyn CutSource, n: usize, lambdas: &[f64]) -> Result<GrowthEstimate> {
    if n == 0 {
        return Err(invalid("depth must be at least 1"));
    }
    if n > t.horizon() {
        return Err(Error::TooShallow { available: t.horizon(), requested: n });
    }
    if lambdas.is_empty() {
        return Err(invalid("empty grid"));
    }
    let sizes = t.log_level_sizes(n);
    let window = n.div_ceil(2).max(1)..=n;
    let sustained = |lambda: f64| {
        window.clone().all(|k| sizes[k] / std::f64::consts::LN_2 >= (k as f64).powf(lambda))
    };
    let lowest = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let estimate = lambdas.iter().copied().filter(|&l| sustained(l)).fold(lowest, f64::max);
    Ok(GrowthEstimate { estimate, loglog_ratio: sizes[n].ln() / (n as f64).ln() })
}

/// Classifies every λ by the min-cut trajectory of `exp(-|e|^λ)` over the schedule.
pub fn ibn_estimate(t: &dyn CutSource, sched: &DepthSchedule, lambdas: &[f64]) -> Result<Sweep> {
    if lambdas.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
        return Err(invalid("λ grid must lie inside (0, 1)"));
    }
    if sched.max_depth() > t.horizon() {
        return Err(Error::TooShallow { available: t.horizon(), requested: sched.max_depth() });
    }
    Sweep::run(lambdas, sched, |lambda| {
        let w = EdgeWeightProfile::Ibn { lambda };
        sched.depths.iter().map(|&n| t.min_cut_value(&w, n)).collect()
    })
}
