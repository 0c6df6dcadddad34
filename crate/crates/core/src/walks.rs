//! Random walks with conductances: effective conductance, Monte Carlo walks,
//! heavy-tailed random conductances, ruin probabilities and the coupled percolation.

use std::sync::Arc;

use rand_core::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::flow_cut::{CutSource, DepthSchedule, EdgeWeightProfile, Sweep};
use crate::generators::DegreeSequence;
use crate::numeric::{log_sum_exp, wilson_interval, LogSum, LogValue};
use crate::rng;
use crate::tree::{Tree, VertexId};

/// Positive edge conductances, held as natural logs.
#[derive(Clone, Debug, PartialEq)]
pub enum ConductanceField {
    /// `c(e) = exp(-|e|^λ)`.
    Deterministic { lambda: f64 },
    /// i.i.d. heavy-tailed conductances; `log_c` is indexed by child vertex.
    Sampled { lambda: f64, seed: u64, log_c: Arc<Vec<f64>> },
    /// Index = edge depth.
    DepthLog(Arc<Vec<f64>>),
    /// Index = child vertex.
    EdgeLog(Arc<Vec<f64>>),
    Constant(f64),
}

impl ConductanceField {
    pub fn log_conductance(&self, v: VertexId, depth: usize) -> f64 {
        match self {
            Self::Sampled { log_c, .. } => log_c[v],
            Self::EdgeLog(w) => w[v],
            _ => self.depth_log(depth).expect("depth-only field"),
        }
    }

    pub fn depth_log(&self, depth: usize) -> Option<f64> {
        match self {
            Self::Deterministic { lambda } => Some(-(depth as f64).powf(*lambda)),
            Self::DepthLog(w) => Some(w[depth]),
            Self::Constant(c) => Some(c.ln()),
            Self::Sampled { .. } | Self::EdgeLog(_) => None,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = match self {
            Self::Constant(c) => !(*c > 0.0),
            Self::Sampled { log_c: w, .. } | Self::EdgeLog(w) | Self::DepthLog(w) => {
                w.iter().skip(1).any(|x| *x == f64::NEG_INFINITY || x.is_nan())
            }
            Self::Deterministic { .. } => false,
        };
        if bad {
            Err(invalid("conductances must be strictly positive"))
        } else {
            Ok(())
        }
    }
}

/// `ln` of the series combination of two conductances given as logs.
fn log_series(a: f64, b: f64) -> f64 {
    -log_sum_exp([-a, -b])
}

/// Networks on which the root-to-`E_N` effective conductance is computable.
pub trait Network {
    fn horizon(&self) -> usize;
    fn effective_conductance(&self, c: &ConductanceField, n: usize) -> Result<LogValue>;
}

impl Network for Tree {
    fn horizon(&self) -> usize {
        self.height()
    }

    /// Series/parallel reduction with `R = 0` on the frontier.
    fn effective_conductance(&self, c: &ConductanceField, n: usize) -> Result<LogValue> {
        c.check()?;
        if n == 0 || n > self.height() {
            return Err(Error::TooShallow { available: self.height(), requested: n });
        }
        // ln of the conductance from v down to the frontier; +inf on the frontier.
        let mut below = vec![f64::NEG_INFINITY; self.len()];
        for v in (0..self.len()).rev() {
            let d = self.depth(v);
            if d > n {
                continue;
            }
            if d == n {
                below[v] = f64::INFINITY;
                continue;
            }
            let mut acc = LogSum::new();
            for &ch in self.children(v) {
                acc.add(log_series(c.log_conductance(ch, d + 1), below[ch]));
            }
            below[v] = acc.value();
        }
        Ok(LogValue::from_ln(below[Tree::ROOT]))
    }
}

impl Network for DegreeSequence {
    fn horizon(&self) -> usize {
        DegreeSequence::horizon(self)
    }

    fn effective_conductance(&self, c: &ConductanceField, n: usize) -> Result<LogValue> {
        c.check()?;
        if n == 0 || n > DegreeSequence::horizon(self) {
            return Err(Error::TooShallow { available: DegreeSequence::horizon(self), requested: n });
        }
        let mut below = f64::INFINITY;
        for d in (0..n).rev() {
            let edge = c.depth_log(d + 1).ok_or_else(|| invalid("symmetric reduction needs a depth-only field"))?;
            below = (self.degree(d) as f64).ln() + log_series(edge, below);
        }
        Ok(LogValue::from_ln(below))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkResult {
    pub returned: bool,
    pub steps: u64,
    pub max_depth: usize,
}

/// Transition data for walks on an arena tree.
pub struct WalkTable<'a> {
    tree: &'a Tree,
    up: Vec<f64>,
    /// Cumulative probability of each child among its siblings.
    child_cdf: Vec<f64>,
}

impl<'a> WalkTable<'a> {
    pub fn new(t: &'a Tree, c: &ConductanceField) -> Result<Self> {
        c.check()?;
        let n = t.len();
        let mut up = vec![0.0; n];
        let mut child_cdf = vec![1.0; n];
        for v in 0..n {
            let d = t.depth(v);
            let kids = t.children(v);
            let logs: Vec<f64> = kids.iter().map(|&ch| c.log_conductance(ch, d + 1)).collect();
            let down = log_sum_exp(logs.iter().copied());
            up[v] = if v == Tree::ROOT {
                0.0
            } else if kids.is_empty() {
                1.0
            } else {
                let own = c.log_conductance(v, d);
                1.0 / (1.0 + (down - own).exp())
            };
            let mut acc = 0.0;
            for (&ch, &l) in kids.iter().zip(&logs) {
                acc += (l - down).exp();
                child_cdf[ch] = acc;
            }
            if let Some(&last) = kids.last() {
                child_cdf[last] = 1.0;
            }
        }
        Ok(Self { tree: t, up, child_cdf })
    }

    /// One walk from the root until its first return or `step_cap` steps.
    pub fn walk(&self, step_cap: u64, r: &mut impl RngCore) -> WalkResult {
        let t = self.tree;
        let mut v = Tree::ROOT;
        let mut max_depth = 0;
        for step in 1..=step_cap {
            let u = rng::unit(r);
            if u < self.up[v] {
                v = t.parent(v).expect("up probability is zero at the root");
                if v == Tree::ROOT {
                    return WalkResult { returned: true, steps: step, max_depth };
                }
            } else {
                let kids = t.children(v);
                let x = rng::unit(r);
                v = *kids.iter().find(|&&ch| x < self.child_cdf[ch]).unwrap_or(kids.last().expect("has children"));
                max_depth = max_depth.max(t.depth(v));
            }
        }
        WalkResult { returned: false, steps: step_cap, max_depth }
    }
}

/// A single walk with seed-addressed randomness.
pub fn simulate_walk(t: &Tree, c: &ConductanceField, step_cap: u64, seed: u64) -> Result<WalkResult> {
    if step_cap == 0 {
        return Err(invalid("step cap must be at least 1"));
    }
    Ok(WalkTable::new(t, c)?.walk(step_cap, &mut rng::stream(seed, rng::domain::WALK, 0)))
}

/// `trials` walks; trial `i` draws from stream `(seed, i)`.
pub fn walk_trials(t: &Tree, c: &ConductanceField, step_cap: u64, trials: u64, seed: u64) -> Result<Vec<WalkResult>> {
    if step_cap == 0 {
        return Err(invalid("step cap must be at least 1"));
    }
    let table = WalkTable::new(t, c)?;
    Ok((0..trials)
        .into_par_iter()
        .map(|i| table.walk(step_cap, &mut rng::stream(seed, rng::domain::WALK, i)))
        .collect())
}

/// The depth process of a walk on a spherically symmetric tree, a birth-death chain.
pub struct DepthChain {
    /// Probability of stepping toward the root from each depth.
    up: Vec<f64>,
}

impl DepthChain {
    /// Chain on depths `0..=horizon` of `d`; the frontier reflects.
    pub fn new(d: &DegreeSequence, c: &ConductanceField) -> Result<Self> {
        c.check()?;
        let h = d.horizon();
        let mut up = vec![0.0; h + 1];
        up[h] = 1.0;
        for n in 1..h {
            let own = c.depth_log(n).ok_or_else(|| invalid("depth chain needs a depth-only field"))?;
            let child = c.depth_log(n + 1).expect("depth-only");
            let down = (d.degree(n) as f64).ln() + child;
            up[n] = 1.0 / (1.0 + (down - own).exp());
        }
        Ok(Self { up })
    }

    pub fn walk(&self, step_cap: u64, r: &mut impl RngCore) -> WalkResult {
        let mut depth = 0usize;
        let mut max_depth = 0;
        for step in 1..=step_cap {
            if rng::unit(r) < self.up[depth] {
                depth -= 1;
                if depth == 0 {
                    return WalkResult { returned: true, steps: step, max_depth };
                }
            } else {
                depth += 1;
                max_depth = max_depth.max(depth);
            }
        }
        WalkResult { returned: false, steps: step_cap, max_depth }
    }

    pub fn trials(&self, step_cap: u64, trials: u64, seed: u64) -> Vec<WalkResult> {
        (0..trials)
            .into_par_iter()
            .map(|i| self.walk(step_cap, &mut rng::stream(seed, rng::domain::WALK, i)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkSummary {
    pub trials: u64,
    pub returns: u64,
    pub frequency: f64,
    /// 95% Wilson interval of the return frequency.
    pub interval: (f64, f64),
}

pub fn summarize(results: &[WalkResult]) -> WalkSummary {
    let trials = results.len() as u64;
    let returns = results.iter().filter(|r| r.returned).count() as u64;
    WalkSummary {
        trials,
        returns,
        frequency: if trials == 0 { 0.0 } else { returns as f64 / trials as f64 },
        interval: wilson_interval(returns, trials, 1.96),
    }
}

/// `ln C` for one heavy-tailed draw: `t = u^(-1/(1-λ))`, `C = exp(-t^λ)`.
pub fn heavy_tail_log_conductance(u: f64, lambda: f64) -> f64 {
    let log_t = -u.ln() / (1.0 - lambda);
    -(lambda * log_t).exp()
}

/// Exact `P[C <= x]` for the heavy-tailed law, `x ∈ (0, e^-1]`.
pub fn heavy_tail_cdf(log_x: f64, lambda: f64) -> f64 {
    if log_x >= -1.0 {
        return 1.0;
    }
    // x = exp(-s^λ)  =>  P[C <= x] = P[t >= s] = s^(λ-1)
    let log_s = (-log_x).ln() / lambda;
    ((lambda - 1.0) * log_s).exp()
}

/// i.i.d. conductances on every edge of `t`; edge `v` uses word `v` of the seed's stream.
pub fn sample_conductances(t: &Tree, lambda: f64, seed: u64) -> Result<ConductanceField> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid("λ must lie in (0, 1)"));
    }
    let mut keyed = rng::Keyed::new(seed, rng::domain::CONDUCTANCE);
    let mut log_c = vec![0.0; t.len()];
    for (v, slot) in log_c.iter_mut().enumerate().skip(1) {
        *slot = heavy_tail_log_conductance(keyed.open_zero(v as u64), lambda);
    }
    Ok(ConductanceField::Sampled { lambda, seed, log_c: Arc::new(log_c) })
}

/// `count` independent draws of `ln C`, for checking the sampler.
pub fn sample_log_conductances(lambda: f64, seed: u64, count: usize) -> Vec<f64> {
    let mut r = rng::stream(seed, rng::domain::SAMPLER, 0);
    (0..count).map(|_| heavy_tail_log_conductance(rng::unit_open_zero(&mut r), lambda)).collect()
}

/// Largest gap between the empirical CDF of `ln C` samples and the exact law.
pub fn ks_distance(samples: &mut [f64], lambda: f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = heavy_tail_cdf(x, lambda);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// One-step and cumulative ruin probabilities along root paths, as logs.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiField {
    /// `ln ψ(e) = ln S(e⁻ edge) - ln S(e)`, zero at depth 1.
    pub log_step: Vec<f64>,
    /// `ln Ψ(e) = Σ_{g≤e} ln ψ(g)`.
    pub log_cumulative: Vec<f64>,
    /// `ln S(e)` with `S(e) = Σ_{g≤e} 1/C_g`.
    pub log_resistance: Vec<f64>,
}

impl PsiField {
    /// `Ψ` as an edge weight profile.
    pub fn profile(&self) -> EdgeWeightProfile {
        EdgeWeightProfile::EdgeLog(Arc::new(self.log_cumulative.clone()))
    }

    /// `1 / S(e)`, the reciprocal path resistance.
    pub fn inverse_resistance(&self, v: VertexId) -> f64 {
        (-self.log_resistance[v]).exp()
    }
}

pub fn psi_field(t: &Tree, c: &ConductanceField, n: usize) -> Result<PsiField> {
    c.check()?;
    if n > t.height() {
        return Err(Error::TooShallow { available: t.height(), requested: n });
    }
    let len = t.len();
    let mut log_step = vec![0.0; len];
    let mut log_cumulative = vec![0.0; len];
    let mut log_resistance = vec![f64::NEG_INFINITY; len];
    for v in 1..len {
        let d = t.depth(v);
        if d > n {
            continue;
        }
        let p = t.parent(v).expect("non-root");
        let r = -c.log_conductance(v, d);
        if d == 1 {
            log_resistance[v] = r;
        } else {
            log_resistance[v] = log_sum_exp([log_resistance[p], r]);
            log_step[v] = log_resistance[p] - log_resistance[v];
            log_cumulative[v] = log_cumulative[p] + log_step[v];
        }
    }
    Ok(PsiField { log_step, log_cumulative, log_resistance })
}

/// Classifies each γ by the min-cut trajectory of `Ψ(e)^γ`.
pub fn rt_estimate(t: &dyn CutSource, psi: &EdgeWeightProfile, gammas: &[f64], sched: &DepthSchedule) -> Result<Sweep> {
    if gammas.iter().any(|&g| !(g > 0.0)) {
        return Err(invalid("γ grid must be positive"));
    }
    if sched.max_depth() > t.horizon() {
        return Err(Error::TooShallow { available: t.horizon(), requested: sched.max_depth() });
    }
    Sweep::run(gammas, sched, |gamma| {
        let w = psi.clone().power(gamma);
        sched.depths.iter().map(|&n| t.min_cut_value(&w, n)).collect()
    })
}

/// The percolation read off a sampled field: `e` is open iff `1/C_g <= exp(|g|^λ)`
/// for every `g <= e` of depth at least 2.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledPercolation {
    pub open: Vec<bool>,
    /// Marginal open probability `ψ_C(e)` of each edge's own condition.
    pub psi: Vec<f64>,
}

impl CoupledPercolation {
    /// Probability that `v` is joined to the root, `Π_{g≤v} ψ_C(g)`.
    pub fn connection_probability(&self, t: &Tree, v: VertexId) -> f64 {
        t.ancestors(v).filter(|&u| u != Tree::ROOT).map(|u| self.psi[u]).product()
    }
}

/// Probability of `1/C <= exp(n^λ)` under the heavy-tailed law with parameter `law_lambda`.
pub fn coupled_open_probability(depth: usize, lambda: f64, law_lambda: f64) -> f64 {
    if depth <= 1 {
        return 1.0;
    }
    // 1/C = exp(t^μ) <= exp(n^λ)  <=>  t <= n^(λ/μ);  P[t > s] = s^(μ-1)
    let log_s = lambda / law_lambda * (depth as f64).ln();
    -((law_lambda - 1.0) * log_s).exp_m1()
}

pub fn coupled_percolation(t: &Tree, c: &ConductanceField, lambda: f64, n: usize) -> Result<CoupledPercolation> {
    let ConductanceField::Sampled { lambda: law_lambda, log_c, .. } = c else {
        return Err(invalid("coupled percolation needs a sampled field"));
    };
    if n > t.height() {
        return Err(Error::TooShallow { available: t.height(), requested: n });
    }
    let mut open = vec![false; t.len()];
    let mut psi = vec![1.0; t.len()];
    open[Tree::ROOT] = true;
    for v in 1..t.len() {
        let d = t.depth(v);
        if d > n {
            continue;
        }
        psi[v] = coupled_open_probability(d, lambda, *law_lambda);
        let own = d == 1 || -log_c[v] <= (d as f64).powf(lambda);
        open[v] = own && open[t.parent(v).expect("non-root")];
    }
    Ok(CoupledPercolation { open, psi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete, path};

    #[test]
    fn path_conductance_is_series_sum() {
        let t = path(12);
        let c = ConductanceField::Deterministic { lambda: 0.5 };
        let got = t.effective_conductance(&c, 12).unwrap().value();
        let expected = 1.0 / (1..=12).map(|n| (n as f64).sqrt().exp()).sum::<f64>();
        assert!((got - expected).abs() < 1e-14 * expected);
    }

    #[test]
    fn binary_unit_conductance() {
        let t = complete(2, 3);
        let got = t.effective_conductance(&ConductanceField::Constant(1.0), 3).unwrap().value();
        assert!((got - 8.0 / 7.0).abs() < 1e-14);
        let d = DegreeSequence::constant(2, 3).unwrap();
        let sym = d.effective_conductance(&ConductanceField::Constant(1.0), 3).unwrap().value();
        assert!((sym - 8.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn single_edge_walk_returns_in_two() {
        let t = path(1);
        let r = simulate_walk(&t, &ConductanceField::Constant(1.0), 10, 1).unwrap();
        assert_eq!(r, WalkResult { returned: true, steps: 2, max_depth: 1 });
        assert!(simulate_walk(&t, &ConductanceField::Constant(1.0), 0, 1).is_err());
    }

    #[test]
    fn sampler_boundary_and_support() {
        assert!((heavy_tail_log_conductance(1.0, 0.4) + 1.0).abs() < 1e-15);
        assert!(sample_log_conductances(0.3, 1, 10_000).iter().all(|&l| l <= -1.0));
        assert_eq!(heavy_tail_cdf(-1.0, 0.5), 1.0);
        let lambda: f64 = 0.6;
        let x = -(2f64.powf(lambda));
        assert!((heavy_tail_cdf(x, lambda) - 2f64.powf(lambda - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn psi_on_unit_path() {
        let t = path(6);
        let f = psi_field(&t, &ConductanceField::Constant(1.0), 6).unwrap();
        for v in 1..=6 {
            assert!((f.inverse_resistance(v) - 1.0 / v as f64).abs() < 1e-15);
            assert!((f.log_cumulative[v].exp() - 1.0 / v as f64).abs() < 1e-15);
        }
        assert_eq!(f.log_step[1], 0.0);
    }

    #[test]
    fn coupled_depth_one_always_open() {
        let t = complete(2, 4);
        let c = sample_conductances(&t, 0.5, 3).unwrap();
        let cp = coupled_percolation(&t, &c, 0.5, 4).unwrap();
        assert!(t.level_set(1).iter().all(|&v| cp.open[v]));
        for v in 1..t.len() {
            if cp.open[v] {
                assert!(cp.open[t.parent(v).unwrap()]);
            }
        }
        assert!((coupled_open_probability(4, 0.5, 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sampled_fields_reproducible() {
        let t = complete(2, 5);
        assert_eq!(sample_conductances(&t, 0.3, 8).unwrap(), sample_conductances(&t, 0.3, 8).unwrap());
        assert_ne!(sample_conductances(&t, 0.3, 8).unwrap(), sample_conductances(&t, 0.3, 9).unwrap());
    }
}
