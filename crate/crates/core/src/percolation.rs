//! Independent edge percolation with depth-dependent open probabilities.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::flow_cut::{DepthSchedule, Sweep};
use crate::generators::DegreeSequence;
use crate::numeric::{ln_one_minus_exp, LogSum, LogValue};
use crate::rng;
use crate::tree::Tree;
use crate::walks::{ConductanceField, Network};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PercolationLaw {
    /// `p(e) = exp(-|e|^(λ-1))`.
    Depth { lambda: f64 },
    /// The same probability on every edge.
    Constant(f64),
}

impl PercolationLaw {
    pub fn depth(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(invalid("λ must lie in (0, 1)"));
        }
        Ok(Self::Depth { lambda })
    }

    pub fn log_p(&self, depth: usize) -> f64 {
        match self {
            Self::Depth { lambda } => -(depth as f64).powf(lambda - 1.0),
            Self::Constant(p) => p.ln(),
        }
    }

    pub fn p(&self, depth: usize) -> f64 {
        self.log_p(depth).exp()
    }
}

/// `ln(-ln(1 - exp(y)))`, i.e. the log-magnitude of `ln(1 - x)` for `x = e^y`.
fn log_neg_log1m(y: f64) -> f64 {
    if y < -30.0 {
        // -ln(1-x) = x + x²/2 + …
        y + (0.5 * y.exp()).ln_1p()
    } else {
        (-ln_one_minus_exp(y)).ln()
    }
}

/// `ln(1 - exp(-e^l))`.
fn log_one_minus_exp_neg(l: f64) -> f64 {
    if l == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if l < -30.0 {
        l - 0.5 * l.exp()
    } else {
        ln_one_minus_exp(-l.exp())
    }
}

/// Trees on which the survival recursion can be evaluated.
pub trait Percolable: Sync {
    fn horizon(&self) -> usize;
    /// `ln P[root ↔ E_N]`.
    fn log_survival(&self, law: &PercolationLaw, n: usize) -> Result<f64>;
}

impl Percolable for Tree {
    fn horizon(&self) -> usize {
        self.height()
    }

    fn log_survival(&self, law: &PercolationLaw, n: usize) -> Result<f64> {
        if n > self.height() {
            return Err(Error::TooShallow { available: self.height(), requested: n });
        }
        let mut ls = vec![f64::NEG_INFINITY; self.len()];
        for v in (0..self.len()).rev() {
            let d = self.depth(v);
            if d > n {
                continue;
            }
            if d == n {
                ls[v] = 0.0;
                continue;
            }
            let mut acc = LogSum::new();
            for &c in self.children(v) {
                if ls[c] > f64::NEG_INFINITY {
                    acc.add(log_neg_log1m(law.log_p(d + 1) + ls[c]));
                }
            }
            ls[v] = log_one_minus_exp_neg(acc.value());
        }
        Ok(ls[Tree::ROOT])
    }
}

impl Percolable for DegreeSequence {
    fn horizon(&self) -> usize {
        DegreeSequence::horizon(self)
    }

    fn log_survival(&self, law: &PercolationLaw, n: usize) -> Result<f64> {
        if n > DegreeSequence::horizon(self) {
            return Err(Error::TooShallow { available: DegreeSequence::horizon(self), requested: n });
        }
        let mut ls = 0.0;
        for d in (0..n).rev() {
            let l = (self.degree(d) as f64).ln() + log_neg_log1m(law.log_p(d + 1) + ls);
            ls = log_one_minus_exp_neg(l);
        }
        Ok(ls)
    }
}

/// `P[root ↔ E_N]` from `s(v) = 1 - Π(1 - p(e_c)·s(c))`, `s = 1` on the frontier.
pub fn exact_survival(t: &dyn Percolable, law: &PercolationLaw, n: usize) -> Result<LogValue> {
    Ok(LogValue::from_ln(t.log_survival(law, n)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl McEstimate {
    fn from_hits(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self { estimate: p, stderr: (p * (1.0 - p) / trials as f64).sqrt(), trials }
    }
}

/// Whether some open path joins the root to depth `n`; edges are drawn lazily.
fn open_path_exists(t: &Tree, law: &PercolationLaw, n: usize, r: &mut impl rand_core::RngCore) -> bool {
    let mut stack = vec![Tree::ROOT];
    while let Some(v) = stack.pop() {
        let d = t.depth(v);
        if d == n {
            return true;
        }
        let p = law.p(d + 1);
        for &c in t.children(v) {
            if rng::unit(r) < p {
                stack.push(c);
            }
        }
    }
    false
}

/// Frequency of `{root ↔ E_N}`; trial `i` uses stream `(seed, i)`.
pub fn mc_survival(t: &Tree, law: &PercolationLaw, n: usize, trials: u64, seed: u64) -> Result<McEstimate> {
    if trials == 0 {
        return Err(invalid("at least one trial"));
    }
    if n > t.height() {
        return Err(Error::TooShallow { available: t.height(), requested: n });
    }
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|i| open_path_exists(t, law, n, &mut rng::stream(seed, rng::domain::PERCOLATION, i)) as u64)
        .sum();
    Ok(McEstimate::from_hits(hits, trials))
}

/// Monte Carlo on a spherically symmetric tree, tracking only the open cluster size per level.
pub fn mc_survival_spherical(d: &DegreeSequence, law: &PercolationLaw, n: usize, trials: u64, seed: u64) -> Result<McEstimate> {
    if trials == 0 {
        return Err(invalid("at least one trial"));
    }
    if n > d.horizon() {
        return Err(Error::TooShallow { available: d.horizon(), requested: n });
    }
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, rng::domain::PERCOLATION, i);
            let mut cluster: u64 = 1;
            for depth in 0..n {
                let p = law.p(depth + 1);
                let edges = cluster * d.degree(depth) as u64;
                cluster = (0..edges).filter(|_| rng::unit(&mut r) < p).count() as u64;
                if cluster == 0 {
                    return 0;
                }
            }
            1
        })
        .sum();
    Ok(McEstimate::from_hits(hits, trials))
}

/// `ln` of the conductances `c(e(x)) = P[ρ↔x] / (1 - p(e(x)))` on every depth up to `n`.
fn bound_conductances(law: &PercolationLaw, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    let mut log_connect = 0.0;
    for (d, slot) in out.iter_mut().enumerate().skip(1) {
        let lp = law.log_p(d);
        log_connect += lp;
        *slot = log_connect - ln_one_minus_exp(lp);
    }
    out
}

/// Lower bound `C/(1+C)` on the survival probability, where `C` is the effective
/// conductance under `c(e(x)) = P[ρ↔x] / (1 - p(e(x)))`.
pub fn conductance_bound<T: Network + ?Sized>(t: &T, law: &PercolationLaw, n: usize) -> Result<LogValue> {
    let c = ConductanceField::DepthLog(Arc::new(bound_conductances(law, n)));
    let lc = t.effective_conductance(&c, n)?.ln;
    // C/(1+C) = 1/(1 + 1/C)
    Ok(LogValue::from_ln(-(-lc).exp().ln_1p()))
}

/// Classifies each λ by its exact survival trajectory over the schedule.
pub fn theta_estimate(t: &dyn Percolable, sched: &DepthSchedule, lambdas: &[f64]) -> Result<Sweep> {
    if lambdas.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
        return Err(invalid("λ grid must lie inside (0, 1)"));
    }
    if sched.max_depth() > t.horizon() {
        return Err(Error::TooShallow { available: t.horizon(), requested: sched.max_depth() });
    }
    Sweep::run(lambdas, sched, |lambda| {
        let law = PercolationLaw::Depth { lambda };
        sched.depths.iter().map(|&n| exact_survival(t, &law, n)).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete, path};

    #[test]
    fn path_survival_is_product() {
        let law = PercolationLaw::depth(0.4).unwrap();
        let t = path(9);
        let got = exact_survival(&t, &law, 9).unwrap();
        let expected: f64 = (1..=9).map(|n| law.log_p(n)).sum();
        assert!((got.ln - expected).abs() < 1e-12);
    }

    #[test]
    fn star_path_hybrid() {
        // Root with two children, each with one child.
        let mut t = Tree::new();
        for _ in 0..2 {
            let c = t.add_child(0).unwrap();
            t.add_child(c).unwrap();
        }
        let lambda: f64 = 0.35;
        let law = PercolationLaw::depth(lambda).unwrap();
        let (p1, p2) = ((-1f64).exp(), (-(2f64.powf(lambda - 1.0))).exp());
        let closed = 1.0 - (1.0 - p1 * p2).powi(2);
        // Direct sum over the 16 open/closed patterns.
        let mut enumerated = 0.0;
        for mask in 0u32..16 {
            let bit = |i: u32| mask >> i & 1 == 1;
            let prob: f64 = (0..4)
                .map(|i| {
                    let p = if i % 2 == 0 { p1 } else { p2 };
                    if bit(i) { p } else { 1.0 - p }
                })
                .product();
            if (bit(0) && bit(1)) || (bit(2) && bit(3)) {
                enumerated += prob;
            }
        }
        let exact = exact_survival(&t, &law, 2).unwrap().value();
        assert!((exact - closed).abs() < 1e-14);
        assert!((exact - enumerated).abs() < 1e-14);
    }

    #[test]
    fn spherical_matches_arena() {
        let d = DegreeSequence::sequence_tree(30);
        let t = crate::generators::spherically_symmetric(&d, 30, usize::MAX).unwrap();
        for lambda in [0.2, 0.5, 0.9] {
            let law = PercolationLaw::depth(lambda).unwrap();
            let a = exact_survival(&t, &law, 30).unwrap().ln;
            let b = exact_survival(&d, &law, 30).unwrap().ln;
            assert!((a - b).abs() < 1e-10, "λ={lambda}: {a} vs {b}");
            let ba = conductance_bound(&t, &law, 30).unwrap().ln;
            let bb = conductance_bound(&d, &law, 30).unwrap().ln;
            assert!((ba - bb).abs() < 1e-10);
        }
    }

    #[test]
    fn deep_survival_stays_finite_in_logs() {
        let d = DegreeSequence::sequence_tree(4096);
        let s = exact_survival(&d, &PercolationLaw::depth(0.7).unwrap(), 4096).unwrap();
        assert!(s.ln.is_finite() && s.ln < -300.0, "{}", s.ln);
        assert!(s.value() > 0.0 && s.value() < 1e-150);
    }

    #[test]
    fn single_edge_bound_equals_p() {
        let t = path(1);
        let law = PercolationLaw::depth(0.5).unwrap();
        let b = conductance_bound(&t, &law, 1).unwrap().value();
        assert!((b - (-1f64).exp()).abs() < 1e-15);
        assert!((exact_survival(&t, &law, 1).unwrap().value() - b).abs() < 1e-15);
    }

    #[test]
    fn certain_edges_always_survive() {
        let t = complete(3, 4);
        let mc = mc_survival(&t, &PercolationLaw::Constant(1.0), 4, 200, 1).unwrap();
        assert_eq!(mc.estimate, 1.0);
        assert_eq!(conductance_bound(&t, &PercolationLaw::Constant(1.0), 4).unwrap().value(), 1.0);
        assert!(mc_survival(&t, &PercolationLaw::Constant(1.0), 4, 0, 1).is_err());
    }

    #[test]
    fn law_validation() {
        assert!(PercolationLaw::depth(1.0).is_err());
        let law = PercolationLaw::depth(0.3).unwrap();
        assert!((law.p(1) - (-1f64).exp()).abs() < 1e-15);
        assert!(law.p(10) > law.p(2));
    }
}
