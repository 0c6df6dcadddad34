//! Library results against slow, independent reference computations.

mod common;

use common::exhaustive_min_cut;
use ibn::flow_cut::{max_flow, min_cut, EdgeWeightProfile};
use ibn::generators::random_tree;
use ibn::percolation::{exact_survival, mc_survival, PercolationLaw};
use ibn::rng;
use ibn::tree::{check_flow, is_cutset, Tree, VertexId};
use ibn::walks::{ConductanceField, Network};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[test]
fn min_cut_matches_exhaustive_search() {
    for seed in 0..100u64 {
        let depth = 1 + (seed % 5) as usize;
        let t = random_tree(seed, depth, 2, 0.25);
        let n = t.height();
        if n == 0 {
            continue;
        }
        let mut r = rng::stream(seed, 99, 0);
        let logs: Vec<f64> = (0..t.len()).map(|_| -3.0 * rng::unit(&mut r)).collect();
        let lambda = 0.1 + 0.8 * rng::unit(&mut r);
        let profiles = [EdgeWeightProfile::Ibn { lambda }, EdgeWeightProfile::EdgeLog(logs.into())];
        for w in &profiles {
            let weight = |v: VertexId| w.weight(v, t.depth(v));
            let expected = exhaustive_min_cut(&t, n, &weight);
            let (value, cut) = min_cut(&t, w, n).unwrap();
            assert!(rel(value.value(), expected) < 1e-12, "seed {seed}: {} vs {expected}", value.value());
            assert!(is_cutset(&t, &cut, n));
            let cut_weight: f64 = cut.edges.iter().map(|e| weight(e.child())).sum();
            assert!(rel(cut_weight, expected) < 1e-12);
            let flow = max_flow(&t, w, n).unwrap();
            assert!(rel(flow.strength.value(), value.value()) < 1e-12);
            assert!(check_flow(&t, &flow.flow, w).unwrap().valid());
        }
    }
}

/// Dense Gaussian elimination on the Kirchhoff system: root at potential 1, depth `n` grounded.
fn kirchhoff_conductance(t: &Tree, c: &ConductanceField, n: usize) -> f64 {
    let inner: Vec<VertexId> = (1..t.len()).filter(|&v| t.depth(v) < n).collect();
    let index = |v: VertexId| inner.iter().position(|&u| u == v);
    let m = inner.len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for (i, &v) in inner.iter().enumerate() {
        let mut edges: Vec<(VertexId, f64)> = t.children(v).iter().map(|&ch| (ch, c.log_conductance(ch, t.depth(ch)).exp())).collect();
        let p = t.parent(v).unwrap();
        edges.push((p, c.log_conductance(v, t.depth(v)).exp()));
        for (u, g) in edges {
            a[i][i] += g;
            if u == Tree::ROOT {
                a[i][m] += g;
            } else if let Some(j) = index(u) {
                a[i][j] -= g;
            }
        }
    }
    for col in 0..m {
        let pivot = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, pivot);
        for row in 0..m {
            if row != col && a[row][col] != 0.0 {
                let f = a[row][col] / a[col][col];
                for k in col..=m {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let potential = |v: VertexId| if v == Tree::ROOT { 1.0 } else { index(v).map_or(0.0, |i| a[i][m] / a[i][i]) };
    t.children(Tree::ROOT).iter().map(|&ch| c.log_conductance(ch, 1).exp() * (1.0 - potential(ch))).sum()
}

#[test]
fn effective_conductance_matches_kirchhoff_solve() {
    for seed in 0..30u64 {
        let t = random_tree(seed, 2 + (seed % 4) as usize, 3, 0.2);
        let n = t.height();
        let mut r = rng::stream(seed, 98, 0);
        let logs: Vec<f64> = (0..t.len()).map(|_| -2.0 * rng::unit(&mut r)).collect();
        for c in [ConductanceField::Deterministic { lambda: 0.6 }, ConductanceField::EdgeLog(logs.into())] {
            let fast = t.effective_conductance(&c, n).unwrap().value();
            let slow = kirchhoff_conductance(&t, &c, n);
            assert!(rel(fast, slow) < 1e-9, "seed {seed}: {fast} vs {slow}");
        }
    }
}

/// Sums the probability of every open/closed configuration with an open path to depth `n`.
fn enumerated_survival(t: &Tree, law: &PercolationLaw, n: usize) -> f64 {
    let edges: Vec<VertexId> = (1..t.len()).filter(|&v| t.depth(v) <= n).collect();
    assert!(edges.len() <= 16);
    let mut total = 0.0;
    for mask in 0u32..1 << edges.len() {
        let open = |v: VertexId| mask >> edges.iter().position(|&e| e == v).unwrap() & 1 == 1;
        let prob: f64 = edges
            .iter()
            .map(|&v| if open(v) { law.p(t.depth(v)) } else { 1.0 - law.p(t.depth(v)) })
            .product();
        let survives = t.level_set(n).iter().any(|&v| t.ancestors(v).take_while(|&u| u != Tree::ROOT).all(open));
        if survives {
            total += prob;
        }
    }
    total
}

#[test]
fn survival_matches_enumeration() {
    let law = PercolationLaw::depth(0.4).unwrap();
    let mut checked = 0;
    for seed in 0..200u64 {
        let t = random_tree(seed, 3, 2, 0.2);
        let n = t.height();
        let size = (1..t.len()).filter(|&v| t.depth(v) <= n).count();
        if n == 0 || size > 16 {
            continue;
        }
        let exact = exact_survival(&t, &law, n).unwrap().value();
        let slow = enumerated_survival(&t, &law, n);
        assert!(rel(exact, slow) < 1e-12, "seed {seed}: {exact} vs {slow}");
        checked += 1;
    }
    assert!(checked >= 50);
}

#[test]
fn monte_carlo_survival_within_three_sigma() {
    let law = PercolationLaw::depth(0.5).unwrap();
    for seed in 0..5u64 {
        let t = random_tree(seed, 6, 3, 0.1);
        let n = t.height();
        let exact = exact_survival(&t, &law, n).unwrap().value();
        let mc = mc_survival(&t, &law, n, 20_000, seed).unwrap();
        let sigma = (exact * (1.0 - exact) / 20_000.0).sqrt();
        assert!((mc.estimate - exact).abs() <= 3.0 * sigma + 1e-12, "seed {seed}");
    }
}

#[test]
fn fire_engine_matches_naive_simulation() {
    assert!(common::fire_engines_agree(300));
}
