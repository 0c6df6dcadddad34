//! Reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use ibn::firefighter::{new_game, BudgetSchedule};
use ibn::generators::random_tree;
use ibn::rng;
use ibn::tree::{Tree, VertexId};
use rand_core::RngCore;

/// Whether `v` has a descendant (or is itself) at depth `n`.
pub fn reaches(t: &Tree, v: VertexId, n: usize) -> bool {
    t.depth(v) == n || t.children(v).iter().any(|&c| reaches(t, c, n))
}

/// Every minimal cut of the subtree below `v` separating it from depth `n`, as weight sums.
pub fn cut_sums(t: &Tree, v: VertexId, n: usize, w: &dyn Fn(VertexId) -> f64) -> Vec<f64> {
    let mut sums = vec![0.0];
    for &c in t.children(v) {
        if !reaches(t, c, n) {
            continue;
        }
        let mut options = vec![w(c)];
        if t.depth(c) < n {
            options.extend(cut_sums(t, c, n, w));
        }
        sums = sums.iter().flat_map(|s| options.iter().map(move |o| s + o)).collect();
    }
    sums
}

pub fn exhaustive_min_cut(t: &Tree, n: usize, w: &dyn Fn(VertexId) -> f64) -> f64 {
    if !reaches(t, Tree::ROOT, n) {
        return 0.0;
    }
    cut_sums(t, Tree::ROOT, n, w).into_iter().fold(f64::INFINITY, f64::min)
}

/// Straightforward set-based fire: protect, then every burning vertex ignites its free neighbours.
pub struct NaiveFire {
    pub burning: HashSet<VertexId>,
    pub protected: HashSet<VertexId>,
}

impl NaiveFire {
    pub fn free_neighbours(&self, t: &Tree) -> HashSet<VertexId> {
        let mut out = HashSet::new();
        for &v in &self.burning {
            for u in t.parent(v).into_iter().chain(t.children(v).iter().copied()) {
                if !self.burning.contains(&u) && !self.protected.contains(&u) {
                    out.insert(u);
                }
            }
        }
        out
    }

    pub fn round(&mut self, t: &Tree, protect: &[VertexId]) -> HashSet<VertexId> {
        self.protected.extend(protect);
        let next = self.free_neighbours(t);
        self.burning.extend(&next);
        next
    }
}

/// Plays random legal games on random trees of depth at most 6 in both engines.
pub fn fire_engines_agree(trees: u64) -> bool {
    for seed in 0..trees {
        let t = random_tree(seed, 1 + (seed % 6) as usize, 3, 0.15);
        let k = (seed % 2) as usize;
        if k > t.height() {
            continue;
        }
        let mut r = rng::stream(seed, 97, 0);
        let budgets: Vec<u64> = (0..8).map(|_| r.next_u64() % 3).collect();
        let mut game = new_game(&t, k, BudgetSchedule::Explicit(budgets.clone())).unwrap();
        let mut naive = NaiveFire {
            burning: (0..t.len()).filter(|&v| t.depth(v) <= k).collect(),
            protected: HashSet::new(),
        };
        for &budget in &budgets {
            let mut free: Vec<VertexId> =
                (0..t.len()).filter(|v| !naive.burning.contains(v) && !naive.protected.contains(v)).collect();
            let mut pick = Vec::new();
            for _ in 0..budget {
                if free.is_empty() {
                    break;
                }
                let i = (r.next_u64() % free.len() as u64) as usize;
                pick.push(free.swap_remove(i));
            }
            let expected = naive.round(&t, &pick);
            let got: HashSet<VertexId> = game.step(&pick).unwrap().into_iter().collect();
            if got != expected {
                return false;
            }
            if game.burning().collect::<HashSet<_>>() != naive.burning {
                return false;
            }
            if game.is_contained() != naive.free_neighbours(&t).is_empty() {
                return false;
            }
        }
    }
    true
}
