use std::collections::HashSet;

use ibn::flow_cut::{min_cut, CutSource, EdgeWeightProfile};
use ibn::generators::{random_tree, spherically_symmetric, DegreeSequence};
use ibn::grigorchuk::{inverted_orbit, inverted_orbit_direct, loop_erase, orbit_sizes, silent_loops, Generator, Word, GENERATORS};
use ibn::nathanson::{eval_word, mat_mul, Mat2};
use ibn::percolation::{conductance_bound, exact_survival, PercolationLaw};
use ibn::rng;
use ibn::tree::{Cutset, Tree};
use proptest::prelude::*;

fn arb_tree() -> impl Strategy<Value = Tree> {
    (any::<u64>(), 1usize..7, 1u64..4).prop_map(|(seed, depth, k)| random_tree(seed, depth, k, 0.2))
}

fn random_word(seed: u64, i: u64, max_len: u64) -> Word {
    let mut r = rng::stream(seed, 7, i);
    let len = rng::below(&mut r, max_len + 1) as usize;
    Word((0..len).map(|_| GENERATORS[rng::below(&mut r, 4) as usize]).collect())
}

proptest! {
    #[test]
    fn text_round_trip(t in arb_tree()) {
        prop_assert_eq!(Tree::from_text(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn min_cut_below_every_level(t in arb_tree(), lambda in 0.05f64..0.95) {
        let n = t.height();
        prop_assume!(n > 0);
        let w = EdgeWeightProfile::Ibn { lambda };
        let (m, _) = min_cut(&t, &w, n).unwrap();
        for d in 1..=n {
            let level: f64 = Cutset::level(&t, d).edges.iter().map(|e| w.weight(e.child(), d)).sum();
            // A level above a dead end does not separate the deeper levels, so only full levels bound.
            if t.level_set(n).iter().all(|&v| t.ancestors(v).any(|a| t.depth(a) == d)) {
                prop_assert!(m.value() <= level * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn min_cut_decreases_in_lambda(t in arb_tree(), l1 in 0.05f64..0.9, dl in 0.01f64..0.09) {
        let n = t.height();
        prop_assume!(n > 0);
        let a = t.min_cut_value(&EdgeWeightProfile::Ibn { lambda: l1 }, n).unwrap();
        let b = t.min_cut_value(&EdgeWeightProfile::Ibn { lambda: l1 + dl }, n).unwrap();
        prop_assert!(b.ln <= a.ln + 1e-12);
    }

    #[test]
    fn survival_bounded_and_monotone(t in arb_tree(), lambda in 0.05f64..0.95) {
        let law = PercolationLaw::depth(lambda).unwrap();
        let mut last = 0.0;
        for n in 1..=t.height() {
            let s = exact_survival(&t, &law, n).unwrap();
            prop_assert!(s.ln <= last + 1e-12);
            prop_assert!(conductance_bound(&t, &law, n).unwrap().ln <= s.ln + 1e-12);
            last = s.ln;
        }
    }

    #[test]
    fn spherical_and_arena_agree(degrees in prop::collection::vec(1u32..4, 1..9), lambda in 0.1f64..0.9) {
        let d = DegreeSequence::from_fn(degrees.len(), |n| degrees[n]).unwrap();
        let t = spherically_symmetric(&d, degrees.len(), 1 << 20).unwrap();
        let w = EdgeWeightProfile::Ibn { lambda };
        let n = degrees.len();
        let a = d.min_cut_value(&w, n).unwrap();
        let b = t.min_cut_value(&w, n).unwrap();
        prop_assert!((a.ln - b.ln).abs() < 1e-10);
        let law = PercolationLaw::depth(lambda).unwrap();
        let sa = exact_survival(&d, &law, n).unwrap();
        let sb = exact_survival(&t, &law, n).unwrap();
        prop_assert!((sa.ln - sb.ln).abs() < 1e-10);
    }

    #[test]
    fn matrix_words_multiply(u in "[ab]{0,12}", v in "[ab]{0,12}") {
        let uv = format!("{u}{v}");
        prop_assert_eq!(eval_word(&uv).unwrap(), mat_mul(&eval_word(&u).unwrap(), &eval_word(&v).unwrap()));
    }
}

#[test]
fn identity_word_is_identity() {
    assert_eq!(eval_word("").unwrap(), Mat2::identity());
}

#[test]
fn incremental_orbit_matches_direct() {
    for i in 0..1000 {
        let w = random_word(11, i, 50);
        assert_eq!(inverted_orbit(&w).unwrap(), inverted_orbit_direct(&w).unwrap(), "{w}");
    }
}

#[test]
fn erased_words_have_no_silent_loops() {
    for i in 0..1000 {
        let w = random_word(12, i, 40);
        let q = loop_erase(&w).unwrap();
        assert!(silent_loops(&q).unwrap().is_empty(), "{w} -> {q}");
        assert!(q.len() <= w.len());
    }
}

#[test]
fn orbit_sizes_grow_by_at_most_one() {
    for i in 0..200 {
        let w = random_word(13, i, 60);
        let s = orbit_sizes(&w).unwrap();
        assert_eq!(s[0], 1);
        assert!(s.windows(2).all(|p| p[1] == p[0] || p[1] == p[0] + 1));
        let distinct: HashSet<_> = inverted_orbit(&w).unwrap();
        assert_eq!(*s.last().unwrap(), distinct.len());
    }
}

#[test]
fn generator_letters_round_trip() {
    for g in GENERATORS.iter().copied().chain([Generator::E]) {
        assert_eq!(Generator::from_char(g.as_char()), Some(g));
    }
}
