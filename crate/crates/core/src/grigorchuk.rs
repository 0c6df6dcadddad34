//! The first Grigorchuk group acting on binary sequences, inverted orbits of
//! words along the ray `1^∞`, erasure of loops that add no orbit points, and
//! the spherically symmetric tree built from the orbit growth of a word.
//!
//! Actions are on the right: `x·(gh) = (x·g)·h`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::generators::DegreeSequence;
use crate::numeric::{bisect, least_squares};
use crate::rng::{domain, Keyed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    E,
    A,
    B,
    C,
    D,
}

pub const GENERATORS: [Generator; 4] = [Generator::A, Generator::B, Generator::C, Generator::D];

impl Generator {
    pub fn as_char(self) -> char {
        match self {
            Generator::E => 'e',
            Generator::A => 'a',
            Generator::B => 'b',
            Generator::C => 'c',
            Generator::D => 'd',
        }
    }

    pub fn from_char(ch: char) -> Option<Self> {
        Some(match ch {
            'e' | '1' => Generator::E,
            'a' => Generator::A,
            'b' => Generator::B,
            'c' => Generator::C,
            'd' => Generator::D,
            _ => return None,
        })
    }
}

/// A word over the generators.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<Generator>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| Generator::from_char(c).ok_or_else(|| invalid(format!("{c:?} is not a generator"))))
            .collect::<Result<_>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|g| write!(f, "{}", g.as_char()))
    }
}

/// Sections of `b`, `c`, `d` at the two first letters; `a` swaps and has trivial sections.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wreath {
    pub b: (Generator, Generator),
    pub c: (Generator, Generator),
    pub d: (Generator, Generator),
}

impl Wreath {
    pub const STANDARD: Wreath = Wreath {
        b: (Generator::A, Generator::C),
        c: (Generator::A, Generator::D),
        d: (Generator::E, Generator::B),
    };

    fn section(&self, g: Generator, bit: u8) -> Generator {
        let pair = match g {
            Generator::B => self.b,
            Generator::C => self.c,
            Generator::D => self.d,
            _ => return Generator::E,
        };
        if bit == 0 {
            pair.0
        } else {
            pair.1
        }
    }

    /// Acts on a string of `depth` letters stored with letter `j` in bit `j`.
    pub fn act_finite(&self, mut g: Generator, mut x: u32, depth: usize) -> u32 {
        let mut j = 0;
        while j < depth {
            match g {
                Generator::E => break,
                Generator::A => {
                    x ^= 1 << j;
                    break;
                }
                _ => {
                    g = self.section(g, (x >> j & 1) as u8);
                    j += 1;
                }
            }
        }
        x
    }

    /// The action of `g` on `{0,1}^depth` as a permutation.
    pub fn permutation(&self, g: Generator, depth: usize) -> Vec<u32> {
        (0..1u32 << depth).map(|x| self.act_finite(g, x, depth)).collect()
    }

    pub fn word_permutation(&self, w: &Word, depth: usize) -> Vec<u32> {
        let mut p: Vec<u32> = (0..1u32 << depth).collect();
        for &g in &w.0 {
            for x in p.iter_mut() {
                *x = self.act_finite(g, *x, depth);
            }
        }
        p
    }
}

fn compose(p: &[u32], q: &[u32]) -> Vec<u32> {
    p.iter().map(|&x| q[x as usize]).collect()
}

/// Checks the defining relations as permutations of `{0,1}^depth`.
pub fn verify_relations_with(w: &Wreath, depth: usize) -> bool {
    use Generator::*;
    let perm = |g| w.permutation(g, depth);
    let id: Vec<u32> = (0..1u32 << depth).collect();
    let squares = [A, B, C, D].iter().all(|&g| compose(&perm(g), &perm(g)) == id);
    let products = [(B, C, D), (B, D, C), (C, D, B)]
        .iter()
        .all(|&(x, y, z)| compose(&perm(x), &perm(y)) == perm(z) && compose(&perm(y), &perm(x)) == perm(z));
    squares && products
}

pub fn verify_relations(depth: usize) -> bool {
    verify_relations_with(&Wreath::STANDARD, depth)
}

/// A point of the boundary equal to `1^∞` beyond a finite prefix; trailing 1s are trimmed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RayPoint {
    prefix: Vec<u8>,
}

impl RayPoint {
    /// `1^∞`
    pub fn base() -> Self {
        Self::default()
    }

    pub fn from_prefix(bits: &[u8]) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(invalid("ray prefixes are binary"));
        }
        let mut p = RayPoint { prefix: bits.to_vec() };
        p.trim();
        Ok(p)
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    fn trim(&mut self) {
        while self.prefix.last() == Some(&1) {
            self.prefix.pop();
        }
    }
}

impl fmt::Display for RayPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.prefix.iter().try_for_each(|b| write!(f, "{b}"))?;
        write!(f, "1^∞")
    }
}

/// `x·g`. `budget` bounds the prefix length the action may touch.
pub fn act(g: Generator, x: &RayPoint, budget: usize) -> Result<RayPoint> {
    let w = Wreath::STANDARD;
    let mut out = x.clone();
    let mut g = g;
    let mut j = 0;
    loop {
        match g {
            Generator::E => break,
            Generator::A => {
                if j >= budget {
                    return Err(Error::DepthBudget(budget));
                }
                if j >= out.prefix.len() {
                    out.prefix.resize(j + 1, 1);
                }
                out.prefix[j] ^= 1;
                break;
            }
            // b, c and d fix the all-ones tail.
            _ if j >= out.prefix.len() => break,
            _ => {
                g = w.section(g, out.prefix[j]);
                j += 1;
            }
        }
    }
    out.trim();
    Ok(out)
}

/// Free reduction using the relations; the result alternates `a` with one of `b, c, d`.
pub fn reduce(w: &[Generator]) -> Vec<Generator> {
    use Generator::*;
    let mut out: Vec<Generator> = Vec::with_capacity(w.len());
    for &g in w {
        if g == E {
            continue;
        }
        match out.last().copied() {
            Some(top) if top == g => {
                out.pop();
            }
            Some(top) if top != A && g != A => {
                out.pop();
                out.push(match (top, g) {
                    (B, C) | (C, B) => D,
                    (B, D) | (D, B) => C,
                    _ => B,
                });
            }
            _ => out.push(g),
        }
    }
    out
}

/// The two level-one sections of a word with an even number of `a`.
fn split(w: &[Generator]) -> (Vec<Generator>, Vec<Generator>) {
    let wr = Wreath::STANDARD;
    let (mut s0, mut s1) = (Vec::new(), Vec::new());
    let mut swapped = 0u8;
    for &g in w {
        if g == Generator::A {
            swapped ^= 1;
        } else {
            s0.push(wr.section(g, swapped));
            s1.push(wr.section(g, 1 - swapped));
        }
    }
    (s0, s1)
}

/// Word problem by contraction: reduce, check the root swap, recurse into sections.
pub fn is_trivial(w: &Word) -> bool {
    trivial(&w.0)
}

fn trivial(w: &[Generator]) -> bool {
    let r = reduce(w);
    if r.is_empty() {
        return true;
    }
    if r.len() <= 2 {
        let p = Wreath::STANDARD.word_permutation(&Word(r), 3);
        return p.iter().enumerate().all(|(i, &x)| i as u32 == x);
    }
    if r.iter().filter(|&&g| g == Generator::A).count() % 2 == 1 {
        return false;
    }
    let (s0, s1) = split(&r);
    trivial(&s0) && trivial(&s1)
}

/// Depth budget used for a word of length `len`.
pub fn budget_for(len: usize) -> usize {
    len + 8
}

/// Incrementally maintained inverted orbit.
#[derive(Clone, Debug)]
pub struct OrbitTracker {
    points: HashSet<RayPoint>,
    budget: usize,
}

impl OrbitTracker {
    /// The empty word, whose orbit is `{x_0}` by convention.
    pub fn new(budget: usize) -> Self {
        Self { points: HashSet::from([RayPoint::base()]), budget }
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &HashSet<RayPoint> {
        &self.points
    }

    /// `O(wg) = {x_0 g} ∪ O(w)·g`
    pub fn push(&mut self, g: Generator) -> Result<()> {
        let mut next = HashSet::with_capacity(self.points.len() + 1);
        for p in &self.points {
            next.insert(act(g, p, self.budget)?);
        }
        next.insert(act(g, &RayPoint::base(), self.budget)?);
        self.points = next;
        Ok(())
    }
}

pub fn inverted_orbit(w: &Word) -> Result<HashSet<RayPoint>> {
    let mut t = OrbitTracker::new(budget_for(w.len()));
    for &g in &w.0 {
        t.push(g)?;
    }
    Ok(t.points)
}

/// From the definition: `{x_0 g_k ⋯ g_ℓ : 1 ≤ k ≤ ℓ}`, or `{x_0}` for the empty word.
pub fn inverted_orbit_direct(w: &Word) -> Result<HashSet<RayPoint>> {
    let budget = budget_for(w.len());
    if w.is_empty() {
        return Ok(HashSet::from([RayPoint::base()]));
    }
    (0..w.len())
        .map(|k| w.0[k..].iter().try_fold(RayPoint::base(), |x, &g| act(g, &x, budget)))
        .collect()
}

/// `#O` of every prefix; entry `i` is for the first `i` letters.
pub fn orbit_sizes(w: &Word) -> Result<Vec<usize>> {
    let mut t = OrbitTracker::new(budget_for(w.len()));
    let mut sizes = vec![t.size()];
    for &g in &w.0 {
        t.push(g)?;
        sizes.push(t.size());
    }
    Ok(sizes)
}

/// Deletes, in order of appearance, the longest trivial segments during which
/// the orbit does not grow, and repeats until none is left.
pub fn loop_erase(w: &Word) -> Result<Word> {
    let mut current = w.clone();
    loop {
        let next = erase_pass(&current)?;
        if next.len() == current.len() {
            return Ok(current);
        }
        current = next;
    }
}

fn erase_pass(w: &Word) -> Result<Word> {
    let s = orbit_sizes(w)?;
    let letters = &w.0;
    let mut out = Vec::with_capacity(letters.len());
    // Segment g_n..g_m (1-based) is a candidate when s[m] == s[n-1].
    let mut n = 1;
    while n <= letters.len() {
        let mut end = None;
        let mut m = n;
        while m <= letters.len() && s[m] == s[n - 1] {
            if trivial(&letters[n - 1..m]) {
                end = Some(m);
            }
            m += 1;
        }
        match end {
            Some(m) => n = m + 1,
            None => {
                out.push(letters[n - 1]);
                n += 1;
            }
        }
    }
    Ok(Word(out))
}

/// Trivial segments that leave the orbit size unchanged, as 1-based `(start, end)`.
pub fn silent_loops(w: &Word) -> Result<Vec<(usize, usize)>> {
    let s = orbit_sizes(w)?;
    let mut found = Vec::new();
    for n in 1..=w.len() {
        let mut m = n;
        while m <= w.len() && s[m] == s[n - 1] {
            if trivial(&w.0[n - 1..m]) {
                found.push((n, m));
            }
            m += 1;
        }
    }
    Ok(found)
}

/// Best word found and its orbit size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub word: Word,
    pub orbit: usize,
    pub exhaustive: bool,
}

/// Largest orbit over all words of length `n`; the first maximiser in `a < b < c < d` order.
pub fn exhaustive_search(n: usize) -> Result<SearchResult> {
    fn dfs(prefix: &mut Vec<Generator>, t: &OrbitTracker, n: usize, best: &mut (usize, Vec<Generator>)) -> Result<()> {
        if prefix.len() == n {
            if t.size() > best.0 || best.1.is_empty() {
                *best = (t.size(), prefix.clone());
            }
            return Ok(());
        }
        // Each letter adds at most one point.
        if t.size() + (n - prefix.len()) <= best.0 && !best.1.is_empty() {
            return Ok(());
        }
        for g in GENERATORS {
            let mut next = t.clone();
            next.push(g)?;
            prefix.push(g);
            dfs(prefix, &next, n, best)?;
            prefix.pop();
        }
        Ok(())
    }
    if n == 0 {
        return Err(invalid("search length must be positive"));
    }
    let mut best = (0, Vec::new());
    dfs(&mut Vec::new(), &OrbitTracker::new(budget_for(n)), n, &mut best)?;
    Ok(SearchResult { word: Word(best.1), orbit: best.0, exhaustive: true })
}

/// Beam search on orbit size; ties are ordered by a seeded key.
pub fn beam_search(n: usize, beam: usize, seed: u64) -> Result<SearchResult> {
    if n == 0 || beam == 0 {
        return Err(invalid("search length and beam width must be positive"));
    }
    let budget = budget_for(n);
    let mut states = vec![(Vec::<Generator>::new(), OrbitTracker::new(budget))];
    for step in 0..n {
        let mut children: Vec<(Vec<Generator>, OrbitTracker)> = states
            .par_iter()
            .flat_map_iter(|(w, t)| GENERATORS.iter().map(move |&g| (w, t, g)))
            .map(|(w, t, g)| {
                let mut t = t.clone();
                t.push(g)?;
                let mut w = w.clone();
                w.push(g);
                Ok((w, t))
            })
            .collect::<Result<_>>()?;
        let mut keys = Keyed::new(seed, domain::SEARCH);
        let base = (step as u64) << 32;
        let mut order: Vec<(usize, u64, usize)> =
            children.iter().enumerate().map(|(i, (_, t))| (t.size(), keys.word(base + i as u64), i)).collect();
        order.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        order.truncate(beam);
        let mut keep: Vec<Option<(Vec<Generator>, OrbitTracker)>> = children.drain(..).map(Some).collect();
        states = order.iter().map(|&(_, _, i)| keep[i].take().expect("distinct indices")).collect();
    }
    let (w, t) = states.into_iter().next().expect("beam is non-empty");
    Ok(SearchResult { word: Word(w), orbit: t.size(), exhaustive: false })
}

/// Exhaustive up to length 12, beam search beyond.
pub fn search_word(n: usize, beam: usize, seed: u64) -> Result<SearchResult> {
    if n <= 12 {
        exhaustive_search(n)
    } else {
        beam_search(n, beam, seed)
    }
}

/// Blocks of lengths `2, 4, …, 2^levels` concatenated.
#[derive(Clone, Debug, Serialize)]
pub struct BlockWord {
    pub word: Word,
    /// `(start, end)` of each block in the word, end exclusive.
    pub blocks: Vec<(usize, usize)>,
    pub block_orbits: Vec<usize>,
}

pub fn doubling_word(levels: usize, beam: usize, seed: u64) -> Result<BlockWord> {
    let mut word = Vec::new();
    let mut blocks = Vec::new();
    let mut block_orbits = Vec::new();
    for k in 1..=levels {
        let r = search_word(1 << k, beam, seed.wrapping_add(k as u64))?;
        blocks.push((word.len(), word.len() + r.word.len()));
        block_orbits.push(r.orbit);
        word.extend(r.word.0);
    }
    Ok(BlockWord { word: Word(word), blocks, block_orbits })
}

/// Positions along a word where the inverted orbit grows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchMarks {
    /// One entry per letter; the first is always set.
    pub marks: Vec<bool>,
    /// `#O` of the prefix ending at each letter; equals the running count of marks.
    pub orbit: Vec<usize>,
}

impl BranchMarks {
    pub fn from_word(q: &Word) -> Result<Self> {
        let s = orbit_sizes(q)?;
        let marks = (1..s.len()).map(|i| i == 1 || s[i] > s[i - 1]).collect();
        Ok(Self { marks, orbit: s[1..].to_vec() })
    }

    /// Marks given directly; the first must be set.
    pub fn from_letter_marks(marks: Vec<bool>) -> Result<Self> {
        if marks.first() == Some(&false) {
            return Err(invalid("the first letter is always marked"));
        }
        let orbit = marks
            .iter()
            .scan(0, |c, &m| {
                *c += m as usize;
                Some(*c)
            })
            .collect();
        Ok(Self { marks, orbit })
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    /// Tree depth reached after `ell ≥ 1` letters: one edge per letter, one per mark.
    pub fn depth_after(&self, ell: usize) -> usize {
        ell + self.orbit[ell - 1]
    }

    /// Largest `ℓ` with `#O(q_1…q_ℓ) + ℓ ≤ n`, or 0.
    pub fn splits(&self, n: usize) -> usize {
        (1..=self.len()).take_while(|&l| self.depth_after(l) <= n).last().unwrap_or(0)
    }

    /// `#O(q_1…q_{Λ(n)})`, the base-2 log of the level size at depth `n`.
    pub fn level_log2(&self, n: usize) -> usize {
        match self.splits(n) {
            0 => 0,
            l => self.orbit[l - 1],
        }
    }

    /// Deepest level the word determines.
    pub fn horizon(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            self.depth_after(self.len())
        }
    }

    /// Branching depths: a marked letter doubles the level one step before its depth.
    pub fn depth_marks(&self) -> Vec<bool> {
        let mut out = vec![false; self.horizon()];
        for l in 1..=self.len() {
            if self.marks[l - 1] {
                out[self.depth_after(l) - 1] = true;
            }
        }
        out
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence::from_marks(&self.depth_marks())
    }
}

/// Real root of `X³ + X² + X − 2`.
pub fn growth_root() -> f64 {
    bisect(0.0, 1.0, 1e-15, |x| x * x * x + x * x + x - 2.0)
}

/// `ln 2 / ln(2/η)`
pub fn orbit_exponent() -> f64 {
    2f64.ln() / (2.0 / growth_root()).ln()
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitFit {
    pub lengths: Vec<usize>,
    pub orbits: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

/// Log-log slope of the best orbit size found against word length.
pub fn orbit_exponent_estimate(lengths: &[usize], beam: usize, seed: u64) -> Result<OrbitFit> {
    if lengths.len() < 3 {
        return Err(invalid("an exponent fit needs at least three lengths"));
    }
    if lengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("lengths must increase"));
    }
    let orbits: Vec<usize> =
        lengths.iter().map(|&n| search_word(n, beam, seed).map(|r| r.orbit)).collect::<Result<_>>()?;
    let xs: Vec<f64> = lengths.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = orbits.iter().map(|&o| (o as f64).ln()).collect();
    let (slope, intercept, residuals) = least_squares(&xs, &ys);
    Ok(OrbitFit { lengths: lengths.to_vec(), orbits, slope, intercept, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn pt(bits: &[u8]) -> RayPoint {
        RayPoint::from_prefix(bits).unwrap()
    }

    #[test]
    fn actions_on_the_ray() {
        let x0 = RayPoint::base();
        assert_eq!(act(Generator::A, &x0, 4).unwrap(), pt(&[0]));
        assert_eq!(act(Generator::D, &x0, 4).unwrap(), x0);
        assert_eq!(act(Generator::B, &pt(&[0]), 4).unwrap(), pt(&[0, 0]));
        assert_eq!(pt(&[0, 1, 1]), pt(&[0]));
        assert!(matches!(act(Generator::A, &pt(&[1, 1, 1, 0]), 3), Ok(_)));
        assert!(matches!(act(Generator::B, &pt(&[1, 1, 1, 0]), 3), Err(Error::DepthBudget(3))));
    }

    #[test]
    fn relations() {
        assert!(verify_relations(1));
        assert!(verify_relations(8));
        let broken = Wreath { d: (Generator::E, Generator::C), ..Wreath::STANDARD };
        assert!(!verify_relations_with(&broken, 8));
    }

    #[test]
    fn word_problem_small_cases() {
        assert!(is_trivial(&w("aa")));
        assert!(!is_trivial(&w("ab")));
        assert!(is_trivial(&w("bcd")));
        assert!(is_trivial(&w("")));
        // Order of ab, found by action.
        let ab = Wreath::STANDARD.word_permutation(&w("ab"), 8);
        let mut p = ab.clone();
        let mut order = 1;
        while p.iter().enumerate().any(|(i, &x)| i as u32 != x) {
            p = compose(&p, &ab);
            order += 1;
        }
        assert_eq!(order, 16);
        assert!(is_trivial(&w(&"ab".repeat(order))));
        assert!(!is_trivial(&w(&"ab".repeat(order / 2))));
    }

    #[test]
    fn word_problem_matches_action() {
        let wr = Wreath::STANDARD;
        let mut words = vec![Vec::new()];
        for _ in 0..6 {
            words = words.iter().flat_map(|p: &Vec<Generator>| GENERATORS.map(|g| [p.clone(), vec![g]].concat())).collect();
            for x in &words {
                let word = Word(x.clone());
                let perm = wr.word_permutation(&word, 10);
                let by_action = perm.iter().enumerate().all(|(i, &y)| i as u32 == y);
                assert_eq!(is_trivial(&word), by_action, "{word}");
            }
        }
    }

    #[test]
    fn orbits() {
        assert_eq!(inverted_orbit(&Word::default()).unwrap().len(), 1);
        assert_eq!(inverted_orbit(&w("a")).unwrap(), HashSet::from([pt(&[0])]));
        let word = w("abacabadacab");
        assert_eq!(inverted_orbit(&word).unwrap(), inverted_orbit_direct(&word).unwrap());
        let s = orbit_sizes(&word).unwrap();
        assert!(s.windows(2).all(|p| p[1] >= p[0] && p[1] <= p[0] + 1));
    }

    #[test]
    fn erasure() {
        // `aa` returns to 1^∞, a point the orbit of `a` lacks.
        assert_eq!(loop_erase(&w("aa")).unwrap(), w("aa"));
        assert_eq!(loop_erase(&w("bb")).unwrap(), Word::default());
        assert_eq!(loop_erase(&w("bcd")).unwrap(), Word::default());
        let q = loop_erase(&w("abacabad")).unwrap();
        assert!(silent_loops(&q).unwrap().is_empty());
        let plain = w("abac");
        if silent_loops(&plain).unwrap().is_empty() {
            assert_eq!(loop_erase(&plain).unwrap(), plain);
        }
    }

    #[test]
    fn search_small() {
        let r = search_word(1, 16, 0).unwrap();
        assert_eq!((r.word.to_string().as_str(), r.orbit), ("a", 1));
        for n in 2..=7 {
            let ex = exhaustive_search(n).unwrap();
            assert_eq!(beam_search(n, 256, 3).unwrap().orbit, ex.orbit, "n={n}");
        }
    }

    #[test]
    fn marks_and_levels() {
        let all = BranchMarks::from_letter_marks(vec![true; 20]).unwrap();
        for n in 2..=40 {
            assert_eq!(all.splits(n), n / 2);
            assert_eq!(all.level_log2(n), n / 2);
        }
        let q = loop_erase(&beam_search(64, 32, 1).unwrap().word).unwrap();
        let m = BranchMarks::from_word(&q).unwrap();
        assert!(m.marks[0]);
        let d = m.degree_sequence();
        for n in 2..=m.horizon() {
            assert!(m.splits(n) * 2 + 2 >= n);
            assert_eq!(d.level_size(n), num_bigint::BigUint::from(2u8).pow(m.level_log2(n) as u32), "n={n}");
        }
    }

    #[test]
    fn constants() {
        let eta = growth_root();
        assert!((eta.powi(3) + eta * eta + eta - 2.0).abs() < 1e-12);
        assert!((eta - 0.81054).abs() < 1e-5);
        assert!((orbit_exponent() - 0.7674).abs() < 1e-4);
    }
}
