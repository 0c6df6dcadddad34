//! The two-generator matrix semigroup of intermediate growth, its
//! lexicographically minimal spanning tree and a flow on that tree.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::flow_cut::EdgeWeightProfile;
use crate::generators::loglog_ratio;
use crate::tree::{FlowAssignment, Tree};

/// A 2×2 matrix of naturals, row major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat2(pub [BigUint; 4]);

impl Mat2 {
    pub fn from_u64(e: [u64; 4]) -> Self {
        Mat2(e.map(BigUint::from))
    }

    pub fn identity() -> Self {
        Self::from_u64([1, 0, 0, 1])
    }

    /// `[[1,1],[0,1]]`
    pub fn a() -> Self {
        Self::from_u64([1, 1, 0, 1])
    }

    /// `[[1,0],[1,0]]`
    pub fn b() -> Self {
        Self::from_u64([1, 0, 1, 0])
    }

    pub fn generator(letter: Letter) -> Self {
        match letter {
            Letter::A => Self::a(),
            Letter::B => Self::b(),
        }
    }

    pub fn scale(&self, k: u64) -> Self {
        Mat2(self.0.clone().map(|x| x * k))
    }

    fn compact(&self) -> Option<[u64; 4]> {
        let e = &self.0;
        Some([e[0].to_u64()?, e[1].to_u64()?, e[2].to_u64()?, e[3].to_u64()?])
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.0;
        write!(f, "[[{}, {}], [{}, {}]]", e[0], e[1], e[2], e[3])
    }
}

pub fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    let (p, q) = (&x.0, &y.0);
    Mat2([
        &p[0] * &q[0] + &p[1] * &q[2],
        &p[0] * &q[1] + &p[1] * &q[3],
        &p[2] * &q[0] + &p[3] * &q[2],
        &p[2] * &q[1] + &p[3] * &q[3],
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Letter {
    /// Sorts first.
    B,
    A,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
        }
    }
}

/// Evaluates a word over `{a, b}`; the empty word is the identity.
pub fn eval_word(word: &str) -> Result<Mat2> {
    word.chars().try_fold(Mat2::identity(), |m, ch| match ch {
        'a' => Ok(mat_mul(&m, &Mat2::a())),
        'b' => Ok(mat_mul(&m, &Mat2::b())),
        _ => Err(invalid(format!("letter {ch:?} is not a generator"))),
    })
}

// Entries stay small for a long time; the big form is only a fallback.
#[derive(Clone, PartialEq, Eq, Hash)]
enum Key {
    Small([u64; 4]),
    Big(Box<[BigUint; 4]>),
}

#[derive(Clone)]
enum Entry {
    Small([u64; 4]),
    Big(Mat2),
}

impl Entry {
    fn from_mat(m: Mat2) -> Self {
        match m.compact() {
            Some(e) => Entry::Small(e),
            None => Entry::Big(m),
        }
    }

    fn times(&self, letter: Letter) -> Entry {
        if let Entry::Small([p, q, r, s]) = *self {
            // x·a = [[p, p+q], [r, r+s]], x·b = [[p+q, 0], [r+s, 0]]
            let out = match letter {
                Letter::A => p.checked_add(q).zip(r.checked_add(s)).map(|(pq, rs)| [p, pq, r, rs]),
                Letter::B => p.checked_add(q).zip(r.checked_add(s)).map(|(pq, rs)| [pq, 0, rs, 0]),
            };
            if let Some(e) = out {
                return Entry::Small(e);
            }
        }
        Entry::from_mat(mat_mul(&self.to_mat(), &Mat2::generator(letter)))
    }

    fn to_mat(&self) -> Mat2 {
        match self {
            Entry::Small(e) => Mat2::from_u64(*e),
            Entry::Big(m) => m.clone(),
        }
    }

    fn key(&self) -> Key {
        match self {
            Entry::Small(e) => Key::Small(*e),
            Entry::Big(m) => Key::Big(Box::new(m.0.clone())),
        }
    }
}

/// Elements of word length at most `n`, each stored once under its
/// length-then-lexicographically minimal word. Index 0 is the identity.
#[derive(Clone, Debug)]
pub struct Ball {
    parent: Vec<u32>,
    letter: Vec<Option<Letter>>,
    /// `offsets[k]..offsets[k+1]` are the elements of length exactly `k`.
    offsets: Vec<usize>,
    frontier: Vec<Mat2>,
}

/// Breadth-first enumeration by length, extending each word by `b` before `a`.
pub fn bfs_ball(n: usize, memory_cap: usize) -> Result<Ball> {
    let mut seen: HashSet<Key> = HashSet::new();
    let id = Entry::from_mat(Mat2::identity());
    seen.insert(id.key());
    let mut parent = vec![0u32];
    let mut letter = vec![None];
    let mut offsets = vec![0, 1];
    let mut level = vec![id];
    for _ in 1..=n {
        let start = *offsets.last().expect("non-empty");
        let mut next = Vec::new();
        for (i, m) in level.iter().enumerate() {
            for l in [Letter::B, Letter::A] {
                let child = m.times(l);
                if seen.insert(child.key()) {
                    parent.push((start - level.len() + i) as u32);
                    letter.push(Some(l));
                    next.push(child);
                    if parent.len() > memory_cap {
                        return Err(Error::MemoryCap { estimated: parent.len() as u128, cap: memory_cap });
                    }
                }
            }
        }
        offsets.push(parent.len());
        level = next;
    }
    Ok(Ball { parent, letter, offsets, frontier: level.iter().map(Entry::to_mat).collect() })
}

impl Ball {
    pub fn radius(&self) -> usize {
        self.offsets.len() - 2
    }

    /// `#B(k)`, identity excluded.
    pub fn ball_size(&self, k: usize) -> usize {
        self.offsets[k + 1] - 1
    }

    /// `#E_k`.
    pub fn level_size(&self, k: usize) -> usize {
        self.offsets[k + 1] - self.offsets[k]
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letter(&self, i: usize) -> Option<Letter> {
        self.letter[i]
    }

    pub fn word(&self, mut i: usize) -> String {
        let mut out = Vec::new();
        while let Some(l) = self.letter[i] {
            out.push(l.as_char());
            i = self.parent[i] as usize;
        }
        out.iter().rev().collect()
    }

    pub fn words_of_length(&self, k: usize) -> impl Iterator<Item = String> + '_ {
        (self.offsets[k]..self.offsets[k + 1]).map(|i| self.word(i))
    }

    /// Matrices of the longest words, in word order.
    pub fn frontier(&self) -> &[Mat2] {
        &self.frontier
    }

    /// The spanning tree: each word hangs below its prefix. Vertex ids equal element indices.
    pub fn lex_tree(&self) -> Result<Tree> {
        let mut t = Tree::with_capacity(self.len());
        for i in 1..self.len() {
            let v = t.add_child(self.parent[i] as usize)?;
            debug_assert_eq!(v, i);
        }
        Ok(t)
    }

    pub fn stats(&self) -> Vec<GrowthRow> {
        (1..=self.radius())
            .map(|k| {
                let level = self.level_size(k);
                GrowthRow {
                    n: k,
                    ball: self.ball_size(k),
                    level,
                    loglog_ratio: loglog_ratio((level as f64).ln(), k),
                }
            })
            .collect()
    }
}

/// One row of the growth table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub ball: usize,
    pub level: usize,
    pub loglog_ratio: f64,
}

/// Upper bound `2n^{2√n+2}` on the ball size, as a natural log.
pub fn ln_ball_upper_bound(n: usize) -> f64 {
    let n = n as f64;
    2f64.ln() + (2.0 * n.sqrt() + 2.0) * n.ln()
}

/// Largest `c` with `#B(k) ≥ 2^{c√k/ln k}` for all `k` in `from..=ball.radius()`.
pub fn fitted_lower_constant(ball: &Ball, from: usize) -> f64 {
    (from.max(2)..=ball.radius())
        .map(|k| (ball.ball_size(k) as f64).log2() * (k as f64).ln() / (k as f64).sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// Shape of a lexicographically minimal word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WordType {
    /// `a^n`
    Power,
    /// `a^i b a^j`
    SingleB,
    /// `a^i (b a^{p-1})… b a^j` with non-decreasing primes `p`.
    PrimeBlocks,
}

/// Classifies a word; `None` if it fits none of the three shapes.
pub fn word_type(word: &str) -> Option<WordType> {
    let mut segments = word.split('b');
    let head = segments.next()?;
    if head.chars().any(|c| c != 'a') {
        return None;
    }
    let runs: Vec<usize> = segments.map(str::len).collect();
    match runs.len() {
        0 => Some(WordType::Power),
        1 => Some(WordType::SingleB),
        m => {
            let primes: Vec<usize> = runs[..m - 1].iter().map(|r| r + 1).collect();
            let ok = primes.iter().all(|&p| is_prime(p as u64)) && primes.windows(2).all(|w| w[0] <= w[1]);
            ok.then_some(WordType::PrimeBlocks)
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Checks `b a^{k-1} b a^{l-1} b = b a^{kl-1} b` for `2 ≤ k, l ≤ max`.
pub fn check_product_identity(max: usize) -> Result<bool> {
    let block = |k: usize| format!("b{}", "a".repeat(k - 1));
    for k in 2..=max {
        for l in 2..=max {
            let lhs = eval_word(&format!("{}{}b", block(k), block(l)))?;
            let rhs = eval_word(&format!("{}b", block(k * l)))?;
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Per-vertex state for the splitting flow: run of `a` since the last `b`
/// (`None` before any `b`) and the largest prime split at so far.
fn branch_state(ball: &Ball) -> Vec<(Option<usize>, usize)> {
    let mut state = vec![(None, 0usize); ball.len()];
    for i in 1..ball.len() {
        let (run, maxp) = state[ball.parent[i] as usize];
        state[i] = match (ball.letter[i], run) {
            (Some(Letter::B), Some(t)) if t + 1 > maxp && is_prime(t as u64 + 1) => (Some(0), t + 1),
            (Some(Letter::B), _) => (Some(0), maxp),
            (_, Some(t)) => (Some(t + 1), maxp),
            (_, None) => (None, maxp),
        };
    }
    state
}

/// Unit-strength splitting flow: all mass enters through `b`, and the flow
/// halves between the `b` and `a` extensions the first time a run of `a`
/// reaches `p - 1` for a prime `p` exceeding every earlier split.
pub fn unit_prime_flow(ball: &Ball, t: &Tree) -> Result<FlowAssignment> {
    let state = branch_state(ball);
    let mut flow = FlowAssignment::zero(t);
    let frontier = ball.radius();
    for v in 0..t.len() {
        if t.depth(v) == frontier {
            continue;
        }
        let kids = t.children(v);
        let child = |l: Letter| kids.iter().copied().find(|&c| ball.letter[c] == Some(l));
        let into = if v == Tree::ROOT { 1.0 } else { flow.values[v] };
        let (run, maxp) = state[v];
        let b_share = match run {
            None if v == Tree::ROOT => 1.0,
            Some(t) if t + 1 > maxp && is_prime(t as u64 + 1) => 0.5,
            _ => 0.0,
        };
        for (l, share) in [(Letter::B, b_share), (Letter::A, 1.0 - b_share)] {
            if share == 0.0 {
                continue;
            }
            match child(l) {
                Some(c) => flow.values[c] = into * share,
                None => return Err(invalid(format!("word {}{} is not in the tree", ball.word(v), l.as_char()))),
            }
        }
    }
    Ok(flow)
}

/// Largest scale `c` for which `c` times the unit flow fits under `exp(-|e|^λ)`.
pub fn feasible_scale(t: &Tree, unit: &FlowAssignment, lambda: f64) -> f64 {
    let w = EdgeWeightProfile::Ibn { lambda };
    (1..t.len())
        .filter(|&v| unit.values[v] > 0.0)
        .map(|v| w.log_weight(v, t.depth(v)) - unit.values[v].ln())
        .fold(f64::INFINITY, f64::min)
        .exp()
}

/// The splitting flow with root strength `c`.
pub fn prime_flow(ball: &Ball, t: &Tree, lambda: f64, c: f64) -> Result<FlowAssignment> {
    if !(lambda < 0.5) {
        return Err(invalid("the splitting flow needs λ < 1/2"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid("flow strength must be positive"));
    }
    let mut f = unit_prime_flow(ball, t)?;
    f.values.iter_mut().for_each(|x| *x *= c);
    Ok(f)
}

/// Exhaustive reference: distinct matrices over all words of length `1..=n`.
pub fn brute_force_ball(n: usize) -> usize {
    let mut seen: HashSet<Mat2> = HashSet::new();
    let mut level = vec![Mat2::identity()];
    for _ in 0..n {
        level = level.iter().flat_map(|m| [mat_mul(m, &Mat2::b()), mat_mul(m, &Mat2::a())]).collect();
        seen.extend(level.iter().cloned());
    }
    seen.len()
}
