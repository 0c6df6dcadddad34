//! The example trees, built as depth-N truncations.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::tree::Tree;

/// Default ceiling on the number of vertices a generator may materialize.
pub const DEFAULT_MEMORY_CAP: usize = 20_000_000;

/// Children count per depth, up to a horizon.
///
/// This doubles as the compact form of a spherically symmetric tree: most
/// quantities on such trees only depend on the level sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeSequence {
    degrees: Vec<u32>,
}

impl DegreeSequence {
    /// `d(n) = f(n)` for `n < horizon`.
    pub fn from_fn(horizon: usize, f: impl Fn(usize) -> u32) -> Result<Self> {
        let degrees: Vec<u32> = (0..horizon).map(f).collect();
        if let Some(n) = degrees.iter().position(|&d| d == 0) {
            return Err(invalid(format!("degree rule vanishes at depth {n}")));
        }
        Ok(Self { degrees })
    }

    pub fn constant(k: u32, horizon: usize) -> Result<Self> {
        Self::from_fn(horizon, |_| k)
    }

    /// The sequence tree: the root has one child and a depth-n vertex has
    /// [`paper_sequence`]`(n)` children.
    pub fn sequence_tree(horizon: usize) -> Self {
        Self::from_fn(horizon, |n| if n == 0 { 1 } else { paper_sequence(n as u64) })
            .expect("sequence values are positive")
    }

    /// Two children at marked depths, one otherwise.
    pub fn from_marks(marks: &[bool]) -> Self {
        Self { degrees: marks.iter().map(|&m| if m { 2 } else { 1 }).collect() }
    }

    pub fn horizon(&self) -> usize {
        self.degrees.len()
    }

    pub fn degree(&self, n: usize) -> u32 {
        self.degrees[n]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// `#E_n`, exactly.
    pub fn level_size(&self, n: usize) -> BigUint {
        assert!(n <= self.horizon(), "level {n} beyond horizon {}", self.horizon());
        self.degrees[..n].iter().fold(BigUint::one(), |acc, &d| acc * d)
    }

    /// `#B(n) = Σ_{m≤n} #E_m`, exactly.
    pub fn ball_size(&self, n: usize) -> BigUint {
        let mut level = BigUint::one();
        let mut total = BigUint::one();
        for &d in &self.degrees[..n] {
            level *= d;
            total += &level;
        }
        total
    }

    /// `ln #E_n` for `n = 0..=horizon`.
    pub fn log_level_sizes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.horizon() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for &d in &self.degrees {
            acc += (d as f64).ln();
            out.push(acc);
        }
        out
    }

    /// Vertex count of the depth-`n` truncation, saturating.
    pub fn vertex_count(&self, n: usize) -> u128 {
        let mut level: u128 = 1;
        let mut total: u128 = 1;
        for &d in &self.degrees[..n] {
            level = level.saturating_mul(d as u128);
            total = total.saturating_add(level);
        }
        total
    }

    pub fn truncate(&self, n: usize) -> Self {
        Self { degrees: self.degrees[..n.min(self.horizon())].to_vec() }
    }
}

/// `2` iff `n = k + k(k+1)/2` for some `k ≥ 1`, else `1`.
pub fn paper_sequence(n: u64) -> u32 {
    // k(k+3)/2 = n  <=>  k = (sqrt(9 + 8n) - 3) / 2
    let disc = 9 + 8 * n;
    let r = disc.isqrt();
    if n >= 2 && r * r == disc && (r - 3) % 2 == 0 {
        2
    } else {
        1
    }
}

/// `#{k < n : paper_sequence(k) = 2}`.
pub fn twos_below(n: u64) -> u64 {
    (1..).take_while(|k| k * (k + 3) / 2 < n).count() as u64
}

fn check_cap(estimated: u128, cap: usize) -> Result<()> {
    if estimated > cap as u128 {
        Err(Error::MemoryCap { estimated, cap })
    } else {
        Ok(())
    }
}

/// Materializes the depth-`n` truncation of a spherically symmetric tree.
pub fn spherically_symmetric(d: &DegreeSequence, n: usize, memory_cap: usize) -> Result<Tree> {
    if n == 0 {
        return Err(invalid("depth must be at least 1"));
    }
    if n > d.horizon() {
        return Err(Error::TooShallow { available: d.horizon(), requested: n });
    }
    check_cap(d.vertex_count(n), memory_cap)?;
    let mut t = Tree::with_capacity(d.vertex_count(n) as usize);
    for depth in 0..n {
        for v in t.level_set(depth).to_vec() {
            for _ in 0..d.degree(depth) {
                t.add_child(v)?;
            }
        }
    }
    Ok(t)
}

/// Spherically symmetric tree with two children at marked depths.
pub fn from_branch_marks(marks: &[bool], n: usize, memory_cap: usize) -> Result<Tree> {
    if marks.len() < n {
        return Err(invalid(format!("{} marks given, depth {n} requested", marks.len())));
    }
    spherically_symmetric(&DegreeSequence::from_marks(&marks[..n]), n, memory_cap)
}

/// Depth at which level `n` of the unstretched tree sits after stretching.
pub fn stretched_depth(n: usize) -> usize {
    n * (n + 1) / 2
}

fn three_one_vertex_count(n: usize) -> u128 {
    let mut total: u128 = 1;
    let mut level = 1usize;
    while stretched_depth(level - 1) < n {
        let path = level.min(n - stretched_depth(level - 1)) as u128;
        total = total.saturating_add((1u128 << level.min(100)).saturating_mul(path));
        level += 1;
    }
    total
}

/// The 3-1 tree with every level-n edge replaced by a path of n edges, cut at depth `n`.
///
/// Level `m` of the unstretched tree has `2^m` vertices indexed left to right;
/// vertex `i` has one child when `i < 2^(m-1)` and three otherwise, and the root has two.
pub fn three_one_stretched(n: usize, memory_cap: usize) -> Result<Tree> {
    if n == 0 {
        return Err(invalid("depth must be at least 1"));
    }
    check_cap(three_one_vertex_count(n), memory_cap)?;
    let mut t = Tree::new();
    // Endpoints of the current unstretched level, in index order.
    let mut level: Vec<usize> = vec![Tree::ROOT];
    let mut m = 0usize;
    loop {
        let next_len = 2usize << m;
        let path_len = m + 1;
        let start = stretched_depth(m);
        if start >= n {
            break;
        }
        let steps = path_len.min(n - start);
        let mut next = Vec::with_capacity(next_len);
        for (i, &v) in level.iter().enumerate() {
            let kids = if m == 0 {
                2
            } else if i < (1usize << (m - 1)) {
                1
            } else {
                3
            };
            for _ in 0..kids {
                let mut u = v;
                for _ in 0..steps {
                    u = t.add_child(u)?;
                }
                next.push(u);
            }
        }
        if steps < path_len {
            break;
        }
        level = next;
        m += 1;
    }
    Ok(t)
}

pub fn path(n: usize) -> Tree {
    let mut t = Tree::new();
    let mut v = Tree::ROOT;
    for _ in 0..n {
        v = t.add_child(v).expect("parent exists");
    }
    t
}

pub fn complete(k: u32, n: usize) -> Tree {
    spherically_symmetric(&DegreeSequence::constant(k, n).expect("k >= 1"), n, usize::MAX)
        .expect("cap not binding")
}

/// A random tree in which every vertex above `depth` has 1..=`max_children` children,
/// except that with probability `dead_end` a vertex gets none.
pub fn random_tree(seed: u64, depth: usize, max_children: u64, dead_end: f64) -> Tree {
    let mut r = rng::stream(seed, rng::domain::TREES, 0);
    let mut t = Tree::new();
    for d in 0..depth {
        for v in t.level_set(d).to_vec() {
            if v != Tree::ROOT && rng::unit(&mut r) < dead_end {
                continue;
            }
            let k = 1 + rng::below(&mut r, max_children);
            for _ in 0..k {
                t.add_child(v).expect("parent exists");
            }
        }
    }
    t
}

/// Natural log of a big natural number.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("fits").ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// `ln ln x / ln n`, the stretched-exponential growth exponent of `x` at `n`.
pub fn loglog_ratio(ln_x: f64, n: usize) -> f64 {
    ln_x.ln() / (n as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_values() {
        let head: Vec<u32> = (1..=9).map(paper_sequence).collect();
        assert_eq!(head, vec![1, 2, 1, 1, 2, 1, 1, 1, 2]);
        assert_eq!(paper_sequence(14), 2);
        assert_eq!(paper_sequence(20), 2);
        assert_eq!(paper_sequence(0), 1);
    }

    #[test]
    fn constant_degree_levels() {
        let d = DegreeSequence::constant(2, 5).unwrap();
        assert_eq!(d.level_size(5), BigUint::from(32u32));
        assert_eq!(spherically_symmetric(&d, 5, usize::MAX).unwrap().level_set(5).len(), 32);
        assert!(DegreeSequence::from_fn(4, |n| if n == 2 { 0 } else { 1 }).is_err());
    }

    #[test]
    fn sequence_tree_level_six() {
        let t = spherically_symmetric(&DegreeSequence::sequence_tree(6), 6, usize::MAX).unwrap();
        assert_eq!(t.level_set(6).len(), 4);
        assert_eq!(t.level_set(1).len(), 1);
        assert!(t.is_spherically_symmetric(6));
    }

    #[test]
    fn memory_cap_enforced() {
        let d = DegreeSequence::constant(3, 30).unwrap();
        assert!(matches!(spherically_symmetric(&d, 30, 1000), Err(Error::MemoryCap { .. })));
        assert!(matches!(three_one_stretched(1000, 1000), Err(Error::MemoryCap { .. })));
    }

    #[test]
    fn three_one_small() {
        let t = three_one_stretched(1, usize::MAX).unwrap();
        assert_eq!(t.level_set(1).len(), 2);
        assert_eq!(t.len(), 3);
        // Level 2 of the unstretched tree sits at depth 3 and has 4 vertices.
        let t = three_one_stretched(3, usize::MAX).unwrap();
        assert_eq!(t.level_sizes(), vec![1, 2, 4, 4]);
        let t = three_one_stretched(6, usize::MAX).unwrap();
        assert_eq!(t.level_set(6).len(), 8);
        assert_eq!(t.len() as u128, three_one_vertex_count(6));
    }

    #[test]
    fn marks_tree() {
        let t = from_branch_marks(&[false; 5], 5, usize::MAX).unwrap();
        assert_eq!(t.len(), 6);
        let t = from_branch_marks(&[true; 4], 4, usize::MAX).unwrap();
        assert_eq!(t.level_set(4).len(), 16);
        assert!(from_branch_marks(&[true; 2], 4, usize::MAX).is_err());
    }

    #[test]
    fn big_logs() {
        let x = BigUint::one() << 3000usize;
        assert!((ln_big(&x) - 3000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((ln_big(&BigUint::from(1000u32)) - 1000f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn random_trees_reproducible() {
        let a = random_tree(5, 4, 3, 0.2);
        assert_eq!(a, random_tree(5, 4, 3, 0.2));
        assert!(a.height() <= 4);
    }
}
