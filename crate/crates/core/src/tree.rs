//! Rooted trees stored as an arena, with cutsets and flows.
//!
//! An edge is identified with its child endpoint, so edge data lives in
//! per-vertex vectors and the root slot is unused.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::flow_cut::EdgeWeightProfile;
use crate::numeric::CompensatedSum;

pub type VertexId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    parent: Vec<Option<VertexId>>,
    depth: Vec<usize>,
    children: Vec<Vec<VertexId>>,
    levels: Vec<Vec<VertexId>>,
}

impl Default for Tree {
    fn default() -> Self {
        Self::new()
    }
}

impl Tree {
    /// A tree consisting of the root alone.
    pub fn new() -> Self {
        Self { parent: vec![None], depth: vec![0], children: vec![Vec::new()], levels: vec![vec![0]] }
    }

    pub fn with_capacity(n: usize) -> Self {
        let mut t = Self::new();
        t.parent.reserve(n);
        t.depth.reserve(n);
        t.children.reserve(n);
        t
    }

    pub const ROOT: VertexId = 0;

    pub fn root(&self) -> VertexId {
        Self::ROOT
    }

    pub fn add_child(&mut self, parent: VertexId) -> Result<VertexId> {
        if parent >= self.len() {
            return Err(Error::UnknownVertex(parent));
        }
        let id = self.len();
        let d = self.depth[parent] + 1;
        self.parent.push(Some(parent));
        self.depth.push(d);
        self.children.push(Vec::new());
        self.children[parent].push(id);
        if self.levels.len() <= d {
            self.levels.push(Vec::new());
        }
        self.levels[d].push(id);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    pub fn depth(&self, v: VertexId) -> usize {
        self.depth[v]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }

    /// Largest vertex depth.
    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }

    /// Vertices at distance exactly `n` from the root, in id order.
    pub fn level_set(&self, n: usize) -> &[VertexId] {
        self.levels.get(n).map_or(&[], |l| l.as_slice())
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Number of vertices at depth at most `n`.
    pub fn ball_size(&self, n: usize) -> usize {
        self.levels.iter().take(n + 1).map(Vec::len).sum()
    }

    /// `v` itself, then its ancestors up to the root.
    pub fn ancestors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        std::iter::successors(Some(v), move |&u| self.parent[u])
    }

    /// Whether `a` lies on the root path of `b` (inclusive).
    pub fn is_ancestor(&self, a: VertexId, b: VertexId) -> bool {
        if self.depth[a] > self.depth[b] {
            return false;
        }
        self.ancestors(b).nth(self.depth[b] - self.depth[a]) == Some(a)
    }

    /// Copy of the vertices at depth at most `n`, keeping relative id order.
    pub fn truncate(&self, n: usize) -> Tree {
        let mut out = Tree::new();
        let mut map = vec![usize::MAX; self.len()];
        map[0] = 0;
        for v in 1..self.len() {
            if self.depth[v] <= n {
                let p = self.parent[v].expect("non-root vertex");
                map[v] = out.add_child(map[p]).expect("parent mapped before child");
            }
        }
        out
    }

    /// Whether all vertices of each depth below `n` have the same number of children.
    pub fn is_spherically_symmetric(&self, n: usize) -> bool {
        (0..n.min(self.height() + 1)).all(|d| {
            let level = self.level_set(d);
            level.iter().all(|&v| self.children[v].len() == self.children[level[0]].len())
        })
    }

    pub fn write_text(&self, mut out: impl Write) -> Result<()> {
        let mut line = String::new();
        for v in 0..self.len() {
            line.clear();
            match self.parent[v] {
                Some(p) => write!(line, "{v} {p} {}", self.depth[v]),
                None => write!(line, "{v} - 0"),
            }
            .expect("writing to a String");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_text(input: impl BufRead) -> Result<Tree> {
        let mut t = Tree::new();
        let mut seen_root = false;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let err = |msg: &str| Error::Parse { line: lineno, msg: msg.to_string() };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() != 3 {
                return Err(err("expected `<id> <parent|-> <depth>`"));
            }
            let id: usize = fields[0].parse().map_err(|_| err("bad vertex id"))?;
            let depth: usize = fields[2].parse().map_err(|_| err("bad depth"))?;
            if !seen_root {
                if id != 0 || fields[1] != "-" || depth != 0 {
                    return Err(err("first line must be the root `0 - 0`"));
                }
                seen_root = true;
                continue;
            }
            if id != t.len() {
                return Err(err("ids must be consecutive"));
            }
            let parent: usize = fields[1].parse().map_err(|_| err("bad parent id"))?;
            if parent >= id {
                return Err(err("parent must precede child"));
            }
            let v = t.add_child(parent)?;
            if t.depth(v) != depth {
                return Err(err("depth disagrees with parent"));
            }
        }
        if !seen_root {
            return Err(Error::Parse { line: 0, msg: "empty tree file".into() });
        }
        Ok(t)
    }

    pub fn from_text(s: &str) -> Result<Tree> {
        Self::read_text(s.as_bytes())
    }
}

/// An edge, named by its child endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeRef(pub VertexId);

impl EdgeRef {
    pub fn child(self) -> VertexId {
        self.0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cutset {
    pub edges: Vec<EdgeRef>,
}

impl Cutset {
    pub fn new(mut edges: Vec<EdgeRef>) -> Self {
        edges.sort();
        edges.dedup();
        Self { edges }
    }

    /// All edges into level `n`.
    pub fn level(t: &Tree, n: usize) -> Self {
        Self::new(t.level_set(n).iter().map(|&v| EdgeRef(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn min_depth(&self, t: &Tree) -> Option<usize> {
        self.edges.iter().map(|e| t.depth(e.0)).min()
    }
}

/// True iff every root-to-frontier path contains exactly one edge of `s`.
pub fn is_cutset(t: &Tree, s: &Cutset, frontier_depth: usize) -> bool {
    let mut marked = vec![false; t.len()];
    for e in &s.edges {
        if e.0 == Tree::ROOT || e.0 >= t.len() || t.depth(e.0) > frontier_depth {
            return false;
        }
        marked[e.0] = true;
    }
    let frontier = t.level_set(frontier_depth);
    if frontier.is_empty() {
        return s.is_empty();
    }
    let mut hits = vec![0u32; t.len()];
    for d in 1..=frontier_depth {
        for &v in t.level_set(d) {
            let p = t.parent(v).expect("non-root");
            hits[v] = hits[p] + marked[v] as u32;
        }
    }
    frontier.iter().all(|&v| hits[v] == 1)
}

/// Edge values indexed by child vertex; the root slot is ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowAssignment {
    pub values: Vec<f64>,
}

impl FlowAssignment {
    pub fn zero(t: &Tree) -> Self {
        Self { values: vec![0.0; t.len()] }
    }

    pub fn get(&self, e: EdgeRef) -> f64 {
        self.values[e.0]
    }

    /// Total flow leaving the root.
    pub fn strength(&self, t: &Tree) -> f64 {
        let mut s = CompensatedSum::new();
        for &c in t.children(Tree::ROOT) {
            s.add(self.values[c]);
        }
        s.value()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowCheck {
    pub conserves: bool,
    pub within_capacity: bool,
    pub strength: f64,
    /// First offending vertex, if any.
    pub violation: Option<VertexId>,
}

impl FlowCheck {
    pub fn valid(&self) -> bool {
        self.conserves && self.within_capacity
    }
}

const CONSERVATION_RTOL: f64 = 1e-9;
const CAPACITY_RTOL: f64 = 1e-12;

/// Checks Kirchhoff conservation at every non-root vertex with children and
/// `0 <= θ(e) <= cap(e)` on every edge.
pub fn check_flow(t: &Tree, flow: &FlowAssignment, cap: &EdgeWeightProfile) -> Result<FlowCheck> {
    if flow.values.len() != t.len() {
        return Err(Error::MissingFlow { got: flow.values.len(), expected: t.len() });
    }
    let mut check =
        FlowCheck { conserves: true, within_capacity: true, strength: flow.strength(t), violation: None };
    for v in 1..t.len() {
        let f = flow.values[v];
        if f.is_nan() {
            return Err(Error::MissingFlow { got: t.len() - 1, expected: t.len() });
        }
        let c = cap.weight(v, t.depth(v));
        if f < 0.0 || f > c * (1.0 + CAPACITY_RTOL) {
            check.within_capacity = false;
            check.violation.get_or_insert(v);
        }
        let kids = t.children(v);
        if kids.is_empty() {
            continue;
        }
        let mut out = CompensatedSum::new();
        for &c in kids {
            out.add(flow.values[c]);
        }
        let out = out.value();
        if (f - out).abs() > CONSERVATION_RTOL * f.abs().max(out.abs()) {
            check.conserves = false;
            check.violation.get_or_insert(v);
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(depth: usize) -> Tree {
        let mut t = Tree::new();
        for d in 0..depth {
            for v in t.level_set(d).to_vec() {
                t.add_child(v).unwrap();
                t.add_child(v).unwrap();
            }
        }
        t
    }

    fn path(n: usize) -> Tree {
        let mut t = Tree::new();
        let mut v = 0;
        for _ in 0..n {
            v = t.add_child(v).unwrap();
        }
        t
    }

    #[test]
    fn add_child_depths() {
        let mut t = Tree::new();
        let a = t.add_child(0).unwrap();
        assert_eq!(t.depth(a), 1);
        t.add_child(0).unwrap();
        assert_eq!(t.level_set(1).len(), 2);
        assert_eq!(path(5).height(), 5);
        assert!(matches!(t.add_child(99), Err(Error::UnknownVertex(99))));
    }

    #[test]
    fn level_sets() {
        let t = binary(4);
        assert_eq!(t.level_set(0), &[0]);
        assert_eq!(t.level_set(3).len(), 8);
        assert!(t.level_set(9).is_empty());
        assert_eq!(t.ball_size(2), 7);
    }

    #[test]
    fn levels_are_cutsets() {
        let t = binary(4);
        for n in 1..=4 {
            assert!(is_cutset(&t, &Cutset::level(&t, n), 4));
        }
        assert!(!is_cutset(&t, &Cutset::default(), 4));
        let child = t.children(1)[0];
        assert!(!is_cutset(&t, &Cutset::new(vec![EdgeRef(1), EdgeRef(2), EdgeRef(child)]), 4));
        assert!(is_cutset(&t, &Cutset::new(vec![EdgeRef(1), EdgeRef(2)]), 4));
    }

    #[test]
    fn ancestry() {
        let t = binary(3);
        let leaf = t.level_set(3)[5];
        assert!(t.is_ancestor(0, leaf));
        assert!(t.is_ancestor(leaf, leaf));
        assert!(!t.is_ancestor(t.level_set(3)[0], leaf));
        assert_eq!(t.ancestors(leaf).count(), 4);
    }

    #[test]
    fn serialization_round_trip() {
        let t = binary(3);
        let text = t.to_text();
        assert!(text.starts_with("0 - 0\n1 0 1\n"));
        assert_eq!(Tree::from_text(&text).unwrap(), t);
        assert!(matches!(Tree::from_text("0 - 0\n2 0 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Tree::from_text("0 - 0\n1 0 2\n"), Err(Error::Parse { .. })));
        assert!(Tree::from_text("").is_err());
    }

    #[test]
    fn truncation_keeps_shape() {
        let t = binary(5).truncate(2);
        assert_eq!(t.len(), 7);
        assert!(t.is_spherically_symmetric(2));
    }

    #[test]
    fn zero_and_unit_flows() {
        let t = binary(3);
        let cap = EdgeWeightProfile::Constant(1.0);
        let c = check_flow(&t, &FlowAssignment::zero(&t), &cap).unwrap();
        assert!(c.valid());
        assert_eq!(c.strength, 0.0);

        let p = path(6);
        let unit = FlowAssignment { values: vec![1.0; p.len()] };
        let c = check_flow(&p, &unit, &EdgeWeightProfile::Constant(1.5)).unwrap();
        assert!(c.valid());
        assert_eq!(c.strength, 1.0);
        let c = check_flow(&p, &unit, &EdgeWeightProfile::Constant(0.5)).unwrap();
        assert!(!c.within_capacity);
        assert!(check_flow(&p, &FlowAssignment { values: vec![1.0; 3] }, &cap).is_err());
    }

    #[test]
    fn perturbed_flow_rejected() {
        let t = binary(3);
        let mut f = FlowAssignment::zero(&t);
        for v in 1..t.len() {
            f.values[v] = 0.5f64.powi(t.depth(v) as i32);
        }
        let cap = EdgeWeightProfile::Constant(1.0);
        assert!(check_flow(&t, &f, &cap).unwrap().valid());
        f.values[t.level_set(2)[1]] *= 1.01;
        let c = check_flow(&t, &f, &cap).unwrap();
        assert!(!c.conserves);
    }
}
