//! The firefighting game on trees: the engine, surrounding sets, the greedy
//! strategy and the containment threshold sweep.
//!
//! Each round first places the round's protections, then the fire spreads to
//! every unprotected neighbour of a burning vertex.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::flow_cut::{Bracket, Classification, CutRange, CutShape, CutSource, EdgeWeightProfile};
use crate::generators::DegreeSequence;
use crate::tree::{Cutset, Tree, VertexId};

/// Number of firefighters available in each round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BudgetSchedule {
    /// `g_n = floor(K·exp(n^γ))`.
    Intermediate { factor: f64, gamma: f64 },
    Constant(u64),
    /// `g_n` for `n = 1, 2, …`; zero afterwards.
    Explicit(Vec<u64>),
}

impl BudgetSchedule {
    /// Budget of round `n ≥ 1`, saturating at `u64::MAX`.
    pub fn budget(&self, n: usize) -> u64 {
        match self {
            Self::Intermediate { factor, gamma } => {
                let g = (factor * (n as f64).powf(*gamma).exp()).floor();
                if g >= u64::MAX as f64 {
                    u64::MAX
                } else {
                    g as u64
                }
            }
            Self::Constant(g) => *g,
            Self::Explicit(v) => v.get(n.wrapping_sub(1)).copied().unwrap_or(0),
        }
    }

    /// `Σ_{i≤n} g_i`, saturating.
    pub fn cumulative(&self, n: usize) -> u128 {
        (1..=n).fold(0u128, |acc, i| acc.saturating_add(self.budget(i) as u128))
    }
}

/// Burning and protected vertices after some number of rounds.
#[derive(Clone, Debug)]
pub struct GameState<'a> {
    tree: &'a Tree,
    schedule: BudgetSchedule,
    burning: Vec<bool>,
    protected: Vec<bool>,
    /// Vertices that caught fire in the latest spread.
    front: Vec<VertexId>,
    round: usize,
    fire_size: usize,
    protected_size: usize,
    max_fire_depth: usize,
}

/// The ball `B(k)` on fire, nothing protected.
pub fn new_game<'a>(t: &'a Tree, k: usize, schedule: BudgetSchedule) -> Result<GameState<'a>> {
    if k > t.height() {
        return Err(Error::TooShallow { available: t.height(), requested: k });
    }
    let initial: Vec<VertexId> = (0..=k).flat_map(|d| t.level_set(d).iter().copied()).collect();
    GameState::with_fire(t, &initial, schedule)
}

impl<'a> GameState<'a> {
    /// A game with an arbitrary initial fire.
    pub fn with_fire(t: &'a Tree, initial: &[VertexId], schedule: BudgetSchedule) -> Result<Self> {
        let mut burning = vec![false; t.len()];
        for &v in initial {
            if v >= t.len() {
                return Err(Error::UnknownVertex(v));
            }
            burning[v] = true;
        }
        let mut front: Vec<VertexId> = (0..t.len()).filter(|&v| burning[v]).collect();
        front.sort_unstable();
        let max_fire_depth = front.iter().map(|&v| t.depth(v)).max().unwrap_or(0);
        Ok(Self {
            tree: t,
            schedule,
            fire_size: front.len(),
            burning,
            protected: vec![false; t.len()],
            front,
            round: 0,
            protected_size: 0,
            max_fire_depth,
        })
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn is_burning(&self, v: VertexId) -> bool {
        self.burning[v]
    }

    pub fn is_protected(&self, v: VertexId) -> bool {
        self.protected[v]
    }

    pub fn fire_size(&self) -> usize {
        self.fire_size
    }

    pub fn protected_size(&self) -> usize {
        self.protected_size
    }

    pub fn max_fire_depth(&self) -> usize {
        self.max_fire_depth
    }

    pub fn burning(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.tree.len()).filter(|&v| self.burning[v])
    }

    fn neighbours(&self, v: VertexId) -> impl Iterator<Item = VertexId> + 'a {
        let t = self.tree;
        t.parent(v).into_iter().chain(t.children(v).iter().copied())
    }

    /// Whether the next spread would reach nothing.
    pub fn is_contained(&self) -> bool {
        self.front.iter().all(|&v| self.neighbours(v).all(|u| self.burning[u] || self.protected[u]))
    }

    /// Plays one round: protects `protect`, then spreads the fire. Returns the newly burnt vertices.
    pub fn step(&mut self, protect: &[VertexId]) -> Result<Vec<VertexId>> {
        let budget = self.schedule.budget(self.round + 1);
        if protect.len() as u64 > budget {
            return Err(Error::IllegalMove(format!(
                "round {} allows {budget} protections, {} requested",
                self.round + 1,
                protect.len()
            )));
        }
        for (i, &v) in protect.iter().enumerate() {
            if v >= self.tree.len() {
                return Err(Error::UnknownVertex(v));
            }
            if self.burning[v] {
                return Err(Error::IllegalMove(format!("vertex {v} is already burning")));
            }
            if self.protected[v] || protect[..i].contains(&v) {
                return Err(Error::IllegalMove(format!("vertex {v} is already protected")));
            }
        }
        for &v in protect {
            self.protected[v] = true;
        }
        self.protected_size += protect.len();
        let mut next = Vec::new();
        for &v in &self.front {
            for u in self.neighbours(v) {
                if !self.burning[u] && !self.protected[u] {
                    self.burning[u] = true;
                    next.push(u);
                }
            }
        }
        next.sort_unstable();
        self.fire_size += next.len();
        if let Some(d) = next.iter().map(|&v| self.tree.depth(v)).max() {
            self.max_fire_depth = self.max_fire_depth.max(d);
        }
        self.front = next.clone();
        self.round += 1;
        Ok(next)
    }
}

/// Vertices whose protection isolates `B(k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurroundingSet {
    pub vertices: Vec<VertexId>,
    pub k: usize,
}

/// `U = {e⁺ : e ∈ π}`; fails when `π` reaches into `B(k)`.
pub fn surrounding_set_from_cutset(t: &Tree, cut: &Cutset, k: usize) -> Result<SurroundingSet> {
    if let Some(d) = cut.min_depth(t) {
        if d <= k {
            return Err(invalid(format!("cutset has an edge at depth {d}, inside B({k})")));
        }
    }
    let mut vertices: Vec<VertexId> = cut.edges.iter().map(|e| e.child()).collect();
    vertices.sort_by_key(|&v| (t.depth(v), v));
    Ok(SurroundingSet { vertices, k })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Contained,
    /// The fire reached a vertex of the surrounding set before it was protected.
    Breached,
    NotContainedByHorizon,
}

impl Verdict {
    pub fn contained(self) -> bool {
        self == Verdict::Contained
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub verdict: Verdict,
    pub rounds: usize,
    pub fire_size: u128,
    pub protected_size: u128,
}

/// Protects `U` in order of depth (ties by id), `g_n` vertices in round `n`.
pub fn greedy_play(t: &Tree, k: usize, schedule: &BudgetSchedule, u: &SurroundingSet, horizon: usize) -> Result<GameOutcome> {
    let mut game = new_game(t, k, schedule.clone())?;
    greedy_play_from(&mut game, u, horizon).map(|(o, _)| o)
}

/// Greedy play on an existing game; also returns the protections of each round.
pub fn greedy_play_from(game: &mut GameState<'_>, u: &SurroundingSet, horizon: usize) -> Result<(GameOutcome, Vec<Vec<VertexId>>)> {
    let t = game.tree;
    let mut order = u.vertices.clone();
    order.sort_by_key(|&v| (t.depth(v), v));
    let mut next = 0;
    let mut moves = Vec::new();
    let outcome = |g: &GameState<'_>, verdict| GameOutcome {
        verdict,
        rounds: g.round(),
        fire_size: g.fire_size() as u128,
        protected_size: g.protected_size() as u128,
    };
    for _ in 0..horizon {
        let budget = game.schedule.budget(game.round() + 1);
        let mut batch = Vec::new();
        while next < order.len() && (batch.len() as u64) < budget {
            let v = order[next];
            if game.is_burning(v) {
                return Ok((outcome(game, Verdict::Breached), moves));
            }
            if !game.is_protected(v) {
                batch.push(v);
            }
            next += 1;
        }
        game.step(&batch)?;
        moves.push(batch);
        if order[next..].iter().any(|&v| game.is_burning(v)) {
            return Ok((outcome(game, Verdict::Breached), moves));
        }
        if game.is_contained() {
            return Ok((outcome(game, Verdict::Contained), moves));
        }
    }
    Ok((outcome(game, Verdict::NotContainedByHorizon), moves))
}

/// Greedy play on a spherically symmetric tree with `U = E_m`, tracked by level counts.
pub fn greedy_play_level(d: &DegreeSequence, k: usize, schedule: &BudgetSchedule, m: usize, horizon: usize) -> Result<GameOutcome> {
    if m <= k {
        return Err(invalid(format!("level {m} lies inside B({k})")));
    }
    if m > d.horizon() {
        return Err(Error::TooShallow { available: d.horizon(), requested: m });
    }
    let mut level = vec![1u128; m + 1];
    for n in 1..=m {
        level[n] = level[n - 1].saturating_mul(d.degree(n - 1) as u128);
    }
    let ball = |n: usize| level[..=n].iter().fold(0u128, |a, &b| a.saturating_add(b));
    let target = level[m];
    let mut protected: u128 = 0;
    for round in 1..=horizon {
        protected = protected.saturating_add(schedule.budget(round) as u128).min(target);
        if k + round == m {
            let verdict = if protected == target { Verdict::Contained } else { Verdict::Breached };
            let fire = ball(m - 1) + (target - protected);
            return Ok(GameOutcome { verdict, rounds: round, fire_size: fire, protected_size: protected });
        }
        if k + round + 1 == m && protected == target {
            let fire = ball(m - 1);
            return Ok(GameOutcome { verdict: Verdict::Contained, rounds: round, fire_size: fire, protected_size: protected });
        }
    }
    Ok(GameOutcome {
        verdict: Verdict::NotContainedByHorizon,
        rounds: horizon,
        fire_size: ball((k + horizon).min(m - 1)),
        protected_size: protected,
    })
}

/// `exp(-k^γ) - exp(-(k+1)^γ)`: a cut lighter than this avoids `B(k)`.
pub fn epsilon_margin(k: usize, gamma: f64) -> f64 {
    (-(k as f64).powf(gamma)).exp() - (-((k + 1) as f64).powf(gamma)).exp()
}

/// Result of the min-cut containment construction at one γ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentAttempt {
    pub gamma: f64,
    /// Round horizon of the last attempt made.
    pub horizon: usize,
    /// Depth of the shallowest and deepest vertex of the surrounding set used, if one was found.
    pub cut_depths: Option<(usize, usize)>,
    pub outcome: GameOutcome,
}

/// Trees on which the containment construction can be run.
pub trait FireTree: CutSource {
    /// For the truncation `k + horizon`, a min-cut below `B(k)` lighter than the margin,
    /// played greedily; `None` when no such cut exists.
    fn play_margin_cut(&self, k: usize, gamma: f64, schedule: &BudgetSchedule, horizon: usize) -> Result<Option<(GameOutcome, (usize, usize))>>;

    fn ball_size(&self, n: usize) -> u128;
}

fn margin_cut(t: &dyn CutSource, k: usize, gamma: f64, frontier: usize) -> Result<Option<CutShape>> {
    let w = EdgeWeightProfile::Ibn { lambda: gamma };
    let cut = t.min_cut_in(&w, CutRange { frontier, shallowest: k + 1 })?;
    Ok((cut.value.value() < epsilon_margin(k, gamma)).then_some(cut.cut))
}

impl FireTree for Tree {
    fn play_margin_cut(&self, k: usize, gamma: f64, schedule: &BudgetSchedule, horizon: usize) -> Result<Option<(GameOutcome, (usize, usize))>> {
        let Some(CutShape::Edges(cut)) = margin_cut(self, k, gamma, k + horizon)? else {
            return Ok(None);
        };
        let u = surrounding_set_from_cutset(self, &cut, k)?;
        let depths = (self.depth(u.vertices[0]), self.depth(*u.vertices.last().expect("non-empty")));
        Ok(Some((greedy_play(self, k, schedule, &u, horizon)?, depths)))
    }

    fn ball_size(&self, n: usize) -> u128 {
        Tree::ball_size(self, n) as u128
    }
}

impl FireTree for DegreeSequence {
    fn play_margin_cut(&self, k: usize, gamma: f64, schedule: &BudgetSchedule, horizon: usize) -> Result<Option<(GameOutcome, (usize, usize))>> {
        let Some(CutShape::Level(m)) = margin_cut(self, k, gamma, k + horizon)? else {
            return Ok(None);
        };
        Ok(Some((greedy_play_level(self, k, schedule, m, horizon)?, (m, m))))
    }

    fn ball_size(&self, n: usize) -> u128 {
        let mut level = 1u128;
        let mut total = 1u128;
        for d in 0..n {
            level = level.saturating_mul(self.degree(d) as u128);
            total = total.saturating_add(level);
        }
        total
    }
}

/// Runs the construction at each horizon in turn until one contains the fire.
pub fn attempt_containment(t: &dyn FireTree, k: usize, gamma: f64, factor: f64, horizons: &[usize]) -> Result<ContainmentAttempt> {
    let schedule = BudgetSchedule::Intermediate { factor, gamma };
    let mut last = None;
    for &h in horizons {
        if k + h > t.horizon() {
            return Err(Error::TooShallow { available: t.horizon(), requested: k + h });
        }
        if let Some((outcome, depths)) = t.play_margin_cut(k, gamma, &schedule, h)? {
            let attempt = ContainmentAttempt { gamma, horizon: h, cut_depths: Some(depths), outcome };
            if outcome.verdict.contained() {
                return Ok(attempt);
            }
            last = Some(attempt);
        }
    }
    if let Some(a) = last {
        return Ok(a);
    }
    let h = *horizons.last().ok_or_else(|| invalid("no horizons"))?;
    let protected = 0;
    Ok(ContainmentAttempt {
        gamma,
        horizon: h,
        cut_depths: None,
        outcome: GameOutcome {
            verdict: Verdict::NotContainedByHorizon,
            rounds: h,
            fire_size: t.ball_size(k + h),
            protected_size: protected,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FireSweep {
    pub attempts: Vec<ContainmentAttempt>,
    pub bracket: Bracket,
}

/// Brackets the containment threshold between the largest failing and smallest containing γ.
pub fn lambda_c_estimate(t: &dyn FireTree, k: usize, gammas: &[f64], factor: f64, horizons: &[usize]) -> Result<FireSweep> {
    use rayon::prelude::*;
    if gammas.iter().any(|&g| !(g > 0.0 && g < 1.0)) {
        return Err(invalid("γ grid must lie inside (0, 1)"));
    }
    if !(factor > 0.0) {
        return Err(invalid("budget factor must be positive"));
    }
    let attempts: Vec<ContainmentAttempt> =
        gammas.par_iter().map(|&g| attempt_containment(t, k, g, factor, horizons)).collect::<Result<_>>()?;
    let classes: Vec<(f64, Classification)> = attempts
        .iter()
        .map(|a| {
            let class = match a.outcome.verdict {
                Verdict::Contained => Classification::Above,
                Verdict::NotContainedByHorizon => Classification::Below,
                Verdict::Breached => Classification::Undecided,
            };
            (a.gamma, class)
        })
        .collect();
    Ok(FireSweep { bracket: Bracket::from_classes(&classes), attempts })
}
