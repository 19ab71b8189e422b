use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::{GrowthPlan, JoinKind, PlanStep};
use super::{EOModel, GrowthError, GrowthStrategy, StrategyKind};
use crate::stats::derive_seed;

/// Graph state bookkeeping: which qubits are alive and how they are
/// connected.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResourceGraph {
    adj: Vec<BTreeSet<usize>>,
    alive: Vec<bool>,
    core: Option<usize>,
}

impl ResourceGraph {
    pub fn new(n: usize) -> Self {
        ResourceGraph {
            adj: vec![BTreeSet::new(); n],
            alive: vec![false; n],
            core: None,
        }
    }

    /// The core qubit of a node resource, when known.
    pub fn core(&self) -> Option<usize> {
        self.core
    }

    pub fn capacity(&self) -> usize {
        self.alive.len()
    }

    pub fn add_qubit(&mut self, q: usize) {
        self.alive[q] = true;
    }

    pub fn is_alive(&self, q: usize) -> bool {
        self.alive[q]
    }

    pub fn alive(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.alive.len()).filter(|&q| self.alive[q])
    }

    pub fn num_alive(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn neighbours(&self, q: usize) -> &BTreeSet<usize> {
        &self.adj[q]
    }

    pub fn degree(&self, q: usize) -> usize {
        self.adj[q].len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn toggle_edge(&mut self, a: usize, b: usize) {
        debug_assert!(a != b && self.alive[a] && self.alive[b]);
        if !self.adj[a].remove(&b) {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        } else {
            self.adj[b].remove(&a);
        }
    }

    /// Deletes a qubit and its edges.
    pub fn remove(&mut self, q: usize) {
        for w in std::mem::take(&mut self.adj[q]) {
            self.adj[w].remove(&q);
        }
        self.alive[q] = false;
    }

    /// Moves the neighbourhood of `absorb` onto `keep` (symmetric
    /// difference) and deletes `absorb`.
    pub fn merge(&mut self, keep: usize, absorb: usize) {
        let nb: Vec<usize> = self.adj[absorb].iter().copied().collect();
        self.remove(absorb);
        for w in nb {
            if w != keep {
                self.toggle_edge(keep, w);
            }
        }
    }

    /// Complements the subgraph induced on the neighbourhood of `v`.
    pub fn local_complement(&mut self, v: usize) {
        let nb: Vec<usize> = self.adj[v].iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                self.toggle_edge(a, b);
            }
        }
    }

    /// Applies one plan step assuming it succeeds.
    pub(crate) fn apply_step(&mut self, step: &PlanStep) {
        match *step {
            PlanStep::Fresh { qubit } => self.add_qubit(qubit),
            PlanStep::Join {
                kind: JoinKind::Edge,
                keep,
                absorb,
                ..
            } => self.toggle_edge(keep, absorb),
            PlanStep::Join {
                kind: JoinKind::Merge,
                keep,
                absorb,
                ..
            } => self.merge(keep, absorb),
        }
    }

    /// Graph left by the successful history of every root of `plan`.
    pub fn from_plan(plan: &GrowthPlan) -> Self {
        let mut g = ResourceGraph::new(plan.num_qubits());
        for step in plan.steps() {
            g.apply_step(step);
        }
        g
    }

    /// Canonical string of the tree containing `root`, rooted there, or
    /// `None` when that component has a cycle.
    pub fn canonical_tree(&self, root: usize) -> Option<String> {
        let mut parent = vec![usize::MAX; self.adj.len()];
        let mut order = vec![root];
        parent[root] = root;
        let mut i = 0;
        let mut edges = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            for &w in &self.adj[v] {
                edges += 1;
                if parent[w] == usize::MAX {
                    parent[w] = v;
                    order.push(w);
                }
            }
        }
        if edges / 2 != order.len() - 1 {
            return None;
        }
        let mut code: Vec<String> = vec![String::new(); self.adj.len()];
        for &v in order.iter().rev() {
            let mut kids: Vec<String> = self.adj[v]
                .iter()
                .filter(|&&w| parent[w] == v && w != root)
                .map(|&w| std::mem::take(&mut code[w]))
                .collect();
            kids.sort();
            code[v] = format!("({})", kids.concat());
        }
        Some(std::mem::take(&mut code[root]))
    }
}

/// Consumption record of one growth run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceStats {
    /// Fresh qubits spent, including every abandoned attempt.
    pub total_raw_qubits_consumed: u64,
    /// Fresh qubits that went into the finished object.
    pub completed_resource_size: u64,
    /// Wall-clock rounds with both halves of every join grown in parallel.
    pub growth_rounds: u64,
    /// Failed joins, each discarding both halves.
    pub abandonments: u64,
}

/// The ideal geometry of a strategy's resource, built directly, with its
/// core qubit.
pub fn target_graph(s: &GrowthStrategy) -> Result<(ResourceGraph, usize), GrowthError> {
    s.validate()?;
    let mut edges = Vec::new();
    let mut n = 1;
    let new = |n: &mut usize| {
        *n += 1;
        *n - 1
    };
    for _ in 0..4 {
        match s.kind {
            StrategyKind::Star => {
                for _ in 0..s.attempts_n {
                    edges.push((0, new(&mut n)));
                }
            }
            StrategyKind::Cross => {
                let mut prev = 0;
                for _ in 0..s.attempts_n {
                    let q = new(&mut n);
                    edges.push((prev, q));
                    prev = q;
                }
            }
            StrategyKind::Snowflake => {
                let root = new(&mut n);
                edges.push((0, root));
                let mut level = vec![root];
                for _ in 0..s.depth {
                    let mut next = Vec::new();
                    for &p in &level {
                        for _ in 0..s.branching {
                            let q = new(&mut n);
                            edges.push((p, q));
                            next.push(q);
                        }
                    }
                    level = next;
                }
            }
        }
    }
    let mut g = ResourceGraph::new(n);
    for q in 0..n {
        g.add_qubit(q);
    }
    for (a, b) in edges {
        g.toggle_edge(a, b);
    }
    g.core = Some(0);
    Ok((g, 0))
}

/// Grows one resource, restarting any join whose EO fails.
pub fn grow_resource<R: Rng + ?Sized>(
    s: &GrowthStrategy,
    m: &EOModel,
    rng: &mut R,
) -> Result<(ResourceGraph, ResourceStats), GrowthError> {
    grow_resource_with_budget(s, m, None, rng)
}

/// As [`grow_resource`], giving up once more than `budget` raw qubits
/// have been spent.
pub fn grow_resource_with_budget<R: Rng + ?Sized>(
    s: &GrowthStrategy,
    m: &EOModel,
    budget: Option<u64>,
    rng: &mut R,
) -> Result<(ResourceGraph, ResourceStats), GrowthError> {
    m.validate()?;
    let (plan, layout) = GrowthPlan::resource(s)?;
    if m.p_h >= 1.0 && budget.is_none() {
        return Err(GrowthError::Divergence);
    }
    let mut stats = ResourceStats {
        completed_resource_size: plan.raw_size(layout.root) as u64,
        ..ResourceStats::default()
    };
    stats.growth_rounds = grow(&plan, layout.root, m.p_s(), budget, rng, &mut stats)?;
    let mut g = ResourceGraph::from_plan(&plan);
    g.core = Some(layout.core);
    Ok((g, stats))
}

/// Mean raw cost of `runs` independent growth runs with the half-width
/// of its 95% interval. Run `r` draws from a seed derived from
/// `(seed, r)`.
pub fn sample_cost(s: &GrowthStrategy, p_h: f64, runs: u64, seed: u64) -> Result<(f64, f64), GrowthError> {
    if runs == 0 {
        return Err(GrowthError::InvalidArgument("runs must be at least 1".into()));
    }
    let m = EOModel::noiseless(p_h);
    let costs: Result<Vec<f64>, GrowthError> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[r]));
            Ok(grow_resource(s, &m, &mut rng)?.1.total_raw_qubits_consumed as f64)
        })
        .collect();
    let costs = costs?;
    let n = runs as f64;
    let mean = costs.iter().sum::<f64>() / n;
    if runs == 1 {
        return Ok((mean, 0.0));
    }
    let var = costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, 1.96 * (var / n).sqrt()))
}

/// Returns the rounds spent on `step` including its retries.
fn grow<R: Rng + ?Sized>(
    plan: &GrowthPlan,
    step: usize,
    p_s: f64,
    budget: Option<u64>,
    rng: &mut R,
    stats: &mut ResourceStats,
) -> Result<u64, GrowthError> {
    let Some((left, right)) = plan.children(step) else {
        stats.total_raw_qubits_consumed += 1;
        if let Some(b) = budget {
            if stats.total_raw_qubits_consumed > b {
                return Err(GrowthError::BudgetExhausted(b));
            }
        }
        return Ok(0);
    };
    let mut rounds = 0;
    loop {
        let a = grow(plan, left, p_s, budget, rng, stats)?;
        let b = grow(plan, right, p_s, budget, rng, stats)?;
        rounds += a.max(b) + 1;
        if rng.gen_bool(p_s) {
            return Ok(rounds);
        }
        stats.abandonments += 1;
    }
}
