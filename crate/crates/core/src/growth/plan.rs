use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{GrowthError, GrowthStrategy, StrategyKind};

/// How a join connects its two halves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JoinKind {
    /// Parity projection of `keep` and `absorb`, then `absorb` is measured
    /// in X. The neighbourhoods merge onto `keep`.
    Merge,
    /// Controlled phase between `keep` and `absorb`.
    Edge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanStep {
    Fresh {
        qubit: usize,
    },
    Join {
        kind: JoinKind,
        left: usize,
        right: usize,
        keep: usize,
        absorb: usize,
    },
}

/// Join trees over fresh qubits. Steps are stored children first, so a
/// step index is always larger than those of its children.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GrowthPlan {
    steps: Vec<PlanStep>,
    roots: Vec<usize>,
    num_qubits: usize,
}

#[derive(Clone, Copy, Debug)]
struct Part {
    step: usize,
    size: usize,
    port: usize,
}

impl GrowthPlan {
    pub fn steps(&self) -> &[PlanStep] {
        &self.steps
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Fresh qubits under `step`.
    pub fn raw_size(&self, step: usize) -> usize {
        self.fold(step, &mut |_| 1, &mut |a, b| a + b)
    }

    /// Join levels under `step`; a fresh qubit has height zero.
    pub fn height(&self, step: usize) -> usize {
        self.fold(step, &mut |_| 0, &mut |a, b| a.max(b) + 1)
    }

    /// Number of heralded operations under `step`.
    pub fn num_joins(&self, step: usize) -> usize {
        self.raw_size(step) - 1
    }

    fn fold<T: Copy>(
        &self,
        root: usize,
        leaf: &mut impl FnMut(usize) -> T,
        join: &mut impl FnMut(T, T) -> T,
    ) -> T {
        let mut val: Vec<Option<T>> = vec![None; root + 1];
        for i in 0..=root {
            val[i] = Some(match self.steps[i] {
                PlanStep::Fresh { qubit } => leaf(qubit),
                PlanStep::Join { left, right, .. } => {
                    let (Some(a), Some(b)) = (val[left], val[right]) else {
                        unreachable!("children precede parents")
                    };
                    join(a, b)
                }
            });
        }
        val[root].expect("root evaluated")
    }

    /// Children of a step, or `None` for a fresh qubit.
    pub fn children(&self, step: usize) -> Option<(usize, usize)> {
        match self.steps[step] {
            PlanStep::Fresh { .. } => None,
            PlanStep::Join { left, right, .. } => Some((left, right)),
        }
    }

    fn fresh(&mut self) -> Part {
        let qubit = self.num_qubits;
        self.num_qubits += 1;
        self.steps.push(PlanStep::Fresh { qubit });
        Part {
            step: self.steps.len() - 1,
            size: 1,
            port: qubit,
        }
    }

    fn join(&mut self, kind: JoinKind, a: Part, keep: usize, b: Part, absorb: usize) -> Part {
        self.steps.push(PlanStep::Join {
            kind,
            left: a.step,
            right: b.step,
            keep,
            absorb,
        });
        Part {
            step: self.steps.len() - 1,
            size: a.size + b.size,
            port: a.port,
        }
    }

    /// Two fresh qubits joined by an edge; the port is the first.
    fn edge(&mut self) -> (Part, usize) {
        let a = self.fresh();
        let b = self.fresh();
        (self.join(JoinKind::Edge, a, a.port, b, b.port), b.port)
    }

    /// Merges the ports of all parts into one qubit, smallest parts first.
    fn merge_all(&mut self, parts: Vec<Part>) -> Part {
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> = BinaryHeap::new();
        let mut pool = Vec::new();
        for p in parts {
            heap.push(Reverse((p.size, pool.len())));
            pool.push(p);
        }
        loop {
            let Reverse((_, i)) = heap.pop().expect("at least one part");
            let Some(Reverse((_, j))) = heap.pop() else {
                return pool[i];
            };
            let (a, b) = (pool[i], pool[j]);
            let m = self.join(JoinKind::Merge, a, a.port, b, b.port);
            heap.push(Reverse((m.size, pool.len())));
            pool.push(m);
        }
    }

    /// Balanced chain of `n` qubits joined end to end. Returns the part
    /// (port = first qubit) and its qubits in order.
    fn chain(&mut self, n: usize) -> (Part, Vec<usize>) {
        if n == 1 {
            let p = self.fresh();
            return (p, vec![p.port]);
        }
        let (l, mut lq) = self.chain(n / 2);
        let (r, rq) = self.chain(n - n / 2);
        let p = self.join(JoinKind::Edge, l, *lq.last().unwrap(), r, rq[0]);
        lq.extend(rq);
        (p, lq)
    }

    /// One direction of a resource: a stub qubit (the port) plus the
    /// attempt qubits in the order they are used.
    fn quarter(&mut self, s: &GrowthStrategy) -> (Part, Vec<usize>) {
        match s.kind {
            StrategyKind::Star => {
                let mut parts = Vec::new();
                let mut leaves = Vec::new();
                for _ in 0..s.attempts_n {
                    let (p, leaf) = self.edge();
                    parts.push(p);
                    leaves.push(leaf);
                }
                (self.merge_all(parts), leaves)
            }
            StrategyKind::Cross => {
                let (p, q) = self.chain(s.attempts_n + 1);
                // tip first
                (p, q[1..].iter().rev().copied().collect())
            }
            StrategyKind::Snowflake => self.tree(s.branching, s.depth),
        }
    }

    /// Stubbed tree: the root hangs off the stub, every inner node has
    /// `branching` children.
    fn tree(&mut self, branching: usize, depth: usize) -> (Part, Vec<usize>) {
        let (e, far) = self.edge();
        if depth == 0 {
            return (e, vec![far]);
        }
        // The new edge's first qubit becomes the root; its second the stub.
        let mut parts = vec![e];
        let mut leaves = Vec::new();
        for _ in 0..branching {
            let (t, l) = self.tree(branching, depth - 1);
            parts.push(t);
            leaves.extend(l);
        }
        let mut merged = self.merge_all(parts);
        merged.port = far;
        (merged, leaves)
    }

    /// The full resource one node grows: four directions merged at their
    /// stubs into the core qubit.
    pub fn resource(s: &GrowthStrategy) -> Result<(GrowthPlan, NodeLayout), GrowthError> {
        s.validate()?;
        let mut plan = GrowthPlan::default();
        let layout = plan.add_resource(s);
        plan.roots.push(layout.root);
        Ok((plan, layout))
    }

    fn add_resource(&mut self, s: &GrowthStrategy) -> NodeLayout {
        let mut parts = Vec::new();
        let mut leaves = Vec::new();
        let mut firsts = Vec::new();
        for _ in 0..4 {
            firsts.push(self.num_qubits);
            let (p, l) = self.quarter(s);
            parts.push(p);
            leaves.push(l);
        }
        let core = self.merge_all(parts);
        let mut direction = vec![None; self.num_qubits];
        for d in 0..4 {
            let end = firsts.get(d + 1).copied().unwrap_or(self.num_qubits);
            for slot in &mut direction[firsts[d]..end] {
                *slot = Some(d as u8);
            }
        }
        direction[core.port] = None;
        NodeLayout {
            root: core.step,
            core: core.port,
            leaves: leaves.try_into().expect("four directions"),
            neighbours: Vec::new(),
            direction,
        }
    }

    /// A node resource plus, toward each direction, the facing quarter of
    /// the neighbour's resource. The neighbour's stub stands in for its
    /// core. Roots are the node resource first, then the four quarters.
    pub fn node(s: &GrowthStrategy) -> Result<(GrowthPlan, NodeLayout), GrowthError> {
        s.validate()?;
        let mut plan = GrowthPlan::default();
        let mut layout = plan.add_resource(s);
        plan.roots.push(layout.root);
        for d in 0..4u8 {
            let (p, leaves) = plan.quarter(s);
            plan.roots.push(p.step);
            layout.direction.resize(plan.num_qubits, Some(d));
            layout.direction[p.port] = None;
            layout.neighbours.push(Neighbour {
                core: p.port,
                leaves,
            });
        }
        Ok((plan, layout))
    }
}

/// Facing quarter of a neighbouring resource.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Neighbour {
    pub core: usize,
    pub leaves: Vec<usize>,
}

/// Where the special qubits of a grown node sit in its plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeLayout {
    /// Root step of the node resource.
    pub root: usize,
    pub core: usize,
    /// Attempt qubits toward each neighbour, in order of use.
    pub leaves: [Vec<usize>; 4],
    /// Facing quarters, empty unless built by [`GrowthPlan::node`].
    pub neighbours: Vec<Neighbour>,
    /// Direction owning each qubit; cores have none.
    pub direction: Vec<Option<u8>>,
}

/// Expected raw qubits per completed resource: a join consumes both
/// halves and succeeds with probability `1 - p_h`, so its cost is the sum
/// of its halves divided by `1 - p_h`.
pub fn expected_cost(s: &GrowthStrategy, p_h: f64) -> Result<f64, GrowthError> {
    let (plan, layout) = GrowthPlan::resource(s)?;
    plan_cost(&plan, layout.root, p_h)
}

pub(crate) fn plan_cost(plan: &GrowthPlan, root: usize, p_h: f64) -> Result<f64, GrowthError> {
    let p_s = success_prob(p_h)?;
    Ok(plan.fold(root, &mut |_| 1.0, &mut |a, b| (a + b) / p_s))
}

fn success_prob(p_h: f64) -> Result<f64, GrowthError> {
    if !(0.0..=1.0).contains(&p_h) {
        return Err(GrowthError::Probability {
            name: "p_h",
            value: p_h,
        });
    }
    if p_h >= 1.0 {
        return Err(GrowthError::Divergence);
    }
    Ok(1.0 - p_h)
}

/// Expected raw cost of an object of `size` qubits grown by repeated
/// doubling (balanced halves).
pub fn doubling_cost(size: usize, p_h: f64) -> Result<f64, GrowthError> {
    let p_s = success_prob(p_h)?;
    if size == 0 {
        return Err(GrowthError::InvalidArgument("size must be positive".into()));
    }
    fn go(n: usize, p_s: f64) -> f64 {
        if n == 1 {
            1.0
        } else {
            (go(n / 2, p_s) + go(n - n / 2, p_s)) / p_s
        }
    }
    Ok(go(size, p_s))
}
