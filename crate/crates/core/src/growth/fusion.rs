use std::collections::VecDeque;

use rand::Rng;

use super::plan::{GrowthPlan, JoinKind, NodeLayout, PlanStep};
use super::resource::ResourceGraph;
use super::{EOModel, EoKind, GrowthError, GrowthStrategy};
use crate::pauli::{Basis, Circuit, Gate, NoiseSource, Op, Pauli, SparsePauli, Support};

/// Successful history of one node: growth of its resource and of the
/// facing quarters of its four neighbours, fusion attempts and pruning,
/// as a Clifford circuit with an error channel at every fault location.
#[derive(Clone, Debug)]
pub struct NodeCircuit {
    pub circuit: Circuit,
    pub core: usize,
    /// Stubs standing in for the neighbouring cores.
    pub neighbour_cores: [usize; 4],
    pub bonds: [bool; 4],
    /// Attempts made toward each neighbour.
    pub attempts: [usize; 4],
    /// Time steps from the first preparation to the end of pruning.
    pub rounds: usize,
    /// Graph left after pruning.
    pub graph: ResourceGraph,
}

impl NodeCircuit {
    /// Observables whose flips define the fault record: bit 0 is a Z error
    /// on the core, bit 1 an X error on the core, bits `2 + 2d` and
    /// `3 + 2d` the same for neighbour `d`.
    pub fn observables(&self) -> Vec<SparsePauli> {
        let mut obs = Vec::with_capacity(10);
        for q in std::iter::once(self.core).chain(self.neighbour_cores) {
            obs.push(SparsePauli::single(q, Pauli::X));
            obs.push(SparsePauli::single(q, Pauli::Z));
        }
        obs
    }
}

/// Residual Paulis on the surviving cores after one node's procedure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FaultRecord {
    /// Observable flip bits in the layout of [`NodeCircuit::observables`].
    pub bits: u32,
    /// Faults that fired, whether or not they reached a core.
    pub faults: usize,
}

impl FaultRecord {
    pub fn z_core(&self) -> bool {
        self.bits & 1 != 0
    }

    pub fn x_core(&self) -> bool {
        self.bits & 2 != 0
    }

    pub fn z_neighbour(&self, d: usize) -> bool {
        self.bits >> (2 + 2 * d) & 1 != 0
    }

    pub fn x_neighbour(&self, d: usize) -> bool {
        self.bits >> (3 + 2 * d) & 1 != 0
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeOutcome {
    pub bonds: [bool; 4],
    pub attempts: [usize; 4],
    pub faults: FaultRecord,
}

/// Per direction, the attempt (1-based) that succeeds, or `None` when all
/// `n` fail.
pub(crate) fn sample_attempts<R: Rng + ?Sized>(
    n: usize,
    p_h: f64,
    rng: &mut R,
) -> [Option<usize>; 4] {
    let mut out = [None; 4];
    for slot in &mut out {
        *slot = (1..=n).find(|_| rng.gen_bool(1.0 - p_h));
    }
    out
}

struct Builder {
    c: Circuit,
    g: ResourceGraph,
    active: Vec<bool>,
    touched: Vec<usize>,
}

impl Builder {
    fn touch(&mut self, q: usize) {
        if !self.active[q] {
            self.active[q] = true;
            self.touched.push(q);
        }
    }

    fn gate(&mut self, support: Support) {
        self.c.push(Op::ErrorChannel {
            support,
            source: NoiseSource::Gate,
        });
    }

    fn z_on_neighbours(&self, v: usize) -> SparsePauli {
        self.g.neighbours(v).iter().map(|&w| (w, Pauli::Z)).collect()
    }

    fn prepare(&mut self, q: usize) {
        self.g.add_qubit(q);
        self.c.push(Op::PreparePlus(q));
        self.gate(Support::One(q));
        self.touch(q);
    }

    fn cz(&mut self, a: usize, b: usize) {
        self.c.push(Op::Cz(a, b));
        self.gate(Support::Two(a, b));
        self.g.toggle_edge(a, b);
        self.touch(a);
        self.touch(b);
    }

    /// Parity projection then X measurement of `absorb`.
    fn merge(&mut self, keep: usize, absorb: usize) {
        let mut byproduct = self.z_on_neighbours(absorb);
        byproduct.push(absorb, Pauli::X);
        self.c.push(Op::ParityProjection {
            a: keep,
            b: absorb,
            byproduct,
        });
        self.gate(Support::Two(keep, absorb));
        self.gate(Support::One(absorb));
        self.c.push(Op::Measure {
            qubit: absorb,
            basis: Basis::X,
            byproduct: SparsePauli::single(keep, Pauli::Z),
        });
        self.g.merge(keep, absorb);
        self.touch(keep);
        self.touch(absorb);
    }

    /// Heralded failure: both attempt qubits are measured out in Z.
    fn fail(&mut self, a: usize, b: usize) {
        self.gate(Support::Two(a, b));
        for q in [a, b] {
            let byproduct = self.z_on_neighbours(q);
            self.c.push(Op::Measure {
                qubit: q,
                basis: Basis::Z,
                byproduct,
            });
            self.g.remove(q);
            self.touch(q);
        }
    }

    fn measure_z(&mut self, q: usize) {
        self.gate(Support::One(q));
        let byproduct = self.z_on_neighbours(q);
        self.c.push(Op::Measure {
            qubit: q,
            basis: Basis::Z,
            byproduct,
        });
        self.g.remove(q);
        self.touch(q);
    }

    /// Y measurement contracting `q` out of a path; the local
    /// complementation leaves S on each neighbour, undone in software.
    fn measure_y(&mut self, q: usize) {
        self.gate(Support::One(q));
        let byproduct = self.z_on_neighbours(q);
        let nb: Vec<usize> = self.g.neighbours(q).iter().copied().collect();
        self.c.push(Op::Measure {
            qubit: q,
            basis: Basis::Y,
            byproduct,
        });
        for &w in &nb {
            self.c.push(Op::LocalClifford {
                qubit: w,
                gate: Gate::Sdg,
            });
        }
        self.g.local_complement(q);
        self.g.remove(q);
        self.touch(q);
    }

    /// Closes a time step: every live qubit left alone waits in memory.
    fn end_round(&mut self) {
        for q in 0..self.g.capacity() {
            if self.g.is_alive(q) && !self.active[q] {
                self.c.push(Op::ErrorChannel {
                    support: Support::One(q),
                    source: NoiseSource::Memory,
                });
            }
        }
        for q in self.touched.drain(..) {
            self.active[q] = false;
        }
    }
}

/// Builds the circuit for a node whose fusion attempts end as given
/// (`Some(k)`: the k-th attempt succeeds).
pub fn node_circuit(
    s: &GrowthStrategy,
    fusion: EoKind,
    outcomes: [Option<usize>; 4],
) -> Result<NodeCircuit, GrowthError> {
    let (plan, layout) = GrowthPlan::node(s)?;
    for o in outcomes.iter().flatten() {
        if *o == 0 || *o > s.attempts_n {
            return Err(GrowthError::InvalidArgument(format!(
                "attempt {o} outside 1..={}",
                s.attempts_n
            )));
        }
    }
    let n = plan.num_qubits();
    let mut b = Builder {
        c: Circuit::new(n),
        g: ResourceGraph::new(n),
        active: vec![false; n],
        touched: Vec::new(),
    };

    // Growth, as late as possible so that every root finishes at round
    // `height`.
    let height = plan.roots().iter().map(|&r| plan.height(r)).max().unwrap_or(0);
    let mut round_of = vec![usize::MAX; plan.steps().len()];
    for &r in plan.roots() {
        round_of[r] = height;
    }
    for i in (0..plan.steps().len()).rev() {
        if let Some((l, r)) = plan.children(i) {
            round_of[l] = round_of[i] - 1;
            round_of[r] = round_of[i] - 1;
        }
    }
    let mut by_round = vec![Vec::new(); height + 1];
    for (i, &r) in round_of.iter().enumerate() {
        by_round[r].push(i);
    }
    for steps in &by_round {
        for &i in steps {
            match plan.steps()[i] {
                PlanStep::Fresh { qubit } => b.prepare(qubit),
                PlanStep::Join {
                    kind: JoinKind::Edge,
                    keep,
                    absorb,
                    ..
                } => b.cz(keep, absorb),
                PlanStep::Join {
                    kind: JoinKind::Merge,
                    keep,
                    absorb,
                    ..
                } => b.merge(keep, absorb),
            }
        }
        b.end_round();
    }
    let mut rounds = height + 1;

    // Fusion: one attempt per pending direction per round.
    let mut attempts = [0usize; 4];
    let mut done = [false; 4];
    while !done.iter().all(|&d| d) {
        for d in 0..4 {
            if done[d] {
                continue;
            }
            attempts[d] += 1;
            let k = attempts[d];
            let la = layout.leaves[d][k - 1];
            let lb = layout.neighbours[d].leaves[k - 1];
            if outcomes[d] == Some(k) {
                match fusion {
                    EoKind::ParityProjection => b.merge(la, lb),
                    EoKind::ControlPhase => b.cz(la, lb),
                }
                done[d] = true;
            } else {
                b.fail(la, lb);
                done[d] = k == s.attempts_n;
            }
        }
        b.end_round();
        rounds += 1;
    }
    let bonds = outcomes.map(|o| o.is_some());

    // Pruning: measure out everything off the core-to-neighbour paths in
    // Z, then contract the paths with Y measurements.
    let paths = core_paths(&b.g, &layout, bonds);
    let mut keep = vec![false; n];
    keep[layout.core] = true;
    for nb in &layout.neighbours {
        keep[nb.core] = true;
    }
    for p in paths.iter().flatten() {
        keep[*p] = true;
    }
    for q in 0..n {
        if b.g.is_alive(q) && !keep[q] {
            b.measure_z(q);
        }
    }
    b.end_round();
    rounds += 1;
    for p in paths.iter().flatten() {
        b.measure_y(*p);
    }
    b.end_round();
    rounds += 1;
    // the core's own lattice measurement
    b.gate(Support::One(layout.core));

    Ok(NodeCircuit {
        circuit: b.c,
        core: layout.core,
        neighbour_cores: std::array::from_fn(|d| layout.neighbours[d].core),
        bonds,
        attempts,
        rounds,
        graph: b.g,
    })
}

/// Interior qubits of the path from the core to each bonded neighbour,
/// ordered outward from the core.
fn core_paths(g: &ResourceGraph, layout: &NodeLayout, bonds: [bool; 4]) -> [Vec<usize>; 4] {
    let mut parent = vec![usize::MAX; g.capacity()];
    parent[layout.core] = layout.core;
    let mut queue = VecDeque::from([layout.core]);
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbours(v) {
            if parent[w] == usize::MAX {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    std::array::from_fn(|d| {
        if !bonds[d] {
            return Vec::new();
        }
        let target = layout.neighbours[d].core;
        assert!(parent[target] != usize::MAX, "bonded neighbour unreachable");
        let mut path = Vec::new();
        let mut v = parent[target];
        while v != layout.core {
            path.push(v);
            v = parent[v];
        }
        path.reverse();
        path
    })
}

/// Fuses a freshly grown node with its four neighbours and prunes it,
/// sampling attempt outcomes and faults.
pub fn fuse_and_prune_node<R: Rng + ?Sized>(
    s: &GrowthStrategy,
    m: &EOModel,
    rng: &mut R,
) -> Result<NodeOutcome, GrowthError> {
    m.validate()?;
    let outcomes = sample_attempts(s.attempts_n, m.p_h, rng);
    let nc = node_circuit(s, m.fusion_kind(), outcomes)?;
    let effects = nc.circuit.channel_effects(&nc.observables());
    let mut faults = FaultRecord::default();
    for e in &effects {
        let p = match e.source {
            NoiseSource::Gate => m.p_g,
            NoiseSource::Memory => m.p_m,
        };
        if p > 0.0 && rng.gen_bool(p) {
            let k = rng.gen_range(0..e.support.num_paulis());
            faults.bits ^= e.flip_mask(k);
            faults.faults += 1;
        }
    }
    Ok(NodeOutcome {
        bonds: nc.bonds,
        attempts: nc.attempts,
        faults,
    })
}
