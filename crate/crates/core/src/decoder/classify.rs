use std::collections::VecDeque;

use super::{DefectGraph, Matching, SupercheckGraph};
use crate::lattice::CellComplex;

/// Winding parities of the residual chain along x, y and z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct LogicalOutcome {
    pub h: [u8; 3],
}

impl LogicalOutcome {
    pub fn success(&self) -> bool {
        self.h == [0, 0, 0]
    }
}

/// Toggles the qubits on each matched path.
pub fn correction_chain(g: &DefectGraph, m: &Matching, num_qubits: usize) -> Vec<bool> {
    let mut corr = vec![false; num_qubits];
    for &(i, j) in &m.pairs {
        for q in g.path(i, j) {
            corr[q] ^= true;
        }
    }
    corr
}

/// Chooses values on lost qubits so that every cell sees even parity.
/// Within each supercheck the lost qubits connect all member cells; odd
/// cells are pushed up a spanning forest to its root, where they cancel
/// because the supercheck itself has even parity.
pub fn close_over_losses(cx: &CellComplex, sg: &SupercheckGraph, chain: &mut [bool]) {
    let cells = cx.num_cells();
    let mut odd = vec![false; cells];
    for (q, _) in chain.iter().enumerate().filter(|(_, &b)| b) {
        let [a, b] = cx.cells_of(q);
        odd[a] ^= true;
        odd[b] ^= true;
    }
    let mut seen = vec![false; cells];
    let mut parent_face = vec![u32::MAX; cells];
    let mut order = Vec::with_capacity(cells);
    let mut queue = VecDeque::new();
    for root in 0..cells {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let start = order.len();
        queue.push_back(root);
        while let Some(c) = queue.pop_front() {
            order.push(c);
            for q in cx.qubits_of(c) {
                if !sg.is_lost(q) {
                    continue;
                }
                let [a, b] = cx.cells_of(q);
                let o = if a == c { b } else { a };
                if !seen[o] {
                    seen[o] = true;
                    parent_face[o] = q as u32;
                    queue.push_back(o);
                }
            }
        }
        for &c in order[start..].iter().rev() {
            if odd[c] && parent_face[c] != u32::MAX {
                let q = parent_face[c] as usize;
                chain[q] ^= true;
                let [a, b] = cx.cells_of(q);
                odd[a] ^= true;
                odd[b] ^= true;
            }
        }
    }
}

/// Winding parities of a cycle on the cell graph.
pub fn homology(cx: &CellComplex, chain: &[bool]) -> LogicalOutcome {
    let mut h = [0u8; 3];
    for (q, _) in chain.iter().enumerate().filter(|(_, &b)| b) {
        if cx.is_on_crossing_plane(q) {
            h[cx.direction(q)] ^= 1;
        }
    }
    LogicalOutcome { h }
}

/// Applies the matched paths, closes the residual over lost qubits and
/// reads off its winding.
pub fn apply_correction_and_classify(
    cx: &CellComplex,
    sg: &SupercheckGraph,
    errors: &[bool],
    g: &DefectGraph,
    m: &Matching,
) -> LogicalOutcome {
    let corr = correction_chain(g, m, errors.len());
    let mut residual: Vec<bool> = errors.iter().zip(&corr).map(|(&e, &c)| e ^ c).collect();
    close_over_losses(cx, sg, &mut residual);
    homology(cx, &residual)
}
