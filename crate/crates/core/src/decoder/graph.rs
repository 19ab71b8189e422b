use std::collections::VecDeque;

use super::{DecodeError, SupercheckGraph};
use crate::lattice::Syndrome;

/// Superchecks with odd parity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectSet {
    pub clusters: Vec<usize>,
}

impl DefectSet {
    pub fn from_syndrome(s: &Syndrome) -> Self {
        DefectSet {
            clusters: s.defects(),
        }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

const NO_PARENT: u32 = u32::MAX;

/// Complete graph on defects, weighted by the number of intact qubits on a
/// shortest path between them. Keeps the BFS trees so paths can be
/// recovered for the correction.
#[derive(Clone, Debug)]
pub struct DefectGraph {
    n: usize,
    weights: Vec<i64>,
    defects: Vec<usize>,
    /// Per source defect: for every cluster, (qubit, previous cluster).
    parents: Vec<Vec<(u32, u32)>>,
}

impl DefectGraph {
    /// A bare weighted complete graph with no path data, e.g. for tests.
    pub fn from_weights(n: usize, weights: Vec<i64>) -> Result<Self, DecodeError> {
        if weights.len() != n * n {
            return Err(DecodeError::Shape {
                expected: n * n,
                got: weights.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if weights[i * n + j] != weights[j * n + i] || weights[i * n + j] < 0 {
                    return Err(DecodeError::Shape {
                        expected: n * n,
                        got: weights.len(),
                    });
                }
            }
        }
        Ok(DefectGraph {
            n,
            weights,
            defects: (0..n).collect(),
            parents: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> i64 {
        self.weights[i * self.n + j]
    }

    pub fn defects(&self) -> &[usize] {
        &self.defects
    }

    /// Intact qubits along the stored shortest path from defect `i` to `j`.
    pub fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let tree = &self.parents[i];
        let src = self.defects[i];
        let mut at = self.defects[j];
        let mut out = Vec::new();
        while at != src {
            let (q, prev) = tree[at];
            debug_assert!(q != NO_PARENT);
            out.push(q as usize);
            at = prev as usize;
        }
        out
    }
}

/// BFS from every defect over the supercheck graph. Neighbours are visited
/// in qubit order, so ties resolve the same way every run.
pub fn build_defect_graph(sg: &SupercheckGraph, d: &DefectSet) -> Result<DefectGraph, DecodeError> {
    let n = d.len();
    let k = sg.num_clusters();
    let mut index_of = vec![u32::MAX; k];
    for (i, &c) in d.clusters.iter().enumerate() {
        if c >= k {
            return Err(DecodeError::UnknownCluster(c));
        }
        index_of[c] = i as u32;
    }
    let mut weights = vec![0i64; n * n];
    let mut parents = Vec::with_capacity(n);
    let mut dist = vec![u32::MAX; k];
    let mut queue = VecDeque::with_capacity(k);
    for (i, &src) in d.clusters.iter().enumerate() {
        let mut tree = vec![(NO_PARENT, NO_PARENT); k];
        dist.iter_mut().for_each(|x| *x = u32::MAX);
        dist[src] = 0;
        queue.clear();
        queue.push_back(src);
        let mut remaining = n - 1;
        while let Some(c) = queue.pop_front() {
            if remaining == 0 {
                break;
            }
            for &(o, q) in sg.neighbours(c) {
                let o = o as usize;
                if dist[o] == u32::MAX {
                    dist[o] = dist[c] + 1;
                    tree[o] = (q, c as u32);
                    if index_of[o] != u32::MAX {
                        remaining -= 1;
                    }
                    queue.push_back(o);
                }
            }
        }
        for (j, &dst) in d.clusters.iter().enumerate() {
            if dist[dst] == u32::MAX {
                return Err(DecodeError::Disconnected { a: src, b: dst });
            }
            weights[i * n + j] = dist[dst] as i64;
        }
        parents.push(tree);
    }
    Ok(DefectGraph {
        n,
        weights,
        defects: d.clusters.clone(),
        parents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::form_superchecks;
    use crate::lattice::{build_lattice, inject_losses, LossMask, Sublattice};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 0-1 BFS on the raw cell graph: lost qubits cost 0, intact cost 1.
    fn cell_distance(
        cx: &crate::lattice::CellComplex,
        lost: &[bool],
        from: &[usize],
    ) -> Vec<u32> {
        let mut dist = vec![u32::MAX; cx.num_cells()];
        let mut dq = VecDeque::new();
        for &c in from {
            dist[c] = 0;
            dq.push_back(c);
        }
        while let Some(c) = dq.pop_front() {
            for q in cx.qubits_of(c) {
                let [a, b] = cx.cells_of(q);
                let o = if a == c { b } else { a };
                let w = if lost[q] { 0 } else { 1 };
                if dist[c] + w < dist[o] {
                    dist[o] = dist[c] + w;
                    if w == 0 {
                        dq.push_front(o);
                    } else {
                        dq.push_back(o);
                    }
                }
            }
        }
        dist
    }

    #[test]
    fn adjacent_defects_weight_one() {
        let lat = build_lattice(3).unwrap();
        let sg = form_superchecks(&lat, &LossMask::none(&lat), Sublattice::Primal);
        let [a, b] = lat.primal().cells_of(4);
        let g = build_defect_graph(&sg, &DefectSet { clusters: vec![a, b] }).unwrap();
        assert_eq!(g.weight(0, 1), 1);
        assert_eq!(g.path(0, 1), vec![4]);
    }

    #[test]
    fn weights_match_cell_graph_oracle() {
        let lat = build_lattice(3).unwrap();
        let cx = lat.primal();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..40 {
            let p = [0.0, 0.1, 0.25, 0.4][trial % 4];
            let loss = inject_losses(&lat, p, &mut rng).unwrap();
            let sg = form_superchecks(&lat, &loss, Sublattice::Primal);
            let k = sg.num_clusters();
            let m = (2 * rng.gen_range(1..=4)).min(k - k % 2);
            if m < 2 {
                continue;
            }
            let mut clusters: Vec<usize> = (0..k).collect();
            for i in 0..m {
                let j = rng.gen_range(i..k);
                clusters.swap(i, j);
            }
            clusters.truncate(m);
            let g = build_defect_graph(&sg, &DefectSet { clusters: clusters.clone() }).unwrap();
            for i in 0..m {
                let cells: Vec<usize> = (0..cx.num_cells())
                    .filter(|&c| sg.cluster_of(c) == clusters[i])
                    .collect();
                let dist = cell_distance(cx, &loss.lost_primal, &cells);
                for j in 0..m {
                    let want = (0..cx.num_cells())
                        .filter(|&c| sg.cluster_of(c) == clusters[j])
                        .map(|c| dist[c])
                        .min()
                        .unwrap();
                    assert_eq!(g.weight(i, j) as u32, want);
                    let path = g.path(i, j);
                    assert_eq!(path.len() as u32, want);
                    assert!(path.iter().all(|&q| !loss.lost_primal[q]));
                }
            }
            for i in 0..m {
                for j in 0..m {
                    assert_eq!(g.weight(i, j), g.weight(j, i));
                    for l in 0..m {
                        assert!(g.weight(i, l) <= g.weight(i, j) + g.weight(j, l));
                    }
                }
            }
        }
    }

    #[test]
    fn path_through_lossy_chain_counts_intact_qubits_only() {
        // Cells along x at y=z=0 on L=3: 0 - 1 - 2 - 0 (wrap). Lose the
        // face between cells 0 and 1; cells 0 and 1 then share a cluster,
        // and cell 2 is one intact face away from it either way.
        let lat = build_lattice(3).unwrap();
        let mut loss = LossMask::none(&lat);
        loss.lost_primal[0] = true;
        let sg = form_superchecks(&lat, &loss, Sublattice::Primal);
        let a = sg.cluster_of(0);
        let b = sg.cluster_of(2);
        let g = build_defect_graph(&sg, &DefectSet { clusters: vec![a, b] }).unwrap();
        assert_eq!(g.weight(0, 1), 1);
        let q = g.path(0, 1)[0];
        assert!(q == 3 || q == 6, "face {q}");
    }

    #[test]
    fn from_weights_validates() {
        assert!(DefectGraph::from_weights(2, vec![0, 1, 1, 0]).is_ok());
        assert!(DefectGraph::from_weights(2, vec![0, 1, 2, 0]).is_err());
        assert!(DefectGraph::from_weights(2, vec![0, 1, 1]).is_err());
    }
}
