use crate::lattice::{CellComplex, ClusterLattice, LossMask, Sublattice};

/// Cells of one sublattice grouped into superchecks, plus the graph whose
/// nodes are superchecks and whose edges are intact qubits.
#[derive(Clone, Debug)]
pub struct SupercheckGraph {
    sublattice: Sublattice,
    cluster_of: Vec<u32>,
    num_clusters: usize,
    adj_start: Vec<u32>,
    /// (neighbouring cluster, qubit) sorted by qubit within each cluster.
    adj: Vec<(u32, u32)>,
    lost: Vec<bool>,
}

struct Dsu {
    parent: Vec<u32>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let up = self.parent[self.parent[x] as usize];
            self.parent[x] = up;
            x = up as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index wins so roots are reproducible
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo as u32;
        }
    }
}

impl SupercheckGraph {
    pub fn build(cx: &CellComplex, sublattice: Sublattice, lost: &[bool]) -> Self {
        let cells = cx.num_cells();
        let mut dsu = Dsu::new(cells);
        for (q, _) in lost.iter().enumerate().filter(|(_, &l)| l) {
            let [a, b] = cx.cells_of(q);
            dsu.union(a, b);
        }
        // Number clusters in order of their smallest cell.
        let mut id_of_root = vec![u32::MAX; cells];
        let mut cluster_of = vec![0u32; cells];
        let mut num_clusters = 0usize;
        for c in 0..cells {
            let r = dsu.find(c);
            if id_of_root[r] == u32::MAX {
                id_of_root[r] = num_clusters as u32;
                num_clusters += 1;
            }
            cluster_of[c] = id_of_root[r];
        }
        let mut degree = vec![0u32; num_clusters + 1];
        for (q, &l) in lost.iter().enumerate() {
            if l {
                continue;
            }
            let [a, b] = cx.cells_of(q);
            let (ca, cb) = (cluster_of[a], cluster_of[b]);
            if ca != cb {
                degree[ca as usize + 1] += 1;
                degree[cb as usize + 1] += 1;
            }
        }
        for k in 1..degree.len() {
            degree[k] += degree[k - 1];
        }
        let adj_start = degree.clone();
        let mut fill = degree;
        let mut adj = vec![(0u32, 0u32); *adj_start.last().unwrap() as usize];
        for (q, &l) in lost.iter().enumerate() {
            if l {
                continue;
            }
            let [a, b] = cx.cells_of(q);
            let (ca, cb) = (cluster_of[a], cluster_of[b]);
            if ca != cb {
                adj[fill[ca as usize] as usize] = (cb, q as u32);
                fill[ca as usize] += 1;
                adj[fill[cb as usize] as usize] = (ca, q as u32);
                fill[cb as usize] += 1;
            }
        }
        SupercheckGraph {
            sublattice,
            cluster_of,
            num_clusters,
            adj_start,
            adj,
            lost: lost.to_vec(),
        }
    }

    pub fn sublattice(&self) -> Sublattice {
        self.sublattice
    }

    pub fn num_cells(&self) -> usize {
        self.cluster_of.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    #[inline]
    pub fn cluster_of(&self, cell: usize) -> usize {
        self.cluster_of[cell] as usize
    }

    /// Intact qubits leaving `cluster`, with the cluster on the other side.
    #[inline]
    pub fn neighbours(&self, cluster: usize) -> &[(u32, u32)] {
        let (a, b) = (self.adj_start[cluster], self.adj_start[cluster + 1]);
        &self.adj[a as usize..b as usize]
    }

    pub fn is_lost(&self, q: usize) -> bool {
        self.lost[q]
    }

    pub fn lost(&self) -> &[bool] {
        &self.lost
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_clusters];
        for &c in &self.cluster_of {
            sizes[c as usize] += 1;
        }
        sizes
    }
}

/// Merges the two cells on either side of every lost qubit.
pub fn form_superchecks(lat: &ClusterLattice, loss: &LossMask, s: Sublattice) -> SupercheckGraph {
    SupercheckGraph::build(lat.complex(s), s, loss.lost(s))
}
