use super::LatticeError;

/// Which of the two interleaved cubic sublattices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Sublattice {
    Primal,
    Dual,
}

/// Cell/qubit incidence of one sublattice on the periodic `L×L×L` torus.
///
/// Cells sit at integer sites `c = x + L(y + Lz)`. Qubit `3c + d` joins
/// cell `c` to its neighbour `c + e_d`, so the cells and qubits form a
/// simple cubic graph with qubits as edges. For the primal sublattice the
/// qubits are the cube faces; for the dual they are the cube edges
/// (equivalently the faces of the dual cubes centred on primal vertices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellComplex {
    l: usize,
    qubit_cells: Vec<[u32; 2]>,
    cell_qubits: Vec<[u32; 6]>,
}

impl CellComplex {
    fn new(l: usize) -> Self {
        let n = l * l * l;
        let mut qubit_cells = Vec::with_capacity(3 * n);
        let mut cell_qubits = vec![[0u32; 6]; n];
        for c in 0..n {
            for d in 0..3 {
                let next = shift(l, c, d, 1);
                qubit_cells.push([c as u32, next as u32]);
            }
        }
        for (c, slots) in cell_qubits.iter_mut().enumerate() {
            for d in 0..3 {
                slots[d] = (3 * c + d) as u32;
                slots[3 + d] = (3 * shift(l, c, d, -1) + d) as u32;
            }
        }
        CellComplex {
            l,
            qubit_cells,
            cell_qubits,
        }
    }

    pub fn size(&self) -> usize {
        self.l
    }

    pub fn num_cells(&self) -> usize {
        self.cell_qubits.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.qubit_cells.len()
    }

    /// The two cells bordering qubit `q`.
    #[inline]
    pub fn cells_of(&self, q: usize) -> [usize; 2] {
        let [a, b] = self.qubit_cells[q];
        [a as usize, b as usize]
    }

    /// The six qubits on the boundary of cell `c`.
    #[inline]
    pub fn qubits_of(&self, c: usize) -> [usize; 6] {
        self.cell_qubits[c].map(|q| q as usize)
    }

    /// Axis (0, 1 or 2) along which qubit `q` links its two cells.
    #[inline]
    pub fn direction(&self, q: usize) -> usize {
        q % 3
    }

    /// Qubits crossing the fixed plane between layers 0 and 1 along `d`.
    /// The parity of a cycle on these qubits is its winding number mod 2.
    pub fn crossing_plane(&self, d: usize) -> Vec<usize> {
        (0..self.num_cells())
            .filter(|&c| coords(self.l, c)[d] == 0)
            .map(|c| 3 * c + d)
            .collect()
    }

    #[inline]
    pub fn is_on_crossing_plane(&self, q: usize) -> bool {
        let d = q % 3;
        coords(self.l, q / 3)[d] == 0
    }
}

pub(crate) fn coords(l: usize, c: usize) -> [usize; 3] {
    [c % l, (c / l) % l, c / (l * l)]
}

pub(crate) fn site(l: usize, xyz: [usize; 3]) -> usize {
    xyz[0] + l * (xyz[1] + l * xyz[2])
}

pub(crate) fn shift(l: usize, c: usize, d: usize, by: isize) -> usize {
    let mut xyz = coords(l, c);
    xyz[d] = (xyz[d] as isize + by).rem_euclid(l as isize) as usize;
    site(l, xyz)
}

/// One bond of the cluster: a primal face qubit entangled with a dual
/// (edge) qubit lying on that face's boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bond {
    pub primal: usize,
    pub dual: usize,
}

/// The 3D topological cluster lattice on a periodic torus of `L³` unit cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterLattice {
    l: usize,
    primal: CellComplex,
    dual: CellComplex,
    bonds: Vec<Bond>,
    primal_bonds: Vec<[u32; 4]>,
    dual_bonds: Vec<[u32; 4]>,
}

impl ClusterLattice {
    pub fn new(l: usize) -> Result<Self, LatticeError> {
        if l < 2 {
            return Err(LatticeError::TooSmall(l));
        }
        let n = l * l * l;
        let primal = CellComplex::new(l);
        let dual = CellComplex::new(l);
        let mut bonds = Vec::with_capacity(12 * n);
        let mut primal_bonds = vec![[0u32; 4]; 3 * n];
        let mut dual_fill = vec![0usize; 3 * n];
        let mut dual_bonds = vec![[0u32; 4]; 3 * n];
        // Face (c, d) lies in the plane x_d = c_d + 1 with lower corner
        // w = c + e_d; its boundary edges run along the other two axes.
        for c in 0..n {
            for d in 0..3 {
                let face = 3 * c + d;
                let (d1, d2) = ((d + 1) % 3, (d + 2) % 3);
                let w = shift(l, c, d, 1);
                let edges = [
                    3 * w + d1,
                    3 * shift(l, w, d2, 1) + d1,
                    3 * w + d2,
                    3 * shift(l, w, d1, 1) + d2,
                ];
                for (k, &e) in edges.iter().enumerate() {
                    let id = bonds.len();
                    bonds.push(Bond {
                        primal: face,
                        dual: e,
                    });
                    primal_bonds[face][k] = id as u32;
                    dual_bonds[e][dual_fill[e]] = id as u32;
                    dual_fill[e] += 1;
                }
            }
        }
        debug_assert!(dual_fill.iter().all(|&k| k == 4));
        Ok(ClusterLattice {
            l,
            primal,
            dual,
            bonds,
            primal_bonds,
            dual_bonds,
        })
    }

    pub fn size(&self) -> usize {
        self.l
    }

    pub fn complex(&self, s: Sublattice) -> &CellComplex {
        match s {
            Sublattice::Primal => &self.primal,
            Sublattice::Dual => &self.dual,
        }
    }

    pub fn primal(&self) -> &CellComplex {
        &self.primal
    }

    pub fn dual(&self) -> &CellComplex {
        &self.dual
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, id: usize) -> Result<Bond, LatticeError> {
        self.bonds.get(id).copied().ok_or(LatticeError::BondOutOfRange {
            bond: id,
            len: self.bonds.len(),
        })
    }

    /// The four bonds incident on a qubit of the given sublattice.
    pub fn bonds_of(&self, s: Sublattice, q: usize) -> [usize; 4] {
        let b = match s {
            Sublattice::Primal => self.primal_bonds[q],
            Sublattice::Dual => self.dual_bonds[q],
        };
        b.map(|x| x as usize)
    }

    /// Number of qubits in one sublattice (`3L³`).
    pub fn qubits_per_sublattice(&self) -> usize {
        self.primal.num_qubits()
    }

    /// Global index used when both sublattices live in one register:
    /// primal faces first, then dual edges.
    pub fn global_index(&self, s: Sublattice, q: usize) -> usize {
        match s {
            Sublattice::Primal => q,
            Sublattice::Dual => self.qubits_per_sublattice() + q,
        }
    }
}

/// Free-function form of [`ClusterLattice::new`].
pub fn build_lattice(l: usize) -> Result<ClusterLattice, LatticeError> {
    ClusterLattice::new(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn counts_for_l4() {
        let lat = build_lattice(4).unwrap();
        assert_eq!(lat.primal().num_cells(), 64);
        assert_eq!(lat.primal().num_qubits(), 192);
        assert_eq!(lat.dual().num_qubits(), 192);
        assert_eq!(lat.bonds().len(), 768);
    }

    #[test]
    fn rejects_tiny_lattices() {
        assert!(matches!(build_lattice(1), Err(LatticeError::TooSmall(1))));
    }

    #[test]
    fn deterministic_construction() {
        assert_eq!(build_lattice(3).unwrap(), build_lattice(3).unwrap());
    }

    fn check_incidence(l: usize) {
        let lat = build_lattice(l).unwrap();
        for s in [Sublattice::Primal, Sublattice::Dual] {
            let cx = lat.complex(s);
            let mut seen = vec![0usize; cx.num_qubits()];
            for c in 0..cx.num_cells() {
                let qs = cx.qubits_of(c);
                let distinct: HashSet<_> = qs.iter().collect();
                assert_eq!(distinct.len(), 6, "cell {c} faces distinct");
                for q in qs {
                    seen[q] += 1;
                    assert!(cx.cells_of(q).contains(&c));
                }
            }
            assert!(seen.iter().all(|&k| k == 2), "each face in two cells");
        }
        let mut primal_deg = vec![0; lat.qubits_per_sublattice()];
        let mut dual_deg = vec![0; lat.qubits_per_sublattice()];
        let mut pairs = HashSet::new();
        for (id, b) in lat.bonds().iter().enumerate() {
            primal_deg[b.primal] += 1;
            dual_deg[b.dual] += 1;
            assert!(pairs.insert((b.primal, b.dual)), "no repeated bonds");
            assert!(lat.bonds_of(Sublattice::Primal, b.primal).contains(&id));
            assert!(lat.bonds_of(Sublattice::Dual, b.dual).contains(&id));
        }
        assert!(primal_deg.iter().all(|&k| k == 4));
        assert!(dual_deg.iter().all(|&k| k == 4));
    }

    #[test]
    fn incidence_l2_exhaustive() {
        check_incidence(2);
    }

    #[test]
    fn incidence_l3_and_l4() {
        check_incidence(3);
        check_incidence(4);
    }

    #[test]
    fn every_cube_edge_lies_on_two_of_its_faces() {
        // The Z factors of the cluster stabilisers cancel in each cell
        // product exactly when this holds.
        for l in [2, 3] {
            let lat = build_lattice(l).unwrap();
            for c in 0..lat.primal().num_cells() {
                let mut count = std::collections::HashMap::new();
                for f in lat.primal().qubits_of(c) {
                    for b in lat.bonds_of(Sublattice::Primal, f) {
                        *count.entry(lat.bonds()[b].dual).or_insert(0) += 1;
                    }
                }
                assert_eq!(count.len(), 12);
                assert!(count.values().all(|&k| k == 2));
            }
        }
    }

    #[test]
    fn crossing_plane_size() {
        let lat = build_lattice(4).unwrap();
        for d in 0..3 {
            let plane = lat.primal().crossing_plane(d);
            assert_eq!(plane.len(), 16);
            assert!(plane.iter().all(|&q| lat.primal().is_on_crossing_plane(q)));
        }
    }
}
