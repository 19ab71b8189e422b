use crate::lattice::{ClusterLattice, Sublattice};

use super::operator::{Pauli, PauliOperator};
use super::tableau::{Gate, StabilizerTableau};
use super::PauliError;

/// Outcome of checking every single-bond removal on one lattice size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupercheckReport {
    pub size: usize,
    pub bonds_checked: usize,
    pub failures: Vec<usize>,
}

impl SupercheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Builds the cluster state for `L³` cells on a tableau, leaving out one
/// bond if requested, and checks the damaged-check algebra.
///
/// Conditions:
/// * each cell check next to the missing bond equals the ideal check times
///   `Z` on the far endpoint, and lies in the stabilizer group with sign +1;
/// * the ideal check itself is no longer a stabilizer;
/// * every other cell check on both sublattices is unchanged;
/// * the product of the two damaged checks sharing a lost qubit has no
///   support on either endpoint of the bond.
pub fn verify_supercheck_identity(l: usize, missing: Option<usize>) -> Result<bool, PauliError> {
    let lat = ClusterLattice::new(l)?;
    if let Some(b) = missing {
        if b >= lat.bonds().len() {
            return Err(PauliError::BondOutOfRange {
                bond: b,
                len: lat.bonds().len(),
            });
        }
    }
    let tab = build_cluster(&lat, missing);
    Ok(check(&lat, &tab, missing))
}

/// Runs [`verify_supercheck_identity`] for every bond of an `L³` lattice,
/// plus the undamaged lattice.
pub fn verify_all_bonds(l: usize) -> Result<SupercheckReport, PauliError> {
    let lat = ClusterLattice::new(l)?;
    let mut failures = Vec::new();
    if !check(&lat, &build_cluster(&lat, None), None) {
        failures.push(usize::MAX);
    }
    for b in 0..lat.bonds().len() {
        let tab = build_cluster(&lat, Some(b));
        if !check(&lat, &tab, Some(b)) {
            failures.push(b);
        }
    }
    Ok(SupercheckReport {
        size: l,
        bonds_checked: lat.bonds().len(),
        failures,
    })
}

fn build_cluster(lat: &ClusterLattice, missing: Option<usize>) -> StabilizerTableau {
    let n = 2 * lat.qubits_per_sublattice();
    let mut tab = StabilizerTableau::new_plus(n);
    for (id, b) in lat.bonds().iter().enumerate() {
        if Some(id) == missing {
            continue;
        }
        let p = lat.global_index(Sublattice::Primal, b.primal);
        let d = lat.global_index(Sublattice::Dual, b.dual);
        tab.apply_gate(Gate::Cz, &[p, d])
            .expect("lattice indices are in range");
    }
    tab
}

/// Product of the current generators for the qubits bounding `cell`.
/// Starting from |+⟩ and applying only CZs, generator `q` is the cluster
/// stabiliser of qubit `q`.
fn cell_check(lat: &ClusterLattice, tab: &StabilizerTableau, s: Sublattice, cell: usize) -> PauliOperator {
    let n = tab.num_qubits();
    let mut acc = PauliOperator::identity(n);
    for q in lat.complex(s).qubits_of(cell) {
        acc.mul_assign(&tab.generators()[lat.global_index(s, q)])
            .expect("same register");
    }
    acc
}

fn ideal_check(lat: &ClusterLattice, n: usize, s: Sublattice, cell: usize) -> PauliOperator {
    let factors: Vec<_> = lat
        .complex(s)
        .qubits_of(cell)
        .iter()
        .map(|&q| (lat.global_index(s, q), Pauli::X))
        .collect();
    PauliOperator::from_factors(n, &factors)
}

fn check(lat: &ClusterLattice, tab: &StabilizerTableau, missing: Option<usize>) -> bool {
    let n = tab.num_qubits();
    let (i, j, hit_primal, hit_dual) = match missing {
        Some(b) => {
            let bond = lat.bonds()[b];
            (
                Some(lat.global_index(Sublattice::Primal, bond.primal)),
                Some(lat.global_index(Sublattice::Dual, bond.dual)),
                lat.primal().cells_of(bond.primal).to_vec(),
                lat.dual().cells_of(bond.dual).to_vec(),
            )
        }
        None => (None, None, vec![], vec![]),
    };

    for (s, hit, far) in [
        (Sublattice::Primal, &hit_primal, j),
        (Sublattice::Dual, &hit_dual, i),
    ] {
        let mut damaged = Vec::new();
        for cell in 0..lat.complex(s).num_cells() {
            let got = cell_check(lat, tab, s, cell);
            let mut want = ideal_check(lat, n, s, cell);
            if hit.contains(&cell) {
                let ideal = want.clone();
                want.mul_letter(far.expect("damaged cells imply a bond"), Pauli::Z);
                if tab.stabilizer_sign(&ideal).is_some() {
                    return false;
                }
                damaged.push(got.clone());
            }
            if got != want || tab.stabilizer_sign(&got) != Some(1) {
                return false;
            }
        }
        if damaged.len() == 2 {
            let sup = damaged[0].multiply(&damaged[1]).expect("same register");
            let (i, j) = (i.unwrap(), j.unwrap());
            if sup.get(i) != Pauli::I || sup.get(j) != Pauli::I {
                return false;
            }
            if tab.stabilizer_sign(&sup) != Some(1) {
                return false;
            }
        } else if !damaged.is_empty() {
            return false;
        }
    }
    true
}
