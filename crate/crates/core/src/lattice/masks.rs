use rand::Rng;

use super::{check_prob, ClusterLattice, LatticeError, Sublattice};
use crate::decoder::SupercheckGraph;

/// Missing bonds and the qubits they knock out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LossMask {
    pub missing_bonds: Vec<usize>,
    pub lost_primal: Vec<bool>,
    pub lost_dual: Vec<bool>,
}

impl LossMask {
    pub fn none(lat: &ClusterLattice) -> Self {
        let n = lat.qubits_per_sublattice();
        LossMask {
            missing_bonds: Vec::new(),
            lost_primal: vec![false; n],
            lost_dual: vec![false; n],
        }
    }

    pub fn lost(&self, s: Sublattice) -> &[bool] {
        match s {
            Sublattice::Primal => &self.lost_primal,
            Sublattice::Dual => &self.lost_dual,
        }
    }

    pub fn lost_mut(&mut self, s: Sublattice) -> &mut [bool] {
        match s {
            Sublattice::Primal => &mut self.lost_primal,
            Sublattice::Dual => &mut self.lost_dual,
        }
    }

    pub fn num_lost(&self, s: Sublattice) -> usize {
        self.lost(s).iter().filter(|&&b| b).count()
    }

    /// Marks a bond missing and both its endpoints lost.
    pub fn remove_bond(&mut self, lat: &ClusterLattice, bond: usize) -> Result<(), LatticeError> {
        let b = lat.bond(bond)?;
        if let Err(pos) = self.missing_bonds.binary_search(&bond) {
            self.missing_bonds.insert(pos, bond);
        }
        self.lost_primal[b.primal] = true;
        self.lost_dual[b.dual] = true;
        Ok(())
    }

    /// True when the lost sets are exactly the endpoints of the missing bonds.
    pub fn is_bond_induced(&self, lat: &ClusterLattice) -> bool {
        let mut p = vec![false; self.lost_primal.len()];
        let mut d = vec![false; self.lost_dual.len()];
        for &id in &self.missing_bonds {
            let b = lat.bonds()[id];
            p[b.primal] = true;
            d[b.dual] = true;
        }
        p == self.lost_primal && d == self.lost_dual
    }
}

/// Drops each bond independently with probability `prob`.
pub fn sample_bonds<R: Rng + ?Sized>(
    lat: &ClusterLattice,
    prob: f64,
    rng: &mut R,
) -> Result<LossMask, LatticeError> {
    check_prob("bond_missing_prob", prob, 1.0)?;
    let mut mask = LossMask::none(lat);
    if prob == 0.0 {
        return Ok(mask);
    }
    for (id, b) in lat.bonds().iter().enumerate() {
        if rng.gen_bool(prob) {
            mask.missing_bonds.push(id);
            mask.lost_primal[b.primal] = true;
            mask.lost_dual[b.dual] = true;
        }
    }
    Ok(mask)
}

/// Loses each primal qubit independently with probability `prob`, with no
/// bonds involved. Used to benchmark against the plain loss threshold.
pub fn inject_losses<R: Rng + ?Sized>(
    lat: &ClusterLattice,
    prob: f64,
    rng: &mut R,
) -> Result<LossMask, LatticeError> {
    check_prob("p_loss", prob, 1.0)?;
    let mut mask = LossMask::none(lat);
    if prob > 0.0 {
        for lost in mask.lost_primal.iter_mut() {
            *lost = rng.gen_bool(prob);
        }
    }
    Ok(mask)
}

/// Z errors on each sublattice. `dual` is empty when only the primal
/// sublattice is simulated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorMask {
    pub z_primal: Vec<bool>,
    pub z_dual: Vec<bool>,
}

impl ErrorMask {
    pub fn none(lat: &ClusterLattice) -> Self {
        ErrorMask {
            z_primal: vec![false; lat.qubits_per_sublattice()],
            z_dual: Vec::new(),
        }
    }

    pub fn z(&self, s: Sublattice) -> &[bool] {
        match s {
            Sublattice::Primal => &self.z_primal,
            Sublattice::Dual => &self.z_dual,
        }
    }
}

/// Flips intact qubits with `p_err` and lost qubits with 1/2.
pub fn sample_errors_on<R: Rng + ?Sized>(
    lost: &[bool],
    p_err: f64,
    rng: &mut R,
) -> Result<Vec<bool>, LatticeError> {
    check_prob("p_err", p_err, 0.5)?;
    Ok(lost
        .iter()
        .map(|&l| {
            if l {
                rng.gen::<bool>()
            } else {
                p_err > 0.0 && rng.gen_bool(p_err)
            }
        })
        .collect())
}

/// Samples primal Z errors under erasure semantics for lost qubits.
pub fn sample_errors<R: Rng + ?Sized>(
    _lat: &ClusterLattice,
    loss: &LossMask,
    p_err: f64,
    rng: &mut R,
) -> Result<ErrorMask, LatticeError> {
    Ok(ErrorMask {
        z_primal: sample_errors_on(&loss.lost_primal, p_err, rng)?,
        z_dual: Vec::new(),
    })
}

/// Defect flag per supercheck cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Syndrome {
    pub sublattice: Sublattice,
    pub flags: Vec<bool>,
}

impl Syndrome {
    pub fn defects(&self) -> Vec<usize> {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(c, &f)| f.then_some(c))
            .collect()
    }

    pub fn num_defects(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

/// Parity of errors on intact qubits bounding each supercheck.
pub fn extract_syndrome(
    lat: &ClusterLattice,
    loss: &LossMask,
    errors: &ErrorMask,
    partition: &SupercheckGraph,
) -> Result<Syndrome, LatticeError> {
    let s = partition.sublattice();
    let cx = lat.complex(s);
    let lost = loss.lost(s);
    let z = errors.z(s);
    if z.len() != cx.num_qubits() {
        return Err(LatticeError::Integrity(format!(
            "error mask covers {} qubits, sublattice has {}",
            z.len(),
            cx.num_qubits()
        )));
    }
    if partition.num_cells() != cx.num_cells() {
        return Err(LatticeError::Integrity(format!(
            "partition covers {} cells, lattice has {}",
            partition.num_cells(),
            cx.num_cells()
        )));
    }
    let mut flags = vec![false; partition.num_clusters()];
    for q in 0..cx.num_qubits() {
        let [a, b] = cx.cells_of(q);
        let (ca, cb) = (partition.cluster_of(a), partition.cluster_of(b));
        if lost[q] {
            if ca != cb {
                return Err(LatticeError::Integrity(format!(
                    "lost qubit {q} straddles clusters {ca} and {cb}"
                )));
            }
            continue;
        }
        if z[q] && ca != cb {
            flags[ca] ^= true;
            flags[cb] ^= true;
        }
    }
    Ok(Syndrome { sublattice: s, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::form_superchecks;
    use crate::lattice::build_lattice;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn bond_sampling_extremes() {
        let lat = build_lattice(3).unwrap();
        let m = sample_bonds(&lat, 0.0, &mut rng(1)).unwrap();
        assert!(m.missing_bonds.is_empty() && m.num_lost(Sublattice::Primal) == 0);
        let m = sample_bonds(&lat, 1.0, &mut rng(1)).unwrap();
        assert_eq!(m.num_lost(Sublattice::Primal), 81);
        assert_eq!(m.num_lost(Sublattice::Dual), 81);
        assert!(m.is_bond_induced(&lat));
        assert!(sample_bonds(&lat, 1.5, &mut rng(1)).is_err());
    }

    #[test]
    fn bond_induced_primal_loss_rate() {
        let lat = build_lattice(8).unwrap();
        let want = 1.0 - 0.99f64.powi(4);
        let mut r = rng(7);
        let mut lost = 0usize;
        let mut total = 0usize;
        while total < 100_000 {
            let m = sample_bonds(&lat, 0.01, &mut r).unwrap();
            lost += m.num_lost(Sublattice::Primal);
            total += lat.qubits_per_sublattice();
        }
        let rate = lost as f64 / total as f64;
        let sigma = (want * (1.0 - want) / total as f64).sqrt();
        assert!((rate - want).abs() < 3.0 * sigma, "{rate} vs {want}");
    }

    #[test]
    fn direct_loss_extremes() {
        let lat = build_lattice(2).unwrap();
        let m = inject_losses(&lat, 0.0, &mut rng(2)).unwrap();
        assert_eq!(m.num_lost(Sublattice::Primal), 0);
        let m = inject_losses(&lat, 1.0, &mut rng(2)).unwrap();
        assert_eq!(m.num_lost(Sublattice::Primal), 24);
        assert_eq!(m.num_lost(Sublattice::Dual), 0);
    }

    #[test]
    fn error_sampling_rates() {
        let n = 200_000;
        let mut lost = vec![false; n];
        for l in lost.iter_mut().step_by(2) {
            *l = true;
        }
        let z = sample_errors_on(&lost, 0.01, &mut rng(3)).unwrap();
        let lost_flips = z.iter().step_by(2).filter(|&&b| b).count() as f64 / (n / 2) as f64;
        let intact_flips = z.iter().skip(1).step_by(2).filter(|&&b| b).count() as f64 / (n / 2) as f64;
        let s_half = (0.25 / (n / 2) as f64).sqrt();
        assert!((lost_flips - 0.5).abs() < 3.0 * s_half);
        let s_p = (0.01 * 0.99 / (n / 2) as f64).sqrt();
        assert!((intact_flips - 0.01).abs() < 3.0 * s_p);
        let z = sample_errors_on(&vec![false; n], 0.5, &mut rng(4)).unwrap();
        let f = z.iter().filter(|&&b| b).count() as f64 / n as f64;
        assert!((f - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
        assert!(sample_errors_on(&lost, 0.6, &mut rng(3)).is_err());
        assert!(sample_errors_on(&[false; 4], 0.0, &mut rng(3)).unwrap().iter().all(|&b| !b));
    }

    #[test]
    fn single_error_makes_two_defects() {
        let lat = build_lattice(3).unwrap();
        let loss = LossMask::none(&lat);
        let sg = form_superchecks(&lat, &loss, Sublattice::Primal);
        let mut e = ErrorMask::none(&lat);
        assert_eq!(extract_syndrome(&lat, &loss, &e, &sg).unwrap().num_defects(), 0);
        e.z_primal[10] = true;
        let syn = extract_syndrome(&lat, &loss, &e, &sg).unwrap();
        let mut want: Vec<_> = lat.primal().cells_of(10).to_vec();
        want.sort();
        assert_eq!(syn.defects(), want);
    }

    #[test]
    fn error_on_lost_qubit_is_invisible() {
        let lat = build_lattice(3).unwrap();
        let mut loss = LossMask::none(&lat);
        loss.remove_bond(&lat, 40).unwrap();
        let q = lat.bonds()[40].primal;
        let sg = form_superchecks(&lat, &loss, Sublattice::Primal);
        let mut e = ErrorMask::none(&lat);
        e.z_primal[q] = true;
        assert_eq!(extract_syndrome(&lat, &loss, &e, &sg).unwrap().num_defects(), 0);
    }

    #[test]
    fn mismatched_partition_is_an_integrity_error() {
        let lat = build_lattice(3).unwrap();
        let sg = form_superchecks(&lat, &LossMask::none(&lat), Sublattice::Primal);
        let mut loss = LossMask::none(&lat);
        loss.lost_primal[0] = true;
        let e = ErrorMask::none(&lat);
        assert!(matches!(
            extract_syndrome(&lat, &loss, &e, &sg),
            Err(LatticeError::Integrity(_))
        ));
    }
}
