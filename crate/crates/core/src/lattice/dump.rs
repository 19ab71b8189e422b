//! Line-oriented text dump of one lattice trial.
//!
//! ```text
//! # optional comment
//! size 4
//! bond 17
//! lost primal 12
//! lost dual 5
//! z primal 3
//! z dual 9
//! ```
//!
//! One record per line, indices only. `size` must come first.

use std::fmt::Write as _;

use super::{ClusterLattice, ErrorMask, LatticeError, LossMask, Sublattice};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialDump {
    pub size: usize,
    pub loss: LossMask,
    pub errors: ErrorMask,
}

pub fn write_trial(lat: &ClusterLattice, loss: &LossMask, errors: &ErrorMask) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "size {}", lat.size());
    for b in &loss.missing_bonds {
        let _ = writeln!(out, "bond {b}");
    }
    for (name, set) in [("primal", &loss.lost_primal), ("dual", &loss.lost_dual)] {
        for (q, _) in set.iter().enumerate().filter(|(_, &l)| l) {
            let _ = writeln!(out, "lost {name} {q}");
        }
    }
    for (name, set) in [("primal", &errors.z_primal), ("dual", &errors.z_dual)] {
        for (q, _) in set.iter().enumerate().filter(|(_, &l)| l) {
            let _ = writeln!(out, "z {name} {q}");
        }
    }
    out
}

pub fn read_trial(text: &str) -> Result<TrialDump, LatticeError> {
    let err = |line: usize, msg: String| LatticeError::Dump { line, msg };
    let mut lat: Option<ClusterLattice> = None;
    let mut loss: Option<LossMask> = None;
    let mut errors: Option<ErrorMask> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = raw.split_whitespace().collect();
        let index = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(line, format!("bad index {s:?}")))
        };
        if parts[0] == "size" {
            if lat.is_some() || parts.len() != 2 {
                return Err(err(line, "size must appear once as `size <L>`".into()));
            }
            let l = ClusterLattice::new(index(parts[1])?)?;
            loss = Some(LossMask::none(&l));
            errors = Some(ErrorMask::none(&l));
            lat = Some(l);
            continue;
        }
        let (Some(lat), Some(loss), Some(errors)) = (&lat, &mut loss, &mut errors) else {
            return Err(err(line, "record before `size`".into()));
        };
        let n = lat.qubits_per_sublattice();
        let sub = |s: &str| match s {
            "primal" => Ok(Sublattice::Primal),
            "dual" => Ok(Sublattice::Dual),
            other => Err(err(line, format!("unknown sublattice {other:?}"))),
        };
        match (parts[0], parts.len()) {
            ("bond", 2) => {
                let b = index(parts[1])?;
                if b >= lat.bonds().len() {
                    return Err(err(line, format!("bond {b} out of range")));
                }
                if let Err(pos) = loss.missing_bonds.binary_search(&b) {
                    loss.missing_bonds.insert(pos, b);
                }
            }
            ("lost", 3) => {
                let q = index(parts[2])?;
                if q >= n {
                    return Err(err(line, format!("qubit {q} out of range")));
                }
                loss.lost_mut(sub(parts[1])?)[q] = true;
            }
            ("z", 3) => {
                let q = index(parts[2])?;
                if q >= n {
                    return Err(err(line, format!("qubit {q} out of range")));
                }
                match sub(parts[1])? {
                    Sublattice::Primal => errors.z_primal[q] = true,
                    Sublattice::Dual => {
                        if errors.z_dual.is_empty() {
                            errors.z_dual = vec![false; n];
                        }
                        errors.z_dual[q] = true;
                    }
                }
            }
            _ => return Err(err(line, format!("unrecognised record {raw:?}"))),
        }
    }
    match (lat, loss, errors) {
        (Some(lat), Some(loss), Some(errors)) => Ok(TrialDump {
            size: lat.size(),
            loss,
            errors,
        }),
        _ => Err(err(0, "missing `size` record".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{sample_bonds, sample_errors};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip() {
        let lat = ClusterLattice::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let loss = sample_bonds(&lat, 0.05, &mut rng).unwrap();
        let errors = sample_errors(&lat, &loss, 0.05, &mut rng).unwrap();
        let text = write_trial(&lat, &loss, &errors);
        let back = read_trial(&text).unwrap();
        assert_eq!(back.size, 3);
        assert_eq!(back.loss, loss);
        assert_eq!(back.errors, errors);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_trial("bond 3\n").is_err());
        assert!(read_trial("size 2\nbond 999\n").is_err());
        assert!(read_trial("size 2\nlost sideways 1\n").is_err());
        assert!(read_trial("size 2\nz primal x\n").is_err());
        assert!(read_trial("").is_err());
    }
}
