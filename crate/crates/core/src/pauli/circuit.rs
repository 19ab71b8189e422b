use rand::Rng;

use super::operator::{Pauli, PauliOperator, SparsePauli};
use super::tableau::{Gate, StabilizerTableau};
use super::PauliError;

/// Single-qubit measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub fn pauli(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Y => Pauli::Y,
            Basis::Z => Pauli::Z,
        }
    }
}

/// Which noise rate drives an error channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseSource {
    /// Active operation: preparation, rotation, measurement or EO.
    Gate,
    /// Idle qubit for one time step.
    Memory,
}

/// Qubits hit by a depolarizing channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Support {
    One(usize),
    Two(usize, usize),
}

impl Support {
    pub fn qubits(&self) -> ([usize; 2], usize) {
        match *self {
            Support::One(q) => ([q, q], 1),
            Support::Two(a, b) => ([a, b], 2),
        }
    }

    /// Number of non-identity Paulis the depolarizing channel draws from.
    pub fn num_paulis(&self) -> usize {
        match self {
            Support::One(_) => 3,
            Support::Two(..) => 15,
        }
    }

    /// The `k`-th non-identity Pauli (in `0..num_paulis()`), as letters on
    /// the support qubits.
    pub fn pauli(&self, k: usize) -> [Pauli; 2] {
        const L: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        match self {
            Support::One(_) => [L[k + 1], Pauli::I],
            Support::Two(..) => [L[(k + 1) / 4], L[(k + 1) % 4]],
        }
    }
}

/// One step of a stabilizer circuit.
///
/// Outcome-dependent corrections are attached to the measuring operation:
/// when the outcome is `-1` (odd parity for a projection), `byproduct` is
/// applied. Error channels are inert during noiseless simulation and mark
/// the places where faults may be injected.
#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    PreparePlus(usize),
    Cz(usize, usize),
    ParityProjection {
        a: usize,
        b: usize,
        byproduct: SparsePauli,
    },
    LocalClifford {
        qubit: usize,
        gate: Gate,
    },
    Measure {
        qubit: usize,
        basis: Basis,
        byproduct: SparsePauli,
    },
    ErrorChannel {
        support: Support,
        source: NoiseSource,
    },
}

impl Op {
    fn qubits(&self) -> Vec<usize> {
        match self {
            Op::PreparePlus(q) => vec![*q],
            Op::Cz(a, b) => vec![*a, *b],
            Op::ParityProjection { a, b, byproduct } => {
                let mut v = vec![*a, *b];
                v.extend(byproduct.iter().map(|&(q, _)| q));
                v
            }
            Op::LocalClifford { qubit, .. } => vec![*qubit],
            Op::Measure {
                qubit, byproduct, ..
            } => {
                let mut v = vec![*qubit];
                v.extend(byproduct.iter().map(|&(q, _)| q));
                v
            }
            Op::ErrorChannel { support, .. } => {
                let (qs, k) = support.qubits();
                qs[..k].to_vec()
            }
        }
    }

    pub fn is_error_channel(&self) -> bool {
        matches!(self, Op::ErrorChannel { .. })
    }
}

/// Ordered list of operations on `n` qubits, starting from `|0...0⟩`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    n: usize,
    ops: Vec<Op>,
}

/// Result of pushing a fault through the remainder of a circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagation {
    /// Residual Pauli on all qubits; measured and reset qubits are cleared.
    pub residual: PauliOperator,
    /// Indices of measuring operations whose outcome the fault flipped.
    pub flipped: Vec<usize>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit { n, ops: Vec::new() }
    }

    pub fn from_ops(n: usize, ops: Vec<Op>) -> Result<Self, PauliError> {
        let c = Circuit { n, ops };
        c.validate()?;
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, op: Op) {
        self.ops.push(op);
    }

    pub fn validate(&self) -> Result<(), PauliError> {
        for op in &self.ops {
            for q in op.qubits() {
                if q >= self.n {
                    return Err(PauliError::QubitOutOfRange { qubit: q, n: self.n });
                }
            }
            match op {
                Op::Cz(a, b) | Op::ParityProjection { a, b, .. } if a == b => {
                    return Err(PauliError::RepeatedQubit(*a))
                }
                Op::ErrorChannel {
                    support: Support::Two(a, b),
                    ..
                } if a == b => return Err(PauliError::RepeatedQubit(*a)),
                Op::LocalClifford { gate, .. } if gate.arity() != 1 => {
                    return Err(PauliError::Arity {
                        gate: gate.to_string(),
                        expected: 1,
                        got: gate.arity(),
                    })
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Runs the circuit noiselessly on a tableau starting from `|0...0⟩`,
    /// applying byproducts on `-1` outcomes. Returns the outcome record in
    /// program order (one entry per measuring operation).
    pub fn simulate<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<(StabilizerTableau, Vec<i8>), PauliError> {
        let n = self.n;
        let mut t = StabilizerTableau::new_zero(n);
        let mut record = Vec::new();
        for op in &self.ops {
            match op {
                Op::PreparePlus(q) => {
                    // reset by measuring Z and flipping, then rotate
                    let z = PauliOperator::single(n, *q, Pauli::Z);
                    let r = t.measure_pauli(&z, rng)?;
                    if r.outcome < 0 {
                        t.apply_gate(Gate::X, &[*q])?;
                    }
                    t.apply_gate(Gate::H, &[*q])?;
                }
                Op::Cz(a, b) => t.apply_gate(Gate::Cz, &[*a, *b])?,
                Op::ParityProjection { a, b, byproduct } => {
                    let zz = PauliOperator::from_factors(n, &[(*a, Pauli::Z), (*b, Pauli::Z)]);
                    let r = t.measure_pauli(&zz, rng)?;
                    if r.outcome < 0 {
                        t.apply_pauli(&byproduct.to_dense(n)?)?;
                    }
                    record.push(r.outcome);
                }
                Op::LocalClifford { qubit, gate } => t.apply_gate(*gate, &[*qubit])?,
                Op::Measure {
                    qubit,
                    basis,
                    byproduct,
                } => {
                    let m = PauliOperator::single(n, *qubit, basis.pauli());
                    let r = t.measure_pauli(&m, rng)?;
                    if r.outcome < 0 {
                        t.apply_pauli(&byproduct.to_dense(n)?)?;
                    }
                    record.push(r.outcome);
                }
                Op::ErrorChannel { .. } => {}
            }
        }
        Ok((t, record))
    }

    /// Pushes `fault`, inserted immediately after operation `location`,
    /// through every later operation.
    pub fn propagate_error(
        &self,
        location: usize,
        fault: &PauliOperator,
    ) -> Result<Propagation, PauliError> {
        if location >= self.ops.len() {
            return Err(PauliError::InvalidLocation {
                location,
                len: self.ops.len(),
            });
        }
        if fault.num_qubits() != self.n {
            return Err(PauliError::DimensionMismatch {
                left: self.n,
                right: fault.num_qubits(),
            });
        }
        let mut frame = fault.clone();
        let mut flipped = Vec::new();
        for (i, op) in self.ops.iter().enumerate().skip(location + 1) {
            if push_frame(op, &mut frame, self.n) {
                flipped.push(i);
            }
        }
        frame.set_phase(0);
        Ok(Propagation {
            residual: frame,
            flipped,
        })
    }

    /// For every error channel, the anticommutation pattern of each
    /// single-qubit Pauli on its support with the given end-of-circuit
    /// observables (at most 32), found by one backward Heisenberg pass.
    ///
    /// Bit `k` of a mask is set iff the fault flips observable `k`.
    pub fn channel_effects(&self, observables: &[SparsePauli]) -> Vec<ChannelEffect> {
        assert!(observables.len() <= 32, "at most 32 observables");
        let mut ox = vec![0u32; self.n];
        let mut oz = vec![0u32; self.n];
        for (k, obs) in observables.iter().enumerate() {
            for &(q, p) in obs.iter() {
                let (x, z) = p.bits();
                if x {
                    ox[q] ^= 1 << k;
                }
                if z {
                    oz[q] ^= 1 << k;
                }
            }
        }
        let anti = |ox: &[u32], oz: &[u32], p: &SparsePauli| -> u32 {
            let mut m = 0;
            for &(q, l) in p.iter() {
                let (x, z) = l.bits();
                if x {
                    m ^= oz[q];
                }
                if z {
                    m ^= ox[q];
                }
            }
            m
        };
        let mut out = Vec::new();
        for (i, op) in self.ops.iter().enumerate().rev() {
            match op {
                Op::PreparePlus(q) => {
                    ox[*q] = 0;
                    oz[*q] = 0;
                }
                Op::Cz(a, b) => {
                    let (xa, xb) = (ox[*a], ox[*b]);
                    oz[*a] ^= xb;
                    oz[*b] ^= xa;
                }
                Op::LocalClifford { qubit, gate } => match gate {
                    Gate::H => std::mem::swap(&mut ox[*qubit], &mut oz[*qubit]),
                    Gate::S | Gate::Sdg => oz[*qubit] ^= ox[*qubit],
                    Gate::X | Gate::Y | Gate::Z => {}
                    Gate::Cz | Gate::Cx => unreachable!("validated arity"),
                },
                Op::ParityProjection { a, b, byproduct } => {
                    let m = anti(&ox, &oz, byproduct);
                    oz[*a] ^= m;
                    oz[*b] ^= m;
                }
                Op::Measure {
                    qubit,
                    basis,
                    byproduct,
                } => {
                    ox[*qubit] = 0;
                    oz[*qubit] = 0;
                    let m = anti(&ox, &oz, byproduct);
                    let (x, z) = basis.pauli().bits();
                    if x {
                        ox[*qubit] = m;
                    }
                    if z {
                        oz[*qubit] = m;
                    }
                }
                Op::ErrorChannel { support, source } => {
                    let (qs, k) = support.qubits();
                    let mut masks = [[0u32; 2]; 2];
                    for (slot, &q) in qs[..k].iter().enumerate() {
                        // X flips observables with a Z part and vice versa
                        masks[slot] = [oz[q], ox[q]];
                    }
                    out.push(ChannelEffect {
                        location: i,
                        support: *support,
                        source: *source,
                        masks,
                    });
                }
            }
        }
        out.reverse();
        out
    }
}

/// Anticommutation masks for one error channel, see
/// [`Circuit::channel_effects`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelEffect {
    pub location: usize,
    pub support: Support,
    pub source: NoiseSource,
    /// `masks[slot] = [mask of X on that qubit, mask of Z on that qubit]`.
    pub masks: [[u32; 2]; 2],
}

impl ChannelEffect {
    /// Observable flips caused by the `k`-th Pauli of the channel.
    pub fn flip_mask(&self, k: usize) -> u32 {
        let letters = self.support.pauli(k);
        let (_, arity) = self.support.qubits();
        let mut m = 0;
        for (slot, l) in letters.iter().take(arity).enumerate() {
            let (x, z) = l.bits();
            if x {
                m ^= self.masks[slot][0];
            }
            if z {
                m ^= self.masks[slot][1];
            }
        }
        m
    }

    pub fn is_silent(&self) -> bool {
        self.masks.iter().all(|m| m[0] == 0 && m[1] == 0)
    }
}

/// Forward rule for one operation. Returns whether a recorded outcome flips.
fn push_frame(op: &Op, frame: &mut PauliOperator, n: usize) -> bool {
    match op {
        Op::PreparePlus(q) => {
            frame.clear(*q);
            false
        }
        Op::Cz(a, b) => {
            frame.conj_cz(*a, *b);
            false
        }
        Op::LocalClifford { qubit, gate } => {
            gate.conjugate(frame, &[*qubit]);
            false
        }
        Op::ParityProjection { a, b, byproduct } => {
            let zz = SparsePauli(vec![(*a, Pauli::Z), (*b, Pauli::Z)]);
            let flip = frame.anticommutes_sparse(&zz);
            if flip {
                for &(q, p) in byproduct.iter() {
                    if q < n {
                        frame.mul_letter(q, p);
                    }
                }
            }
            flip
        }
        Op::Measure {
            qubit,
            basis,
            byproduct,
        } => {
            let flip = frame.get(*qubit).anticommutes(basis.pauli());
            if flip {
                for &(q, p) in byproduct.iter() {
                    frame.mul_letter(q, p);
                }
            }
            frame.clear(*qubit);
            flip
        }
        Op::ErrorChannel { .. } => false,
    }
}

/// Free-function form of [`Circuit::propagate_error`].
pub fn propagate_error(
    c: &Circuit,
    location: usize,
    fault: &PauliOperator,
) -> Result<Propagation, PauliError> {
    c.propagate_error(location, fault)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    fn two_qubit_cz() -> Circuit {
        Circuit::from_ops(
            2,
            vec![
                Op::PreparePlus(0),
                Op::PreparePlus(1),
                Op::ErrorChannel {
                    support: Support::One(0),
                    source: NoiseSource::Gate,
                },
                Op::Cz(0, 1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn z_fault_commutes_through_cz() {
        let c = two_qubit_cz();
        let out = c.propagate_error(2, &p("ZI")).unwrap();
        assert_eq!(out.residual, p("ZI"));
        assert!(out.flipped.is_empty());
    }

    #[test]
    fn x_fault_spreads_through_cz() {
        let c = two_qubit_cz();
        let out = c.propagate_error(2, &p("XI")).unwrap();
        assert!(out.residual.eq_up_to_phase(&p("XZ")));
    }

    #[test]
    fn invalid_location() {
        let c = two_qubit_cz();
        assert!(matches!(
            c.propagate_error(4, &p("XI")),
            Err(PauliError::InvalidLocation { .. })
        ));
    }

    #[test]
    fn measurement_flip_applies_byproduct() {
        let c = Circuit::from_ops(
            3,
            vec![
                Op::PreparePlus(0),
                Op::PreparePlus(1),
                Op::PreparePlus(2),
                Op::Cz(0, 1),
                Op::Cz(1, 2),
                Op::Measure {
                    qubit: 1,
                    basis: Basis::Z,
                    byproduct: SparsePauli(vec![(0, Pauli::Z), (2, Pauli::Z)]),
                },
            ],
        )
        .unwrap();
        // X on the measured qubit flips the Z outcome and the byproduct
        // lands on both neighbours
        let out = c.propagate_error(4, &p("IXI")).unwrap();
        assert_eq!(out.flipped, vec![5]);
        assert!(out.residual.eq_up_to_phase(&p("ZIZ")));
    }

    #[test]
    fn support_enumerates_all_paulis() {
        let two = Support::Two(0, 1);
        let mut seen = std::collections::HashSet::new();
        for k in 0..two.num_paulis() {
            let l = two.pauli(k);
            assert_ne!(l, [Pauli::I, Pauli::I]);
            seen.insert(l);
        }
        assert_eq!(seen.len(), 15);
        let one = Support::One(3);
        let letters: Vec<_> = (0..3).map(|k| one.pauli(k)[0]).collect();
        assert_eq!(letters, vec![Pauli::X, Pauli::Y, Pauli::Z]);
    }
}
