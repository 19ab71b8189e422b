use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::operator::{Pauli, PauliOperator};
use super::PauliError;

/// Clifford gates understood by the tableau and the frame propagators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    Cz,
    Cx,
}

impl Gate {
    pub fn arity(self) -> usize {
        match self {
            Gate::Cz | Gate::Cx => 2,
            _ => 1,
        }
    }

    pub fn inverse(self) -> Gate {
        match self {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            g => g,
        }
    }

    /// Conjugates `p` in place: `p ← U p U†`.
    pub fn conjugate(self, p: &mut PauliOperator, qubits: &[usize]) {
        match self {
            Gate::H => p.conj_h(qubits[0]),
            Gate::S => p.conj_s(qubits[0]),
            Gate::Sdg => p.conj_sdg(qubits[0]),
            Gate::X => p.conj_pauli(qubits[0], Pauli::X),
            Gate::Y => p.conj_pauli(qubits[0], Pauli::Y),
            Gate::Z => p.conj_pauli(qubits[0], Pauli::Z),
            Gate::Cz => p.conj_cz(qubits[0], qubits[1]),
            Gate::Cx => p.conj_cx(qubits[0], qubits[1]),
        }
    }
}

impl FromStr for Gate {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "h" => Gate::H,
            "s" => Gate::S,
            "sdg" | "sdag" => Gate::Sdg,
            "x" => Gate::X,
            "y" => Gate::Y,
            "z" => Gate::Z,
            "cz" => Gate::Cz,
            "cx" | "cnot" => Gate::Cx,
            _ => return Err(PauliError::UnsupportedGate(s.to_string())),
        })
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Gate::H => "h",
            Gate::S => "s",
            Gate::Sdg => "sdg",
            Gate::X => "x",
            Gate::Y => "y",
            Gate::Z => "z",
            Gate::Cz => "cz",
            Gate::Cx => "cx",
        };
        f.write_str(name)
    }
}

/// Outcome of a Pauli measurement on the tableau.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasurementResult {
    /// `+1` or `-1`.
    pub outcome: i8,
    /// Whether the outcome was fixed by the state.
    pub deterministic: bool,
}

/// Stabilizer state on `n` qubits with destabilizer rows.
///
/// Rows `0..n` are destabilizers and rows `n..2n` the stabilizer generators,
/// so that destabilizer `i` anticommutes with generator `i` only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    rows: Vec<PauliOperator>,
}

impl StabilizerTableau {
    /// `|0...0⟩`
    pub fn new_zero(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        rows.extend((0..n).map(|q| PauliOperator::single(n, q, Pauli::X)));
        rows.extend((0..n).map(|q| PauliOperator::single(n, q, Pauli::Z)));
        StabilizerTableau { n, rows }
    }

    /// `|+...+⟩`
    pub fn new_plus(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        rows.extend((0..n).map(|q| PauliOperator::single(n, q, Pauli::Z)));
        rows.extend((0..n).map(|q| PauliOperator::single(n, q, Pauli::X)));
        StabilizerTableau { n, rows }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.rows[self.n..]
    }

    pub fn destabilizers(&self) -> &[PauliOperator] {
        &self.rows[..self.n]
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<(), PauliError> {
        for &q in qubits {
            if q >= self.n {
                return Err(PauliError::QubitOutOfRange { qubit: q, n: self.n });
            }
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(PauliError::RepeatedQubit(qubits[0]));
        }
        Ok(())
    }

    /// Conjugates every row by `gate` acting on `qubits`.
    pub fn apply_gate(&mut self, gate: Gate, qubits: &[usize]) -> Result<(), PauliError> {
        if qubits.len() != gate.arity() {
            return Err(PauliError::Arity {
                gate: gate.to_string(),
                expected: gate.arity(),
                got: qubits.len(),
            });
        }
        self.check_qubits(qubits)?;
        for row in &mut self.rows {
            gate.conjugate(row, qubits);
        }
        Ok(())
    }

    /// Applies a gate given by name; non-Clifford names are rejected.
    pub fn apply_named(&mut self, name: &str, qubits: &[usize]) -> Result<(), PauliError> {
        let gate: Gate = name.parse()?;
        self.apply_gate(gate, qubits)
    }

    /// Applies a Pauli operator as a gate (sign flips only).
    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<(), PauliError> {
        if p.num_qubits() != self.n {
            return Err(PauliError::DimensionMismatch {
                left: self.n,
                right: p.num_qubits(),
            });
        }
        for row in &mut self.rows {
            if row.anticommutes_unchecked(p) {
                row.negate();
            }
        }
        Ok(())
    }

    /// Projective measurement of the Hermitian Pauli `p`.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        p: &PauliOperator,
        rng: &mut R,
    ) -> Result<MeasurementResult, PauliError> {
        if p.num_qubits() != self.n {
            return Err(PauliError::DimensionMismatch {
                left: self.n,
                right: p.num_qubits(),
            });
        }
        if !p.is_hermitian() {
            return Err(PauliError::NotHermitian);
        }
        let n = self.n;
        let pivot = (n..2 * n).find(|&k| self.rows[k].anticommutes_unchecked(p));
        match pivot {
            Some(k) => {
                let pivot_row = self.rows[k].clone();
                for i in 0..2 * n {
                    if i != k && i != k - n && self.rows[i].anticommutes_unchecked(p) {
                        self.rows[i].mul_assign(&pivot_row)?;
                    }
                }
                self.rows[k - n] = pivot_row;
                let outcome: i8 = if rng.gen::<bool>() { 1 } else { -1 };
                let mut row = p.clone();
                if outcome < 0 {
                    row.negate();
                }
                self.rows[k] = row;
                Ok(MeasurementResult {
                    outcome,
                    deterministic: false,
                })
            }
            None => {
                let mut acc = PauliOperator::identity(n);
                for i in 0..n {
                    if self.rows[i].anticommutes_unchecked(p) {
                        acc.mul_assign(&self.rows[n + i])?;
                    }
                }
                debug_assert!(acc.eq_up_to_phase(p));
                let outcome = if acc.phase() == p.phase() { 1 } else { -1 };
                Ok(MeasurementResult {
                    outcome,
                    deterministic: true,
                })
            }
        }
    }

    /// Expectation-free membership test: `Some(±1)` if `±p` is in the
    /// stabilizer group, `None` otherwise. Does not modify the state.
    pub fn stabilizer_sign(&self, p: &PauliOperator) -> Option<i8> {
        if p.num_qubits() != self.n || !p.is_hermitian() {
            return None;
        }
        let n = self.n;
        if (n..2 * n).any(|k| self.rows[k].anticommutes_unchecked(p)) {
            return None;
        }
        let mut acc = PauliOperator::identity(n);
        for i in 0..n {
            if self.rows[i].anticommutes_unchecked(p) {
                acc.mul_assign(&self.rows[n + i]).ok()?;
            }
        }
        if !acc.eq_up_to_phase(p) {
            return None;
        }
        Some(if acc.phase() == p.phase() { 1 } else { -1 })
    }

    /// Checks the tableau invariants: Hermitian commuting generators and the
    /// canonical symplectic pairing with the destabilizers (which implies
    /// that the generators are independent).
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.n;
        for k in n..2 * n {
            if !self.rows[k].is_hermitian() {
                return Err(format!("generator {} is not Hermitian", k - n));
            }
        }
        for i in 0..2 * n {
            for j in (i + 1)..2 * n {
                let anti = self.rows[i].anticommutes_unchecked(&self.rows[j]);
                let expected = j == i + n;
                if anti != expected {
                    return Err(format!(
                        "rows {i} and {j}: anticommute={anti}, expected {expected}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Rank of the generators over GF(2) in symplectic form.
    pub fn generator_rank(&self) -> usize {
        let n = self.n;
        let mut rows: Vec<Vec<bool>> = self.rows[n..]
            .iter()
            .map(|g| {
                (0..n)
                    .map(|q| g.x_bit(q))
                    .chain((0..n).map(|q| g.z_bit(q)))
                    .collect()
            })
            .collect();
        let mut rank = 0;
        for col in 0..2 * n {
            if let Some(p) = (rank..rows.len()).find(|&r| rows[r][col]) {
                rows.swap(rank, p);
                for r in 0..rows.len() {
                    if r != rank && rows[r][col] {
                        let pivot = rows[rank].clone();
                        for (a, b) in rows[r].iter_mut().zip(pivot) {
                            *a ^= b;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }
}

/// Free-function form of [`StabilizerTableau::apply_gate`].
pub fn apply_gate(
    t: &mut StabilizerTableau,
    gate: Gate,
    qubits: &[usize],
) -> Result<(), PauliError> {
    t.apply_gate(gate, qubits)
}

/// Free-function form of [`StabilizerTableau::measure_pauli`].
pub fn measure_pauli<R: Rng + ?Sized>(
    t: &mut StabilizerTableau,
    p: &PauliOperator,
    rng: &mut R,
) -> Result<MeasurementResult, PauliError> {
    t.measure_pauli(p, rng)
}
