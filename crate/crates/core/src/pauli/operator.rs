use std::fmt;
use std::str::FromStr;

use super::PauliError;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// True if the two letters anticommute.
    pub fn anticommutes(self, other: Pauli) -> bool {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        (ax & bz) ^ (az & bx)
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A short list of `(qubit, letter)` factors, used for byproduct operators and
/// observables where a dense bit-vector would be wasteful.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparsePauli(pub Vec<(usize, Pauli)>);

impl SparsePauli {
    pub fn new() -> Self {
        SparsePauli(Vec::new())
    }

    pub fn single(qubit: usize, p: Pauli) -> Self {
        SparsePauli(vec![(qubit, p)])
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&(_, p)| p == Pauli::I)
    }

    pub fn push(&mut self, qubit: usize, p: Pauli) {
        self.0.push((qubit, p));
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, Pauli)> {
        self.0.iter()
    }

    pub fn to_dense(&self, n: usize) -> Result<PauliOperator, PauliError> {
        let mut out = PauliOperator::identity(n);
        for &(q, p) in &self.0 {
            if q >= n {
                return Err(PauliError::QubitOutOfRange { qubit: q, n });
            }
            out.mul_letter(q, p);
        }
        Ok(out)
    }
}

impl FromIterator<(usize, Pauli)> for SparsePauli {
    fn from_iter<T: IntoIterator<Item = (usize, Pauli)>>(iter: T) -> Self {
        SparsePauli(iter.into_iter().collect())
    }
}

/// Pauli string on `n` qubits in binary symplectic form.
///
/// The operator is `i^phase * P_0 ⊗ ... ⊗ P_{n-1}` where each factor is read
/// from its `(x, z)` bit pair: `(1,0)=X`, `(1,1)=Y`, `(0,1)=Z`. With this
/// encoding `X·Z = -i·Y`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

#[inline]
fn words(n: usize) -> usize {
    n.div_ceil(64)
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator {
            n,
            x: vec![0; words(n)],
            z: vec![0; words(n)],
            phase: 0,
        }
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut out = Self::identity(n);
        out.set(qubit, p);
        out
    }

    /// Builds an operator from a list of factors. Repeated qubits multiply.
    pub fn from_factors(n: usize, factors: &[(usize, Pauli)]) -> Self {
        let mut out = Self::identity(n);
        for &(q, p) in factors {
            out.mul_letter(q, p);
        }
        out
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Power of `i` in front of the tensor product, in `0..4`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    /// Overwrites the letter on `q`; the phase is left alone.
    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        let (w, b) = (q / 64, 1u64 << (q % 64));
        if x {
            self.x[w] |= b;
        } else {
            self.x[w] &= !b;
        }
        if z {
            self.z[w] |= b;
        } else {
            self.z[w] &= !b;
        }
    }

    fn set_bits(&mut self, q: usize, x: bool, z: bool) {
        self.set(q, Pauli::from_bits(x, z));
    }

    /// Right-multiplies by a single-qubit letter on `q`, tracking the phase.
    pub fn mul_letter(&mut self, q: usize, p: Pauli) {
        let a = self.get(q);
        self.phase = (self.phase as i32 + letter_product_phase(a, p)).rem_euclid(4) as u8;
        let (ax, az) = a.bits();
        let (bx, bz) = p.bits();
        self.set_bits(q, ax ^ bx, az ^ bz);
    }

    /// Drops the factor on `q` (used when a qubit is measured or reset).
    pub fn clear(&mut self, q: usize) {
        self.set(q, Pauli::I);
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x_bit(q) || self.z_bit(q)).collect()
    }

    pub fn to_sparse(&self) -> SparsePauli {
        self.support().into_iter().map(|q| (q, self.get(q))).collect()
    }

    /// Hermitian operators have a real prefactor (phase 0 or 2).
    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Equality of the Pauli letters, ignoring the prefactor.
    pub fn eq_up_to_phase(&self, other: &Self) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    fn check_dims(&self, other: &Self) -> Result<(), PauliError> {
        if self.n != other.n {
            return Err(PauliError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Returns `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        let mut out = self.clone();
        out.mul_assign(other)?;
        Ok(out)
    }

    /// In-place `self ← self · other`.
    pub fn mul_assign(&mut self, other: &Self) -> Result<(), PauliError> {
        self.check_dims(other)?;
        let mut plus = 0i64;
        let mut minus = 0i64;
        for w in 0..self.x.len() {
            let (ax, az, bx, bz) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            let a_x = ax & !az;
            let a_y = ax & az;
            let a_z = !ax & az;
            let b_x = bx & !bz;
            let b_y = bx & bz;
            let b_z = !bx & bz;
            // cyclic order XY -> iZ, YZ -> iX, ZX -> iY
            plus += ((a_x & b_y) | (a_y & b_z) | (a_z & b_x)).count_ones() as i64;
            minus += ((a_x & b_z) | (a_y & b_x) | (a_z & b_y)).count_ones() as i64;
            self.x[w] = ax ^ bx;
            self.z[w] = az ^ bz;
        }
        let total = self.phase as i64 + other.phase as i64 + plus - minus;
        self.phase = total.rem_euclid(4) as u8;
        Ok(())
    }

    /// True iff the symplectic inner product vanishes.
    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check_dims(other)?;
        Ok(!self.anticommutes_unchecked(other))
    }

    pub(crate) fn anticommutes_unchecked(&self, other: &Self) -> bool {
        let mut parity = 0u32;
        for w in 0..self.x.len() {
            parity ^= ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones() & 1;
        }
        parity == 1
    }

    /// Anticommutation with a sparse operator, ignoring out-of-range qubits.
    pub fn anticommutes_sparse(&self, other: &SparsePauli) -> bool {
        let mut parity = false;
        for &(q, p) in other.iter() {
            if q < self.n {
                parity ^= self.get(q).anticommutes(p);
            }
        }
        parity
    }

    // Clifford conjugations P -> U P U†, with exact sign tracking.

    pub(crate) fn conj_h(&mut self, q: usize) {
        let (x, z) = (self.x_bit(q), self.z_bit(q));
        if x && z {
            self.negate();
        }
        self.set_bits(q, z, x);
    }

    pub(crate) fn conj_s(&mut self, q: usize) {
        let (x, z) = (self.x_bit(q), self.z_bit(q));
        if x && z {
            self.negate();
        }
        self.set_bits(q, x, z ^ x);
    }

    pub(crate) fn conj_sdg(&mut self, q: usize) {
        let (x, z) = (self.x_bit(q), self.z_bit(q));
        if x && !z {
            self.negate();
        }
        self.set_bits(q, x, z ^ x);
    }

    pub(crate) fn conj_pauli(&mut self, q: usize, p: Pauli) {
        if self.get(q).anticommutes(p) {
            self.negate();
        }
    }

    pub(crate) fn conj_cz(&mut self, a: usize, b: usize) {
        let (xa, za, xb, zb) = (self.x_bit(a), self.z_bit(a), self.x_bit(b), self.z_bit(b));
        if xa && xb && (za ^ zb) {
            self.negate();
        }
        self.set_bits(a, xa, za ^ xb);
        self.set_bits(b, xb, zb ^ xa);
    }

    pub(crate) fn conj_cx(&mut self, c: usize, t: usize) {
        let (xc, zc, xt, zt) = (self.x_bit(c), self.z_bit(c), self.x_bit(t), self.z_bit(t));
        if xc && zt && !(xt ^ zc) {
            self.negate();
        }
        self.set_bits(t, xt ^ xc, zt);
        self.set_bits(c, xc, zc ^ zt);
    }
}

/// Phase exponent `g` with `σ_a σ_b = i^g σ_{a⊕b}`.
fn letter_product_phase(a: Pauli, b: Pauli) -> i32 {
    use Pauli::*;
    match (a, b) {
        (X, Y) | (Y, Z) | (Z, X) => 1,
        (X, Z) | (Y, X) | (Z, Y) => -1,
        _ => 0,
    }
}

/// Free-function form of [`PauliOperator::multiply`].
pub fn pauli_multiply(a: &PauliOperator, b: &PauliOperator) -> Result<PauliOperator, PauliError> {
    a.multiply(b)
}

/// Free-function form of [`PauliOperator::commutes`].
pub fn commutes(a: &PauliOperator, b: &PauliOperator) -> Result<bool, PauliError> {
    a.commutes(b)
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).letter())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOperator({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = PauliError;

    /// Parses strings such as `"XIZ"`, `"-YY"` or `"+iXZ"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        let mut out = PauliOperator::identity(body.chars().count());
        for (q, c) in body.chars().enumerate() {
            let p = match c {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(PauliError::Parse(format!("unexpected character {other:?}"))),
            };
            out.set(q, p);
        }
        out.phase = phase;
        Ok(out)
    }
}
