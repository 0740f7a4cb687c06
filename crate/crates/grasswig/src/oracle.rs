//! Dense density-matrix oracle.
//!
//! Everything the phase-space engines claim is checked here by brute force:
//! `2ⁿ×2ⁿ` complex matrices, textbook gate matrices and Pauli algebra. Qubit
//! `0` is the most significant bit of a basis index, so `|q₀ q₁ …⟩` matches the
//! usual Kronecker ordering.
//!
//! The module also carries the 8×8 matrix representation of three Grassmann
//! generators, which makes the abstract algebra concrete.

use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grassmann::GrassmannElement;

/// Largest register the oracle accepts.
pub const MAX_QUBITS: usize = 10;
/// Expectations within this of ±1 count as stabilizer elements.
pub const STABILIZER_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("qubit {qubit} out of range for {qubits} qubits")]
    QubitOutOfRange { qubit: usize, qubits: usize },
    #[error("cnot control and target are both {0}")]
    SameQubits(usize),
    #[error("{0} qubits exceed the oracle limit")]
    TooManyQubits(usize),
    #[error("operator sizes differ: {0} vs {1} qubits")]
    SizeMismatch(usize, usize),
    #[error("conjugating {point} by {gate} leaves the Pauli group")]
    NotPauli { gate: String, point: String },
    #[error("state is not a pure stabilizer state: {0}")]
    NotStabilizer(String),
    #[error("unsupported generator count {0}")]
    UnsupportedGenerators(usize),
    #[error("bad Pauli string {0:?}")]
    BadPauli(String),
}

pub type Result<T> = std::result::Result<T, OracleError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Pauli {
        Self::ALL[i & 3]
    }

    /// Entries `[[a, b], [c, d]]`.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        match self {
            Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
            Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
            Pauli::Y => [[ZERO, -I], [I, ZERO]],
            Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    /// `(x, z)` bits of the symplectic label.
    pub fn xz(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_xz(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// `a·b = phase · c`.
    pub fn mul(a: Pauli, b: Pauli) -> (Complex64, Pauli) {
        match (a, b) {
            (Pauli::I, p) | (p, Pauli::I) => (ONE, p),
            (x, y) if x == y => (ONE, Pauli::I),
            (Pauli::X, Pauli::Y) => (I, Pauli::Z),
            (Pauli::Y, Pauli::X) => (-I, Pauli::Z),
            (Pauli::Y, Pauli::Z) => (I, Pauli::X),
            (Pauli::Z, Pauli::Y) => (-I, Pauli::X),
            (Pauli::Z, Pauli::X) => (I, Pauli::Y),
            _ => (-I, Pauli::Y),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// `±P₀⊗P₁⊗…`, letter `k` acting on qubit `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    pub negative: bool,
    pub letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(negative: bool, letters: Vec<Pauli>) -> Self {
        Self { negative, letters }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(false, vec![Pauli::I; n])
    }

    pub fn qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    pub fn negated(&self) -> Self {
        Self::new(!self.negative, self.letters.clone())
    }

    /// Base-4 word index, qubit 0 most significant.
    pub fn word_index(&self) -> usize {
        self.letters.iter().fold(0, |acc, p| 4 * acc + p.index())
    }

    pub fn from_word_index(n: usize, mut idx: usize, negative: bool) -> Self {
        let mut letters = vec![Pauli::I; n];
        for k in (0..n).rev() {
            letters[k] = Pauli::from_index(idx);
            idx >>= 2;
        }
        Self::new(negative, letters)
    }

    /// Product with phase: `self · other = phase · result` (result sign folded into phase).
    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        let mut phase = Complex64::new(self.sign() * other.sign(), 0.0);
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (ph, p) = Pauli::mul(a, b);
                phase *= ph;
                p
            })
            .collect();
        (phase, PauliString::new(false, letters))
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self.letters.iter().zip(&other.letters).filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b).count();
        anti % 2 == 0
    }

    pub fn matrix(&self) -> DenseOperator {
        let n = self.qubits();
        let dim = 1usize << n;
        let mut op = DenseOperator::zero(n);
        let (xmask, _) = self.xz_masks();
        for k in 0..dim {
            op.data[(k ^ xmask) * dim + k] = self.phase_on(k) * self.sign();
        }
        op
    }

    fn bit(n: usize, q: usize) -> usize {
        1 << (n - 1 - q)
    }

    fn xz_masks(&self) -> (usize, usize) {
        let n = self.qubits();
        let (mut x, mut z) = (0, 0);
        for (q, p) in self.letters.iter().enumerate() {
            let (bx, bz) = p.xz();
            if bx {
                x |= Self::bit(n, q);
            }
            if bz {
                z |= Self::bit(n, q);
            }
        }
        (x, z)
    }

    /// Unsigned `P|k⟩ = phase(k)|k ⊕ x⟩`.
    fn phase_on(&self, k: usize) -> Complex64 {
        let n = self.qubits();
        let mut ph = ONE;
        for (q, p) in self.letters.iter().enumerate() {
            let one = k & Self::bit(n, q) != 0;
            ph *= match (p, one) {
                (Pauli::Y, false) => I,
                (Pauli::Y, true) => -I,
                (Pauli::Z, true) => -ONE,
                _ => ONE,
            };
        }
        ph
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.negative { '-' } else { '+' })?;
        for p in &self.letters {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = OracleError;
    fn from_str(s: &str) -> Result<Self> {
        let (negative, body) = match s.chars().next() {
            Some('-') => (true, &s[1..]),
            Some('+') => (false, &s[1..]),
            _ => (false, s),
        };
        let letters: Option<Vec<Pauli>> = body.chars().map(Pauli::from_char).collect();
        match letters {
            Some(l) if !l.is_empty() => Ok(Self::new(negative, l)),
            _ => Err(OracleError::BadPauli(s.to_string())),
        }
    }
}

/// Row-major `2ⁿ×2ⁿ` complex matrix.
#[derive(Clone, PartialEq)]
pub struct DenseOperator {
    qubits: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseOperator({} qubits)", self.qubits)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|c| format!("{:.4}", self.get(r, c))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl DenseOperator {
    pub fn zero(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        Self { qubits, dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(qubits: usize) -> Self {
        let mut op = Self::zero(qubits);
        for k in 0..op.dim {
            op.data[k * op.dim + k] = ONE;
        }
        op
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(qubits: usize, mut f: F) -> Self {
        let mut op = Self::zero(qubits);
        for r in 0..op.dim {
            for c in 0..op.dim {
                op.data[r * op.dim + c] = f(r, c);
            }
        }
        op
    }

    /// `|ψ⟩⟨ψ|` for an (unnormalized) amplitude vector.
    pub fn from_ket(amps: &[Complex64]) -> Self {
        let qubits = amps.len().trailing_zeros() as usize;
        assert_eq!(1 << qubits, amps.len(), "ket length must be a power of two");
        Self::from_fn(qubits, |r, c| amps[r] * amps[c].conj())
    }

    /// `|k⟩⟨k|`.
    pub fn basis(qubits: usize, k: usize) -> Self {
        let mut op = Self::zero(qubits);
        op.data[k * op.dim + k] = ONE;
        op
    }

    pub fn maximally_mixed(qubits: usize) -> Self {
        Self::identity(qubits).scale(Complex64::new(1.0 / (1usize << qubits) as f64, 0.0))
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| self.get(r, c))
    }

    pub fn from_dmatrix(m: &DMatrix<Complex64>) -> Self {
        let qubits = m.nrows().trailing_zeros() as usize;
        Self::from_fn(qubits, |r, c| m[(r, c)])
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.qubits != other.qubits {
            return Err(OracleError::SizeMismatch(self.qubits, other.qubits));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        self.check(other).expect("operator sizes differ");
        let d = self.dim;
        let mut out = Self::zero(self.qubits);
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    out.data[r * d + c] += a * other.data[k * d + c];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other).expect("operator sizes differ");
        Self { qubits: self.qubits, dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { qubits: self.qubits, dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.qubits, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let q = self.qubits + other.qubits;
        Self::from_fn(q, |r, c| self.get(r / other.dim, c / other.dim) * other.get(r % other.dim, c % other.dim))
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.qubits == other.qubits && self.max_diff(other) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }

    pub fn purity(&self) -> f64 {
        self.matmul(self).trace().re
    }

    /// `Tr(P ρ)` in `O(2ⁿ)`.
    pub fn pauli_expectation(&self, p: &PauliString) -> Complex64 {
        assert_eq!(p.qubits(), self.qubits, "Pauli string size");
        let (xmask, _) = p.xz_masks();
        let d = self.dim;
        let mut s = ZERO;
        for k in 0..d {
            s += p.phase_on(k) * self.data[k * d + (k ^ xmask)];
        }
        s * p.sign()
    }

    /// `c_P = Tr(Pρ)` for every unsigned word, indexed by [`PauliString::word_index`].
    pub fn pauli_coefficients(&self) -> Vec<Complex64> {
        (0..1usize << (2 * self.qubits))
            .map(|w| self.pauli_expectation(&PauliString::from_word_index(self.qubits, w, false)))
            .collect()
    }

    /// Inverse of [`Self::pauli_coefficients`]: `(1/2ⁿ) Σ c_P P`.
    pub fn from_pauli_coefficients(qubits: usize, coeffs: &[Complex64]) -> Self {
        let mut op = Self::zero(qubits);
        let norm = 1.0 / (1usize << qubits) as f64;
        for (w, c) in coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            op = op.add(&PauliString::from_word_index(qubits, w, false).matrix().scale(c * norm));
        }
        op
    }

    /// `U ρ U†` for a `2ᵏ×2ᵏ` unitary on `targets` (first target most significant).
    pub fn conjugate_local(&self, u: &[Complex64], targets: &[usize]) -> Self {
        let left = self.apply_left(u, targets);
        left.adjoint().apply_left(u, targets).adjoint()
    }

    /// `U ρ` for a local unitary.
    pub fn apply_left(&self, u: &[Complex64], targets: &[usize]) -> Self {
        let k = targets.len();
        let sub = 1usize << k;
        assert_eq!(u.len(), sub * sub, "local unitary size");
        let n = self.qubits;
        let masks: Vec<usize> = targets.iter().map(|&t| 1usize << (n - 1 - t)).collect();
        let all: usize = masks.iter().sum();
        let d = self.dim;
        let mut out = self.clone();
        let mut idx = vec![0usize; sub];
        for base in 0..d {
            if base & all != 0 {
                continue;
            }
            for (s, slot) in idx.iter_mut().enumerate() {
                let mut r = base;
                for (j, m) in masks.iter().enumerate() {
                    if s >> (k - 1 - j) & 1 == 1 {
                        r |= m;
                    }
                }
                *slot = r;
            }
            for c in 0..d {
                for a in 0..sub {
                    let mut v = ZERO;
                    for b in 0..sub {
                        v += u[a * sub + b] * self.data[idx[b] * d + c];
                    }
                    out.data[idx[a] * d + c] = v;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    P,
    T,
    Cnot,
}

impl GateKind {
    pub fn is_clifford(self) -> bool {
        !matches!(self, GateKind::T)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    P(usize),
    T(usize),
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::P(_) => GateKind::P,
            Gate::T(_) => GateKind::T,
            Gate::Cnot { .. } => GateKind::Cnot,
        }
    }

    pub fn is_clifford(&self) -> bool {
        self.kind().is_clifford()
    }

    /// Qubits in the order the local matrix uses.
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::P(q) | Gate::T(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    pub fn local_matrix(&self) -> Vec<Complex64> {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            Gate::H(_) => vec![h, h, h, -h],
            Gate::P(_) => vec![ONE, ZERO, ZERO, I],
            Gate::T(_) => vec![ONE, ZERO, ZERO, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
            Gate::Cnot { .. } => {
                let mut m = vec![ZERO; 16];
                m[0] = ONE;
                m[5] = ONE;
                m[11] = ONE;
                m[14] = ONE;
                m
            }
        }
    }

    /// Full `2ⁿ×2ⁿ` unitary.
    pub fn unitary(&self, qubits: usize) -> Result<DenseOperator> {
        self.validate(qubits)?;
        Ok(DenseOperator::identity(qubits).apply_left(&self.local_matrix(), &self.targets()))
    }

    pub fn validate(&self, qubits: usize) -> Result<()> {
        for &q in &self.targets() {
            if q >= qubits {
                return Err(OracleError::QubitOutOfRange { qubit: q, qubits });
            }
        }
        if let Gate::Cnot { control, target } = *self {
            if control == target {
                return Err(OracleError::SameQubits(control));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "h {q}"),
            Gate::P(q) => write!(f, "p {q}"),
            Gate::T(q) => write!(f, "t {q}"),
            Gate::Cnot { control, target } => write!(f, "cnot {control} {target}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if qubits > MAX_QUBITS {
            return Err(OracleError::TooManyQubits(qubits));
        }
        for g in &gates {
            g.validate(qubits)?;
        }
        Ok(Self { qubits, gates })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn is_clifford(&self) -> bool {
        self.gates.iter().all(Gate::is_clifford)
    }

    /// Uniformly random Clifford word over `{H, P, CNOT}` (CNOT only when `n ≥ 2`).
    pub fn random_clifford(qubits: usize, len: usize, rng: &mut impl Rng) -> Self {
        let gates = (0..len)
            .map(|_| {
                let pick = rng.gen_range(0..if qubits >= 2 { 3 } else { 2 });
                let q = rng.gen_range(0..qubits);
                match pick {
                    0 => Gate::H(q),
                    1 => Gate::P(q),
                    _ => {
                        let mut t = rng.gen_range(0..qubits - 1);
                        if t >= q {
                            t += 1;
                        }
                        Gate::Cnot { control: q, target: t }
                    }
                }
            })
            .collect();
        Self { qubits, gates }
    }
}

/// `U ρ U†` for one gate.
pub fn dense_apply(rho: &DenseOperator, gate: &Gate) -> Result<DenseOperator> {
    gate.validate(rho.qubits())?;
    Ok(rho.conjugate_local(&gate.local_matrix(), &gate.targets()))
}

/// Runs a circuit from `|0…0⟩⟨0…0|`.
pub fn run_circuit(circuit: &Circuit) -> DenseOperator {
    let mut rho = DenseOperator::basis(circuit.qubits(), 0);
    for g in circuit.gates() {
        rho = dense_apply(&rho, g).expect("circuit validated at construction");
    }
    rho
}

/// Decompose a small operator in the Pauli basis: `c_W = Tr(W M)/2ᵏ`.
fn pauli_decompose(m: &DenseOperator) -> Vec<Complex64> {
    let norm = 1.0 / m.dim() as f64;
    m.pauli_coefficients().into_iter().map(|c| c * norm).collect()
}

/// `U P U†` as a signed Pauli string, or failure if it leaves the Pauli group.
pub fn conjugate_pauli(gate: &Gate, point: &PauliString) -> Result<PauliString> {
    gate.validate(point.qubits())?;
    let targets = gate.targets();
    let local = PauliString::new(false, targets.iter().map(|&t| point.letters[t]).collect());
    let k = targets.len();
    let conj = local.matrix().conjugate_local(&gate.local_matrix(), &(0..k).collect::<Vec<_>>());
    let coeffs = pauli_decompose(&conj);
    let hits: Vec<(usize, Complex64)> =
        coeffs.iter().enumerate().filter(|(_, c)| c.norm() > 1e-9).map(|(w, c)| (w, *c)).collect();
    let fail = || OracleError::NotPauli { gate: gate.to_string(), point: point.to_string() };
    if hits.len() != 1 || (hits[0].1.norm() - 1.0).abs() > 1e-9 || hits[0].1.im.abs() > 1e-9 {
        return Err(fail());
    }
    let image = PauliString::from_word_index(k, hits[0].0, false);
    let mut letters = point.letters.clone();
    for (j, &t) in targets.iter().enumerate() {
        letters[t] = image.letters[j];
    }
    Ok(PauliString::new(point.negative ^ (hits[0].1.re < 0.0), letters))
}

/// Non-identity signed Pauli strings with `Tr(Pρ) = +1`.
pub fn stabilizer_group(rho: &DenseOperator) -> Result<Vec<PauliString>> {
    let n = rho.qubits();
    if (rho.purity() - 1.0).abs() > STABILIZER_TOL {
        return Err(OracleError::NotStabilizer(format!("purity {:.6}", rho.purity())));
    }
    let mut group = Vec::new();
    for w in 1..1usize << (2 * n) {
        let p = PauliString::from_word_index(n, w, false);
        let e = rho.pauli_expectation(&p);
        if (e.re - 1.0).abs() < STABILIZER_TOL {
            group.push(p);
        } else if (e.re + 1.0).abs() < STABILIZER_TOL {
            group.push(p.negated());
        } else if e.norm() > STABILIZER_TOL {
            return Err(OracleError::NotStabilizer(format!("⟨{p}⟩ = {e:.6}")));
        }
    }
    if group.len() + 1 != 1 << n {
        return Err(OracleError::NotStabilizer(format!("{} group elements", group.len() + 1)));
    }
    Ok(group)
}

/// Every distinct stabilizer state reachable from `|0…0⟩` by `{H, P, CNOT}`.
pub fn stabilizer_census(qubits: usize) -> Vec<DenseOperator> {
    let mut gates = Vec::new();
    for q in 0..qubits {
        gates.push(Gate::H(q));
        gates.push(Gate::P(q));
        for t in 0..qubits {
            if t != q {
                gates.push(Gate::Cnot { control: q, target: t });
            }
        }
    }
    let key = |rho: &DenseOperator| -> Vec<(i64, i64)> {
        rho.data.iter().map(|c| ((c.re * 1e8).round() as i64, (c.im * 1e8).round() as i64)).collect()
    };
    let start = DenseOperator::basis(qubits, 0);
    let mut seen = HashSet::from([key(&start)]);
    let mut states = vec![start];
    let mut frontier = 0;
    while frontier < states.len() {
        let rho = states[frontier].clone();
        frontier += 1;
        for g in &gates {
            let next = dense_apply(&rho, g).expect("valid gate");
            if seen.insert(key(&next)) {
                states.push(next);
            }
        }
    }
    states
}

/// Haar-ish random pure state from Gaussian amplitudes.
pub fn random_pure_state(qubits: usize, rng: &mut impl Rng) -> DenseOperator {
    let amps: Vec<Complex64> = (0..1usize << qubits).map(|_| Complex64::new(gauss(rng), gauss(rng))).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    DenseOperator::from_ket(&amps.iter().map(|a| a / norm).collect::<Vec<_>>())
}

/// Random full-rank density operator `A A† / Tr`.
pub fn random_density(qubits: usize, rng: &mut impl Rng) -> DenseOperator {
    let a = random_operator(qubits, rng);
    let m = a.matmul(&a.adjoint());
    let t = m.trace();
    m.scale(t.inv())
}

/// Random operator with Gaussian entries.
pub fn random_operator(qubits: usize, rng: &mut impl Rng) -> DenseOperator {
    DenseOperator::from_fn(qubits, |_, _| Complex64::new(gauss(rng), gauss(rng)))
}

pub fn random_hermitian(qubits: usize, rng: &mut impl Rng) -> DenseOperator {
    let a = random_operator(qubits, rng);
    a.add(&a.adjoint()).scale(Complex64::new(0.5, 0.0))
}

fn gauss(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Matrices for `m ≤ 3` Grassmann generators built from Clifford operators
/// `½(q_k + i p_k)`: raising operators with Jordan–Wigner strings.
#[derive(Debug, Clone)]
pub struct CliffordRep {
    m: usize,
    generators: Vec<DMatrix<Complex64>>,
}

/// Tensor slot of each generator: for three generators `p` sits first, then
/// `r`, then `q`.
fn rep_slot(m: usize, k: usize) -> usize {
    if m == 3 {
        [0, 2, 1][k]
    } else {
        k
    }
}

pub fn clifford_rep(m: usize) -> Result<CliffordRep> {
    if m == 0 || m > 3 {
        return Err(OracleError::UnsupportedGenerators(m));
    }
    let sx = DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let sy = DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]);
    let sz = DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    let id = DMatrix::<Complex64>::identity(2, 2);
    let generators = (0..m)
        .map(|k| {
            let slot = rep_slot(m, k);
            let raise = &sx + &sy * I;
            let mut acc = DMatrix::<Complex64>::identity(1, 1);
            for s in 0..m {
                let f = match s.cmp(&slot) {
                    std::cmp::Ordering::Less => &sz,
                    std::cmp::Ordering::Equal => &raise,
                    std::cmp::Ordering::Greater => &id,
                };
                acc = acc.kronecker(f);
            }
            acc
        })
        .collect();
    Ok(CliffordRep { m, generators })
}

impl CliffordRep {
    pub fn generators(&self) -> usize {
        self.m
    }

    pub fn generator(&self, k: usize) -> &DMatrix<Complex64> {
        &self.generators[k]
    }

    pub fn monomial(&self, mask: u128) -> DMatrix<Complex64> {
        let d = 1usize << self.m;
        let mut acc = DMatrix::<Complex64>::identity(d, d);
        for k in 0..self.m {
            if mask >> k & 1 == 1 {
                acc = &acc * &self.generators[k];
            }
        }
        acc
    }

    /// Linear extension of the generator matrices to a whole element.
    pub fn represent(&self, g: &GrassmannElement) -> DMatrix<Complex64> {
        assert_eq!(g.num_generators(), self.m, "element generator count");
        let d = 1usize << self.m;
        let mut acc = DMatrix::<Complex64>::zeros(d, d);
        for (mask, c) in g.terms() {
            acc += self.monomial(mask) * c;
        }
        acc
    }
}
