//! Two-generator picture for qubits.
//!
//! The discrete Wigner function lives on a `2ⁿ × 2ⁿ` grid of
//! `(x_p, x_q)` points. For qubits its reflection operators do not map
//! stabilizer states to stabilizer states, and Clifford gates only act as
//! affine maps `W(x) ↦ W(Mx + r)` when the translation `r` is chosen per state.
//! The stabilizer tableau is the bookkeeping version of the same rules.
//!
//! Sign convention: the translation phase is `i^{−λ_p·λ_q}`, so `T̂(1,1) = Ŷ`
//! and `R̂(x) = ½[Î + (−1)^{x_q}Ẑ + (−1)^{x_p}X̂ + (−1)^{x_p+x_q}Ŷ]` per qubit.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grassmann::{GrassmannElement, Kind};
use crate::oracle::{dense_apply, DenseOperator, Gate, GateKind, Pauli, PauliString};

const WIGNER_TOL: f64 = 1e-12;
/// Largest register the tableau supports (bit-packed rows).
pub const MAX_TABLEAU_QUBITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwoGenError {
    #[error("expected {expected} bits, got {got}")]
    Length { expected: usize, got: usize },
    #[error("{0} is not a Clifford gate")]
    NonClifford(String),
    #[error("gate {gate} does not fit {qubits} qubits")]
    BadGate { gate: String, qubits: usize },
    #[error("state is not a product of single-qubit stabilizer states")]
    NotStabilizerProduct,
    #[error("{gate} on classes {control}{target} leaves the non-negative grids")]
    NoPointMap { gate: String, control: StateClass, target: StateClass },
    #[error("not one of the six stabilizer supports")]
    UnknownSupport,
    #[error("invalid ensemble weights: {0}")]
    Weights(String),
    #[error("register of {0} qubits outside 1..={MAX_TABLEAU_QUBITS}")]
    QubitCount(usize),
}

pub type Result<T> = std::result::Result<T, TwoGenError>;

fn check_bits(bits: &[u8], n: usize) -> Result<()> {
    if bits.len() != n {
        return Err(TwoGenError::Length { expected: n, got: bits.len() });
    }
    Ok(())
}

fn single(letter: Pauli) -> DenseOperator {
    PauliString::new(false, vec![letter]).matrix()
}

fn letter_for(lp: u8, lq: u8) -> Pauli {
    match (lp & 1, lq & 1) {
        (0, 0) => Pauli::I,
        (1, 0) => Pauli::Z,
        (0, 1) => Pauli::X,
        _ => Pauli::Y,
    }
}

/// `ω^{−λ_p·λ_q} Ẑ^{λ_p} X̂^{λ_q}` with `ω = i`, qubit 0 leftmost.
pub fn translation2(lambda_p: &[u8], lambda_q: &[u8]) -> Result<DenseOperator> {
    check_bits(lambda_q, lambda_p.len())?;
    let i = Complex64::i();
    let mut op = DenseOperator::identity(0);
    for (&lp, &lq) in lambda_p.iter().zip(lambda_q) {
        let z = if lp & 1 == 1 { single(Pauli::Z) } else { DenseOperator::identity(1) };
        let x = if lq & 1 == 1 { single(Pauli::X) } else { DenseOperator::identity(1) };
        let phase = i.powi(-i32::from(lp & lq & 1));
        op = op.kron(&z.matmul(&x).scale(phase));
    }
    Ok(op)
}

/// Symplectic Fourier transform of the translations:
/// `2⁻ⁿ Σ_λ (−1)^{λ_p·x_q + λ_q·x_p} T̂(λ)`.
pub fn reflection2(x_p: &[u8], x_q: &[u8]) -> Result<DenseOperator> {
    check_bits(x_q, x_p.len())?;
    let half = Complex64::new(0.5, 0.0);
    let mut op = DenseOperator::identity(0);
    for (&xp, &xq) in x_p.iter().zip(x_q) {
        let mut r = DenseOperator::zero(1);
        for lp in 0..2u8 {
            for lq in 0..2u8 {
                let s = if (lp & xq ^ lq & xp) & 1 == 1 { -half } else { half };
                r = r.add(&single(letter_for(lp, lq)).scale(s));
            }
        }
        op = op.kron(&r);
    }
    Ok(op)
}

/// Bits of an `n`-bit integer, qubit 0 first (most significant).
fn bits_of(v: usize, n: usize) -> Vec<u8> {
    (0..n).map(|j| ((v >> (n - 1 - j)) & 1) as u8).collect()
}

fn value_of(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b & 1))
}

/// Discrete Wigner function on the `(x_p, x_q)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wigner2 {
    qubits: usize,
    /// Row `x_p`, column `x_q`, each read as an n-bit integer.
    values: Vec<f64>,
}

impl Wigner2 {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn side(&self) -> usize {
        1 << self.qubits
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x_p: &[u8], x_q: &[u8]) -> f64 {
        self.values[value_of(x_p) * self.side() + value_of(x_q)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Σ max(−W, 0)`.
    pub fn negativity(&self) -> f64 {
        self.values.iter().map(|&w| (-w).max(0.0)).sum()
    }

    pub fn negative_cells(&self) -> Vec<(usize, usize, f64)> {
        let s = self.side();
        self.values.iter().enumerate().filter(|(_, &w)| w < -WIGNER_TOL).map(|(k, &w)| (k / s, k % s, w)).collect()
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.qubits == other.qubits && self.max_diff(other) <= tol
    }

    /// `ρ = Σ_x W(x) R̂(x)`.
    pub fn to_density(&self) -> DenseOperator {
        let n = self.qubits;
        let s = self.side();
        let mut rho = DenseOperator::zero(n);
        for (k, &w) in self.values.iter().enumerate() {
            if w != 0.0 {
                let r = reflection2(&bits_of(k / s, n), &bits_of(k % s, n)).expect("matching lengths");
                rho = rho.add(&r.scale(Complex64::new(w, 0.0)));
            }
        }
        rho
    }

    /// Row-major CSV, rows indexed by `x_p`.
    pub fn to_csv(&self) -> String {
        let s = self.side();
        self.values
            .chunks(s)
            .map(|row| row.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// `W'(x) = W(f(x))` for a map on `(x_p, x_q)` bit vectors.
    fn pull_back(&self, f: impl Fn(&mut [u8], &mut [u8])) -> Self {
        let n = self.qubits;
        let s = self.side();
        let mut values = vec![0.0; self.values.len()];
        for (k, v) in values.iter_mut().enumerate() {
            let mut xp = bits_of(k / s, n);
            let mut xq = bits_of(k % s, n);
            f(&mut xp, &mut xq);
            *v = self.values[value_of(&xp) * s + value_of(&xq)];
        }
        Self { qubits: n, values }
    }

    /// `W(x + r)` for `r = (r_p, r_q)` on one qubit.
    pub fn translated(&self, qubit: usize, r: (u8, u8)) -> Self {
        self.pull_back(|xp, xq| {
            xp[qubit] ^= r.0 & 1;
            xq[qubit] ^= r.1 & 1;
        })
    }
}

impl fmt::Display for Wigner2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

/// `W(x) = 2⁻ⁿ Tr(R̂(x)† ρ)`.
pub fn wigner2(rho: &DenseOperator) -> Wigner2 {
    let n = rho.qubits();
    let coeffs = rho.pauli_coefficients();
    let side = 1usize << n;
    let norm = 1.0 / (1usize << (2 * n)) as f64;
    let mut values = vec![0.0; side * side];
    for (k, v) in values.iter_mut().enumerate() {
        let xp = bits_of(k / side, n);
        let xq = bits_of(k % side, n);
        let mut s = 0.0;
        for (w, c) in coeffs.iter().enumerate() {
            let word = PauliString::from_word_index(n, w, false);
            let flips: u8 = word
                .letters
                .iter()
                .enumerate()
                .map(|(j, l)| match l {
                    Pauli::I => 0,
                    Pauli::X => xp[j],
                    Pauli::Z => xq[j],
                    Pauli::Y => xp[j] ^ xq[j],
                })
                .fold(0, |a, b| a ^ b);
            s += if flips == 1 { -c.re } else { c.re };
        }
        *v = s * norm;
    }
    Wigner2 { qubits: n, values }
}

/// Which single-qubit Pauli stabilizes a qubit: `p` (X), `q` (Z) or `r` (Y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateClass {
    P,
    Q,
    R,
}

impl StateClass {
    pub const ALL: [StateClass; 3] = [StateClass::P, StateClass::Q, StateClass::R];

    pub fn letter(self) -> Pauli {
        match self {
            StateClass::P => Pauli::X,
            StateClass::Q => Pauli::Z,
            StateClass::R => Pauli::Y,
        }
    }
}

impl fmt::Display for StateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateClass::P => "p",
            StateClass::Q => "q",
            StateClass::R => "r",
        })
    }
}

/// Per-qubit classes of a product stabilizer state, or `None` if any
/// qubit's reduced state has no single-qubit stabilizer.
pub fn state_classes(rho: &DenseOperator) -> Option<Vec<StateClass>> {
    let n = rho.qubits();
    (0..n)
        .map(|j| {
            StateClass::ALL.into_iter().find(|c| {
                let mut letters = vec![Pauli::I; n];
                letters[j] = c.letter();
                (rho.pauli_expectation(&PauliString::new(false, letters)).re.abs() - 1.0).abs() < 1e-9
            })
        })
        .collect()
}

/// Which affine rule a state-dependent update used.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EvolutionRule {
    pub gate: GateKind,
    pub classes: Vec<StateClass>,
    pub translated: bool,
}

/// Stability matrices over Z/2Z acting on `(x_p, x_q)` of the touched qubits.
pub fn stability_matrix(kind: GateKind) -> Option<Vec<Vec<u8>>> {
    match kind {
        GateKind::H => Some(vec![vec![0, 1], vec![1, 0]]),
        GateKind::P => Some(vec![vec![1, 1], vec![0, 1]]),
        // (x_pa, x_pb, x_qa, x_qb), a = control
        GateKind::Cnot => Some(vec![vec![1, 1, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 1, 1]]),
        GateKind::T => None,
    }
}

/// `W ↦ W(Mx + r)` with `r` chosen from the classes of the touched qubits.
///
/// One-qubit gates translate by `(1, 0)` exactly when the qubit is in an
/// `r`-state. CNOT needs no translation on any class pair it can represent;
/// control `p` with target `q`, and `r` with `r`, produce grids with a
/// negative cell and are refused.
pub fn evolve_state_dependent(w: &Wigner2, gate: &Gate, classes: &[StateClass]) -> Result<(Wigner2, EvolutionRule)> {
    let n = w.qubits();
    if classes.len() != n {
        return Err(TwoGenError::Length { expected: n, got: classes.len() });
    }
    gate.validate(n).map_err(|_| TwoGenError::BadGate { gate: gate.to_string(), qubits: n })?;
    if w.min() < -WIGNER_TOL {
        return Err(TwoGenError::NotStabilizerProduct);
    }
    let local: Vec<StateClass> = gate.targets().iter().map(|&t| classes[t]).collect();
    let (out, translated) = match *gate {
        Gate::H(a) => {
            let moved = w.pull_back(|xp, xq| std::mem::swap(&mut xp[a], &mut xq[a]));
            if classes[a] == StateClass::R {
                (moved.translated(a, (1, 0)), true)
            } else {
                (moved, false)
            }
        }
        Gate::P(a) => {
            let moved = w.pull_back(|xp, xq| xp[a] ^= xq[a]);
            if classes[a] == StateClass::R {
                (moved.translated(a, (1, 0)), true)
            } else {
                (moved, false)
            }
        }
        Gate::Cnot { control, target } => {
            let pair = (classes[control], classes[target]);
            if matches!(pair, (StateClass::P, StateClass::Q) | (StateClass::R, StateClass::R)) {
                return Err(TwoGenError::NoPointMap { gate: gate.to_string(), control: pair.0, target: pair.1 });
            }
            let moved = w.pull_back(|xp, xq| {
                xp[control] ^= xp[target];
                xq[target] ^= xq[control];
            });
            (moved, false)
        }
        Gate::T(_) => return Err(TwoGenError::NonClifford(gate.to_string())),
    };
    Ok((out, EvolutionRule { gate: gate.kind(), classes: local, translated }))
}

/// The six one-qubit stabilizer supports on the `(p, q)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Support {
    /// `δ_{p,v}`
    P(u8),
    /// `δ_{q,v}`
    Q(u8),
    /// `δ_{p,q}`
    Diagonal,
    /// `δ_{p,1⊕q}`
    AntiDiagonal,
}

impl Support {
    pub const ALL: [Support; 6] =
        [Support::P(1), Support::P(0), Support::Q(1), Support::Q(0), Support::Diagonal, Support::AntiDiagonal];

    pub fn contains(self, p: u8, q: u8) -> bool {
        match self {
            Support::P(v) => p == v,
            Support::Q(v) => q == v,
            Support::Diagonal => p == q,
            Support::AntiDiagonal => p != q,
        }
    }

    /// The uniform one-qubit grid with mass ½ on each support cell.
    pub fn grid(self) -> Wigner2 {
        let values = (0..4).map(|k| if self.contains((k >> 1) as u8, (k & 1) as u8) { 0.5 } else { 0.0 }).collect();
        Wigner2 { qubits: 1, values }
    }
}

/// Lookup between two-generator supports and the even bilinears `1 ± iξξ`.
pub fn two_three_map(support: Support) -> GrassmannElement {
    let i = Complex64::i();
    let (a, b, sign) = match support {
        Support::P(v) => (Kind::R, Kind::Q, if v == 1 { -1.0 } else { 1.0 }),
        Support::Q(v) => (Kind::P, Kind::R, if v == 1 { -1.0 } else { 1.0 }),
        Support::Diagonal => (Kind::P, Kind::Q, -1.0),
        Support::AntiDiagonal => (Kind::P, Kind::Q, 1.0),
    };
    &GrassmannElement::one(3) + &GrassmannElement::monomial(3, &[a.offset(), b.offset()], i * sign)
}

/// Inverse of [`two_three_map`].
pub fn three_two_map(symbol: &GrassmannElement) -> Result<Support> {
    Support::ALL.into_iter().find(|s| two_three_map(*s).approx_eq(symbol, 1e-12)).ok_or(TwoGenError::UnknownSupport)
}

/// Stabilizer generators as bit-packed `(x | z)` rows with phase bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tableau {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

impl Tableau {
    /// `|0…0⟩`: generators `Z_j`.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_TABLEAU_QUBITS {
            return Err(TwoGenError::QubitCount(n));
        }
        Ok(Self { n, x: vec![0; n], z: (0..n).map(|j| 1u64 << j).collect(), r: vec![false; n] })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> Vec<PauliString> {
        (0..self.n).map(|i| self.row(i)).collect()
    }

    fn row(&self, i: usize) -> PauliString {
        let letters = (0..self.n).map(|j| Pauli::from_xz(self.x[i] >> j & 1 == 1, self.z[i] >> j & 1 == 1)).collect();
        PauliString::new(self.r[i], letters)
    }

    fn bit(v: u64, j: usize) -> bool {
        v >> j & 1 == 1
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n).map_err(|_| TwoGenError::BadGate { gate: gate.to_string(), qubits: self.n })?;
        for i in 0..self.n {
            let (x, z) = (self.x[i], self.z[i]);
            match *gate {
                Gate::H(a) => {
                    self.r[i] ^= Self::bit(x, a) & Self::bit(z, a);
                    let m = 1u64 << a;
                    self.x[i] = (x & !m) | (z & m);
                    self.z[i] = (z & !m) | (x & m);
                }
                Gate::P(a) => {
                    self.r[i] ^= Self::bit(x, a) & Self::bit(z, a);
                    if Self::bit(x, a) {
                        self.z[i] ^= 1 << a;
                    }
                }
                Gate::Cnot { control: a, target: b } => {
                    self.r[i] ^= Self::bit(x, a) & Self::bit(z, b) & !(Self::bit(x, b) ^ Self::bit(z, a));
                    if Self::bit(x, a) {
                        self.x[i] ^= 1 << b;
                    }
                    if Self::bit(z, b) {
                        self.z[i] ^= 1 << a;
                    }
                }
                Gate::T(_) => return Err(TwoGenError::NonClifford(gate.to_string())),
            }
        }
        Ok(())
    }

    pub fn simulate(n: usize, gates: &[Gate]) -> Result<Self> {
        let mut t = Self::zero_state(n)?;
        for g in gates {
            t.apply(g)?;
        }
        Ok(t)
    }

    /// All non-identity group elements, sorted. Exponential in `n`.
    pub fn stabilizer_group(&self) -> Vec<PauliString> {
        let gens = self.generators();
        let mut out = Vec::with_capacity((1 << self.n) - 1);
        for subset in 1usize..1 << self.n {
            let mut acc = PauliString::identity(self.n);
            for (k, g) in gens.iter().enumerate() {
                if subset >> k & 1 == 1 {
                    let (phase, prod) = acc.mul(g);
                    debug_assert!((phase.im).abs() < 1e-12, "generators commute");
                    acc = if phase.re < 0.0 { prod.negated() } else { prod };
                }
            }
            out.push(acc);
        }
        out.sort();
        out
    }

    /// `Π_i (I + g_i)/2`.
    pub fn to_density(&self) -> DenseOperator {
        let half = Complex64::new(0.5, 0.0);
        let id = DenseOperator::identity(self.n);
        self.generators().iter().fold(id.clone(), |acc, g| acc.matmul(&id.add(&g.matrix()).scale(half)))
    }
}

/// Weights for the two ensembles `{X±, Z±}` and `{X±, Y±, Z± − c_Y}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleWeights {
    pub x_plus: f64,
    pub x_minus: f64,
    pub z_plus: f64,
    pub z_minus: f64,
    pub y: f64,
}

impl EnsembleWeights {
    fn validate(&self) -> Result<()> {
        let all = [self.x_plus, self.x_minus, self.z_plus, self.z_minus, self.y];
        if all.iter().any(|&c| !(c >= 0.0)) {
            return Err(TwoGenError::Weights("negative or NaN weight".into()));
        }
        let total = self.x_plus + self.x_minus + self.z_plus + self.z_minus;
        if (total - 1.0).abs() > 1e-12 {
            return Err(TwoGenError::Weights(format!("weights sum to {total}")));
        }
        if self.y > self.z_plus.min(self.z_minus) {
            return Err(TwoGenError::Weights("c_Y exceeds a Z weight".into()));
        }
        Ok(())
    }
}

fn pure(letter: Pauli, negative: bool) -> DenseOperator {
    let id = DenseOperator::identity(1);
    let p = PauliString::new(negative, vec![letter]).matrix();
    id.add(&p).scale(Complex64::new(0.5, 0.0))
}

/// One member of an ensemble: weight and the stabilizing signed Pauli.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub weight: f64,
    pub state: PauliString,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparationReport {
    pub gate: Gate,
    pub first: Vec<Member>,
    pub second: Vec<Member>,
    pub density_gap: f64,
    pub first_rules: Vec<EvolutionRule>,
    pub second_rules: Vec<EvolutionRule>,
    pub rules_differ: bool,
    /// Between the two evolved ensembles.
    pub evolved_gap: f64,
    /// Between the first evolved ensemble and `GρG†`.
    pub oracle_gap: f64,
}

fn ensemble(members: &[(f64, Pauli, bool)]) -> Vec<Member> {
    members
        .iter()
        .filter(|m| m.0 > 0.0)
        .map(|&(weight, l, neg)| Member { weight, state: PauliString::new(neg, vec![l]) })
        .collect()
}

fn mix(members: &[Member]) -> DenseOperator {
    members.iter().fold(DenseOperator::zero(1), |acc, m| {
        acc.add(&pure(m.state.letters[0], m.state.negative).scale(Complex64::new(m.weight, 0.0)))
    })
}

fn evolve_ensemble(members: &[Member], gate: &Gate) -> Result<(DenseOperator, Vec<EvolutionRule>)> {
    let mut rho = DenseOperator::zero(1);
    let mut rules = Vec::new();
    for m in members {
        let state = pure(m.state.letters[0], m.state.negative);
        let classes = state_classes(&state).ok_or(TwoGenError::NotStabilizerProduct)?;
        let (w, rule) = evolve_state_dependent(&wigner2(&state), gate, &classes)?;
        rho = rho.add(&w.to_density().scale(Complex64::new(m.weight, 0.0)));
        rules.push(rule);
    }
    rules.sort();
    Ok((rho, rules))
}

/// Evolves both ensembles member by member with the state-dependent rules.
pub fn preparation_context_demo(c: EnsembleWeights, gate: Gate) -> Result<PreparationReport> {
    c.validate()?;
    gate.validate(1).map_err(|_| TwoGenError::BadGate { gate: gate.to_string(), qubits: 1 })?;
    let first = ensemble(&[
        (c.x_plus, Pauli::X, false),
        (c.x_minus, Pauli::X, true),
        (c.z_plus, Pauli::Z, false),
        (c.z_minus, Pauli::Z, true),
    ]);
    let second = ensemble(&[
        (c.x_plus, Pauli::X, false),
        (c.x_minus, Pauli::X, true),
        (c.y, Pauli::Y, false),
        (c.y, Pauli::Y, true),
        (c.z_plus - c.y, Pauli::Z, false),
        (c.z_minus - c.y, Pauli::Z, true),
    ]);
    let rho1 = mix(&first);
    let rho2 = mix(&second);
    let (out1, first_rules) = evolve_ensemble(&first, &gate)?;
    let (out2, second_rules) = evolve_ensemble(&second, &gate)?;
    let oracle = dense_apply(&rho1, &gate).map_err(|_| TwoGenError::BadGate { gate: gate.to_string(), qubits: 1 })?;
    let rules_differ = first_rules != second_rules;
    Ok(PreparationReport {
        gate,
        density_gap: rho1.max_diff(&rho2),
        evolved_gap: out1.max_diff(&out2),
        oracle_gap: out1.max_diff(&oracle),
        first,
        second,
        first_rules,
        second_rules,
        rules_differ,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{run_circuit, stabilizer_census, stabilizer_group, Circuit};
    use crate::weyl::{operator_from_symbol, WeylSymbol};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn six_states() -> Vec<(StateClass, bool, DenseOperator)> {
        let mut v = vec![];
        for cl in StateClass::ALL {
            for neg in [false, true] {
                v.push((cl, neg, pure(cl.letter(), neg)));
            }
        }
        v
    }

    #[test]
    fn translations_are_paulis() {
        assert!(translation2(&[1], &[1]).unwrap().approx_eq(&single(Pauli::Y), 1e-15));
        assert!(translation2(&[0], &[0]).unwrap().approx_eq(&DenseOperator::identity(1), 0.0));
        let t = translation2(&[1], &[0]).unwrap();
        let det = t.get(0, 0) * t.get(1, 1) - t.get(0, 1) * t.get(1, 0);
        assert!((det - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(translation2(&[1, 0], &[1]).is_err());
    }

    #[test]
    fn reflection_closed_form() {
        let i = Complex64::i();
        for xp in 0..2u8 {
            for xq in 0..2u8 {
                let sp = if xp == 1 { -1.0 } else { 1.0 };
                let sq = if xq == 1 { -1.0 } else { 1.0 };
                let xz = single(Pauli::X).matmul(&single(Pauli::Z));
                let expect = DenseOperator::identity(1)
                    .add(&single(Pauli::Z).scale(c(sq, 0.0)))
                    .add(&single(Pauli::X).scale(c(sp, 0.0)))
                    .add(&xz.scale(i * sp * sq))
                    .scale(c(0.5, 0.0));
                assert!(reflection2(&[xp], &[xq]).unwrap().approx_eq(&expect, 1e-15));
            }
        }
    }

    #[test]
    fn reflections_on_zero_ket() {
        // only x_q = 1 keeps |0⟩ inside the stabilizer set
        let ket0 = [c(1.0, 0.0), c(0.0, 0.0)];
        let apply = |xp: u8, xq: u8| {
            let r = reflection2(&[xp], &[xq]).unwrap();
            [r.get(0, 0) * ket0[0], r.get(1, 0) * ket0[0]]
        };
        let h = c(0.5, 0.5);
        let cases = [
            ((0, 0), [c(1.0, 0.0), h]),
            ((0, 1), [c(0.0, 0.0), h.conj()]),
            ((1, 0), [c(1.0, 0.0), -h]),
            ((1, 1), [c(0.0, 0.0), -h.conj()]),
        ];
        for ((xp, xq), expect) in cases {
            let got = apply(xp, xq);
            assert!((got[0] - expect[0]).norm() < 1e-15 && (got[1] - expect[1]).norm() < 1e-15, "{xp}{xq}");
        }
    }

    #[test]
    fn wigner_of_stabilizer_states() {
        for (_, _, rho) in six_states() {
            let w = wigner2(&rho);
            assert!((w.total() - 1.0).abs() < 1e-12);
            let halves = w.values().iter().filter(|v| (*v - 0.5).abs() < 1e-12).count();
            let zeros = w.values().iter().filter(|v| v.abs() < 1e-12).count();
            assert_eq!((halves, zeros), (2, 2));
        }
        let w = wigner2(&DenseOperator::maximally_mixed(2));
        assert!(w.values().iter().all(|v| (v - 1.0 / 16.0).abs() < 1e-15));
        assert_eq!(w.negativity(), 0.0);
    }

    #[test]
    fn magic_state_has_one_negative_cell() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let t_plus = DenseOperator::from_ket(&[c(s, 0.0), c(0.5, 0.5)]);
        let w = wigner2(&t_plus);
        let neg = w.negative_cells();
        assert_eq!(neg.len(), 1);
        assert!((neg[0].2 - 0.25 * (1.0 - 2f64.sqrt())).abs() < 1e-12);
        assert!((w.negativity() - 0.25 * (2f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn density_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for n in 1..=2 {
            let rho = crate::oracle::random_density(n, &mut rng);
            assert!(wigner2(&rho).to_density().approx_eq(&rho, 1e-12));
        }
    }

    #[test]
    fn one_qubit_rules_match_oracle() {
        for (cl, _, rho) in six_states() {
            for g in [Gate::H(0), Gate::P(0)] {
                let (w, rule) = evolve_state_dependent(&wigner2(&rho), &g, &[cl]).unwrap();
                assert_eq!(rule.translated, cl == StateClass::R);
                assert!(w.approx_eq(&wigner2(&dense_apply(&rho, &g).unwrap()), 1e-12));
            }
        }
    }

    #[test]
    fn either_translation_works_for_r_states() {
        for (cl, _, rho) in six_states() {
            if cl != StateClass::R {
                continue;
            }
            let w = wigner2(&rho);
            assert!(w.translated(0, (1, 0)).approx_eq(&w.translated(0, (0, 1)), 1e-15));
        }
    }

    #[test]
    fn cnot_rules_match_oracle() {
        let mut refused = 0;
        for (ca, _, ra) in six_states() {
            for (cb, _, rb) in six_states() {
                let rho = ra.kron(&rb);
                let g = Gate::Cnot { control: 0, target: 1 };
                let expect = wigner2(&dense_apply(&rho, &g).unwrap());
                match evolve_state_dependent(&wigner2(&rho), &g, &[ca, cb]) {
                    Ok((w, rule)) => {
                        assert!(!rule.translated);
                        assert!(w.approx_eq(&expect, 1e-12), "{ca}{cb}");
                    }
                    Err(TwoGenError::NoPointMap { .. }) => {
                        refused += 1;
                        assert!(expect.min() < -0.1);
                    }
                    Err(e) => panic!("{e}"),
                }
            }
        }
        assert_eq!(refused, 8);
    }

    #[test]
    fn reversed_cnot_uses_same_rule() {
        for (ca, _, ra) in six_states() {
            for (cb, _, rb) in six_states() {
                let rho = ra.kron(&rb);
                let g = Gate::Cnot { control: 1, target: 0 };
                if let Ok((w, _)) = evolve_state_dependent(&wigner2(&rho), &g, &[ca, cb]) {
                    assert!(w.approx_eq(&wigner2(&dense_apply(&rho, &g).unwrap()), 1e-12));
                }
            }
        }
    }

    #[test]
    fn classes_and_refusals() {
        let bell = run_circuit(&Circuit::new(2, vec![Gate::H(0), Gate::Cnot { control: 0, target: 1 }]).unwrap());
        assert_eq!(state_classes(&bell), None);
        assert_eq!(state_classes(&DenseOperator::basis(2, 1)), Some(vec![StateClass::Q, StateClass::Q]));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let t_plus = DenseOperator::from_ket(&[c(s, 0.0), c(0.5, 0.5)]);
        assert_eq!(
            evolve_state_dependent(&wigner2(&t_plus), &Gate::H(0), &[StateClass::P]),
            Err(TwoGenError::NotStabilizerProduct)
        );
    }

    #[test]
    fn mixed_representation_phases() {
        // each stabilizer ket has flat modulus and quarter-turn phases in some Pauli eigenbasis
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let kets = [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)], [c(s, 0.0), c(0.0, s)], [c(s, 0.0), c(0.0, -s)]];
        for k in kets {
            for a in k {
                assert!((a.norm() - s).abs() < 1e-15);
                let ph = a / a.norm();
                assert!([c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)].iter().any(|q| (ph - q).norm() < 1e-15));
            }
        }
        // Z eigenstates in the X basis
        for k in [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]] {
            let plus = (k[0] + k[1]) * s;
            let minus = (k[0] - k[1]) * s;
            assert!((plus.norm() - s).abs() < 1e-15 && (minus.norm() - s).abs() < 1e-15);
        }
    }

    #[test]
    fn two_three_lookup() {
        let i = Complex64::i();
        let e = two_three_map(Support::Q(0));
        let expect = &GrassmannElement::one(3) + &GrassmannElement::monomial(3, &[Kind::P.offset(), Kind::R.offset()], i);
        assert!(e.approx_eq(&expect, 0.0));
        for s in Support::ALL {
            assert_eq!(three_two_map(&two_three_map(s)).unwrap(), s);
        }
        assert!(three_two_map(&GrassmannElement::one(3)).is_err());
    }

    #[test]
    fn two_three_against_quantized_projectors() {
        // X and Z lines agree with the grids; the two parity lines come out exchanged
        for s in Support::ALL {
            let sym = WeylSymbol::new(two_three_map(s).scale(c(0.5, 0.0)), 1).unwrap();
            let proj = operator_from_symbol(&sym);
            let grid = wigner2(&proj);
            let swapped = match s {
                Support::Diagonal => Support::AntiDiagonal,
                Support::AntiDiagonal => Support::Diagonal,
                other => other,
            };
            assert!(grid.approx_eq(&swapped.grid(), 1e-12), "{s:?}");
        }
    }

    #[test]
    fn tableau_examples() {
        let t = Tableau::simulate(1, &[Gate::H(0), Gate::H(0)]).unwrap();
        assert_eq!(t, Tableau::zero_state(1).unwrap());
        let bell = Tableau::simulate(2, &[Gate::H(0), Gate::Cnot { control: 0, target: 1 }]).unwrap();
        let group: Vec<String> = bell.stabilizer_group().iter().map(|p| p.to_string()).collect();
        assert!(group.contains(&"+XX".to_string()) && group.contains(&"+ZZ".to_string()) && group.contains(&"-YY".to_string()));
        let y = Tableau::simulate(1, &[Gate::H(0), Gate::P(0)]).unwrap();
        assert_eq!(y.generators()[0].to_string(), "+Y");
        assert!(Tableau::simulate(1, &[Gate::T(0)]).is_err());
        assert!(Tableau::zero_state(0).is_err());
    }

    #[test]
    fn tableau_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for k in 0..60 {
            let n = 1 + k % 4;
            let circ = Circuit::random_clifford(n, 30, &mut rng);
            let t = Tableau::simulate(n, circ.gates()).unwrap();
            let rho = run_circuit(&circ);
            let mut oracle = stabilizer_group(&rho).unwrap();
            oracle.sort();
            assert_eq!(t.stabilizer_group(), oracle);
            assert!(t.to_density().approx_eq(&rho, 1e-9));
        }
    }

    #[test]
    fn census_states_have_tableau_classes() {
        for rho in stabilizer_census(1) {
            assert!(state_classes(&rho).is_some());
        }
    }

    #[test]
    fn preparation_demo() {
        let flat = EnsembleWeights { x_plus: 0.25, x_minus: 0.25, z_plus: 0.25, z_minus: 0.25, y: 0.125 };
        let r = preparation_context_demo(flat, Gate::H(0)).unwrap();
        assert!(r.density_gap < 1e-12 && r.evolved_gap < 1e-12 && r.oracle_gap < 1e-12);
        assert!(r.rules_differ);
        assert_eq!(r.second_rules.iter().filter(|x| x.translated).count(), 2);
        let none = preparation_context_demo(EnsembleWeights { y: 0.0, ..flat }, Gate::H(0)).unwrap();
        assert!(!none.rules_differ);
        assert!(preparation_context_demo(EnsembleWeights { y: 0.3, ..flat }, Gate::H(0)).is_err());
        assert!(preparation_context_demo(EnsembleWeights { x_plus: 0.5, ..flat }, Gate::H(0)).is_err());
    }
}
