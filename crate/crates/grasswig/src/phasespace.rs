//! Discrete phase space of signed Pauli points.
//!
//! A state's symbol, written in the stabilizer-operator basis, has one
//! coefficient per signed non-identity Pauli word. Splitting each coefficient
//! into its positive and negative parts gives the distribution ḡ, which is a
//! genuine probability vector for stabilizer states. Clifford gates move the
//! points around without mixing them, so a Clifford circuit acts on ḡ as a
//! permutation.
//!
//! Points are ordered sign block first (`+` then `−`), then lexicographically
//! over the letters with `I < X < Y < Z`, skipping the all-identity word. For
//! one qubit this is `(+X, +Y, +Z, −X, −Y, −Z)`, i.e. `(p, r, q, −p, −r, −q)`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{classify_order, cnot_hamiltonian, evolve_generators, gate_hamiltonian, DynamicsError, OrderClass};
use crate::grassmann::{GrassmannElement, Parity};
use crate::oracle::{conjugate_pauli, Circuit, DenseOperator, Gate, GateKind, Pauli, PauliString};
use crate::twogen::wigner2;
use crate::weyl::QuantizationMap;

/// Largest register the phase-space engine accepts.
pub const MAX_QUBITS: usize = 10;
/// Pauli expectations this close to `0` or `±1` are taken as exact.
pub const EXPECTATION_SNAP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseSpaceError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("{gate} is not a permutation of phase-space points ({class:?})")]
    NotPermutation { gate: String, class: OrderClass },
    #[error("distribution sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("gate {0} does not fit the register")]
    BadGate(String),
    #[error("evolved symbol is not a signed point: {0}")]
    NotAPoint(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

pub type Result<T> = std::result::Result<T, PhaseSpaceError>;

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(PhaseSpaceError::QubitCount(n));
    }
    Ok(())
}

/// `2(4ⁿ − 1)`.
pub fn point_count(n: usize) -> usize {
    2 * ((1usize << (2 * n)) - 1)
}

/// Position of a signed point in the canonical order.
pub fn point_index(p: &PauliString) -> usize {
    let words = (1usize << (2 * p.qubits())) - 1;
    let w = p.word_index();
    assert!(w != 0, "the identity is not a phase-space point");
    usize::from(p.negative) * words + (w - 1)
}

pub fn point_at(n: usize, index: usize) -> PauliString {
    let words = (1usize << (2 * n)) - 1;
    PauliString::from_word_index(n, index % words + 1, index >= words)
}

/// All signed points in canonical order.
pub fn enumerate_points(n: usize) -> Result<Vec<PauliString>> {
    check_qubits(n)?;
    Ok((0..point_count(n)).map(|i| point_at(n, i)).collect())
}

/// Paper-style label of a one-qubit point: `p`, `r`, `q` for the X-, Y-, Z-like points.
pub fn kind_label(letter: Pauli) -> char {
    match letter {
        Pauli::I => '0',
        Pauli::X => 'p',
        Pauli::Y => 'r',
        Pauli::Z => 'q',
    }
}

/// Non-negative weights on the signed points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GBar {
    qubits: usize,
    values: Vec<f64>,
}

impl GBar {
    pub fn zero(qubits: usize) -> Result<Self> {
        check_qubits(qubits)?;
        Ok(Self { qubits, values: vec![0.0; point_count(qubits)] })
    }

    pub fn from_values(qubits: usize, values: Vec<f64>) -> Result<Self> {
        check_qubits(qubits)?;
        if values.len() != point_count(qubits) {
            return Err(PhaseSpaceError::SizeMismatch(values.len(), point_count(qubits)));
        }
        Ok(Self { qubits, values })
    }

    /// `|0…0⟩`: uniform mass on every `+` word made of `I` and `Z`.
    pub fn all_zeros(qubits: usize) -> Result<Self> {
        let mut g = Self::zero(qubits)?;
        let support: Vec<usize> = (1usize..1 << qubits)
            .map(|subset| {
                let letters =
                    (0..qubits).map(|q| if subset >> (qubits - 1 - q) & 1 == 1 { Pauli::Z } else { Pauli::I }).collect();
                point_index(&PauliString::new(false, letters))
            })
            .collect();
        let mass = 1.0 / support.len() as f64;
        for i in support {
            g.values[i] = mass;
        }
        Ok(g)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, p: &PauliString) -> f64 {
        self.values[point_index(p)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// True for the all-zero vector (no non-identity content).
    pub fn is_degenerate(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn is_non_negative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// Indices carrying nonzero mass.
    pub fn support(&self) -> Vec<usize> {
        self.values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect()
    }

    /// Nonzero entries keyed by signed word, e.g. `{"+XX": 0.333…}`.
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.support().into_iter().map(|i| (point_at(self.qubits, i).to_string(), self.values[i])).collect()
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn snap_expectation(c: f64) -> f64 {
    for target in [0.0, 1.0, -1.0] {
        if (c - target).abs() < EXPECTATION_SNAP {
            return target;
        }
    }
    c
}

/// Minimal split `g_{±P} = max(±c_P, 0)` of `ρ = 2⁻ⁿ(I + Σ c_P P)`, normalized
/// to unit sum. The maximally mixed state gives the degenerate zero vector.
pub fn gbar_from_state(rho: &DenseOperator) -> Result<GBar> {
    let n = rho.qubits();
    let mut g = GBar::zero(n)?;
    for w in 1..1usize << (2 * n) {
        let p = PauliString::from_word_index(n, w, false);
        let c = snap_expectation(rho.pauli_expectation(&p).re);
        if c > 0.0 {
            g.values[point_index(&p)] = c;
        } else if c < 0.0 {
            g.values[point_index(&p.negated())] = -c;
        }
    }
    let total = g.total();
    if total > 0.0 {
        for v in &mut g.values {
            *v /= total;
        }
    }
    Ok(g)
}

/// Forward action on point indices: the mass at `i` moves to `map[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationMatrix {
    qubits: usize,
    map: Vec<usize>,
}

impl PermutationMatrix {
    pub fn identity(qubits: usize) -> Result<Self> {
        check_qubits(qubits)?;
        Ok(Self { qubits, map: (0..point_count(qubits)).collect() })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_bijective(&self) -> bool {
        let set: HashSet<usize> = self.map.iter().copied().collect();
        set.len() == self.map.len() && self.map.iter().all(|&j| j < self.map.len())
    }

    /// `self` then `next`.
    pub fn then(&self, next: &Self) -> Self {
        Self { qubits: self.qubits, map: self.map.iter().map(|&j| next.map[j]).collect() }
    }

    /// Row-major 0/1 matrix with `new = 𝓟 · old`.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        let d = self.map.len();
        let mut m = vec![vec![0u8; d]; d];
        for (old, &new) in self.map.iter().enumerate() {
            m[new][old] = 1;
        }
        m
    }

    /// Image of a signed point.
    pub fn image(&self, p: &PauliString) -> PauliString {
        point_at(self.qubits, self.map[point_index(p)])
    }
}

pub fn apply_gate(g: &GBar, perm: &PermutationMatrix) -> Result<GBar> {
    if g.qubits != perm.qubits {
        return Err(PhaseSpaceError::SizeMismatch(g.values.len(), perm.map.len()));
    }
    let mut out = vec![0.0; g.values.len()];
    for (i, &v) in g.values.iter().enumerate() {
        out[perm.map[i]] = v;
    }
    Ok(GBar { qubits: g.qubits, values: out })
}

/// Even symbol of an unsigned Pauli word: product of per-qubit bilinears.
fn word_monomial(word: &PauliString) -> (u128, Complex64) {
    let n = word.qubits();
    let map = QuantizationMap::global();
    let g = word
        .letters
        .iter()
        .enumerate()
        .fold(GrassmannElement::one(3 * n), |acc, (q, &l)| &acc * &map.pauli_symbol(l, Parity::Even).shifted(3 * n, 3 * q));
    let terms: Vec<_> = g.terms().collect();
    debug_assert_eq!(terms.len(), 1);
    terms[0]
}

/// Reads a signed point back from a single even monomial.
fn monomial_point(n: usize, g: &GrassmannElement) -> Result<PauliString> {
    let terms: Vec<_> = g.terms().collect();
    if terms.len() != 1 {
        return Err(PhaseSpaceError::NotAPoint(g.to_string()));
    }
    let (mask, c) = terms[0];
    let mut letters = Vec::with_capacity(n);
    for q in 0..n {
        letters.push(match (mask >> (3 * q)) & 7 {
            0 => Pauli::I,
            0b110 => Pauli::X,
            0b011 => Pauli::Y,
            0b101 => Pauli::Z,
            _ => return Err(PhaseSpaceError::NotAPoint(g.to_string())),
        });
    }
    let word = PauliString::new(false, letters);
    let (_, base) = word_monomial(&word);
    let ratio = c / base;
    if (ratio - 1.0).norm() < 1e-9 {
        Ok(word)
    } else if (ratio + 1.0).norm() < 1e-9 {
        Ok(word.negated())
    } else {
        Err(PhaseSpaceError::NotAPoint(g.to_string()))
    }
}

/// Local permutation of a gate on its own qubits (CNOT: control 0, target 1),
/// built from the generator flow and checked against oracle conjugation.
fn local_permutation(kind: GateKind) -> Result<PermutationMatrix> {
    let (h, t, local_gate) = match kind {
        GateKind::Cnot => {
            let (h, t) = cnot_hamiltonian(2, 0, 1)?;
            (h, t, Gate::Cnot { control: 0, target: 1 })
        }
        GateKind::H => {
            let (h, t) = gate_hamiltonian(kind);
            (h, t, Gate::H(0))
        }
        GateKind::P => {
            let (h, t) = gate_hamiltonian(kind);
            (h, t, Gate::P(0))
        }
        GateKind::T => {
            let (h, t) = gate_hamiltonian(kind);
            (h, t, Gate::T(0))
        }
    };
    let flow = evolve_generators(&h, t)?;
    let class = classify_order(&flow);
    if class != OrderClass::Hbar0Permutation {
        return Err(PhaseSpaceError::NotPermutation { gate: format!("{kind:?}"), class });
    }
    let n = h.qubits();
    let mut map = Vec::with_capacity(point_count(n));
    for i in 0..point_count(n) {
        let point = point_at(n, i);
        let unsigned = PauliString::new(false, point.letters.clone());
        let (mask, c) = word_monomial(&unsigned);
        let image = flow.apply(&GrassmannElement::from_terms(3 * n, [(mask, c * point.sign())]))?;
        let q = monomial_point(n, &image)?;
        let expect = conjugate_pauli(&local_gate, &point).expect("Clifford gate");
        assert_eq!(q, expect, "flow and oracle disagree on {point} under {local_gate}");
        map.push(point_index(&q));
    }
    Ok(PermutationMatrix { qubits: n, map })
}

fn cached_local(kind: GateKind) -> Result<PermutationMatrix> {
    static CACHE: OnceLock<Mutex<HashMap<GateKind, PermutationMatrix>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().expect("cache lock").get(&kind) {
        return Ok(p.clone());
    }
    let p = local_permutation(kind)?;
    cache.lock().expect("cache lock").insert(kind, p.clone());
    Ok(p)
}

/// Permutation of all `2(4ⁿ−1)` points induced by a Clifford gate.
pub fn permutation_for_gate(gate: &Gate, n: usize) -> Result<PermutationMatrix> {
    check_qubits(n)?;
    gate.validate(n).map_err(|_| PhaseSpaceError::BadGate(gate.to_string()))?;
    let local = cached_local(gate.kind())?;
    let targets = gate.targets();
    let map = (0..point_count(n))
        .map(|i| {
            let p = point_at(n, i);
            let sub = PauliString::new(false, targets.iter().map(|&t| p.letters[t]).collect());
            if sub.is_identity() {
                return i;
            }
            let img = local.image(&sub);
            let mut letters = p.letters.clone();
            for (j, &t) in targets.iter().enumerate() {
                letters[t] = img.letters[j];
            }
            point_index(&PauliString::new(p.negative ^ img.negative, letters))
        })
        .collect();
    Ok(PermutationMatrix { qubits: n, map })
}

/// Runs a Clifford circuit on ḡ from `|0…0⟩`.
pub fn simulate_circuit(circuit: &Circuit) -> Result<GBar> {
    let n = circuit.qubits();
    let mut g = GBar::all_zeros(n)?;
    let mut perms: HashMap<Gate, PermutationMatrix> = HashMap::new();
    for gate in circuit.gates() {
        if !perms.contains_key(gate) {
            perms.insert(*gate, permutation_for_gate(gate, n)?);
        }
        g = apply_gate(&g, &perms[gate])?;
    }
    Ok(g)
}

/// Two-generator Wigner negativity `Σ max(−W, 0)`.
pub fn negativity(rho: &DenseOperator) -> f64 {
    wigner2(rho).negativity()
}

/// Every ḡ reachable from `|0…0⟩` under `{H, P, CNOT}` on all qubits.
pub fn census(n: usize) -> Result<Vec<GBar>> {
    check_qubits(n)?;
    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(Gate::H(q));
        gates.push(Gate::P(q));
        for t in 0..n {
            if t != q {
                gates.push(Gate::Cnot { control: q, target: t });
            }
        }
    }
    let perms = gates.iter().map(|g| permutation_for_gate(g, n)).collect::<Result<Vec<_>>>()?;
    let start = GBar::all_zeros(n)?;
    let mut seen = HashSet::from([start.support()]);
    let mut states = vec![start];
    let mut next = 0;
    while next < states.len() {
        let g = states[next].clone();
        next += 1;
        for p in &perms {
            let h = apply_gate(&g, p)?;
            if seen.insert(h.support()) {
                states.push(h);
            }
        }
    }
    Ok(states)
}
