//! Pauli measurements and the Peres–Mermin square.
//!
//! Projectors get even Weyl symbols like states do; their expectation values
//! come from the odd dual under the trace functional. The square itself is
//! stored with abstract `p, q, r` labels and turned into Pauli strings through
//! the quantization map, so there is a single source of sign truth.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grassmann::{Kind, Parity};
use crate::oracle::{DenseOperator, Pauli, PauliString};
use crate::weyl::{dual_symbol, expectation, moyal_product, word_symbol, QuantizationMap, WeylError, WeylSymbol};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasurementError {
    #[error("line index {0} outside 0..3")]
    BadLine(usize),
    #[error("expected a {expected}-qubit state, got {got}")]
    Qubits { expected: usize, got: usize },
    #[error("outcome with zero probability selected")]
    ZeroProbability,
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

pub type Result<T> = std::result::Result<T, MeasurementError>;

/// Outcome label `m ∈ {+1, −1}`.
pub const OUTCOMES: [i8; 2] = [1, -1];

/// A product of single-qubit observables `σ_k` on distinct qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observable {
    pub factors: Vec<(usize, Kind)>,
}

impl Observable {
    fn new(factors: &[(usize, Kind)]) -> Self {
        Self { factors: factors.to_vec() }
    }

    /// Concrete Pauli string: `σ_k` is the letter the quantization map sends `ξ̂_k` to.
    pub fn pauli(&self, qubits: usize) -> PauliString {
        let map = QuantizationMap::global();
        let mut letters = vec![Pauli::I; qubits];
        for &(q, k) in &self.factors {
            letters[q] = map.image(k).1;
        }
        PauliString::new(false, letters)
    }

    pub fn label(&self) -> String {
        self.factors.iter().map(|(q, k)| format!("σ_{}{}", k.letter(), q + 1)).collect::<Vec<_>>().join("")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Line {
    Row(usize),
    Column(usize),
}

impl Line {
    pub fn all() -> [Line; 6] {
        [Line::Row(0), Line::Row(1), Line::Row(2), Line::Column(0), Line::Column(1), Line::Column(2)]
    }

    fn index(self) -> usize {
        match self {
            Line::Row(i) | Line::Column(i) => i,
        }
    }

    /// Grid cells `(row, column)` along the line.
    pub fn cells(self) -> [(usize, usize); 3] {
        match self {
            Line::Row(r) => [(r, 0), (r, 1), (r, 2)],
            Line::Column(c) => [(0, c), (1, c), (2, c)],
        }
    }
}

/// Nine two-qubit observables; each commutes exactly with its row and column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PMSquare {
    pub cells: [[Observable; 3]; 3],
}

impl Default for PMSquare {
    fn default() -> Self {
        Self::standard()
    }
}

impl PMSquare {
    pub fn standard() -> Self {
        use Kind::{P, Q, R};
        let o = Observable::new;
        Self {
            cells: [
                [o(&[(0, P)]), o(&[(1, P)]), o(&[(0, P), (1, P)])],
                [o(&[(1, R)]), o(&[(0, R)]), o(&[(0, R), (1, R)])],
                [o(&[(0, P), (1, R)]), o(&[(0, R), (1, P)]), o(&[(0, Q), (1, Q)])],
            ],
        }
    }

    pub fn pauli(&self, row: usize, col: usize) -> PauliString {
        self.cells[row][col].pauli(2)
    }

    pub fn line(&self, line: Line) -> Result<[PauliString; 3]> {
        if line.index() > 2 {
            return Err(MeasurementError::BadLine(line.index()));
        }
        Ok(line.cells().map(|(r, c)| self.pauli(r, c)))
    }

    /// Sign `s` with `A·B·C = s·I` along the line.
    pub fn line_product(&self, line: Line) -> Result<i8> {
        let [a, b, c] = self.line(line)?;
        let (p1, ab) = a.mul(&b);
        let (p2, abc) = ab.mul(&c);
        let phase = p1 * p2;
        assert!(abc.is_identity() && phase.im.abs() < 1e-12, "line operators multiply to ±I");
        Ok(if (phase.re < 0.0) ^ abc.negative { -1 } else { 1 })
    }

    /// `(members, product)` for all six lines, cells indexed `3·row + column`.
    pub fn constraints(&self) -> Vec<Constraint> {
        Line::all()
            .into_iter()
            .map(|l| Constraint {
                members: l.cells().iter().map(|(r, c)| 3 * r + c).collect(),
                product: self.line_product(l).expect("valid line"),
            })
            .collect()
    }

    pub fn observables(&self) -> Vec<PauliString> {
        (0..9).map(|k| self.pauli(k / 3, k % 3)).collect()
    }
}

fn projector(p: &PauliString, m: i8) -> DenseOperator {
    let id = DenseOperator::identity(p.qubits());
    id.add(&p.matrix().scale(Complex64::new(f64::from(m), 0.0))).scale(Complex64::new(0.5, 0.0))
}

/// Even symbol of `½(1 + m P)`.
fn projector_symbol(p: &PauliString, m: i8) -> WeylSymbol {
    let n = p.qubits();
    let one = crate::grassmann::GrassmannElement::one(3 * n);
    let sym = word_symbol(&PauliString::new(false, p.letters.clone()), Parity::Even)
        .scale(Complex64::new(f64::from(m) * p.sign(), 0.0));
    WeylSymbol::new((&one + &sym).scale(Complex64::new(0.5, 0.0)), n).expect("even")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSymbol {
    /// Position along the line.
    pub observable: usize,
    pub outcome: i8,
    pub symbol: WeylSymbol,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointProjector {
    pub outcomes: (i8, i8),
    pub symbol: WeylSymbol,
}

/// Single-observable projectors for all three members of a line, and the
/// joint projectors of the first two members built by the star product.
#[derive(Debug, Clone, PartialEq)]
pub struct LineProjectors {
    pub line: Line,
    pub observables: [PauliString; 3],
    pub single: Vec<ProjectorSymbol>,
    pub joint: Vec<JointProjector>,
}

pub fn projector_symbols(square: &PMSquare, line: Line) -> Result<LineProjectors> {
    let observables = square.line(line)?;
    let mut single = Vec::new();
    for (k, p) in observables.iter().enumerate() {
        for m in OUTCOMES {
            single.push(ProjectorSymbol { observable: k, outcome: m, symbol: projector_symbol(p, m) });
        }
    }
    let mut joint = Vec::new();
    for m1 in OUTCOMES {
        for m2 in OUTCOMES {
            let a = projector_symbol(&observables[0], m1);
            let b = projector_symbol(&observables[1], m2);
            joint.push(JointProjector { outcomes: (m1, m2), symbol: moyal_product(&a, &b)? });
        }
    }
    Ok(LineProjectors { line, observables, single, joint })
}

fn outcome_slot(m: i8) -> usize {
    usize::from(m < 0)
}

/// Outcome probabilities of one context, from symbols and from the oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextReport {
    pub line: Line,
    /// `[observable][+1, −1]`
    pub single: [[f64; 2]; 3],
    /// `[m1][m2]` for the first two observables.
    pub joint: [[f64; 2]; 2],
    pub oracle_single: [[f64; 2]; 3],
    pub oracle_joint: [[f64; 2]; 2],
    /// Largest deviation between symbol and oracle probabilities.
    pub oracle_gap: f64,
    /// Largest deviation between joint marginals and single-observable probabilities.
    pub marginal_gap: f64,
}

fn symbol_probability(state: &WeylSymbol, projector: &WeylSymbol) -> Result<f64> {
    Ok(expectation(state, &dual_symbol(projector)?)?.re)
}

pub fn context_expectations(rho: &DenseOperator, square: &PMSquare, line: Line) -> Result<ContextReport> {
    if rho.qubits() != 2 {
        return Err(MeasurementError::Qubits { expected: 2, got: rho.qubits() });
    }
    let state = crate::weyl::symbol_from_operator(rho);
    let ps = projector_symbols(square, line)?;
    let mut single = [[0.0; 2]; 3];
    let mut oracle_single = [[0.0; 2]; 3];
    for s in &ps.single {
        single[s.observable][outcome_slot(s.outcome)] = symbol_probability(&state, &s.symbol)?;
        oracle_single[s.observable][outcome_slot(s.outcome)] =
            projector(&ps.observables[s.observable], s.outcome).matmul(rho).trace().re;
    }
    let mut joint = [[0.0; 2]; 2];
    let mut oracle_joint = [[0.0; 2]; 2];
    for j in &ps.joint {
        let (a, b) = (outcome_slot(j.outcomes.0), outcome_slot(j.outcomes.1));
        joint[a][b] = symbol_probability(&state, &j.symbol)?;
        let op = projector(&ps.observables[0], j.outcomes.0).matmul(&projector(&ps.observables[1], j.outcomes.1));
        oracle_joint[a][b] = op.matmul(rho).trace().re;
    }
    let mut oracle_gap: f64 = 0.0;
    for k in 0..3 {
        for s in 0..2 {
            oracle_gap = oracle_gap.max((single[k][s] - oracle_single[k][s]).abs());
        }
    }
    let mut marginal_gap: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            oracle_gap = oracle_gap.max((joint[a][b] - oracle_joint[a][b]).abs());
        }
        marginal_gap = marginal_gap.max((joint[a][0] + joint[a][1] - single[0][a]).abs());
        marginal_gap = marginal_gap.max((joint[0][a] + joint[1][a] - single[1][a]).abs());
    }
    Ok(ContextReport { line, single, joint, oracle_single, oracle_joint, oracle_gap, marginal_gap })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rowwise,
    Columnwise,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub scheme: Scheme,
    /// `[line][position]`
    pub outcomes: [[i8; 3]; 3],
    pub line_products: [i8; 3],
    pub overall: i8,
}

/// Projective measurement of all nine observables, line by line, with the
/// state collapsing after every outcome.
pub fn sequential_measure(rho: &DenseOperator, square: &PMSquare, scheme: Scheme, seed: u64) -> Result<MeasurementRecord> {
    if rho.qubits() != 2 {
        return Err(MeasurementError::Qubits { expected: 2, got: rho.qubits() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = rho.clone();
    let mut outcomes = [[0i8; 3]; 3];
    for (li, out) in outcomes.iter_mut().enumerate() {
        let line = match scheme {
            Scheme::Rowwise => Line::Row(li),
            Scheme::Columnwise => Line::Column(li),
        };
        for (k, p) in square.line(line)?.iter().enumerate() {
            let plus = projector(p, 1);
            let p_plus = plus.matmul(&state).trace().re.clamp(0.0, 1.0);
            let m = if rng.gen::<f64>() < p_plus { 1 } else { -1 };
            let pi = projector(p, m);
            let prob = if m == 1 { p_plus } else { 1.0 - p_plus };
            if prob <= 0.0 {
                return Err(MeasurementError::ZeroProbability);
            }
            state = pi.matmul(&state).matmul(&pi).scale(Complex64::new(1.0 / prob, 0.0));
            out[k] = m;
        }
    }
    let line_products = outcomes.map(|l| l.iter().product());
    let overall = line_products.iter().product();
    Ok(MeasurementRecord { scheme, outcomes, line_products, overall })
}

/// Members must multiply to `product`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub members: Vec<usize>,
    pub product: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentSearch {
    pub observables: usize,
    pub examined: usize,
    pub satisfying: Vec<Vec<i8>>,
}

impl AssignmentSearch {
    pub fn found(&self) -> usize {
        self.satisfying.len()
    }
}

/// Exhaustive search over all `±1` value assignments.
pub fn assignment_search(observables: usize, constraints: &[Constraint]) -> AssignmentSearch {
    assert!(observables < 32, "exhaustive search size");
    let mut satisfying = Vec::new();
    for bits in 0u32..1 << observables {
        let v: Vec<i8> = (0..observables).map(|k| if bits >> k & 1 == 1 { -1 } else { 1 }).collect();
        if constraints.iter().all(|c| c.members.iter().map(|&k| v[k]).product::<i8>() == c.product) {
            satisfying.push(v);
        }
    }
    AssignmentSearch { observables, examined: 1 << observables, satisfying }
}

/// All nine observables against the six line constraints.
pub fn noncontextual_assignment_search(square: &PMSquare) -> AssignmentSearch {
    assignment_search(9, &square.constraints())
}

/// Every commuting pair or triple whose product is `±I`, as a constraint.
pub fn derive_constraints(observables: &[PauliString]) -> Vec<Constraint> {
    let n = observables.len();
    let mut out = Vec::new();
    let sign_of = |members: &[usize]| -> Option<i8> {
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                if !observables[a].commutes_with(&observables[b]) {
                    return None;
                }
            }
        }
        let mut acc = PauliString::identity(observables[0].qubits());
        let mut phase = Complex64::new(1.0, 0.0);
        for &k in members {
            let (p, next) = acc.mul(&observables[k]);
            phase *= p;
            acc = next;
        }
        if !acc.is_identity() {
            return None;
        }
        Some(if (phase.re < 0.0) ^ acc.negative { -1 } else { 1 })
    };
    for a in 0..n {
        for b in a + 1..n {
            if let Some(s) = sign_of(&[a, b]) {
                out.push(Constraint { members: vec![a, b], product: s });
            }
            for c in b + 1..n {
                if let Some(s) = sign_of(&[a, b, c]) {
                    out.push(Constraint { members: vec![a, b, c], product: s });
                }
            }
        }
    }
    out
}

/// One qubit: the six signed Paulis, constrained only by `v(−P) = −v(P)`.
pub fn single_qubit_analog() -> AssignmentSearch {
    let obs: Vec<PauliString> = [false, true]
        .into_iter()
        .flat_map(|neg| [Pauli::X, Pauli::Y, Pauli::Z].map(|l| PauliString::new(neg, vec![l])))
        .collect();
    assignment_search(obs.len(), &derive_constraints(&obs))
}
