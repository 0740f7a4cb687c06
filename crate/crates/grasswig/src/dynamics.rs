//! Quadratic Grassmann Hamiltonians and the flows they generate.
//!
//! A one-qubit Hamiltonian `H = −i(b_p ξ_qξ_r + b_q ξ_rξ_p + b_r ξ_pξ_q)` rotates
//! the generator vector: `dξ/dt = b × ξ`. Its propagator symbol is a closed
//! polynomial, and at gate times the rotation is a signed permutation, which is
//! what makes Clifford gates classical on this phase space.
//!
//! Time evolution of arbitrary symbols uses the star commutator
//! `D f = (i/2)(H ⋆ f − f ⋆ H)`, exponentiated exactly on the finite orbit of
//! monomials it reaches. For the quartic CNOT Hamiltonian this map is linear on
//! monomials but no longer a substitution of generators.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grassmann::{gaussian_integral, GrassmannElement, GrassmannError, Parity};
use crate::oracle::{DenseOperator, GateKind};
use crate::weyl::{moyal_product, operator_from_symbol, WeylError, WeylSymbol};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Coefficients this close to an integer (per component) are snapped to it.
pub const SNAP_TOL: f64 = 1e-9;
/// Below this `|cos(bt/2)|` the tangent form is singular.
pub const CAYLEY_SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("qubit {qubit} out of range for {qubits} qubits")]
    QubitOutOfRange { qubit: usize, qubits: usize },
    #[error("control and target coincide")]
    SameQubits,
    #[error("monomial orbit exceeded {0} elements")]
    OrbitTooLarge(usize),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

/// Levi-Civita symbol on kind offsets `p = 0, q = 1, r = 2`.
pub fn levi_civita(k: usize, l: usize, m: usize) -> f64 {
    match (k, l, m) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn norm3(b: [f64; 3]) -> f64 {
    b.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sign convention of the quartic term in the CNOT Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CnotForm {
    /// `−(i/4)(A + B + iAB)`: quantizes to `−¼(Z_c + X_t + Z_c X_t)`, whose
    /// flow is `Z_c X_t · CNOT` (a NOT conditioned on the control being `|0⟩`,
    /// with an extra `Z` on the control).
    Printed,
    /// `−(i/4)(A + B − iAB) = ¼(1 − iA)(1 − iB) − ¼`: the standard CNOT up to phase.
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HamiltonianForm {
    Harmonic { qubit: usize, b: [f64; 3] },
    Cnot { control: usize, target: usize, form: CnotForm },
}

/// An even, real Grassmann Hamiltonian on `qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicHamiltonian {
    qubits: usize,
    form: HamiltonianForm,
    symbol: GrassmannElement,
}

fn gen(qubit: usize, k: usize) -> usize {
    3 * qubit + k
}

impl HarmonicHamiltonian {
    /// `−(i/2) Σ ε_klm b_k ξ_l ξ_m` on one qubit of a register.
    pub fn harmonic_on(qubits: usize, qubit: usize, b: [f64; 3]) -> Result<Self> {
        if qubit >= qubits {
            return Err(DynamicsError::QubitOutOfRange { qubit, qubits });
        }
        let n = 3 * qubits;
        let mut symbol = GrassmannElement::zero(n);
        for k in 0..3 {
            for l in 0..3 {
                for m in 0..3 {
                    let e = levi_civita(k, l, m);
                    if e != 0.0 {
                        let mono = GrassmannElement::monomial(n, &[gen(qubit, l), gen(qubit, m)], -0.5 * I * e * b[k]);
                        symbol = &symbol + &mono;
                    }
                }
            }
        }
        Ok(Self { qubits, form: HamiltonianForm::Harmonic { qubit, b }, symbol })
    }

    pub fn harmonic(b: [f64; 3]) -> Self {
        Self::harmonic_on(1, 0, b).expect("qubit 0 exists")
    }

    /// `−(i/4)(ξ_{p_c}ξ_{r_c} + ξ_{r_t}ξ_{q_t} ± i ξ_{p_c}ξ_{r_c}ξ_{r_t}ξ_{q_t})`.
    pub fn cnot(qubits: usize, control: usize, target: usize, form: CnotForm) -> Result<Self> {
        for q in [control, target] {
            if q >= qubits {
                return Err(DynamicsError::QubitOutOfRange { qubit: q, qubits });
            }
        }
        if control == target {
            return Err(DynamicsError::SameQubits);
        }
        let n = 3 * qubits;
        let a = GrassmannElement::monomial(n, &[gen(control, 0), gen(control, 2)], ONE);
        let b = GrassmannElement::monomial(n, &[gen(target, 2), gen(target, 1)], ONE);
        let s = match form {
            CnotForm::Printed => I,
            CnotForm::Product => -I,
        };
        let sum = &(&a + &b) + &(&a * &b).scale(s);
        Ok(Self { qubits, form: HamiltonianForm::Cnot { control, target, form }, symbol: sum.scale(-0.25 * I) })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn form(&self) -> &HamiltonianForm {
        &self.form
    }

    pub fn symbol(&self) -> &GrassmannElement {
        &self.symbol
    }

    pub fn weyl_symbol(&self) -> WeylSymbol {
        WeylSymbol::new(self.symbol.clone(), self.qubits).expect("even by construction")
    }

    /// The field `b` of a one-qubit Hamiltonian.
    pub fn field(&self) -> Option<[f64; 3]> {
        match self.form {
            HamiltonianForm::Harmonic { b, .. } => Some(b),
            HamiltonianForm::Cnot { .. } => None,
        }
    }

    pub fn is_real(&self) -> bool {
        self.symbol.conjugate().approx_eq(&self.symbol, 1e-15)
    }

    pub fn is_even(&self) -> bool {
        self.symbol.parity() == Parity::Even
    }

    pub fn operator(&self) -> DenseOperator {
        operator_from_symbol(&self.weyl_symbol())
    }
}

/// Real `3n×3n` matrix acting on the generator column.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionMatrix {
    pub matrix: DMatrix<f64>,
    pub duration: f64,
}

impl EvolutionMatrix {
    pub fn is_orthogonal(&self, tol: f64) -> bool {
        let n = self.matrix.nrows();
        (self.matrix.transpose() * &self.matrix - DMatrix::<f64>::identity(n, n)).amax() <= tol
    }

    /// Substitution `ξ_l ↦ Σ_m 𝓔_lm ξ_m` as a generator map.
    pub fn to_generator_map(&self) -> GeneratorMap {
        let n = self.matrix.nrows();
        let images = (0..n)
            .map(|l| GrassmannElement::from_terms(n, (0..n).map(|m| (1u128 << m, Complex64::new(self.matrix[(l, m)], 0.0)))))
            .collect();
        GeneratorMap { qubits: n / 3, images, action: MapAction::Substitution }
    }
}

/// `A_lm = −Σ_k ε_klm b_k`, so that `Aξ = b × ξ`.
pub fn generator_matrix(b: [f64; 3]) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |l, m| -(0..3).map(|k| levi_civita(k, l, m) * b[k]).sum::<f64>())
}

/// Antisymmetric Cayley parameter `B = tan(bt/2) A / b`, or `None` at the
/// singular point `cos(bt/2) = 0`.
pub fn cayley_parameter(b: [f64; 3], t: f64) -> Option<DMatrix<f64>> {
    let bn = norm3(b);
    if bn == 0.0 {
        return Some(DMatrix::zeros(3, 3));
    }
    let half = bn * t / 2.0;
    if half.cos().abs() < CAYLEY_SINGULAR_TOL {
        return None;
    }
    Some(generator_matrix(b) * (half.tan() / bn))
}

/// `𝓔 = exp(tA)`, computed as `(I + B)(I − B)⁻¹` when the Cayley form exists.
pub fn cayley_evolution_matrix(b: [f64; 3], t: f64) -> EvolutionMatrix {
    let id = DMatrix::<f64>::identity(3, 3);
    let matrix = match cayley_parameter(b, t) {
        Some(bm) => {
            let inv = (&id - &bm).try_inverse().expect("I − B is invertible for antisymmetric B");
            (&id + &bm) * inv
        }
        None => (generator_matrix(b) * t).exp(),
    };
    EvolutionMatrix { matrix, duration: t }
}

/// Propagator symbol `cos(bt/2) + sin(bt/2) Σ_cyc n_k ξ_l ξ_m`.
///
/// Quantizes to `exp(−(i/2) t b·ξ̂)`. The closed form has no singularity; at
/// regular points it equals `cos(bt/2) · exp(−½ Σ B_lm ξ_l ξ_m)`.
pub fn propagator_symbol(b: [f64; 3], t: f64) -> WeylSymbol {
    let bn = norm3(b);
    let half = bn * t / 2.0;
    let mut g = GrassmannElement::scalar(3, Complex64::new(half.cos(), 0.0));
    if bn > 0.0 {
        for k in 0..3 {
            let (l, m) = ((k + 1) % 3, (k + 2) % 3);
            g = &g + &GrassmannElement::monomial(3, &[l, m], Complex64::new(half.sin() * b[k] / bn, 0.0));
        }
    }
    WeylSymbol::new(g, 1).expect("even symbol")
}

/// Cayley form of the propagator, `None` at the singular point.
pub fn propagator_symbol_cayley(b: [f64; 3], t: f64) -> Option<WeylSymbol> {
    let bm = cayley_parameter(b, t)?;
    let half = norm3(b) * t / 2.0;
    let mut exponent = GrassmannElement::zero(3);
    for l in 0..3 {
        for m in 0..3 {
            if l != m {
                exponent = &exponent + &GrassmannElement::monomial(3, &[l, m], Complex64::new(-0.5 * bm[(l, m)], 0.0));
            }
        }
    }
    let g = exponent.exp().scale(Complex64::new(half.cos(), 0.0));
    Some(WeylSymbol::new(g, 1).expect("even symbol"))
}

/// Prefactor `|𝓝|` from the Grassmann Gaussian over `(ξ′, ξ″)` with
/// quadratic form `[[cB, ½], [−½, cB]]`, `c = i/2`: `|𝓝| = (∫)^{-1/2}`.
pub fn van_vleck_prefactor(b: [f64; 3], t: f64) -> f64 {
    let Some(bm) = cayley_parameter(b, t) else { return 0.0 };
    let c = 0.5 * I;
    let a = DMatrix::from_fn(6, 6, |r, s| match (r / 3, s / 3) {
        (0, 0) | (1, 1) => c * bm[(r % 3, s % 3)],
        (0, 1) if r % 3 == s % 3 => Complex64::new(0.5, 0.0),
        (1, 0) if r % 3 == s % 3 => Complex64::new(-0.5, 0.0),
        _ => Complex64::new(0.0, 0.0),
    });
    let gi = gaussian_integral(&a).expect("antisymmetric by construction");
    gi.closed_form.powf(-0.5)
}

/// `(i/2)(H ⋆ f − f ⋆ H)`.
pub fn star_commutator(h: &HarmonicHamiltonian, f: &WeylSymbol) -> Result<GrassmannElement> {
    let hs = h.weyl_symbol();
    let left = moyal_product(&hs, f)?;
    let right = moyal_product(f, &hs)?;
    Ok((left.element() - right.element()).scale(0.5 * I))
}

/// Largest monomial orbit the exact flow will build.
pub const MAX_ORBIT: usize = 4096;

fn snap(c: Complex64) -> Complex64 {
    let s = |x: f64| if (x - x.round()).abs() < SNAP_TOL { x.round() + 0.0 } else { x };
    Complex64::new(s(c.re), s(c.im))
}

/// `exp(t D) g`, with `D` the star commutator, solved on the finite orbit.
pub fn evolve_element(h: &HarmonicHamiltonian, t: f64, g: &GrassmannElement) -> Result<GrassmannElement> {
    let n = 3 * h.qubits();
    if g.num_generators() != n {
        return Err(GrassmannError::Mismatch { left: g.num_generators(), right: n }.into());
    }
    let mut images: BTreeMap<u128, GrassmannElement> = BTreeMap::new();
    let mut order: Vec<u128> = g.terms().map(|(m, _)| m).collect();
    let mut next = 0;
    while next < order.len() {
        let m = order[next];
        next += 1;
        let mono = WeylSymbol::new(GrassmannElement::from_terms(n, [(m, ONE)]), h.qubits())?;
        let d = star_commutator(h, &mono)?;
        for (mm, _) in d.terms() {
            if !images.contains_key(&mm) && !order.contains(&mm) {
                order.push(mm);
                if order.len() > MAX_ORBIT {
                    return Err(DynamicsError::OrbitTooLarge(MAX_ORBIT));
                }
            }
        }
        images.insert(m, d);
    }
    let dim = order.len();
    let index: BTreeMap<u128, usize> = order.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut gen_m = DMatrix::<Complex64>::zeros(dim, dim);
    for (col, m) in order.iter().enumerate() {
        for (mm, v) in images[m].terms() {
            gen_m[(index[&mm], col)] += v;
        }
    }
    let flow = (gen_m * Complex64::new(t, 0.0)).exp();
    let mut v = DMatrix::<Complex64>::zeros(dim, 1);
    for (m, c) in g.terms() {
        v[(index[&m], 0)] = c;
    }
    let w = flow * v;
    Ok(GrassmannElement::from_terms(n, order.iter().enumerate().map(|(i, m)| (*m, snap(w[(i, 0)])))))
}

#[derive(Debug, Clone, PartialEq)]
enum MapAction {
    Identity,
    Substitution,
    Flow { hamiltonian: HarmonicHamiltonian, duration: f64 },
}

/// Images of every state generator under an evolution, plus the rule for
/// evolving any other element.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMap {
    qubits: usize,
    images: Vec<GrassmannElement>,
    action: MapAction,
}

impl GeneratorMap {
    pub fn identity(qubits: usize) -> Self {
        let n = 3 * qubits;
        Self { qubits, images: (0..n).map(|k| GrassmannElement::generator(n, k)).collect(), action: MapAction::Identity }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn images(&self) -> &[GrassmannElement] {
        &self.images
    }

    pub fn image(&self, pos: usize) -> &GrassmannElement {
        &self.images[pos]
    }

    /// Evolve an arbitrary element.
    pub fn apply(&self, g: &GrassmannElement) -> Result<GrassmannElement> {
        match &self.action {
            MapAction::Identity => Ok(g.clone()),
            MapAction::Substitution => Ok(g.substitute(&self.images)?),
            MapAction::Flow { hamiltonian, duration } => evolve_element(hamiltonian, *duration, g),
        }
    }
}

/// Generator images under `exp(tD)`.
pub fn evolve_generators(h: &HarmonicHamiltonian, t: f64) -> Result<GeneratorMap> {
    let n = 3 * h.qubits();
    let images = (0..n).map(|k| evolve_element(h, t, &GrassmannElement::generator(n, k))).collect::<Result<Vec<_>>>()?;
    Ok(GeneratorMap { qubits: h.qubits(), images, action: MapAction::Flow { hamiltonian: h.clone(), duration: t } })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderClass {
    /// Every generator goes to a unit-modulus multiple of one monomial.
    Hbar0Permutation,
    /// Some generator goes to a genuine superposition.
    Hbar1General,
}

pub fn classify_order(map: &GeneratorMap) -> OrderClass {
    let single = |g: &GrassmannElement| {
        let terms: Vec<_> = g.terms().collect();
        terms.len() == 1 && (terms[0].1.norm() - 1.0).abs() < SNAP_TOL
    };
    if map.images().iter().all(single) {
        OrderClass::Hbar0Permutation
    } else {
        OrderClass::Hbar1General
    }
}

/// Gate Hamiltonian and duration. One-qubit gates act on qubit 0; the CNOT
/// uses the printed quartic form with control on qubit 1 and target on qubit 0.
pub fn gate_hamiltonian(gate: GateKind) -> (HarmonicHamiltonian, f64) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match gate {
        GateKind::H => (HarmonicHamiltonian::harmonic([-s, -s, 0.0]), PI),
        GateKind::P => (HarmonicHamiltonian::harmonic([0.0, -1.0, 0.0]), FRAC_PI_2),
        GateKind::T => (HarmonicHamiltonian::harmonic([0.0, -0.5, 0.0]), FRAC_PI_2),
        GateKind::Cnot => (HarmonicHamiltonian::cnot(2, 1, 0, CnotForm::Printed).expect("two qubits"), CNOT_DURATION),
    }
}

/// The quartic CNOT flow closes after `2π` with the `(i/2)` commutator scale.
pub const CNOT_DURATION: f64 = 2.0 * PI;

/// CNOT Hamiltonian in the product form on arbitrary qubits.
pub fn cnot_hamiltonian(qubits: usize, control: usize, target: usize) -> Result<(HarmonicHamiltonian, f64)> {
    Ok((HarmonicHamiltonian::cnot(qubits, control, target, CnotForm::Product)?, CNOT_DURATION))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{random_density, random_operator, Gate};
    use crate::weyl::symbol_from_operator;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    const P: usize = 0;
    const Q: usize = 1;
    const R: usize = 2;

    fn x(n: usize, k: usize) -> GrassmannElement {
        GrassmannElement::generator(n, k)
    }

    fn mono(n: usize, f: &[usize], c: Complex64) -> GrassmannElement {
        GrassmannElement::monomial(n, f, c)
    }

    fn random_b(rng: &mut impl Rng) -> [f64; 3] {
        [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
    }

    /// Equal up to a global phase.
    fn same_up_to_phase(a: &DenseOperator, b: &DenseOperator) -> bool {
        let k = (0..a.dim()).flat_map(|r| (0..a.dim()).map(move |c| (r, c))).find(|&(r, c)| b.get(r, c).norm() > 1e-6);
        let Some((r, c)) = k else { return false };
        let phase = a.get(r, c) / b.get(r, c);
        (phase.norm() - 1.0).abs() < 1e-9 && a.approx_eq(&b.scale(phase), 1e-9)
    }

    #[test]
    fn gate_hamiltonians_match_printed_symbols() {
        let s = FRAC_1_SQRT_2;
        let (h, t) = gate_hamiltonian(GateKind::H);
        let expect = &mono(3, &[R, Q], -I * s) + &mono(3, &[P, R], -I * s);
        assert!(h.symbol().approx_eq(&expect, 1e-15));
        assert_eq!(t, PI);
        let (p, t) = gate_hamiltonian(GateKind::P);
        assert!(p.symbol().approx_eq(&mono(3, &[P, R], -I), 1e-15));
        assert_eq!(t, FRAC_PI_2);
        let (tg, _) = gate_hamiltonian(GateKind::T);
        assert!(tg.symbol().approx_eq(&mono(3, &[P, R], -0.5 * I), 1e-15));
        for g in [GateKind::H, GateKind::P, GateKind::T, GateKind::Cnot] {
            let (h, _) = gate_hamiltonian(g);
            assert!(h.is_real() && h.is_even());
        }
    }

    #[test]
    fn gate_propagators_match_oracle() {
        for (kind, gate) in [(GateKind::H, Gate::H(0)), (GateKind::P, Gate::P(0)), (GateKind::T, Gate::T(0))] {
            let (h, t) = gate_hamiltonian(kind);
            let u = operator_from_symbol(&propagator_symbol(h.field().unwrap(), t));
            assert!(same_up_to_phase(&u, &gate.unitary(1).unwrap()), "{kind:?}");
        }
    }

    #[test]
    fn cnot_operators() {
        let (pr, t) = cnot_hamiltonian(2, 1, 0).unwrap();
        let u = exp_i_half(&pr.operator(), t);
        assert!(same_up_to_phase(&u, &Gate::Cnot { control: 1, target: 0 }.unitary(2).unwrap()));
        let (printed, t) = gate_hamiltonian(GateKind::Cnot);
        let u = exp_i_half(&printed.operator(), t);
        let xt = Gate::H(0).unitary(2).unwrap();
        let x0 = xt.matmul(&Gate::P(0).unitary(2).unwrap().matmul(&Gate::P(0).unitary(2).unwrap())).matmul(&xt);
        let z1 = Gate::P(1).unitary(2).unwrap();
        let z1 = z1.matmul(&z1);
        let expect = z1.matmul(&x0).matmul(&Gate::Cnot { control: 1, target: 0 }.unitary(2).unwrap());
        assert!(same_up_to_phase(&u, &expect));
    }

    /// `exp(i t Ĥ / 2)` for Hermitian `Ĥ`, by eigendecomposition.
    fn exp_i_half(h: &DenseOperator, t: f64) -> DenseOperator {
        let m = h.to_dmatrix();
        let e = (m * Complex64::new(0.0, t / 2.0)).exp();
        DenseOperator::from_dmatrix(&e)
    }

    #[test]
    fn cayley_examples() {
        let s = FRAC_1_SQRT_2;
        let e = cayley_evolution_matrix([-s, -s, 0.0], PI);
        let expect = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        assert!((&e.matrix - &expect).amax() < 1e-12);
        let e = cayley_evolution_matrix([0.0, -1.0, 0.0], FRAC_PI_2);
        let expect = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        assert!((&e.matrix - &expect).amax() < 1e-12);
        let e = cayley_evolution_matrix([0.3, 0.2, -0.9], 0.0);
        assert!((&e.matrix - DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn cayley_agrees_with_exponential_and_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..50 {
            let b = random_b(&mut rng);
            let t = rng.gen_range(-3.0..3.0);
            let e = cayley_evolution_matrix(b, t);
            assert!((&e.matrix - (generator_matrix(b) * t).exp()).amax() < 1e-10);
            assert!(e.is_orthogonal(1e-12));
        }
    }

    #[test]
    fn propagator_examples() {
        assert!(propagator_symbol([0.4, 0.1, 0.3], 0.0).element().approx_eq(&GrassmannElement::one(3), 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let b = random_b(&mut rng);
            let t = rng.gen_range(-4.0..4.0);
            let u = propagator_symbol(b, t);
            let ud = WeylSymbol::new(u.element().conjugate(), 1).unwrap();
            assert!(moyal_product(&u, &ud).unwrap().element().approx_eq(&GrassmannElement::one(3), 1e-12));
            let map = crate::weyl::QuantizationMap::global();
            let bm = crate::grassmann::Kind::ALL.iter().fold(DMatrix::<Complex64>::zeros(2, 2), |acc, &k| {
                acc + map.matrix(k).to_dmatrix() * Complex64::new(b[k.offset()], 0.0)
            });
            let dense = DenseOperator::from_dmatrix(&(bm * Complex64::new(0.0, -t / 2.0)).exp());
            assert!(operator_from_symbol(&u).approx_eq(&dense, 1e-9));
            if let Some(cf) = propagator_symbol_cayley(b, t) {
                assert!(cf.approx_eq(&u, 1e-9));
            }
        }
    }

    #[test]
    fn prefactor_is_abs_cos() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..50 {
            let b = random_b(&mut rng);
            let t = rng.gen_range(-4.0..4.0);
            let expect = (norm3(b) * t / 2.0).cos().abs();
            assert!((van_vleck_prefactor(b, t) - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn propagator_conjugation_matches_substitution() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let b = random_b(&mut rng);
            let t = rng.gen_range(-3.0..3.0);
            let u = propagator_symbol(b, t);
            let ud = WeylSymbol::new(u.element().conjugate(), 1).unwrap();
            let g = symbol_from_operator(&random_density(1, &mut rng));
            let e = cayley_evolution_matrix(b, t).to_generator_map();
            let sub = e.apply(g.element()).unwrap();
            let forward = moyal_product(&moyal_product(&u, &g).unwrap(), &ud).unwrap();
            assert!(forward.element().approx_eq(&sub, 1e-9));
            let backward = moyal_product(&moyal_product(&ud, &g).unwrap(), &u).unwrap();
            let et = EvolutionMatrix { matrix: cayley_evolution_matrix(b, t).matrix.transpose(), duration: t };
            assert!(backward.element().approx_eq(&et.to_generator_map().apply(g.element()).unwrap(), 1e-9));
        }
    }

    #[test]
    fn star_flow_matches_rotation_for_quadratic_hamiltonians() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..10 {
            let b = random_b(&mut rng);
            let t = rng.gen_range(-3.0..3.0);
            let h = HarmonicHamiltonian::harmonic(b);
            let flow = evolve_generators(&h, t).unwrap();
            let rot = cayley_evolution_matrix(b, t).to_generator_map();
            for k in 0..3 {
                assert!(flow.image(k).approx_eq(rot.image(k), 1e-9));
            }
            let g = symbol_from_operator(&random_operator(1, &mut rng));
            assert!(flow.apply(g.element()).unwrap().approx_eq(&rot.apply(g.element()).unwrap(), 1e-9));
        }
    }

    #[test]
    fn gate_generator_maps() {
        let s = FRAC_1_SQRT_2;
        let images = |kind| {
            let (h, t) = gate_hamiltonian(kind);
            evolve_generators(&h, t).unwrap()
        };
        let hmap = images(GateKind::H);
        assert_eq!(hmap.images(), &[x(3, Q), x(3, P), x(3, R).scale(-ONE)]);
        let pmap = images(GateKind::P);
        assert_eq!(pmap.images(), &[x(3, R).scale(-ONE), x(3, Q), x(3, P)]);
        let tmap = images(GateKind::T);
        let c = Complex64::new(s, 0.0);
        assert!(tmap.image(P).approx_eq(&(&x(3, P) - &x(3, R)).scale(c), 1e-12));
        assert!(tmap.image(Q).approx_eq(&x(3, Q), 1e-12));
        assert!(tmap.image(R).approx_eq(&(&x(3, P) + &x(3, R)).scale(c), 1e-12));
        assert_eq!(classify_order(&hmap), OrderClass::Hbar0Permutation);
        assert_eq!(classify_order(&pmap), OrderClass::Hbar0Permutation);
        assert_eq!(classify_order(&tmap), OrderClass::Hbar1General);
        assert_eq!(classify_order(&GeneratorMap::identity(2)), OrderClass::Hbar0Permutation);
    }

    #[test]
    fn cnot_maps_are_involutions() {
        for form in [CnotForm::Printed, CnotForm::Product] {
            let h = HarmonicHamiltonian::cnot(2, 1, 0, form).unwrap();
            let map = evolve_generators(&h, CNOT_DURATION).unwrap();
            assert_eq!(classify_order(&map), OrderClass::Hbar0Permutation);
            for k in 0..6 {
                let twice = map.apply(map.image(k)).unwrap();
                assert_eq!(twice, x(6, k), "{form:?} generator {k}");
            }
        }
    }

    #[test]
    fn errors() {
        assert_eq!(HarmonicHamiltonian::cnot(2, 1, 1, CnotForm::Product), Err(DynamicsError::SameQubits));
        assert!(matches!(HarmonicHamiltonian::harmonic_on(1, 3, [0.0; 3]), Err(DynamicsError::QubitOutOfRange { .. })));
    }
}
