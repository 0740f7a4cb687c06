//! Weyl symbols on the three-generator phase space.
//!
//! An operator on `n` qubits is represented by a Grassmann polynomial in the
//! `3n` state generators. The even ("center") symbol is canonical; the odd
//! ("chord"-like) symbol is its dual and is what observables use inside the
//! trace functional. Quantization replaces each generator `ξ_k` of a qubit by
//! the signed Pauli matrix `M(k)` found by [`QuantizationMap::solve`].
//!
//! The module also builds the translation and reflection operators as
//! [`GrassmannMatrix`] values: small complex matrices whose entries are
//! Grassmann elements that commute with the matrix factors.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grassmann::{
    fourier_with_factor, merge_sign, Direction, GrassmannElement, GrassmannError, Kind, Layout, Parity, Space,
};
use crate::oracle::{random_operator, DenseOperator, Pauli, PauliString};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Star products need `ξ, ξ′, ξ″` blocks side by side in one bitmask.
pub const MAX_STAR_QUBITS: usize = 42;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeylError {
    #[error("qubit counts differ: {0} vs {1}")]
    QubitMismatch(usize, usize),
    #[error("element has {got} generators, expected {expected}")]
    GeneratorCount { expected: usize, got: usize },
    #[error("symbol mixes even and odd degrees")]
    MixedParity,
    #[error("expected a {expected:?} symbol")]
    WrongParity { expected: Parity },
    #[error("{0} qubits exceed the star-product limit")]
    TooManyQubits(usize),
    #[error("matrix exponential needs a nilpotent argument")]
    NotNilpotent,
    #[error("matrix sizes differ: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

pub type Result<T> = std::result::Result<T, WeylError>;

/// Signed Pauli image of each generator kind: `ξ̂_k = sign · letter`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizationMap {
    images: [(bool, Pauli); 3],
}

impl QuantizationMap {
    /// Exhaustive search over the 48 signed assignments of distinct letters.
    ///
    /// Constraints: `i M(p) M(q) M(r) = 1`, and the bilinears
    /// `i ξ_p ξ_r`, `i ξ_r ξ_q`, `i ξ_p ξ_q` quantize to `Z`, `X`, `Y`.
    pub fn solve() -> Vec<QuantizationMap> {
        let letters = [Pauli::X, Pauli::Y, Pauli::Z];
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut found = Vec::new();
        for perm in perms {
            for signs in 0..8u8 {
                let map = QuantizationMap { images: [0, 1, 2].map(|k| (signs >> k & 1 == 1, letters[perm[k]])) };
                if map.satisfies_constraints() {
                    found.push(map);
                }
            }
        }
        found
    }

    /// The unique solution, computed once.
    pub fn global() -> &'static QuantizationMap {
        static MAP: OnceLock<QuantizationMap> = OnceLock::new();
        MAP.get_or_init(|| {
            let found = Self::solve();
            assert_eq!(found.len(), 1, "quantization constraints must have exactly one solution");
            found[0]
        })
    }

    fn satisfies_constraints(&self) -> bool {
        let [p, q, r] = Kind::ALL.map(|k| self.matrix(k));
        let id = DenseOperator::identity(1);
        let pauli = |l: Pauli| PauliString::new(false, vec![l]).matrix();
        let i = |m: DenseOperator| m.scale(I);
        i(p.matmul(&q).matmul(&r)).approx_eq(&id, 1e-12)
            && i(p.matmul(&r)).approx_eq(&pauli(Pauli::Z), 1e-12)
            && i(r.matmul(&q)).approx_eq(&pauli(Pauli::X), 1e-12)
            && i(p.matmul(&q)).approx_eq(&pauli(Pauli::Y), 1e-12)
    }

    /// `(negative, letter)` for a generator kind.
    pub fn image(&self, kind: Kind) -> (bool, Pauli) {
        self.images[kind.offset()]
    }

    pub fn matrix(&self, kind: Kind) -> DenseOperator {
        let (neg, l) = self.image(kind);
        PauliString::new(neg, vec![l]).matrix()
    }

    /// Product of generator matrices for a one-qubit monomial (bits p, q, r).
    pub fn monomial_matrix(&self, mask: u8) -> DenseOperator {
        Kind::ALL
            .iter()
            .filter(|k| mask >> k.offset() & 1 == 1)
            .fold(DenseOperator::identity(1), |acc, &k| acc.matmul(&self.matrix(k)))
    }

    /// One-qubit symbol of a Pauli letter using monomials of the given parity.
    ///
    /// Even: `I ↦ 1` and each letter becomes `±i ξ_l ξ_m`. Odd: `I ↦ i ξ_p ξ_q ξ_r`
    /// and each letter becomes `±ξ_k`.
    pub fn pauli_symbol(&self, letter: Pauli, parity: Parity) -> GrassmannElement {
        let want = if parity == Parity::Odd { 1 } else { 0 };
        let target = PauliString::new(false, vec![letter]).matrix();
        for mask in 0u8..8 {
            if mask.count_ones() % 2 != want {
                continue;
            }
            // Monomial matrix = λ P with λ a fourth root of unity, so the symbol is P = λ⁻¹ · monomial.
            let lambda = target.matmul(&self.monomial_matrix(mask)).trace() / 2.0;
            if (lambda.norm() - 1.0).abs() < 1e-12 {
                return GrassmannElement::from_terms(3, [(mask as u128, lambda.inv())]);
            }
        }
        unreachable!("every Pauli letter has a monomial of each parity")
    }
}

/// A homogeneous Grassmann polynomial in `3n` state generators.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylSymbol {
    element: GrassmannElement,
    parity: Parity,
    qubits: usize,
}

impl WeylSymbol {
    pub fn new(element: GrassmannElement, qubits: usize) -> Result<Self> {
        if element.num_generators() != 3 * qubits {
            return Err(WeylError::GeneratorCount { expected: 3 * qubits, got: element.num_generators() });
        }
        let parity = element.parity();
        if parity == Parity::Mixed {
            return Err(WeylError::MixedParity);
        }
        Ok(Self { element, parity, qubits })
    }

    pub fn element(&self) -> &GrassmannElement {
        &self.element
    }

    pub fn into_element(self) -> GrassmannElement {
        self.element
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.qubits == other.qubits && self.element.approx_eq(&other.element, tol)
    }
}

/// Product over qubits of per-qubit symbols, qubit 0 leftmost.
/// Symbol of an unsigned Pauli word: product of per-qubit letter symbols, qubit 0 leftmost.
pub fn word_symbol(word: &PauliString, parity: Parity) -> GrassmannElement {
    let n = word.qubits();
    let map = QuantizationMap::global();
    word.letters.iter().enumerate().fold(GrassmannElement::one(3 * n), |acc, (q, &l)| {
        let local = map.pauli_symbol(l, parity).shifted(3 * n, 3 * q);
        &acc * &local
    })
}

/// Odd dual of an even symbol whose monomials are per-qubit bilinears, so
/// that `expectation(state, dual(Π))` is `Tr(ρ Π)`.
pub fn dual_symbol(s: &WeylSymbol) -> Result<WeylSymbol> {
    if s.parity() != Parity::Even {
        return Err(WeylError::WrongParity { expected: Parity::Even });
    }
    let n = s.qubits();
    let mut acc = GrassmannElement::zero(3 * n);
    for (mask, c) in s.element().terms() {
        let letters = (0..n)
            .map(|q| match mask >> (3 * q) & 7 {
                0 => Ok(Pauli::I),
                0b110 => Ok(Pauli::X),
                0b011 => Ok(Pauli::Y),
                0b101 => Ok(Pauli::Z),
                _ => Err(WeylError::WrongParity { expected: Parity::Even }),
            })
            .collect::<Result<Vec<_>>>()?;
        let word = PauliString::new(false, letters);
        let base = word_symbol(&word, Parity::Even).coeff(mask);
        acc = &acc + &word_symbol(&word, Parity::Odd).scale(c / base);
    }
    WeylSymbol::new(acc, n)
}

fn symbol_with_parity(op: &DenseOperator, parity: Parity) -> GrassmannElement {
    let n = op.qubits();
    let norm = 1.0 / op.dim() as f64;
    let mut acc = GrassmannElement::zero(3 * n);
    for (w, c) in op.pauli_coefficients().into_iter().enumerate() {
        if c.norm() < 1e-15 {
            continue;
        }
        let word = PauliString::from_word_index(n, w, false);
        acc = &acc + &word_symbol(&word, parity).scale(c * norm);
    }
    acc
}

/// Even (center) symbol: Pauli expansion with each letter dequantized.
pub fn symbol_from_operator(op: &DenseOperator) -> WeylSymbol {
    WeylSymbol::new(symbol_with_parity(op, Parity::Even), op.qubits()).expect("even by construction")
}

/// Odd dual symbol used for observables (per-qubit odd factors, qubit 0 leftmost).
pub fn odd_symbol_from_operator(op: &DenseOperator) -> WeylSymbol {
    let g = symbol_with_parity(op, Parity::Odd);
    WeylSymbol::new(g, op.qubits()).expect("homogeneous by construction")
}

/// Quantization: each monomial becomes the tensor product of per-qubit
/// generator-matrix products.
pub fn operator_from_symbol(s: &WeylSymbol) -> DenseOperator {
    let n = s.qubits();
    let map = QuantizationMap::global();
    let locals: Vec<DenseOperator> = (0..8u8).map(|m| map.monomial_matrix(m)).collect();
    let mut acc = DenseOperator::zero(n);
    for (mask, c) in s.element().terms() {
        let mut term = DenseOperator::identity(0);
        for q in 0..n {
            term = term.kron(&locals[(mask >> (3 * q) & 7) as usize]);
        }
        acc = acc.add(&term.scale(c));
    }
    acc
}

fn mono_mul(a: (u128, Complex64), b: (u128, Complex64)) -> Option<(u128, Complex64)> {
    if a.0 & b.0 != 0 {
        return None;
    }
    Some((a.0 | b.0, a.1 * b.1 * merge_sign(a.0, b.0)))
}

fn mono_integrate(mut m: (u128, Complex64), order: &[usize]) -> Option<(u128, Complex64)> {
    for &l in order {
        let bit = 1u128 << l;
        if m.0 & bit == 0 {
            return None;
        }
        if ((m.0 >> l) >> 1).count_ones() % 2 == 1 {
            m.1 = -m.1;
        }
        m.0 &= !bit;
    }
    Some(m)
}

/// Star product with an explicit exponent constant `c` in `exp(cΔ)`.
///
/// Every term pair contributes a single monomial: for each generator the
/// Berezin integrals over `ξ′, ξ″` need exactly one factor of each, so the
/// exponential contributes the unique bilinear that supplies what is missing.
pub fn moyal_product_with(a: &WeylSymbol, b: &WeylSymbol, c: Complex64) -> Result<WeylSymbol> {
    if a.qubits() != b.qubits() {
        return Err(WeylError::QubitMismatch(a.qubits(), b.qubits()));
    }
    let n = a.qubits();
    if n > MAX_STAR_QUBITS {
        return Err(WeylError::TooManyQubits(n));
    }
    let big = 3 * n;
    // Per qubit: the primed triple then the double-primed triple, each r, q, p.
    let order: Vec<usize> = (0..n)
        .flat_map(|q| {
            let t = 3 * q;
            [big + t + 2, big + t + 1, big + t, 2 * big + t + 2, 2 * big + t + 1, 2 * big + t]
        })
        .collect();
    let mut out: BTreeMap<u128, Complex64> = BTreeMap::new();
    for (ma, va) in a.element().terms() {
        for (mb, vb) in b.element().terms() {
            let Some(mut acc) = mono_mul((ma << big, va), (mb << (2 * big), vb)) else { continue };
            let mut alive = true;
            for k in 0..big {
                let (ina, inb) = (ma >> k & 1 == 1, mb >> k & 1 == 1);
                let f = match (ina, inb) {
                    (true, true) => continue,
                    (false, false) => (1u128 << (big + k)) | (1u128 << (2 * big + k)),
                    (false, true) => (1u128 << k) | (1u128 << (big + k)),
                    (true, false) => (1u128 << (2 * big + k)) | (1u128 << k),
                };
                // Two-generator monomial written in its own order: ξ_a ξ_b with a < b is canonical.
                let (lo, hi) = (f.trailing_zeros() as usize, 127 - f.leading_zeros() as usize);
                let first = match (ina, inb) {
                    (false, false) => big + k,
                    (false, true) => k,
                    _ => 2 * big + k,
                };
                let sign = if first == lo { 1.0 } else { -1.0 };
                debug_assert!(first == lo || first == hi);
                match mono_mul(acc, (f, c * sign)) {
                    Some(t) => acc = t,
                    None => {
                        alive = false;
                        break;
                    }
                }
            }
            if !alive {
                continue;
            }
            if let Some((m, v)) = mono_integrate(acc, &order) {
                *out.entry(m).or_insert(ZERO) += v;
            }
        }
    }
    let element = GrassmannElement::from_terms(big, out);
    WeylSymbol::new(element, n)
}

/// Candidate exponent constants, with `ħ = 2`.
pub const STAR_CONSTANT_CANDIDATES: [Complex64; 12] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(0.0, -1.0),
    Complex64::new(2.0, 0.0),
    Complex64::new(-2.0, 0.0),
    Complex64::new(0.5, 0.0),
    Complex64::new(-0.5, 0.0),
    Complex64::new(0.0, 0.5),
    Complex64::new(0.0, -0.5),
    Complex64::new(0.0, 2.0),
    Complex64::new(0.0, -2.0),
];

/// Exponent constants that make the star product reproduce matrix products
/// on a fixed batch of random one-qubit operators.
pub fn solve_star_constant() -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let pairs: Vec<(DenseOperator, DenseOperator)> =
        (0..4).map(|_| (random_operator(1, &mut rng), random_operator(1, &mut rng))).collect();
    STAR_CONSTANT_CANDIDATES
        .iter()
        .copied()
        .filter(|&c| {
            pairs.iter().all(|(a, b)| {
                let star = moyal_product_with(&symbol_from_operator(a), &symbol_from_operator(b), c).expect("same size");
                star.approx_eq(&symbol_from_operator(&a.matmul(b)), 1e-9)
            })
        })
        .collect()
}

/// The exponent constant, fixed once against the oracle.
pub fn star_constant() -> Complex64 {
    static C: OnceLock<Complex64> = OnceLock::new();
    *C.get_or_init(|| {
        let found = solve_star_constant();
        assert_eq!(found.len(), 1, "star-product constant must be unique among candidates");
        found[0]
    })
}

/// Moyal star product: `symbol(A) ⋆ symbol(B) = symbol(AB)`.
pub fn moyal_product(a: &WeylSymbol, b: &WeylSymbol) -> Result<WeylSymbol> {
    moyal_product_with(a, b, star_constant())
}

/// Integration order of the trace functional: per qubit `r, p, q`, last qubit first.
pub fn trace_order(qubits: usize) -> Vec<usize> {
    (0..qubits).rev().flat_map(|q| [3 * q + 2, 3 * q, 3 * q + 1]).collect()
}

/// `(2i)ⁿ ∫ state · observable` over all state generators.
pub fn expectation(state: &WeylSymbol, observable: &WeylSymbol) -> Result<Complex64> {
    if state.qubits() != observable.qubits() {
        return Err(WeylError::QubitMismatch(state.qubits(), observable.qubits()));
    }
    let n = state.qubits();
    let prod = state.element().try_mul(observable.element())?;
    let top = prod.integrate(&trace_order(n))?;
    Ok(top.scalar_part() * (2.0 * I).powu(n as u32))
}

/// `g = even + odd`.
pub fn parity_split(g: &GrassmannElement) -> (GrassmannElement, GrassmannElement) {
    g.parity_split()
}

/// Per-qubit constant of the textbook inverse transform; it differs from the
/// round-trip constant by a sign.
pub const CHORD_FACTOR: Complex64 = I;

/// Chord function `g̃`: inverse Fourier transform of the center symbol, written
/// back on the state generators.
pub fn chord_symbol(s: &WeylSymbol) -> Result<GrassmannElement> {
    let n = s.qubits();
    let layout = Layout::new(n, 1)?;
    let lifted = s.element().resized(layout.num_generators())?;
    let out = fourier_with_factor(&lifted, &layout, Direction::Inverse, CHORD_FACTOR)?;
    let big = 3 * n;
    Ok(GrassmannElement::from_terms(big, out.terms().map(|(m, c)| (m >> big, c))))
}

/// Square matrix with Grassmann-valued entries. Entries commute with the
/// matrix factors; generators anticommute among themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannMatrix {
    num_generators: usize,
    dim: usize,
    terms: BTreeMap<u128, DMatrix<Complex64>>,
}

impl GrassmannMatrix {
    pub fn zero(num_generators: usize, dim: usize) -> Self {
        Self { num_generators, dim, terms: BTreeMap::new() }
    }

    pub fn from_matrix(num_generators: usize, m: DMatrix<Complex64>) -> Self {
        Self::from_terms(num_generators, m.nrows(), [(0, m)])
    }

    pub fn identity(num_generators: usize, dim: usize) -> Self {
        Self::from_matrix(num_generators, DMatrix::identity(dim, dim))
    }

    pub fn from_dense(num_generators: usize, op: &DenseOperator) -> Self {
        Self::from_matrix(num_generators, op.to_dmatrix())
    }

    /// `g · 1`.
    pub fn from_scalar(g: &GrassmannElement, dim: usize) -> Self {
        Self::from_terms(g.num_generators(), dim, g.terms().map(|(m, c)| (m, DMatrix::<Complex64>::identity(dim, dim) * c)))
    }

    pub fn from_terms<It: IntoIterator<Item = (u128, DMatrix<Complex64>)>>(num_generators: usize, dim: usize, it: It) -> Self {
        let mut out = Self::zero(num_generators, dim);
        for (m, a) in it {
            out.push(m, a);
        }
        out
    }

    fn push(&mut self, m: u128, a: DMatrix<Complex64>) {
        let slot = self.terms.entry(m).or_insert_with(|| DMatrix::zeros(self.dim, self.dim));
        *slot += a;
        if slot.iter().all(|c| c.norm() < crate::grassmann::PRUNE_TOL) {
            self.terms.remove(&m);
        }
    }

    pub fn num_generators(&self) -> usize {
        self.num_generators
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (u128, &DMatrix<Complex64>)> + '_ {
        self.terms.iter().map(|(m, a)| (*m, a))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.num_generators != other.num_generators {
            return Err(GrassmannError::Mismatch { left: self.num_generators, right: other.num_generators }.into());
        }
        if self.dim != other.dim {
            return Err(WeylError::DimMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, a) in &other.terms {
            out.push(*m, a.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(-ONE))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(self.num_generators, self.dim, self.terms.iter().map(|(m, a)| (*m, a * c)))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.num_generators, self.dim);
        for (ma, a) in &self.terms {
            for (mb, b) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                out.push(ma | mb, a * b * Complex64::new(merge_sign(*ma, *mb), 0.0));
            }
        }
        Ok(out)
    }

    /// Exponential of a matrix with vanishing body (finite series).
    pub fn exp(&self) -> Result<Self> {
        if self.terms.contains_key(&0) {
            return Err(WeylError::NotNilpotent);
        }
        let mut sum = Self::identity(self.num_generators, self.dim);
        let mut term = sum.clone();
        for k in 1..=self.num_generators + 1 {
            term = term.try_mul(self)?.scale(Complex64::new(1.0 / k as f64, 0.0));
            if term.terms.is_empty() {
                break;
            }
            sum = sum.try_add(&term)?;
        }
        Ok(sum)
    }

    pub fn trace(&self) -> GrassmannElement {
        GrassmannElement::from_terms(self.num_generators, self.terms.iter().map(|(m, a)| (*m, a.trace())))
    }

    pub fn entry(&self, r: usize, c: usize) -> GrassmannElement {
        GrassmannElement::from_terms(self.num_generators, self.terms.iter().map(|(m, a)| (*m, a[(r, c)])))
    }

    /// Apply a linear map of Grassmann elements entrywise.
    pub fn map_entries<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&GrassmannElement) -> std::result::Result<GrassmannElement, GrassmannError>,
    {
        let mut out: Option<Self> = None;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let g = f(&self.entry(r, c))?;
                let acc = out.get_or_insert_with(|| Self::zero(g.num_generators(), self.dim));
                for (m, v) in g.terms() {
                    let mut unit = DMatrix::zeros(self.dim, self.dim);
                    unit[(r, c)] = v;
                    acc.push(m, unit);
                }
            }
        }
        Ok(out.unwrap_or_else(|| Self::zero(self.num_generators, self.dim)))
    }

    pub fn integrate(&self, order: &[usize]) -> Result<Self> {
        self.map_entries(|g| g.integrate(order))
    }

    pub fn substitute(&self, images: &[GrassmannElement]) -> Result<Self> {
        self.map_entries(|g| g.substitute(images))
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        let diff = self.try_sub(other).expect("compatible matrices");
        diff.terms.values().flat_map(|a| a.iter().map(|c| c.norm())).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.check(other).is_ok() && self.max_diff(other) <= tol
    }

    /// `Tr(self · op)` for an ordinary matrix.
    pub fn trace_with(&self, op: &DenseOperator) -> Result<GrassmannElement> {
        let m = Self::from_dense(self.num_generators, op);
        Ok(self.try_mul(&m)?.trace())
    }
}

/// Candidate coefficients `κ` in `T̂(ρ) = exp(κ Σ M_k ρ_k)`.
pub const TRANSLATION_CANDIDATES: [Complex64; 4] =
    [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0), Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];

fn translation_with(num_generators: usize, rho: [usize; 3], kappa: Complex64) -> Result<GrassmannMatrix> {
    let map = QuantizationMap::global();
    let mut lin = GrassmannMatrix::zero(num_generators, 2);
    for k in Kind::ALL {
        if rho[k.offset()] >= num_generators {
            return Err(GrassmannError::OutOfRange { index: rho[k.offset()], count: num_generators }.into());
        }
        lin.push(1u128 << rho[k.offset()], map.matrix(k).to_dmatrix() * kappa);
    }
    lin.exp()
}

/// `κ` values for which the composition law
/// `T̂(ρ′)T̂(ρ″) = exp(Σρ′ρ″) T̂(ρ′+ρ″)` and `Tr T̂(ρ) = 2(1 + iρ_pρ_qρ_r)` both hold.
pub fn solve_translation_kappa() -> Vec<Complex64> {
    let layout = Layout::new(1, 2).expect("small layout");
    let n = layout.num_generators();
    let a = layout.triple(0, Space::Auxiliary(0)).expect("block 0");
    let b = layout.triple(0, Space::Auxiliary(1)).expect("block 1");
    let bilinear = (0..3).fold(GrassmannElement::zero(n), |acc, k| &acc + &GrassmannElement::monomial(n, &[a[k], b[k]], ONE));
    let expected_trace =
        &GrassmannElement::scalar(n, Complex64::new(2.0, 0.0)) + &GrassmannElement::monomial(n, &a, Complex64::new(0.0, 2.0));
    TRANSLATION_CANDIDATES
        .iter()
        .copied()
        .filter(|&kappa| {
            let ta = translation_with(n, a, kappa).expect("valid");
            let tb = translation_with(n, b, kappa).expect("valid");
            // T̂(ρ′+ρ″): the linear exponent is additive.
            let sum_images: Vec<GrassmannElement> = (0..n)
                .map(|j| match a.iter().position(|&x| x == j) {
                    Some(k) => &GrassmannElement::generator(n, a[k]) + &GrassmannElement::generator(n, b[k]),
                    None => GrassmannElement::generator(n, j),
                })
                .collect();
            let tsum = ta.substitute(&sum_images).expect("images");
            let rhs = GrassmannMatrix::from_scalar(&bilinear.exp(), 2).try_mul(&tsum).expect("same size");
            ta.try_mul(&tb).expect("same size").approx_eq(&rhs, 1e-12) && ta.trace().approx_eq(&expected_trace, 1e-12)
        })
        .collect()
}

/// The translation coefficient, fixed once by its defining laws.
pub fn translation_kappa() -> Complex64 {
    static K: OnceLock<Complex64> = OnceLock::new();
    *K.get_or_init(|| {
        let found = solve_translation_kappa();
        assert_eq!(found.len(), 1, "translation coefficient must be unique");
        found[0]
    })
}

/// `T̂(ρ)` on one qubit, `ρ` taken from `block` of `layout`.
pub fn translation_operator(layout: &Layout, block: Space, qubit: usize) -> Result<GrassmannMatrix> {
    let rho = layout.triple(qubit, block)?;
    translation_with(layout.num_generators(), rho, translation_kappa())
}

/// `R̂(ξ) = ∫ exp(−iΣ ξ_k ρ′_k) T̂(ρ′) dρ′_r dρ′_q dρ′_p`, with `ξ` from `xi` and
/// the integration variables from `via`.
pub fn reflection_operator(layout: &Layout, xi: Space, via: Space, qubit: usize) -> Result<GrassmannMatrix> {
    let n = layout.num_generators();
    let x = layout.triple(qubit, xi)?;
    let r = layout.triple(qubit, via)?;
    let kernel = (0..3).fold(GrassmannElement::zero(n), |acc, k| &acc + &GrassmannElement::monomial(n, &[x[k], r[k]], -I));
    let t = translation_operator(layout, via, qubit)?;
    GrassmannMatrix::from_scalar(&kernel.exp(), 2).try_mul(&t)?.integrate(&[r[2], r[1], r[0]])
}
