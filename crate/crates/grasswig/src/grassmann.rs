//! Sparse exterior algebra over at most 128 real anticommuting generators.
//!
//! An element is a map from monomial bitmask to complex coefficient. Bit `k`
//! set means generator `k` is present; monomials are stored in ascending
//! generator order and the reordering sign is folded into the coefficient, so
//! two equal elements always have identical term maps.
//!
//! Generators are laid out per qubit as `(p, q, r)` triples. State generators
//! `ξ` come first, auxiliary blocks (`ρ`, `ξ′`, `ξ″`, ...) follow with the same
//! layout; see [`Layout`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Coefficients with magnitude below this are dropped after every operation.
pub const PRUNE_TOL: f64 = 1e-12;
/// Width of the monomial bitmask.
pub const MAX_GENERATORS: usize = 128;
/// Largest matrix for which [`gaussian_integral`] also expands the exponential.
pub const MAX_GAUSSIAN_EXPANSION: usize = 8;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrassmannError {
    #[error("generator count mismatch: {left} vs {right}")]
    Mismatch { left: usize, right: usize },
    #[error("generator {index} out of range for {count} generators")]
    OutOfRange { index: usize, count: usize },
    #[error("{0} generators exceed the 128-bit monomial capacity")]
    Capacity(usize),
    #[error("generator {0} appears twice in an integration order")]
    DuplicateIntegration(usize),
    #[error("matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("element mixes state and auxiliary generators")]
    MixedSpaces,
    #[error("layout has no auxiliary block")]
    NoAuxiliary,
    #[error("expected {expected} images, got {got}")]
    ImageCount { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, GrassmannError>;

/// Which of the three generators of a qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Kind {
    P,
    Q,
    R,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::P, Kind::Q, Kind::R];

    pub fn offset(self) -> usize {
        match self {
            Kind::P => 0,
            Kind::Q => 1,
            Kind::R => 2,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Kind::P => 'p',
            Kind::Q => 'q',
            Kind::R => 'r',
        }
    }
}

/// State generators `ξ` or the `b`-th auxiliary block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Space {
    State,
    Auxiliary(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneratorIndex {
    pub qubit: usize,
    pub kind: Kind,
    pub space: Space,
}

impl GeneratorIndex {
    pub fn state(qubit: usize, kind: Kind) -> Self {
        Self { qubit, kind, space: Space::State }
    }

    pub fn aux(block: usize, qubit: usize, kind: Kind) -> Self {
        Self { qubit, kind, space: Space::Auxiliary(block) }
    }
}

/// Generator positions for `qubits` qubits with `aux_blocks` auxiliary copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    qubits: usize,
    aux_blocks: usize,
}

impl Layout {
    pub fn new(qubits: usize, aux_blocks: usize) -> Result<Self> {
        let n = 3 * qubits * (1 + aux_blocks);
        if n > MAX_GENERATORS {
            return Err(GrassmannError::Capacity(n));
        }
        Ok(Self { qubits, aux_blocks })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn aux_blocks(&self) -> usize {
        self.aux_blocks
    }

    pub fn num_generators(&self) -> usize {
        3 * self.qubits * (1 + self.aux_blocks)
    }

    fn block_of(&self, space: Space) -> Option<usize> {
        match space {
            Space::State => Some(0),
            Space::Auxiliary(b) if b < self.aux_blocks => Some(b + 1),
            Space::Auxiliary(_) => None,
        }
    }

    pub fn position(&self, g: GeneratorIndex) -> Result<usize> {
        let count = self.num_generators();
        let block = self.block_of(g.space).ok_or(GrassmannError::OutOfRange { index: count, count })?;
        if g.qubit >= self.qubits {
            return Err(GrassmannError::OutOfRange { index: 3 * g.qubit, count });
        }
        Ok(block * 3 * self.qubits + 3 * g.qubit + g.kind.offset())
    }

    pub fn index(&self, pos: usize) -> Result<GeneratorIndex> {
        let count = self.num_generators();
        if pos >= count {
            return Err(GrassmannError::OutOfRange { index: pos, count });
        }
        let block = pos / (3 * self.qubits);
        let within = pos % (3 * self.qubits);
        let space = if block == 0 { Space::State } else { Space::Auxiliary(block - 1) };
        Ok(GeneratorIndex { qubit: within / 3, kind: Kind::ALL[within % 3], space })
    }

    /// Positions of `(p, q, r)` for one qubit in one space.
    pub fn triple(&self, qubit: usize, space: Space) -> Result<[usize; 3]> {
        Ok([
            self.position(GeneratorIndex { qubit, kind: Kind::P, space })?,
            self.position(GeneratorIndex { qubit, kind: Kind::Q, space })?,
            self.position(GeneratorIndex { qubit, kind: Kind::R, space })?,
        ])
    }

    /// Bitmask covering every generator of one space.
    pub fn space_mask(&self, space: Space) -> Result<u128> {
        let mut m = 0u128;
        for q in 0..self.qubits {
            for p in self.triple(q, space)? {
                m |= 1u128 << p;
            }
        }
        Ok(m)
    }
}

/// Grading of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Sign of `a·b` for ascending monomials `a`, `b` with disjoint support:
/// the parity of pairs `(i ∈ a, j ∈ b)` with `i > j`.
#[inline]
pub fn merge_sign(a: u128, b: u128) -> f64 {
    let mut inv = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inv += ((a >> j) >> 1).count_ones();
        rest &= rest - 1;
    }
    if inv & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

#[inline]
fn parity_sign(bits: u32) -> f64 {
    if bits & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Clone, PartialEq)]
pub struct GrassmannElement {
    n: usize,
    terms: BTreeMap<u128, Complex64>,
}

impl GrassmannElement {
    /// The zero element over `n` generators. Panics if `n > 128`.
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_GENERATORS, "{n} generators exceed the monomial capacity");
        Self { n, terms: BTreeMap::new() }
    }

    pub fn scalar(n: usize, c: Complex64) -> Self {
        let mut g = Self::zero(n);
        g.push(0, c);
        g
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, Complex64::new(1.0, 0.0))
    }

    pub fn generator(n: usize, pos: usize) -> Self {
        assert!(pos < n, "generator {pos} out of range for {n}");
        let mut g = Self::zero(n);
        g.push(1u128 << pos, Complex64::new(1.0, 0.0));
        g
    }

    /// `c · ξ_{f₀} ξ_{f₁} …` in the order given; repeated factors give zero.
    pub fn monomial(n: usize, factors: &[usize], c: Complex64) -> Self {
        let mut g = Self::zero(n);
        let mut mask = 0u128;
        let mut sign = 1.0;
        for &f in factors {
            assert!(f < n, "generator {f} out of range for {n}");
            let bit = 1u128 << f;
            if mask & bit != 0 {
                return g;
            }
            sign *= merge_sign(mask, bit);
            mask |= bit;
        }
        g.push(mask, c * sign);
        g
    }

    pub fn from_terms<It: IntoIterator<Item = (u128, Complex64)>>(n: usize, terms: It) -> Self {
        let mut g = Self::zero(n);
        for (m, c) in terms {
            assert!(n == 128 || m >> n == 0, "monomial {m:#x} outside {n} generators");
            *g.terms.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        g.prune();
        g
    }

    fn push(&mut self, mask: u128, c: Complex64) {
        if c.norm() >= PRUNE_TOL {
            self.terms.insert(mask, c);
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_TOL);
    }

    pub fn num_generators(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (u128, Complex64)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mask: u128) -> Complex64 {
        self.terms.get(&mask).copied().unwrap_or_default()
    }

    pub fn scalar_part(&self) -> Complex64 {
        self.coeff(0)
    }

    /// Largest coefficient difference against `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for (m, c) in &self.terms {
            d = d.max((c - other.coeff(*m)).norm());
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                d = d.max(c.norm());
            }
        }
        d
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.n == other.n && self.distance(other) <= tol
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut g = Self::zero(self.n);
        for (m, v) in &self.terms {
            g.push(*m, v * c);
        }
        g
    }

    pub fn map_coeffs<F: Fn(u128, Complex64) -> Complex64>(&self, f: F) -> Self {
        let mut g = Self::zero(self.n);
        for (m, v) in &self.terms {
            g.push(*m, f(*m, *v));
        }
        g
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut g = self.clone();
        for (m, c) in &other.terms {
            *g.terms.entry(*m).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        g.prune();
        Ok(g)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut acc: BTreeMap<u128, Complex64> = BTreeMap::new();
        for (&a, &x) in &self.terms {
            for (&b, &y) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                *acc.entry(a | b).or_insert(Complex64::new(0.0, 0.0)) += x * y * merge_sign(a, b);
            }
        }
        let mut g = Self { n: self.n, terms: acc };
        g.prune();
        Ok(g)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(GrassmannError::Mismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    fn check_pos(&self, pos: usize) -> Result<()> {
        if pos >= self.n {
            return Err(GrassmannError::OutOfRange { index: pos, count: self.n });
        }
        Ok(())
    }

    pub fn parity(&self) -> Parity {
        let even = self.terms.keys().any(|m| m.count_ones() % 2 == 0);
        let odd = self.terms.keys().any(|m| m.count_ones() % 2 == 1);
        match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    pub fn even_part(&self) -> Self {
        self.filter(|m| m.count_ones() % 2 == 0)
    }

    pub fn odd_part(&self) -> Self {
        self.filter(|m| m.count_ones() % 2 == 1)
    }

    /// Split into graded pieces; `even + odd == self` exactly.
    pub fn parity_split(&self) -> (Self, Self) {
        (self.even_part(), self.odd_part())
    }

    pub fn filter<F: Fn(u128) -> bool>(&self, keep: F) -> Self {
        Self { n: self.n, terms: self.terms.iter().filter(|(m, _)| keep(**m)).map(|(m, c)| (*m, *c)).collect() }
    }

    /// `g(sξ)`: every degree-`k` coefficient picks up `sᵏ`.
    pub fn degree_scale(&self, s: Complex64) -> Self {
        self.map_coeffs(|m, c| c * s.powu(m.count_ones()))
    }

    /// Left or right derivative with respect to generator `pos`.
    pub fn derivative(&self, pos: usize, side: Side) -> Result<Self> {
        self.check_pos(pos)?;
        let bit = 1u128 << pos;
        let mut g = Self::zero(self.n);
        for (&m, &c) in &self.terms {
            if m & bit == 0 {
                continue;
            }
            let passed = match side {
                Side::Left => (m & (bit - 1)).count_ones(),
                Side::Right => ((m >> pos) >> 1).count_ones(),
            };
            g.push(m & !bit, c * parity_sign(passed));
        }
        Ok(g)
    }

    /// Berezin integral `∫ g dξ_{o₀} dξ_{o₁} …`: the right derivative for
    /// `order[0]` is applied first (innermost measure written last).
    pub fn integrate(&self, order: &[usize]) -> Result<Self> {
        let mut seen = 0u128;
        for &o in order {
            self.check_pos(o)?;
            if seen & (1u128 << o) != 0 {
                return Err(GrassmannError::DuplicateIntegration(o));
            }
            seen |= 1u128 << o;
        }
        let mut g = Self::zero(self.n);
        'terms: for (&m, &c) in &self.terms {
            if m & seen != seen {
                continue;
            }
            let mut mask = m;
            let mut sign = 1.0;
            for &o in order {
                let bit = 1u128 << o;
                if mask & bit == 0 {
                    continue 'terms;
                }
                sign *= parity_sign(((mask >> o) >> 1).count_ones());
                mask &= !bit;
            }
            g.push(mask, c * sign);
        }
        Ok(g)
    }

    /// Complex conjugation with `(ab)* = b* a*` and real generators.
    pub fn conjugate(&self) -> Self {
        self.map_coeffs(|m, c| {
            let k = m.count_ones();
            c.conj() * parity_sign(k * k.saturating_sub(1) / 2)
        })
    }

    /// Exponential by the (finite) power series.
    pub fn exp(&self) -> Self {
        let c0 = self.scalar_part();
        let nil = self.filter(|m| m != 0);
        let mut sum = Self::one(self.n);
        let mut term = Self::one(self.n);
        for k in 1..=self.n + 1 {
            term = term.try_mul(&nil).expect("same generator set").scale(Complex64::new(1.0 / k as f64, 0.0));
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
        }
        sum.scale(c0.exp())
    }

    /// Algebra homomorphism fixed by generator images: `ξ_k ↦ images[k]`.
    pub fn substitute(&self, images: &[GrassmannElement]) -> Result<Self> {
        if images.len() != self.n {
            return Err(GrassmannError::ImageCount { expected: self.n, got: images.len() });
        }
        let out_n = images.first().map_or(self.n, |g| g.n);
        for g in images {
            if g.n != out_n {
                return Err(GrassmannError::Mismatch { left: out_n, right: g.n });
            }
        }
        let mut acc = Self::zero(out_n);
        for (&m, &c) in &self.terms {
            let mut term = Self::scalar(out_n, c);
            let mut rest = m;
            while rest != 0 {
                let k = rest.trailing_zeros() as usize;
                term = term.try_mul(&images[k])?;
                rest &= rest - 1;
            }
            acc = acc.try_add(&term)?;
        }
        Ok(acc)
    }

    /// Move generator `k` to position `map[k]` in a set of `new_n` generators.
    pub fn relabel(&self, new_n: usize, map: &[usize]) -> Result<Self> {
        if map.len() != self.n {
            return Err(GrassmannError::ImageCount { expected: self.n, got: map.len() });
        }
        if let Some(&bad) = map.iter().find(|&&p| p >= new_n) {
            return Err(GrassmannError::OutOfRange { index: bad, count: new_n });
        }
        let mut g = Self::zero(new_n);
        for (&m, &c) in &self.terms {
            let factors: Vec<usize> = (0..self.n).filter(|k| m >> k & 1 == 1).map(|k| map[k]).collect();
            let t = Self::monomial(new_n, &factors, c);
            for (mm, cc) in t.terms {
                *g.terms.entry(mm).or_insert(Complex64::new(0.0, 0.0)) += cc;
            }
        }
        g.prune();
        Ok(g)
    }

    /// Shift every generator up by `by` inside a set of `new_n` generators.
    pub fn shifted(&self, new_n: usize, by: usize) -> Self {
        assert!(self.n + by <= new_n, "shift exceeds generator set");
        Self { n: new_n, terms: self.terms.iter().map(|(m, c)| (m << by, *c)).collect() }
    }

    /// Same terms viewed over a different generator count.
    pub fn resized(&self, new_n: usize) -> Result<Self> {
        for m in self.terms.keys() {
            if new_n < 128 && m >> new_n != 0 {
                return Err(GrassmannError::OutOfRange { index: 127 - m.leading_zeros() as usize, count: new_n });
            }
        }
        Ok(Self { n: new_n, terms: self.terms.clone() })
    }

    /// Canonical text form, terms sorted by bitmask.
    pub fn to_canonical_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut s = format!("({:+.6}{:+.6}i)", c.re + 0.0, c.im + 0.0);
                for k in 0..self.n {
                    if m >> k & 1 == 1 {
                        s.push_str(&format!("*ξ[{}{}]", Kind::ALL[k % 3].letter(), k / 3));
                    }
                }
                s
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Debug for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}[{}]", self.n, self.to_canonical_string())
    }
}

impl fmt::Display for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

impl Add for &GrassmannElement {
    type Output = GrassmannElement;
    fn add(self, rhs: Self) -> GrassmannElement {
        self.try_add(rhs).expect("grassmann add: generator sets differ")
    }
}

impl Sub for &GrassmannElement {
    type Output = GrassmannElement;
    fn sub(self, rhs: Self) -> GrassmannElement {
        self.try_add(&-rhs).expect("grassmann sub: generator sets differ")
    }
}

impl Neg for &GrassmannElement {
    type Output = GrassmannElement;
    fn neg(self) -> GrassmannElement {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &GrassmannElement {
    type Output = GrassmannElement;
    fn mul(self, rhs: Self) -> GrassmannElement {
        self.try_mul(rhs).expect("grassmann mul: generator sets differ")
    }
}

/// Algebra product, erroring on mismatched generator sets.
pub fn multiply(a: &GrassmannElement, b: &GrassmannElement) -> Result<GrassmannElement> {
    a.try_mul(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `g̃(ρ) ↦ g(ξ) = ∫ exp(iΣ ξ_k ρ_k) g̃(ρ) d³ρ` per qubit.
    Forward,
    /// `g(ξ) ↦ g̃(ρ) = c ∫ exp(−iΣ ξ_k ρ_k) g(ξ) d³ξ` per qubit.
    Inverse,
}

/// Per-qubit constant of the inverse transform. `−i` makes the pair a true
/// inverse; the single `+i` of the textbook pair yields minus the identity.
pub const INVERSE_FOURIER_FACTOR: Complex64 = Complex64::new(0.0, -1.0);

/// Inverse transform constant `c` for a chosen per-qubit factor.
fn inverse_constant(qubits: usize, per_qubit: Complex64) -> Complex64 {
    // Qubit blocks are integrated in ascending order; each block of three odd
    // integrations must pass the odd kernel pieces of later blocks, which
    // contributes (−1)^{n(n−1)/2}.
    per_qubit.powu(qubits as u32) * parity_sign((qubits * qubits.saturating_sub(1) / 2) as u32)
}

/// Grassmann Fourier transform between state and auxiliary block 0.
pub fn fourier(g: &GrassmannElement, layout: &Layout, dir: Direction) -> Result<GrassmannElement> {
    fourier_with_factor(g, layout, dir, INVERSE_FOURIER_FACTOR)
}

/// Fourier transform with an explicit per-qubit inverse factor.
pub fn fourier_with_factor(
    g: &GrassmannElement,
    layout: &Layout,
    dir: Direction,
    per_qubit: Complex64,
) -> Result<GrassmannElement> {
    if layout.aux_blocks() == 0 {
        return Err(GrassmannError::NoAuxiliary);
    }
    let n = layout.num_generators();
    if g.num_generators() != n {
        return Err(GrassmannError::Mismatch { left: g.num_generators(), right: n });
    }
    let (from, phase) = match dir {
        Direction::Forward => (Space::Auxiliary(0), I),
        Direction::Inverse => (Space::State, -I),
    };
    let allowed = layout.space_mask(from)?;
    if g.terms().any(|(m, _)| m & !allowed != 0) {
        return Err(GrassmannError::MixedSpaces);
    }
    let mut integrand = g.clone();
    let mut order = Vec::with_capacity(3 * layout.qubits());
    for q in 0..layout.qubits() {
        let xi = layout.triple(q, Space::State)?;
        let rho = layout.triple(q, Space::Auxiliary(0))?;
        for k in 0..3 {
            let mut factor = GrassmannElement::monomial(n, &[xi[k], rho[k]], phase);
            factor.push(0, Complex64::new(1.0, 0.0));
            integrand = factor.try_mul(&integrand)?;
        }
        let src = if dir == Direction::Forward { rho } else { xi };
        order.extend([src[2], src[1], src[0]]);
    }
    let out = integrand.integrate(&order)?;
    Ok(match dir {
        Direction::Forward => out,
        Direction::Inverse => out.scale(inverse_constant(layout.qubits(), per_qubit)),
    })
}

/// Result of a Grassmann Gaussian integral `∫ exp(Σ a_jk ξ_j ξ_k) dξ_m … dξ_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianIntegral {
    /// `sqrt|det 2a|`.
    pub closed_form: f64,
    /// `Pf(2a)`, the signed value carrying the ordering convention.
    pub pfaffian: Complex64,
    /// Direct expansion of the exponential in the kernel, when `m` is small.
    pub expansion: Option<Complex64>,
}

pub fn gaussian_integral(a: &DMatrix<Complex64>) -> Result<GaussianIntegral> {
    let m = a.nrows();
    if a.ncols() != m {
        return Err(GrassmannError::NotAntisymmetric);
    }
    for j in 0..m {
        for k in 0..m {
            if (a[(j, k)] + a[(k, j)]).norm() > 1e-12 {
                return Err(GrassmannError::NotAntisymmetric);
            }
        }
    }
    let two_a = a * Complex64::new(2.0, 0.0);
    // odd antisymmetric determinants vanish identically
    let closed_form = match m {
        0 => 1.0,
        _ if m % 2 == 1 => 0.0,
        _ => two_a.clone().determinant().norm().sqrt(),
    };
    let pfaffian = pfaffian(two_a);
    let expansion = if m <= MAX_GAUSSIAN_EXPANSION { Some(gaussian_expansion(a)?) } else { None };
    Ok(GaussianIntegral { closed_form, pfaffian, expansion })
}

/// Real-matrix convenience wrapper.
pub fn gaussian_integral_real(a: &[Vec<f64>]) -> Result<GaussianIntegral> {
    let m = a.len();
    if a.iter().any(|row| row.len() != m) {
        return Err(GrassmannError::NotAntisymmetric);
    }
    gaussian_integral(&DMatrix::from_fn(m, m, |j, k| Complex64::new(a[j][k], 0.0)))
}

fn gaussian_expansion(a: &DMatrix<Complex64>) -> Result<Complex64> {
    let m = a.nrows();
    let mut exponent = GrassmannElement::zero(m);
    for j in 0..m {
        for k in 0..m {
            if j != k {
                exponent = exponent.try_add(&GrassmannElement::monomial(m, &[j, k], a[(j, k)]))?;
            }
        }
    }
    let order: Vec<usize> = (0..m).rev().collect();
    Ok(exponent.exp().integrate(&order)?.scalar_part())
}

/// Pfaffian by pivoted congruence elimination.
pub fn pfaffian(mut a: DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    if n % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let mut pf = Complex64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let (p, best) = (k + 1..n).map(|i| (i, a[(i, k)].norm())).fold((k + 1, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k + 1 {
            a.swap_rows(p, k + 1);
            a.swap_columns(p, k + 1);
            pf = -pf;
        }
        let pivot = a[(k + 1, k)];
        pf *= a[(k, k + 1)];
        for i in k + 2..n {
            let f = a[(i, k)] / pivot;
            if f.norm() == 0.0 {
                continue;
            }
            for c in 0..n {
                let v = a[(k + 1, c)];
                a[(i, c)] -= f * v;
            }
            for r in 0..n {
                let v = a[(r, k + 1)];
                a[(r, i)] -= f * v;
            }
        }
        k += 2;
    }
    pf
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const P: usize = 0;
    const Q: usize = 1;
    const R: usize = 2;

    fn x(k: usize) -> GrassmannElement {
        GrassmannElement::generator(3, k)
    }

    // Independent oracle: explicit factor lists sorted by bubble sort.
    fn naive_product(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, f64)> {
        let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
        let mut sign = 1.0;
        for i in 0..v.len() {
            for j in 0..v.len() - 1 - i {
                if v[j] == v[j + 1] {
                    return None;
                }
                if v[j] > v[j + 1] {
                    v.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some((v, sign))
    }

    fn bits(m: u128) -> Vec<usize> {
        (0..128).filter(|k| m >> k & 1 == 1).collect()
    }

    pub(crate) fn random_element(rng: &mut impl Rng, n: usize, terms: usize) -> GrassmannElement {
        GrassmannElement::from_terms(
            n,
            (0..terms).map(|_| (rng.gen::<u128>() & ((1u128 << n) - 1), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
        )
    }

    #[test]
    fn nilpotent_and_anticommuting() {
        assert!((&x(P) * &x(P)).is_zero());
        assert_eq!(&x(Q) * &x(P), GrassmannElement::monomial(3, &[P, Q], c(-1.0, 0.0)));
        let pq = &GrassmannElement::one(3) + &(&x(P) * &x(Q));
        let expect = &GrassmannElement::one(3) + &GrassmannElement::monomial(3, &[P, Q], c(2.0, 0.0));
        assert_eq!(&pq * &pq, expect);
    }

    #[test]
    fn mismatched_sets_error() {
        let a = GrassmannElement::one(3);
        let b = GrassmannElement::one(6);
        assert_eq!(multiply(&a, &b), Err(GrassmannError::Mismatch { left: 3, right: 6 }));
    }

    #[test]
    fn merge_sign_matches_bubble_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let a = rng.gen::<u128>() & rng.gen::<u128>();
            let b = rng.gen::<u128>() & rng.gen::<u128>() & !a;
            let (_, s) = naive_product(&bits(a), &bits(b)).unwrap();
            assert_eq!(merge_sign(a, b), s);
        }
    }

    #[test]
    fn derivative_examples() {
        let pq = &x(P) * &x(Q);
        assert_eq!(pq.derivative(Q, Side::Left).unwrap(), -&x(P));
        assert_eq!(pq.derivative(P, Side::Left).unwrap(), x(Q));
        assert_eq!(pq.derivative(Q, Side::Right).unwrap(), x(P));
        assert!(pq.derivative(5, Side::Left).is_err());
    }

    #[test]
    fn berezin_examples() {
        assert!(GrassmannElement::one(3).integrate(&[P]).unwrap().is_zero());
        assert_eq!(x(P).integrate(&[P]).unwrap(), GrassmannElement::one(3));
        let pqr = GrassmannElement::monomial(3, &[P, Q, R], c(1.0, 0.0));
        assert_eq!(pqr.integrate(&[R, Q, P]).unwrap(), GrassmannElement::one(3));
        // Levi-Civita weighting under a reordered measure
        assert_eq!(pqr.integrate(&[Q, R, P]).unwrap(), -&GrassmannElement::one(3));
        assert_eq!(pqr.integrate(&[P, Q, R]).unwrap(), -&GrassmannElement::one(3));
        assert_eq!(pqr.integrate(&[P, P]), Err(GrassmannError::DuplicateIntegration(P)));
    }

    #[test]
    fn conjugate_examples() {
        let ipq = GrassmannElement::monomial(3, &[P, Q], c(0.0, 1.0));
        assert_eq!(ipq.conjugate(), ipq);
        let pqr = GrassmannElement::monomial(3, &[P, Q, R], c(1.0, 0.0));
        // reversing three factors takes three transpositions
        assert_eq!(pqr.conjugate(), GrassmannElement::monomial(3, &[R, Q, P], c(1.0, 0.0)));
        assert_eq!(pqr.conjugate(), -&pqr);
    }

    #[test]
    fn parity_split_examples() {
        let g = &GrassmannElement::one(3) + &x(P);
        assert_eq!(g.parity_split(), (GrassmannElement::one(3), x(P)));
        let pq = &x(P) * &x(Q);
        assert_eq!(pq.parity_split(), (pq.clone(), GrassmannElement::zero(3)));
        assert_eq!(g.parity(), Parity::Mixed);
    }

    #[test]
    fn layout_positions() {
        let l = Layout::new(2, 1).unwrap();
        assert_eq!(l.num_generators(), 12);
        assert_eq!(l.position(GeneratorIndex::state(1, Kind::R)).unwrap(), 5);
        assert_eq!(l.position(GeneratorIndex::aux(0, 0, Kind::P)).unwrap(), 6);
        assert_eq!(l.index(10).unwrap(), GeneratorIndex::aux(0, 1, Kind::Q));
        assert!(l.position(GeneratorIndex::aux(1, 0, Kind::P)).is_err());
        assert!(Layout::new(11, 3).is_err());
    }

    #[test]
    fn canonical_text() {
        let g = GrassmannElement::monomial(6, &[4, 0], c(0.5, 0.0));
        assert_eq!(g.to_canonical_string(), "(-0.500000+0.000000i)*ξ[p0]*ξ[q1]");
        assert_eq!(GrassmannElement::zero(3).to_string(), "0");
    }

    #[test]
    fn fourier_examples() {
        let l = Layout::new(1, 1).unwrap();
        let rho = GrassmannElement::monomial(6, &[3, 4, 5], c(1.0, 0.0));
        assert_eq!(fourier(&rho, &l, Direction::Forward).unwrap(), GrassmannElement::one(6));
        // plane wave: the inverse of 1 is the delta element of ρ
        let delta = fourier(&GrassmannElement::one(6), &l, Direction::Inverse).unwrap();
        assert_eq!(delta, rho);
        let textbook = fourier_with_factor(&GrassmannElement::one(6), &l, Direction::Inverse, c(0.0, 1.0)).unwrap();
        assert_eq!(textbook, -&rho);
        let mixed = &rho + &GrassmannElement::generator(6, 0);
        assert_eq!(fourier(&mixed, &l, Direction::Forward), Err(GrassmannError::MixedSpaces));
    }

    #[test]
    fn fourier_round_trip_multi_qubit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for q in 1..=3 {
            let l = Layout::new(q, 1).unwrap();
            let n = l.num_generators();
            let state = l.space_mask(Space::State).unwrap();
            for _ in 0..10 {
                let g = random_element(&mut rng, n, 12).filter(|m| m & !state == 0);
                let back = fourier(&fourier(&g, &l, Direction::Inverse).unwrap(), &l, Direction::Forward).unwrap();
                assert!(back.approx_eq(&g, 1e-12), "qubits {q}");
            }
        }
    }

    #[test]
    fn fourier_coefficient_duality() {
        // even g with components g0, g_rq, g_pr, g_qp (written via the three bilinears)
        let l = Layout::new(1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let g0 = c(rng.gen(), rng.gen());
            let (a, b, d) = (c(rng.gen(), rng.gen()), c(rng.gen(), rng.gen()), c(rng.gen(), rng.gen()));
            let g = &(&(&GrassmannElement::scalar(6, g0) + &GrassmannElement::monomial(6, &[R, Q], a))
                + &GrassmannElement::monomial(6, &[P, R], b))
                + &GrassmannElement::monomial(6, &[Q, P], d);
            let gt = fourier(&g, &l, Direction::Inverse).unwrap();
            // g_rq − g_qr = a, g_pr − g_rp = b, g_qp − g_pq = d
            assert!((gt.coeff(1 << 3) + a).norm() < 1e-12);
            assert!((gt.coeff(1 << 4) + b).norm() < 1e-12);
            assert!((gt.coeff(1 << 5) + d).norm() < 1e-12);
            assert!((gt.coeff(0b111 << 3) - g0).norm() < 1e-12);
            assert_eq!(gt.parity(), Parity::Odd);
        }
    }

    // Independent oracle: Pfaffian by cofactor expansion along the first row.
    fn pf_expand(a: &DMatrix<Complex64>) -> Complex64 {
        let n = a.nrows();
        if n == 0 {
            return c(1.0, 0.0);
        }
        if n % 2 == 1 {
            return c(0.0, 0.0);
        }
        let mut s = c(0.0, 0.0);
        for j in 1..n {
            let keep: Vec<usize> = (1..n).filter(|&k| k != j).collect();
            let sub = DMatrix::from_fn(n - 2, n - 2, |r, cc| a[(keep[r], keep[cc])]);
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            s += a[(0, j)] * sign * pf_expand(&sub);
        }
        s
    }

    fn random_antisym(rng: &mut impl Rng, m: usize) -> DMatrix<Complex64> {
        let mut a = DMatrix::from_element(m, m, c(0.0, 0.0));
        for j in 0..m {
            for k in j + 1..m {
                let v = c(rng.gen_range(-1.0..1.0), 0.0);
                a[(j, k)] = v;
                a[(k, j)] = -v;
            }
        }
        a
    }

    #[test]
    fn gaussian_examples() {
        let g = gaussian_integral_real(&[vec![0.0, 0.7], vec![-0.7, 0.0]]).unwrap();
        assert!((g.closed_form - 1.4).abs() < 1e-12);
        assert!((g.expansion.unwrap() - c(1.4, 0.0)).norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g3 = gaussian_integral(&random_antisym(&mut rng, 3)).unwrap();
        assert_eq!(g3.closed_form, 0.0);
        assert!(g3.expansion.unwrap().norm() < 1e-12);
        assert_eq!(gaussian_integral_real(&[vec![0.0, 1.0], vec![1.0, 0.0]]), Err(GrassmannError::NotAntisymmetric));
    }

    #[test]
    fn gaussian_closed_form_matches_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in [2, 3, 4, 6, 8] {
            for _ in 0..10 {
                let a = random_antisym(&mut rng, m);
                let g = gaussian_integral(&a).unwrap();
                let e = g.expansion.unwrap();
                assert!((g.closed_form - e.norm()).abs() < 1e-12, "m={m}");
                assert!((g.pfaffian - e).norm() < 1e-12, "m={m}");
                assert!((pf_expand(&(&a * c(2.0, 0.0))) - e).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn exp_of_bilinear() {
        let b = GrassmannElement::monomial(3, &[P, Q], c(2.0, 0.0));
        assert_eq!(b.exp(), &GrassmannElement::one(3) + &b);
    }

    #[test]
    fn substitution_is_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let images: Vec<_> = (0..4).map(|_| random_element(&mut rng, 4, 3).odd_part()).collect();
            let a = random_element(&mut rng, 4, 5);
            let b = random_element(&mut rng, 4, 5);
            let lhs = (&a * &b).substitute(&images).unwrap();
            let rhs = &a.substitute(&images).unwrap() * &b.substitute(&images).unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-10));
        }
    }

    fn arb_element(n: usize) -> impl Strategy<Value = GrassmannElement> {
        prop::collection::vec((0u128..(1u128 << n), -1.0f64..1.0, -1.0f64..1.0), 0..8)
            .prop_map(move |v| GrassmannElement::from_terms(n, v.into_iter().map(|(m, re, im)| (m, c(re, im)))))
    }

    fn arb_homogeneous(n: usize) -> impl Strategy<Value = GrassmannElement> {
        (arb_element(n), 0u32..=n as u32).prop_map(|(g, d)| g.filter(|m| m.count_ones() == d))
    }

    proptest! {
        #[test]
        fn associativity(a in arb_element(6), b in arb_element(6), cc in arb_element(6)) {
            prop_assert!((&(&a * &b) * &cc).approx_eq(&(&a * &(&b * &cc)), 1e-12));
        }

        #[test]
        fn generators_anticommute(j in 0usize..8, k in 0usize..8) {
            let (a, b) = (GrassmannElement::generator(8, j), GrassmannElement::generator(8, k));
            prop_assert!((&(&a * &b) + &(&b * &a)).is_zero());
        }

        #[test]
        fn graded_leibniz(a in arb_homogeneous(5), b in arb_element(5), l in 0usize..5) {
            let deg = a.terms().next().map_or(0, |(m, _)| m.count_ones());
            let lhs = (&a * &b).derivative(l, Side::Left).unwrap();
            let s = if deg % 2 == 1 { -1.0 } else { 1.0 };
            let rhs = &(&a.derivative(l, Side::Left).unwrap() * &b) + &(&a * &b.derivative(l, Side::Left).unwrap()).scale(c(s, 0.0));
            prop_assert!(lhs.approx_eq(&rhs, 1e-12));
        }

        #[test]
        fn conjugation_is_antihomomorphic_involution(a in arb_element(5), b in arb_element(5)) {
            prop_assert!(a.conjugate().conjugate().approx_eq(&a, 0.0));
            prop_assert!((&a * &b).conjugate().approx_eq(&(&b.conjugate() * &a.conjugate()), 1e-12));
        }

        #[test]
        fn fourier_round_trip(g in arb_element(3)) {
            let l = Layout::new(1, 1).unwrap();
            let gt = g.shifted(6, 3);
            let g = g.resized(6).unwrap();
            let back = fourier(&fourier(&g, &l, Direction::Inverse).unwrap(), &l, Direction::Forward).unwrap();
            prop_assert!(back.approx_eq(&g, 1e-12));
            let fwd = fourier(&gt, &l, Direction::Forward).unwrap();
            prop_assert!(fourier(&fwd, &l, Direction::Inverse).unwrap().approx_eq(&gt, 1e-12));
        }
    }
}
