//! Three-generator Grassmann phase space for qubits.
//!
//! Each qubit carries three anticommuting real generators `ξ_p, ξ_q, ξ_r`.
//! Operators become Grassmann polynomials (Weyl symbols), products become the
//! Moyal star product, and Clifford gates act on stabilizer states as
//! permutations of a finite set of signed Pauli points. The crate also ships
//! the two-generator (discrete Wigner and tableau) picture for comparison and a dense
//! density-matrix oracle that everything else is checked against.
//!
//! Module map:
//!
//! * [`grassmann`]: sparse exterior-algebra kernel (products, derivatives,
//!   Berezin integrals, Fourier transform, Gaussian integrals).
//! * [`oracle`]: dense 2ⁿ×2ⁿ simulator, Pauli strings, gate matrices and the
//!   8×8 matrix representation of three Grassmann generators.
//! * [`weyl`]: quantization map, star product, translation and reflection
//!   operators, trace functionals.
//! * [`dynamics`]: gate Hamiltonians, evolution matrices, propagator symbols
//!   and the exact generator flow.
//! * [`phasespace`]: signed Pauli points, ḡ distributions and the
//!   permutation engine.
//! * [`twogen`]: discrete Wigner function, state-dependent (M, r) evolution,
//!   stabilizer tableau and the preparation-contextuality demo.
//! * [`measurement`]: Peres–Mermin square, projector symbols and the
//!   assignment search.
//! * [`cli`]: circuit files, engines and reports behind the `grasswig` binary.

pub mod cli;
pub mod dynamics;
pub mod grassmann;
pub mod measurement;
pub mod oracle;
pub mod phasespace;
pub mod twogen;
pub mod weyl;

pub use num_complex::Complex64;
