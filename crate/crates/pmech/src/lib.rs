//! Phase-space mechanics on the Heisenberg group.
//!
//! The crate is organised around one exact layer and one numeric layer:
//!
//! * [`heis`] — the Heisenberg group `H^n` in exponential coordinates with
//!   exact rational arithmetic, plus its symplectic automorphisms.
//! * [`symbol`] — sparse polynomial observables in `(q, p)` with complex
//!   rational coefficients and a formal deformation parameter `hbar`; the
//!   star product, the modified (p-mechanical) bracket and the Poisson
//!   bracket are all computed exactly.
//! * [`fock`] — Fock-type spaces on a phase-space grid: vacuum and coherent
//!   vectors, Weyl quantisation of symbols to grid operators, expectations
//!   and membership residuals, all with spectral (FFT) derivatives.
//! * [`states`] — states as closed-form Gaussian kernels, exact functional
//!   evaluation of observables against them, and classical-limit scans.
//! * [`dynamics`] — closed-form flows for the unforced and forced harmonic
//!   oscillator, a bracket-ODE integrator on symbols, kernel evolution, the
//!   interaction picture and resonance envelopes.

pub mod dynamics;
pub mod error;
pub mod fock;
pub mod heis;
pub mod numfmt;
pub mod parse;
pub mod states;
pub mod symbol;

pub use dynamics::{ForceProfile, HamiltonianModel, Trajectory};
pub use error::{Error, Result};
pub use fock::{GridOperator, PhaseGrid, StateVector};
pub use heis::{AdjointPoint, GroupElement, SymplecticMatrix};
pub use parse::parse_symbol;
pub use states::{GaussianKernel, StateFunctional};
pub use symbol::{
    hamiltonian_ho, ladder, linear_combine, pmechanise, symplectic_pullback, LadderKind,
    Observable, PlanckParameter, Provenance, Symbol,
};

/// Exact rational scalar used throughout the algebraic layer.
pub type Rational = num_rational::BigRational;

/// Exact complex rational coefficient.
pub type Coeff = num_complex::Complex<Rational>;

/// Shorthand for `f64` complex numbers used by the numeric layer.
pub type C64 = num_complex::Complex<f64>;

/// Builds a rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// Exact conversion of a finite `f64` into a rational.
pub fn rat_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}
