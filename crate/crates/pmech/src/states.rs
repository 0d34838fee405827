//! States as closed-form kernels.
//!
//! A coherent-state kernel is the phase-times-Gaussian
//!
//! ```text
//! l(s, x, y) = exp(-2 pi i (q0 x + p0 y) - 2 pi i h s
//!                  - (pi h / 2)(x^2 / (omega m) + omega m y^2))
//! ```
//!
//! and evaluating an observable against it pairs the observable's
//! delta-derivative distribution with signed partial derivatives of the
//! kernel at the group identity. For the monomial `hbar^k q^a p^b` that
//! pairing factorises into one-dimensional Gaussian moments, computed here
//! by the Hermite-style recurrence `M_{j+1} = c M_j + j s^2 M_{j-1}` with
//! center `c` and variance `s^2 = h / (4 pi omega m)` (for the `x` axis;
//! `h omega m / (4 pi)` for `y`). No grid or quadrature is involved, which
//! is what makes the cross-checks against the Fock-space path independent.
//!
//! At `h = 0` the kernel degenerates to the pure-state phase
//! `exp(-2 pi i (q0 x + p0 y))` and evaluation returns the classical value
//! of the observable at `(q0, p0)`, exactly.

use crate::error::{Error, Result};
use crate::fock::{fourier_shift, inner, StateVector};
use crate::numfmt::pairwise_sum;
use crate::symbol::{Observable, PlanckParameter};
use crate::{rat_from_f64, Coeff, C64};
use num_traits::ToPrimitive;

/// Closed-form coherent-state kernel `l_(h, q0, p0)` of the `(m, omega)`
/// oscillator. `h = 0` is allowed and gives the classical pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    pub h: f64,
    pub q0: f64,
    pub p0: f64,
    pub m: f64,
    pub omega: f64,
}

impl GaussianKernel {
    pub fn planck(&self) -> PlanckParameter {
        PlanckParameter::from_h(self.h).expect("kernel h is validated")
    }

    /// Evaluates the closed form at a group point.
    pub fn eval(&self, s: f64, x: f64, y: f64) -> C64 {
        let tau = 2.0 * std::f64::consts::PI;
        let wm = self.omega * self.m;
        let phase = -tau * (self.q0 * x + self.p0 * y) - tau * self.h * s;
        let gauss = -(std::f64::consts::PI * self.h / 2.0) * (x * x / wm + wm * y * y);
        C64::from_polar(gauss.exp(), phase)
    }

    /// Gaussian moment variances along `x` and `y` pairings.
    fn variances(&self) -> (f64, f64) {
        let four_pi = 4.0 * std::f64::consts::PI;
        (
            self.h / (four_pi * self.omega * self.m),
            self.h * self.omega * self.m / four_pi,
        )
    }
}

/// Builds the coherent kernel, validating parameters.
pub fn coherent_kernel(
    planck: &PlanckParameter,
    q0: f64,
    p0: f64,
    m: f64,
    omega: f64,
) -> Result<GaussianKernel> {
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::NonPositive {
            name: "m",
            value: m,
        });
    }
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::NonPositive {
            name: "omega",
            value: omega,
        });
    }
    Ok(GaussianKernel {
        h: planck.h(),
        q0,
        p0,
        m,
        omega,
    })
}

/// A state functional: a finite complex combination of Gaussian kernels.
/// Evaluation is linear in the observable and in the kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFunctional {
    terms: Vec<(C64, GaussianKernel)>,
}

impl StateFunctional {
    pub fn pure(kernel: GaussianKernel) -> Self {
        StateFunctional {
            terms: vec![(C64::new(1.0, 0.0), kernel)],
        }
    }

    pub fn mixed(terms: Vec<(C64, GaussianKernel)>) -> Self {
        StateFunctional { terms }
    }

    pub fn kernels(&self) -> &[(C64, GaussianKernel)] {
        &self.terms
    }
}

/// Gaussian moments `M_0..M_max` with the given center and variance.
fn gaussian_moments(center: f64, variance: f64, max: usize) -> Vec<f64> {
    let mut m = Vec::with_capacity(max + 1);
    m.push(1.0);
    if max == 0 {
        return m;
    }
    m.push(center);
    for j in 1..max {
        let next = center * m[j] + j as f64 * variance * m[j - 1];
        m.push(next);
    }
    m
}

fn eval_kernel(kernel: &GaussianKernel, obs: &Observable) -> C64 {
    let sym = obs.symbol();
    let deg = sym.qp_degree();
    let (var_x, var_y) = kernel.variances();
    let mx = gaussian_moments(kernel.q0, var_x, deg);
    let my = gaussian_moments(kernel.p0, var_y, deg);
    let hbar = kernel.h / (2.0 * std::f64::consts::PI);
    let mut acc = C64::new(0.0, 0.0);
    for (key, coeff) in sym.terms() {
        if key.hbar > 0 && hbar == 0.0 {
            continue;
        }
        let c = C64::new(
            coeff.re.to_f64().unwrap_or(f64::NAN),
            coeff.im.to_f64().unwrap_or(f64::NAN),
        );
        let a = key.q[0] as usize;
        let b = key.p[0] as usize;
        acc += c * hbar.powi(key.hbar as i32) * mx[a] * my[b];
    }
    acc
}

/// Exact pairing of an observable's distribution against the state kernels.
/// Returns a closed-form number; requires the observable to carry its
/// distributional lineage (from `pmechanise` or ladder constructions).
pub fn eval_state(state: &StateFunctional, obs: &Observable) -> Result<C64> {
    if !obs.has_lineage() {
        return Err(Error::NoLineage);
    }
    if obs.symbol().dim() != 1 {
        return Err(Error::DimensionMismatch(
            "kernel evaluation is implemented for n = 1".into(),
        ));
    }
    let mut acc = C64::new(0.0, 0.0);
    for (w, k) in &state.terms {
        acc += w * eval_kernel(k, obs);
    }
    Ok(acc)
}

/// Exact rational evaluation of a classical observable against the pure
/// state at `(q0, p0)` (the `h = 0` kernel). The floats are converted to
/// rationals exactly, so this reproduces pointwise evaluation bit-for-bit.
pub fn eval_pure_classical_exact(obs: &Observable, q0: f64, p0: f64) -> Result<Coeff> {
    if !obs.has_lineage() {
        return Err(Error::NoLineage);
    }
    obs.symbol()
        .eval_classical_exact(&[rat_from_f64(q0)], &[rat_from_f64(p0)])
}

/// One row of a classical-limit scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub h: f64,
    pub value: C64,
    pub classical: f64,
    pub abs_error: f64,
}

/// Evaluates `obs` against coherent kernels centred at `(q0, p0)` for each
/// `h` in the list, against the exact classical value.
pub fn classical_limit_scan(
    obs: &Observable,
    q0: f64,
    p0: f64,
    m: f64,
    omega: f64,
    h_list: &[f64],
) -> Result<Vec<ScanRow>> {
    if h_list.is_empty() {
        return Err(Error::EmptyHList);
    }
    let classical_exact = eval_pure_classical_exact(obs, q0, p0)?;
    let classical = classical_exact.re.to_f64().unwrap_or(f64::NAN);
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let planck = PlanckParameter::from_h(h)?;
        let kernel = coherent_kernel(&planck, q0, p0, m, omega)?;
        let value = if h == 0.0 {
            // exact classical slice
            C64::new(classical, classical_exact.im.to_f64().unwrap_or(0.0))
        } else {
            eval_state(&StateFunctional::pure(kernel), obs)?
        };
        let abs_error = (value - C64::new(classical, 0.0)).norm();
        rows.push(ScanRow {
            h,
            value,
            classical,
            abs_error,
        });
    }
    Ok(rows)
}

/// Numeric quadrature of the kernel defined by a state vector,
///
/// ```text
/// l(g) = (4/h)^n  integral  v(g^-1 g') conj(v(g')) dx' dy',
/// ```
///
/// evaluated at the requested `(s, x, y)` points. In `(q, p)` coordinates
/// the same integral reads
/// `(4/h) e^(-2 pi i h s) integral f(q,p) conj(f(q - hy/2, p + hx/2))
/// e^(2 pi i (qx + py)) dq dp`, which is what the grid quadrature computes;
/// the shifted factor is produced by a spectral translation.
pub fn kernel_from_vector(v: &StateVector, points: &[(f64, f64, f64)]) -> Result<Vec<C64>> {
    let h = v.planck().h();
    let grid = *v.grid();
    let n = grid.n_points();
    let d2 = grid.spacing() * grid.spacing();
    let tau = 2.0 * std::f64::consts::PI;
    let mut out = Vec::with_capacity(points.len());
    for &(s, x, y) in points {
        let shifted = fourier_shift(v, -0.5 * h * y, 0.5 * h * x);
        let mut integrand = Vec::with_capacity(n * n);
        for iq in 0..n {
            let q = grid.coord(iq);
            for ip in 0..n {
                let p = grid.coord(ip);
                let phase = C64::from_polar(1.0, tau * (q * x + p * y));
                integrand.push(v.sample_at(iq, ip) * shifted.sample_at(iq, ip).conj() * phase);
            }
        }
        let integral = pairwise_sum(&integrand) * d2 * (4.0 / h);
        out.push(integral * C64::from_polar(1.0, -tau * h * s));
    }
    Ok(out)
}

/// Consistency helper: the grid coherent state `f_(x0, y0)` whose kernel is
/// `l_(h, q0, p0)` sits at `(x0, y0) = (-p0 / h, q0 / h)`.
pub fn kernel_center_to_group_shift(kernel: &GaussianKernel) -> (f64, f64) {
    (-kernel.p0 / kernel.h, kernel.q0 / kernel.h)
}

/// Expectation of an observable in the grid picture for the coherent state
/// matching the given kernel; used by the cross-module equivalence tests.
pub fn matching_expectation(
    kernel: &GaussianKernel,
    obs: &Observable,
    grid: crate::fock::PhaseGrid,
) -> Result<C64> {
    let (x0, y0) = kernel_center_to_group_shift(kernel);
    let planck = kernel.planck();
    let f = crate::fock::coherent_vector(grid, planck, x0, y0, kernel.m, kernel.omega)?;
    let op = crate::fock::quantize(obs.symbol(), &planck)?;
    inner(&op.apply(&f)?, &f)
}
