//! Fock-type spaces on a phase-space grid (`n = 1`).
//!
//! States are complex samples over a symmetric `(q, p)` grid, carrying the
//! `(4/h)` weighted inner product. Derivatives are spectral (FFT on the
//! periodic grid), which is legitimate because every state constructed here
//! is a Gaussian whose tails sit below `1e-12` of its peak at the boundary;
//! the containment precondition is enforced at construction.
//!
//! Weyl quantisation maps a polynomial symbol to the fully symmetrised
//! operator polynomial in
//!
//! ```text
//! Q = q. + (i hbar / 2) d/dp        P = p. - (i hbar / 2) d/dq
//! ```
//!
//! which are the derived representations of the group generators scaled by
//! `-1/(2 pi i)`; the sign of the symbol-level star product is pinned by
//! the homomorphism test `quantize(f * g) = quantize(f) quantize(g)`.

use crate::error::{Error, Result};
use crate::numfmt::{fmt_f64, pairwise_sum};
use crate::symbol::{PlanckParameter, Symbol};
use crate::C64;
use num_traits::ToPrimitive;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex};

const TAIL_LIMIT: f64 = 1e-12;
const WEYL_DEGREE_LIMIT: usize = 12;
const EIGEN_INDEX_LIMIT: usize = 12;

/// A square, origin-symmetric phase-space grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    n_points: usize,
    half_width: f64,
    spacing: f64,
}

impl PhaseGrid {
    /// `n_points` must be a power of two `>= 64`; `half_width > 0`.
    pub fn new(n_points: usize, half_width: f64) -> Result<Self> {
        if n_points < 64 || !n_points.is_power_of_two() {
            return Err(Error::GridSize(n_points));
        }
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::NonPositive {
                name: "grid half-width L",
                value: half_width,
            });
        }
        Ok(PhaseGrid {
            n_points,
            half_width,
            spacing: 2.0 * half_width / n_points as f64,
        })
    }

    /// Grid sized for Gaussian states of the `(m, omega)` oscillator at the
    /// given Planck parameter, with optional coherent shifts `(x0, y0)`:
    /// `L = 8 max(1, sqrt(hbar m omega), sqrt(hbar / (m omega))) + s` where
    /// `s` is the largest envelope displacement `(h/2) max(|x0|, |y0|)`.
    pub fn default_for(
        planck: &PlanckParameter,
        m: f64,
        omega: f64,
        shifts: &[(f64, f64)],
    ) -> Result<Self> {
        let hbar = planck.hbar();
        let scale = 1.0f64
            .max((hbar * m * omega).sqrt())
            .max((hbar / (m * omega)).sqrt());
        let disp = shifts
            .iter()
            .map(|&(x0, y0)| 0.5 * planck.h() * x0.abs().max(y0.abs()))
            .fold(0.0, f64::max);
        PhaseGrid::new(256, 8.0 * scale + disp)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Coordinate of node `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n_points / 2) as f64) * self.spacing
    }

    fn len(&self) -> usize {
        self.n_points * self.n_points
    }
}

/// A sampled state on a phase-space grid, tagged with `h > 0`.
///
/// Layout is row-major with `p` fastest: `samples[iq * N + ip]`.
#[derive(Debug, Clone)]
pub struct StateVector {
    grid: PhaseGrid,
    planck: PlanckParameter,
    samples: Vec<C64>,
}

impl StateVector {
    /// Wraps samples after checking the tail-containment invariant.
    pub fn from_samples(
        grid: PhaseGrid,
        planck: PlanckParameter,
        samples: Vec<C64>,
    ) -> Result<Self> {
        if planck.h() <= 0.0 {
            return Err(Error::NonPositive {
                name: "h",
                value: planck.h(),
            });
        }
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let v = StateVector {
            grid,
            planck,
            samples,
        };
        v.check_containment()?;
        Ok(v)
    }

    fn check_containment(&self) -> Result<()> {
        self.check_containment_with(TAIL_LIMIT)
    }

    fn check_containment_with(&self, limit: f64) -> Result<()> {
        let n = self.grid.n_points;
        let peak = self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Ok(());
        }
        let mut boundary = 0.0f64;
        for i in 0..n {
            for &j in &[0usize, n - 1] {
                boundary = boundary.max(self.samples[i * n + j].norm());
                boundary = boundary.max(self.samples[j * n + i].norm());
            }
        }
        if boundary > limit * peak {
            return Err(Error::Containment {
                boundary,
                limit: limit * peak,
            });
        }
        Ok(())
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn planck(&self) -> &PlanckParameter {
        &self.planck
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn sample_at(&self, iq: usize, ip: usize) -> C64 {
        self.samples[iq * self.grid.n_points + ip]
    }

    pub fn scale(&self, c: C64) -> StateVector {
        StateVector {
            grid: self.grid,
            planck: self.planck,
            samples: self.samples.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        if !same_space(self, other) {
            return Err(Error::GridMismatch);
        }
        Ok(StateVector {
            grid: self.grid,
            planck: self.planck,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &StateVector) -> Result<StateVector> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn norm(&self) -> f64 {
        inner(self, self)
            .map(|c| c.re.max(0.0).sqrt())
            .unwrap_or(0.0)
    }

    pub fn normalize(&self) -> StateVector {
        let n = self.norm();
        self.scale(C64::new(1.0 / n, 0.0))
    }

    /// Dumps the samples as CSV (`q,p,re,im`), row-major with `p` fastest.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "q,p,re,im")?;
        let n = self.grid.n_points;
        for iq in 0..n {
            for ip in 0..n {
                let v = self.samples[iq * n + ip];
                writeln!(
                    w,
                    "{},{},{},{}",
                    fmt_f64(self.grid.coord(iq)),
                    fmt_f64(self.grid.coord(ip)),
                    fmt_f64(v.re),
                    fmt_f64(v.im)
                )?;
            }
        }
        Ok(())
    }
}

fn same_space(a: &StateVector, b: &StateVector) -> bool {
    a.grid == b.grid && a.planck.h() == b.planck.h()
}

/// Builds a grid, validating the size constraints.
pub fn make_grid(n_points: usize, half_width: f64) -> Result<PhaseGrid> {
    PhaseGrid::new(n_points, half_width)
}

/// The `(4/h)^n`-weighted inner product, pairwise-tree summed so the result
/// is reproducible regardless of surrounding parallelism.
pub fn inner(v1: &StateVector, v2: &StateVector) -> Result<C64> {
    if !same_space(v1, v2) {
        return Err(Error::GridMismatch);
    }
    let products: Vec<C64> = v1
        .samples
        .iter()
        .zip(&v2.samples)
        .map(|(a, b)| a * b.conj())
        .collect();
    let d2 = v1.grid.spacing * v1.grid.spacing;
    Ok(pairwise_sum(&products) * (4.0 / v1.planck.h()) * d2)
}

/// Samples of the vacuum Gaussian
/// `exp(-(2 pi / h)((omega m) q^2 + (omega m)^-1 p^2))`; unit norm under
/// [`inner`] up to quadrature error.
pub fn vacuum(grid: PhaseGrid, planck: PlanckParameter, m: f64, omega: f64) -> Result<StateVector> {
    check_positive_f64(m, "m")?;
    check_positive_f64(omega, "omega")?;
    if planck.h() <= 0.0 {
        return Err(Error::NonPositive {
            name: "h",
            value: planck.h(),
        });
    }
    let wm = omega * m;
    let c = 2.0 * std::f64::consts::PI / planck.h();
    let n = grid.n_points;
    let mut samples = vec![C64::new(0.0, 0.0); grid.len()];
    for iq in 0..n {
        let q = grid.coord(iq);
        for ip in 0..n {
            let p = grid.coord(ip);
            samples[iq * n + ip] = C64::new((-c * (wm * q * q + p * p / wm)).exp(), 0.0);
        }
    }
    StateVector::from_samples(grid, planck, samples)
}

/// The coherent vector `rho_h(0, x0, y0) f_0` in closed form:
/// `exp(-2 pi i (q x0 + p y0)) f_0(q - (h/2) y0, p + (h/2) x0)`.
pub fn coherent_vector(
    grid: PhaseGrid,
    planck: PlanckParameter,
    x0: f64,
    y0: f64,
    m: f64,
    omega: f64,
) -> Result<StateVector> {
    check_positive_f64(m, "m")?;
    check_positive_f64(omega, "omega")?;
    if planck.h() <= 0.0 {
        return Err(Error::NonPositive {
            name: "h",
            value: planck.h(),
        });
    }
    let h = planck.h();
    let wm = omega * m;
    let c = 2.0 * std::f64::consts::PI / h;
    let tau = 2.0 * std::f64::consts::PI;
    let n = grid.n_points;
    let mut samples = vec![C64::new(0.0, 0.0); grid.len()];
    for iq in 0..n {
        let q = grid.coord(iq);
        for ip in 0..n {
            let p = grid.coord(ip);
            let qs = q - 0.5 * h * y0;
            let ps = p + 0.5 * h * x0;
            let gauss = (-c * (wm * qs * qs + ps * ps / wm)).exp();
            let phase = -tau * (q * x0 + p * y0);
            samples[iq * n + ip] = C64::from_polar(gauss, phase);
        }
    }
    StateVector::from_samples(grid, planck, samples)
}

/// `k`-th normalised oscillator eigenfunction, built by repeated
/// application of the creation ladder `omega m Q - i P` to the vacuum.
///
/// The final containment check runs at `1e-10` relative rather than the
/// sampling limit: repeated spectral derivatives leave rounding noise near
/// `1e-13` of the peak spread over the whole grid, while a genuinely
/// uncontained Hermite tail sits many orders above `1e-10`.
pub fn eigenfunction(
    grid: PhaseGrid,
    planck: PlanckParameter,
    k: usize,
    m: f64,
    omega: f64,
) -> Result<StateVector> {
    if k > EIGEN_INDEX_LIMIT {
        return Err(Error::EigenIndex(k));
    }
    let mut v = vacuum(grid, planck, m, omega)?.normalize();
    if k == 0 {
        return Ok(v);
    }
    let create = creation_operator(&planck, m, omega);
    for _ in 0..k {
        v = create.apply(&v)?.normalize();
    }
    v.check_containment_with(1e-10)?;
    Ok(v)
}

fn check_positive_f64(x: f64, name: &'static str) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::NonPositive { name, value: x });
    }
    Ok(())
}

/// Generators of the derived representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    X,
    Y,
    S,
}

/// A composition tree of primitive grid actions.
#[derive(Debug, Clone)]
pub enum GridOperator {
    Identity,
    /// Multiplication by the `q` coordinate.
    MulQ,
    /// Multiplication by the `p` coordinate.
    MulP,
    /// Spectral `d/dq`.
    DiffQ,
    /// Spectral `d/dp`.
    DiffP,
    Scale(C64, Box<GridOperator>),
    Sum(Vec<GridOperator>),
    /// Operator product; `Product([A, B])` applies `B` first.
    Product(Vec<GridOperator>),
}

impl GridOperator {
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        match self {
            GridOperator::Identity => Ok(v.clone()),
            GridOperator::MulQ => Ok(mul_coord(v, true)),
            GridOperator::MulP => Ok(mul_coord(v, false)),
            GridOperator::DiffQ => Ok(spectral_diff(v, true)),
            GridOperator::DiffP => Ok(spectral_diff(v, false)),
            GridOperator::Scale(c, op) => Ok(op.apply(v)?.scale(*c)),
            GridOperator::Sum(ops) => {
                let mut acc = zero_like(v);
                for op in ops {
                    acc = acc.add(&op.apply(v)?)?;
                }
                Ok(acc)
            }
            GridOperator::Product(ops) => {
                let mut cur = v.clone();
                for op in ops.iter().rev() {
                    cur = op.apply(&cur)?;
                }
                Ok(cur)
            }
        }
    }

    pub fn scaled(self, c: C64) -> GridOperator {
        GridOperator::Scale(c, Box::new(self))
    }
}

fn zero_like(v: &StateVector) -> StateVector {
    StateVector {
        grid: v.grid,
        planck: v.planck,
        samples: vec![C64::new(0.0, 0.0); v.samples.len()],
    }
}

fn mul_coord(v: &StateVector, along_q: bool) -> StateVector {
    let n = v.grid.n_points;
    let mut samples = v.samples.clone();
    for iq in 0..n {
        for ip in 0..n {
            let c = if along_q {
                v.grid.coord(iq)
            } else {
                v.grid.coord(ip)
            };
            samples[iq * n + ip] *= c;
        }
    }
    StateVector {
        grid: v.grid,
        planck: v.planck,
        samples,
    }
}

type FftMap = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

static FFT_CACHE: Lazy<Mutex<FftMap>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = FFT_CACHE.lock().unwrap();
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Spectral derivative along one axis of the periodic grid. The Nyquist
/// mode is zeroed, the standard symmetric choice.
fn spectral_diff(v: &StateVector, along_q: bool) -> StateVector {
    let n = v.grid.n_points;
    let fwd = plan(n, false);
    let inv = plan(n, true);
    let mut samples = v.samples.clone();
    let mut buf = vec![rustfft::num_complex::Complex::<f64>::new(0.0, 0.0); n];
    let k0 = std::f64::consts::PI / v.grid.half_width;
    for line in 0..n {
        // gather the line
        for (j, b) in buf.iter_mut().enumerate() {
            let idx = if along_q { j * n + line } else { line * n + j };
            let s = samples[idx];
            *b = rustfft::num_complex::Complex::new(s.re, s.im);
        }
        fwd.process(&mut buf);
        for (j, b) in buf.iter_mut().enumerate() {
            let f = if j < n / 2 {
                j as f64
            } else if j == n / 2 {
                0.0
            } else {
                j as f64 - n as f64
            };
            let k = k0 * f;
            *b *= rustfft::num_complex::Complex::new(0.0, k);
        }
        inv.process(&mut buf);
        let scale = 1.0 / n as f64;
        for (j, b) in buf.iter().enumerate() {
            let idx = if along_q { j * n + line } else { line * n + j };
            samples[idx] = C64::new(b.re * scale, b.im * scale);
        }
    }
    StateVector {
        grid: v.grid,
        planck: v.planck,
        samples,
    }
}

/// Shifts samples by real offsets `(dq, dp)` through Fourier phases:
/// the result samples `f(q + dq, p + dp)`.
pub fn fourier_shift(v: &StateVector, dq: f64, dp: f64) -> StateVector {
    let n = v.grid.n_points;
    let fwd = plan(n, false);
    let inv = plan(n, true);
    let k0 = std::f64::consts::PI / v.grid.half_width;
    let mut samples = v.samples.clone();
    for (along_q, delta) in [(true, dq), (false, dp)] {
        if delta == 0.0 {
            continue;
        }
        let mut buf = vec![rustfft::num_complex::Complex::<f64>::new(0.0, 0.0); n];
        for line in 0..n {
            for (j, b) in buf.iter_mut().enumerate() {
                let idx = if along_q { j * n + line } else { line * n + j };
                let s = samples[idx];
                *b = rustfft::num_complex::Complex::new(s.re, s.im);
            }
            fwd.process(&mut buf);
            for (j, b) in buf.iter_mut().enumerate() {
                let f = if j <= n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                let k = k0 * f;
                let ph = rustfft::num_complex::Complex::from_polar(1.0, k * delta);
                *b *= ph;
            }
            inv.process(&mut buf);
            let scale = 1.0 / n as f64;
            for (j, b) in buf.iter().enumerate() {
                let idx = if along_q { j * n + line } else { line * n + j };
                samples[idx] = C64::new(b.re * scale, b.im * scale);
            }
        }
    }
    StateVector {
        grid: v.grid,
        planck: v.planck,
        samples,
    }
}

/// The derived representation of a Lie algebra generator:
/// `d rho(X) = (h/2) d/dp - 2 pi i q.`, `d rho(Y) = -(h/2) d/dq - 2 pi i p.`,
/// `d rho(S) = -2 pi i h`.
pub fn derived_rep(which: Generator, planck: &PlanckParameter) -> Result<GridOperator> {
    if planck.h() <= 0.0 {
        return Err(Error::NonPositive {
            name: "h",
            value: planck.h(),
        });
    }
    let h = planck.h();
    let tau = 2.0 * std::f64::consts::PI;
    Ok(match which {
        Generator::X => GridOperator::Sum(vec![
            GridOperator::DiffP.scaled(C64::new(0.5 * h, 0.0)),
            GridOperator::MulQ.scaled(C64::new(0.0, -tau)),
        ]),
        Generator::Y => GridOperator::Sum(vec![
            GridOperator::DiffQ.scaled(C64::new(-0.5 * h, 0.0)),
            GridOperator::MulP.scaled(C64::new(0.0, -tau)),
        ]),
        Generator::S => GridOperator::Identity.scaled(C64::new(0.0, -tau * h)),
    })
}

/// The Weyl position operator `Q = q. + (i hbar / 2) d/dp`.
pub fn op_q(planck: &PlanckParameter) -> GridOperator {
    GridOperator::Sum(vec![
        GridOperator::MulQ,
        GridOperator::DiffP.scaled(C64::new(0.0, 0.5 * planck.hbar())),
    ])
}

/// The Weyl momentum operator `P = p. - (i hbar / 2) d/dq`.
pub fn op_p(planck: &PlanckParameter) -> GridOperator {
    GridOperator::Sum(vec![
        GridOperator::MulP,
        GridOperator::DiffQ.scaled(C64::new(0.0, -0.5 * planck.hbar())),
    ])
}

/// Annihilation operator `omega m Q + i P`; kills the `(m, omega)` vacuum.
pub fn annihilation_operator(planck: &PlanckParameter, m: f64, omega: f64) -> GridOperator {
    GridOperator::Sum(vec![
        op_q(planck).scaled(C64::new(omega * m, 0.0)),
        op_p(planck).scaled(C64::new(0.0, 1.0)),
    ])
}

/// Creation operator `omega m Q - i P`.
pub fn creation_operator(planck: &PlanckParameter, m: f64, omega: f64) -> GridOperator {
    GridOperator::Sum(vec![
        op_q(planck).scaled(C64::new(omega * m, 0.0)),
        op_p(planck).scaled(C64::new(0.0, -1.0)),
    ])
}

/// Distinct arrangements of `a` copies of `Q` and `b` copies of `P`.
fn multiset_orderings(a: usize, b: usize) -> Vec<Vec<bool>> {
    // true = Q, false = P
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(a + b);
    fn rec(qs: usize, ps: usize, cur: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if qs == 0 && ps == 0 {
            out.push(cur.clone());
            return;
        }
        if qs > 0 {
            cur.push(true);
            rec(qs - 1, ps, cur, out);
            cur.pop();
        }
        if ps > 0 {
            cur.push(false);
            rec(qs, ps - 1, cur, out);
            cur.pop();
        }
    }
    rec(a, b, &mut cur, &mut out);
    out
}

/// Weyl quantisation: monomial `q^a p^b` maps to the average over all
/// orderings of `a` copies of `Q` and `b` copies of `P`; linear in the
/// symbol, with `hbar` powers substituted numerically.
pub fn quantize(f: &Symbol, planck: &PlanckParameter) -> Result<GridOperator> {
    if planck.h() <= 0.0 {
        return Err(Error::NonPositive {
            name: "h",
            value: planck.h(),
        });
    }
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch(
            "grid quantisation is implemented for n = 1".into(),
        ));
    }
    let hbar = planck.hbar();
    let qop = op_q(planck);
    let pop = op_p(planck);
    let mut parts: Vec<GridOperator> = Vec::new();
    for (key, coeff) in f.terms() {
        let a = key.q[0] as usize;
        let b = key.p[0] as usize;
        if a + b > WEYL_DEGREE_LIMIT {
            return Err(Error::WeylDegree(a + b, WEYL_DEGREE_LIMIT));
        }
        let c_num = C64::new(
            coeff.re.to_f64().unwrap_or(f64::NAN),
            coeff.im.to_f64().unwrap_or(f64::NAN),
        ) * hbar.powi(key.hbar as i32);
        let orderings = multiset_orderings(a, b);
        let weight = C64::new(1.0 / orderings.len() as f64, 0.0);
        let mut sym_parts: Vec<GridOperator> = Vec::new();
        for arrangement in orderings {
            if arrangement.is_empty() {
                sym_parts.push(GridOperator::Identity);
                continue;
            }
            let factors: Vec<GridOperator> = arrangement
                .iter()
                .map(|&is_q| if is_q { qop.clone() } else { pop.clone() })
                .collect();
            sym_parts.push(GridOperator::Product(factors));
        }
        parts.push(GridOperator::Sum(sym_parts).scaled(weight * c_num));
    }
    if parts.is_empty() {
        return Ok(GridOperator::Identity.scaled(C64::new(0.0, 0.0)));
    }
    Ok(GridOperator::Sum(parts))
}

/// `<quantize(f) v, v>`.
pub fn expectation(f: &Symbol, v: &StateVector) -> Result<C64> {
    let op = quantize(f, v.planck())?;
    inner(&op.apply(v)?, v)
}

/// Relative residual of the Fock-membership operator
/// `D_h = (h/2)(d/dp + i d/dq) + 2 pi (p + i q).` applied to `v`.
pub fn fock_membership_residual(v: &StateVector) -> Result<f64> {
    let h = v.planck().h();
    let tau = 2.0 * std::f64::consts::PI;
    let d = GridOperator::Sum(vec![
        GridOperator::DiffP.scaled(C64::new(0.5 * h, 0.0)),
        GridOperator::DiffQ.scaled(C64::new(0.0, 0.5 * h)),
        GridOperator::MulP.scaled(C64::new(tau, 0.0)),
        GridOperator::MulQ.scaled(C64::new(0.0, tau)),
    ]);
    Ok(d.apply(v)?.norm() / v.norm())
}

/// Relative residual of the annihilation operator on `v`.
pub fn annihilation_residual(v: &StateVector, m: f64, omega: f64) -> Result<f64> {
    let a = annihilation_operator(v.planck(), m, omega);
    Ok(a.apply(v)?.norm() / v.norm())
}

/// The covariant symbol `<op f_(x0,y0), f_(x0,y0)>` of a grid operator at
/// the coherent-state grid point `(x0, y0)`.
pub fn covariant_symbol(
    op: &GridOperator,
    grid: PhaseGrid,
    planck: PlanckParameter,
    x0: f64,
    y0: f64,
    m: f64,
    omega: f64,
) -> Result<C64> {
    let f = coherent_vector(grid, planck, x0, y0, m, omega)?;
    inner(&op.apply(&f)?, &f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use crate::symbol::{hamiltonian_ho, PlanckParameter, Symbol};

    const PI: f64 = std::f64::consts::PI;

    fn planck1() -> PlanckParameter {
        PlanckParameter::from_h(1.0).unwrap()
    }

    fn grid() -> PhaseGrid {
        make_grid(256, 8.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert_eq!(make_grid(256, 8.0).unwrap().spacing(), 1.0 / 16.0);
        assert!(matches!(make_grid(100, 8.0), Err(Error::GridSize(100))));
        assert!(make_grid(256, -1.0).is_err());
        assert!(matches!(make_grid(32, 8.0), Err(Error::GridSize(32))));
    }

    #[test]
    fn vacuum_center_norm_annihilation() {
        let v = vacuum(grid(), planck1(), 1.0, 1.0).unwrap();
        let n = v.grid().n_points();
        assert_eq!(v.sample_at(n / 2, n / 2), C64::new(1.0, 0.0));
        assert!((v.norm() - 1.0).abs() < 1e-8);
        assert!(annihilation_residual(&v, 1.0, 1.0).unwrap() <= 1e-8);
    }

    #[test]
    fn coherent_examples() {
        let v0 = vacuum(grid(), planck1(), 1.0, 1.0).unwrap();
        let c0 = coherent_vector(grid(), planck1(), 0.0, 0.0, 1.0, 1.0).unwrap();
        let diff: f64 = v0
            .samples()
            .iter()
            .zip(c0.samples())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-14);

        let c = coherent_vector(grid(), planck1(), 1.0, 0.0, 1.0, 1.0).unwrap();
        assert!((c.norm() - 1.0).abs() < 1e-8);

        // closed-form Gaussian overlap |<f_(1,0), f_0>| = exp(-pi/4) * exp(-pi/4)
        let overlap = inner(&c, &v0).unwrap().norm();
        assert!((overlap - (-PI / 2.0).exp()).abs() < 1e-8);
    }

    #[test]
    fn spectral_derivative_is_accurate_on_gaussians() {
        let v = vacuum(grid(), planck1(), 1.0, 1.0).unwrap();
        let dv = GridOperator::DiffQ.apply(&v).unwrap();
        let n = v.grid().n_points();
        let mut worst = 0.0f64;
        for iq in 0..n {
            let q = v.grid().coord(iq);
            for ip in 0..n {
                let p = v.grid().coord(ip);
                let expect = -4.0 * PI * q * (-2.0 * PI * (q * q + p * p)).exp();
                worst = worst.max((dv.sample_at(iq, ip) - C64::new(expect, 0.0)).norm());
            }
        }
        assert!(worst < 1e-9, "worst derivative error {worst}");
    }

    #[test]
    fn derived_rep_commutator_and_scalars() {
        let planck = planck1();
        let v = vacuum(grid(), planck, 1.0, 1.0).unwrap();
        let x = derived_rep(Generator::X, &planck).unwrap();
        let y = derived_rep(Generator::Y, &planck).unwrap();
        let s = derived_rep(Generator::S, &planck).unwrap();

        let xy = x.apply(&y.apply(&v).unwrap()).unwrap();
        let yx = y.apply(&x.apply(&v).unwrap()).unwrap();
        let comm = xy.sub(&yx).unwrap();
        let sv = s.apply(&v).unwrap();
        assert!(comm.sub(&sv).unwrap().norm() <= 1e-8);

        // d rho(S) acts exactly as the scalar -2 pi i h
        let expect = v.scale(C64::new(0.0, -2.0 * PI * planck.h()));
        let diff: f64 = sv
            .samples()
            .iter()
            .zip(expect.samples())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert_eq!(diff, 0.0);

        // A_h = d rho(X + i Y) kills the vacuum
        let a = GridOperator::Sum(vec![x, y.scaled(C64::new(0.0, 1.0))]);
        assert!(a.apply(&v).unwrap().norm() / v.norm() <= 1e-8);
    }

    #[test]
    fn quantize_examples() {
        let planck = planck1();
        let v = coherent_vector(grid(), planck, 0.5, -0.3, 1.0, 1.0).unwrap();

        // f = 1 is the identity
        let one = quantize(&Symbol::one(1), &planck).unwrap();
        assert!(one.apply(&v).unwrap().sub(&v).unwrap().norm() < 1e-12);

        // f = qp is the symmetrised product
        let f = Symbol::var_q(1, 0).mul(&Symbol::var_p(1, 0)).unwrap();
        let op = quantize(&f, &planck).unwrap();
        let qo = op_q(&planck);
        let po = op_p(&planck);
        let sym = qo
            .apply(&po.apply(&v).unwrap())
            .unwrap()
            .add(&po.apply(&qo.apply(&v).unwrap()).unwrap())
            .unwrap()
            .scale(C64::new(0.5, 0.0));
        assert!(op.apply(&v).unwrap().sub(&sym).unwrap().norm() < 1e-10);

        // homomorphism on q, p pins the star sign
        let star = Symbol::var_q(1, 0).star(&Symbol::var_p(1, 0)).unwrap();
        let lhs = quantize(&star, &planck).unwrap().apply(&v).unwrap();
        let rhs = qo.apply(&po.apply(&v).unwrap()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm() / v.norm() <= 1e-8);
    }

    #[test]
    fn vacuum_energy_and_eigenfunctions() {
        let planck = planck1();
        let v = vacuum(grid(), planck, 1.0, 1.0).unwrap();
        let h_ho = hamiltonian_ho(&rat(1, 1), &rat(1, 1)).unwrap();

        // <q> = 0 by odd symmetry
        let q_exp = expectation(&Symbol::var_q(1, 0), &v).unwrap();
        assert!(q_exp.norm() <= 1e-10);

        // <H> = hbar omega / 2 = 1 / (4 pi)
        let e = expectation(&h_ho, &v).unwrap();
        assert!((e.re - 1.0 / (4.0 * PI)).abs() <= 1e-6);
        assert!(e.im.abs() <= 1e-10);

        // eigenfunction ladder: k = 0 is the vacuum
        let v0 = eigenfunction(grid(), planck, 0, 1.0, 1.0).unwrap();
        assert!(v0.sub(&v.normalize()).unwrap().norm() < 1e-10);

        for k in 0..=6 {
            let vk = eigenfunction(grid(), planck, k, 1.0, 1.0).unwrap();
            let hv = quantize(&h_ho, &planck).unwrap().apply(&vk).unwrap();
            let want = planck.hbar() * (k as f64 + 0.5);
            let resid = hv.sub(&vk.scale(C64::new(want, 0.0))).unwrap().norm() / want;
            assert!(resid <= 1e-6, "k={k} residual {resid}");
        }
        assert!(eigenfunction(grid(), planck, 13, 1.0, 1.0).is_err());
    }

    #[test]
    fn inner_product_properties() {
        let planck = planck1();
        let a = coherent_vector(grid(), planck, 0.4, 0.2, 1.0, 1.0).unwrap();
        let b = coherent_vector(grid(), planck, -0.1, 0.7, 1.0, 1.0).unwrap();
        let ab = inner(&a, &b).unwrap();
        let ba = inner(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() <= 1e-12);
        let z = a.scale(C64::new(0.0, 0.0));
        assert_eq!(inner(&a, &z).unwrap(), C64::new(0.0, 0.0));

        let h2 = PlanckParameter::from_h(0.5).unwrap();
        let c = vacuum(grid(), h2, 1.0, 1.0).unwrap();
        assert!(matches!(inner(&a, &c), Err(Error::GridMismatch)));
    }

    #[test]
    fn membership_residuals() {
        let planck = planck1();
        let v = vacuum(grid(), planck, 1.0, 1.0).unwrap();
        assert!(fock_membership_residual(&v).unwrap() <= 1e-8);

        let c = coherent_vector(grid(), planck, 0.8, -0.6, 1.0, 1.0).unwrap();
        assert!(fock_membership_residual(&c).unwrap() <= 1e-8);

        // Gaussian of doubled variance is far from the Fock space
        let n = grid().n_points();
        let mut samples = vec![C64::new(0.0, 0.0); n * n];
        for iq in 0..n {
            let q = grid().coord(iq);
            for ip in 0..n {
                let p = grid().coord(ip);
                samples[iq * n + ip] = C64::new((-PI * (q * q + p * p)).exp(), 0.0);
            }
        }
        let wrong = StateVector::from_samples(grid(), planck, samples).unwrap();
        assert!(fock_membership_residual(&wrong).unwrap() >= 1e-2);
    }

    #[test]
    fn canonical_commutator_on_contained_vectors() {
        // [Q, P] = i hbar on smooth contained vectors
        for h in [1.0, 0.5] {
            let planck = PlanckParameter::from_h(h).unwrap();
            let v = coherent_vector(grid(), planck, 0.6, -0.2, 1.0, 1.0).unwrap();
            let qo = op_q(&planck);
            let po = op_p(&planck);
            let comm = qo
                .apply(&po.apply(&v).unwrap())
                .unwrap()
                .sub(&po.apply(&qo.apply(&v).unwrap()).unwrap())
                .unwrap();
            let want = v.scale(C64::new(0.0, planck.hbar()));
            assert!(comm.sub(&want).unwrap().norm() / v.norm() <= 1e-8);
        }
    }

    #[test]
    fn covariant_symbol_examples() {
        let planck = planck1();
        let id = GridOperator::Identity;
        let c = covariant_symbol(&id, grid(), planck, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!((c - C64::new(1.0, 0.0)).norm() <= 1e-8);

        let opq = quantize(&Symbol::var_q(1, 0), &planck).unwrap();
        let c = covariant_symbol(&opq, grid(), planck, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(c.norm() <= 1e-8);

        let h_ho = hamiltonian_ho(&rat(1, 1), &rat(1, 1)).unwrap();
        let oph = quantize(&h_ho, &planck).unwrap();
        let c = covariant_symbol(&oph, grid(), planck, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!((c.re - planck.hbar() / 2.0).abs() <= 1e-6);
    }

    #[test]
    fn csv_dump_shape() {
        let g = make_grid(64, 6.0);
        // 64 is allowed
        let g = g.unwrap();
        let planck = planck1();
        let v = vacuum(g, planck, 1.0, 1.0).unwrap();
        let mut out = Vec::new();
        v.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "q,p,re,im");
        assert_eq!(text.lines().count(), 1 + 64 * 64);
        // p varies fastest
        let second = text.lines().nth(1).unwrap();
        let third = text.lines().nth(2).unwrap();
        let q2: f64 = second.split(',').next().unwrap().parse().unwrap();
        let q3: f64 = third.split(',').next().unwrap().parse().unwrap();
        assert_eq!(q2, q3);
    }

    #[test]
    fn fourier_shift_moves_gaussian() {
        let planck = planck1();
        let v = vacuum(grid(), planck, 1.0, 1.0).unwrap();
        let shifted = fourier_shift(&v, 0.25, -0.5);
        let n = v.grid().n_points();
        let mut worst = 0.0f64;
        for iq in 0..n {
            let q = v.grid().coord(iq);
            for ip in 0..n {
                let p = v.grid().coord(ip);
                let expect = (-2.0 * PI * ((q + 0.25) * (q + 0.25) + (p - 0.5) * (p - 0.5))).exp();
                worst = worst.max((shifted.sample_at(iq, ip) - C64::new(expect, 0.0)).norm());
            }
        }
        assert!(worst < 1e-9, "worst shift error {worst}");
    }
}
