//! Time evolution of symbols and kernels.
//!
//! Flow orientation is fixed once by the closed-form oscillator flow: the
//! substitution
//!
//! ```text
//! q := q cos(w t) - (p / m w) sin(w t),
//! p := q m w sin(w t) + p cos(w t)
//! ```
//!
//! is [`ho_flow`], and every other entry point inherits the orientation
//! from it. The bracket ODE integrates `df/dt = pbracket(H, f)`, whose
//! solution for quadratic `H` is exactly that substitution; kernel centers
//! are transported by the same map, which keeps the observable/state
//! pairing derivative equal on both pictures. Trigonometric coefficients
//! are computed in `f64` and embedded into exact rationals, so the only
//! rounding is the `f64` rounding of `cos`/`sin` themselves.

use crate::error::{Error, Result};
use crate::states::GaussianKernel;
use crate::symbol::Symbol;
use crate::{rat_from_f64, Rational};
use num_traits::{ToPrimitive, Zero};

/// External force `z(t)` driving the oscillator (units M L / T^2).
#[derive(Debug, Clone, PartialEq)]
pub enum ForceProfile {
    Zero,
    Constant(f64),
    /// `z(t) = z0 cos(Omega t)`.
    Periodic {
        z0: f64,
        omega: f64,
    },
    /// Sampled `(t, z)` pairs, linearly interpolated and clamped at the ends.
    Tabulated(Vec<(f64, f64)>),
}

impl ForceProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ForceProfile::Zero => 0.0,
            ForceProfile::Constant(z0) => *z0,
            ForceProfile::Periodic { z0, omega } => z0 * (omega * t).cos(),
            ForceProfile::Tabulated(points) => {
                if points.is_empty() {
                    return 0.0;
                }
                if t <= points[0].0 {
                    return points[0].1;
                }
                if t >= points[points.len() - 1].0 {
                    return points[points.len() - 1].1;
                }
                let idx = points.partition_point(|&(ti, _)| ti <= t);
                let (t0, z0) = points[idx - 1];
                let (t1, z1) = points[idx];
                if t1 == t0 {
                    z0
                } else {
                    z0 + (z1 - z0) * (t - t0) / (t1 - t0)
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ForceProfile::Zero)
            || matches!(self, ForceProfile::Constant(z) if *z == 0.0)
            || matches!(self, ForceProfile::Periodic { z0, .. } if *z0 == 0.0)
    }
}

// --- quadrature -------------------------------------------------------------

const SIMPSON_TOL: f64 = 1e-10;
const SIMPSON_MAX_DEPTH: u32 = 50;

fn simpson_slice(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_slice(a, m, fa, flm, fm);
    let right = simpson_slice(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= SIMPSON_MAX_DEPTH {
        return Err(Error::Tolerance);
    }
    let l = adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
    let r = adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
    Ok(l + r)
}

/// Adaptive Simpson quadrature to absolute tolerance `1e-10`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson_slice(a, b, fa, fm, fb);
    adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, SIMPSON_TOL, 0)
}

/// `(alpha, beta) = (int z cos(w tau) d tau, int z sin(w tau) d tau)` over
/// `[t1, t2]`. Periodic forces use antiderivatives that vanish at the lower
/// limit (validated against quadrature in the test suite); other profiles
/// go through adaptive Simpson quadrature.
pub fn force_integrals(z: &ForceProfile, omega: f64, t1: f64, t2: f64) -> Result<(f64, f64)> {
    if t2 < t1 {
        return Err(Error::NonPositive {
            name: "t2 - t1",
            value: t2 - t1,
        });
    }
    match z {
        ForceProfile::Zero => Ok((0.0, 0.0)),
        ForceProfile::Periodic { z0, omega: drive } => {
            Ok(periodic_force_integrals(*z0, *drive, omega, t1, t2))
        }
        _ => {
            let zc = |t: f64| z.eval(t) * (omega * t).cos();
            let zs = |t: f64| z.eval(t) * (omega * t).sin();
            Ok((
                adaptive_simpson(&zc, t1, t2)?,
                adaptive_simpson(&zs, t1, t2)?,
            ))
        }
    }
}

/// Closed-form force integrals for `z = z0 cos(Omega t)`; definite
/// integrals, zero at `t2 = t1`.
fn periodic_force_integrals(z0: f64, drive: f64, omega: f64, t1: f64, t2: f64) -> (f64, f64) {
    let sum = drive + omega;
    let diff = drive - omega;
    let resonant = diff.abs() <= 1e-14 * drive.abs().max(omega.abs());
    let anti_c = |t: f64| -> f64 {
        if resonant {
            0.5 * t + (2.0 * omega * t).sin() / (4.0 * omega)
        } else {
            0.5 * ((sum * t).sin() / sum + (diff * t).sin() / diff)
        }
    };
    let anti_s = |t: f64| -> f64 {
        if resonant {
            -(2.0 * omega * t).cos() / (4.0 * omega)
        } else {
            // int cos(D t) sin(w t) = -cos((w+D)t)/(2(w+D)) - cos((w-D)t)/(2(w-D))
            -0.5 * ((sum * t).cos() / sum + ((omega - drive) * t).cos() / (omega - drive))
        }
    };
    (
        z0 * (anti_c(t2) - anti_c(t1)),
        z0 * (anti_s(t2) - anti_s(t1)),
    )
}

// --- closed-form flows ------------------------------------------------------

fn check_positive(x: f64, name: &'static str) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::NonPositive { name, value: x });
    }
    Ok(())
}

/// Affine substitution `q := cq q + cp p + c1`, as exact rationals built
/// from the `f64` coefficients.
fn affine_replacement(n: usize, cq: f64, cp: f64, c1: f64) -> Symbol {
    let mut acc = Symbol::zero(n);
    if cq != 0.0 {
        acc = acc
            .add(&Symbol::var_q(n, 0).scale_rational(&rat_from_f64(cq)))
            .unwrap();
    }
    if cp != 0.0 {
        acc = acc
            .add(&Symbol::var_p(n, 0).scale_rational(&rat_from_f64(cp)))
            .unwrap();
    }
    if c1 != 0.0 {
        acc = acc
            .add(&Symbol::constant_rational(n, rat_from_f64(c1)))
            .unwrap();
    }
    acc
}

/// Substitutes `q := q + dq`, `p := p + dp`.
pub fn translate_symbol(f: &Symbol, dq: f64, dp: f64) -> Result<Symbol> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch(
            "flows are implemented for n = 1".into(),
        ));
    }
    let rq = affine_replacement(1, 1.0, 0.0, dq);
    let rp = affine_replacement(1, 0.0, 1.0, dp);
    f.substitute(&[rq], &[rp])
}

/// Closed-form oscillator flow on symbols: the rotation substitution above.
pub fn ho_flow(f: &Symbol, t: f64, m: f64, omega: f64) -> Result<Symbol> {
    forced_flow(f, t, m, omega, &ForceProfile::Zero)
}

/// Closed-form forced-oscillator flow: the [`ho_flow`] rotation composed
/// with the translations `q += beta / (m w)`, `p += -alpha`, where
/// `(alpha, beta)` are the force integrals over `[0, t]`.
pub fn forced_flow(f: &Symbol, t: f64, m: f64, omega: f64, z: &ForceProfile) -> Result<Symbol> {
    check_positive(m, "m")?;
    check_positive(omega, "omega")?;
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch(
            "flows are implemented for n = 1".into(),
        ));
    }
    let (alpha, beta) = if z.is_zero() {
        (0.0, 0.0)
    } else {
        let (a, b) = force_integrals(z, omega, 0.0_f64.min(t), 0.0_f64.max(t))?;
        if t >= 0.0 {
            (a, b)
        } else {
            (-a, -b)
        }
    };
    let (sin, cos) = (omega * t).sin_cos();
    let rq = affine_replacement(1, cos, -sin / (m * omega), beta / (m * omega));
    let rp = affine_replacement(1, m * omega * sin, cos, -alpha);
    f.substitute(&[rq], &[rp])
}

// --- bracket ODE ------------------------------------------------------------

/// Generator of the bracket ODE.
#[derive(Debug, Clone)]
pub enum HamiltonianModel {
    Static(Symbol),
    /// `H(t) = H_ho(m, omega) - z(t) q`.
    Forced {
        m: f64,
        omega: f64,
        profile: ForceProfile,
    },
}

impl HamiltonianModel {
    pub fn symbol_at(&self, t: f64) -> Result<Symbol> {
        match self {
            HamiltonianModel::Static(h) => Ok(h.clone()),
            HamiltonianModel::Forced { m, omega, profile } => {
                check_positive(*m, "m")?;
                check_positive(*omega, "omega")?;
                let h0 = crate::symbol::hamiltonian_ho(&rat_from_f64(*m), &rat_from_f64(*omega))?;
                let zt = profile.eval(t);
                if zt == 0.0 {
                    Ok(h0)
                } else {
                    h0.sub(&Symbol::var_q(1, 0).scale_rational(&rat_from_f64(zt)))
                }
            }
        }
    }
}

/// A time-tagged sequence of symbols.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Symbol>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &Symbol {
        self.states.last().expect("trajectory is never empty")
    }
}

fn bracket_rhs(
    h_model: &HamiltonianModel,
    t: f64,
    f: &Symbol,
    degree_cap: usize,
) -> Result<Symbol> {
    let h = h_model.symbol_at(t)?;
    let df = h.pbracket(f)?;
    let degree = df.qp_degree();
    if degree > degree_cap {
        return Err(Error::DegreeCap {
            degree,
            cap: degree_cap,
        });
    }
    Ok(df.round_to_f64())
}

/// Classical RK4 on the coefficient vector of `f`, with the right-hand side
/// `pbracket(H, f)` evaluated exactly and then rounded to floats. Degree
/// growth beyond `degree_cap` is a hard error, never a silent truncation.
pub fn integrate_bracket_ode(
    f0: &Symbol,
    h_model: &HamiltonianModel,
    t0: f64,
    t1: f64,
    dt: f64,
    degree_cap: usize,
) -> Result<Trajectory> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::NonPositive {
            name: "dt",
            value: dt,
        });
    }
    if t1 < t0 {
        return Err(Error::NonPositive {
            name: "t1 - t0",
            value: t1 - t0,
        });
    }
    if f0.qp_degree() > degree_cap {
        return Err(Error::DegreeCap {
            degree: f0.qp_degree(),
            cap: degree_cap,
        });
    }
    let half_dt = rat_from_f64(dt / 2.0);
    let full_dt = rat_from_f64(dt);
    let sixth_dt = rat_from_f64(dt / 6.0);
    let two = Rational::from_integer(2.into());

    let mut times = vec![t0];
    let mut states = vec![f0.round_to_f64()];
    let mut t = t0;
    let mut y = f0.round_to_f64();
    let eps = dt * 1e-9;
    while t + eps < t1 {
        let step = dt.min(t1 - t);
        let (h_half, h_full, h_sixth) = if step == dt {
            (half_dt.clone(), full_dt.clone(), sixth_dt.clone())
        } else {
            (
                rat_from_f64(step / 2.0),
                rat_from_f64(step),
                rat_from_f64(step / 6.0),
            )
        };
        let k1 = bracket_rhs(h_model, t, &y, degree_cap)?;
        let y2 = y.add(&k1.scale_rational(&h_half))?.round_to_f64();
        let k2 = bracket_rhs(h_model, t + step / 2.0, &y2, degree_cap)?;
        let y3 = y.add(&k2.scale_rational(&h_half))?.round_to_f64();
        let k3 = bracket_rhs(h_model, t + step / 2.0, &y3, degree_cap)?;
        let y4 = y.add(&k3.scale_rational(&h_full))?.round_to_f64();
        let k4 = bracket_rhs(h_model, t + step, &y4, degree_cap)?;
        let incr = k1
            .add(&k2.scale_rational(&two))?
            .add(&k3.scale_rational(&two))?
            .add(&k4)?;
        y = y.add(&incr.scale_rational(&h_sixth))?.round_to_f64();
        t += step;
        times.push(t);
        states.push(y.clone());
    }
    Ok(Trajectory { times, states })
}

// --- kernel evolution -------------------------------------------------------

/// Quadratic-plus-linear coefficients `(a, b, c, d, e)` of
/// `H = a q^2 + b q p + c p^2 + d q + e p (+ const)`.
fn quadratic_coefficients(h: &Symbol) -> Result<(f64, f64, f64, f64, f64)> {
    if h.dim() != 1 || h.has_hbar() || h.qp_degree() > 2 {
        return Err(Error::NotQuadratic);
    }
    let (mut a, mut b, mut c, mut d, mut e) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (key, coeff) in h.terms() {
        if !coeff.im.is_zero() {
            return Err(Error::NotQuadratic);
        }
        let v = coeff.re.to_f64().ok_or(Error::NotQuadratic)?;
        match (key.q[0], key.p[0]) {
            (2, 0) => a = v,
            (1, 1) => b = v,
            (0, 2) => c = v,
            (1, 0) => d = v,
            (0, 1) => e = v,
            (0, 0) => {}
            _ => return Err(Error::NotQuadratic),
        }
    }
    Ok((a, b, c, d, e))
}

/// Entire functions `C(d, t) = cos(sqrt(d) t)`, `S(d, t) = sin(sqrt(d) t)/sqrt(d)`
/// and `T(d, t) = (1 - C)/d`, continued through `d <= 0`.
fn trig_triple(d: f64, t: f64) -> (f64, f64, f64) {
    let x = d * t * t;
    if x.abs() < 1e-8 {
        // series; relative error below 1e-16 at this threshold
        let c = 1.0 - x / 2.0 + x * x / 24.0;
        let s = t * (1.0 - x / 6.0 + x * x / 120.0);
        let tt = t * t * (0.5 - x / 24.0 + x * x / 720.0);
        (c, s, tt)
    } else if d > 0.0 {
        let th = d.sqrt();
        let c = (th * t).cos();
        ((th * t).cos(), (th * t).sin() / th, (1.0 - c) / d)
    } else {
        let mu = (-d).sqrt();
        let c = (mu * t).cosh();
        (c, (mu * t).sinh() / mu, (1.0 - c) / d)
    }
}

/// Transports the kernel center along the flow of a quadratic-plus-linear
/// Hamiltonian; `h` and the Gaussian widths are unchanged (no mixing
/// between h-slices). The orientation matches [`ho_flow`]: pairing the
/// evolved kernel with an observable equals pairing the original kernel
/// with the [`ho_flow`]-evolved observable.
pub fn evolve_kernel(kernel: &GaussianKernel, h_sym: &Symbol, t: f64) -> Result<GaussianKernel> {
    let (a, b, c, d, e) = quadratic_coefficients(h_sym)?;
    // center ODE (matching the ho_flow orientation):
    // qdot = -b q - 2c p - e,  pdot = 2a q + b p + d
    let m = [[-b, -2.0 * c], [2.0 * a, b]];
    let v = [-e, d];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let (cf, sf, tf) = trig_triple(det, t);
    // exp(M t) = C I + S M  (M is trace-free);  int_0^t exp(M s) ds = S I + T M
    let z0 = [kernel.q0, kernel.p0];
    let rot = [
        cf * z0[0] + sf * (m[0][0] * z0[0] + m[0][1] * z0[1]),
        cf * z0[1] + sf * (m[1][0] * z0[0] + m[1][1] * z0[1]),
    ];
    let aff = [
        sf * v[0] + tf * (m[0][0] * v[0] + m[0][1] * v[1]),
        sf * v[1] + tf * (m[1][0] * v[0] + m[1][1] * v[1]),
    ];
    Ok(GaussianKernel {
        q0: rot[0] + aff[0],
        p0: rot[1] + aff[1],
        ..*kernel
    })
}

/// Interaction-picture evolution of a coherent kernel over `[t1, t2]`:
/// the center is translated by the force integrals `(alpha, beta)`; the
/// kernel stays in the coherent family with `h` unchanged.
pub fn interaction_evolve(
    kernel: &GaussianKernel,
    m: f64,
    omega: f64,
    z: &ForceProfile,
    t1: f64,
    t2: f64,
) -> Result<GaussianKernel> {
    check_positive(m, "m")?;
    check_positive(omega, "omega")?;
    if kernel.m != m || kernel.omega != omega {
        return Err(Error::NotCoherent);
    }
    let (alpha, beta) = force_integrals(z, omega, t1, t2)?;
    Ok(GaussianKernel {
        q0: kernel.q0 + alpha,
        p0: kernel.p0 + beta,
        ..*kernel
    })
}

/// Envelope of the forced translation vector for `z = Z0 cos(Omega t)`:
/// rows `(t, |(alpha(t), beta(t))|)` at `samples` evenly spaced times in
/// `[0, t_max]`. Grows linearly (slope `Z0/2`) at resonance and stays
/// bounded otherwise.
pub fn resonance_amplitude(
    drive: f64,
    omega: f64,
    z0: f64,
    t_max: f64,
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    check_positive(drive, "Omega")?;
    check_positive(omega, "omega")?;
    check_positive(t_max, "t_max")?;
    if z0 < 0.0 {
        return Err(Error::NonPositive {
            name: "Z0",
            value: z0,
        });
    }
    if samples < 2 {
        return Err(Error::NonPositive {
            name: "samples",
            value: samples as f64,
        });
    }
    let profile = ForceProfile::Periodic { z0, omega: drive };
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = t_max * i as f64 / (samples - 1) as f64;
        let (alpha, beta) = force_integrals(&profile, omega, 0.0, t)?;
        rows.push((t, alpha.hypot(beta)));
    }
    Ok(rows)
}
