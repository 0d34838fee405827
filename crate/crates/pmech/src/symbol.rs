//! Exact polynomial-symbol calculus.
//!
//! A [`Symbol`] is a sparse polynomial in `q_1..q_n`, `p_1..p_n` and the
//! formal deformation parameter `hbar`, with complex rational coefficients.
//! The star product is the terminating bidifferential series
//!
//! ```text
//! f * g = sum_k (1/k!) (i hbar / 2)^k  D^k(f (x) g),
//! D(f (x) g) = sum_j  d_qj f (x) d_pj g  -  d_pj f (x) d_qj g,
//! ```
//!
//! whose `hbar^0` part is the pointwise product. The modified bracket
//! divides the star commutator by `i hbar`; the division is exact because
//! even-order terms of the series cancel, so `hbar = 0` needs no special
//! casing and yields the Poisson bracket.

use crate::error::{Error, Result};
use crate::heis::SymplecticMatrix;
use crate::{rat_from_f64, Coeff, Rational, C64};
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// The pair `(h, hbar = h / 2 pi)` fixing a concrete orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanckParameter {
    h: f64,
}

impl PlanckParameter {
    /// `h >= 0`; `h = 0` selects the classical slice.
    pub fn from_h(h: f64) -> Result<Self> {
        if !h.is_finite() || h < 0.0 {
            return Err(Error::NonPositive {
                name: "h",
                value: h,
            });
        }
        Ok(PlanckParameter { h })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn hbar(&self) -> f64 {
        self.h / (2.0 * std::f64::consts::PI)
    }

    pub fn is_classical(&self) -> bool {
        self.h == 0.0
    }
}

fn czero() -> Coeff {
    Coeff::new(Rational::zero(), Rational::zero())
}

fn cone() -> Coeff {
    Coeff::new(Rational::one(), Rational::zero())
}

fn c_i() -> Coeff {
    Coeff::new(Rational::zero(), Rational::one())
}

/// Monomial key: exponents of `q`, `p` and the `hbar` power.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonomialKey {
    pub q: Vec<u32>,
    pub p: Vec<u32>,
    pub hbar: u32,
}

impl MonomialKey {
    fn constant(n: usize) -> Self {
        MonomialKey {
            q: vec![0; n],
            p: vec![0; n],
            hbar: 0,
        }
    }

    pub fn qp_degree(&self) -> usize {
        self.q
            .iter()
            .chain(self.p.iter())
            .map(|&e| e as usize)
            .sum()
    }
}

/// Sparse polynomial in `(q, p, hbar)` with complex rational coefficients.
///
/// Zero coefficients are never stored and keys are kept in a `BTreeMap`, so
/// equality is structural.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbol {
    n: usize,
    terms: BTreeMap<MonomialKey, Coeff>,
}

impl Symbol {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        Symbol {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n: usize) -> Self {
        Symbol::constant(n, cone())
    }

    pub fn constant(n: usize, c: Coeff) -> Self {
        let mut s = Symbol::zero(n);
        if !c.is_zero() {
            s.terms.insert(MonomialKey::constant(n), c);
        }
        s
    }

    pub fn constant_rational(n: usize, c: Rational) -> Self {
        Symbol::constant(n, Coeff::new(c, Rational::zero()))
    }

    /// The coordinate symbol `q_i` (0-based index).
    pub fn var_q(n: usize, i: usize) -> Self {
        assert!(i < n);
        let mut key = MonomialKey::constant(n);
        key.q[i] = 1;
        let mut s = Symbol::zero(n);
        s.terms.insert(key, cone());
        s
    }

    /// The momentum symbol `p_i` (0-based index).
    pub fn var_p(n: usize, i: usize) -> Self {
        assert!(i < n);
        let mut key = MonomialKey::constant(n);
        key.p[i] = 1;
        let mut s = Symbol::zero(n);
        s.terms.insert(key, cone());
        s
    }

    /// The formal deformation parameter.
    pub fn hbar(n: usize) -> Self {
        let mut key = MonomialKey::constant(n);
        key.hbar = 1;
        let mut s = Symbol::zero(n);
        s.terms.insert(key, cone());
        s
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MonomialKey, &Coeff)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total `(q, p)` degree, ignoring `hbar`.
    pub fn qp_degree(&self) -> usize {
        self.terms
            .keys()
            .map(MonomialKey::qp_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn has_hbar(&self) -> bool {
        self.terms.keys().any(|k| k.hbar > 0)
    }

    fn insert(&mut self, key: MonomialKey, c: Coeff) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_dim(&self, other: &Symbol) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "symbols of dimension {} and {}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Symbol) -> Result<Symbol> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Symbol) -> Result<Symbol> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(k.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Symbol {
        let mut out = Symbol::zero(self.n);
        for (k, c) in &self.terms {
            out.terms.insert(k.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Coeff) -> Symbol {
        if c.is_zero() {
            return Symbol::zero(self.n);
        }
        let mut out = Symbol::zero(self.n);
        for (k, v) in &self.terms {
            out.terms.insert(k.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn scale_rational(&self, r: &Rational) -> Symbol {
        self.scale(&Coeff::new(r.clone(), Rational::zero()))
    }

    /// Pointwise (commutative) polynomial product.
    pub fn mul(&self, other: &Symbol) -> Result<Symbol> {
        self.check_dim(other)?;
        let mut out = Symbol::zero(self.n);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key = MonomialKey {
                    q: ka.q.iter().zip(&kb.q).map(|(a, b)| a + b).collect(),
                    p: ka.p.iter().zip(&kb.p).map(|(a, b)| a + b).collect(),
                    hbar: ka.hbar + kb.hbar,
                };
                out.insert(key, ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Symbol {
        let mut out = Symbol::one(self.n);
        for _ in 0..e {
            out = out.mul(self).expect("same dimension");
        }
        out
    }

    /// Multiplies by `hbar^k`.
    pub fn mul_hbar(&self, k: u32) -> Symbol {
        let mut out = Symbol::zero(self.n);
        for (key, c) in &self.terms {
            let mut key = key.clone();
            key.hbar += k;
            out.terms.insert(key, c.clone());
        }
        out
    }

    /// `d/dq_i`.
    pub fn diff_q(&self, i: usize) -> Symbol {
        let mut out = Symbol::zero(self.n);
        for (key, c) in &self.terms {
            if key.q[i] == 0 {
                continue;
            }
            let mut k2 = key.clone();
            k2.q[i] -= 1;
            let factor = Rational::from_integer((key.q[i] as i64).into());
            out.insert(k2, c.clone() * Coeff::new(factor, Rational::zero()));
        }
        out
    }

    /// `d/dp_i`.
    pub fn diff_p(&self, i: usize) -> Symbol {
        let mut out = Symbol::zero(self.n);
        for (key, c) in &self.terms {
            if key.p[i] == 0 {
                continue;
            }
            let mut k2 = key.clone();
            k2.p[i] -= 1;
            let factor = Rational::from_integer((key.p[i] as i64).into());
            out.insert(k2, c.clone() * Coeff::new(factor, Rational::zero()));
        }
        out
    }

    /// Drops every term carrying a positive `hbar` power.
    pub fn at_hbar_zero(&self) -> Symbol {
        let mut out = Symbol::zero(self.n);
        for (k, c) in &self.terms {
            if k.hbar == 0 {
                out.terms.insert(k.clone(), c.clone());
            }
        }
        out
    }

    /// Exact rational evaluation of the `hbar = 0` part at a rational point.
    pub fn eval_classical_exact(&self, q0: &[Rational], p0: &[Rational]) -> Result<Coeff> {
        if q0.len() != self.n || p0.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "evaluation point of dimension {}/{} against a symbol of dimension {}",
                q0.len(),
                p0.len(),
                self.n
            )));
        }
        let mut acc = czero();
        for (key, c) in &self.terms {
            if key.hbar != 0 {
                continue;
            }
            let mut m = Rational::one();
            for (e, v) in key.q.iter().zip(q0) {
                for _ in 0..*e {
                    m *= v;
                }
            }
            for (e, v) in key.p.iter().zip(p0) {
                for _ in 0..*e {
                    m *= v;
                }
            }
            acc += c.clone() * Coeff::new(m, Rational::zero());
        }
        Ok(acc)
    }

    /// Substitutes `hbar := 0` and evaluates at `(q0, p0)` numerically.
    pub fn classical_project(&self, q0: &[f64], p0: &[f64]) -> C64 {
        self.eval_with_hbar(0.0, q0, p0)
    }

    /// Numeric evaluation with `hbar` taken from the Planck parameter.
    pub fn evaluate(&self, planck: &PlanckParameter, q0: &[f64], p0: &[f64]) -> C64 {
        self.eval_with_hbar(planck.hbar(), q0, p0)
    }

    fn eval_with_hbar(&self, hbar: f64, q0: &[f64], p0: &[f64]) -> C64 {
        assert_eq!(q0.len(), self.n);
        assert_eq!(p0.len(), self.n);
        let mut acc = C64::new(0.0, 0.0);
        for (key, c) in &self.terms {
            let mut m = hbar.powi(key.hbar as i32);
            if key.hbar > 0 && hbar == 0.0 {
                continue;
            }
            for (e, v) in key.q.iter().zip(q0) {
                m *= v.powi(*e as i32);
            }
            for (e, v) in key.p.iter().zip(p0) {
                m *= v.powi(*e as i32);
            }
            acc += coeff_to_c64(c) * m;
        }
        acc
    }

    /// Rounds every coefficient to the nearest `f64` pair (used by the
    /// bracket-ODE integrator, which works on float coefficients).
    pub fn round_to_f64(&self) -> Symbol {
        let mut out = Symbol::zero(self.n);
        for (k, c) in &self.terms {
            let re = c.re.to_f64().unwrap_or(0.0);
            let im = c.im.to_f64().unwrap_or(0.0);
            let rc = Coeff::new(rat_from_f64(re), rat_from_f64(im));
            if !rc.is_zero() {
                out.terms.insert(k.clone(), rc);
            }
        }
        out
    }

    /// Maximum absolute coefficient value, as `f64` (for test tolerances).
    pub fn max_coeff_abs(&self) -> f64 {
        self.terms
            .values()
            .map(|c| coeff_to_c64(c).norm())
            .fold(0.0, f64::max)
    }

    /// Numeric view of the terms, coefficients converted to `f64` pairs.
    pub fn terms_numeric(&self) -> impl Iterator<Item = (&MonomialKey, C64)> {
        self.terms.iter().map(|(k, c)| (k, coeff_to_c64(c)))
    }

    /// True when every coefficient is purely real.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im.is_zero())
    }

    /// Substitutes each variable with the given replacement symbols.
    /// `q_i := reps_q[i]`, `p_i := reps_p[i]`; `hbar` is untouched.
    pub fn substitute(&self, reps_q: &[Symbol], reps_p: &[Symbol]) -> Result<Symbol> {
        if reps_q.len() != self.n || reps_p.len() != self.n {
            return Err(Error::DimensionMismatch(
                "substitution needs one replacement per variable".into(),
            ));
        }
        let mut out = Symbol::zero(self.n);
        for (key, c) in &self.terms {
            let mut term = Symbol::constant(self.n, c.clone()).mul_hbar(key.hbar);
            for (i, e) in key.q.iter().enumerate() {
                if *e > 0 {
                    term = term.mul(&reps_q[i].pow(*e))?;
                }
            }
            for (i, e) in key.p.iter().enumerate() {
                if *e > 0 {
                    term = term.mul(&reps_p[i].pow(*e))?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// The star product as a terminating bidifferential series.
    pub fn star(&self, other: &Symbol) -> Result<Symbol> {
        self.check_dim(other)?;
        let n = self.n;
        let mut result = Symbol::zero(n);
        // pairs (f_part, g_part); the coefficient rides on f_part
        let mut pairs: Vec<(Symbol, Symbol)> = vec![(self.clone(), other.clone())];
        let mut k: u32 = 0;
        let mut factor = cone(); // (i hbar / 2)^k / k!  -- hbar power tracked separately
        let half_i = c_i() * Coeff::new(Rational::new(1.into(), 2.into()), Rational::zero());
        loop {
            // accumulate the order-k contribution
            let mut order = Symbol::zero(n);
            for (f, g) in &pairs {
                order = order.add(&f.mul(g)?)?;
            }
            result = result.add(&order.scale(&factor).mul_hbar(k))?;

            // advance the bidifferential operator one order
            let mut next: Vec<(Symbol, Symbol)> = Vec::new();
            for (f, g) in &pairs {
                for j in 0..n {
                    let fq = f.diff_q(j);
                    if !fq.is_zero() {
                        let gp = g.diff_p(j);
                        if !gp.is_zero() {
                            next.push((fq, gp));
                        }
                    }
                    let fp = f.diff_p(j);
                    if !fp.is_zero() {
                        let gq = g.diff_q(j);
                        if !gq.is_zero() {
                            next.push((fp.neg(), gq));
                        }
                    }
                }
            }
            if next.is_empty() {
                return Ok(result);
            }
            pairs = next;
            k += 1;
            factor = factor
                * half_i.clone()
                * Coeff::new(Rational::new(1.into(), (k as i64).into()), Rational::zero());
        }
    }

    /// The p-mechanical bracket `(f * g - g * f) / (i hbar)`, computed
    /// term-by-term on the series so the division is exact.
    pub fn pbracket(&self, other: &Symbol) -> Result<Symbol> {
        let commutator = self.star(other)?.sub(&other.star(self)?)?;
        // every term has hbar >= 1; divide by i hbar
        let mut out = Symbol::zero(self.n);
        for (key, c) in &commutator.terms {
            debug_assert!(key.hbar >= 1, "even-order star terms must cancel");
            let mut k2 = key.clone();
            k2.hbar -= 1;
            out.terms.insert(k2, c.clone() * -c_i());
        }
        Ok(out)
    }

    /// The Poisson bracket `sum_j d_qj f d_pj g - d_pj f d_qj g`.
    pub fn poisson(&self, other: &Symbol) -> Result<Symbol> {
        self.check_dim(other)?;
        let mut out = Symbol::zero(self.n);
        for j in 0..self.n {
            out = out.add(&self.diff_q(j).mul(&other.diff_p(j))?)?;
            out = out.sub(&self.diff_p(j).mul(&other.diff_q(j))?)?;
        }
        Ok(out)
    }
}

fn coeff_to_c64(c: &Coeff) -> C64 {
    C64::new(
        c.re.to_f64().unwrap_or(f64::NAN),
        c.im.to_f64().unwrap_or(f64::NAN),
    )
}

/// Exact linear combination; zero terms pruned.
pub fn linear_combine(pairs: &[(Coeff, Symbol)]) -> Result<Symbol> {
    let n = pairs.first().map(|(_, s)| s.dim()).unwrap_or(1);
    let mut out = Symbol::zero(n);
    for (c, s) in pairs {
        out = out.add(&s.scale(c))?;
    }
    Ok(out)
}

/// Ladder symbol kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Plus,
    Minus,
}

/// Creation / annihilation symbols: `a+ = m w q - i p`, `a- = m w q + i p`
/// (n = 1). These are the full Fourier transforms of the creation and
/// annihilation distributions under the `delta'(x) -> 2 pi i q`,
/// `delta'(y) -> 2 pi i p` convention.
pub fn ladder(kind: LadderKind, m: &Rational, omega: &Rational) -> Result<Symbol> {
    check_positive(m, "m")?;
    check_positive(omega, "omega")?;
    let q = Symbol::var_q(1, 0);
    let p = Symbol::var_p(1, 0);
    let mw = q.scale_rational(&(m * omega));
    let ip = p.scale(&c_i());
    match kind {
        LadderKind::Plus => mw.sub(&ip),
        LadderKind::Minus => mw.add(&ip),
    }
}

/// The harmonic-oscillator energy symbol `(m w^2 / 2) q^2 + (1 / 2m) p^2`
/// (n = 1).
pub fn hamiltonian_ho(m: &Rational, omega: &Rational) -> Result<Symbol> {
    check_positive(m, "m")?;
    check_positive(omega, "omega")?;
    let q2 = Symbol::var_q(1, 0).pow(2);
    let p2 = Symbol::var_p(1, 0).pow(2);
    let two = Rational::from_integer(2.into());
    let cq = m * omega * omega / &two;
    let cp = (m * &two).recip();
    q2.scale_rational(&cq).add(&p2.scale_rational(&cp))
}

fn check_positive(r: &Rational, name: &'static str) -> Result<()> {
    if *r <= Rational::zero() {
        return Err(Error::NonPositive {
            name,
            value: r.to_f64().unwrap_or(0.0),
        });
    }
    Ok(())
}

/// Where an observable's distribution on the group came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Lifted from a classical polynomial: `delta(s)` times the inverse
    /// Fourier transform of the polynomial.
    ClassicalPolynomial,
    /// Built from ladder/star constructions; may carry `hbar` powers, which
    /// correspond to central `delta^(k)(s)` dressings.
    QuantumSymbol,
    /// A bare parsed symbol with no recorded lineage.
    Raw,
}

/// A symbol together with its distributional lineage.
///
/// Each monomial `hbar^k q^a p^b` of the symbol stands for the distribution
/// `nu_k (2 pi i)^-(a+b) delta^(k)(s) delta^(a)(x) delta^(b)(y)` on the
/// group, which is what the state functionals in [`crate::states`] pair
/// against.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    symbol: Symbol,
    provenance: Provenance,
    note: String,
}

impl Observable {
    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn note(&self) -> &str {
        &self.note
    }

    /// Wraps a symbol with ladder/star lineage (may carry `hbar`).
    pub fn quantum(symbol: Symbol, note: impl Into<String>) -> Observable {
        Observable {
            symbol,
            provenance: Provenance::QuantumSymbol,
            note: note.into(),
        }
    }

    /// Wraps a symbol with no lineage; state evaluation will reject it.
    pub fn raw(symbol: Symbol) -> Observable {
        Observable {
            symbol,
            provenance: Provenance::Raw,
            note: String::new(),
        }
    }

    pub fn has_lineage(&self) -> bool {
        !matches!(self.provenance, Provenance::Raw)
    }
}

/// Lifts a classical polynomial (no `hbar` terms) to a p-mechanical
/// observable. At the symbol level the lift is the identity; what changes
/// is the recorded lineage: the underlying distribution is
/// `delta(s) c-check(x, y)` with `c-check` the inverse Fourier transform of
/// the polynomial, i.e. `q^a p^b` stands for
/// `(2 pi i)^-(a+b) delta(s) delta^(a)(x) delta^(b)(y)`.
pub fn pmechanise(classical: &Symbol) -> Result<Observable> {
    if classical.has_hbar() {
        return Err(Error::HbarDependent);
    }
    Ok(Observable {
        symbol: classical.clone(),
        provenance: Provenance::ClassicalPolynomial,
        note: "delta(s) . c-check(x,y)".into(),
    })
}

/// Pulls a symbol back along a symplectic matrix: `(q, p) := A^t (q, p)`.
pub fn symplectic_pullback(a: &SymplecticMatrix, f: &Symbol) -> Result<Symbol> {
    let n = f.dim();
    if a.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "Sp({}) pullback on a symbol of dimension {}",
            a.n(),
            n
        )));
    }
    // row i of A^t is column i of A; variables stack as (q_1..q_n, p_1..p_n)
    let var = |j: usize| {
        if j < n {
            Symbol::var_q(n, j)
        } else {
            Symbol::var_p(n, j - n)
        }
    };
    let replacement = |i: usize| -> Result<Symbol> {
        let mut acc = Symbol::zero(n);
        for j in 0..2 * n {
            let c = a.entry(j, i).clone();
            if !c.is_zero() {
                acc = acc.add(&var(j).scale_rational(&c))?;
            }
        }
        Ok(acc)
    };
    let reps_q: Vec<Symbol> = (0..n).map(replacement).collect::<Result<_>>()?;
    let reps_p: Vec<Symbol> = (n..2 * n).map(replacement).collect::<Result<_>>()?;
    f.substitute(&reps_q, &reps_p)
}

// ---------------------------------------------------------------------------
// Display: canonical monomial order is total (q,p)-degree descending, then
// lexicographic on the exponents, with hbar powers last inside a term.
// ---------------------------------------------------------------------------

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_coeff_magnitude(c: &Coeff) -> (bool, String) {
    // returns (negative, magnitude-string); magnitude "" means 1
    if c.im.is_zero() {
        let neg = c.re < Rational::zero();
        let a = if neg { -c.re.clone() } else { c.re.clone() };
        let s = if a.is_one() {
            String::new()
        } else {
            fmt_rational(&a)
        };
        (neg, s)
    } else if c.re.is_zero() {
        let neg = c.im < Rational::zero();
        let a = if neg { -c.im.clone() } else { c.im.clone() };
        let s = if a.is_one() {
            "i".to_string()
        } else {
            format!("{}*i", fmt_rational(&a))
        };
        (neg, s)
    } else {
        let im_sign = if c.im < Rational::zero() { "-" } else { "+" };
        let im_abs = if c.im < Rational::zero() {
            -c.im.clone()
        } else {
            c.im.clone()
        };
        let im_part = if im_abs.is_one() {
            "i".to_string()
        } else {
            format!("{}*i", fmt_rational(&im_abs))
        };
        (
            false,
            format!("({} {} {})", fmt_rational(&c.re), im_sign, im_part),
        )
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&MonomialKey> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            b.qp_degree()
                .cmp(&a.qp_degree())
                .then_with(|| b.q.cmp(&a.q))
                .then_with(|| b.p.cmp(&a.p))
                .then_with(|| a.hbar.cmp(&b.hbar))
        });
        let mut first = true;
        for key in keys {
            let c = &self.terms[key];
            let (neg, mag) = fmt_coeff_magnitude(c);
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_empty() {
                factors.push(mag);
            }
            for (i, e) in key.q.iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                let name = if self.n == 1 {
                    "q".to_string()
                } else {
                    format!("q{}", i + 1)
                };
                factors.push(if *e == 1 {
                    name
                } else {
                    format!("{}^{}", name, e)
                });
            }
            for (i, e) in key.p.iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                let name = if self.n == 1 {
                    "p".to_string()
                } else {
                    format!("p{}", i + 1)
                };
                factors.push(if *e == 1 {
                    name
                } else {
                    format!("{}^{}", name, e)
                });
            }
            if key.hbar > 0 {
                factors.push(if key.hbar == 1 {
                    "hbar".to_string()
                } else {
                    format!("hbar^{}", key.hbar)
                });
            }
            let body = if factors.is_empty() {
                "1".to_string()
            } else {
                factors.join("*")
            };
            if first {
                if neg {
                    write!(f, "-{}", body)?;
                } else {
                    write!(f, "{}", body)?;
                }
                first = false;
            } else if neg {
                write!(f, " - {}", body)?;
            } else {
                write!(f, " + {}", body)?;
            }
        }
        Ok(())
    }
}
