//! Brute-force distribution oracle, independent of the symbol-level star
//! product implementation.
//!
//! Observables on the group (n = 1) are finite combinations of
//! delta-derivative distributions. In the normalised basis
//!
//! ```text
//! E[a, b, c]  <->  nu_a (2 pi i)^-(b + c) delta^(a)(s) delta^(b)(x) delta^(c)(y),
//! ```
//!
//! chosen so that `E[a, b, c]` corresponds to the symbol `hbar^a q^b p^c`,
//! the group convolution
//!
//! ```text
//! (B1 * B2)(g) = < B1(g1), B2(g1^-1 g) >
//! ```
//!
//! expands by the chain rule over the group law
//! `g1^-1 g = (s - s1 - (x1 y - y1 x)/2, x - x1, y - y1)` into rational
//! structure constants:
//!
//! ```text
//! E[a1,b1,c1] * E[a2,b2,c2] =
//!   sum_{j <= b1, k <= c1} C(b1,j) C(c1,k) (-1)^j (-i)^(j+k) 2^-(j+k)
//!     (b1+b2-j)! / (b1+b2-j-k)!  (c1+c2-k)! / (c1+c2-k-j)!
//!     E[a1+a2+j+k, b1+b2-j-k, c1+c2-j-k]
//! ```
//!
//! (terms with negative remaining orders vanish; the falling factorials
//! come from `x^k delta^(n)(x) = (-1)^k n!/(n-k)! delta^(n-k)(x)`).
//! The antiderivative acts as `A E[a, b, c] = -i E[a-1, b, c]`; it never
//! meets an `a = 0` term inside a commutator because those cancel.
//!
//! Everything here is derived from the group law and distribution calculus
//! alone; no bidifferential series is involved.

#![allow(dead_code)]

use num_traits::{One, Zero};
use pmech::{Coeff, Rational, Symbol};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dist {
    /// (s-order, x-order, y-order) -> coefficient in the E basis.
    pub terms: BTreeMap<(u32, u32, u32), Coeff>,
}

impl Dist {
    pub fn zero() -> Self {
        Dist {
            terms: BTreeMap::new(),
        }
    }

    fn insert(&mut self, key: (u32, u32, u32), c: Coeff) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(Coeff::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn from_symbol(sym: &Symbol) -> Self {
        assert_eq!(sym.dim(), 1, "the oracle works on H^1");
        let mut d = Dist::zero();
        for (key, c) in sym.terms() {
            d.insert((key.hbar, key.q[0], key.p[0]), c.clone());
        }
        d
    }

    pub fn to_symbol(&self) -> Symbol {
        let mut sym = Symbol::zero(1);
        for (&(a, b, c), coeff) in &self.terms {
            let mono = Symbol::var_q(1, 0)
                .pow(b)
                .mul(&Symbol::var_p(1, 0).pow(c))
                .unwrap()
                .mul(&Symbol::hbar(1).pow(a))
                .unwrap()
                .scale(coeff);
            sym = sym.add(&mono).unwrap();
        }
        sym
    }

    /// Group convolution in the E basis.
    pub fn convolve(&self, other: &Dist) -> Dist {
        let mut out = Dist::zero();
        for (&(a1, b1, c1), u) in &self.terms {
            for (&(a2, b2, c2), v) in &other.terms {
                for j in 0..=b1 {
                    for k in 0..=c1 {
                        if k > b1 + b2 - j || j > c1 + c2 - k {
                            continue;
                        }
                        let coeff = binomial(b1, j)
                            * binomial(c1, k)
                            * falling(b1 + b2 - j, k)
                            * falling(c1 + c2 - k, j)
                            / pow2(j + k);
                        let phase = neg_i_pow(j + k) * sign(j);
                        let key = (a1 + a2 + j + k, b1 + b2 - j - k, c1 + c2 - j - k);
                        let c = u.clone() * v.clone() * phase * Coeff::new(coeff, Rational::zero());
                        out.insert(key, c);
                    }
                }
            }
        }
        out
    }

    /// The antiderivative: `-i` and one fewer central derivative. Panics on
    /// an `a = 0` term, which a commutator never produces.
    pub fn anti(&self) -> Dist {
        let mut out = Dist::zero();
        for (&(a, b, c), u) in &self.terms {
            assert!(a >= 1, "antiderivative applied to an hbar^0 term");
            out.insert(
                (a - 1, b, c),
                u.clone() * Coeff::new(Rational::zero(), -Rational::one()),
            );
        }
        out
    }

    pub fn sub(&self, other: &Dist) -> Dist {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(*k, -c.clone());
        }
        out
    }

    /// The modified commutator `(B1 * B2 - B2 * B1) A`.
    pub fn bracket(&self, other: &Dist) -> Dist {
        self.convolve(other).sub(&other.convolve(self)).anti()
    }
}

fn binomial(n: u32, k: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc *= Rational::new(((n - i) as i64).into(), ((i + 1) as i64).into());
    }
    acc
}

fn falling(n: u32, k: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc *= Rational::from_integer(((n - i) as i64).into());
    }
    acc
}

fn pow2(k: u32) -> Rational {
    Rational::from_integer(2i64.pow(k).into())
}

fn sign(j: u32) -> Coeff {
    if j.is_multiple_of(2) {
        Coeff::new(Rational::one(), Rational::zero())
    } else {
        Coeff::new(-Rational::one(), Rational::zero())
    }
}

fn neg_i_pow(k: u32) -> Coeff {
    match k % 4 {
        0 => Coeff::new(Rational::one(), Rational::zero()),
        1 => Coeff::new(Rational::zero(), -Rational::one()),
        2 => Coeff::new(-Rational::one(), Rational::zero()),
        _ => Coeff::new(Rational::zero(), Rational::one()),
    }
}

/// Oracle star product of two symbols via group convolution.
pub fn oracle_star(f: &Symbol, g: &Symbol) -> Symbol {
    Dist::from_symbol(f)
        .convolve(&Dist::from_symbol(g))
        .to_symbol()
}

/// Oracle p-mechanical bracket of two symbols.
pub fn oracle_pbracket(f: &Symbol, g: &Symbol) -> Symbol {
    Dist::from_symbol(f)
        .bracket(&Dist::from_symbol(g))
        .to_symbol()
}

/// Deterministic random symbols for oracle comparisons.
pub fn random_symbol(rng: &mut impl rand::Rng, n: usize, max_degree: u32, max_hbar: u32) -> Symbol {
    let terms = rng.gen_range(1..=4);
    let mut sym = Symbol::zero(n);
    for _ in 0..terms {
        let mut mono = Symbol::hbar(n).pow(rng.gen_range(0..=max_hbar));
        let mut budget = max_degree;
        for i in 0..n {
            let eq = rng.gen_range(0..=budget.min(max_degree));
            budget -= eq;
            let ep = rng.gen_range(0..=budget.min(max_degree));
            budget -= ep;
            mono = mono
                .mul(&Symbol::var_q(n, i).pow(eq))
                .unwrap()
                .mul(&Symbol::var_p(n, i).pow(ep))
                .unwrap();
        }
        let num = rng.gen_range(-6i64..=6);
        let den = rng.gen_range(1i64..=4);
        let im_num = rng.gen_range(-3i64..=3);
        let c = Coeff::new(
            Rational::new(num.into(), den.into()),
            Rational::new(im_num.into(), den.into()),
        );
        sym = sym.add(&mono.scale(&c)).unwrap();
    }
    sym
}
