//! The Heisenberg group `H^n` in exponential coordinates and its
//! symplectic automorphisms, over exact rationals.
//!
//! A point is written `(s, x, y)` with `x, y` of length `n`. The group law
//! is `(s,x,y)*(s',x',y') = (s + s' + omega(x,y;x',y')/2, x+x', y+y')`
//! where `omega` is the standard symplectic form `x.y' - x'.y`. All
//! identities here (associativity, inverses, automorphism homomorphisms)
//! hold bit-exactly, which is why coordinates are rationals and not floats.

use crate::error::{Error, Result};
use crate::Rational;
use num_traits::{One, Zero};

/// A group element `(s, x, y)` of `H^n`.
///
/// Units, for the record only: `s` in T/(L^2 M), `x` in 1/L, `y` in T/(L M).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    pub s: Rational,
    pub x: Vec<Rational>,
    pub y: Vec<Rational>,
}

impl GroupElement {
    pub fn new(s: Rational, x: Vec<Rational>, y: Vec<Rational>) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "x has length {}, y has length {}",
                x.len(),
                y.len()
            )));
        }
        Ok(GroupElement { s, x, y })
    }

    /// Convenience constructor for `n = 1`.
    pub fn from_rationals(s: Rational, x: Rational, y: Rational) -> Self {
        GroupElement {
            s,
            x: vec![x],
            y: vec![y],
        }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement {
            s: Rational::zero(),
            x: vec![Rational::zero(); n],
            y: vec![Rational::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_identity(&self) -> bool {
        self.s.is_zero() && self.x.iter().all(Zero::is_zero) && self.y.iter().all(Zero::is_zero)
    }

    /// The group law `(s,x,y)*(s',x',y')`.
    pub fn multiply(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "group elements of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let mut omega = Rational::zero();
        for j in 0..self.dim() {
            omega += &self.x[j] * &other.y[j] - &other.x[j] * &self.y[j];
        }
        let s = &self.s + &other.s + omega / Rational::from_integer(2.into());
        let x = self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect();
        let y = self.y.iter().zip(&other.y).map(|(a, b)| a + b).collect();
        Ok(GroupElement { s, x, y })
    }

    /// Group inverse; `omega(x, y; -x, -y) = 0`, so it is plain negation.
    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            s: -&self.s,
            x: self.x.iter().map(|a| -a).collect(),
            y: self.y.iter().map(|a| -a).collect(),
        }
    }
}

/// The symplectic form `omega(z, z') = x.y' - x'.y` on stacked
/// `(x, y)` vectors of length `2n`.
pub fn symplectic_form(z1: &[Rational], z2: &[Rational]) -> Result<Rational> {
    if z1.len() != z2.len() || !z1.len().is_multiple_of(2) || z1.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "symplectic form needs equal even lengths, got {} and {}",
            z1.len(),
            z2.len()
        )));
    }
    let n = z1.len() / 2;
    let mut acc = Rational::zero();
    for j in 0..n {
        acc += &z1[j] * &z2[n + j] - &z2[j] * &z1[n + j];
    }
    Ok(acc)
}

/// Checks `omega(A e_i, A e_j) = omega(e_i, e_j)` on all basis pairs.
pub fn is_symplectic(entries: &[Vec<Rational>]) -> Result<bool> {
    let rows = entries.len();
    if rows == 0 || !rows.is_multiple_of(2) || entries.iter().any(|r| r.len() != rows) {
        return Err(Error::DimensionMismatch(format!(
            "expected a square 2n x 2n matrix, got {} rows",
            rows
        )));
    }
    let n = rows / 2;
    // A e_j is the j-th column.
    let col = |j: usize| -> Vec<Rational> { (0..rows).map(|i| entries[i][j].clone()).collect() };
    for i in 0..rows {
        let ci = col(i);
        for j in (i + 1)..rows {
            let cj = col(j);
            let want = if j == i + n {
                Rational::one()
            } else {
                Rational::zero()
            };
            if symplectic_form(&ci, &cj)? != want {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A validated element of `Sp(n)` with rational entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticMatrix {
    entries: Vec<Vec<Rational>>,
    n: usize,
}

impl SymplecticMatrix {
    pub fn new(entries: Vec<Vec<Rational>>) -> Result<Self> {
        if !is_symplectic(&entries)? {
            return Err(Error::NotSymplectic);
        }
        let n = entries.len() / 2;
        Ok(SymplecticMatrix { entries, n })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![vec![Rational::zero(); 2 * n]; 2 * n];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = Rational::one();
        }
        SymplecticMatrix { entries, n }
    }

    /// Shear `[[1, a], [0, 1]]` for `n = 1`.
    pub fn shear_upper(a: Rational) -> Self {
        SymplecticMatrix {
            entries: vec![
                vec![Rational::one(), a],
                vec![Rational::zero(), Rational::one()],
            ],
            n: 1,
        }
    }

    /// Shear `[[1, 0], [b, 1]]` for `n = 1`.
    pub fn shear_lower(b: Rational) -> Self {
        SymplecticMatrix {
            entries: vec![
                vec![Rational::one(), Rational::zero()],
                vec![b, Rational::one()],
            ],
            n: 1,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    /// `A z` for a stacked `2n` vector.
    pub fn apply_vec(&self, z: &[Rational]) -> Result<Vec<Rational>> {
        if z.len() != 2 * self.n {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against a {0}x{0} matrix",
                z.len()
            )));
        }
        Ok(self
            .entries
            .iter()
            .map(|row| row.iter().zip(z).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `A^t z` for a stacked `2n` vector.
    pub fn apply_transpose_vec(&self, z: &[Rational]) -> Result<Vec<Rational>> {
        if z.len() != 2 * self.n {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against a {0}x{0} matrix",
                z.len()
            )));
        }
        let dim = 2 * self.n;
        Ok((0..dim)
            .map(|j| (0..dim).map(|i| &self.entries[i][j] * &z[i]).sum())
            .collect())
    }

    pub fn compose(&self, other: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "composing Sp({}) with Sp({})",
                self.n, other.n
            )));
        }
        let dim = 2 * self.n;
        let mut entries = vec![vec![Rational::zero(); dim]; dim];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut acc = Rational::zero();
                for k in 0..dim {
                    acc += &self.entries[i][k] * &other.entries[k][j];
                }
                *cell = acc;
            }
        }
        Ok(SymplecticMatrix { entries, n: self.n })
    }
}

/// The automorphism `alpha(s, x, y) = (s, A(x, y))` of `H^n`.
pub fn apply_automorphism(a: &SymplecticMatrix, g: &GroupElement) -> Result<GroupElement> {
    if a.n() != g.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Sp({}) acting on H^{}",
            a.n(),
            g.dim()
        )));
    }
    let mut z: Vec<Rational> = g.x.clone();
    z.extend(g.y.iter().cloned());
    let w = a.apply_vec(&z)?;
    let n = g.dim();
    Ok(GroupElement {
        s: g.s.clone(),
        x: w[..n].to_vec(),
        y: w[n..].to_vec(),
    })
}

/// A point `(h, q, p)` of the adjoint space in bi-orthonormal coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjointPoint {
    pub h: Rational,
    pub q: Vec<Rational>,
    pub p: Vec<Rational>,
}

impl AdjointPoint {
    pub fn new(h: Rational, q: Vec<Rational>, p: Vec<Rational>) -> Result<Self> {
        if q.is_empty() || q.len() != p.len() {
            return Err(Error::DimensionMismatch(format!(
                "q has length {}, p has length {}",
                q.len(),
                p.len()
            )));
        }
        Ok(AdjointPoint { h, q, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }
}

/// The adjoint action `(h, q, p) -> (h, A^t (q, p))`; each h-slice is
/// preserved. The transpose convention is pinned by the duality pairing
/// `<A^t (q,p), (x,y)> = <(q,p), A (x,y)>` (see the unit tests).
pub fn adjoint_action(a: &SymplecticMatrix, pt: &AdjointPoint) -> Result<AdjointPoint> {
    if a.n() != pt.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Sp({}) acting on an adjoint point of dimension {}",
            a.n(),
            pt.dim()
        )));
    }
    let mut z: Vec<Rational> = pt.q.clone();
    z.extend(pt.p.iter().cloned());
    let w = a.apply_transpose_vec(&z)?;
    let n = pt.dim();
    Ok(AdjointPoint {
        h: pt.h.clone(),
        q: w[..n].to_vec(),
        p: w[n..].to_vec(),
    })
}
