//! Exact polynomials on the realified V and normal-ordered polynomial-
//! coefficient differential operators on C[V].
//!
//! `PolyVR` elements are finite sums of z^alpha zbar^beta monomials with
//! Gaussian-rational coefficients. `PdOperator` elements are normal-ordered
//! (all multiplications left of all derivatives); the normal form is the
//! unique term map, so operator equality is term-map equality.

use crate::scalar::{CRat, Rat};
use num_rational::Ratio;
use std::collections::BTreeMap;
use std::fmt;

pub type Exps = Vec<u32>;

fn add_exps(a: &[u32], b: &[u32]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn total(a: &[u32]) -> u32 {
    a.iter().sum()
}

/// Polynomial in z_1..z_n and conj(z_1)..conj(z_n) with exact coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolyVR {
    pub n: usize,
    pub terms: BTreeMap<(Exps, Exps), CRat>,
}

impl PolyVR {
    pub fn zero(n: usize) -> Self {
        PolyVR { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Self::monomial(vec![0; n], vec![0; n], CRat::one())
    }

    pub fn monomial(alpha: Exps, beta: Exps, coeff: CRat) -> Self {
        let n = alpha.len();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert((alpha, beta), coeff);
        }
        PolyVR { n, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: (Exps, Exps), coeff: CRat) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &CRat) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        PolyVR {
            n: self.n,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &other.terms {
                out.add_term((add_exps(a1, a2), add_exps(b1, b2)), c1 * c2);
            }
        }
        out
    }

    /// Conjugation involution: swaps holomorphic and antiholomorphic
    /// exponents and conjugates coefficients.
    pub fn conj(&self) -> Self {
        PolyVR {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|((a, b), c)| ((b.clone(), a.clone()), c.conj()))
                .collect(),
        }
    }

    /// Total degree (z-degree + zbar-degree); None for zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| total(a) + total(b)).max()
    }

    pub fn eval(&self, z: &[num_complex::Complex64]) -> num_complex::Complex64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for ((a, b), c) in &self.terms {
            let mut t = c.to_f64();
            for (i, &e) in a.iter().enumerate() {
                t *= z[i].powu(e);
            }
            for (i, &e) in b.iter().enumerate() {
                t *= z[i].conj().powu(e);
            }
            acc += t;
        }
        acc
    }
}

impl fmt::Display for PolyVR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((a, b), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (i, &e) in a.iter().enumerate() {
                if e == 1 {
                    write!(f, "*z{}", i + 1)?;
                } else if e > 1 {
                    write!(f, "*z{}^{e}", i + 1)?;
                }
            }
            for (i, &e) in b.iter().enumerate() {
                if e == 1 {
                    write!(f, "*zb{}", i + 1)?;
                } else if e > 1 {
                    write!(f, "*zb{}^{e}", i + 1)?;
                }
            }
        }
        Ok(())
    }
}

/// Polynomial in z_1..z_n only: an element of C[V].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ZPoly {
    pub n: usize,
    pub terms: BTreeMap<Exps, CRat>,
}

impl ZPoly {
    pub fn zero(n: usize) -> Self {
        ZPoly { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Self::monomial(vec![0; n], CRat::one())
    }

    pub fn monomial(exps: Exps, coeff: CRat) -> Self {
        let n = exps.len();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exps, coeff);
        }
        ZPoly { n, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: Exps, coeff: CRat) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &CRat) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        ZPoly { n: self.n, terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (a, c1) in &self.terms {
            for (b, c2) in &other.terms {
                out.add_term(add_exps(a, b), c1 * c2);
            }
        }
        out
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|a| total(a)).max()
    }
}

/// Normal-ordered polynomial-coefficient differential operator: a finite sum
/// of z^alpha d^beta with all multiplications to the left of all derivatives.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PdOperator {
    pub n: usize,
    pub terms: BTreeMap<(Exps, Exps), CRat>,
}

fn falling_factorial(c: u32, k: u32) -> Rat {
    let mut acc: i128 = 1;
    for i in 0..k {
        acc *= (c - i) as i128;
    }
    Ratio::from_integer(acc)
}

fn binomial(b: u32, k: u32) -> Rat {
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (b - i) as i128 / (i + 1) as i128;
    }
    Ratio::from_integer(acc)
}

impl PdOperator {
    pub fn zero(n: usize) -> Self {
        PdOperator { n, terms: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::monomial(vec![0; n], vec![0; n], CRat::one())
    }

    pub fn monomial(z_exps: Exps, d_exps: Exps, coeff: CRat) -> Self {
        let n = z_exps.len();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert((z_exps, d_exps), coeff);
        }
        PdOperator { n, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: (Exps, Exps), coeff: CRat) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &CRat) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        PdOperator {
            n: self.n,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Exact composition with re-normal-ordering through the canonical
    /// relation d_i z_j = z_j d_i + delta_ij, expanded by Leibniz:
    /// d^b z^c = sum_k binom(b,k) (c)_k z^{c-k} d^{b-k}.
    pub fn compose(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n);
        for ((a, b), c1) in &self.terms {
            for ((cz, d), c2) in &other.terms {
                let coeff = c1 * c2;
                // Move d^b past z^c, coordinate by coordinate.
                let kmax: Vec<u32> = b.iter().zip(cz).map(|(&x, &y)| x.min(y)).collect();
                let mut k = vec![0u32; n];
                loop {
                    let mut factor = Rat::from_integer(1);
                    for i in 0..n {
                        factor *= binomial(b[i], k[i]) * falling_factorial(cz[i], k[i]);
                    }
                    let mut zk = vec![0u32; n];
                    let mut dk = vec![0u32; n];
                    for i in 0..n {
                        zk[i] = a[i] + cz[i] - k[i];
                        dk[i] = b[i] + d[i] - k[i];
                    }
                    out.add_term((zk, dk), coeff.scale(factor));
                    // Increment multi-index k within bounds kmax.
                    let mut pos = 0;
                    loop {
                        if pos == n {
                            break;
                        }
                        if k[pos] < kmax[pos] {
                            k[pos] += 1;
                            break;
                        }
                        k[pos] = 0;
                        pos += 1;
                    }
                    if pos == n {
                        break;
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).sub(&other.compose(self))
    }

    /// Exact application to a polynomial in z.
    pub fn apply(&self, f: &ZPoly) -> ZPoly {
        let mut out = ZPoly::zero(self.n);
        for ((a, b), c) in &self.terms {
            for (m, cf) in &f.terms {
                if b.iter().zip(m).any(|(&bi, &mi)| bi > mi) {
                    continue;
                }
                let mut factor = Rat::from_integer(1);
                for i in 0..self.n {
                    factor *= falling_factorial(m[i], b[i]);
                }
                let exps: Exps =
                    m.iter().zip(b).zip(a).map(|((&mi, &bi), &ai)| mi - bi + ai).collect();
                out.add_term(exps, (c * cf).scale(factor));
            }
        }
        out
    }

    /// Total order of a term = z-degree + d-degree; None for zero.
    pub fn total_order(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| total(a) + total(b)).max()
    }

    /// The graded part of top total order.
    pub fn top_order_part(&self) -> Self {
        match self.total_order() {
            None => Self::zero(self.n),
            Some(d) => PdOperator {
                n: self.n,
                terms: self
                    .terms
                    .iter()
                    .filter(|((a, b), _)| total(a) + total(b) == d)
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect(),
            },
        }
    }
}

impl fmt::Display for PdOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((a, b), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (i, &e) in a.iter().enumerate() {
                if e == 1 {
                    write!(f, "*z{}", i + 1)?;
                } else if e > 1 {
                    write!(f, "*z{}^{e}", i + 1)?;
                }
            }
            for (i, &e) in b.iter().enumerate() {
                if e == 1 {
                    write!(f, "*d{}", i + 1)?;
                } else if e > 1 {
                    write!(f, "*d{}^{e}", i + 1)?;
                }
            }
        }
        Ok(())
    }
}
