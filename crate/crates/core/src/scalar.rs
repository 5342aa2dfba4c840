//! Exact rational-complex scalars and small exact matrices.
//!
//! The symbolic layer (characters excepted, which are pure integers) runs on
//! Gaussian rationals: pairs of `Ratio<i128>`. Desk-scale degrees keep all
//! denominators tiny, so `i128` never gets close to overflow in practice.

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

pub type Rat = Ratio<i128>;

/// A Gaussian rational `re + im·i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CRat {
    pub re: Rat,
    pub im: Rat,
}

impl CRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        CRat { re, im }
    }

    pub fn zero() -> Self {
        CRat { re: Rat::zero(), im: Rat::zero() }
    }

    pub fn one() -> Self {
        CRat { re: Rat::one(), im: Rat::zero() }
    }

    pub fn i() -> Self {
        CRat { re: Rat::zero(), im: Rat::one() }
    }

    pub fn from_int(n: i128) -> Self {
        CRat { re: Rat::from_integer(n), im: Rat::zero() }
    }

    pub fn from_ratio(num: i128, den: i128) -> Self {
        CRat { re: Rat::new(num, den), im: Rat::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        CRat { re: self.re, im: -self.im }
    }

    pub fn scale(&self, r: Rat) -> Self {
        CRat { re: self.re * r, im: self.im * r }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Self {
        let n = self.re * self.re + self.im * self.im;
        assert!(!n.is_zero(), "division by zero CRat");
        CRat { re: self.re / n, im: -self.im / n }
    }

    pub fn to_f64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(ratio_to_f64(self.re), ratio_to_f64(self.im))
    }
}

pub fn ratio_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Best rational approximation with bounded denominator, via continued
/// fractions. Returns `None` when the approximation misses `x` by more than
/// `tol`.
pub fn rationalize(x: f64, max_den: i128, tol: f64) -> Option<Rat> {
    if !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (1i128, 0i128, x.floor() as i128, 1i128);
    let mut frac = x - x.floor();
    for _ in 0..64 {
        let approx = p1 as f64 / q1 as f64;
        if (approx - x).abs() <= tol {
            return Some(Rat::new(p1, q1));
        }
        if frac.abs() < 1e-15 {
            break;
        }
        let r = 1.0 / frac;
        let a = r.floor();
        frac = r - a;
        let a = a as i128;
        let p2 = a.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    let approx = p1 as f64 / q1 as f64;
    if q1 <= max_den && (approx - x).abs() <= tol {
        Some(Rat::new(p1, q1))
    } else {
        None
    }
}

/// Rationalize both parts of a complex number.
pub fn rationalize_complex(z: num_complex::Complex64, max_den: i128, tol: f64) -> Option<CRat> {
    Some(CRat::new(rationalize(z.re, max_den, tol)?, rationalize(z.im, max_den, tol)?))
}

impl Add for CRat {
    type Output = CRat;
    fn add(self, rhs: CRat) -> CRat {
        CRat { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl AddAssign for CRat {
    fn add_assign(&mut self, rhs: CRat) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl Sub for CRat {
    type Output = CRat;
    fn sub(self, rhs: CRat) -> CRat {
        CRat { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Neg for CRat {
    type Output = CRat;
    fn neg(self) -> CRat {
        CRat { re: -self.re, im: -self.im }
    }
}

impl Mul for CRat {
    type Output = CRat;
    fn mul(self, rhs: CRat) -> CRat {
        CRat {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl<'a> Mul<&'a CRat> for &'a CRat {
    type Output = CRat;
    fn mul(self, rhs: &CRat) -> CRat {
        self.clone() * rhs.clone()
    }
}

impl fmt::Debug for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_positive() {
            write!(f, "{}+{}i", self.re, self.im)
        } else {
            write!(f, "{}{}i", self.re, self.im)
        }
    }
}

/// Dense exact complex-rational matrix, used for factor bases and the exact
/// copies of realization matrices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatCMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<CRat>, // row major
}

impl RatCMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatCMat { rows, cols, data: vec![CRat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = CRat::one();
        }
        m
    }

    pub fn conj(&self) -> Self {
        RatCMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        RatCMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn scale(&self, c: &CRat) -> Self {
        RatCMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatCMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let term = a.clone() * other[(k, j)].clone();
                    m[(i, j)] += term;
                }
            }
        }
        m
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut m = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)].clone();
                if a.is_zero() {
                    continue;
                }
                for p in 0..other.rows {
                    for q in 0..other.cols {
                        m[(i * other.rows + p, j * other.cols + q)] =
                            a.clone() * other[(p, q)].clone();
                    }
                }
            }
        }
        m
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<num_complex::Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_f64())
    }

    pub fn trace(&self) -> CRat {
        assert_eq!(self.rows, self.cols);
        let mut t = CRat::zero();
        for i in 0..self.rows {
            t += self[(i, i)].clone();
        }
        t
    }

    /// Exact inverse by Gauss-Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<RatCMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatCMat::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a[(col, col)].inv();
            for j in 0..n {
                a[(col, j)] = a[(col, j)].clone() * p.clone();
                inv[(col, j)] = inv[(col, j)].clone() * p.clone();
            }
            for r in 0..n {
                if r != col && !a[(r, col)].is_zero() {
                    let f = a[(r, col)].clone();
                    for j in 0..n {
                        let s = f.clone() * a[(col, j)].clone();
                        a[(r, j)] = a[(r, j)].clone() - s;
                        let s = f.clone() * inv[(col, j)].clone();
                        inv[(r, j)] = inv[(r, j)].clone() - s;
                    }
                }
            }
        }
        Some(inv)
    }
}

impl std::ops::Index<(usize, usize)> for RatCMat {
    type Output = CRat;
    fn index(&self, (i, j): (usize, usize)) -> &CRat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatCMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut CRat {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crat_field_ops() {
        let a = CRat::new(Rat::new(1, 2), Rat::new(-3, 4));
        let b = a.inv();
        assert_eq!(a * b, CRat::one());
        let i = CRat::i();
        assert_eq!(i.clone() * i, CRat::from_int(-1));
    }

    #[test]
    fn rationalize_recovers_simple_fractions() {
        assert_eq!(rationalize(0.5, 1000, 1e-9), Some(Rat::new(1, 2)));
        assert_eq!(rationalize(-2.0 / 3.0, 1000, 1e-9), Some(Rat::new(-2, 3)));
        assert_eq!(rationalize(0.0, 1000, 1e-9), Some(Rat::zero()));
        // sqrt(2) has no small-denominator representation at this tolerance
        assert_eq!(rationalize(std::f64::consts::SQRT_2, 1_000_000, 1e-12), None);
    }

    #[test]
    fn ratmat_kron_identity() {
        let id2 = RatCMat::identity(2);
        let id3 = RatCMat::identity(3);
        assert_eq!(id2.kron(&id3), RatCMat::identity(6));
    }
}
