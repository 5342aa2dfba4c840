//! Concrete matrix realizations of compact classical groups.
//!
//! A group is a product of factors from {U(n), SU(n), SO(n), Sp(n), T}. Each
//! factor carries an exact basis of its Lie algebra acting on a defining
//! block; a representation tag induces the action on V. Coadjoint data lives
//! on the abstract factor blocks, while the moment map consumes the induced
//! matrices on V.
//!
//! Conventions fixed here, once, for the whole crate:
//! * the Hermitian form is linear in the FIRST argument, `<z,w> = sum z_i conj(w_i)`,
//!   and `omega = Im<.,.>`;
//! * the dual of the Lie algebra is identified with the algebra through the
//!   invariant form `B(X,Y) = -Re tr(XY)` on the defining blocks.

use crate::error::CoreError;
use crate::linalg::{self, CMat, CVec, RMat, RVec};
use crate::scalar::{CRat, RatCMat};
use num_complex::Complex64;
use num_rational::Ratio;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::ops::Range;

/// One factor of a product group.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Factor {
    U(usize),
    SU(usize),
    SO(usize),
    Sp(usize),
    Circle,
}

impl Factor {
    /// Real dimension of the factor's Lie algebra.
    pub fn dim(&self) -> usize {
        match *self {
            Factor::U(n) => n * n,
            Factor::SU(n) => n * n - 1,
            Factor::SO(n) => n * (n - 1) / 2,
            Factor::Sp(n) => n * (2 * n + 1),
            Factor::Circle => 1,
        }
    }

    /// Size of the defining block the factor acts on.
    pub fn block_dim(&self) -> usize {
        match *self {
            Factor::U(n) | Factor::SU(n) | Factor::SO(n) => n,
            Factor::Sp(n) => 2 * n,
            Factor::Circle => 1,
        }
    }

    pub fn torus_rank(&self) -> usize {
        match *self {
            Factor::U(n) => n,
            Factor::SU(n) => n - 1,
            Factor::SO(n) => n / 2,
            Factor::Sp(n) => n,
            Factor::Circle => 1,
        }
    }

    fn validate(&self) -> Result<(), CoreError> {
        let (name, n, max) = match *self {
            Factor::U(n) => ("U", n, 4),
            Factor::SU(n) => ("SU", n, 4),
            Factor::SO(n) => ("SO", n, 5),
            Factor::Sp(n) => ("Sp", n, 2),
            Factor::Circle => return Ok(()),
        };
        if n < 1 {
            return Err(CoreError::SizeOutOfRange(format!("{name}({n}): size must be >= 1")));
        }
        if matches!(self, Factor::SU(1)) {
            return Err(CoreError::SizeOutOfRange("SU(1) is trivial".into()));
        }
        if n > max {
            return Err(CoreError::SizeOutOfRange(format!(
                "{name}({n}) exceeds the desk-scale cap {name}(n<={max})"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Factor::U(n) => write!(f, "U({n})"),
            Factor::SU(n) => write!(f, "SU({n})"),
            Factor::SO(n) => write!(f, "SO({n})"),
            Factor::Sp(n) => write!(f, "Sp({n})"),
            Factor::Circle => write!(f, "T"),
        }
    }
}

/// An ordered product of factors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupSpec {
    pub factors: Vec<Factor>,
}

impl GroupSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self, CoreError> {
        if factors.is_empty() {
            return Err(CoreError::Invalid("group must have at least one factor".into()));
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(GroupSpec { factors })
    }

    pub fn dim_k(&self) -> usize {
        self.factors.iter().map(Factor::dim).sum()
    }

    pub fn torus_rank(&self) -> usize {
        self.factors.iter().map(Factor::torus_rank).sum()
    }

    /// Parse strings like "U(2)", "T x SO(3)", "U(2) x Sp(2)".
    pub fn parse(s: &str) -> Result<Self, CoreError> {
        let mut factors = Vec::new();
        for tok in s.split(['x', '*']).map(str::trim) {
            if tok.is_empty() {
                continue;
            }
            let f = if tok == "T" || tok == "U(1)_scalar" {
                Factor::Circle
            } else if let Some(rest) = tok.strip_prefix("SU(") {
                Factor::SU(parse_size(rest, tok)?)
            } else if let Some(rest) = tok.strip_prefix("SO(") {
                Factor::SO(parse_size(rest, tok)?)
            } else if let Some(rest) = tok.strip_prefix("Sp(") {
                Factor::Sp(parse_size(rest, tok)?)
            } else if let Some(rest) = tok.strip_prefix("U(") {
                Factor::U(parse_size(rest, tok)?)
            } else {
                return Err(CoreError::UnsupportedFactor(tok.to_string()));
            };
            factors.push(f);
        }
        GroupSpec::new(factors)
    }
}

fn parse_size(rest: &str, tok: &str) -> Result<usize, CoreError> {
    rest.strip_suffix(')')
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| CoreError::UnsupportedFactor(tok.to_string()))
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// How the product group acts on V.
///
/// Circle factors always act by the scalar weight-one character; the
/// non-circle factors enter through their standard blocks.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RepTag {
    /// Standard representation of the unique non-circle factor (or C for a
    /// pure torus).
    Standard,
    /// Dual of `Standard`.
    Dual,
    /// Symmetric square of the standard block.
    Sym2,
    /// Exterior square of the standard block.
    Ext2,
    /// Tensor product of the standard blocks of all non-circle factors.
    Tensor,
    /// Direct sum of `m` copies of the standard block.
    DirectSum(usize),
}

impl fmt::Display for RepTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RepTag::Standard => write!(f, "standard"),
            RepTag::Dual => write!(f, "dual"),
            RepTag::Sym2 => write!(f, "sym2"),
            RepTag::Ext2 => write!(f, "ext2"),
            RepTag::Tensor => write!(f, "tensor"),
            RepTag::DirectSum(m) => write!(f, "dsum{m}"),
        }
    }
}

impl RepTag {
    pub fn parse(s: &str) -> Result<Self, CoreError> {
        match s.trim() {
            "standard" => Ok(RepTag::Standard),
            "dual" => Ok(RepTag::Dual),
            "sym2" => Ok(RepTag::Sym2),
            "ext2" => Ok(RepTag::Ext2),
            "tensor" => Ok(RepTag::Tensor),
            other => {
                if let Some(m) = other.strip_prefix("dsum").and_then(|x| x.parse::<usize>().ok()) {
                    Ok(RepTag::DirectSum(m))
                } else {
                    Err(CoreError::Invalid(format!("unknown representation tag {other:?}")))
                }
            }
        }
    }
}

/// A linear functional on the Lie algebra, stored as its values on the
/// chosen basis.
#[derive(Clone, PartialEq, Debug)]
pub struct DualElement {
    pub coords: RVec,
}

impl DualElement {
    pub fn zero(dim_k: usize) -> Self {
        DualElement { coords: RVec::zeros(dim_k) }
    }

    pub fn from_coords(coords: RVec) -> Self {
        DualElement { coords }
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }
}

/// A group element, stored per factor on its defining block.
#[derive(Clone, Debug)]
pub struct GroupElement {
    pub blocks: Vec<CMat>,
}

impl GroupElement {
    pub fn multiply(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// Inverse via the adjoint; valid because blocks are unitary.
    pub fn inverse(&self) -> GroupElement {
        GroupElement { blocks: self.blocks.iter().map(CMat::adjoint).collect() }
    }
}

/// Exact Lie-algebra data of one factor.
pub struct FactorData {
    pub factor: Factor,
    /// Exact basis matrices on the defining block; torus elements first.
    pub basis: Vec<RatCMat>,
    pub basis_f64: Vec<CMat>,
    pub torus_count: usize,
    pub gram: RatCMat,
    pub gram_inv: RatCMat,
    pub gram_inv_f64: RMat,
}

/// A compact group action realized by matrices: the exact factor bases plus
/// the induced skew-Hermitian matrices on V.
pub struct MatrixRealization {
    group: GroupSpec,
    rep: RepTag,
    dim_v: usize,
    factors: Vec<FactorData>,
    factor_offsets: Vec<Range<usize>>,
    basis_v: Vec<CMat>,
    basis_v_exact: Option<Vec<RatCMat>>,
}

fn e_mat(n: usize, i: usize, j: usize, c: CRat) -> RatCMat {
    let mut m = RatCMat::zeros(n, n);
    m[(i, j)] = c;
    m
}

fn factor_basis(factor: Factor) -> (Vec<RatCMat>, usize) {
    let one = CRat::one();
    let i = CRat::i();
    match factor {
        Factor::Circle => (vec![e_mat(1, 0, 0, i)], 1),
        Factor::U(n) => {
            let mut basis = Vec::with_capacity(n * n);
            for j in 0..n {
                basis.push(e_mat(n, j, j, i.clone()));
            }
            for j in 0..n {
                for k in (j + 1)..n {
                    let s = e_mat(n, j, k, one.clone()).add(&e_mat(n, k, j, -one.clone()));
                    let t = e_mat(n, j, k, i.clone()).add(&e_mat(n, k, j, i.clone()));
                    basis.push(s);
                    basis.push(t);
                }
            }
            (basis, n)
        }
        Factor::SU(n) => {
            let mut basis = Vec::with_capacity(n * n - 1);
            for j in 0..n - 1 {
                basis.push(e_mat(n, j, j, i.clone()).add(&e_mat(n, j + 1, j + 1, -i.clone())));
            }
            for j in 0..n {
                for k in (j + 1)..n {
                    basis.push(e_mat(n, j, k, one.clone()).add(&e_mat(n, k, j, -one.clone())));
                    basis.push(e_mat(n, j, k, i.clone()).add(&e_mat(n, k, j, i.clone())));
                }
            }
            (basis, n - 1)
        }
        Factor::SO(n) => {
            let m = n / 2;
            let mut basis = Vec::with_capacity(n * (n - 1) / 2);
            let rot = |j: usize, k: usize| e_mat(n, j, k, one.clone()).add(&e_mat(n, k, j, -one.clone()));
            for t in 0..m {
                basis.push(rot(2 * t, 2 * t + 1));
            }
            for j in 0..n {
                for k in (j + 1)..n {
                    let is_torus = j % 2 == 0 && k == j + 1 && k / 2 == j / 2 + 0 && j / 2 < m && k % 2 == 1;
                    if !is_torus {
                        basis.push(rot(j, k));
                    }
                }
            }
            (basis, m)
        }
        Factor::Sp(n) => {
            // Block form [[A, B], [-conj(B), conj(A)]] with A skew-Hermitian
            // and B symmetric, embedded in U(2n).
            let emb = |a: &RatCMat| -> RatCMat {
                let mut m = RatCMat::zeros(2 * n, 2 * n);
                for p in 0..n {
                    for q in 0..n {
                        m[(p, q)] = a[(p, q)].clone();
                        m[(n + p, n + q)] = a[(p, q)].conj();
                    }
                }
                m
            };
            let offb = |s: &RatCMat, phase: CRat| -> RatCMat {
                // [[0, phase*S], [-conj(phase*S), 0]]
                let mut m = RatCMat::zeros(2 * n, 2 * n);
                for p in 0..n {
                    for q in 0..n {
                        let v = phase.clone() * s[(p, q)].clone();
                        m[(p, n + q)] = v.clone();
                        m[(n + p, q)] = -v.conj();
                    }
                }
                m
            };
            let mut basis = Vec::with_capacity(n * (2 * n + 1));
            for j in 0..n {
                basis.push(emb(&e_mat(n, j, j, i.clone())));
            }
            for j in 0..n {
                for k in (j + 1)..n {
                    basis.push(emb(&e_mat(n, j, k, one.clone()).add(&e_mat(n, k, j, -one.clone()))));
                    basis.push(emb(&e_mat(n, j, k, i.clone()).add(&e_mat(n, k, j, i.clone()))));
                }
            }
            for j in 0..n {
                for k in j..n {
                    let s = if j == k {
                        e_mat(n, j, j, one.clone())
                    } else {
                        e_mat(n, j, k, one.clone()).add(&e_mat(n, k, j, one.clone()))
                    };
                    basis.push(offb(&s, one.clone()));
                    basis.push(offb(&s, i.clone()));
                }
            }
            (basis, n)
        }
    }
}

fn build_factor_data(factor: Factor) -> Result<FactorData, CoreError> {
    let (basis, torus_count) = factor_basis(factor);
    debug_assert_eq!(basis.len(), factor.dim());
    let dim = basis.len();
    let mut gram = RatCMat::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            // B(X, Y) = -Re tr(XY); traces of skew-Hermitian products are real.
            let t = basis[a].matmul(&basis[b]).trace();
            gram[(a, b)] = CRat::new(-t.re, Ratio::from_integer(0));
        }
    }
    let gram_inv = gram
        .inverse()
        .ok_or_else(|| CoreError::Invalid(format!("degenerate trace form on {factor}")))?;
    let gram_inv_f64 = RMat::from_fn(dim, dim, |r, c| crate::scalar::ratio_to_f64(gram_inv[(r, c)].re));
    let basis_f64 = basis.iter().map(RatCMat::to_f64).collect();
    Ok(FactorData { factor, basis, basis_f64, torus_count, gram, gram_inv, gram_inv_f64 })
}

/// Exact exterior-square matrix of the derived action: basis e_j ^ e_k
/// (j < k, lexicographic).
fn ext2_derived_exact(a: &RatCMat) -> RatCMat {
    let n = a.rows;
    let pairs: Vec<(usize, usize)> = pair_index_lt(n);
    let mut m = RatCMat::zeros(pairs.len(), pairs.len());
    for (col, &(j, k)) in pairs.iter().enumerate() {
        for (row, &(p, q)) in pairs.iter().enumerate() {
            let mut v = CRat::zero();
            if q == k {
                v += a[(p, j)].clone();
            }
            if p == j {
                v += a[(q, k)].clone();
            }
            if q == j {
                v = v - a[(p, k)].clone();
            }
            if p == k {
                v = v - a[(q, j)].clone();
            }
            m[(row, col)] = v;
        }
    }
    m
}

fn ext2_group(g: &CMat) -> CMat {
    let n = g.nrows();
    let pairs = pair_index_lt(n);
    CMat::from_fn(pairs.len(), pairs.len(), |row, col| {
        let (p, q) = pairs[row];
        let (j, k) = pairs[col];
        g[(p, j)] * g[(q, k)] - g[(q, j)] * g[(p, k)]
    })
}

pub fn pair_index_lt(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            v.push((j, k));
        }
    }
    v
}

pub fn pair_index_le(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for j in 0..n {
        for k in j..n {
            v.push((j, k));
        }
    }
    v
}

/// Isometry C^{n(n+1)/2} -> C^n (x) C^n onto the symmetric square, in the
/// orthonormal basis {e_j(x)e_j, (e_j(x)e_k + e_k(x)e_j)/sqrt(2)}.
fn sym2_isometry(n: usize) -> CMat {
    let pairs = pair_index_le(n);
    let mut p = CMat::zeros(n * n, pairs.len());
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for (col, &(j, k)) in pairs.iter().enumerate() {
        if j == k {
            p[(j * n + j, col)] = Complex64::new(1.0, 0.0);
        } else {
            p[(j * n + k, col)] = Complex64::new(s, 0.0);
            p[(k * n + j, col)] = Complex64::new(s, 0.0);
        }
    }
    p
}

fn kron_f64(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

struct RepShape {
    noncircle: Vec<usize>, // indices of non-circle factors
    dim_v: usize,
}

fn rep_shape(group: &GroupSpec, rep: RepTag) -> Result<RepShape, CoreError> {
    let noncircle: Vec<usize> = group
        .factors
        .iter()
        .enumerate()
        .filter(|(_, f)| !matches!(f, Factor::Circle))
        .map(|(i, _)| i)
        .collect();
    let err = || CoreError::UnsupportedRep { tag: rep.to_string(), group: group.to_string() };
    let base_dim = |idx: usize| group.factors[idx].block_dim();
    let dim_v = match rep {
        RepTag::Standard | RepTag::Dual => match noncircle.len() {
            0 => 1,
            1 => base_dim(noncircle[0]),
            _ => return Err(err()),
        },
        RepTag::Sym2 => match noncircle.len() {
            1 => {
                let n = base_dim(noncircle[0]);
                n * (n + 1) / 2
            }
            _ => return Err(err()),
        },
        RepTag::Ext2 => match noncircle.len() {
            1 => {
                let n = base_dim(noncircle[0]);
                if n < 2 {
                    return Err(err());
                }
                n * (n - 1) / 2
            }
            _ => return Err(err()),
        },
        RepTag::Tensor => {
            if noncircle.is_empty() {
                return Err(err());
            }
            noncircle.iter().map(|&i| base_dim(i)).product()
        }
        RepTag::DirectSum(m) => match noncircle.len() {
            1 if m >= 1 => m * base_dim(noncircle[0]),
            _ => return Err(err()),
        },
    };
    Ok(RepShape { noncircle, dim_v })
}

impl MatrixRealization {
    /// Build the realization of `group` acting on V through `rep`.
    pub fn build(group: GroupSpec, rep: RepTag) -> Result<Self, CoreError> {
        let shape = rep_shape(&group, rep)?;
        let mut factors = Vec::new();
        for &f in &group.factors {
            factors.push(build_factor_data(f)?);
        }
        let mut factor_offsets = Vec::new();
        let mut off = 0;
        for fd in &factors {
            factor_offsets.push(off..off + fd.basis.len());
            off += fd.basis.len();
        }

        let mut basis_v: Vec<CMat> = Vec::with_capacity(off);
        let mut basis_v_exact: Option<Vec<RatCMat>> = if matches!(rep, RepTag::Sym2) {
            None
        } else {
            Some(Vec::with_capacity(off))
        };

        for (fi, fd) in factors.iter().enumerate() {
            for b in &fd.basis {
                let (fm, em) = induce_lie(&group, rep, &shape, fi, b, shape.dim_v)?;
                basis_v.push(fm);
                match (&mut basis_v_exact, em) {
                    (Some(v), Some(e)) => v.push(e),
                    (opt, None) => *opt = None,
                    _ => {}
                }
            }
        }

        let real = MatrixRealization {
            group,
            rep,
            dim_v: shape.dim_v,
            factors,
            factor_offsets,
            basis_v,
            basis_v_exact,
        };
        real.validate()?;
        Ok(real)
    }

    fn validate(&self) -> Result<(), CoreError> {
        for (i, b) in self.basis_v.iter().enumerate() {
            let r = linalg::skew_hermitian_residual(b);
            if r > 1e-12 {
                return Err(CoreError::Invalid(format!(
                    "basis matrix {i} is not skew-Hermitian (residual {r:.3e})"
                )));
            }
        }
        // Abstract basis independence, factor by factor.
        for fd in &self.factors {
            let n = fd.factor.block_dim();
            let m = RMat::from_fn(2 * n * n, fd.basis.len(), |r, c| {
                let (re, idx) = (r < n * n, r % (n * n));
                let e = fd.basis_f64[c][(idx / n, idx % n)];
                if re {
                    e.re
                } else {
                    e.im
                }
            });
            if linalg::numerical_rank(&m, linalg::RANK_REL_TOL) != fd.basis.len() {
                return Err(CoreError::Invalid(format!(
                    "factor {} basis is linearly dependent",
                    fd.factor
                )));
            }
        }
        self.check_bracket_closure(1e-12)?;
        Ok(())
    }

    /// Residual of expressing every bracket of induced matrices in the real
    /// span of the induced basis.
    pub fn check_bracket_closure(&self, tol: f64) -> Result<f64, CoreError> {
        let dk = self.dim_k();
        let dv = self.dim_v;
        // Columns: realified induced basis matrices.
        let cols = RMat::from_fn(2 * dv * dv, dk, |r, c| {
            let idx = r % (dv * dv);
            let e = self.basis_v[c][(idx / dv, idx % dv)];
            if r < dv * dv {
                e.re
            } else {
                e.im
            }
        });
        let mut worst: f64 = 0.0;
        for i in 0..dk {
            for j in (i + 1)..dk {
                let br = &self.basis_v[i] * &self.basis_v[j] - &self.basis_v[j] * &self.basis_v[i];
                let b = RVec::from_fn(2 * dv * dv, |r, _| {
                    let idx = r % (dv * dv);
                    let e = br[(idx / dv, idx % dv)];
                    if r < dv * dv {
                        e.re
                    } else {
                        e.im
                    }
                });
                let x = linalg::lstsq_real(&cols, &b, 1e-13);
                let res = (&cols * &x - &b).norm();
                worst = worst.max(res);
            }
        }
        if worst > tol {
            return Err(CoreError::Invalid(format!("bracket closure residual {worst:.3e}")));
        }
        Ok(worst)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn rep(&self) -> RepTag {
        self.rep
    }

    pub fn dim_v(&self) -> usize {
        self.dim_v
    }

    pub fn dim_k(&self) -> usize {
        self.basis_v.len()
    }

    pub fn basis_v(&self) -> &[CMat] {
        &self.basis_v
    }

    pub fn basis_v_exact(&self) -> Option<&[RatCMat]> {
        self.basis_v_exact.as_deref()
    }

    pub fn factor_data(&self) -> &[FactorData] {
        &self.factors
    }

    pub fn factor_offsets(&self) -> &[Range<usize>] {
        &self.factor_offsets
    }

    /// Global basis indices of the torus sub-basis, factor by factor.
    pub fn torus_indices(&self) -> Vec<usize> {
        let mut v = Vec::new();
        for (fd, range) in self.factors.iter().zip(&self.factor_offsets) {
            for t in 0..fd.torus_count {
                v.push(range.start + t);
            }
        }
        v
    }

    pub fn group_identity(&self) -> GroupElement {
        GroupElement {
            blocks: self
                .group
                .factors
                .iter()
                .map(|f| CMat::identity(f.block_dim(), f.block_dim()))
                .collect(),
        }
    }

    /// Haar-distributed group element; deterministic in the seed.
    pub fn haar_sample(&self, seed: u64) -> GroupElement {
        let mut rng = linalg::seeded(seed, 0x4861_6172);
        GroupElement {
            blocks: self.group.factors.iter().map(|f| haar_block(*f, &mut rng)).collect(),
        }
    }

    /// The unitary matrix through which `k` acts on V.
    pub fn image_on_v(&self, k: &GroupElement) -> CMat {
        let shape = rep_shape(&self.group, self.rep).expect("validated at build");
        let mut scalar = Complex64::new(1.0, 0.0);
        for (f, b) in self.group.factors.iter().zip(&k.blocks) {
            if matches!(f, Factor::Circle) {
                scalar *= b[(0, 0)];
            }
        }
        let base: CMat = match self.rep {
            RepTag::Standard | RepTag::Dual | RepTag::Sym2 | RepTag::Ext2 | RepTag::DirectSum(_) => {
                if shape.noncircle.is_empty() {
                    CMat::identity(1, 1)
                } else {
                    k.blocks[shape.noncircle[0]].clone()
                }
            }
            RepTag::Tensor => {
                let mut m = k.blocks[shape.noncircle[0]].clone();
                for &i in &shape.noncircle[1..] {
                    m = kron_f64(&m, &k.blocks[i]);
                }
                m
            }
        };
        let m = match self.rep {
            RepTag::Standard | RepTag::Tensor => base,
            RepTag::Dual => base.map(|c| c.conj()),
            RepTag::Sym2 => {
                let n = base.nrows();
                let p = sym2_isometry(n);
                p.adjoint() * kron_f64(&base, &base) * p
            }
            RepTag::Ext2 => ext2_group(&base),
            RepTag::DirectSum(copies) => {
                let n = base.nrows();
                let mut m = CMat::zeros(copies * n, copies * n);
                for c in 0..copies {
                    m.view_mut((c * n, c * n), (n, n)).copy_from(&base);
                }
                m
            }
        };
        m * scalar
    }

    pub fn apply_group(&self, k: &GroupElement, z: &CVec) -> CVec {
        self.image_on_v(k) * z
    }

    /// Coadjoint action: `(Ad*(k) xi)(A) = xi(k^{-1} A k)`, computed factor
    /// by factor on the defining blocks.
    pub fn ad_star(&self, k: &GroupElement, xi: &DualElement) -> Result<DualElement, CoreError> {
        if xi.coords.len() != self.dim_k() {
            return Err(CoreError::DimensionMismatch(format!(
                "dual element has {} coords, expected {}",
                xi.coords.len(),
                self.dim_k()
            )));
        }
        let mut out = RVec::zeros(self.dim_k());
        for (fi, fd) in self.factors.iter().enumerate() {
            let range = &self.factor_offsets[fi];
            let block = &k.blocks[fi];
            let kinv = block.adjoint();
            let dim = fd.basis.len();
            for i in 0..dim {
                let conj = &kinv * &fd.basis_f64[i] * block;
                // Expand k^{-1} A_i k in the factor basis through the Gram matrix.
                let b = RVec::from_fn(dim, |j, _| {
                    -(&conj * &fd.basis_f64[j]).trace().re
                });
                let x = &fd.gram_inv_f64 * b;
                let mut acc = 0.0;
                for j in 0..dim {
                    acc += x[j] * xi.coords[range.start + j];
                }
                out[range.start + i] = acc;
            }
        }
        Ok(DualElement::from_coords(out))
    }

    /// Dualize `xi` within factor `fi`: the matrix `X` on the defining block
    /// with `B(X, A_j) = xi(A_j)`.
    pub fn dualize_factor(&self, fi: usize, xi: &DualElement) -> CMat {
        let fd = &self.factors[fi];
        let range = &self.factor_offsets[fi];
        let coords = RVec::from_fn(fd.basis.len(), |j, _| xi.coords[range.start + j]);
        let c = &fd.gram_inv_f64 * coords;
        let n = fd.factor.block_dim();
        let mut x = CMat::zeros(n, n);
        for (l, b) in fd.basis_f64.iter().enumerate() {
            x += b * Complex64::new(c[l], 0.0);
        }
        x
    }

    /// Weights of the V-coordinates under the torus elements whose induced
    /// matrices are diagonal. Entries: (global basis index, per-coordinate
    /// integer weight). Used to restrict invariant searches by grading.
    pub fn diagonal_torus_weights(&self) -> Vec<(usize, Vec<i64>)> {
        let mut out = Vec::new();
        for &ti in &self.torus_indices() {
            let m = &self.basis_v[ti];
            let mut diagonal = true;
            'scan: for r in 0..self.dim_v {
                for c in 0..self.dim_v {
                    if r != c && m[(r, c)].norm() > 1e-12 {
                        diagonal = false;
                        break 'scan;
                    }
                }
            }
            if !diagonal {
                continue;
            }
            let mut ws = Vec::with_capacity(self.dim_v);
            let mut ok = true;
            for d in 0..self.dim_v {
                let w = m[(d, d)].im;
                let wi = w.round();
                if (w - wi).abs() > 1e-9 || m[(d, d)].re.abs() > 1e-12 {
                    ok = false;
                    break;
                }
                ws.push(wi as i64);
            }
            if ok {
                out.push((ti, ws));
            }
        }
        out
    }
}

fn induce_lie(
    group: &GroupSpec,
    rep: RepTag,
    shape: &RepShape,
    factor_index: usize,
    b: &RatCMat,
    dim_v: usize,
) -> Result<(CMat, Option<RatCMat>), CoreError> {
    let i = CRat::i();
    if matches!(group.factors[factor_index], Factor::Circle) {
        let exact = RatCMat::identity(dim_v).scale(&i);
        return Ok((exact.to_f64(), Some(exact)));
    }
    let pos = shape
        .noncircle
        .iter()
        .position(|&x| x == factor_index)
        .expect("non-circle factor present");
    match rep {
        RepTag::Standard => Ok((b.to_f64(), Some(b.clone()))),
        RepTag::Dual => {
            let e = b.conj();
            Ok((e.to_f64(), Some(e)))
        }
        RepTag::Ext2 => {
            let e = ext2_derived_exact(b);
            Ok((e.to_f64(), Some(e)))
        }
        RepTag::Sym2 => {
            let bf = b.to_f64();
            let n = bf.nrows();
            let p = sym2_isometry(n);
            let big = kron_f64(&bf, &CMat::identity(n, n)) + kron_f64(&CMat::identity(n, n), &bf);
            Ok((p.adjoint() * big * p, None))
        }
        RepTag::Tensor => {
            let mut e = if pos == 0 {
                b.clone()
            } else {
                RatCMat::identity(group.factors[shape.noncircle[0]].block_dim())
            };
            for (slot, &fi) in shape.noncircle.iter().enumerate().skip(1) {
                let next = if slot == pos {
                    b.clone()
                } else {
                    RatCMat::identity(group.factors[fi].block_dim())
                };
                e = e.kron(&next);
            }
            Ok((e.to_f64(), Some(e)))
        }
        RepTag::DirectSum(copies) => {
            let n = b.rows;
            let mut e = RatCMat::zeros(copies * n, copies * n);
            for c in 0..copies {
                for r in 0..n {
                    for s in 0..n {
                        e[(c * n + r, c * n + s)] = b[(r, s)].clone();
                    }
                }
            }
            Ok((e.to_f64(), Some(e)))
        }
    }
}

fn haar_block(factor: Factor, rng: &mut ChaCha8Rng) -> CMat {
    match factor {
        Factor::Circle => {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            CMat::from_element(1, 1, Complex64::from_polar(1.0, theta))
        }
        Factor::U(n) => haar_unitary(n, rng),
        Factor::SU(n) => {
            let g = haar_unitary(n, rng);
            let det = g.determinant();
            let phase = det.arg();
            g * Complex64::from_polar(1.0, -phase / n as f64)
        }
        Factor::SO(n) => {
            if n == 1 {
                return CMat::identity(1, 1);
            }
            let m = RMat::from_fn(n, n, |_, _| linalg::standard_normal(rng));
            let qr = m.qr();
            let mut q = qr.q();
            let r = qr.r();
            for j in 0..n {
                if r[(j, j)] < 0.0 {
                    for i in 0..n {
                        q[(i, j)] = -q[(i, j)];
                    }
                }
            }
            if q.determinant() < 0.0 {
                for i in 0..n {
                    q[(i, n - 1)] = -q[(i, n - 1)];
                }
            }
            q.map(|x| Complex64::new(x, 0.0))
        }
        Factor::Sp(n) => haar_symplectic(n, rng),
    }
}

fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let m = CMat::from_fn(n, n, |_, _| linalg::complex_gaussian(rng));
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Haar sampling of the compact symplectic group inside U(2n) via
/// quaternionic Gram-Schmidt: each accepted column determines its partner
/// `(u, v) -> (-conj(v), conj(u))`.
fn haar_symplectic(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let dim = 2 * n;
    let mut cols: Vec<CVec> = Vec::with_capacity(dim);
    let partner = |c: &CVec| -> CVec {
        CVec::from_fn(dim, |i, _| {
            if i < n {
                -c[n + i].conj()
            } else {
                c[i - n].conj()
            }
        })
    };
    for _ in 0..n {
        loop {
            let mut c = linalg::random_complex_vector(rng, dim);
            for e in &cols {
                let proj = e.dotc(&c);
                c -= e * proj;
            }
            let norm = c.norm();
            if norm > 1e-8 {
                c /= Complex64::new(norm, 0.0);
                let p = partner(&c);
                cols.push(c);
                cols.push(p);
                break;
            }
        }
    }
    // Reorder: primaries first, partners second, to land in the
    // [[P, Q], [-conj(Q), conj(P)]] block layout.
    let mut m = CMat::zeros(dim, dim);
    for j in 0..n {
        m.set_column(j, &cols[2 * j]);
        m.set_column(n + j, &cols[2 * j + 1]);
    }
    m
}

/// The classical generating invariants of the coadjoint action, per factor.
#[derive(Clone, Debug, PartialEq)]
pub enum InvariantPoly {
    /// `xi -> tr((i X_xi)^power)` on the given factor.
    TracePower { factor: usize, power: u32 },
    /// Pfaffian of the dualized matrix, SO(even) only.
    Pfaffian { factor: usize },
    /// The single coordinate of a circle factor.
    CircleCoord { factor: usize },
}

pub struct InvariantPolySet {
    pub polys: Vec<InvariantPoly>,
}

impl InvariantPoly {
    pub fn degree(&self) -> u32 {
        match *self {
            InvariantPoly::TracePower { power, .. } => power,
            InvariantPoly::Pfaffian { factor: _ } => 0, // fixed up in `invariant_polys`
            InvariantPoly::CircleCoord { .. } => 1,
        }
    }
}

/// Generating families: trace powers j=1..n for U(n), j=2..n for SU(n), even
/// powers (plus Pfaffian in even size) for SO(n), even powers for Sp(n), the
/// coordinate for T.
pub fn invariant_polys(real: &MatrixRealization) -> Result<InvariantPolySet, CoreError> {
    let mut polys = Vec::new();
    for (fi, f) in real.group().factors.iter().enumerate() {
        match *f {
            Factor::Circle => polys.push(InvariantPoly::CircleCoord { factor: fi }),
            Factor::U(n) => {
                for j in 1..=n as u32 {
                    polys.push(InvariantPoly::TracePower { factor: fi, power: j });
                }
            }
            Factor::SU(n) => {
                for j in 2..=n as u32 {
                    polys.push(InvariantPoly::TracePower { factor: fi, power: j });
                }
            }
            Factor::SO(n) => {
                if n % 2 == 0 {
                    let mut j = 2;
                    while j <= n - 2 {
                        polys.push(InvariantPoly::TracePower { factor: fi, power: j as u32 });
                        j += 2;
                    }
                    polys.push(InvariantPoly::Pfaffian { factor: fi });
                } else {
                    let mut j = 2;
                    while j <= n - 1 {
                        polys.push(InvariantPoly::TracePower { factor: fi, power: j as u32 });
                        j += 2;
                    }
                }
            }
            Factor::Sp(n) => {
                for j in 1..=n as u32 {
                    polys.push(InvariantPoly::TracePower { factor: fi, power: 2 * j });
                }
            }
        }
    }
    Ok(InvariantPolySet { polys })
}

impl InvariantPolySet {
    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Polynomial degree of each generator as a function on the dual.
    pub fn degrees(&self, real: &MatrixRealization) -> Vec<u32> {
        self.polys
            .iter()
            .map(|p| match *p {
                InvariantPoly::TracePower { power, .. } => power,
                InvariantPoly::Pfaffian { factor } => {
                    (real.group().factors[factor].block_dim() / 2) as u32
                }
                InvariantPoly::CircleCoord { .. } => 1,
            })
            .collect()
    }

    pub fn eval(&self, real: &MatrixRealization, xi: &DualElement) -> RVec {
        RVec::from_fn(self.polys.len(), |i, _| eval_invariant(&self.polys[i], real, xi))
    }

    /// Gradient of each generator with respect to the dual coordinates;
    /// rows = generators, columns = coordinates.
    pub fn gradients(&self, real: &MatrixRealization, xi: &DualElement) -> RMat {
        let dk = real.dim_k();
        let mut m = RMat::zeros(self.polys.len(), dk);
        for (r, p) in self.polys.iter().enumerate() {
            let g = grad_invariant(p, real, xi);
            for c in 0..dk {
                m[(r, c)] = g[c];
            }
        }
        m
    }
}

fn eval_invariant(p: &InvariantPoly, real: &MatrixRealization, xi: &DualElement) -> f64 {
    match *p {
        InvariantPoly::CircleCoord { factor } => {
            xi.coords[real.factor_offsets()[factor].start]
        }
        InvariantPoly::TracePower { factor, power } => {
            let x = real.dualize_factor(factor, xi);
            let ix = x.map(|c| c * Complex64::new(0.0, 1.0));
            let mut acc = CMat::identity(ix.nrows(), ix.ncols());
            for _ in 0..power {
                acc = acc * &ix;
            }
            acc.trace().re
        }
        InvariantPoly::Pfaffian { factor } => {
            let x = real.dualize_factor(factor, xi);
            pfaffian_real(&x)
        }
    }
}

fn pfaffian_real(x: &CMat) -> f64 {
    let n = x.nrows();
    let e = |i: usize, j: usize| x[(i, j)].re;
    match n {
        2 => e(0, 1),
        4 => e(0, 1) * e(2, 3) - e(0, 2) * e(1, 3) + e(0, 3) * e(1, 2),
        _ => panic!("pfaffian supported for sizes 2 and 4 only"),
    }
}

fn grad_invariant(p: &InvariantPoly, real: &MatrixRealization, xi: &DualElement) -> RVec {
    let dk = real.dim_k();
    let mut g = RVec::zeros(dk);
    match *p {
        InvariantPoly::CircleCoord { factor } => {
            g[real.factor_offsets()[factor].start] = 1.0;
        }
        InvariantPoly::TracePower { factor, power } => {
            let fd = &real.factor_data()[factor];
            let range = &real.factor_offsets()[factor];
            let x = real.dualize_factor(factor, xi);
            let ix = x.map(|c| c * Complex64::new(0.0, 1.0));
            let mut acc = CMat::identity(ix.nrows(), ix.ncols());
            for _ in 0..power.saturating_sub(1) {
                acc = acc * &ix;
            }
            // d tr((iX)^m) = m tr((iX)^{m-1} i B_l) dc_l, then back through G^{-1}.
            let dim = fd.basis.len();
            let dc = RVec::from_fn(dim, |l, _| {
                let ib = fd.basis_f64[l].map(|c| c * Complex64::new(0.0, 1.0));
                power as f64 * (&acc * ib).trace().re
            });
            let dxi = fd.gram_inv_f64.transpose() * dc;
            for l in 0..dim {
                g[range.start + l] = dxi[l];
            }
        }
        InvariantPoly::Pfaffian { factor } => {
            let fd = &real.factor_data()[factor];
            let range = &real.factor_offsets()[factor];
            let x = real.dualize_factor(factor, xi);
            let n = x.nrows();
            assert_eq!(n, 4, "pfaffian gradient hardcoded for SO(4)");
            let e = |i: usize, j: usize| x[(i, j)].re;
            // pf = x01 x23 - x02 x13 + x03 x12
            let mut dpf = vec![vec![0.0; n]; n];
            dpf[0][1] = e(2, 3);
            dpf[2][3] = e(0, 1);
            dpf[0][2] = -e(1, 3);
            dpf[1][3] = -e(0, 2);
            dpf[0][3] = e(1, 2);
            dpf[1][2] = e(0, 3);
            let dim = fd.basis.len();
            let dc = RVec::from_fn(dim, |l, _| {
                let b = &fd.basis_f64[l];
                let mut acc = 0.0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        acc += dpf[i][j] * b[(i, j)].re;
                    }
                }
                acc
            });
            let dxi = fd.gram_inv_f64.transpose() * dc;
            for l in 0..dim {
                g[range.start + l] = dxi[l];
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::seeded;

    fn real_u2() -> MatrixRealization {
        MatrixRealization::build(GroupSpec::new(vec![Factor::U(2)]).unwrap(), RepTag::Standard)
            .unwrap()
    }

    #[test]
    fn u1_standard_is_multiplication_by_i() {
        let r = MatrixRealization::build(
            GroupSpec::new(vec![Factor::U(1)]).unwrap(),
            RepTag::Standard,
        )
        .unwrap();
        assert_eq!(r.dim_k(), 1);
        assert_eq!(r.dim_v(), 1);
        let b = &r.basis_v()[0];
        assert!((b[(0, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn u2_standard_dimensions_and_independence() {
        let r = real_u2();
        assert_eq!(r.dim_k(), 4);
        assert_eq!(r.dim_v(), 2);
        // Realified basis stacking has rank 4.
        let m = RMat::from_fn(8, 4, |row, col| {
            let idx = row % 4;
            let e = r.basis_v()[col][(idx / 2, idx % 2)];
            if row < 4 {
                e.re
            } else {
                e.im
            }
        });
        assert_eq!(linalg::numerical_rank(&m, linalg::RANK_REL_TOL), 4);
    }

    #[test]
    fn t_so3_basis_shape() {
        let g = GroupSpec::new(vec![Factor::Circle, Factor::SO(3)]).unwrap();
        let r = MatrixRealization::build(g, RepTag::Standard).unwrap();
        assert_eq!(r.dim_k(), 4);
        assert_eq!(r.dim_v(), 3);
        // The SO(3) images are real antisymmetric.
        for i in 1..4 {
            let b = &r.basis_v()[i];
            for p in 0..3 {
                for q in 0..3 {
                    assert!(b[(p, q)].im.abs() < 1e-15);
                    assert!((b[(p, q)].re + b[(q, p)].re).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn factor_dims_match_formulas() {
        for f in [Factor::U(3), Factor::SU(3), Factor::SO(4), Factor::SO(5), Factor::Sp(2)] {
            let (basis, _) = factor_basis(f);
            assert_eq!(basis.len(), f.dim(), "{f}");
            // All skew-Hermitian.
            for b in &basis {
                let bf = b.to_f64();
                assert!(linalg::skew_hermitian_residual(&bf) < 1e-15, "{f}");
            }
        }
    }

    #[test]
    fn haar_samples_are_unitary_and_reproducible() {
        for f in [Factor::U(3), Factor::SU(2), Factor::SO(3), Factor::Sp(2), Factor::Circle] {
            let g = GroupSpec::new(vec![f]).unwrap();
            let r = MatrixRealization::build(g, RepTag::Standard).unwrap();
            let k1 = r.haar_sample(42);
            let k2 = r.haar_sample(42);
            for (b1, b2) in k1.blocks.iter().zip(&k2.blocks) {
                assert_eq!(b1, b2, "identical seed must give bit-identical blocks");
            }
            let img = r.image_on_v(&k1);
            let res = linalg::frobenius_norm(&(img.adjoint() * &img - CMat::identity(r.dim_v(), r.dim_v())));
            assert!(res <= 1e-12, "{f}: unitarity residual {res:.3e}");
        }
    }

    #[test]
    fn haar_u1_is_unimodular_scalar() {
        let r = MatrixRealization::build(
            GroupSpec::new(vec![Factor::U(1)]).unwrap(),
            RepTag::Standard,
        )
        .unwrap();
        for seed in 0..20 {
            let k = r.haar_sample(seed);
            assert!((k.blocks[0][(0, 0)].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_u2_translation_invariance_monte_carlo() {
        let r = real_u2();
        let trials = 10_000u64;
        let mut acc = CMat::zeros(2, 2);
        for s in 0..trials {
            acc += r.haar_sample(s).blocks[0].clone();
        }
        acc /= Complex64::new(trials as f64, 0.0);
        let bound = 3.0 / (trials as f64).sqrt();
        for e in acc.iter() {
            assert!(e.norm() < bound, "entry mean {e} exceeds {bound}");
        }
    }

    #[test]
    fn haar_sp_respects_quaternionic_structure() {
        let g = GroupSpec::new(vec![Factor::Sp(2)]).unwrap();
        let r = MatrixRealization::build(g, RepTag::Standard).unwrap();
        let k = r.haar_sample(7);
        let m = &k.blocks[0];
        let n = 2;
        // J conj(g) J^{-1} = g with J = [[0, I], [-I, 0]].
        let mut j = CMat::zeros(2 * n, 2 * n);
        for t in 0..n {
            j[(t, n + t)] = Complex64::new(1.0, 0.0);
            j[(n + t, t)] = Complex64::new(-1.0, 0.0);
        }
        let lhs = &j * m.map(|c| c.conj()) * j.adjoint();
        assert!(linalg::frobenius_norm(&(lhs - m)) < 1e-12);
    }

    #[test]
    fn ad_star_identity_and_abelian() {
        let r = real_u2();
        let mut rng = seeded(3, 9);
        let xi = DualElement::from_coords(RVec::from_fn(4, |_, _| linalg::standard_normal(&mut rng)));
        let id = r.group_identity();
        let out = r.ad_star(&id, &xi).unwrap();
        assert!((out.coords - xi.coords.clone()).norm() < 1e-12);

        let ru1 = MatrixRealization::build(
            GroupSpec::new(vec![Factor::U(1)]).unwrap(),
            RepTag::Standard,
        )
        .unwrap();
        let xi1 = DualElement::from_coords(RVec::from_element(1, 1.7));
        for seed in 0..10 {
            let k = ru1.haar_sample(seed);
            let out = ru1.ad_star(&k, &xi1).unwrap();
            assert!((out.coords[0] - 1.7).abs() < 1e-12);
        }
    }

    #[test]
    fn ad_star_is_an_action() {
        let r = real_u2();
        let mut rng = seeded(5, 11);
        for trial in 0..20 {
            let xi =
                DualElement::from_coords(RVec::from_fn(4, |_, _| linalg::standard_normal(&mut rng)));
            let k1 = r.haar_sample(100 + trial);
            let k2 = r.haar_sample(200 + trial);
            let a = r.ad_star(&k2, &r.ad_star(&k1, &xi).unwrap()).unwrap();
            let b = r.ad_star(&k2.multiply(&k1), &xi).unwrap();
            assert!((a.coords - b.coords).norm() < 1e-10);
        }
    }

    #[test]
    fn invariants_are_ad_star_invariant() {
        for (g, rep) in [
            (GroupSpec::new(vec![Factor::U(2)]).unwrap(), RepTag::Standard),
            (GroupSpec::new(vec![Factor::SO(3)]).unwrap(), RepTag::Standard),
            (GroupSpec::new(vec![Factor::Circle, Factor::SO(3)]).unwrap(), RepTag::Standard),
            (GroupSpec::new(vec![Factor::Sp(2)]).unwrap(), RepTag::Standard),
            (GroupSpec::new(vec![Factor::SO(4)]).unwrap(), RepTag::Standard),
        ] {
            let r = MatrixRealization::build(g, rep).unwrap();
            let inv = invariant_polys(&r).unwrap();
            let mut rng = seeded(17, 23);
            for trial in 0..100 {
                let xi = DualElement::from_coords(RVec::from_fn(r.dim_k(), |_, _| {
                    linalg::standard_normal(&mut rng)
                }));
                let k = r.haar_sample(5000 + trial);
                let moved = r.ad_star(&k, &xi).unwrap();
                let v1 = inv.eval(&r, &xi);
                let v2 = inv.eval(&r, &moved);
                let rel = (v1.clone() - v2).norm() / (1.0 + v1.norm());
                assert!(rel < 1e-10, "{} residual {rel:.3e}", r.group());
            }
        }
    }

    #[test]
    fn u2_invariants_at_explicit_dual_point() {
        // xi dual to i*diag(1,2): coords are (1, 2, 0, 0) in the chosen basis.
        let r = real_u2();
        let xi = DualElement::from_coords(RVec::from_vec(vec![1.0, 2.0, 0.0, 0.0]));
        let x = r.dualize_factor(0, &xi);
        let expect = CMat::from_diagonal(&CVec::from_vec(vec![
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 2.0),
        ]));
        assert!(linalg::frobenius_norm(&(x.clone() - expect)) < 1e-12);
        let inv = invariant_polys(&r).unwrap();
        let vals = inv.eval(&r, &xi);
        // tr(iX) = -(1+2), tr((iX)^2) = +(1+4) under this convention.
        assert!((vals[0] + 3.0).abs() < 1e-12);
        assert!((vals[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn dualization_round_trip() {
        for g in [
            GroupSpec::new(vec![Factor::U(2)]).unwrap(),
            GroupSpec::new(vec![Factor::Sp(1)]).unwrap(),
            GroupSpec::new(vec![Factor::SO(4)]).unwrap(),
        ] {
            let r = MatrixRealization::build(g, RepTag::Standard).unwrap();
            let mut rng = seeded(1, 2);
            let xi = DualElement::from_coords(RVec::from_fn(r.dim_k(), |_, _| {
                linalg::standard_normal(&mut rng)
            }));
            let x = r.dualize_factor(0, &xi);
            // Pair back: B(X, A_j) must reproduce coords.
            let fd = &r.factor_data()[0];
            for (j, b) in fd.basis_f64.iter().enumerate() {
                let v = -(&x * b).trace().re;
                assert!((v - xi.coords[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invariant_gradients_match_finite_differences() {
        let g = GroupSpec::new(vec![Factor::U(2), Factor::SO(4)]).unwrap();
        let r = MatrixRealization::build(g, RepTag::Tensor).unwrap();
        let inv = invariant_polys(&r).unwrap();
        let mut rng = seeded(8, 15);
        let xi =
            DualElement::from_coords(RVec::from_fn(r.dim_k(), |_, _| linalg::standard_normal(&mut rng)));
        let grads = inv.gradients(&r, &xi);
        let h = 1e-6;
        for c in 0..r.dim_k() {
            let mut plus = xi.clone();
            plus.coords[c] += h;
            let mut minus = xi.clone();
            minus.coords[c] -= h;
            let fd = (inv.eval(&r, &plus) - inv.eval(&r, &minus)) / (2.0 * h);
            for rr in 0..inv.len() {
                assert!(
                    (grads[(rr, c)] - fd[rr]).abs() < 1e-6 * (1.0 + fd[rr].abs()),
                    "generator {rr} coord {c}: {} vs {}",
                    grads[(rr, c)],
                    fd[rr]
                );
            }
        }
    }

    #[test]
    fn unsupported_rep_and_sizes_error() {
        let g = GroupSpec::new(vec![Factor::U(2), Factor::U(2)]).unwrap();
        assert!(MatrixRealization::build(g, RepTag::Standard).is_err());
        assert!(GroupSpec::new(vec![Factor::U(9)]).is_err());
        assert!(GroupSpec::new(vec![Factor::Sp(3)]).is_err());
    }

    #[test]
    fn group_spec_parsing() {
        let g = GroupSpec::parse("T x SO(3)").unwrap();
        assert_eq!(g.factors, vec![Factor::Circle, Factor::SO(3)]);
        let g = GroupSpec::parse("U(2) x Sp(2)").unwrap();
        assert_eq!(g.factors, vec![Factor::U(2), Factor::Sp(2)]);
        assert!(GroupSpec::parse("Spin(7)").is_err());
        assert!(GroupSpec::parse("G2").is_err());
    }

    #[test]
    fn diagonal_torus_weights_for_u2_sym2() {
        let r = MatrixRealization::build(GroupSpec::new(vec![Factor::U(2)]).unwrap(), RepTag::Sym2)
            .unwrap();
        let ws = r.diagonal_torus_weights();
        assert_eq!(ws.len(), 2);
        // Basis order (0,0),(0,1),(1,1): weights under i*E_00 are (2,1,0).
        assert_eq!(ws[0].1, vec![2, 1, 0]);
        assert_eq!(ws[1].1, vec![0, 1, 2]);
    }
}
