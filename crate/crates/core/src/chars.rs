//! Exact decomposition of C[V] into irreducibles via formal torus characters.
//!
//! Characters are integer Laurent polynomials over the product weight
//! lattice. Irreducible characters come from the Weyl character formula with
//! exact polynomial division; decomposition is greedy peeling at the
//! lexicographically greatest exponent. Everything in this module is exact
//! integer arithmetic once the torus weights of V are extracted.

use crate::error::CoreError;
use crate::lie::{Factor, GroupSpec, MatrixRealization};
use crate::linalg::{self, CMat};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Integer Laurent polynomial in `rank` torus variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentPoly {
    rank: usize,
    terms: BTreeMap<Vec<i64>, i64>,
}

impl LaurentPoly {
    pub fn zero(rank: usize) -> Self {
        LaurentPoly { rank, terms: BTreeMap::new() }
    }

    pub fn one(rank: usize) -> Self {
        Self::monomial(vec![0; rank], 1)
    }

    pub fn monomial(exp: Vec<i64>, coeff: i64) -> Self {
        let rank = exp.len();
        let mut terms = BTreeMap::new();
        if coeff != 0 {
            terms.insert(exp, coeff);
        }
        LaurentPoly { rank, terms }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &i64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: &[i64]) -> i64 {
        self.terms.get(exp).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, exp: Vec<i64>, coeff: i64) {
        if coeff == 0 {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if *o.get() == 0 {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -*c);
        }
        out
    }

    pub fn scale(&self, c: i64) -> Self {
        if c == 0 {
            return Self::zero(self.rank);
        }
        LaurentPoly {
            rank: self.rank,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank);
        let mut out = Self::zero(self.rank);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let exp: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(exp, c1 * c2);
            }
        }
        out
    }

    /// Multiply by the monomial x^exp.
    pub fn shift(&self, exp: &[i64]) -> Self {
        LaurentPoly {
            rank: self.rank,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().zip(exp).map(|(a, b)| a + b).collect(), *c))
                .collect(),
        }
    }

    /// Value at the identity of the torus (all variables 1): the dimension
    /// of the underlying representation when `self` is a character.
    pub fn eval_at_one(&self) -> i128 {
        self.terms.values().map(|&c| c as i128).sum()
    }

    /// Tensor with a poly in disjoint variables: exponents concatenate.
    pub fn tensor(&self, other: &Self) -> Self {
        let rank = self.rank + other.rank;
        let mut out = Self::zero(rank);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let mut exp = e1.clone();
                exp.extend_from_slice(e2);
                out.add_term(exp, c1 * c2);
            }
        }
        out
    }

    /// Leading term under a total order; `None` for zero.
    pub fn leading(&self, order: &WeightOrder) -> Option<(Vec<i64>, i64)> {
        let mut best: Option<(&Vec<i64>, i64)> = None;
        for (e, &c) in &self.terms {
            match best {
                None => best = Some((e, c)),
                Some((be, _)) => {
                    if order.cmp(e, be) == Ordering::Greater {
                        best = Some((e, c));
                    }
                }
            }
        }
        best.map(|(e, c)| (e.clone(), c))
    }

    /// Exact division: returns the quotient when `self = q * div`, else an
    /// error. Peels leading terms under the given order.
    pub fn exact_div(&self, div: &Self, order: &WeightOrder) -> Result<Self, CoreError> {
        assert_eq!(self.rank, div.rank);
        let (dlead_exp, dlead_coeff) =
            div.leading(order).ok_or(CoreError::DivisionRemainder)?;
        let mut rem = self.clone();
        let mut quot = Self::zero(self.rank);
        let mut guard = 0usize;
        while let Some((rlead_exp, rlead_coeff)) = rem.leading(order) {
            guard += 1;
            if guard > 2_000_000 {
                return Err(CoreError::DivisionRemainder);
            }
            if rlead_coeff % dlead_coeff != 0 {
                return Err(CoreError::DivisionRemainder);
            }
            let c = rlead_coeff / dlead_coeff;
            let exp: Vec<i64> = rlead_exp.iter().zip(&dlead_exp).map(|(a, b)| a - b).collect();
            quot.add_term(exp.clone(), c);
            rem = rem.sub(&div.shift(&exp).scale(c));
        }
        Ok(quot)
    }

    /// Apply a coordinate transformation to every exponent vector,
    /// accumulating coefficients of colliding images.
    pub fn map_exponents<F: Fn(&[i64]) -> Vec<i64>>(&self, new_rank: usize, f: F) -> Self {
        let mut out = Self::zero(new_rank);
        for (e, c) in &self.terms {
            out.add_term(f(e), *c);
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}*x^{e:?}")?;
        }
        Ok(())
    }
}

/// Root-system kind of one factor's weight block.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum BlockKind {
    /// U(n): rank n, symmetric group.
    TypeA(usize),
    /// SU(n): rank n-1, coordinates are consecutive differences.
    TypeAReduced(usize),
    /// SO(2m+1).
    TypeB(usize),
    /// Sp(n).
    TypeC(usize),
    /// SO(2m), m >= 2.
    TypeD(usize),
    /// T or SO(2): free rank-1 lattice.
    Free,
}

impl BlockKind {
    fn rank(&self) -> usize {
        match *self {
            BlockKind::TypeA(n) => n,
            BlockKind::TypeAReduced(n) => n - 1,
            BlockKind::TypeB(m) | BlockKind::TypeC(m) | BlockKind::TypeD(m) => m,
            BlockKind::Free => 1,
        }
    }

    fn of(factor: Factor) -> BlockKind {
        match factor {
            Factor::U(n) => BlockKind::TypeA(n),
            Factor::SU(n) => BlockKind::TypeAReduced(n),
            Factor::SO(2) => BlockKind::Free,
            Factor::SO(n) if n % 2 == 1 => BlockKind::TypeB(n / 2),
            Factor::SO(n) => BlockKind::TypeD(n / 2),
            Factor::Sp(n) => BlockKind::TypeC(n),
            Factor::Circle => BlockKind::Free,
        }
    }
}

/// Layout of the concatenated weight lattice of a product group: the total
/// order, dominance tests, and Weyl generators used by the character engine.
#[derive(Debug)]
pub struct WeightOrder {
    blocks: Vec<(BlockKind, std::ops::Range<usize>)>,
}

impl WeightOrder {
    pub fn for_group(group: &GroupSpec) -> Self {
        let mut blocks = Vec::new();
        let mut off = 0;
        for &f in &group.factors {
            let kind = BlockKind::of(f);
            let r = kind.rank();
            blocks.push((kind, off..off + r));
            off += r;
        }
        WeightOrder { blocks }
    }

    pub fn rank(&self) -> usize {
        self.blocks.last().map(|(_, r)| r.end).unwrap_or(0)
    }

    /// Total order: per-factor lexicographic, with SU blocks compared
    /// through their canonical partition lift.
    pub fn cmp(&self, a: &[i64], b: &[i64]) -> Ordering {
        for (kind, range) in &self.blocks {
            let ab = &a[range.clone()];
            let bb = &b[range.clone()];
            let ord = match kind {
                BlockKind::TypeAReduced(n) => lift_su(ab, *n).cmp(&lift_su(bb, *n)),
                _ => ab.cmp(bb),
            };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    }

    pub fn is_dominant(&self, w: &[i64]) -> bool {
        for (kind, range) in &self.blocks {
            let b = &w[range.clone()];
            let ok = match kind {
                BlockKind::TypeA(_) => b.windows(2).all(|p| p[0] >= p[1]),
                BlockKind::TypeAReduced(_) => b.iter().all(|&x| x >= 0),
                BlockKind::TypeB(_) | BlockKind::TypeC(_) => {
                    b.windows(2).all(|p| p[0] >= p[1]) && b.last().map_or(true, |&x| x >= 0)
                }
                BlockKind::TypeD(m) => {
                    let m = *m;
                    b[..m - 1].windows(2).all(|p| p[0] >= p[1])
                        && (m < 2 || b[m - 2] >= b[m - 1].abs())
                }
                BlockKind::Free => true,
            };
            if !ok {
                return false;
            }
        }
        true
    }

    /// Generators of the product Weyl group acting on exponent vectors.
    pub fn weyl_generators(&self) -> Vec<Box<dyn Fn(&[i64]) -> Vec<i64> + '_>> {
        let mut gens: Vec<Box<dyn Fn(&[i64]) -> Vec<i64> + '_>> = Vec::new();
        for (kind, range) in &self.blocks {
            let start = range.start;
            let r = range.len();
            match kind {
                BlockKind::Free => {}
                BlockKind::TypeA(_) => {
                    for i in 0..r.saturating_sub(1) {
                        gens.push(Box::new(move |w: &[i64]| {
                            let mut v = w.to_vec();
                            v.swap(start + i, start + i + 1);
                            v
                        }));
                    }
                }
                BlockKind::TypeAReduced(n) => {
                    let n = *n;
                    for i in 0..n - 1 {
                        gens.push(Box::new(move |w: &[i64]| {
                            let mut lifted = lift_su(&w[start..start + n - 1], n);
                            lifted.swap(i, i + 1);
                            let mut v = w.to_vec();
                            for (j, d) in reduce_su(&lifted).into_iter().enumerate() {
                                v[start + j] = d;
                            }
                            v
                        }));
                    }
                }
                BlockKind::TypeB(_) | BlockKind::TypeC(_) => {
                    for i in 0..r.saturating_sub(1) {
                        gens.push(Box::new(move |w: &[i64]| {
                            let mut v = w.to_vec();
                            v.swap(start + i, start + i + 1);
                            v
                        }));
                    }
                    gens.push(Box::new(move |w: &[i64]| {
                        let mut v = w.to_vec();
                        v[start + r - 1] = -v[start + r - 1];
                        v
                    }));
                }
                BlockKind::TypeD(_) => {
                    for i in 0..r.saturating_sub(1) {
                        gens.push(Box::new(move |w: &[i64]| {
                            let mut v = w.to_vec();
                            v.swap(start + i, start + i + 1);
                            v
                        }));
                    }
                    if r >= 2 {
                        gens.push(Box::new(move |w: &[i64]| {
                            let mut v = w.to_vec();
                            let (a, b) = (v[start + r - 2], v[start + r - 1]);
                            v[start + r - 2] = -b;
                            v[start + r - 1] = -a;
                            v
                        }));
                    }
                }
            }
        }
        gens
    }

    /// Check invariance of a polynomial under every Weyl generator.
    pub fn check_weyl_symmetric(&self, p: &LaurentPoly) -> Result<(), CoreError> {
        for g in self.weyl_generators() {
            for (e, &c) in p.terms() {
                let img = g(e);
                if p.coeff(&img) != c {
                    return Err(CoreError::NotWeylSymmetric(e.clone()));
                }
            }
        }
        Ok(())
    }

    fn block_slices<'a>(&self, w: &'a [i64]) -> Vec<(BlockKind, &'a [i64])> {
        self.blocks.iter().map(|(k, r)| (*k, &w[r.clone()])).collect()
    }
}

/// Canonical lift of SU(n) difference-coordinates to a partition-like vector
/// with last entry zero.
fn lift_su(nu: &[i64], n: usize) -> Vec<i64> {
    let mut lam = vec![0i64; n];
    for k in (0..n - 1).rev() {
        lam[k] = lam[k + 1] + nu[k];
    }
    lam
}

fn reduce_su(lam: &[i64]) -> Vec<i64> {
    lam.windows(2).map(|p| p[0] - p[1]).collect()
}

/// Dominant-weight label of an irreducible of the product group.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct IrrepLabel {
    pub weight: Vec<i64>,
}

impl IrrepLabel {
    pub fn new(order: &WeightOrder, weight: Vec<i64>) -> Result<Self, CoreError> {
        if !order.is_dominant(&weight) {
            return Err(CoreError::NonDominantLabel(weight));
        }
        Ok(IrrepLabel { weight })
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.weight)
    }
}

/// Simultaneous integer eigenvalues of the torus sub-basis on V, one weight
/// vector per dimension of V.
pub fn rep_weights(real: &MatrixRealization) -> Result<Vec<Vec<i64>>, CoreError> {
    let torus: Vec<&CMat> =
        real.torus_indices().into_iter().map(|i| &real.basis_v()[i]).collect();
    let dv = real.dim_v();
    if torus.is_empty() {
        return Ok(vec![vec![]; dv]);
    }
    for (a, ta) in torus.iter().enumerate() {
        for tb in torus.iter().skip(a + 1) {
            let comm = *ta * *tb - *tb * *ta;
            let res = linalg::frobenius_norm(&comm);
            if res > 1e-10 {
                return Err(CoreError::TorusNotCommuting(res));
            }
        }
    }
    // Iteratively refine joint eigenspaces, one torus matrix at a time.
    let mut spaces: Vec<CMat> = vec![CMat::identity(dv, dv)];
    for t in &torus {
        let mut next = Vec::new();
        for b in &spaces {
            let k = b.ncols();
            // Hermitian form of the restricted action; eigenvalue = weight.
            let w = b.adjoint() * (*t * b);
            let h = w.map(|c| c * Complex64::new(0.0, -1.0));
            let h = (h.clone() + h.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = h.symmetric_eigen();
            let mut clusters: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
            for i in 0..k {
                let ev = eig.eigenvalues[i];
                let r = ev.round();
                if (ev - r).abs() > 1e-6 {
                    return Err(CoreError::Invalid(format!(
                        "non-integral torus weight {ev} (construction bug)"
                    )));
                }
                clusters.entry(r as i64).or_default().push(i);
            }
            for (_, idxs) in clusters {
                let mut cols = CMat::zeros(dv, idxs.len());
                for (j, &i) in idxs.iter().enumerate() {
                    cols.set_column(j, &(b * eig.eigenvectors.column(i)));
                }
                next.push(cols);
            }
        }
        spaces = next;
    }
    let mut weights = Vec::with_capacity(dv);
    for b in &spaces {
        let col0 = b.column(0).clone_owned();
        let mut w = Vec::with_capacity(torus.len());
        for t in &torus {
            let val = (col0.adjoint() * (*t * &col0))[(0, 0)];
            let lam = val.im / col0.norm_squared();
            let r = lam.round();
            if (lam - r).abs() > 1e-8 {
                return Err(CoreError::Invalid(format!("weight drift {lam}")));
            }
            w.push(r as i64);
        }
        for _ in 0..b.ncols() {
            weights.push(w.clone());
        }
    }
    Ok(weights)
}

/// Exact character of Sym^d(V*): complete homogeneous generating-function
/// recursion over the negated weights of V (the action on polynomials is
/// p(k^{-1} z), hence the dualization).
pub fn sym_power_character(real: &MatrixRealization, d: u32) -> Result<LaurentPoly, CoreError> {
    let weights = rep_weights(real)?;
    let rank = weights.first().map(Vec::len).unwrap_or(0);
    let d = d as usize;
    let mut ch: Vec<LaurentPoly> = (0..=d)
        .map(|k| if k == 0 { LaurentPoly::one(rank) } else { LaurentPoly::zero(rank) })
        .collect();
    for w in &weights {
        let neg: Vec<i64> = w.iter().map(|x| -x).collect();
        for deg in 1..=d {
            let contrib = ch[deg - 1].shift(&neg);
            ch[deg] = ch[deg].add(&contrib);
        }
    }
    Ok(ch.pop().expect("degree present"))
}

fn permutations_with_sign(m: usize) -> Vec<(Vec<usize>, i64)> {
    fn heap(k: usize, cur: &mut Vec<usize>, sign: &mut i64, out: &mut Vec<(Vec<usize>, i64)>) {
        if k <= 1 {
            out.push((cur.clone(), *sign));
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, sign, out);
            if i < k - 1 {
                if k % 2 == 0 {
                    cur.swap(i, k - 1);
                } else {
                    cur.swap(0, k - 1);
                }
                *sign = -*sign;
            }
        }
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    let mut sign = 1i64;
    heap(m, &mut cur, &mut sign, &mut out);
    out
}

/// Signed permutations, optionally restricted to an even number of sign
/// flips (type D).
fn signed_permutations(m: usize, even_only: bool) -> Vec<(Vec<usize>, Vec<i64>, i64)> {
    let mut out = Vec::new();
    for (perm, psign) in permutations_with_sign(m) {
        for mask in 0..(1usize << m) {
            let flips = mask.count_ones() as usize;
            if even_only && flips % 2 == 1 {
                continue;
            }
            let signs: Vec<i64> =
                (0..m).map(|i| if mask & (1 << i) != 0 { -1 } else { 1 }).collect();
            let det = psign * if flips % 2 == 0 { 1 } else { -1 };
            out.push((perm.clone(), signs, det));
        }
    }
    out
}

/// Weyl alternant in a doubled exponent lattice: exponent vectors are
/// 2*(lambda+rho) permuted and signed, so half-integral rho stays exact.
fn alternant(eles: &[(Vec<usize>, Vec<i64>, i64)], doubled: &[i64], rank: usize) -> LaurentPoly {
    let mut p = LaurentPoly::zero(rank);
    for (perm, signs, det) in eles {
        let mut exp = vec![0i64; rank];
        for i in 0..rank {
            exp[i] = signs[i] * doubled[perm[i]];
        }
        p.add_term(exp, *det);
    }
    p
}

fn plain_lex_order(rank: usize) -> WeightOrder {
    WeightOrder { blocks: vec![(BlockKind::TypeA(rank), 0..rank)] }
}

fn halve_exponents(p: &LaurentPoly) -> Result<LaurentPoly, CoreError> {
    let mut out = LaurentPoly::zero(p.rank());
    for (e, &c) in p.terms() {
        if e.iter().any(|x| x % 2 != 0) {
            return Err(CoreError::DivisionRemainder);
        }
        out.add_term(e.iter().map(|x| x / 2).collect(), c);
    }
    Ok(out)
}

fn factor_weyl_character(kind: BlockKind, label: &[i64]) -> Result<LaurentPoly, CoreError> {
    match kind {
        BlockKind::Free => Ok(LaurentPoly::monomial(vec![label[0]], 1)),
        BlockKind::TypeA(n) => {
            let rho: Vec<i64> = (0..n).map(|i| (n - 1 - i) as i64).collect();
            let doubled_num: Vec<i64> = label.iter().zip(&rho).map(|(l, r)| 2 * (l + r)).collect();
            let doubled_den: Vec<i64> = rho.iter().map(|r| 2 * r).collect();
            let elems: Vec<(Vec<usize>, Vec<i64>, i64)> = permutations_with_sign(n)
                .into_iter()
                .map(|(p, s)| (p, vec![1; n], s))
                .collect();
            let num = alternant(&elems, &doubled_num, n);
            let den = alternant(&elems, &doubled_den, n);
            let order = plain_lex_order(n);
            halve_exponents(&num.exact_div(&den, &order)?)
        }
        BlockKind::TypeAReduced(n) => {
            let lifted = lift_su(label, n);
            let ch = factor_weyl_character(BlockKind::TypeA(n), &lifted)?;
            Ok(ch.map_exponents(n - 1, |e| reduce_su(e)))
        }
        BlockKind::TypeB(m) => {
            // rho = (m - 1/2, ..., 1/2): odd integers once doubled.
            let doubled_rho: Vec<i64> = (0..m).map(|i| (2 * (m - i) - 1) as i64).collect();
            let doubled_num: Vec<i64> =
                label.iter().zip(&doubled_rho).map(|(l, r)| 2 * l + r).collect();
            let elems = signed_permutations(m, false);
            let num = alternant(&elems, &doubled_num, m);
            let den = alternant(&elems, &doubled_rho, m);
            let order = plain_lex_order(m);
            halve_exponents(&num.exact_div(&den, &order)?)
        }
        BlockKind::TypeC(n) => {
            let rho: Vec<i64> = (0..n).map(|i| (n - i) as i64).collect();
            let doubled_num: Vec<i64> = label.iter().zip(&rho).map(|(l, r)| 2 * (l + r)).collect();
            let doubled_den: Vec<i64> = rho.iter().map(|r| 2 * r).collect();
            let elems = signed_permutations(n, false);
            let num = alternant(&elems, &doubled_num, n);
            let den = alternant(&elems, &doubled_den, n);
            let order = plain_lex_order(n);
            halve_exponents(&num.exact_div(&den, &order)?)
        }
        BlockKind::TypeD(m) => {
            let rho: Vec<i64> = (0..m).map(|i| (m - 1 - i) as i64).collect();
            let doubled_num: Vec<i64> = label.iter().zip(&rho).map(|(l, r)| 2 * (l + r)).collect();
            let doubled_den: Vec<i64> = rho.iter().map(|r| 2 * r).collect();
            let elems = signed_permutations(m, true);
            let num = alternant(&elems, &doubled_num, m);
            let den = alternant(&elems, &doubled_den, m);
            let order = plain_lex_order(m);
            halve_exponents(&num.exact_div(&den, &order)?)
        }
    }
}

/// Exact irreducible character of the product group.
pub fn weyl_character(group: &GroupSpec, label: &IrrepLabel) -> Result<LaurentPoly, CoreError> {
    let order = WeightOrder::for_group(group);
    if !order.is_dominant(&label.weight) {
        return Err(CoreError::NonDominantLabel(label.weight.clone()));
    }
    let mut result: Option<LaurentPoly> = None;
    for (kind, block) in order.block_slices(&label.weight) {
        let ch = factor_weyl_character(kind, block)?;
        result = Some(match result {
            None => ch,
            Some(acc) => acc.tensor(&ch),
        });
    }
    Ok(result.unwrap_or_else(|| LaurentPoly::one(0)))
}

fn binom_i128(n: u64, k: u64) -> i128 {
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// Weyl dimension formula, exact per factor.
pub fn weyl_dim(group: &GroupSpec, label: &IrrepLabel) -> i128 {
    let order = WeightOrder::for_group(group);
    let mut dim: i128 = 1;
    for (kind, block) in order.block_slices(&label.weight) {
        dim *= factor_weyl_dim(kind, block);
    }
    dim
}

fn factor_weyl_dim(kind: BlockKind, label: &[i64]) -> i128 {
    match kind {
        BlockKind::Free => 1,
        BlockKind::TypeAReduced(n) => factor_weyl_dim(BlockKind::TypeA(n), &lift_su(label, n)),
        BlockKind::TypeA(n) => {
            let l: Vec<i128> = (0..n).map(|i| label[i] as i128 + (n - 1 - i) as i128).collect();
            let mut num: i128 = 1;
            let mut den: i128 = 1;
            for i in 0..n {
                for j in (i + 1)..n {
                    num *= l[i] - l[j];
                    den *= (j - i) as i128;
                }
            }
            num / den
        }
        BlockKind::TypeB(m) => {
            let l: Vec<i128> =
                (0..m).map(|i| 2 * label[i] as i128 + (2 * (m - i) - 1) as i128).collect();
            let r: Vec<i128> = (0..m).map(|i| (2 * (m - i) - 1) as i128).collect();
            pair_product_dim(&l, &r, true)
        }
        BlockKind::TypeC(n) => {
            let l: Vec<i128> = (0..n).map(|i| label[i] as i128 + (n - i) as i128).collect();
            let r: Vec<i128> = (0..n).map(|i| (n - i) as i128).collect();
            pair_product_dim(&l, &r, true)
        }
        BlockKind::TypeD(m) => {
            let l: Vec<i128> = (0..m).map(|i| label[i] as i128 + (m - 1 - i) as i128).collect();
            let r: Vec<i128> = (0..m).map(|i| (m - 1 - i) as i128).collect();
            pair_product_dim(&l, &r, false)
        }
    }
}

fn pair_product_dim(l: &[i128], r: &[i128], with_short: bool) -> i128 {
    let m = l.len();
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for i in 0..m {
        for j in (i + 1)..m {
            num *= (l[i] - l[j]) * (l[i] + l[j]);
            den *= (r[i] - r[j]) * (r[i] + r[j]);
        }
        if with_short {
            num *= l[i];
            den *= r[i];
        }
    }
    num / den
}

/// One degree of the decomposition of C[V].
#[derive(Clone, Debug)]
pub struct DegreeDecomposition {
    pub degree: u32,
    pub parts: Vec<(IrrepLabel, u32)>,
    /// dim Sym^d(V*), verified against both the Weyl dimension formula and
    /// character evaluation before being stored.
    pub total_dim: i128,
}

/// Greedy peeling at the lexicographically greatest exponent.
pub fn decompose(ch: &LaurentPoly, group: &GroupSpec) -> Result<Vec<(IrrepLabel, u32)>, CoreError> {
    let order = WeightOrder::for_group(group);
    order.check_weyl_symmetric(ch)?;
    let mut work = ch.clone();
    let mut parts = Vec::new();
    let mut guard = 0usize;
    while let Some((exp, coeff)) = work.leading(&order) {
        guard += 1;
        if guard > 100_000 {
            return Err(CoreError::Invalid("peeling failed to terminate".into()));
        }
        if coeff < 0 {
            return Err(CoreError::NotACharacter { label: exp.clone() });
        }
        let label = IrrepLabel::new(&order, exp.clone())?;
        let irr = weyl_character(group, &label)?;
        work = work.sub(&irr.scale(coeff));
        parts.push((label, coeff as u32));
    }
    Ok(parts)
}

/// Multiplicity-free verdict over degrees 0..=D with labels aggregated
/// across degrees: the condition is global over C[V], so a label repeating
/// in two degrees is a violation even with per-degree multiplicity one.
#[derive(Clone, Debug, PartialEq)]
pub enum MfVerdict {
    MultiplicityFreeUpTo(u32),
    Violation {
        label: IrrepLabel,
        /// (degree, multiplicity) occurrences of the repeated label.
        occurrences: Vec<(u32, u32)>,
    },
}

impl MfVerdict {
    pub fn is_mf(&self) -> bool {
        matches!(self, MfVerdict::MultiplicityFreeUpTo(_))
    }
}

#[derive(Debug)]
pub struct MfReport {
    pub verdict: MfVerdict,
    pub by_degree: Vec<DegreeDecomposition>,
}

pub fn multiplicity_free_check(
    real: &MatrixRealization,
    max_degree: u32,
) -> Result<MfReport, CoreError> {
    let group = real.group();
    let mut by_degree = Vec::new();
    let mut seen: BTreeMap<IrrepLabel, Vec<(u32, u32)>> = BTreeMap::new();
    for d in 0..=max_degree {
        let ch = sym_power_character(real, d)?;
        let parts = decompose(&ch, group)?;
        // Dimension conservation, two independent routes.
        let total: i128 = parts.iter().map(|(l, m)| *m as i128 * weyl_dim(group, l)).sum();
        let expect = binom_i128((real.dim_v() + d as usize - 1) as u64, d as u64);
        if total != expect {
            return Err(CoreError::Invalid(format!(
                "dimension conservation failed at degree {d}: {total} != {expect}"
            )));
        }
        let by_char: i128 = ch.eval_at_one();
        if by_char != expect {
            return Err(CoreError::Invalid(format!(
                "character evaluation {by_char} disagrees with stars-and-bars {expect} at degree {d}"
            )));
        }
        for (l, m) in &parts {
            seen.entry(l.clone()).or_default().push((d, *m));
        }
        by_degree.push(DegreeDecomposition { degree: d, parts, total_dim: total });
    }
    let mut verdict = MfVerdict::MultiplicityFreeUpTo(max_degree);
    let mut best_degree = u32::MAX;
    for (label, occ) in &seen {
        let repeated = occ.iter().any(|&(_, m)| m >= 2) || occ.len() >= 2;
        if repeated {
            let first_bad = if let Some(&(d, _)) = occ.iter().find(|&&(_, m)| m >= 2) {
                d
            } else {
                occ[1].0
            };
            if first_bad < best_degree {
                best_degree = first_bad;
                verdict =
                    MfVerdict::Violation { label: label.clone(), occurrences: occ.clone() };
            }
        }
    }
    Ok(MfReport { verdict, by_degree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{Factor, GroupSpec, MatrixRealization, RepTag};

    fn real(g: Vec<Factor>, rep: RepTag) -> MatrixRealization {
        MatrixRealization::build(GroupSpec::new(g).unwrap(), rep).unwrap()
    }

    /// Independent Schur-polynomial oracle: enumerate semistandard tableaux
    /// of shape lambda with entries in 1..=n.
    fn schur_oracle(lambda: &[i64], n: usize) -> LaurentPoly {
        #[allow(clippy::too_many_arguments)]
        fn fill(
            shape: &[usize],
            row: usize,
            col: usize,
            above: &[Vec<usize>],
            current: &mut Vec<usize>,
            n: usize,
            out: &mut LaurentPoly,
        ) {
            if row == shape.len() {
                let mut exp = vec![0i64; n];
                for r in above {
                    for &e in r {
                        exp[e - 1] += 1;
                    }
                }
                out.add_term(exp, 1);
                return;
            }
            if col == shape[row] {
                let mut above2 = above.to_vec();
                above2.push(current.clone());
                let mut next = Vec::new();
                fill(shape, row + 1, 0, &above2, &mut next, n, out);
                return;
            }
            let weak_lower = if col == 0 { 1 } else { current[col - 1] };
            let strict_lower = if row == 0 { 1 } else { above[row - 1][col] + 1 };
            for e in weak_lower.max(strict_lower)..=n {
                current.push(e);
                fill(shape, row, col + 1, above, current, n, out);
                current.pop();
            }
        }
        let shape: Vec<usize> =
            lambda.iter().take_while(|&&x| x > 0).map(|&x| x as usize).collect();
        if shape.is_empty() {
            return LaurentPoly::one(n);
        }
        let mut out = LaurentPoly::zero(n);
        let mut current = Vec::new();
        fill(&shape, 0, 0, &[], &mut current, n, &mut out);
        out
    }

    #[test]
    fn rep_weights_standard_and_derived() {
        let r = real(vec![Factor::U(2)], RepTag::Standard);
        let mut w = rep_weights(&r).unwrap();
        w.sort();
        assert_eq!(w, vec![vec![0, 1], vec![1, 0]]);

        let r = real(vec![Factor::U(2)], RepTag::Sym2);
        let mut w = rep_weights(&r).unwrap();
        w.sort();
        assert_eq!(w, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);

        let r = real(vec![Factor::SO(3)], RepTag::Standard);
        let mut w = rep_weights(&r).unwrap();
        w.sort();
        assert_eq!(w, vec![vec![-1], vec![0], vec![1]]);
    }

    #[test]
    fn sym_power_character_basics() {
        let r = real(vec![Factor::U(2)], RepTag::Standard);
        let ch0 = sym_power_character(&r, 0).unwrap();
        assert_eq!(ch0, LaurentPoly::one(2));

        let r1 = real(vec![Factor::U(1)], RepTag::Standard);
        let ch3 = sym_power_character(&r1, 3).unwrap();
        assert_eq!(ch3, LaurentPoly::monomial(vec![-3], 1));

        // dim Sym^2 of a 3-dimensional space = C(3+2-1, 2) = 6.
        let r3 = real(vec![Factor::SO(3)], RepTag::Standard);
        let ch2 = sym_power_character(&r3, 2).unwrap();
        assert_eq!(ch2.eval_at_one(), 6);
    }

    #[test]
    fn weyl_character_u2_matches_schur_oracle() {
        let g = GroupSpec::new(vec![Factor::U(2)]).unwrap();
        let order = WeightOrder::for_group(&g);
        let zero = weyl_character(&g, &IrrepLabel::new(&order, vec![0, 0]).unwrap()).unwrap();
        assert_eq!(zero, LaurentPoly::one(2));

        let std = weyl_character(&g, &IrrepLabel::new(&order, vec![1, 0]).unwrap()).unwrap();
        let mut expect = LaurentPoly::zero(2);
        expect.add_term(vec![1, 0], 1);
        expect.add_term(vec![0, 1], 1);
        assert_eq!(std, expect);

        for lam in [vec![2, 0], vec![2, 1], vec![3, 1]] {
            let ch = weyl_character(&g, &IrrepLabel::new(&order, lam.clone()).unwrap()).unwrap();
            assert_eq!(ch, schur_oracle(&lam, 2), "lambda {lam:?}");
        }
        let ch20 = weyl_character(&g, &IrrepLabel::new(&order, vec![2, 0]).unwrap()).unwrap();
        let mut expect = LaurentPoly::zero(2);
        expect.add_term(vec![2, 0], 1);
        expect.add_term(vec![1, 1], 1);
        expect.add_term(vec![0, 2], 1);
        assert_eq!(ch20, expect);
    }

    #[test]
    fn weyl_character_u3_matches_schur_oracle() {
        let g = GroupSpec::new(vec![Factor::U(3)]).unwrap();
        let order = WeightOrder::for_group(&g);
        for lam in [vec![1, 0, 0], vec![2, 1, 0], vec![2, 2, 1], vec![3, 0, 0]] {
            let ch = weyl_character(&g, &IrrepLabel::new(&order, lam.clone()).unwrap()).unwrap();
            assert_eq!(ch, schur_oracle(&lam, 3), "lambda {lam:?}");
            assert_eq!(ch.eval_at_one(), factor_weyl_dim(BlockKind::TypeA(3), &lam));
        }
    }

    #[test]
    fn weyl_character_so3_weight_strings() {
        let g = GroupSpec::new(vec![Factor::SO(3)]).unwrap();
        let order = WeightOrder::for_group(&g);
        for l in 0..5i64 {
            let ch = weyl_character(&g, &IrrepLabel::new(&order, vec![l]).unwrap()).unwrap();
            assert_eq!(ch.eval_at_one(), (2 * l + 1) as i128, "SO(3) label {l}");
            for w in -l..=l {
                assert_eq!(ch.coeff(&[w]), 1);
            }
        }
    }

    #[test]
    fn weyl_character_sp2_dimensions() {
        let g = GroupSpec::new(vec![Factor::Sp(2)]).unwrap();
        let order = WeightOrder::for_group(&g);
        for (lam, dim) in [(vec![1, 0], 4), (vec![1, 1], 5), (vec![2, 0], 10)] {
            let ch = weyl_character(&g, &IrrepLabel::new(&order, lam.clone()).unwrap()).unwrap();
            assert_eq!(ch.eval_at_one(), dim, "Sp(2) label {lam:?}");
            assert_eq!(weyl_dim(&g, &IrrepLabel::new(&order, lam).unwrap()), dim);
        }
    }

    #[test]
    fn weyl_character_so4_so5_dimensions() {
        let g = GroupSpec::new(vec![Factor::SO(5)]).unwrap();
        let order = WeightOrder::for_group(&g);
        for (lam, dim) in [(vec![1, 0], 5), (vec![1, 1], 10), (vec![2, 0], 14)] {
            let ch = weyl_character(&g, &IrrepLabel::new(&order, lam.clone()).unwrap()).unwrap();
            assert_eq!(ch.eval_at_one(), dim, "SO(5) label {lam:?}");
            assert_eq!(weyl_dim(&g, &IrrepLabel::new(&order, lam).unwrap()), dim);
        }
        let g = GroupSpec::new(vec![Factor::SO(4)]).unwrap();
        let order = WeightOrder::for_group(&g);
        for (lam, dim) in [(vec![1, 0], 4), (vec![1, 1], 3), (vec![1, -1], 3), (vec![2, 0], 9)] {
            let ch = weyl_character(&g, &IrrepLabel::new(&order, lam.clone()).unwrap()).unwrap();
            assert_eq!(ch.eval_at_one(), dim, "SO(4) label {lam:?}");
            assert_eq!(weyl_dim(&g, &IrrepLabel::new(&order, lam).unwrap()), dim);
        }
    }

    #[test]
    fn decompose_is_idempotent_on_irreducibles() {
        let g = GroupSpec::new(vec![Factor::U(2)]).unwrap();
        let order = WeightOrder::for_group(&g);
        let label = IrrepLabel::new(&order, vec![3, 1]).unwrap();
        let ch = weyl_character(&g, &label).unwrap();
        let parts = decompose(&ch, &g).unwrap();
        assert_eq!(parts, vec![(label, 1)]);
    }

    #[test]
    fn decompose_sym2_of_u2_dual() {
        let r = real(vec![Factor::U(2)], RepTag::Standard);
        let ch = sym_power_character(&r, 2).unwrap();
        let parts = decompose(&ch, r.group()).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0.weight, vec![0, -2]);
        assert_eq!(parts[0].1, 1);
        assert_eq!(weyl_dim(r.group(), &parts[0].0), 3);
    }

    #[test]
    fn decompose_sym2_of_so3() {
        let r = real(vec![Factor::SO(3)], RepTag::Standard);
        let ch = sym_power_character(&r, 2).unwrap();
        let mut parts = decompose(&ch, r.group()).unwrap();
        parts.sort_by_key(|(l, _)| l.weight.clone());
        let labels: Vec<(Vec<i64>, u32)> = parts.into_iter().map(|(l, m)| (l.weight, m)).collect();
        assert_eq!(labels, vec![(vec![0], 1), (vec![2], 1)]);
    }

    #[test]
    fn decompose_round_trip_random_multisets() {
        use rand::Rng;
        let g = GroupSpec::new(vec![Factor::U(2), Factor::SO(3)]).unwrap();
        let order = WeightOrder::for_group(&g);
        let mut rng = crate::linalg::seeded(99, 1);
        for _ in 0..10 {
            let mut sum = LaurentPoly::zero(order.rank());
            let mut expect: BTreeMap<Vec<i64>, u32> = BTreeMap::new();
            for _ in 0..rng.gen_range(1..4) {
                let a = rng.gen_range(-1..3i64);
                let b = rng.gen_range(-3..=a);
                let c = rng.gen_range(0..3i64);
                let w = vec![a, b, c];
                let label = IrrepLabel::new(&order, w.clone()).unwrap();
                let mult = rng.gen_range(1..3u32);
                sum = sum.add(&weyl_character(&g, &label).unwrap().scale(mult as i64));
                *expect.entry(w).or_insert(0) += mult;
            }
            let parts = decompose(&sum, &g).unwrap();
            let got: BTreeMap<Vec<i64>, u32> =
                parts.into_iter().map(|(l, m)| (l.weight, m)).collect();
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn decompose_rejects_non_characters() {
        let g = GroupSpec::new(vec![Factor::U(2)]).unwrap();
        let p = LaurentPoly::monomial(vec![1, 0], 1);
        assert!(matches!(decompose(&p, &g), Err(CoreError::NotWeylSymmetric(_))));
        let order = WeightOrder::for_group(&g);
        let std = weyl_character(&g, &IrrepLabel::new(&order, vec![1, 0]).unwrap()).unwrap();
        assert!(matches!(decompose(&std.scale(-1), &g), Err(CoreError::NotACharacter { .. })));
    }

    #[test]
    fn mf_check_examples() {
        let r = real(vec![Factor::U(2)], RepTag::Standard);
        let rep = multiplicity_free_check(&r, 4).unwrap();
        assert_eq!(rep.verdict, MfVerdict::MultiplicityFreeUpTo(4));

        // SO(3) on C^3: the invariant quadratic repeats the trivial label.
        let r = real(vec![Factor::SO(3)], RepTag::Standard);
        let rep = multiplicity_free_check(&r, 2).unwrap();
        match rep.verdict {
            MfVerdict::Violation { label, occurrences } => {
                assert_eq!(label.weight, vec![0]);
                assert_eq!(occurrences.iter().map(|&(d, _)| d).collect::<Vec<_>>(), vec![0, 2]);
            }
            other => panic!("expected violation, got {other:?}"),
        }

        // T x SO(3) on C^3: the circle grading separates degrees.
        let r = real(vec![Factor::Circle, Factor::SO(3)], RepTag::Standard);
        let rep = multiplicity_free_check(&r, 4).unwrap();
        assert_eq!(rep.verdict, MfVerdict::MultiplicityFreeUpTo(4));
    }

    #[test]
    fn mf_verdicts_are_monotone_in_degree() {
        let r = real(vec![Factor::U(2)], RepTag::Sym2);
        for d in 0..4 {
            let rep = multiplicity_free_check(&r, d).unwrap();
            assert!(rep.verdict.is_mf(), "degree {d}");
        }
    }

    #[test]
    fn characters_are_weyl_symmetric() {
        let r = real(vec![Factor::U(2), Factor::Sp(1)], RepTag::Tensor);
        let order = WeightOrder::for_group(r.group());
        for d in 0..4 {
            let ch = sym_power_character(&r, d).unwrap();
            order.check_weyl_symmetric(&ch).unwrap();
        }
    }

    #[test]
    fn su2_direct_sum_weights_and_decomposition() {
        let r = real(vec![Factor::SU(2)], RepTag::DirectSum(2));
        let mut w = rep_weights(&r).unwrap();
        w.sort();
        assert_eq!(w, vec![vec![-1], vec![-1], vec![1], vec![1]]);
        let ch = sym_power_character(&r, 2).unwrap();
        let parts = decompose(&ch, r.group()).unwrap();
        let total: i128 = parts.iter().map(|(l, m)| *m as i128 * weyl_dim(r.group(), l)).sum();
        assert_eq!(total, 10);
        // Lambda^2(C^2) is SU(2)-trivial: exactly one trivial in degree 2.
        let trivial_mult: u32 =
            parts.iter().filter(|(l, _)| l.weight == vec![0]).map(|(_, m)| *m).sum();
        assert_eq!(trivial_mult, 1);
    }
}
