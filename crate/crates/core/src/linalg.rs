//! Dense complex linear-algebra helpers shared by the numerical modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// Relative singular-value cutoff for all numerical rank decisions. Matrices
/// here are O(1)-scaled, so a fixed relative threshold is adequate.
pub const RANK_REL_TOL: f64 = 1e-8;

pub fn numerical_rank(m: &RMat, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

pub fn numerical_rank_complex(m: &CMat, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Realify a complex vector as (Re; Im) stacked.
pub fn realify_vec(v: &CVec) -> RVec {
    let d = v.len();
    RVec::from_fn(2 * d, |i, _| if i < d { v[i].re } else { v[i - d].im })
}

pub fn complexify_vec(v: &RVec) -> CVec {
    let d = v.len() / 2;
    CVec::from_fn(d, |i, _| Complex64::new(v[i], v[i + d]))
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian residual `||A* + A||`, zero for skew-Hermitian `A`.
pub fn skew_hermitian_residual(a: &CMat) -> f64 {
    frobenius_norm(&(a.adjoint() + a))
}

pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; consumes two uniforms.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(
        standard_normal(rng) / std::f64::consts::SQRT_2,
        standard_normal(rng) / std::f64::consts::SQRT_2,
    )
}

pub fn random_complex_vector(rng: &mut ChaCha8Rng, dim: usize) -> CVec {
    CVec::from_fn(dim, |_, _| complex_gaussian(rng))
}

/// Basis of the kernel of `m` (columns), using SVD with a relative cutoff.
/// Also returns the smallest retained (non-kernel) singular value for gap
/// diagnostics; `None` when the matrix is entirely kernel.
pub fn kernel_basis(m: &CMat, rel_tol: f64) -> (Vec<CVec>, Option<f64>) {
    let ncols = m.ncols();
    if m.nrows() == 0 || ncols == 0 {
        return ((0..ncols).map(|j| CVec::from_fn(ncols, |i, _| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })).collect(), None);
    }
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("svd v_t requested");
    let sv = &svd.singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let mut kernel = Vec::new();
    let mut smallest_kept: Option<f64> = None;
    let k = sv.len();
    for i in 0..k {
        if max == 0.0 || sv[i] <= rel_tol * max.max(1.0) {
            kernel.push(vt.row(i).adjoint());
        } else {
            smallest_kept = Some(match smallest_kept {
                Some(s) => s.min(sv[i]),
                None => sv[i],
            });
        }
    }
    // Rows of V^T beyond the number of singular values (wide kernels).
    for i in k..vt.nrows() {
        kernel.push(vt.row(i).adjoint());
    }
    (kernel, smallest_kept)
}

/// Least-squares solve min ||A x - b|| via SVD; tolerates rank deficiency.
pub fn lstsq(a: &CMat, b: &CVec, rel_tol: f64) -> CVec {
    let svd = a.clone().svd(true, true);
    svd.solve(b, rel_tol).expect("svd solve")
}

pub fn lstsq_real(a: &RMat, b: &RVec, rel_tol: f64) -> RVec {
    let svd = a.clone().svd(true, true);
    svd.solve(b, rel_tol).expect("svd solve")
}

/// Deterministic RNG stream for a named purpose derived from a base seed.
pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}
