//! Dense complex linear-algebra helpers shared across the crate: Hermitian
//! eigendecomposition, matrix exponentials, and the Taylor-substepped
//! exponential action used by the oracle state constructors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Largest absolute entry of `m - m†`.
pub fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > defect {
                defect = d;
            }
        }
    }
    defect
}

/// Eigendecomposition of a Hermitian matrix: real ascending eigenvalues and
/// the matching unitary of column eigenvectors.
pub fn eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// e^{-i t H} for Hermitian `h`, built from the spectral decomposition, so the
/// result is unitary to roundoff regardless of `t`.
pub fn unitary_from_hermitian(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let (values, vectors) = eigh(h);
    let n = values.len();
    let mut scaled = vectors.clone();
    for (k, lam) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -t * lam);
        for i in 0..n {
            scaled[(i, k)] *= phase;
        }
    }
    scaled * vectors.adjoint()
}

/// Matrix exponential by scaling-and-squaring on the plain power series.
/// Deliberately structure-blind: it is the ground truth against which the
/// closed-form operator constructions are checked.
pub fn expm_taylor(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    let norm = m.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scale = 2f64.powi(-(squarings as i32));
    let scaled = m.map(|z| z * scale);

    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..200 {
        term = (&term * &scaled) / C64::new(k as f64, 0.0);
        result += &term;
        let t_norm: f64 = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if t_norm < 1e-300 || t_norm < 1e-18 * result.iter().map(|z| z.norm()).fold(0.0, f64::max) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// e^{A} v for an operator given only through its action, via Taylor series on
/// substeps sized so each partial sum stays well conditioned. `norm_bound`
/// must dominate the operator norm of A; it only controls the substep count.
/// Intended for anti-Hermitian A, where every substep is norm-preserving.
pub fn expm_action<F>(apply: F, v: &DVector<C64>, norm_bound: f64) -> DVector<C64>
where
    F: Fn(&DVector<C64>) -> DVector<C64>,
{
    let substeps = norm_bound.ceil().max(1.0) as usize;
    let inv = C64::new(1.0 / substeps as f64, 0.0);
    let mut state = v.clone();
    for _ in 0..substeps {
        let mut sum = state.clone();
        let mut term = state.clone();
        for k in 1..80 {
            term = apply(&term) * inv / C64::new(k as f64, 0.0);
            sum += &term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        state = sum;
    }
    state
}
