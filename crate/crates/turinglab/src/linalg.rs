//! Small dense linear-algebra helpers shared by the analysis stages.
//!
//! Everything here wraps LAPACK (via `ndarray-linalg`) for dense complex
//! nonsymmetric problems of size at most a few hundred.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Inverse, Solve};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense eigendecomposition of a general complex matrix.
pub fn eig(a: &Array2<C64>) -> Result<(Array1<C64>, Array2<C64>)> {
    Ok(a.eig()?)
}

/// Right eigenvalues only.
pub fn eigvals(a: &Array2<C64>) -> Result<Array1<C64>> {
    let (w, _) = a.eig()?;
    Ok(w)
}

/// Dense inverse of a general complex matrix.
pub fn inv(a: &Array2<C64>) -> Result<Array2<C64>> {
    Ok(a.inv()?)
}

/// Solve `a x = b` for complex dense `a`.
pub fn solve(a: &Array2<C64>, b: &Array1<C64>) -> Result<Array1<C64>> {
    Ok(a.solve(b)?)
}

/// Solve `a x = b` for real dense `a` (Newton steps on realified systems).
pub fn solve_real(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    Ok(a.solve(b)?)
}

/// `|<u, v>| / (|u| |v|)` — modulus of the normalized Hermitian inner product,
/// used for eigenvector-overlap branch tracking.
pub fn overlap(u: &Array1<C64>, v: &Array1<C64>) -> f64 {
    let mut dot = C64::new(0.0, 0.0);
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.iter().zip(v.iter()) {
        dot += a.conj() * b;
        nu += a.norm_sqr();
        nv += b.norm_sqr();
    }
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    dot.norm() / (nu * nv).sqrt()
}

/// Euclidean norm of a complex vector.
pub fn norm(u: &Array1<C64>) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius norm of a complex matrix.
pub fn fro_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `<u, v> = sum conj(u_i) v_i`.
pub fn inner(u: &Array1<C64>, v: &Array1<C64>) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Plain bilinear product `sum u_i v_i` (left-eigenvector pairing `ell . r`).
pub fn dot(u: &Array1<C64>, v: &Array1<C64>) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
}

/// Index of the eigenvalue whose eigenvector has maximal overlap with `ref_vec`.
///
/// Returns the index together with the ratio of the runner-up overlap to the
/// best overlap, so callers can detect ambiguous matches.
pub fn match_by_overlap(
    vectors: &Array2<C64>,
    ref_vec: &Array1<C64>,
) -> Result<(usize, f64)> {
    let ncols = vectors.ncols();
    if ncols == 0 {
        return Err(Error::Linalg("empty eigenvector set".into()));
    }
    let mut best = (0usize, -1.0f64);
    let mut second = -1.0f64;
    for j in 0..ncols {
        let col = vectors.column(j).to_owned();
        let ov = overlap(ref_vec, &col);
        if ov > best.1 {
            second = best.1;
            best = (j, ov);
        } else if ov > second {
            second = ov;
        }
    }
    let ratio = if best.1 > 0.0 { second / best.1 } else { 1.0 };
    Ok((best.0, ratio))
}

/// The 2x2 realification `[[Re z, -Im z], [Im z, Re z]]` of a complex scalar,
/// whose eigenvalues are `{z, conj z}`.
pub fn realify(z: C64) -> Array2<f64> {
    ndarray::array![[z.re, -z.im], [z.im, z.re]]
}

/// Eigenvalues of a real 2x2 matrix by the closed-form quadratic.
pub fn eig2_real(m: &Array2<f64>) -> (C64, C64) {
    let tr = m[[0, 0]] + m[[1, 1]];
    let det = m[[0, 0]] * m[[1, 1]] - m[[0, 1]] * m[[1, 0]];
    let disc = C64::new(tr * tr / 4.0 - det, 0.0).sqrt();
    let half = C64::new(tr / 2.0, 0.0);
    (half + disc, half - disc)
}

/// Eigenvalues of a complex 2x2 matrix by the closed-form quadratic.
pub fn eig2(m: &Array2<C64>) -> (C64, C64) {
    let tr = m[[0, 0]] + m[[1, 1]];
    let det = m[[0, 0]] * m[[1, 1]] - m[[0, 1]] * m[[1, 0]];
    let disc = (tr * tr / 4.0 - det).sqrt();
    (tr / 2.0 + disc, tr / 2.0 - disc)
}
