//! Small dense helpers on top of nalgebra.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::funcspace::{inner_product, GridFunction};
use crate::{Error, Real, Result};

const SCHUR_MAX_ITER: usize = 2_000;

/// Eigenvalues of a real square matrix, possibly complex.
pub(crate) fn eigenvalues<T: Real>(m: &DMatrix<T>) -> Result<Vec<Complex<T>>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenFailure("matrix has non-finite entries".into()));
    }
    // nalgebra's real Schur iteration can stall on clustered eigenvalues when
    // the deflation threshold is exactly machine epsilon; the transpose and a
    // slightly looser threshold usually get past it.
    let eps = T::default_epsilon();
    let attempts = [(false, 1.0), (true, 1.0), (false, 4.0), (true, 4.0), (false, 64.0), (true, 64.0)];
    let schur = attempts
        .iter()
        .find_map(|&(transpose, scale)| {
            let a = if transpose { m.transpose() } else { m.clone() };
            a.try_schur(eps * T::lit(scale), SCHUR_MAX_ITER)
        })
        .ok_or_else(|| Error::EigenFailure("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

pub(crate) fn modulus<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// Descending modulus, then descending real part, then descending imaginary part.
pub(crate) fn sort_spectrum<T: Real>(values: &mut [Complex<T>]) {
    values.sort_by(|a, b| {
        let (ma, mb) = (modulus(*a), modulus(*b));
        mb.partial_cmp(&ma)
            .unwrap_or(Ordering::Equal)
            .then(b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal))
            .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
    });
}

pub(crate) fn spectral_radius<T: Real>(m: &DMatrix<T>) -> Result<T> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|&z| modulus(z))
        .fold(T::zero(), |acc, r| acc.max(r)))
}

/// Orthonormal basis (as columns) of the numerical null space of a square
/// matrix: right singular vectors whose singular value is at most
/// `tol * max(1, σ_max)`.
pub(crate) fn null_space<T: Real>(m: &DMatrix<T>, tol: T) -> Result<DMatrix<T>> {
    let n = m.ncols();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let svd = m
        .clone()
        .try_svd(false, true, T::default_epsilon(), SCHUR_MAX_ITER)
        .ok_or_else(|| Error::EigenFailure("SVD did not converge".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::EigenFailure("SVD returned no right singular vectors".into()))?;
    let sigma_max = svd.singular_values.iter().fold(T::zero(), |a, &s| a.max(s));
    let threshold = tol * sigma_max.max(T::one());
    let mut cols = Vec::new();
    // the thin SVD of a square matrix has n singular values
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= threshold {
            cols.push(v_t.row(k).transpose());
        }
    }
    if cols.is_empty() {
        Ok(DMatrix::zeros(n, 0))
    } else {
        Ok(DMatrix::from_columns(&cols))
    }
}

/// Gram matrix `G_ij = <f_i, f_j>`.
pub(crate) fn gram<T: Real>(fs: &[GridFunction<T>]) -> Result<DMatrix<T>> {
    let n = fs.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = inner_product(&fs[i], &fs[j])?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Cross matrix `M_ij = <f_i, g_j>`.
pub(crate) fn cross<T: Real>(fs: &[GridFunction<T>], gs: &[GridFunction<T>]) -> Result<DMatrix<T>> {
    let mut m = DMatrix::zeros(fs.len(), gs.len());
    for (i, f) in fs.iter().enumerate() {
        for (j, g) in gs.iter().enumerate() {
            m[(i, j)] = inner_product(f, g)?;
        }
    }
    Ok(m)
}

/// Frobenius norm.
pub(crate) fn fro<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

pub(crate) fn to_rows<T: Real>(m: &DMatrix<T>) -> Vec<Vec<T>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
