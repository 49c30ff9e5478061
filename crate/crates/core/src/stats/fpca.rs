use nalgebra::DMatrix;
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::funcspace::{GridFunction, FunctionSeries};
use crate::{Error, Real, Result};

/// Functional principal components of a series.
#[derive(Debug, Clone)]
pub struct FpcaResult<T: Real = f64> {
    pub mean: GridFunction<T>,
    /// Top `k` eigenfunctions, orthonormal in the quadrature inner product.
    pub eigenfunctions: Vec<GridFunction<T>>,
    /// All eigenvalues of the sample covariance operator, nonincreasing.
    pub eigenvalues: Vec<T>,
    /// `scores[(n, k)] = <X_n − mean, φ_k>`.
    pub scores: DMatrix<T>,
}

impl<T: Real> FpcaResult<T> {
    pub fn components(&self) -> usize {
        self.eigenfunctions.len()
    }

    pub fn score_column(&self, k: usize) -> Vec<T> {
        self.scores.column(k).iter().copied().collect()
    }

    /// Fraction of total variance carried by each retained component.
    pub fn explained_variance_ratio(&self) -> Vec<T> {
        let total = self.eigenvalues.iter().fold(T::zero(), |a, &l| a + l.max(T::zero()));
        self.eigenvalues[..self.components()]
            .iter()
            .map(|&l| if total > T::zero() { l / total } else { T::zero() })
            .collect()
    }
}

impl<T: Real> Serialize for FpcaResult<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FpcaResult", 4)?;
        st.serialize_field("mean", &self.mean)?;
        st.serialize_field("eigenvalues", &self.eigenvalues)?;
        st.serialize_field("eigenfunctions", &self.eigenfunctions)?;
        st.serialize_field("scores", &crate::linalg::to_rows(&self.scores))?;
        st.end()
    }
}

/// Eigen-decomposition of the sample covariance operator
/// `C = (T−1)⁻¹ Σ (X_n − X̄) ⊗ (X_n − X̄)`, solved as the symmetric problem
/// `W^{1/2} C W^{1/2} u = λu` and mapped back with `φ = W^{−1/2} u`.
pub fn fpca<T: Real>(x: &FunctionSeries<T>, k: usize) -> Result<FpcaResult<T>> {
    let domain = x.domain().clone();
    let m = domain.len();
    let t = x.len();
    if k == 0 || k > m {
        return Err(Error::InvalidInput(format!("component count must be in 1..={m}, got {k}")));
    }
    if t < k + 1 {
        return Err(Error::InsufficientLength { needed: k + 1, got: t });
    }
    let w = domain.weights();
    if w.iter().any(|&wi| wi <= T::zero()) {
        return Err(Error::InvalidInput("FPCA needs strictly positive quadrature weights".into()));
    }
    let mean = x.mean();
    let sqrt_w: Vec<T> = w.iter().map(|&wi| wi.sqrt()).collect();
    // rows: W^{1/2}(X_n − X̄)
    let mut d = DMatrix::<T>::zeros(t, m);
    for (n, f) in x.frames().iter().enumerate() {
        for i in 0..m {
            d[(n, i)] = (f.values()[i] - mean.values()[i]) * sqrt_w[i];
        }
    }
    let s = d.tr_mul(&d) / T::from_usize(t - 1).unwrap();
    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<T> = order.iter().map(|&j| eig.eigenvalues[j]).collect();

    let mut eigenfunctions = Vec::with_capacity(k);
    let mut u_cols = DMatrix::<T>::zeros(m, k);
    for (c, &j) in order[..k].iter().enumerate() {
        let mut u: Vec<T> = eig.eigenvectors.column(j).iter().copied().collect();
        let values: Vec<T> = u.iter().zip(&sqrt_w).map(|(&ui, &si)| ui / si).collect();
        let peak = values
            .iter()
            .copied()
            .fold(T::zero(), |best, v| if v.abs() > best.abs() { v } else { best });
        let sign = if peak < T::zero() { -T::one() } else { T::one() };
        for ui in u.iter_mut() {
            *ui *= sign;
        }
        u_cols.set_column(c, &nalgebra::DVector::from_vec(u));
        eigenfunctions.push(GridFunction::from_raw(
            domain.clone(),
            values.into_iter().map(|v| v * sign).collect(),
        ));
    }
    // <X_n − X̄, φ_k> = Σ_i w_i (X_n − X̄)_i φ_k(i) = (D U)_{nk}
    let scores = &d * &u_cols;
    Ok(FpcaResult {
        mean,
        eigenfunctions,
        eigenvalues,
        scores,
    })
}
