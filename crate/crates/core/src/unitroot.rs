//! Strong and weak unit roots.
//!
//! A compact `ρ` has a strong unit root when 1 is an eigenvalue and every
//! other spectral point lies strictly inside the unit disc. Then the space
//! splits as `U ⊕ C` with `U = Ker(ρ − I)` finite-dimensional and both parts
//! invariant. The projection onto `U` along `C` is the Riesz projection of
//! the eigenvalue 1; it commutes with `ρ` and is oblique unless `ρ` is normal.
//! Projected paths are a random walk on `U` and a stationary AR(1) on `C`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use crate::far::{ar2_companion, FarModel, SamplePath};
use crate::funcspace::{inner_product, linear_combination, orthonormalize, FunctionSeries, GridDomain, GridFunction};
use crate::linalg;
use crate::operators::{combine_and_orthonormalize, eigen_coefficients, rank_drop_tol, OperatorSpec, DEFAULT_EIGEN_TOL};
use crate::{Error, Real, Result};

/// Unit-root tolerance profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TolProfile {
    /// Analytically specified operators.
    #[default]
    Exact,
    /// Operators estimated from data.
    Estimated,
}

impl TolProfile {
    pub fn tol_unit(self) -> f64 {
        match self {
            TolProfile::Exact => DEFAULT_EIGEN_TOL,
            TolProfile::Estimated => 0.05,
        }
    }
}

impl std::str::FromStr for TolProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(TolProfile::Exact),
            "estimated" => Ok(TolProfile::Estimated),
            other => Err(Error::InvalidInput(format!(
                "unknown tolerance profile '{other}' (expected exact or estimated)"
            ))),
        }
    }
}

/// Partition of the nonzero spectrum relative to the point 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct SpectrumReport<T: Real = f64> {
    pub eigenvalues: Vec<Complex<T>>,
    /// `|λ − 1| ≤ tol` and `|Im λ| ≤ tol`.
    pub unit_set: Vec<usize>,
    /// `|λ| < 1 − tol`.
    pub stable_set: Vec<usize>,
    /// Everything else: on or outside the unit circle but not at 1.
    pub boundary_set: Vec<usize>,
    pub tol_unit: T,
    /// The eigenvalue 1 has fewer eigenvectors than its multiplicity.
    pub multiplicity_flag: bool,
}

impl<T: Real> SpectrumReport<T> {
    pub fn has_strong_unit_root(&self) -> bool {
        !self.unit_set.is_empty() && self.boundary_set.is_empty()
    }

    pub fn unit_multiplicity(&self) -> usize {
        self.unit_set.len()
    }
}

pub fn classify<T: Real>(rho: &OperatorSpec<T>, tol_unit: T) -> Result<SpectrumReport<T>> {
    if !(tol_unit > T::zero()) {
        return Err(Error::InvalidInput("tol_unit must be positive".into()));
    }
    let eigenvalues = rho.spectrum()?;
    let one = Complex::new(T::one(), T::zero());
    let (mut unit_set, mut stable_set, mut boundary_set) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &l) in eigenvalues.iter().enumerate() {
        if linalg::modulus(l - one) <= tol_unit && l.im.abs() <= tol_unit {
            unit_set.push(i);
        } else if linalg::modulus(l) < T::one() - tol_unit {
            stable_set.push(i);
        } else {
            boundary_set.push(i);
        }
    }
    let multiplicity_flag = if unit_set.is_empty() {
        false
    } else {
        let a = rho.matrix_reduction()?.matrix;
        let units: Vec<T> = unit_set.iter().map(|&i| eigenvalues[i].re).collect();
        let v = spectral_subspace(&a, &units)?;
        geometric_multiplicity(&a, &v, tol_unit) < units.len()
    };
    Ok(SpectrumReport {
        eigenvalues,
        unit_set,
        stable_set,
        boundary_set,
        tol_unit,
        multiplicity_flag,
    })
}

/// Orthonormal columns spanning the invariant subspace of `A` belonging to
/// the listed (real) eigenvalues, taken as the right singular vectors of
/// `Π_k (A − λ_k I)` with the smallest singular values.
fn spectral_subspace<T: Real>(a: &DMatrix<T>, lambdas: &[T]) -> Result<DMatrix<T>> {
    let n = a.nrows();
    let m = lambdas.len();
    let id = DMatrix::<T>::identity(n, n);
    let mut prod = id.clone();
    for &l in lambdas {
        prod = &prod * (a - &id * l);
    }
    let svd = prod
        .try_svd(false, true, T::default_epsilon(), 10_000)
        .ok_or_else(|| Error::EigenFailure("SVD did not converge".into()))?;
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[i]
            .partial_cmp(&svd.singular_values[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let cols: Vec<_> = order[..m].iter().map(|&k| v_t.row(k).transpose()).collect();
    Ok(DMatrix::from_columns(&cols))
}

/// `dim Ker(B − I)` for the compression `B = VᵀAV` onto an invariant
/// subspace with orthonormal columns `V`.
fn geometric_multiplicity<T: Real>(a: &DMatrix<T>, v: &DMatrix<T>, tol: T) -> usize {
    let b = v.transpose() * a * v;
    let m = b.nrows();
    let shifted = b - DMatrix::<T>::identity(m, m);
    let sv = shifted.singular_values();
    let scale = sv.iter().fold(T::one(), |acc, &s| acc.max(s));
    let rank = sv.iter().filter(|&&s| s > tol * scale).count();
    m - rank
}

/// The split `H = U ⊕ C` of a strong-unit-root operator.
#[derive(Debug, Clone)]
pub struct Decomposition<T: Real = f64> {
    /// Orthonormal basis of `U = Ker(ρ − I)`.
    pub trend_basis: Vec<GridFunction<T>>,
    /// `Π_U` on coefficient vectors in the reduction's range basis.
    pub projection: DMatrix<T>,
    /// Reduction the projection lives on.
    pub reduction: crate::operators::MatrixReduction<T>,
    /// `u_k` and `ℓ_k` with `Π_U x = Σ_k <ℓ_k, x> u_k` and `<ℓ_j, u_k> = δ_jk`.
    pub generators: Vec<GridFunction<T>>,
    pub functionals: Vec<GridFunction<T>>,
    pub dim_u: usize,
    /// `‖PA − AP‖_F`.
    pub residual_commutation: T,
    /// `‖P² − P‖_F`.
    pub idempotency_residual: T,
    /// Spectral radius of `(I − P)A`, the operator driving the stationary part.
    pub complement_radius: T,
    pub spectrum: SpectrumReport<T>,
    domain: Arc<GridDomain<T>>,
}

pub fn decompose<T: Real>(rho: &OperatorSpec<T>, tol_unit: T) -> Result<Decomposition<T>> {
    let spectrum = classify(rho, tol_unit)?;
    if !spectrum.has_strong_unit_root() {
        return Err(Error::NoStrongUnitRoot);
    }
    let units: Vec<T> = spectrum.unit_set.iter().map(|&i| spectrum.eigenvalues[i].re).collect();
    let m = units.len();
    let reduction = rho.matrix_reduction()?;
    let a = &reduction.matrix;
    let n = a.nrows();

    let right = spectral_subspace(a, &units)?;
    let geometric = geometric_multiplicity(a, &right, tol_unit);
    if geometric < m {
        return Err(Error::DefectiveUnitRoot {
            algebraic: m,
            geometric,
        });
    }
    let left = spectral_subspace(&a.transpose(), &units)?;
    let pairing = left.transpose() * &right;
    let inv = pairing
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::EigenFailure("left and right unit eigenvectors are not paired".into()))?;
    let dual = &inv * left.transpose(); // rows ℓ̃_k with ℓ̃ R = I
    let projection = &right * &dual;

    let id = DMatrix::<T>::identity(n, n);
    let residual_commutation = linalg::fro(&(&projection * a - a * &projection));
    let idempotency_residual = linalg::fro(&(&projection * &projection - &projection));
    let complement_radius = linalg::spectral_radius(&((&id - &projection) * a))?;

    let factors = rho.factors();
    let generators = right
        .column_iter()
        .map(|c| linear_combination(&c.iter().copied().collect::<Vec<_>>(), &factors.range))
        .collect::<Result<Vec<_>>>()?;
    // Π_U x = R ℓ̃ c(x) with c_i(x) = <corange_i, x>
    let functionals = dual
        .row_iter()
        .map(|r| linear_combination(&r.iter().copied().collect::<Vec<_>>(), &factors.corange))
        .collect::<Result<Vec<_>>>()?;
    let trend_basis = orthonormalize(&generators, rank_drop_tol())?;
    if trend_basis.len() != m {
        return Err(Error::EigenFailure(format!(
            "unit eigenvectors span {} functions, expected {m}",
            trend_basis.len()
        )));
    }
    Ok(Decomposition {
        trend_basis,
        projection,
        reduction,
        generators,
        functionals,
        dim_u: m,
        residual_commutation,
        idempotency_residual,
        complement_radius,
        spectrum,
        domain: rho.domain().clone(),
    })
}

impl<T: Real> Decomposition<T> {
    pub fn domain(&self) -> &Arc<GridDomain<T>> {
        &self.domain
    }

    /// `Π_U x`.
    pub fn trend_part(&self, x: &GridFunction<T>) -> Result<GridFunction<T>> {
        if !crate::funcspace::same_grid(&self.domain, x.domain()) {
            return Err(Error::DomainMismatch);
        }
        let coeffs = self
            .functionals
            .iter()
            .map(|l| inner_product(l, x))
            .collect::<Result<Vec<_>>>()?;
        linear_combination(&coeffs, &self.generators)
    }

    /// `Π_S x = x − Π_U x`.
    pub fn stationary_part(&self, x: &GridFunction<T>) -> Result<GridFunction<T>> {
        x.try_sub(&self.trend_part(x)?)
    }

    /// Framewise `(Π_U X_n, Π_S X_n)`.
    pub fn split_series(&self, x: &FunctionSeries<T>) -> Result<(FunctionSeries<T>, FunctionSeries<T>)> {
        let mut trend = Vec::with_capacity(x.len());
        let mut stationary = Vec::with_capacity(x.len());
        for f in x.frames() {
            let u = self.trend_part(f)?;
            stationary.push(f.try_sub(&u)?);
            trend.push(u);
        }
        Ok((FunctionSeries::new(trend)?, FunctionSeries::new(stationary)?))
    }

    pub fn report(&self) -> DecompositionReport<T> {
        DecompositionReport {
            spectrum: self.spectrum.clone(),
            dim_u: self.dim_u,
            residual_commutation: self.residual_commutation,
            idempotency_residual: self.idempotency_residual,
            complement_radius: self.complement_radius,
            projection: linalg::to_rows(&self.projection),
            trend_basis: self.trend_basis.clone(),
        }
    }
}

/// `(Π_U X_n, Π_S X_n)` for a simulated path.
pub fn split_path<T: Real>(
    dec: &Decomposition<T>,
    path: &SamplePath<T>,
) -> Result<(FunctionSeries<T>, FunctionSeries<T>)> {
    dec.split_series(&path.series)
}

/// Serialisable summary of a [`Decomposition`].
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Real")]
pub struct DecompositionReport<T: Real = f64> {
    pub spectrum: SpectrumReport<T>,
    pub dim_u: usize,
    pub residual_commutation: T,
    pub idempotency_residual: T,
    pub complement_radius: T,
    pub projection: Vec<Vec<T>>,
    pub trend_basis: Vec<GridFunction<T>>,
}

/// Orthonormal basis of `Ker(ρ* − λ)` for real `λ ≠ 0`.
fn adjoint_eigenspace<T: Real>(rho: &OperatorSpec<T>, lambda: T, tol: T) -> Result<Vec<GridFunction<T>>> {
    if !rho.has_representable_adjoint() {
        return Err(Error::UnsupportedAdjoint);
    }
    let a = rho.matrix_reduction()?.matrix;
    // ρ*(Σ L_i b_i) = Σ_i (AᵀL)_i b_i over the corange factors
    let coeffs = eigen_coefficients(&a.transpose(), Complex::new(lambda, T::zero()), tol)?;
    combine_and_orthonormalize(&coeffs, &rho.factors().corange)
}

/// Orthonormal basis of `Ker(ρ* − I)`. Each `v` in it makes `<X_n, v>` an
/// exact scalar random walk; when the range of the process is dense this is
/// the whole set of weak unit roots.
pub fn weak_unit_root_space<T: Real>(rho: &OperatorSpec<T>, tol: T) -> Result<Vec<GridFunction<T>>> {
    adjoint_eigenspace(rho, T::one(), tol)
}

/// One eligible eigenvalue pair of an AR(2) model.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct EigenPair<T: Real = f64> {
    pub lambda1: T,
    pub lambda2: T,
    pub intersection_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Ar2UnitRootReport<T: Real = f64> {
    pub eligible_pairs: Vec<EigenPair<T>>,
    pub total_trends: usize,
    /// Both operators compact; some `λ₁ + λ₂ = 1`; some such pair has a
    /// nontrivial kernel intersection.
    pub conditions_met: [bool; 3],
    /// Spectral radius of the companion matrix, for reference.
    pub companion_radius: T,
}

impl<T: Real> Ar2UnitRootReport<T> {
    pub fn has_unit_root(&self) -> bool {
        self.conditions_met.iter().all(|&c| c)
    }
}

/// Cosine above which two principal directions count as shared.
const PRINCIPAL_COS: f64 = 1.0 - 1e-8;

/// Real spectrum of a compact operator including the point 0, deduplicated
/// within `tol`.
fn real_spectrum<T: Real>(rho: &OperatorSpec<T>, tol: T) -> Result<Vec<T>> {
    let mut out: Vec<T> = vec![T::zero()];
    for l in rho.spectrum()? {
        if l.im.abs() <= tol && out.iter().all(|&x| (x - l.re).abs() > tol) {
            out.push(l.re);
        }
    }
    Ok(out)
}

/// Checks the AR(2) unit-root conditions: eigenvalue pairs `λ₁ + λ₂ = 1` with
/// `Ker(ρ₁* − λ₁) ∩ Ker(ρ₂* − λ₂) ≠ {0}`. The point 0 belongs to the spectrum
/// of every compact operator on an infinite-dimensional space and is
/// included; its adjoint kernel is handled as a constraint on the other
/// (finite-dimensional) eigenspace.
pub fn ar2_unit_root_check<T: Real>(model: &FarModel<T>, tol: T) -> Result<Ar2UnitRootReport<T>> {
    let (rho1, rho2) = match model.rho2() {
        Some(r2) => (model.rho1(), r2),
        None => return Err(Error::InvalidInput("AR(2) check needs an order-2 model".into())),
    };
    if !rho1.has_representable_adjoint() || !rho2.has_representable_adjoint() {
        return Err(Error::UnsupportedAdjoint);
    }
    let s1 = real_spectrum(rho1, tol)?;
    let s2 = real_spectrum(rho2, tol)?;
    let mut eligible_pairs = Vec::new();
    for &l1 in &s1 {
        for &l2 in &s2 {
            if (l1 + l2 - T::one()).abs() > tol {
                continue;
            }
            let intersection_dim = kernel_intersection_dim(rho1, l1, rho2, l2, tol)?;
            eligible_pairs.push(EigenPair {
                lambda1: l1,
                lambda2: l2,
                intersection_dim,
            });
        }
    }
    let total_trends = eligible_pairs.iter().map(|p| p.intersection_dim).sum();
    let companion_radius = linalg::spectral_radius(&ar2_companion(rho1, rho2)?)?;
    Ok(Ar2UnitRootReport {
        conditions_met: [true, !eligible_pairs.is_empty(), total_trends > 0],
        eligible_pairs,
        total_trends,
        companion_radius,
    })
}

fn kernel_intersection_dim<T: Real>(
    rho1: &OperatorSpec<T>,
    l1: T,
    rho2: &OperatorSpec<T>,
    l2: T,
    tol: T,
) -> Result<usize> {
    let zero1 = l1.abs() <= tol;
    let zero2 = l2.abs() <= tol;
    match (zero1, zero2) {
        (true, true) => Ok(0),
        (false, true) => annihilated_dim(&adjoint_eigenspace(rho1, l1, tol)?, rho2),
        (true, false) => annihilated_dim(&adjoint_eigenspace(rho2, l2, tol)?, rho1),
        (false, false) => {
            let q1 = adjoint_eigenspace(rho1, l1, tol)?;
            let q2 = adjoint_eigenspace(rho2, l2, tol)?;
            if q1.is_empty() || q2.is_empty() {
                return Ok(0);
            }
            let cosines = linalg::cross(&q1, &q2)?.singular_values();
            Ok(cosines.iter().filter(|&&c| c >= T::lit(PRINCIPAL_COS)).count())
        }
    }
}

/// `dim {v ∈ span(q): ρ*v = 0}` for an orthonormal family `q`.
fn annihilated_dim<T: Real>(q: &[GridFunction<T>], rho: &OperatorSpec<T>) -> Result<usize> {
    if q.is_empty() {
        return Ok(0);
    }
    let images = q.iter().map(|v| rho.adjoint_apply(v)).collect::<Result<Vec<_>>>()?;
    let g = linalg::gram(&images)?;
    // ‖ρ* Σ c_j q_j‖² = cᵀGc; directions with vanishing quadratic form are annihilated
    let eig = g.symmetric_eigenvalues();
    let scale = eig.iter().fold(T::one(), |acc, &e| acc.max(e.abs()));
    let cut = T::lit(1.0 - PRINCIPAL_COS) * scale;
    Ok(eig.iter().filter(|&&e| e <= cut).count())
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::far::{simulate_with, NoiseSpec, SimulateOptions};
    use crate::funcspace::fourier_basis;
    use crate::operators::{golden_unit_root_coupling, SeparableKernelOp};

    const TOL: f64 = 1e-8;

    fn grid() -> Arc<GridDomain> {
        GridDomain::uniform(101).unwrap().into_shared()
    }

    fn coords(f: &GridFunction, basis: &[GridFunction]) -> Vec<f64> {
        basis.iter().map(|e| inner_product(f, e).unwrap()).collect()
    }

    fn fib() -> (OperatorSpec, Vec<GridFunction>) {
        let e = fourier_basis(&grid(), 2);
        let alpha = golden_unit_root_coupling::<f64>();
        (OperatorSpec::fibonacci(alpha, e[0].clone(), e[1].clone()).unwrap(), e)
    }

    #[test]
    fn classify_examples() {
        let (rho, _) = fib();
        let r = classify(&rho, TOL).unwrap();
        assert_eq!((r.unit_set.len(), r.stable_set.len(), r.boundary_set.len()), (1, 1, 0));
        assert_abs_diff_eq!(r.eigenvalues[r.stable_set[0]].re, -0.3819660112501051, epsilon = 1e-9);
        assert!(r.has_strong_unit_root());
        assert!(!r.multiplicity_flag);

        let e = fourier_basis(&grid(), 4);
        let r = classify(&OperatorSpec::spectral(vec![1.0, 1.0, 1.0, 0.3], e.clone()).unwrap(), TOL).unwrap();
        assert_eq!(r.unit_set.len(), 3);
        assert!(r.has_strong_unit_root());

        let r = classify(&OperatorSpec::spectral(vec![1.0, -1.0], e[..2].to_vec()).unwrap(), TOL).unwrap();
        assert!(!r.boundary_set.is_empty());
        assert!(!r.has_strong_unit_root());
        assert!(classify(&OperatorSpec::spectral(vec![1.0], e[..1].to_vec()).unwrap(), 0.0).is_err());
    }

    #[test]
    fn near_unit_complex_pair_is_boundary() {
        let e = fourier_basis(&grid(), 3);
        let (c, s) = (0.01f64.cos(), 0.01f64.sin());
        let m = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
        let rho: OperatorSpec = SeparableKernelOp::from_matrix(e, &m).unwrap().into();
        let r = classify(&rho, TOL).unwrap();
        assert_eq!(r.unit_set.len(), 1);
        assert_eq!(r.boundary_set.len(), 2);
    }

    #[test]
    fn ou_unit_root_only_at_zero() {
        let d = grid();
        assert!(classify(&OperatorSpec::point_exp(0.0, d.clone()).unwrap(), TOL).unwrap().has_strong_unit_root());
        assert!(!classify(&OperatorSpec::point_exp(0.5, d).unwrap(), TOL).unwrap().has_strong_unit_root());
    }

    #[test]
    fn fibonacci_trend_direction() {
        let (rho, e) = fib();
        let dec = decompose(&rho, TOL).unwrap();
        assert_eq!(dec.dim_u, 1);
        let c = coords(&dec.trend_basis[0], &e);
        let s = c[0].signum();
        assert_abs_diff_eq!(s * c[0], 0.8506, epsilon = 5e-4);
        assert_abs_diff_eq!(s * c[1], 0.5257, epsilon = 5e-4);
        assert!(dec.residual_commutation <= 1e-12);
        assert!(dec.idempotency_residual <= 1e-12);
        assert_abs_diff_eq!(dec.complement_radius, 0.3819660112501051, epsilon = 1e-9);

        // symmetric reduction: weak space is the same line
        let w = weak_unit_root_space(&rho, TOL).unwrap();
        assert_eq!(w.len(), 1);
        assert_abs_diff_eq!(inner_product(&w[0], &dec.trend_basis[0]).unwrap().abs(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn diagonal_projection() {
        let e = fourier_basis(&grid(), 2);
        let rho = OperatorSpec::spectral(vec![1.0, 0.5], e.clone()).unwrap();
        let dec = decompose(&rho, TOL).unwrap();
        let x = &e[0].scale(2.0) + &e[1].scale(-3.0);
        assert!((&dec.trend_part(&x).unwrap() - &e[0].scale(2.0)).norm() <= 1e-14);
        assert!((&dec.stationary_part(&x).unwrap() - &e[1].scale(-3.0)).norm() <= 1e-14);
        assert_eq!(weak_unit_root_space(&OperatorSpec::spectral(vec![1.0, 0.2], e.clone()).unwrap(), TOL).unwrap().len(), 1);
    }

    #[test]
    fn no_unit_root_and_defective_errors() {
        let e = fourier_basis(&grid(), 2);
        let rho = OperatorSpec::spectral(vec![0.9, 0.5], e.clone()).unwrap();
        assert_eq!(decompose(&rho, TOL).unwrap_err(), Error::NoStrongUnitRoot);

        let jordan = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let rho: OperatorSpec = SeparableKernelOp::from_matrix(e, &jordan).unwrap().into();
        assert!(classify(&rho, TOL).unwrap().multiplicity_flag);
        assert_eq!(
            decompose(&rho, TOL).unwrap_err(),
            Error::DefectiveUnitRoot {
                algebraic: 2,
                geometric: 1
            }
        );
    }

    #[test]
    fn nonsymmetric_weak_space_differs_from_trend() {
        let e = fourier_basis(&grid(), 2);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.5]);
        let rho: OperatorSpec = SeparableKernelOp::from_matrix(e.clone(), &a).unwrap().into();
        // hand oracle: Ker(A − I) = (1, 0), Ker(Aᵀ − I) = (1, 2)/√5
        let dec = decompose(&rho, TOL).unwrap();
        let u = coords(&dec.trend_basis[0], &e);
        assert_abs_diff_eq!(u[0].abs(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(u[1], 0.0, epsilon = 1e-10);
        let w = weak_unit_root_space(&rho, TOL).unwrap();
        assert_eq!(w.len(), 1);
        let c = coords(&w[0], &e);
        let s = c[0].signum();
        assert_abs_diff_eq!(s * c[0], 1.0 / 5f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(s * c[1], 2.0 / 5f64.sqrt(), epsilon = 1e-10);
        // projection is oblique: Π_U ψ = -2 φ... along Ker(ℓ)
        let p = dec.trend_part(&e[1]).unwrap();
        let pc = coords(&p, &e);
        assert_abs_diff_eq!(pc[0], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(pc[1], 0.0, epsilon = 1e-10);
        assert!(dec.residual_commutation <= 1e-12);
        assert_abs_diff_eq!(dec.complement_radius, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn weak_space_needs_adjoint() {
        let rho = OperatorSpec::point_exp(0.0, grid()).unwrap();
        assert_eq!(weak_unit_root_space(&rho, TOL).unwrap_err(), Error::UnsupportedAdjoint);
        // the decomposition itself does not need the adjoint
        let dec = decompose(&rho, TOL).unwrap();
        assert_eq!(dec.dim_u, 1);
    }

    /// `A = S D S⁻¹` with `units` eigenvalues equal to 1, embedded on a random
    /// non-orthogonal range family of the given rank.
    fn engineered(rank: usize, units: usize, seed: u64) -> (OperatorSpec, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = grid();
        let e = fourier_basis(&d, rank);
        let mix = DMatrix::from_fn(rank, rank, |i, j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-0.4..0.4));
        let range: Vec<GridFunction> = (0..rank)
            .map(|j| linear_combination(&mix.column(j).iter().copied().collect::<Vec<_>>(), &e).unwrap())
            .collect();
        let s = DMatrix::from_fn(rank, rank, |i, j| if i == j { 2.0 } else { 0.0 } + rng.random_range(-1.0..1.0));
        let diag: Vec<f64> = (0..rank)
            .map(|i| if i < units { 1.0 } else { rng.random_range(-0.9..0.9) })
            .collect();
        let a = &s * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)) * s.clone().try_inverse().unwrap();
        let op = SeparableKernelOp::from_matrix(range, &a).unwrap();
        (op.into(), a)
    }

    #[test]
    fn engineered_rank_five_projection_algebra() {
        for seed in 0..5 {
            let (rho, a) = engineered(5, 1, seed);
            let dec = decompose(&rho, TOL).unwrap();
            let p = &dec.projection;
            let id = DMatrix::<f64>::identity(5, 5);
            // oracle on the constructed matrix rather than the stored reduction
            assert!((p * p - p).norm() <= 1e-10);
            assert!(((&id - p) * (&id - p) - (&id - p)).norm() <= 1e-10);
            assert!((p * (&id - p)).norm() <= 1e-10);
            assert!((p * &a - &a * p).norm() <= 1e-8);
            assert_abs_diff_eq!(p.trace(), 1.0, epsilon = 1e-10);
            assert!(dec.complement_radius < 1.0);
        }
    }

    #[test]
    fn split_paths_follow_random_walk() {
        let (rho, a) = engineered(4, 2, 11);
        let dec = decompose(&rho, TOL).unwrap();
        assert_eq!(dec.dim_u, 2);
        let _ = a;
        let e = fourier_basis(&grid(), 4);
        let noise = NoiseSpec::new(e, vec![1.0, 0.8, 0.6, 0.4], 5).unwrap();
        let model = FarModel::ar1(rho, noise).unwrap();
        let path = simulate_with(&model, 120, None, SimulateOptions { burn_in: Some(0), replication: 0 }).unwrap();
        let (u, s) = split_path(&dec, &path).unwrap();
        for n in 0..path.series.len() {
            let sum = &u.frames()[n] + &s.frames()[n];
            assert!((&sum - &path.series.frames()[n]).norm() <= 1e-10);
        }
        for n in 1..path.series.len() {
            let du = &u.frames()[n] - &u.frames()[n - 1];
            let pe = dec.trend_part(&path.innovations.frames()[n]).unwrap();
            assert!((&du - &pe).norm() <= 1e-8, "n={n}");
            // Π_S X_n = ρ Π_S X_{n−1} + Π_S ε_n
            let pred = &model.rho1().apply(&s.frames()[n - 1]).unwrap()
                + &dec.stationary_part(&path.innovations.frames()[n]).unwrap();
            assert!((&pred - &s.frames()[n]).norm() <= 1e-8, "n={n}");
        }
    }

    #[test]
    fn zero_noise_initial_in_one_part_stays_there() {
        let (rho, _) = fib();
        let dec = decompose(&rho, TOL).unwrap();
        let e = fourier_basis(&grid(), 2);
        let quiet = NoiseSpec::new(e.clone(), vec![0.0, 0.0], 0).unwrap();
        let model = FarModel::ar1(rho, quiet).unwrap();
        let opts = SimulateOptions { burn_in: Some(0), replication: 0 };

        let path = simulate_with(&model, 30, Some(&dec.trend_basis[0]), opts).unwrap();
        let (_, s) = split_path(&dec, &path).unwrap();
        assert!(s.frames().iter().all(|f| f.norm() <= 1e-12));

        let c = dec.stationary_part(&e[0]).unwrap();
        let path = simulate_with(&model, 30, Some(&c), opts).unwrap();
        let (u, _) = split_path(&dec, &path).unwrap();
        assert!(u.frames().iter().all(|f| f.norm() <= 1e-12));
    }

    #[test]
    fn weak_root_scores_are_exact_random_walks() {
        let e = fourier_basis(&grid(), 2);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 0.5]);
        let rho: OperatorSpec = SeparableKernelOp::from_matrix(e.clone(), &a).unwrap().into();
        let w = weak_unit_root_space(&rho, TOL).unwrap().remove(0);
        let model = FarModel::ar1(rho, NoiseSpec::new(e, vec![1.0, 1.0], 2).unwrap()).unwrap();
        let path = simulate_with(&model, 200, None, SimulateOptions { burn_in: Some(0), replication: 0 }).unwrap();
        for n in 1..200 {
            let lhs = inner_product(&path.series.frames()[n], &w).unwrap();
            let rhs = inner_product(&path.series.frames()[n - 1], &w).unwrap()
                + inner_product(&path.innovations.frames()[n], &w).unwrap();
            assert!((lhs - rhs).abs() <= 1e-8);
        }
    }

    #[test]
    fn split_rejects_foreign_grid() {
        let (rho, _) = fib();
        let dec = decompose(&rho, TOL).unwrap();
        let other = GridFunction::zeros(GridDomain::uniform(51).unwrap().into_shared());
        assert_eq!(dec.trend_part(&other).unwrap_err(), Error::DomainMismatch);
    }

    fn ar2(l1: Vec<f64>, f1: Vec<GridFunction>, l2: Vec<f64>, f2: Vec<GridFunction>) -> FarModel {
        let e = fourier_basis(&grid(), 2);
        FarModel::ar2(
            OperatorSpec::spectral(l1, f1).unwrap(),
            OperatorSpec::spectral(l2, f2).unwrap(),
            NoiseSpec::new(e, vec![1.0, 1.0], 0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn ar2_examples() {
        let e = fourier_basis(&grid(), 2);
        let alpha = golden_unit_root_coupling::<f64>();
        let r = ar2_unit_root_check(&ar2(vec![alpha], vec![e[0].clone()], vec![alpha * alpha], vec![e[0].clone()]), TOL).unwrap();
        assert_eq!(r.eligible_pairs.len(), 1);
        assert_eq!(r.total_trends, 1);
        assert_eq!(r.conditions_met, [true, true, true]);
        // scalar characteristic polynomial z² − αz − α² has the root 1
        assert_abs_diff_eq!(r.companion_radius, 1.0, epsilon = 1e-9);

        let r = ar2_unit_root_check(&ar2(vec![0.5], vec![e[0].clone()], vec![0.5], vec![e[1].clone()]), TOL).unwrap();
        assert_eq!(r.eligible_pairs.len(), 1);
        assert_eq!(r.total_trends, 0);
        assert_eq!(r.conditions_met, [true, true, false]);

        let r = ar2_unit_root_check(&ar2(vec![0.3], vec![e[0].clone()], vec![0.3], vec![e[0].clone()]), TOL).unwrap();
        assert!(r.eligible_pairs.is_empty());
        assert_eq!(r.total_trends, 0);
    }

    #[test]
    fn ar2_unit_root_with_vanishing_second_lag() {
        let e = fourier_basis(&grid(), 2);
        // ρ₂ acts only on e₂, so e₁ ∈ Ker ρ₂* and λ₁ = 1 pairs with λ₂ = 0
        let r = ar2_unit_root_check(&ar2(vec![1.0], vec![e[0].clone()], vec![0.2], vec![e[1].clone()]), TOL).unwrap();
        assert_eq!(r.total_trends, 1);
        let r = ar2_unit_root_check(&ar2(vec![1.0], vec![e[0].clone()], vec![0.2], vec![e[0].clone()]), TOL).unwrap();
        assert_eq!(r.total_trends, 0);
    }

    #[test]
    fn ar2_check_rejects_order_one_and_pointexp() {
        let (rho, e) = fib();
        let m = FarModel::ar1(rho, NoiseSpec::new(e.clone(), vec![1.0, 1.0], 0).unwrap()).unwrap();
        assert!(ar2_unit_root_check(&m, TOL).is_err());
        let ou = OperatorSpec::point_exp(0.0, grid()).unwrap();
        let m = FarModel::ar2(ou.clone(), ou, NoiseSpec::new(e, vec![1.0, 1.0], 0).unwrap()).unwrap();
        assert_eq!(ar2_unit_root_check(&m, TOL).unwrap_err(), Error::UnsupportedAdjoint);
    }

    #[test]
    fn decomposition_report_serialises() {
        let (rho, _) = fib();
        let json = serde_json::to_value(decompose(&rho, TOL).unwrap().report()).unwrap();
        assert_eq!(json["dim_u"], 1);
        assert_eq!(json["spectrum"]["unit_set"], serde_json::json!([0]));
        assert!(json["trend_basis"][0]["values"].is_array());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn constructed_multiplicity_is_recovered(rank in 2usize..=8, units in 1usize..=3, seed in 0u64..10_000) {
            prop_assume!(units <= rank);
            let (rho, a) = engineered(rank, units, seed);
            let spec = classify(&rho, TOL).unwrap();
            prop_assume!(spec.unit_set.len() == units);
            let dec = decompose(&rho, TOL).unwrap();
            prop_assert_eq!(dec.dim_u, units);
            prop_assert!(dec.idempotency_residual <= 1e-10);
            let p = &dec.projection;
            prop_assert!((p * &a - &a * p).norm() <= 1e-8);
            prop_assert!(dec.complement_radius < 1.0);
            for u in &dec.trend_basis {
                prop_assert!((&rho.apply(u).unwrap() - u).norm() <= 1e-8);
            }
        }

        #[test]
        fn self_adjoint_trends_are_weak_roots(units in 1usize..=3, tail in proptest::collection::vec(-0.9f64..0.9, 1..4)) {
            let e = fourier_basis(&grid(), units + tail.len());
            let mut l = vec![1.0; units];
            l.extend(tail);
            let rho = OperatorSpec::spectral(l, e).unwrap();
            let dec = decompose(&rho, TOL).unwrap();
            for v in &dec.trend_basis {
                prop_assert!((&rho.adjoint_apply(v).unwrap() - v).norm() <= 1e-6);
            }
        }
    }
}
