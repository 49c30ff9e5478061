//! Finite-rank operators on the grid space.
//!
//! Three families are supported, all of rank at most a few dozen:
//!
//! * [`SeparableKernelOp`]: the integral operator with kernel
//!   `K(s,t) = Σ a_i(s) b_i(t)`, i.e. `ρ(v) = Σ <b_i, v> a_i`.
//! * [`SpectralOp`]: `ρ = Σ λ_j <φ_j, ·> φ_j` for an orthonormal family.
//! * [`PointEvalExpOp`]: `ρ(v)(t) = e^{-θt} v(1)`.
//!
//! Each reduces exactly to a small matrix acting on coefficients in the
//! operator's range basis, and the nonzero spectrum of the operator is the
//! spectrum of that matrix. The zero eigenvalue of infinite multiplicity is
//! never reported.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::funcspace::{inner_product, linear_combination, orthonormalize, GridDomain, GridFunction};
use crate::linalg;
use crate::{Error, Real, Result};

/// Default eigenvalue tolerance for analytically specified operators.
pub const DEFAULT_EIGEN_TOL: f64 = 1e-8;

/// Tolerance used when checking orthonormality of user-supplied families.
pub(crate) fn orthonormality_tol<T: Real>() -> T {
    T::lit(1e-8).max(T::default_epsilon() * T::lit(100.0))
}

/// Relative threshold below which Gram–Schmidt discards a vector.
pub(crate) fn rank_drop_tol<T: Real>() -> T {
    T::default_epsilon().sqrt()
}

/// Checks `|<φ_i, φ_j> - δ_ij| <= tol` for all pairs.
pub fn check_orthonormal<T: Real>(fs: &[GridFunction<T>], tol: T) -> Result<()> {
    for i in 0..fs.len() {
        for j in i..fs.len() {
            let ip = inner_product(&fs[i], &fs[j])?;
            let expect = if i == j { T::one() } else { T::zero() };
            if (ip - expect).abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "family is not orthonormal: <f_{i}, f_{j}> = {ip}"
                )));
            }
        }
    }
    Ok(())
}

fn check_shared_domain<T: Real>(fs: &[&GridFunction<T>]) -> Result<()> {
    if let Some((first, rest)) = fs.split_first() {
        for f in rest {
            first.check_domain(f)?;
        }
    }
    Ok(())
}

/// `ρ(v) = Σ_i <b_i, v> a_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "SeparableRepr<T>", into = "SeparableRepr<T>")]
pub struct SeparableKernelOp<T: Real = f64> {
    a: Vec<GridFunction<T>>,
    b: Vec<GridFunction<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct SeparableRepr<T: Real> {
    a: Vec<GridFunction<T>>,
    b: Vec<GridFunction<T>>,
}

impl<T: Real> TryFrom<SeparableRepr<T>> for SeparableKernelOp<T> {
    type Error = Error;

    fn try_from(r: SeparableRepr<T>) -> Result<Self> {
        Self::new(r.a, r.b)
    }
}

impl<T: Real> From<SeparableKernelOp<T>> for SeparableRepr<T> {
    fn from(op: SeparableKernelOp<T>) -> Self {
        Self { a: op.a, b: op.b }
    }
}

impl<T: Real> SeparableKernelOp<T> {
    /// Range factors `a` and integration factors `b`, paired by index.
    pub fn new(a: Vec<GridFunction<T>>, b: Vec<GridFunction<T>>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInput(
                "separable kernel needs at least one term".into(),
            ));
        }
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        let all: Vec<&GridFunction<T>> = a.iter().chain(b.iter()).collect();
        check_shared_domain(&all)?;
        Ok(Self { a, b })
    }

    /// The operator whose reduction on the (linearly independent) `range`
    /// family is exactly `matrix`: `b_i = Σ_m C_im a_m` with `C = M G⁻¹`,
    /// `G` the Gram matrix of `range`.
    pub fn from_matrix(range: Vec<GridFunction<T>>, matrix: &DMatrix<T>) -> Result<Self> {
        let n = range.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: matrix.nrows(),
            });
        }
        let gram = linalg::gram(&range)?;
        let gram_inv = gram.try_inverse().ok_or_else(|| {
            Error::InvalidInput("range family is linearly dependent".into())
        })?;
        let c = matrix * gram_inv;
        let b = (0..n)
            .map(|i| {
                let coeffs: Vec<T> = c.row(i).iter().copied().collect();
                linear_combination(&coeffs, &range)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(range, b)
    }

    pub fn range_factors(&self) -> &[GridFunction<T>] {
        &self.a
    }

    pub fn integration_factors(&self) -> &[GridFunction<T>] {
        &self.b
    }

    pub fn rank_bound(&self) -> usize {
        self.a.len()
    }

    /// Same operator with the `(a_i, b_i)` pairs reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.a.len() {
            return Err(Error::LengthMismatch {
                expected: self.a.len(),
                got: perm.len(),
            });
        }
        let a = perm.iter().map(|&i| self.a[i].clone()).collect();
        let b = perm.iter().map(|&i| self.b[i].clone()).collect();
        Self::new(a, b)
    }
}

/// `ρ = Σ_j λ_j <φ_j, ·> φ_j` with an orthonormal family `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "SpectralRepr<T>", into = "SpectralRepr<T>")]
pub struct SpectralOp<T: Real = f64> {
    eigenvalues: Vec<T>,
    eigenfunctions: Vec<GridFunction<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct SpectralRepr<T: Real> {
    eigenvalues: Vec<T>,
    eigenfunctions: Vec<GridFunction<T>>,
}

impl<T: Real> TryFrom<SpectralRepr<T>> for SpectralOp<T> {
    type Error = Error;

    fn try_from(r: SpectralRepr<T>) -> Result<Self> {
        Self::new(r.eigenvalues, r.eigenfunctions)
    }
}

impl<T: Real> From<SpectralOp<T>> for SpectralRepr<T> {
    fn from(op: SpectralOp<T>) -> Self {
        Self {
            eigenvalues: op.eigenvalues,
            eigenfunctions: op.eigenfunctions,
        }
    }
}

impl<T: Real> SpectralOp<T> {
    pub fn new(eigenvalues: Vec<T>, eigenfunctions: Vec<GridFunction<T>>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidInput(
                "spectral operator needs at least one eigenvalue".into(),
            ));
        }
        if eigenvalues.len() != eigenfunctions.len() {
            return Err(Error::LengthMismatch {
                expected: eigenvalues.len(),
                got: eigenfunctions.len(),
            });
        }
        if eigenvalues.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidInput("eigenvalues must be finite".into()));
        }
        let refs: Vec<&GridFunction<T>> = eigenfunctions.iter().collect();
        check_shared_domain(&refs)?;
        check_orthonormal(&eigenfunctions, orthonormality_tol())?;
        Ok(Self {
            eigenvalues,
            eigenfunctions,
        })
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenfunctions(&self) -> &[GridFunction<T>] {
        &self.eigenfunctions
    }
}

/// `ρ(v)(t) = e^{-θt} v(1)`; `v(1)` is the value at the last grid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "PointExpRepr<T>", into = "PointExpRepr<T>")]
pub struct PointEvalExpOp<T: Real = f64> {
    theta: T,
    domain: Arc<GridDomain<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct PointExpRepr<T: Real> {
    theta: T,
    nodes: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<T>>,
}

impl<T: Real> TryFrom<PointExpRepr<T>> for PointEvalExpOp<T> {
    type Error = Error;

    fn try_from(r: PointExpRepr<T>) -> Result<Self> {
        let domain = match r.weights {
            Some(w) => GridDomain::with_weights(r.nodes, w)?,
            None => GridDomain::trapezoid(r.nodes)?,
        };
        Self::new(r.theta, Arc::new(domain))
    }
}

impl<T: Real> From<PointEvalExpOp<T>> for PointExpRepr<T> {
    fn from(op: PointEvalExpOp<T>) -> Self {
        let weights = (!op.domain.is_trapezoid()).then(|| op.domain.weights().to_vec());
        Self {
            theta: op.theta,
            nodes: op.domain.nodes().to_vec(),
            weights,
        }
    }
}

impl<T: Real> PointEvalExpOp<T> {
    pub fn new(theta: T, domain: Arc<GridDomain<T>>) -> Result<Self> {
        if !theta.is_finite() || theta < T::zero() {
            return Err(Error::InvalidInput(format!(
                "decay rate must be finite and non-negative, got {theta}"
            )));
        }
        if !domain.includes_one() {
            return Err(Error::InvalidInput(
                "point evaluation at t = 1 needs a grid whose last node is 1".into(),
            ));
        }
        Ok(Self { theta, domain })
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn domain(&self) -> &Arc<GridDomain<T>> {
        &self.domain
    }

    /// The range function `e^{-θt}`.
    pub fn profile(&self) -> GridFunction<T> {
        let theta = self.theta;
        let values = self
            .domain
            .nodes()
            .iter()
            .map(|&t| (-theta * t).exp())
            .collect();
        GridFunction::from_raw(self.domain.clone(), values)
    }

    /// Grid representer of evaluation at the last node: `<δ, v> = v(1)` up to
    /// rounding.
    fn evaluation_representer(&self) -> GridFunction<T> {
        let n = self.domain.len();
        let mut values = vec![T::zero(); n];
        values[n - 1] = T::one() / self.domain.weights()[n - 1];
        GridFunction::from_raw(self.domain.clone(), values)
    }
}

/// Shape of a [`MatrixReduction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionKind {
    Companion,
    Diagonal,
    Scalar,
}

/// The matrix of `ρ` on coefficient vectors in `range_basis`:
/// `ρ(Σ V_j f_j) = Σ_i (A V)_i f_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixReduction<T: Real = f64> {
    pub matrix: DMatrix<T>,
    pub range_basis: Vec<GridFunction<T>>,
    pub kind: ReductionKind,
}

impl<T: Real> MatrixReduction<T> {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix_rows(&self) -> Vec<Vec<T>> {
        linalg::to_rows(&self.matrix)
    }

    /// `Σ V_i f_i` over the range basis.
    pub fn function_from_coefficients(&self, coeffs: &[T]) -> Result<GridFunction<T>> {
        linear_combination(coeffs, &self.range_basis)
    }
}

/// `ρ(v) = Σ_i <corange_i, v> range_i` with `A_ij = <corange_i, range_j>`.
#[derive(Debug, Clone)]
pub(crate) struct Factors<T: Real> {
    pub range: Vec<GridFunction<T>>,
    pub corange: Vec<GridFunction<T>>,
}

/// A compact autoregression operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", tag = "kind")]
pub enum OperatorSpec<T: Real = f64> {
    #[serde(rename = "separable")]
    Separable(SeparableKernelOp<T>),
    #[serde(rename = "spectral")]
    Spectral(SpectralOp<T>),
    #[serde(rename = "pointexp")]
    PointExp(PointEvalExpOp<T>),
}

impl<T: Real> From<SeparableKernelOp<T>> for OperatorSpec<T> {
    fn from(op: SeparableKernelOp<T>) -> Self {
        OperatorSpec::Separable(op)
    }
}

impl<T: Real> From<SpectralOp<T>> for OperatorSpec<T> {
    fn from(op: SpectralOp<T>) -> Self {
        OperatorSpec::Spectral(op)
    }
}

impl<T: Real> From<PointEvalExpOp<T>> for OperatorSpec<T> {
    fn from(op: PointEvalExpOp<T>) -> Self {
        OperatorSpec::PointExp(op)
    }
}

/// `(√5 − 1)/2`, the coupling at which [`OperatorSpec::fibonacci`] has the
/// eigenvalue 1 (it solves `α + α² = 1`).
pub fn golden_unit_root_coupling<T: Real>() -> T {
    (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0)
}

impl<T: Real> OperatorSpec<T> {
    /// `ρ(v) = α(<v,e₁> + <v,e₂>) e₁ + α <v,e₁> e₂` for an orthonormal pair.
    /// Its powers applied to noise along `e₁` follow the Fibonacci numbers,
    /// and its reduction on `{e₁, e₂}` is `[[α, α], [α, 0]]`.
    pub fn fibonacci(alpha: T, e1: GridFunction<T>, e2: GridFunction<T>) -> Result<Self> {
        check_orthonormal(&[e1.clone(), e2.clone()], orthonormality_tol())?;
        let b1 = e1.try_add(&e2)?.scale(alpha);
        let b2 = e1.scale(alpha);
        Ok(SeparableKernelOp::new(vec![e1, e2], vec![b1, b2])?.into())
    }

    /// `Σ λ_j P_j` for an orthonormal family.
    pub fn spectral(eigenvalues: Vec<T>, eigenfunctions: Vec<GridFunction<T>>) -> Result<Self> {
        Ok(SpectralOp::new(eigenvalues, eigenfunctions)?.into())
    }

    pub fn point_exp(theta: T, domain: Arc<GridDomain<T>>) -> Result<Self> {
        Ok(PointEvalExpOp::new(theta, domain)?.into())
    }

    pub fn domain(&self) -> &Arc<GridDomain<T>> {
        match self {
            OperatorSpec::Separable(op) => op.a[0].domain(),
            OperatorSpec::Spectral(op) => op.eigenfunctions[0].domain(),
            OperatorSpec::PointExp(op) => &op.domain,
        }
    }

    fn check_arg(&self, v: &GridFunction<T>) -> Result<()> {
        if crate::funcspace::same_grid(self.domain(), v.domain()) {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    pub fn apply(&self, v: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.check_arg(v)?;
        match self {
            OperatorSpec::Separable(op) => {
                let mut out = GridFunction::zeros(v.domain().clone());
                for (a, b) in op.a.iter().zip(&op.b) {
                    out.axpy(inner_product(b, v)?, a)?;
                }
                Ok(out)
            }
            OperatorSpec::Spectral(op) => {
                let mut out = GridFunction::zeros(v.domain().clone());
                for (&l, phi) in op.eigenvalues.iter().zip(&op.eigenfunctions) {
                    out.axpy(l * inner_product(phi, v)?, phi)?;
                }
                Ok(out)
            }
            OperatorSpec::PointExp(op) => Ok(op.profile().scale(v.value_at_end())),
        }
    }

    /// `ρ*(v)`. Fails for [`PointEvalExpOp`], whose adjoint maps into point
    /// masses at `t = 1`.
    pub fn adjoint_apply(&self, v: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.check_arg(v)?;
        match self {
            OperatorSpec::Separable(op) => {
                let mut out = GridFunction::zeros(v.domain().clone());
                for (a, b) in op.a.iter().zip(&op.b) {
                    out.axpy(inner_product(a, v)?, b)?;
                }
                Ok(out)
            }
            OperatorSpec::Spectral(_) => self.apply(v),
            OperatorSpec::PointExp(_) => Err(Error::UnsupportedAdjoint),
        }
    }

    pub fn has_representable_adjoint(&self) -> bool {
        !matches!(self, OperatorSpec::PointExp(_))
    }

    pub(crate) fn factors(&self) -> Factors<T> {
        match self {
            OperatorSpec::Separable(op) => Factors {
                range: op.a.clone(),
                corange: op.b.clone(),
            },
            OperatorSpec::Spectral(op) => Factors {
                range: op.eigenfunctions.clone(),
                corange: op
                    .eigenvalues
                    .iter()
                    .zip(&op.eigenfunctions)
                    .map(|(&l, phi)| phi.scale(l))
                    .collect(),
            },
            OperatorSpec::PointExp(op) => Factors {
                range: vec![op.profile()],
                corange: vec![op.evaluation_representer()],
            },
        }
    }

    pub fn matrix_reduction(&self) -> Result<MatrixReduction<T>> {
        Ok(match self {
            OperatorSpec::Separable(op) => MatrixReduction {
                // γ_ij = <b_i, a_j>
                matrix: linalg::cross(&op.b, &op.a)?,
                range_basis: op.a.clone(),
                kind: ReductionKind::Companion,
            },
            OperatorSpec::Spectral(op) => MatrixReduction {
                matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(op.eigenvalues.clone())),
                range_basis: op.eigenfunctions.clone(),
                kind: ReductionKind::Diagonal,
            },
            OperatorSpec::PointExp(op) => MatrixReduction {
                matrix: DMatrix::from_element(1, 1, (-op.theta).exp()),
                range_basis: vec![op.profile()],
                kind: ReductionKind::Scalar,
            },
        })
    }

    /// Nonzero spectrum through the matrix reduction, sorted by descending
    /// modulus, then descending real part.
    pub fn spectrum(&self) -> Result<Vec<Complex<T>>> {
        let red = self.matrix_reduction()?;
        let mut values = match red.kind {
            ReductionKind::Diagonal | ReductionKind::Scalar => red
                .matrix
                .diagonal()
                .iter()
                .map(|&l| Complex::new(l, T::zero()))
                .collect(),
            ReductionKind::Companion => linalg::eigenvalues(&red.matrix)?,
        };
        linalg::sort_spectrum(&mut values);
        Ok(values)
    }

    pub fn spectral_radius(&self) -> Result<T> {
        Ok(self
            .spectrum()?
            .iter()
            .map(|&z| linalg::modulus(z))
            .fold(T::zero(), |acc, r| acc.max(r)))
    }

    /// `p(z) = det(I − zρ) = Π_n (1 − λ_n z)`.
    pub fn fredholm_determinant(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(fredholm_from_spectrum(&self.spectrum()?, z))
    }

    /// Orthonormal basis of the eigenspace of `ρ` at `lambda`, built from
    /// coefficient vectors `V` with `(A − λI)V = 0` within `tol`. For a
    /// non-real `lambda` the real and imaginary parts of the complex
    /// eigenfunctions are returned, spanning the real invariant subspace.
    /// Returns an empty list when `lambda` is not an eigenvalue.
    pub fn eigenspace(&self, lambda: Complex<T>, tol: T) -> Result<Vec<GridFunction<T>>> {
        if tol <= T::zero() {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        let red = self.matrix_reduction()?;
        let coeffs = eigen_coefficients(&red.matrix, lambda, tol)?;
        combine_and_orthonormalize(&coeffs, &red.range_basis)
    }
}

pub(crate) fn fredholm_from_spectrum<T: Real>(spectrum: &[Complex<T>], z: Complex<T>) -> Complex<T> {
    let one = Complex::new(T::one(), T::zero());
    // a factor within a few ulps of zero is a root: the eigenvalue itself is
    // only known to that accuracy, and the rounding residue would otherwise
    // be amplified by the remaining factors
    let floor = T::default_epsilon() * T::lit(4.0);
    spectrum.iter().fold(one, |acc, &l| {
        let f = one - l * z;
        if linalg::modulus(f) <= floor {
            Complex::new(T::zero(), T::zero())
        } else {
            acc * f
        }
    })
}

/// Real coefficient vectors spanning the (real form of the) kernel of
/// `A − λI`.
pub(crate) fn eigen_coefficients<T: Real>(a: &DMatrix<T>, lambda: Complex<T>, tol: T) -> Result<Vec<Vec<T>>> {
    let n = a.nrows();
    if lambda.im.abs() <= tol {
        let shifted = a - DMatrix::identity(n, n) * lambda.re;
        let ns = linalg::null_space(&shifted, tol)?;
        return Ok(ns.column_iter().map(|c| c.iter().copied().collect()).collect());
    }
    // (A − aI)x + b y = 0, (A − aI)y − b x = 0 for V = x + iy, λ = a + ib
    let shifted = a - DMatrix::identity(n, n) * lambda.re;
    let mut big = DMatrix::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(&shifted);
    big.view_mut((n, n), (n, n)).copy_from(&shifted);
    big.view_mut((0, n), (n, n)).copy_from(&(DMatrix::identity(n, n) * lambda.im));
    big.view_mut((n, 0), (n, n)).copy_from(&(DMatrix::identity(n, n) * (-lambda.im)));
    let ns = linalg::null_space(&big, tol)?;
    let mut out = Vec::new();
    for c in ns.column_iter() {
        out.push(c.rows(0, n).iter().copied().collect());
        out.push(c.rows(n, n).iter().copied().collect());
    }
    Ok(out)
}

pub(crate) fn combine_and_orthonormalize<T: Real>(
    coeffs: &[Vec<T>],
    basis: &[GridFunction<T>],
) -> Result<Vec<GridFunction<T>>> {
    let fs = coeffs
        .iter()
        .map(|c| linear_combination(c, basis))
        .collect::<Result<Vec<_>>>()?;
    orthonormalize(&fs, rank_drop_tol())
}
