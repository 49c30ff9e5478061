//! Discretised `L²([0,1])`: functions sampled at quadrature nodes.
//!
//! A [`GridDomain`] carries the nodes and quadrature weights; grid functions
//! share it through an [`Arc`]. Two functions are compatible when their
//! domains are the same allocation or have identical node and weight vectors.
//! There is no resampling between grids.

use std::ops::{Add, Sub};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Real, Result};

/// Number of nodes of the default uniform grid.
pub const DEFAULT_GRID_SIZE: usize = 101;

/// Quadrature nodes in `[0,1]` with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain<T: Real = f64> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GridDomain<T> {
    /// Composite trapezoid rule on `n` equispaced nodes spanning `[0,1]`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "a grid needs at least 2 nodes, got {n}"
            )));
        }
        let step = T::one() / T::from_usize(n - 1).unwrap();
        let mut nodes: Vec<T> = (0..n).map(|k| T::from_usize(k).unwrap() * step).collect();
        // pin the end point so point evaluation at 1 is exact
        nodes[n - 1] = T::one();
        Self::trapezoid(nodes)
    }

    /// Composite trapezoid rule on the given nodes.
    pub fn trapezoid(nodes: Vec<T>) -> Result<Self> {
        let weights = trapezoid_weights(&nodes)?;
        Self::with_weights(nodes, weights)
    }

    /// Arbitrary positive weights on the given nodes.
    pub fn with_weights(nodes: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a grid needs at least 2 nodes, got {}",
                nodes.len()
            )));
        }
        if weights.len() != nodes.len() {
            return Err(Error::LengthMismatch {
                expected: nodes.len(),
                got: weights.len(),
            });
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("grid nodes must be finite".into()));
        }
        if nodes[0] < T::zero() || nodes[nodes.len() - 1] > T::one() {
            return Err(Error::InvalidInput("grid nodes must lie in [0, 1]".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "grid nodes must be strictly increasing".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= T::zero()) {
            return Err(Error::InvalidInput(
                "quadrature weights must be finite and positive".into(),
            ));
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// True when the weights are the trapezoid weights of the nodes.
    pub fn is_trapezoid(&self) -> bool {
        trapezoid_weights(&self.nodes).is_ok_and(|w| w == self.weights)
    }

    /// True when the last node is exactly 1.
    pub fn includes_one(&self) -> bool {
        self.nodes[self.nodes.len() - 1] == T::one()
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }
}

fn trapezoid_weights<T: Real>(nodes: &[T]) -> Result<Vec<T>> {
    let n = nodes.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "a grid needs at least 2 nodes, got {n}"
        )));
    }
    let half = T::lit(0.5);
    let mut w = vec![T::zero(); n];
    for k in 0..n - 1 {
        let h = (nodes[k + 1] - nodes[k]) * half;
        w[k] += h;
        w[k + 1] += h;
    }
    Ok(w)
}

/// Same allocation, or identical nodes and weights.
pub fn same_grid<T: Real>(a: &Arc<GridDomain<T>>, b: &Arc<GridDomain<T>>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A function on `[0,1]` given by its values at the nodes of a grid.
#[derive(Debug, Clone)]
pub struct GridFunction<T: Real = f64> {
    domain: Arc<GridDomain<T>>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(domain: Arc<GridDomain<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::LengthMismatch {
                expected: domain.len(),
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite function value at node {k}"
            )));
        }
        Ok(Self { domain, values })
    }

    /// Samples `f` at the nodes.
    pub fn from_fn(domain: Arc<GridDomain<T>>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = domain.nodes().iter().map(|&s| f(s)).collect();
        Self::new(domain, values)
    }

    pub fn zeros(domain: Arc<GridDomain<T>>) -> Self {
        let values = vec![T::zero(); domain.len()];
        Self { domain, values }
    }

    pub fn constant(domain: Arc<GridDomain<T>>, c: T) -> Self {
        let values = vec![c; domain.len()];
        Self { domain, values }
    }

    pub(crate) fn from_raw(domain: Arc<GridDomain<T>>, values: Vec<T>) -> Self {
        debug_assert_eq!(domain.len(), values.len());
        Self { domain, values }
    }

    pub fn domain(&self) -> &Arc<GridDomain<T>> {
        &self.domain
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Value at the last node (the point `t = 1` on grids that include it).
    pub fn value_at_end(&self) -> T {
        self.values[self.values.len() - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn same_domain(&self, other: &Self) -> bool {
        same_grid(&self.domain, &other.domain)
    }

    pub fn check_domain(&self, other: &Self) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    pub fn inner(&self, other: &Self) -> Result<T> {
        inner_product(self, other)
    }

    pub fn norm(&self) -> T {
        norm(self)
    }

    pub fn scale(&self, c: T) -> Self {
        let values = self.values.iter().map(|&v| v * c).collect();
        Self::from_raw(self.domain.clone(), values)
    }

    /// `self + c * other`, in place.
    pub fn axpy(&mut self, c: T, other: &Self) -> Result<()> {
        self.check_domain(other)?;
        for (v, &o) in self.values.iter_mut().zip(&other.values) {
            *v += c * o;
        }
        Ok(())
    }

    /// Pointwise `self - other`.
    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_domain(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(Self::from_raw(self.domain.clone(), values))
    }

    /// Pointwise `self + other`.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_domain(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Self::from_raw(self.domain.clone(), values))
    }
}

impl<T: Real> PartialEq for GridFunction<T> {
    fn eq(&self, other: &Self) -> bool {
        self.same_domain(other) && self.values == other.values
    }
}

/// Panics on a domain mismatch; use [`GridFunction::try_add`] otherwise.
impl<T: Real> Add for &GridFunction<T> {
    type Output = GridFunction<T>;

    fn add(self, rhs: Self) -> GridFunction<T> {
        self.try_add(rhs).expect("adding functions on different grids")
    }
}

/// Panics on a domain mismatch; use [`GridFunction::try_sub`] otherwise.
impl<T: Real> Sub for &GridFunction<T> {
    type Output = GridFunction<T>;

    fn sub(self, rhs: Self) -> GridFunction<T> {
        self.try_sub(rhs).expect("subtracting functions on different grids")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct GridFunctionRepr<T: Real> {
    nodes: Vec<T>,
    values: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<T>>,
}

impl<T: Real> Serialize for GridFunction<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let weights = if self.domain.is_trapezoid() {
            None
        } else {
            Some(self.domain.weights.clone())
        };
        GridFunctionRepr {
            nodes: self.domain.nodes.clone(),
            values: self.values.clone(),
            weights,
        }
        .serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for GridFunction<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = GridFunctionRepr::<T>::deserialize(deserializer)?;
        let domain = match repr.weights {
            Some(w) => GridDomain::with_weights(repr.nodes, w),
            None => GridDomain::trapezoid(repr.nodes),
        }
        .map_err(serde::de::Error::custom)?;
        GridFunction::new(Arc::new(domain), repr.values).map_err(serde::de::Error::custom)
    }
}

/// Quadrature inner product `Σ_k w_k f_k g_k`.
pub fn inner_product<T: Real>(f: &GridFunction<T>, g: &GridFunction<T>) -> Result<T> {
    f.check_domain(g)?;
    Ok(weighted_dot(f.domain.weights(), &f.values, &g.values))
}

pub(crate) fn weighted_dot<T: Real>(w: &[T], f: &[T], g: &[T]) -> T {
    w.iter()
        .zip(f)
        .zip(g)
        .fold(T::zero(), |acc, ((&w, &a), &b)| acc + w * a * b)
}

pub fn norm<T: Real>(f: &GridFunction<T>) -> T {
    weighted_dot(f.domain.weights(), &f.values, &f.values).sqrt()
}

/// Pointwise `Σ c_i f_i`.
pub fn linear_combination<T: Real>(coeffs: &[T], fs: &[GridFunction<T>]) -> Result<GridFunction<T>> {
    if fs.is_empty() {
        return Err(Error::InvalidInput(
            "linear combination of an empty family".into(),
        ));
    }
    if coeffs.len() != fs.len() {
        return Err(Error::LengthMismatch {
            expected: fs.len(),
            got: coeffs.len(),
        });
    }
    let mut out = GridFunction::zeros(fs[0].domain.clone());
    for (&c, f) in coeffs.iter().zip(fs) {
        out.axpy(c, f)?;
    }
    Ok(out)
}

/// Orthonormalises `fs` by modified Gram–Schmidt with one re-orthogonalisation
/// pass. Vectors whose residual norm drops below `drop_tol` times their
/// original norm (or below `drop_tol` absolutely) are discarded, so the output
/// spans the same space with length equal to its numerical rank.
pub fn orthonormalize<T: Real>(fs: &[GridFunction<T>], drop_tol: T) -> Result<Vec<GridFunction<T>>> {
    let mut basis: Vec<GridFunction<T>> = Vec::with_capacity(fs.len());
    for f in fs {
        if let Some(b) = basis.first() {
            f.check_domain(b)?;
        }
        let original = f.norm();
        let mut v = f.clone();
        for _pass in 0..2 {
            for q in &basis {
                let c = inner_product(q, &v)?;
                v.axpy(-c, q)?;
            }
        }
        let n = v.norm();
        if n <= drop_tol * original.max(T::one()) || n == T::zero() {
            continue;
        }
        basis.push(v.scale(T::one() / n));
    }
    Ok(basis)
}

/// Orthonormal trigonometric family `√2 sin(2πks)`, `√2 cos(2πks)`,
/// `k = 1, 2, …`, truncated to `count` functions. On a uniform trapezoid grid
/// with more than `2·count` intervals the family is orthonormal to rounding.
pub fn fourier_basis<T: Real>(domain: &Arc<GridDomain<T>>, count: usize) -> Vec<GridFunction<T>> {
    let two_pi = T::two_pi();
    let root2 = T::lit(2.0).sqrt();
    (0..count)
        .map(|j| {
            let k = T::from_usize(j / 2 + 1).unwrap();
            let values = domain
                .nodes()
                .iter()
                .map(|&s| {
                    let arg = two_pi * k * s;
                    root2 * if j % 2 == 0 { arg.sin() } else { arg.cos() }
                })
                .collect();
            GridFunction::from_raw(domain.clone(), values)
        })
        .collect()
}

/// A time-indexed sequence of functions on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSeries<T: Real = f64> {
    domain: Arc<GridDomain<T>>,
    frames: Vec<GridFunction<T>>,
}

impl<T: Real> FunctionSeries<T> {
    pub fn new(frames: Vec<GridFunction<T>>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidInput("a function series needs at least one frame".into()))?;
        let domain = first.domain.clone();
        for f in &frames[1..] {
            if !same_grid(&domain, &f.domain) {
                return Err(Error::DomainMismatch);
            }
        }
        Ok(Self { domain, frames })
    }

    /// Builds a series from rows of grid values.
    pub fn from_rows(domain: Arc<GridDomain<T>>, rows: Vec<Vec<T>>) -> Result<Self> {
        let frames = rows
            .into_iter()
            .map(|r| GridFunction::new(domain.clone(), r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(frames)
    }

    pub fn domain(&self) -> &Arc<GridDomain<T>> {
        &self.domain
    }

    pub fn frames(&self) -> &[GridFunction<T>] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<GridFunction<T>> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn get(&self, n: usize) -> Option<&GridFunction<T>> {
        self.frames.get(n)
    }

    /// Frames `range` as a new series.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        Self::new(self.frames[range].to_vec())
    }

    /// Applies `f` to every frame.
    pub fn map(&self, f: impl Fn(&GridFunction<T>) -> GridFunction<T>) -> Result<Self> {
        Self::new(self.frames.iter().map(f).collect())
    }

    /// Pointwise sample mean of the frames.
    pub fn mean(&self) -> GridFunction<T> {
        let count = T::from_usize(self.frames.len()).unwrap();
        let mut acc = vec![T::zero(); self.domain.len()];
        for f in &self.frames {
            for (a, &v) in acc.iter_mut().zip(&f.values) {
                *a += v;
            }
        }
        for a in &mut acc {
            *a /= count;
        }
        GridFunction::from_raw(self.domain.clone(), acc)
    }
}

/// Subtracts the pointwise sample mean; returns `(centered, mean)`.
pub fn center_series<T: Real>(series: &FunctionSeries<T>) -> Result<(FunctionSeries<T>, GridFunction<T>)> {
    if series.len() < 2 {
        return Err(Error::InsufficientLength {
            needed: 2,
            got: series.len(),
        });
    }
    let mean = series.mean();
    let centered = series.map(|f| f - &mean)?;
    Ok((centered, mean))
}
