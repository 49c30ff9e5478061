//! Simulation of functional AR(1) and AR(2) processes.
//!
//! Innovations are Gaussian in a finite orthonormal family:
//! `ε_n = Σ_i σ_i ζ_{n,i} φ_i` with `ζ` standard normal. Normal variates come
//! from the inverse normal CDF applied to open-interval uniforms drawn from a
//! ChaCha8 stream; independent replications use distinct streams of the same
//! seed, so a replication is reproducible on its own.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::funcspace::{inner_product, orthonormalize, FunctionSeries, GridFunction};
use crate::linalg;
use crate::operators::{check_orthonormal, orthonormality_tol, rank_drop_tol, OperatorSpec};
use crate::{Error, Real, Result};

/// Name of the innovation generator, recorded in exported metadata.
pub const GENERATOR_NAME: &str = "chacha8-stream/inverse-cdf-normal";

/// Burn-in used for models without a unit eigenvalue.
pub const DEFAULT_BURN_IN: usize = 200;

/// Gaussian white noise in a finite orthonormal family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "NoiseRepr<T>", into = "NoiseRepr<T>")]
pub struct NoiseSpec<T: Real = f64> {
    basis: Vec<GridFunction<T>>,
    std_devs: Vec<T>,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct NoiseRepr<T: Real> {
    basis: Vec<GridFunction<T>>,
    std_devs: Vec<T>,
    seed: u64,
}

impl<T: Real> TryFrom<NoiseRepr<T>> for NoiseSpec<T> {
    type Error = Error;

    fn try_from(r: NoiseRepr<T>) -> Result<Self> {
        Self::new(r.basis, r.std_devs, r.seed)
    }
}

impl<T: Real> From<NoiseSpec<T>> for NoiseRepr<T> {
    fn from(n: NoiseSpec<T>) -> Self {
        Self {
            basis: n.basis,
            std_devs: n.std_devs,
            seed: n.seed,
        }
    }
}

impl<T: Real> NoiseSpec<T> {
    pub fn new(basis: Vec<GridFunction<T>>, std_devs: Vec<T>, seed: u64) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::InvalidInput("noise basis is empty".into()));
        }
        if basis.len() != std_devs.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                got: std_devs.len(),
            });
        }
        if std_devs.iter().any(|s| !s.is_finite() || *s < T::zero()) {
            return Err(Error::InvalidInput(
                "noise standard deviations must be finite and non-negative".into(),
            ));
        }
        for f in &basis[1..] {
            basis[0].check_domain(f)?;
        }
        check_orthonormal(&basis, orthonormality_tol())?;
        Ok(Self {
            basis,
            std_devs,
            seed,
        })
    }

    pub fn basis(&self) -> &[GridFunction<T>] {
        &self.basis
    }

    pub fn std_devs(&self) -> &[T] {
        &self.std_devs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// Same directions with every standard deviation multiplied by `c ≥ 0`.
    pub fn scaled(&self, c: T) -> Result<Self> {
        let std_devs = self.std_devs.iter().map(|&s| s * c).collect();
        Self::new(self.basis.clone(), std_devs, self.seed)
    }

    pub fn domain(&self) -> &Arc<crate::funcspace::GridDomain<T>> {
        self.basis[0].domain()
    }

    fn rng(&self, replication: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replication);
        rng
    }

    /// Coefficients `σ_i ζ_{n,i}` of `count` innovations on replication stream
    /// `replication`.
    pub fn draw_coefficients(&self, count: usize, replication: u64) -> Vec<Vec<T>> {
        let normal = Normal::standard();
        let mut rng = self.rng(replication);
        (0..count)
            .map(|_| {
                self.std_devs
                    .iter()
                    .map(|&s| {
                        let u: f64 = rng.sample(rand::distr::Open01);
                        s * T::lit(normal.inverse_cdf(u))
                    })
                    .collect()
            })
            .collect()
    }

    /// `count` innovation frames on replication stream `replication`.
    pub fn draw_replication(&self, count: usize, replication: u64) -> Result<FunctionSeries<T>> {
        if count == 0 {
            return Err(Error::InvalidInput("noise count must be positive".into()));
        }
        let frames = self
            .draw_coefficients(count, replication)
            .into_iter()
            .map(|coeffs| self.frame(&coeffs))
            .collect();
        FunctionSeries::new(frames)
    }

    fn frame(&self, coeffs: &[T]) -> GridFunction<T> {
        let mut f = GridFunction::zeros(self.domain().clone());
        for (&c, phi) in coeffs.iter().zip(&self.basis) {
            if c != T::zero() {
                f.axpy(c, phi).expect("noise basis shares one grid");
            }
        }
        f
    }
}

/// `count` i.i.d. innovation frames from the noise seed (replication 0).
pub fn draw_noise<T: Real>(noise: &NoiseSpec<T>, count: usize) -> Result<FunctionSeries<T>> {
    noise.draw_replication(count, 0)
}

/// `X_n = ρ₁(X_{n−1}) [+ ρ₂(X_{n−2})] + ε_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "ModelRepr<T>", into = "ModelRepr<T>")]
pub struct FarModel<T: Real = f64> {
    rho1: OperatorSpec<T>,
    rho2: Option<OperatorSpec<T>>,
    noise: NoiseSpec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct ModelRepr<T: Real> {
    order: u8,
    rho1: OperatorSpec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho2: Option<OperatorSpec<T>>,
    noise: NoiseSpec<T>,
}

impl<T: Real> TryFrom<ModelRepr<T>> for FarModel<T> {
    type Error = Error;

    fn try_from(r: ModelRepr<T>) -> Result<Self> {
        match (r.order, r.rho2) {
            (1, None) => Self::ar1(r.rho1, r.noise),
            (2, Some(rho2)) => Self::ar2(r.rho1, rho2, r.noise),
            (1, Some(_)) => Err(Error::InvalidInput("order-1 model must not carry rho2".into())),
            (2, None) => Err(Error::InvalidInput("order-2 model needs rho2".into())),
            (o, _) => Err(Error::InvalidInput(format!("model order must be 1 or 2, got {o}"))),
        }
    }
}

impl<T: Real> From<FarModel<T>> for ModelRepr<T> {
    fn from(m: FarModel<T>) -> Self {
        Self {
            order: m.order(),
            rho1: m.rho1,
            rho2: m.rho2,
            noise: m.noise,
        }
    }
}

impl<T: Real> FarModel<T> {
    pub fn ar1(rho: OperatorSpec<T>, noise: NoiseSpec<T>) -> Result<Self> {
        if !crate::funcspace::same_grid(rho.domain(), noise.domain()) {
            return Err(Error::DomainMismatch);
        }
        Ok(Self {
            rho1: rho,
            rho2: None,
            noise,
        })
    }

    pub fn ar2(rho1: OperatorSpec<T>, rho2: OperatorSpec<T>, noise: NoiseSpec<T>) -> Result<Self> {
        if !crate::funcspace::same_grid(rho1.domain(), noise.domain())
            || !crate::funcspace::same_grid(rho2.domain(), noise.domain())
        {
            return Err(Error::DomainMismatch);
        }
        Ok(Self {
            rho1,
            rho2: Some(rho2),
            noise,
        })
    }

    pub fn order(&self) -> u8 {
        if self.rho2.is_some() {
            2
        } else {
            1
        }
    }

    pub fn rho1(&self) -> &OperatorSpec<T> {
        &self.rho1
    }

    pub fn rho2(&self) -> Option<&OperatorSpec<T>> {
        self.rho2.as_ref()
    }

    pub fn noise(&self) -> &NoiseSpec<T> {
        &self.noise
    }

    pub fn with_noise(&self, noise: NoiseSpec<T>) -> Result<Self> {
        match &self.rho2 {
            None => Self::ar1(self.rho1.clone(), noise),
            Some(r2) => Self::ar2(self.rho1.clone(), r2.clone(), noise),
        }
    }

    pub fn domain(&self) -> &Arc<crate::funcspace::GridDomain<T>> {
        self.noise.domain()
    }
}

/// A simulated path together with the innovations that produced it.
#[derive(Debug, Clone)]
pub struct SamplePath<T: Real = f64> {
    pub series: FunctionSeries<T>,
    /// `innovations[n]` is the `ε_n` added at step `n` (zero at the start).
    pub innovations: FunctionSeries<T>,
    pub model: Arc<FarModel<T>>,
    pub burn_in: usize,
    pub replication: u64,
}

/// Knobs for [`simulate_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SimulateOptions {
    /// `None` picks [`DEFAULT_BURN_IN`] for stationary models and 0 otherwise.
    pub burn_in: Option<usize>,
    pub replication: u64,
}

/// Simulates `length` frames with default options; `initial = None` starts
/// from zero.
pub fn simulate<T: Real>(
    model: &FarModel<T>,
    length: usize,
    initial: Option<&GridFunction<T>>,
) -> Result<SamplePath<T>> {
    simulate_with(model, length, initial, SimulateOptions::default())
}

pub fn simulate_with<T: Real>(
    model: &FarModel<T>,
    length: usize,
    initial: Option<&GridFunction<T>>,
    opts: SimulateOptions,
) -> Result<SamplePath<T>> {
    if length == 0 {
        return Err(Error::InvalidInput("path length must be positive".into()));
    }
    let domain = model.domain().clone();
    let x0 = match initial {
        Some(f) => {
            if !crate::funcspace::same_grid(&domain, f.domain()) {
                return Err(Error::DomainMismatch);
            }
            f.clone()
        }
        None => GridFunction::zeros(domain.clone()),
    };
    let burn_in = match opts.burn_in {
        Some(b) => b,
        None => default_burn_in(model)?,
    };
    let total = burn_in + length;
    let coeffs = if total > 1 {
        model.noise.draw_coefficients(total - 1, opts.replication)
    } else {
        Vec::new()
    };

    let mut states: Vec<GridFunction<T>> = Vec::with_capacity(total);
    let mut innovations: Vec<GridFunction<T>> = Vec::with_capacity(total);
    states.push(x0);
    innovations.push(GridFunction::zeros(domain.clone()));
    for n in 1..total {
        let eps = model.noise.frame(&coeffs[n - 1]);
        let mut next = model.rho1.apply(&states[n - 1])?;
        if let Some(rho2) = &model.rho2 {
            let lag2 = if n >= 2 { &states[n - 2] } else { &states[0] };
            next.axpy(T::one(), &rho2.apply(lag2)?)?;
        }
        next.axpy(T::one(), &eps)?;
        if !next.is_finite() {
            return Err(Error::Divergence { index: n });
        }
        states.push(next);
        innovations.push(eps);
    }
    let states = states.split_off(burn_in);
    let innovations = innovations.split_off(burn_in);
    Ok(SamplePath {
        series: FunctionSeries::new(states)?,
        innovations: FunctionSeries::new(innovations)?,
        model: Arc::new(model.clone()),
        burn_in,
        replication: opts.replication,
    })
}

fn default_burn_in<T: Real>(model: &FarModel<T>) -> Result<usize> {
    Ok(if is_stationary(model)?.stationary {
        DEFAULT_BURN_IN
    } else {
        0
    })
}

/// `Σ_{j=0}^{J−1} ρ^j(ε_{n−j})` with `ε_n` the last frame of `noise_frames`,
/// evaluated by Horner's scheme over iterated applications of `ρ`.
pub fn ma_truncation<T: Real>(
    model: &FarModel<T>,
    noise_frames: &FunctionSeries<T>,
    terms: usize,
) -> Result<GridFunction<T>> {
    if model.order() != 1 {
        return Err(Error::Unsupported(
            "moving-average representation is implemented for order 1 only".into(),
        ));
    }
    if terms == 0 || terms > noise_frames.len() {
        return Err(Error::InvalidInput(format!(
            "truncation order must be in 1..={}, got {terms}",
            noise_frames.len()
        )));
    }
    let frames = noise_frames.frames();
    let start = frames.len() - terms;
    let mut acc = GridFunction::zeros(noise_frames.domain().clone());
    for eps in &frames[start..] {
        acc = model.rho1.apply(&acc)?;
        acc.axpy(T::one(), eps)?;
    }
    Ok(acc)
}

/// Outcome of [`is_stationary`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationarityReport<T: Real = f64> {
    pub stationary: bool,
    pub spectral_radius: T,
    pub tol: T,
}

/// `r(ρ) < 1 − tol` for order 1; for order 2 the same test on the block
/// companion matrix `[[M₁, M₂], [I, 0]]` of both operators compressed to
/// the orthonormalised joint range basis.
pub fn is_stationary<T: Real>(model: &FarModel<T>) -> Result<StationarityReport<T>> {
    is_stationary_tol(model, T::lit(crate::operators::DEFAULT_EIGEN_TOL))
}

pub fn is_stationary_tol<T: Real>(model: &FarModel<T>, tol: T) -> Result<StationarityReport<T>> {
    let radius = match &model.rho2 {
        None => model.rho1.spectral_radius()?,
        Some(rho2) => linalg::spectral_radius(&ar2_companion(&model.rho1, rho2)?)?,
    };
    Ok(StationarityReport {
        stationary: radius < T::one() - tol,
        spectral_radius: radius,
        tol,
    })
}

/// Companion matrix of an AR(2) pair on the orthonormalised union of both
/// range bases. Both operators map that span into itself, so every nonzero
/// eigenvalue of the `H ⊕ H` companion operator appears here.
pub(crate) fn ar2_companion<T: Real>(rho1: &OperatorSpec<T>, rho2: &OperatorSpec<T>) -> Result<DMatrix<T>> {
    let mut joint = rho1.matrix_reduction()?.range_basis;
    joint.extend(rho2.matrix_reduction()?.range_basis);
    let q = orthonormalize(&joint, rank_drop_tol())?;
    let m = q.len();
    let compress = |rho: &OperatorSpec<T>| -> Result<DMatrix<T>> {
        let images = q.iter().map(|f| rho.apply(f)).collect::<Result<Vec<_>>>()?;
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] = inner_product(&q[i], &images[j])?;
            }
        }
        Ok(out)
    };
    let m1 = compress(rho1)?;
    let m2 = compress(rho2)?;
    let mut c = DMatrix::zeros(2 * m, 2 * m);
    c.view_mut((0, 0), (m, m)).copy_from(&m1);
    c.view_mut((0, m), (m, m)).copy_from(&m2);
    c.view_mut((m, 0), (m, m)).fill_with_identity();
    Ok(c)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::funcspace::{fourier_basis, GridDomain};
    use crate::operators::golden_unit_root_coupling;

    fn grid() -> Arc<GridDomain> {
        GridDomain::uniform(101).unwrap().into_shared()
    }

    fn noise(std_devs: Vec<f64>, seed: u64) -> NoiseSpec {
        let basis = fourier_basis(&grid(), std_devs.len());
        NoiseSpec::new(basis, std_devs, seed).unwrap()
    }

    fn no_burn() -> SimulateOptions {
        SimulateOptions {
            burn_in: Some(0),
            replication: 0,
        }
    }

    #[test]
    fn zero_noise_draws_zero_frames() {
        let frames = draw_noise(&noise(vec![0.0, 0.0], 1), 5).unwrap();
        assert_eq!(frames.len(), 5);
        assert!(frames.frames().iter().all(|f| f.values().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn noise_moments() {
        let spec = noise(vec![1.0], 99);
        let frames = draw_noise(&spec, 10_000).unwrap();
        let phi = &spec.basis()[0];
        let xs: Vec<f64> = frames.frames().iter().map(|f| inner_product(f, phi).unwrap()).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() <= 0.05, "mean {mean}");
        assert!((0.9..=1.1).contains(&var), "var {var}");
    }

    #[test]
    fn degenerate_direction_stays_silent() {
        let spec = noise(vec![1.0, 0.0], 4);
        for coeffs in spec.draw_coefficients(200, 0) {
            assert_eq!(coeffs[1], 0.0);
        }
        let e2 = &spec.basis()[1];
        for f in draw_noise(&spec, 200).unwrap().frames() {
            assert!(inner_product(f, e2).unwrap().abs() <= 1e-14);
        }
    }

    #[test]
    fn same_seed_same_noise_and_streams_differ() {
        let spec = noise(vec![1.0, 0.5], 12);
        assert_eq!(draw_noise(&spec, 20).unwrap(), draw_noise(&spec, 20).unwrap());
        assert_ne!(spec.draw_replication(20, 0).unwrap(), spec.draw_replication(20, 1).unwrap());
    }

    #[test]
    fn invalid_noise_rejected() {
        let b = fourier_basis(&grid(), 2);
        assert!(NoiseSpec::new(b.clone(), vec![1.0], 0).is_err());
        assert!(NoiseSpec::new(b.clone(), vec![1.0, -0.5], 0).is_err());
        let dup = vec![b[0].clone(), b[0].clone()];
        assert!(NoiseSpec::new(dup, vec![1.0, 1.0], 0).is_err());
    }

    #[test]
    fn deterministic_geometric_decay() {
        let d = grid();
        let phi = fourier_basis(&d, 1).remove(0);
        let rho = OperatorSpec::spectral(vec![0.5], vec![phi.clone()]).unwrap();
        let model = FarModel::ar1(rho, noise(vec![0.0], 0)).unwrap();
        let path = simulate_with(&model, 12, Some(&phi), no_burn()).unwrap();
        for (n, x) in path.series.frames().iter().enumerate() {
            let expect = phi.scale(0.5f64.powi(n as i32));
            assert!((x - &expect).norm() <= 1e-14);
        }
    }

    #[test]
    fn unit_root_fixed_point_and_default_burn_in() {
        let d = grid();
        let phi = fourier_basis(&d, 1).remove(0);
        let rho = OperatorSpec::spectral(vec![1.0], vec![phi.clone()]).unwrap();
        let model = FarModel::ar1(rho, noise(vec![0.0], 0)).unwrap();
        let path = simulate(&model, 30, Some(&phi)).unwrap();
        assert_eq!(path.burn_in, 0);
        assert!(path.series.frames().iter().all(|x| (x - &phi).norm() <= 1e-14));

        let stable = FarModel::ar1(
            OperatorSpec::spectral(vec![0.5], vec![phi]).unwrap(),
            noise(vec![1.0], 0),
        )
        .unwrap();
        assert_eq!(simulate(&stable, 3, None).unwrap().burn_in, DEFAULT_BURN_IN);
    }

    #[test]
    fn fibonacci_first_coordinate_is_scalar_ar2() {
        let d = grid();
        let e = fourier_basis(&d, 2);
        let alpha = golden_unit_root_coupling::<f64>();
        let rho = OperatorSpec::fibonacci(alpha, e[0].clone(), e[1].clone()).unwrap();
        let spec = NoiseSpec::new(e.clone(), vec![1.0, 0.0], 31).unwrap();
        let model = FarModel::ar1(rho, spec).unwrap();
        let path = simulate_with(&model, 300, None, no_burn()).unwrap();
        let y: Vec<f64> = path.series.frames().iter().map(|x| inner_product(x, &e[0]).unwrap()).collect();
        let eta: Vec<f64> = path.innovations.frames().iter().map(|x| inner_product(x, &e[0]).unwrap()).collect();
        // scalar oracle: Y_n = αY_{n−1} + α²Y_{n−2} + <ε_n, e₁>, valid from n = 2
        for n in 2..y.len() {
            let pred = alpha * y[n - 1] + alpha * alpha * y[n - 2] + eta[n];
            assert!((y[n] - pred).abs() <= 1e-10 * (1.0 + y[n].abs()), "n={n}");
        }
    }

    #[test]
    fn ar2_recursion_matches_definition() {
        let d = grid();
        let e = fourier_basis(&d, 2);
        let r1 = OperatorSpec::spectral(vec![0.5, 0.2], e.clone()).unwrap();
        let r2 = OperatorSpec::spectral(vec![0.3, -0.1], e.clone()).unwrap();
        let model = FarModel::ar2(r1.clone(), r2.clone(), NoiseSpec::new(e, vec![1.0, 1.0], 8).unwrap()).unwrap();
        let init = GridFunction::constant(d, 0.5);
        let path = simulate_with(&model, 20, Some(&init), no_burn()).unwrap();
        let x = path.series.frames();
        let eps = path.innovations.frames();
        let x1 = &(&r1.apply(&init).unwrap() + &r2.apply(&init).unwrap()) + &eps[1];
        assert!((&x[1] - &x1).norm() <= 1e-14);
        for n in 2..x.len() {
            let pred = &(&r1.apply(&x[n - 1]).unwrap() + &r2.apply(&x[n - 2]).unwrap()) + &eps[n];
            assert!((&x[n] - &pred).norm() <= 1e-12);
        }
    }

    #[test]
    fn explosive_model_reports_divergence() {
        let d = grid();
        let phi = fourier_basis(&d, 1).remove(0);
        let rho = OperatorSpec::spectral(vec![1e200], vec![phi.clone()]).unwrap();
        let model = FarModel::ar1(rho, noise(vec![1.0], 0)).unwrap();
        let err = simulate_with(&model, 10, Some(&phi), no_burn()).unwrap_err();
        assert!(matches!(err, Error::Divergence { index: 2 }), "{err:?}");
    }

    #[test]
    fn simulation_is_deterministic_and_linear_in_noise() {
        let d = grid();
        let e = fourier_basis(&d, 3);
        let rho = OperatorSpec::spectral(vec![0.9, 0.4, -0.3], e.clone()).unwrap();
        let base = NoiseSpec::new(e, vec![1.0, 0.5, 0.25], 77).unwrap();
        let model = FarModel::ar1(rho, base.clone()).unwrap();
        let a = simulate(&model, 50, None).unwrap();
        let b = simulate(&model, 50, None).unwrap();
        assert_eq!(a.series, b.series);

        let scaled = model.with_noise(base.scaled(3.0).unwrap()).unwrap();
        let c = simulate(&scaled, 50, None).unwrap();
        for (x, y) in a.series.frames().iter().zip(c.series.frames()) {
            assert!((&x.scale(3.0) - y).norm() <= 1e-12 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn ma_truncation_examples() {
        let d = grid();
        let phi = fourier_basis(&d, 1).remove(0);
        let rho = OperatorSpec::spectral(vec![0.5], vec![phi.clone()]).unwrap();
        let model = FarModel::ar1(rho, noise(vec![1.0], 5)).unwrap();
        let eps = draw_noise(model.noise(), 60).unwrap();
        assert_eq!(ma_truncation(&model, &eps, 1).unwrap(), eps.frames()[59]);

        // constant noise along φ: the J-term sum is (2 − 2·0.5^J)φ, so the
        // error against J = 50 halves with every extra term
        let flat = FunctionSeries::new(vec![phi.clone(); 60]).unwrap();
        let reference = ma_truncation(&model, &flat, 50).unwrap();
        let err = |j| (&ma_truncation(&model, &flat, j).unwrap() - &reference).norm();
        for j in 1..30 {
            let ratio = err(j + 1) / err(j);
            assert!((0.25..=1.0).contains(&ratio), "j={j} ratio={ratio}");
            assert!((err(j) - 2.0 * (0.5f64.powi(j as i32) - 0.5f64.powi(50))).abs() <= 1e-12);
        }

        let reference = ma_truncation(&model, &eps, 50).unwrap();
        let err = |j| (&ma_truncation(&model, &eps, j).unwrap() - &reference).norm();
        // J-term error is the 0.5^J-damped tail; bounded by the geometric envelope
        let tail_scale = eps.frames().iter().map(|f| f.norm()).fold(0.0, f64::max);
        for j in [2, 5, 10, 20, 30] {
            let e = err(j);
            assert!(e <= 4.0 * tail_scale * 0.5f64.powi(j as i32), "j={j} err={e}");
        }
        assert!(ma_truncation(&model, &eps, 0).is_err());
        assert!(ma_truncation(&model, &eps, 61).is_err());
    }

    #[test]
    fn ma_truncation_matches_simulation_from_zero() {
        let d = grid();
        let e = fourier_basis(&d, 2);
        let alpha = 0.45;
        let rho = OperatorSpec::fibonacci(alpha, e[0].clone(), e[1].clone()).unwrap();
        let model = FarModel::ar1(rho, NoiseSpec::new(e, vec![1.0, 0.7], 3).unwrap()).unwrap();
        let path = simulate_with(&model, 150, None, no_burn()).unwrap();
        let ma = ma_truncation(&model, &path.innovations, 100).unwrap();
        assert!((&ma - &path.series.frames()[149]).norm() <= 1e-8);
    }

    #[test]
    fn ma_truncation_rejects_order_two() {
        let d = grid();
        let e = fourier_basis(&d, 1);
        let r = OperatorSpec::spectral(vec![0.3], e.clone()).unwrap();
        let model = FarModel::ar2(r.clone(), r, NoiseSpec::new(e, vec![1.0], 0).unwrap()).unwrap();
        let eps = draw_noise(model.noise(), 5).unwrap();
        assert!(matches!(ma_truncation(&model, &eps, 2), Err(Error::Unsupported(_))));
    }

    #[test]
    fn stationarity_examples() {
        let d = grid();
        let e = fourier_basis(&d, 2);
        let m = FarModel::ar1(OperatorSpec::spectral(vec![0.99], vec![e[0].clone()]).unwrap(), noise(vec![1.0], 0)).unwrap();
        let r = is_stationary(&m).unwrap();
        assert!(r.stationary);
        assert_abs_diff_eq!(r.spectral_radius, 0.99, epsilon = 1e-15);

        let alpha = golden_unit_root_coupling::<f64>();
        let fib = OperatorSpec::fibonacci(alpha, e[0].clone(), e[1].clone()).unwrap();
        let r = is_stationary(&FarModel::ar1(fib, noise(vec![1.0], 0)).unwrap()).unwrap();
        assert!(!r.stationary);
        assert_abs_diff_eq!(r.spectral_radius, 1.0, epsilon = 1e-9);

        let ou = OperatorSpec::point_exp(0.5, d).unwrap();
        let r = is_stationary(&FarModel::ar1(ou, noise(vec![1.0], 0)).unwrap()).unwrap();
        assert!(r.stationary);
        assert_abs_diff_eq!(r.spectral_radius, (-0.5f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.spectral_radius, 0.606531, epsilon = 1e-6);
    }

    #[test]
    fn ar2_stationarity_via_companion() {
        let d = grid();
        let phi = fourier_basis(&d, 1);
        let alpha = golden_unit_root_coupling::<f64>();
        let r1 = OperatorSpec::spectral(vec![alpha], phi.clone()).unwrap();
        let r2 = OperatorSpec::spectral(vec![alpha * alpha], phi.clone()).unwrap();
        let m = FarModel::ar2(r1, r2, NoiseSpec::new(phi.clone(), vec![1.0], 0).unwrap()).unwrap();
        let r = is_stationary(&m).unwrap();
        assert!(!r.stationary);
        assert_abs_diff_eq!(r.spectral_radius, 1.0, epsilon = 1e-9);

        let r1 = OperatorSpec::spectral(vec![0.3], phi.clone()).unwrap();
        let m = FarModel::ar2(r1.clone(), r1, NoiseSpec::new(phi, vec![1.0], 0).unwrap()).unwrap();
        // roots of z² − 0.3z − 0.3
        let expect = (0.3 + (0.09f64 + 1.2).sqrt()) / 2.0;
        assert_abs_diff_eq!(is_stationary(&m).unwrap().spectral_radius, expect, epsilon = 1e-12);
    }

    #[test]
    fn model_json_round_trip() {
        let d = grid();
        let e = fourier_basis(&d, 2);
        let rho = OperatorSpec::fibonacci(0.4, e[0].clone(), e[1].clone()).unwrap();
        let m = FarModel::ar1(rho, NoiseSpec::new(e, vec![1.0, 0.0], 42).unwrap()).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.starts_with(r#"{"order":1,"#));
        let back: FarModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn stationary_windows_have_similar_variance() {
        let d = grid();
        let e = fourier_basis(&d, 2);
        let rho = OperatorSpec::spectral(vec![0.7, 0.2], e.clone()).unwrap();
        let model = FarModel::ar1(rho, NoiseSpec::new(e.clone(), vec![1.0, 1.0], 0).unwrap()).unwrap();
        let mut agree = 0;
        for rep in 0..20 {
            let path = simulate_with(&model, 4000, None, SimulateOptions { burn_in: None, replication: rep }).unwrap();
            let s: Vec<f64> = path.series.frames().iter().map(|x| inner_product(x, &e[0]).unwrap()).collect();
            let var = |w: &[f64]| {
                let m = w.iter().sum::<f64>() / w.len() as f64;
                w.iter().map(|x| (x - m).powi(2)).sum::<f64>() / w.len() as f64
            };
            let (v1, v2) = (var(&s[..2000]), var(&s[2000..]));
            if (v1 - v2).abs() / v2 <= 0.2 {
                agree += 1;
            }
        }
        assert!(agree >= 18, "{agree}/20 windows agreed");
    }
}
