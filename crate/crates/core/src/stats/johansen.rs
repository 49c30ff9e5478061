use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

use super::{johansen_critical_values, LevelMap, SignificanceLevel};
use crate::{Error, Result};

/// Deterministic terms of the vector error-correction model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetSpec {
    #[default]
    None,
    /// Unrestricted constant.
    Constant,
}

impl std::str::FromStr for DetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(DetSpec::None),
            "constant" => Ok(DetSpec::Constant),
            other => Err(Error::InvalidInput(format!(
                "unknown deterministic term '{other}' (expected none or constant)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JohansenResult {
    /// Indexed by the hypothesised rank `r = 0..p`.
    pub trace_stats: Vec<f64>,
    /// Squared canonical correlations, nonincreasing.
    pub eigenvalues: Vec<f64>,
    pub critical_values: Vec<LevelMap<f64>>,
    pub level: SignificanceLevel,
    pub selected_rank: usize,
    pub lags: usize,
    pub det: DetSpec,
    pub nobs: usize,
}

impl JohansenResult {
    /// Smallest `r` whose trace statistic is below its critical value,
    /// `p` when every hypothesis is rejected.
    pub fn selected_rank_at(&self, level: SignificanceLevel) -> usize {
        self.trace_stats
            .iter()
            .zip(&self.critical_values)
            .position(|(&s, cv)| s < cv.get(level))
            .unwrap_or(self.trace_stats.len())
    }
}

/// Trace test for the cointegrating rank of a VAR of order `lags` in
/// error-correction form, `Δy_t = Π y_{t−1} + Σ_{i<lags} Γ_i Δy_{t−i} + ε_t`.
/// `y` is `time × p` with `2 ≤ p ≤ 5`.
pub fn johansen_trace(y: &DMatrix<f64>, lags: usize, det: DetSpec, level: SignificanceLevel) -> Result<JohansenResult> {
    let (t, p) = y.shape();
    if !(2..=5).contains(&p) {
        return Err(Error::InvalidInput(format!("Johansen test supports 2 to 5 series, got {p}")));
    }
    if lags == 0 {
        return Err(Error::InvalidInput("VAR order must be at least 1".into()));
    }
    if t < 20 + p * lags {
        return Err(Error::InsufficientLength { needed: 20 + p * lags, got: t });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("series has non-finite values".into()));
    }
    let n = t - lags;
    let nz = p * (lags - 1) + usize::from(det == DetSpec::Constant);
    let mut z0 = DMatrix::<f64>::zeros(n, p);
    let mut z1 = DMatrix::<f64>::zeros(n, p);
    let mut z2 = DMatrix::<f64>::zeros(n, nz);
    for row in 0..n {
        let s = row + lags;
        for j in 0..p {
            z0[(row, j)] = y[(s, j)] - y[(s - 1, j)];
            z1[(row, j)] = y[(s - 1, j)];
            for i in 1..lags {
                z2[(row, (i - 1) * p + j)] = y[(s - i, j)] - y[(s - i - 1, j)];
            }
        }
        if det == DetSpec::Constant {
            z2[(row, nz - 1)] = 1.0;
        }
    }
    let (r0, r1) = if nz == 0 {
        (z0, z1)
    } else {
        (residualise(&z2, &z0)?, residualise(&z2, &z1)?)
    };
    let nf = n as f64;
    let s00 = r0.tr_mul(&r0) / nf;
    let s11 = r1.tr_mul(&r1) / nf;
    let s01 = r0.tr_mul(&r1) / nf;
    check_spd(&s00, "differenced residual covariance")?;
    check_spd(&s11, "lagged-level residual covariance")?;
    let c00 = Cholesky::new(s00).ok_or_else(|| Error::SingularDesign("S00 is not positive definite".into()))?;
    let c11 = Cholesky::new(s11).ok_or_else(|| Error::SingularDesign("S11 is not positive definite".into()))?;
    // L⁻¹ S10 S00⁻¹ S01 L⁻ᵀ with S11 = LLᵀ has the eigenvalues of S11⁻¹S10S00⁻¹S01
    let l = c11.l();
    let a = l
        .solve_lower_triangular(&s01.transpose())
        .ok_or_else(|| Error::SingularDesign("S11 factor is singular".into()))?;
    let mut m = &a * c00.solve(&a.transpose());
    m = (&m + m.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = m.symmetric_eigenvalues().iter().map(|&v| v.clamp(0.0, 1.0 - 1e-15)).collect();
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));

    let trace_stats: Vec<f64> = (0..p)
        .map(|r| -nf * eigenvalues[r..].iter().map(|&l| (1.0 - l).ln()).sum::<f64>())
        .collect();
    let critical_values = (0..p)
        .map(|r| johansen_critical_values(det, p - r).expect("table covers p ≤ 5"))
        .collect();
    let mut out = JohansenResult {
        trace_stats,
        eigenvalues,
        critical_values,
        level,
        selected_rank: 0,
        lags,
        det,
        nobs: n,
    };
    out.selected_rank = out.selected_rank_at(level);
    Ok(out)
}

fn residualise(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = x.ncols();
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if scale == 0.0 || (0..k).any(|i| r[(i, i)].abs() <= 1e-10 * scale) {
        return Err(Error::SingularDesign("short-run regressors are collinear".into()));
    }
    let q = qr.q();
    Ok(y - &q * q.tr_mul(y))
}

fn check_spd(s: &DMatrix<f64>, what: &str) -> Result<()> {
    let ev = s.symmetric_eigenvalues();
    let max = ev.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let min = ev.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(Error::SingularDesign(format!("{what} is singular")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn normals(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = rng.random_range(f64::EPSILON..1.0);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    fn walks(seed: u64, t: usize, p: usize) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut y = DMatrix::zeros(t, p);
        for s in 1..t {
            for j in 0..p {
                y[(s, j)] = y[(s - 1, j)] + normals(&mut rng);
            }
        }
        y
    }

    #[test]
    fn argument_checks() {
        let y = walks(0, 100, 2);
        assert!(johansen_trace(&y.columns(0, 1).into_owned(), 1, DetSpec::None, SignificanceLevel::OnePercent).is_err());
        assert!(johansen_trace(&y, 0, DetSpec::None, SignificanceLevel::OnePercent).is_err());
        assert!(matches!(
            johansen_trace(&y.rows(0, 21).into_owned(), 1, DetSpec::None, SignificanceLevel::OnePercent),
            Err(Error::InsufficientLength { .. })
        ));
        let dup = DMatrix::from_fn(100, 2, |i, _| y[(i, 0)]);
        assert!(matches!(
            johansen_trace(&dup, 1, DetSpec::None, SignificanceLevel::OnePercent),
            Err(Error::SingularDesign(_))
        ));
    }

    #[test]
    fn trace_is_monotone_and_rank_rule_holds() {
        let y = walks(3, 300, 3);
        let r = johansen_trace(&y, 2, DetSpec::Constant, SignificanceLevel::FivePercent).unwrap();
        assert!(r.trace_stats.windows(2).all(|w| w[0] >= w[1]));
        let expect = (0..3).find(|&k| r.trace_stats[k] < r.critical_values[k].five).unwrap_or(3);
        assert_eq!(r.selected_rank, expect);
    }

    #[test]
    fn recombination_invariance() {
        let y = walks(4, 250, 3);
        let mix = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, -0.2, 0.3, 2.0, 0.1, -0.7, 0.4, 1.5]);
        for det in [DetSpec::None, DetSpec::Constant] {
            for lags in [1, 3] {
                let a = johansen_trace(&y, lags, det, SignificanceLevel::OnePercent).unwrap();
                let b = johansen_trace(&(&y * &mix), lags, det, SignificanceLevel::OnePercent).unwrap();
                for (x, z) in a.trace_stats.iter().zip(&b.trace_stats) {
                    assert!((x - z).abs() <= 1e-6, "{det:?} lags={lags}: {x} vs {z}");
                }
            }
        }
    }

    #[test]
    fn independent_walks_and_cointegrated_pair() {
        let mut kept = 0;
        let mut found = 0;
        for seed in 0..200 {
            let y = walks(100 + seed, 500, 2);
            if johansen_trace(&y, 1, DetSpec::None, SignificanceLevel::OnePercent).unwrap().selected_rank == 0 {
                kept += 1;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(9000 + seed);
            let w = walks(7000 + seed, 500, 1);
            let c = DMatrix::from_fn(500, 2, |i, j| if j == 0 { w[(i, 0)] } else { w[(i, 0)] + normals(&mut rng) });
            if johansen_trace(&c, 1, DetSpec::None, SignificanceLevel::FivePercent).unwrap().selected_rank >= 1 {
                found += 1;
            }
        }
        assert!(kept >= 180, "rank 0 kept in {kept}/200");
        assert!(found >= 160, "cointegration found in {found}/200");
    }
}
