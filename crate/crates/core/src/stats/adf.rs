use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{adf_critical_values, LevelMap, SignificanceLevel};
use crate::{Error, Result};

/// Deterministic terms in the Dickey–Fuller regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdfSpec {
    #[default]
    None,
    Constant,
    Trend,
}

impl std::str::FromStr for AdfSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "n" => Ok(AdfSpec::None),
            "constant" | "c" => Ok(AdfSpec::Constant),
            "trend" | "ct" => Ok(AdfSpec::Trend),
            other => Err(Error::InvalidInput(format!(
                "unknown ADF specification '{other}' (expected none, constant or trend)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdfResult {
    /// t-ratio on the lagged level.
    pub tau: f64,
    pub lags: usize,
    pub spec: AdfSpec,
    pub nobs: usize,
    pub critical_values: LevelMap<f64>,
    pub reject_at: LevelMap<bool>,
}

impl AdfResult {
    pub fn rejects(&self, level: SignificanceLevel) -> bool {
        self.reject_at.get(level)
    }
}

pub(crate) struct Ols {
    pub coef: DVector<f64>,
    pub resid: DVector<f64>,
    /// `(XᵀX)⁻¹`.
    pub xtx_inv: DMatrix<f64>,
}

/// Least squares through a QR factorisation. A column whose `R` pivot is
/// negligible relative to the largest one makes the design singular.
pub(crate) fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Ols> {
    let (n, k) = x.shape();
    if n < k {
        return Err(Error::InsufficientLength { needed: k, got: n });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if scale == 0.0 || (0..k).any(|i| r[(i, i)].abs() <= 1e-10 * scale) {
        return Err(Error::SingularDesign("regressors are collinear".into()));
    }
    let qty = qr.q().tr_mul(y);
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::SingularDesign("triangular solve failed".into()))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::SingularDesign("triangular solve failed".into()))?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let resid = y - x * &coef;
    Ok(Ols { coef, resid, xtx_inv })
}

/// Augmented Dickey–Fuller test: OLS of `Δy_t` on `y_{t−1}`,
/// `Δy_{t−1}, …, Δy_{t−lags}` and the deterministic terms of `spec`;
/// `τ` is the t-ratio of the `y_{t−1}` coefficient.
pub fn adf_test(y: &[f64], lags: usize, spec: AdfSpec) -> Result<AdfResult> {
    let len = y.len();
    if len < lags + 10 {
        return Err(Error::InsufficientLength { needed: lags + 10, got: len });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("series has non-finite values".into()));
    }
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let det = match spec {
        AdfSpec::None => 0,
        AdfSpec::Constant => 1,
        AdfSpec::Trend => 2,
    };
    let nobs = dy.len() - lags;
    let k = 1 + lags + det;
    if nobs <= k {
        return Err(Error::InsufficientLength { needed: lags + det + 3, got: len });
    }
    let mut x = DMatrix::<f64>::zeros(nobs, k);
    let mut target = DVector::<f64>::zeros(nobs);
    for row in 0..nobs {
        let t = row + lags; // index into dy; dy[t] = y[t+1] − y[t]
        target[row] = dy[t];
        x[(row, 0)] = y[t];
        for j in 1..=lags {
            x[(row, j)] = dy[t - j];
        }
        if det >= 1 {
            x[(row, 1 + lags)] = 1.0;
        }
        if det == 2 {
            x[(row, 2 + lags)] = (row + 1) as f64;
        }
    }
    let fit = ols(&x, &target)?;
    let rss = fit.resid.norm_squared();
    let s2 = rss / (nobs - k) as f64;
    let se = (s2 * fit.xtx_inv[(0, 0)]).sqrt();
    if !(se > 0.0) {
        return Err(Error::SingularDesign("zero residual variance".into()));
    }
    let tau = fit.coef[0] / se;
    let critical_values = adf_critical_values(spec);
    Ok(AdfResult {
        tau,
        lags,
        spec,
        nobs,
        critical_values,
        reject_at: critical_values.map(|c| tau < c),
    })
}
