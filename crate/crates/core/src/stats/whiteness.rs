use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LjungBox {
    pub q: f64,
    pub lags: usize,
    pub p_value: f64,
}

impl LjungBox {
    /// White noise is not rejected at level `alpha`.
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Ljung–Box portmanteau statistic `n(n+2) Σ_{h≤H} ρ̂_h²/(n−h)` with a
/// `χ²(H)` reference distribution.
pub fn ljung_box(x: &[f64], lags: usize) -> Result<LjungBox> {
    let n = x.len();
    if lags == 0 || n <= lags + 1 {
        return Err(Error::InsufficientLength { needed: lags + 2, got: n });
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = c.iter().map(|v| v * v).sum();
    if !(c0 > 0.0) {
        return Err(Error::SingularDesign("series has zero variance".into()));
    }
    let nf = n as f64;
    let q = nf * (nf + 2.0)
        * (1..=lags)
            .map(|h| {
                let rho = c[h..].iter().zip(&c).map(|(a, b)| a * b).sum::<f64>() / c0;
                rho * rho / (nf - h as f64)
            })
            .sum::<f64>();
    let chi = ChiSquared::new(lags as f64).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(LjungBox {
        q,
        lags,
        p_value: chi.sf(q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_series_is_not_white() {
        let x: Vec<f64> = (0..200).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = ljung_box(&x, 10).unwrap();
        assert!(r.q > 1000.0);
        assert!(!r.passes(0.01));
    }

    #[test]
    fn hand_computed_statistic() {
        // n = 5, H = 1, centred (−2, −1, 0, 1, 2): ρ̂₁ = 4/10
        let r = ljung_box(&[1.0, 2.0, 3.0, 4.0, 5.0], 1).unwrap();
        assert!((r.q - 5.0 * 7.0 * 0.16 / 4.0).abs() <= 1e-12);
    }

    #[test]
    fn chi_square_quantile() {
        // χ²₁₀ 99% quantile
        let chi = ChiSquared::new(10.0).unwrap();
        assert!((chi.inverse_cdf(0.99) - 23.2093).abs() <= 1e-4);
    }
}
