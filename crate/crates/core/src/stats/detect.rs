use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{adf_test, fpca, johansen_trace, score_series, AdfSpec, DetSpec, LevelMap, SignificanceLevel};
use crate::funcspace::FunctionSeries;
use crate::{Real, Result};

/// Which score process the unit-root tests see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreCentering {
    /// `<X_n, φ_k>`: the projection of the process itself.
    #[default]
    Raw,
    /// `<X_n − X̄, φ_k>`, the usual FPCA scores.
    Centered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectOptions {
    pub adf_lags: usize,
    pub adf_spec: AdfSpec,
    pub centering: ScoreCentering,
    pub johansen_lags: usize,
    pub johansen_det: DetSpec,
    pub johansen_level: SignificanceLevel,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            adf_lags: 0,
            adf_spec: AdfSpec::None,
            centering: ScoreCentering::Raw,
            johansen_lags: 1,
            johansen_det: DetSpec::None,
            johansen_level: SignificanceLevel::OnePercent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    /// 1-based principal component index.
    pub index: usize,
    pub eigenvalue: f64,
    pub explained_variance: f64,
    pub tau: f64,
    pub reject: LevelMap<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JohansenSummary {
    pub components: Vec<usize>,
    pub trace_stats: Vec<f64>,
    pub critical_values: Vec<LevelMap<f64>>,
    pub level: SignificanceLevel,
    pub selected_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionReport {
    pub level: SignificanceLevel,
    pub components: Vec<ComponentReport>,
    /// Number of components whose unit-root null is not rejected.
    pub trend_dim: usize,
    pub johansen: Option<JohansenSummary>,
    /// Set when several trend components were found but Johansen was not run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub johansen_skipped: Option<String>,
    pub options: DetectOptions,
}

/// FPCA, then a Dickey–Fuller test on each of the first `k` score processes
/// at `level`, then a Johansen trace test on the non-rejecting ones when there
/// are at least two.
pub fn detect_unit_roots<T: Real>(x: &FunctionSeries<T>, k: usize, level: SignificanceLevel) -> Result<DetectionReport> {
    detect_unit_roots_with(x, k, level, &DetectOptions::default())
}

pub fn detect_unit_roots_with<T: Real>(
    x: &FunctionSeries<T>,
    k: usize,
    level: SignificanceLevel,
    opts: &DetectOptions,
) -> Result<DetectionReport> {
    let pca = fpca(x, k)?;
    let ratios = pca.explained_variance_ratio();
    let mut scores: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (c, phi) in pca.eigenfunctions.iter().enumerate() {
        let s = match opts.centering {
            ScoreCentering::Raw => score_series(x, phi)?,
            ScoreCentering::Centered => pca.score_column(c),
        };
        scores.push(s.into_iter().map(|v| v.as_f64()).collect());
    }
    let mut components = Vec::with_capacity(k);
    let mut trend = Vec::new();
    for (c, s) in scores.iter().enumerate() {
        let adf = adf_test(s, opts.adf_lags, opts.adf_spec)?;
        if !adf.rejects(level) {
            trend.push(c);
        }
        components.push(ComponentReport {
            index: c + 1,
            eigenvalue: pca.eigenvalues[c].as_f64(),
            explained_variance: ratios[c].as_f64(),
            tau: adf.tau,
            reject: adf.reject_at,
        });
    }
    let (johansen, johansen_skipped) = if trend.len() < 2 {
        (None, None)
    } else if trend.len() > 5 {
        (None, Some(format!("{} trend components exceed the 5-series table", trend.len())))
    } else {
        let y = DMatrix::from_fn(x.len(), trend.len(), |t, j| scores[trend[j]][t]);
        let r = johansen_trace(&y, opts.johansen_lags, opts.johansen_det, opts.johansen_level)?;
        (
            Some(JohansenSummary {
                components: trend.iter().map(|c| c + 1).collect(),
                trace_stats: r.trace_stats,
                critical_values: r.critical_values,
                level: r.level,
                selected_rank: r.selected_rank,
            }),
            None,
        )
    };
    Ok(DetectionReport {
        level,
        trend_dim: trend.len(),
        components,
        johansen,
        johansen_skipped,
        options: *opts,
    })
}
