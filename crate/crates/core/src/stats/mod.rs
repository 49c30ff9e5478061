//! Empirical unit-root detection on functional time series.
//!
//! The pipeline is FPCA, then one Dickey–Fuller test per principal score
//! process, then (when several scores look integrated) a Johansen trace test
//! for cointegration among them. Test statistics are computed in `f64`.

mod adf;
mod detect;
mod fpca;
mod johansen;
mod tables;
mod whiteness;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use adf::{adf_test, AdfResult, AdfSpec};
pub use detect::{detect_unit_roots, detect_unit_roots_with, ComponentReport, DetectOptions, DetectionReport, ScoreCentering};
pub use fpca::{fpca, FpcaResult};
pub use johansen::{johansen_trace, DetSpec, JohansenResult};
pub use tables::{adf_critical_values, johansen_critical_values};
pub use whiteness::{ljung_box, LjungBox};

use crate::funcspace::{inner_product, FunctionSeries, GridFunction};
use crate::{Error, Real, Result};

/// Significance levels carried by the embedded critical-value tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SignificanceLevel {
    #[serde(rename = "1%")]
    OnePercent,
    #[serde(rename = "5%")]
    FivePercent,
    #[serde(rename = "10%")]
    TenPercent,
}

impl SignificanceLevel {
    pub const ALL: [SignificanceLevel; 3] = [
        SignificanceLevel::OnePercent,
        SignificanceLevel::FivePercent,
        SignificanceLevel::TenPercent,
    ];

    pub fn alpha(self) -> f64 {
        match self {
            SignificanceLevel::OnePercent => 0.01,
            SignificanceLevel::FivePercent => 0.05,
            SignificanceLevel::TenPercent => 0.10,
        }
    }
}

impl std::fmt::Display for SignificanceLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SignificanceLevel::OnePercent => "1%",
            SignificanceLevel::FivePercent => "5%",
            SignificanceLevel::TenPercent => "10%",
        };
        f.write_str(s)
    }
}

impl FromStr for SignificanceLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1%" | "1" | "0.01" => Ok(SignificanceLevel::OnePercent),
            "5%" | "5" | "0.05" => Ok(SignificanceLevel::FivePercent),
            "10%" | "10" | "0.1" | "0.10" => Ok(SignificanceLevel::TenPercent),
            other => Err(Error::InvalidInput(format!(
                "unknown significance level '{other}' (expected 1%, 5% or 10%)"
            ))),
        }
    }
}

/// One value per significance level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelMap<V> {
    #[serde(rename = "1%")]
    pub one: V,
    #[serde(rename = "5%")]
    pub five: V,
    #[serde(rename = "10%")]
    pub ten: V,
}

impl<V: Copy> LevelMap<V> {
    pub fn get(&self, level: SignificanceLevel) -> V {
        match level {
            SignificanceLevel::OnePercent => self.one,
            SignificanceLevel::FivePercent => self.five,
            SignificanceLevel::TenPercent => self.ten,
        }
    }

    pub fn map<W>(&self, f: impl Fn(V) -> W) -> LevelMap<W> {
        LevelMap {
            one: f(self.one),
            five: f(self.five),
            ten: f(self.ten),
        }
    }
}

/// `<X_n, v>` for every frame.
pub fn score_series<T: Real>(x: &FunctionSeries<T>, v: &GridFunction<T>) -> Result<Vec<T>> {
    x.frames().iter().map(|f| inner_product(f, v)).collect()
}
