//! Embedded critical values.

use super::{AdfSpec, DetSpec, LevelMap};

/// Dickey–Fuller τ critical values, large-sample row. The no-deterministic
/// row uses the customary two-digit rounding.
pub fn adf_critical_values(spec: AdfSpec) -> LevelMap<f64> {
    match spec {
        AdfSpec::None => LevelMap { one: -2.6, five: -1.95, ten: -1.61 },
        AdfSpec::Constant => LevelMap { one: -3.43, five: -2.86, ten: -2.57 },
        AdfSpec::Trend => LevelMap { one: -3.96, five: -3.41, ten: -3.12 },
    }
}

// MacKinnon, Haug and Michelis (1999) trace quantiles, rows indexed by the
// number of stochastic trends under the null, columns 90%, 95%, 99%.
const TRACE_NONE: [[f64; 3]; 5] = [
    [2.9762, 4.1296, 6.9406],
    [10.4741, 12.3212, 16.364],
    [21.7781, 24.2761, 29.5147],
    [37.0339, 40.1749, 46.5716],
    [56.2839, 60.0627, 67.6367],
];

const TRACE_CONSTANT: [[f64; 3]; 5] = [
    [2.7055, 3.8415, 6.6349],
    [13.4294, 15.4943, 19.9349],
    [27.0669, 29.7961, 35.4628],
    [44.4929, 47.8545, 54.6815],
    [65.8202, 69.8189, 77.8202],
];

/// Trace critical values for `trends = p − r` stochastic trends, `1..=5`.
pub fn johansen_critical_values(det: DetSpec, trends: usize) -> Option<LevelMap<f64>> {
    let table = match det {
        DetSpec::None => &TRACE_NONE,
        DetSpec::Constant => &TRACE_CONSTANT,
    };
    let row = table.get(trends.checked_sub(1)?)?;
    Some(LevelMap {
        one: row[2],
        five: row[1],
        ten: row[0],
    })
}
