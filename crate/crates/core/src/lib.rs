//! Functional autoregressions on `L²([0,1])` with unit roots.
//!
//! The crate is organised bottom-up:
//!
//! * [`funcspace`] discretises the Hilbert space: grid functions, quadrature
//!   inner products and time-indexed series.
//! * [`operators`] holds the three finite-rank operator families, their
//!   matrix reductions, spectra, adjoints and Fredholm determinants.
//! * [`far`] simulates functional AR(1)/AR(2) paths.
//! * [`unitroot`] classifies the spectrum and splits a process into its
//!   random-walk and stationary parts.
//! * [`stats`] is the empirical side: FPCA, Dickey–Fuller and Johansen tests.
//!
//! All numerical code except the test statistics is generic over [`Real`]
//! (`f32` or `f64`). Tolerances and test tables are tuned for `f64`; the
//! `*F64` aliases below are what most callers want.

pub mod error;
pub mod far;
pub mod funcspace;
mod linalg;
pub mod operators;
pub mod stats;
pub mod unitroot;

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub use error::{Error, Result};
pub use num_complex::Complex;

/// Scalar field used by the numerical core.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Serialize + DeserializeOwned
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f64 {}
impl Real for f32 {}

pub type GridDomainF64 = funcspace::GridDomain<f64>;
pub type GridFunctionF64 = funcspace::GridFunction<f64>;
pub type FunctionSeriesF64 = funcspace::FunctionSeries<f64>;
pub type OperatorSpecF64 = operators::OperatorSpec<f64>;
pub type MatrixReductionF64 = operators::MatrixReduction<f64>;
pub type NoiseSpecF64 = far::NoiseSpec<f64>;
pub type FarModelF64 = far::FarModel<f64>;
pub type SamplePathF64 = far::SamplePath<f64>;
pub type SpectrumReportF64 = unitroot::SpectrumReport<f64>;
pub type DecompositionF64 = unitroot::Decomposition<f64>;
pub type FpcaResultF64 = stats::FpcaResult<f64>;

pub type GridDomainF32 = funcspace::GridDomain<f32>;
pub type GridFunctionF32 = funcspace::GridFunction<f32>;
pub type FunctionSeriesF32 = funcspace::FunctionSeries<f32>;
pub type OperatorSpecF32 = operators::OperatorSpec<f32>;
