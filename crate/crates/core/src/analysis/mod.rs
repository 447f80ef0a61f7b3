//! Numerical verification of the integral representation identities, the
//! interpolation error functionals, averaging over frame offsets, and the
//! total-variation study for indicator functions.

mod bv;
mod errors;
mod lemmas;
mod sampling;
mod search;

pub use bv::{bv_counterexample, total_variation, BvStatistics, BV_BOUND_CONSTANT};
pub use errors::{
    default_domain, error_report, grad_error, translation_error, value_error, ErrorQuadrature,
    ErrorReport,
};
pub use lemmas::{
    check_lemma1, check_lemma2, kernel_k, kernel_term, LemmaContext, LemmaQuadrature, LemmaRegion,
    LemmaResidual,
};
pub use sampling::{
    averaged_error, convergence_sweep, AveragedReport, ConvergenceLevel, SampleError,
};
pub use search::{find_triangulation, FoundTriangulation, SearchSchedule};

use thiserror::Error;

use crate::fields::FieldError;
use crate::geometry::{GeometryError, Point};
use crate::mesh::MeshError;
use crate::quadrature::QuadratureError;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("field `{0}` has no pointwise gradient")]
    NoGradient(String),
    #[error("exponent must be finite and at least 1, got {0}")]
    InvalidExponent(f64),
    #[error("kernel is singular at a vertex of the simplex")]
    SingularKernel,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(
        "every sampled offset was rejected by the Lebesgue-point guard ({rejected} rejections)"
    )]
    AllSamplesRejected { rejected: usize },
    #[error("no frame met eps = {epsilon:e} within the refinement cap; best error {best_error:e} at r = {best_scale}")]
    SearchExhausted {
        epsilon: f64,
        best_error: f64,
        best_scale: f64,
        best_offset: Point,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

pub(crate) fn check_exponent(p: f64) -> Result<(), AnalysisError> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(AnalysisError::InvalidExponent(p))
    }
}
