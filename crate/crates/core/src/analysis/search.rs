//! Search for a frame whose interpolant meets a prescribed error budget:
//! halve the scale and, at each level, try seeded offsets from `B_r`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::errors::{default_domain, error_report, ErrorReport};
use super::sampling::{draw_accepted, level_rng};
use super::{check_exponent, AnalysisError};
use crate::fields::ScalarField;
use crate::mesh::TriangulationFrame;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSchedule {
    pub initial_scale: f64,
    pub max_levels: usize,
    pub samples_per_level: usize,
}

impl Default for SearchSchedule {
    fn default() -> Self {
        Self {
            initial_scale: 1.0,
            max_levels: 20,
            samples_per_level: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoundTriangulation {
    pub frame: TriangulationFrame,
    pub report: ErrorReport,
    pub level: usize,
    /// Offsets evaluated before acceptance, over all levels.
    pub attempts: usize,
}

/// Returns the first frame (coarsest level, then sample order) with
/// `grad_error_p + value_error_q <= epsilon` over the default domain.
///
/// Offsets at level `k` come from stream `k` of the seeded generator, so a
/// smaller `epsilon` never accepts a coarser scale for the same seed.
pub fn find_triangulation(
    u: &Arc<dyn ScalarField>,
    epsilon: f64,
    p: f64,
    q: f64,
    seed: u64,
    schedule: &SearchSchedule,
) -> Result<FoundTriangulation, AnalysisError> {
    check_exponent(p)?;
    check_exponent(q)?;
    if !(epsilon > 0.0) {
        return Err(AnalysisError::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if schedule.samples_per_level == 0 || !(schedule.initial_scale > 0.0) {
        return Err(AnalysisError::InvalidArgument(
            "empty search schedule".into(),
        ));
    }
    let dim = u.dim();
    let mut best: Option<ErrorReport> = None;
    let mut attempts = 0;
    let mut r = schedule.initial_scale;
    for level in 0..schedule.max_levels {
        let mut rng = level_rng(seed, level as u64);
        for _ in 0..schedule.samples_per_level {
            let (report, _) = draw_accepted(&mut rng, dim, r, |frame| {
                let domain = default_domain(u.as_ref(), &frame);
                error_report(u, &frame, p, q, &domain)
            })?;
            attempts += 1;
            if report.total() <= epsilon {
                let frame = TriangulationFrame::standard(dim, r, report.h.clone())?;
                return Ok(FoundTriangulation {
                    frame,
                    report,
                    level,
                    attempts,
                });
            }
            if best.as_ref().is_none_or(|b| report.total() < b.total()) {
                best = Some(report);
            }
        }
        r *= 0.5;
    }
    let best = best.expect("at least one sample evaluated");
    Err(AnalysisError::SearchExhausted {
        epsilon,
        best_error: best.total(),
        best_scale: best.r,
        best_offset: best.h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Affine, Gaussian};

    #[test]
    fn affine_succeeds_immediately() {
        let u: Arc<dyn ScalarField> = Arc::new(Affine::new(1.0, [0.5, -0.5]));
        let found = find_triangulation(&u, 1e-12, 2.0, 2.0, 5, &SearchSchedule::default()).unwrap();
        assert_eq!(found.level, 0);
        assert_eq!(found.attempts, 1);
        assert_eq!(found.frame.scale(), 1.0);
    }

    #[test]
    fn exhausted_search_reports_best() {
        let u: Arc<dyn ScalarField> = Arc::new(Gaussian::new(1));
        let schedule = SearchSchedule {
            initial_scale: 1.0,
            max_levels: 2,
            samples_per_level: 2,
        };
        let err = find_triangulation(&u, 1e-30, 2.0, 2.0, 5, &schedule).unwrap_err();
        match err {
            AnalysisError::SearchExhausted {
                best_error,
                best_scale,
                ..
            } => {
                assert!(best_error > 0.0);
                assert!(best_scale == 1.0 || best_scale == 0.5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
