//! Monte Carlo averaging of the interpolation error over frame offsets
//! `h` drawn uniformly from the ball `B_r`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::errors::{default_domain, error_report};
use super::{check_exponent, AnalysisError};
use crate::fields::{FieldError, ScalarField};
use crate::geometry::Point;
use crate::mesh::TriangulationFrame;
use crate::numeric::compensated_sum;

/// Consecutive guard rejections tolerated before a run is declared misconfigured.
pub(crate) const MAX_CONSECUTIVE_REJECTIONS: usize = 1000;

/// Seeded generator for one refinement level or sweep step.
pub(crate) fn level_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform point of the ball `B_radius(0)` by rejection from the cube.
pub(crate) fn sample_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Point {
    loop {
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if p.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            return p.into_iter().map(|c| c * radius).collect::<Vec<_>>().into();
        }
    }
}

/// Draws offsets until `eval` accepts one, resampling on Lebesgue-guard
/// rejections. Returns the value and the number of rejections.
pub(crate) fn draw_accepted<T>(
    rng: &mut ChaCha8Rng,
    dim: usize,
    r: f64,
    mut eval: impl FnMut(TriangulationFrame) -> Result<T, AnalysisError>,
) -> Result<(T, usize), AnalysisError> {
    let mut rejected = 0;
    loop {
        let h = sample_ball(rng, dim, r);
        let frame = TriangulationFrame::standard(dim, r, h)?;
        match eval(frame) {
            Ok(v) => return Ok((v, rejected)),
            Err(AnalysisError::Field(FieldError::VertexOnSingularSet { .. })) => {
                rejected += 1;
                if rejected >= MAX_CONSECUTIVE_REJECTIONS {
                    return Err(AnalysisError::AllSamplesRejected { rejected });
                }
            }
            Err(e) => return Err(e),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleError {
    pub h: Point,
    pub grad_error_p: f64,
    pub value_error_q: f64,
}

impl SampleError {
    pub fn total(&self) -> f64 {
        self.grad_error_p + self.value_error_q
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedReport {
    pub r: f64,
    pub p: f64,
    pub q: f64,
    pub samples: usize,
    pub seed: u64,
    /// Mean, min and max of `grad_error_p + value_error_q` over the offsets.
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub argmin_h: Point,
    pub mean_grad_error: f64,
    pub mean_value_error: f64,
    pub rejected: usize,
    pub cells_per_sample: usize,
    pub per_sample: Vec<SampleError>,
}

/// Averages the error functionals over `samples` offsets drawn from `B_r`.
pub fn averaged_error(
    u: &Arc<dyn ScalarField>,
    r: f64,
    p: f64,
    q: f64,
    samples: usize,
    seed: u64,
) -> Result<AveragedReport, AnalysisError> {
    averaged_error_stream(u, r, p, q, samples, seed, 0)
}

pub(crate) fn averaged_error_stream(
    u: &Arc<dyn ScalarField>,
    r: f64,
    p: f64,
    q: f64,
    samples: usize,
    seed: u64,
    stream: u64,
) -> Result<AveragedReport, AnalysisError> {
    check_exponent(p)?;
    check_exponent(q)?;
    if samples == 0 {
        return Err(AnalysisError::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(AnalysisError::InvalidArgument(format!(
            "scale must be positive, got {r}"
        )));
    }
    let dim = u.dim();
    let mut rng = level_rng(seed, stream);
    let mut per_sample = Vec::with_capacity(samples);
    let mut rejected = 0;
    let mut cells = 0;
    for _ in 0..samples {
        let (rep, rej) = draw_accepted(&mut rng, dim, r, |frame| {
            let domain = default_domain(u.as_ref(), &frame);
            error_report(u, &frame, p, q, &domain)
        })?;
        rejected += rej;
        cells = rep.cells_visited;
        per_sample.push(SampleError {
            h: rep.h,
            grad_error_p: rep.grad_error_p,
            value_error_q: rep.value_error_q,
        });
    }
    let count = samples as f64;
    let totals: Vec<f64> = per_sample.iter().map(SampleError::total).collect();
    let (argmin, min) =
        totals
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (i, v)| if v < best.1 { (i, v) } else { best },
            );
    Ok(AveragedReport {
        r,
        p,
        q,
        samples,
        seed,
        mean: compensated_sum(totals.iter().copied()) / count,
        min,
        max: totals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        argmin_h: per_sample[argmin].h.clone(),
        mean_grad_error: compensated_sum(per_sample.iter().map(|s| s.grad_error_p)) / count,
        mean_value_error: compensated_sum(per_sample.iter().map(|s| s.value_error_q)) / count,
        rejected,
        cells_per_sample: cells,
        per_sample,
    })
}

/// One level of a refinement sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLevel {
    pub averaged: AveragedReport,
    /// `(mean grad_error_p)^(1/p)`, the averaged gradient error in `L^p` norm.
    pub grad_norm: f64,
    /// `(mean value_error_q)^(1/q)`.
    pub value_norm: f64,
    /// `grad_norm` of the previous level divided by this one.
    pub grad_ratio: Option<f64>,
}

/// Runs [`averaged_error`] along a scale schedule; level `k` draws its
/// offsets from stream `k` of the seeded generator.
pub fn convergence_sweep(
    u: &Arc<dyn ScalarField>,
    schedule: &[f64],
    p: f64,
    q: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<ConvergenceLevel>, AnalysisError> {
    let mut out: Vec<ConvergenceLevel> = Vec::with_capacity(schedule.len());
    for (k, &r) in schedule.iter().enumerate() {
        let averaged = averaged_error_stream(u, r, p, q, samples, seed, k as u64)?;
        let grad_norm = averaged.mean_grad_error.powf(1.0 / p);
        let value_norm = averaged.mean_value_error.powf(1.0 / q);
        let grad_ratio = out.last().map(|prev| prev.grad_norm / grad_norm);
        out.push(ConvergenceLevel {
            averaged,
            grad_norm,
            value_norm,
            grad_ratio,
        });
    }
    Ok(out)
}
