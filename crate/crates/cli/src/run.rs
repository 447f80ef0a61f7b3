//! Command execution and pass/fail evaluation.

use std::time::Instant;

use pwaffine::analysis::{
    bv_counterexample, check_lemma1, check_lemma2, convergence_sweep, AnalysisError, BvStatistics,
    ConvergenceLevel, LemmaQuadrature, LemmaRegion, LemmaResidual,
};
use pwaffine::fields::field_by_name;
use pwaffine::geometry::GeometryError;
use pwaffine::{AxisBox, Point, Simplex, TriangulationFrame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Command, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("could not draw a non-degenerate simplex in {attempts} attempts")]
    DegenerateSampling { attempts: usize },
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot encode report: {0}")]
    Encode(#[from] serde_json::Error),
}

impl From<GeometryError> for RunError {
    fn from(e: GeometryError) -> Self {
        RunError::Analysis(e.into())
    }
}

impl From<pwaffine::mesh::MeshError> for RunError {
    fn from(e: pwaffine::mesh::MeshError) -> Self {
        RunError::Analysis(e.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Below,
}

/// One configured tolerance and its outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, relation: Relation, bound: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => value <= bound,
            Relation::AtLeast => value >= bound,
            Relation::Below => value < bound,
        };
        Self {
            name: name.into(),
            value,
            relation,
            bound,
            passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocatedPoint {
    pub x: Point,
    pub base: Vec<i64>,
    pub perm: Vec<usize>,
    pub barycentric: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Results {
    Lemma {
        residuals: Vec<LemmaResidual>,
        max_residual: f64,
    },
    Converge {
        levels: Vec<ConvergenceLevel>,
    },
    Bv {
        studies: Vec<BvStatistics>,
    },
    LocateDemo {
        frame: TriangulationFrame,
        points: Vec<LocatedPoint>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: RunConfig,
    pub results: Results,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub wall_time_seconds: f64,
}

impl RunReport {
    /// The report as JSON with the wall-time field removed, for reproducibility comparisons.
    pub fn timeless_json(&self) -> Result<String, serde_json::Error> {
        let mut value = serde_json::to_value(self)?;
        if let Some(map) = value.as_object_mut() {
            map.remove("wall_time_seconds");
        }
        serde_json::to_string_pretty(&value)
    }
}

/// Runs the configured command. Tolerance failures are reported in
/// [`RunReport::passed`]; only setup and numerical errors are `Err`.
pub fn execute(config: &RunConfig) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let (results, checks) = match config.command {
        Command::Lemma1 | Command::Lemma2 => run_lemmas(config)?,
        Command::Converge => run_converge(config)?,
        Command::Bv => run_bv(config)?,
        Command::LocateDemo => run_locate(config)?,
    };
    Ok(RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        passed: checks.iter().all(|c| c.passed),
        results,
        checks,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

fn uniform_in(rng: &mut ChaCha8Rng, b: &AxisBox) -> Point {
    b.lower
        .iter()
        .zip(b.upper.iter())
        .map(|(&lo, &hi)| rng.random_range(lo..hi))
        .collect::<Vec<_>>()
        .into()
}

/// Simplices with vertices uniform in `b`, rejecting those thinner than a
/// fixed fraction of the box volume.
pub fn random_simplices(
    rng: &mut ChaCha8Rng,
    b: &AxisBox,
    count: usize,
) -> Result<Vec<Simplex>, RunError> {
    let n = b.dim();
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let floor = 1e-2 * b.volume() / factorial;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 1000 * (count + 1) {
            return Err(RunError::DegenerateSampling { attempts });
        }
        let verts: Vec<Point> = (0..=n).map(|_| uniform_in(rng, b)).collect();
        if let Ok(s) = Simplex::new(verts) {
            if s.volume() >= floor {
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// Balls centred uniformly in `b` with radius between a tenth and a half of its shortest side.
pub fn random_balls(rng: &mut ChaCha8Rng, b: &AxisBox, count: usize) -> Vec<(Point, f64)> {
    let side = b
        .lower
        .iter()
        .zip(b.upper.iter())
        .map(|(lo, hi)| hi - lo)
        .fold(f64::INFINITY, f64::min);
    (0..count)
        .map(|_| {
            let c = uniform_in(rng, b);
            (c, rng.random_range(0.1 * side..0.5 * side))
        })
        .collect()
}

type Outcome = (Results, Vec<Check>);

fn run_lemmas(config: &RunConfig) -> Result<Outcome, RunError> {
    let n = config.dimension;
    let u = field_by_name(&config.field, n).map_err(AnalysisError::from)?;
    let quad = LemmaQuadrature::default();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let region = config.sampling_box();
    let simplices = random_simplices(&mut rng, &region, config.simplices)?;
    let mut residuals = Vec::new();
    if config.command == Command::Lemma1 {
        for s in &simplices {
            for vertex in 0..=n {
                let region = LemmaRegion::SimplexVertex {
                    simplex: s.clone(),
                    vertex,
                };
                residuals.push(check_lemma1(u.as_ref(), &region, &quad)?);
            }
        }
        for (center, radius) in random_balls(&mut rng, &region, config.balls) {
            residuals.push(check_lemma1(
                u.as_ref(),
                &LemmaRegion::Ball { center, radius },
                &quad,
            )?);
        }
    } else {
        for s in &simplices {
            residuals.push(check_lemma2(u.as_ref(), s, &quad)?);
        }
    }
    let max_residual = residuals.iter().map(|r| r.residual).fold(0.0, f64::max);
    let checks = vec![Check::new(
        format!("{} max residual", config.command.name()),
        max_residual,
        Relation::AtMost,
        config.tolerances.lemma_residual,
    )];
    Ok((
        Results::Lemma {
            residuals,
            max_residual,
        },
        checks,
    ))
}

fn run_converge(config: &RunConfig) -> Result<Outcome, RunError> {
    let u = field_by_name(&config.field, config.dimension).map_err(AnalysisError::from)?;
    let levels = convergence_sweep(
        &u,
        &config.r_schedule,
        config.p,
        config.q,
        config.samples,
        config.seed,
    )?;
    let tol = &config.tolerances;
    let mut checks = Vec::new();
    if tol.strictly_decreasing {
        for pair in levels.windows(2) {
            checks.push(Check::new(
                format!(
                    "mean error at r={} below r={}",
                    pair[1].averaged.r, pair[0].averaged.r
                ),
                pair[1].averaged.mean,
                Relation::Below,
                pair[0].averaged.mean,
            ));
        }
    }
    if let Some([lo, hi]) = tol.grad_ratio {
        let ratios: Vec<(f64, f64)> = levels
            .iter()
            .filter_map(|l| l.grad_ratio.map(|g| (l.averaged.r, g)))
            .collect();
        for &(r, g) in ratios.iter().rev().take(tol.ratio_levels).rev() {
            checks.push(Check::new(
                format!("gradient ratio into r={r} above"),
                g,
                Relation::AtLeast,
                lo,
            ));
            checks.push(Check::new(
                format!("gradient ratio into r={r} below"),
                g,
                Relation::AtMost,
                hi,
            ));
        }
    }
    Ok((Results::Converge { levels }, checks))
}

fn run_bv(config: &RunConfig) -> Result<Outcome, RunError> {
    let tol = &config.tolerances;
    let mut studies = Vec::new();
    let mut checks = Vec::new();
    for &r in &config.r_schedule {
        let stats = bv_counterexample(r, config.samples, config.seed)?;
        checks.push(Check::new(
            format!("max TV at r={r} within bound"),
            stats.max_tv,
            Relation::AtMost,
            tol.bound_constant * stats.exact_tv,
        ));
        if let Some(min) = tol.min_tv {
            checks.push(Check::new(
                format!("min TV at r={r}"),
                stats.min_tv,
                Relation::AtLeast,
                min,
            ));
        }
        if let Some(mean) = tol.mean_tv {
            checks.push(Check::new(
                format!("mean TV at r={r}"),
                stats.mean_tv,
                Relation::AtLeast,
                mean,
            ));
        }
        studies.push(stats);
    }
    Ok((Results::Bv { studies }, checks))
}

fn run_locate(config: &RunConfig) -> Result<Outcome, RunError> {
    let n = config.dimension;
    let r = config.r_schedule[0];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let h: Vec<f64> = (0..n)
        .map(|_| rng.random_range(-r..r) / (n as f64).sqrt())
        .collect();
    let frame = TriangulationFrame::standard(n, r, h)?;
    let region = config.sampling_box();
    let mut points = Vec::with_capacity(config.samples);
    let mut worst = f64::INFINITY;
    for _ in 0..config.samples {
        let x = uniform_in(&mut rng, &region);
        let key = frame.locate(&x)?;
        let s = frame.simplex_of(&key)?;
        let beta = s.barycentric(&x);
        worst = worst.min(beta.min());
        points.push(LocatedPoint {
            x,
            base: key.base,
            perm: key.perm,
            barycentric: beta.values().to_vec(),
        });
    }
    let checks = vec![Check::new(
        "smallest barycentric coordinate of located points",
        worst,
        Relation::AtLeast,
        -config.tolerances.locate,
    )];
    Ok((Results::LocateDemo { frame, points }, checks))
}
