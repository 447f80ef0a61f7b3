//! Sobolev integral formula on simplices and balls, and the integral
//! representation of the derivative of the affine interpolant.
//!
//! For a convex body `C`, a base point `a` and gauge `gamma` about `a`:
//!
//! ```text
//! u(a) - avg_C u = (1/n) avg_C Du(x)[a - x] (gamma(x)^-n - 1) dx
//! ```
//!
//! On a simplex with `gamma_i = 1 - beta_i`, combining this identity at each
//! vertex with `D(Pi u) = sum_i u(a_i) D beta_i` and `sum_i D beta_i = 0` gives
//!
//! ```text
//! D(Pi u) = avg_S K[Du],  K(x)[l] = (1/n) sum_i (gamma_i(x)^-n - 1) l[a_i - x] D beta_i.
//! ```
//!
//! Every singular term is integrated with the cone substitution anchored at
//! its own vertex, where `l[a_i - x] = t l[a_i - xi]` cancels one power of `t`.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::fields::{InterpolatedCell, ScalarField};
use crate::geometry::{Covector, Point, Simplex};
use crate::quadrature::{
    ball_volume, integrate_ball, integrate_simplex, integrate_vertex_cone, BallRule, ConeRule,
    SimplexRule,
};

/// Quadrature used by the identity checks.
#[derive(Clone, Debug)]
pub struct LemmaQuadrature {
    pub mean_degree: usize,
    pub radial_degree: usize,
    pub facet_degree: usize,
    pub ball_radial_points: usize,
    pub ball_angular_points: usize,
}

impl Default for LemmaQuadrature {
    fn default() -> Self {
        Self {
            mean_degree: 24,
            radial_degree: 24,
            facet_degree: 20,
            ball_radial_points: 16,
            ball_angular_points: 48,
        }
    }
}

/// Where an identity is evaluated.
#[derive(Clone, Debug)]
pub enum LemmaRegion {
    SimplexVertex { simplex: Simplex, vertex: usize },
    Ball { center: Point, radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaContext {
    pub lemma: u8,
    pub field: String,
    pub dim: usize,
    /// `"simplex"` or `"ball"`.
    pub region: String,
    /// Simplex vertices, or the ball center.
    pub points: Vec<Point>,
    pub vertex: Option<usize>,
    pub radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaResidual {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Euclidean norm of `lhs - rhs`.
    pub residual: f64,
    pub context: LemmaContext,
}

impl LemmaResidual {
    fn new(lhs: Vec<f64>, rhs: Vec<f64>, context: LemmaContext) -> Self {
        let residual = lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        Self {
            lhs,
            rhs,
            residual,
            context,
        }
    }
}

fn gradient_at(u: &dyn ScalarField, x: &[f64]) -> Result<Covector, AnalysisError> {
    u.gradient(x)
        .ok_or_else(|| AnalysisError::NoGradient(u.name().to_string()))
}

/// Compares `u(a) - avg_C u` with the gauge-weighted gradient integral.
pub fn check_lemma1(
    u: &dyn ScalarField,
    region: &LemmaRegion,
    quad: &LemmaQuadrature,
) -> Result<LemmaResidual, AnalysisError> {
    let n = u.dim();
    let nf = n as f64;
    match region {
        LemmaRegion::SimplexVertex { simplex, vertex } => {
            let i = *vertex;
            if simplex.dim() != n || i > n {
                return Err(AnalysisError::InvalidArgument(format!(
                    "simplex of dimension {} with vertex {i} for a field on R^{n}",
                    simplex.dim()
                )));
            }
            let vol = simplex.volume();
            let a = simplex.vertex(i).clone();
            let mean = integrate_simplex(
                |x| u.value(x),
                simplex,
                &SimplexRule::collapsed(n, quad.mean_degree),
            )? / vol;
            let lhs = u.value(&a) - mean;

            let cone = ConeRule::new(n, quad.radial_degree, quad.facet_degree);
            gradient_at(u, &a)?;
            let integral = integrate_vertex_cone(
                |t, xi| {
                    let x: Vec<f64> = (0..n).map(|k| a[k] + t * (xi[k] - a[k])).collect();
                    let a_minus_xi: Vec<f64> = (0..n).map(|k| a[k] - xi[k]).collect();
                    // Du(x)[a - x] (t^-n - 1) with a - x = t (a - xi).
                    u.gradient(&x).map_or(f64::NAN, |g| {
                        t * g.apply(&a_minus_xi) * (t.powi(-(n as i32)) - 1.0)
                    })
                },
                simplex,
                i,
                &cone,
            )?;
            let rhs = integral / (nf * vol);
            Ok(LemmaResidual::new(
                vec![lhs],
                vec![rhs],
                LemmaContext {
                    lemma: 1,
                    field: u.name().to_string(),
                    dim: n,
                    region: "simplex".into(),
                    points: simplex.vertices().to_vec(),
                    vertex: Some(i),
                    radius: None,
                },
            ))
        }
        LemmaRegion::Ball { center, radius } => {
            if center.dim() != n || !(*radius > 0.0) {
                return Err(AnalysisError::InvalidArgument(format!(
                    "ball with center in R^{} and radius {radius} for a field on R^{n}",
                    center.dim()
                )));
            }
            let rule = BallRule::new(n, quad.ball_radial_points, quad.ball_angular_points);
            let vol = ball_volume(n, *radius);
            let at = |rho: f64, omega: &[f64]| -> Vec<f64> {
                (0..n)
                    .map(|k| center[k] + rho * radius * omega[k])
                    .collect()
            };
            let mean = integrate_ball(
                |rho, omega| u.value(&at(rho, omega)),
                center,
                *radius,
                &rule,
            )? / vol;
            let lhs = u.value(center) - mean;
            gradient_at(u, center)?;
            let integral = integrate_ball(
                |rho, omega| {
                    // Du(x)[a - x] (R^n / |a - x|^n - 1) with a - x = -rho R omega.
                    u.gradient(&at(rho, omega)).map_or(f64::NAN, |g| {
                        -rho * radius * g.apply(omega) * (rho.powi(-(n as i32)) - 1.0)
                    })
                },
                center,
                *radius,
                &rule,
            )?;
            let rhs = integral / (nf * vol);
            Ok(LemmaResidual::new(
                vec![lhs],
                vec![rhs],
                LemmaContext {
                    lemma: 1,
                    field: u.name().to_string(),
                    dim: n,
                    region: "ball".into(),
                    points: vec![center.clone()],
                    vertex: None,
                    radius: Some(*radius),
                },
            ))
        }
    }
}

/// The `i`-th term of the kernel, `(1/n) (gamma_i^-n - 1) l[a_i - x] D beta_i`.
pub fn kernel_term(
    s: &Simplex,
    i: usize,
    x: &[f64],
    l: &Covector,
) -> Result<Covector, AnalysisError> {
    let n = s.dim();
    let gamma = s.gauge(i, x)?;
    if gamma <= 1e-14 {
        return Err(AnalysisError::SingularKernel);
    }
    let a = s.vertex(i);
    let diff: Vec<f64> = (0..n).map(|k| a[k] - x[k]).collect();
    let scale = (gamma.powi(-(n as i32)) - 1.0) * l.apply(&diff) / n as f64;
    Ok(s.barycentric_differentials()[i]
        .iter()
        .map(|d| scale * d)
        .collect::<Vec<_>>()
        .into())
}

/// The kernel `K(x)[l]` whose average against `Du` is `D(Pi u)`.
pub fn kernel_k(s: &Simplex, x: &[f64], l: &Covector) -> Result<Covector, AnalysisError> {
    let n = s.dim();
    let mut out = Covector::zeros(n);
    for i in 0..=n {
        let term = kernel_term(s, i, x, l)?;
        for k in 0..n {
            out[k] += term[k];
        }
    }
    Ok(out)
}

/// Compares the interpolant gradient with the kernel average of `Du`.
pub fn check_lemma2(
    u: &dyn ScalarField,
    s: &Simplex,
    quad: &LemmaQuadrature,
) -> Result<LemmaResidual, AnalysisError> {
    let n = u.dim();
    if s.dim() != n {
        return Err(AnalysisError::InvalidArgument(format!(
            "simplex of dimension {} for a field on R^{n}",
            s.dim()
        )));
    }
    gradient_at(u, s.vertex(0))?;
    let cell = InterpolatedCell {
        simplex: s.clone(),
        values: s.vertices().iter().map(|a| u.value(a)).collect(),
    };
    let lhs = cell.gradient().to_vec();

    let cone = ConeRule::new(n, quad.radial_degree, quad.facet_degree);
    let vol = s.volume();
    let nf = n as f64;
    let mut rhs = vec![0.0; n];
    for i in 0..=n {
        let a = s.vertex(i).clone();
        let dbeta = s.barycentric_differentials()[i].clone();
        // Scalar part (1/n)(t^-n - 1) t Du(x)[a_i - xi]; D beta_i is constant.
        let scalar = integrate_vertex_cone(
            |t, xi| {
                let x: Vec<f64> = (0..n).map(|k| a[k] + t * (xi[k] - a[k])).collect();
                let a_minus_xi: Vec<f64> = (0..n).map(|k| a[k] - xi[k]).collect();
                u.gradient(&x).map_or(f64::NAN, |g| {
                    (t.powi(-(n as i32)) - 1.0) * t * g.apply(&a_minus_xi) / nf
                })
            },
            s,
            i,
            &cone,
        )?;
        for k in 0..n {
            rhs[k] += scalar * dbeta[k] / vol;
        }
    }
    Ok(LemmaResidual::new(
        lhs,
        rhs,
        LemmaContext {
            lemma: 2,
            field: u.name().to_string(),
            dim: n,
            region: "simplex".into(),
            points: s.vertices().to_vec(),
            vertex: None,
            radius: None,
        },
    ))
}
