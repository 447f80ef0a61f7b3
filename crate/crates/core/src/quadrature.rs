//! Numerical integration on simplices and balls.
//!
//! [`SimplexRule`] is a collapsed (Duffy/Stroud) product of Gauss-Legendre
//! rules, exact on polynomials up to a requested total degree. For integrands
//! with an integrable vertex singularity, [`integrate_vertex_cone`] writes the
//! simplex as a cone over the facet opposite the singular vertex,
//! `x = a + t (xi - a)`, so that the gauge about `a` is exactly `t` and the
//! Jacobian `n |S| t^(n-1)` absorbs the singular factor.

use itertools::Itertools;
use smallvec::SmallVec;
use thiserror::Error;

use crate::geometry::{GeometryError, Point, Simplex};
use crate::numeric::{compensated_sum, gauss_legendre_unit};

/// Radial nodes below this are refused; the cone substitution never samples `t = 0`.
pub const MIN_RADIAL_NODE: f64 = 1e-14;

/// Weighted integrand values above this are reported as a blow-up.
pub const OVERFLOW_GUARD: f64 = 1e250;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error("integrand is not finite at {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("integrand blow-up near the singular vertex: |g t^(n-1)| = {value:e} at t = {t:e}")]
    BlowUp { value: f64, t: f64 },
    #[error("rule dimension {rule} does not match simplex dimension {simplex}")]
    DimensionMismatch { rule: usize, simplex: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Bary = SmallVec<[f64; 4]>;

/// A quadrature rule on the reference `n`-simplex with barycentric nodes and
/// weights normalized to sum to one.
#[derive(Clone, Debug)]
pub struct SimplexRule {
    dim: usize,
    degree: usize,
    nodes: Vec<Bary>,
    weights: Vec<f64>,
}

impl SimplexRule {
    /// Collapsed Gauss product rule exact up to total degree `degree`.
    pub fn collapsed(dim: usize, degree: usize) -> Self {
        if dim == 0 {
            return Self {
                dim,
                degree,
                nodes: vec![SmallVec::from_slice(&[1.0])],
                weights: vec![1.0],
            };
        }
        // Direction k carries the Jacobian factor (1 - s_k)^(n - k - 1).
        let lines: Vec<(Vec<f64>, Vec<f64>)> = (0..dim)
            .map(|k| gauss_legendre_unit((degree + dim - k).div_ceil(2).max(1)))
            .collect();
        let n_factorial: f64 = (1..=dim).map(|k| k as f64).product();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for idx in lines
            .iter()
            .map(|(x, _)| 0..x.len())
            .multi_cartesian_product()
        {
            let mut remaining = 1.0;
            let mut weight = n_factorial;
            let mut y: Bary = SmallVec::with_capacity(dim + 1);
            y.push(0.0);
            for (k, &j) in idx.iter().enumerate() {
                let s = lines[k].0[j];
                weight *= lines[k].1[j] * (1.0 - s).powi((dim - k - 1) as i32);
                y.push(remaining * s);
                remaining *= 1.0 - s;
            }
            y[0] = remaining;
            nodes.push(y);
            weights.push(weight);
        }
        Self {
            dim,
            degree,
            nodes,
            weights,
        }
    }

    /// One-point rule at the centroid, degree 1.
    pub fn centroid(dim: usize) -> Self {
        Self {
            dim,
            degree: 1,
            nodes: vec![SmallVec::from_elem(1.0 / (dim + 1) as f64, dim + 1)],
            weights: vec![1.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Iterator over `(barycentric node, normalized weight)`.
    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes
            .iter()
            .map(|b| &b[..])
            .zip(self.weights.iter().copied())
    }
}

/// Cone rule about a vertex: a radial Gauss rule on `(0, 1)` and a simplex
/// rule on the opposite facet.
#[derive(Clone, Debug)]
pub struct ConeRule {
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
    facet: SimplexRule,
}

impl ConeRule {
    pub fn new(dim: usize, radial_degree: usize, facet_degree: usize) -> Self {
        let (radial_nodes, radial_weights) = gauss_legendre_unit((radial_degree + 1).div_ceil(2));
        debug_assert!(radial_nodes.iter().all(|&t| t > MIN_RADIAL_NODE));
        Self {
            radial_nodes,
            radial_weights,
            facet: SimplexRule::collapsed(dim.saturating_sub(1), facet_degree),
        }
    }

    /// Degree-10 radial rule and degree-8 facet rule.
    pub fn default_for(dim: usize) -> Self {
        Self::new(dim, 10, 8)
    }

    pub fn dim(&self) -> usize {
        self.facet.dim() + 1
    }

    /// Total number of cone nodes.
    pub fn len(&self) -> usize {
        self.radial_nodes.len() * self.facet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `vol(s) * sum_k w_k f(x_k)`.
pub fn integrate_simplex<F>(f: F, s: &Simplex, rule: &SimplexRule) -> Result<f64, QuadratureError>
where
    F: Fn(&[f64]) -> f64,
{
    if rule.dim() != s.dim() {
        return Err(QuadratureError::DimensionMismatch {
            rule: rule.dim(),
            simplex: s.dim(),
        });
    }
    let terms: Result<Vec<f64>, _> = rule
        .iter()
        .map(|(beta, w)| {
            let x = s.point_at(beta);
            let v = f(&x);
            if v.is_finite() {
                Ok(w * v)
            } else {
                Err(QuadratureError::NonFinite { point: x.to_vec() })
            }
        })
        .collect();
    Ok(s.volume() * compensated_sum(terms?))
}

/// `int_s f` where `f(a_i + t (xi - a_i)) = g(t, xi)`, via the cone substitution
/// about vertex `i`; `xi` runs over the facet opposite `a_i`.
pub fn integrate_vertex_cone<G>(
    g: G,
    s: &Simplex,
    i: usize,
    rule: &ConeRule,
) -> Result<f64, QuadratureError>
where
    G: Fn(f64, &[f64]) -> f64,
{
    let n = s.dim();
    if rule.dim() != n {
        return Err(QuadratureError::DimensionMismatch {
            rule: rule.dim(),
            simplex: n,
        });
    }
    if i > n {
        return Err(GeometryError::VertexIndex {
            index: i,
            count: n + 1,
        }
        .into());
    }
    let apex = s.vertex(i);
    let facet: Vec<&Point> = s
        .vertices()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, v)| v)
        .collect();
    let mut terms = Vec::with_capacity(rule.len());
    for (beta, wf) in rule.facet.iter() {
        let mut xi = Point::zeros(n);
        for (b, v) in beta.iter().zip(&facet) {
            for k in 0..n {
                xi[k] += b * v[k];
            }
        }
        for (&t, &wt) in rule.radial_nodes.iter().zip(&rule.radial_weights) {
            if t < MIN_RADIAL_NODE {
                return Err(QuadratureError::BlowUp { value: f64::NAN, t });
            }
            let weighted = g(t, &xi) * t.powi(n as i32 - 1);
            if !weighted.is_finite() || weighted.abs() > OVERFLOW_GUARD {
                if weighted.is_nan() {
                    let x: Vec<f64> = (0..n).map(|k| apex[k] + t * (xi[k] - apex[k])).collect();
                    return Err(QuadratureError::NonFinite { point: x });
                }
                return Err(QuadratureError::BlowUp { value: weighted, t });
            }
            terms.push(wf * wt * weighted);
        }
    }
    Ok(n as f64 * s.volume() * compensated_sum(terms))
}

/// Polar product rule on the unit ball of `R^n`, `n` in `{1, 2, 3}`.
#[derive(Clone, Debug)]
pub struct BallRule {
    dim: usize,
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
    directions: Vec<Point>,
    direction_weights: Vec<f64>,
}

impl BallRule {
    /// `radial_points` Gauss nodes in the radius and `angular_points`
    /// directions per angle (trapezoid in longitude, Gauss in latitude).
    pub fn new(dim: usize, radial_points: usize, angular_points: usize) -> Self {
        let (radial_nodes, radial_weights) = gauss_legendre_unit(radial_points);
        let (directions, direction_weights) = sphere_rule(dim, angular_points);
        Self {
            dim,
            radial_nodes,
            radial_weights,
            directions,
            direction_weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn sphere_rule(dim: usize, m: usize) -> (Vec<Point>, Vec<f64>) {
    use std::f64::consts::PI;
    match dim {
        1 => (vec![[1.0].into(), [-1.0].into()], vec![1.0, 1.0]),
        2 => {
            let m = m.max(1);
            (0..m)
                .map(|k| {
                    let phi = 2.0 * PI * k as f64 / m as f64;
                    (Point::from([phi.cos(), phi.sin()]), 2.0 * PI / m as f64)
                })
                .unzip()
        }
        3 => {
            let (z, wz) = gauss_legendre_unit(m.max(1));
            let longitudes = 2 * m.max(1);
            let mut dirs = Vec::new();
            let mut weights = Vec::new();
            for (zi, wi) in z.iter().zip(&wz) {
                let c = 2.0 * zi - 1.0;
                let rho = (1.0 - c * c).sqrt();
                for k in 0..longitudes {
                    let phi = 2.0 * PI * k as f64 / longitudes as f64;
                    dirs.push(Point::from([rho * phi.cos(), rho * phi.sin(), c]));
                    weights.push(2.0 * wi * 2.0 * PI / longitudes as f64);
                }
            }
            (dirs, weights)
        }
        _ => panic!("ball rules are provided for n in 1..=3, got {dim}"),
    }
}

/// `int_{B_radius(center)} f` where `f(center + rho * radius * omega) = g(rho, omega)`.
pub fn integrate_ball<G>(
    g: G,
    center: &[f64],
    radius: f64,
    rule: &BallRule,
) -> Result<f64, QuadratureError>
where
    G: Fn(f64, &[f64]) -> f64,
{
    let n = rule.dim();
    if !(radius > 0.0) {
        return Err(GeometryError::NonPositiveRadius(radius).into());
    }
    if center.len() != n {
        return Err(QuadratureError::DimensionMismatch {
            rule: n,
            simplex: center.len(),
        });
    }
    let mut terms = Vec::with_capacity(rule.radial_nodes.len() * rule.directions.len());
    for (omega, wo) in rule.directions.iter().zip(&rule.direction_weights) {
        for (&rho, &wr) in rule.radial_nodes.iter().zip(&rule.radial_weights) {
            let weighted = g(rho, omega) * rho.powi(n as i32 - 1);
            if !weighted.is_finite() {
                let x: Vec<f64> = (0..n)
                    .map(|k| center[k] + rho * radius * omega[k])
                    .collect();
                return Err(QuadratureError::NonFinite { point: x });
            }
            terms.push(wo * wr * weighted);
        }
    }
    Ok(radius.powi(n as i32) * compensated_sum(terms))
}

/// Volume of the ball of the given radius in `R^n`, `n` in `{1, 2, 3}`.
pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    use std::f64::consts::PI;
    let unit = match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => panic!("ball volume implemented for n in 1..=3"),
    };
    unit * radius.powi(dim as i32)
}

/// Barycentric vertex sets of the `2^n` children of the Freudenthal
/// refinement of a simplex, in terms of its own vertices.
pub fn refinement_pattern(dim: usize) -> Vec<Vec<Bary>> {
    // Reference simplex {1 >= y_1 >= ... >= y_n >= 0}; its double is tiled by
    // the unit Kuhn cells inside it.
    let perms: Vec<Vec<usize>> = (0..dim).permutations(dim).collect();
    let mut children = Vec::new();
    for base in (0..dim).map(|_| 0..2i64).multi_cartesian_product() {
        for perm in &perms {
            let mut corner = base.clone();
            let mut verts = vec![corner.clone()];
            for &axis in perm {
                corner[axis] += 1;
                verts.push(corner.clone());
            }
            let centroid: Vec<f64> = (0..dim)
                .map(|k| verts.iter().map(|v| v[k] as f64).sum::<f64>() / (dim + 1) as f64)
                .collect();
            if centroid.windows(2).any(|w| w[0] < w[1]) {
                continue;
            }
            let bary = verts
                .iter()
                .map(|v| {
                    let z: Vec<f64> = v.iter().map(|&c| c as f64 / 2.0).collect();
                    let mut b: Bary = SmallVec::with_capacity(dim + 1);
                    b.push(1.0 - z[0]);
                    for k in 0..dim {
                        b.push(z[k] - z.get(k + 1).copied().unwrap_or(0.0));
                    }
                    b
                })
                .collect();
            children.push(bary);
        }
    }
    children
}

/// One level of Freudenthal refinement of `s` into `2^n` simplices of equal volume.
pub fn refine(s: &Simplex) -> Result<Vec<Simplex>, QuadratureError> {
    refinement_pattern(s.dim())
        .iter()
        .map(|child| {
            let verts = child.iter().map(|b| s.point_at(b)).collect();
            Simplex::new(verts).map_err(QuadratureError::from)
        })
        .collect()
}

/// Composite rule over `levels` uniform refinements of `s`; used for
/// integrands that are only piecewise smooth.
pub fn integrate_simplex_refined<F>(
    f: F,
    s: &Simplex,
    rule: &SimplexRule,
    levels: usize,
) -> Result<f64, QuadratureError>
where
    F: Fn(&[f64]) -> f64,
{
    refined(&f, s, rule, levels)
}

fn refined(
    f: &dyn Fn(&[f64]) -> f64,
    s: &Simplex,
    rule: &SimplexRule,
    levels: usize,
) -> Result<f64, QuadratureError> {
    if levels == 0 {
        return integrate_simplex(f, s, rule);
    }
    let parts: Result<Vec<f64>, _> = refine(s)?
        .iter()
        .map(|c| refined(f, c, rule, levels - 1))
        .collect();
    Ok(compensated_sum(parts?))
}
