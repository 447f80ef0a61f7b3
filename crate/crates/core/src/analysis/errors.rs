//! Interpolation error functionals `int |Du - Dv|^p` and `int |u - v|^q`
//! over a truncated domain, and the translation modulus of `Du`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_exponent, AnalysisError};
use crate::fields::{FieldClass, InterpolantField, ScalarField};
use crate::geometry::{Covector, Point};
use crate::mesh::{AxisBox, TriangulationFrame};
use crate::numeric::{compensated_sum, gauss_legendre_unit};
use crate::quadrature::{integrate_simplex_refined, SimplexRule};

/// Rules used per cell by the error functionals.
#[derive(Clone, Debug)]
pub struct ErrorQuadrature {
    /// Rule for cells where the field is smooth.
    pub rule: SimplexRule,
    /// Rule applied on each refined piece of a cell cut by a discontinuity.
    pub cut_rule: SimplexRule,
    /// Refinement levels for cut cells (`2^(n * levels)` pieces).
    pub cut_levels: usize,
}

impl ErrorQuadrature {
    pub fn for_dim(dim: usize) -> Self {
        Self {
            rule: SimplexRule::collapsed(dim, 6),
            cut_rule: SimplexRule::collapsed(dim, 2),
            cut_levels: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub r: f64,
    pub h: Point,
    pub p: f64,
    pub q: f64,
    /// `int |Du - Dv|^p`.
    pub grad_error_p: f64,
    /// `int |u - v|^q`.
    pub value_error_q: f64,
    pub domain: AxisBox,
    pub cells_visited: usize,
    /// Bound on `|u|, |Du|` outside the truncated domain.
    pub truncation_bound: f64,
}

impl ErrorReport {
    pub fn total(&self) -> f64 {
        self.grad_error_p + self.value_error_q
    }
}

/// The field's support expanded by one lattice-cube width of the frame.
pub fn default_domain(u: &dyn ScalarField, frame: &TriangulationFrame) -> AxisBox {
    u.support().expanded(frame.cell_width())
}

#[derive(Clone, Copy)]
enum Want {
    Grad,
    Value,
    Both,
}

fn cell_errors(
    v: &InterpolantField,
    frame: &TriangulationFrame,
    p: f64,
    q: f64,
    domain: &AxisBox,
    quad: &ErrorQuadrature,
    want: Want,
) -> Result<(f64, f64, usize), AnalysisError> {
    let u = v.source().clone();
    let need_grad = !matches!(want, Want::Value);
    if need_grad && u.class() == FieldClass::BvIndicator {
        return Err(AnalysisError::NoGradient(u.name().to_string()));
    }
    let need_value = !matches!(want, Want::Grad);
    let cells = frame.cells_in_box(domain)?;
    let parts: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|key| -> Result<(f64, f64), AnalysisError> {
            let cell = v.cell(key)?;
            let s = &cell.simplex;
            let g = cell.gradient();
            if u.class() == FieldClass::BvIndicator {
                let cut = u
                    .singular_distance(&s.centroid())
                    .is_some_and(|d| d <= s.diameter());
                let value = if cut {
                    integrate_simplex_refined(
                        |x| {
                            let beta = s.barycentric(x);
                            (u.value(x) - cell.value_at(&beta)).abs().powf(q)
                        },
                        s,
                        &quad.cut_rule,
                        quad.cut_levels,
                    )?
                } else {
                    // Away from the jump set the field is constant on the cell.
                    let mid = s.centroid();
                    let c = u.value(&mid);
                    let vol = s.volume();
                    compensated_sum(
                        quad.rule
                            .iter()
                            .map(|(beta, w)| w * (c - cell.value_at(beta)).abs().powf(q)),
                    ) * vol
                };
                return Ok((0.0, value));
            }
            let mut grad_terms = Vec::with_capacity(quad.rule.len());
            let mut value_terms = Vec::with_capacity(quad.rule.len());
            for (beta, w) in quad.rule.iter() {
                let x = s.point_at(beta);
                if need_value {
                    value_terms.push(w * (u.value(&x) - cell.value_at(beta)).abs().powf(q));
                }
                if need_grad {
                    let du = u
                        .gradient(&x)
                        .ok_or_else(|| AnalysisError::NoGradient(u.name().to_string()))?;
                    let diff: f64 = du
                        .iter()
                        .zip(g.iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    grad_terms.push(w * diff.powf(p));
                }
            }
            let vol = s.volume();
            Ok((
                compensated_sum(grad_terms) * vol,
                compensated_sum(value_terms) * vol,
            ))
        })
        .collect::<Result<_, _>>()?;
    let grad = compensated_sum(parts.iter().map(|c| c.0));
    let value = compensated_sum(parts.iter().map(|c| c.1));
    Ok((grad, value, cells.len()))
}

fn interpolant(
    u: &std::sync::Arc<dyn ScalarField>,
    frame: &TriangulationFrame,
) -> Result<InterpolantField, AnalysisError> {
    Ok(InterpolantField::new(frame.clone(), u.clone())?)
}

/// `int_domain |Du - D(Pi u)|^p` over every cell meeting `domain`.
pub fn grad_error(
    u: &std::sync::Arc<dyn ScalarField>,
    frame: &TriangulationFrame,
    p: f64,
    domain: &AxisBox,
) -> Result<f64, AnalysisError> {
    check_exponent(p)?;
    let v = interpolant(u, frame)?;
    let quad = ErrorQuadrature::for_dim(frame.dim());
    Ok(cell_errors(&v, frame, p, 1.0, domain, &quad, Want::Grad)?.0)
}

/// `int_domain |u - Pi u|^q` over every cell meeting `domain`.
pub fn value_error(
    u: &std::sync::Arc<dyn ScalarField>,
    frame: &TriangulationFrame,
    q: f64,
    domain: &AxisBox,
) -> Result<f64, AnalysisError> {
    check_exponent(q)?;
    let v = interpolant(u, frame)?;
    let quad = ErrorQuadrature::for_dim(frame.dim());
    Ok(cell_errors(&v, frame, 1.0, q, domain, &quad, Want::Value)?.1)
}

/// Both error functionals in one pass over the cells.
pub fn error_report(
    u: &std::sync::Arc<dyn ScalarField>,
    frame: &TriangulationFrame,
    p: f64,
    q: f64,
    domain: &AxisBox,
) -> Result<ErrorReport, AnalysisError> {
    check_exponent(p)?;
    check_exponent(q)?;
    let v = interpolant(u, frame)?;
    let quad = ErrorQuadrature::for_dim(frame.dim());
    let (grad, value, cells) = cell_errors(&v, frame, p, q, domain, &quad, Want::Both)?;
    Ok(ErrorReport {
        r: frame.scale(),
        h: frame.offset().clone(),
        p,
        q,
        grad_error_p: grad,
        value_error_q: value,
        domain: domain.clone(),
        cells_visited: cells,
        truncation_bound: u.tail_bound(),
    })
}

/// `int |Du(x) - Du(x + h)|^p dx` over the union of the support and its
/// shift, by a composite tensor Gauss rule.
pub fn translation_error(u: &dyn ScalarField, h: &[f64], p: f64) -> Result<f64, AnalysisError> {
    check_exponent(p)?;
    let n = u.dim();
    if h.len() != n {
        return Err(AnalysisError::InvalidArgument(format!(
            "shift of length {} for a field on R^{n}",
            h.len()
        )));
    }
    if u.class() == FieldClass::BvIndicator {
        return Err(AnalysisError::NoGradient(u.name().to_string()));
    }
    let neg: Vec<f64> = h.iter().map(|c| -c).collect();
    let domain = u.support().hull(&u.support().translated(&neg));
    let (panels, points) = match n {
        1 => (512, 8),
        2 => (96, 6),
        _ => (28, 5),
    };
    let (gx, gw) = gauss_legendre_unit(points);
    let widths: Vec<f64> = (0..n)
        .map(|k| (domain.upper[k] - domain.lower[k]) / panels as f64)
        .collect();
    // Parallel over panels of the first axis; tensor rule over the rest.
    let slabs: Vec<f64> = (0..panels)
        .into_par_iter()
        .map(|first| -> Result<f64, AnalysisError> {
            let mut terms = Vec::new();
            let per_axis = panels * points;
            let inner = per_axis.pow(n as u32 - 1);
            let mut x = vec![0.0; n];
            let mut shifted = vec![0.0; n];
            for i0 in 0..points {
                x[0] = domain.lower[0] + widths[0] * (first as f64 + gx[i0]);
                let w0 = gw[i0] * widths[0];
                for flat in 0..inner {
                    let mut w = w0;
                    let mut rest = flat;
                    for k in 1..n {
                        let idx = rest % per_axis;
                        rest /= per_axis;
                        let (panel, node) = (idx / points, idx % points);
                        x[k] = domain.lower[k] + widths[k] * (panel as f64 + gx[node]);
                        w *= gw[node] * widths[k];
                    }
                    for k in 0..n {
                        shifted[k] = x[k] + h[k];
                    }
                    let a = u.gradient(&x).unwrap_or_else(|| Covector::zeros(n));
                    let b = u.gradient(&shifted).unwrap_or_else(|| Covector::zeros(n));
                    let diff: f64 = a
                        .iter()
                        .zip(b.iter())
                        .map(|(s, t)| (s - t) * (s - t))
                        .sum::<f64>()
                        .sqrt();
                    terms.push(w * diff.powf(p));
                }
            }
            Ok(compensated_sum(terms))
        })
        .collect::<Result<_, _>>()?;
    Ok(compensated_sum(slabs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Affine, Gaussian, Quadratic, TriangleIndicator};
    use crate::mesh::BaseTriangulation;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn unit_frame(n: usize, r: f64) -> TriangulationFrame {
        TriangulationFrame::new(
            BaseTriangulation::with_spacing(n, 1.0).unwrap(),
            r,
            vec![0.0; n],
        )
        .unwrap()
    }

    #[test]
    fn affine_errors_vanish() {
        let u: Arc<dyn ScalarField> = Arc::new(Affine::new(0.5, [1.0, -2.0]));
        let frame = TriangulationFrame::standard(2, 0.3, [0.05, -0.11]).unwrap();
        let rep = error_report(&u, &frame, 2.0, 2.0, &default_domain(u.as_ref(), &frame)).unwrap();
        assert!(rep.grad_error_p < 1e-20);
        assert!(rep.value_error_q < 1e-20);
    }

    #[test]
    fn one_dimensional_square_closed_forms() {
        // On [0, r]: int (x^2 - r x)^2 = r^5 / 30, int (2x - r)^2 = r^3 / 3.
        let u: Arc<dyn ScalarField> = Arc::new(Quadratic::squared_norm(1));
        for r in [1.0, 0.5, 0.25] {
            let frame = unit_frame(1, r);
            let cell = AxisBox::new([0.0], [r]).unwrap();
            assert_relative_eq!(
                value_error(&u, &frame, 2.0, &cell).unwrap(),
                r.powi(5) / 30.0,
                max_relative = 1e-13
            );
            assert_relative_eq!(
                grad_error(&u, &frame, 2.0, &cell).unwrap(),
                r.powi(3) / 3.0,
                max_relative = 1e-13
            );
        }
        let domain = AxisBox::new([0.0], [1.0]).unwrap();
        let coarse = grad_error(&u, &unit_frame(1, 1.0), 2.0, &domain)
            .unwrap()
            .sqrt();
        let fine = grad_error(&u, &unit_frame(1, 0.5), 2.0, &domain)
            .unwrap()
            .sqrt();
        assert_relative_eq!(coarse / fine, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn indicator_has_value_error_only() {
        let u: Arc<dyn ScalarField> = Arc::new(TriangleIndicator);
        let frame = TriangulationFrame::standard(2, 0.1, [0.0123, 0.0456]).unwrap();
        let domain = default_domain(u.as_ref(), &frame);
        assert!(matches!(
            grad_error(&u, &frame, 1.0, &domain),
            Err(AnalysisError::NoGradient(_))
        ));
        let e = value_error(&u, &frame, 1.0, &domain).unwrap();
        assert!(e > 0.0 && e < 0.2, "{e}");
    }

    #[test]
    fn invalid_exponent() {
        let u: Arc<dyn ScalarField> = Arc::new(Gaussian::new(1));
        let frame = unit_frame(1, 1.0);
        assert!(matches!(
            grad_error(&u, &frame, 0.5, &u.support()),
            Err(AnalysisError::InvalidExponent(_))
        ));
    }

    #[test]
    fn translation_error_basics() {
        let u = Gaussian::new(2);
        assert_eq!(translation_error(&u, &[0.0, 0.0], 2.0).unwrap(), 0.0);
        let small = translation_error(&u, &[0.01, 0.0], 2.0).unwrap();
        let smaller = translation_error(&u, &[0.005, 0.0], 2.0).unwrap();
        assert_relative_eq!(small / smaller, 4.0, max_relative = 1e-3);
    }
}
