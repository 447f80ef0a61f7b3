//! Scalar test fields and their piecewise affine interpolants.

use std::sync::Arc;

use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Covector, Point, Simplex};
use crate::mesh::{AxisBox, CellKey, MeshError, TriangulationFrame};

/// Vertices closer than `LEBESGUE_GUARD * r` to a discontinuity are refused.
pub const LEBESGUE_GUARD: f64 = 1e-9;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("triangulation vertex {vertex:?} lies within {distance:e} of the discontinuity set; resample the frame offset")]
    VertexOnSingularSet { vertex: Vec<f64>, distance: f64 },
    #[error("field `{0}` has no pointwise gradient")]
    NoGradient(String),
    #[error("field dimension {field} does not match frame dimension {frame}")]
    DimensionMismatch { field: usize, frame: usize },
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("field `{name}` is not available in dimension {dim}")]
    UnsupportedDimension { name: String, dim: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldClass {
    Affine,
    Smooth,
    BvIndicator,
}

/// A pointwise-defined scalar function on `R^n`.
pub trait ScalarField: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    /// Weak gradient, `None` where the field has none (indicators).
    fn gradient(&self, x: &[f64]) -> Option<Covector>;
    /// Box outside of which the field (or its error integrals) is neglected.
    fn support(&self) -> AxisBox;
    fn class(&self) -> FieldClass;
    /// Distance from `x` to the discontinuity set, for BV fields.
    fn singular_distance(&self, _x: &[f64]) -> Option<f64> {
        None
    }
    /// Bound on `|u|` and `|Du|` outside [`ScalarField::support`].
    fn tail_bound(&self) -> f64 {
        0.0
    }
}

/// `c + l[x]`, observed on a window.
#[derive(Clone, Debug)]
pub struct Affine {
    pub constant: f64,
    pub slope: Covector,
    pub window: AxisBox,
    name: String,
}

impl Affine {
    pub fn new(constant: f64, slope: impl Into<Covector>) -> Self {
        let slope = slope.into();
        let n = slope.dim();
        Self {
            constant,
            slope,
            window: AxisBox::cube(n, -1.0, 1.0),
            name: "affine".into(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut f = Self::new(c, Covector::zeros(n));
        f.name = "constant".into();
        f
    }

    pub fn with_window(mut self, window: AxisBox) -> Self {
        self.window = window;
        self
    }
}

impl ScalarField for Affine {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.slope.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.constant + self.slope.apply(x)
    }
    fn gradient(&self, _x: &[f64]) -> Option<Covector> {
        Some(self.slope.clone())
    }
    fn support(&self) -> AxisBox {
        self.window.clone()
    }
    fn class(&self) -> FieldClass {
        FieldClass::Affine
    }
}

/// `x^T A x / 2 + b[x] + c` with symmetric `A` (row-major), observed on a window.
#[derive(Clone, Debug)]
pub struct Quadratic {
    hessian: Vec<f64>,
    linear: Covector,
    constant: f64,
    window: AxisBox,
}

impl Quadratic {
    pub fn new(hessian: Vec<f64>, linear: impl Into<Covector>, constant: f64) -> Self {
        let linear = linear.into();
        let n = linear.dim();
        assert_eq!(hessian.len(), n * n, "hessian must be n x n");
        Self {
            hessian,
            linear,
            constant,
            window: AxisBox::cube(n, -1.0, 1.0),
        }
    }

    /// `|x|^2`.
    pub fn squared_norm(n: usize) -> Self {
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            h[i * n + i] = 2.0;
        }
        Self::new(h, Covector::zeros(n), 0.0)
    }

    pub fn with_window(mut self, window: AxisBox) -> Self {
        self.window = window;
        self
    }

    fn hx(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.hessian[i * n + j] * x[j]).sum())
            .collect()
    }
}

impl ScalarField for Quadratic {
    fn name(&self) -> &str {
        "quadratic"
    }
    fn dim(&self) -> usize {
        self.linear.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let hx = self.hx(x);
        0.5 * hx.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            + self.linear.apply(x)
            + self.constant
    }
    fn gradient(&self, x: &[f64]) -> Option<Covector> {
        let hx = self.hx(x);
        Some(
            hx.iter()
                .zip(self.linear.iter())
                .map(|(a, b)| a + b)
                .collect::<Vec<_>>()
                .into(),
        )
    }
    fn support(&self) -> AxisBox {
        self.window.clone()
    }
    fn class(&self) -> FieldClass {
        FieldClass::Smooth
    }
}

/// `exp(-|x|^2)`, truncated where it falls below `1e-16`.
#[derive(Clone, Debug)]
pub struct Gaussian {
    dim: usize,
}

impl Gaussian {
    /// Half-width of the truncation box: `exp(-R^2) < 1e-16` and
    /// `2 R exp(-R^2) < 1e-15` beyond it.
    pub const TRUNCATION_RADIUS: f64 = 6.1;

    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl ScalarField for Gaussian {
    fn name(&self) -> &str {
        "gaussian"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (-x.iter().map(|c| c * c).sum::<f64>()).exp()
    }
    fn gradient(&self, x: &[f64]) -> Option<Covector> {
        let e = self.value(x);
        Some(x.iter().map(|c| -2.0 * c * e).collect::<Vec<_>>().into())
    }
    fn support(&self) -> AxisBox {
        AxisBox::cube(self.dim, -Self::TRUNCATION_RADIUS, Self::TRUNCATION_RADIUS)
    }
    fn class(&self) -> FieldClass {
        FieldClass::Smooth
    }
    fn tail_bound(&self) -> f64 {
        let r = Self::TRUNCATION_RADIUS;
        (-r * r).exp() * (1.0f64).max(2.0 * r)
    }
}

/// `exp(1 - 1 / (1 - |x|^2))` on the unit ball, zero outside.
#[derive(Clone, Debug)]
pub struct Bump {
    dim: usize,
}

impl Bump {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl ScalarField for Bump {
    fn name(&self) -> &str {
        "bump"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        let s: f64 = x.iter().map(|c| c * c).sum();
        if s >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s)).exp()
        }
    }
    fn gradient(&self, x: &[f64]) -> Option<Covector> {
        let s: f64 = x.iter().map(|c| c * c).sum();
        if s >= 1.0 {
            return Some(Covector::zeros(self.dim));
        }
        let d = 1.0 - s;
        let e = (1.0 - 1.0 / d).exp();
        Some(
            x.iter()
                .map(|c| -2.0 * c * e / (d * d))
                .collect::<Vec<_>>()
                .into(),
        )
    }
    fn support(&self) -> AxisBox {
        AxisBox::cube(self.dim, -1.0, 1.0)
    }
    fn class(&self) -> FieldClass {
        FieldClass::Smooth
    }
}

/// Characteristic function of the closed triangle `(0,0), (0,1), (1,0)`.
#[derive(Clone, Debug, Default)]
pub struct TriangleIndicator;

impl TriangleIndicator {
    pub const VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]];

    /// `int |Du|`: the perimeter of the triangle.
    pub fn exact_total_variation() -> f64 {
        let v = Self::VERTICES;
        (0..3)
            .map(|i| crate::geometry::distance(&v[i], &v[(i + 1) % 3]))
            .sum()
    }
}

fn segment_distance(p: &[f64], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let w = [p[0] - a[0], p[1] - a[1]];
    let t = ((w[0] * d[0] + w[1] * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

impl ScalarField for TriangleIndicator {
    fn name(&self) -> &str {
        "indicator-triangle"
    }
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        if x[0] >= 0.0 && x[1] >= 0.0 && x[0] + x[1] <= 1.0 {
            1.0
        } else {
            0.0
        }
    }
    fn gradient(&self, _x: &[f64]) -> Option<Covector> {
        None
    }
    fn support(&self) -> AxisBox {
        AxisBox::cube(2, 0.0, 1.0)
    }
    fn class(&self) -> FieldClass {
        FieldClass::BvIndicator
    }
    fn singular_distance(&self, x: &[f64]) -> Option<f64> {
        let v = Self::VERTICES;
        Some(
            (0..3)
                .map(|i| segment_distance(x, &v[i], &v[(i + 1) % 3]))
                .fold(f64::INFINITY, f64::min),
        )
    }
}

/// `x -> u(x - shift)`.
pub struct Translated {
    inner: Arc<dyn ScalarField>,
    shift: Point,
}

impl Translated {
    pub fn new(inner: Arc<dyn ScalarField>, shift: impl Into<Point>) -> Self {
        Self {
            inner,
            shift: shift.into(),
        }
    }

    fn pull(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.shift.iter())
            .map(|(a, b)| a - b)
            .collect()
    }
}

impl ScalarField for Translated {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(&self.pull(x))
    }
    fn gradient(&self, x: &[f64]) -> Option<Covector> {
        self.inner.gradient(&self.pull(x))
    }
    fn support(&self) -> AxisBox {
        self.inner.support().translated(&self.shift)
    }
    fn class(&self) -> FieldClass {
        self.inner.class()
    }
    fn singular_distance(&self, x: &[f64]) -> Option<f64> {
        self.inner.singular_distance(&self.pull(x))
    }
    fn tail_bound(&self) -> f64 {
        self.inner.tail_bound()
    }
}

/// `x -> u(x / factor)`.
pub struct Dilated {
    inner: Arc<dyn ScalarField>,
    factor: f64,
}

impl Dilated {
    pub fn new(inner: Arc<dyn ScalarField>, factor: f64) -> Self {
        assert!(factor > 0.0, "dilation factor must be positive");
        Self { inner, factor }
    }

    fn pull(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|c| c / self.factor).collect()
    }
}

impl ScalarField for Dilated {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(&self.pull(x))
    }
    fn gradient(&self, x: &[f64]) -> Option<Covector> {
        self.inner
            .gradient(&self.pull(x))
            .map(|g| g.iter().map(|c| c / self.factor).collect::<Vec<_>>().into())
    }
    fn support(&self) -> AxisBox {
        self.inner.support().scaled(self.factor)
    }
    fn class(&self) -> FieldClass {
        self.inner.class()
    }
    fn singular_distance(&self, x: &[f64]) -> Option<f64> {
        self.inner
            .singular_distance(&self.pull(x))
            .map(|d| d * self.factor)
    }
    fn tail_bound(&self) -> f64 {
        self.inner.tail_bound()
    }
}

/// Names accepted by [`field_by_name`].
pub const FIELD_NAMES: &[&str] = &[
    "constant",
    "affine",
    "quadratic",
    "gaussian",
    "bump",
    "indicator-triangle",
];

/// Builds a corpus field by name. `affine` is `0.5 + x_1 - 2 x_2 + 0.25 x_3`
/// (truncated to `n` terms); `quadratic` is `|x|^2 + x_1`.
pub fn field_by_name(name: &str, dim: usize) -> Result<Arc<dyn ScalarField>, FieldError> {
    if dim == 0 {
        return Err(FieldError::UnsupportedDimension {
            name: name.into(),
            dim,
        });
    }
    let slope = [1.0, -2.0, 0.25];
    Ok(match name {
        "constant" => Arc::new(Affine::constant(dim, 1.5)),
        "affine" => {
            let s: Vec<f64> = (0..dim).map(|k| slope[k % 3]).collect();
            Arc::new(Affine::new(0.5, s))
        }
        "quadratic" => {
            let mut q = Quadratic::squared_norm(dim);
            q.linear[0] = 1.0;
            Arc::new(q)
        }
        "gaussian" => Arc::new(Gaussian::new(dim)),
        "bump" => Arc::new(Bump::new(dim)),
        "indicator-triangle" => {
            if dim != 2 {
                return Err(FieldError::UnsupportedDimension {
                    name: name.into(),
                    dim,
                });
            }
            Arc::new(TriangleIndicator)
        }
        other => return Err(FieldError::UnknownField(other.into())),
    })
}

/// A cell of an interpolant: its simplex and the source values at its vertices.
#[derive(Clone, Debug)]
pub struct InterpolatedCell {
    pub simplex: Simplex,
    pub values: Vec<f64>,
}

impl InterpolatedCell {
    pub fn value_at(&self, beta: &[f64]) -> f64 {
        // Equal vertex values make the cell constant; skip the rounding of the blend.
        if self.values.windows(2).all(|w| w[0] == w[1]) {
            return self.values[0];
        }
        beta.iter().zip(&self.values).map(|(b, v)| b * v).sum()
    }

    /// `sum_i u(a_i) D beta_i`.
    pub fn gradient(&self) -> Covector {
        let n = self.simplex.dim();
        let mut g = Covector::zeros(n);
        for (d, v) in self
            .simplex
            .barycentric_differentials()
            .iter()
            .zip(&self.values)
        {
            for k in 0..n {
                g[k] += v * d[k];
            }
        }
        g
    }
}

/// The piecewise affine interpolant of a field on a triangulation frame.
pub struct InterpolantField {
    frame: TriangulationFrame,
    source: Arc<dyn ScalarField>,
    cache: DashMap<Vec<i64>, f64>,
}

impl InterpolantField {
    pub fn new(
        frame: TriangulationFrame,
        source: Arc<dyn ScalarField>,
    ) -> Result<Self, FieldError> {
        if frame.dim() != source.dim() {
            return Err(FieldError::DimensionMismatch {
                field: source.dim(),
                frame: frame.dim(),
            });
        }
        Ok(Self {
            frame,
            source,
            cache: DashMap::new(),
        })
    }

    pub fn frame(&self) -> &TriangulationFrame {
        &self.frame
    }

    pub fn source(&self) -> &Arc<dyn ScalarField> {
        &self.source
    }

    /// Source value at a lattice vertex, refusing vertices on the
    /// discontinuity set of BV fields.
    pub fn vertex_value(&self, lattice: &[i64]) -> Result<f64, FieldError> {
        if let Some(v) = self.cache.get(lattice) {
            return Ok(*v);
        }
        let x = self.frame.vertex_position(lattice);
        if let Some(d) = self.source.singular_distance(&x) {
            if d <= LEBESGUE_GUARD * self.frame.scale() {
                return Err(FieldError::VertexOnSingularSet {
                    vertex: x.to_vec(),
                    distance: d,
                });
            }
        }
        let v = self.source.value(&x);
        self.cache.insert(lattice.to_vec(), v);
        Ok(v)
    }

    pub fn cell(&self, key: &CellKey) -> Result<InterpolatedCell, FieldError> {
        let simplex = self.frame.simplex_of(key)?;
        let values = key
            .lattice_vertices()
            .iter()
            .map(|k| self.vertex_value(k))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(InterpolatedCell { simplex, values })
    }

    pub fn interpolate_value(&self, x: &[f64]) -> Result<f64, FieldError> {
        let key = self.frame.locate(x)?;
        let cell = self.cell(&key)?;
        Ok(cell.value_at(&cell.simplex.barycentric(x)))
    }

    pub fn interpolant_gradient(&self, key: &CellKey) -> Result<Covector, FieldError> {
        Ok(self.cell(key)?.gradient())
    }

    /// Number of cached vertex values.
    pub fn cached_vertices(&self) -> usize {
        self.cache.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BaseTriangulation;
    use approx::assert_abs_diff_eq;

    fn unit_frame(n: usize) -> TriangulationFrame {
        TriangulationFrame::new(
            BaseTriangulation::with_spacing(n, 1.0).unwrap(),
            1.0,
            vec![0.0; n],
        )
        .unwrap()
    }

    #[test]
    fn affine_is_reproduced() {
        let u: Arc<dyn ScalarField> = Arc::new(Affine::new(0.5, [1.0, -2.0]));
        let v = InterpolantField::new(
            TriangulationFrame::standard(2, 0.37, [0.1, -0.2]).unwrap(),
            u.clone(),
        )
        .unwrap();
        for x in [[0.3, 0.4], [-1.2, 2.5], [0.0, 0.0]] {
            assert_abs_diff_eq!(
                v.interpolate_value(&x).unwrap(),
                u.value(&x),
                epsilon = 1e-13
            );
        }
        let key = v.frame().locate(&[0.3, 0.4]).unwrap();
        let g = v.interpolant_gradient(&key).unwrap();
        assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1], -2.0, epsilon = 1e-12);
    }

    #[test]
    fn one_dimensional_square() {
        let u: Arc<dyn ScalarField> = Arc::new(Quadratic::squared_norm(1));
        let v = InterpolantField::new(unit_frame(1), u).unwrap();
        assert_eq!(v.interpolate_value(&[0.5]).unwrap(), 0.5);
        assert_eq!(v.interpolate_value(&[2.0]).unwrap(), 4.0);
        let key = v.frame().locate(&[2.5]).unwrap();
        // (u(3) - u(2)) / (3 - 2)
        assert_abs_diff_eq!(
            v.interpolant_gradient(&key).unwrap()[0],
            5.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn squared_norm_on_the_unit_triangle() {
        let u: Arc<dyn ScalarField> = Arc::new(Quadratic::squared_norm(2));
        let simplex = Simplex::from_coords(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let values = simplex.vertices().iter().map(|a| u.value(a)).collect();
        let g = InterpolatedCell { simplex, values }.gradient();
        assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn indicator_guard_rejects_vertices_on_edges() {
        let u: Arc<dyn ScalarField> = Arc::new(TriangleIndicator);
        let frame = TriangulationFrame::standard(2, 0.1, [0.0, 0.0]).unwrap();
        let v = InterpolantField::new(frame, u.clone()).unwrap();
        let err = v.interpolate_value(&[0.01, 0.01]).unwrap_err();
        assert!(matches!(err, FieldError::VertexOnSingularSet { .. }));

        let frame = TriangulationFrame::standard(2, 0.1, [0.013, 0.027]).unwrap();
        let v = InterpolantField::new(frame, u).unwrap();
        assert_eq!(v.interpolate_value(&[0.3, 0.3]).unwrap(), 1.0);
        assert_eq!(v.interpolate_value(&[0.9, 0.9]).unwrap(), 0.0);
    }

    #[test]
    fn exact_total_variation_is_perimeter() {
        assert_abs_diff_eq!(
            TriangleIndicator::exact_total_variation(),
            2.0 + 2f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn corpus_lookup() {
        for name in FIELD_NAMES {
            let dim = if *name == "indicator-triangle" { 2 } else { 3 };
            assert_eq!(field_by_name(name, dim).unwrap().name(), *name);
        }
        assert!(matches!(
            field_by_name("nope", 2),
            Err(FieldError::UnknownField(_))
        ));
        assert!(field_by_name("indicator-triangle", 3).is_err());
    }

    #[test]
    fn smooth_gradients_match_finite_differences() {
        let h = 1e-6;
        for name in ["quadratic", "gaussian", "bump"] {
            for dim in 1..=3 {
                let u = field_by_name(name, dim).unwrap();
                let x: Vec<f64> = (0..dim).map(|k| 0.2 - 0.15 * k as f64).collect();
                let g = u.gradient(&x).unwrap();
                for k in 0..dim {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[k] += h;
                    xm[k] -= h;
                    let fd = (u.value(&xp) - u.value(&xm)) / (2.0 * h);
                    assert!((fd - g[k]).abs() < 1e-6, "{name} n={dim} k={k}");
                }
            }
        }
    }
}
