//! Simplex primitives: signed volume, barycentric coordinates and their
//! differentials, and Minkowski gauges for simplices and balls.
//!
//! Everything here works in an arbitrary ambient dimension `n >= 1`; the
//! vertex system of a simplex is inverted once at construction so that
//! repeated barycentric queries are a single matrix-vector product.

use std::ops::{Deref, DerefMut};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

/// Relative floor below which a simplex is considered degenerate:
/// `|vol| < NONDEGENERACY_FLOOR * diam^n` is rejected.
pub const NONDEGENERACY_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("expected {expected} vertices in R^{dim}, got {actual}")]
    VertexCount {
        expected: usize,
        actual: usize,
        dim: usize,
    },
    #[error("vertex {index} has dimension {actual}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        actual: usize,
    },
    #[error("ambient dimension must be at least 1")]
    ZeroDimension,
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("degenerate simplex: |volume| = {volume:e} below floor {floor:e}")]
    Degenerate { volume: f64, floor: f64 },
    #[error("vertex index {index} out of range for a simplex with {count} vertices")]
    VertexIndex { index: usize, count: usize },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
}

pub type Coords = SmallVec<[f64; 3]>;

/// A point of `R^n`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Coords);

/// A linear functional on `R^n`, stored by its components.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Covector(pub Coords);

macro_rules! vector_newtype {
    ($name:ident) => {
        impl $name {
            pub fn new(coords: &[f64]) -> Self {
                Self(SmallVec::from_slice(coords))
            }

            pub fn zeros(n: usize) -> Self {
                Self(SmallVec::from_elem(0.0, n))
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn norm(&self) -> f64 {
                self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|c| c.is_finite())
            }
        }

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(SmallVec::from_vec(v))
            }
        }

        impl From<&[f64]> for $name {
            fn from(v: &[f64]) -> Self {
                Self::new(v)
            }
        }

        impl<const N: usize> From<[f64; N]> for $name {
            fn from(v: [f64; N]) -> Self {
                Self::new(&v)
            }
        }
    };
}

vector_newtype!(Point);
vector_newtype!(Covector);

impl Covector {
    /// The pairing `l[v] = sum_i l_i v_i`.
    pub fn apply(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Barycentric coordinates of a point with respect to a simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct BarycentricCoords(pub SmallVec<[f64; 4]>);

impl BarycentricCoords {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// True when every coordinate is at least `-tol`.
    pub fn is_inside(&self, tol: f64) -> bool {
        self.0.iter().all(|&b| b >= -tol)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl Deref for BarycentricCoords {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn check_vertices(vertices: &[Point]) -> Result<usize, GeometryError> {
    let n = vertices
        .first()
        .map(|v| v.dim())
        .ok_or(GeometryError::ZeroDimension)?;
    if n == 0 {
        return Err(GeometryError::ZeroDimension);
    }
    if vertices.len() != n + 1 {
        return Err(GeometryError::VertexCount {
            expected: n + 1,
            actual: vertices.len(),
            dim: n,
        });
    }
    for (index, v) in vertices.iter().enumerate() {
        if v.dim() != n {
            return Err(GeometryError::DimensionMismatch {
                index,
                expected: n,
                actual: v.dim(),
            });
        }
        if !v.is_finite() {
            return Err(GeometryError::NonFinite);
        }
    }
    Ok(n)
}

/// `det[a_1 - a_0, ..., a_n - a_0] / n!` for `n + 1` vertices in `R^n`.
pub fn signed_volume(vertices: &[Point]) -> Result<f64, GeometryError> {
    let n = check_vertices(vertices)?;
    let a0 = &vertices[0];
    let edges = DMatrix::from_fn(n, n, |row, col| vertices[col + 1][row] - a0[row]);
    Ok(edges.determinant() / factorial(n))
}

pub fn diameter(vertices: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            d = d.max(distance(a, b));
        }
    }
    d
}

/// A nondegenerate `n`-simplex in `R^n` with its vertex system inverted.
#[derive(Clone, Debug)]
pub struct Simplex {
    vertices: Vec<Point>,
    volume: f64,
    diameter: f64,
    // Row-major (n+1)x(n+1) inverse of [[1 ... 1], [a_0 ... a_n]].
    inverse: Vec<f64>,
    differentials: Vec<Covector>,
}

impl Simplex {
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        let n = check_vertices(&vertices)?;
        let volume = signed_volume(&vertices)?;
        let diameter = diameter(&vertices);
        let floor = NONDEGENERACY_FLOOR * diameter.powi(n as i32);
        if !(volume.abs() >= floor) || diameter == 0.0 {
            return Err(GeometryError::Degenerate { volume, floor });
        }
        let system = DMatrix::from_fn(n + 1, n + 1, |row, col| {
            if row == 0 {
                1.0
            } else {
                vertices[col][row - 1]
            }
        });
        let inv = system
            .try_inverse()
            .ok_or(GeometryError::Degenerate { volume, floor })?;
        let mut inverse = Vec::with_capacity((n + 1) * (n + 1));
        for row in 0..=n {
            for col in 0..=n {
                inverse.push(inv[(row, col)]);
            }
        }
        // beta_i(x) = inv[i,0] + sum_k inv[i,k+1] x_k, so D beta_i is row i without column 0.
        let differentials = (0..=n)
            .map(|i| Covector::new(&inverse[i * (n + 1) + 1..(i + 1) * (n + 1)]))
            .collect();
        Ok(Self {
            vertices,
            volume,
            diameter,
            inverse,
            differentials,
        })
    }

    pub fn from_coords(vertices: &[&[f64]]) -> Result<Self, GeometryError> {
        Self::new(vertices.iter().map(|v| Point::new(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i]
    }

    pub fn signed_volume(&self) -> f64 {
        self.volume
    }

    pub fn volume(&self) -> f64 {
        self.volume.abs()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn centroid(&self) -> Point {
        let n = self.dim();
        let mut c = Point::zeros(n);
        for v in &self.vertices {
            for k in 0..n {
                c[k] += v[k];
            }
        }
        for k in 0..n {
            c[k] /= (n + 1) as f64;
        }
        c
    }

    /// Barycentric coordinates `beta_0(x), ..., beta_n(x)`.
    pub fn barycentric(&self, x: &[f64]) -> BarycentricCoords {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        let stride = n + 1;
        BarycentricCoords(
            (0..=n)
                .map(|i| {
                    let row = &self.inverse[i * stride..(i + 1) * stride];
                    row[0] + row[1..].iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
                })
                .collect(),
        )
    }

    /// The constant differentials `D beta_i`; they sum to zero.
    pub fn barycentric_differentials(&self) -> &[Covector] {
        &self.differentials
    }

    /// The point with the given barycentric coordinates.
    pub fn point_at(&self, beta: &[f64]) -> Point {
        let n = self.dim();
        let mut x = Point::zeros(n);
        for (b, v) in beta.iter().zip(&self.vertices) {
            for k in 0..n {
                x[k] += b * v[k];
            }
        }
        x
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.barycentric(x).is_inside(tol)
    }

    /// Minkowski gauge of the simplex about vertex `i`, equal to `1 - beta_i(x)`.
    pub fn gauge(&self, i: usize, x: &[f64]) -> Result<f64, GeometryError> {
        if i > self.dim() {
            return Err(GeometryError::VertexIndex {
                index: i,
                count: self.dim() + 1,
            });
        }
        let n = self.dim();
        let row = &self.inverse[i * (n + 1)..(i + 1) * (n + 1)];
        let beta = row[0] + row[1..].iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        Ok(1.0 - beta)
    }
}

pub fn barycentric(s: &Simplex, x: &[f64]) -> BarycentricCoords {
    s.barycentric(x)
}

pub fn barycentric_differentials(s: &Simplex) -> &[Covector] {
    s.barycentric_differentials()
}

pub fn gauge_simplex(s: &Simplex, i: usize, x: &[f64]) -> Result<f64, GeometryError> {
    s.gauge(i, x)
}

/// Gauge of the ball `B_radius(center)` about its center: `|x - center| / radius`.
pub fn gauge_ball(center: &[f64], radius: f64, x: &[f64]) -> Result<f64, GeometryError> {
    if !(radius > 0.0) {
        return Err(GeometryError::NonPositiveRadius(radius));
    }
    Ok(distance(center, x) / radius)
}
