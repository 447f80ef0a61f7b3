//! The periodic Kuhn (Freudenthal) triangulation of `R^n` and its
//! translated and dilated frames.
//!
//! The unit cube `[0,1]^n` splits into `n!` simplices, one per permutation
//! `pi` of the axes: `{ y : y_pi(0) >= y_pi(1) >= ... >= y_pi(n-1) }`. Its
//! vertices are reached by the lattice walk `b, b + e_pi(0), b + e_pi(0) + e_pi(1), ...`.
//! Tiling the lattice with these cells gives a triangulation whose simplices
//! are all congruent. A frame realizes `r * Sigma + h` for every base cell,
//! after a global spacing `sigma = 1 / sqrt(n)` that puts the diameter of
//! each base cell at 1.

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Point, Simplex};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("cell key has dimension {actual}, frame has dimension {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("non-finite point")]
    NonFinite,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// An axis-aligned box `[lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lower: Point,
    pub upper: Point,
}

impl AxisBox {
    pub fn new(lower: impl Into<Point>, upper: impl Into<Point>) -> Result<Self, MeshError> {
        let b = Self {
            lower: lower.into(),
            upper: upper.into(),
        };
        b.validate()?;
        Ok(b)
    }

    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        Self {
            lower: Point::from(vec![lo; n]),
            upper: Point::from(vec![hi; n]),
        }
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if self.lower.dim() != self.upper.dim() || self.lower.dim() == 0 {
            return Err(MeshError::InvalidBox("corner dimensions differ".into()));
        }
        if !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(MeshError::InvalidBox("non-finite corner".into()));
        }
        if self.lower.iter().zip(self.upper.iter()).any(|(l, u)| l > u) {
            return Err(MeshError::InvalidBox("lower exceeds upper".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(self.upper.iter())
            .map(|(l, u)| u - l)
            .product()
    }

    /// True when some side has zero length.
    pub fn is_empty(&self) -> bool {
        self.lower
            .iter()
            .zip(self.upper.iter())
            .any(|(l, u)| u <= l)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(self.upper.iter()))
            .all(|(c, (l, u))| *l <= *c && *c <= *u)
    }

    pub fn expanded(&self, margin: f64) -> Self {
        Self {
            lower: self
                .lower
                .iter()
                .map(|l| l - margin)
                .collect::<Vec<_>>()
                .into(),
            upper: self
                .upper
                .iter()
                .map(|u| u + margin)
                .collect::<Vec<_>>()
                .into(),
        }
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        Self {
            lower: self
                .lower
                .iter()
                .zip(shift)
                .map(|(l, s)| l + s)
                .collect::<Vec<_>>()
                .into(),
            upper: self
                .upper
                .iter()
                .zip(shift)
                .map(|(u, s)| u + s)
                .collect::<Vec<_>>()
                .into(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            lower: self
                .lower
                .iter()
                .map(|l| l * factor)
                .collect::<Vec<_>>()
                .into(),
            upper: self
                .upper
                .iter()
                .map(|u| u * factor)
                .collect::<Vec<_>>()
                .into(),
        }
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &AxisBox) -> Self {
        Self {
            lower: self
                .lower
                .iter()
                .zip(other.lower.iter())
                .map(|(a, b)| a.min(*b))
                .collect::<Vec<_>>()
                .into(),
            upper: self
                .upper
                .iter()
                .zip(other.upper.iter())
                .map(|(a, b)| a.max(*b))
                .collect::<Vec<_>>()
                .into(),
        }
    }
}

/// Canonical index of a Kuhn cell: the lattice corner of its cube and the
/// order (0-based axes) in which the lattice walk visits the axes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub base: Vec<i64>,
    pub perm: Vec<usize>,
}

impl CellKey {
    pub fn dim(&self) -> usize {
        self.base.len()
    }

    fn validate(&self) -> Result<(), MeshError> {
        let n = self.base.len();
        let mut seen = vec![false; n];
        if self.perm.len() != n {
            return Err(MeshError::InvalidPermutation(self.perm.clone()));
        }
        for &p in &self.perm {
            if p >= n || seen[p] {
                return Err(MeshError::InvalidPermutation(self.perm.clone()));
            }
            seen[p] = true;
        }
        Ok(())
    }

    /// Integer lattice coordinates of the `n + 1` cell vertices, in walk order.
    pub fn lattice_vertices(&self) -> Vec<Vec<i64>> {
        let mut current = self.base.clone();
        let mut out = Vec::with_capacity(self.perm.len() + 1);
        out.push(current.clone());
        for &axis in &self.perm {
            current[axis] += 1;
            out.push(current.clone());
        }
        out
    }
}

/// The base Kuhn triangulation `S_*` of `R^n` with lattice spacing `sigma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseTriangulation {
    dim: usize,
    spacing: f64,
}

impl BaseTriangulation {
    /// Spacing `1 / sqrt(n)`, so every base simplex has diameter 1.
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            spacing: 1.0 / (dim as f64).sqrt(),
        }
    }

    pub fn with_spacing(dim: usize, spacing: f64) -> Result<Self, MeshError> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(MeshError::InvalidScale(spacing));
        }
        Ok(Self { dim, spacing })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of simplices per lattice cube, `n!`.
    pub fn cells_per_cube(&self) -> usize {
        (1..=self.dim).product()
    }
}

/// The triangulation `S^r_h = { r * Sigma + h : Sigma in S_* }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangulationFrame {
    base: BaseTriangulation,
    scale: f64,
    offset: Point,
}

impl TriangulationFrame {
    pub fn new(
        base: BaseTriangulation,
        scale: f64,
        offset: impl Into<Point>,
    ) -> Result<Self, MeshError> {
        let offset = offset.into();
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(MeshError::InvalidScale(scale));
        }
        if offset.dim() != base.dim() {
            return Err(MeshError::DimensionMismatch {
                expected: base.dim(),
                actual: offset.dim(),
            });
        }
        if !offset.is_finite() {
            return Err(MeshError::NonFinite);
        }
        Ok(Self {
            base,
            scale,
            offset,
        })
    }

    /// Frame over the standard base triangulation (spacing `1/sqrt(n)`).
    pub fn standard(dim: usize, scale: f64, offset: impl Into<Point>) -> Result<Self, MeshError> {
        Self::new(BaseTriangulation::new(dim), scale, offset)
    }

    pub fn base(&self) -> &BaseTriangulation {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> &Point {
        &self.offset
    }

    /// Edge length of a lattice cube, `sigma * r`.
    pub fn cell_width(&self) -> f64 {
        self.base.spacing * self.scale
    }

    /// Diameter shared by every cell, `sigma * r * sqrt(n)`.
    pub fn cell_diameter(&self) -> f64 {
        self.cell_width() * (self.dim() as f64).sqrt()
    }

    fn to_lattice(&self, x: &[f64]) -> Vec<f64> {
        let w = self.cell_width();
        x.iter()
            .zip(self.offset.iter())
            .map(|(c, h)| (c - h) / w)
            .collect()
    }

    /// Position of a lattice vertex: `sigma * r * k + h`.
    pub fn vertex_position(&self, lattice: &[i64]) -> Point {
        let w = self.cell_width();
        lattice
            .iter()
            .zip(self.offset.iter())
            .map(|(&k, h)| w * k as f64 + h)
            .collect::<Vec<_>>()
            .into()
    }

    pub fn locate(&self, x: &[f64]) -> Result<CellKey, MeshError> {
        if x.len() != self.dim() {
            return Err(MeshError::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(MeshError::NonFinite);
        }
        let y = self.to_lattice(x);
        let base: Vec<i64> = y.iter().map(|c| c.floor() as i64).collect();
        let frac: Vec<f64> = y.iter().zip(&base).map(|(c, b)| c - *b as f64).collect();
        let mut perm: Vec<usize> = (0..self.dim()).collect();
        // Stable sort keeps lower axes first on ties.
        perm.sort_by(|&a, &b| frac[b].total_cmp(&frac[a]));
        Ok(CellKey { base, perm })
    }

    pub fn simplex_of(&self, key: &CellKey) -> Result<Simplex, MeshError> {
        if key.dim() != self.dim() {
            return Err(MeshError::DimensionMismatch {
                expected: self.dim(),
                actual: key.dim(),
            });
        }
        key.validate()?;
        let vertices = key
            .lattice_vertices()
            .iter()
            .map(|k| self.vertex_position(k))
            .collect();
        Ok(Simplex::new(vertices)?)
    }

    /// Range of lattice cubes whose interior meets the open box, per axis.
    fn cube_range(&self, b: &AxisBox) -> Vec<(i64, i64, f64, f64)> {
        let lo = self.to_lattice(&b.lower);
        let hi = self.to_lattice(&b.upper);
        lo.iter()
            .zip(&hi)
            .map(|(&l, &u)| {
                // Cube k meets (l, u) iff k < u and k + 1 > l.
                let first = l.floor() as i64;
                let last = u.ceil() as i64 - 1;
                (first, last, l, u)
            })
            .collect()
    }

    /// Every cell whose interior meets the interior of `b`, in lexicographic
    /// order of (cube, permutation). A box with an empty interior yields nothing.
    pub fn cells_in_box(&self, b: &AxisBox) -> Result<Vec<CellKey>, MeshError> {
        b.validate()?;
        if b.dim() != self.dim() {
            return Err(MeshError::DimensionMismatch {
                expected: self.dim(),
                actual: b.dim(),
            });
        }
        if b.is_empty() {
            return Ok(Vec::new());
        }
        let n = self.dim();
        let ranges = self.cube_range(b);
        let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
        let mut out = Vec::new();
        for base in ranges
            .iter()
            .map(|&(f, l, _, _)| f..=l)
            .multi_cartesian_product()
        {
            // Box in the cube's fractional coordinates, clipped to [0, 1].
            let (lo, hi): (Vec<f64>, Vec<f64>) = ranges
                .iter()
                .zip(&base)
                .map(|(&(_, _, l, u), &k)| ((l - k as f64).max(0.0), (u - k as f64).min(1.0)))
                .unzip();
            for perm in &perms {
                if chain_meets_box(perm, &lo, &hi) {
                    out.push(CellKey {
                        base: base.clone(),
                        perm: perm.clone(),
                    });
                }
            }
        }
        Ok(out)
    }

    /// Lattice vertices `sigma r Z^n + h` lying in the closed box.
    pub fn vertices_in_box(&self, b: &AxisBox) -> Result<Vec<Point>, MeshError> {
        b.validate()?;
        if b.dim() != self.dim() {
            return Err(MeshError::DimensionMismatch {
                expected: self.dim(),
                actual: b.dim(),
            });
        }
        let lo = self.to_lattice(&b.lower);
        let hi = self.to_lattice(&b.upper);
        let ranges: Vec<_> = lo
            .iter()
            .zip(&hi)
            .map(|(l, u)| (l.ceil() as i64 - 1)..=(u.floor() as i64 + 1))
            .collect();
        let mut out = Vec::new();
        for k in ranges.into_iter().multi_cartesian_product() {
            let p = self.vertex_position(&k);
            if b.contains(&p) {
                out.push(p);
            }
        }
        Ok(out)
    }
}

/// Whether `{ f : f_perm(0) > ... > f_perm(n-1) }` meets the open box `(lo, hi)`.
fn chain_meets_box(perm: &[usize], lo: &[f64], hi: &[f64]) -> bool {
    let mut floor = f64::NEG_INFINITY;
    for &axis in perm.iter().rev() {
        floor = floor.max(lo[axis]);
        if floor >= hi[axis] {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_frame(n: usize, r: f64, h: &[f64]) -> TriangulationFrame {
        TriangulationFrame::new(BaseTriangulation::with_spacing(n, 1.0).unwrap(), r, h).unwrap()
    }

    #[test]
    fn locate_examples() {
        let f = unit_frame(1, 1.0, &[0.0]);
        let key = f.locate(&[0.5]).unwrap();
        let s = f.simplex_of(&key).unwrap();
        assert_eq!(s.vertex(0)[0], 0.0);
        assert_eq!(s.vertex(1)[0], 1.0);

        let f = unit_frame(2, 1.0, &[0.0, 0.0]);
        let key = f.locate(&[0.7, 0.3]).unwrap();
        assert_eq!(
            key,
            CellKey {
                base: vec![0, 0],
                perm: vec![0, 1]
            }
        );
        let s = f.simplex_of(&key).unwrap();
        let expected = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]];
        for (v, e) in s.vertices().iter().zip(expected) {
            assert_eq!(&v[..], &e[..]);
        }
        let b = s.barycentric(&[0.7, 0.3]);
        assert_abs_diff_eq!(b[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(b[1], 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(b[2], 0.3, epsilon = 1e-15);
    }

    #[test]
    fn locate_at_vertex_uses_identity_order() {
        let f = unit_frame(3, 1.0, &[0.0, 0.0, 0.0]);
        let key = f.locate(&[2.0, -1.0, 5.0]).unwrap();
        assert_eq!(key.base, vec![2, -1, 5]);
        assert_eq!(key.perm, vec![0, 1, 2]);
        let s = f.simplex_of(&key).unwrap();
        assert!(s.contains(&[2.0, -1.0, 5.0], 1e-12));
    }

    #[test]
    fn simplex_of_examples() {
        let f = unit_frame(2, 2.0, &[5.0, 5.0]);
        let key = CellKey {
            base: vec![0, 0],
            perm: vec![0, 1],
        };
        let s = f.simplex_of(&key).unwrap();
        let expected = [[5.0, 5.0], [7.0, 5.0], [7.0, 7.0]];
        for (v, e) in s.vertices().iter().zip(expected) {
            assert_eq!(&v[..], &e[..]);
        }

        let f = TriangulationFrame::new(
            BaseTriangulation::with_spacing(1, 0.5).unwrap(),
            2.0,
            [0.25],
        )
        .unwrap();
        let s = f
            .simplex_of(&CellKey {
                base: vec![3],
                perm: vec![0],
            })
            .unwrap();
        assert_eq!(s.vertex(0)[0], 3.25);
        assert_eq!(s.vertex(1)[0], 4.25);

        let bad = CellKey {
            base: vec![0, 0],
            perm: vec![1, 1],
        };
        assert!(matches!(
            f_two().simplex_of(&bad),
            Err(MeshError::InvalidPermutation(_))
        ));
    }

    fn f_two() -> TriangulationFrame {
        unit_frame(2, 1.0, &[0.0, 0.0])
    }

    #[test]
    fn cells_in_box_examples() {
        let f = unit_frame(1, 1.0, &[0.0]);
        let cells = f
            .cells_in_box(&AxisBox::new([0.0], [2.0]).unwrap())
            .unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].base, vec![0]);
        assert_eq!(cells[1].base, vec![1]);

        let f = f_two();
        let cells = f.cells_in_box(&AxisBox::cube(2, 0.0, 1.0)).unwrap();
        assert_eq!(cells.len(), 2);

        // Strictly inside the lower triangle {(0,0),(1,0),(1,1)}.
        let cells = f
            .cells_in_box(&AxisBox::new([0.6, 0.1], [0.9, 0.2]).unwrap())
            .unwrap();
        assert_eq!(
            cells,
            vec![CellKey {
                base: vec![0, 0],
                perm: vec![0, 1]
            }]
        );

        let cells = f
            .cells_in_box(&AxisBox::new([0.5, 0.5], [0.5, 0.7]).unwrap())
            .unwrap();
        assert!(cells.is_empty());
    }

    #[test]
    fn cells_in_box_crossing_the_diagonal() {
        let f = f_two();
        let cells = f
            .cells_in_box(&AxisBox::new([0.1, 0.6], [0.2, 0.9]).unwrap())
            .unwrap();
        assert_eq!(
            cells,
            vec![CellKey {
                base: vec![0, 0],
                perm: vec![1, 0]
            }]
        );
        let cells = f
            .cells_in_box(&AxisBox::new([0.4, 0.4], [0.6, 0.6]).unwrap())
            .unwrap();
        assert_eq!(cells.len(), 2);
    }

    #[test]
    fn vertices_in_box_examples() {
        let f = unit_frame(1, 1.0, &[0.0]);
        let v = f
            .vertices_in_box(&AxisBox::new([0.0], [2.0]).unwrap())
            .unwrap();
        let xs: Vec<f64> = v.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 1.0, 2.0]);

        let f = unit_frame(2, 1.0, &[0.5, 0.5]);
        let v = f.vertices_in_box(&AxisBox::cube(2, 0.0, 1.0)).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(&v[0][..], &[0.5, 0.5]);

        for n in 1..=3 {
            let f = unit_frame(n, 0.5, &vec![0.0; n]);
            let v = f.vertices_in_box(&AxisBox::cube(n, 0.0, 2.0)).unwrap();
            assert_eq!(v.len(), 5usize.pow(n as u32));
        }
    }

    #[test]
    fn invalid_frames() {
        assert!(TriangulationFrame::standard(2, 0.0, [0.0, 0.0]).is_err());
        assert!(TriangulationFrame::standard(2, 1.0, [0.0]).is_err());
        assert!(AxisBox::new([1.0], [0.0]).is_err());
    }

    #[test]
    fn standard_cells_have_unit_base_diameter() {
        for n in 1..=4 {
            let f = TriangulationFrame::standard(n, 0.3, vec![0.1; n]).unwrap();
            let key = f.locate(&vec![0.05; n]).unwrap();
            let s = f.simplex_of(&key).unwrap();
            assert_abs_diff_eq!(s.diameter(), 0.3, epsilon = 1e-14);
            assert_abs_diff_eq!(f.cell_diameter(), 0.3, epsilon = 1e-14);
        }
    }
}
