//! Piecewise affine (Lagrange) interpolation of scalar fields on translated
//! and dilated Kuhn triangulations of `R^n`, with numerical checks of the
//! Sobolev-type integral representations of the interpolant and the
//! interpolation error functionals built on them.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

pub mod analysis;
pub mod fields;
pub mod geometry;
pub mod mesh;
pub mod numeric;
pub mod quadrature;

pub use analysis::AnalysisError;
pub use fields::{FieldClass, InterpolantField, ScalarField};
pub use geometry::{Covector, Point, Simplex};
pub use mesh::{AxisBox, BaseTriangulation, CellKey, TriangulationFrame};
