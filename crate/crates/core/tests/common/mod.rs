#![allow(dead_code)]

use proptest::prelude::*;
use pwaffine::{Point, Simplex};

/// Simplices with vertices in `[-2, 2]^n` and volume bounded away from zero.
pub fn simplex(n: usize) -> impl Strategy<Value = Simplex> {
    prop::collection::vec(-2.0..2.0f64, n * (n + 1)).prop_filter_map(
        "near-degenerate simplex",
        move |c| {
            let verts: Vec<Point> = c.chunks(n).map(Point::from).collect();
            Simplex::new(verts).ok().filter(|s| s.volume() > 1e-2)
        },
    )
}

pub fn point(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, n)
}

pub fn dim_and_simplex() -> impl Strategy<Value = (usize, Simplex)> {
    (1usize..=3).prop_flat_map(|n| (Just(n), simplex(n)))
}
