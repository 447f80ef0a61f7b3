mod common;

use proptest::prelude::*;
use pwaffine::numeric::compensated_sum;
use pwaffine::{AxisBox, TriangulationFrame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn locate_agrees_with_barycentrics_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in 1..=3 {
        let frame = TriangulationFrame::standard(n, 0.37, vec![0.013; n]).unwrap();
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let key = frame.locate(&x).unwrap();
            let s = frame.simplex_of(&key).unwrap();
            assert!(s.contains(&x, 1e-10), "n={n} x={x:?} key={key:?}");
        }
    }
}

#[test]
fn lattice_aligned_box_is_partitioned() {
    for n in 1..=3 {
        let frame = TriangulationFrame::standard(n, 0.5, vec![0.1; n]).unwrap();
        let w = frame.cell_width();
        let lower: Vec<f64> = (0..n).map(|_| 0.1 - 2.0 * w).collect();
        let upper: Vec<f64> = (0..n).map(|k| 0.1 + (3 + k) as f64 * w).collect();
        let b = AxisBox::new(lower, upper).unwrap();
        let cells = frame.cells_in_box(&b).unwrap();
        let total = compensated_sum(cells.iter().map(|c| frame.simplex_of(c).unwrap().volume()));
        assert!(
            (total - b.volume()).abs() < 1e-10,
            "n={n}: {total} vs {}",
            b.volume()
        );
        let cubes: usize = (0..n).map(|k| 5 + k).product();
        assert_eq!(cells.len(), cubes * frame.base().cells_per_cube());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn frame_maps_are_equivariant(
        n in 1usize..=3,
        r in 0.05..2.0f64,
        h in common::point(3, -1.0, 1.0),
        x in common::point(3, -4.0, 4.0),
        shift in common::point(3, -1.0, 1.0),
        lambda in 0.25..4.0f64,
    ) {
        let h = &h[..n];
        let x = &x[..n];
        let shift = &shift[..n];
        let frame = TriangulationFrame::standard(n, r, h.to_vec()).unwrap();
        let key = frame.locate(x).unwrap();

        let moved_h: Vec<f64> = h.iter().zip(shift).map(|(a, b)| a + b).collect();
        let moved_x: Vec<f64> = x.iter().zip(shift).map(|(a, b)| a + b).collect();
        let moved = TriangulationFrame::standard(n, r, moved_h).unwrap();
        let s = frame.simplex_of(&key).unwrap();
        let t = moved.simplex_of(&key).unwrap();
        prop_assert!(t.contains(&moved_x, 1e-9));
        for (a, b) in s.vertices().iter().zip(t.vertices()) {
            for k in 0..n {
                prop_assert!((b[k] - a[k] - shift[k]).abs() < 1e-9);
            }
        }

        let scaled_h: Vec<f64> = h.iter().map(|a| lambda * a).collect();
        let scaled = TriangulationFrame::standard(n, lambda * r, scaled_h).unwrap();
        let u = scaled.simplex_of(&key).unwrap();
        for (a, b) in s.vertices().iter().zip(u.vertices()) {
            for k in 0..n {
                prop_assert!((b[k] - lambda * a[k]).abs() < 1e-9 * (1.0 + lambda * a[k].abs()));
            }
        }
        prop_assert!((u.volume() - lambda.powi(n as i32) * s.volume()).abs() < 1e-9 * u.volume().max(1e-9));
    }

    #[test]
    fn cells_in_box_cover_every_interior_point(
        n in 1usize..=3,
        r in 0.2..1.0f64,
        h in common::point(3, -0.5, 0.5),
        lo in common::point(3, -1.0, 0.0),
        side in common::point(3, 0.1, 1.0),
        t in common::point(3, 0.0, 1.0),
    ) {
        let frame = TriangulationFrame::standard(n, r, h[..n].to_vec()).unwrap();
        let upper: Vec<f64> = (0..n).map(|k| lo[k] + side[k]).collect();
        let b = AxisBox::new(lo[..n].to_vec(), upper).unwrap();
        let cells = frame.cells_in_box(&b).unwrap();
        let x: Vec<f64> = (0..n).map(|k| lo[k] + t[k] * side[k]).collect();
        let key = frame.locate(&x).unwrap();
        // Points on a shared facet may locate into a neighbour that only touches the box boundary.
        let s = frame.simplex_of(&key).unwrap();
        let covered = cells.contains(&key) || cells.iter().any(|c| frame.simplex_of(c).unwrap().contains(&x, 1e-12));
        prop_assert!(covered, "x={:?} key={:?} s={:?}", x, key, s.vertices());
    }
}
