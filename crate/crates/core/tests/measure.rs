use plateau_core::grid::{ff_project, mark_safe_region, CubicalGrid, FfInput};
use plateau_core::measure::{hausdorff_of_faceset, hausdorff_upper, sample_triangles};
use plateau_core::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn segment(n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Vec3::new(rng.gen(), 0.0, 0.0)).collect()
}

fn square(n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Vec3::new(rng.gen(), rng.gen(), 0.0)).collect()
}

#[test]
fn unit_segment_measures_one() {
    for seed in 0..8 {
        let pts = segment(1000, seed);
        let e = hausdorff_upper(&pts, 1, 0.01).unwrap();
        assert!((e.value - 1.0).abs() < 0.05, "seed {seed}: {}", e.value);
        assert!(e.audit(&pts));
    }
}

#[test]
fn unit_square_measures_one() {
    for seed in 0..3 {
        let pts = square(10000, seed);
        let e = hausdorff_upper(&pts, 2, 0.05).unwrap();
        assert!((e.value - 1.0).abs() < 0.10, "seed {seed}: {}", e.value);
        assert!(e.audit(&pts));
    }
}

#[test]
fn doubling_scales_by_two_to_the_d() {
    for (d, pts) in [(1, segment(1500, 7)), (2, square(8000, 7))] {
        let a = hausdorff_upper(&pts, d, 0.1).unwrap();
        let big: Vec<Vec3> = pts.iter().map(|p| p * 2.0).collect();
        let b = hausdorff_upper(&big, d, 0.2).unwrap();
        assert_eq!(b.value, a.value * 2f64.powi(d as i32), "d = {d}");
    }
}

#[test]
fn halving_delta_never_lowers_the_estimate() {
    for (d, pts) in [(1, segment(2000, 3)), (2, square(6000, 3))] {
        let mut delta = 0.4;
        let mut last = hausdorff_upper(&pts, d, delta).unwrap();
        let mut compared = 0;
        loop {
            delta *= 0.5;
            let e = hausdorff_upper(&pts, d, delta).unwrap();
            if delta < e.resolution {
                break;
            }
            assert!(e.audit(&pts));
            assert!(e.value >= last.value, "d = {d}, δ = {delta}: {} < {}", e.value, last.value);
            last = e;
            compared += 1;
        }
        assert!(compared >= 2, "d = {d}: resolution {}", last.resolution);
    }
}

#[test]
fn separated_points_are_counted() {
    let pts: Vec<Vec3> = (0..5).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
    assert_eq!(hausdorff_upper(&pts, 0, 0.1).unwrap().value, 5.0);
}

#[test]
fn sampled_face_set_matches_exact_area() {
    let g = CubicalGrid::covering(Vec3::new(-0.5, -0.5, -0.5), Vec3::new(1.5, 1.5, 0.5), 3).unwrap();
    let region = mark_safe_region(&g, &[], 0.0).unwrap();
    let s = g.side();
    let input = FfInput {
        polygons: vec![vec![
            Vec3::new(0.0, 0.0, 0.3 * s),
            Vec3::new(1.0, 0.0, 0.38 * s),
            Vec3::new(1.0, 1.0, 0.38 * s),
            Vec3::new(0.0, 1.0, 0.3 * s),
        ]],
        curves: Vec::new(),
    };
    let faces = ff_project(&input, &g, &region, 1, None).unwrap().faces;
    let exact = hausdorff_of_faceset(&faces, &g);
    let pts = sample_triangles(&faces.triangles(&g), 20000.0, 4);
    let est = hausdorff_upper(&pts, 2, 0.1).unwrap().value;
    assert!((est - exact).abs() < 0.1 * exact, "estimate {est} vs {exact}");
}
