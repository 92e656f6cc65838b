use std::f64::consts::{PI, TAU};

use plateau_core::douglas::{
    area_integral, harmonic_extension, minimize_douglas, BoundaryParam, ClosedCurve, DouglasOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Half the Dirichlet energy of the harmonic extension of `Σ a_k cos kθ + b_k sin kθ`.
fn fourier_energy(modes: &[(usize, [f64; 2], [f64; 2])]) -> f64 {
    modes.iter().map(|(k, a, b)| 0.5 * PI * *k as f64 * (a[0] * a[0] + a[1] * a[1] + b[0] * b[0] + b[1] * b[1])).sum()
}

#[test]
fn circle_identity_energy_is_pi() {
    let p = BoundaryParam::uniform(ClosedCurve::unit_circle(), 512).unwrap();
    assert!((p.energy() - PI).abs() < 1e-3, "B = {}", p.energy());
    let oracle = fourier_energy(&[(1, [1.0, 0.0], [0.0, 1.0])]);
    assert!((oracle - PI).abs() < 1e-15);
}

#[test]
fn ellipse_angle_parameterization_matches_fourier_oracle() {
    let p = BoundaryParam::uniform(ClosedCurve::ellipse(2.0, 1.0), 512).unwrap();
    let oracle = fourier_energy(&[(1, [2.0, 0.0], [0.0, 1.0])]);
    assert!((p.energy() - oracle).abs() < 1e-3 * oracle, "B = {} oracle {oracle}", p.energy());
}

#[test]
fn harmonic_extension_of_circle_has_area_pi() {
    let p = BoundaryParam::uniform(ClosedCurve::unit_circle(), 512).unwrap();
    let map = harmonic_extension(&p, 64, 256).unwrap();
    let a = area_integral(&map);
    assert!((a - PI).abs() < 1e-2, "A = {a}");
}

#[test]
fn reparameterized_circle_relaxes_back_to_pi() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 128;
    let mut knots: Vec<f64> = (0..n).map(|i| (i as f64 + 0.3 * rng.gen_range(-1.0..1.0)) / n as f64).collect();
    knots[0] = 0.0;
    let start = BoundaryParam::from_knots(ClosedCurve::unit_circle(), knots).unwrap();
    assert!(start.energy() > PI);
    let (p, run) = minimize_douglas(start, &DouglasOptions::default());
    assert!(run.history.windows(2).all(|w| w[1] <= w[0]));
    assert!((p.energy() - PI).abs() < 1e-3, "B = {}", p.energy());
}

#[test]
fn ellipse_energy_matches_harmonic_area() {
    let start = BoundaryParam::uniform(ClosedCurve::ellipse(2.0, 1.0), 512).unwrap();
    let (p, run) = minimize_douglas(start, &DouglasOptions::default());
    assert!(run.converged);
    let b = run.energy;
    let a = area_integral(&harmonic_extension(&p, 64, 256).unwrap());
    assert!((a - b).abs() / b < 0.01, "A = {a}, B = {b}");
    assert!((b - TAU).abs() / TAU < 0.01, "B = {b}");
}

#[test]
fn polyline_square_energy_exceeds_area() {
    let sq = ClosedCurve::Polyline {
        points: vec![
            [0.0, 0.0, 0.0].into(),
            [1.0, 0.0, 0.0].into(),
            [1.0, 1.0, 0.0].into(),
            [0.0, 1.0, 0.0].into(),
        ],
    };
    let (p, run) = minimize_douglas(BoundaryParam::uniform(sq, 256).unwrap(), &DouglasOptions::default());
    assert!(run.energy >= 1.0 - 1e-2);
    let a = area_integral(&harmonic_extension(&p, 48, 256).unwrap());
    assert!(a <= run.energy + 1e-9);
}
