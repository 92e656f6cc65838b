mod common;

use std::f64::consts::{PI, TAU};

use plateau_core::reference::{
    catenoid_area, cone_densities, oracle_row, polygon_area, thresholds, two_disks_area, y_film, y_film_area,
    y_film_by_balance, TwoCircleConfig, PANELS,
};

#[test]
fn catenoid_matches_closed_form() {
    for h in [0.05, 0.1, 0.2, 0.4, 0.6] {
        let cfg = TwoCircleConfig::new(1.0, h).unwrap();
        let (area, _) = common::catenoid(1.0, h).unwrap();
        let got = catenoid_area(&cfg).unwrap();
        assert!((got - area).abs() < 1e-8 * area, "h = {h}: {got} vs {area}");
    }
    assert!(common::catenoid(1.0, 0.7).is_none());
    assert!(catenoid_area(&TwoCircleConfig::new(1.0, 0.7).unwrap()).is_none());
}

#[test]
fn y_film_matches_sixty_degree_construction() {
    for h in [0.01, 0.05, 0.1, 0.2, 0.3, 0.4] {
        let cfg = TwoCircleConfig::new(1.0, h).unwrap();
        let (area, neck) = common::y_film(1.0, h).unwrap();
        let y = y_film(&cfg, PANELS).unwrap();
        assert!((y.area - area).abs() < 1e-6 * area, "h = {h}: {} vs {area}", y.area);
        assert!((y.neck - neck).abs() < 1e-4, "h = {h}: neck {} vs {neck}", y.neck);
        assert!((y.junction_angle - 120.0).abs() < 1e-3);
        let b = y_film_by_balance(&cfg).unwrap();
        assert!((b.area - area).abs() < 1e-6 * area);
        assert!((y_film_area(&cfg).unwrap() - area).abs() < 1e-6 * area);
    }
}

#[test]
fn two_circle_orderings_at_small_separation() {
    let row = oracle_row(1.0, 0.1).unwrap();
    let (cat, y) = (row.catenoid.unwrap(), row.y_film.unwrap());
    assert!(cat < y && y < row.two_disks);
    assert_eq!(two_disks_area(&TwoCircleConfig::new(1.0, 0.1).unwrap()), TAU);
}

#[test]
fn thresholds_are_ordered() {
    let t = thresholds(1.0);
    let y = t.y_film_beats_disks_below.unwrap();
    assert!(t.catenoid_beats_disks_below < t.catenoid_exists_below);
    assert!(y < t.catenoid_beats_disks_below);
    let oracle = common::bisect(0.2, 0.4, |h| common::y_film(1.0, h).unwrap().0 - TAU);
    assert!((y - oracle).abs() < 1e-4, "threshold {y} vs {oracle}");
    let cfg = TwoCircleConfig::new(1.0, 0.5 * (t.catenoid_beats_disks_below + t.catenoid_exists_below)).unwrap();
    assert!(catenoid_area(&cfg).unwrap() > two_disks_area(&cfg));
}

#[test]
fn cone_areas() {
    let c = cone_densities();
    assert_eq!(c.plane, PI);
    assert!((c.y_cone - 1.5 * PI).abs() < 1e-15);
    assert!((c.t_cone - c.t_cone_numeric).abs() < 1e-8);
    assert!(c.plane < c.y_cone && c.y_cone < c.t_cone);
}

#[test]
fn inscribed_polygons_approach_the_disk() {
    assert!((polygon_area(4, 1.0) - 2.0).abs() < 1e-15);
    assert!((polygon_area(4096, 1.0) - PI).abs() < 1e-5);
}
