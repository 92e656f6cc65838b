//! Analytic and quadrature references for the two-circle films and the
//! singular cones. Nothing in the solvers calls into this module.
//!
//! A catenoid band through the circles `r = ρ` at `z = z₀` and `r = R` at
//! `z = z₁` has profile `r(z) = a cosh(z/a + s)`; its area is
//! `2π ∫ r √(1 + r′²) dz = 2π ∫ a cosh²(z/a + s) dz`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("radius and half-separation must be positive")]
    BadConfig,
    #[error("Y-film does not exist at this separation")]
    NoYFilm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoCircleConfig {
    pub radius: f64,
    pub half_separation: f64,
}

impl TwoCircleConfig {
    pub fn new(radius: f64, half_separation: f64) -> Result<Self, ReferenceError> {
        if radius > 0.0 && half_separation > 0.0 {
            Ok(TwoCircleConfig { radius, half_separation })
        } else {
            Err(ReferenceError::BadConfig)
        }
    }
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Quadrature panels used by the area integrals.
pub const PANELS: usize = 2000;

/// Surface of revolution area `2π ∫ r √(1 + r′²) dz` for `r = a cosh(z/a + s)`.
fn band_area_quadrature(a: f64, s: f64, z0: f64, z1: f64, panels: usize) -> f64 {
    TAU * simpson(
        |z| {
            let u = z / a + s;
            a * u.cosh() * (1.0 + u.sinh().powi(2)).sqrt()
        },
        z0,
        z1,
        panels,
    )
}

/// Root `u* ≈ 1.19968` of `u tanh u = 1`, where `c cosh(h/c)` is smallest.
pub fn critical_u() -> f64 {
    bisect(0.5, 2.0, |u| u * u.tanh() - 1.0)
}

/// Largest half-separation at which a catenoid spans two circles of radius `r`.
pub fn catenoid_max_half_separation(r: f64) -> f64 {
    let u = critical_u();
    r * u / u.cosh()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Catenoid {
    /// Neck radius `c` in `r(z) = c cosh(z/c)`.
    pub neck: f64,
    pub area: f64,
}

/// Both catenoids spanning the two circles, when they exist (stable branch first).
pub fn catenoids(config: &TwoCircleConfig, panels: usize) -> Vec<Catenoid> {
    let (r, h) = (config.radius, config.half_separation);
    let u0 = critical_u();
    let g = |u: f64| (h / u) * u.cosh() - r;
    if g(u0) > 0.0 {
        return Vec::new();
    }
    let stable = bisect(1e-12, u0, g);
    let mut out = vec![stable];
    let mut hi = u0 * 2.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    out.push(bisect(u0, hi, g));
    out.into_iter()
        .map(|u| {
            let c = h / u;
            Catenoid { neck: c, area: band_area_quadrature(c, 0.0, -h, h, panels) }
        })
        .collect()
}

/// Area of the smaller-area catenoid, if one exists.
pub fn catenoid_area(config: &TwoCircleConfig) -> Option<f64> {
    catenoids(config, PANELS).into_iter().map(|c| c.area).reduce(f64::min)
}

/// Catenoid band from `(ρ, 0)` to `(R, h)` of least area, as `(a, s, area)`.
pub fn band(rho: f64, r: f64, h: f64, panels: usize) -> Option<(f64, f64, f64)> {
    let g = |s: f64| (rho / s.cosh()) * (h * s.cosh() / rho + s).cosh() - r;
    let grid: Vec<f64> = (0..=4000).map(|i| -8.0 + 16.0 * i as f64 / 4000.0).collect();
    let mut best: Option<(f64, f64, f64)> = None;
    for w in grid.windows(2) {
        let (g0, g1) = (g(w[0]), g(w[1]));
        if g0 == 0.0 || (g0 > 0.0) != (g1 > 0.0) {
            let s = if g0 == 0.0 { w[0] } else { bisect(w[0], w[1], g) };
            let a = rho / s.cosh();
            let area = band_area_quadrature(a, s, 0.0, h, panels);
            if best.is_none_or(|b| area < b.2) {
                best = Some((a, s, area));
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct YFilm {
    /// Radius of the central disk.
    pub neck: f64,
    pub area: f64,
    /// Angle between the central disk and each band along the junction circle, degrees.
    pub junction_angle: f64,
}

fn y_total(config: &TwoCircleConfig, rho: f64, panels: usize) -> Option<f64> {
    band(rho, config.radius, config.half_separation, panels).map(|(_, _, a)| PI * rho * rho + 2.0 * a)
}

/// Central disk plus two catenoid bands, minimized over the disk radius.
pub fn y_film(config: &TwoCircleConfig, panels: usize) -> Result<YFilm, ReferenceError> {
    let r = config.radius;
    let f = |rho: f64| y_total(config, rho, panels).unwrap_or(f64::INFINITY);
    // coarse scan for a bracket, clustered toward R where thin films have their neck; then golden section
    let n = 400;
    let samples: Vec<(f64, f64)> =
        (1..n).map(|i| r * (1.0 - (1.0 - i as f64 / n as f64).powi(3))).map(|x| (x, f(x))).collect();
    // the film is the interior local minimum of widest neck; smaller necks can undercut it
    let k = (1..samples.len() - 1)
        .rev()
        .find(|&k| {
            let (l, m, r) = (samples[k - 1].1, samples[k].1, samples[k + 1].1);
            m.is_finite() && l.is_finite() && r.is_finite() && m <= l && m <= r
        })
        .ok_or(ReferenceError::NoYFilm)?;
    let (mut a, mut b) = (samples[k - 1].0, samples[k + 1].0);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-11 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let rho = 0.5 * (a + b);
    let (_, s, _) = band(rho, r, config.half_separation, panels).ok_or(ReferenceError::NoYFilm)?;
    let slope = s.sinh();
    Ok(YFilm { neck: rho, area: f(rho), junction_angle: 180.0 - 1f64.atan2(slope).to_degrees() })
}

pub fn y_film_area(config: &TwoCircleConfig) -> Result<f64, ReferenceError> {
    y_film(config, PANELS).map(|y| y.area)
}

/// Y-film from the junction condition alone: the bands leave the disk with
/// slope `dr/dz = tan 30°`, which fixes `s = asinh(tan 30°)` and leaves one
/// unknown `a` with `a cosh(h/a + s) = R`.
pub fn y_film_by_balance(config: &TwoCircleConfig) -> Result<YFilm, ReferenceError> {
    let (r, h) = (config.radius, config.half_separation);
    let s = (30f64.to_radians().tan()).asinh();
    let g = |a: f64| a * (h / a + s).cosh() - r;
    // largest root: scan down from a = R
    let grid: Vec<f64> = (1..=20000).rev().map(|i| r * i as f64 / 20000.0).collect();
    for w in grid.windows(2) {
        if (g(w[0]) > 0.0) != (g(w[1]) > 0.0) {
            let a = bisect(w[1], w[0], g);
            let rho = a * s.cosh();
            let area = PI * rho * rho + 2.0 * band_area_quadrature(a, s, 0.0, h, PANELS);
            return Ok(YFilm { neck: rho, area, junction_angle: 120.0 });
        }
    }
    Err(ReferenceError::NoYFilm)
}

/// Two flat disks.
pub fn two_disks_area(config: &TwoCircleConfig) -> f64 {
    TAU * config.radius * config.radius
}

/// Area of a regular `n`-gon inscribed in a circle of radius `r`.
pub fn polygon_area(n: usize, r: f64) -> f64 {
    0.5 * n as f64 * r * r * (TAU / n as f64).sin()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Thresholds {
    /// Beyond this half-separation no catenoid exists.
    pub catenoid_exists_below: f64,
    /// Below this the catenoid has less area than the two disks.
    pub catenoid_beats_disks_below: f64,
    /// Below this the Y-film has less area than the two disks.
    pub y_film_beats_disks_below: Option<f64>,
}

pub fn thresholds(radius: f64) -> Thresholds {
    let hmax = catenoid_max_half_separation(radius);
    let cfg = |h: f64| TwoCircleConfig { radius, half_separation: h };
    let cat = bisect(1e-6 * radius, hmax * (1.0 - 1e-9), |h| {
        catenoid_area(&cfg(h)).unwrap_or(f64::INFINITY) - two_disks_area(&cfg(h))
    });
    let ydiff = |h: f64| match y_film(&cfg(h), 400) {
        Ok(y) => y.area - two_disks_area(&cfg(h)),
        Err(_) => 1.0,
    };
    let mut hi = 0.01 * radius;
    while ydiff(hi) < 0.0 && hi < 10.0 * radius {
        hi *= 1.5;
    }
    let y = (ydiff(1e-3 * radius) < 0.0 && ydiff(hi) > 0.0).then(|| bisect(1e-3 * radius, hi, ydiff));
    Thresholds { catenoid_exists_below: hmax, catenoid_beats_disks_below: cat, y_film_beats_disks_below: y }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConeAreas {
    pub plane: f64,
    pub y_cone: f64,
    /// Closed form `3 arccos(−1/3)`: six sectors of the tetrahedral angle.
    pub t_cone: f64,
    /// Same, from fans of thin triangles.
    pub t_cone_numeric: f64,
}

/// Areas inside the unit ball of the plane, the Y cone and the T cone.
pub fn cone_densities() -> ConeAreas {
    let theta = (-1.0f64 / 3.0).acos();
    let fan = |angle: f64, pieces: usize| {
        let d = angle / pieces as f64;
        pieces as f64 * 0.5 * d.sin()
    };
    ConeAreas { plane: PI, y_cone: 1.5 * PI, t_cone: 3.0 * theta, t_cone_numeric: 6.0 * fan(theta, 1 << 16) }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub radius: f64,
    pub half_separation: f64,
    pub catenoid: Option<f64>,
    pub catenoid_neck: Option<f64>,
    pub y_film: Option<f64>,
    pub y_film_neck: Option<f64>,
    pub y_junction_angle: Option<f64>,
    pub two_disks: f64,
}

pub fn oracle_row(radius: f64, h: f64) -> Result<OracleRow, ReferenceError> {
    let cfg = TwoCircleConfig::new(radius, h)?;
    let cat = catenoids(&cfg, PANELS).into_iter().reduce(|a, b| if b.area < a.area { b } else { a });
    let y = y_film(&cfg, PANELS).ok();
    Ok(OracleRow {
        radius,
        half_separation: h,
        catenoid: cat.map(|c| c.area),
        catenoid_neck: cat.map(|c| c.neck),
        y_film: y.map(|y| y.area),
        y_film_neck: y.map(|y| y.neck),
        y_junction_angle: y.map(|y| y.junction_angle),
        two_disks: two_disks_area(&cfg),
    })
}
