//! Douglas' route: boundary energy of a parameterization, its harmonic
//! extension to the unit disk, and the parameterized area.
//!
//! The energy of `g : S¹ → ℝ³` is
//!
//! ```text
//! B(g) = 1/(16π) ∬ |g(θ) − g(φ)|² / sin²((θ − φ)/2) dθ dφ
//! ```
//!
//! which equals the Dirichlet energy of the harmonic extension. With this
//! constant the identity parameterization of the unit circle has `B = π`,
//! the area of the flat disk.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::{orthogonal_unit, BoundaryPiece};
use crate::Vec3;

pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DouglasError {
    #[error("curve has zero length")]
    Degenerate,
    #[error("boundary piece is not a closed curve")]
    NotACurve,
    #[error("need at least {MIN_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("knots must increase strictly over one period (violated at index {0})")]
    NonMonotone(usize),
    #[error("polar grid needs at least 2 rings and 8 angles")]
    SmallGrid,
}

/// Closed curve with a periodic parameter `t ∈ [0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ClosedCurve {
    Circle { center: Vec3, normal: Vec3, radius: f64 },
    /// Semi-axis `a` along `major`, `b` along `normal × major`.
    Ellipse { center: Vec3, normal: Vec3, major: Vec3, a: f64, b: f64 },
    /// Closed polygon, parameterized by normalized arc length.
    Polyline { points: Vec<Vec3> },
}

impl ClosedCurve {
    pub fn unit_circle() -> Self {
        ClosedCurve::Circle { center: Vec3::zeros(), normal: Vec3::z(), radius: 1.0 }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        ClosedCurve::Ellipse { center: Vec3::zeros(), normal: Vec3::z(), major: Vec3::x(), a, b }
    }

    pub fn from_piece(piece: &BoundaryPiece) -> Result<Self, DouglasError> {
        match piece {
            BoundaryPiece::Circle { center, normal, radius } => {
                Ok(ClosedCurve::Circle { center: *center, normal: *normal, radius: *radius })
            }
            BoundaryPiece::Polyline { points, closed: true } => Ok(ClosedCurve::Polyline { points: points.clone() }),
            _ => Err(DouglasError::NotACurve),
        }
    }

    pub fn validate(&self) -> Result<(), DouglasError> {
        let ok = match self {
            ClosedCurve::Circle { normal, radius, .. } => *radius > 0.0 && normal.norm() > 0.0,
            ClosedCurve::Ellipse { normal, major, a, b, .. } => {
                *a > 0.0 && *b > 0.0 && normal.cross(major).norm() > 0.0
            }
            ClosedCurve::Polyline { points } => self.length_of(points) > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(DouglasError::Degenerate)
        }
    }

    fn length_of(&self, points: &[Vec3]) -> f64 {
        let n = points.len();
        (0..n).map(|i| (points[(i + 1) % n] - points[i]).norm()).sum()
    }

    fn frame(normal: &Vec3, major: Option<&Vec3>) -> (Vec3, Vec3) {
        let n = normal.normalize();
        let u = match major {
            Some(m) => (m - n * m.dot(&n)).normalize(),
            None => orthogonal_unit(&n),
        };
        (u, n.cross(&u))
    }

    pub fn point(&self, t: f64) -> Vec3 {
        let a = TAU * t;
        match self {
            ClosedCurve::Circle { center, normal, radius } => {
                let (u, v) = Self::frame(normal, None);
                center + (u * a.cos() + v * a.sin()) * *radius
            }
            ClosedCurve::Ellipse { center, normal, major, a: ra, b: rb } => {
                let (u, v) = Self::frame(normal, Some(major));
                center + u * (ra * a.cos()) + v * (rb * a.sin())
            }
            ClosedCurve::Polyline { points } => {
                let n = points.len();
                let mut s = t.rem_euclid(1.0) * self.length_of(points);
                for i in 0..n {
                    let (p, q) = (points[i], points[(i + 1) % n]);
                    let l = (q - p).norm();
                    if s <= l && l > 0.0 {
                        return p + (q - p) * (s / l);
                    }
                    s -= l;
                }
                points[0]
            }
        }
    }

    /// Area of the flat region enclosed by a planar curve.
    pub fn flat_area(&self) -> Option<f64> {
        match self {
            ClosedCurve::Circle { radius, .. } => Some(PI * radius * radius),
            ClosedCurve::Ellipse { a, b, .. } => Some(PI * a * b),
            ClosedCurve::Polyline { .. } => None,
        }
    }
}

/// Samples `g(θ_i) = Γ(t_i)` at `θ_i = 2πi/N`.
#[derive(Clone, Debug)]
pub struct BoundaryParam {
    pub curve: ClosedCurve,
    pub knots: Vec<f64>,
    pub points: Vec<Vec3>,
    /// Indices whose knots are held fixed (three-point normalization).
    pub pinned: [usize; 3],
}

impl BoundaryParam {
    /// Uniform knots `t_i = i/N`.
    pub fn uniform(curve: ClosedCurve, n: usize) -> Result<Self, DouglasError> {
        Self::from_knots(curve, (0..n).map(|i| i as f64 / n as f64).collect())
    }

    pub fn from_knots(curve: ClosedCurve, knots: Vec<f64>) -> Result<Self, DouglasError> {
        curve.validate()?;
        let n = knots.len();
        if n < MIN_SAMPLES {
            return Err(DouglasError::TooFewSamples(n));
        }
        check_monotone(&knots)?;
        let points = knots.iter().map(|&t| curve.point(t)).collect();
        Ok(BoundaryParam { curve, knots, points, pinned: [0, n / 3, 2 * n / 3] })
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn energy(&self) -> f64 {
        EnergyKernel::new(self.len()).energy(&self.points)
    }

    fn set_knots(&mut self, knots: Vec<f64>) {
        self.points = knots.iter().map(|&t| self.curve.point(t)).collect();
        self.knots = knots;
    }
}

fn check_monotone(knots: &[f64]) -> Result<(), DouglasError> {
    let n = knots.len();
    for i in 0..n {
        let next = if i + 1 == n { knots[0] + 1.0 } else { knots[i + 1] };
        if !(next > knots[i]) {
            return Err(DouglasError::NonMonotone(i));
        }
    }
    Ok(())
}

/// Precomputed quadrature weights for the periodic double integral.
struct EnergyKernel {
    n: usize,
    /// `1 / sin²(π d / N)` for index offset `d`.
    weight: Vec<f64>,
    scale: f64,
    h: f64,
}

impl EnergyKernel {
    fn new(n: usize) -> Self {
        let weight = (0..n)
            .map(|d| if d == 0 { 0.0 } else { 1.0 / (PI * d as f64 / n as f64).sin().powi(2) })
            .collect();
        let h = TAU / n as f64;
        EnergyKernel { n, weight, scale: h * h / (16.0 * PI), h }
    }

    fn diagonal(&self, g: &[Vec3], i: usize) -> f64 {
        let n = self.n;
        let d = (g[(i + 1) % n] - g[(i + n - 1) % n]) / (2.0 * self.h);
        4.0 * d.norm_squared()
    }

    fn row(&self, g: &[Vec3], i: usize) -> f64 {
        let gi = g[i];
        let mut s = 0.0;
        for j in (i + 1)..self.n {
            s += self.weight[j - i] * (gi - g[j]).norm_squared();
        }
        s
    }

    fn energy(&self, g: &[Vec3]) -> f64 {
        let rows: Vec<f64> = (0..self.n).into_par_iter().map(|i| 2.0 * self.row(g, i) + self.diagonal(g, i)).collect();
        self.scale * rows.iter().sum::<f64>()
    }

    /// Energy change when `g[i]` is replaced by `p`.
    fn delta(&self, g: &mut [Vec3], i: usize, p: Vec3) -> f64 {
        let n = self.n;
        let old = g[i];
        let mut off = 0.0;
        for j in 0..n {
            if j != i {
                let w = self.weight[(j + n - i) % n];
                off += w * ((p - g[j]).norm_squared() - (old - g[j]).norm_squared());
            }
        }
        let (a, b) = ((i + n - 1) % n, (i + 1) % n);
        let before = self.diagonal(g, a) + self.diagonal(g, b);
        g[i] = p;
        let after = self.diagonal(g, a) + self.diagonal(g, b);
        g[i] = old;
        self.scale * (2.0 * off + after - before)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DouglasOptions {
    pub iterations: usize,
    /// Smallest knot step tried before declaring stationarity.
    pub step_min: f64,
    /// Energy decrease below which a move does not count.
    pub tol: f64,
    /// Sine modes per arc between pinned knots.
    pub modes: usize,
    /// Single-knot polishing sweeps after the modal descent.
    pub polish_sweeps: usize,
}

impl Default for DouglasOptions {
    fn default() -> Self {
        DouglasOptions { iterations: 400, step_min: 1e-7, tol: 1e-9, modes: 32, polish_sweeps: 2000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DouglasRun {
    pub initial_energy: f64,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Energy after every sweep; non-increasing.
    pub history: Vec<f64>,
}

/// Search directions: sine bumps on each arc between pinned knots, coarse
/// to fine, followed by every single free knot.
fn directions(param: &BoundaryParam, modes: usize) -> Vec<Vec<(usize, f64)>> {
    let n = param.len();
    let pins = param.pinned;
    let mut dirs = Vec::new();
    for m in 1..=modes {
        for a in 0..3 {
            let start = pins[a];
            let end = if a == 2 { n } else { pins[a + 1] };
            let len = end - start;
            if m >= len {
                continue;
            }
            let d = (start + 1..end)
                .map(|i| (i % n, (PI * m as f64 * (i - start) as f64 / len as f64).sin()))
                .collect();
            dirs.push(d);
        }
    }
    dirs
}

fn shifted(knots: &[f64], dir: &[(usize, f64)], s: f64) -> Option<Vec<f64>> {
    let mut k = knots.to_vec();
    for &(i, w) in dir {
        k[i] += s * w;
    }
    check_monotone(&k).ok().map(|_| k)
}

/// Minimizes `B` over monotone reparameterizations of the same curve with
/// three pinned knots, by cyclic coordinate descent with backtracking.
pub fn minimize_douglas(mut param: BoundaryParam, opts: &DouglasOptions) -> (BoundaryParam, DouglasRun) {
    let n = param.len();
    let kernel = EnergyKernel::new(n);
    let dirs = directions(&param, opts.modes);
    let mut steps = vec![0.25 / n as f64; dirs.len()];
    let initial = kernel.energy(&param.points);
    let mut energy = initial;
    let mut history = vec![energy];
    let mut iterations = 0;
    while iterations < opts.iterations && steps.iter().any(|&s| s >= opts.step_min) {
        iterations += 1;
        for (d, dir) in dirs.iter().enumerate() {
            if steps[d] < opts.step_min {
                continue;
            }
            let step = steps[d];
            let eval = |s: f64| {
                shifted(&param.knots, dir, s).map(|k| {
                    let pts: Vec<Vec3> = k.iter().map(|&t| param.curve.point(t)).collect();
                    (kernel.energy(&pts), k, pts)
                })
            };
            let plus = eval(step);
            let minus = eval(-step);
            let mut trials = Vec::new();
            if let (Some((ep, ..)), Some((em, ..))) = (&plus, &minus) {
                let curv = ep + em - 2.0 * energy;
                if curv > 0.0 {
                    let s = (step * (em - ep) / (2.0 * curv)).clamp(-4.0 * step, 4.0 * step);
                    trials.extend(eval(s).map(|t| (t, s.abs())));
                }
            }
            trials.extend(plus.map(|t| (t, step)));
            trials.extend(minus.map(|t| (t, step)));
            let best = trials
                .into_iter()
                .min_by(|a, b| a.0 .0.total_cmp(&b.0 .0))
                .filter(|((e, ..), _)| *e < energy - opts.tol);
            match best {
                Some(((e, k, pts), s)) => {
                    energy = e;
                    param.knots = k;
                    param.points = pts;
                    steps[d] = s.max(step * 0.5).max(opts.step_min);
                }
                None => steps[d] *= 0.5,
            }
        }
        history.push(energy);
    }
    let converged = knot_stationary(&mut param, &kernel, opts);
    energy = kernel.energy(&param.points);
    if energy < *history.last().unwrap() {
        history.push(energy);
    }
    (param, DouglasRun { initial_energy: initial, energy, iterations, converged, history })
}

/// Single-knot coordinate descent with parabolic steps, then reports whether
/// no single-knot move of size `step_min` lowers the energy by more than `tol`.
fn knot_stationary(param: &mut BoundaryParam, kernel: &EnergyKernel, opts: &DouglasOptions) -> bool {
    let n = param.len();
    let free: Vec<usize> = (0..n).filter(|i| !param.pinned.contains(i)).collect();
    let mut steps = vec![0.1 / n as f64; n];
    let gap = |param: &BoundaryParam, i: usize| {
        let prev = if i == 0 { param.knots[n - 1] - 1.0 } else { param.knots[i - 1] };
        let next = if i + 1 == n { param.knots[0] + 1.0 } else { param.knots[i + 1] };
        (prev, next)
    };
    let failing = |param: &mut BoundaryParam| -> Vec<usize> {
        free.iter()
            .copied()
            .filter(|&i| {
                let (prev, next) = gap(param, i);
                [opts.step_min, -opts.step_min].iter().any(|&ds| {
                    let t = param.knots[i] + ds;
                    t > prev && t < next && kernel.delta(&mut param.points, i, param.curve.point(t)) < -opts.tol
                })
            })
            .collect()
    };
    let mut sweeps = 0;
    loop {
        while sweeps < opts.polish_sweeps {
            sweeps += 1;
            let mut active = false;
            for &i in &free {
                if steps[i] < opts.step_min {
                    continue;
                }
                active = true;
                let (prev, next) = gap(param, i);
                let t0 = param.knots[i];
                let try_move = |param: &mut BoundaryParam, ds: f64| -> Option<(f64, f64)> {
                    let t = t0 + ds;
                    if !(t > prev && t < next) {
                        return None;
                    }
                    let p = param.curve.point(t);
                    Some((kernel.delta(&mut param.points, i, p), ds))
                };
                let s = steps[i];
                let mut cands: Vec<(f64, f64)> = [s, -s].iter().filter_map(|&ds| try_move(param, ds)).collect();
                if cands.len() == 2 {
                    let curv = cands[0].0 + cands[1].0;
                    if curv > 0.0 {
                        let ds = (s * (cands[1].0 - cands[0].0) / (2.0 * curv)).clamp(-4.0 * s, 4.0 * s);
                        cands.extend(try_move(param, ds));
                    }
                }
                match cands.into_iter().filter(|c| c.0 < -opts.tol).min_by(|a, b| a.0.total_cmp(&b.0)) {
                    Some((_, ds)) => {
                        param.knots[i] = t0 + ds;
                        param.points[i] = param.curve.point(t0 + ds);
                        steps[i] = ds.abs().max(s * 0.5);
                    }
                    None => steps[i] *= 0.5,
                }
            }
            if !active {
                break;
            }
        }
        let bad = failing(param);
        if bad.is_empty() {
            return true;
        }
        if sweeps >= opts.polish_sweeps {
            return false;
        }
        for i in bad {
            steps[i] = 4.0 * opts.step_min;
        }
    }
}

/// Largest single-knot energy derivative, by central differences of size `eps`.
pub fn max_knot_gradient(param: &BoundaryParam, eps: f64) -> f64 {
    let kernel = EnergyKernel::new(param.len());
    let mut pts = param.points.clone();
    (0..param.len())
        .filter(|i| !param.pinned.contains(i))
        .map(|i| {
            let up = kernel.delta(&mut pts, i, param.curve.point(param.knots[i] + eps));
            let down = kernel.delta(&mut pts, i, param.curve.point(param.knots[i] - eps));
            ((up - down) / (2.0 * eps)).abs()
        })
        .fold(0.0, f64::max)
}

/// Replaces the knots, keeping the curve.
pub fn reparameterize(param: &BoundaryParam, knots: Vec<f64>) -> Result<BoundaryParam, DouglasError> {
    check_monotone(&knots)?;
    let mut p = param.clone();
    p.set_knots(knots);
    Ok(p)
}

/// Values of the harmonic extension on a polar grid: ring `i` at radius
/// `i / rings`, angle `j` at `2πj / angles`.
#[derive(Clone, Debug)]
pub struct HarmonicMap {
    pub rings: usize,
    pub angles: usize,
    pub values: Vec<Vec3>,
}

impl HarmonicMap {
    pub fn at(&self, i: usize, j: usize) -> Vec3 {
        self.values[i * self.angles + j % self.angles]
    }

    pub fn radius(&self, i: usize) -> f64 {
        i as f64 / self.rings as f64
    }

    /// Largest residual of the five-point polar Laplacian over interior nodes.
    pub fn laplacian_residual(&self) -> f64 {
        let dr = 1.0 / self.rings as f64;
        let dp = TAU / self.angles as f64;
        let mut worst: f64 = 0.0;
        for i in 1..self.rings {
            let r = self.radius(i);
            for j in 0..self.angles {
                let c = self.at(i, j);
                let frr = (self.at(i + 1, j) - c * 2.0 + self.at(i - 1, j)) / (dr * dr);
                let fr = (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * dr);
                let fpp = (self.at(i, j + 1) - c * 2.0 + self.at(i, j + self.angles - 1)) / (dp * dp);
                worst = worst.max((frr + fr / r + fpp / (r * r)).amax());
            }
        }
        worst
    }

    /// Scales every value by `s`.
    pub fn scaled(&self, s: f64) -> HarmonicMap {
        HarmonicMap { values: self.values.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    /// Triangulated polar grid; the center ring collapses to one vertex.
    pub fn triangles(&self) -> (Vec<Vec3>, Vec<[usize; 3]>) {
        let m = self.angles;
        let mut verts = vec![self.at(0, 0)];
        for i in 1..=self.rings {
            verts.extend((0..m).map(|j| self.at(i, j)));
        }
        let id = |i: usize, j: usize| if i == 0 { 0 } else { 1 + (i - 1) * m + j % m };
        let mut tris = Vec::new();
        for j in 0..m {
            tris.push([0, id(1, j), id(1, j + 1)]);
        }
        for i in 1..self.rings {
            for j in 0..m {
                tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        (verts, tris)
    }
}

/// Poisson integral of the trigonometric interpolant of the samples.
pub fn harmonic_extension(param: &BoundaryParam, rings: usize, angles: usize) -> Result<HarmonicMap, DouglasError> {
    if rings < 2 || angles < 8 {
        return Err(DouglasError::SmallGrid);
    }
    let n = param.len();
    let g = &param.points;
    let half = n / 2;
    let coeffs: Vec<(Vec3, Vec3)> = (0..=half)
        .map(|k| {
            let mut c = Vec3::zeros();
            let mut s = Vec3::zeros();
            for (i, p) in g.iter().enumerate() {
                let a = TAU * ((k * i) % n) as f64 / n as f64;
                c += p * a.cos();
                s += p * a.sin();
            }
            let w = if k == 0 || (n % 2 == 0 && k == half) { 1.0 } else { 2.0 } / n as f64;
            (c * w, s * w)
        })
        .collect();
    let values = (0..=rings)
        .into_par_iter()
        .flat_map_iter(|i| {
            let r = i as f64 / rings as f64;
            let coeffs = &coeffs;
            (0..angles).map(move |j| {
                let phi = TAU * j as f64 / angles as f64;
                let mut v = coeffs[0].0;
                let mut rk = 1.0;
                for (k, (c, s)) in coeffs.iter().enumerate().skip(1) {
                    rk *= r;
                    if rk == 0.0 {
                        break;
                    }
                    let a = k as f64 * phi;
                    v += (c * a.cos() + s * a.sin()) * rk;
                }
                v
            })
        })
        .collect();
    Ok(HarmonicMap { rings, angles, values })
}

/// `∬_D |∂_x f × ∂_y f| dx dy`, computed as `∫∫ |f_r × f_φ| dr dφ` with
/// finite differences, trapezoid weights in `r` and periodic sums in `φ`.
pub fn area_integral(f: &HarmonicMap) -> f64 {
    let (nr, m) = (f.rings, f.angles);
    let dr = 1.0 / nr as f64;
    let dp = TAU / m as f64;
    let ring_sums: Vec<f64> = (0..=nr)
        .into_par_iter()
        .map(|i| {
            (0..m)
                .map(|j| {
                    let fr = if i == 0 {
                        (f.at(1, j) * 4.0 - f.at(2, j) - f.at(0, j) * 3.0) / (2.0 * dr)
                    } else if i == nr {
                        (f.at(nr, j) * 3.0 - f.at(nr - 1, j) * 4.0 + f.at(nr - 2, j)) / (2.0 * dr)
                    } else {
                        (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * dr)
                    };
                    let fp = (f.at(i, j + 1) - f.at(i, j + m - 1)) / (2.0 * dp);
                    fr.cross(&fp).norm()
                })
                .sum::<f64>()
        })
        .collect();
    let mut total = 0.0;
    for (i, s) in ring_sums.iter().enumerate() {
        let w = if i == 0 || i == nr { 0.5 } else { 1.0 };
        total += w * s;
    }
    total * dr * dp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_energy_is_pi() {
        let g = BoundaryParam::uniform(ClosedCurve::unit_circle(), 512).unwrap();
        assert!((g.energy() - PI).abs() < 1e-3);
    }

    #[test]
    fn non_monotone_knots_rejected() {
        let mut k: Vec<f64> = (0..32).map(|i| i as f64 / 32.0).collect();
        k.swap(4, 5);
        assert_eq!(BoundaryParam::from_knots(ClosedCurve::unit_circle(), k).unwrap_err(), DouglasError::NonMonotone(4));
    }

    #[test]
    fn zero_length_curve_rejected() {
        let c = ClosedCurve::Circle { center: Vec3::zeros(), normal: Vec3::z(), radius: 0.0 };
        assert_eq!(BoundaryParam::uniform(c, 32).unwrap_err(), DouglasError::Degenerate);
        let p = ClosedCurve::Polyline { points: vec![Vec3::x(); 4] };
        assert_eq!(p.validate().unwrap_err(), DouglasError::Degenerate);
    }

    #[test]
    fn local_delta_matches_full_recompute() {
        let g = BoundaryParam::uniform(ClosedCurve::ellipse(1.0, 0.5), 40).unwrap();
        let k = EnergyKernel::new(40);
        let mut pts = g.points.clone();
        let p = g.curve.point(g.knots[7] + 0.01);
        let d = k.delta(&mut pts, 7, p);
        pts[7] = p;
        assert!((k.energy(&pts) - g.energy() - d).abs() < 1e-12);
    }

    #[test]
    fn constant_data_extend_to_constants() {
        let pts = vec![Vec3::new(1.0, 2.0, 3.0); 32];
        let g = BoundaryParam { curve: ClosedCurve::unit_circle(), knots: vec![0.0; 32], points: pts, pinned: [0, 10, 21] };
        let f = harmonic_extension(&g, 8, 32).unwrap();
        assert!(f.values.iter().all(|v| (v - Vec3::new(1.0, 2.0, 3.0)).norm() < 1e-12));
        assert!(area_integral(&f) < 1e-12);
    }
}
