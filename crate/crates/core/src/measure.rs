//! Covering estimates of `ℋ^d` for finite samples of a set.
//!
//! The estimate is `c_d Σ diam(B_j)^d` over a cover of the samples by balls
//! of diameter at most `δ`, with `c_d = ω_d / 2^d` so that `ℋ^d` agrees with
//! Lebesgue measure on `ℝ^d`.
//!
//! A ladder started at diameter `t` takes balls greedily over the radii
//! `t/4, t/8, …`: at each rung the ball holding the most uncovered samples is
//! taken while it holds at least four fifths of what a full ball would, then the
//! rung halves. Below one sample's share of measure the last rung covers
//! whatever remains. A ball is never charged less than the share of the
//! samples it takes, so it grows (up to `t/2`) when it catches a clump. The
//! sample density is the median `k`-nearest-neighbour density and does not
//! depend on `δ`. The reported cover is the cheapest ladder over
//! `t = δ, δ/2, δ/4, …` down to the sampling resolution.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::PI;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::grid::{CubicalGrid, FaceSet};
use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("δ must be positive, got {0}")]
    BadDelta(f64),
    #[error("dimension must be 0, 1, 2 or 3, got {0}")]
    BadDimension(usize),
}

/// Volume of the unit ball in `ℝ^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => unreachable!(),
    }
}

pub fn normalizing_constant(d: usize) -> f64 {
    unit_ball_volume(d) / 2f64.powi(d as i32)
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverEstimate {
    pub dimension: usize,
    pub delta: f64,
    /// Ball centers (sample points) and diameters.
    pub cover: Vec<(Vec3, f64)>,
    pub value: f64,
    /// Smallest ladder diameter the sample density supports. For `δ` below
    /// it the cover undercounts and the estimate is no longer monotone in `δ`.
    pub resolution: f64,
    pub label: &'static str,
}

impl CoverEstimate {
    /// Every sample lies in a ball, and no diameter exceeds `δ`.
    pub fn audit(&self, samples: &[Vec3]) -> bool {
        let tol = 1e-12 * self.delta;
        self.cover.iter().all(|&(_, d)| d <= self.delta)
            && samples.iter().all(|p| self.cover.iter().any(|(c, d)| (p - c).norm() <= d / 2.0 + tol))
    }
}

struct HashGrid {
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl HashGrid {
    fn new(points: &[Vec3], cell: f64) -> Self {
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(p, cell)).or_default().push(i);
        }
        HashGrid { cell, buckets }
    }

    fn key(p: &Vec3, cell: f64) -> [i64; 3] {
        [(p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64]
    }

    /// Appends the samples in cells at Chebyshev cell distance exactly `m`.
    fn ring(&self, p: &Vec3, m: i64, out: &mut Vec<usize>) {
        let k = Self::key(p, self.cell);
        for dz in -m..=m {
            for dy in -m..=m {
                for dx in -m..=m {
                    if dx.abs().max(dy.abs()).max(dz.abs()) == m {
                        if let Some(b) = self.buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                            out.extend(b);
                        }
                    }
                }
            }
        }
    }

    /// Indices within distance `r ≤ cell` of `p`, in increasing order.
    fn within(&self, points: &[Vec3], p: &Vec3, r: f64) -> Vec<usize> {
        let k = Self::key(p, self.cell);
        let mut out = Vec::new();
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(b) = self.buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        out.extend(b.iter().copied().filter(|&i| (points[i] - p).norm() <= r));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Neighbours used for the sample density.
const NEIGHBOURS: usize = 24;

/// Median distance from a sample to its `k`-th nearest neighbour.
fn median_knn_distance(points: &[Vec3], k: usize) -> f64 {
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let cell = ((hi - lo).amax() / (points.len() as f64).sqrt()).max(f64::MIN_POSITIVE);
    let grid = HashGrid::new(points, cell);
    let mut dist: Vec<f64> = points
        .iter()
        .map(|p| {
            let mut near = Vec::new();
            for m in 0.. {
                grid.ring(p, m, &mut near);
                if near.len() > k {
                    let mut ds: Vec<f64> = near.iter().map(|&i| (points[i] - p).norm()).collect();
                    ds.select_nth_unstable_by(k, f64::total_cmp);
                    if ds[k] <= m as f64 * cell {
                        return ds[k];
                    }
                }
            }
            unreachable!()
        })
        .collect();
    dist.sort_by(f64::total_cmp);
    dist[dist.len() / 2]
}

/// A ball is taken only while it holds this fraction of a full ball's samples.
const FULLNESS: f64 = 0.8;

struct Ladder {
    cover: Vec<(Vec3, f64)>,
    value: f64,
}

/// Greedy cover over the radii `top/4, top/8, …`; `rho` is samples per unit
/// measure and `floor` the radius of one sample's share.
fn ladder(points: &[Vec3], d: usize, top: f64, rho: f64, floor: f64) -> Ladder {
    let omega = unit_ball_volume(d);
    let share_radius = |c: usize| match d {
        0 => 0.0,
        1 => c as f64 * floor,
        2 => (c as f64).sqrt() * floor,
        _ => (c as f64).cbrt() * floor,
    };
    let mut cover = Vec::new();
    let mut covered = vec![false; points.len()];
    let mut remaining = points.len();
    let mut r = top / 4.0;
    while remaining > 0 {
        let last = r * 0.5 < floor;
        if last {
            r = r.min(floor);
        }
        let full = rho * omega * r.powi(d as i32);
        let grid = HashGrid::new(points, r.max(f64::MIN_POSITIVE));
        let mut count: HashMap<usize, usize> = HashMap::new();
        let mut heap = BinaryHeap::new();
        for i in (0..points.len()).filter(|&i| !covered[i]) {
            let c = grid.within(points, &points[i], r).into_iter().filter(|&j| !covered[j]).count();
            count.insert(i, c);
            heap.push((c, Reverse(i)));
        }
        while let Some((c, Reverse(i))) = heap.pop() {
            if covered[i] || count[&i] != c {
                if !covered[i] {
                    heap.push((count[&i], Reverse(i)));
                }
                continue;
            }
            if !last && (c as f64) < FULLNESS * full {
                break;
            }
            let members: Vec<usize> = grid.within(points, &points[i], r).into_iter().filter(|&j| !covered[j]).collect();
            for &j in &members {
                covered[j] = true;
                for k in grid.within(points, &points[j], r) {
                    if let Some(n) = count.get_mut(&k) {
                        *n -= 1;
                    }
                }
            }
            remaining -= members.len();
            let radius = share_radius(members.len()).clamp(r, top / 2.0);
            cover.push((points[i], 2.0 * radius));
        }
        r *= 0.5;
    }
    let value = normalizing_constant(d) * cover.iter().map(|(_, dm)| dm.powi(d as i32)).sum::<f64>();
    Ladder { cover, value }
}

/// Greedy multiscale ball cover of the samples.
pub fn hausdorff_upper(points: &[Vec3], d: usize, delta: f64) -> Result<CoverEstimate, MeasureError> {
    if !(delta > 0.0) {
        return Err(MeasureError::BadDelta(delta));
    }
    if d > 3 {
        return Err(MeasureError::BadDimension(d));
    }
    let done = |l: Ladder, resolution: f64| {
        Ok(CoverEstimate { dimension: d, delta, cover: l.cover, value: l.value, resolution, label: "greedy upper bound" })
    };
    if points.is_empty() {
        return done(Ladder { cover: Vec::new(), value: 0.0 }, 0.0);
    }
    let (rho, floor, resolution) = if d == 0 || points.len() <= NEIGHBOURS {
        // counting: every ladder ends in balls of the nearest-neighbour scale
        let nn = if points.len() > 1 { median_knn_distance(points, 1) } else { delta };
        (0.0, 0.0, nn.min(delta))
    } else {
        let rk = median_knn_distance(points, NEIGHBOURS);
        // median of a Gamma(k) count
        let rho = (NEIGHBOURS as f64 - 1.0 / 3.0) / (unit_ball_volume(d) * rk.powi(d as i32));
        let floor = match d {
            1 => 1.0 / (2.0 * rho),
            2 => (1.0 / (PI * rho)).sqrt(),
            _ => (3.0 / (4.0 * PI * rho)).cbrt(),
        };
        // a ball of diameter `resolution` holds sixteen shares
        let resolution = 2.0 * floor * 16f64.powf(1.0 / d as f64);
        (rho, floor, resolution)
    };
    let resolution = if resolution > 0.0 && resolution.is_finite() { resolution } else { delta };
    let mut best = ladder(points, d, delta, rho, floor);
    let mut top = delta * 0.5;
    while top >= resolution {
        let next = ladder(points, d, top, rho, floor);
        if next.value < best.value {
            best = next;
        }
        top *= 0.5;
    }
    done(best, resolution)
}

/// Exact `ℋ²` of a union of grid faces.
pub fn hausdorff_of_faceset(faces: &FaceSet, grid: &CubicalGrid) -> f64 {
    faces.area(grid)
}

/// Uniform random points on a triangle soup, `per_unit_area` per unit of total area.
pub fn sample_triangles(tris: &[[Vec3; 3]], per_unit_area: f64, seed: u64) -> Vec<Vec3> {
    let areas: Vec<f64> = tris.iter().map(|t| 0.5 * (t[1] - t[0]).cross(&(t[2] - t[0])).norm()).collect();
    let total: f64 = areas.iter().sum();
    if tris.is_empty() || total <= 0.0 {
        return Vec::new();
    }
    let pick = WeightedIndex::new(&areas).expect("positive total area");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (total * per_unit_area).ceil() as usize;
    (0..n)
        .map(|_| {
            let t = &tris[pick.sample(&mut rng)];
            let (mut a, mut b): (f64, f64) = (rng.gen(), rng.gen());
            if a + b > 1.0 {
                (a, b) = (1.0 - a, 1.0 - b);
            }
            t[0] + (t[1] - t[0]) * a + (t[2] - t[0]) * b
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_set_measures_zero() {
        let e = hausdorff_upper(&[], 2, 0.1).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.cover.is_empty());
    }

    #[test]
    fn nonpositive_delta_rejected() {
        assert_eq!(hausdorff_upper(&[Vec3::zeros()], 1, 0.0).unwrap_err(), MeasureError::BadDelta(0.0));
    }

    #[test]
    fn constants() {
        assert_eq!(normalizing_constant(1), 1.0);
        assert!((normalizing_constant(2) - PI / 4.0).abs() < 1e-15);
    }
}
