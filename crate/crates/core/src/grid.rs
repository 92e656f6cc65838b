//! Uniform cubical grids, safe regions away from the boundary, two-stage
//! radial projection onto the 2-skeleton, and minimization over face sets.
//!
//! Input sets are convex polygons (from triangles) and polylines. Stage one
//! maps everything inside a safe cube `Q` radially from a center `x_Q ∉ E`
//! onto `∂Q`; a central projection sends planar polygons to planar polygons,
//! so images stay exact. Stage two treats each touched face `F`: when some
//! point `x_F ∈ F` misses the image, everything on `F` is pushed radially
//! onto `∂F`; otherwise `F` is kept whole.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::BoundaryPiece;
use crate::Vec3;

/// Center candidates per cube or face.
pub const CANDIDATES: u32 = 128;

/// Area bound for a single projection pass, relative to the input area.
pub const AREA_INCREASE_BOUND: f64 = 1.25;

/// Above this many movable faces the minimizer stops certifying.
pub const EXHAUSTIVE_FACE_LIMIT: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least one cell along every axis")]
    Empty,
    #[error("margin {margin} must exceed the cell diagonal {diagonal}")]
    MarginTooSmall { margin: f64, diagonal: f64 },
    #[error("no admissible center found in {kind} {id}")]
    NoCenter { kind: &'static str, id: usize },
    #[error("face id {0} out of range")]
    BadFace(usize),
    #[error("replay log does not match this input ({0})")]
    ReplayMismatch(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicalGrid {
    pub origin: Vec3,
    /// Mesh exponent: cell side `2^-level`.
    pub level: u32,
    /// Cells along x, y, z.
    pub dims: [usize; 3],
}

/// Axis-aligned unit square of the grid, `axis` being its normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceIndex {
    pub axis: usize,
    pub ijk: [usize; 3],
}

impl CubicalGrid {
    pub fn new(origin: Vec3, level: u32, dims: [usize; 3]) -> Result<Self, GridError> {
        if dims.contains(&0) {
            return Err(GridError::Empty);
        }
        Ok(CubicalGrid { origin, level, dims })
    }

    /// Smallest grid at `level` covering the box `[lo, hi]`, aligned to multiples of the side.
    pub fn covering(lo: Vec3, hi: Vec3, level: u32) -> Result<Self, GridError> {
        let side = 0.5f64.powi(level as i32);
        let start = lo.map(|x| (x / side).floor() * side);
        let dims = [0, 1, 2].map(|a| (((hi[a] - start[a]) / side).ceil() as usize).max(1));
        Self::new(start, level, dims)
    }

    pub fn side(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    pub fn face_area(&self) -> f64 {
        self.side() * self.side()
    }

    pub fn diagonal(&self) -> f64 {
        self.side() * 3f64.sqrt()
    }

    pub fn num_cubes(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn cube_id(&self, ijk: [usize; 3]) -> usize {
        (ijk[2] * self.dims[1] + ijk[1]) * self.dims[0] + ijk[0]
    }

    pub fn cube_ijk(&self, id: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [id % nx, (id / nx) % ny, id / (nx * ny)]
    }

    pub fn cube_min(&self, ijk: [usize; 3]) -> Vec3 {
        self.origin + Vec3::new(ijk[0] as f64, ijk[1] as f64, ijk[2] as f64) * self.side()
    }

    pub fn cube_corners(&self, id: usize) -> [Vec3; 8] {
        let lo = self.cube_min(self.cube_ijk(id));
        let s = self.side();
        std::array::from_fn(|c| lo + Vec3::new((c & 1) as f64, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64) * s)
    }

    /// Extent of face grids per axis: `dims` with the normal axis extended by one.
    fn face_dims(&self, axis: usize) -> [usize; 3] {
        let mut d = self.dims;
        d[axis] += 1;
        d
    }

    fn face_offset(&self, axis: usize) -> usize {
        (0..axis).map(|a| self.face_dims(a).iter().product::<usize>()).sum()
    }

    pub fn num_faces(&self) -> usize {
        self.face_offset(3)
    }

    pub fn face_id(&self, f: FaceIndex) -> usize {
        let d = self.face_dims(f.axis);
        self.face_offset(f.axis) + (f.ijk[2] * d[1] + f.ijk[1]) * d[0] + f.ijk[0]
    }

    pub fn face_index(&self, id: usize) -> Result<FaceIndex, GridError> {
        for axis in 0..3 {
            let start = self.face_offset(axis);
            let d = self.face_dims(axis);
            let count: usize = d.iter().product();
            if id < start + count {
                let r = id - start;
                return Ok(FaceIndex { axis, ijk: [r % d[0], (r / d[0]) % d[1], r / (d[0] * d[1])] });
            }
        }
        Err(GridError::BadFace(id))
    }

    /// In-plane axes of a face with normal `axis`.
    pub fn plane_axes(axis: usize) -> (usize, usize) {
        ((axis + 1) % 3, (axis + 2) % 3)
    }

    /// Corners of a face in cyclic order.
    pub fn face_corners(&self, f: FaceIndex) -> [Vec3; 4] {
        let lo = self.cube_min(f.ijk);
        let s = self.side();
        let (u, v) = Self::plane_axes(f.axis);
        let (mut eu, mut ev) = (Vec3::zeros(), Vec3::zeros());
        eu[u] = s;
        ev[v] = s;
        [lo, lo + eu, lo + eu + ev, lo + ev]
    }

    /// The six faces of a cube.
    pub fn cube_faces(&self, cube: usize) -> [usize; 6] {
        let ijk = self.cube_ijk(cube);
        std::array::from_fn(|k| {
            let axis = k / 2;
            let mut c = ijk;
            c[axis] += k % 2;
            self.face_id(FaceIndex { axis, ijk: c })
        })
    }

    /// Cubes on either side of a face (one or two).
    pub fn face_cubes(&self, f: FaceIndex) -> Vec<usize> {
        let mut out = Vec::new();
        if f.ijk[f.axis] > 0 {
            let mut c = f.ijk;
            c[f.axis] -= 1;
            out.push(self.cube_id(c));
        }
        if f.ijk[f.axis] < self.dims[f.axis] {
            out.push(self.cube_id(f.ijk));
        }
        out
    }

    /// Edges are keyed by direction and lower endpoint.
    pub fn edge_id(&self, dir: usize, ijk: [usize; 3]) -> usize {
        let d = [self.dims[0] + 1, self.dims[1] + 1, self.dims[2] + 1];
        ((dir * d[2] + ijk[2]) * d[1] + ijk[1]) * d[0] + ijk[0]
    }

    /// The four edges of a face.
    pub fn face_edges(&self, f: FaceIndex) -> [usize; 4] {
        let (u, v) = Self::plane_axes(f.axis);
        let mut up = f.ijk;
        up[v] += 1;
        let mut right = f.ijk;
        right[u] += 1;
        [self.edge_id(u, f.ijk), self.edge_id(v, right), self.edge_id(u, up), self.edge_id(v, f.ijk)]
    }

    /// Cubes around an edge (up to four).
    pub fn edge_cubes(&self, dir: usize, ijk: [usize; 3]) -> Vec<usize> {
        let (u, v) = Self::plane_axes(dir);
        let mut out = Vec::new();
        for du in [0usize, 1] {
            for dv in [0usize, 1] {
                if ijk[u] < du || ijk[v] < dv || ijk[dir] >= self.dims[dir] {
                    continue;
                }
                let mut c = ijk;
                c[u] -= du;
                c[v] -= dv;
                if c[u] < self.dims[u] && c[v] < self.dims[v] {
                    out.push(self.cube_id(c));
                }
            }
        }
        out
    }

    pub fn edge_from_id(&self, id: usize) -> (usize, [usize; 3]) {
        let d = [self.dims[0] + 1, self.dims[1] + 1, self.dims[2] + 1];
        let per = d[0] * d[1] * d[2];
        let (dir, r) = (id / per, id % per);
        (dir, [r % d[0], (r / d[0]) % d[1], r / (d[0] * d[1])])
    }

    /// 26-neighborhood of a cube; `None` entries fall outside the box.
    pub fn neighbors(&self, cube: usize) -> Vec<Option<usize>> {
        let ijk = self.cube_ijk(cube);
        let mut out = Vec::with_capacity(26);
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if (dx, dy, dz) == (0, 0, 0) {
                        continue;
                    }
                    let c = [ijk[0] as i64 + dx, ijk[1] as i64 + dy, ijk[2] as i64 + dz];
                    let inside = (0..3).all(|a| c[a] >= 0 && (c[a] as usize) < self.dims[a]);
                    out.push(inside.then(|| self.cube_id(c.map(|x| x as usize))));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SafeRegion {
    pub margin: f64,
    /// Cubes whose corners are all at distance ≥ margin from Γ.
    pub v: BTreeSet<usize>,
    /// Cubes of `v` whose 26 neighbors all lie in `v`.
    pub v_prime: BTreeSet<usize>,
}

impl SafeRegion {
    /// A face may move when every cube touching it lies in `V′`.
    pub fn face_movable(&self, grid: &CubicalGrid, face: usize) -> bool {
        let f = grid.face_index(face).expect("valid face id");
        let cubes = grid.face_cubes(f);
        cubes.len() == 2 && cubes.iter().all(|c| self.v_prime.contains(c))
    }

    pub fn edge_movable(&self, grid: &CubicalGrid, edge: usize) -> bool {
        let (dir, ijk) = grid.edge_from_id(edge);
        let cubes = grid.edge_cubes(dir, ijk);
        cubes.len() == 4 && cubes.iter().all(|c| self.v_prime.contains(c))
    }
}

pub fn mark_safe_region(grid: &CubicalGrid, pieces: &[BoundaryPiece], margin: f64) -> Result<SafeRegion, GridError> {
    if !pieces.is_empty() && margin <= grid.diagonal() {
        return Err(GridError::MarginTooSmall { margin, diagonal: grid.diagonal() });
    }
    let v: BTreeSet<usize> = (0..grid.num_cubes())
        .into_par_iter()
        .filter(|&c| grid.cube_corners(c).iter().all(|p| pieces.iter().all(|g| g.distance(p) >= margin)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    let v_prime =
        v.iter().copied().filter(|&c| grid.neighbors(c).iter().all(|n| n.is_some_and(|n| v.contains(&n)))).collect();
    Ok(SafeRegion { margin, v, v_prime })
}

/// Union of whole grid faces plus edges that received 1-dimensional residue.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceSet {
    pub faces: BTreeSet<usize>,
    pub residue_edges: BTreeSet<usize>,
}

impl FaceSet {
    pub fn area(&self, grid: &CubicalGrid) -> f64 {
        self.faces.len() as f64 * grid.face_area()
    }

    /// Two triangles per face.
    pub fn triangles(&self, grid: &CubicalGrid) -> Vec<[Vec3; 3]> {
        self.faces
            .iter()
            .flat_map(|&f| {
                let c = grid.face_corners(grid.face_index(f).unwrap());
                [[c[0], c[1], c[2]], [c[0], c[2], c[3]]]
            })
            .collect()
    }
}

/// The set to project: convex planar polygons and polylines.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FfInput {
    #[serde(default)]
    pub polygons: Vec<Vec<Vec3>>,
    #[serde(default)]
    pub curves: Vec<Vec<Vec3>>,
}

impl FfInput {
    pub fn from_triangles(tris: &[[Vec3; 3]]) -> Self {
        FfInput { polygons: tris.iter().map(|t| t.to_vec()).collect(), curves: Vec::new() }
    }

    pub fn area(&self) -> f64 {
        self.polygons.iter().map(|p| polygon_area(p)).sum()
    }
}

pub fn polygon_area(p: &[Vec3]) -> f64 {
    if p.len() < 3 {
        return 0.0;
    }
    let mut n = Vec3::zeros();
    for i in 1..p.len() - 1 {
        n += (p[i] - p[0]).cross(&(p[i + 1] - p[0]));
    }
    0.5 * n.norm()
}

/// Sutherland–Hodgman clip keeping `normal · (x − point) ≥ −eps`.
fn clip_polygon(poly: &[Vec3], point: &Vec3, normal: &Vec3, eps: f64) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let (da, db) = (normal.dot(&(a - point)), normal.dot(&(b - point)));
        if da >= -eps {
            out.push(a);
        }
        if (da >= -eps) != (db >= -eps) {
            let t = da / (da - db);
            out.push(a + (b - a) * t);
        }
    }
    out
}

fn clip_segment(seg: [Vec3; 2], point: &Vec3, normal: &Vec3, eps: f64) -> Option<[Vec3; 2]> {
    let (da, db) = (normal.dot(&(seg[0] - point)), normal.dot(&(seg[1] - point)));
    match (da >= -eps, db >= -eps) {
        (true, true) => Some(seg),
        (false, false) => None,
        (true, false) => Some([seg[0], seg[0] + (seg[1] - seg[0]) * (da / (da - db))]),
        (false, true) => Some([seg[0] + (seg[1] - seg[0]) * (da / (da - db)), seg[1]]),
    }
}

/// Half-spaces of an axis-aligned box as (point, inward normal).
fn box_planes(lo: &Vec3, hi: &Vec3) -> Vec<(Vec3, Vec3)> {
    let mut planes = Vec::with_capacity(6);
    for a in 0..3 {
        let mut n = Vec3::zeros();
        n[a] = 1.0;
        planes.push((*lo, n));
        planes.push((*hi, -n));
    }
    planes
}

fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let d = b - a;
    let l2 = d.norm_squared();
    let t = if l2 > 0.0 { ((p - a).dot(&d) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (a + d * t - p).norm()
}

fn point_triangle_distance(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let n = (b - a).cross(&(c - a));
    let nn = n.norm_squared();
    if nn > 0.0 {
        let proj = p - n * ((p - a).dot(&n) / nn);
        let inside = [(a, b), (b, c), (c, a)].iter().all(|(u, v)| (*v - *u).cross(&(proj - *u)).dot(&n) >= 0.0);
        if inside {
            return (p - proj).norm();
        }
    }
    point_segment_distance(p, a, b).min(point_segment_distance(p, b, c)).min(point_segment_distance(p, c, a))
}

fn point_polygon_distance(p: &Vec3, poly: &[Vec3]) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => (p - poly[0]).norm(),
        2 => point_segment_distance(p, &poly[0], &poly[1]),
        _ => (1..poly.len() - 1).map(|i| point_triangle_distance(p, &poly[0], &poly[i], &poly[i + 1])).fold(f64::INFINITY, f64::min),
    }
}

/// Sobol points in the open unit cube, kept away from the walls.
fn candidates(dim: u32, seed: u32) -> Vec<[f64; 3]> {
    (0..CANDIDATES)
        .map(|i| std::array::from_fn(|d| if (d as u32) < dim { 0.05 + 0.9 * sobol_burley::sample(i, d as u32, seed) as f64 } else { 0.0 }))
        .collect()
}

/// Image of the input inside one cube after stage one, per face.
#[derive(Clone, Debug, Default)]
struct CubeImage {
    polygons: Vec<(usize, Vec<Vec3>)>,
    segments: Vec<(usize, [Vec3; 2])>,
}

/// Per-cell centers used by a projection run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageLog {
    /// Center `x_Q` per safe cube that met the input.
    pub cube_centers: BTreeMap<usize, Vec3>,
    /// Center `x_F` per face whose image was pushed to its edges; faces kept whole have no entry.
    pub face_centers: BTreeMap<usize, Vec3>,
    /// Faces kept whole because no candidate missed the image.
    pub full_faces: BTreeSet<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FfResult {
    pub faces: FaceSet,
    pub log: StageLog,
    /// Input polygons and curves outside the safe region, clipped to the unsafe cubes.
    pub untouched_polygons: Vec<Vec<Vec3>>,
    pub untouched_curves: Vec<[Vec3; 2]>,
    pub input_area: f64,
}

/// Pieces of the input inside each cube.
fn distribute(grid: &CubicalGrid, input: &FfInput) -> (BTreeMap<usize, Vec<Vec<Vec3>>>, BTreeMap<usize, Vec<[Vec3; 2]>>) {
    let eps = 1e-12 * grid.side();
    let s = grid.side();
    let cell_range = |lo: f64, hi: f64, a: usize| {
        let i0 = ((lo - grid.origin[a]) / s).floor().max(0.0) as usize;
        let i1 = (((hi - grid.origin[a]) / s).ceil().max(0.0) as usize).min(grid.dims[a]);
        i0..i1.max(i0)
    };
    let mut polys: BTreeMap<usize, Vec<Vec<Vec3>>> = BTreeMap::new();
    let mut segs: BTreeMap<usize, Vec<[Vec3; 2]>> = BTreeMap::new();
    let cubes_near = |pts: &[Vec3]| {
        let lo = pts.iter().fold(Vec3::repeat(f64::INFINITY), |m, p| m.inf(p));
        let hi = pts.iter().fold(Vec3::repeat(f64::NEG_INFINITY), |m, p| m.sup(p));
        let mut out = Vec::new();
        for k in cell_range(lo.z - eps, hi.z + eps, 2) {
            for j in cell_range(lo.y - eps, hi.y + eps, 1) {
                for i in cell_range(lo.x - eps, hi.x + eps, 0) {
                    out.push(grid.cube_id([i, j, k]));
                }
            }
        }
        out
    };
    for poly in &input.polygons {
        for c in cubes_near(poly) {
            let lo = grid.cube_min(grid.cube_ijk(c));
            let hi = lo + Vec3::repeat(s);
            let mut p = poly.clone();
            for (pt, n) in box_planes(&lo, &hi) {
                p = clip_polygon(&p, &pt, &n, eps);
                if p.is_empty() {
                    break;
                }
            }
            if p.len() >= 3 {
                polys.entry(c).or_default().push(p);
            }
        }
    }
    for curve in &input.curves {
        for w in curve.windows(2) {
            for c in cubes_near(w) {
                let lo = grid.cube_min(grid.cube_ijk(c));
                let hi = lo + Vec3::repeat(s);
                let mut seg = Some([w[0], w[1]]);
                for (pt, n) in box_planes(&lo, &hi) {
                    seg = seg.and_then(|sg| clip_segment(sg, &pt, &n, eps));
                }
                if let Some(sg) = seg {
                    segs.entry(c).or_default().push(sg);
                }
            }
        }
    }
    (polys, segs)
}

fn cube_center_choice(
    grid: &CubicalGrid,
    cube: usize,
    polys: &[Vec<Vec3>],
    segs: &[[Vec3; 2]],
    seed: u32,
) -> Result<Vec3, GridError> {
    let lo = grid.cube_min(grid.cube_ijk(cube));
    let s = grid.side();
    let mut best: Option<(f64, Vec3)> = None;
    for c in candidates(3, seed) {
        let x = lo + Vec3::new(c[0], c[1], c[2]) * s;
        let d = polys
            .iter()
            .map(|p| point_polygon_distance(&x, p))
            .chain(segs.iter().map(|g| point_segment_distance(&x, &g[0], &g[1])))
            .fold(f64::INFINITY, f64::min);
        if best.is_none_or(|b| d > b.0) {
            best = Some((d, x));
        }
    }
    match best {
        Some((d, x)) if d > 1e-9 * s => Ok(x),
        _ => Err(GridError::NoCenter { kind: "cube", id: cube }),
    }
}

/// Radial projection from `x` of the cube's contents onto its faces.
fn project_cube(grid: &CubicalGrid, cube: usize, x: &Vec3, polys: &[Vec<Vec3>], segs: &[[Vec3; 2]]) -> CubeImage {
    let eps = 1e-12 * grid.side();
    let mut image = CubeImage::default();
    for face in grid.cube_faces(cube) {
        let f = grid.face_index(face).unwrap();
        let corners = grid.face_corners(f);
        let center = corners.iter().sum::<Vec3>() / 4.0;
        let walls: Vec<(Vec3, Vec3)> = (0..4)
            .map(|k| {
                let (a, b) = (corners[k], corners[(k + 1) % 4]);
                let mut n = (a - x).cross(&(b - x));
                if n.dot(&(center - x)) < 0.0 {
                    n = -n;
                }
                (*x, n.normalize())
            })
            .collect();
        let plane = corners[0][f.axis];
        let onto = |p: &Vec3| {
            let t = (plane - x[f.axis]) / (p[f.axis] - x[f.axis]);
            let mut q = x + (p - x) * t;
            q[f.axis] = plane;
            q
        };
        for poly in polys {
            let mut p = poly.clone();
            for (pt, n) in &walls {
                p = clip_polygon(&p, pt, n, eps);
                if p.is_empty() {
                    break;
                }
            }
            if p.len() >= 3 {
                let q: Vec<Vec3> = p.iter().map(onto).collect();
                if polygon_area(&q) > 1e-14 * grid.face_area() {
                    image.polygons.push((face, q));
                }
            }
        }
        for seg in segs {
            let mut sg = Some(*seg);
            for (pt, n) in &walls {
                sg = sg.and_then(|g| clip_segment(g, pt, n, eps));
            }
            if let Some(g) = sg {
                image.segments.push((face, [onto(&g[0]), onto(&g[1])]));
            }
        }
    }
    image
}

/// 2D coordinates of a point on a face, in units of the side.
fn face_coords(grid: &CubicalGrid, f: FaceIndex, p: &Vec3) -> [f64; 2] {
    let lo = grid.cube_min(f.ijk);
    let (u, v) = CubicalGrid::plane_axes(f.axis);
    [(p[u] - lo[u]) / grid.side(), (p[v] - lo[v]) / grid.side()]
}

fn in_convex_2d(q: &[f64; 2], poly: &[[f64; 2]]) -> bool {
    let n = poly.len();
    let mut sign = 0.0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let c = (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]);
        if c.abs() < 1e-12 {
            continue;
        }
        if sign == 0.0 {
            sign = c.signum();
        } else if c.signum() != sign {
            return false;
        }
    }
    true
}

fn dist_2d_segment(q: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    let t = if l2 > 0.0 { (((q[0] - a[0]) * d[0] + (q[1] - a[1]) * d[1]) / l2).clamp(0.0, 1.0) } else { 0.0 };
    ((a[0] + t * d[0] - q[0]).powi(2) + (a[1] + t * d[1] - q[1]).powi(2)).sqrt()
}

/// Chooses `x_F`, or `None` when every candidate lies in the image.
fn face_center_choice(polys: &[Vec<[f64; 2]>], segs: &[[[f64; 2]; 2]], seed: u32) -> Option<[f64; 2]> {
    let mut best: Option<(f64, [f64; 2])> = None;
    for c in candidates(2, seed) {
        let q = [c[0], c[1]];
        if polys.iter().any(|p| in_convex_2d(&q, p)) {
            continue;
        }
        let d = polys
            .iter()
            .flat_map(|p| (0..p.len()).map(move |i| dist_2d_segment(&q, &p[i], &p[(i + 1) % p.len()])))
            .chain(segs.iter().map(|s| dist_2d_segment(&q, &s[0], &s[1])))
            .fold(f64::INFINITY, f64::min);
        if best.is_none_or(|b| d > b.0) {
            best = Some((d, q));
        }
    }
    best.map(|b| b.1)
}

/// Edges of the unit square hit when pushing `p` radially from `x`.
fn boundary_edge(x: &[f64; 2], p: &[f64; 2]) -> usize {
    let d = [p[0] - x[0], p[1] - x[1]];
    let mut best = (f64::INFINITY, 0);
    // edge order matches `face_edges`: v=0, u=1, v=1, u=0
    for (k, (axis, target)) in [(1, 0.0), (0, 1.0), (1, 1.0), (0, 0.0)].into_iter().enumerate() {
        if d[axis] != 0.0 {
            let t = (target - x[axis]) / d[axis];
            if t > 0.0 && t < best.0 {
                best = (t, k);
            }
        }
    }
    best.1
}

fn seed_for(id: usize, salt: u32) -> u32 {
    (id as u32).wrapping_mul(0x9E37_79B9) ^ salt
}

/// Two-stage projection onto the 2-skeleton of the safe region.
///
/// With `replay`, the logged centers are reused instead of searched for, and
/// the result must agree bit for bit with the logged run.
pub fn ff_project(
    input: &FfInput,
    grid: &CubicalGrid,
    region: &SafeRegion,
    seed: u64,
    replay: Option<&StageLog>,
) -> Result<FfResult, GridError> {
    let salt = (seed ^ (seed >> 32)) as u32;
    let (polys, segs) = distribute(grid, input);
    let touched: BTreeSet<usize> = polys.keys().chain(segs.keys()).copied().collect();
    let empty_p: Vec<Vec<Vec3>> = Vec::new();
    let empty_s: Vec<[Vec3; 2]> = Vec::new();
    let safe: Vec<usize> = touched.iter().copied().filter(|c| region.v.contains(c)).collect();
    let stage1: Vec<(usize, Vec3, CubeImage)> = safe
        .par_iter()
        .map(|&c| {
            let p = polys.get(&c).unwrap_or(&empty_p);
            let s = segs.get(&c).unwrap_or(&empty_s);
            let x = match replay {
                Some(log) => *log
                    .cube_centers
                    .get(&c)
                    .ok_or_else(|| GridError::ReplayMismatch(format!("no center for cube {c}")))?,
                None => cube_center_choice(grid, c, p, s, seed_for(c, 0x5151 ^ salt))?,
            };
            Ok((c, x, project_cube(grid, c, &x, p, s)))
        })
        .collect::<Result<_, GridError>>()?;
    let mut log = StageLog::default();
    let mut on_face: BTreeMap<usize, (Vec<Vec<[f64; 2]>>, Vec<[[f64; 2]; 2]>)> = BTreeMap::new();
    for (c, x, image) in &stage1 {
        log.cube_centers.insert(*c, *x);
        for (face, poly) in &image.polygons {
            let f = grid.face_index(*face).unwrap();
            on_face.entry(*face).or_default().0.push(poly.iter().map(|p| face_coords(grid, f, p)).collect());
        }
        for (face, seg) in &image.segments {
            let f = grid.face_index(*face).unwrap();
            on_face.entry(*face).or_default().1.push([face_coords(grid, f, &seg[0]), face_coords(grid, f, &seg[1])]);
        }
    }
    let stage2: Vec<(usize, Option<([f64; 2], Vec3)>, BTreeSet<usize>)> = on_face
        .par_iter()
        .map(|(&face, (ps, ss))| {
            let f = grid.face_index(face).unwrap();
            let choice = match replay {
                Some(log) => {
                    if log.full_faces.contains(&face) {
                        None
                    } else {
                        let x = log
                            .face_centers
                            .get(&face)
                            .ok_or_else(|| GridError::ReplayMismatch(format!("no center for face {face}")))?;
                        Some((face_coords(grid, f, x), *x))
                    }
                }
                None => face_center_choice(ps, ss, seed_for(face, 0xA5A5 ^ salt)).map(|x| {
                    let (u, v) = CubicalGrid::plane_axes(f.axis);
                    let mut p = grid.cube_min(f.ijk);
                    p[u] += x[0] * grid.side();
                    p[v] += x[1] * grid.side();
                    (x, p)
                }),
            };
            let mut edges = BTreeSet::new();
            if let Some((x, _)) = choice {
                let local = grid.face_edges(f);
                for p in ps {
                    for i in 0..p.len() {
                        let (a, b) = (p[i], p[(i + 1) % p.len()]);
                        for k in 0..=4 {
                            let t = k as f64 / 4.0;
                            let q = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                            edges.insert(local[boundary_edge(&x, &q)]);
                        }
                    }
                }
                for s in ss {
                    for q in s {
                        edges.insert(local[boundary_edge(&x, q)]);
                    }
                }
            }
            Ok((face, choice, edges))
        })
        .collect::<Result<_, GridError>>()?;
    let mut faces = FaceSet::default();
    for (face, choice, edges) in stage2 {
        match choice {
            None => {
                faces.faces.insert(face);
                log.full_faces.insert(face);
            }
            Some((_, p)) => {
                log.face_centers.insert(face, p);
                faces.residue_edges.extend(edges);
            }
        }
    }
    if let Some(old) = replay {
        if old != &log {
            return Err(GridError::ReplayMismatch("replayed centers differ from the log".into()));
        }
    }
    let mut untouched_polygons = Vec::new();
    let mut untouched_curves = Vec::new();
    for c in touched.iter().filter(|c| !region.v.contains(c)) {
        untouched_polygons.extend(polys.get(c).cloned().unwrap_or_default());
        untouched_curves.extend(segs.get(c).cloned().unwrap_or_default());
    }
    Ok(FfResult { faces, log, untouched_polygons, untouched_curves, input_area: input.area() })
}

/// Elementary area-decreasing moves on face sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Move {
    /// Remove a face together with an edge no other retained face uses.
    Collapse { face: usize, edge: usize },
    /// Push a cube carrying `k ≥ 4` faces across itself, leaving the other `6 − k`.
    Flip { cube: usize },
}

/// Moves available from `faces` that stay inside `V′`.
pub fn available_moves(grid: &CubicalGrid, region: &SafeRegion, faces: &BTreeSet<usize>) -> Vec<Move> {
    let mut edge_use: BTreeMap<usize, usize> = BTreeMap::new();
    for &f in faces {
        for e in grid.face_edges(grid.face_index(f).unwrap()) {
            *edge_use.entry(e).or_default() += 1;
        }
    }
    let mut moves = Vec::new();
    for &f in faces {
        if !region.face_movable(grid, f) {
            continue;
        }
        for e in grid.face_edges(grid.face_index(f).unwrap()) {
            if edge_use[&e] == 1 && region.edge_movable(grid, e) {
                moves.push(Move::Collapse { face: f, edge: e });
                break;
            }
        }
    }
    for &cube in &region.v_prime {
        let cf = grid.cube_faces(cube);
        let k = cf.iter().filter(|f| faces.contains(f)).count();
        if k >= 4 && cf.iter().all(|&f| region.face_movable(grid, f)) {
            moves.push(Move::Flip { cube });
        }
    }
    moves
}

pub fn apply_move(grid: &CubicalGrid, faces: &BTreeSet<usize>, m: &Move) -> BTreeSet<usize> {
    let mut out = faces.clone();
    match m {
        Move::Collapse { face, .. } => {
            out.remove(face);
        }
        Move::Flip { cube } => {
            for f in grid.cube_faces(*cube) {
                if !out.remove(&f) {
                    out.insert(f);
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizeCertificate {
    /// True when every reachable face set was examined.
    pub certified: bool,
    pub movable_faces: usize,
    pub states_explored: usize,
    pub moves: Vec<Move>,
    pub note: &'static str,
}

const MIN_NOTE: &str = "deformations are modeled by free-face collapses and cube flips inside V'; \
the minimum is an upper bound for the minimum over all deformations";

/// Smallest face set reachable by collapses and flips inside `V′`.
pub fn discrete_minimize(
    grid: &CubicalGrid,
    faces: &FaceSet,
    region: &SafeRegion,
    seed: u64,
) -> (FaceSet, MinimizeCertificate) {
    let movable = faces.faces.iter().filter(|&&f| region.face_movable(grid, f)).count();
    // moves never touch faces outside V′, so those are a lower bound
    let floor = faces.faces.len() - movable;
    let (greedy, greedy_path) = greedy_with_restarts(grid, region, &faces.faces, seed, 16);
    let finish = |best: BTreeSet<usize>, moves: Vec<Move>, certified: bool, explored: usize| {
        let out = FaceSet { faces: best, residue_edges: faces.residue_edges.clone() };
        (out, MinimizeCertificate { certified, movable_faces: movable, states_explored: explored, moves, note: MIN_NOTE })
    };
    if greedy.len() == floor {
        return finish(greedy, greedy_path, true, 0);
    }
    if movable <= EXHAUSTIVE_FACE_LIMIT {
        if let Some((best, path, explored)) = exhaustive(grid, region, &faces.faces, 500_000) {
            return finish(best, path, true, explored);
        }
    }
    finish(greedy, greedy_path, false, 0)
}

/// Depth-first search over all reachable states; `None` past the budget.
fn exhaustive(
    grid: &CubicalGrid,
    region: &SafeRegion,
    start: &BTreeSet<usize>,
    budget: usize,
) -> Option<(BTreeSet<usize>, Vec<Move>, usize)> {
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut best = (start.len(), start.clone(), Vec::new());
    let mut stack = vec![(start.clone(), Vec::<Move>::new())];
    seen.insert(start.iter().copied().collect());
    while let Some((s, path)) = stack.pop() {
        if s.len() < best.0 || (s.len() == best.0 && s < best.1) {
            best = (s.len(), s.clone(), path.clone());
        }
        for m in available_moves(grid, region, &s) {
            let next = apply_move(grid, &s, &m);
            if seen.insert(next.iter().copied().collect()) {
                if seen.len() > budget {
                    return None;
                }
                let mut p = path.clone();
                p.push(m);
                stack.push((next, p));
            }
        }
    }
    Some((best.1, best.2, seen.len()))
}

fn greedy_with_restarts(
    grid: &CubicalGrid,
    region: &SafeRegion,
    start: &BTreeSet<usize>,
    seed: u64,
    restarts: usize,
) -> (BTreeSet<usize>, Vec<Move>) {
    let mut best: Option<(BTreeSet<usize>, Vec<Move>)> = None;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let mut s = start.clone();
        let mut path = Vec::new();
        loop {
            let mut moves = available_moves(grid, region, &s);
            if moves.is_empty() {
                break;
            }
            if r == 0 {
                let gain = |m: &Move| match m {
                    Move::Collapse { .. } => 1,
                    Move::Flip { cube } => {
                        let k = grid.cube_faces(*cube).iter().filter(|f| s.contains(f)).count();
                        2 * k - 6
                    }
                };
                moves.sort_by_key(|m| std::cmp::Reverse(gain(m)));
            } else {
                moves.shuffle(&mut rng);
            }
            s = apply_move(grid, &s, &moves[0]);
            path.push(moves.swap_remove(0));
        }
        if best.as_ref().is_none_or(|b| s.len() < b.0.len() || (s.len() == b.0.len() && s < b.0)) {
            best = Some((s, path));
        }
    }
    best.unwrap()
}
