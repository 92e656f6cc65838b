//! Independent oracles shared by the integration tests. None of these call
//! the solver under test; they only borrow the data structures.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::f64::consts::PI;

use num_traits::ToPrimitive;
use plateau_core::chain_solver::Objective;
use plateau_core::complex::{Chain, Ring, SimplicialComplex, Subcomplex};
use plateau_core::configurations::{t_cone, two_circles, y_cone, TwoCircleLayout, TwoCircleParts};
use plateau_core::grid::{CubicalGrid, FfInput, SafeRegion};
use plateau_core::sliding::SlidingMesh;
use plateau_core::Vec3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Area of the catenary surface `ρ = a cosh(u/a)` for `u ∈ [u1, u2]`.
fn catenoid_band(a: f64, u1: f64, u2: f64) -> f64 {
    PI * a * ((u2 - u1) + 0.5 * a * ((2.0 * u2 / a).sinh() - (2.0 * u1 / a).sinh()))
}

/// Stable catenoid spanning circles of radius `r` at `z = ±h`: (area, neck radius).
pub fn catenoid(r: f64, h: f64) -> Option<(f64, f64)> {
    // r = a cosh(h/a); a cosh(h/a) is smallest where (h/a) tanh(h/a) = 1
    let x_star = bisect(0.5, 2.0, |x| x * x.tanh() - 1.0);
    let a_star = h / x_star;
    if a_star * x_star.cosh() > r {
        return None;
    }
    let a = bisect(a_star, r, |a| a * (h / a).cosh() - r);
    Some((catenoid_band(a, -h, h), a))
}

/// Y-film: central disk of radius `ρ` plus two catenoid bands leaving the
/// junction at 60° to the disk plane. Returns (area, neck radius).
pub fn y_film(r: f64, h: f64) -> Option<(f64, f64)> {
    // band ρ(z) = a cosh((z − z0)/a) with dρ/dz = 1/√3 at z = 0
    let s0 = (1.0 / 3f64.sqrt()).asinh();
    let f = |a: f64| a * (h / a + s0).cosh() - r;
    let a_hi = r / s0.cosh();
    // minimum of f on (0, a_hi) by golden section
    let (mut lo, mut hi) = (1e-9 * r, a_hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let (m1, m2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let a_min = 0.5 * (lo + hi);
    if f(a_min) > 0.0 {
        return None;
    }
    let a = bisect(a_min, a_hi, f);
    let rho = a * s0.cosh();
    let z0 = -a * s0;
    let band = catenoid_band(a, -z0, h - z0);
    Some((PI * rho * rho + 2.0 * band, rho))
}

/// Pairwise dihedral angles (degrees) along every edge carrying three triangles.
pub fn triple_junction_angles(mesh: &SlidingMesh) -> Vec<f64> {
    let mut faces_of: std::collections::BTreeMap<(usize, usize), Vec<usize>> = Default::default();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            faces_of.entry((a.min(b), a.max(b))).or_default().push(t);
        }
    }
    let mut out = Vec::new();
    for ((p, q), faces) in faces_of {
        if faces.len() != 3 {
            continue;
        }
        let (a, b) = (mesh.vertices[p], mesh.vertices[q]);
        let axis = (b - a).normalize();
        let e1 = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let u = (e1 - axis * e1.dot(&axis)).normalize();
        let w = axis.cross(&u);
        let mut phis: Vec<f64> = faces
            .iter()
            .map(|&t| {
                let r = mesh.triangles[t].iter().copied().find(|&v| v != p && v != q).unwrap();
                let d = mesh.vertices[r] - a;
                d.dot(&w).atan2(d.dot(&u))
            })
            .collect();
        phis.sort_by(f64::total_cmp);
        let gaps = [phis[1] - phis[0], phis[2] - phis[1], 2.0 * PI - (phis[2] - phis[0])];
        out.extend(gaps.iter().map(|g| g.to_degrees()));
    }
    out
}

/// Minimum objective over all integer 2-chains with coefficients in `[-m, m]`
/// and boundary equal to `target`, by depth-first enumeration that checks each
/// edge once all of its triangles are assigned.
pub fn brute_force_chain(complex: &SimplicialComplex, target: &Chain, objective: Objective, m: i64) -> Option<f64> {
    let n = complex.num_cells(2);
    let ne = complex.num_cells(1);
    let facets: Vec<Vec<(usize, i64)>> =
        (0..n).map(|t| complex.facets(2, t).into_iter().map(|(e, s)| (e, s as i64)).collect()).collect();
    let mut want = vec![0i64; ne];
    for (e, c) in target.terms() {
        want[e] = c.to_i64().unwrap();
    }
    let mut last = vec![usize::MAX; ne];
    for (t, f) in facets.iter().enumerate() {
        for &(e, _) in f {
            last[e] = t;
        }
    }
    if (0..ne).any(|e| last[e] == usize::MAX && want[e] != 0) {
        return None;
    }
    let mut closes = vec![Vec::new(); n];
    for e in 0..ne {
        if last[e] != usize::MAX {
            closes[last[e]].push(e);
        }
    }
    let areas: Vec<f64> = (0..n)
        .map(|t| {
            let v: Vec<Vec3> = complex.cells(2)[t].iter().map(|&i| complex.vertices()[i]).collect();
            0.5 * (v[1] - v[0]).cross(&(v[2] - v[0])).norm()
        })
        .collect();
    struct Search<'a> {
        facets: &'a [Vec<(usize, i64)>],
        closes: &'a [Vec<usize>],
        want: &'a [i64],
        areas: &'a [f64],
        objective: Objective,
        m: i64,
        acc: Vec<i64>,
        best: Option<f64>,
    }
    fn go(s: &mut Search, t: usize, cost: f64) {
        if s.best.is_some_and(|b| cost > b * (1.0 + 1e-12)) {
            return;
        }
        if t == s.facets.len() {
            if s.best.map_or(true, |b| cost < b) {
                s.best = Some(cost);
            }
            return;
        }
        for x in -s.m..=s.m {
            for &(e, sg) in &s.facets[t] {
                s.acc[e] += sg * x;
            }
            if s.closes[t].iter().all(|&e| s.acc[e] == s.want[e]) {
                let c = match s.objective {
                    Objective::Mass => x.abs() as f64 * s.areas[t],
                    Objective::Size => (x != 0) as u8 as f64 * s.areas[t],
                };
                go(s, t + 1, cost + c);
            }
            for &(e, sg) in &s.facets[t] {
                s.acc[e] -= sg * x;
            }
        }
    }
    let mut s = Search {
        facets: &facets,
        closes: &closes,
        want: &want,
        areas: &areas,
        objective,
        m,
        acc: vec![0; ne],
        best: None,
    };
    go(&mut s, 0, 0.0);
    s.best
}

/// Smallest face count reachable by free-face collapses and cube flips that
/// stay inside `V′`, by breadth-first search over all reachable face sets.
pub fn grid_min_bfs(grid: &CubicalGrid, region: &SafeRegion, start: &BTreeSet<usize>) -> usize {
    let in_vp = |cubes: &[usize], need: usize| cubes.len() == need && cubes.iter().all(|c| region.v_prime.contains(c));
    let face_ok = |f: usize| in_vp(&grid.face_cubes(grid.face_index(f).unwrap()), 2);
    let edge_ok = |e: usize| {
        let (dir, ijk) = grid.edge_from_id(e);
        in_vp(&grid.edge_cubes(dir, ijk), 4)
    };
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut queue = VecDeque::new();
    let key = |s: &BTreeSet<usize>| s.iter().copied().collect::<Vec<_>>();
    seen.insert(key(start));
    queue.push_back(start.clone());
    let mut best = start.len();
    while let Some(s) = queue.pop_front() {
        best = best.min(s.len());
        let mut next = Vec::new();
        for &f in &s {
            if !face_ok(f) {
                continue;
            }
            let free = grid.face_edges(grid.face_index(f).unwrap()).into_iter().any(|e| {
                edge_ok(e)
                    && s.iter().filter(|&&g| g != f).all(|&g| !grid.face_edges(grid.face_index(g).unwrap()).contains(&e))
            });
            if free {
                let mut t = s.clone();
                t.remove(&f);
                next.push(t);
            }
        }
        for &c in &region.v_prime {
            let cf = grid.cube_faces(c);
            if cf.iter().filter(|f| s.contains(f)).count() >= 4 && cf.iter().all(|&f| face_ok(f)) {
                let mut t = s.clone();
                for f in cf {
                    if !t.remove(&f) {
                        t.insert(f);
                    }
                }
                next.push(t);
            }
        }
        for t in next {
            if seen.insert(key(&t)) {
                queue.push_back(t);
            }
        }
    }
    best
}

/// Central finite-difference gradient of `f` at every vertex coordinate.
pub fn fd_gradient(vertices: &[Vec3], f: impl Fn(&[Vec3]) -> f64, eps: f64) -> Vec<Vec3> {
    let mut v = vertices.to_vec();
    let mut out = vec![Vec3::zeros(); v.len()];
    for i in 0..v.len() {
        for k in 0..3 {
            let x = v[i][k];
            v[i][k] = x + eps;
            let fp = f(&v);
            v[i][k] = x - eps;
            let fm = f(&v);
            v[i][k] = x;
            out[i][k] = (fp - fm) / (2.0 * eps);
        }
    }
    out
}

/// Concentric-ring fan with jittered vertices.
pub fn random_mesh(rng: &mut ChaCha8Rng) -> SlidingMesh {
    let n = rng.gen_range(5..12);
    let rings = rng.gen_range(1..4);
    let mut vertices = vec![Vec3::new(0.0, 0.0, rng.gen_range(-0.3..0.3))];
    for k in 1..=rings {
        for j in 0..n {
            let th = std::f64::consts::TAU * j as f64 / n as f64 + rng.gen_range(-0.2..0.2);
            let r = k as f64 / rings as f64 * rng.gen_range(0.8..1.2);
            vertices.push(Vec3::new(r * th.cos(), r * th.sin(), rng.gen_range(-0.3..0.3)));
        }
    }
    let id = |k: usize, j: usize| if k == 0 { 0 } else { 1 + (k - 1) * n + j % n };
    let mut triangles = Vec::new();
    for j in 0..n {
        triangles.push([0, id(1, j), id(1, j + 1)]);
    }
    for k in 1..rings {
        for j in 0..n {
            triangles.push([id(k, j), id(k + 1, j), id(k + 1, j + 1)]);
            triangles.push([id(k, j), id(k + 1, j + 1), id(k, j + 1)]);
        }
    }
    SlidingMesh::new(vertices, triangles)
}

/// Two-circle, Y-cone and T-cone fixtures with at most 20 triangles.
pub fn small_fixtures() -> Vec<(&'static str, SimplicialComplex, Chain, Option<Subcomplex>)> {
    let mut out = Vec::new();
    let layout = TwoCircleLayout::new(1.0, 0.2, 3);
    for (name, parts) in [
        ("disks+cylinder", TwoCircleParts { disks: true, cylinder: true, y_film: false }),
        ("y-film", TwoCircleParts::Y_FILM),
        ("disks", TwoCircleParts::DISKS),
    ] {
        let lc = two_circles(&layout, parts).unwrap();
        assert!(lc.complex.num_cells(2) <= 20, "{name} too large");
        for (tag, s) in [("sum", (1, 1)), ("difference", (1, -1))] {
            let b = lc.combination(&[("gamma1", s.0), ("gamma2", s.1)]).unwrap();
            out.push((if tag == "sum" { name } else { "difference" }, lc.complex.clone(), b, None));
        }
        let b2 = lc.combination(&[("gamma1", 2), ("gamma2", 0)]).unwrap();
        out.push(("doubled", lc.complex.clone(), b2, None));
    }
    let lc = y_cone(3).unwrap();
    let s = lc.combination(&[("S1", 1), ("S2", 1), ("S3", -2)]).unwrap();
    out.push(("y-cone", lc.complex.clone(), s, None));
    let s = lc.combination(&[("S1", 1), ("S2", -1)]).unwrap();
    out.push(("y-cone pair", lc.complex.clone(), s, None));
    let lc = t_cone().unwrap();
    out.push(("t-cone zero", lc.complex.clone(), Chain::zero(1, Ring::Integers), None));
    out
}

pub fn tilted_square(side: f64) -> FfInput {
    let (z0, tilt) = (0.3 * side, 0.08 * side);
    FfInput {
        polygons: vec![vec![
            Vec3::new(0.0, 0.0, z0),
            Vec3::new(1.0, 0.0, z0 + tilt),
            Vec3::new(1.0, 1.0, z0 + tilt),
            Vec3::new(0.0, 1.0, z0),
        ]],
        curves: Vec::new(),
    }
}

pub fn square_grid() -> CubicalGrid {
    CubicalGrid::covering(Vec3::new(-0.5, -0.5, -0.5), Vec3::new(1.5, 1.5, 0.5), 3).unwrap()
}
