//! Area descent on non-manifold triangle meshes with sliding boundary
//! conditions, and a randomized local minimality probe.
//!
//! A vertex labeled with piece `j` must stay on `Γ_j`: its gradient is
//! projected on the tangent space of the piece, and after every step it is
//! snapped back with the closest-point map.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::{BoundaryPiece, PieceError};
use crate::Vec3;

/// Labeled vertices must lie this close to their piece.
pub const CONSTRAINT_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("triangle {0} references a missing vertex")]
    BadIndex(usize),
    #[error("triangle {0} repeats a vertex")]
    RepeatedVertex(usize),
    #[error("triangle {triangle} has zero area{}", match iteration { Some(i) => format!(" at iteration {i}"), None => String::new() })]
    Degenerate { triangle: usize, iteration: Option<usize> },
    #[error("vertex {vertex} is labeled with missing piece {piece}")]
    BadLabel { vertex: usize, piece: usize },
    #[error("vertex {vertex} is {distance:e} away from piece {piece}")]
    OffConstraint { vertex: usize, piece: usize, distance: f64 },
    #[error("non-finite coordinate at vertex {0}")]
    NotFinite(usize),
    #[error("labels and vertices differ in length")]
    LabelCount,
    #[error("piece {index}: {source}")]
    Piece { index: usize, source: PieceError },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlidingMesh {
    pub vertices: Vec<Vec3>,
    /// `Some(j)` ties the vertex to `pieces[j]`.
    pub labels: Vec<Option<usize>>,
    pub triangles: Vec<[usize; 3]>,
    pub pieces: Vec<BoundaryPiece>,
}

pub fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Sorted vertex pair.
pub fn edge_key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl SlidingMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Self {
        let labels = vec![None; vertices.len()];
        SlidingMesh { vertices, labels, triangles, pieces: Vec::new() }
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if self.labels.len() != self.vertices.len() {
            return Err(MeshError::LabelCount);
        }
        for (index, p) in self.pieces.iter().enumerate() {
            p.validate().map_err(|source| MeshError::Piece { index, source })?;
        }
        for (v, p) in self.vertices.iter().enumerate() {
            if !p.iter().all(|x| x.is_finite()) {
                return Err(MeshError::NotFinite(v));
            }
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= self.vertices.len()) {
                return Err(MeshError::BadIndex(t));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedVertex(t));
            }
            if self.area_of(t) <= 0.0 {
                return Err(MeshError::Degenerate { triangle: t, iteration: None });
            }
        }
        self.check_constraints(CONSTRAINT_TOL)
    }

    pub fn check_constraints(&self, tol: f64) -> Result<(), MeshError> {
        for (v, label) in self.labels.iter().enumerate() {
            if let Some(j) = *label {
                let piece = self.pieces.get(j).ok_or(MeshError::BadLabel { vertex: v, piece: j })?;
                let distance = piece.residual(&self.vertices[v]);
                if !(distance < tol) {
                    return Err(MeshError::OffConstraint { vertex: v, piece: j, distance });
                }
            }
        }
        Ok(())
    }

    /// Largest distance of a labeled vertex from its piece.
    pub fn constraint_residual(&self) -> f64 {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(v, l)| l.map(|j| self.pieces[j].residual(&self.vertices[v])))
            .fold(0.0, f64::max)
    }

    pub fn area_of(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        triangle_area(&self.vertices[a], &self.vertices[b], &self.vertices[c])
    }

    /// Faces incident to each edge.
    pub fn edge_faces(&self) -> BTreeMap<[usize; 2], Vec<usize>> {
        let mut map: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                map.entry(edge_key(u, v)).or_default().push(t);
            }
        }
        map
    }

    /// Snaps every labeled vertex onto its piece.
    pub fn project_constraints(&mut self) {
        for (v, label) in self.labels.iter().enumerate() {
            if let Some(j) = *label {
                self.vertices[v] = self.pieces[j].closest_point(&self.vertices[v]);
            }
        }
    }

    pub fn label_all(&mut self, vertices: impl IntoIterator<Item = usize>, piece: usize) {
        for v in vertices {
            self.labels[v] = Some(piece);
        }
    }

    /// Vertices with positions differing between two meshes of equal shape.
    pub fn moved_vertices(&self, other: &SlidingMesh, tol: f64) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| (self.vertices[v] - other.vertices[v]).norm() > tol).collect()
    }
}

pub fn total_area(mesh: &SlidingMesh) -> f64 {
    let areas: Vec<f64> = (0..mesh.triangles.len()).into_par_iter().map(|t| mesh.area_of(t)).collect();
    areas.iter().sum()
}

/// Area gradient of one triangle with respect to its three vertices.
fn triangle_gradient(a: &Vec3, b: &Vec3, c: &Vec3) -> [Vec3; 3] {
    let n = (b - a).cross(&(c - a));
    let len = n.norm();
    if len == 0.0 {
        return [Vec3::zeros(); 3];
    }
    let n = n / len;
    [n.cross(&(c - b)) * 0.5, n.cross(&(a - c)) * 0.5, n.cross(&(b - a)) * 0.5]
}

/// Gradient of the total area, without constraint projection.
pub fn area_gradient_free(mesh: &SlidingMesh) -> Vec<Vec3> {
    let per: Vec<[Vec3; 3]> = mesh
        .triangles
        .par_iter()
        .map(|&[a, b, c]| triangle_gradient(&mesh.vertices[a], &mesh.vertices[b], &mesh.vertices[c]))
        .collect();
    let mut g = vec![Vec3::zeros(); mesh.vertices.len()];
    for (tri, gt) in mesh.triangles.iter().zip(&per) {
        for k in 0..3 {
            g[tri[k]] += gt[k];
        }
    }
    g
}

/// Area gradient with labeled vertices projected on the tangent space of their piece.
pub fn area_gradient(mesh: &SlidingMesh) -> Vec<Vec3> {
    let mut g = area_gradient_free(mesh);
    for (v, label) in mesh.labels.iter().enumerate() {
        if let Some(j) = *label {
            g[v] = mesh.pieces[j].project_tangent(&mesh.vertices[v], &g[v]);
        }
    }
    g
}

/// One third of the incident triangle areas.
fn vertex_areas(mesh: &SlidingMesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.vertices.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let a = mesh.area_of(t) / 3.0;
        for &v in tri {
            m[v] += a;
        }
    }
    m
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveOptions {
    /// Stop when the largest projected vertex gradient falls below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Collapse triangles whose area drops below this (0 disables surgery).
    pub surgery_area: f64,
    pub max_halvings: usize,
    /// Record the area after every accepted step.
    pub keep_history: bool,
    /// Let vertices on curve pieces move along the curve. Off by default:
    /// the discrete area drops when rim vertices bunch together (an inscribed
    /// polygon loses area), so free sliding collapses rim edges.
    pub slide_on_curves: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { tol: 1e-6, max_iters: 20_000, surgery_area: 0.0, max_halvings: 30, keep_history: true, slide_on_curves: false }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolveReport {
    pub initial_area: f64,
    pub final_area: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Why the loop ended: "gradient", "stalled" or "max_iters".
    pub stop_reason: String,
    pub final_gradient: f64,
    /// Largest constraint residual seen at any accepted iterate.
    pub max_constraint_residual: f64,
    pub collapsed_triangles: usize,
    pub area_history: Vec<f64>,
}

fn max_norm(g: &[Vec3]) -> f64 {
    g.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Projected gradient, with curve vertices held unless `slide_on_curves`.
fn descent_gradient(mesh: &SlidingMesh, opts: &EvolveOptions) -> Vec<Vec3> {
    let mut g = area_gradient(mesh);
    if !opts.slide_on_curves {
        for (v, label) in mesh.labels.iter().enumerate() {
            if label.is_some_and(|j| mesh.pieces[j].is_curve()) {
                g[v] = Vec3::zeros();
            }
        }
    }
    g
}

/// Area descent with backtracking; labeled vertices slide on their pieces.
///
/// The step direction is the projected gradient divided by the lumped vertex
/// area, a descent direction that is insensitive to local mesh size.
pub fn evolve(mesh: &mut SlidingMesh, opts: &EvolveOptions) -> Result<EvolveReport, MeshError> {
    evolve_with(mesh, opts, |_, _| {})
}

/// [`evolve`], calling `on_step(iteration, mesh)` after every accepted step.
pub fn evolve_with(
    mesh: &mut SlidingMesh,
    opts: &EvolveOptions,
    mut on_step: impl FnMut(usize, &SlidingMesh),
) -> Result<EvolveReport, MeshError> {
    mesh.validate()?;
    let initial_area = total_area(mesh);
    let mut area = initial_area;
    let mut history = if opts.keep_history { vec![area] } else { Vec::new() };
    let mut max_residual = mesh.constraint_residual();
    let mut tau = 0.05;
    let mut collapsed = 0;
    let mut iterations = 0;
    let mut stop = "max_iters";
    let mut grad_norm = f64::INFINITY;
    while iterations < opts.max_iters {
        let g = descent_gradient(mesh, opts);
        grad_norm = max_norm(&g);
        if grad_norm < opts.tol {
            stop = "gradient";
            break;
        }
        let m = vertex_areas(mesh);
        let dir: Vec<Vec3> = g.iter().zip(&m).map(|(g, &m)| if m > 0.0 { -g / m } else { Vec3::zeros() }).collect();
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let mut trial = mesh.clone();
            for (p, d) in trial.vertices.iter_mut().zip(&dir) {
                *p += d * tau;
            }
            trial.project_constraints();
            let a = total_area(&trial);
            if a < area {
                *mesh = trial;
                area = a;
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            stop = "stalled";
            break;
        }
        iterations += 1;
        tau *= 1.5;
        if opts.surgery_area > 0.0 {
            let n = collapse_small_triangles(mesh, opts.surgery_area);
            if n > 0 {
                collapsed += n;
                area = total_area(mesh);
            }
        }
        for (v, p) in mesh.vertices.iter().enumerate() {
            if !p.iter().all(|x| x.is_finite()) {
                return Err(MeshError::NotFinite(v));
            }
        }
        if let Some(t) = (0..mesh.triangles.len()).find(|&t| mesh.area_of(t) <= 0.0) {
            return Err(MeshError::Degenerate { triangle: t, iteration: Some(iterations) });
        }
        max_residual = max_residual.max(mesh.constraint_residual());
        if opts.keep_history {
            history.push(area);
        }
        on_step(iterations, mesh);
    }
    if stop == "max_iters" {
        grad_norm = max_norm(&descent_gradient(mesh, opts));
        if grad_norm < opts.tol {
            stop = "gradient";
        }
    }
    Ok(EvolveReport {
        initial_area,
        final_area: area,
        iterations,
        converged: stop == "gradient",
        stop_reason: stop.to_string(),
        final_gradient: grad_norm,
        max_constraint_residual: max_residual,
        collapsed_triangles: collapsed,
        area_history: history,
    })
}

/// Collapses the shortest edge of every triangle with area below
/// `threshold`, when its endpoints' labels allow it. Returns the number of
/// collapses.
pub fn collapse_small_triangles(mesh: &mut SlidingMesh, threshold: f64) -> usize {
    let mut count = 0;
    loop {
        let Some((t, (keep, gone))) = (0..mesh.triangles.len())
            .filter(|&t| mesh.area_of(t) < threshold)
            .find_map(|t| collapsible_edge(mesh, t).map(|e| (t, e)))
        else {
            return count;
        };
        let _ = t;
        if mesh.labels[keep].is_none() && mesh.labels[gone].is_none() {
            mesh.vertices[keep] = (mesh.vertices[keep] + mesh.vertices[gone]) * 0.5;
        }
        for tri in mesh.triangles.iter_mut() {
            for v in tri.iter_mut() {
                if *v == gone {
                    *v = keep;
                }
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        mesh.triangles.retain(|tri| {
            let mut s = *tri;
            s.sort();
            s[0] != s[1] && s[1] != s[2] && seen.insert(s)
        });
        remove_unused_vertices(mesh);
        count += 1;
    }
}

/// Shortest edge of triangle `t` that may be merged, as (kept, removed).
fn collapsible_edge(mesh: &SlidingMesh, t: usize) -> Option<(usize, usize)> {
    let [a, b, c] = mesh.triangles[t];
    let mut edges = [(a, b), (b, c), (c, a)];
    edges.sort_by(|x, y| {
        let lx = (mesh.vertices[x.0] - mesh.vertices[x.1]).norm();
        let ly = (mesh.vertices[y.0] - mesh.vertices[y.1]).norm();
        lx.total_cmp(&ly)
    });
    edges.into_iter().find_map(|(u, v)| match (mesh.labels[u], mesh.labels[v]) {
        (None, None) => Some((u.min(v), u.max(v))),
        (Some(_), None) => Some((u, v)),
        (None, Some(_)) => Some((v, u)),
        (Some(i), Some(j)) if i == j => Some((u.min(v), u.max(v))),
        _ => None,
    })
}

fn remove_unused_vertices(mesh: &mut SlidingMesh) {
    let mut used = vec![false; mesh.vertices.len()];
    for tri in &mesh.triangles {
        for &v in tri {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; used.len()];
    let mut next = 0;
    for v in 0..used.len() {
        if used[v] {
            remap[v] = next;
            mesh.vertices[next] = mesh.vertices[v];
            mesh.labels[next] = mesh.labels[v];
            next += 1;
        }
    }
    mesh.vertices.truncate(next);
    mesh.labels.truncate(next);
    for tri in mesh.triangles.iter_mut() {
        for v in tri.iter_mut() {
            *v = remap[*v];
        }
    }
}

/// Dihedral angles along the edges where exactly three faces meet.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SingularEdgeStats {
    pub triple_edges: usize,
    /// Three pairwise angles per triple edge, in degrees.
    pub angles: Vec<[f64; 3]>,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Counts in 10° bins from 0° to 180°.
    pub histogram: Vec<usize>,
}

pub fn singular_edge_stats(mesh: &SlidingMesh) -> SingularEdgeStats {
    let mut stats = SingularEdgeStats { histogram: vec![0; 18], ..Default::default() };
    let mut all = Vec::new();
    for ([p, q], faces) in mesh.edge_faces() {
        if faces.len() != 3 {
            continue;
        }
        let (a, b) = (mesh.vertices[p], mesh.vertices[q]);
        let t = (b - a).normalize();
        let wings: Vec<Vec3> = faces
            .iter()
            .map(|&f| {
                let r = mesh.triangles[f].iter().copied().find(|&v| v != p && v != q).unwrap();
                let w = mesh.vertices[r] - a;
                (w - t * w.dot(&t)).normalize()
            })
            .collect();
        let ang = |i: usize, j: usize| wings[i].dot(&wings[j]).clamp(-1.0, 1.0).acos().to_degrees();
        let triple = [ang(0, 1), ang(1, 2), ang(0, 2)];
        for &x in &triple {
            stats.histogram[((x / 10.0) as usize).min(17)] += 1;
            all.push(x);
        }
        stats.angles.push(triple);
    }
    stats.triple_edges = stats.angles.len();
    if !all.is_empty() {
        stats.mean = Some(all.iter().sum::<f64>() / all.len() as f64);
        stats.min = all.iter().copied().reduce(f64::min);
        stats.max = all.iter().copied().reduce(f64::max);
    }
    stats
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimalityProbe {
    pub center: Vec3,
    pub radius: f64,
    pub trials: usize,
    /// Gauge value `h(r)`; the allowed decrease is `r² h(r)` plus `tol`.
    #[serde(default)]
    pub gauge: f64,
    #[serde(default = "default_probe_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_probe_tol() -> f64 {
    1e-9
}

impl MinimalityProbe {
    pub fn new(center: Vec3, radius: f64, trials: usize) -> Self {
        MinimalityProbe { center, radius, trials, gauge: 0.0, tol: default_probe_tol(), seed: 0 }
    }

    pub fn threshold(&self) -> f64 {
        self.radius * self.radius * self.gauge + self.tol
    }
}

/// New positions for the vertices a trial moves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub trial: usize,
    pub moves: Vec<(usize, Vec3)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub passed: bool,
    pub trials: usize,
    pub threshold: f64,
    /// Area of the triangles touching moved vertices, before the worst trial.
    pub local_area: f64,
    /// Largest area decrease over all trials (negative when all trials increase area).
    pub worst_decrease: f64,
    pub worst: Option<Perturbation>,
    pub note: &'static str,
}

const PROBE_NOTE: &str = "randomized trials: a failure is definitive, a pass is statistical";

/// Area decrease of the triangles touched by a perturbation.
pub fn perturbation_decrease(mesh: &SlidingMesh, pert: &Perturbation) -> (f64, f64) {
    let moved: std::collections::BTreeSet<usize> = pert.moves.iter().map(|m| m.0).collect();
    let touched: Vec<usize> =
        (0..mesh.triangles.len()).filter(|&t| mesh.triangles[t].iter().any(|v| moved.contains(v))).collect();
    let before: f64 = touched.iter().map(|&t| mesh.area_of(t)).sum();
    let mut after_mesh = mesh.clone();
    apply_perturbation(&mut after_mesh, pert);
    let after: f64 = touched.iter().map(|&t| after_mesh.area_of(t)).sum();
    (before, before - after)
}

pub fn apply_perturbation(mesh: &mut SlidingMesh, pert: &Perturbation) {
    for &(v, p) in &pert.moves {
        mesh.vertices[v] = p;
    }
}

fn clamp_to_ball(p: Vec3, center: &Vec3, r: f64) -> Vec3 {
    let d = p - center;
    if d.norm() > r {
        center + d.normalize() * r
    } else {
        p
    }
}

/// Neighbors of each vertex through mesh edges.
fn adjacency(mesh: &SlidingMesh) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); mesh.vertices.len()];
    for [a, b] in mesh.edge_faces().into_keys() {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// One random piecewise-linear trial supported in the probe ball.
///
/// Trials cycle through three families: a smooth bump along a random
/// direction, independent random vertex kicks, and partial relaxation of each
/// vertex toward the mean of its neighbors.
fn sample_trial(mesh: &SlidingMesh, probe: &MinimalityProbe, adj: &[Vec<usize>], trial: usize) -> Perturbation {
    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    rng.set_stream(trial as u64);
    let r = probe.radius;
    let inside: Vec<usize> =
        (0..mesh.vertices.len()).filter(|&v| (mesh.vertices[v] - probe.center).norm() < r).collect();
    let amplitude = r * 10f64.powf(rng.gen_range(-4.0..-0.5));
    let dir = random_unit(&mut rng);
    let family = trial % 3;
    let relax = rng.gen_range(0.05..1.0);
    let mut moves = Vec::new();
    for &v in &inside {
        let p = mesh.vertices[v];
        let s = 1.0 - (p - probe.center).norm() / r;
        let target = match family {
            0 => p + dir * (amplitude * s),
            1 => p + random_unit(&mut rng) * (amplitude * rng.gen_range(0.0..1.0) * s),
            _ => {
                if adj[v].is_empty() {
                    p
                } else {
                    let mean = adj[v].iter().map(|&u| mesh.vertices[u]).sum::<Vec3>() / adj[v].len() as f64;
                    p + (mean - p) * (relax * s)
                }
            }
        };
        let mut q = clamp_to_ball(target, &probe.center, r);
        if let Some(j) = mesh.labels[v] {
            q = mesh.pieces[j].closest_point(&q);
            if (q - probe.center).norm() >= r {
                continue;
            }
        }
        if q != p {
            moves.push((v, q));
        }
    }
    Perturbation { trial, moves }
}

/// Randomized check that no sliding perturbation supported in the probe
/// ball lowers the local area by more than `r² h(r)`.
pub fn check_local_sliding_minimality(mesh: &SlidingMesh, probe: &MinimalityProbe) -> ProbeReport {
    let adj = adjacency(mesh);
    let results: Vec<(f64, f64, Perturbation)> = (0..probe.trials)
        .into_par_iter()
        .map(|trial| {
            let pert = sample_trial(mesh, probe, &adj, trial);
            let (before, dec) = perturbation_decrease(mesh, &pert);
            (before, dec, pert)
        })
        .collect();
    let mut worst: Option<&(f64, f64, Perturbation)> = None;
    for r in &results {
        if !r.2.moves.is_empty() && worst.is_none_or(|w| r.1 > w.1) {
            worst = Some(r);
        }
    }
    let threshold = probe.threshold();
    match worst {
        Some((before, dec, pert)) => ProbeReport {
            passed: *dec <= threshold,
            trials: probe.trials,
            threshold,
            local_area: *before,
            worst_decrease: *dec,
            worst: Some(pert.clone()),
            note: PROBE_NOTE,
        },
        None => ProbeReport {
            passed: true,
            trials: probe.trials,
            threshold,
            local_area: 0.0,
            worst_decrease: 0.0,
            worst: None,
            note: PROBE_NOTE,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> SlidingMesh {
        SlidingMesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::new(1.0, 1.0, 0.0), Vec3::y()],
            vec![[0, 1, 2], [0, 2, 3]],
        )
    }

    #[test]
    fn unit_square_area() {
        assert!((total_area(&square()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut m = square();
        m.vertices[2].z = 0.3;
        let g = area_gradient_free(&m);
        let eps = 1e-6;
        for v in 0..4 {
            for k in 0..3 {
                let mut p = m.clone();
                p.vertices[v][k] += eps;
                let mut q = m.clone();
                q.vertices[v][k] -= eps;
                let fd = (total_area(&p) - total_area(&q)) / (2.0 * eps);
                assert!((fd - g[v][k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn plane_label_removes_normal_gradient() {
        let mut m = square();
        m.vertices[2].z = 0.3;
        m.pieces.push(BoundaryPiece::plane(Vec3::new(0.0, 0.0, 0.3), Vec3::z()));
        m.labels[2] = Some(0);
        let g = area_gradient(&m);
        assert!(g[2].z.abs() < 1e-15);
    }

    #[test]
    fn manifold_mesh_has_no_triple_edges() {
        assert_eq!(singular_edge_stats(&square()).triple_edges, 0);
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let m = SlidingMesh::new(vec![Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0], vec![[0, 1, 2]]);
        assert!(matches!(m.validate(), Err(MeshError::Degenerate { .. })));
    }
}
