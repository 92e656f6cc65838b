//! Scene files, initial surfaces and OBJ input/output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::BoundaryPiece;
use crate::chain_solver::Objective;
use crate::complex::{ChainJson, ComplexJson};
use crate::douglas::{ClosedCurve, DouglasOptions};
use crate::grid::FfInput;
use crate::sliding::{EvolveOptions, MeshError, MinimalityProbe, SlidingMesh};
use crate::Vec3;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid scene at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("boundary index {index} out of range ({count} pieces)")]
    BadPiece { index: usize, count: usize },
    #[error("piece {0} is not a closed curve")]
    NotALoop(usize),
    #[error("{0}")]
    Spec(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("{path}:{line}: {message}")]
    Obj { path: String, line: usize, message: String },
}

/// Everything a CLI run needs. Blocks unused by a subcommand are ignored.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    #[serde(default)]
    pub boundary: Vec<BoundaryPiece>,
    #[serde(default)]
    pub surface: Option<SurfaceSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub douglas: Option<DouglasBlock>,
    #[serde(default)]
    pub evolve: Option<EvolveBlock>,
    #[serde(default)]
    pub chain: Option<ChainBlock>,
    #[serde(default)]
    pub homology: Option<HomologyBlock>,
    #[serde(default)]
    pub grid: Option<GridBlock>,
    #[serde(default)]
    pub measure: Option<MeasureBlock>,
    #[serde(default)]
    pub oracle: Option<OracleBlock>,
    #[serde(default)]
    pub output: Option<OutputBlock>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SurfaceSpec {
    /// Fan of `rings` concentric rings over one closed boundary curve.
    DiskFan { piece: usize, segments: usize, #[serde(default = "one")] rings: usize },
    /// Band between two closed curves.
    Cylinder { pieces: [usize; 2], segments: usize, rings: usize },
    /// Two bands meeting a central disk along a free middle loop.
    YSeed { pieces: [usize; 2], segments: usize, band_rings: usize, disk_rings: usize },
    /// OBJ file; vertices within `snap` of a piece are labeled with it.
    Mesh { path: PathBuf, #[serde(default = "default_snap")] snap: f64 },
}

fn one() -> usize {
    1
}

fn default_snap() -> f64 {
    1e-9
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DouglasBlock {
    pub curve: Option<ClosedCurve>,
    /// Boundary piece to use when `curve` is absent.
    pub piece: Option<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_rings")]
    pub rings: usize,
    #[serde(default = "default_angles")]
    pub angles: usize,
    #[serde(default)]
    pub options: DouglasOptions,
}

fn default_samples() -> usize {
    512
}
fn default_rings() -> usize {
    64
}
fn default_angles() -> usize {
    256
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveBlock {
    #[serde(default)]
    pub options: EvolveOptions,
    /// Write an OBJ snapshot every this many iterations (0: final only).
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub probe: Option<MinimalityProbe>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainBlock {
    pub complex: ComplexJson,
    pub boundary: ChainJson,
    pub objective: Objective,
    #[serde(default = "default_bound")]
    pub bound: u32,
    /// Simplices spanning `Γ` for the homologous boundary mode.
    #[serde(default)]
    pub homologous_on: Option<Vec<Vec<usize>>>,
}

fn default_bound() -> u32 {
    crate::chain_solver::DEFAULT_BOUND
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomologyBlock {
    pub complex: ComplexJson,
    /// Simplices spanning the boundary subcomplex `Γ`.
    pub boundary: Vec<Vec<usize>>,
    pub generators: Vec<NamedChain>,
    /// 0 for the integers, otherwise a prime.
    #[serde(default)]
    pub modulus: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedChain {
    pub name: String,
    pub chain: ChainJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub lo: Vec3,
    pub hi: Vec3,
    pub level: u32,
    /// Safe-region margin in cell sides.
    pub margin_cells: f64,
    #[serde(default)]
    pub input: Option<FfInput>,
    /// Face set file (JSON) for `grid-min` when not projecting first.
    #[serde(default)]
    pub faces: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureBlock {
    pub dimension: usize,
    pub delta: f64,
    /// Whitespace-separated `x y z` lines.
    #[serde(default)]
    pub samples_file: Option<PathBuf>,
    /// Samples per unit area drawn from the initial surface when no file is given.
    #[serde(default = "default_density")]
    pub density: f64,
}

fn default_density() -> f64 {
    10_000.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleBlock {
    pub radii: Vec<f64>,
    pub half_separations: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: PathBuf,
}

impl Scene {
    pub fn from_json_str(text: &str) -> Result<Scene, SceneError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scene: Scene = serde_path_to_error::deserialize(de).map_err(|e| SceneError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Scene, SceneError> {
        let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io { path: path.into(), source })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        for (i, p) in self.boundary.iter().enumerate() {
            p.validate().map_err(|e| SceneError::Schema { path: format!("boundary[{i}]"), message: e.to_string() })?;
        }
        let check = |i: usize| {
            if i < self.boundary.len() {
                Ok(())
            } else {
                Err(SceneError::BadPiece { index: i, count: self.boundary.len() })
            }
        };
        match &self.surface {
            Some(SurfaceSpec::DiskFan { piece, .. }) => check(*piece)?,
            Some(SurfaceSpec::Cylinder { pieces, .. }) | Some(SurfaceSpec::YSeed { pieces, .. }) => {
                check(pieces[0])?;
                check(pieces[1])?;
            }
            _ => {}
        }
        if let Some(DouglasBlock { piece: Some(p), .. }) = &self.douglas {
            check(*p)?;
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

fn loop_points(piece: &BoundaryPiece, index: usize, n: usize) -> Result<Vec<Vec3>, SceneError> {
    if !piece.is_closed_curve() {
        return Err(SceneError::NotALoop(index));
    }
    Ok((0..n).map(|i| piece.curve_point(i as f64 / n as f64).unwrap()).collect())
}

fn require(cond: bool, msg: &str) -> Result<(), SceneError> {
    if cond {
        Ok(())
    } else {
        Err(SceneError::Spec(msg.into()))
    }
}

/// Builds the initial competitor described by the scene.
pub fn build_initial_surface(scene: &Scene) -> Result<SlidingMesh, SceneError> {
    let spec = scene.surface.as_ref().ok_or_else(|| SceneError::Spec("scene has no surface block".into()))?;
    let pieces = &scene.boundary;
    let mesh = match spec {
        SurfaceSpec::DiskFan { piece, segments, rings } => {
            require(*segments >= 3 && *rings >= 1, "disk-fan needs segments ≥ 3 and rings ≥ 1")?;
            let rim = loop_points(&pieces[*piece], *piece, *segments)?;
            disk_fan(&rim, *rings, pieces.clone(), *piece)
        }
        SurfaceSpec::Cylinder { pieces: [a, b], segments, rings } => {
            require(*segments >= 3 && *rings >= 1, "cylinder needs segments ≥ 3 and rings ≥ 1")?;
            let top = loop_points(&pieces[*a], *a, *segments)?;
            let bottom = loop_points(&pieces[*b], *b, *segments)?;
            cylinder(&top, &bottom, *rings, pieces.clone(), [*a, *b])
        }
        SurfaceSpec::YSeed { pieces: [a, b], segments, band_rings, disk_rings } => {
            require(*segments >= 3 && *band_rings >= 1 && *disk_rings >= 1, "y-seed needs positive counts")?;
            let top = loop_points(&pieces[*a], *a, *segments)?;
            let bottom = loop_points(&pieces[*b], *b, *segments)?;
            y_seed(&top, &bottom, *band_rings, *disk_rings, pieces.clone(), [*a, *b])
        }
        SurfaceSpec::Mesh { path, snap } => {
            let (vertices, triangles) = read_obj(path)?;
            let mut m = SlidingMesh::new(vertices, triangles);
            m.pieces = pieces.clone();
            for v in 0..m.vertices.len() {
                if let Some(j) = (0..pieces.len()).find(|&j| pieces[j].distance(&m.vertices[v]) <= *snap) {
                    m.labels[v] = Some(j);
                    m.vertices[v] = pieces[j].closest_point(&m.vertices[v]);
                }
            }
            m
        }
    };
    mesh.validate()?;
    Ok(mesh)
}

/// Concentric rings from the rim to its centroid; the rim is labeled.
pub fn disk_fan(rim: &[Vec3], rings: usize, pieces: Vec<BoundaryPiece>, piece: usize) -> SlidingMesh {
    let n = rim.len();
    let center = rim.iter().sum::<Vec3>() / n as f64;
    let mut vertices = vec![center];
    // ring k = 1..=rings at fraction k/rings of the way out
    for k in 1..=rings {
        let t = k as f64 / rings as f64;
        vertices.extend(rim.iter().map(|p| center + (p - center) * t));
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
    let mut m = SlidingMesh { labels: vec![None; vertices.len()], vertices, triangles, pieces };
    m.label_all((0..n).map(|j| id(rings, j)), piece);
    m.vertices[0] = center;
    if let Some(rim_piece) = m.pieces.get(piece).cloned() {
        for j in 0..n {
            let v = id(rings, j);
            m.vertices[v] = rim_piece.closest_point(&m.vertices[v]);
        }
    }
    m
}

/// Quad strip between corresponding loop points, split into triangles.
fn strip(vertices: &mut Vec<Vec3>, top: &[Vec3], bottom: &[Vec3], rings: usize) -> (Vec<Vec<usize>>, Vec<[usize; 3]>) {
    let n = top.len();
    let mut rows = Vec::with_capacity(rings + 1);
    for k in 0..=rings {
        let t = k as f64 / rings as f64;
        let start = vertices.len();
        vertices.extend((0..n).map(|j| top[j] + (bottom[j] - top[j]) * t));
        rows.push((start..start + n).collect::<Vec<_>>());
    }
    let mut tris = Vec::new();
    for k in 0..rings {
        for j in 0..n {
            let (a, b) = (rows[k][j], rows[k][(j + 1) % n]);
            let (c, d) = (rows[k + 1][j], rows[k + 1][(j + 1) % n]);
            tris.push([a, c, d]);
            tris.push([a, d, b]);
        }
    }
    (rows, tris)
}

pub fn cylinder(top: &[Vec3], bottom: &[Vec3], rings: usize, pieces: Vec<BoundaryPiece>, labels: [usize; 2]) -> SlidingMesh {
    let mut vertices = Vec::new();
    let (rows, triangles) = strip(&mut vertices, top, bottom, rings);
    let mut m = SlidingMesh { labels: vec![None; vertices.len()], vertices, triangles, pieces };
    m.label_all(rows[0].iter().copied(), labels[0]);
    m.label_all(rows[rings].iter().copied(), labels[1]);
    m
}

/// Upper band, lower band and a central disk, all sharing the middle loop
/// `(top + bottom) / 2`, whose edges therefore carry three faces.
pub fn y_seed(
    top: &[Vec3],
    bottom: &[Vec3],
    band_rings: usize,
    disk_rings: usize,
    pieces: Vec<BoundaryPiece>,
    labels: [usize; 2],
) -> SlidingMesh {
    let n = top.len();
    let middle: Vec<Vec3> = top.iter().zip(bottom).map(|(a, b)| (a + b) * 0.5).collect();
    let mut vertices = Vec::new();
    let (upper, mut triangles) = strip(&mut vertices, top, &middle, band_rings);
    let mid_ids = upper[band_rings].clone();
    // lower band reuses the middle row
    let mut rows = vec![mid_ids.clone()];
    for k in 1..=band_rings {
        let t = k as f64 / band_rings as f64;
        let start = vertices.len();
        vertices.extend((0..n).map(|j| middle[j] + (bottom[j] - middle[j]) * t));
        rows.push((start..start + n).collect());
    }
    for k in 0..band_rings {
        for j in 0..n {
            let (a, b) = (rows[k][j], rows[k][(j + 1) % n]);
            let (c, d) = (rows[k + 1][j], rows[k + 1][(j + 1) % n]);
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
    }
    // disk: rings from the middle loop to its centroid
    let center = middle.iter().sum::<Vec3>() / n as f64;
    let mut disk_rows = vec![mid_ids];
    for k in 1..disk_rings {
        let t = 1.0 - k as f64 / disk_rings as f64;
        let start = vertices.len();
        vertices.extend(middle.iter().map(|p| center + (p - center) * t));
        disk_rows.push((start..start + n).collect());
    }
    let c = vertices.len();
    vertices.push(center);
    for k in 0..disk_rings - 1 {
        for j in 0..n {
            let (a, b) = (disk_rows[k][j], disk_rows[k][(j + 1) % n]);
            let (p, q) = (disk_rows[k + 1][j], disk_rows[k + 1][(j + 1) % n]);
            triangles.push([a, p, q]);
            triangles.push([a, q, b]);
        }
    }
    let inner = &disk_rows[disk_rings - 1];
    for j in 0..n {
        triangles.push([inner[j], c, inner[(j + 1) % n]]);
    }
    let mut m = SlidingMesh { labels: vec![None; vertices.len()], vertices, triangles, pieces };
    m.label_all(upper[0].iter().copied(), labels[0]);
    m.label_all(rows[band_rings].iter().copied(), labels[1]);
    m
}

/// Two coaxial horizontal circles of radius `r` at `z = ±h`.
pub fn two_circle_pieces(r: f64, h: f64) -> Vec<BoundaryPiece> {
    vec![BoundaryPiece::horizontal_circle(r, h), BoundaryPiece::horizontal_circle(r, -h)]
}

/// Text mesh: `v x y z` lines at 9 significant digits, `f a b c` lines (1-based).
/// Vertex labels are kept in `#label v j` comment lines.
pub fn obj_string(vertices: &[Vec3], triangles: &[[usize; 3]], labels: Option<&[Option<usize>]>) -> String {
    let mut s = String::new();
    for p in vertices {
        let _ = writeln!(s, "v {:.8e} {:.8e} {:.8e}", p.x, p.y, p.z);
    }
    for t in triangles {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    if let Some(labels) = labels {
        for (v, l) in labels.iter().enumerate() {
            if let Some(j) = l {
                let _ = writeln!(s, "#label {} {}", v + 1, j);
            }
        }
    }
    s
}

pub fn export_obj(path: &Path, vertices: &[Vec3], triangles: &[[usize; 3]], labels: Option<&[Option<usize>]>) -> Result<(), SceneError> {
    std::fs::write(path, obj_string(vertices, triangles, labels)).map_err(|source| SceneError::Io { path: path.into(), source })
}

pub fn export_mesh(path: &Path, mesh: &SlidingMesh) -> Result<(), SceneError> {
    export_obj(path, &mesh.vertices, &mesh.triangles, Some(&mesh.labels))
}

/// Face set as two triangles per face.
pub fn export_faceset(path: &Path, tris: &[[Vec3; 3]]) -> Result<(), SceneError> {
    let mut vertices = Vec::with_capacity(tris.len() * 3);
    let mut triangles = Vec::with_capacity(tris.len());
    for t in tris {
        let base = vertices.len();
        vertices.extend_from_slice(t);
        triangles.push([base, base + 1, base + 2]);
    }
    export_obj(path, &vertices, &triangles, None)
}

/// Parses OBJ text; polygons are fanned into triangles.
pub fn parse_obj(text: &str, name: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>, Vec<(usize, usize)>), SceneError> {
    let err = |line: usize, message: String| SceneError::Obj { path: name.into(), line, message };
    let mut vertices = Vec::new();
    let mut faces: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut labels = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let xs: Vec<f64> = it
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|e| err(lineno, e.to_string())))
                    .collect::<Result<_, _>>()?;
                if xs.len() != 3 {
                    return Err(err(lineno, "vertex needs three coordinates".into()));
                }
                vertices.push(Vec3::new(xs[0], xs[1], xs[2]));
            }
            Some("f") => {
                let ids: Vec<usize> = it
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        head.parse::<usize>().map_err(|e| err(lineno, format!("bad index `{t}`: {e}")))
                    })
                    .collect::<Result<_, _>>()?;
                if ids.len() < 3 || ids.contains(&0) {
                    return Err(err(lineno, "face needs at least three 1-based indices".into()));
                }
                faces.push((lineno, ids.into_iter().map(|i| i - 1).collect()));
            }
            Some("#label") => {
                let xs: Vec<usize> = it.map(|t| t.parse::<usize>().map_err(|e| err(lineno, e.to_string()))).collect::<Result<_, _>>()?;
                if xs.len() != 2 || xs[0] == 0 {
                    return Err(err(lineno, "label line needs a 1-based vertex and a piece index".into()));
                }
                labels.push((xs[0] - 1, xs[1]));
            }
            _ => {}
        }
    }
    let mut triangles = Vec::new();
    for (lineno, f) in faces {
        if f.iter().any(|&i| i >= vertices.len()) {
            return Err(err(lineno, "face index out of range".into()));
        }
        for k in 1..f.len() - 1 {
            triangles.push([f[0], f[k], f[k + 1]]);
        }
    }
    Ok((vertices, triangles, labels))
}

pub fn read_obj(path: &Path) -> Result<(Vec<Vec3>, Vec<[usize; 3]>), SceneError> {
    let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io { path: path.into(), source })?;
    parse_obj(&text, &path.display().to_string()).map(|(v, t, _)| (v, t))
}

/// Reads a mesh written by [`export_mesh`], restoring labels against `pieces`.
pub fn import_mesh(path: &Path, pieces: Vec<BoundaryPiece>) -> Result<SlidingMesh, SceneError> {
    let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io { path: path.into(), source })?;
    let (vertices, triangles, labels) = parse_obj(&text, &path.display().to_string())?;
    let mut m = SlidingMesh::new(vertices, triangles);
    m.pieces = pieces;
    for (v, j) in labels {
        if v < m.labels.len() {
            m.labels[v] = Some(j);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obj_counts_for_square() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::new(1.0, 1.0, 0.0), Vec3::y()];
        let s = obj_string(&v, &[[0, 1, 2], [0, 2, 3]], None);
        assert_eq!(s.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(s.lines().filter(|l| l.starts_with("f ")).count(), 2);
    }

    #[test]
    fn unknown_scene_field_reports_path() {
        let e = Scene::from_json_str(r#"{"boundary": [{"kind": "circle", "center": [0,0,0], "normal": [0,0,1], "radius": 1, "color": 3}]}"#)
            .unwrap_err();
        match e {
            SceneError::Schema { path, .. } => assert!(path.starts_with("boundary[0]"), "{path}"),
            other => panic!("{other}"),
        }
    }
}
