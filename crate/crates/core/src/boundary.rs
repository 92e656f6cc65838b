//! Constraint sets `Γ_j` on which labeled mesh vertices must stay.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PieceError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("{0} must be a nonzero vector")]
    ZeroVector(&'static str),
    #[error("polyline needs at least two distinct points")]
    ShortPolyline,
    #[error("torus minor radius must be below the major radius")]
    SelfIntersectingTorus,
}

/// Geometric description of a boundary piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BoundaryPiece {
    Circle { center: Vec3, normal: Vec3, radius: f64 },
    Polyline { points: Vec<Vec3>, closed: bool },
    Plane { point: Vec3, normal: Vec3 },
    Torus { center: Vec3, axis: Vec3, major: f64, minor: f64 },
}

/// Unit vector orthogonal to `n`.
pub fn orthogonal_unit(n: &Vec3) -> Vec3 {
    let trial = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    n.cross(&trial).normalize()
}

fn closest_on_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> (Vec3, Vec3) {
    let d = b - a;
    let t = ((p - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
    (a + d * t, d)
}

impl BoundaryPiece {
    pub fn circle(center: Vec3, normal: Vec3, radius: f64) -> Self {
        BoundaryPiece::Circle { center, normal: normal.normalize(), radius }
    }

    pub fn plane(point: Vec3, normal: Vec3) -> Self {
        BoundaryPiece::Plane { point, normal: normal.normalize() }
    }

    /// Horizontal circle of radius `r` at height `z`, centered on the z-axis.
    pub fn horizontal_circle(r: f64, z: f64) -> Self {
        BoundaryPiece::circle(Vec3::new(0.0, 0.0, z), Vec3::z(), r)
    }

    pub fn validate(&self) -> Result<(), PieceError> {
        match self {
            BoundaryPiece::Circle { normal, radius, .. } => {
                if normal.norm() == 0.0 {
                    return Err(PieceError::ZeroVector("circle normal"));
                }
                if !(*radius > 0.0) {
                    return Err(PieceError::NonPositive("circle radius"));
                }
            }
            BoundaryPiece::Polyline { points, .. } => {
                if points.windows(2).all(|w| w[0] == w[1]) {
                    return Err(PieceError::ShortPolyline);
                }
            }
            BoundaryPiece::Plane { normal, .. } => {
                if normal.norm() == 0.0 {
                    return Err(PieceError::ZeroVector("plane normal"));
                }
            }
            BoundaryPiece::Torus { axis, major, minor, .. } => {
                if axis.norm() == 0.0 {
                    return Err(PieceError::ZeroVector("torus axis"));
                }
                if !(*major > 0.0) || !(*minor > 0.0) {
                    return Err(PieceError::NonPositive("torus radii"));
                }
                if minor >= major {
                    return Err(PieceError::SelfIntersectingTorus);
                }
            }
        }
        Ok(())
    }

    /// Nearest point of the piece to `p`.
    pub fn closest_point(&self, p: &Vec3) -> Vec3 {
        match self {
            BoundaryPiece::Circle { center, normal, radius } => {
                let n = normal.normalize();
                let v = p - center;
                let inplane = v - n * v.dot(&n);
                let dir = if inplane.norm() > 1e-300 { inplane.normalize() } else { orthogonal_unit(&n) };
                center + dir * *radius
            }
            BoundaryPiece::Polyline { points, closed } => {
                let mut best = points[0];
                let mut best_d = f64::INFINITY;
                for (a, b) in self.segments(points, *closed) {
                    if a == b {
                        continue;
                    }
                    let (q, _) = closest_on_segment(p, a, b);
                    let d = (q - p).norm_squared();
                    if d < best_d {
                        best_d = d;
                        best = q;
                    }
                }
                best
            }
            BoundaryPiece::Plane { point, normal } => {
                let n = normal.normalize();
                p - n * (p - point).dot(&n)
            }
            BoundaryPiece::Torus { center, axis, major, minor } => {
                let a = axis.normalize();
                let v = p - center;
                let radial = v - a * v.dot(&a);
                let rdir = if radial.norm() > 1e-300 { radial.normalize() } else { orthogonal_unit(&a) };
                let core = center + rdir * *major;
                let off = p - core;
                let odir = if off.norm() > 1e-300 { off.normalize() } else { rdir };
                core + odir * *minor
            }
        }
    }

    fn segments<'a>(&self, points: &'a [Vec3], closed: bool) -> impl Iterator<Item = (&'a Vec3, &'a Vec3)> + 'a {
        let n = points.len();
        let count = if closed { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (&points[i], &points[(i + 1) % n]))
    }

    pub fn distance(&self, p: &Vec3) -> f64 {
        (self.closest_point(p) - p).norm()
    }

    /// Distance of `p` from the piece measured by its defining equations.
    ///
    /// Zero exactly on the piece; used to audit the sliding constraint.
    pub fn residual(&self, p: &Vec3) -> f64 {
        match self {
            BoundaryPiece::Circle { center, normal, radius } => {
                let n = normal.normalize();
                let v = p - center;
                let h = v.dot(&n);
                let rho = (v - n * h).norm();
                (h * h + (rho - radius).powi(2)).sqrt()
            }
            BoundaryPiece::Torus { center, axis, major, minor } => {
                let a = axis.normalize();
                let v = p - center;
                let h = v.dot(&a);
                let rho = (v - a * h).norm();
                ((h * h + (rho - major).powi(2)).sqrt() - minor).abs()
            }
            _ => self.distance(p),
        }
    }

    /// Orthonormal basis of the tangent space of the piece at `p` (assumed on the piece).
    pub fn tangent_basis(&self, p: &Vec3) -> Vec<Vec3> {
        match self {
            BoundaryPiece::Circle { center, normal, .. } => {
                let n = normal.normalize();
                let radial = p - center;
                let t = n.cross(&radial);
                if t.norm() > 0.0 {
                    vec![t.normalize()]
                } else {
                    vec![orthogonal_unit(&n)]
                }
            }
            BoundaryPiece::Polyline { points, closed } => {
                let mut best = None;
                let mut best_d = f64::INFINITY;
                for (a, b) in self.segments(points, *closed) {
                    if a == b {
                        continue;
                    }
                    let (q, d) = closest_on_segment(p, a, b);
                    let dist = (q - p).norm_squared();
                    if dist < best_d {
                        best_d = dist;
                        best = Some(d.normalize());
                    }
                }
                best.into_iter().collect()
            }
            BoundaryPiece::Plane { normal, .. } => {
                let n = normal.normalize();
                let u = orthogonal_unit(&n);
                vec![u, n.cross(&u)]
            }
            BoundaryPiece::Torus { center, axis, major, .. } => {
                let a = axis.normalize();
                let v = p - center;
                let radial = v - a * v.dot(&a);
                let rdir = if radial.norm() > 0.0 { radial.normalize() } else { orthogonal_unit(&a) };
                let core = center + rdir * *major;
                let off = (p - core).normalize();
                let t1 = a.cross(&rdir).normalize();
                let t2 = off.cross(&t1).normalize();
                vec![t1, t2]
            }
        }
    }

    /// Component of `v` tangent to the piece at `p`.
    pub fn project_tangent(&self, p: &Vec3, v: &Vec3) -> Vec3 {
        self.tangent_basis(p).iter().map(|t| t * t.dot(v)).sum()
    }

    /// Point of a closed curve piece at parameter `t ∈ [0, 1)`.
    ///
    /// Circles use angle `2πt` from a fixed reference direction; polylines use
    /// normalized arc length. Planes and tori are not curves and return `None`.
    pub fn curve_point(&self, t: f64) -> Option<Vec3> {
        match self {
            BoundaryPiece::Circle { center, normal, radius } => {
                let n = normal.normalize();
                let u = orthogonal_unit(&n);
                let w = n.cross(&u);
                let a = std::f64::consts::TAU * t;
                Some(center + (u * a.cos() + w * a.sin()) * *radius)
            }
            BoundaryPiece::Polyline { points, closed } => {
                let segs: Vec<_> = self.segments(points, *closed).collect();
                let total: f64 = segs.iter().map(|(a, b)| (*b - *a).norm()).sum();
                let mut s = t.rem_euclid(1.0) * total;
                for (a, b) in &segs {
                    let l = (*b - *a).norm();
                    if s <= l && l > 0.0 {
                        return Some(*a + (*b - *a) * (s / l));
                    }
                    s -= l;
                }
                segs.last().map(|(_, b)| **b)
            }
            _ => None,
        }
    }

    /// Circles and polylines, open or closed.
    pub fn is_curve(&self) -> bool {
        matches!(self, BoundaryPiece::Circle { .. } | BoundaryPiece::Polyline { .. })
    }

    pub fn is_closed_curve(&self) -> bool {
        matches!(self, BoundaryPiece::Circle { .. } | BoundaryPiece::Polyline { closed: true, .. })
    }
}
