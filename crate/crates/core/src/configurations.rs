//! Explicit complexes for the classical soap-film configurations: two parallel
//! circles with their disk, cylinder and Y-film fillings, and the cones `Y`
//! and `T` truncated to a bounded region.
//!
//! Every builder returns the complex together with named, consistently
//! oriented chains so callers can combine them (e.g. `2·D − H1 + H2`).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::complex::{Chain, ComplexError, Ring, SimplicialComplex, Subcomplex};
use crate::Vec3;

/// A complex with named chains and a designated boundary subcomplex.
#[derive(Clone, Debug)]
pub struct LabeledComplex {
    pub complex: SimplicialComplex,
    pub chains: BTreeMap<String, Chain>,
    pub boundary: Subcomplex,
}

impl LabeledComplex {
    /// Named chain, panicking on unknown names (builders fix the name set).
    pub fn chain(&self, name: &str) -> &Chain {
        self.chains.get(name).unwrap_or_else(|| panic!("no chain named {name}"))
    }

    /// Integer combination of named chains.
    pub fn combination(&self, terms: &[(&str, i64)]) -> Result<Chain, ComplexError> {
        let mut iter = terms.iter();
        let (first, k) = iter.next().expect("empty combination");
        let mut acc = self.chain(first).scale(*k);
        for (name, k) in iter {
            acc = acc.try_add(&self.chain(name).scale(*k))?;
        }
        Ok(acc)
    }
}

/// Which fillings of the two-circle boundary to include.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoCircleParts {
    pub disks: bool,
    pub cylinder: bool,
    pub y_film: bool,
}

impl TwoCircleParts {
    pub const ALL: TwoCircleParts = TwoCircleParts { disks: true, cylinder: true, y_film: true };
    pub const DISKS: TwoCircleParts = TwoCircleParts { disks: true, cylinder: false, y_film: false };
    pub const CYLINDER: TwoCircleParts = TwoCircleParts { disks: false, cylinder: true, y_film: false };
    pub const Y_FILM: TwoCircleParts = TwoCircleParts { disks: false, cylinder: false, y_film: true };
}

/// Geometry of the two-circle complex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoCircleLayout {
    pub radius: f64,
    pub half_separation: f64,
    pub segments: usize,
    /// Rings of quads in the cylinder sheet.
    pub cylinder_rings: usize,
    /// Radius of the central disk of the Y-film.
    pub neck_radius: f64,
    /// Rings of quads in each Y-film band.
    pub band_rings: usize,
}

impl TwoCircleLayout {
    pub fn new(radius: f64, half_separation: f64, segments: usize) -> Self {
        TwoCircleLayout {
            radius,
            half_separation,
            segments,
            cylinder_rings: 1,
            neck_radius: 0.9 * radius,
            band_rings: 1,
        }
    }
}

struct Builder {
    points: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    named: Vec<(String, Vec<[usize; 3]>)>,
    loops: Vec<(String, Vec<[usize; 2]>)>,
}

impl Builder {
    fn new() -> Self {
        Builder { points: Vec::new(), triangles: Vec::new(), named: Vec::new(), loops: Vec::new() }
    }

    fn point(&mut self, p: Vec3) -> usize {
        self.points.push(p);
        self.points.len() - 1
    }

    fn ring(&mut self, radius: f64, z: f64, n: usize) -> Vec<usize> {
        (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                self.point(Vec3::new(radius * a.cos(), radius * a.sin(), z))
            })
            .collect()
    }

    /// Counter-clockwise fan (normal +z) from `center` over `ring`.
    fn fan(&mut self, name: &str, center: usize, ring: &[usize]) {
        let n = ring.len();
        let tris: Vec<[usize; 3]> = (0..n).map(|i| [center, ring[i], ring[(i + 1) % n]]).collect();
        self.add_sheet(name, tris);
    }

    /// Strip from `lower` to `upper`; its boundary is `lower − upper` (both CCW).
    fn strip(&mut self, name: &str, rings: &[Vec<usize>]) {
        let mut tris = Vec::new();
        for w in rings.windows(2) {
            let (b, a) = (&w[0], &w[1]);
            let n = b.len();
            for i in 0..n {
                let j = (i + 1) % n;
                tris.push([b[i], b[j], a[j]]);
                tris.push([b[i], a[j], a[i]]);
            }
        }
        self.add_sheet(name, tris);
    }

    fn add_sheet(&mut self, name: &str, tris: Vec<[usize; 3]>) {
        self.triangles.extend_from_slice(&tris);
        self.named.push((name.to_string(), tris));
    }

    fn add_loop(&mut self, name: &str, ring: &[usize]) {
        let n = ring.len();
        self.loops.push((name.to_string(), (0..n).map(|i| [ring[i], ring[(i + 1) % n]]).collect()));
    }

    fn finish(self, boundary_loops: &[&str]) -> Result<LabeledComplex, ComplexError> {
        let mut simplices: Vec<Vec<usize>> = self.triangles.iter().map(|t| t.to_vec()).collect();
        for (_, edges) in &self.loops {
            simplices.extend(edges.iter().map(|e| e.to_vec()));
        }
        let complex = SimplicialComplex::new(self.points, simplices)?;
        let mut chains = BTreeMap::new();
        for (name, tris) in &self.named {
            chains.insert(name.clone(), complex.oriented_chain(tris, Ring::Integers)?);
        }
        let mut boundary = Subcomplex::default();
        for (name, edges) in &self.loops {
            let c = complex.oriented_chain(edges, Ring::Integers)?;
            if boundary_loops.contains(&name.as_str()) {
                boundary = boundary.union(&Subcomplex::from_support(&complex, &c));
            }
            chains.insert(name.clone(), c);
        }
        Ok(LabeledComplex { complex, chains, boundary })
    }
}

fn interpolate_rings(b: &mut Builder, r0: f64, z0: f64, r1: f64, z1: f64, rings: usize, n: usize) -> Vec<Vec<usize>> {
    (1..rings)
        .map(|k| {
            let s = k as f64 / rings as f64;
            b.ring(r0 + s * (r1 - r0), z0 + s * (z1 - z0), n)
        })
        .collect()
}

/// Two coaxial `n`-gon circles at `z = ±h` with the requested fillings.
///
/// Chains: `gamma1` (upper circle, CCW from +z), `gamma2` (lower circle),
/// `D1`, `D2` (disks, `∂ = gamma1`, `gamma2`), `H` (cylinder, `∂H = gamma2 − gamma1`),
/// `D` (central disk, `∂D = neck`), `H1` (`∂ = neck − gamma1`), `H2` (`∂ = gamma2 − neck`).
/// With these, `∂(2D − H1 + H2) = gamma1 + gamma2`.
pub fn two_circles(layout: &TwoCircleLayout, parts: TwoCircleParts) -> Result<LabeledComplex, ComplexError> {
    let (r, h, n) = (layout.radius, layout.half_separation, layout.segments);
    let mut b = Builder::new();
    let upper = b.ring(r, h, n);
    let lower = b.ring(r, -h, n);
    b.add_loop("gamma1", &upper);
    b.add_loop("gamma2", &lower);
    if parts.disks {
        let c1 = b.point(Vec3::new(0.0, 0.0, h));
        let c2 = b.point(Vec3::new(0.0, 0.0, -h));
        b.fan("D1", c1, &upper);
        b.fan("D2", c2, &lower);
    }
    if parts.cylinder {
        let mut rings = vec![lower.clone()];
        rings.extend(interpolate_rings(&mut b, r, -h, r, h, layout.cylinder_rings, n));
        rings.push(upper.clone());
        b.strip("H", &rings);
    }
    if parts.y_film {
        let rho = layout.neck_radius;
        let neck = b.ring(rho, 0.0, n);
        let c0 = b.point(Vec3::zeros());
        b.fan("D", c0, &neck);
        b.add_loop("neck", &neck);
        let mut up = vec![neck.clone()];
        up.extend(interpolate_rings(&mut b, rho, 0.0, r, h, layout.band_rings, n));
        up.push(upper.clone());
        b.strip("H1", &up);
        let mut down = vec![lower.clone()];
        down.extend(interpolate_rings(&mut b, r, -h, rho, 0.0, layout.band_rings, n));
        down.push(neck);
        b.strip("H2", &down);
    }
    b.finish(&["gamma1", "gamma2"])
}

/// The cone `Y` cut by the unit ball: three half-disks at 120° sharing the
/// spine segment on the z-axis, each with `segments` arc segments.
///
/// Chains `F1`, `F2`, `F3` are the half-disks, oriented so that all three
/// induce the same orientation on the spine; `S1`, `S2`, `S3` are their rim
/// half-circles, `∂Fj = Sj + spine`. The boundary subcomplex is the rim.
pub fn y_cone(segments: usize) -> Result<LabeledComplex, ComplexError> {
    let m = segments;
    let mut b = Builder::new();
    let spine: Vec<usize> = (0..=m)
        .map(|k| {
            let phi = PI * k as f64 / m as f64;
            b.point(Vec3::new(0.0, 0.0, phi.cos()))
        })
        .collect();
    let mut rims = Vec::new();
    for j in 0..3 {
        let a = 2.0 * PI * j as f64 / 3.0;
        let u = Vec3::new(a.cos(), a.sin(), 0.0);
        let mut arc = vec![spine[0]];
        for k in 1..m {
            let phi = PI * k as f64 / m as f64;
            arc.push(b.point(u * phi.sin() + Vec3::z() * phi.cos()));
        }
        arc.push(spine[m]);
        let mut tris = Vec::new();
        for k in 0..m {
            if k == 0 {
                tris.push([spine[0], spine[1], arc[1]]);
            } else if k == m - 1 {
                tris.push([spine[k], spine[k + 1], arc[k]]);
            } else {
                tris.push([spine[k], spine[k + 1], arc[k + 1]]);
                tris.push([spine[k], arc[k + 1], arc[k]]);
            }
        }
        b.add_sheet(&format!("F{}", j + 1), tris);
        rims.push(arc);
    }
    for (j, arc) in rims.iter().enumerate() {
        // rim runs from the top pole down to the bottom pole, matching −(spine) orientation
        let edges: Vec<[usize; 2]> = arc.windows(2).map(|w| [w[1], w[0]]).collect();
        b.loops.push((format!("S{}", j + 1), edges));
    }
    b.finish(&["S1", "S2", "S3"])
}

/// Unit vectors to the vertices of a regular tetrahedron centred at the origin.
pub fn tetrahedron_directions() -> [Vec3; 4] {
    let s = 1.0 / 3f64.sqrt();
    [
        Vec3::new(s, s, s),
        Vec3::new(s, -s, -s),
        Vec3::new(-s, s, -s),
        Vec3::new(-s, -s, s),
    ]
}

/// The cone `T` over the edges of a regular tetrahedron, cut by the
/// tetrahedron's convex hull: six triangles `(0, vi, vj)` with apex at the
/// origin. Chains `F{i}{j}` carry the reference orientation; the boundary
/// subcomplex is the six tetrahedron edges.
pub fn t_cone() -> Result<LabeledComplex, ComplexError> {
    let mut b = Builder::new();
    let apex = b.point(Vec3::zeros());
    let v: Vec<usize> = tetrahedron_directions().iter().map(|&d| b.point(d)).collect();
    let mut rim = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            b.add_sheet(&format!("F{}{}", i + 1, j + 1), vec![[apex, v[i], v[j]]]);
            rim.push([v[i], v[j]]);
        }
    }
    b.loops.push(("rim".to_string(), rim));
    b.finish(&["rim"])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{mass, size};

    #[test]
    fn two_circle_orientations() {
        let lc = two_circles(&TwoCircleLayout::new(1.0, 0.2, 12), TwoCircleParts::ALL).unwrap();
        let k = &lc.complex;
        let g1 = lc.chain("gamma1");
        let g2 = lc.chain("gamma2");
        assert_eq!(&k.boundary(lc.chain("D1")).unwrap(), g1);
        assert_eq!(&k.boundary(lc.chain("D2")).unwrap(), g2);
        assert_eq!(k.boundary(lc.chain("H")).unwrap(), g2 - g1);
        let e = lc.combination(&[("D", 2), ("H1", -1), ("H2", 1)]).unwrap();
        assert_eq!(k.boundary(&e).unwrap(), g1 + g2);
        assert!(lc.boundary.supports(g1) && lc.boundary.supports(g2));
        assert_eq!(lc.boundary.cells(2).len(), 0);
    }

    #[test]
    fn y_cone_spine_cancels() {
        let lc = y_cone(8).unwrap();
        let k = &lc.complex;
        let t = lc.combination(&[("F1", 1), ("F2", 1), ("F3", -2)]).unwrap();
        assert!(k.relative_boundary(&t, &lc.boundary).unwrap().is_zero());
        let s = lc.combination(&[("S1", 1), ("S2", 1), ("S3", -2)]).unwrap();
        assert_eq!(k.boundary(&t).unwrap(), s);
        let m = k.measures();
        let half = size(lc.chain("F1"), &m).unwrap();
        assert!((size(&t, &m).unwrap() - 3.0 * half).abs() < 1e-12);
        assert!((mass(&t, &m).unwrap() - 4.0 * half).abs() < 1e-12);
    }

    #[test]
    fn t_cone_has_six_faces() {
        let lc = t_cone().unwrap();
        assert_eq!(lc.complex.num_cells(2), 6);
        assert_eq!(lc.boundary.cells(1).len(), 6);
    }
}
