//! Simplicial complexes in 3-space and exact chains on them.
//!
//! Simplices are stored with sorted vertex ids; that ordering is the
//! reference orientation. Dropping the `i`-th vertex of a simplex produces a
//! facet with sign `(-1)^i`, which makes `∂∂ = 0` hold mechanically.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Vec3;

/// Highest cell dimension a complex may carry.
pub const MAX_DIM: usize = 3;

/// Area below which a triangle is rejected as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("no boundary below dimension 0")]
    BoundaryOfPoint,
    #[error("simplex {0:?} has {1} vertices; only dimensions 0..=3 are supported")]
    BadSimplexSize(Vec<usize>, usize),
    #[error("simplex {0:?} references vertex {1} but the complex has {2} vertices")]
    VertexOutOfRange(Vec<usize>, usize, usize),
    #[error("simplex {0:?} repeats a vertex")]
    RepeatedVertex(Vec<usize>),
    #[error("triangle {0:?} has zero area")]
    DegenerateTriangle(Vec<usize>),
    #[error("{dim}-chain references cell {cell} but the complex has {count} cells of that dimension")]
    CellOutOfRange { dim: usize, cell: usize, count: usize },
    #[error("dimension mismatch: expected a {expected}-chain, got a {found}-chain")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coefficient ring mismatch: {0} vs {1}")]
    RingMismatch(Ring, Ring),
    #[error("{0} is not a prime modulus")]
    NotPrime(u32),
    #[error("image simplex {0:?} is not a cell of the target complex")]
    MissingImage(Vec<usize>),
    #[error("vertex map has {found} entries but the source complex has {expected} vertices")]
    VertexMapSize { expected: usize, found: usize },
    #[error("vertex map sends vertex {0} to {1}, outside the target complex")]
    VertexMapRange(usize, usize),
    #[error("mass and size are only defined for 1- and 2-chains (got dimension {0})")]
    NoMeasure(usize),
    #[error("coefficient {0} is not an integer")]
    BadCoefficient(String),
}

/// Coefficient ring of a chain: the integers or the prime field `Z/pZ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ring {
    Integers,
    Mod(u32),
}

impl Ring {
    /// `0` for the integers, `p` otherwise.
    pub fn modulus(self) -> u32 {
        match self {
            Ring::Integers => 0,
            Ring::Mod(p) => p,
        }
    }

    pub fn from_modulus(m: u32) -> Result<Ring, ComplexError> {
        match m {
            0 => Ok(Ring::Integers),
            p if is_prime(p) => Ok(Ring::Mod(p)),
            p => Err(ComplexError::NotPrime(p)),
        }
    }

    /// Canonical representative of `value` in this ring.
    pub fn normalize(self, value: BigInt) -> BigInt {
        match self {
            Ring::Integers => value,
            Ring::Mod(p) => value.mod_floor(&BigInt::from(p)),
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Integers => write!(f, "Z"),
            Ring::Mod(p) => write!(f, "Z/{p}"),
        }
    }
}

impl Serialize for Ring {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(self.modulus())
    }
}

impl<'de> Deserialize<'de> for Ring {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = u32::deserialize(d)?;
        Ring::from_modulus(m).map_err(serde::de::Error::custom)
    }
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Sorts `simplex` in place and returns the sign of the sorting permutation.
pub fn sort_with_sign(simplex: &mut [usize]) -> i32 {
    let mut sign = 1;
    // insertion sort; simplices have at most four vertices
    for i in 1..simplex.len() {
        let mut j = i;
        while j > 0 && simplex[j - 1] > simplex[j] {
            simplex.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    sign
}

fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// A finite simplicial complex with vertices in 3-space.
///
/// Cells of each dimension are kept in lexicographic order of their sorted
/// vertex tuples; a cell's id is its position in that order. Vertex `v` is
/// always the 0-cell with id `v`.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    vertices: Vec<Vec3>,
    cells: [Vec<Vec<usize>>; MAX_DIM + 1],
    lookup: [HashMap<Vec<usize>, usize>; MAX_DIM + 1],
}

impl SimplicialComplex {
    /// Builds the closure of `simplices` over the given vertices.
    pub fn new<I, S>(vertices: Vec<Vec3>, simplices: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[usize]>,
    {
        let n = vertices.len();
        let mut sets: [BTreeSet<Vec<usize>>; MAX_DIM + 1] = Default::default();
        for v in 0..n {
            sets[0].insert(vec![v]);
        }
        for s in simplices {
            let s = s.as_ref();
            if s.is_empty() || s.len() > MAX_DIM + 1 {
                return Err(ComplexError::BadSimplexSize(s.to_vec(), s.len()));
            }
            let mut sorted = s.to_vec();
            sorted.sort_unstable();
            if let Some(&v) = sorted.iter().find(|&&v| v >= n) {
                return Err(ComplexError::VertexOutOfRange(s.to_vec(), v, n));
            }
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(ComplexError::RepeatedVertex(s.to_vec()));
            }
            insert_closure(&mut sets, sorted);
        }
        for t in &sets[2] {
            if triangle_area(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]) <= DEGENERATE_AREA {
                return Err(ComplexError::DegenerateTriangle(t.clone()));
            }
        }
        let cells: [Vec<Vec<usize>>; MAX_DIM + 1] = sets.map(|s| s.into_iter().collect());
        let lookup = std::array::from_fn(|k| {
            cells[k].iter().enumerate().map(|(i, c)| (c.clone(), i)).collect()
        });
        Ok(SimplicialComplex { vertices, cells, lookup })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Cells of dimension `k`, each a sorted vertex tuple, in id order.
    pub fn cells(&self, k: usize) -> &[Vec<usize>] {
        self.cells.get(k).map(|c| c.as_slice()).unwrap_or(&[])
    }

    pub fn num_cells(&self, k: usize) -> usize {
        self.cells(k).len()
    }

    /// Highest dimension with at least one cell.
    pub fn dim(&self) -> usize {
        (0..=MAX_DIM).rev().find(|&k| !self.cells[k].is_empty()).unwrap_or(0)
    }

    /// Id of the cell spanned by `simplex` (any vertex order).
    pub fn cell_id(&self, simplex: &[usize]) -> Option<usize> {
        let k = simplex.len().checked_sub(1)?;
        let mut s = simplex.to_vec();
        s.sort_unstable();
        self.lookup.get(k)?.get(&s).copied()
    }

    /// Signed facets of the `k`-cell `id`: `(facet id, ±1)`.
    pub fn facets(&self, k: usize, id: usize) -> Vec<(usize, i32)> {
        assert!(k >= 1, "0-cells have no facets");
        let cell = &self.cells[k][id];
        (0..cell.len())
            .map(|i| {
                let facet: Vec<usize> =
                    cell.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                let fid = self.lookup[k - 1][&facet];
                (fid, if i % 2 == 0 { 1 } else { -1 })
            })
            .collect()
    }

    /// Column-sparse matrix of `∂_k`: entry `j` lists the signed facets of `k`-cell `j`.
    pub fn boundary_columns(&self, k: usize) -> Vec<Vec<(usize, i32)>> {
        (0..self.num_cells(k)).map(|j| self.facets(k, j)).collect()
    }

    /// For each `(k-1)`-cell, the `k`-cells having it as a facet.
    pub fn cofaces(&self, k: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_cells(k - 1)];
        for j in 0..self.num_cells(k) {
            for (f, _) in self.facets(k, j) {
                out[f].push(j);
            }
        }
        out
    }

    pub fn boundary(&self, chain: &Chain) -> Result<Chain, ComplexError> {
        self.check_chain(chain)?;
        if chain.dim == 0 {
            return Err(ComplexError::BoundaryOfPoint);
        }
        let mut out = Chain::zero(chain.dim - 1, chain.ring);
        for (&cell, m) in &chain.coeffs {
            for (f, s) in self.facets(chain.dim, cell) {
                out.add_term(f, if s > 0 { m.clone() } else { -m.clone() });
            }
        }
        Ok(out)
    }

    /// Boundary computed in the relative chain group: terms on cells of `rel` are dropped.
    pub fn relative_boundary(&self, chain: &Chain, rel: &Subcomplex) -> Result<Chain, ComplexError> {
        let full = self.boundary(chain)?;
        Ok(full.filter(|c| !rel.contains(chain.dim - 1, c)))
    }

    pub fn measures(&self) -> CellMeasures {
        let lengths = self.cells[1]
            .iter()
            .map(|e| (self.vertices[e[1]] - self.vertices[e[0]]).norm())
            .collect();
        let areas = self.cells[2]
            .iter()
            .map(|t| triangle_area(&self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]))
            .collect();
        CellMeasures { lengths, areas }
    }

    /// Validates that every term of `chain` lives on an existing cell.
    pub fn check_chain(&self, chain: &Chain) -> Result<(), ComplexError> {
        let count = self.num_cells(chain.dim);
        if let Some((&cell, _)) = chain.coeffs.iter().next_back() {
            if cell >= count || chain.dim > MAX_DIM {
                return Err(ComplexError::CellOutOfRange { dim: chain.dim, cell, count });
            }
        }
        Ok(())
    }

    /// Chain with coefficient `+1` on each listed simplex in the given vertex
    /// order (sign flipped when that order is odd relative to the sorted one).
    pub fn oriented_chain<S: AsRef<[usize]>>(
        &self,
        oriented: &[S],
        ring: Ring,
    ) -> Result<Chain, ComplexError> {
        let mut dim = None;
        let mut chain = Chain::zero(0, ring);
        for s in oriented {
            let s = s.as_ref();
            let k = s.len().saturating_sub(1);
            match dim {
                None => {
                    dim = Some(k);
                    chain = Chain::zero(k, ring);
                }
                Some(d) if d != k => {
                    return Err(ComplexError::DimensionMismatch { expected: d, found: k })
                }
                _ => {}
            }
            let mut sorted = s.to_vec();
            let sign = sort_with_sign(&mut sorted);
            let id = self.cell_id(&sorted).ok_or_else(|| ComplexError::MissingImage(s.to_vec()))?;
            chain.add_term(id, sign);
        }
        Ok(chain)
    }

    /// Push-forward of `chain` along the simplicial vertex map `map` into `target`.
    ///
    /// Simplices whose image repeats a vertex are dropped; coinciding images
    /// accumulate with their orientation signs.
    pub fn push_forward(
        &self,
        chain: &Chain,
        map: &[usize],
        target: &SimplicialComplex,
    ) -> Result<Chain, ComplexError> {
        self.check_chain(chain)?;
        if map.len() != self.num_vertices() {
            return Err(ComplexError::VertexMapSize { expected: self.num_vertices(), found: map.len() });
        }
        if let Some((v, &w)) = map.iter().enumerate().find(|(_, &w)| w >= target.num_vertices()) {
            return Err(ComplexError::VertexMapRange(v, w));
        }
        let mut out = Chain::zero(chain.dim, chain.ring);
        for (&cell, m) in &chain.coeffs {
            let mut image: Vec<usize> = self.cells[chain.dim][cell].iter().map(|&v| map[v]).collect();
            let sign = sort_with_sign(&mut image);
            if image.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let id = target.cell_id(&image).ok_or(ComplexError::MissingImage(image))?;
            out.add_term(id, if sign > 0 { m.clone() } else { -m.clone() });
        }
        Ok(out)
    }

    /// Push-forward along a map given by new vertex positions.
    ///
    /// Vertices with bit-identical images are merged; the target complex is
    /// the closure of the non-degenerate images of every cell of `self`.
    pub fn push_forward_points(
        &self,
        chain: &Chain,
        positions: &[Vec3],
    ) -> Result<(SimplicialComplex, Chain), ComplexError> {
        if positions.len() != self.num_vertices() {
            return Err(ComplexError::VertexMapSize {
                expected: self.num_vertices(),
                found: positions.len(),
            });
        }
        let mut merged: HashMap<[u64; 3], usize> = HashMap::new();
        let mut points = Vec::new();
        let map: Vec<usize> = positions
            .iter()
            .map(|p| {
                let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
                *merged.entry(key).or_insert_with(|| {
                    points.push(*p);
                    points.len() - 1
                })
            })
            .collect();
        let mut images = Vec::new();
        for k in 1..=MAX_DIM {
            for c in &self.cells[k] {
                let mut img: Vec<usize> = c.iter().map(|&v| map[v]).collect();
                img.sort_unstable();
                img.dedup();
                if img.len() == c.len() {
                    images.push(img);
                }
            }
        }
        let target = SimplicialComplex::new(points, images)?;
        let pushed = self.push_forward(chain, &map, &target)?;
        Ok((target, pushed))
    }

    pub fn to_json(&self) -> ComplexJson {
        // maximal cells only; the closure rebuilds the rest with the same ids
        let mut is_face: [Vec<bool>; MAX_DIM + 1] =
            std::array::from_fn(|k| vec![false; self.num_cells(k)]);
        for k in 1..=MAX_DIM {
            for j in 0..self.num_cells(k) {
                for (f, _) in self.facets(k, j) {
                    is_face[k - 1][f] = true;
                }
            }
        }
        let mut cells = Vec::new();
        for k in 1..=MAX_DIM {
            for (j, c) in self.cells[k].iter().enumerate() {
                if !is_face[k][j] {
                    cells.push(c.clone());
                }
            }
        }
        ComplexJson {
            vertices: self.vertices.iter().map(|p| [p.x, p.y, p.z]).collect(),
            cells,
        }
    }

    pub fn from_json(json: &ComplexJson) -> Result<Self, ComplexError> {
        let vertices = json.vertices.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect();
        SimplicialComplex::new(vertices, &json.cells)
    }
}

fn insert_closure(sets: &mut [BTreeSet<Vec<usize>>; MAX_DIM + 1], simplex: Vec<usize>) {
    let k = simplex.len() - 1;
    if k == 0 || sets[k].contains(&simplex) {
        return;
    }
    for i in 0..simplex.len() {
        let mut facet = simplex.clone();
        facet.remove(i);
        insert_closure(sets, facet);
    }
    sets[k].insert(simplex);
}

/// A subcomplex given by cell ids of a host complex, closed under faces.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Subcomplex {
    cells: [BTreeSet<usize>; MAX_DIM + 1],
}

impl Subcomplex {
    /// Closure of the listed simplices (vertex tuples) inside `host`.
    pub fn from_simplices<S: AsRef<[usize]>>(
        host: &SimplicialComplex,
        simplices: &[S],
    ) -> Result<Self, ComplexError> {
        let mut sub = Subcomplex::default();
        for s in simplices {
            let s = s.as_ref();
            let id = host.cell_id(s).ok_or_else(|| ComplexError::MissingImage(s.to_vec()))?;
            sub.insert_closed(host, s.len() - 1, id);
        }
        Ok(sub)
    }

    /// Smallest subcomplex containing the support of `chain`.
    pub fn from_support(host: &SimplicialComplex, chain: &Chain) -> Self {
        let mut sub = Subcomplex::default();
        for c in chain.support() {
            sub.insert_closed(host, chain.dim(), c);
        }
        sub
    }

    fn insert_closed(&mut self, host: &SimplicialComplex, k: usize, id: usize) {
        if !self.cells[k].insert(id) || k == 0 {
            return;
        }
        for (f, _) in host.facets(k, id) {
            self.insert_closed(host, k - 1, f);
        }
    }

    pub fn union(&self, other: &Subcomplex) -> Subcomplex {
        Subcomplex {
            cells: std::array::from_fn(|k| self.cells[k].union(&other.cells[k]).copied().collect()),
        }
    }

    pub fn contains(&self, k: usize, id: usize) -> bool {
        self.cells.get(k).is_some_and(|s| s.contains(&id))
    }

    pub fn cells(&self, k: usize) -> &BTreeSet<usize> {
        &self.cells[k]
    }

    /// Checks closure under faces in `host`.
    pub fn is_closed_in(&self, host: &SimplicialComplex) -> bool {
        (1..=MAX_DIM).all(|k| {
            self.cells[k].iter().all(|&c| {
                c < host.num_cells(k) && host.facets(k, c).iter().all(|&(f, _)| self.cells[k - 1].contains(&f))
            })
        })
    }

    /// Whether every term of `chain` sits on a cell of this subcomplex.
    pub fn supports(&self, chain: &Chain) -> bool {
        chain.support().all(|c| self.contains(chain.dim(), c))
    }
}

/// Sparse chain with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    dim: usize,
    ring: Ring,
    coeffs: BTreeMap<usize, BigInt>,
}

impl Chain {
    pub fn zero(dim: usize, ring: Ring) -> Self {
        Chain { dim, ring, coeffs: BTreeMap::new() }
    }

    pub fn from_terms<I, C>(dim: usize, ring: Ring, terms: I) -> Self
    where
        I: IntoIterator<Item = (usize, C)>,
        C: Into<BigInt>,
    {
        let mut c = Chain::zero(dim, ring);
        for (cell, m) in terms {
            c.add_term(cell, m);
        }
        c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    /// Adds `m` to the coefficient of `cell`, dropping the entry if it becomes zero.
    pub fn add_term(&mut self, cell: usize, m: impl Into<BigInt>) {
        let m = m.into();
        if m.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(cell).or_insert_with(BigInt::zero);
        *entry += m;
        let v = self.ring.normalize(std::mem::take(entry));
        if v.is_zero() {
            self.coeffs.remove(&cell);
        } else {
            *entry = v;
        }
    }

    pub fn coeff(&self, cell: usize) -> BigInt {
        self.coeffs.get(&cell).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &BigInt)> + '_ {
        self.coeffs.iter().map(|(&c, m)| (c, m))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn try_add(&self, other: &Chain) -> Result<Chain, ComplexError> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (c, m) in other.terms() {
            out.add_term(c, m.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Chain) -> Result<Chain, ComplexError> {
        self.try_add(&other.scale(-1))
    }

    pub fn scale(&self, k: impl Into<BigInt>) -> Chain {
        let k = k.into();
        Chain::from_terms(self.dim, self.ring, self.terms().map(|(c, m)| (c, m * &k)))
    }

    /// Reduction into `ring`; reducing an integer chain mod `p` is the usual
    /// coefficient map, anything else only relabels.
    pub fn reduce(&self, ring: Ring) -> Chain {
        Chain::from_terms(self.dim, ring, self.terms().map(|(c, m)| (c, m.clone())))
    }

    /// Keeps only terms on cells for which `keep` holds.
    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> Chain {
        Chain {
            dim: self.dim,
            ring: self.ring,
            coeffs: self.coeffs.iter().filter(|(&c, _)| keep(c)).map(|(&c, m)| (c, m.clone())).collect(),
        }
    }

    /// Largest `|m|`, using symmetric representatives for mod-p chains.
    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs.values().map(|m| self.weight(m)).max().unwrap_or_default()
    }

    /// `|m|` as used by mass: absolute value over Z, symmetric representative mod p.
    pub fn weight(&self, m: &BigInt) -> BigInt {
        match self.ring {
            Ring::Integers => m.abs(),
            Ring::Mod(p) => {
                let p = BigInt::from(p);
                let r = m.mod_floor(&p);
                let other = &p - &r;
                r.min(other)
            }
        }
    }

    fn compatible(&self, other: &Chain) -> Result<(), ComplexError> {
        if self.dim != other.dim {
            return Err(ComplexError::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if self.ring != other.ring {
            return Err(ComplexError::RingMismatch(self.ring, other.ring));
        }
        Ok(())
    }

    pub fn to_json(&self) -> ChainJson {
        ChainJson {
            dim: self.dim,
            modulus: self.ring.modulus(),
            terms: self.terms().map(|(c, m)| (c, Coefficient(m.clone()))).collect(),
        }
    }

    pub fn from_json(json: &ChainJson) -> Result<Self, ComplexError> {
        let ring = Ring::from_modulus(json.modulus)?;
        Ok(Chain::from_terms(json.dim, ring, json.terms.iter().map(|(c, m)| (*c, m.0.clone()))))
    }
}

impl std::ops::Add for &Chain {
    type Output = Chain;
    fn add(self, rhs: &Chain) -> Chain {
        self.try_add(rhs).expect("adding incompatible chains")
    }
}

impl std::ops::Sub for &Chain {
    type Output = Chain;
    fn sub(self, rhs: &Chain) -> Chain {
        self.try_sub(rhs).expect("subtracting incompatible chains")
    }
}

impl std::ops::Neg for &Chain {
    type Output = Chain;
    fn neg(self) -> Chain {
        self.scale(-1)
    }
}

/// Per-cell Hausdorff weights: edge lengths and triangle areas.
#[derive(Clone, Debug, PartialEq)]
pub struct CellMeasures {
    pub lengths: Vec<f64>,
    pub areas: Vec<f64>,
}

impl CellMeasures {
    fn weights(&self, dim: usize) -> Result<&[f64], ComplexError> {
        match dim {
            1 => Ok(&self.lengths),
            2 => Ok(&self.areas),
            d => Err(ComplexError::NoMeasure(d)),
        }
    }
}

/// `Σ |m(c)| · |c|` summed in cell-id order.
pub fn mass(chain: &Chain, measures: &CellMeasures) -> Result<f64, ComplexError> {
    let w = measures.weights(chain.dim)?;
    let mut total = 0.0;
    for (c, m) in chain.terms() {
        let weight = w.get(c).ok_or(ComplexError::CellOutOfRange { dim: chain.dim, cell: c, count: w.len() })?;
        total += chain.weight(m).to_f64().unwrap_or(f64::INFINITY) * weight;
    }
    Ok(total)
}

/// `Σ_{m(c) ≠ 0} |c|`: the measure of the support, ignoring multiplicity.
pub fn size(chain: &Chain, measures: &CellMeasures) -> Result<f64, ComplexError> {
    let w = measures.weights(chain.dim)?;
    let mut total = 0.0;
    for c in chain.support() {
        total += w.get(c).ok_or(ComplexError::CellOutOfRange { dim: chain.dim, cell: c, count: w.len() })?;
    }
    Ok(total)
}

/// JSON form of a complex: vertex coordinates and (maximal) cells as vertex-id lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub vertices: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
}

/// JSON form of a chain: `terms` is a list of `[cell id, coefficient]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainJson {
    pub dim: usize,
    #[serde(default)]
    pub modulus: u32,
    pub terms: Vec<(usize, Coefficient)>,
}

/// Integer coefficient; written as a JSON number when it fits in `i64` and
/// as a decimal string otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coefficient(pub BigInt);

impl Serialize for Coefficient {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(Coefficient(BigInt::from(v))),
            Repr::Text(s) => s
                .parse::<BigInt>()
                .map(Coefficient)
                .map_err(|_| serde::de::Error::custom(ComplexError::BadCoefficient(s))),
        }
    }
}

/// `1` as a coefficient, for builders.
pub fn one() -> BigInt {
    BigInt::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> SimplicialComplex {
        SimplicialComplex::new(
            vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)],
            [[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn closure_and_ids() {
        let k = triangle();
        assert_eq!(k.num_cells(0), 3);
        assert_eq!(k.num_cells(1), 3);
        assert_eq!(k.num_cells(2), 1);
        assert_eq!(k.cells(1), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(k.cell_id(&[2, 0]), Some(1));
    }

    #[test]
    fn triangle_boundary_signs() {
        let k = triangle();
        let t = Chain::from_terms(2, Ring::Integers, [(0, 1)]);
        let b = k.boundary(&t).unwrap();
        // [0,1,2] -> [1,2] - [0,2] + [0,1]
        assert_eq!(b.coeff(k.cell_id(&[1, 2]).unwrap()), BigInt::from(1));
        assert_eq!(b.coeff(k.cell_id(&[0, 2]).unwrap()), BigInt::from(-1));
        assert_eq!(b.coeff(k.cell_id(&[0, 1]).unwrap()), BigInt::from(1));
        assert!(k.boundary(&b).unwrap().is_zero());
    }

    #[test]
    fn boundary_of_point_is_error() {
        let k = triangle();
        let p = Chain::from_terms(0, Ring::Integers, [(0, 1)]);
        assert_eq!(k.boundary(&p), Err(ComplexError::BoundaryOfPoint));
    }

    #[test]
    fn mass_and_size_of_double_triangle() {
        let k = triangle();
        let m = k.measures();
        assert!((m.areas[0] - 0.5).abs() < 1e-15);
        let t = Chain::from_terms(2, Ring::Integers, [(0, 2)]);
        assert_eq!(mass(&t, &m).unwrap(), 1.0);
        assert_eq!(size(&t, &m).unwrap(), 0.5);
        let empty = Chain::zero(2, Ring::Integers);
        assert_eq!(mass(&empty, &m).unwrap(), 0.0);
        assert_eq!(size(&empty, &m).unwrap(), 0.0);
    }

    #[test]
    fn mod_p_coefficients_are_canonical() {
        let mut c = Chain::zero(1, Ring::Mod(3));
        c.add_term(0, -1);
        assert_eq!(c.coeff(0), BigInt::from(2));
        c.add_term(0, 1);
        assert!(c.is_zero());
        let c = Chain::from_terms(2, Ring::Mod(5), [(0, 3)]);
        // symmetric representative of 3 mod 5 is 2
        assert_eq!(c.weight(&c.coeff(0)), BigInt::from(2));
    }

    #[test]
    fn rejects_bad_input() {
        let pts = vec![Vec3::zeros(), Vec3::x(), 2.0 * Vec3::x()];
        assert!(matches!(
            SimplicialComplex::new(pts.clone(), [[0, 1, 2]]),
            Err(ComplexError::DegenerateTriangle(_))
        ));
        assert!(matches!(SimplicialComplex::new(pts.clone(), [[0, 3]]), Err(ComplexError::VertexOutOfRange(..))));
        assert!(matches!(SimplicialComplex::new(pts, [[0, 0]]), Err(ComplexError::RepeatedVertex(_))));
        assert!(Ring::from_modulus(4).is_err());
    }

    #[test]
    fn folding_map_cancels() {
        // two triangles of equal area sharing edge [0,1], folded onto each other
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
        ];
        let k = SimplicialComplex::new(pts, [[0, 1, 2], [0, 1, 3]]).unwrap();
        let t = Chain::from_terms(2, Ring::Integers, [(0, 1), (1, -1)]);
        let pushed = k.push_forward(&t, &[0, 1, 2, 2], &k).unwrap();
        assert!(pushed.is_zero());
        let id = k.push_forward(&t, &[0, 1, 2, 3], &k).unwrap();
        assert_eq!(id, t);
    }

    #[test]
    fn json_round_trip_preserves_ids() {
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let k = SimplicialComplex::new(pts, [vec![0, 1, 2], vec![0, 3], vec![1, 3]]).unwrap();
        let text = serde_json::to_string(&k.to_json()).unwrap();
        let back = SimplicialComplex::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        for d in 0..=3 {
            assert_eq!(k.cells(d), back.cells(d));
        }
        let c = Chain::from_terms(1, Ring::Integers, [(0, 3), (2, -7)]);
        let text = serde_json::to_string(&c.to_json()).unwrap();
        assert_eq!(text, r#"{"dim":1,"modulus":0,"terms":[[0,3],[2,-7]]}"#);
        let back: ChainJson = serde_json::from_str(&text).unwrap();
        assert_eq!(Chain::from_json(&back).unwrap(), c);
    }
}
