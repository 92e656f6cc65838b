//! Exact minimization of mass or size over integer 2-chains with prescribed
//! boundary.
//!
//! All chains with `∂T = S` form an affine lattice `T0 + ker ∂`. The solver
//! finds one particular solution through a Smith normal form, puts a basis of
//! the integer kernel in echelon form, and enumerates lattice coordinates
//! level by level. Echelon form makes every coordinate bounded once the
//! earlier ones are fixed (the pivot cell must stay within the multiplicity
//! bound `M`), so the search is finite and exhaustive. A branch is cut as
//! soon as the cost of the cells it has fully determined exceeds the
//! incumbent.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::complex::{mass, size, CellMeasures, Chain, ChainJson, ComplexError, Ring, SimplicialComplex, Subcomplex};
use crate::intlin::{integer_kernel, solve_integer, IntMatrix};

/// Default multiplicity bound.
pub const DEFAULT_BOUND: u32 = 3;

/// Relative tolerance under which two objective values count as tied.
pub const TIE_RTOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("boundary datum is not a cycle (∂S ≠ 0)")]
    NotACycle,
    #[error("boundary datum must be an integer 1-chain")]
    BadBoundary,
    #[error("multiplicity bound {bound} is below max |S| = {needed}")]
    BoundTooSmall { bound: u32, needed: String },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("lattice coordinates overflow 64-bit search arithmetic")]
    Overflow,
    #[error("search exceeded the node budget of {0}")]
    Budget(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Mass,
    Size,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryMode {
    /// `∂T = S`.
    Exact,
    /// `∂T = S'` with `S − S' = ∂V` for some `V` supported on the 2-cells of
    /// the given subcomplex.
    HomologousOn(Subcomplex),
}

#[derive(Clone, Debug)]
pub struct PlateauChainProblem {
    pub complex: SimplicialComplex,
    pub boundary: Chain,
    pub objective: Objective,
    pub mode: BoundaryMode,
    pub bound: u32,
}

impl PlateauChainProblem {
    pub fn new(complex: SimplicialComplex, boundary: Chain, objective: Objective) -> Self {
        PlateauChainProblem { complex, boundary, objective, mode: BoundaryMode::Exact, bound: DEFAULT_BOUND }
    }

    pub fn with_bound(mut self, bound: u32) -> Self {
        self.bound = bound;
        self
    }

    pub fn with_mode(mut self, mode: BoundaryMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.boundary.dim() != 1 || self.boundary.ring() != Ring::Integers {
            return Err(SolverError::BadBoundary);
        }
        self.complex.check_chain(&self.boundary)?;
        if !self.complex.boundary(&self.boundary)?.is_zero() {
            return Err(SolverError::NotACycle);
        }
        let needed = self.boundary.max_abs_coeff();
        if needed > BigInt::from(self.bound) {
            return Err(SolverError::BoundTooSmall { bound: self.bound, needed: needed.to_string() });
        }
        Ok(())
    }

    fn gamma_cells(&self) -> Vec<usize> {
        match &self.mode {
            BoundaryMode::Exact => Vec::new(),
            BoundaryMode::HomologousOn(g) => g.cells(2).iter().copied().collect(),
        }
    }
}

/// Evidence that the search was exhaustive.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Certificate {
    pub objective: Option<Objective>,
    pub bound: u32,
    /// Rank of the integer kernel the search ran over.
    pub lattice_rank: usize,
    pub nodes: u64,
    pub leaves: u64,
    pub pruned: u64,
    /// True when the whole bounded lattice was covered (always, unless a budget stopped it).
    pub exhaustive: bool,
}

#[derive(Clone, Debug)]
pub struct ChainSolution {
    pub chain: Chain,
    /// `V` with `∂V = S − ∂T` in homologous mode.
    pub homology_witness: Option<Chain>,
    pub value: f64,
    pub certificate: Certificate,
}

/// Per-column admissibility and cost for the lattice search.
struct SearchSpec {
    costs: Vec<f64>,
    /// Columns counted by the tie-break and the objective (the `T` part).
    primary: usize,
    objective: Objective,
    bound: i64,
    forbid_zero: bool,
}

struct Search<'a> {
    spec: &'a SearchSpec,
    basis: Vec<Vec<i64>>,
    pivots: Vec<usize>,
    cur: Vec<i64>,
    best: Option<(f64, Vec<i64>)>,
    cert: Certificate,
    budget: u64,
}

fn cost_of(spec: &SearchSpec, c: usize, v: i64) -> f64 {
    if c >= spec.primary || v == 0 {
        return 0.0;
    }
    match spec.objective {
        Objective::Mass => v.unsigned_abs() as f64 * spec.costs[c],
        Objective::Size => spec.costs[c],
    }
}

fn admissible(spec: &SearchSpec, v: i64) -> bool {
    v.abs() <= spec.bound && !(spec.forbid_zero && v == 0)
}

/// Strictly better value, or tied value with lexicographically smaller coefficients.
fn improves(value: f64, coeffs: &[i64], best: &Option<(f64, Vec<i64>)>, primary: usize) -> bool {
    match best {
        None => true,
        Some((bv, bc)) => {
            let tol = TIE_RTOL * bv.abs().max(1.0);
            if value < bv - tol {
                true
            } else if value > bv + tol {
                false
            } else {
                coeffs[..primary].cmp(&bc[..primary]) == Ordering::Less
            }
        }
    }
}

impl Search<'_> {
    fn segment(&self, level: usize) -> std::ops::Range<usize> {
        let start = if level == 0 { 0 } else { self.pivots[level - 1] };
        let end = self.pivots.get(level).copied().unwrap_or(self.cur.len());
        start..end
    }

    /// Checks and prices the columns fixed once `level` coordinates are assigned.
    fn settle(&self, level: usize) -> Option<f64> {
        let mut cost = 0.0;
        for c in self.segment(level) {
            let v = self.cur[c];
            if !admissible(self.spec, v) {
                return None;
            }
            cost += cost_of(self.spec, c, v);
        }
        Some(cost)
    }

    fn prune(&self, partial: f64) -> bool {
        match &self.best {
            Some((bv, _)) => partial > bv + TIE_RTOL * bv.abs().max(1.0),
            None => false,
        }
    }

    fn run(&mut self) -> Result<(), SolverError> {
        self.cert.nodes += 1;
        match self.settle(0) {
            Some(cost) => self.descend(0, cost),
            None => {
                self.cert.pruned += 1;
                Ok(())
            }
        }
    }

    fn descend(&mut self, level: usize, partial: f64) -> Result<(), SolverError> {
        if self.prune(partial) {
            self.cert.pruned += 1;
            return Ok(());
        }
        if level == self.basis.len() {
            self.cert.leaves += 1;
            if improves(partial, &self.cur, &self.best, self.spec.primary) {
                self.best = Some((partial, self.cur.clone()));
            }
            return Ok(());
        }
        if self.cert.nodes >= self.budget {
            return Err(SolverError::Budget(self.budget));
        }
        let p = self.pivots[level];
        let d = self.basis[level][p];
        let base = self.cur[p];
        let m = self.spec.bound;
        let lo = div_ceil(-m - base, d);
        let hi = div_floor(m - base, d);
        let mut candidates: Vec<i64> = (lo..=hi).collect();
        candidates.sort_by_key(|z| ((base + z * d).abs(), base + z * d));
        for z in candidates {
            self.cert.nodes += 1;
            self.shift(level, z)?;
            match self.settle(level + 1) {
                Some(cost) => self.descend(level + 1, partial + cost)?,
                None => self.cert.pruned += 1,
            }
            self.shift(level, -z)?;
        }
        Ok(())
    }

    fn shift(&mut self, level: usize, z: i64) -> Result<(), SolverError> {
        if z == 0 {
            return Ok(());
        }
        let p = self.pivots[level];
        for c in p..self.cur.len() {
            let k = self.basis[level][c];
            if k != 0 {
                let delta = k.checked_mul(z).ok_or(SolverError::Overflow)?;
                self.cur[c] = self.cur[c].checked_add(delta).ok_or(SolverError::Overflow)?;
            }
        }
        Ok(())
    }
}

fn div_floor(a: i64, b: i64) -> i64 {
    num_integer::Integer::div_floor(&a, &b)
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -div_floor(-a, b)
}

fn to_i64(v: &BigInt) -> Result<i64, SolverError> {
    v.to_i64().ok_or(SolverError::Overflow)
}

/// Runs the bounded lattice search for `A·x = b` and returns the best `x`.
fn lattice_search(
    a: &IntMatrix,
    b: &[BigInt],
    spec: &SearchSpec,
    budget: u64,
) -> Result<(Option<(f64, Vec<i64>)>, Certificate), SolverError> {
    let mut cert = Certificate { bound: spec.bound as u32, exhaustive: true, ..Default::default() };
    let Some(x0) = solve_integer(a, b) else {
        return Err(SolverError::Infeasible("no integer chain has the prescribed boundary".into()));
    };
    let kernel = integer_kernel(a);
    cert.lattice_rank = kernel.rank();
    let basis = kernel
        .rows
        .iter()
        .map(|r| r.iter().map(to_i64).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let cur = x0.iter().map(to_i64).collect::<Result<Vec<_>, _>>()?;
    let mut search = Search { spec, basis, pivots: kernel.pivots, cur, best: None, cert, budget };
    search.run()?;
    Ok((search.best, search.cert))
}

fn rhs_of(chain: &Chain, rows: usize) -> Vec<BigInt> {
    let mut b = vec![BigInt::zero(); rows];
    for (c, m) in chain.terms() {
        b[c] = m.clone();
    }
    b
}

/// Assembles `[∂₂ | ∂₂ restricted to Γ]` for the (possibly homologous) problem.
fn system(problem: &PlateauChainProblem) -> (IntMatrix, Vec<usize>) {
    let k = &problem.complex;
    let mut columns = k.boundary_columns(2);
    let gamma = problem.gamma_cells();
    for &g in &gamma {
        columns.push(k.facets(2, g));
    }
    (IntMatrix::from_sparse_columns(k.num_cells(1), &columns), gamma)
}

fn solve(problem: &PlateauChainProblem, objective: Objective) -> Result<ChainSolution, SolverError> {
    problem.validate()?;
    let k = &problem.complex;
    let measures = k.measures();
    let (a, gamma) = system(problem);
    let n = k.num_cells(2);
    let mut costs = measures.areas.clone();
    costs.extend(std::iter::repeat_n(0.0, gamma.len()));
    let spec = SearchSpec { costs, primary: n, objective, bound: problem.bound as i64, forbid_zero: false };
    let (best, mut cert) = lattice_search(&a, &rhs_of(&problem.boundary, a.rows()), &spec, u64::MAX)?;
    cert.objective = Some(objective);
    let Some((value, x)) = best else {
        return Err(SolverError::Infeasible(format!(
            "no chain with the prescribed boundary has all multiplicities within {}",
            problem.bound
        )));
    };
    let chain = Chain::from_terms(2, Ring::Integers, x[..n].iter().enumerate().map(|(c, &m)| (c, m)));
    let homology_witness = match problem.mode {
        BoundaryMode::Exact => None,
        BoundaryMode::HomologousOn(_) => Some(Chain::from_terms(
            2,
            Ring::Integers,
            gamma.iter().zip(&x[n..]).map(|(&c, &m)| (c, m)),
        )),
    };
    Ok(ChainSolution { chain, homology_witness, value, certificate: cert })
}

/// Minimal-mass chain among those with the prescribed boundary and `|m| ≤ M`.
pub fn solve_mass_min(problem: &PlateauChainProblem) -> Result<ChainSolution, SolverError> {
    solve(problem, Objective::Mass)
}

/// Minimal-size chain among those with the prescribed boundary and `|m| ≤ M`.
pub fn solve_size_min(problem: &PlateauChainProblem) -> Result<ChainSolution, SolverError> {
    solve(problem, Objective::Size)
}

/// Dispatches on the problem's objective.
pub fn solve_problem(problem: &PlateauChainProblem) -> Result<ChainSolution, SolverError> {
    solve(problem, problem.objective)
}

/// Exact audit of a candidate chain against a problem.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    /// Boundary condition holds (exactly, or up to `∂V` on `Γ` in homologous mode).
    pub boundary_ok: bool,
    /// `∂T − S`.
    pub residual: ChainJson,
    pub homology_witness: Option<ChainJson>,
    pub within_bound: bool,
    pub mass: f64,
    pub size: f64,
    pub support: Vec<usize>,
}

impl VerifyReport {
    pub fn passes(&self) -> bool {
        self.boundary_ok && self.within_bound
    }
}

pub fn verify_chain(problem: &PlateauChainProblem, chain: &Chain) -> Result<VerifyReport, SolverError> {
    let k = &problem.complex;
    if chain.dim() != 2 {
        return Err(ComplexError::DimensionMismatch { expected: 2, found: chain.dim() }.into());
    }
    let residual = k.boundary(chain)?.try_sub(&problem.boundary.reduce(chain.ring()))?;
    let (boundary_ok, witness) = if residual.is_zero() {
        (true, None)
    } else {
        match &problem.mode {
            BoundaryMode::Exact => (false, None),
            BoundaryMode::HomologousOn(g) => {
                let cells: Vec<usize> = g.cells(2).iter().copied().collect();
                let columns: Vec<_> = cells.iter().map(|&c| k.facets(2, c)).collect();
                let a = IntMatrix::from_sparse_columns(k.num_cells(1), &columns);
                let target = residual.scale(-1);
                match solve_integer(&a, &rhs_of(&target, a.rows())) {
                    Some(v) => {
                        let v = Chain::from_terms(2, Ring::Integers, cells.iter().copied().zip(v));
                        debug_assert_eq!(k.boundary(&v).unwrap(), target);
                        (true, Some(v))
                    }
                    None => (false, None),
                }
            }
        }
    };
    let measures: CellMeasures = k.measures();
    Ok(VerifyReport {
        boundary_ok,
        residual: residual.to_json(),
        homology_witness: witness.map(|w| w.to_json()),
        within_bound: chain.max_abs_coeff() <= BigInt::from(problem.bound),
        mass: mass(chain, &measures)?,
        size: size(chain, &measures)?,
        support: chain.support().collect(),
    })
}

/// A 2-chain whose boundary vanishes away from `rel`, with every 2-cell
/// carrying a nonzero multiplicity of absolute value at most `bound`.
/// Among those, the one of least mass (ties broken lexicographically).
pub fn full_support_relative_cycle(
    complex: &SimplicialComplex,
    rel: &Subcomplex,
    bound: u32,
) -> Result<Option<(Chain, Certificate)>, SolverError> {
    let rows: Vec<usize> = (0..complex.num_cells(1)).filter(|&e| !rel.contains(1, e)).collect();
    let mut index = vec![usize::MAX; complex.num_cells(1)];
    for (i, &r) in rows.iter().enumerate() {
        index[r] = i;
    }
    let columns: Vec<Vec<(usize, i32)>> = complex
        .boundary_columns(2)
        .into_iter()
        .map(|col| col.into_iter().filter(|&(e, _)| index[e] != usize::MAX).map(|(e, s)| (index[e], s)).collect())
        .collect();
    let a = IntMatrix::from_sparse_columns(rows.len(), &columns);
    let n = complex.num_cells(2);
    let spec = SearchSpec {
        costs: complex.measures().areas,
        primary: n,
        objective: Objective::Mass,
        bound: bound as i64,
        forbid_zero: true,
    };
    let (best, mut cert) = lattice_search(&a, &vec![BigInt::zero(); rows.len()], &spec, u64::MAX)?;
    cert.objective = Some(Objective::Mass);
    Ok(best.map(|(_, x)| (Chain::from_terms(2, Ring::Integers, x.into_iter().enumerate()), cert)))
}
