//! Reifenberg-style admissibility: do the chosen boundary cycles bound inside
//! a candidate set?
//!
//! On a finite simplicial complex the question for a cycle `γ` is whether
//! `∂σ = γ` has a solution `σ` with coefficients in the chosen ring. Over the
//! integers this is decided with a Smith normal form of the boundary matrix,
//! over `Z/p` with field elimination.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::complex::{Chain, ChainJson, ComplexError, Ring, SimplicialComplex, Subcomplex};
use crate::intlin::{solve_integer, solve_mod_p, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomologyError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("target {0} is not a cycle; only cycles can be boundaries")]
    NotACycle(String),
    #[error("generator {0} is not supported on the boundary subcomplex")]
    NotOnBoundary(String),
    #[error("boundary subcomplex is not closed under faces in the ambient complex")]
    NotASubcomplex,
}

/// Dense matrix of `∂_k : C_k → C_{k-1}`.
pub fn boundary_matrix(complex: &SimplicialComplex, k: usize) -> IntMatrix {
    IntMatrix::from_sparse_columns(complex.num_cells(k - 1), &complex.boundary_columns(k))
}

/// Finds `σ` with `∂σ = target` in `complex`, over `ring`.
///
/// Returns `Ok(None)` when no such chain exists. The target must be a cycle.
pub fn solve_boundary(
    target: &Chain,
    complex: &SimplicialComplex,
    ring: Ring,
) -> Result<Option<Chain>, HomologyError> {
    complex.check_chain(target)?;
    let target = target.reduce(ring);
    if target.dim() >= 1 && !complex.boundary(&target)?.is_zero() {
        return Err(HomologyError::NotACycle(format!("{}-chain with {} terms", target.dim(), target.len())));
    }
    let k = target.dim() + 1;
    if target.is_zero() {
        return Ok(Some(Chain::zero(k, ring)));
    }
    if complex.num_cells(k) == 0 {
        return Ok(None);
    }
    let a = boundary_matrix(complex, k);
    let mut b = vec![BigInt::from(0); a.rows()];
    for (c, m) in target.terms() {
        b[c] = m.clone();
    }
    let sigma = match ring {
        Ring::Integers => solve_integer(&a, &b).map(|x| Chain::from_terms(k, ring, x.into_iter().enumerate())),
        Ring::Mod(p) => solve_mod_p(&a, &b, p).map(|x| Chain::from_terms(k, ring, x.into_iter().enumerate())),
    };
    if let Some(s) = &sigma {
        debug_assert_eq!(complex.boundary(s).unwrap(), target);
    }
    Ok(sigma)
}

/// Named boundary cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub name: String,
    pub cycle: Chain,
}

/// Ambient complex `F`, boundary subcomplex `Γ ⊂ F`, generator cycles on `Γ`, ring.
#[derive(Clone, Debug)]
pub struct AdmissibilityProblem {
    pub ambient: SimplicialComplex,
    pub boundary: Subcomplex,
    pub generators: Vec<Generator>,
    pub ring: Ring,
}

impl AdmissibilityProblem {
    pub fn validate(&self) -> Result<(), HomologyError> {
        if !self.boundary.is_closed_in(&self.ambient) {
            return Err(HomologyError::NotASubcomplex);
        }
        for g in &self.generators {
            self.ambient.check_chain(&g.cycle)?;
            if !self.boundary.supports(&g.cycle) {
                return Err(HomologyError::NotOnBoundary(g.name.clone()));
            }
            if g.cycle.dim() >= 1 && !self.ambient.boundary(&g.cycle.reduce(self.ring))?.is_zero() {
                return Err(HomologyError::NotACycle(g.name.clone()));
            }
        }
        Ok(())
    }
}

/// Per-generator outcome of an admissibility check.
#[derive(Clone, Debug, Serialize)]
pub struct GeneratorVerdict {
    pub name: String,
    pub bounds: bool,
    /// Filling chain `σ` with `∂σ = γ` when one exists.
    pub witness: Option<ChainJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub ring: Ring,
    pub admissible: bool,
    pub generators: Vec<GeneratorVerdict>,
}

impl AdmissibilityReport {
    pub fn witnesses(&self) -> Vec<Option<Chain>> {
        self.generators
            .iter()
            .map(|g| g.witness.as_ref().map(|w| Chain::from_json(w).expect("witness chain is well formed")))
            .collect()
    }
}

/// Admissible iff every generator bounds in the ambient complex.
pub fn reifenberg_admissible(problem: &AdmissibilityProblem) -> Result<AdmissibilityReport, HomologyError> {
    problem.validate()?;
    let verdicts: Result<Vec<GeneratorVerdict>, HomologyError> = problem
        .generators
        .par_iter()
        .map(|g| {
            let sigma = solve_boundary(&g.cycle, &problem.ambient, problem.ring)?;
            Ok(GeneratorVerdict { name: g.name.clone(), bounds: sigma.is_some(), witness: sigma.map(|s| s.to_json()) })
        })
        .collect();
    let generators = verdicts?;
    Ok(AdmissibilityReport {
        ring: problem.ring,
        admissible: generators.iter().all(|g| g.bounds),
        generators,
    })
}
