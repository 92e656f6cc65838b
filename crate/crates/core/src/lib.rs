//! A small laboratory for Plateau's problem.
//!
//! The crate carries several discrete formulations of the soap-film problem
//! side by side so they can be checked against each other:
//!
//! * [`complex`]: simplicial complexes with exact integer (or mod p) chains,
//!   boundary, mass, size and push-forward.
//! * [`homology`]: whether boundary cycles bound inside a candidate set.
//! * [`chain_solver`]: exact mass / size minimization over bounded integer chains.
//! * [`douglas`]: boundary energy, harmonic extension and parameterized area.
//! * [`sliding`]: area descent on non-manifold triangle meshes whose boundary
//!   vertices slide on prescribed pieces, plus a local minimality probe.
//! * [`grid`]: cubical grids, radial cell projections and face-set minimization.
//! * [`measure`]: covering estimates of Hausdorff measure for point samples.
//! * [`reference`]: analytic references (catenoids, Y-films, cone areas).
//! * [`scene`]: scene files, initial surfaces and OBJ I/O.

pub mod boundary;
pub mod chain_solver;
pub mod complex;
pub mod configurations;
pub mod douglas;
pub mod grid;
pub mod homology;
pub mod intlin;
pub mod measure;
pub mod reference;
pub mod scene;
pub mod sliding;

pub use nalgebra::Vector3;

/// Points and displacement vectors in 3-space.
pub type Vec3 = Vector3<f64>;
