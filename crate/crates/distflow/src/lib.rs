//! Numerical verification laboratory for the geometry of the distance
//! function between two disjoint hypersurfaces, where one surface is minimal
//! or both evolve by mean curvature flow.
//!
//! The library is organized as a pipeline:
//!
//! * [`scalar`]: closed-form scalar lemmas (the rational function whose
//!   supremum controls the distance Laplacian, constrained minima,
//!   dimensional constants, the power chain rule), each validated against a
//!   brute-force oracle.
//! * [`geom`]: hypersurface representations, analytic and discrete curvature,
//!   minimal profiles of revolution, mesh operators, OFF I/O.
//! * [`dist`]: foot points, the distance jet (gradient and Hessian in closed
//!   form), tangential data along a second hypersurface, translated surfaces.
//! * [`flow`]: mean curvature flow stepping (exact laws for spheres and
//!   cylinders, explicit integration for meshes), material derivatives, heat
//!   operators along a flow, cutoff functions.
//! * [`verify`]: the inequality checks themselves, each evaluated through two
//!   independent computation paths and emitted as residual records.
//! * [`scenario`]: scenario configuration, builtin battery, runners, CSV/JSON
//!   reports and SVG plots.

pub mod dist;
pub mod flow;
pub mod geom;
pub mod real;
pub mod scalar;
pub mod scenario;
pub mod verify;

pub use real::Real;

/// Concrete scalar used by the geometric layers.
pub type Scalar = f64;

/// `FParams` instantiated at the working precision.
pub type FParams = scalar::FParams<Scalar>;

/// Points and vectors in ambient dimension `D` (curves in the plane use
/// `D = 2`, surfaces `D = 3`, the slab catenoid lives in `D = 4`).
pub type Vector<const D: usize> = nalgebra::SVector<Scalar, D>;

/// Square matrix over the ambient space, used for distance Hessians.
pub type Matrix<const D: usize> = nalgebra::SMatrix<Scalar, D, D>;
