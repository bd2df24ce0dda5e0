//! Energy-stable summation-by-parts method of lines on moving meshes.
//!
//! The crate discretizes time-dependent PDEs on deforming domains in
//! arbitrary Lagrangian-Eulerian form: diagonal-norm SBP operators coupled
//! across blocks with SAT penalties, a skew-symmetric material-derivative
//! operator, a square-root Jacobian ODE integrated with the same Runge-Kutta
//! scheme as the solution, weak boundary conditions through a lifting
//! operator, and an eigenvalue audit of the discrete energy condition.

pub mod ale;
pub mod audit;
pub mod boundary;
pub mod curvilinear;
pub mod eigen;
pub mod error;
pub mod experiment;
pub mod filter;
pub mod integrator;
pub mod mesh;
pub mod sbp;

pub use error::{AleError, Result};
pub use sbp::{MultiblockOperator, SbpDerivative, SbpOperator1D, SbpOrder};
