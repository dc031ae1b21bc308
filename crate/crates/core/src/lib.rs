//! Numerical laboratory for the abcd Boussinesq system in its Hamiltonian
//! generic regime (b = d > 0, a, c < 0).
//!
//! The crate is organized around four concerns:
//!
//! * [`atlas`] — parameter-space algebra: admissibility of (a, b, c, d),
//!   the (nu, b) chart, the dispersion-like region, (alpha, beta) band
//!   selection and the virial coefficients, plus the linear dispersion
//!   relation and its group velocity.
//! * [`spectral`] — periodic grid, Fourier differentiation, the Helmholtz
//!   inverse (1 - dxx)^-1, analytic weight families and quadrature.
//! * [`sim`] — the normalized two-component evolution (b = d = 1), explicit
//!   RK4 time stepping, canonical initial data and run orchestration.
//! * [`diagnostics`] — conserved quantities, virial functionals with their
//!   exact time-derivative decompositions, localized energy and local norms.
//!
//! [`verify`] bundles the crate-wide property suite behind a machine-readable
//! report, and [`states`] provides seeded smooth random states used by the
//! identity checks.

// negated comparisons like `!(x > 0.0)` are NaN-rejecting guards
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atlas;
pub mod diagnostics;
pub mod sim;
pub mod spectral;
pub mod states;
pub mod verify;

pub use atlas::{AlphaBeta, NormalizedParameters, NuB, PhysicalParameters, VirialCoefficients};
pub use sim::{FieldPair, SimulationConfig};
pub use spectral::{Field, Grid, SpectralOps, WeightFamily, WeightKind};
