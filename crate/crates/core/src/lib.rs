//! Spherically symmetric Vlasov-Poisson collapse toolkit.
//!
//! The library is organized around the ingredients of a near-collapsing
//! kinetic configuration:
//!
//! * [`dust`] — closed-form dynamics of the collapsing scale factor `a(t)`
//!   and of the core boundary `r_eps(t)`, including collapse times.
//! * [`homogeneous`] — the isotropic ansatz profile, its velocity scaling,
//!   and the exact spatially homogeneous solution with its macroscopic
//!   fields.
//! * [`initial`] — smooth cut-off, compactly supported initial data, mass
//!   bookkeeping, and Monte-Carlo sampling into particle ensembles.
//! * [`field`] / [`sim`] — the radial prefix-sum gravity solver and the
//!   kick-drift-kick particle pusher with snapshot recording.
//! * [`characteristics`] — backward tracing of phase-space points through a
//!   recorded field history, giving pointwise evaluation of `f`.
//! * [`diagnostics`] / [`suites`] — energies, density and `m/r` suprema,
//!   core-agreement and boundary checks, and tracer-based trajectory
//!   property suites.
//!
//! All quantities are dimensionless with `G = 1`; the homogeneous state has
//! density `3/(4 pi a^3)`.

pub mod characteristics;
pub mod diagnostics;
pub mod dust;
pub mod ensemble;
pub mod error;
pub mod field;
pub mod geometry;
pub mod homogeneous;
pub mod initial;
pub mod output;
pub mod quad;
pub mod sim;
pub mod suites;

pub use error::{Error, Result};
pub use geometry::Vec3;
