//! Exact combinatorics of log regular models over a discretely valued field.
//!
//! The crate models the fan of a log regular model as glued cone charts
//! decorated with Euler characteristics, and evaluates the numerical
//! invariants that can be read off from it: saturation indices, traces of
//! powers of the tame monodromy operator, the monodromy zeta function, the
//! rational volume and the error term. Log blow-ups are fan subdivisions; all
//! invariants are preserved by them, which the test suites use as a
//! model-independence check.
//!
//! Layering, bottom up:
//!
//! * [`lattice`]: sublattices of `Z^n`, Hermite and Smith normal forms.
//! * [`monoid`]: affine monoids, saturation, faces, pushouts along `N -> (1/d)N`.
//! * [`cone`]: rational polyhedral cones, complexes, stellar subdivision, resolution.
//! * [`fan`]: decorated models, validation, points, log blow-ups.
//! * [`invariants`]: traces, volume, zeta factorization, error term.
//!
//! Everything is exact. The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod bounds;
mod error;
mod geometry;
mod linalg;

pub mod cone;
pub mod fan;
pub mod invariants;
pub mod lattice;
pub mod monoid;
pub mod series;

pub use bounds::Bounds;
pub use error::{Error, Result};

/// An integer vector in a lattice `Z^n` or its dual.
pub type IntVec = alloc::vec::Vec<i64>;
