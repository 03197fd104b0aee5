//! Numerical kernel for the Poincaré upper half-space model of hyperbolic
//! space: closed-form Riemannian data (metric, Christoffel symbols, Ricci
//! curvature), order-2 jet arithmetic with a finite-difference oracle, a small
//! expression language for user-defined scalar and vector fields, residual
//! operators for Ricci, Ricci–Bourguignon, and conformally weighted soliton
//! equations, and a fixed-step geodesic integrator.
//!
//! The crate is `no_std` (with `alloc`); all floating-point transcendentals
//! come from `libm`. Everything here is pure value arithmetic: no IO, no
//! global state, safe to call from any number of threads.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod expr;
pub mod fields;
pub mod geodesic;
pub mod geometry;
pub mod jet;
pub mod soliton;

pub use error::{Error, ParseError};
pub use geometry::{Christoffels, Point, SymTensor2};
pub use jet::Jet2;
