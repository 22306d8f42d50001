//! Exact computation and verification of Poisson structures on the triangular
//! chart of the Hilbert scheme of points in the plane.
//!
//! The chart of size `k` is coordinatized by `(k+1) x k` matrices `E`, with
//! `E[i][j]` the entry in column `i` and row `j`. Everything is computed over
//! the rationals with no floating point.

#![allow(clippy::needless_range_loop, clippy::suspicious_arithmetic_impl)]

pub mod brackets;
pub mod charleaves;
pub mod charts;
pub mod exactalg;
pub mod holonomy;
pub mod ideals;
pub mod orbits;
pub mod random;
pub mod toric;
pub mod verify;
pub mod young;
