//! Invariant lattices of order-p non-symplectic automorphisms on K3 surfaces
//! cut out by invertible polynomials `x^p + f(y,z,w)`, and the lattice
//! mirror check for their Berglund–Hübsch–Chiodo–Ruan duals.

pub mod diaggrp;
pub mod error;
pub mod fixedlocus;
pub mod invpoly;
pub mod lattices;
pub mod pipeline;
pub mod weights;

pub use error::{Error, Result};
