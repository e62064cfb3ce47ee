//! Finite-element simulation of a coupled SIR / waterborne pathogen /
//! incompressible Navier–Stokes system on rectangles.
//!
//! Host compartments `S`, `I`, `R` and the pathogen concentration `C` are
//! discretised with continuous P1 elements; the fluid velocity uses the MINI
//! element (P1 enriched with a cubic bubble) paired with P1 pressure. Time
//! integration is backward Euler with a Picard (fixed-point) inner loop for
//! the couplings.
//!
//! All numerical kernels are generic over [`Real`] (`f32` or `f64`). The
//! aliases at the crate root pin the common `f64` instantiation.

pub mod error;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod model;
pub mod scalar;
pub mod sparse;
pub mod timestepper;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision triangulation.
pub type Mesh = mesh::TriMesh<f64>;
/// Single-precision triangulation.
pub type Mesh32 = mesh::TriMesh<f32>;
/// Double-precision CSR matrix.
pub type Matrix = sparse::CsrMatrix<f64>;
/// Single-precision CSR matrix.
pub type Matrix32 = sparse::CsrMatrix<f32>;
/// Double-precision model parameters.
pub type Params = model::ModelParams<f64>;
/// Double-precision simulation state.
pub type SimState = timestepper::State<f64>;
