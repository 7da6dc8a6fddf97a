//! Spectral-Galerkin simulation of the Landau–Lifshitz–Gilbert equation
//! coupled to spin-accumulation transport on boxes with homogeneous Neumann
//! boundary conditions.

pub mod compat;
pub mod diagnostics;
pub mod error;
pub mod fd;
pub mod io;
pub mod par;
pub mod physics;
pub mod solver;
pub mod spectral;
pub mod types;
pub mod vec3;

pub use error::{Error, Result};
