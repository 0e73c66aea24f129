//! Finite-volume solver and a posteriori certifier for the parabolic-elliptic
//! Keller-Segel system with power-law diffusion on periodic 1D/2D meshes.
//!
//! A run advances the positivity-preserving upwind scheme, solves the P1
//! chemoattractant problem on the dual mesh, bounds the H⁻¹ norm of the
//! reconstruction residual slab by slab, and evaluates the conditional
//! stability estimate to decide whether an error bound can be certified.
//!
//! ```
//! use ks_certify::harness::{run, RunConfig};
//!
//! let cfg = RunConfig { dim: 1, n: 32, ..RunConfig::default() };
//! let record = run(&cfg).unwrap();
//! // row 0 is the initial state
//! assert_eq!(record.rows.len(), 33);
//! assert!(record.rows.iter().all(|r| r.min_rho >= 0.0));
//! ```

pub mod chemo;
pub mod error;
pub mod fields;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod power;
pub mod reconstruct;
pub mod residual;
pub mod scheme;
pub mod stability;

pub use error::{Error, Result};
pub use fields::{CellField, NodalField, Representation};
pub use mesh::{Mesh, Mesh1D, Mesh2D};
