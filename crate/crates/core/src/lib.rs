//! Simulation toolkit for indoor visible-light communication with steerable
//! beams.
//!
//! The crate models an optical access point whose light beams can be
//! mechanically steered and focused. It provides, bottom-up:
//!
//! - [`geometry`]: steering-angle parameterization, link geometry, convex
//!   hulls of user positions, and search-grid reduction.
//! - [`channel`]: Lambertian line-of-sight gains, achievable rates, and
//!   SINRs with inter-beam interference and NOMA superposition.
//! - [`steering`]: single-beam steering by exhaustive grid search and by a
//!   sparsity-driven continuous relaxation over the grid simplex.
//! - [`clustering`]: alternating user-clustering / per-cluster steering for
//!   multiple beams.
//! - [`power`]: per-beam power allocation by successive convex
//!   approximation, with a brute-force oracle for small beam counts.
//! - [`noma`]: power-domain NOMA pairing, SIC feasibility, and
//!   power-splitting coefficient optimization.
//! - [`harness`]: scenario configuration, seeded Monte Carlo experiments,
//!   and CSV/JSON report emission.
//!
//! All solvers are deterministic for fixed inputs and seeds; reports are
//! byte-identical regardless of thread count.

pub mod channel;
pub mod clustering;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod noma;
mod optim;
pub mod power;
pub mod steering;

pub use error::{Error, Result};
