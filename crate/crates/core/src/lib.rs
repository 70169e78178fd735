//! Models of active motion that emerges from dissipation in open quantum systems.
//!
//! * [`lattice`]: a particle hopping on a chain with coherent and
//!   environment-assisted hops, including the Liouvillian skin effect.
//! * [`qaoup`]: an overdamped particle in an Ohmic bath driven by colored
//!   classical noise.
//! * [`spin_orbit`]: a particle whose velocity is set by a pumped two-level
//!   system, solved through its closed moment hierarchy.
//! * [`trajectories`]: quantum-jump and diffusive unravelings of that model.
//! * [`momentum_kick`]: the variant where the spin emits directional kicks.
//! * [`classical`]: run-and-tumble, active Brownian and active OU baselines.

pub mod classical;
pub mod error;
pub mod lattice;
pub mod momentum_kick;
pub mod numerics;
pub mod qaoup;
mod series;
pub mod spin_orbit;
pub mod trajectories;

pub use error::{Error, Result};
pub use series::{check_grid, linear_grid, log_grid, TimeSeries};
