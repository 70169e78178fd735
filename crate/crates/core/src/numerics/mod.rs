//! Numerical kernels shared by the model modules.

mod ode;
mod quad;
mod rng;
mod root;
mod sde;
mod stats;

pub use ode::{
    integrate_ode, integrate_ode_observed, OdeElement, OdeStepper, OdeStepperConfig, StepMethod,
};
pub use quad::{gauss_kronrod, quad_msd_kernel, quad_msd_kernel_with_scales, QuadratureConfig};
pub use rng::{RngStream, StreamRng};
pub use root::solve_scalar;
pub use sde::integrate_sde_em;
pub use stats::{
    kolmogorov_smirnov, linear_fit, loglog_slope, moments_of, pairwise_sum, KsOutcome, LinearFit,
    SampleMoments,
};
