//! Simulation and drift estimation for the non-ergodic Ornstein-Uhlenbeck
//! process `dX_t = θ X_t dt + dG_t`, `X_0 = 0`, `θ > 0`, driven by fractional,
//! sub-fractional or bifractional Brownian motion.
//!
//! The numerical core is generic over the scalar type (`f32` or `f64`); the
//! aliases at the crate root fix it to `f64`.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimator;
pub mod kernels;
pub mod limit_theory;
pub mod montecarlo;
pub mod ou_model;
pub mod pathgen;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use estimator::{error_statistic, estimate, ErrorStatistic, EstimateReport};
pub use kernels::{KernelFamily, KernelSpec};
pub use limit_theory::{LimitCheck, LimitReport};
pub use montecarlo::{MCConfig, MCRun, MCSummary};
pub use ou_model::{build_trajectory, ScaledTrajectory, TrajectoryPoint};
pub use pathgen::{SamplePath, Sampler, SamplerChoice, SamplerId, TimeGrid};
pub use scalar::Real;

pub type Kernel = KernelSpec<f64>;
pub type Grid = TimeGrid<f64>;
pub type Path = SamplePath<f64>;
pub type Trajectory = ScaledTrajectory<f64>;
