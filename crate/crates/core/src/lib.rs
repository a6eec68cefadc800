//! Swarmalators on a ring with conformist and contrarian couplings.
//!
//! The core is generic over the scalar type (`f32` or `f64`); the aliases
//! below fix it to `f64`, with `*32` variants for single precision. Linear
//! stability numerics are `f64` only.

pub mod classifier;
pub mod error;
pub mod integrator;
pub mod model;
pub mod observables;
pub mod pipeline;
pub mod scalar;
pub mod stability;
pub mod sweep;

pub use classifier::{classify, ClassifierThresholds, StateLabel, SummaryStats};
pub use error::{Error, Result};
pub use integrator::{init_random, integrate, IntegrationConfig, Trajectory};
pub use model::{
    conformist_count, from_xi_eta, mean_fields, rhs_direct, rhs_meanfield, sample_couplings, to_xi_eta,
    CouplingDistribution, ModelParams, Rates, SwarmState,
};
pub use observables::{order_params, ObservableSeries, OrderParams};
pub use pipeline::{run_single, summarize, RunOutcome};
pub use scalar::{angle_diff, wrap_angle, Scalar};
pub use stability::{fixed_point, stability_report, StabilityReport, StateKind};
pub use sweep::{overlay_theory, run_sweep, SweepCellResult, SweepConfig};

pub type State = SwarmState<f64>;
pub type Params = ModelParams<f64>;
pub type Distribution = CouplingDistribution<f64>;
pub type Config = IntegrationConfig<f64>;
pub type Traj = Trajectory<f64>;
pub type Thresholds = ClassifierThresholds<f64>;
pub type Stats = SummaryStats<f64>;

pub type State32 = SwarmState<f32>;
pub type Params32 = ModelParams<f32>;
pub type Distribution32 = CouplingDistribution<f32>;
pub type Config32 = IntegrationConfig<f32>;
pub type Traj32 = Trajectory<f32>;
pub type Thresholds32 = ClassifierThresholds<f32>;
pub type Stats32 = SummaryStats<f32>;
