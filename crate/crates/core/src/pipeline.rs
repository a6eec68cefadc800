//! Simulate → measure → classify for a single parameter point.

use serde::{Deserialize, Serialize};

use crate::classifier::{classify, ClassifierThresholds, StateLabel, SummaryStats};
use crate::error::Result;
use crate::integrator::{init_random, integrate, IntegrationConfig, Trajectory};
use crate::model::ModelParams;
use crate::observables::{average_window_start, mean_velocity, order_params, rotation_fractions};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome<T> {
    pub label: StateLabel,
    pub stats: SummaryStats<T>,
    pub aliasing_steps: usize,
}

/// Trailing means of `S_max`, `S_min`, `V` and the rotation fractions.
pub fn summarize<T: Scalar>(
    traj: &Trajectory<T>,
    params: &ModelParams<T>,
    config: &IntegrationConfig<T>,
) -> Result<SummaryStats<T>> {
    let start = average_window_start(traj.len(), config)?;
    let window = &traj.states[start..];
    let (mut s_max, mut s_min) = (T::zero(), T::zero());
    for s in window {
        let op = order_params(s);
        s_max = s_max + op.s_max;
        s_min = s_min + op.s_min;
    }
    let count = T::count(window.len());
    let rot = rotation_fractions(traj, config)?;
    Ok(SummaryStats {
        s_max: s_max / count,
        s_min: s_min / count,
        v: mean_velocity(traj, params, config)?,
        frac_x: rot.frac_x,
        frac_theta: rot.frac_theta,
    })
}

/// Runs one trajectory from a uniformly random start seeded by `init_seed`.
pub fn run_single<T: Scalar>(
    params: &ModelParams<T>,
    config: &IntegrationConfig<T>,
    thresholds: &ClassifierThresholds<T>,
    init_seed: u64,
) -> Result<RunOutcome<T>> {
    let state0 = init_random(params, init_seed);
    let traj = integrate(&state0, params, config)?;
    let stats = summarize(&traj, params, config)?;
    Ok(RunOutcome { label: classify(&stats, thresholds), stats, aliasing_steps: traj.aliasing_steps })
}
