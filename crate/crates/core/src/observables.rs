//! Order parameters, mean speed and rotation fractions.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{fmt17, IntegrationConfig, Trajectory};
use crate::model::{mean_fields, rhs_meanfield, ModelParams, SwarmState};
use crate::scalar::Scalar;

/// Rainbow order parameters `W± = S± exp(i phi±)` plus `S_max`, `S_min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderParams<T> {
    pub s_plus: T,
    pub phi_plus: T,
    pub s_minus: T,
    pub phi_minus: T,
    pub s_max: T,
    pub s_min: T,
}

pub fn order_params<T: Scalar>(state: &SwarmState<T>) -> OrderParams<T> {
    let ((pr, pi), (mr, mi)) = mean_fields(&state.x, &state.theta);
    // rounding can push |W| a hair above 1 for a perfect clump
    let s_plus = pr.hypot(pi).min(T::one());
    let s_minus = mr.hypot(mi).min(T::one());
    OrderParams {
        s_plus,
        phi_plus: pi.atan2(pr),
        s_minus,
        phi_minus: mi.atan2(mr),
        s_max: s_plus.max(s_minus),
        s_min: s_plus.min(s_minus),
    }
}

/// Mean over swarmalators of `|dx_i/dt|` at one state.
pub fn instantaneous_speed<T: Scalar>(state: &SwarmState<T>, params: &ModelParams<T>) -> Result<T> {
    let r = rhs_meanfield(state, params)?;
    Ok(r.dx.iter().map(|v| v.abs()).sum::<T>() / T::count(r.dx.len()))
}

/// Index of the first sample in the trailing averaging window.
pub fn average_window_start<T: Scalar>(len: usize, config: &IntegrationConfig<T>) -> Result<usize> {
    let count = (config.average_fraction * T::count(len)).ceil().to_usize().unwrap_or(0).min(len);
    if count == 0 {
        return Err(Error::InsufficientData(format!("averaging window over {len} samples is empty")));
    }
    Ok(len - count)
}

/// Index of the first sample after the transient cut.
pub fn transient_window_start<T: Scalar>(len: usize, config: &IntegrationConfig<T>) -> Result<usize> {
    let start = (config.transient_fraction * T::count(len)).floor().to_usize().unwrap_or(len);
    if start >= len {
        return Err(Error::InsufficientData(format!("no samples left after dropping the transient of {len}")));
    }
    Ok(start)
}

/// Time- and population-averaged speed `V` over the trailing window.
///
/// Uses `|dx/dt|` including the drift `nu`; see [`mean_velocity_comoving`].
pub fn mean_velocity<T: Scalar>(
    traj: &Trajectory<T>,
    params: &ModelParams<T>,
    config: &IntegrationConfig<T>,
) -> Result<T> {
    mean_speed(traj, params, config, T::zero())
}

/// `V` measured in the frame co-moving with the drift `nu`.
pub fn mean_velocity_comoving<T: Scalar>(
    traj: &Trajectory<T>,
    params: &ModelParams<T>,
    config: &IntegrationConfig<T>,
) -> Result<T> {
    mean_speed(traj, params, config, params.nu)
}

fn mean_speed<T: Scalar>(
    traj: &Trajectory<T>,
    params: &ModelParams<T>,
    config: &IntegrationConfig<T>,
    drift: T,
) -> Result<T> {
    let start = average_window_start(traj.len(), config)?;
    let window = &traj.states[start..];
    let mut total = T::zero();
    for s in window {
        let r = rhs_meanfield(s, params)?;
        total = total + r.dx.iter().map(|&v| (v - drift).abs()).sum::<T>() / T::count(r.dx.len());
    }
    Ok(total / T::count(window.len()))
}

/// Fractions of swarmalators that complete a full turn in position and phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationSummary<T> {
    pub frac_x: T,
    pub frac_theta: T,
}

/// A swarmalator counts as rotating when the range of its lifted angle over
/// the post-transient window reaches 2π.
pub fn rotation_fractions<T: Scalar>(
    traj: &Trajectory<T>,
    config: &IntegrationConfig<T>,
) -> Result<RotationSummary<T>> {
    let start = transient_window_start(traj.len(), config)?;
    let frac = |lifts: &[Vec<T>]| -> T {
        let n = lifts[0].len();
        let mut lo = lifts[start].clone();
        let mut hi = lifts[start].clone();
        for row in &lifts[start + 1..] {
            for i in 0..n {
                lo[i] = lo[i].min(row[i]);
                hi[i] = hi[i].max(row[i]);
            }
        }
        let tau = T::TAU();
        let rotating = lo.iter().zip(&hi).filter(|(&l, &h)| h - l >= tau).count();
        T::count(rotating) / T::count(n)
    };
    Ok(RotationSummary { frac_x: frac(&traj.x_unwrapped), frac_theta: frac(&traj.theta_unwrapped) })
}

/// Trailing-window means of the classifier inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailingSummary<T> {
    pub s_max: T,
    pub s_min: T,
    pub v: T,
}

/// Per-sample order parameters and instantaneous speed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObservableSeries<T> {
    pub t: Vec<T>,
    pub s_plus: Vec<T>,
    pub phi_plus: Vec<T>,
    pub s_minus: Vec<T>,
    pub phi_minus: Vec<T>,
    pub s_max: Vec<T>,
    pub s_min: Vec<T>,
    pub v_inst: Vec<T>,
    pub summary: TrailingSummary<T>,
}

pub fn observable_series<T: Scalar>(
    traj: &Trajectory<T>,
    params: &ModelParams<T>,
    config: &IntegrationConfig<T>,
) -> Result<ObservableSeries<T>> {
    let len = traj.len();
    let mut out = ObservableSeries {
        t: traj.times.clone(),
        s_plus: Vec::with_capacity(len),
        phi_plus: Vec::with_capacity(len),
        s_minus: Vec::with_capacity(len),
        phi_minus: Vec::with_capacity(len),
        s_max: Vec::with_capacity(len),
        s_min: Vec::with_capacity(len),
        v_inst: Vec::with_capacity(len),
        summary: TrailingSummary { s_max: T::zero(), s_min: T::zero(), v: T::zero() },
    };
    for s in &traj.states {
        let op = order_params(s);
        out.s_plus.push(op.s_plus);
        out.phi_plus.push(op.phi_plus);
        out.s_minus.push(op.s_minus);
        out.phi_minus.push(op.phi_minus);
        out.s_max.push(op.s_max);
        out.s_min.push(op.s_min);
        out.v_inst.push(instantaneous_speed(s, params)?);
    }
    let start = average_window_start(len, config)?;
    let mean = |v: &[T]| v[start..].iter().copied().sum::<T>() / T::count(len - start);
    out.summary = TrailingSummary { s_max: mean(&out.s_max), s_min: mean(&out.s_min), v: mean(&out.v_inst) };
    Ok(out)
}

impl<T: Scalar> ObservableSeries<T> {
    /// Writes `t, s_plus, s_minus, s_max, s_min, v_inst`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let file = std::fs::File::create(path).map_err(io)?;
        let mut w = std::io::BufWriter::new(file);
        writeln!(w, "t,s_plus,s_minus,s_max,s_min,v_inst").map_err(io)?;
        for i in 0..self.t.len() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt17(self.t[i]),
                fmt17(self.s_plus[i]),
                fmt17(self.s_minus[i]),
                fmt17(self.s_max[i]),
                fmt17(self.s_min[i]),
                fmt17(self.v_inst[i]),
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::integrate;
    use std::f64::consts::{PI, TAU};

    fn state(x: Vec<f64>, th: Vec<f64>) -> SwarmState<f64> {
        SwarmState::new(x, th, 0.0).unwrap()
    }

    #[test]
    fn identical_swarmalators_are_fully_ordered() {
        let op = order_params(&state(vec![1.3; 5], vec![4.0; 5]));
        assert!((op.s_plus - 1.0).abs() < 1e-12);
        assert!((op.s_minus - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_correlation() {
        let n = 360;
        let th: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
        let x: Vec<f64> = th.iter().map(|t| t + 0.7).collect();
        let op = order_params(&state(x, th));
        assert!((op.s_minus - 1.0).abs() < 1e-12);
        assert!(op.s_plus <= 1e-10);
        assert!((op.s_max - 1.0).abs() < 1e-12 && op.s_min <= 1e-10);
    }

    #[test]
    fn uniform_product_grid_is_incoherent() {
        let m = 24;
        let mut x = Vec::new();
        let mut th = Vec::new();
        for a in 0..m {
            for b in 0..m {
                x.push(TAU * a as f64 / m as f64);
                th.push(TAU * b as f64 / m as f64);
            }
        }
        let op = order_params(&state(x, th));
        assert!(op.s_plus < 1e-10 && op.s_minus < 1e-10);
    }

    #[test]
    fn four_clump_configuration() {
        // conformist clumps at ξ = 0, contrarian clumps at ξ = π, all η = 0
        let (p, n) = (0.8, 10);
        let x = vec![0.0, 0.0, 0.0, 0.0, PI, PI, PI, PI, PI / 2.0, 1.5 * PI];
        let op = order_params(&state(x.clone(), x));
        assert!((op.s_min - (2.0 * p - 1.0_f64).abs()).abs() < 1e-12, "{}", op.s_min);
        assert!((op.s_max - 1.0).abs() < 1e-12);
        assert_eq!(n, 10);
    }

    fn constant_trajectory(n_samples: usize) -> (Trajectory<f64>, ModelParams<f64>) {
        let p = ModelParams::double_delta(1.0, 0.5, -0.5, 2).unwrap();
        let s = state(vec![0.0, PI], vec![0.0, PI]);
        let tr = integrate(&s, &p, &IntegrationConfig::new(0.1, 0.1 * n_samples as f64)).unwrap();
        (tr, p)
    }

    #[test]
    fn antipodal_pair_has_zero_velocity() {
        let (tr, p) = constant_trajectory(50);
        let cfg = IntegrationConfig::default();
        assert!(mean_velocity(&tr, &p, &cfg).unwrap() < 1e-15);
        let rot = rotation_fractions(&tr, &cfg).unwrap();
        assert_eq!((rot.frac_x, rot.frac_theta), (0.0, 0.0));
    }

    #[test]
    fn full_turn_detected() {
        let (mut tr, _) = constant_trajectory(100);
        for (k, row) in tr.x_unwrapped.iter_mut().enumerate() {
            row[0] = tr.times[k];
        }
        let rot = rotation_fractions(&tr, &IntegrationConfig::default()).unwrap();
        // window covers t in [3, 10], length 7 > 2π
        assert_eq!(rot.frac_x, 0.5);
        assert_eq!(rot.frac_theta, 0.0);
    }

    #[test]
    fn window_bounds() {
        let cfg = IntegrationConfig::<f64>::default();
        assert_eq!(average_window_start(100, &cfg).unwrap(), 90);
        assert_eq!(average_window_start(5, &cfg).unwrap(), 4);
        assert!(average_window_start(0, &cfg).is_err());
        assert_eq!(transient_window_start(100, &cfg).unwrap(), 30);
        assert!(transient_window_start(0, &cfg).is_err());
    }

    #[test]
    fn series_csv_header() {
        let (tr, p) = constant_trajectory(10);
        let series = observable_series(&tr, &p, &IntegrationConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("obs.csv");
        series.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "t,s_plus,s_minus,s_max,s_min,v_inst");
        assert_eq!(text.lines().count(), tr.len() + 1);
        assert!((series.summary.s_max - 1.0).abs() < 1e-12);
    }
}
