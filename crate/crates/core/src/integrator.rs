//! Fixed-step RK4 time stepping with per-step angle unwrapping.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rhs_meanfield_into, ModelParams, SwarmState};
use crate::scalar::{angle_diff, wrap_angle, Scalar};

/// Step size, horizon, sampling stride and the analysis windows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrationConfig<T> {
    pub dt: T,
    pub t_end: T,
    pub sample_every: usize,
    /// Leading fraction of samples ignored by rotation detection.
    pub transient_fraction: T,
    /// Trailing fraction of samples used for time averages.
    pub average_fraction: T,
}

impl<T: Scalar> Default for IntegrationConfig<T> {
    fn default() -> Self {
        Self {
            dt: T::lit(0.1),
            t_end: T::lit(100.0),
            sample_every: 1,
            transient_fraction: T::lit(0.3),
            average_fraction: T::lit(0.1),
        }
    }
}

impl<T: Scalar> IntegrationConfig<T> {
    pub fn new(dt: T, t_end: T) -> Self {
        Self { dt, t_end, ..Self::default() }
    }

    pub fn with_sample_every(mut self, k: usize) -> Self {
        self.sample_every = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1".into());
        }
        if !(self.transient_fraction >= T::zero() && self.transient_fraction < T::one()) {
            return bad(format!("transient_fraction = {} outside [0, 1)", self.transient_fraction));
        }
        if !(self.average_fraction > T::zero() && self.average_fraction <= T::one()) {
            return bad(format!("average_fraction = {} outside (0, 1]", self.average_fraction));
        }
        Ok(())
    }

    /// Number of RK4 steps: `round(t_end / dt)`, at least one.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0).max(1)
    }
}

/// Sampled trajectory together with continuous lifts of every angle.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<SwarmState<T>>,
    /// Per sample, the lift of each position onto the real line.
    pub x_unwrapped: Vec<Vec<T>>,
    pub theta_unwrapped: Vec<Vec<T>>,
    /// Steps where some angle moved by π or more in a single step, which
    /// makes any a-posteriori unwrapping ambiguous.
    pub aliasing_steps: usize,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &SwarmState<T> {
        self.states.last().expect("trajectory holds the initial sample")
    }

    /// Writes `t, x_0..x_{N-1}, theta_0..theta_{N-1}` with wrapped angles.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows = self.times.iter().zip(&self.states).map(|(&t, s)| (t, s.x.as_slice(), s.theta.as_slice()));
        write_angle_csv(path, self.n(), rows)
    }

    /// Same layout as [`Trajectory::write_csv`] with the unwrapped lifts.
    pub fn write_unwrapped_csv(&self, path: &Path) -> Result<()> {
        let rows = self
            .times
            .iter()
            .zip(self.x_unwrapped.iter().zip(&self.theta_unwrapped))
            .map(|(&t, (x, th))| (t, x.as_slice(), th.as_slice()));
        write_angle_csv(path, self.n(), rows)
    }

    fn n(&self) -> usize {
        self.states.first().map_or(0, |s| s.n())
    }
}

/// Formats a value with 17 significant digits.
pub fn fmt17<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.as_f64())
}

fn write_angle_csv<'a, T: Scalar>(
    path: &Path,
    n: usize,
    rows: impl Iterator<Item = (T, &'a [T], &'a [T])>,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let mut header = String::from("t");
    for i in 0..n {
        header.push_str(&format!(",x_{i}"));
    }
    for i in 0..n {
        header.push_str(&format!(",theta_{i}"));
    }
    let io = |e| Error::io(path, e);
    writeln!(w, "{header}").map_err(io)?;
    for (t, x, th) in rows {
        let mut line = fmt17(t);
        for &v in x.iter().chain(th) {
            line.push(',');
            line.push_str(&fmt17(v));
        }
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Uniform random positions and phases on `[0, 2π)` at `t = 0`.
///
/// Uses stream 1 of a ChaCha8 generator seeded with `seed`; coupling draws
/// use stream 0, so the same seed can drive both without correlation.
pub fn init_random<T: Scalar>(params: &ModelParams<T>, seed: u64) -> SwarmState<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let tau = std::f64::consts::TAU;
    let mut draw = || T::lit(rng.gen_range(0.0..tau));
    let x: Vec<T> = (0..params.n).map(|_| draw()).collect();
    let theta: Vec<T> = (0..params.n).map(|_| draw()).collect();
    SwarmState {
        x: x.into_iter().map(wrap_angle).collect(),
        theta: theta.into_iter().map(wrap_angle).collect(),
        t: T::zero(),
    }
}

/// Outcome of [`unwrap_increment`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Increment<T> {
    pub delta: T,
    /// The minimal-branch displacement is at least π in magnitude, so the
    /// true displacement cannot be recovered from wrapped samples.
    pub aliased: bool,
}

/// Minimal-branch signed displacement from `prev` to `next`.
pub fn unwrap_increment<T: Scalar>(prev: T, next: T) -> Increment<T> {
    let delta = angle_diff(next, prev);
    let aliased = delta.abs() >= T::PI() - T::epsilon() * T::lit(16.0);
    Increment { delta, aliased }
}

struct Rk4Buffers<T> {
    k: [(Vec<T>, Vec<T>); 4],
    tmp_x: Vec<T>,
    tmp_t: Vec<T>,
}

impl<T: Scalar> Rk4Buffers<T> {
    fn new(n: usize) -> Self {
        let z = || (vec![T::zero(); n], vec![T::zero(); n]);
        Self { k: [z(), z(), z(), z()], tmp_x: vec![T::zero(); n], tmp_t: vec![T::zero(); n] }
    }

    /// Fills `out_x`/`out_t` with the RK4 displacement over one step.
    fn step(&mut self, x: &[T], theta: &[T], params: &ModelParams<T>, dt: T, out_x: &mut [T], out_t: &mut [T]) {
        let half = T::lit(0.5);
        let sixth = dt / T::lit(6.0);
        let two = T::lit(2.0);
        let n = x.len();
        let [k1, k2, k3, k4] = &mut self.k;
        rhs_meanfield_into(x, theta, params, &mut k1.0, &mut k1.1);
        for i in 0..n {
            self.tmp_x[i] = x[i] + half * dt * k1.0[i];
            self.tmp_t[i] = theta[i] + half * dt * k1.1[i];
        }
        rhs_meanfield_into(&self.tmp_x, &self.tmp_t, params, &mut k2.0, &mut k2.1);
        for i in 0..n {
            self.tmp_x[i] = x[i] + half * dt * k2.0[i];
            self.tmp_t[i] = theta[i] + half * dt * k2.1[i];
        }
        rhs_meanfield_into(&self.tmp_x, &self.tmp_t, params, &mut k3.0, &mut k3.1);
        for i in 0..n {
            self.tmp_x[i] = x[i] + dt * k3.0[i];
            self.tmp_t[i] = theta[i] + dt * k3.1[i];
        }
        rhs_meanfield_into(&self.tmp_x, &self.tmp_t, params, &mut k4.0, &mut k4.1);
        for i in 0..n {
            out_x[i] = sixth * (k1.0[i] + two * k2.0[i] + two * k3.0[i] + k4.0[i]);
            out_t[i] = sixth * (k1.1[i] + two * k2.1[i] + two * k3.1[i] + k4.1[i]);
        }
    }
}

/// Integrates from `state0` with classical RK4 and the mean-field RHS.
///
/// The stored state is re-wrapped after every step and the lifts accumulate
/// the raw step displacements, so rotations are tracked exactly regardless
/// of `sample_every`.
pub fn integrate<T: Scalar>(
    state0: &SwarmState<T>,
    params: &ModelParams<T>,
    config: &IntegrationConfig<T>,
) -> Result<Trajectory<T>> {
    config.validate()?;
    if params.k.len() != params.n || state0.n() != params.n {
        return Err(Error::DimensionMismatch { expected: params.n, found: state0.n() });
    }
    let n = params.n;
    let steps = config.steps();
    let n_samples = steps / config.sample_every + 1;

    let mut x: Vec<T> = state0.x.iter().copied().map(wrap_angle).collect();
    let mut theta: Vec<T> = state0.theta.iter().copied().map(wrap_angle).collect();
    let mut x_lift = x.clone();
    let mut theta_lift = theta.clone();

    let mut traj = Trajectory {
        times: Vec::with_capacity(n_samples),
        states: Vec::with_capacity(n_samples),
        x_unwrapped: Vec::with_capacity(n_samples),
        theta_unwrapped: Vec::with_capacity(n_samples),
        aliasing_steps: 0,
    };
    let t0 = state0.t;
    let push = |traj: &mut Trajectory<T>, t: T, x: &[T], th: &[T], xl: &[T], tl: &[T]| {
        traj.times.push(t);
        traj.states.push(SwarmState { x: x.to_vec(), theta: th.to_vec(), t });
        traj.x_unwrapped.push(xl.to_vec());
        traj.theta_unwrapped.push(tl.to_vec());
    };
    push(&mut traj, t0, &x, &theta, &x_lift, &theta_lift);

    let mut buf = Rk4Buffers::new(n);
    let mut dx = vec![T::zero(); n];
    let mut dth = vec![T::zero(); n];
    let pi = T::PI();
    for step in 1..=steps {
        buf.step(&x, &theta, params, config.dt, &mut dx, &mut dth);
        let t = t0 + config.dt * T::count(step);
        let mut aliased = false;
        for i in 0..n {
            if !(dx[i].is_finite() && dth[i].is_finite()) {
                return Err(Error::Diverged { step, time: t.as_f64() });
            }
            aliased |= dx[i].abs() >= pi || dth[i].abs() >= pi;
            x_lift[i] = x_lift[i] + dx[i];
            theta_lift[i] = theta_lift[i] + dth[i];
            x[i] = wrap_angle(x[i] + dx[i]);
            theta[i] = wrap_angle(theta[i] + dth[i]);
        }
        if aliased {
            traj.aliasing_steps += 1;
        }
        if step % config.sample_every == 0 {
            push(&mut traj, t, &x, &theta, &x_lift, &theta_lift);
        }
    }
    Ok(traj)
}
