//! Parameter sweeps over one or two axes with per-cell checkpoints.
//!
//! Every cell is an independent work item: for each configured seed it draws
//! couplings and an initial condition from a seed derived from
//! `(seed, cell index)`, integrates, and classifies. Finished cells are
//! written to `cells/cell_NNNNNN.json` by atomic rename, so an interrupted
//! sweep picks up where it stopped. Aggregated CSVs are written once all
//! cells are done and do not depend on the worker count.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{ClassifierThresholds, StateLabel};
use crate::error::{Error, Result};
use crate::integrator::{fmt17, IntegrationConfig};
use crate::model::{CouplingDistribution, ModelParams};
use crate::pipeline::run_single;
use crate::stability::{critical_fraction, saddle_curve};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    P,
    KP,
    KN,
    J,
    Mu,
    Sigma,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::P => "p",
            AxisName::KP => "k_p",
            AxisName::KN => "k_n",
            AxisName::J => "j",
            AxisName::Mu => "mu",
            AxisName::Sigma => "sigma",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Axis {
    /// `start + i·step` for every `i` with the value not past `stop`.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor();
        let count = if count.is_finite() && count >= 0.0 { count as usize + 1 } else { 0 };
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    DoubleDelta,
    Gaussian,
    MixedGaussian,
}

/// Parameters held fixed across the sweep; axis values override them per cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedParams {
    pub distribution: DistributionKind,
    pub j: f64,
    pub p: f64,
    pub k_p: f64,
    pub k_n: f64,
    pub mu: f64,
    pub sigma: f64,
    pub nu: f64,
    pub omega: f64,
    pub n: usize,
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub transient_fraction: f64,
    pub average_fraction: f64,
}

impl Default for FixedParams {
    fn default() -> Self {
        let ic = IntegrationConfig::<f64>::default();
        Self {
            distribution: DistributionKind::DoubleDelta,
            j: 1.0,
            p: 0.5,
            k_p: 0.5,
            k_n: -0.5,
            mu: 0.0,
            sigma: 0.5,
            nu: 0.0,
            omega: 0.0,
            n: 500,
            t_end: 400.0,
            dt: 0.1,
            sample_every: 10,
            transient_fraction: ic.transient_fraction,
            average_fraction: ic.average_fraction,
        }
    }
}

impl FixedParams {
    fn set(&mut self, axis: AxisName, v: f64) {
        match axis {
            AxisName::P => self.p = v,
            AxisName::KP => self.k_p = v,
            AxisName::KN => self.k_n = v,
            AxisName::J => self.j = v,
            AxisName::Mu => self.mu = v,
            AxisName::Sigma => self.sigma = v,
        }
    }

    pub fn distribution(&self) -> CouplingDistribution<f64> {
        match self.distribution {
            DistributionKind::DoubleDelta => {
                CouplingDistribution::DoubleDelta { p: self.p, k_p: self.k_p, k_n: self.k_n }
            }
            DistributionKind::Gaussian => CouplingDistribution::SingleGaussian { mu: self.mu, sigma: self.sigma },
            DistributionKind::MixedGaussian => {
                CouplingDistribution::MixedGaussian { p: self.p, k_p: self.k_p, k_n: self.k_n, sigma: self.sigma }
            }
        }
    }

    pub fn integration(&self) -> IntegrationConfig<f64> {
        IntegrationConfig {
            dt: self.dt,
            t_end: self.t_end,
            sample_every: self.sample_every,
            transient_fraction: self.transient_fraction,
            average_fraction: self.average_fraction,
        }
    }

    /// The `(p, k_p, k_n)` columns of `cells.csv`; a single Gaussian is
    /// reported as the one-population mixture `p = 1`, `k_p = k_n = mu`.
    fn csv_coupling_columns(&self) -> (f64, f64, f64) {
        match self.distribution {
            DistributionKind::Gaussian => (1.0, self.mu, self.mu),
            _ => (self.p, self.k_p, self.k_n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub fixed: FixedParams,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Upper bound on parallel cells; `None` uses all cores.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_output")]
    pub output_path: PathBuf,
    #[serde(default)]
    pub thresholds: ClassifierThresholds<f64>,
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}

fn default_output() -> PathBuf {
    PathBuf::from("sweep_out")
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.axes.is_empty() || self.axes.len() > 2 {
            return bad(format!("a sweep needs 1 or 2 axes, got {}", self.axes.len()));
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return bad(format!("axis `{}` listed twice", self.axes[0].name.as_str()));
        }
        for a in &self.axes {
            if !(a.step > 0.0) || !a.step.is_finite() {
                return bad(format!("axis `{}` needs a positive step", a.name.as_str()));
            }
            if a.values().is_empty() {
                return bad(format!("axis `{}` has stop < start", a.name.as_str()));
            }
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        self.thresholds.validate()?;
        self.fixed.integration().validate()?;
        for cell in self.cells() {
            cell.params.distribution().validate()?;
        }
        Ok(())
    }

    /// Grid cells in row-major order (first axis outermost).
    pub fn cells(&self) -> Vec<CellSpec> {
        let grids: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let mut combos: Vec<Vec<f64>> = vec![vec![]];
        for g in &grids {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    g.iter().map(move |&v| {
                        let mut c = c.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .enumerate()
            .map(|(index, vals)| {
                let mut params = self.fixed.clone();
                let mut axis_values = BTreeMap::new();
                for (a, &v) in self.axes.iter().zip(&vals) {
                    params.set(a.name, v);
                    axis_values.insert(a.name.as_str().to_string(), v);
                }
                CellSpec { index, axis_values, params }
            })
            .collect()
    }

    /// `(p, K_n)` phase diagram at desk scale: 40×40 cells, N = 500,
    /// T = 400, three seeds.
    pub fn phase_diagram_desk(output_path: impl Into<PathBuf>) -> Self {
        Self {
            axes: vec![
                Axis { name: AxisName::P, start: 0.025, stop: 1.0, step: 0.025 },
                Axis { name: AxisName::KN, start: -2.0, stop: -0.05, step: 0.05 },
            ],
            fixed: FixedParams { k_p: 0.5, ..FixedParams::default() },
            seeds: default_seeds(),
            workers: None,
            output_path: output_path.into(),
            thresholds: ClassifierThresholds::default(),
        }
    }

    /// Same grid at N = 5000 and T = 1000. Hours of CPU time.
    pub fn phase_diagram_full(output_path: impl Into<PathBuf>) -> Self {
        let mut cfg = Self::phase_diagram_desk(output_path);
        cfg.fixed.n = 5000;
        cfg.fixed.t_end = 1000.0;
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub index: usize,
    pub axis_values: BTreeMap<String, f64>,
    pub params: FixedParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub base_seed: u64,
    /// Seed actually used for couplings and the initial condition.
    pub seed: u64,
    pub label: StateLabel,
    #[serde(with = "nullable")]
    pub s_max: f64,
    #[serde(with = "nullable")]
    pub s_min: f64,
    #[serde(with = "nullable")]
    pub v: f64,
    #[serde(with = "nullable")]
    pub frac_x: f64,
    #[serde(with = "nullable")]
    pub frac_theta: f64,
    pub diverged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    #[serde(with = "nullable")]
    pub mean: f64,
    #[serde(with = "nullable")]
    pub std: f64,
}

/// JSON has no NaN; diverged runs store their statistics as `null`.
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

impl MeanStd {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.collect();
        if v.is_empty() {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCellResult {
    pub cell: CellSpec,
    pub runs: Vec<SeedRun>,
    pub modal_label: StateLabel,
    pub s_max: MeanStd,
    pub s_min: MeanStd,
    pub v: MeanStd,
    pub frac_x: MeanStd,
    pub frac_theta: MeanStd,
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for seed `base` in cell `cell`.
pub fn cell_seed(base: u64, cell: usize) -> u64 {
    mix64(mix64(base) ^ mix64(cell as u64).rotate_left(17))
}

/// Most frequent label; ties go to the label listed first in [`StateLabel::ALL`].
pub fn modal_label(labels: impl IntoIterator<Item = StateLabel>) -> StateLabel {
    let mut counts: BTreeMap<StateLabel, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    counts.into_iter().fold((StateLabel::Unclassified, 0), |best, (l, c)| if c > best.1 { (l, c) } else { best }).0
}

/// Runs every seed of one cell.
pub fn run_cell(cell: &CellSpec, seeds: &[u64], thresholds: &ClassifierThresholds<f64>) -> Result<SweepCellResult> {
    let dist = cell.params.distribution();
    let config = cell.params.integration();
    let mut runs = Vec::with_capacity(seeds.len());
    for &base in seeds {
        let seed = cell_seed(base, cell.index);
        let params = ModelParams::new(dist, cell.params.n, seed)?
            .with_j(cell.params.j)
            .with_frequencies(cell.params.nu, cell.params.omega);
        let run = match run_single(&params, &config, thresholds, seed) {
            Ok(out) => SeedRun {
                base_seed: base,
                seed,
                label: out.label,
                s_max: out.stats.s_max,
                s_min: out.stats.s_min,
                v: out.stats.v,
                frac_x: out.stats.frac_x,
                frac_theta: out.stats.frac_theta,
                diverged: false,
            },
            Err(Error::Diverged { .. }) => SeedRun {
                base_seed: base,
                seed,
                label: StateLabel::Unclassified,
                s_max: f64::NAN,
                s_min: f64::NAN,
                v: f64::NAN,
                frac_x: f64::NAN,
                frac_theta: f64::NAN,
                diverged: true,
            },
            Err(e) => return Err(e),
        };
        runs.push(run);
    }
    let ok = || runs.iter().filter(|r| !r.diverged);
    Ok(SweepCellResult {
        cell: cell.clone(),
        modal_label: modal_label(runs.iter().map(|r| r.label)),
        s_max: MeanStd::of(ok().map(|r| r.s_max)),
        s_min: MeanStd::of(ok().map(|r| r.s_min)),
        v: MeanStd::of(ok().map(|r| r.v)),
        frac_x: MeanStd::of(ok().map(|r| r.frac_x)),
        frac_theta: MeanStd::of(ok().map(|r| r.frac_theta)),
        runs,
    })
}

fn checkpoint_path(dir: &Path, index: usize) -> PathBuf {
    dir.join("cells").join(format!("cell_{index:06}.json"))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn load_checkpoint(path: &Path, cell: &CellSpec, seeds: &[u64]) -> Option<SweepCellResult> {
    let text = fs::read_to_string(path).ok()?;
    let res: SweepCellResult = serde_json::from_str(&text).ok()?;
    let same_seeds = res.runs.iter().map(|r| r.base_seed).eq(seeds.iter().copied());
    (res.cell == *cell && same_seeds).then_some(res)
}

/// Runs (or resumes) the sweep and writes `cells.csv`, `summary.csv` and
/// `theory_curves.csv` under `config.output_path`.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepCellResult>> {
    run_sweep_with_limit(config, None)
}

/// Like [`run_sweep`], but stops after computing at most `limit` new cells.
/// Used to exercise resumption; returns only once everything is done.
pub fn run_sweep_with_limit(config: &SweepConfig, limit: Option<usize>) -> Result<Vec<SweepCellResult>> {
    config.validate()?;
    let out = &config.output_path;
    fs::create_dir_all(out.join("cells")).map_err(|e| Error::io(out.join("cells"), e))?;
    let config_json = serde_json::to_string_pretty(config)?;
    write_atomic(&out.join("sweep_config.json"), config_json.as_bytes())?;

    let cells = config.cells();
    let mut pending = Vec::new();
    let mut done: Vec<Option<SweepCellResult>> = Vec::with_capacity(cells.len());
    for cell in &cells {
        let prior = load_checkpoint(&checkpoint_path(out, cell.index), cell, &config.seeds);
        if prior.is_none() {
            pending.push(cell.clone());
        }
        done.push(prior);
    }
    if let Some(limit) = limit {
        pending.truncate(limit);
    }

    let compute = |cell: &CellSpec| -> Result<SweepCellResult> {
        let res = run_cell(cell, &config.seeds, &config.thresholds)?;
        let json = serde_json::to_string_pretty(&res)?;
        write_atomic(&checkpoint_path(out, cell.index), json.as_bytes())?;
        Ok(res)
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let fresh: Vec<SweepCellResult> = pool.install(|| pending.par_iter().map(compute).collect::<Result<Vec<_>>>())?;
    for res in fresh {
        let idx = res.cell.index;
        done[idx] = Some(res);
    }
    if done.iter().any(Option::is_none) {
        return Ok(done.into_iter().flatten().collect());
    }
    let results: Vec<SweepCellResult> = done.into_iter().flatten().collect();
    write_cells_csv(&out.join("cells.csv"), &results)?;
    write_summary_csv(&out.join("summary.csv"), config, &results)?;
    write_theory_csv(&out.join("theory_curves.csv"), &overlay_theory(config))?;
    Ok(results)
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(std::io::BufWriter::new(f))
}

fn write_lines(path: &Path, lines: impl Iterator<Item = String>) -> Result<()> {
    let mut w = create(path)?;
    for line in lines {
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub const CELLS_HEADER: &str = "p,k_n,k_p,j,n,t_end,dt,seed,label,s_max,s_min,v,frac_x,frac_theta";

fn write_cells_csv(path: &Path, results: &[SweepCellResult]) -> Result<()> {
    let rows = results.iter().flat_map(|r| {
        let c = &r.cell.params;
        let (p, k_p, k_n) = c.csv_coupling_columns();
        r.runs.iter().map(move |run| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                fmt17(p),
                fmt17(k_n),
                fmt17(k_p),
                fmt17(c.j),
                c.n,
                fmt17(c.t_end),
                fmt17(c.dt),
                run.seed,
                run.label,
                fmt17(run.s_max),
                fmt17(run.s_min),
                fmt17(run.v),
                fmt17(run.frac_x),
                fmt17(run.frac_theta),
            )
        })
    });
    write_lines(path, std::iter::once(CELLS_HEADER.to_string()).chain(rows))
}

fn write_summary_csv(path: &Path, config: &SweepConfig, results: &[SweepCellResult]) -> Result<()> {
    let names: Vec<&str> = config.axes.iter().map(|a| a.name.as_str()).collect();
    let header = format!(
        "cell,{},label,seeds,diverged,s_max_mean,s_max_std,s_min_mean,s_min_std,v_mean,v_std,frac_x_mean,frac_theta_mean",
        names.join(",")
    );
    let rows = results.iter().map(|r| {
        let axes: Vec<String> = names.iter().map(|n| fmt17(r.cell.axis_values[*n])).collect();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.cell.index,
            axes.join(","),
            r.modal_label,
            r.runs.len(),
            r.runs.iter().filter(|x| x.diverged).count(),
            fmt17(r.s_max.mean),
            fmt17(r.s_max.std),
            fmt17(r.s_min.mean),
            fmt17(r.s_min.std),
            fmt17(r.v.mean),
            fmt17(r.v.std),
            fmt17(r.frac_x.mean),
            fmt17(r.frac_theta.mean),
        )
    });
    write_lines(path, std::iter::once(header).chain(rows))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint {
    pub curve: TheoryCurve,
    pub p: f64,
    pub k_n: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryCurve {
    /// `K_n = -(q/p) K_p`
    Saddle,
    /// `K_n = -J`
    Hopf,
    /// `p = p_s(K_n)`
    Async,
}

impl TheoryCurve {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoryCurve::Saddle => "saddle",
            TheoryCurve::Hopf => "hopf",
            TheoryCurve::Async => "async",
        }
    }
}

const CURVE_SAMPLES: usize = 201;

fn axis_range(config: &SweepConfig, name: AxisName, fixed: f64) -> (f64, f64) {
    config
        .axes
        .iter()
        .find(|a| a.name == name)
        .map(|a| {
            let v = a.values();
            (v[0], *v.last().unwrap())
        })
        .unwrap_or((fixed, fixed))
}

fn samples(lo: f64, hi: f64) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    (0..CURVE_SAMPLES).map(|i| lo + (hi - lo) * i as f64 / (CURVE_SAMPLES - 1) as f64).collect()
}

/// Saddle-node, Hopf and async-threshold curves over the sweep's `(p, K_n)`
/// range. Empty for non-double-delta sweeps.
pub fn overlay_theory(config: &SweepConfig) -> Vec<TheoryPoint> {
    let f = &config.fixed;
    if f.distribution != DistributionKind::DoubleDelta {
        return Vec::new();
    }
    let (p_lo, p_hi) = axis_range(config, AxisName::P, f.p);
    let (kn_lo, kn_hi) = axis_range(config, AxisName::KN, f.k_n);
    let mut out = Vec::new();
    for p in samples(p_lo, p_hi) {
        if let Some(k_n) = saddle_curve(f.k_p, p) {
            out.push(TheoryPoint { curve: TheoryCurve::Saddle, p, k_n });
        }
    }
    for p in samples(p_lo, p_hi) {
        out.push(TheoryPoint { curve: TheoryCurve::Hopf, p, k_n: -f.j });
    }
    for k_n in samples(kn_lo, kn_hi) {
        if let Ok(p) = critical_fraction(f.j, f.k_p, k_n) {
            if (0.0..=1.0).contains(&p) {
                out.push(TheoryPoint { curve: TheoryCurve::Async, p, k_n });
            }
        }
    }
    out
}

fn write_theory_csv(path: &Path, points: &[TheoryPoint]) -> Result<()> {
    let rows = points.iter().map(|t| format!("{},{},{}", t.curve.as_str(), fmt17(t.p), fmt17(t.k_n)));
    write_lines(path, std::iter::once("curve_name,p,k_n".to_string()).chain(rows))
}
