//! Resolved run configuration: defaults, then a config file, then flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use ringswarm::classifier::ClassifierThresholds;
use ringswarm::integrator::IntegrationConfig;
use ringswarm::model::{CouplingDistribution, ModelParams};
use ringswarm::sweep::DistributionKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Dist {
    DoubleDelta,
    Gaussian,
    MixedGaussian,
}

impl From<Dist> for DistributionKind {
    fn from(d: Dist) -> Self {
        match d {
            Dist::DoubleDelta => DistributionKind::DoubleDelta,
            Dist::Gaussian => DistributionKind::Gaussian,
            Dist::MixedGaussian => DistributionKind::MixedGaussian,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Everything needed to reproduce a single run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub j: f64,
    pub nu: f64,
    pub omega: f64,
    pub dist: Dist,
    pub p: f64,
    pub k_p: f64,
    pub k_n: f64,
    pub mu: f64,
    pub sigma: f64,
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub transient_fraction: f64,
    pub average_fraction: f64,
    pub thresholds: ClassifierThresholds<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ic = IntegrationConfig::<f64>::default();
        Self {
            n: 500,
            j: 1.0,
            nu: 0.0,
            omega: 0.0,
            dist: Dist::DoubleDelta,
            p: 0.8,
            k_p: 0.5,
            k_n: -0.5,
            mu: 0.0,
            sigma: 0.5,
            t_end: ic.t_end,
            dt: ic.dt,
            sample_every: ic.sample_every,
            transient_fraction: ic.transient_fraction,
            average_fraction: ic.average_fraction,
            thresholds: ClassifierThresholds::default(),
            seed: 1,
            out: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    pub fn distribution(&self) -> CouplingDistribution<f64> {
        match self.dist {
            Dist::DoubleDelta => CouplingDistribution::DoubleDelta { p: self.p, k_p: self.k_p, k_n: self.k_n },
            Dist::Gaussian => CouplingDistribution::SingleGaussian { mu: self.mu, sigma: self.sigma },
            Dist::MixedGaussian => {
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

    pub fn params(&self) -> ringswarm::Result<ModelParams<f64>> {
        Ok(ModelParams::new(self.distribution(), self.n, self.seed)?
            .with_j(self.j)
            .with_frequencies(self.nu, self.omega))
    }

    /// Checks every component invariant without running anything.
    pub fn validate(&self) -> ringswarm::Result<()> {
        self.distribution().validate()?;
        self.integration().validate()?;
        self.thresholds.validate()?;
        if self.n < 2 {
            return Err(ringswarm::Error::InvalidConfig(format!("n must be at least 2, got {}", self.n)));
        }
        Ok(())
    }
}

/// Model and integration flags shared by every single-run command.
#[derive(Args, Debug, Default)]
pub struct RunFlags {
    /// JSON run config or a manifest written by `simulate`
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Population size
    #[arg(long)]
    pub n: Option<usize>,
    /// Spatial coupling J
    #[arg(long)]
    pub j: Option<f64>,
    /// Natural position frequency
    #[arg(long)]
    pub nu: Option<f64>,
    /// Natural phase frequency
    #[arg(long)]
    pub omega: Option<f64>,
    /// Coupling distribution
    #[arg(long, value_enum)]
    pub dist: Option<Dist>,
    /// Conformist fraction
    #[arg(long)]
    pub p: Option<f64>,
    /// Conformist coupling (or its mean)
    #[arg(long)]
    pub kp: Option<f64>,
    /// Contrarian coupling (or its mean)
    #[arg(long)]
    pub kn: Option<f64>,
    /// Gaussian mean
    #[arg(long)]
    pub mu: Option<f64>,
    /// Gaussian standard deviation
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Integration horizon
    #[arg(long)]
    pub t_end: Option<f64>,
    /// RK4 step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Record every k-th step
    #[arg(long)]
    pub sample_every: Option<usize>,
    /// RNG seed for couplings and initial state
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Observables file format
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// A manifest carries the resolved config under `config`.
fn config_from_json(text: &str) -> anyhow::Result<RunConfig> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let inner = match value.get("config") {
        Some(c) if value.get("tool").is_some() => c.clone(),
        _ => value,
    };
    Ok(serde_json::from_value(inner)?)
}

pub fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    config_from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

impl RunFlags {
    /// Applies flags on top of `base`.
    pub fn apply(&self, mut c: RunConfig) -> RunConfig {
        macro_rules! set {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { c.$field = v; })*
            };
        }
        set!(
            n => n, j => j, nu => nu, omega => omega, dist => dist, p => p, kp => k_p, kn => k_n,
            mu => mu, sigma => sigma, t_end => t_end, dt => dt, sample_every => sample_every,
            seed => seed, out => out, format => format,
        );
        c
    }
}
