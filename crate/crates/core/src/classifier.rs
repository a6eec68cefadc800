//! Decision tree from trailing-window statistics to a collective state.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateLabel {
    StaticSync,
    Polarized,
    StaticPhaseWave,
    StaticAsync,
    BreathingPolarized,
    Swirling,
    ActiveBands,
    Unclassified,
}

impl StateLabel {
    pub const ALL: [StateLabel; 8] = [
        StateLabel::StaticSync,
        StateLabel::Polarized,
        StateLabel::StaticPhaseWave,
        StateLabel::StaticAsync,
        StateLabel::BreathingPolarized,
        StateLabel::Swirling,
        StateLabel::ActiveBands,
        StateLabel::Unclassified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StateLabel::StaticSync => "static_sync",
            StateLabel::Polarized => "polarized",
            StateLabel::StaticPhaseWave => "static_phase_wave",
            StateLabel::StaticAsync => "static_async",
            StateLabel::BreathingPolarized => "breathing_polarized",
            StateLabel::Swirling => "swirling",
            StateLabel::ActiveBands => "active_bands",
            StateLabel::Unclassified => "unclassified",
        }
    }

    pub fn is_static(self) -> bool {
        matches!(
            self,
            StateLabel::StaticSync | StateLabel::Polarized | StateLabel::StaticPhaseWave | StateLabel::StaticAsync
        )
    }

    pub fn is_unsteady(self) -> bool {
        matches!(self, StateLabel::BreathingPolarized | StateLabel::Swirling | StateLabel::ActiveBands)
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StateLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown state label `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierThresholds<T> {
    pub v_static: T,
    pub s_high: T,
    pub s_low: T,
    pub frac_high: T,
    pub frac_low: T,
}

impl<T: Scalar> Default for ClassifierThresholds<T> {
    fn default() -> Self {
        Self {
            v_static: T::lit(1e-3),
            s_high: T::lit(0.9),
            s_low: T::lit(0.1),
            frac_high: T::lit(0.9),
            frac_low: T::lit(0.1),
        }
    }
}

impl<T: Scalar> ClassifierThresholds<T> {
    pub fn validate(&self) -> Result<()> {
        let (z, o) = (T::zero(), T::one());
        if !(z < self.s_low && self.s_low < self.s_high && self.s_high < o) {
            return Err(Error::InvalidConfig("thresholds need 0 < s_low < s_high < 1".into()));
        }
        if !(z <= self.frac_low && self.frac_low < self.frac_high && self.frac_high <= o) {
            return Err(Error::InvalidConfig("thresholds need 0 <= frac_low < frac_high <= 1".into()));
        }
        if !(self.v_static > z) {
            return Err(Error::InvalidConfig("v_static must be positive".into()));
        }
        Ok(())
    }
}

/// Post-transient summary fed to [`classify`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats<T> {
    pub s_max: T,
    pub s_min: T,
    pub v: T,
    pub frac_x: T,
    pub frac_theta: T,
}

pub fn classify<T: Scalar>(stats: &SummaryStats<T>, th: &ClassifierThresholds<T>) -> StateLabel {
    let s = stats;
    if s.v < th.v_static {
        if s.s_min > th.s_high {
            StateLabel::StaticSync
        } else if s.s_max > th.s_high && s.s_min >= th.s_low {
            StateLabel::Polarized
        } else if s.s_max > th.s_high && s.s_min < th.s_low {
            StateLabel::StaticPhaseWave
        } else if s.s_max < th.s_low {
            StateLabel::StaticAsync
        } else {
            StateLabel::Unclassified
        }
    } else if s.frac_x < th.frac_low && s.frac_theta < th.frac_low {
        StateLabel::BreathingPolarized
    } else if s.frac_x > th.frac_high && s.frac_theta > th.frac_high {
        StateLabel::ActiveBands
    } else if s.frac_x > th.frac_high {
        StateLabel::Swirling
    } else {
        StateLabel::Unclassified
    }
}
