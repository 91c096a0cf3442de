//! Proposal mining: regenerate proposals from a confidence map by a
//! threshold sweep, then chain them into tracks by tracking and absorbing.

mod regenerate;
mod tracker;
mod tracks;

pub use regenerate::{connected_components, inherit_features, regenerate, RegeneratedProposal};
pub use tracker::{FlowShiftTracker, TrackerPort};
pub use tracks::{mine_tracks, Mining, Track, TrackEntry};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl std::str::FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "four" | "4" => Ok(Connectivity::Four),
            "eight" | "8" => Ok(Connectivity::Eight),
            other => Err(Error::parse("connectivity", other.to_string())),
        }
    }
}

impl std::fmt::Display for Connectivity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Connectivity::Four => "four",
            Connectivity::Eight => "eight",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiningConfig {
    /// Number of threshold levels `L`; levels are `k / (L + 1)`, `k = 1..=L`.
    pub levels: u32,
    pub connectivity: Connectivity,
    /// Minimum box IoU for a proposal to be absorbed into a track.
    pub iou_absorb: f64,
    pub rng_seed: u64,
    pub min_region_area: u64,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            levels: 10,
            connectivity: Connectivity::Eight,
            iou_absorb: 0.5,
            rng_seed: 0,
            min_region_area: 9,
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::InvalidValue("mining levels must be >= 1".into()));
        }
        if !(self.iou_absorb > 0.0 && self.iou_absorb <= 1.0) {
            return Err(Error::InvalidValue(format!(
                "iou_absorb {} outside (0, 1]",
                self.iou_absorb
            )));
        }
        Ok(())
    }

    pub fn thresholds<T: crate::Scalar>(&self) -> Vec<T> {
        let denom = T::from_u32(self.levels + 1).unwrap();
        (1..=self.levels)
            .map(|k| T::from_u32(k).unwrap() / denom)
            .collect()
    }
}
