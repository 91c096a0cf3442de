use std::fmt;
use std::str::FromStr;

use super::kv::{render, KvFile};
use crate::error::{Error, Result};
use crate::mining::MiningConfig;
use crate::scoring::ScoringConfig;
use crate::segmentation::SegmentationConfig;

/// Environment variable that, when set, overrides every RNG seed.
pub const SEED_ENV: &str = "TRACKCUT_SEED";

/// Which per-proposal value weights the first pooling stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolingWeight {
    /// Classifier confidence `c`.
    Classifier,
    /// Combined score times classifier confidence.
    Rescored,
}

impl FromStr for PoolingWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classifier" => Ok(PoolingWeight::Classifier),
            "rescored" => Ok(PoolingWeight::Rescored),
            other => Err(Error::parse("pooling.weight", other.to_string())),
        }
    }
}

impl fmt::Display for PoolingWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoolingWeight::Classifier => "classifier",
            PoolingWeight::Rescored => "rescored",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub delta: f64,
    pub lambda: f64,
    /// `None` selects up to all tracks.
    pub budget: Option<usize>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            delta: 0.3,
            lambda: 1.0,
            budget: None,
        }
    }
}

/// Every tunable of the pipeline. Serialized next to every output.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub scoring: ScoringConfig,
    pub pooling_weight: PoolingWeight,
    pub mining: MiningConfig,
    pub selection: SelectionConfig,
    pub segmentation: SegmentationConfig,
    /// Cell size of the grid superpixels used when a manifest has none.
    pub superpixel_cell: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            scoring: ScoringConfig::default(),
            pooling_weight: PoolingWeight::Classifier,
            mining: MiningConfig::default(),
            selection: SelectionConfig::default(),
            segmentation: SegmentationConfig::default(),
            superpixel_cell: 8,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::parse("config", format!("`{key}` = `{value}`: {e}")))
}

impl PipelineConfig {
    /// Defaults overridden by the keys of `kv`; unknown keys are an error.
    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, v) in kv.iter() {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let seg = &mut self.segmentation;
        match key {
            "scoring.normalization" => self.scoring.normalization = parse_value(key, value)?,
            "scoring.epsilon" => self.scoring.epsilon = parse_value(key, value)?,
            "pooling.weight" => self.pooling_weight = parse_value(key, value)?,
            "mining.levels" => self.mining.levels = parse_value(key, value)?,
            "mining.connectivity" => self.mining.connectivity = parse_value(key, value)?,
            "mining.iou_absorb" => self.mining.iou_absorb = parse_value(key, value)?,
            "mining.min_region_area" => self.mining.min_region_area = parse_value(key, value)?,
            "mining.seed" => self.mining.rng_seed = parse_value(key, value)?,
            "selection.delta" => self.selection.delta = parse_value(key, value)?,
            "selection.lambda" => self.selection.lambda = parse_value(key, value)?,
            "selection.budget" => {
                let k: usize = parse_value(key, value)?;
                self.selection.budget = (k > 0).then_some(k);
            }
            "segmentation.lambda_o" => seg.lambda_o = parse_value(key, value)?,
            "segmentation.lambda_p" => seg.lambda_p = parse_value(key, value)?,
            "segmentation.fg_threshold" => seg.fg_threshold = parse_value(key, value)?,
            "segmentation.bg_threshold" => seg.bg_threshold = parse_value(key, value)?,
            "segmentation.eps_prob" => seg.eps_prob = parse_value(key, value)?,
            "gmm.components" => seg.gmm.components = parse_value(key, value)?,
            "gmm.max_iters" => seg.gmm.max_iters = parse_value(key, value)?,
            "gmm.tol" => seg.gmm.tol = parse_value(key, value)?,
            "gmm.eps_cov" => seg.gmm.eps_cov = parse_value(key, value)?,
            "gmm.seed" => seg.gmm.seed = parse_value(key, value)?,
            "superpixel.grid_cell" => self.superpixel_cell = parse_value(key, value)?,
            other => return Err(Error::parse("config", format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `TRACKCUT_SEED` if it is set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            let seed: u64 = parse_value(SEED_ENV, v.trim())?;
            self.mining.rng_seed = seed;
            self.segmentation.gmm.seed = seed;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.mining.validate()?;
        self.segmentation.validate()?;
        let s = &self.selection;
        if !(s.delta >= 0.0) || !(s.lambda >= 0.0) {
            return Err(Error::InvalidValue(
                "selection.delta and selection.lambda must be >= 0".into(),
            ));
        }
        if !(self.scoring.epsilon >= 0.0) {
            return Err(Error::InvalidValue("scoring.epsilon must be >= 0".into()));
        }
        let g = &self.segmentation.gmm;
        if g.components == 0 || !(g.eps_cov > 0.0) || !(g.tol >= 0.0) {
            return Err(Error::InvalidValue("gmm settings out of range".into()));
        }
        if self.superpixel_cell == 0 {
            return Err(Error::InvalidValue(
                "superpixel.grid_cell must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn render(&self) -> String {
        let seg = &self.segmentation;
        render([
            (
                "scoring.normalization",
                self.scoring.normalization.to_string(),
            ),
            ("scoring.epsilon", self.scoring.epsilon.to_string()),
            ("pooling.weight", self.pooling_weight.to_string()),
            ("mining.levels", self.mining.levels.to_string()),
            ("mining.connectivity", self.mining.connectivity.to_string()),
            ("mining.iou_absorb", self.mining.iou_absorb.to_string()),
            (
                "mining.min_region_area",
                self.mining.min_region_area.to_string(),
            ),
            ("mining.seed", self.mining.rng_seed.to_string()),
            ("selection.delta", self.selection.delta.to_string()),
            ("selection.lambda", self.selection.lambda.to_string()),
            (
                "selection.budget",
                self.selection.budget.unwrap_or(0).to_string(),
            ),
            ("segmentation.lambda_o", seg.lambda_o.to_string()),
            ("segmentation.lambda_p", seg.lambda_p.to_string()),
            ("segmentation.fg_threshold", seg.fg_threshold.to_string()),
            ("segmentation.bg_threshold", seg.bg_threshold.to_string()),
            ("segmentation.eps_prob", seg.eps_prob.to_string()),
            ("gmm.components", seg.gmm.components.to_string()),
            ("gmm.max_iters", seg.gmm.max_iters.to_string()),
            ("gmm.tol", seg.gmm.tol.to_string()),
            ("gmm.eps_cov", seg.gmm.eps_cov.to_string()),
            ("gmm.seed", seg.gmm.seed.to_string()),
            ("superpixel.grid_cell", self.superpixel_cell.to_string()),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_round_trips() {
        let mut cfg = PipelineConfig::default();
        cfg.set("selection.delta", "0.25").unwrap();
        cfg.set("mining.connectivity", "four").unwrap();
        cfg.set("selection.budget", "3").unwrap();
        let back = PipelineConfig::from_kv(&KvFile::parse(&cfg.render(), "t").unwrap()).unwrap();
        assert_eq!(back, cfg);
        let defaults = PipelineConfig::from_kv(
            &KvFile::parse(&PipelineConfig::default().render(), "t").unwrap(),
        )
        .unwrap();
        assert_eq!(defaults, PipelineConfig::default());
    }

    #[test]
    fn unknown_and_invalid_keys() {
        let mut cfg = PipelineConfig::default();
        assert!(cfg.set("selection.gamma", "1").is_err());
        assert!(cfg.set("mining.levels", "ten").is_err());
        let kv = KvFile::parse("mining.iou_absorb = 1.5\n", "t").unwrap();
        assert!(PipelineConfig::from_kv(&kv).is_err());
    }
}
