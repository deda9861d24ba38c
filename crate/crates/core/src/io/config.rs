//! JSON lab configuration. A file names an optional `preset` and may
//! replace any of its sections; unknown keys are rejected.
//!
//! ```json
//! { "preset": "desk-64", "ranges": { "max_targets": 5 } }
//! ```
//! Sections given in the file replace the preset's section as a whole;
//! fields missing inside `ranges` fall back to the generator defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::SplitConfig;
use crate::synth::{RadarConfig, SceneRanges};
use crate::tf::StftConfig;

pub const PRESETS: [&str; 2] = ["desk-64", "paper-table1"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    pub radar: RadarConfig,
    pub ranges: SceneRanges,
    pub stft: StftConfig,
    pub split: SplitConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    radar: Option<RadarConfig>,
    ranges: Option<SceneRanges>,
    stft: Option<StftConfig>,
    split: Option<SplitConfig>,
}

impl LabConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let (radar, stft, split) = match name {
            "desk-64" => (RadarConfig::desk_64(), StftConfig::desk_64(), SplitConfig::desk_64()),
            "paper-table1" => (RadarConfig::paper_table1(), StftConfig::paper_table1(), SplitConfig::paper_table1()),
            other => {
                return Err(Error::InvalidConfig(format!("unknown preset {other:?}, expected one of {PRESETS:?}")))
            }
        };
        Ok(LabConfig { radar, ranges: SceneRanges::default(), stft, split })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text)?;
        let mut cfg = Self::preset(raw.preset.as_deref().unwrap_or("desk-64"))?;
        if let Some(r) = raw.radar {
            cfg.radar = r;
        }
        if let Some(r) = raw.ranges {
            cfg.ranges = r;
        }
        if let Some(s) = raw.stft {
            cfg.stft = s;
        }
        if let Some(s) = raw.split {
            cfg.split = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// A preset name or the path of a JSON file.
    pub fn load(spec: &str) -> Result<Self> {
        if PRESETS.contains(&spec) {
            return Self::preset(spec);
        }
        let text = std::fs::read_to_string(Path::new(spec))
            .map_err(|e| Error::InvalidConfig(format!("cannot read config {spec}: {e}")))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.radar.validate()?;
        self.ranges.validate()?;
        self.stft.validate()?;
        self.split.validate_with(&self.stft)?;
        if self.radar.num_samples() < self.stft.window_length {
            return Err(Error::InvalidConfig(format!(
                "{} samples per sweep, window needs {}",
                self.radar.num_samples(),
                self.stft.window_length
            )));
        }
        Ok(())
    }
}
