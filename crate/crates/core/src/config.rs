//! `cano.toml`: every knob of the pipeline and the service in one file.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::candidates::CandidateConfig;
use crate::criteria::CriterionConfig;
use crate::error::{Error, Result};
use crate::io::LoadOptions;
use crate::stability::{StabilityHeuristic, SupportConfig};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub load: LoadSection,
    pub criterion: CriterionSection,
    pub support: SupportConfig,
    pub stability: StabilitySection,
    pub candidates: CandidatesSection,
    pub service: ServiceSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadSection {
    pub sample_count: usize,
    pub seed: u64,
}

impl Default for LoadSection {
    fn default() -> Self {
        let d = LoadOptions::default();
        LoadSection {
            sample_count: d.sample_count,
            seed: d.seed,
        }
    }
}

/// Angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriterionSection {
    pub grid_step_deg: f64,
    pub refine: bool,
    pub refine_tolerance_deg: f64,
    /// Radians.
    pub gaussian_sigma: f64,
    pub semantic_weight_floor: f64,
}

impl Default for CriterionSection {
    fn default() -> Self {
        let d = CriterionConfig::default();
        CriterionSection {
            grid_step_deg: d.grid_step.to_degrees(),
            refine: d.refine,
            refine_tolerance_deg: d.refine_tolerance.to_degrees(),
            gaussian_sigma: d.gaussian_sigma,
            semantic_weight_floor: d.semantic_weight_floor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    pub lambda: f64,
}

impl Default for StabilitySection {
    fn default() -> Self {
        StabilitySection {
            lambda: StabilityHeuristic::default().lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CandidatesSection {
    /// Decimate clouds to this many points for the yaw searches; 0 keeps all.
    pub search_points: usize,
}

impl Default for CandidatesSection {
    fn default() -> Self {
        CandidatesSection { search_points: 512 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceSection {
    pub lease_seconds: u64,
    pub preview_points: usize,
    pub retry_after_seconds: u64,
}

impl Default for ServiceSection {
    fn default() -> Self {
        ServiceSection {
            lease_seconds: 120,
            preview_points: 4096,
            retry_after_seconds: 30,
        }
    }
}

impl AppConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: AppConfig = toml::from_str(&text).map_err(|e| crate::io::toml_error(path, &text, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.load.sample_count == 0 {
            return Err(Error::InvalidInput("load.sample_count must be positive".into()));
        }
        if self.service.lease_seconds == 0 {
            return Err(Error::InvalidInput("service.lease_seconds must be positive".into()));
        }
        if self.service.preview_points == 0 || self.service.preview_points > 4096 {
            return Err(Error::InvalidInput("service.preview_points must be in 1..=4096".into()));
        }
        self.criterion().validate()
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            sample_count: self.load.sample_count,
            seed: self.load.seed,
        }
    }

    pub fn criterion(&self) -> CriterionConfig {
        CriterionConfig {
            grid_step: self.criterion.grid_step_deg.to_radians(),
            refine: self.criterion.refine,
            refine_tolerance: self.criterion.refine_tolerance_deg.to_radians(),
            gaussian_sigma: self.criterion.gaussian_sigma,
            semantic_weight_floor: self.criterion.semantic_weight_floor,
        }
    }

    pub fn candidate_config(&self) -> CandidateConfig {
        CandidateConfig {
            criterion: self.criterion(),
            support: self.support,
            search_points: (self.candidates.search_points > 0).then_some(self.candidates.search_points),
        }
    }

    pub fn scorer(&self) -> StabilityHeuristic {
        StabilityHeuristic {
            lambda: self.stability.lambda,
        }
    }
}
