use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionConfig {
    /// Yaw grid spacing in radians; must divide 2π evenly.
    pub grid_step: f64,
    /// Golden-section refinement around the best grid cell.
    pub refine: bool,
    /// Final bracket width of the refinement, radians.
    pub refine_tolerance: f64,
    /// Standard deviation (radians) of the Gaussians centred on the
    /// geometric energy minima.
    pub gaussian_sigma: f64,
    /// Lower bound on the semantic objective.
    pub semantic_weight_floor: f64,
}

impl Default for CriterionConfig {
    fn default() -> Self {
        CriterionConfig {
            grid_step: 1f64.to_radians(),
            refine: true,
            refine_tolerance: 0.05f64.to_radians(),
            gaussian_sigma: 1.0,
            semantic_weight_floor: 1e-12,
        }
    }
}

impl CriterionConfig {
    pub fn validate(&self) -> Result<()> {
        let cells = TAU / self.grid_step;
        if !(self.grid_step > 0.0) || (cells - cells.round()).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "grid step {}° does not divide 360°",
                self.grid_step.to_degrees()
            )));
        }
        if !(self.gaussian_sigma > 0.0) {
            return Err(Error::InvalidInput("gaussian sigma must be positive".into()));
        }
        if !(self.refine_tolerance > 0.0) {
            return Err(Error::InvalidInput("refine tolerance must be positive".into()));
        }
        if !(self.semantic_weight_floor > 0.0) {
            return Err(Error::InvalidInput("semantic weight floor must be positive".into()));
        }
        Ok(())
    }

    pub fn grid_len(&self) -> usize {
        (TAU / self.grid_step).round() as usize
    }

    /// `i * grid_step` for `i` in `0..grid_len`.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.grid_len()).map(|i| i as f64 * self.grid_step).collect()
    }
}
