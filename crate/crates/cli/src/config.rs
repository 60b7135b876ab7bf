//! Run configuration: a JSON file validated against the schema shipped at
//! docs/config.schema.json, with command-line flag overrides.

use serde::{Deserialize, Serialize};
use shears::boundary::MapDescriptor;
use std::path::PathBuf;

/// All knobs of every subcommand. Unknown fields are rejected, ranges are
/// checked in [`RunConfig::validate`] before any computation starts.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Primary map descriptor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<MapDescriptor>,
    /// Second map for the two-map metrics.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map2: Option<MapDescriptor>,
    /// Tesselation depth.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    /// Fan-window radius cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kmax: Option<u32>,
    /// Sampler seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker threads (0 = serial).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallel: Option<usize>,
    /// Output path; stdout when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Counter-example parameter list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    /// Disk points for the extend command.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    /// Polar grid radii for beltrami / lemma3.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_radii: Option<Vec<f64>>,
    /// Angles per radius in the polar grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_angles: Option<usize>,
    /// Unit-cross-ratio sample count for the metric estimators.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
    /// Minimal-scale targets for degenerating samples (strictly decreasing).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    /// Samples per scale.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_scale: Option<usize>,
    /// Generation thresholds for the asymptotic shear distance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<u32>>,
    /// Distortion bound for the five-quadruple control.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma3_bound: Option<f64>,
    /// Newton residual tolerance for the extension.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extend_tol: Option<f64>,
    /// Shear-table CSV consumed by the reconstruct command.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shear_input: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if let Some(d) = self.depth {
            if d > shears::farey::MAX_DEPTH {
                return Err(format!(
                    "depth {d} exceeds the supported maximum {}",
                    shears::farey::MAX_DEPTH
                ));
            }
        }
        if let Some(ns) = &self.n_list {
            if ns.is_empty() {
                return Err("n_list must not be empty".into());
            }
            if ns.iter().any(|&n| n < 2) {
                return Err("every counter-example parameter must satisfy n >= 2".into());
            }
        }
        if let Some(points) = &self.points {
            if points.iter().any(|p| (p[0] * p[0] + p[1] * p[1]).sqrt() > 0.999) {
                return Err("extend points must satisfy |z| <= 0.999".into());
            }
        }
        if let Some(radii) = &self.grid_radii {
            if radii.iter().any(|&r| !(0.0..=0.999).contains(&r)) {
                return Err("grid radii must lie in [0, 0.999]".into());
            }
        }
        if let Some(scales) = &self.scales {
            if scales.iter().any(|&s| !(s > 0.0)) || scales.windows(2).any(|w| w[1] >= w[0]) {
                return Err("scales must be positive and strictly decreasing".into());
            }
        }
        if let Some(t) = self.extend_tol {
            if !(t > 0.0 && t < 1e-3) {
                return Err("extend_tol must lie in (0, 1e-3)".into());
            }
        }
        if let Some(b) = self.lemma3_bound {
            if !(b > 0.0) {
                return Err("lemma3_bound must be positive".into());
            }
        }
        if let Some(c) = self.sample_count {
            if c == 0 {
                return Err("sample_count must be positive".into());
            }
        }
        if let Some(p) = self.per_scale {
            if p == 0 {
                return Err("per_scale must be positive".into());
            }
        }
        Ok(())
    }
}
