//! Campaign configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::layer_model::LayerTypeLaw;
use crate::limits::{Regime, VarianceMethod};
use crate::motif::{CountBudget, Motif, MotifSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// JSON schema describing [`CampaignConfig`].
pub const CONFIG_SCHEMA: &str = include_str!("../../schema/campaign.schema.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub schema_version: u32,
    pub n: u64,
    /// Number of layers; exclusive with `nu`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    /// Layer ratio with `m = round(nu * n)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    pub motif: MotifSpec,
    pub law: LayerTypeLaw,
    pub replicates: u64,
    pub regime: Regime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub toggles: Toggles,
    /// Variance method for the normal regime; chosen automatically when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<VarianceMethod>,
    /// Size of the independent `S_F*` batch used by the stable regime
    /// (defaults to `replicates`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_replicates: Option<u64>,
    /// Upper order statistics used by the Hill estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hill_k: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    /// Largest host accepted by the general counting kernel.
    #[serde(default = "default_max_host")]
    pub max_host_vertices: usize,
    /// Wall-clock limit per replicate in milliseconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicate_wall_ms: Option<u64>,
}

fn default_max_host() -> usize {
    CountBudget::default().max_host_vertices
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { max_host_vertices: default_max_host(), replicate_wall_ms: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Toggles {
    #[serde(default)]
    pub dump_graphs: bool,
    #[serde(default)]
    pub h_f: bool,
    #[serde(default)]
    pub clustering: bool,
    /// Record wall-clock runtimes (makes output run-dependent).
    #[serde(default)]
    pub timings: bool,
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: CampaignConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::ConfigInvalid(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} is not {SCHEMA_VERSION}", self.schema_version));
        }
        if self.n == 0 || self.n > u32::MAX as u64 {
            return bad(format!("n = {} out of range", self.n));
        }
        match (self.m, self.nu) {
            (Some(_), Some(_)) => return bad("give exactly one of m and nu, not both".into()),
            (None, None) => return bad("one of m and nu is required".into()),
            (None, Some(nu)) if !(nu > 0.0 && nu.is_finite()) => return bad(format!("nu = {nu} must be positive")),
            _ => {}
        }
        if self.layers() == 0 {
            return bad("the campaign needs at least one layer".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.regime == Regime::Stable {
            match self.alpha {
                Some(a) if a > 0.0 && a < 2.0 && a != 1.0 => {}
                Some(a) => return bad(format!("alpha = {a} must lie in (0, 2) and differ from 1")),
                None => return bad("the stable regime requires alpha".into()),
            }
        }
        if self.reference_replicates == Some(0) {
            return bad("reference_replicates must be at least 1".into());
        }
        let motif = self.motif().map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
        if !motif.is_two_connected() {
            return bad("motif must be 2-connected".into());
        }
        Ok(())
    }

    /// Resolved layer count.
    pub fn layers(&self) -> u64 {
        match (self.m, self.nu) {
            (Some(m), _) => m,
            (None, Some(nu)) => (nu * self.n as f64).round() as u64,
            (None, None) => 0,
        }
    }

    pub fn motif(&self) -> Result<Motif, crate::motif::MotifError> {
        self.motif.build()
    }

    pub fn count_budget(&self) -> CountBudget {
        CountBudget { max_host_vertices: self.budgets.max_host_vertices }
    }
}
