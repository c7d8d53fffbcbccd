use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Metrics for one variant of a scenario. Unused metrics are omitted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantMetrics {
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exterior_mismatch: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior_leakage: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contour_straightness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_spread: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl VariantMetrics {
    pub fn new(variant: impl Into<String>) -> Self {
        Self {
            variant: variant.into(),
            ..Default::default()
        }
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }

    fn values(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        let named = [
            ("exterior_mismatch", self.exterior_mismatch),
            ("interior_leakage", self.interior_leakage),
            ("contour_straightness", self.contour_straightness),
            ("arrival_spread", self.arrival_spread),
        ];
        named
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .chain(self.extra.iter().map(|(k, v)| (k.clone(), *v)))
    }
}

/// Settings the metrics were produced with.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    /// Cell counts of every mesh used, `[n_i, n_j]`.
    pub grids: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub scenario: String,
    pub variants: Vec<VariantMetrics>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn variant(&self, name: &str) -> Option<&VariantMetrics> {
        self.variants.iter().find(|v| v.variant == name)
    }

    /// All metrics must be finite and non-negative.
    pub fn validate(&self) -> Result<()> {
        for v in &self.variants {
            for (key, value) in v.values() {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(Error::Validation(format!(
                        "metric `{key}` of variant `{}` is {value}",
                        v.variant
                    )));
                }
            }
        }
        Ok(())
    }
}
