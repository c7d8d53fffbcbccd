//! Metrics report: the experiment report plus an echo of the configuration.

use serde::Serialize;

use commfield_core::experiments::ExperimentReport;

use crate::config::RunConfig;

#[derive(Serialize)]
struct MetricsDocument<'a> {
    scenario: &'a str,
    variants: &'a [commfield_core::experiments::VariantMetrics],
    provenance: &'a commfield_core::experiments::Provenance,
    seed: u64,
    config: &'a RunConfig,
}

/// Pretty-printed JSON; field order and float formatting are fixed, so equal
/// inputs give byte-identical documents.
pub fn format_metrics(report: &ExperimentReport, config: &RunConfig, seed: u64) -> String {
    let doc = MetricsDocument {
        scenario: &report.scenario,
        variants: &report.variants,
        provenance: &report.provenance,
        seed,
        config,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    text
}
