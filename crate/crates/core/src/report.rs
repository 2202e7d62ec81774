//! Machine-readable pipeline report with full configuration provenance.
//!
//! Serialization is deterministic: struct field order fixes the key order and
//! serde_json prints the shortest round-tripping float representation. The
//! optional `generated_at` timestamp is the only non-reproducible field and
//! is off by default.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::aggregate::MacroAggregate;
use crate::centrality::CentralityReport;
use crate::corpus::Direction;
use crate::factors::{FactorAssignment, FactorModel};
use crate::matrix::ProfileOrientation;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvironmentSummary {
    pub size_before_drop: usize,
    pub size_after_drop: usize,
    pub dropped: Vec<String>,
}

/// Echo of every configuration decision that shaped the run. Feeding these
/// values back into the pipeline reproduces the outputs byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub min_count: u64,
    pub k_mode: String,
    pub k: usize,
    pub threshold: f64,
    pub orientation: ProfileOrientation,
    pub zero_diagonal: bool,
    pub kaiser_normalize: bool,
    pub classification: String,
    pub varimax_tolerance: f64,
    pub varimax_max_sweeps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub impact_factor_cutoff: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub factor_labels: BTreeMap<usize, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorRow {
    pub id: String,
    pub factor: usize,
    pub loadings: Vec<f64>,
    pub communality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorSummary {
    pub k: usize,
    pub extraction_eigenvalues: Vec<f64>,
    pub rotated_eigenvalues: Vec<f64>,
    pub variance_proportions: Vec<f64>,
    pub table: Vec<FactorRow>,
}

impl FactorSummary {
    pub fn from_models(
        extraction: &FactorModel,
        rotated: &FactorModel,
        assignment: &FactorAssignment,
    ) -> Self {
        let table = rotated
            .journals()
            .iter()
            .enumerate()
            .map(|(i, id)| FactorRow {
                id: id.clone(),
                factor: assignment.get(id).map(|(f, _)| f).unwrap_or(0),
                loadings: rotated.loadings_row(i).to_vec(),
                communality: rotated.communalities()[i],
            })
            .collect();
        FactorSummary {
            k: rotated.factor_count(),
            extraction_eigenvalues: extraction.eigenvalues().to_vec(),
            rotated_eigenvalues: rotated.eigenvalues().to_vec(),
            variance_proportions: rotated.variance_proportions().to_vec(),
            table,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub corpus_label: String,
    pub focal: String,
    pub direction: Direction,
    pub environment: EnvironmentSummary,
    pub config: ConfigEcho,
    pub factors: FactorSummary,
    pub aggregate: MacroAggregate,
    pub centrality: CentralityReport,
    pub notes: Vec<String>,
}

/// Serialize the report as pretty JSON with a trailing newline.
pub fn emit_report(report: &PipelineReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serialization is infallible");
    text.push('\n');
    text
}
