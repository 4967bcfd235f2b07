//! JSON run reports and benchmark manifests.

use serde::{Deserialize, Serialize};

use crate::colgen::{ColGenConfig, ColGenReport, PricingMode, PrimalStatus, SolveStatus};
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: InstanceInfo,
    pub config: ConfigInfo,
    pub result: ResultInfo,
    pub trace: Vec<TraceEntry>,
    pub totals: Totals,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub name: String,
    pub n: usize,
    pub m: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigInfo {
    pub epsilon: f64,
    pub p_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub time_limit_s: Option<f64>,
    pub seedless: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultInfo {
    pub status: SolveStatus,
    pub dual_objective: f64,
    pub primal_status: PrimalStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modularity_density: Option<f64>,
    /// True when `modularity_density` is only a lower bound.
    pub lower_bound_only: bool,
    pub clusters: Vec<Vec<String>>,
    pub certificate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub mode: PricingMode,
    pub columns_added: usize,
    pub master_objective: f64,
    pub elapsed_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub columns: usize,
    pub exact_calls: usize,
    pub duplicates_dropped: usize,
    pub wall_s: f64,
}

impl RunReport {
    pub fn new(name: &str, g: &Graph, cfg: &ColGenConfig, report: &ColGenReport) -> Self {
        let clusters = report
            .partition
            .as_ref()
            .map(|p| {
                p.clusters()
                    .iter()
                    .map(|c| c.iter().map(|v| g.label(v)).collect())
                    .collect()
            })
            .unwrap_or_default();
        Self {
            instance: InstanceInfo {
                name: name.to_string(),
                n: g.n(),
                m: g.m(),
            },
            config: ConfigInfo {
                epsilon: cfg.epsilon,
                p_grid: cfg.peel.p_grid.clone(),
                q_grid: cfg.peel.q_grid.clone(),
                time_limit_s: cfg.time_limit.map(|t| t.as_secs_f64()),
                seedless: true,
            },
            result: ResultInfo {
                status: report.status,
                dual_objective: report.dual_objective,
                primal_status: report.primal_status,
                modularity_density: report.modularity_density,
                lower_bound_only: !report.proved_optimal(),
                clusters,
                certificate: report.certificate,
            },
            trace: report
                .iterations
                .iter()
                .map(|it| TraceEntry {
                    iter: it.iteration,
                    mode: it.mode,
                    columns_added: it.columns_added,
                    master_objective: it.master_objective,
                    elapsed_s: it.elapsed.as_secs_f64(),
                })
                .collect(),
            totals: Totals {
                columns: report.total_columns(),
                exact_calls: report.exact_calls,
                duplicates_dropped: report.duplicates_dropped,
                wall_s: report.elapsed.as_secs_f64(),
            },
        }
    }

    /// Copy with every wall-clock field zeroed, for determinism checks.
    pub fn without_timings(&self) -> Self {
        let mut copy = self.clone();
        copy.totals.wall_s = 0.0;
        for entry in &mut copy.trace {
            entry.elapsed_s = 0.0;
        }
        copy
    }
}

/// One benchmark instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    #[serde(rename = "expected_D")]
    pub expected_d: f64,
    pub tolerance: f64,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub one_indexed: bool,
    /// Stretch rows are reported but never fail the run.
    #[serde(default)]
    pub optional: bool,
}
