//! JSON run report with stable key order, diffable across runs.

use super::metrics::Metrics;
use crate::engine::SolveResult;
use crate::model::{CollapsedInstance, SolverConfig};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub status: String,
    pub objective: Option<f64>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub rel_gap: Option<f64>,
    pub constant_term: f64,
    pub k: usize,
    pub n: usize,
    pub d: usize,
    pub nodes: u64,
    pub wall_time_s: f64,
    pub time_per_node_s: f64,
    pub core_hours: f64,
    pub threads: usize,
    pub seed: u64,
    pub centroids: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
    pub config: SolverConfig,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl Report {
    pub fn from_result(
        result: &SolveResult,
        inst: &CollapsedInstance,
        config: &SolverConfig,
        metrics: Option<Metrics>,
    ) -> Self {
        Report {
            status: result.status.as_str().to_string(),
            objective: result.best.as_ref().map(|s| s.objective),
            lower_bound: finite(result.lb),
            upper_bound: finite(result.ub),
            rel_gap: finite(result.rel_gap),
            constant_term: inst.constant,
            k: inst.k,
            n: inst.original_n(),
            d: inst.dim(),
            nodes: result.stats.nodes_processed,
            wall_time_s: result.stats.wall_time_s,
            time_per_node_s: result.stats.time_per_node_s,
            core_hours: result.stats.core_hours,
            threads: config.threads,
            seed: config.seed,
            centroids: result
                .best
                .as_ref()
                .map(|s| s.centroids.clone())
                .unwrap_or_default(),
            assignment: result
                .best
                .as_ref()
                .map(|s| s.assignment.clone())
                .unwrap_or_default(),
            metrics,
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
