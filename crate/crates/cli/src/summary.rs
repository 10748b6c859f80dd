//! Per-cell quartiles of the posterior probability of model 1.

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::experiment::ReplicationRecord;

pub const QUANTILE_RULE: &str = "sorted values x[0..m]; q(p) = x[j] + (h - j)(x[j+1] - x[j]) with h = (m-1)p, j = floor(h)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub statistic_set: String,
    pub sample_size: usize,
    pub truth_index: usize,
    pub true_model: usize,
    pub true_param: String,
    pub replications: usize,
    pub posterior_prob_m1: Quartiles,
    /// Fraction of replications whose common-mean test rejected.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment_id: String,
    pub quantile_rule: String,
    pub cells: Vec<CellSummary>,
}

impl Summary {
    pub fn cell(&self, statistic_set: &str, sample_size: usize, truth_index: usize) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.statistic_set == statistic_set && c.sample_size == sample_size && c.truth_index == truth_index)
    }
}

/// Linear-interpolation quantile of `xs` (any order) at `p ∈ [0, 1]`.
pub fn interpolated_quantile(xs: &[f64], p: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * p;
    let j = h.floor() as usize;
    if j + 1 >= v.len() {
        return v[v.len() - 1];
    }
    v[j] + (h - j as f64) * (v[j + 1] - v[j])
}

pub fn quartiles(xs: &[f64]) -> Quartiles {
    Quartiles {
        q25: interpolated_quantile(xs, 0.25),
        q50: interpolated_quantile(xs, 0.5),
        q75: interpolated_quantile(xs, 0.75),
    }
}

/// One entry per (statistic set, sample size, truth) with at least one record,
/// in configuration order.
pub fn summarize(cfg: &ExperimentConfig, records: &[ReplicationRecord]) -> Summary {
    let mut cells = Vec::new();
    for set in &cfg.statistic_sets {
        let label = set.label();
        for &n in &cfg.sample_sizes {
            for (t, truth) in cfg.truths.iter().enumerate() {
                let rows: Vec<&ReplicationRecord> = records
                    .iter()
                    .filter(|r| r.statistic_set == label && r.sample_size == n && r.truth_index == t)
                    .collect();
                if rows.is_empty() {
                    continue;
                }
                let probs: Vec<f64> = rows.iter().map(|r| r.posterior_prob_m1).collect();
                let decided: Vec<bool> = rows
                    .iter()
                    .filter_map(|r| r.decision.as_deref().map(|d| d.starts_with("reject")))
                    .collect();
                let rejection_rate = (!decided.is_empty())
                    .then(|| decided.iter().filter(|&&d| d).count() as f64 / decided.len() as f64);
                cells.push(CellSummary {
                    statistic_set: label.clone(),
                    sample_size: n,
                    truth_index: t,
                    true_model: truth.model,
                    true_param: crate::experiment::join_params(&truth.param),
                    replications: rows.len(),
                    posterior_prob_m1: quartiles(&probs),
                    rejection_rate,
                });
            }
        }
    }
    Summary { experiment_id: cfg.experiment_id.to_string(), quantile_rule: QUANTILE_RULE.to_string(), cells }
}
