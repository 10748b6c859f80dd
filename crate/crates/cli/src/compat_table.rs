//! Predicted discriminating power of each statistic subset, from the
//! asymptotic mean maps of the two models.

use std::path::Path;

use abcmc_core::models::{compatibility_report, Verdict};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiment::join_params;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatRow {
    pub statistic_set: String,
    pub true_model: usize,
    pub true_param: String,
    pub mu0: String,
    pub m1: String,
    pub m1_infimum: f64,
    pub m1_compatible: bool,
    pub m2: String,
    pub m2_infimum: f64,
    pub m2_compatible: bool,
    pub verdict: Verdict,
}

impl CompatRow {
    pub fn discriminant(&self) -> bool {
        self.verdict == Verdict::Discriminant
    }
}

/// One row per (statistic set, truth).
pub fn compatibility_rows(cfg: &ExperimentConfig) -> Result<Vec<CompatRow>, CliError> {
    cfg.validate()?;
    let [m1, m2] = &cfg.models;
    let mut rows = Vec::new();
    for set in &cfg.statistic_sets {
        for truth in &cfg.truths {
            let r = compatibility_report(m1, m2, &set.statistics, truth.model, &truth.param)?;
            rows.push(CompatRow {
                statistic_set: set.label(),
                true_model: truth.model,
                true_param: join_params(&truth.param),
                mu0: join_params(&r.mu0),
                m1: r.models[0].model.clone(),
                m1_infimum: r.models[0].infimum,
                m1_compatible: r.models[0].compatible,
                m2: r.models[1].model.clone(),
                m2_infimum: r.models[1].infimum,
                m2_compatible: r.models[1].compatible,
                verdict: r.verdict,
            });
        }
    }
    Ok(rows)
}

/// Writes the compatibility rows as CSV to `path`, or stdout when `None`.
pub fn emit_compatibility_table(cfg: &ExperimentConfig, path: Option<&Path>) -> Result<Vec<CompatRow>, CliError> {
    let rows = compatibility_rows(cfg)?;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in &rows {
            w.serialize(r).map_err(|e| CliError::io("compatibility table", e))?;
        }
        w.flush().map_err(|e| CliError::io("compatibility table", e))?;
    }
    match path {
        Some(p) => std::fs::write(p, buf).map_err(|e| CliError::io(p.display(), e))?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&buf).map_err(|e| CliError::io("stdout", e))?;
        }
    }
    Ok(rows)
}
