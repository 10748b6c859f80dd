//! Replicated experiment runs.
//!
//! For every sample size one reference table is simulated with the union of
//! all statistics and reused by every replication and statistic set. The
//! observed dataset of a (sample size, truth, replication) cell is shared by
//! all statistic sets, so the sets are compared on identical data.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use abcmc_core::abc::{build_reference_table, run_rejection, ReferenceTable};
use abcmc_core::stats::compose_statistics;
use abcmc_core::validation::{validate_with_table, PredictiveSettings};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::summary::{summarize, Summary};

pub const RECORDS_FILE: &str = "records.csv";
pub const CONFIG_FILE: &str = "config_expanded.json";
pub const SUMMARY_FILE: &str = "summary.json";

const RECORDS_HEADER: &str = "\
# One row per (statistic set, sample size, truth, replication) cell.
# statistic_set: statistics joined by '+'; sample_size: observations (loci for pop-gen)
# truth_index/true_model/true_param: data-generating model and parameter (';'-separated)
# posterior_prob_m1, bayes_factor_12 (inf when no model-2 row is accepted), tolerance, accepted_m1, accepted_m2: rejection ABC over the whole table
# statistic, dof, p_value, regularized, decision: common-mean test (validation experiments only)
";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub statistic_set: String,
    pub sample_size: usize,
    pub truth_index: usize,
    pub true_model: usize,
    pub true_param: String,
    pub replication: usize,
    pub posterior_prob_m1: f64,
    pub bayes_factor_12: f64,
    pub tolerance: f64,
    pub accepted_m1: usize,
    pub accepted_m2: usize,
    pub statistic: Option<f64>,
    pub dof: Option<u32>,
    pub p_value: Option<f64>,
    pub regularized: Option<bool>,
    pub decision: Option<String>,
}

type CellKey = (usize, usize, usize, usize);

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Keep the records already in the output directory and only compute
    /// the missing cells.
    pub resume: bool,
    /// Print one progress line per sample size to stderr.
    pub progress: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<ReplicationRecord>,
    pub summary: Summary,
    pub dir: PathBuf,
}

pub fn join_params(p: &[f64]) -> String {
    p.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

/// Reads `records.csv`, skipping the `#` header comment.
pub fn read_records(path: &Path) -> Result<Vec<ReplicationRecord>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::io(path.display(), e))?;
    reader
        .deserialize()
        .collect::<Result<Vec<ReplicationRecord>, _>>()
        .map_err(|e| CliError::io(path.display(), e))
}

fn write_records(path: &Path, records: &[ReplicationRecord]) -> Result<(), CliError> {
    let mut out = Vec::new();
    out.extend_from_slice(RECORDS_HEADER.as_bytes());
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for r in records {
            w.serialize(r).map_err(|e| CliError::io(path.display(), e))?;
        }
        w.flush().map_err(|e| CliError::io(path.display(), e))?;
    }
    fs::write(path, out).map_err(|e| CliError::io(path.display(), e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path.display(), e))?;
    text.push('\n');
    fs::File::create(path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|e| CliError::io(path.display(), e))
}

impl ExperimentConfig {
    fn key_of(&self, r: &ReplicationRecord) -> Option<CellKey> {
        let set = self.statistic_sets.iter().position(|s| s.label() == r.statistic_set)?;
        let n = self.sample_sizes.iter().position(|&n| n == r.sample_size)?;
        (r.truth_index < self.truths.len() && r.replication < self.replications)
            .then_some((set, n, r.truth_index, r.replication))
    }
}

/// Runs every cell of `cfg` and writes `records.csv`, `config_expanded.json`
/// and `summary.json` into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path, opts: &RunOptions) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir.display(), e))?;
    let records_path = out_dir.join(RECORDS_FILE);
    let config_path = out_dir.join(CONFIG_FILE);

    let mut done: BTreeMap<CellKey, ReplicationRecord> = BTreeMap::new();
    if opts.resume && records_path.exists() {
        let previous: ExperimentConfig = fs::read_to_string(&config_path)
            .map_err(|e| CliError::io(config_path.display(), e))
            .and_then(|t| serde_json::from_str(&t).map_err(|e| CliError::io(config_path.display(), e)))?;
        if previous != *cfg {
            return Err(CliError::config("resume", "output directory holds a run with a different configuration"));
        }
        for r in read_records(&records_path)? {
            if let Some(key) = cfg.key_of(&r) {
                done.insert(key, r);
            }
        }
    }
    write_json(&config_path, cfg)?;

    let all = cfg.all_statistics();
    let set_columns: Vec<Vec<usize>> = cfg
        .statistic_sets
        .iter()
        .map(|set| set.statistics.iter().map(|s| all.iter().position(|a| a == s).expect("statistic in union")).collect())
        .collect();
    let [m1, m2] = &cfg.models;

    for (n_idx, &n) in cfg.sample_sizes.iter().enumerate() {
        let pending: Vec<(usize, usize)> = (0..cfg.truths.len())
            .flat_map(|t| (0..cfg.replications).map(move |rep| (t, rep)))
            .filter(|&(t, rep)| (0..cfg.statistic_sets.len()).any(|s| !done.contains_key(&(s, n_idx, t, rep))))
            .collect();
        if pending.is_empty() {
            continue;
        }
        if opts.progress {
            eprintln!(
                "{}: n={n}: simulating {} reference rows, {} cells",
                cfg.experiment_id,
                2 * cfg.abc.n_per_model,
                pending.len() * cfg.statistic_sets.len()
            );
        }
        let table = build_reference_table(m1, m2, &all, cfg.abc.n_per_model, n, cfg.seed.path(&[1, n_idx as u64]))?;
        let projected: Vec<ReferenceTable> =
            set_columns.iter().map(|cols| table.project(cols)).collect::<Result<_, _>>()?;

        let fresh: Vec<Vec<(CellKey, ReplicationRecord)>> = pending
            .par_iter()
            .map(|&(t, rep)| -> Result<_, CliError> {
                let truth = &cfg.truths[t];
                let model = &cfg.models[truth.model - 1];
                let cell_seed = cfg.seed.path(&[2, n_idx as u64, t as u64, rep as u64]);
                let observed = model.simulate_seeded(&truth.param, n, cell_seed)?;
                let summary = compose_statistics(&all, &observed)?;
                let mut out = Vec::new();
                for (s, set) in cfg.statistic_sets.iter().enumerate() {
                    let key = (s, n_idx, t, rep);
                    if done.contains_key(&key) {
                        continue;
                    }
                    let obs: Vec<f64> = set_columns[s].iter().map(|&c| summary[c]).collect();
                    let abc_cfg = cfg.abc_config(set);
                    let result = run_rejection(&projected[s], &obs, &abc_cfg)?;
                    let mut record = ReplicationRecord {
                        statistic_set: set.label(),
                        sample_size: n,
                        truth_index: t,
                        true_model: truth.model,
                        true_param: join_params(&truth.param),
                        replication: rep,
                        posterior_prob_m1: result.posterior_prob_m1,
                        bayes_factor_12: result.bayes_factor_12,
                        tolerance: result.tolerance,
                        accepted_m1: result.accepted_counts[0],
                        accepted_m2: result.accepted_counts[1],
                        statistic: None,
                        dof: None,
                        p_value: None,
                        regularized: None,
                        decision: None,
                    };
                    if let Some(v) = &cfg.validation {
                        let settings = PredictiveSettings { l: v.l, alpha: v.alpha, resampling: v.resampling };
                        let seed = cfg.seed.path(&[3, n_idx as u64, t as u64, rep as u64, s as u64]);
                        let report = validate_with_table(&projected[s], m1, m2, &obs, &abc_cfg, &settings, seed)?;
                        record.statistic = Some(report.statistic);
                        record.dof = Some(report.dof);
                        record.p_value = Some(report.p_value);
                        record.regularized = Some(report.regularized);
                        record.decision = Some(report.decision.as_str().to_string());
                    }
                    out.push((key, record));
                }
                Ok(out)
            })
            .collect::<Result<_, _>>()?;
        done.extend(fresh.into_iter().flatten());
        // flush after every sample size so an interrupted run can resume
        let records: Vec<ReplicationRecord> = done.values().cloned().collect();
        write_records(&records_path, &records)?;
    }

    let records: Vec<ReplicationRecord> = done.into_values().collect();
    write_records(&records_path, &records)?;
    let summary = summarize(cfg, &records);
    write_json(&out_dir.join(SUMMARY_FILE), &summary)?;
    Ok(RunOutput { records, summary, dir: out_dir.to_path_buf() })
}
