//! Rejection ABC model choice between two models.
//!
//! A reference table holds equally many prior simulations from each model.
//! Rows whose summaries fall within the `q`-quantile of the distances to the
//! observed summary are accepted; the accepted model frequencies estimate the
//! posterior model probabilities and the accepted parameters form the
//! per-model posterior samples.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::numerics::{empirical_quantile, weighted_distance, SeedSpec, WeightedDistanceSpec};
use crate::stats::{compose_statistics, Statistic, SummaryVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    /// 1 or 2.
    pub model: usize,
    pub params: Vec<f64>,
    pub summary: SummaryVector,
}

/// Metadata written next to the CSV form of a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub models: [String; 2],
    pub statistics: Vec<Statistic>,
    pub n_per_model: usize,
    pub sample_size: usize,
    pub seed: SeedSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    rows: Vec<TableRow>,
    meta: TableMeta,
}

impl ReferenceTable {
    /// Rows for model 1 come first, then rows for model 2.
    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    pub fn meta(&self) -> &TableMeta {
        &self.meta
    }

    pub fn statistics(&self) -> &[Statistic] {
        &self.meta.statistics
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.meta.statistics.len()
    }

    pub fn count(&self, model: usize) -> usize {
        self.rows.iter().filter(|r| r.model == model).count()
    }

    /// Builds a table from existing rows, checking the invariants.
    pub fn from_rows(rows: Vec<TableRow>, meta: TableMeta) -> Result<Self> {
        let d = meta.statistics.len();
        for (i, row) in rows.iter().enumerate() {
            if row.model != 1 && row.model != 2 {
                return Err(Error::domain(format!("row {i}: model index {} is not 1 or 2", row.model)));
            }
            if row.summary.len() != d {
                return Err(Error::shape(format!("row {i}: summary has {} components, expected {d}", row.summary.len())));
            }
        }
        let table = ReferenceTable { rows, meta };
        if table.count(1) != table.count(2) {
            return Err(Error::domain(format!(
                "unequal row counts per model ({} vs {})",
                table.count(1),
                table.count(2)
            )));
        }
        Ok(table)
    }

    /// Keeps only the summary components at `indices`, in that order.
    pub fn project(&self, indices: &[usize]) -> Result<ReferenceTable> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.dim()) {
            return Err(Error::shape(format!("column {bad} out of range for dimension {}", self.dim())));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| TableRow {
                model: r.model,
                params: r.params.clone(),
                summary: indices.iter().map(|&i| r.summary[i]).collect(),
            })
            .collect();
        let mut meta = self.meta.clone();
        meta.statistics = indices.iter().map(|&i| self.meta.statistics[i]).collect();
        Ok(ReferenceTable { rows, meta })
    }

    /// Projects onto the named statistics, which must all be in the table.
    pub fn select(&self, specs: &[Statistic]) -> Result<ReferenceTable> {
        let indices = specs
            .iter()
            .map(|s| {
                self.meta
                    .statistics
                    .iter()
                    .position(|t| t == s)
                    .ok_or_else(|| Error::shape(format!("statistic `{s}` is not in the reference table")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.project(&indices)
    }

    fn max_param_dim(&self) -> usize {
        self.rows.iter().map(|r| r.params.len()).max().unwrap_or(0)
    }

    /// Columnar CSV: `model_index, param_1..param_k, T_1..T_d`. Parameters
    /// missing for the lower-dimensional model are left empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let k = self.max_param_dim();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["model_index".to_string()];
        header.extend((1..=k).map(|i| format!("param_{i}")));
        header.extend((1..=self.dim()).map(|i| format!("T_{i}")));
        w.write_record(&header).map_err(io_error)?;
        for row in &self.rows {
            let mut rec = vec![row.model.to_string()];
            rec.extend((0..k).map(|i| row.params.get(i).map(f64::to_string).unwrap_or_default()));
            rec.extend(row.summary.iter().map(f64::to_string));
            w.write_record(&rec).map_err(io_error)?;
        }
        w.flush().map_err(io_error)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, meta: TableMeta) -> Result<ReferenceTable> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers().map_err(io_error)?.clone();
        let k = headers.iter().filter(|h| h.starts_with("param_")).count();
        let d = headers.iter().filter(|h| h.starts_with("T_")).count();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(io_error)?;
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::domain(format!("bad number `{s}`: {e}")));
            let model = rec[0].parse::<usize>().map_err(|e| Error::domain(format!("bad model index: {e}")))?;
            let params = (1..=k).filter(|&i| !rec[i].is_empty()).map(|i| num(&rec[i])).collect::<Result<_>>()?;
            let summary = (k + 1..=k + d).map(|i| num(&rec[i])).collect::<Result<_>>()?;
            rows.push(TableRow { model, params, summary });
        }
        ReferenceTable::from_rows(rows, meta)
    }

    /// Writes `<stem>.csv` and the `<stem>.json` sidecar.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let csv_file = File::create(stem.with_extension("csv")).map_err(io_error)?;
        self.write_csv(BufWriter::new(csv_file))?;
        let json = serde_json::to_string_pretty(&self.meta).map_err(io_error)?;
        std::fs::write(stem.with_extension("json"), json).map_err(io_error)
    }

    pub fn load(stem: &Path) -> Result<ReferenceTable> {
        let json = std::fs::read_to_string(stem.with_extension("json")).map_err(io_error)?;
        let meta: TableMeta = serde_json::from_str(&json).map_err(io_error)?;
        let csv_file = File::open(stem.with_extension("csv")).map_err(io_error)?;
        ReferenceTable::read_csv(BufReader::new(csv_file), meta)
    }
}

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::Domain(format!("i/o: {e}"))
}

/// Simulates `n_per_model` prior draws from each model. Row `i` of model `m`
/// uses the stream `seed.path(&[m, i])`, so the table does not depend on how
/// the work is scheduled.
pub fn build_reference_table(
    m1: &ModelSpec,
    m2: &ModelSpec,
    specs: &[Statistic],
    n_per_model: usize,
    sample_size: usize,
    seed: SeedSpec,
) -> Result<ReferenceTable> {
    if n_per_model == 0 {
        return Err(Error::domain("n_per_model must be at least 1"));
    }
    if specs.is_empty() {
        return Err(Error::domain("at least one statistic is required"));
    }
    let models = [m1, m2];
    let rows = (0..2 * n_per_model)
        .into_par_iter()
        .map(|idx| {
            let (m, i) = (idx / n_per_model, idx % n_per_model);
            let model = models[m];
            let mut rng = seed.path(&[m as u64 + 1, i as u64]).rng();
            let params = model.sample_prior(&mut rng);
            let summary = model
                .simulate(&params, sample_size, &mut rng)
                .and_then(|s| compose_statistics(specs, &s))
                .map_err(|e| Error::Row { model: m + 1, row: i, source: Box::new(e) })?;
            Ok(TableRow { model: m + 1, params, summary })
        })
        .collect::<Result<Vec<_>>>()?;
    ReferenceTable::from_rows(
        rows,
        TableMeta {
            models: [m1.id().to_string(), m2.id().to_string()],
            statistics: specs.to_vec(),
            n_per_model,
            sample_size,
            seed,
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcConfig {
    /// Reference-table size, both models together.
    pub n_total: usize,
    pub tolerance_quantile: f64,
    pub distance: WeightedDistanceSpec,
}

impl AbcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance_quantile > 0.0 && self.tolerance_quantile <= 1.0) {
            return Err(Error::domain(format!(
                "tolerance quantile must lie in (0, 1], got {}",
                self.tolerance_quantile
            )));
        }
        if self.n_total == 0 || !self.n_total.is_multiple_of(2) {
            return Err(Error::domain(format!("n_total must be a positive even number, got {}", self.n_total)));
        }
        self.distance.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcResult {
    pub tolerance: f64,
    /// Indices into the table rows, ascending.
    pub accepted: Vec<usize>,
    pub accepted_counts: [usize; 2],
    pub posterior_prob_m1: f64,
    pub posterior_prob_m2: f64,
    /// `+inf` when every accepted row comes from model 1.
    #[serde(serialize_with = "ser_extended", deserialize_with = "de_extended")]
    pub bayes_factor_12: f64,
    /// Accepted parameter vectors of model 1 and model 2.
    pub accepted_params: [Vec<Vec<f64>>; 2],
}

impl AbcResult {
    pub fn accepted_params_for(&self, model: usize) -> Result<&[Vec<f64>]> {
        match model {
            1 | 2 => Ok(&self.accepted_params[model - 1]),
            _ => Err(Error::domain(format!("model index must be 1 or 2, got {model}"))),
        }
    }
}

fn ser_extended<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_infinite() && *x > 0.0 {
        s.serialize_str("+inf")
    } else {
        s.serialize_f64(*x)
    }
}

fn de_extended<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(x) => Ok(x),
        Repr::Text(t) if t == "+inf" || t == "inf" => Ok(f64::INFINITY),
        Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"+inf\", got `{t}`"))),
    }
}

fn distances(rows: &[&TableRow], observed: &[f64], spec: &WeightedDistanceSpec) -> Result<Vec<f64>> {
    rows.par_iter().map(|r| weighted_distance(&r.summary, observed, spec)).collect()
}

fn check_observed(table: &ReferenceTable, observed: &[f64], spec: &WeightedDistanceSpec) -> Result<()> {
    if observed.len() != table.dim() {
        return Err(Error::shape(format!(
            "observed summary has {} components, table has {}",
            observed.len(),
            table.dim()
        )));
    }
    if spec.dim() != table.dim() {
        return Err(Error::shape(format!("distance has {} weights, table has {} statistics", spec.dim(), table.dim())));
    }
    Ok(())
}

/// Accepts every row whose distance to `observed` is at most the
/// `tolerance_quantile` quantile of all distances.
pub fn run_rejection(table: &ReferenceTable, observed: &[f64], cfg: &AbcConfig) -> Result<AbcResult> {
    cfg.validate()?;
    check_observed(table, observed, &cfg.distance)?;
    if cfg.n_total != table.len() {
        return Err(Error::shape(format!("config expects {} rows, table has {}", cfg.n_total, table.len())));
    }
    let rows: Vec<&TableRow> = table.rows.iter().collect();
    let dist = distances(&rows, observed, &cfg.distance)?;
    let tolerance = empirical_quantile(&dist, cfg.tolerance_quantile)?;

    let accepted: Vec<usize> = (0..dist.len()).filter(|&i| dist[i] <= tolerance).collect();
    let mut accepted_params: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
    for &i in &accepted {
        let row = &table.rows[i];
        accepted_params[row.model - 1].push(row.params.clone());
    }
    let counts = [accepted_params[0].len(), accepted_params[1].len()];
    let total = (counts[0] + counts[1]) as f64;
    let p1 = counts[0] as f64 / total;
    let p2 = counts[1] as f64 / total;
    let bayes_factor_12 = if counts[1] == 0 { f64::INFINITY } else { counts[0] as f64 / counts[1] as f64 };
    Ok(AbcResult {
        tolerance,
        accepted,
        accepted_counts: counts,
        posterior_prob_m1: p1,
        posterior_prob_m2: p2,
        bayes_factor_12,
        accepted_params,
    })
}

/// ABC posterior of one model's parameter, using only that model's rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPosterior {
    pub model: usize,
    pub tolerance: f64,
    /// Indices into the full table, ascending.
    pub accepted: Vec<usize>,
    pub params: Vec<Vec<f64>>,
}

/// Rejection restricted to the rows of `model`, with the tolerance taken as
/// the `tolerance_quantile` quantile of those rows' distances.
pub fn model_posterior(
    table: &ReferenceTable,
    model: usize,
    observed: &[f64],
    tolerance_quantile: f64,
    distance: &WeightedDistanceSpec,
) -> Result<ModelPosterior> {
    if model != 1 && model != 2 {
        return Err(Error::domain(format!("model index must be 1 or 2, got {model}")));
    }
    check_observed(table, observed, distance)?;
    let index: Vec<usize> = (0..table.len()).filter(|&i| table.rows[i].model == model).collect();
    let rows: Vec<&TableRow> = index.iter().map(|&i| &table.rows[i]).collect();
    let dist = distances(&rows, observed, distance)?;
    let tolerance = empirical_quantile(&dist, tolerance_quantile)?;
    let accepted: Vec<usize> = (0..dist.len()).filter(|&j| dist[j] <= tolerance).map(|j| index[j]).collect();
    let params = accepted.iter().map(|&i| table.rows[i].params.clone()).collect();
    Ok(ModelPosterior { model, tolerance, accepted, params })
}

/// How posterior parameters are drawn for predictive simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resampling {
    /// Independent uniform draws from the accepted set.
    #[default]
    WithReplacement,
    /// A random ordering of the accepted set, cycled when `L` exceeds it.
    /// With `L` equal to the accepted count every accepted parameter is
    /// used exactly once.
    Permutation,
}

/// Simulates `l` summaries at parameters drawn from `params`. Draw `j`
/// simulates on the stream `seed.path(&[1, j])`.
pub fn predictive_sample(
    params: &[Vec<f64>],
    model: &ModelSpec,
    specs: &[Statistic],
    l: usize,
    sample_size: usize,
    seed: SeedSpec,
    resampling: Resampling,
) -> Result<Vec<SummaryVector>> {
    if l == 0 {
        return Err(Error::domain("predictive sample size L must be at least 1"));
    }
    let mut rng = seed.child(0).rng();
    let picks: Vec<usize> = match resampling {
        Resampling::WithReplacement => (0..l).map(|_| rng.random_range(0..params.len())).collect(),
        Resampling::Permutation => {
            let mut order: Vec<usize> = (0..params.len()).collect();
            order.shuffle(&mut rng);
            (0..l).map(|j| order[j % order.len()]).collect()
        }
    };
    picks
        .into_par_iter()
        .enumerate()
        .map(|(j, p)| {
            let sample = model.simulate_seeded(&params[p], sample_size, seed.path(&[1, j as u64]))?;
            compose_statistics(specs, &sample)
        })
        .collect()
}

/// `L` fresh summaries from `model` at parameters resampled uniformly with
/// replacement from the accepted set of `model_index`.
pub fn posterior_predictive_sample(
    result: &AbcResult,
    model_index: usize,
    model: &ModelSpec,
    specs: &[Statistic],
    l: usize,
    sample_size: usize,
    seed: SeedSpec,
) -> Result<Vec<SummaryVector>> {
    if l == 0 {
        return Err(Error::domain("predictive sample size L must be at least 1"));
    }
    let params = result.accepted_params_for(model_index)?;
    if params.is_empty() {
        return Err(Error::InsufficientAcceptance { model: model_index });
    }
    predictive_sample(params, model, specs, l, sample_size, seed, Resampling::WithReplacement)
}
