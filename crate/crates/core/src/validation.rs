//! Checks whether a summary statistic can separate two models.
//!
//! Under each model, parameters are drawn from the ABC posterior given the
//! observed summary and fresh summaries are simulated at them. If both models
//! reproduce the same predictive mean, the statistic carries no information
//! for choosing between them. The two mean estimates are compared with a
//! chi-square test on `(μ̂₁−μ̂₂)ᵀ(V₁+V₂)⁻¹(μ̂₁−μ̂₂)`.

use serde::{Deserialize, Serialize};

use crate::abc::{build_reference_table, model_posterior, predictive_sample, run_rejection, AbcConfig, ReferenceTable, Resampling};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::numerics::{chi_square_sf, solve_spd, SeedSpec};
use crate::stats::{compose_statistics, Sample, Statistic, SummaryVector};

pub const DEFAULT_L: usize = 500;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    /// The predictive means differ: the statistic can tell the models apart.
    #[serde(rename = "reject_H0_statistic_usable")]
    RejectStatisticUsable,
    /// No detectable difference: the statistic is inadequate for model choice.
    #[serde(rename = "fail_to_reject_H0_statistic_inadequate")]
    FailToRejectStatisticInadequate,
}

impl Decision {
    pub fn rejects(self) -> bool {
        self == Decision::RejectStatisticUsable
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::RejectStatisticUsable => "reject_H0_statistic_usable",
            Decision::FailToRejectStatisticInadequate => "fail_to_reject_H0_statistic_inadequate",
        }
    }
}

/// Where the predictive samples came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: SeedSpec,
    pub statistics: Vec<Statistic>,
    pub table_rows: usize,
    pub sample_size: usize,
    pub l: usize,
    pub resampling: Resampling,
    /// Per-model tolerance of the within-model rejection step.
    pub tolerance: [f64; 2],
    pub accepted_counts: [usize; 2],
    /// Posterior probability of model 1 from rejection over the whole table.
    pub posterior_prob_m1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub mu_hat_1: SummaryVector,
    pub mu_hat_2: SummaryVector,
    #[serde(rename = "V1")]
    pub v1: Vec<Vec<f64>>,
    #[serde(rename = "V2")]
    pub v2: Vec<Vec<f64>>,
    pub statistic: f64,
    pub dof: u32,
    pub p_value: f64,
    pub regularized: bool,
    pub decision: Decision,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<Provenance>,
}

/// Mean of the draws and the covariance of that mean (empirical covariance
/// with divisor `L−1`, divided by `L`).
pub fn estimate_predictive_mean(draws: &[SummaryVector]) -> Result<(SummaryVector, Vec<Vec<f64>>)> {
    let l = draws.len();
    if l < 2 {
        return Err(Error::domain(format!("need at least 2 draws to estimate a covariance, got {l}")));
    }
    let d = draws[0].len();
    if draws.iter().any(|x| x.len() != d) {
        return Err(Error::shape("draws have differing dimensions"));
    }
    let lf = l as f64;
    let mean: Vec<f64> = (0..d).map(|j| draws.iter().map(|x| x[j]).sum::<f64>() / lf).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for x in draws {
        let dev: Vec<f64> = x.iter().zip(&mean).map(|(v, m)| v - m).collect();
        for (row, da) in cov.iter_mut().zip(&dev) {
            for (c, db) in row.iter_mut().zip(&dev) {
                *c += da * db;
            }
        }
    }
    for c in cov.iter_mut().flatten() {
        *c /= (lf - 1.0) * lf;
    }
    Ok((mean, cov))
}

/// Chi-square test of equal means given each mean's covariance.
pub fn common_mean_test(
    mu1: &[f64],
    cov1: &[Vec<f64>],
    mu2: &[f64],
    cov2: &[Vec<f64>],
    alpha: f64,
) -> Result<ValidationReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("significance level must lie in (0, 1), got {alpha}")));
    }
    let d = mu1.len();
    if d == 0 || mu2.len() != d {
        return Err(Error::shape(format!("mean vectors have dimensions {} and {}", d, mu2.len())));
    }
    for cov in [cov1, cov2] {
        if cov.len() != d || cov.iter().any(|r| r.len() != d) {
            return Err(Error::shape(format!("covariance must be {d}x{d}")));
        }
    }
    let diff: Vec<f64> = mu1.iter().zip(mu2).map(|(a, b)| a - b).collect();
    let sum: Vec<Vec<f64>> = cov1
        .iter()
        .zip(cov2)
        .map(|(r1, r2)| r1.iter().zip(r2).map(|(a, b)| a + b).collect())
        .collect();
    let solved = solve_spd(&sum, &diff)?;
    let statistic = diff.iter().zip(&solved.x).map(|(a, b)| a * b).sum::<f64>().max(0.0);
    let dof = d as u32;
    let p_value = chi_square_sf(statistic, dof)?;
    let decision = if p_value < alpha { Decision::RejectStatisticUsable } else { Decision::FailToRejectStatisticInadequate };
    Ok(ValidationReport {
        mu_hat_1: mu1.to_vec(),
        mu_hat_2: mu2.to_vec(),
        v1: cov1.to_vec(),
        v2: cov2.to_vec(),
        statistic,
        dof,
        p_value,
        regularized: solved.regularized,
        decision,
        provenance: None,
    })
}

/// Size of the predictive samples, test level and resampling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveSettings {
    pub l: usize,
    pub alpha: f64,
    pub resampling: Resampling,
}

impl Default for PredictiveSettings {
    fn default() -> Self {
        PredictiveSettings { l: DEFAULT_L, alpha: DEFAULT_ALPHA, resampling: Resampling::Permutation }
    }
}

/// Full pipeline: reference table, per-model ABC posteriors at the observed
/// summary, predictive summaries and the common-mean test.
#[allow(clippy::too_many_arguments)]
pub fn validate_statistic_choice(
    m1: &ModelSpec,
    m2: &ModelSpec,
    specs: &[Statistic],
    observed: &Sample,
    abc_cfg: &AbcConfig,
    l: usize,
    alpha: f64,
    seed: SeedSpec,
) -> Result<ValidationReport> {
    abc_cfg.validate()?;
    let settings = PredictiveSettings { l, alpha, ..PredictiveSettings::default() };
    let table = build_reference_table(m1, m2, specs, abc_cfg.n_total / 2, observed.len(), seed.child(1))?;
    let t_obs = compose_statistics(specs, observed)?;
    validate_with_table(&table, m1, m2, &t_obs, abc_cfg, &settings, seed)
}

/// As [`validate_statistic_choice`] with a prebuilt table (whose statistics
/// are those tested) and an already summarized observation. Each model's
/// posterior keeps the `tolerance_quantile` fraction of that model's rows
/// closest to the observation.
pub fn validate_with_table(
    table: &ReferenceTable,
    m1: &ModelSpec,
    m2: &ModelSpec,
    observed: &[f64],
    abc_cfg: &AbcConfig,
    settings: &PredictiveSettings,
    seed: SeedSpec,
) -> Result<ValidationReport> {
    let specs = table.statistics().to_vec();
    let sample_size = table.meta().sample_size;
    let joint = run_rejection(table, observed, abc_cfg)?;
    let models = [m1, m2];
    let mut means = Vec::with_capacity(2);
    let mut tolerance = [0.0; 2];
    let mut accepted_counts = [0; 2];
    for (i, model) in models.iter().enumerate() {
        let post = model_posterior(table, i + 1, observed, abc_cfg.tolerance_quantile, &abc_cfg.distance)?;
        if post.params.is_empty() {
            return Err(Error::InsufficientAcceptance { model: i + 1 });
        }
        tolerance[i] = post.tolerance;
        accepted_counts[i] = post.params.len();
        let draws = predictive_sample(
            &post.params,
            model,
            &specs,
            settings.l,
            sample_size,
            seed.path(&[2, i as u64 + 1]),
            settings.resampling,
        )?;
        means.push(estimate_predictive_mean(&draws)?);
    }
    let mut report = common_mean_test(&means[0].0, &means[0].1, &means[1].0, &means[1].1, settings.alpha)?;
    report.provenance = Some(Provenance {
        seed,
        statistics: specs,
        table_rows: table.len(),
        sample_size,
        l: settings.l,
        resampling: settings.resampling,
        tolerance,
        accepted_counts,
        posterior_prob_m1: joint.posterior_prob_m1,
    });
    Ok(report)
}
