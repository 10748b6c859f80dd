//! Experiment configurations and the named experiment recipes.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use abcmc_core::abc::{AbcConfig, Resampling};
use abcmc_core::models::{
    gaussian_model, gk_quantile_model, laplace_model, popgen_model, GkVariant, ModelSpec, PopGenConfig, Topology,
};
use abcmc_core::numerics::{DistanceKind, SeedSpec, WeightedDistanceSpec};
use abcmc_core::stats::Statistic;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Bumped whenever an expansion changes.
pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 20_111_006;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    ValidateGl,
    ValidatePopgen,
    Custom,
}

impl ExperimentId {
    pub const NAMED: [ExperimentId; 8] = [
        ExperimentId::Fig1,
        ExperimentId::Fig2,
        ExperimentId::Fig3,
        ExperimentId::Fig4,
        ExperimentId::Fig5,
        ExperimentId::Fig6,
        ExperimentId::ValidateGl,
        ExperimentId::ValidatePopgen,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Fig1 => "fig1",
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Fig3 => "fig3",
            ExperimentId::Fig4 => "fig4",
            ExperimentId::Fig5 => "fig5",
            ExperimentId::Fig6 => "fig6",
            ExperimentId::ValidateGl => "validate_gl",
            ExperimentId::ValidatePopgen => "validate_popgen",
            ExperimentId::Custom => "custom",
        }
    }

    pub fn is_validation(self) -> bool {
        matches!(self, ExperimentId::ValidateGl | ExperimentId::ValidatePopgen)
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        ExperimentId::NAMED
            .iter()
            .chain(std::iter::once(&ExperimentId::Custom))
            .find(|id| id.as_str() == s)
            .copied()
            .ok_or_else(|| CliError::config("experiment_id", format!("unknown experiment `{s}`")))
    }
}

/// Statistics used together as one summary vector, with optional
/// per-component distance weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticSet {
    pub statistics: Vec<Statistic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl StatisticSet {
    pub fn new(statistics: Vec<Statistic>) -> Self {
        StatisticSet { statistics, weights: None }
    }

    pub fn label(&self) -> String {
        self.statistics.iter().map(Statistic::to_string).collect::<Vec<_>>().join("+")
    }

    pub fn distance(&self, kind: DistanceKind) -> WeightedDistanceSpec {
        match &self.weights {
            Some(w) => WeightedDistanceSpec { kind, weights: w.clone() },
            None => WeightedDistanceSpec::unweighted(kind, self.statistics.len()),
        }
    }
}

/// Data-generating model (1 or 2) and its parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub model: usize,
    pub param: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcSection {
    pub n_per_model: usize,
    pub tolerance_quantile: f64,
    pub distance: DistanceKind,
}

impl AbcSection {
    pub fn config_for(&self, set: &StatisticSet) -> AbcConfig {
        AbcConfig {
            n_total: 2 * self.n_per_model,
            tolerance_quantile: self.tolerance_quantile,
            distance: set.distance(self.distance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSection {
    #[serde(rename = "L")]
    pub l: usize,
    pub alpha: f64,
    pub resampling: Resampling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub format_version: u32,
    pub experiment_id: ExperimentId,
    pub models: [ModelSpec; 2],
    pub statistic_sets: Vec<StatisticSet>,
    /// Observations per dataset, or loci for the population-genetics models.
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub truths: Vec<Truth>,
    pub abc: AbcSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub popgen: Option<PopGenConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationSection>,
    pub seed: SeedSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Choices not fixed by the experiment's original description.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assumptions: Vec<String>,
}

const R_ASSUMPTION: &str = "replications=100 is assumed; the original figure does not state a replication count";

fn gl_pair() -> [ModelSpec; 2] {
    [gaussian_model(0.0, 4.0).expect("valid prior"), laplace_model(0.0, 4.0).expect("valid prior")]
}

fn gl_truths() -> Vec<Truth> {
    vec![Truth { model: 1, param: vec![0.0] }, Truth { model: 2, param: vec![0.0] }]
}

/// Demography shared by both population-genetics models.
pub fn popgen_demography(n_diploid: usize, n_loci: usize) -> PopGenConfig {
    PopGenConfig { ne: 60.0, t_prime: 60.0, t: 30.0, n_diploid, n_loci, topology: Topology::Pop3FromPop1 }
}

/// Both pop-gen models (population 3 from population 1, resp. 2) with the
/// mutation-rate prior U[1e-4, 1e-2].
pub fn popgen_pair(demography: &PopGenConfig) -> Result<[ModelSpec; 2], CliError> {
    let with = |topology| PopGenConfig { topology, ..demography.clone() };
    let build = |topology| popgen_model(with(topology), 1e-4, 1e-2).map_err(|e| CliError::config("popgen", e.to_string()));
    Ok([build(Topology::Pop3FromPop1)?, build(Topology::Pop3FromPop2)?])
}

fn popgen_truths() -> Vec<Truth> {
    vec![Truth { model: 1, param: vec![0.005] }, Truth { model: 2, param: vec![0.005] }]
}

fn base(id: ExperimentId, models: [ModelSpec; 2], sets: Vec<StatisticSet>, sample_sizes: Vec<usize>) -> ExperimentConfig {
    ExperimentConfig {
        format_version: FORMAT_VERSION,
        experiment_id: id,
        models,
        statistic_sets: sets,
        sample_sizes,
        replications: 100,
        truths: gl_truths(),
        abc: AbcSection { n_per_model: 5_000, tolerance_quantile: 0.01, distance: DistanceKind::Euclidean },
        popgen: None,
        validation: None,
        seed: SeedSpec::new(DEFAULT_SEED),
        output_dir: None,
        assumptions: vec![R_ASSUMPTION.to_string()],
    }
}

/// The fully explicit configuration of a named experiment.
pub fn expand_config(id: ExperimentId) -> Result<ExperimentConfig, CliError> {
    use Statistic::*;
    let one = |s: Vec<Statistic>| vec![StatisticSet::new(s)];
    Ok(match id {
        ExperimentId::Fig1 => base(id, gl_pair(), one(vec![Mean, Median, Variance]), vec![10, 100, 1000]),
        ExperimentId::Fig2 => base(id, gl_pair(), one(vec![Mad]), vec![10, 100, 1000]),
        ExperimentId::Fig3 => base(id, gl_pair(), one(vec![Moment(4)]), vec![100, 1000, 10_000]),
        ExperimentId::Fig4 => {
            let set = StatisticSet { statistics: vec![Moment(4), Moment(6)], weights: Some(vec![1.0, 0.01]) };
            base(id, gl_pair(), vec![set], vec![100, 1000, 10_000])
        }
        ExperimentId::Fig5 => {
            let sets = vec![
                StatisticSet::new(vec![Quantile(10)]),
                StatisticSet::new(vec![Quantile(10), Quantile(90)]),
                StatisticSet::new(vec![Quantile(10), Quantile(40), Quantile(60), Quantile(90)]),
            ];
            let models = [gk_quantile_model(GkVariant::M1GZero), gk_quantile_model(GkVariant::M2FreeG)];
            let mut cfg = base(id, models, sets, vec![100, 1000, 10_000]);
            cfg.abc.distance = DistanceKind::L1;
            cfg.truths = vec![Truth { model: 1, param: vec![2.0] }, Truth { model: 2, param: vec![1.0, 2.0] }];
            cfg.assumptions.clear();
            cfg.assumptions.push(
                "sample sizes n=100,1000,10000 are assumed; the original figure does not state them".to_string(),
            );
            cfg
        }
        ExperimentId::Fig6 => {
            let demography = popgen_demography(50, 100);
            let sets = vec![
                StatisticSet::new(vec![DeltaMuSq(1, 2)]),
                StatisticSet::new(vec![DeltaMuSq(1, 3), DeltaMuSq(2, 3)]),
                StatisticSet::new(vec![DeltaMuSq(1, 2), DeltaMuSq(1, 3), DeltaMuSq(2, 3)]),
            ];
            let mut cfg = base(id, popgen_pair(&demography)?, sets, vec![5, 50, 100]);
            cfg.abc = AbcSection { n_per_model: 100_000, tolerance_quantile: 0.005, distance: DistanceKind::Euclidean };
            cfg.truths = popgen_truths();
            cfg.popgen = Some(demography);
            cfg
        }
        ExperimentId::ValidateGl => {
            let sets = vec![
                StatisticSet::new(vec![Mean, Median, Variance]),
                StatisticSet::new(vec![Mean, Median, Variance, Mad]),
            ];
            let mut cfg = base(id, gl_pair(), sets, vec![1000]);
            cfg.abc.n_per_model = 50_000;
            cfg.truths = vec![Truth { model: 1, param: vec![0.0] }];
            cfg.validation = Some(ValidationSection { l: 500, alpha: 0.05, resampling: Resampling::Permutation });
            cfg.assumptions = vec![
                "observed data drawn from the Gaussian model at theta=0; the original text does not name the truth"
                    .to_string(),
                "sample size n=1000 is assumed".to_string(),
            ];
            cfg
        }
        ExperimentId::ValidatePopgen => {
            let demography = popgen_demography(50, 100);
            let sets = vec![
                StatisticSet::new(vec![DeltaMuSq(1, 2)]),
                StatisticSet::new(vec![DeltaMuSq(1, 3), DeltaMuSq(2, 3)]),
            ];
            let mut cfg = base(id, popgen_pair(&demography)?, sets, vec![100]);
            cfg.abc = AbcSection { n_per_model: 100_000, tolerance_quantile: 0.005, distance: DistanceKind::Euclidean };
            cfg.truths = vec![Truth { model: 1, param: vec![0.005] }];
            cfg.popgen = Some(demography);
            cfg.validation = Some(ValidationSection { l: 500, alpha: 0.05, resampling: Resampling::Permutation });
            cfg.assumptions = vec![
                "observed data drawn from model 1 at theta=0.005; the original text does not name the truth".to_string(),
            ];
            cfg
        }
        ExperimentId::Custom => {
            return Err(CliError::config("experiment_id", "`custom` has no expansion; supply a config file"))
        }
    })
}

fn scaled(x: usize, scale: f64) -> usize {
    ((x as f64 * scale).round() as usize).max(1)
}

impl ExperimentConfig {
    /// Shrinks (or grows) the reference tables, replication count and, for
    /// population-genetics experiments, loci and individuals by `scale`.
    /// Tolerance quantiles are unchanged.
    pub fn apply_scale(&mut self, scale: f64) -> Result<(), CliError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(CliError::config("scale", format!("scale must be positive, got {scale}")));
        }
        if scale == 1.0 {
            return Ok(());
        }
        self.abc.n_per_model = scaled(self.abc.n_per_model, scale);
        self.replications = scaled(self.replications, scale);
        if let Some(demography) = &mut self.popgen {
            demography.n_diploid = scaled(demography.n_diploid, scale);
            demography.n_loci = scaled(demography.n_loci, scale);
            for n in &mut self.sample_sizes {
                *n = scaled(*n, scale);
            }
            self.models = popgen_pair(demography)?;
        }
        self.assumptions.push(format!("scaled by {scale}"));
        Ok(())
    }

    pub fn all_statistics(&self) -> Vec<Statistic> {
        let mut all: Vec<Statistic> = Vec::new();
        for s in self.statistic_sets.iter().flat_map(|set| &set.statistics) {
            if !all.contains(s) {
                all.push(*s);
            }
        }
        all
    }

    pub fn is_popgen(&self) -> bool {
        self.models.iter().all(|m| matches!(m, ModelSpec::PopGen(_)))
    }

    /// Checks the configuration; errors name the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::config(
                "format_version",
                format!("expected {FORMAT_VERSION}, got {}", self.format_version),
            ));
        }
        if self.replications == 0 {
            return Err(CliError::config("replications", "must be at least 1"));
        }
        if self.sample_sizes.is_empty() {
            return Err(CliError::config("sample_sizes", "must not be empty"));
        }
        if let Some(i) = self.sample_sizes.iter().position(|&n| n == 0) {
            return Err(CliError::config(format!("sample_sizes[{i}]"), "must be positive"));
        }
        if self.statistic_sets.is_empty() {
            return Err(CliError::config("statistic_sets", "must not be empty"));
        }
        let scalar_models = self.models.iter().all(|m| !matches!(m, ModelSpec::PopGen(_)));
        if !scalar_models && !self.is_popgen() {
            return Err(CliError::config("models", "cannot mix population-genetics and scalar models"));
        }
        for (i, set) in self.statistic_sets.iter().enumerate() {
            let path = format!("statistic_sets[{i}]");
            if set.statistics.is_empty() {
                return Err(CliError::config(format!("{path}.statistics"), "must not be empty"));
            }
            if let Some(s) = set.statistics.iter().find(|s| s.is_scalar_data() != scalar_models) {
                return Err(CliError::config(
                    format!("{path}.statistics"),
                    format!("statistic `{s}` does not apply to these models"),
                ));
            }
            set.distance(self.abc.distance)
                .validate()
                .map_err(|e| CliError::config(format!("{path}.weights"), e.to_string()))?;
        }
        if self.truths.is_empty() {
            return Err(CliError::config("truths", "must not be empty"));
        }
        for (i, t) in self.truths.iter().enumerate() {
            if t.model != 1 && t.model != 2 {
                return Err(CliError::config(format!("truths[{i}].model"), "must be 1 or 2"));
            }
            let want = self.models[t.model - 1].param_dim();
            if t.param.len() != want || t.param.iter().any(|x| !x.is_finite()) {
                return Err(CliError::config(
                    format!("truths[{i}].param"),
                    format!("expected {want} finite value(s), got {:?}", t.param),
                ));
            }
        }
        if self.abc.n_per_model == 0 {
            return Err(CliError::config("abc.n_per_model", "must be at least 1"));
        }
        let q = self.abc.tolerance_quantile;
        if !(q > 0.0 && q <= 1.0) {
            return Err(CliError::config("abc.tolerance_quantile", format!("must lie in (0, 1], got {q}")));
        }
        if let Some(v) = &self.validation {
            if v.l < 2 {
                return Err(CliError::config("validation.L", "must be at least 2"));
            }
            if !(v.alpha > 0.0 && v.alpha < 1.0) {
                return Err(CliError::config("validation.alpha", format!("must lie in (0, 1), got {}", v.alpha)));
            }
        } else if self.experiment_id.is_validation() {
            return Err(CliError::config("validation", "required for validation experiments"));
        }
        if self.is_popgen() {
            let Some(demography) = &self.popgen else {
                return Err(CliError::config("popgen", "required for population-genetics models"));
            };
            demography.validate().map_err(|e| CliError::config("popgen", e.to_string()))?;
            for (i, m) in self.models.iter().enumerate() {
                if let ModelSpec::PopGen(p) = m {
                    let same = PopGenConfig { topology: demography.topology, ..p.config.clone() } == *demography;
                    if !same {
                        return Err(CliError::config(format!("models[{i}]"), "demography differs from `popgen`"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn abc_config(&self, set: &StatisticSet) -> AbcConfig {
        self.abc.config_for(set)
    }
}
