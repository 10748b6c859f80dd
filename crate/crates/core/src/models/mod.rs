//! Generative models: priors, data simulators and, where available, the
//! analytic asymptotic means `μ(θ)` of each summary statistic.

mod coalescent;
mod compat;
mod gk;
mod scalar;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use coalescent::{
    drop_mutations, simulate_genealogy, GenNode, Genealogy, PopGenConfig, PopGenModel, Topology,
};
pub use compat::{
    compatibility_report, mean_map_infimum, CompatibilityReport, ModelCompatibility, Verdict, GRID_POINTS,
    REFINE_STEPS, TOL_COMPAT,
};
pub use gk::{gk_quantile, GkModel, GkVariant};
pub use scalar::{GaussianModel, LaplaceModel, LAPLACE_SCALE};

use crate::error::{Error, Result};
use crate::numerics::SeedSpec;
use crate::stats::{Sample, Statistic, SummaryVector};

/// One of the competing models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Gaussian(GaussianModel),
    Laplace(LaplaceModel),
    GAndK(GkModel),
    PopGen(PopGenModel),
}

pub fn gaussian_model(prior_mean: f64, prior_var: f64) -> Result<ModelSpec> {
    GaussianModel::new(prior_mean, prior_var).map(ModelSpec::Gaussian)
}

pub fn laplace_model(prior_mean: f64, prior_var: f64) -> Result<ModelSpec> {
    LaplaceModel::new(prior_mean, prior_var).map(ModelSpec::Laplace)
}

pub fn gk_quantile_model(variant: GkVariant) -> ModelSpec {
    ModelSpec::GAndK(GkModel::new(variant))
}

pub fn popgen_model(cfg: PopGenConfig, prior_lo: f64, prior_hi: f64) -> Result<ModelSpec> {
    PopGenModel::new(cfg, prior_lo, prior_hi).map(ModelSpec::PopGen)
}

impl ModelSpec {
    /// Identifier used in experiment configs.
    pub fn id(&self) -> &'static str {
        match self {
            ModelSpec::Gaussian(_) => "gaussian",
            ModelSpec::Laplace(_) => "laplace",
            ModelSpec::GAndK(m) => match m.variant {
                GkVariant::M1GZero => "gk1",
                GkVariant::M2FreeG => "gk2",
            },
            ModelSpec::PopGen(m) => match m.config.topology {
                Topology::Pop3FromPop1 => "popgen1",
                Topology::Pop3FromPop2 => "popgen2",
            },
        }
    }

    pub fn param_dim(&self) -> usize {
        match self {
            ModelSpec::GAndK(m) => m.param_dim(),
            _ => 1,
        }
    }

    pub fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            ModelSpec::Gaussian(m) => vec![m.sample_prior(rng)],
            ModelSpec::Laplace(m) => vec![m.sample_prior(rng)],
            ModelSpec::GAndK(m) => m.sample_prior(rng),
            ModelSpec::PopGen(m) => vec![m.sample_prior(rng)],
        }
    }

    /// Simulates a dataset of size `n` (observations, or loci for the
    /// population-genetics models).
    pub fn simulate<R: Rng + ?Sized>(&self, theta: &[f64], n: usize, rng: &mut R) -> Result<Sample> {
        self.check_params(theta)?;
        if n == 0 {
            return Err(Error::domain("sample size must be positive"));
        }
        Ok(match self {
            ModelSpec::Gaussian(m) => Sample::Scalar(m.simulate(theta[0], n, rng)),
            ModelSpec::Laplace(m) => Sample::Scalar(m.simulate(theta[0], n, rng)),
            ModelSpec::GAndK(m) => Sample::Scalar(m.simulate(theta, n, rng)?),
            ModelSpec::PopGen(m) => Sample::Microsat(m.simulate(theta[0], n, rng)?),
        })
    }

    pub fn simulate_seeded(&self, theta: &[f64], n: usize, seed: SeedSpec) -> Result<Sample> {
        self.simulate(theta, n, &mut seed.rng())
    }

    /// Asymptotic mean of `stat` at `theta`.
    pub fn mean_map(&self, theta: &[f64], stat: Statistic) -> Result<f64> {
        self.check_params(theta)?;
        let value = match self {
            ModelSpec::Gaussian(m) => m.mean_map(theta[0], stat),
            ModelSpec::Laplace(m) => m.mean_map(theta[0], stat),
            ModelSpec::GAndK(m) => m.mean_map(theta, stat),
            ModelSpec::PopGen(m) => m.mean_map(theta[0], stat),
        };
        value.ok_or_else(|| Error::Unsupported(format!("model `{}` has no mean map for `{stat}`", self.id())))
    }

    pub fn mean_vector(&self, theta: &[f64], specs: &[Statistic]) -> Result<SummaryVector> {
        specs.iter().map(|&s| self.mean_map(theta, s)).collect()
    }

    /// Closed box over which the infimum of `|μ(θ) − μ₀|` is searched: the
    /// prior support, or ±10 prior standard deviations for Gaussian priors.
    pub fn search_box(&self) -> Vec<(f64, f64)> {
        match self {
            ModelSpec::Gaussian(m) => vec![m.prior_box()],
            ModelSpec::Laplace(m) => vec![m.prior_box()],
            ModelSpec::GAndK(m) => m.prior_box(),
            ModelSpec::PopGen(m) => vec![(m.prior_lo, m.prior_hi)],
        }
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.param_dim() {
            return Err(Error::shape(format!(
                "model `{}` takes {} parameter(s), got {}",
                self.id(),
                self.param_dim(),
                theta.len()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("non-finite model parameter"));
        }
        Ok(())
    }
}
