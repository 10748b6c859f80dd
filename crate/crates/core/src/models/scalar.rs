use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use rand::Rng;
use rand_distr::{Distribution, Normal, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::std_normal_quantile;
use crate::stats::Statistic;

/// Laplace scale `1/√2`, giving unit variance.
pub const LAPLACE_SCALE: f64 = FRAC_1_SQRT_2;

fn normal_prior(prior_mean: f64, prior_var: f64) -> Result<Normal<f64>> {
    if !(prior_var > 0.0 && prior_var.is_finite()) || !prior_mean.is_finite() {
        return Err(Error::domain(format!(
            "prior needs finite mean and positive variance, got N({prior_mean}, {prior_var})"
        )));
    }
    Normal::new(prior_mean, prior_var.sqrt()).map_err(|e| Error::domain(e.to_string()))
}

/// `y ~ N(θ, 1)` with `θ ~ N(prior_mean, prior_var)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianModel {
    pub prior_mean: f64,
    pub prior_var: f64,
}

impl GaussianModel {
    pub fn new(prior_mean: f64, prior_var: f64) -> Result<Self> {
        normal_prior(prior_mean, prior_var)?;
        Ok(Self { prior_mean, prior_var })
    }

    pub(crate) fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.prior_mean + self.prior_var.sqrt() * rng.sample::<f64, _>(StandardNormal)
    }

    pub(crate) fn prior_box(&self) -> (f64, f64) {
        let sd = self.prior_var.sqrt();
        (self.prior_mean - 10.0 * sd, self.prior_mean + 10.0 * sd)
    }

    pub(crate) fn simulate<R: Rng + ?Sized>(&self, theta: f64, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| theta + rng.sample::<f64, _>(StandardNormal)).collect()
    }

    pub(crate) fn mean_map(&self, theta: f64, stat: Statistic) -> Option<f64> {
        let t2 = theta * theta;
        Some(match stat {
            Statistic::Mean | Statistic::Median => theta,
            Statistic::Variance => 1.0,
            Statistic::Mad => std_normal_quantile(0.75).ok()?,
            Statistic::Moment(4) => t2 * t2 + 6.0 * t2 + 3.0,
            Statistic::Moment(6) => t2 * t2 * t2 + 15.0 * t2 * t2 + 45.0 * t2 + 15.0,
            _ => return None,
        })
    }
}

/// `y ~ Laplace(θ, 1/√2)` with `θ ~ N(prior_mean, prior_var)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceModel {
    pub prior_mean: f64,
    pub prior_var: f64,
}

impl LaplaceModel {
    pub fn new(prior_mean: f64, prior_var: f64) -> Result<Self> {
        normal_prior(prior_mean, prior_var)?;
        Ok(Self { prior_mean, prior_var })
    }

    pub(crate) fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.prior_mean + self.prior_var.sqrt() * rng.sample::<f64, _>(StandardNormal)
    }

    pub(crate) fn prior_box(&self) -> (f64, f64) {
        let sd = self.prior_var.sqrt();
        (self.prior_mean - 10.0 * sd, self.prior_mean + 10.0 * sd)
    }

    pub(crate) fn simulate<R: Rng + ?Sized>(&self, theta: f64, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u: f64 = Open01.sample(rng);
                let c = u - 0.5;
                theta - LAPLACE_SCALE * c.signum() * (1.0 - 2.0 * c.abs()).ln()
            })
            .collect()
    }

    pub(crate) fn mean_map(&self, theta: f64, stat: Statistic) -> Option<f64> {
        // raw moments of the centred Laplace: E Y² = 1, E Y⁴ = 6, E Y⁶ = 90
        let t2 = theta * theta;
        Some(match stat {
            Statistic::Mean | Statistic::Median => theta,
            Statistic::Variance => 1.0,
            Statistic::Mad => LAPLACE_SCALE * LN_2,
            Statistic::Moment(4) => t2 * t2 + 6.0 * t2 + 6.0,
            Statistic::Moment(6) => t2 * t2 * t2 + 15.0 * t2 * t2 + 90.0 * t2 + 90.0,
            _ => return None,
        })
    }
}
