use rand::Rng;
use rand_distr::{Distribution, Open01};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::std_normal_quantile;
use crate::stats::Statistic;

const K_RANGE: (f64, f64) = (-0.5, 5.0);
const G_RANGE: (f64, f64) = (0.0, 4.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GkVariant {
    /// `g = 0`, parameter `(k)`.
    M1GZero,
    /// Free skewness, parameters `(g, k)`.
    M2FreeG,
}

/// g-and-k quantile distribution with `A = 0`, `B = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GkModel {
    pub variant: GkVariant,
}

/// `Q(p; 0, 1, g, k) = (1 + 0.8 tanh(g z / 2)) (1 + z²)^k z` with `z = z(p)`.
pub fn gk_quantile(p: f64, g: f64, k: f64) -> Result<f64> {
    Ok(gk_transform(std_normal_quantile(p)?, g, k))
}

// (1 − e^{−gz}) / (1 + e^{−gz}) == tanh(gz / 2)
fn gk_transform(z: f64, g: f64, k: f64) -> f64 {
    (1.0 + 0.8 * (0.5 * g * z).tanh()) * (1.0 + z * z).powf(k) * z
}

impl GkModel {
    pub fn new(variant: GkVariant) -> Self {
        Self { variant }
    }

    pub(crate) fn param_dim(&self) -> usize {
        match self.variant {
            GkVariant::M1GZero => 1,
            GkVariant::M2FreeG => 2,
        }
    }

    fn unpack(&self, theta: &[f64]) -> (f64, f64) {
        match self.variant {
            GkVariant::M1GZero => (0.0, theta[0]),
            GkVariant::M2FreeG => (theta[0], theta[1]),
        }
    }

    pub(crate) fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let k = rng.random_range(K_RANGE.0..K_RANGE.1);
        match self.variant {
            GkVariant::M1GZero => vec![k],
            GkVariant::M2FreeG => {
                let g = rng.random_range(G_RANGE.0..G_RANGE.1);
                vec![g, k]
            }
        }
    }

    pub(crate) fn prior_box(&self) -> Vec<(f64, f64)> {
        match self.variant {
            GkVariant::M1GZero => vec![K_RANGE],
            GkVariant::M2FreeG => vec![G_RANGE, K_RANGE],
        }
    }

    pub(crate) fn simulate<R: Rng + ?Sized>(&self, theta: &[f64], n: usize, rng: &mut R) -> Result<Vec<f64>> {
        let (g, k) = self.unpack(theta);
        (0..n)
            .map(|_| {
                let u: f64 = Open01.sample(rng);
                gk_quantile(u, g, k)
            })
            .collect()
    }

    pub(crate) fn mean_map(&self, theta: &[f64], stat: Statistic) -> Option<f64> {
        let (g, k) = self.unpack(theta);
        match stat {
            Statistic::Quantile(pct) if pct < 100 => gk_quantile(f64::from(pct) / 100.0, g, k).ok(),
            _ => None,
        }
    }
}
