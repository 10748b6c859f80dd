//! Which models can reproduce the true asymptotic mean of a statistic.
//!
//! A model is compatible with a summary when `inf_θ |μ(θ) − μ₀| = 0`, where
//! `μ₀` is the mean under the data-generating configuration. Model choice on
//! that summary is consistent when exactly one of the two models is
//! compatible.

use serde::{Deserialize, Serialize};

use super::ModelSpec;
use crate::error::{Error, Result};
use crate::stats::{Statistic, SummaryVector};

/// Infimum below which a model counts as compatible (summary units).
pub const TOL_COMPAT: f64 = 1e-3;
/// Grid points per parameter dimension for the coarse search.
pub const GRID_POINTS: usize = 512;
/// Golden-section steps per coordinate during refinement.
pub const REFINE_STEPS: usize = 40;
const REFINE_SWEEPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Discriminant,
    NonDiscriminant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCompatibility {
    pub model: String,
    pub infimum: f64,
    pub argmin: Vec<f64>,
    /// `μ(argmin)`.
    pub mu: SummaryVector,
    pub compatible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub statistics: Vec<Statistic>,
    pub true_model: usize,
    pub true_param: Vec<f64>,
    pub mu0: SummaryVector,
    pub models: [ModelCompatibility; 2],
    pub verdict: Verdict,
}

fn residual(model: &ModelSpec, theta: &[f64], specs: &[Statistic], mu0: &[f64]) -> Result<f64> {
    let mu = model.mean_vector(theta, specs)?;
    Ok(mu.iter().zip(mu0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// `inf |μ(θ) − μ₀|` over the model's search box: a full grid followed by
/// coordinate-wise golden-section refinement around the best grid point.
pub fn mean_map_infimum(model: &ModelSpec, specs: &[Statistic], mu0: &[f64]) -> Result<(f64, Vec<f64>)> {
    if specs.len() != mu0.len() {
        return Err(Error::shape("target mean and statistic list differ in length"));
    }
    let bounds = model.search_box();
    let dim = bounds.len();
    let step: Vec<f64> = bounds.iter().map(|(lo, hi)| (hi - lo) / (GRID_POINTS - 1) as f64).collect();

    let mut best = (f64::INFINITY, vec![0.0; dim]);
    let mut index = vec![0usize; dim];
    let mut theta = vec![0.0; dim];
    loop {
        for d in 0..dim {
            theta[d] = if index[d] == GRID_POINTS - 1 { bounds[d].1 } else { bounds[d].0 + index[d] as f64 * step[d] };
        }
        let r = residual(model, &theta, specs, mu0)?;
        if r < best.0 {
            best = (r, theta.clone());
        }
        // odometer increment
        let mut d = 0;
        while d < dim {
            index[d] += 1;
            if index[d] < GRID_POINTS {
                break;
            }
            index[d] = 0;
            d += 1;
        }
        if d == dim {
            break;
        }
    }

    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut best_r, mut best_theta) = best;
    for _ in 0..REFINE_SWEEPS {
        for d in 0..dim {
            let mut lo = (best_theta[d] - step[d]).max(bounds[d].0);
            let mut hi = (best_theta[d] + step[d]).min(bounds[d].1);
            let mut probe = best_theta.clone();
            let eval = |x: f64, probe: &mut Vec<f64>| -> Result<f64> {
                probe[d] = x;
                residual(model, probe, specs, mu0)
            };
            let mut x1 = hi - golden * (hi - lo);
            let mut x2 = lo + golden * (hi - lo);
            let mut f1 = eval(x1, &mut probe)?;
            let mut f2 = eval(x2, &mut probe)?;
            for _ in 0..REFINE_STEPS {
                if f1 <= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - golden * (hi - lo);
                    f1 = eval(x1, &mut probe)?;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + golden * (hi - lo);
                    f2 = eval(x2, &mut probe)?;
                }
            }
            let (x, f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
            if f < best_r {
                best_r = f;
                best_theta[d] = x;
            }
        }
    }
    Ok((best_r, best_theta))
}

/// Compatibility of both models with `specs` when the data come from model
/// `true_model` (1 or 2) at `true_param`.
pub fn compatibility_report(
    m1: &ModelSpec,
    m2: &ModelSpec,
    specs: &[Statistic],
    true_model: usize,
    true_param: &[f64],
) -> Result<CompatibilityReport> {
    let truth = match true_model {
        1 => m1,
        2 => m2,
        other => return Err(Error::domain(format!("true model index must be 1 or 2, got {other}"))),
    };
    let mu0 = truth.mean_vector(true_param, specs)?;
    let assess = |model: &ModelSpec| -> Result<ModelCompatibility> {
        let (infimum, argmin) = mean_map_infimum(model, specs, &mu0)?;
        Ok(ModelCompatibility {
            model: model.id().to_string(),
            mu: model.mean_vector(&argmin, specs)?,
            infimum,
            argmin,
            compatible: infimum < TOL_COMPAT,
        })
    };
    let models = [assess(m1)?, assess(m2)?];
    let verdict = if models[0].compatible != models[1].compatible {
        Verdict::Discriminant
    } else {
        Verdict::NonDiscriminant
    };
    Ok(CompatibilityReport {
        statistics: specs.to_vec(),
        true_model,
        true_param: true_param.to_vec(),
        mu0,
        models,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{gaussian_model, gk_quantile_model, laplace_model, popgen_model, GkVariant, PopGenConfig, Topology};
    use Statistic::*;

    fn gl() -> (ModelSpec, ModelSpec) {
        (gaussian_model(0.0, 4.0).unwrap(), laplace_model(0.0, 4.0).unwrap())
    }

    fn popgen_pair() -> (ModelSpec, ModelSpec) {
        let cfg = |topology| PopGenConfig {
            ne: 60.0,
            t_prime: 60.0,
            t: 30.0,
            n_diploid: 50,
            n_loci: 100,
            topology,
        };
        (
            popgen_model(cfg(Topology::Pop3FromPop1), 1e-4, 1e-2).unwrap(),
            popgen_model(cfg(Topology::Pop3FromPop2), 1e-4, 1e-2).unwrap(),
        )
    }

    #[test]
    fn fourth_moment_gaussian_truth() {
        let (g, l) = gl();
        let r = compatibility_report(&g, &l, &[Moment(4)], 1, &[0.0]).unwrap();
        assert_eq!(r.mu0, vec![3.0]);
        assert!(r.models[0].infimum < 1e-9 && r.models[0].compatible);
        assert!((r.models[1].infimum - 3.0).abs() < 1e-9 && !r.models[1].compatible);
        assert_eq!(r.verdict, Verdict::Discriminant);
    }

    #[test]
    fn fourth_moment_laplace_truth() {
        let (g, l) = gl();
        let r = compatibility_report(&g, &l, &[Moment(4)], 2, &[0.0]).unwrap();
        assert!(r.models[0].compatible && r.models[1].compatible);
        // θ⁴ + 6θ² + 3 = 6  =>  θ² = √12 − 3
        assert!((r.models[0].argmin[0].abs() - (12f64.sqrt() - 3.0).sqrt()).abs() < 1e-6);
        assert_eq!(r.verdict, Verdict::NonDiscriminant);
    }

    #[test]
    fn ancillary_statistics() {
        let (g, l) = gl();
        let var = compatibility_report(&g, &l, &[Variance], 1, &[0.0]).unwrap();
        assert_eq!(var.verdict, Verdict::NonDiscriminant);
        for truth in [1, 2] {
            let mad = compatibility_report(&g, &l, &[Mad], truth, &[0.0]).unwrap();
            assert_eq!(mad.verdict, Verdict::Discriminant);
        }
        let mmv = compatibility_report(&g, &l, &[Mean, Median, Variance], 1, &[0.0]).unwrap();
        assert_eq!(mmv.verdict, Verdict::NonDiscriminant);
    }

    #[test]
    fn popgen_subsets() {
        let (p1, p2) = popgen_pair();
        let r = compatibility_report(&p1, &p2, &[DeltaMuSq(1, 2)], 1, &[0.005]).unwrap();
        assert!(r.models[1].compatible);
        assert!((r.models[1].argmin[0] - 0.005).abs() < 1e-8);
        assert_eq!(r.verdict, Verdict::NonDiscriminant);
        let r = compatibility_report(&p1, &p2, &[DeltaMuSq(1, 3), DeltaMuSq(2, 3)], 1, &[0.005]).unwrap();
        assert!(r.models[0].compatible && !r.models[1].compatible);
        assert_eq!(r.verdict, Verdict::Discriminant);
        let all = [DeltaMuSq(1, 2), DeltaMuSq(1, 3), DeltaMuSq(2, 3)];
        for truth in [1, 2] {
            assert_eq!(compatibility_report(&p1, &p2, &all, truth, &[0.005]).unwrap().verdict, Verdict::Discriminant);
        }
    }

    #[test]
    fn quantile_subsets() {
        let m1 = gk_quantile_model(GkVariant::M1GZero);
        let m2 = gk_quantile_model(GkVariant::M2FreeG);
        let q10 = [Quantile(10)];
        let q1090 = [Quantile(10), Quantile(90)];
        assert_eq!(compatibility_report(&m1, &m2, &q10, 1, &[2.0]).unwrap().verdict, Verdict::NonDiscriminant);
        assert_eq!(compatibility_report(&m1, &m2, &q10, 2, &[1.0, 2.0]).unwrap().verdict, Verdict::NonDiscriminant);
        // nested models: under the smaller one both reproduce μ₀
        let r = compatibility_report(&m1, &m2, &q1090, 1, &[2.0]).unwrap();
        assert!(r.models[0].compatible && r.models[1].compatible);
        let r = compatibility_report(&m1, &m2, &q1090, 2, &[1.0, 2.0]).unwrap();
        assert!(!r.models[0].compatible && r.models[1].compatible);
        assert_eq!(r.verdict, Verdict::Discriminant);
    }

    #[test]
    fn relabeling_symmetry() {
        let (g, l) = gl();
        let (p1, p2) = popgen_pair();
        let cases: Vec<(&ModelSpec, &ModelSpec, Vec<Statistic>, Vec<f64>)> = vec![
            (&g, &l, vec![Moment(4)], vec![0.0]),
            (&g, &l, vec![Mad], vec![0.3]),
            (&g, &l, vec![Mean, Variance], vec![0.0]),
            (&p1, &p2, vec![DeltaMuSq(1, 3), DeltaMuSq(2, 3)], vec![0.005]),
        ];
        for (a, b, specs, theta) in cases {
            for truth in [1, 2] {
                let fwd = compatibility_report(a, b, &specs, truth, &theta).unwrap();
                let rev = compatibility_report(b, a, &specs, 3 - truth, &theta).unwrap();
                assert_eq!(fwd.verdict, rev.verdict);
                assert_eq!(fwd.models[0].compatible, rev.models[1].compatible);
                assert_eq!(fwd.models[1].compatible, rev.models[0].compatible);
            }
        }
    }

    #[test]
    fn missing_mean_map() {
        let (g, l) = gl();
        assert!(matches!(compatibility_report(&g, &l, &[Quantile(10)], 1, &[0.0]), Err(Error::Unsupported(_))));
    }
}
