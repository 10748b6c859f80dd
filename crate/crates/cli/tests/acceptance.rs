//! Acceptance criteria, run at reduced scale. Prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.

use std::time::Instant;

use abcmc_cli::config::{popgen_demography, popgen_pair, ExperimentConfig};
use abcmc_cli::summary::Summary;
use abcmc_cli::{compatibility_rows, expand_config, run_experiment, ExperimentId, RunOptions};
use abcmc_core::abc::{build_reference_table, run_rejection, AbcConfig, ReferenceTable, TableMeta, TableRow};
use abcmc_core::models::{
    gaussian_model, gk_quantile_model, laplace_model, simulate_genealogy, GkVariant, ModelSpec,
};
use abcmc_core::numerics::{order_statistic_rank, DistanceKind, SeedSpec, WeightedDistanceSpec};
use abcmc_core::stats::{compose_statistics, Statistic};
use abcmc_core::validation::common_mean_test;
use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, TestRunner};
use rayon::prelude::*;
use Statistic::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn run_cfg(cfg: &ExperimentConfig) -> Summary {
    let dir = tempfile::tempdir().expect("temp dir");
    run_experiment(cfg, dir.path(), &RunOptions::default()).expect("experiment runs").summary
}

fn median(summary: &Summary, set: &str, n: usize, truth: usize) -> f64 {
    summary.cell(set, n, truth).expect("cell present").posterior_prob_m1.q50
}

/// Monte Carlo mean and its standard error of every statistic over `reps`
/// datasets of size `n`.
fn mc_means(model: &ModelSpec, theta: &[f64], specs: &[Statistic], n: usize, reps: u64, tag: u64) -> Vec<(f64, f64)> {
    let rows: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let sample = model.simulate_seeded(theta, n, SeedSpec::new(1000 + tag).child(r)).unwrap();
            compose_statistics(specs, &sample).unwrap()
        })
        .collect();
    let m = reps as f64;
    (0..specs.len())
        .map(|j| {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / m;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (m - 1.0);
            (mean, (var / m).sqrt())
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    let scalar = [Mean, Median, Variance, Mad, Moment(4), Moment(6)];
    let quantiles = [Quantile(10), Quantile(40), Quantile(60), Quantile(90)];
    let cases: Vec<(ModelSpec, Vec<f64>, &[Statistic])> = vec![
        (gaussian_model(0.0, 4.0).unwrap(), vec![0.0], &scalar),
        (laplace_model(0.0, 4.0).unwrap(), vec![0.0], &scalar),
        (gk_quantile_model(GkVariant::M1GZero), vec![2.0], &quantiles),
        (gk_quantile_model(GkVariant::M2FreeG), vec![1.0, 2.0], &quantiles),
    ];
    for (tag, (model, theta, specs)) in cases.iter().enumerate() {
        let got = mc_means(model, theta, specs, 10_000, 2000, tag as u64);
        for (s, (mean, se)) in specs.iter().zip(got) {
            checked += 1;
            let want = model.mean_map(theta, *s).unwrap();
            if (mean - want).abs() > 4.0 * se {
                failures.push(format!("{}/{s}: {mean:.5} vs {want:.5} (se {se:.2e})", model.id()));
            }
        }
    }
    let dmu = [DeltaMuSq(1, 2), DeltaMuSq(1, 3), DeltaMuSq(2, 3)];
    for (tag, model) in popgen_pair(&popgen_demography(50, 30)).unwrap().iter().enumerate() {
        let got = mc_means(model, &[0.005], &dmu, 30, 500, 10 + tag as u64);
        for (s, (mean, _)) in dmu.iter().zip(got) {
            checked += 1;
            let want = model.mean_map(&[0.005], *s).unwrap();
            if (mean - want).abs() > 0.15 * want {
                failures.push(format!("{}/{s}: {mean:.4} vs {want:.4}", model.id()));
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{checked} (model, statistic) pairs within tolerance")
        } else {
            failures.join("; ")
        },
    }
}

fn gl_config(id: ExperimentId, sample_sizes: Vec<usize>) -> ExperimentConfig {
    let mut cfg = expand_config(id).unwrap();
    cfg.sample_sizes = sample_sizes;
    cfg.replications = 20;
    cfg
}

fn criterion_2(summary: &Summary) -> Outcome {
    let (g, l) = (median(summary, "mad", 1000, 0), median(summary, "mad", 1000, 1));
    Outcome { pass: g > 0.9 && l < 0.1, detail: format!("median P(M1): Gaussian data {g:.3}, Laplace data {l:.3}") }
}

fn criterion_3(summary: &Summary) -> Outcome {
    let set = "mean+median+variance";
    let a = summary.cell(set, 1000, 0).unwrap().posterior_prob_m1;
    let b = summary.cell(set, 1000, 1).unwrap().posterior_prob_m1;
    let overlap = a.q25 <= b.q75 && b.q25 <= a.q75;
    let gap = (a.q50 - b.q50).abs();
    Outcome {
        pass: overlap && gap < 0.25,
        detail: format!(
            "IQR Gaussian [{:.3}, {:.3}], Laplace [{:.3}, {:.3}], median gap {gap:.3}",
            a.q25, a.q75, b.q25, b.q75
        ),
    }
}

fn criterion_4(summary: &Summary) -> Outcome {
    let g = median(summary, "moment4", 1000, 0);
    let l100 = median(summary, "moment4", 100, 1);
    let l10k = median(summary, "moment4", 10_000, 1);
    Outcome {
        pass: g > 0.85 && l10k < l100,
        detail: format!("Gaussian n=1000 median {g:.3}; Laplace median n=100 {l100:.3} -> n=10000 {l10k:.3}"),
    }
}

fn criterion_5(summary: &Summary) -> Outcome {
    let (a, b) = (median(summary, "q10", 1000, 0), median(summary, "q10", 1000, 1));
    let (c, d) = (median(summary, "q10+q90", 1000, 0), median(summary, "q10+q90", 1000, 1));
    Outcome {
        pass: (a - b).abs() < 0.3 && c > 0.8 && d < 0.2,
        detail: format!("q10 medians {a:.3}/{b:.3}; q10+q90 medians {c:.3}/{d:.3}"),
    }
}

fn popgen_reduced(id: ExperimentId) -> ExperimentConfig {
    let mut cfg = expand_config(id).unwrap();
    let demography = popgen_demography(20, 30);
    cfg.models = popgen_pair(&demography).unwrap();
    cfg.popgen = Some(demography);
    cfg.sample_sizes = vec![30];
    cfg.abc.n_per_model = 10_000;
    cfg.replications = 10;
    cfg
}

fn criterion_6(summary: &Summary) -> Outcome {
    let (a, b) = (median(summary, "dmu12", 30, 0), median(summary, "dmu12", 30, 1));
    let (c, d) = (median(summary, "dmu13+dmu23", 30, 0), median(summary, "dmu13+dmu23", 30, 1));
    Outcome {
        pass: (a - b).abs() <= 0.3 && c > 0.7 && 1.0 - d > 0.7,
        detail: format!(
            "dmu12 medians {a:.3}/{b:.3}; dmu13+dmu23 correct-model medians {c:.3}/{:.3}",
            1.0 - d
        ),
    }
}

fn rejection_rate(summary: &Summary, set: &str, n: usize) -> f64 {
    summary.cell(set, n, 0).unwrap().rejection_rate.unwrap()
}

fn criterion_7() -> Outcome {
    let mut cfg = expand_config(ExperimentId::ValidateGl).unwrap();
    cfg.replications = 20;
    let s = run_cfg(&cfg);
    let keep = 1.0 - rejection_rate(&s, "mean+median+variance", 1000);
    let reject = rejection_rate(&s, "mean+median+variance+mad", 1000);
    Outcome {
        pass: keep >= 0.8 && reject == 1.0,
        detail: format!("mean/median/variance fail-to-reject {:.0}%; with mad reject {:.0}%", 100.0 * keep, 100.0 * reject),
    }
}

fn criterion_8() -> Outcome {
    let mut cfg = popgen_reduced(ExperimentId::ValidatePopgen);
    // 5% of 10^4 rows per model keeps the 500 accepted parameters per model
    cfg.abc.tolerance_quantile = 0.05;
    let s = run_cfg(&cfg);
    let keep = 1.0 - rejection_rate(&s, "dmu12", 30);
    let reject = rejection_rate(&s, "dmu13+dmu23", 30);
    Outcome {
        pass: keep >= 0.7 && reject >= 0.9,
        detail: format!("dmu12 fail-to-reject {:.0}%; dmu13+dmu23 reject {:.0}%", 100.0 * keep, 100.0 * reject),
    }
}

/// A subset separates the models empirically when its median posterior
/// probabilities under the two truths differ by at least 0.3.
fn criterion_9(runs: &[(&ExperimentConfig, &Summary, usize)]) -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for (cfg, summary, n) in runs {
        let rows = compatibility_rows(cfg).unwrap();
        for set in &cfg.statistic_sets {
            let label = set.label();
            let predicted = rows.iter().any(|r| r.statistic_set == label && r.discriminant());
            let gap = (median(summary, &label, *n, 0) - median(summary, &label, *n, 1)).abs();
            let separated = gap >= 0.3;
            pass &= predicted == separated;
            lines.push(format!(
                "{label}: {} / gap {gap:.2}{}",
                if predicted { "discriminant" } else { "non-discriminant" },
                if predicted == separated { "" } else { " MISMATCH" }
            ));
        }
    }
    Outcome { pass, detail: lines.join("; ") }
}

fn property<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<String, String> {
    let mut runner = TestRunner::new(PtConfig { cases, failure_persistence: None, ..PtConfig::default() });
    runner.run(&strategy, test).map(|_| format!("{name} ok")).map_err(|e| format!("{name}: {e}"))
}

fn criterion_10() -> Outcome {
    let sample = || prop::collection::vec(-50.0f64..50.0, 2..60);
    let mut results = vec![
        property("statistic invariances", 1000, (sample(), -10.0f64..10.0, 0.1f64..10.0), |(y, a, b)| {
            let t: Vec<f64> = y.iter().map(|x| a + b * x).collect();
            let (s, st) = (abcmc_core::stats::Sample::Scalar(y), abcmc_core::stats::Sample::Scalar(t));
            for stat in [Mean, Median, Quantile(30), Variance, Mad] {
                let (u, v) = (stat.evaluate(&s).unwrap(), stat.evaluate(&st).unwrap());
                let want = match stat {
                    Variance => b * b * u,
                    Mad => b * u,
                    _ => a + b * u,
                };
                prop_assert!((v - want).abs() <= 1e-9 * want.abs().max(1.0), "{stat}: {v} vs {want}");
            }
            Ok(())
        }),
        property(
            "tolerance contract",
            1000,
            (prop::collection::vec((any::<bool>(), -10.0f64..10.0), 1..40), 0.01f64..=1.0, 0.01f64..=1.0),
            |(rows, q1, q2)| {
                let half = rows.len();
                let table_rows: Vec<TableRow> = rows
                    .iter()
                    .map(|&(_, v)| TableRow { model: 1, params: vec![v], summary: vec![v] })
                    .chain(rows.iter().map(|&(_, v)| TableRow { model: 2, params: vec![v], summary: vec![v + 0.5] }))
                    .collect();
                let meta = TableMeta {
                    models: ["a".into(), "b".into()],
                    statistics: vec![Mean],
                    n_per_model: half,
                    sample_size: 1,
                    seed: SeedSpec::new(0),
                };
                let table = ReferenceTable::from_rows(table_rows, meta).unwrap();
                let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
                let cfg = |q| AbcConfig {
                    n_total: 2 * half,
                    tolerance_quantile: q,
                    distance: WeightedDistanceSpec::unweighted(DistanceKind::Euclidean, 1),
                };
                let small = run_rejection(&table, &[0.1], &cfg(lo)).unwrap();
                let large = run_rejection(&table, &[0.1], &cfg(hi)).unwrap();
                prop_assert!(small.accepted.len() >= order_statistic_rank(2 * half, lo));
                prop_assert!(small.accepted.iter().all(|i| large.accepted.contains(i)));
                prop_assert_eq!(small.posterior_prob_m1 + small.posterior_prob_m2, 1.0);
                Ok(())
            },
        ),
        property(
            "test symmetry",
            1000,
            (1usize..5).prop_flat_map(|d| {
                (
                    prop::collection::vec(-5.0f64..5.0, d),
                    prop::collection::vec(-5.0f64..5.0, d),
                    prop::collection::vec(0.01f64..3.0, d),
                    prop::collection::vec(0.01f64..3.0, d),
                )
            }),
            |(m1, m2, v1, v2)| {
                let diag = |v: &[f64]| -> Vec<Vec<f64>> {
                    (0..v.len()).map(|i| (0..v.len()).map(|j| if i == j { v[i] } else { 0.0 }).collect()).collect()
                };
                let a = common_mean_test(&m1, &diag(&v1), &m2, &diag(&v2), 0.05).unwrap();
                let b = common_mean_test(&m2, &diag(&v2), &m1, &diag(&v1), 0.05).unwrap();
                prop_assert_eq!(a.statistic, b.statistic);
                prop_assert_eq!(a.p_value, b.p_value);
                Ok(())
            },
        ),
    ];

    // p-value uniformity: both predictive samples from the same model and θ
    let g = gaussian_model(0.0, 4.0).unwrap();
    let specs = [Mean, Variance];
    let rejected = (0..200u64)
        .into_par_iter()
        .filter(|&rep| {
            let draws = |tag: u64| -> Vec<Vec<f64>> {
                (0..500u64)
                    .map(|j| {
                        let s = g.simulate_seeded(&[0.3], 100, SeedSpec::new(77).path(&[rep, tag, j])).unwrap();
                        compose_statistics(&specs, &s).unwrap()
                    })
                    .collect()
            };
            let (a, ca) = abcmc_core::validation::estimate_predictive_mean(&draws(1)).unwrap();
            let (b, cb) = abcmc_core::validation::estimate_predictive_mean(&draws(2)).unwrap();
            common_mean_test(&a, &ca, &b, &cb, 0.05).unwrap().decision.rejects()
        })
        .count();
    let rate = rejected as f64 / 200.0;
    results.push(if (0.01..=0.12).contains(&rate) {
        Ok(format!("null rejection rate {rate:.3}"))
    } else {
        Err(format!("null rejection rate {rate:.3} outside [0.01, 0.12]"))
    });

    // coalescent pair times: same population 2 Ne = 120; populations 1 and 2 t' + 2 Ne = 180
    let cfg = popgen_demography(1, 1);
    let times: Vec<(f64, f64)> = (0..2000u64)
        .into_par_iter()
        .map(|r| {
            let tree = simulate_genealogy(&cfg, SeedSpec::new(99).child(r)).unwrap();
            (tree.coalescence_time(0, 1), tree.coalescence_time(0, 2))
        })
        .collect();
    let within = times.iter().map(|t| t.0).sum::<f64>() / 2000.0;
    let between = times.iter().map(|t| t.1).sum::<f64>() / 2000.0;
    results.push(if (within - 120.0).abs() < 12.0 && (between - 180.0).abs() < 18.0 {
        Ok(format!("pair times {within:.1}/{between:.1}"))
    } else {
        Err(format!("pair times {within:.1}/{between:.1}, expected 120/180"))
    });

    // determinism under parallelism
    let (m1, m2) = (gaussian_model(0.0, 4.0).unwrap(), laplace_model(0.0, 4.0).unwrap());
    let build = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            build_reference_table(&m1, &m2, &[Mean, Mad], 500, 100, SeedSpec::new(5)).unwrap()
        })
    };
    results.push(if build(1) == build(4) {
        Ok("tables identical across worker counts".to_string())
    } else {
        Err("tables differ across worker counts".to_string())
    });

    let pass = results.iter().all(Result::is_ok);
    let detail = results.into_iter().map(|r| r.unwrap_or_else(|e| format!("FAILED {e}"))).collect::<Vec<_>>().join("; ");
    Outcome { pass, detail }
}

fn report(number: usize, started: Instant, outcome: &Outcome) {
    println!(
        "criterion {number}: {} ({:.0}s) {}",
        if outcome.pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64(),
        outcome.detail
    );
}

fn record(outcomes: &mut Vec<bool>, number: usize, f: fn() -> Outcome) {
    let t = Instant::now();
    let o = f();
    report(number, t, &o);
    outcomes.push(o.pass);
}

fn main() {
    let mut outcomes = Vec::new();
    record(&mut outcomes, 1, criterion_1);

    let fig2 = gl_config(ExperimentId::Fig2, vec![1000]);
    let fig1 = gl_config(ExperimentId::Fig1, vec![1000]);
    let fig3 = gl_config(ExperimentId::Fig3, vec![100, 1000, 10_000]);
    let mut fig5 = gl_config(ExperimentId::Fig5, vec![1000]);
    fig5.statistic_sets.truncate(2);
    let mut fig6 = popgen_reduced(ExperimentId::Fig6);
    fig6.statistic_sets.truncate(2);

    let mut summaries = Vec::new();
    for (n, cfg, check) in [
        (2, &fig2, criterion_2 as fn(&Summary) -> Outcome),
        (3, &fig1, criterion_3),
        (4, &fig3, criterion_4),
        (5, &fig5, criterion_5),
        (6, &fig6, criterion_6),
    ] {
        let t = Instant::now();
        let s = run_cfg(cfg);
        let o = check(&s);
        report(n, t, &o);
        outcomes.push(o.pass);
        summaries.push(s);
    }

    record(&mut outcomes, 7, criterion_7);
    record(&mut outcomes, 8, criterion_8);

    let t = Instant::now();
    let runs = [
        (&fig2, &summaries[0], 1000),
        (&fig1, &summaries[1], 1000),
        (&fig3, &summaries[2], 10_000),
        (&fig5, &summaries[3], 1000),
        (&fig6, &summaries[4], 30),
    ];
    let o = criterion_9(&runs);
    report(9, t, &o);
    outcomes.push(o.pass);

    record(&mut outcomes, 10, criterion_10);

    let failed = outcomes.iter().filter(|p| !**p).count();
    println!("acceptance: {} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
