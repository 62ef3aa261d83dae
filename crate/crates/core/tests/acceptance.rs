//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use sbpm_audit::counterexamples::leak_test;
use sbpm_audit::data::{generate_gauss, outlier_mask, Dataset, GaussSpec, OutlierRule};
use sbpm_audit::experiments::{
    canonical_data, counterexample_suite, oracle_resample_experiment, resplit_experiment,
    ExperimentConfig,
};
use sbpm_audit::metrics::{
    dcr, evaluate_all, nndr, p5_rank, statistic, MetricName, MetricResult, StatisticKind,
};
use sbpm_audit::nn::{nearest_two, nearest_two_bruteforce, DistanceKind, NeighborResult};

use common::*;

/// Master seed of the canonical experiment runs (the documented CLI example).
const CANONICAL_SEED: u64 = 7;
/// Master seeds of the counter-example criteria.
const COUNTEREXAMPLE_SEEDS: std::ops::Range<u64> = 0..20;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    if elapsed > limit {
        o.passed = false;
    }
    o.detail = format!(
        "{} [{:.2}s, limit {}s]",
        o.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    o
}

fn c1_leak_test() -> Outcome {
    timed(Duration::from_secs(10), || {
        let passes = COUNTEREXAMPLE_SEEDS
            .filter(|&s| {
                let c = canonical_data(s).unwrap();
                let (train, test) = (&c.split.train, &c.split.test);
                evaluate_all(train, test, &leak_test(test), DistanceKind::Euclidean)
                    .unwrap()
                    .all_pass
            })
            .count();
        outcome(
            passes == 20,
            format!("leak-test all_pass in {passes}/20 seeds (need 20)"),
        )
    })
}

fn c2_leak_outliers() -> Outcome {
    timed(Duration::from_secs(30), || {
        let mut passes = 0;
        let mut failed_seeds = Vec::new();
        let mut worst_leak: f64 = 0.0;
        let mut all_leaked = true;
        for s in COUNTEREXAMPLE_SEEDS {
            let summary = counterexample_suite(s).unwrap();
            assert_eq!(summary.leak_outliers_spec.perturbation_scale, 0.05);
            all_leaked &= summary.leakage.max_distance <= 6.0 * 0.05;
            worst_leak = worst_leak.max(summary.leakage.max_distance);
            if summary.leak_outliers.all_pass {
                passes += 1;
            } else {
                failed_seeds.push(s);
            }
        }
        outcome(
            passes >= 19 && all_leaked,
            format!(
                "leak-outliers all_pass in {passes}/20 seeds (need >= 19; failing seeds {failed_seeds:?}); \
                 max outlier-to-synth distance {worst_leak:.4} (need <= 0.3)"
            ),
        )
    })
}

fn in_band(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn c3_oracle_resample() -> Outcome {
    timed(Duration::from_secs(120), || {
        let r = oracle_resample_experiment(&ExperimentConfig::canonical(CANONICAL_SEED)).unwrap();
        let rates = r.rates;
        let ok = r.n_reps == 1000
            && rates.ims == 1.0
            && in_band(rates.dcr, 0.42, 0.54)
            && in_band(rates.nndr, 0.32, 0.56)
            && in_band(rates.all, 0.20, 0.45);
        outcome(
            ok,
            format!(
                "oracle resample, 1000 reps, seed {CANONICAL_SEED}: IMS {:.3} (need 1.000), DCR {:.3} \
                 (need [0.42,0.54]), NNDR {:.3} (need [0.32,0.56]), all {:.3} (need [0.20,0.45])",
                rates.ims, rates.dcr, rates.nndr, rates.all
            ),
        )
    })
}

fn c4_resplit() -> Outcome {
    timed(Duration::from_secs(120), || {
        let r = resplit_experiment(&ExperimentConfig::canonical(CANONICAL_SEED)).unwrap();
        let all = r.rates.all;
        let ok = r.n_reps == 1000
            && in_band(all, 0.20, 0.48)
            && r.pass_count_all > 0
            && r.pass_count_all < 1000;
        outcome(
            ok,
            format!("re-split, 1000 reps, seed {CANONICAL_SEED}: all-pass {all:.3} (need [0.20,0.48], strictly inside (0,1))"),
        )
    })
}

/// Not an acceptance criterion: the exchangeability argument behind the DCR
/// band, checked where it holds, i.e. averaged over independent datasets.
fn supplementary_marginal_rate() -> Outcome {
    let seeds = 100u64;
    let (mut dcr_sum, mut nndr_sum) = (0.0, 0.0);
    for s in 0..seeds {
        let r = oracle_resample_experiment(&ExperimentConfig::canonical(10_000 + s).with_reps(20))
            .unwrap();
        dcr_sum += r.rates.dcr;
        nndr_sum += r.rates.nndr;
    }
    let (d, n) = (dcr_sum / seeds as f64, nndr_sum / seeds as f64);
    // per-seed sd ≈ 0.3 plus within-seed binomial noise, so the mean of 100 has sd ≈ 0.035
    outcome(
        (d - 0.5).abs() < 0.12 && (n - 0.5).abs() < 0.12,
        format!("mean pass rate over {seeds} independent datasets: DCR {d:.3}, NNDR {n:.3} (expect 0.5 +- 0.12)"),
    )
}

fn same_results(a: &[NeighborResult], b: &[NeighborResult]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.query_index == y.query_index
                && x.first_distance.to_bits() == y.first_distance.to_bits()
                && x.second_distance.to_bits() == y.second_distance.to_bits()
                && x.first_ref_index == y.first_ref_index
                && x.second_ref_index == y.second_ref_index
        })
}

fn c5_oracle_equivalence() -> Outcome {
    timed(Duration::from_secs(10), || {
        let mut rng = rng(5);
        let mut checked = 0;
        let mut mismatches = 0;
        for i in 0..100 {
            for kind in [DistanceKind::Euclidean, DistanceKind::Hamming] {
                let (nq, nr) = (rng.random_range(2..=200), rng.random_range(2..=200));
                let (q, r) = match kind {
                    DistanceKind::Euclidean => (
                        points(&mut rng, nq, i % 3 == 0),
                        points(&mut rng, nr, i % 3 == 0),
                    ),
                    DistanceKind::Hamming => {
                        let arity = rng.random_range(1..=4);
                        let levels = rng.random_range(2..=5);
                        (
                            codes(&mut rng, nq, arity, levels),
                            codes(&mut rng, nr, arity, levels),
                        )
                    }
                };
                let fast = nearest_two(&q, &r, kind).unwrap();
                let slow = nearest_two_bruteforce(&q, &r, kind).unwrap();
                checked += 1;
                if !same_results(&fast, &slow) {
                    mismatches += 1;
                }
            }
        }
        outcome(
            mismatches == 0,
            format!("{checked} instances (100 per distance kind), {mismatches} mismatches"),
        )
    })
}

fn c6_metric_properties() -> Outcome {
    let mut rng = rng(6);
    let e = DistanceKind::Euclidean;
    let mut failures: Vec<String> = Vec::new();
    let instances = 100;
    for i in 0..instances {
        let n = |rng: &mut rand_chacha::ChaCha8Rng| rng.random_range(2..=120);
        let (nt, ne, ns) = (n(&mut rng), n(&mut rng), n(&mut rng));
        let (train, test, synth) = (
            points(&mut rng, nt, false),
            points(&mut rng, ne, false),
            points(&mut rng, ns, false),
        );
        let base = evaluate_all(&train, &test, &synth, e).unwrap();

        let perm = evaluate_all(
            &shuffled(&train, &mut rng),
            &shuffled(&test, &mut rng),
            &shuffled(&synth, &mut rng),
            e,
        )
        .unwrap();
        if perm.metrics() != base.metrics() {
            failures.push(format!("permutation invariance, instance {i}"));
        }

        let c = rng.random_range(0.1..10.0);
        let scale = |d: &Dataset| d.scaled(c).unwrap();
        let scaled = evaluate_all(&scale(&train), &scale(&test), &scale(&synth), e).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
        if !(close(scaled.dcr.stat_synth, c * base.dcr.stat_synth)
            && close(scaled.dcr.stat_test, c * base.dcr.stat_test))
        {
            failures.push(format!("DCR scale equivariance, instance {i}"));
        }
        if !(close(scaled.nndr.stat_synth, base.nndr.stat_synth)
            && close(scaled.nndr.stat_test, base.nndr.stat_test))
        {
            failures.push(format!("NNDR scale invariance, instance {i}"));
        }
        let verdicts = |r: &sbpm_audit::metrics::PrivacyReport| {
            [r.ims.passed, r.dcr.passed, r.nndr.passed, r.all_pass]
        };
        if verdicts(&scaled) != verdicts(&base) {
            failures.push(format!("verdicts changed under scaling, instance {i}"));
        }

        let ratios: Vec<f64> = nearest_two(&synth, &train, e)
            .unwrap()
            .iter()
            .map(|r| r.ratio())
            .collect();
        if !ratios.iter().all(|r| (0.0..=1.0).contains(r)) {
            failures.push(format!("NNDR ratio outside [0,1], instance {i}"));
        }

        let values: Vec<f64> = (0..rng.random_range(1..300))
            .map(|_| rng.random_range(-5.0..5.0))
            .collect();
        let p5 = statistic(&values, StatisticKind::P5).unwrap();
        // oracle: smallest member v with at least ⌈0.05 n⌉ members <= v
        let need = p5_rank(values.len());
        let expected = values
            .iter()
            .copied()
            .filter(|&v| values.iter().filter(|&&x| x <= v).count() >= need)
            .fold(f64::INFINITY, f64::min);
        if !values.contains(&p5) || p5 != expected {
            failures.push(format!("nearest-rank P5, instance {i}"));
        }

        let tie = evaluate_all(&train, &test, &test.clone(), e).unwrap();
        let exact_tie = MetricResult::new(MetricName::Dcr, 0.25, 0.25).passed
            && MetricResult::new(MetricName::Ims, 0.5, 0.5).passed;
        if !(tie.all_pass && tie.dcr.stat_synth == tie.dcr.stat_test && exact_tie) {
            failures.push(format!("non-strict tie pass, instance {i}"));
        }

        let sub: Vec<usize> = (0..nt).filter(|k| k % 2 == 0).collect();
        if dcr(&train, &test, &train.select(&sub), e)
            .unwrap()
            .stat_synth
            != 0.0
        {
            failures.push(format!("DCR of a train subset is not 0, instance {i}"));
        }
        let swapped = [
            dcr(&train, &synth, &test, e).unwrap(),
            nndr(&train, &synth, &test, e).unwrap(),
        ];
        for (before, after) in [&base.dcr, &base.nndr].into_iter().zip(&swapped) {
            let stats_swapped =
                after.stat_synth == before.stat_test && after.stat_test == before.stat_synth;
            let strict = before.stat_synth != before.stat_test;
            if !stats_swapped || (strict && after.passed == before.passed) {
                failures.push(format!(
                    "{:?} swap of test and synth, instance {i}",
                    before.metric
                ));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{instances} random instances x 8 properties; failures: {failures:?}"),
    )
}

fn c7_outlier_calibration() -> Outcome {
    let d = generate_gauss(&GaussSpec::new(100_000, CANONICAL_SEED).unwrap()).unwrap();
    let mask = outlier_mask(&d, &OutlierRule::default()).unwrap();
    let frac = mask.iter().filter(|&&m| m).count() as f64 / mask.len() as f64;
    outcome(
        frac > 0.094 && frac < 0.106,
        format!("outlier fraction {frac:.4} of 100000 points at radius sqrt(2 ln 10) (need (0.094, 0.106))"),
    )
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sbpm-audit"))
}

fn exit_code(args: &[&str]) -> i32 {
    bin()
        .args(args)
        .output()
        .expect("binary runs")
        .status
        .code()
        .unwrap_or(-1)
}

fn c8_cli_contract() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let (data, train, test, synth_out, report) = (
        p("d.csv"),
        p("train.csv"),
        p("test.csv"),
        p("synth.csv"),
        p("r.json"),
    );

    let mut problems = Vec::new();
    let mut expect = |what: &str, got: i32, want: i32| {
        if got != want {
            problems.push(format!("{what}: exit {got}, expected {want}"));
        }
    };

    expect(
        "generate",
        exit_code(&["generate", "--n", "2000", "--seed", "7", "--out", &data]),
        0,
    );
    let d = sbpm_audit::data::read_csv(&data).unwrap();
    let split = sbpm_audit::data::split_even(&d, 1).unwrap();
    sbpm_audit::data::write_csv(&split.train, &train).unwrap();
    sbpm_audit::data::write_csv(&split.test, &test).unwrap();

    expect(
        "evaluate, synth = test",
        exit_code(&[
            "evaluate", "--train", &train, "--test", &test, "--synth", &test,
        ]),
        0,
    );
    expect(
        "evaluate, synth = train",
        exit_code(&[
            "evaluate", "--train", &train, "--test", &test, "--synth", &train,
        ]),
        1,
    );
    expect(
        "evaluate, missing file",
        exit_code(&[
            "evaluate",
            "--train",
            &train,
            "--test",
            &test,
            "--synth",
            &p("nope.csv"),
        ]),
        2,
    );
    expect(
        "generate --n 0",
        exit_code(&["generate", "--n", "0", "--seed", "7", "--out", &data]),
        2,
    );
    expect(
        "counterexample --which unknown",
        exit_code(&["counterexample", "--which", "unknown", "--seed", "7"]),
        2,
    );
    expect(
        "counterexample leak-test",
        exit_code(&[
            "counterexample",
            "--which",
            "leak-test",
            "--seed",
            "7",
            "--report",
            &report,
        ]),
        0,
    );
    expect(
        "reproduce leak-test report",
        exit_code(&["reproduce", &report]),
        0,
    );
    expect(
        "counterexample leak-outliers",
        exit_code(&[
            "counterexample",
            "--which",
            "leak-outliers",
            "--seed",
            "7",
            "--out",
            &synth_out,
            "--report",
            &report,
        ]),
        0,
    );
    expect(
        "reproduce leak-outliers report",
        exit_code(&["reproduce", &report]),
        0,
    );
    expect(
        "evaluate --bins",
        exit_code(&[
            "evaluate", "--train", &train, "--test", &test, "--synth", &test, "--bins", "8",
            "--report", &report,
        ]),
        0,
    );
    expect(
        "reproduce evaluate report",
        exit_code(&["reproduce", &report]),
        0,
    );
    expect(
        "experiment --reps 1",
        exit_code(&[
            "experiment",
            "--mode",
            "resplit",
            "--reps",
            "1",
            "--seed",
            "7",
            "--report",
            &report,
        ]),
        0,
    );
    expect(
        "reproduce experiment report",
        exit_code(&["reproduce", &report]),
        0,
    );
    expect(
        "plot non-2d",
        exit_code(&["plot", "--train", &report, "--out", &p("x.svg")]),
        2,
    );
    match sbpm_audit::data::read_csv(Path::new(&synth_out)) {
        Ok(d) if d.n_rows() == 2500 => {}
        other => problems.push(format!("leak-outliers synth csv: {other:?}")),
    }
    outcome(
        problems.is_empty(),
        format!("16 CLI cases; problems: {problems:?}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 leak-all-test counter-example", c1_leak_test),
        ("2 leak-train-outliers counter-example", c2_leak_outliers),
        ("3 oracle-resampling inconsistency", c3_oracle_resample),
        ("4 re-split inconsistency", c4_resplit),
        (
            "5 nearest-neighbor oracle equivalence",
            c5_oracle_equivalence,
        ),
        ("6 metric property suite", c6_metric_properties),
        ("7 outlier-rule calibration", c7_outlier_calibration),
        ("8 CLI contract", c8_cli_contract),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        if !o.passed {
            failed += 1;
        }
        println!(
            "[{}] criterion {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    let s = supplementary_marginal_rate();
    println!(
        "[{}] supplementary (not gating): {}",
        if s.passed { "PASS" } else { "FAIL" },
        s.detail
    );
    println!("acceptance: {} of 8 criteria failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
