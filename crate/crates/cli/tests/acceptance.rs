//! Acceptance gate. Every criterion runs at full size and stated tolerance;
//! one PASS/FAIL line is printed per criterion. Runs without the libtest
//! harness so the lines are never captured; any failure exits nonzero.

mod common;

use std::time::{Duration, Instant};

use cfineq::arith_fn::{divisor_mean_sandwich, BigMChoice, DivisorVariant};
use cfineq::refcheck::{agrees, hp_sandwich, HpContext, OracleInput};
use cfineq::scalar_cf::{cf_sandwich_two, tightness_report, ScalarPair};
use cfineq::sum_refine::{
    bergstrom_sandwich, cauchy_sandwich, holder_sandwich, power_mean_sandwich, HolderSpec,
    PowerMeanSpec,
};
use cfineq::verify::{run_suite, Suite, SuiteConfig, SuiteReport};
use cfineq::{ScalarSandwich, Tolerance};

const SEED: u64 = 42;

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

fn suite(suite: Suite, trials: usize) -> SuiteReport {
    let config = SuiteConfig {
        suite,
        trials,
        seed: SEED,
        ..SuiteConfig::default()
    };
    run_suite(&config).expect("valid config").remove(0)
}

fn summarize(reports: &[SuiteReport]) -> Outcome {
    let passed = reports.iter().all(|r| r.passed);
    let detail = reports
        .iter()
        .map(|r| {
            let mut s = format!("{}: {} checks, {} failures", r.suite, r.checks, r.failures);
            if let Some(f) = r.first_failures.first() {
                s.push_str(&format!(" (first: {} {})", f.check, f.inputs));
            }
            s
        })
        .collect::<Vec<_>>()
        .join("; ");
    outcome(passed, detail)
}

fn close(x: f64, y: f64, rel: f64) -> bool {
    (x - y).abs() <= rel * y.abs().max(1.0)
}

fn triple(s: &ScalarSandwich) -> (f64, f64, f64) {
    (s.lower, s.middle, s.upper)
}

fn scalar_suites() -> Outcome {
    summarize(&[
        suite(Suite::Scalar, 100_000),
        suite(Suite::Nvar, 100_000),
        suite(Suite::Bernoulli, 100_000),
    ])
}

fn fixtures() -> Outcome {
    let tol = Tolerance::default();
    let mut failed = Vec::new();

    let cf = cf_sandwich_two(&ScalarPair::new(4.0, 1.0, 0.5).unwrap(), &tol).unwrap();
    if triple(&cf) != (9.0 / 32.0, 0.5, 9.0 / 8.0) {
        failed.push(format!("cf_two {:?}", triple(&cf)));
    }

    let spec = PowerMeanSpec::new(vec![1.0, 2.0], vec![1.0, 1.0], 1.0, 2.0).unwrap();
    let (pm, ctx) = power_mean_sandwich(&spec, &tol).unwrap();
    let oracle = hp_sandwich(&OracleInput::PowerMean {
        values: vec![1.0, 2.0],
        weights: vec![1.0, 1.0],
        r: 1.0,
        s: 2.0,
    })
    .unwrap();
    if !agrees(&pm, &oracle, 1e-12) || !close(ctx.m, 0.4, 1e-15) || !close(ctx.big_m, 1.6, 1e-15) {
        failed.push(format!(
            "power_mean {:?} vs {:?}",
            triple(&pm),
            triple(&oracle)
        ));
    }

    let (h, hc) = holder_sandwich(
        &HolderSpec::new(vec![1.0, 2.0], vec![2.0, 1.0], 2.0, 2.0).unwrap(),
        &tol,
    )
    .unwrap();
    let holder_ok = [
        (h.middle, 1.0),
        (h.lower, 0.5625),
        (h.upper, 2.25),
        (hc.coef, 0.45),
        (hc.m, 0.2),
        (hc.big_m, 0.8),
    ]
    .iter()
    .all(|&(x, y)| close(x, y, 1e-12));
    if !holder_ok {
        failed.push(format!("holder {:?} {hc:?}", triple(&h)));
    }

    let (c, _) = cauchy_sandwich(&[1.0, 2.0], &[2.0, 1.0], &tol).unwrap();
    if c.middle != 9.0 || !close(c.lower, 4.816_406_25, 1e-12) || !close(c.upper, 23.0625, 1e-12) {
        failed.push(format!("cauchy {:?}", triple(&c)));
    }

    let (b, _) = bergstrom_sandwich(&[1.0, 2.0], &[1.0, 1.0], &tol).unwrap();
    let (b_neg, _) = bergstrom_sandwich(&[-1.0, 2.0], &[1.0, 1.0], &tol).unwrap();
    let b_oracle = hp_sandwich(&OracleInput::Bergstrom {
        xvec: vec![1.0, 2.0],
        avec: vec![1.0, 1.0],
    })
    .unwrap();
    if b.middle != 0.5 || !agrees(&b, &b_oracle, 1e-12) || b != b_neg {
        failed.push(format!(
            "bergstrom {:?} vs {:?}",
            triple(&b),
            triple(&b_oracle)
        ));
    }
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            "all worked values match".into()
        } else {
            failed.join("; ")
        },
    )
}

fn tightness() -> Outcome {
    let report = suite(Suite::Tightness, 100_000);
    let tol = Tolerance::default();
    let r = tightness_report(&ScalarPair::new(0.99, 0.0001, 0.5).unwrap(), &tol).unwrap();
    let mut hp = HpContext::new(256).unwrap();
    let log = hp.reverse_young_log(0.99, 0.0001, 0.5).unwrap();
    let oracle_cf = hp_sandwich(&OracleInput::CfTwo {
        a: 0.99,
        b: 0.0001,
        lambda: 0.5,
    })
    .unwrap()
    .upper;
    let four_digits = |x: f64, y: f64| (x - y).abs() <= 5e-4 * y.abs();
    let counterexample = r.cf_upper > r.log_upper
        && four_digits(r.cf_upper, 1224.9)
        && four_digits(r.log_upper, 20.95)
        && four_digits(r.cf_upper, oracle_cf)
        && four_digits(r.log_upper, log);
    let mut o = summarize(&[report]);
    o.passed &= counterexample;
    o.detail.push_str(&format!(
        "; counterexample cf={:.1} log={:.2} ({})",
        r.cf_upper, r.log_upper, r.ordering
    ));
    o
}

fn divisor_scan() -> Outcome {
    let config = SuiteConfig {
        suite: Suite::Arith,
        max_n: 100_000,
        ..SuiteConfig::default()
    };
    let report = run_suite(&config).unwrap().remove(0);
    let tol = Tolerance::default();
    let printed = divisor_mean_sandwich(
        6,
        1.0,
        false,
        DivisorVariant::AsPrinted,
        BigMChoice::NAsPrinted,
        &tol,
    )
    .unwrap();
    let exact = printed.exact
        && !printed.sandwich.lower_ok
        && printed.sandwich.lower == 41.0 / 48.0
        && close(printed.sandwich.middle, 3.0 - 6f64.sqrt(), 1e-15);
    let mut o = summarize(&[report]);
    o.passed &= exact;
    o.detail.push_str(&format!(
        "; as-printed n=6: lower={} middle={}",
        printed.sandwich.lower, printed.sandwich.middle
    ));
    o
}

fn divisor_identities() -> Outcome {
    let config = SuiteConfig {
        suite: Suite::ArithIdentities,
        max_n: 100_000,
        ..SuiteConfig::default()
    };
    summarize(&run_suite(&config).unwrap())
}

fn operator_suite() -> Outcome {
    let report = suite(Suite::Matrix, 1000);
    let assignment = report.notes.to_string();
    let mut o = summarize(&[report]);
    o.detail.push_str(&format!(
        "; harmonic-mean bound assignment counts {assignment}"
    ));
    o
}

fn golden() -> Outcome {
    let failures: Vec<String> = common::CASES
        .iter()
        .filter_map(|c| common::check(c).err())
        .collect();
    let repeat = [
        "verify", "--suite", "all", "--trials", "20", "--max-n", "200", "--seed", "5", "--json",
    ];
    let deterministic = common::run(&repeat).stdout == common::run(&repeat).stdout;
    outcome(
        failures.is_empty() && deterministic,
        format!(
            "{} golden cases, {} mismatches, deterministic={deterministic}",
            common::CASES.len(),
            failures.len()
        ),
    )
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "scalar sandwich suites (2-point, n-point, Bernoulli)",
            limit: Some(Duration::from_secs(5)),
            run: scalar_suites,
        },
        Criterion {
            id: 2,
            name: "worked-value fixtures",
            limit: None,
            run: fixtures,
        },
        Criterion {
            id: 3,
            name: "upper-bound tightness and reverse-Young counterexample",
            limit: None,
            run: tightness,
        },
        Criterion {
            id: 4,
            name: "power-mean monotonicity",
            limit: None,
            run: || summarize(&[suite(Suite::PowerMean, 10_000)]),
        },
        Criterion {
            id: 5,
            name: "divisor-mean sandwich scan n <= 1e5",
            limit: Some(Duration::from_secs(60)),
            run: divisor_scan,
        },
        Criterion {
            id: 6,
            name: "divisor-function identities n <= 1e5",
            limit: None,
            run: divisor_identities,
        },
        Criterion {
            id: 7,
            name: "operator sandwich suite",
            limit: Some(Duration::from_secs(30)),
            run: operator_suite,
        },
        Criterion {
            id: 8,
            name: "scalar/matrix coherence",
            limit: None,
            run: || summarize(&[suite(Suite::Coherence, 10_000)]),
        },
        Criterion {
            id: 9,
            name: "Jacobi kernel accuracy",
            limit: None,
            run: || summarize(&[suite(Suite::Kernel, 1000)]),
        },
        Criterion {
            id: 10,
            name: "CLI determinism and exit codes",
            limit: None,
            run: golden,
        },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let o = (c.run)();
        let elapsed = start.elapsed();
        let in_time = c.limit.is_none_or(|l| elapsed <= l);
        let ok = o.passed && in_time;
        let limit = c
            .limit
            .map(|l| format!(" / limit {}s", l.as_secs()))
            .unwrap_or_default();
        println!(
            "{} [{:>2}] {} ({:.2}s{limit}): {}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            o.detail
        );
        if !ok {
            failed.push(c.id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
