//! Seeded randomized verification suites.
//!
//! Every trial draws from its own ChaCha stream derived from `(seed, suite,
//! trial index)`, trials run in parallel, and results are merged in trial
//! order, so a report is a pure function of its configuration.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith_fn::{
    centered_square_sum, divisor_mean_sandwich, divisor_mean_sandwich_for,
    divisor_product_identity, power_sum_closed_form, BigMChoice, DivisorProfile, DivisorVariant,
};
use crate::error::{domain, CfError, Result};
use crate::op_ineq::{
    amghm_chain_check, corollary42_sandwich, corollary43_check, remark41_psd_terms,
    theorem41_sandwich, BoundAssignment, OperatorSandwich,
};
use crate::refcheck::{agrees, brute_divisors, HpContext, OracleInput, DEFAULT_PRECISION_BITS};
use crate::scalar_cf::{
    bernoulli_sandwich, cf_sandwich_n, cf_sandwich_two, tightness_report, young_gap, ScalarPair,
    WeightedSample,
};
use crate::sum_refine::{
    bergstrom_sandwich, cauchy_sandwich, holder_sandwich, power_mean, power_mean_sandwich,
    HolderSpec, PowerMeanSpec,
};
use crate::symker::{jacobi_eigh, spd_power, SymMatrix};
use crate::tolerance::{ScalarSandwich, Tolerance};

/// Matrix slack allowance: `min eig ≥ −1e-8·(1 + ‖·‖_F)`.
pub const MATRIX_SLACK_REL: f64 = 1e-8;
/// Dimension-1 matrix checks against the scalar formulas.
pub const COHERENCE_REL: f64 = 1e-10;
/// Jacobi residual bound, relative.
pub const KERNEL_REL: f64 = 1e-12;
/// Fast path against the extended-precision oracle.
pub const ORACLE_REL: f64 = 1e-12;

const MAX_REPORTED_FAILURES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Scalar,
    Nvar,
    Bernoulli,
    Tightness,
    PowerMean,
    Holder,
    Cauchy,
    Bergstrom,
    Oracle,
    Arith,
    ArithIdentities,
    Matrix,
    Coherence,
    Kernel,
    All,
}

impl Suite {
    pub const EACH: [Suite; 14] = [
        Suite::Scalar,
        Suite::Nvar,
        Suite::Bernoulli,
        Suite::Tightness,
        Suite::PowerMean,
        Suite::Holder,
        Suite::Cauchy,
        Suite::Bergstrom,
        Suite::Oracle,
        Suite::Arith,
        Suite::ArithIdentities,
        Suite::Matrix,
        Suite::Coherence,
        Suite::Kernel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Scalar => "scalar",
            Suite::Nvar => "nvar",
            Suite::Bernoulli => "bernoulli",
            Suite::Tightness => "tightness",
            Suite::PowerMean => "power-mean",
            Suite::Holder => "holder",
            Suite::Cauchy => "cauchy",
            Suite::Bergstrom => "bergstrom",
            Suite::Oracle => "oracle",
            Suite::Arith => "arith",
            Suite::ArithIdentities => "arith-identities",
            Suite::Matrix => "matrix",
            Suite::Coherence => "coherence",
            Suite::Kernel => "kernel",
            Suite::All => "all",
        }
    }

    fn salt(self) -> u64 {
        // FNV-1a of the name: stable across builds
        self.name().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CfError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| CfError::Domain(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    pub precision_bits: usize,
    /// Upper end of the integer range scanned by the divisor suites.
    pub max_n: u64,
    pub tol: Tolerance,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            trials: 1000,
            seed: 42,
            dims: vec![1, 2, 4, 8],
            lambda_grid: (1..=9).map(|i| i as f64 / 10.0).collect(),
            precision_bits: DEFAULT_PRECISION_BITS,
            max_n: 100_000,
            tol: Tolerance::default(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return domain("trials must be at least 1");
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return domain("dims must be a non-empty list of positive integers");
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|l| !(0.0..=1.0).contains(l))
        {
            return domain("lambda grid must be a non-empty list of values in [0, 1]");
        }
        if self.max_n == 0 {
            return domain("max_n must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub trial: u64,
    pub check: String,
    pub inputs: Value,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    pub checks: usize,
    pub failures: usize,
    pub passed: bool,
    /// Smallest normalized slack seen (negative means a violation); 0 when no
    /// check in the suite carries a slack.
    pub worst_slack: f64,
    pub first_failures: Vec<FailureRecord>,
    /// Suite-specific counters (orderings, bound assignments, ...).
    #[serde(skip_serializing_if = "Value::is_null", default)]
    pub notes: Value,
}

#[derive(Debug, Default)]
struct Tally {
    checks: usize,
    failures: Vec<FailureRecord>,
    failure_count: usize,
    worst: f64,
    counters: std::collections::BTreeMap<String, usize>,
}

impl Tally {
    fn new() -> Self {
        Self {
            worst: f64::INFINITY,
            ..Self::default()
        }
    }

    fn check(
        &mut self,
        trial: u64,
        name: &str,
        ok: bool,
        slack: f64,
        inputs: impl FnOnce() -> Value,
    ) {
        self.checks += 1;
        // NaN marks a pass/fail check without a slack
        if !slack.is_nan() {
            self.worst = self.worst.min(slack);
        }
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < MAX_REPORTED_FAILURES {
                self.failures.push(FailureRecord {
                    trial,
                    check: name.to_string(),
                    inputs: inputs(),
                    slack,
                });
            }
        }
    }

    fn sandwich(
        &mut self,
        trial: u64,
        name: &str,
        s: &ScalarSandwich,
        inputs: impl FnOnce() -> Value,
    ) {
        self.check(trial, name, s.passed(), s.relative_slack(), inputs);
    }

    fn error(&mut self, trial: u64, name: &str, err: &CfError, inputs: impl FnOnce() -> Value) {
        self.check(
            trial,
            name,
            false,
            f64::NEG_INFINITY,
            || json!({"inputs": inputs(), "error": err.to_string()}),
        );
    }

    fn count(&mut self, key: impl Into<String>) {
        *self.counters.entry(key.into()).or_default() += 1;
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checks += other.checks;
        self.failure_count += other.failure_count;
        self.worst = self.worst.min(other.worst);
        for f in other.failures {
            if self.failures.len() < MAX_REPORTED_FAILURES {
                self.failures.push(f);
            }
        }
        for (k, v) in other.counters {
            *self.counters.entry(k).or_default() += v;
        }
        self
    }

    fn report(self, suite: Suite, trials: usize) -> SuiteReport {
        let notes = if self.counters.is_empty() {
            Value::Null
        } else {
            serde_json::to_value(&self.counters).unwrap_or(Value::Null)
        };
        SuiteReport {
            suite: suite.name().to_string(),
            trials,
            checks: self.checks,
            failures: self.failure_count,
            passed: self.failure_count == 0,
            worst_slack: if self.worst == f64::INFINITY {
                0.0
            } else {
                self.worst
            },
            first_failures: self.failures,
            notes,
        }
    }
}

/// Independent stream for one trial of one suite.
pub fn trial_rng(seed: u64, suite: Suite, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ suite.salt());
    rng.set_stream(trial);
    rng
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..=hi.ln()).exp()
}

fn positive_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| 1e-3 + rng.gen::<f64>()).collect()
}

fn convex_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let w = positive_weights(rng, n);
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn log_uniform_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| log_uniform(rng, 1e-3, 1e3)).collect()
}

/// Symmetric matrix with entries uniform in `[-1, 1]`.
pub fn random_symmetric(rng: &mut impl Rng, dim: usize) -> SymMatrix {
    SymMatrix::from_fn(dim, |_, _| rng.gen_range(-1.0..=1.0))
}

/// `GGᵀ/d + δI` with `G` uniform in `[-1, 1]` and `δ ∈ [0.05, 0.55]`, scaled
/// by a factor in `[0.5, 2]`.
pub fn random_spd(rng: &mut impl Rng, dim: usize) -> SymMatrix {
    let g: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let shift = 0.05 + 0.5 * rng.gen::<f64>();
    let scale = log_uniform(rng, 0.5, 2.0);
    SymMatrix::from_fn(dim, |i, j| {
        let dot: f64 = (0..dim).map(|k| g[i * dim + k] * g[j * dim + k]).sum();
        scale * (dot / dim as f64 + if i == j { shift } else { 0.0 })
    })
}

/// `(A, A + C)` with `A`, `C` independent positive definite draws, `C` scaled
/// into `[0.05, 1]`; the pair is returned in random order.
pub fn random_comparable_pair(rng: &mut impl Rng, dim: usize) -> (SymMatrix, SymMatrix) {
    let a = random_spd(rng, dim);
    let c = random_spd(rng, dim).scale(log_uniform(rng, 0.05, 1.0));
    let b = a.add(&c).expect("same dimension");
    if rng.gen::<bool>() {
        (a, b)
    } else {
        (b, a)
    }
}

fn par_trials<F>(trials: usize, f: F) -> Tally
where
    F: Fn(u64, &mut Tally) + Sync,
{
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut t = Tally::new();
            f(i, &mut t);
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::new(), Tally::merge)
}

pub fn run_suite(config: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    config.validate()?;
    let suites: Vec<Suite> = match config.suite {
        Suite::All => Suite::EACH.to_vec(),
        s => vec![s],
    };
    suites.into_iter().map(|s| run_single(s, config)).collect()
}

fn run_single(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let tol = cfg.tol;
    let seed = cfg.seed;
    let trials = cfg.trials;
    let tally = match suite {
        Suite::Scalar => par_trials(trials, |i, t| {
            let mut rng = trial_rng(seed, suite, i);
            let (a, b) = (
                log_uniform(&mut rng, 1e-3, 1e3),
                log_uniform(&mut rng, 1e-3, 1e3),
            );
            let lambda = rng.gen::<f64>();
            let inputs = || json!({"a": a, "b": b, "lambda": lambda});
            let pair = ScalarPair { a, b, lambda };
            match cf_sandwich_two(&pair, &tol) {
                Ok(s) => {
                    t.sandwich(i, "cf_two", &s, inputs);
                    t.check(
                        i,
                        "cf_two_lower_nonnegative",
                        s.lower >= 0.0,
                        f64::NAN,
                        inputs,
                    );
                }
                Err(e) => t.error(i, "cf_two", &e, inputs),
            }
            let gap = young_gap(&pair).unwrap_or(f64::NAN);
            t.check(
                i,
                "young_nonnegative",
                gap >= -tol.tol(gap),
                f64::NAN,
                inputs,
            );
        }),
        Suite::Nvar => par_trials(trials, |i, t| {
            let mut rng = trial_rng(seed, suite, i);
            let n = rng.gen_range(1..=64);
            let points = log_uniform_vec(&mut rng, n);
            let weights = convex_weights(&mut rng, n);
            let inputs = || json!({"points": points, "weights": weights});
            match WeightedSample::new(points.clone(), weights.clone(), &tol)
                .and_then(|s| cf_sandwich_n(&s, &tol))
            {
                Ok(s) => {
                    t.sandwich(i, "cf_n", &s, inputs);
                    t.check(
                        i,
                        "cf_n_lower_nonnegative",
                        s.lower >= 0.0,
                        f64::NAN,
                        inputs,
                    );
                }
                Err(e) => t.error(i, "cf_n", &e, inputs),
            }
        }),
        Suite::Bernoulli => par_trials(trials, |i, t| {
            let mut rng = trial_rng(seed, suite, i);
            let x = log_uniform(&mut rng, 1e-3, 1e3) - 1.0;
            let lambda = rng.gen::<f64>();
            let inputs = || json!({"x": x, "lambda": lambda});
            match bernoulli_sandwich(x, lambda, &tol) {
                Ok(s) => {
                    t.sandwich(i, "bernoulli", &s, inputs);
                    t.check(
                        i,
                        "bernoulli_middle_nonnegative",
                        s.middle >= -tol.tol(s.middle),
                        f64::NAN,
                        inputs,
                    );
                }
                Err(e) => t.error(i, "bernoulli", &e, inputs),
            }
        }),
        Suite::Tightness => par_trials(trials, |i, t| {
            let mut rng = trial_rng(seed, suite, i);
            let (a, b) = (
                log_uniform(&mut rng, 1e-3, 1e3),
                log_uniform(&mut rng, 1e-3, 1e3),
            );
            let lambda = rng.gen::<f64>();
            if a == b || lambda == 0.0 {
                return;
            }
            let inputs = || json!({"a": a, "b": b, "lambda": lambda});
            match tightness_report(&ScalarPair { a, b, lambda }, &tol) {
                Ok(r) => {
                    t.check(i, "cf_below_exp", r.cf_below_exp, f64::NAN, inputs);
                    t.count(r.ordering);
                }
                Err(e) => t.error(i, "tightness", &e, inputs),
            }
        }),
        Suite::PowerMean => par_trials(trials, |i, t| {
            let mut rng = trial_rng(seed, suite, i);
            let n = rng.gen_range(1..=32);
            let values = log_uniform_vec(&mut rng, n);
            let weights = positive_weights(&mut rng, n);
            let r = 8.0 * (1.0 - rng.gen::<f64>());
            let s = rng.gen_range(r..=8.0);
            let inputs = || json!({"values": values, "weights": weights, "r": r, "s": s});
            match (
                power_mean(&values, &weights, r),
                power_mean(&values, &weights, s),
            ) {
                (Ok(mr), Ok(ms)) => {
                    let slack = (ms - mr) / ms;
                    t.check(i, "monotone", slack >= -tol.rel_eps, slack, inputs);
                }
                (Err(e), _) | (_, Err(e)) => t.error(i, "power_mean", &e, inputs),
            }
            match PowerMeanSpec::new(values.clone(), weights.clone(), r, s)
                .and_then(|sp| power_mean_sandwich(&sp, &tol))
            {
                Ok((sw, _)) => t.sandwich(i, "power_mean_sandwich", &sw, inputs),
                Err(e) => t.error(i, "power_mean_sandwich", &e, inputs),
            }
        }),
        Suite::Holder => par_trials(trials, |i, t| {
            let mut rng = trial_rng(seed, suite, i);
            let n = rng.gen_range(1..=64);
            let avec = log_uniform_vec(&mut rng, n);
            let bvec = log_uniform_vec(&mut rng, n);
            let p = 1.0 + log_uniform(&mut rng, 0.05, 7.0);
            let inputs = || json!({"avec": avec, "bvec": bvec, "p": p});
            match HolderSpec::conjugate(avec.clone(), bvec.clone(), p)
                .and_then(|sp| holder_sandwich(&sp, &tol))
            {
                Ok((s, _)) => t.sandwich(i, "holder", &s, inputs),
                Err(e) => t.error(i, "holder", &e, inputs),
            }
        }),
        Suite::Cauchy => par_trials(trials, |i, t| {
            let mut rng = trial_rng(seed, suite, i);
            let n = rng.gen_range(1..=64);
            let avec = log_uniform_vec(&mut rng, n);
            let bvec = log_uniform_vec(&mut rng, n);
            let inputs = || json!({"avec": avec, "bvec": bvec});
            let c = cauchy_sandwich(&avec, &bvec, &tol);
            let h = HolderSpec::new(avec.clone(), bvec.clone(), 2.0, 2.0)
                .and_then(|sp| holder_sandwich(&sp, &tol));
            match (c, h) {
                (Ok((c, _)), Ok((h, _))) => {
                    t.sandwich(i, "cauchy", &c, inputs);
                    let inner: f64 = avec.iter().zip(&bvec).map(|(a, b)| a * b).sum();
                    let via_holder = h.middle * h.middle + 2.0 * h.middle * inner;
                    let dev = (via_holder - c.middle).abs()
                        / c.middle.abs().max(inner * inner * 1e-4).max(1.0);
                    t.check(i, "cauchy_holder_identity", dev <= 1e-9, f64::NAN, inputs);
                }
                (Err(e), _) | (_, Err(e)) => t.error(i, "cauchy", &e, inputs),
            }
        }),
        Suite::Bergstrom => par_trials(trials, |i, t| {
            let mut rng = trial_rng(seed, suite, i);
            let n = rng.gen_range(1..=64);
            let avec = log_uniform_vec(&mut rng, n);
            let xvec: Vec<f64> = (0..n)
                .map(|_| {
                    let v = log_uniform(&mut rng, 1e-3, 1e3);
                    if rng.gen::<bool>() {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            let inputs = || json!({"xvec": xvec, "avec": avec});
            match bergstrom_sandwich(&xvec, &avec, &tol) {
                Ok((s, _)) => t.sandwich(i, "bergstrom", &s, inputs),
                Err(e) => t.error(i, "bergstrom", &e, inputs),
            }
        }),
        Suite::Oracle => oracle_suite(cfg)?,
        Suite::Arith => arith_suite(cfg),
        Suite::ArithIdentities => arith_identity_suite(cfg),
        Suite::Matrix => matrix_suite(cfg),
        Suite::Coherence => coherence_suite(cfg),
        Suite::Kernel => par_trials(trials, |i, t| {
            let mut rng = trial_rng(seed, suite, i);
            let dim = rng.gen_range(1..=32);
            let s = random_symmetric(&mut rng, dim);
            let inputs = || json!({"dim": dim, "trial": i});
            match jacobi_eigh(&s) {
                Ok(e) => {
                    let orth = e.orthogonality_residual() / (KERNEL_REL * dim as f64);
                    t.check(i, "orthogonality", orth <= 1.0, 1.0 - orth, inputs);
                    let rec = e.reconstruction_residual(&s) / (KERNEL_REL * s.frobenius_norm());
                    t.check(i, "reconstruction", rec <= 1.0, 1.0 - rec, inputs);
                    let sorted = e.eigenvalues.windows(2).all(|w| w[0] <= w[1]);
                    t.check(i, "ascending", sorted, f64::NAN, inputs);
                }
                Err(e) => t.error(i, "jacobi", &e, inputs),
            }
            let spd = random_spd(&mut rng, dim.min(8));
            let norm = spd.frobenius_norm();
            for p in [-1.0, 0.5, 2.0] {
                match spd_power(&spd, p).and_then(|x| spd_power(&x, 1.0 / p)) {
                    Ok(back) => {
                        let dev = back
                            .sub(&spd)
                            .map(|d| d.frobenius_norm())
                            .unwrap_or(f64::INFINITY)
                            / (1e-10 * norm);
                        t.check(i, "power_round_trip", dev <= 1.0, 1.0 - dev, inputs);
                    }
                    Err(e) => t.error(i, "power_round_trip", &e, inputs),
                }
            }
        }),
        Suite::All => unreachable!("expanded by run_suite"),
    };
    let trials_run = match suite {
        Suite::Arith | Suite::ArithIdentities => cfg.max_n as usize,
        Suite::Oracle => cfg.trials.min(ORACLE_TRIAL_CAP),
        _ => cfg.trials,
    };
    Ok(tally.report(suite, trials_run))
}

/// Each oracle trial evaluates eight kinds at extended precision.
const ORACLE_TRIAL_CAP: usize = 200;

/// One draw of every oracle kind.
pub fn random_oracle_inputs(rng: &mut impl Rng) -> Vec<OracleInput> {
    let n = rng.gen_range(2..=8);
    let a = log_uniform(rng, 1e-3, 1e3);
    let b = log_uniform(rng, 1e-3, 1e3);
    let lambda = rng.gen::<f64>();
    let r = 4.0 * (1.0 - rng.gen::<f64>());
    let s = rng.gen_range(r..=4.0);
    let p = 1.0 + log_uniform(rng, 0.1, 4.0);
    let mut inputs = vec![
        OracleInput::CfTwo { a, b, lambda },
        OracleInput::CfN {
            points: log_uniform_vec(rng, n),
            weights: convex_weights(rng, n),
        },
        OracleInput::Bernoulli {
            x: log_uniform(rng, 1e-3, 1e3) - 1.0,
            lambda,
        },
        OracleInput::PowerMean {
            values: log_uniform_vec(rng, n),
            weights: positive_weights(rng, n),
            r,
            s,
        },
        OracleInput::Holder {
            avec: log_uniform_vec(rng, n),
            bvec: log_uniform_vec(rng, n),
            p,
            q: p / (p - 1.0),
        },
        OracleInput::Cauchy {
            avec: log_uniform_vec(rng, n),
            bvec: log_uniform_vec(rng, n),
        },
        OracleInput::Bergstrom {
            xvec: log_uniform_vec(rng, n),
            avec: log_uniform_vec(rng, n),
        },
        OracleInput::DivisorMean {
            n: rng.gen_range(1..=100_000),
            k: [0.5, 1.0, 1.5, 2.0][rng.gen_range(0..4)],
            unitary: rng.gen(),
        },
    ];
    // Nearly coincident points, where the gap is second order in the spread.
    let spread = log_uniform(rng, 1e-9, 1e-2);
    let near_lambda = rng.gen::<f64>();
    let near = a * (1.0 + spread);
    inputs.push(OracleInput::CfTwo {
        a,
        b: near,
        lambda: near_lambda,
    });
    inputs.push(OracleInput::CfN {
        points: vec![a, near, a * (1.0 - spread)],
        weights: convex_weights(rng, 3),
    });
    inputs
}

/// Fast path for one oracle input.
pub fn fast_sandwich(input: &OracleInput, tol: &Tolerance) -> Result<ScalarSandwich> {
    match input {
        OracleInput::CfTwo { a, b, lambda } => {
            cf_sandwich_two(&ScalarPair::new(*a, *b, *lambda)?, tol)
        }
        OracleInput::CfN { points, weights } => cf_sandwich_n(
            &WeightedSample::new(points.clone(), weights.clone(), tol)?,
            tol,
        ),
        OracleInput::Bernoulli { x, lambda } => bernoulli_sandwich(*x, *lambda, tol),
        OracleInput::PowerMean {
            values,
            weights,
            r,
            s,
        } => Ok(power_mean_sandwich(
            &PowerMeanSpec::new(values.clone(), weights.clone(), *r, *s)?,
            tol,
        )?
        .0),
        OracleInput::Holder { avec, bvec, p, q } => {
            Ok(holder_sandwich(&HolderSpec::new(avec.clone(), bvec.clone(), *p, *q)?, tol)?.0)
        }
        OracleInput::Cauchy { avec, bvec } => Ok(cauchy_sandwich(avec, bvec, tol)?.0),
        OracleInput::Bergstrom { xvec, avec } => Ok(bergstrom_sandwich(xvec, avec, tol)?.0),
        OracleInput::DivisorMean { n, k, unitary } => Ok(divisor_mean_sandwich(
            *n,
            *k,
            *unitary,
            DivisorVariant::ProofCorrected,
            BigMChoice::NToK,
            tol,
        )?
        .sandwich),
    }
}

fn oracle_suite(cfg: &SuiteConfig) -> Result<Tally> {
    HpContext::new(cfg.precision_bits)?;
    let trials = cfg.trials.min(ORACLE_TRIAL_CAP);
    Ok(par_trials(trials, |i, t| {
        let mut rng = trial_rng(cfg.seed, Suite::Oracle, i);
        let mut ctx = HpContext::new(cfg.precision_bits).expect("validated precision");
        for input in random_oracle_inputs(&mut rng) {
            let inputs = || serde_json::to_value(&input).unwrap_or(Value::Null);
            match (fast_sandwich(&input, &cfg.tol), ctx.hp_sandwich(&input)) {
                (Ok(f), Ok(o)) => {
                    t.check(
                        i,
                        "fast_matches_oracle",
                        agrees(&f, &o, ORACLE_REL),
                        f64::NAN,
                        inputs,
                    );
                    t.check(i, "oracle_sandwich", o.passed(), o.relative_slack(), inputs);
                }
                (Err(e), _) | (_, Err(e)) => t.error(i, "oracle", &e, inputs),
            }
        }
    }))
}

const DIVISOR_KS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 3.0];

fn arith_suite(cfg: &SuiteConfig) -> Tally {
    let tol = cfg.tol;
    let mut tally = (1..=cfg.max_n)
        .into_par_iter()
        .map(|n| {
            let mut t = Tally::new();
            let profile = DivisorProfile::new(n).expect("n in range");
            for unitary in [false, true] {
                for k in DIVISOR_KS {
                    let inputs = || json!({"n": n, "k": k, "unitary": unitary});
                    match divisor_mean_sandwich_for(
                        &profile,
                        k,
                        unitary,
                        DivisorVariant::ProofCorrected,
                        BigMChoice::NToK,
                        &tol,
                    ) {
                        Ok(r) => {
                            t.sandwich(n, "proof_corrected", &r.sandwich, inputs);
                            t.check(
                                n,
                                "exact_for_integer_k",
                                r.exact || k.fract() != 0.0,
                                f64::NAN,
                                inputs,
                            );
                            t.check(
                                n,
                                "classical_bound",
                                r.sandwich.middle >= -tol.tol(r.sandwich.middle),
                                f64::NAN,
                                inputs,
                            );
                            if k == 0.0 {
                                t.check(
                                    n,
                                    "k0_zero",
                                    r.sandwich == ScalarSandwich::zero(),
                                    f64::NAN,
                                    inputs,
                                );
                            }
                        }
                        Err(e) => t.error(n, "proof_corrected", &e, inputs),
                    }
                }
            }
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::new(), Tally::merge);

    // the statement as typeset fails at n = 6, k = 1
    if cfg.max_n >= 6 {
        let inputs =
            || json!({"n": 6, "k": 1, "variant": "as_printed", "big_m_choice": "n_as_printed"});
        match divisor_mean_sandwich(
            6,
            1.0,
            false,
            DivisorVariant::AsPrinted,
            BigMChoice::NAsPrinted,
            &tol,
        ) {
            Ok(r) => {
                let ok = !r.sandwich.lower_ok
                    && r.exact
                    && (r.sandwich.lower - 41.0 / 48.0).abs() < 1e-15;
                tally.check(6, "as_printed_violation_reproduced", ok, f64::NAN, inputs);
            }
            Err(e) => tally.error(6, "as_printed_violation_reproduced", &e, inputs),
        }
    }
    tally
}

fn arith_identity_suite(cfg: &SuiteConfig) -> Tally {
    (1..=cfg.max_n)
        .into_par_iter()
        .map(|n| {
            let mut t = Tally::new();
            let profile = DivisorProfile::new(n).expect("n in range");
            let inputs = || json!({"n": n});
            let brute = brute_divisors(n).unwrap_or_default();
            t.check(
                n,
                "brute_divisors",
                brute == profile.divisors,
                f64::NAN,
                inputs,
            );
            let expected_tau: usize = profile
                .factorization
                .iter()
                .map(|&(_, e)| e as usize + 1)
                .product();
            t.check(
                n,
                "tau_product_formula",
                profile.divisors.len() == expected_tau,
                f64::NAN,
                inputs,
            );
            t.check(
                n,
                "unitary_count",
                profile.unitary_divisors.len() == 1 << profile.factorization.len(),
                f64::NAN,
                inputs,
            );
            let closed = profile
                .unitary_divisors
                .iter()
                .all(|d| profile.unitary_divisors.binary_search(&(n / d)).is_ok());
            t.check(n, "unitary_complement_closed", closed, f64::NAN, inputs);
            for unitary in [false, true] {
                t.check(
                    n,
                    "divisor_product",
                    divisor_product_identity(&profile, unitary),
                    f64::NAN,
                    inputs,
                );
                for k in 0..=3u32 {
                    let ok = profile.power_sum(k, unitary)
                        == power_sum_closed_form(&profile.factorization, k, unitary);
                    t.check(
                        n,
                        "closed_form",
                        ok,
                        f64::NAN,
                        || json!({"n": n, "k": k, "unitary": unitary}),
                    );
                }
                for k in 1..=3u32 {
                    let direct = centered_square_sum(&profile, k, unitary);
                    let s1 = num_rational::BigRational::from_integer(
                        profile.power_sum(k, unitary).into(),
                    );
                    let s2 = num_rational::BigRational::from_integer(
                        profile.power_sum(2 * k, unitary).into(),
                    );
                    let tau =
                        num_rational::BigRational::from_integer(profile.count(unitary).into());
                    let ok = direct == s2 - &s1 * &s1 / tau;
                    t.check(
                        n,
                        "bracket_identity",
                        ok,
                        f64::NAN,
                        || json!({"n": n, "k": k, "unitary": unitary}),
                    );
                }
            }
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::new(), Tally::merge)
}

/// `min eig(upper − lower) ≥ −1e-8·(1 + max(‖lower‖_F, ‖upper‖_F))`, returned
/// as a normalized slack (nonnegative passes).
fn matrix_slack(min_eig: f64, x: &SymMatrix, y: &SymMatrix) -> f64 {
    min_eig / (MATRIX_SLACK_REL * (1.0 + x.frobenius_norm().max(y.frobenius_norm())))
}

fn record_operator(
    t: &mut Tally,
    trial: u64,
    name: &str,
    s: &OperatorSandwich,
    inputs: impl Fn() -> Value,
) {
    let lo = matrix_slack(s.min_eig_lower_gap(), &s.lower, &s.middle);
    let hi = matrix_slack(s.min_eig_upper_gap(), &s.middle, &s.upper);
    t.check(
        trial,
        &format!("{name}_slack"),
        lo.min(hi) >= -1.0,
        lo.min(hi),
        &inputs,
    );
    t.check(
        trial,
        &format!("{name}_verdicts"),
        s.passed(),
        lo.min(hi),
        &inputs,
    );
}

fn matrix_suite(cfg: &SuiteConfig) -> Tally {
    let jobs: Vec<(usize, u64)> = cfg
        .dims
        .iter()
        .flat_map(|&d| (0..cfg.trials as u64).map(move |i| (d, i)))
        .collect();
    jobs.into_par_iter()
        .map(|(dim, i)| {
            let mut t = Tally::new();
            let trial = (dim as u64) << 32 | i;
            let mut rng = trial_rng(cfg.seed, Suite::Matrix, trial);
            let (a, b) = random_comparable_pair(&mut rng, dim);
            let inputs = || json!({"dim": dim, "trial": i, "A": a, "B": b});
            for &lambda in &cfg.lambda_grid {
                match theorem41_sandwich(&a, &b, lambda) {
                    Ok(s) => record_operator(&mut t, trial, "theorem41", &s, inputs),
                    Err(e) => t.error(trial, "theorem41", &e, inputs),
                }
                match amghm_chain_check(&a, &b, lambda) {
                    Ok(c) => t.check(trial, "amghm_chain", c.passed(), f64::NAN, inputs),
                    Err(e) => t.error(trial, "amghm_chain", &e, inputs),
                }
                if lambda > 0.0 && lambda < 1.0 {
                    match corollary42_sandwich(&a, &b, lambda) {
                        Ok(s) => {
                            record_operator(&mut t, trial, "corollary42", &s, inputs);
                            let tag = match s.assignment {
                                Some(BoundAssignment::AsPrinted) => "corollary42_as_printed",
                                Some(BoundAssignment::Swapped) => "corollary42_swapped",
                                Some(BoundAssignment::Indistinct) => "corollary42_indistinct",
                                _ => "corollary42_neither",
                            };
                            t.count(tag);
                        }
                        Err(e) => t.error(trial, "corollary42", &e, inputs),
                    }
                }
            }
            let (lo, hi) = if theorem41_sandwich(&a, &b, 0.5).map(|s| s.case_tag)
                == Ok(crate::op_ineq::CaseTag::ALeqB)
            {
                (&a, &b)
            } else {
                (&b, &a)
            };
            match corollary43_check(lo, hi) {
                Ok(c) => t.check(trial, "corollary43", c.psd, f64::NAN, inputs),
                Err(e) => t.error(trial, "corollary43", &e, inputs),
            }
            // independent draws, generally incomparable
            let x = random_spd(&mut rng, dim);
            let y = random_spd(&mut rng, dim);
            match remark41_psd_terms(&x, &y) {
                Ok(r) => t.check(
                    trial,
                    "remark41_psd",
                    r.both_psd,
                    f64::NAN,
                    || json!({"dim": dim, "trial": i}),
                ),
                Err(e) => t.error(
                    trial,
                    "remark41_psd",
                    &e,
                    || json!({"dim": dim, "trial": i}),
                ),
            }
            match amghm_chain_check(&x, &y, cfg.lambda_grid[i as usize % cfg.lambda_grid.len()]) {
                Ok(c) => t.check(
                    trial,
                    "amghm_chain_incomparable",
                    c.passed(),
                    f64::NAN,
                    || json!({"dim": dim, "trial": i}),
                ),
                Err(e) => t.error(
                    trial,
                    "amghm_chain_incomparable",
                    &e,
                    || json!({"dim": dim, "trial": i}),
                ),
            }
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::new(), Tally::merge)
}

fn coherence_suite(cfg: &SuiteConfig) -> Tally {
    let tol = cfg.tol;
    par_trials(cfg.trials, |i, t| {
        let mut rng = trial_rng(cfg.seed, Suite::Coherence, i);
        let a = log_uniform(&mut rng, 1e-2, 1e2);
        let b = log_uniform(&mut rng, 1e-2, 1e2);
        let lambda = rng.gen::<f64>();
        let inputs = || json!({"a": a, "b": b, "lambda": lambda});
        let close = |x: f64, y: f64| (x - y).abs() <= COHERENCE_REL * y.abs().max(1.0);
        let (ma, mb) = (SymMatrix::diag(&[a]), SymMatrix::diag(&[b]));

        // the matrix statement weights B by λ; the scalar one weights a by λ
        let pair = ScalarPair {
            a,
            b,
            lambda: 1.0 - lambda,
        };
        match (
            theorem41_sandwich(&ma, &mb, lambda),
            cf_sandwich_two(&pair, &tol),
        ) {
            (Ok(m), Ok(s)) => {
                let ok = close(m.lower.get(0, 0), s.lower)
                    && close(m.middle.get(0, 0), s.middle)
                    && close(m.upper.get(0, 0), s.upper);
                t.check(i, "theorem41_vs_scalar", ok, f64::NAN, inputs);
            }
            (Err(e), _) | (_, Err(e)) => t.error(i, "theorem41_vs_scalar", &e, inputs),
        }
        match remark41_psd_terms(&ma, &mb) {
            Ok(r) => {
                let ok = close(r.t1.get(0, 0), (a - b).powi(2) / b)
                    && close(r.t2.get(0, 0), (a - b).powi(2) / a);
                t.check(i, "remark41_vs_scalar", ok, f64::NAN, inputs);
            }
            Err(e) => t.error(i, "remark41_vs_scalar", &e, inputs),
        }
        match amghm_chain_check(&ma, &mb, lambda) {
            Ok(c) => {
                let hm = 1.0 / ((1.0 - lambda) / a + lambda / b);
                let gm = ((1.0 - lambda) * a.ln() + lambda * b.ln()).exp();
                let am = (1.0 - lambda) * a + lambda * b;
                let ok = close(c.hm_leq_gm.min_eig_b_minus_a, gm - hm)
                    && close(c.gm_leq_am.min_eig_b_minus_a, am - gm);
                t.check(i, "chain_vs_scalar", ok, f64::NAN, inputs);
            }
            Err(e) => t.error(i, "chain_vs_scalar", &e, inputs),
        }
        let (lo, hi) = (a.min(b), a.max(b));
        match corollary43_check(&SymMatrix::diag(&[lo]), &SymMatrix::diag(&[hi])) {
            Ok(c) => t.check(
                i,
                "corollary43_vs_cube",
                close(c.expr.get(0, 0), (hi - lo).powi(3) / (lo * hi)),
                f64::NAN,
                inputs,
            ),
            Err(e) => t.error(i, "corollary43_vs_cube", &e, inputs),
        }
    })
}
