//! `cfineq`: evaluate refined Young-type sandwich bounds and run the seeded
//! verification suites.
//!
//! Exit status is 0 when every checked inequality holds, 2 when a check
//! fails, and 1 on usage or domain errors.

use std::path::PathBuf;
use std::process::ExitCode;

use cfineq::arith_fn::{divisor_mean_sandwich, scan_divisor_sandwich, BigMChoice, DivisorVariant};
use cfineq::op_ineq::{
    amghm_chain_check, corollary42_sandwich, corollary43_check, theorem41_sandwich,
    OperatorSandwich,
};
use cfineq::refcheck::{agrees, HpContext, OracleInput};
use cfineq::scalar_cf::{tightness_report, ScalarPair};
use cfineq::symker::SymMatrix;
use cfineq::verify::{fast_sandwich, run_suite, Suite, SuiteConfig, ORACLE_REL};
use cfineq::{CfError, Tolerance};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

const EXIT_FAIL: u8 = 2;
const EXIT_USAGE: u8 = 1;

#[derive(Parser)]
#[command(
    name = "cfineq",
    version,
    about = "Refined Young, Hölder and operator-mean inequality checker"
)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Emit one JSON document
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,

    /// Emit CSV (scalar fields only)
    #[arg(long, global = true)]
    csv: bool,

    /// Relative tolerance for pass/fail flags
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,

    /// Cross-check scalar results against an extended-precision evaluation
    #[arg(long, global = true)]
    precision_bits: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    ProofCorrected,
    AsPrinted,
}

impl From<VariantArg> for DivisorVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::ProofCorrected => DivisorVariant::ProofCorrected,
            VariantArg::AsPrinted => DivisorVariant::AsPrinted,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BigMArg {
    /// Largest point `n^k`
    NToK,
    /// Largest point `n`
    N,
}

impl From<BigMArg> for BigMChoice {
    fn from(v: BigMArg) -> Self {
        match v {
            BigMArg::NToK => BigMChoice::NToK,
            BigMArg::N => BigMChoice::NAsPrinted,
        }
    }
}

#[derive(Args)]
struct PairArgs {
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
}

#[derive(Args)]
struct MatrixPair {
    /// Matrix as a JSON array of rows, or `@path` to a file holding one
    #[arg(long)]
    a: String,
    /// Matrix as a JSON array of rows, or `@path` to a file holding one
    #[arg(long)]
    b: String,
}

#[derive(Args)]
struct DivisorArgs {
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Use unitary divisors
    #[arg(long)]
    unitary: bool,
    #[arg(long, value_enum, default_value_t = VariantArg::ProofCorrected)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value_t = BigMArg::NToK)]
    big_m: BigMArg,
}

#[derive(Subcommand)]
enum Command {
    /// Two-point sandwich for the weighted AM-GM gap
    Young(PairArgs),
    /// n-point sandwich; weights default to uniform
    Sandwich {
        #[arg(long, value_delimiter = ',', required = true)]
        points: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
    /// Sandwich for `1 + λx − (1 + x)^λ`
    Bernoulli {
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long)]
        lambda: f64,
    },
    /// Compare the two-point upper bound with both reverse Young bounds
    Tightness(PairArgs),
    /// Power-mean gap `M_s^r − M_r^r`
    PowerMean {
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        s: f64,
    },
    /// Hölder gap `‖a‖_p‖b‖_q − ∑ab`; `q` defaults to the conjugate of `p`
    Holder {
        #[arg(long, value_delimiter = ',', required = true)]
        avec: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        bvec: Vec<f64>,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Cauchy-Schwarz gap `(∑a²)(∑b²) − (∑ab)²`
    Cauchy {
        #[arg(long, value_delimiter = ',', required = true)]
        avec: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        bvec: Vec<f64>,
    },
    /// Bergström gap `∑x²/a − (∑|x|)²/∑a`
    Bergstrom {
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        xvec: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        avec: Vec<f64>,
    },
    /// Divisor-mean sandwich around `n^{k/2}`
    Arith {
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        div: DivisorArgs,
    },
    /// Divisor-mean sandwich over a range of `n`
    ArithScan {
        #[arg(long, default_value_t = 1)]
        from: u64,
        #[arg(long)]
        to: u64,
        #[command(flatten)]
        div: DivisorArgs,
        /// Failing records to keep in the report
        #[arg(long, default_value_t = 10)]
        keep: usize,
    },
    /// Operator sandwich for `(1−λ)A + λB − A♯_λB`
    MatrixT41 {
        #[command(flatten)]
        pair: MatrixPair,
        #[arg(long)]
        lambda: f64,
    },
    /// Operator sandwich around the weighted harmonic mean
    MatrixC42 {
        #[command(flatten)]
        pair: MatrixPair,
        #[arg(long)]
        lambda: f64,
    },
    /// `3(A−B) + BA⁻¹B − AB⁻¹A ≥ 0` for `A ≤ B`
    MatrixC43 {
        #[command(flatten)]
        pair: MatrixPair,
    },
    /// Harmonic ≤ geometric ≤ arithmetic operator means
    MatrixChain {
        #[command(flatten)]
        pair: MatrixPair,
        #[arg(long)]
        lambda: f64,
    },
    /// Seeded randomized verification suites
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, env = "CFINEQ_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        dims: Vec<usize>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"
        )]
        lambda: Vec<f64>,
        /// Upper end of the divisor scans
        #[arg(long, default_value_t = 100_000)]
        max_n: u64,
    },
}

#[derive(Clone, Copy)]
enum Format {
    Text,
    Json,
    Csv,
}

/// A rendered result and whether every check in it held.
struct Outcome {
    report: Value,
    passed: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let format = if cli.common.json {
        Format::Json
    } else if cli.common.csv {
        Format::Csv
    } else {
        Format::Text
    };
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", render(&outcome.report, format));
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, CfError> {
    let tol = Tolerance::new(cli.common.tol)?;
    let bits = cli.common.precision_bits;
    match &cli.command {
        Command::Young(p) => scalar(
            OracleInput::CfTwo {
                a: p.a,
                b: p.b,
                lambda: p.lambda,
            },
            &tol,
            bits,
        ),
        Command::Sandwich { points, weights } => {
            let weights = weights
                .clone()
                .unwrap_or_else(|| vec![1.0 / points.len() as f64; points.len()]);
            scalar(
                OracleInput::CfN {
                    points: points.clone(),
                    weights,
                },
                &tol,
                bits,
            )
        }
        Command::Bernoulli { x, lambda } => scalar(
            OracleInput::Bernoulli {
                x: *x,
                lambda: *lambda,
            },
            &tol,
            bits,
        ),
        Command::Tightness(p) => tightness(p, &tol, bits),
        Command::PowerMean {
            values,
            weights,
            r,
            s,
        } => {
            let weights = weights.clone().unwrap_or_else(|| vec![1.0; values.len()]);
            scalar(
                OracleInput::PowerMean {
                    values: values.clone(),
                    weights,
                    r: *r,
                    s: *s,
                },
                &tol,
                bits,
            )
        }
        Command::Holder { avec, bvec, p, q } => {
            let q = q.unwrap_or(p / (p - 1.0));
            scalar(
                OracleInput::Holder {
                    avec: avec.clone(),
                    bvec: bvec.clone(),
                    p: *p,
                    q,
                },
                &tol,
                bits,
            )
        }
        Command::Cauchy { avec, bvec } => scalar(
            OracleInput::Cauchy {
                avec: avec.clone(),
                bvec: bvec.clone(),
            },
            &tol,
            bits,
        ),
        Command::Bergstrom { xvec, avec } => scalar(
            OracleInput::Bergstrom {
                xvec: xvec.clone(),
                avec: avec.clone(),
            },
            &tol,
            bits,
        ),
        Command::Arith { n, div } => arith(*n, div, &tol, bits),
        Command::ArithScan {
            from,
            to,
            div,
            keep,
        } => {
            let r = scan_divisor_sandwich(
                *from,
                *to,
                div.k,
                div.unitary,
                div.variant.into(),
                div.big_m.into(),
                *keep,
                &tol,
            )?;
            Ok(Outcome {
                passed: r.failures == 0,
                report: to_value(&r),
            })
        }
        Command::MatrixT41 { pair, lambda } => {
            let (a, b) = pair.load()?;
            Ok(operator(&theorem41_sandwich(&a, &b, *lambda)?))
        }
        Command::MatrixC42 { pair, lambda } => {
            let (a, b) = pair.load()?;
            Ok(operator(&corollary42_sandwich(&a, &b, *lambda)?))
        }
        Command::MatrixC43 { pair } => {
            let (a, b) = pair.load()?;
            let c = corollary43_check(&a, &b)?;
            Ok(Outcome {
                passed: c.psd,
                report: to_value(&c),
            })
        }
        Command::MatrixChain { pair, lambda } => {
            let (a, b) = pair.load()?;
            let c = amghm_chain_check(&a, &b, *lambda)?;
            Ok(Outcome {
                passed: c.passed(),
                report: to_value(&c),
            })
        }
        Command::Verify {
            suite,
            trials,
            seed,
            dims,
            lambda,
            max_n,
        } => {
            let config = SuiteConfig {
                suite: suite.parse::<Suite>()?,
                trials: *trials,
                seed: *seed,
                dims: dims.clone(),
                lambda_grid: lambda.clone(),
                precision_bits: bits.unwrap_or(SuiteConfig::default().precision_bits),
                max_n: *max_n,
                tol,
            };
            let reports = run_suite(&config)?;
            let passed = reports.iter().all(|r| r.passed);
            Ok(Outcome {
                passed,
                report: json!({ "seed": seed, "passed": passed, "suites": reports }),
            })
        }
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// Evaluates one scalar sandwich, optionally against the oracle.
fn scalar(input: OracleInput, tol: &Tolerance, bits: Option<usize>) -> Result<Outcome, CfError> {
    let s = fast_sandwich(&input, tol)?;
    let mut report = to_value(&s);
    let mut passed = s.passed();
    if let Some(bits) = bits {
        let oracle = HpContext::new(bits)?.hp_sandwich(&input)?;
        let ok = agrees(&s, &oracle, ORACLE_REL);
        passed &= ok;
        let obj = report
            .as_object_mut()
            .expect("sandwich serializes to an object");
        obj.insert("oracle_lower".into(), json!(oracle.lower));
        obj.insert("oracle_middle".into(), json!(oracle.middle));
        obj.insert("oracle_upper".into(), json!(oracle.upper));
        obj.insert("oracle_agrees".into(), json!(ok));
        obj.insert("precision_bits".into(), json!(bits));
    }
    Ok(Outcome { report, passed })
}

fn tightness(p: &PairArgs, tol: &Tolerance, bits: Option<usize>) -> Result<Outcome, CfError> {
    let pair = ScalarPair::new(p.a, p.b, p.lambda)?;
    let r = tightness_report(&pair, tol)?;
    let mut report = to_value(&r);
    let mut passed = r.cf_below_exp;
    if let Some(bits) = bits {
        let mut ctx = HpContext::new(bits)?;
        let log = ctx.reverse_young_log(p.a, p.b, p.lambda)?;
        let ok = (r.log_upper - log).abs() <= ORACLE_REL * log.abs().max(1.0);
        passed &= ok;
        let obj = report
            .as_object_mut()
            .expect("report serializes to an object");
        obj.insert("oracle_log_upper".into(), json!(log));
        if let Ok(Some(exp)) = ctx
            .reverse_young_exp(p.a, p.b, p.lambda)
            .map(|v| v.is_finite().then_some(v))
        {
            obj.insert("oracle_exp_upper".into(), json!(exp));
        }
        obj.insert("oracle_agrees".into(), json!(ok));
    }
    Ok(Outcome { report, passed })
}

fn arith(
    n: u64,
    div: &DivisorArgs,
    tol: &Tolerance,
    bits: Option<usize>,
) -> Result<Outcome, CfError> {
    let r = divisor_mean_sandwich(
        n,
        div.k,
        div.unitary,
        div.variant.into(),
        div.big_m.into(),
        tol,
    )?;
    let mut report = to_value(&r);
    let mut passed = r.sandwich.passed();
    // the oracle evaluates the corrected bracket with largest point n^k
    if let (Some(bits), DivisorVariant::ProofCorrected, BigMChoice::NToK) =
        (bits, r.variant, r.big_m_choice)
    {
        let input = OracleInput::DivisorMean {
            n,
            k: div.k,
            unitary: div.unitary,
        };
        let oracle = HpContext::new(bits)?.hp_sandwich(&input)?;
        let ok = agrees(&r.sandwich, &oracle, ORACLE_REL);
        passed &= ok;
        let obj = report
            .as_object_mut()
            .expect("report serializes to an object");
        obj.insert("oracle_agrees".into(), json!(ok));
    }
    Ok(Outcome { report, passed })
}

fn operator(s: &OperatorSandwich) -> Outcome {
    let mut report = to_value(s);
    let obj = report
        .as_object_mut()
        .expect("sandwich serializes to an object");
    obj.insert("min_eig_lower_gap".into(), json!(s.min_eig_lower_gap()));
    obj.insert("min_eig_upper_gap".into(), json!(s.min_eig_upper_gap()));
    obj.insert("slack_lower".into(), json!(s.min_eig_lower_gap()));
    obj.insert("slack_upper".into(), json!(s.min_eig_upper_gap()));
    obj.insert("lower_ok".into(), json!(s.lower_verdict.holds_leq()));
    obj.insert("upper_ok".into(), json!(s.upper_verdict.holds_leq()));
    Outcome {
        passed: s.passed(),
        report,
    }
}

impl MatrixPair {
    fn load(&self) -> Result<(SymMatrix, SymMatrix), CfError> {
        Ok((parse_matrix(&self.a)?, parse_matrix(&self.b)?))
    }
}

fn parse_matrix(arg: &str) -> Result<SymMatrix, CfError> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(PathBuf::from(path))
            .map_err(|e| CfError::Domain(format!("cannot read {path}: {e}")))?,
        None => arg.to_string(),
    };
    let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
        .map_err(|e| CfError::Domain(format!("matrix must be a JSON array of rows: {e}")))?;
    SymMatrix::from_rows(rows)
}

fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => format!("{report}\n"),
        Format::Csv => render_csv(report),
        Format::Text => render_text(report, 0),
    }
}

fn scalar_fields(obj: &Map<String, Value>) -> Vec<(&String, &Value)> {
    obj.iter()
        .filter(|(_, v)| !(v.is_array() || v.is_object()))
        .collect()
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Scalar fields of the report; a `suites` list becomes one row per suite.
fn render_csv(report: &Value) -> String {
    let rows: Vec<&Map<String, Value>> = match report.get("suites").and_then(Value::as_array) {
        Some(suites) => suites.iter().filter_map(Value::as_object).collect(),
        None => report.as_object().into_iter().collect(),
    };
    let Some(first) = rows.first() else {
        return String::new();
    };
    let header: Vec<&String> = scalar_fields(first).into_iter().map(|(k, _)| k).collect();
    let mut out = header
        .iter()
        .map(|k| k.as_str())
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = header
            .iter()
            .map(|k| row.get(*k).map(cell).unwrap_or_default())
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn render_text(v: &Value, indent: usize) -> String {
    let pad = "  ".repeat(indent);
    let mut out = String::new();
    match v {
        Value::Object(obj) => {
            for (k, v) in obj {
                match v {
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{k}:\n{}", render_text(v, indent + 1)))
                    }
                    Value::Array(items) if items.iter().all(|x| !x.is_object()) => {
                        out.push_str(&format!("{pad}{k}: {v}\n"))
                    }
                    Value::Array(items) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        for item in items {
                            out.push_str(&format!("{pad}  -\n{}", render_text(item, indent + 2)));
                        }
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", cell(v))),
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", cell(other))),
    }
    out
}
