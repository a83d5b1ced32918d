//! Golden-file cases shared by the `golden` and `acceptance` targets.

use std::path::PathBuf;
use std::process::Command;

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub code: i32,
}

pub const CASES: &[Case] = &[
    Case {
        name: "young_json",
        args: &["young", "--a", "4", "--b", "1", "--lambda", "0.5", "--json"],
        code: 0,
    },
    Case {
        name: "young_text",
        args: &["young", "--a", "4", "--b", "1", "--lambda", "0.5"],
        code: 0,
    },
    Case {
        name: "sandwich_csv",
        args: &[
            "sandwich",
            "--points",
            "1,2,4",
            "--weights",
            "0.25,0.5,0.25",
            "--csv",
        ],
        code: 0,
    },
    Case {
        name: "bernoulli_json",
        args: &["bernoulli", "--x", "-0.5", "--lambda", "0.3", "--json"],
        code: 0,
    },
    Case {
        name: "tightness_counterexample",
        args: &[
            "tightness",
            "--a",
            "0.99",
            "--b",
            "0.0001",
            "--lambda",
            "0.5",
            "--precision-bits",
            "256",
            "--json",
        ],
        code: 0,
    },
    Case {
        name: "power_mean_oracle",
        args: &[
            "power-mean",
            "--values",
            "1,2",
            "--weights",
            "1,1",
            "--r",
            "1",
            "--s",
            "2",
            "--precision-bits",
            "256",
            "--json",
        ],
        code: 0,
    },
    Case {
        name: "holder_json",
        args: &[
            "holder", "--avec", "1,2", "--bvec", "2,1", "--p", "2", "--json",
        ],
        code: 0,
    },
    Case {
        name: "cauchy_json",
        args: &["cauchy", "--avec", "1,2", "--bvec", "2,1", "--json"],
        code: 0,
    },
    Case {
        name: "bergstrom_json",
        args: &["bergstrom", "--xvec", "-1,2", "--avec", "1,1", "--json"],
        code: 0,
    },
    Case {
        name: "arith_as_printed",
        args: &[
            "arith",
            "--n",
            "6",
            "--k",
            "1",
            "--variant",
            "as-printed",
            "--json",
        ],
        code: 2,
    },
    Case {
        name: "arith_corrected",
        args: &["arith", "--n", "360", "--k", "2", "--unitary", "--json"],
        code: 0,
    },
    Case {
        name: "arith_scan_as_printed",
        args: &[
            "arith-scan",
            "--to",
            "30",
            "--k",
            "1",
            "--variant",
            "as-printed",
            "--big-m",
            "n",
            "--keep",
            "2",
            "--json",
        ],
        code: 2,
    },
    Case {
        name: "matrix_t41",
        args: &[
            "matrix-t41",
            "--a",
            "[[1]]",
            "--b",
            "[[4]]",
            "--lambda",
            "0.5",
            "--json",
        ],
        code: 0,
    },
    Case {
        name: "matrix_t41_diag",
        args: &[
            "matrix-t41",
            "--a",
            "[[1,0],[0,2]]",
            "--b",
            "[[4,0],[0,3]]",
            "--lambda",
            "0.3",
            "--csv",
        ],
        code: 0,
    },
    Case {
        name: "matrix_c42",
        args: &[
            "matrix-c42",
            "--a",
            "[[1]]",
            "--b",
            "[[4]]",
            "--lambda",
            "0.5",
            "--json",
        ],
        code: 0,
    },
    Case {
        name: "matrix_c43",
        args: &["matrix-c43", "--a", "[[1]]", "--b", "[[2]]", "--json"],
        code: 0,
    },
    Case {
        name: "matrix_chain",
        args: &[
            "matrix-chain",
            "--a",
            "[[2,1],[1,2]]",
            "--b",
            "[[1,0],[0,3]]",
            "--lambda",
            "0.25",
            "--json",
        ],
        code: 0,
    },
    Case {
        name: "matrix_c43_wrong_order",
        args: &["matrix-c43", "--a", "[[2]]", "--b", "[[1]]"],
        code: 1,
    },
    Case {
        name: "verify_small",
        args: &[
            "verify", "--suite", "scalar", "--trials", "300", "--seed", "7", "--json",
        ],
        code: 0,
    },
    Case {
        name: "verify_matrix_csv",
        args: &[
            "verify",
            "--suite",
            "matrix",
            "--trials",
            "5",
            "--dims",
            "1,3",
            "--lambda",
            "0.25,0.75",
            "--seed",
            "11",
            "--csv",
        ],
        code: 0,
    },
    Case {
        name: "domain_error",
        args: &["young", "--a", "-1", "--b", "1", "--lambda", "0.5"],
        code: 1,
    },
    Case {
        name: "usage_error",
        args: &["young", "--a", "4"],
        code: 1,
    },
    Case {
        name: "unknown_suite",
        args: &["verify", "--suite", "nope"],
        code: 1,
    },
];

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub struct Run {
    pub stdout: String,
    pub code: i32,
}

pub fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_cfineq"))
        .args(args)
        .env_remove("CFINEQ_SEED")
        .output()
        .expect("binary runs");
    Run {
        stdout: String::from_utf8(out.stdout).expect("utf-8 output"),
        code: out.status.code().unwrap_or(-1),
    }
}

/// Compares one case with its golden file; `CFINEQ_BLESS=1` rewrites the file.
pub fn check(case: &Case) -> Result<(), String> {
    let got = run(case.args);
    if got.code != case.code {
        return Err(format!(
            "{}: exit {} (expected {})",
            case.name, got.code, case.code
        ));
    }
    let path = golden_dir().join(format!("{}.out", case.name));
    if std::env::var_os("CFINEQ_BLESS").is_some() {
        std::fs::write(&path, &got.stdout).map_err(|e| e.to_string())?;
    }
    let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if want != got.stdout {
        return Err(format!(
            "{}: output differs from {}\n--- got\n{}",
            case.name,
            path.display(),
            got.stdout
        ));
    }
    Ok(())
}
