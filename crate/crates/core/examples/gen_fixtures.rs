//! Regenerates the frozen oracle fixtures.
//!
//! ```text
//! cargo run -p cfineq-core --release --example gen_fixtures > crates/core/tests/fixtures/oracle.json
//! ```

use cfineq::refcheck::{fixture, HpContext, OracleInput, DEFAULT_PRECISION_BITS};
use cfineq::verify::{random_oracle_inputs, trial_rng, Suite};

const SEED: u64 = 20_240_601;
const RANDOM_ROUNDS: u64 = 8;

fn worked_examples() -> Vec<OracleInput> {
    vec![
        OracleInput::CfTwo {
            a: 4.0,
            b: 1.0,
            lambda: 0.5,
        },
        OracleInput::CfTwo {
            a: 0.99,
            b: 0.0001,
            lambda: 0.5,
        },
        OracleInput::CfN {
            points: vec![1.0, 2.0, 4.0],
            weights: vec![0.25, 0.5, 0.25],
        },
        OracleInput::Bernoulli {
            x: 3.0,
            lambda: 0.5,
        },
        OracleInput::Bernoulli {
            x: -0.5,
            lambda: 0.3,
        },
        OracleInput::PowerMean {
            values: vec![1.0, 2.0],
            weights: vec![1.0, 1.0],
            r: 1.0,
            s: 2.0,
        },
        OracleInput::Holder {
            avec: vec![1.0, 2.0],
            bvec: vec![3.0, 1.0],
            p: 2.0,
            q: 2.0,
        },
        OracleInput::Holder {
            avec: vec![1.0, 2.0, 3.0],
            bvec: vec![2.0, 1.0, 1.0],
            p: 3.0,
            q: 1.5,
        },
        OracleInput::Cauchy {
            avec: vec![1.0, 2.0],
            bvec: vec![3.0, 1.0],
        },
        OracleInput::Bergstrom {
            xvec: vec![1.0, 2.0],
            avec: vec![1.0, 1.0],
        },
        OracleInput::DivisorMean {
            n: 6,
            k: 1.0,
            unitary: false,
        },
        OracleInput::DivisorMean {
            n: 360,
            k: 0.5,
            unitary: true,
        },
    ]
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut ctx = HpContext::new(DEFAULT_PRECISION_BITS)?;
    let mut inputs = worked_examples();
    for round in 0..RANDOM_ROUNDS {
        inputs.extend(random_oracle_inputs(&mut trial_rng(
            SEED,
            Suite::Oracle,
            round,
        )));
    }
    let fixtures = inputs
        .into_iter()
        .map(|input| fixture(&mut ctx, input))
        .collect::<cfineq::Result<Vec<_>>>()?;
    println!("{}", serde_json::to_string_pretty(&fixtures)?);
    Ok(())
}
