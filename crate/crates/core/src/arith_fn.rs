//! Divisor functions `σ_k`, `τ`, their unitary analogues, and the divisor-mean
//! sandwich obtained by applying the n-point AM-GM refinement to `{d^k : d | n}`.
//!
//! For integer `k` everything is evaluated in exact big-integer / rational
//! arithmetic, including the pass flags of the sandwich.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::tolerance::{ksum, ScalarSandwich, Tolerance};

/// Largest accepted input, `2^63 − 1`.
pub const MAX_N: u64 = i64::MAX as u64;

/// Largest integer exponent routed through exact arithmetic.
const MAX_EXACT_K: f64 = 64.0;

/// Prime factorization by trial division on a mod-30 wheel.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>> {
    check_n(n)?;
    let mut out = Vec::new();
    let mut rest = n;
    for p in [2u64, 3, 5] {
        strip(&mut rest, p, &mut out);
    }
    const GAPS: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];
    let mut p = 7u64;
    let mut i = 0;
    while p.saturating_mul(p) <= rest {
        strip(&mut rest, p, &mut out);
        p += GAPS[i];
        i = (i + 1) % GAPS.len();
    }
    if rest > 1 {
        out.push((rest, 1));
    }
    Ok(out)
}

fn strip(rest: &mut u64, p: u64, out: &mut Vec<(u64, u32)>) {
    let mut e = 0;
    while (*rest).is_multiple_of(p) {
        *rest /= p;
        e += 1;
    }
    if e > 0 {
        out.push((p, e));
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 || n > MAX_N {
        return domain(format!("n must lie in [1, 2^63-1], got {n}"));
    }
    Ok(())
}

fn divisors_from(factorization: &[(u64, u32)], unitary: bool) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, e) in factorization {
        let len = out.len();
        if unitary {
            let pe = p.pow(e);
            for i in 0..len {
                out.push(out[i] * pe);
            }
        } else {
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// All divisors of `n` (or only the unitary ones, `gcd(d, n/d) = 1`), ascending.
pub fn divisors(n: u64, unitary: bool) -> Result<Vec<u64>> {
    Ok(divisors_from(&factorize(n)?, unitary))
}

/// `n` with its factorization and both divisor families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorProfile {
    pub n: u64,
    pub factorization: Vec<(u64, u32)>,
    pub divisors: Vec<u64>,
    pub unitary_divisors: Vec<u64>,
}

impl DivisorProfile {
    pub fn new(n: u64) -> Result<Self> {
        let factorization = factorize(n)?;
        Ok(Self {
            n,
            divisors: divisors_from(&factorization, false),
            unitary_divisors: divisors_from(&factorization, true),
            factorization,
        })
    }

    pub fn family(&self, unitary: bool) -> &[u64] {
        if unitary {
            &self.unitary_divisors
        } else {
            &self.divisors
        }
    }

    /// `τ(n)` or `τ*(n)`.
    pub fn count(&self, unitary: bool) -> usize {
        self.family(unitary).len()
    }

    /// Exact `∑ d^k` over the chosen family.
    pub fn power_sum(&self, k: u32, unitary: bool) -> BigUint {
        self.family(unitary)
            .iter()
            .map(|&d| BigUint::from(d).pow(k))
            .sum()
    }

    /// `∏ d` over the chosen family.
    pub fn product(&self, unitary: bool) -> BigUint {
        self.family(unitary)
            .iter()
            .map(|&d| BigUint::from(d))
            .product()
    }
}

/// `σ_k` from the multiplicative closed forms
/// `∏(p^{k(e+1)} − 1)/(p^k − 1)` and `∏(1 + p^{ke})` (unitary).
pub fn power_sum_closed_form(factorization: &[(u64, u32)], k: u32, unitary: bool) -> BigUint {
    factorization
        .iter()
        .map(|&(p, e)| {
            let p = BigUint::from(p);
            match (unitary, k) {
                (true, _) => BigUint::one() + p.pow(k * e),
                (false, 0) => BigUint::from(e + 1),
                (false, _) => (p.pow(k * (e + 1)) - 1u32) / (p.pow(k) - 1u32),
            }
        })
        .product()
}

fn exact_k(k: f64) -> Option<u32> {
    (k.fract() == 0.0 && (0.0..=MAX_EXACT_K).contains(&k)).then_some(k as u32)
}

fn check_k(k: f64) -> Result<()> {
    if !(k >= 0.0 && k.is_finite()) {
        return domain(format!("k must be a finite nonnegative real, got {k}"));
    }
    Ok(())
}

/// `σ_k(n)` / `σ*_k(n)`; `k = 0` gives `τ(n)` / `τ*(n)`.
///
/// Integer `k` is summed exactly and rounded once.
pub fn divisor_function(n: u64, k: f64, unitary: bool) -> Result<f64> {
    check_k(k)?;
    let profile = DivisorProfile::new(n)?;
    Ok(match exact_k(k) {
        Some(k) => profile
            .power_sum(k, unitary)
            .to_f64()
            .unwrap_or(f64::INFINITY),
        None => ksum(profile.family(unitary).iter().map(|&d| (d as f64).powf(k))),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorVariant {
    /// Bracket `σ_{2k} − σ_k²/τ`, the value the n-point bound actually yields.
    ProofCorrected,
    /// Bracket `σ_{2k} − (σ_k/τ)²` as typeset in the original statement.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BigMChoice {
    /// Largest point is `n^k` (the largest of the `d^k`).
    NToK,
    /// Largest point taken as `n` regardless of `k`.
    NAsPrinted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorSandwichReport {
    pub n: u64,
    pub k: f64,
    pub unitary: bool,
    pub variant: DivisorVariant,
    pub big_m_choice: BigMChoice,
    /// Flags decided in exact rational arithmetic (integer `k`).
    pub exact: bool,
    #[serde(flatten)]
    pub sandwich: ScalarSandwich,
}

/// `lower ≤ σ_k/τ − n^{k/2} ≤ upper` with `lower = bracket/(2·M·τ)`,
/// `upper = bracket/(2τ)`, where bracket and `M` follow `variant` and `big_m`.
///
/// The divisor geometric mean is `n^{k/2}` because `∏d = n^{τ/2}`.
pub fn divisor_mean_sandwich(
    n: u64,
    k: f64,
    unitary: bool,
    variant: DivisorVariant,
    big_m: BigMChoice,
    tol: &Tolerance,
) -> Result<DivisorSandwichReport> {
    check_k(k)?;
    let profile = DivisorProfile::new(n)?;
    divisor_mean_sandwich_for(&profile, k, unitary, variant, big_m, tol)
}

/// Same as [`divisor_mean_sandwich`] on a precomputed profile.
pub fn divisor_mean_sandwich_for(
    profile: &DivisorProfile,
    k: f64,
    unitary: bool,
    variant: DivisorVariant,
    big_m: BigMChoice,
    tol: &Tolerance,
) -> Result<DivisorSandwichReport> {
    check_k(k)?;
    let n = profile.n;
    let mut report = DivisorSandwichReport {
        n,
        k,
        unitary,
        variant,
        big_m_choice: big_m,
        exact: false,
        sandwich: ScalarSandwich::zero(),
    };
    if n == 1 || k == 0.0 {
        report.exact = true;
        return Ok(report);
    }
    match exact_k(k) {
        Some(ke) => {
            report.exact = true;
            report.sandwich = exact_sandwich(profile, ke, unitary, variant, big_m, tol);
        }
        None => report.sandwich = float_sandwich(profile, k, unitary, variant, big_m, tol),
    }
    Ok(report)
}

fn exact_sandwich(
    profile: &DivisorProfile,
    k: u32,
    unitary: bool,
    variant: DivisorVariant,
    big_m: BigMChoice,
    tol: &Tolerance,
) -> ScalarSandwich {
    let int = |v: BigUint| BigInt::from(v);
    let rat = |v: BigInt| BigRational::from_integer(v);
    let s1 = rat(int(profile.power_sum(k, unitary)));
    let s2 = rat(int(profile.power_sum(2 * k, unitary)));
    let tau = rat(BigInt::from(profile.count(unitary)));
    let n = BigInt::from(profile.n);
    let n_pow_k = n.pow(k);

    let mean = &s1 / &tau;
    let bracket = match variant {
        DivisorVariant::ProofCorrected => &s2 - &s1 * &s1 / &tau,
        DivisorVariant::AsPrinted => &s2 - &mean * &mean,
    };
    let big_m_val = rat(match big_m {
        BigMChoice::NToK => n_pow_k.clone(),
        BigMChoice::NAsPrinted => n,
    });
    let two = rat(BigInt::from(2));
    let lower = &bracket / (&two * big_m_val * &tau);
    let upper = &bracket / (&two * &tau);

    // lower ≤ mean − √(n^k)  ⇔  L = mean − lower ≥ 0 and L² ≥ n^k
    let target = rat(n_pow_k);
    let l = &mean - &lower;
    let lower_ok = !l.is_negative() && &l * &l >= target;
    // mean − √(n^k) ≤ upper  ⇔  U = mean − upper ≤ 0 or U² ≤ n^k
    let u = &mean - &upper;
    let upper_ok = !u.is_positive() || &u * &u <= target;

    let to_f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
    let root = sqrt_rational_f64(&target);
    let middle = to_f(&mean) - root;
    ScalarSandwich::new(to_f(&lower), middle, to_f(&upper), tol).with_flags(lower_ok, upper_ok)
}

/// `√x` for a nonnegative integer-valued rational; exact when `x` is a square.
fn sqrt_rational_f64(x: &BigRational) -> f64 {
    let v = x.to_integer();
    let r = v.sqrt();
    if &r * &r == v {
        return r.to_f64().unwrap_or(f64::INFINITY);
    }
    v.to_f64().map(f64::sqrt).unwrap_or(f64::INFINITY)
}

fn float_sandwich(
    profile: &DivisorProfile,
    k: f64,
    unitary: bool,
    variant: DivisorVariant,
    big_m: BigMChoice,
    tol: &Tolerance,
) -> ScalarSandwich {
    let family = profile.family(unitary);
    let tau = family.len() as f64;
    let n = profile.n as f64;
    let s1 = ksum(family.iter().map(|&d| (d as f64).powf(k)));
    let s2 = ksum(family.iter().map(|&d| (d as f64).powf(2.0 * k)));
    let mean = s1 / tau;
    let bracket = match variant {
        DivisorVariant::ProofCorrected => s2 - s1 * s1 / tau,
        DivisorVariant::AsPrinted => s2 - mean * mean,
    };
    let big_m_val = match big_m {
        BigMChoice::NToK => n.powf(k),
        BigMChoice::NAsPrinted => n,
    };
    let middle = mean - n.powf(k / 2.0);
    ScalarSandwich::new(
        bracket / (2.0 * big_m_val * tau),
        middle,
        bracket / (2.0 * tau),
        tol,
    )
}

/// `∑(d^k − σ_k/τ)²` computed directly, exact for integer `k`.
pub fn centered_square_sum(profile: &DivisorProfile, k: u32, unitary: bool) -> BigRational {
    let family = profile.family(unitary);
    let tau = BigInt::from(family.len());
    let s1 = BigInt::from(profile.power_sum(k, unitary));
    let mean = BigRational::new(s1, tau);
    family
        .iter()
        .map(|&d| {
            let x = BigRational::from_integer(BigInt::from(d).pow(k)) - &mean;
            &x * &x
        })
        .fold(BigRational::zero(), |acc, x| acc + x)
}

/// `(∏d)² = n^{τ}` for the chosen family.
pub fn divisor_product_identity(profile: &DivisorProfile, unitary: bool) -> bool {
    let prod = profile.product(unitary);
    let tau = profile.count(unitary) as u32;
    &prod * &prod == BigUint::from(profile.n).pow(tau)
}

/// Number of distinct prime factors `ω(n)`.
pub fn omega(profile: &DivisorProfile) -> usize {
    profile.factorization.len()
}

/// Outcome of [`scan_divisor_sandwich`] over a range of `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub from: u64,
    pub to: u64,
    pub k: f64,
    pub unitary: bool,
    pub variant: DivisorVariant,
    pub big_m_choice: BigMChoice,
    pub checked: u64,
    pub failures: u64,
    /// Smallest `min(slack_lower, slack_upper)` seen.
    pub worst_slack: f64,
    /// Up to `keep` failing reports, in increasing `n`.
    pub first_failures: Vec<DivisorSandwichReport>,
}

/// Evaluates the divisor-mean sandwich for every `n` in `from..=to`.
#[allow(clippy::too_many_arguments)]
pub fn scan_divisor_sandwich(
    from: u64,
    to: u64,
    k: f64,
    unitary: bool,
    variant: DivisorVariant,
    big_m: BigMChoice,
    keep: usize,
    tol: &Tolerance,
) -> Result<ScanReport> {
    check_k(k)?;
    if from == 0 || from > to {
        return domain(format!(
            "scan range needs 1 <= from <= to, got {from}..={to}"
        ));
    }
    let mut report = ScanReport {
        from,
        to,
        k,
        unitary,
        variant,
        big_m_choice: big_m,
        checked: 0,
        failures: 0,
        worst_slack: 0.0,
        first_failures: Vec::new(),
    };
    for n in from..=to {
        let r = divisor_mean_sandwich(n, k, unitary, variant, big_m, tol)?;
        report.checked += 1;
        report.worst_slack = report
            .worst_slack
            .min(r.sandwich.slack_lower.min(r.sandwich.slack_upper));
        if !r.sandwich.passed() {
            report.failures += 1;
            if report.first_failures.len() < keep {
                report.first_failures.push(r);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn gcd(a: u64, b: u64) -> u64 {
        a.gcd(&b)
    }

    #[test]
    fn factorization_examples() {
        assert!(factorize(0).is_err());
        assert_eq!(factorize(1).unwrap(), vec![]);
        assert_eq!(factorize(12).unwrap(), vec![(2, 2), (3, 1)]);
        assert_eq!(factorize(97).unwrap(), vec![(97, 1)]);
        assert_eq!(
            factorize(49 * 121 * 13).unwrap(),
            vec![(7, 2), (11, 2), (13, 1)]
        );
        assert_eq!(factorize(1 << 62).unwrap(), vec![(2, 62)]);
        assert!(factorize(u64::MAX).is_err());
    }

    #[test]
    fn factorization_of_large_semiprime() {
        let (p, q) = (1_000_003u64, 999_983u64);
        assert_eq!(factorize(p * q).unwrap(), vec![(q, 1), (p, 1)]);
    }

    #[test]
    fn divisor_examples() {
        assert_eq!(divisors(6, false).unwrap(), vec![1, 2, 3, 6]);
        assert_eq!(divisors(12, true).unwrap(), vec![1, 3, 4, 12]);
        assert_eq!(divisors(1, false).unwrap(), vec![1]);
        assert_eq!(divisors(1, true).unwrap(), vec![1]);
    }

    #[test]
    fn unitary_divisors_satisfy_gcd_condition() {
        for n in 1..500u64 {
            let u = divisors(n, true).unwrap();
            let brute: Vec<u64> = (1..=n)
                .filter(|d| n % d == 0 && gcd(*d, n / d) == 1)
                .collect();
            assert_eq!(u, brute, "n={n}");
        }
    }

    #[test]
    fn divisor_function_examples() {
        assert_eq!(divisor_function(6, 1.0, false).unwrap(), 12.0);
        assert_eq!(divisor_function(6, 0.0, false).unwrap(), 4.0);
        assert_eq!(divisor_function(12, 1.0, true).unwrap(), 20.0);
        assert_eq!(divisor_function(12, 0.0, true).unwrap(), 4.0);
        assert_eq!(divisor_function(1, 2.5, false).unwrap(), 1.0);
        assert_eq!(divisor_function(1, 3.0, true).unwrap(), 1.0);
        assert!(divisor_function(6, -1.0, false).is_err());
        assert!(divisor_function(0, 1.0, false).is_err());
        let p = DivisorProfile::new(12).unwrap();
        assert_eq!(p.count(true), 1 << omega(&p));
    }

    #[test]
    fn sandwich_examples() {
        for k in [0.0, 0.5, 1.0, 3.0] {
            let r = divisor_mean_sandwich(
                1,
                k,
                false,
                DivisorVariant::ProofCorrected,
                BigMChoice::NToK,
                &tol(),
            )
            .unwrap();
            assert_eq!(r.sandwich, ScalarSandwich::zero());
        }
        let r = divisor_mean_sandwich(
            6,
            1.0,
            false,
            DivisorVariant::ProofCorrected,
            BigMChoice::NToK,
            &tol(),
        )
        .unwrap();
        assert!(r.exact && r.sandwich.passed());
        assert!((r.sandwich.lower - 14.0 / 48.0).abs() < 1e-16);
        assert!((r.sandwich.middle - 0.550_510_257_216_821_9).abs() < 1e-15);
        assert_eq!(r.sandwich.upper, 1.75);

        let r = divisor_mean_sandwich(
            6,
            1.0,
            false,
            DivisorVariant::AsPrinted,
            BigMChoice::NAsPrinted,
            &tol(),
        )
        .unwrap();
        assert!(!r.sandwich.lower_ok);
        assert!(r.sandwich.upper_ok);
        assert!((r.sandwich.lower - 41.0 / 48.0).abs() < 1e-16);
    }

    #[test]
    fn float_path_agrees_with_exact_near_integer_k() {
        let p = DivisorProfile::new(360).unwrap();
        let exact = divisor_mean_sandwich_for(
            &p,
            2.0,
            false,
            DivisorVariant::ProofCorrected,
            BigMChoice::NToK,
            &tol(),
        )
        .unwrap();
        let float = float_sandwich(
            &p,
            2.0,
            false,
            DivisorVariant::ProofCorrected,
            BigMChoice::NToK,
            &tol(),
        );
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
        assert!(rel(exact.sandwich.lower, float.lower) < 1e-12);
        assert!(rel(exact.sandwich.middle, float.middle) < 1e-12);
        assert!(rel(exact.sandwich.upper, float.upper) < 1e-12);
    }

    #[test]
    fn closed_form_and_identities_small_range() {
        for n in 1..2000u64 {
            let p = DivisorProfile::new(n).unwrap();
            for unitary in [false, true] {
                for k in 0..4 {
                    assert_eq!(
                        p.power_sum(k, unitary),
                        power_sum_closed_form(&p.factorization, k, unitary)
                    );
                }
                assert!(divisor_product_identity(&p, unitary));
                let bracket = centered_square_sum(&p, 2, unitary);
                let s2 = BigRational::from_integer(p.power_sum(4, unitary).into());
                let s1 = BigRational::from_integer(p.power_sum(2, unitary).into());
                let tau = BigRational::from_integer(BigInt::from(p.count(unitary)));
                assert_eq!(bracket, s2 - &s1 * &s1 / tau);
            }
        }
    }
}
