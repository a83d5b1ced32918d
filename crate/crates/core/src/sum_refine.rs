//! Refined weighted power-mean, Hölder, Cauchy and Bergström inequalities.
//!
//! Each bound has the shape `A/M ≤ gap ≤ A/m` (Cauchy and Bergström use a
//! quadratic in `A/M`, `A/m`), where `m`, `M` are extreme values of a family
//! of normalized fractions. The fractions are computed once and shared by
//! `A`, `m` and `M`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, CfError, Result};
use crate::scalar_cf::{log_ratio, young_kernel};
use crate::tolerance::{cross_dd, ksum, KahanSum, ScalarSandwich, Tolerance};

/// The coefficient `A` and the extreme fractions `m ≤ M` behind a sandwich.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundContext {
    #[serde(rename = "A")]
    pub coef: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
}

impl BoundContext {
    fn trivial() -> Self {
        Self {
            coef: 0.0,
            m: 1.0,
            big_m: 1.0,
        }
    }
}

fn check_positive(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return domain(format!("{name} must be non-empty"));
    }
    match v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        Some(x) => domain(format!(
            "{name} entries must be positive and finite, got {x}"
        )),
        None => Ok(()),
    }
}

fn check_same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return domain(format!(
            "paired sequences differ in length: {} vs {}",
            a.len(),
            b.len()
        ));
    }
    Ok(())
}

fn min_max(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        })
}

/// Normalized fractions `f = x/∑x`, `g = y/∑y` and their differences,
/// evaluated without cancellation against the rounded fractions.
struct FractionPair {
    f: Vec<f64>,
    g: Vec<f64>,
    diff: Vec<f64>,
    sum_x: f64,
    sum_y: f64,
}

impl FractionPair {
    fn new(x: &[f64], y: &[f64]) -> Self {
        let sx = x.iter().copied().collect::<KahanSum>().parts();
        let sy = y.iter().copied().collect::<KahanSum>().parts();
        let diff = x
            .iter()
            .zip(y)
            .map(|(&xi, &yi)| cross_dd(xi, yi, sx, sy) / sx.0 / sy.0)
            .collect();
        Self {
            f: x.iter().map(|v| v / sx.0).collect(),
            g: y.iter().map(|v| v / sy.0).collect(),
            diff,
            sum_x: sx.0,
            sum_y: sy.0,
        }
    }

    fn identical(&self) -> bool {
        self.f == self.g || self.diff.iter().all(|d| *d == 0.0)
    }

    fn sum_sq_diff(&self) -> f64 {
        ksum(self.diff.iter().map(|d| d * d))
    }

    fn extremes(&self) -> (f64, f64) {
        min_max(self.f.iter().chain(&self.g).copied())
    }

    /// `∑(λf_i + (1−λ)g_i − f_i^λ g_i^{1−λ})`, each term expanded around the
    /// larger of `f_i`, `g_i`.
    fn young_sum(&self, lambda: f64) -> f64 {
        ksum(
            self.f
                .iter()
                .zip(&self.g)
                .zip(&self.diff)
                .map(|((&f, &g), &d)| {
                    if f == 0.0 || g == 0.0 {
                        lambda * f + (1.0 - lambda) * g
                    } else if g >= f {
                        g * young_kernel(ratio_log(d, f, g), lambda)
                    } else {
                        f * young_kernel(ratio_log(-d, g, f), 1.0 - lambda)
                    }
                }),
        )
    }
}

/// The plain difference `total − part` when it keeps at least four leading
/// bits, otherwise the cancellation-free `stable()` form.
fn gap_or_stable(total: f64, part: f64, stable: impl FnOnce() -> f64) -> f64 {
    let direct = total - part;
    if direct >= total.abs() / 16.0 {
        direct
    } else {
        stable()
    }
}

/// `ln(x/y)` given `d = x − y` computed separately.
fn ratio_log(d: f64, x: f64, y: f64) -> f64 {
    if d.abs() <= 0.5 * y {
        (d / y).ln_1p()
    } else {
        log_ratio(x, y)
    }
}

/// Weighted power mean `(∑p_i a_i^r / ∑p_i)^{1/r}` for `r > 0`.
pub fn power_mean(values: &[f64], weights: &[f64], r: f64) -> Result<f64> {
    check_positive("values", values)?;
    check_positive("weights", weights)?;
    check_same_len(values, weights)?;
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("exponent r must be positive, got {r}"));
    }
    Ok(weighted_moment(values, weights, r).powf(1.0 / r))
}

/// `∑p_i a_i^r / ∑p_i`.
fn weighted_moment(values: &[f64], weights: &[f64], r: f64) -> f64 {
    let num = ksum(values.iter().zip(weights).map(|(a, p)| p * a.powf(r)));
    num / ksum(weights.iter().copied())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMeanSpec {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub r: f64,
    pub s: f64,
}

impl PowerMeanSpec {
    pub fn new(values: Vec<f64>, weights: Vec<f64>, r: f64, s: f64) -> Result<Self> {
        let spec = Self {
            values,
            weights,
            r,
            s,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("values", &self.values)?;
        check_positive("weights", &self.weights)?;
        check_same_len(&self.values, &self.weights)?;
        if !(self.r > 0.0 && self.r <= self.s && self.s.is_finite()) {
            return domain(format!("need 0 < r <= s, got r={}, s={}", self.r, self.s));
        }
        Ok(())
    }
}

/// `A/M ≤ M_s^r − M_r^r ≤ A/m` with
/// `A = r(s−r)/(2s²)·M_s^r·∑p_i(t_i − 1)²/∑p_i`, `t_i = a_i^s / M_s^s`,
/// and `m`, `M` the extremes of `{t_i} ∪ {1}`.
pub fn power_mean_sandwich(
    spec: &PowerMeanSpec,
    tol: &Tolerance,
) -> Result<(ScalarSandwich, BoundContext)> {
    spec.validate()?;
    let PowerMeanSpec {
        values,
        weights,
        r,
        s,
    } = spec;
    let (r, s) = (*r, *s);
    let (lo, hi) = min_max(values.iter().copied());
    if r == s || lo == hi {
        return Ok((ScalarSandwich::zero(), BoundContext::trivial()));
    }
    let ms_pow_s = weighted_moment(values, weights, s);
    let ms_pow_r = ms_pow_s.powf(r / s);
    // f_i = p_i a_i^s / ∑p a^s and g_i = p_i / ∑p, so f_i / g_i = t_i
    let scaled: Vec<f64> = values
        .iter()
        .zip(weights)
        .map(|(a, p)| p * a.powf(s))
        .collect();
    let pair = FractionPair::new(&scaled, weights);
    let mr_pow_r = weighted_moment(values, weights, r);
    let middle = gap_or_stable(ms_pow_r, mr_pow_r, || ms_pow_r * pair.young_sum(r / s));

    let fractions: Vec<f64> = values.iter().map(|a| a.powf(s) / ms_pow_s).collect();
    let dispersion = ksum(pair.diff.iter().zip(&pair.g).map(|(d, g)| d * d / g));
    let coef = r * (s - r) / (2.0 * s * s) * ms_pow_r * dispersion;
    let (m, big_m) = min_max(fractions.iter().copied().chain([1.0]));
    Ok((
        ScalarSandwich::new(coef / big_m, middle, coef / m, tol),
        BoundContext { coef, m, big_m },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderSpec {
    pub avec: Vec<f64>,
    pub bvec: Vec<f64>,
    pub p: f64,
    pub q: f64,
}

impl HolderSpec {
    pub fn new(avec: Vec<f64>, bvec: Vec<f64>, p: f64, q: f64) -> Result<Self> {
        let spec = Self { avec, bvec, p, q };
        spec.validate()?;
        Ok(spec)
    }

    /// Uses the conjugate exponent `q = p/(p−1)`.
    pub fn conjugate(avec: Vec<f64>, bvec: Vec<f64>, p: f64) -> Result<Self> {
        Self::new(avec, bvec, p, p / (p - 1.0))
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("avec", &self.avec)?;
        check_positive("bvec", &self.bvec)?;
        check_same_len(&self.avec, &self.bvec)?;
        if !(self.p > 1.0 && self.q > 1.0 && self.p.is_finite() && self.q.is_finite()) {
            return domain(format!("need p, q > 1, got p={}, q={}", self.p, self.q));
        }
        let defect = 1.0 / self.p + 1.0 / self.q - 1.0;
        if defect.abs() > Tolerance::default().tol(1.0) {
            return domain(format!("1/p + 1/q must equal 1, off by {defect:e}"));
        }
        Ok(())
    }
}

/// `A/M ≤ ‖a‖_p‖b‖_q − ∑a_ib_i ≤ A/m` with
/// `A = ‖a‖_p‖b‖_q/(2pq)·∑(f_i − g_i)²`, `f_i = a_i^p/∑a^p`, `g_i = b_i^q/∑b^q`.
pub fn holder_sandwich(
    spec: &HolderSpec,
    tol: &Tolerance,
) -> Result<(ScalarSandwich, BoundContext)> {
    spec.validate()?;
    let x: Vec<f64> = spec.avec.iter().map(|a| a.powf(spec.p)).collect();
    let y: Vec<f64> = spec.bvec.iter().map(|b| b.powf(spec.q)).collect();
    let pair = FractionPair::new(&x, &y);
    if pair.identical() {
        return Ok((ScalarSandwich::zero(), BoundContext::trivial()));
    }
    let product = if spec.p == spec.q {
        (pair.sum_x * pair.sum_y).powf(1.0 / spec.p)
    } else {
        pair.sum_x.powf(1.0 / spec.p) * pair.sum_y.powf(1.0 / spec.q)
    };
    let inner = ksum(spec.avec.iter().zip(&spec.bvec).map(|(a, b)| a * b));
    // ‖a‖‖b‖ − ∑ab = ‖a‖‖b‖·∑(f/p + g/q − f^{1/p} g^{1/q})
    let middle = gap_or_stable(product, inner, || product * pair.young_sum(1.0 / spec.p));
    let coef = product / (2.0 * spec.p * spec.q) * pair.sum_sq_diff();
    let (m, big_m) = pair.extremes();
    Ok((
        ScalarSandwich::new(coef / big_m, middle, coef / m, tol),
        BoundContext { coef, m, big_m },
    ))
}

/// Quadratic-lifted bound `y² + 2y·s` used by the Cauchy and Bergström forms.
fn lift(y: f64, s: f64) -> f64 {
    y * y + 2.0 * y * s
}

/// `A²/M² + (2A/M)∑ab ≤ (∑a²)(∑b²) − (∑ab)² ≤ A²/m² + (2A/m)∑ab`.
pub fn cauchy_sandwich(
    avec: &[f64],
    bvec: &[f64],
    tol: &Tolerance,
) -> Result<(ScalarSandwich, BoundContext)> {
    check_positive("avec", avec)?;
    check_positive("bvec", bvec)?;
    check_same_len(avec, bvec)?;
    let x: Vec<f64> = avec.iter().map(|a| a * a).collect();
    let y: Vec<f64> = bvec.iter().map(|b| b * b).collect();
    let pair = FractionPair::new(&x, &y);
    if pair.identical() {
        return Ok((ScalarSandwich::zero(), BoundContext::trivial()));
    }
    let product = (pair.sum_x * pair.sum_y).sqrt();
    let inner = ksum(avec.iter().zip(bvec).map(|(a, b)| a * b));
    let coef = product / 8.0 * pair.sum_sq_diff();
    let (m, big_m) = pair.extremes();
    let middle = if avec.len() <= LAGRANGE_MAX_LEN {
        lagrange_gap(avec, bvec)
    } else {
        // (∑a²)(∑b²) − (∑ab)² = (‖a‖‖b‖ − ∑ab)(‖a‖‖b‖ + ∑ab)
        product * pair.young_sum(0.5) * (product + inner)
    };
    Ok((
        ScalarSandwich::new(
            lift(coef / big_m, inner),
            middle,
            lift(coef / m, inner),
            tol,
        ),
        BoundContext { coef, m, big_m },
    ))
}

/// Above this length the Cauchy gap uses the O(n) factored form.
const LAGRANGE_MAX_LEN: usize = 512;

/// `∑_{i<j}(a_ib_j − a_jb_i)²`, each determinant by Kahan's fma scheme.
fn lagrange_gap(a: &[f64], b: &[f64]) -> f64 {
    let mut total = KahanSum::default();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let det = cross_dd(a[i], b[i], (a[j], 0.0), (b[j], 0.0));
            total.add(det * det);
        }
    }
    total.value()
}

/// Bergström gap `∑x_i²/a_i − (∑|x_i|)²/∑a_i`, bracketed by
/// `(∑a)^{-1}(A²/M² + (2A/M)∑|x|)` and the same with `m`.
///
/// Zero entries of `x` make `m = 0` and the upper bound `+inf`.
pub fn bergstrom_sandwich(
    xvec: &[f64],
    avec: &[f64],
    tol: &Tolerance,
) -> Result<(ScalarSandwich, BoundContext)> {
    check_positive("avec", avec)?;
    check_same_len(xvec, avec)?;
    if let Some(x) = xvec.iter().find(|x| !x.is_finite()) {
        return domain(format!("x entries must be finite, got {x}"));
    }
    if xvec.iter().all(|x| *x == 0.0) {
        return Err(CfError::Degenerate(
            "all x_i are zero; fractions undefined".into(),
        ));
    }
    let ratios: Vec<f64> = xvec.iter().zip(avec).map(|(x, a)| x * x / a).collect();
    let s_abs = ksum(xvec.iter().map(|x| x.abs()));
    let pair = FractionPair::new(&ratios, avec);
    if pair.identical() {
        return Ok((ScalarSandwich::zero(), BoundContext::trivial()));
    }
    let (s_ratio, s_a) = (pair.sum_x, pair.sum_y);
    let coef = (s_ratio * s_a).sqrt() / 8.0 * pair.sum_sq_diff();
    let (m, big_m) = pair.extremes();
    // ∑|x| = √(∑x²/a·∑a)·G with G = ∑√(u_i v_i); gap = ∑x²/a·(1 − G)(1 + G)
    let middle = gap_or_stable(s_ratio, s_abs * s_abs / s_a, || {
        let one_minus_g = pair.young_sum(0.5);
        s_ratio * one_minus_g * (2.0 - one_minus_g)
    });
    let upper = if m > 0.0 {
        lift(coef / m, s_abs) / s_a
    } else {
        f64::INFINITY
    };
    Ok((
        ScalarSandwich::new(lift(coef / big_m, s_abs) / s_a, middle, upper, tol),
        BoundContext { coef, m, big_m },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn close(x: f64, y: f64, rel: f64) -> bool {
        (x - y).abs() <= rel * y.abs().max(1e-300)
    }

    #[test]
    fn power_mean_examples() {
        assert!(close(
            power_mean(&[3.0; 4], &[1.0, 2.0, 3.0, 4.0], 2.7).unwrap(),
            3.0,
            1e-15
        ));
        let am = power_mean(&[1.0, 2.0, 6.0], &[1.0, 1.0, 2.0], 1.0).unwrap();
        assert!(close(am, 15.0 / 4.0, 1e-15));
        let v = power_mean(&[1.0, 2.0], &[1.0, 1.0], 2.0).unwrap();
        assert!(close(v, 1.581_138_830_084_189_7, 1e-15));
        assert!(power_mean(&[1.0], &[1.0], 0.0).is_err());
        assert!(power_mean(&[1.0, -2.0], &[1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn power_mean_sandwich_examples() {
        let spec = PowerMeanSpec::new(vec![1.0, 2.0], vec![1.0, 1.0], 1.0, 2.0).unwrap();
        let (s, ctx) = power_mean_sandwich(&spec, &tol()).unwrap();
        assert!(close(ctx.coef, 0.071_151_247_353_788_53, 1e-13));
        assert!(close(ctx.m, 0.4, 1e-15) && close(ctx.big_m, 1.6, 1e-15));
        assert!(close(s.lower, 0.044_469_529_596_117_83, 1e-13));
        assert!(close(s.middle, 0.081_138_830_084_189_67, 1e-13));
        assert!(close(s.upper, 0.177_878_118_384_471_34, 1e-13));
        assert!(s.passed());

        let eq = PowerMeanSpec::new(vec![1.0, 5.0], vec![1.0, 3.0], 1.5, 1.5).unwrap();
        assert_eq!(
            power_mean_sandwich(&eq, &tol()).unwrap().0,
            ScalarSandwich::zero()
        );
        let flat = PowerMeanSpec::new(vec![2.0; 3], vec![1.0, 3.0, 1.0], 1.0, 3.0).unwrap();
        assert_eq!(
            power_mean_sandwich(&flat, &tol()).unwrap().0,
            ScalarSandwich::zero()
        );
        assert!(PowerMeanSpec::new(vec![1.0], vec![1.0], 2.0, 1.0).is_err());
        assert!(PowerMeanSpec::new(vec![1.0], vec![1.0], -1.0, 1.0).is_err());
    }

    #[test]
    fn holder_examples() {
        let one = HolderSpec::conjugate(vec![3.0], vec![7.0], 3.0).unwrap();
        assert_eq!(
            holder_sandwich(&one, &tol()).unwrap().0,
            ScalarSandwich::zero()
        );
        let same = HolderSpec::new(vec![1.0, 2.0], vec![1.0, 2.0], 2.0, 2.0).unwrap();
        assert_eq!(
            holder_sandwich(&same, &tol()).unwrap().0,
            ScalarSandwich::zero()
        );

        let spec = HolderSpec::new(vec![1.0, 2.0], vec![2.0, 1.0], 2.0, 2.0).unwrap();
        let (s, ctx) = holder_sandwich(&spec, &tol()).unwrap();
        assert!(close(s.middle, 1.0, 1e-15));
        assert!(close(ctx.coef, 0.45, 1e-15));
        assert!(close(ctx.m, 0.2, 1e-15) && close(ctx.big_m, 0.8, 1e-15));
        assert!(close(s.lower, 0.5625, 1e-15) && close(s.upper, 2.25, 1e-15));

        assert!(HolderSpec::new(vec![1.0], vec![1.0], 2.0, 3.0).is_err());
        assert!(HolderSpec::new(vec![1.0], vec![1.0, 2.0], 2.0, 2.0).is_err());
        assert!(HolderSpec::conjugate(vec![1.0], vec![1.0], 1.0).is_err());
    }

    #[test]
    fn cauchy_examples() {
        let (s, ctx) = cauchy_sandwich(&[1.0, 2.0], &[2.0, 1.0], &tol()).unwrap();
        assert_eq!(s.middle, 9.0);
        assert!(close(ctx.coef, 0.45, 1e-15));
        assert!(close(s.lower, 4.816_406_25, 1e-15));
        assert!(close(s.upper, 23.0625, 1e-15));
        let (s, _) = cauchy_sandwich(&[1.0, 3.0, 0.5], &[2.0, 6.0, 1.0], &tol()).unwrap();
        assert_eq!(s, ScalarSandwich::zero());
        let (s, _) = cauchy_sandwich(&[4.0], &[9.0], &tol()).unwrap();
        assert_eq!(s, ScalarSandwich::zero());
    }

    #[test]
    fn bergstrom_examples() {
        let (s, ctx) = bergstrom_sandwich(&[1.0, 2.0], &[1.0, 1.0], &tol()).unwrap();
        assert!(close(s.middle, 0.5, 1e-15));
        assert!(close(ctx.coef, 0.071_151_247_353_788_53, 1e-13));
        assert!(close(s.lower, 0.270_772_255_701_707, 1e-13));
        assert!(close(s.upper, 1.130_549_960_306_828, 1e-13));
        let (neg, _) = bergstrom_sandwich(&[-1.0, 2.0], &[1.0, 1.0], &tol()).unwrap();
        assert_eq!(neg, s);
        let (z, _) = bergstrom_sandwich(&[2.0, 4.0, 1.0], &[1.0, 2.0, 0.5], &tol()).unwrap();
        assert_eq!(z, ScalarSandwich::zero());
        assert!(matches!(
            bergstrom_sandwich(&[0.0, 0.0], &[1.0, 2.0], &tol()),
            Err(CfError::Degenerate(_))
        ));
        assert!(bergstrom_sandwich(&[1.0], &[0.0], &tol()).is_err());
        let (s, _) = bergstrom_sandwich(&[0.0, 1.0], &[1.0, 1.0], &tol()).unwrap();
        assert!(s.upper.is_infinite() && s.passed());
    }

    #[test]
    fn cauchy_matches_holder_at_two() {
        let a = [0.3, 1.7, 2.2, 5.0];
        let b = [1.1, 0.4, 3.3, 0.9];
        let (h, hctx) = holder_sandwich(
            &HolderSpec::new(a.to_vec(), b.to_vec(), 2.0, 2.0).unwrap(),
            &tol(),
        )
        .unwrap();
        let (c, cctx) = cauchy_sandwich(&a, &b, &tol()).unwrap();
        let inner: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert_eq!(hctx, cctx);
        assert!(close(c.middle, lift(h.middle, inner), 1e-12));
        assert!(close(c.lower, lift(h.lower, inner), 1e-14));
        assert!(close(c.upper, lift(h.upper, inner), 1e-14));
    }

    #[test]
    fn bergstrom_reduces_to_cauchy() {
        let x = [0.5, 2.0, 1.25, 3.0];
        let a = [1.5, 0.2, 2.0, 4.0];
        let (berg, _) = bergstrom_sandwich(&x, &a, &tol()).unwrap();
        let av: Vec<f64> = x.iter().zip(&a).map(|(x, a)| x / a.sqrt()).collect();
        let bv: Vec<f64> = a.iter().map(|a| a.sqrt()).collect();
        let (cau, _) = cauchy_sandwich(&av, &bv, &tol()).unwrap();
        let sa: f64 = a.iter().sum();
        assert!(close(berg.middle, cau.middle / sa, 1e-12));
        assert!(close(berg.lower, cau.lower / sa, 1e-12));
        assert!(close(berg.upper, cau.upper / sa, 1e-12));
    }
}
