//! Two-point and n-point Cartwright-Field bounds on the weighted AM-GM gap,
//! the two classical reverse-Young bounds, and the Bernoulli refinement.
//!
//! All three sandwich components are degree-one homogeneous in the inputs, so
//! the tolerance in [`Tolerance`] is taken relative to `|middle| + |upper|`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, CfError, Result};
use crate::tolerance::{ksum, ScalarSandwich, Tolerance};

/// Two positive reals and an interpolation weight in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarPair {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
}

impl ScalarPair {
    pub fn new(a: f64, b: f64, lambda: f64) -> Result<Self> {
        let pair = Self { a, b, lambda };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) || !(self.b > 0.0 && self.b.is_finite()) {
            return domain(format!(
                "a and b must be positive and finite, got a={}, b={}",
                self.a, self.b
            ));
        }
        check_lambda(self.lambda)
    }

    pub fn min(&self) -> f64 {
        self.a.min(self.b)
    }

    pub fn max(&self) -> f64 {
        self.a.max(self.b)
    }

    /// `λ = 0`, `λ = 1` or `a = b`: every expression in the sandwich vanishes.
    fn is_degenerate(&self) -> bool {
        self.lambda == 0.0 || self.lambda == 1.0 || self.a == self.b
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        domain(format!("lambda must lie in [0, 1], got {lambda}"))
    }
}

/// Positive points with convex weights.
///
/// Weights must sum to one within `tol(n)`; they are renormalized on
/// construction so the stored weights sum to one to rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedSample {
    pub fn new(points: Vec<f64>, weights: Vec<f64>, tol: &Tolerance) -> Result<Self> {
        if points.is_empty() {
            return domain("sample must contain at least one point");
        }
        if points.len() != weights.len() {
            return domain(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            ));
        }
        if let Some(x) = points.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return domain(format!("points must be positive and finite, got {x}"));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return domain(format!("weights must be positive and finite, got {w}"));
        }
        let total = ksum(weights.iter().copied());
        if (total - 1.0).abs() > tol.tol(points.len() as f64) {
            return domain(format!("weights must sum to 1, got {total}"));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { points, weights })
    }

    /// Uniform weights `1/n`.
    pub fn uniform(points: Vec<f64>) -> Result<Self> {
        let n = points.len().max(1);
        let w = vec![1.0 / n as f64; points.len()];
        Self::new(points, w, &Tolerance::default())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn min(&self) -> f64 {
        self.points.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.points
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        ksum(self.points.iter().zip(&self.weights).map(|(x, w)| w * x))
    }
}

/// `λ e^u + 1 − λ − e^{λu}` evaluated without cancellation, where `t = e^u`.
///
/// This is `λt + 1 − λ − t^λ = λ·expm1(u) − expm1(λu)`. Both terms are
/// first order in `u` while the difference is second order, so small `|u|`
/// uses `λ·g(u) − g(λu)` with `g(v) = e^v − 1 − v`, which loses at most a
/// factor `1/(1−λ)`. `λ > ½` is reflected through
/// `K(u, λ) = e^u·K(−u, 1−λ)` to keep that factor below 2.
pub(crate) fn young_kernel(u: f64, lambda: f64) -> f64 {
    if u == 0.0 || lambda == 0.0 || lambda == 1.0 {
        return 0.0;
    }
    if lambda > 0.5 {
        return u.exp() * young_kernel(-u, 1.0 - lambda);
    }
    if u.abs() < 1.0 {
        lambda * exp_m1_excess(u) - exp_m1_excess(lambda * u)
    } else {
        lambda * u.exp_m1() - (lambda * u).exp_m1()
    }
}

/// `e^u − 1 − u` without cancellation near zero.
pub(crate) fn exp_m1_excess(u: f64) -> f64 {
    if u.abs() >= 0.5 {
        return u.exp_m1() - u;
    }
    // u²·∑ u^k/(k+2)!, truncated where 0.5^k/(k+2)! < 1e-20
    let mut acc = 0.0;
    for k in (0..16).rev() {
        acc = acc * u / f64::from(k + 3) + 1.0;
    }
    0.5 * u * u * acc
}

/// `ln(x/y)` for positive `x`, `y`; exact subtraction near 1 keeps the
/// relative accuracy of the result.
pub(crate) fn log_ratio(x: f64, y: f64) -> f64 {
    let t = x / y;
    if (0.5..=2.0).contains(&t) {
        ((x - y) / y).ln_1p()
    } else {
        t.ln()
    }
}

/// Weighted AM-GM gap `λa + (1−λ)b − a^λ b^{1−λ}`.
pub fn young_gap(pair: &ScalarPair) -> Result<f64> {
    pair.validate()?;
    if pair.is_degenerate() {
        return Ok(0.0);
    }
    // b·K(ln(a/b), λ) = a·K(ln(b/a), 1−λ); the kernel is best with λ ≤ ½
    if pair.lambda > 0.5 {
        Ok(pair.a * young_kernel(log_ratio(pair.b, pair.a), 1.0 - pair.lambda))
    } else {
        Ok(pair.b * young_kernel(log_ratio(pair.a, pair.b), pair.lambda))
    }
}

/// `λ(1−λ)(a−b)²/(2M) ≤ young_gap ≤ λ(1−λ)(a−b)²/(2m)`.
pub fn cf_sandwich_two(pair: &ScalarPair, tol: &Tolerance) -> Result<ScalarSandwich> {
    pair.validate()?;
    if pair.is_degenerate() {
        return Ok(ScalarSandwich::zero());
    }
    let lam = pair.lambda;
    let num = lam * (1.0 - lam) * (pair.a - pair.b).powi(2);
    let middle = young_gap(pair)?;
    Ok(ScalarSandwich::new(
        num / (2.0 * pair.max()),
        middle,
        num / (2.0 * pair.min()),
        tol,
    ))
}

/// n-point form: the gap `∑α_i x_i − ∏x_i^{α_i}` is bracketed by the weighted
/// variance divided by `2·max x` and `2·min x`.
pub fn cf_sandwich_n(sample: &WeightedSample, tol: &Tolerance) -> Result<ScalarSandwich> {
    let lo = sample.min();
    let hi = sample.max();
    if lo == hi {
        return Ok(ScalarSandwich::zero());
    }
    let mean = sample.mean();
    let w = sample.weights();
    let x = sample.points();
    let variance = ksum(w.iter().zip(x).map(|(a, xi)| a * (xi - mean).powi(2)));
    // AM − GM = c·(∑α g(u_i) − g(∑α u_i)) with u_i = ln(x_i/c), exact for any
    // c > 0. Centering c at the geometric mean leaves ∑α u_i ≈ 0 and a sum of
    // nonnegative terms, so nothing cancels.
    let anchor = w
        .iter()
        .zip(x)
        .max_by(|p, q| p.0.total_cmp(q.0))
        .map(|(_, xi)| *xi)
        .unwrap_or(mean);
    let centre = anchor * ksum(w.iter().zip(x).map(|(a, xi)| a * log_ratio(*xi, anchor))).exp();
    let u: Vec<f64> = x.iter().map(|xi| log_ratio(*xi, centre)).collect();
    let drift = ksum(w.iter().zip(&u).map(|(a, ui)| a * ui));
    let middle = centre
        * (ksum(w.iter().zip(&u).map(|(a, ui)| a * exp_m1_excess(*ui))) - exp_m1_excess(drift));
    Ok(ScalarSandwich::new(
        variance / (2.0 * hi),
        middle,
        variance / (2.0 * lo),
        tol,
    ))
}

/// Reverse Young bound `a^λ b^{1−λ}(exp(λ(1−λ)(a−b)²/m²) − 1)`.
///
/// Returns [`CfError::Overflow`] when the value is not representable; the
/// bound is then vacuous.
pub fn reverse_young_exp(pair: &ScalarPair) -> Result<f64> {
    pair.validate()?;
    if pair.is_degenerate() {
        return Ok(0.0);
    }
    let lam = pair.lambda;
    let exponent = lam * (1.0 - lam) * ((pair.a - pair.b) / pair.min()).powi(2);
    if exponent > f64::MAX.ln() {
        return Err(CfError::Overflow(format!(
            "exponent {exponent:e} exceeds ln(f64::MAX)"
        )));
    }
    let gm = (lam * pair.a.ln() + (1.0 - lam) * pair.b.ln()).exp();
    let value = gm * exponent.exp_m1();
    if !value.is_finite() {
        return Err(CfError::Overflow(format!("bound {value} is not finite")));
    }
    Ok(value)
}

/// Reverse Young bound `λ(1−λ)·(ln(a/b))²·M`.
pub fn reverse_young_log(pair: &ScalarPair) -> Result<f64> {
    pair.validate()?;
    if pair.is_degenerate() {
        return Ok(0.0);
    }
    let lam = pair.lambda;
    Ok(lam * (1.0 - lam) * (pair.a / pair.b).ln().powi(2) * pair.max())
}

/// Refined Bernoulli inequality for `x > −1`:
/// `λ(1−λ)x²/(2M) ≤ λx + 1 − (x+1)^λ ≤ λ(1−λ)x²/(2m)`, `m, M = min, max{x+1, 1}`.
pub fn bernoulli_sandwich(x: f64, lambda: f64, tol: &Tolerance) -> Result<ScalarSandwich> {
    if !(x > -1.0 && x.is_finite()) {
        return domain(format!("x must be finite and greater than -1, got {x}"));
    }
    check_lambda(lambda)?;
    if x == 0.0 || lambda == 0.0 || lambda == 1.0 {
        return Ok(ScalarSandwich::zero());
    }
    let t = x + 1.0;
    let num = lambda * (1.0 - lambda) * x * x;
    let middle = young_kernel(x.ln_1p(), lambda);
    Ok(ScalarSandwich::new(
        num / (2.0 * t.max(1.0)),
        middle,
        num / (2.0 * t.min(1.0)),
        tol,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpperBoundKind {
    Cf,
    Exp,
    Log,
}

impl UpperBoundKind {
    fn tag(self) -> &'static str {
        match self {
            Self::Cf => "cf",
            Self::Exp => "exp",
            Self::Log => "log",
        }
    }
}

/// The three available upper bounds on the Young gap side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub cf_upper: f64,
    /// `None` when the exponential bound overflows (vacuous, treated as `+inf`).
    pub exp_upper: Option<f64>,
    pub log_upper: f64,
    /// Ascending order, e.g. `"cf<log<exp"`; ties joined with `=`; `"tie"` if all equal.
    pub ordering: String,
    pub cf_below_exp: bool,
}

pub fn tightness_report(pair: &ScalarPair, tol: &Tolerance) -> Result<TightnessReport> {
    let cf_upper = cf_sandwich_two(pair, tol)?.upper;
    let exp_upper = match reverse_young_exp(pair) {
        Ok(v) => Some(v),
        Err(CfError::Overflow(_)) => None,
        Err(e) => return Err(e),
    };
    let log_upper = reverse_young_log(pair)?;
    let exp_val = exp_upper.unwrap_or(f64::INFINITY);

    let mut ranked = [
        (UpperBoundKind::Cf, cf_upper),
        (UpperBoundKind::Log, log_upper),
        (UpperBoundKind::Exp, exp_val),
    ];
    ranked.sort_by(|x, y| x.1.total_cmp(&y.1));
    let ordering = if ranked[0].1 == ranked[2].1 {
        "tie".to_string()
    } else {
        let mut s = ranked[0].0.tag().to_string();
        for w in ranked.windows(2) {
            s.push(if w[0].1 == w[1].1 { '=' } else { '<' });
            s.push_str(w[1].0.tag());
        }
        s
    };
    Ok(TightnessReport {
        cf_upper,
        exp_upper,
        log_upper,
        ordering,
        cf_below_exp: cf_upper < exp_val,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn exp_m1_excess_is_accurate_on_both_branches() {
        assert_eq!(exp_m1_excess(0.0), 0.0);
        // e^u − 1 − u = u²/2 + u³/6 + ... to working precision for tiny u
        let u = 1e-6;
        let series = u * u / 2.0 * (1.0 + u / 3.0 + u * u / 12.0);
        assert!((exp_m1_excess(u) - series).abs() <= 1e-15 * series);
        for u in [-0.5f64, -0.4999999, 0.4999999, 0.5] {
            let direct = u.exp_m1() - u;
            assert!((exp_m1_excess(u) - direct).abs() <= 1e-14 * direct);
        }
    }

    #[test]
    fn n_point_middle_survives_tiny_weight() {
        let s = WeightedSample::new(vec![1.0, 1.001], vec![1e-9, 1.0 - 1e-9], &tol()).unwrap();
        let n = cf_sandwich_n(&s, &tol()).unwrap();
        let two = cf_sandwich_two(&pair(1.0, 1.001, 1e-9), &tol()).unwrap();
        assert!((n.middle - two.middle).abs() <= 1e-12 * two.middle);
        assert!(n.passed());
    }

    fn pair(a: f64, b: f64, l: f64) -> ScalarPair {
        ScalarPair::new(a, b, l).unwrap()
    }

    #[test]
    fn young_gap_examples() {
        assert_eq!(young_gap(&pair(5.0, 5.0, 0.3)).unwrap(), 0.0);
        assert_eq!(young_gap(&pair(4.0, 1.0, 0.0)).unwrap(), 0.0);
        assert!((young_gap(&pair(4.0, 1.0, 0.5)).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(ScalarPair::new(0.0, 1.0, 0.5).is_err());
        assert!(ScalarPair::new(1.0, -1.0, 0.5).is_err());
        assert!(ScalarPair::new(1.0, 1.0, 1.5).is_err());
        assert!(ScalarPair::new(1.0, 1.0, f64::NAN).is_err());
        let bad = ScalarPair {
            a: -1.0,
            b: 1.0,
            lambda: 0.5,
        };
        assert!(matches!(young_gap(&bad), Err(CfError::Domain(_))));
        assert!(bernoulli_sandwich(-1.0, 0.5, &tol()).is_err());
        assert!(bernoulli_sandwich(1.0, -0.1, &tol()).is_err());
    }

    #[test]
    fn two_point_sandwich() {
        let s = cf_sandwich_two(&pair(4.0, 1.0, 0.5), &tol()).unwrap();
        assert_eq!(s.lower, 0.28125);
        assert_eq!(s.upper, 1.125);
        assert!((s.middle - 0.5).abs() < 1e-15);
        assert!(s.passed());
        assert_eq!(
            cf_sandwich_two(&pair(3.7, 3.7, 0.2), &tol()).unwrap(),
            ScalarSandwich::zero()
        );
        assert_eq!(
            cf_sandwich_two(&pair(4.0, 1.0, 1.0), &tol()).unwrap(),
            ScalarSandwich::zero()
        );
    }

    #[test]
    fn n_point_sandwich() {
        let s = cf_sandwich_n(&WeightedSample::uniform(vec![1.0, 4.0]).unwrap(), &tol()).unwrap();
        assert_eq!(s.lower, 0.28125);
        assert_eq!(s.upper, 1.125);
        assert!((s.middle - 0.5).abs() < 1e-15);

        let s = cf_sandwich_n(
            &WeightedSample::uniform(vec![1.0, 2.0, 4.0]).unwrap(),
            &tol(),
        )
        .unwrap();
        assert!((s.middle - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.lower - 14.0 / 72.0).abs() < 1e-15);
        assert!((s.upper - 14.0 / 18.0).abs() < 1e-15);

        let flat = WeightedSample::new(vec![2.5; 3], vec![0.2, 0.3, 0.5], &tol()).unwrap();
        assert_eq!(
            cf_sandwich_n(&flat, &tol()).unwrap(),
            ScalarSandwich::zero()
        );
    }

    #[test]
    fn sample_validation() {
        let t = tol();
        assert!(WeightedSample::new(vec![], vec![], &t).is_err());
        assert!(WeightedSample::new(vec![1.0], vec![0.5, 0.5], &t).is_err());
        assert!(WeightedSample::new(vec![1.0, 0.0], vec![0.5, 0.5], &t).is_err());
        assert!(WeightedSample::new(vec![1.0, 2.0], vec![0.5, 0.6], &t).is_err());
        assert!(WeightedSample::new(vec![1.0, 2.0], vec![1.0, 0.0], &t).is_err());
    }

    #[test]
    fn reverse_bounds() {
        assert_eq!(reverse_young_exp(&pair(2.0, 2.0, 0.4)).unwrap(), 0.0);
        let e = reverse_young_exp(&pair(4.0, 1.0, 0.5)).unwrap();
        assert!((e - 16.975_471_672_717_05).abs() < 1e-12);
        let l = reverse_young_log(&pair(4.0, 1.0, 0.5)).unwrap();
        assert!((l - 1.921_812_055_672_805_7).abs() < 1e-14);
        let l = reverse_young_log(&pair(0.5, 0.25, 0.5)).unwrap();
        assert!((l - 0.060_056_626_739_775_18).abs() < 1e-16);
        assert!(matches!(
            reverse_young_exp(&pair(0.99, 0.0001, 0.5)),
            Err(CfError::Overflow(_))
        ));
    }

    #[test]
    fn bernoulli_examples() {
        assert_eq!(
            bernoulli_sandwich(0.0, 0.7, &tol()).unwrap(),
            ScalarSandwich::zero()
        );
        assert_eq!(
            bernoulli_sandwich(3.0, 1.0, &tol()).unwrap(),
            ScalarSandwich::zero()
        );
        let s = bernoulli_sandwich(3.0, 0.5, &tol()).unwrap();
        assert_eq!(s.lower, 0.28125);
        assert_eq!(s.upper, 1.125);
        assert!((s.middle - 0.5).abs() < 1e-15);
        let s = bernoulli_sandwich(-0.75, 0.5, &tol()).unwrap();
        assert!(s.passed() && s.middle > 0.0);
    }

    #[test]
    fn tightness_examples() {
        let r = tightness_report(&pair(1.5, 1.5, 0.5), &tol()).unwrap();
        assert_eq!(r.ordering, "tie");
        let r = tightness_report(&pair(0.5, 0.25, 0.5), &tol()).unwrap();
        assert_eq!(r.cf_upper, 0.03125);
        assert_eq!(r.ordering, "cf<log<exp");
        assert!(r.cf_below_exp);
        let r = tightness_report(&pair(0.99, 0.0001, 0.5), &tol()).unwrap();
        assert!(r.exp_upper.is_none());
        assert_eq!(r.ordering, "log<cf<exp");
        assert!((r.cf_upper - 1224.88).abs() < 0.05);
        assert!((r.log_upper - 20.95).abs() < 0.005);
    }
}
