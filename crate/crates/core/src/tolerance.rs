//! Tolerance policy and the sandwich result type shared by every scalar bound.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Relative tolerance used for all sandwich comparisons.
///
/// `tol(scale) = max(rel_eps * max(1, scale), abs_floor)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel_eps: f64,
    pub abs_floor: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel_eps: 1e-12,
            abs_floor: 1e-300,
        }
    }
}

impl Tolerance {
    pub fn new(rel_eps: f64) -> Result<Self> {
        if !(rel_eps > 0.0 && rel_eps.is_finite()) {
            return domain(format!(
                "tolerance must be positive and finite, got {rel_eps}"
            ));
        }
        Ok(Self {
            rel_eps,
            ..Self::default()
        })
    }

    pub fn tol(&self, scale: f64) -> f64 {
        (self.rel_eps * scale.abs().max(1.0)).max(self.abs_floor)
    }
}

/// A `lower <= middle <= upper` triple together with its slacks and pass flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarSandwich {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub slack_lower: f64,
    pub slack_upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl ScalarSandwich {
    /// Builds the triple and evaluates both flags against `tol(|middle| + |upper|)`.
    ///
    /// An infinite upper bound is vacuous but valid; its slack is `+inf`.
    pub fn new(lower: f64, middle: f64, upper: f64, tol: &Tolerance) -> Self {
        let scale = if upper.is_finite() {
            middle.abs() + upper.abs()
        } else {
            middle.abs()
        };
        let t = tol.tol(scale);
        let slack_lower = middle - lower;
        let slack_upper = upper - middle;
        Self {
            lower,
            middle,
            upper,
            slack_lower,
            slack_upper,
            lower_ok: slack_lower >= -t,
            upper_ok: slack_upper >= -t,
        }
    }

    /// Overrides the flags with verdicts obtained elsewhere (exact arithmetic).
    pub(crate) fn with_flags(mut self, lower_ok: bool, upper_ok: bool) -> Self {
        self.lower_ok = lower_ok;
        self.upper_ok = upper_ok;
        self
    }

    pub fn zero() -> Self {
        Self {
            lower: 0.0,
            middle: 0.0,
            upper: 0.0,
            slack_lower: 0.0,
            slack_upper: 0.0,
            lower_ok: true,
            upper_ok: true,
        }
    }

    pub fn passed(&self) -> bool {
        self.lower_ok && self.upper_ok
    }

    /// Worst of the two slacks divided by `max(1, |middle| + |upper|)`.
    pub fn relative_slack(&self) -> f64 {
        let scale = if self.upper.is_finite() {
            (self.middle.abs() + self.upper.abs()).max(1.0)
        } else {
            self.middle.abs().max(1.0)
        };
        self.slack_lower.min(self.slack_upper) / scale
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Unevaluated `(hi, lo)` with `hi = value()` and `hi + lo` the
    /// compensated total.
    pub fn parts(&self) -> (f64, f64) {
        let hi = self.sum + self.comp;
        (hi, self.comp - (hi - self.sum))
    }
}

/// `x·sy − y·sx` for double-double `sx`, `sy`, with the leading 2×2
/// determinant evaluated by Kahan's fma scheme.
pub(crate) fn cross_dd(x: f64, y: f64, sx: (f64, f64), sy: (f64, f64)) -> f64 {
    let w = y * sx.0;
    let e = (-y).mul_add(sx.0, w);
    let f = x.mul_add(sy.0, -w);
    (f + e) + (x * sy.1 - y * sx.1)
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub(crate) fn ksum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}
