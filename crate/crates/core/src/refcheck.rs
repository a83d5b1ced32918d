//! Extended-precision recomputation of every scalar sandwich and a brute-force
//! divisor enumerator. These are the independent references the fast paths
//! are checked against; they share input validation with the fast paths but
//! none of their arithmetic.

use astro_float::{BigFloat, Consts, RoundingMode};
use serde::{Deserialize, Serialize};

use crate::error::{domain, CfError, Result};
use crate::scalar_cf::{check_lambda, ScalarPair, WeightedSample};
use crate::sum_refine::{HolderSpec, PowerMeanSpec};
use crate::tolerance::{ScalarSandwich, Tolerance};

pub const DEFAULT_PRECISION_BITS: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// Inputs of one sandwich evaluation, tagged by kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "inputs", rename_all = "snake_case")]
pub enum OracleInput {
    CfTwo {
        a: f64,
        b: f64,
        lambda: f64,
    },
    CfN {
        points: Vec<f64>,
        weights: Vec<f64>,
    },
    Bernoulli {
        x: f64,
        lambda: f64,
    },
    PowerMean {
        values: Vec<f64>,
        weights: Vec<f64>,
        r: f64,
        s: f64,
    },
    Holder {
        avec: Vec<f64>,
        bvec: Vec<f64>,
        p: f64,
        q: f64,
    },
    Cauchy {
        avec: Vec<f64>,
        bvec: Vec<f64>,
    },
    Bergstrom {
        xvec: Vec<f64>,
        avec: Vec<f64>,
    },
    /// Corrected divisor-mean bound (`σ_{2k} − σ_k²/τ`, largest point `n^k`).
    DivisorMean {
        n: u64,
        k: f64,
        unitary: bool,
    },
}

/// A frozen oracle evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    #[serde(flatten)]
    pub input: OracleInput,
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub precision_bits: usize,
}

/// Binary floating point arithmetic at a fixed working precision.
pub struct HpContext {
    bits: usize,
    consts: Consts,
}

type Hp = BigFloat;

impl HpContext {
    pub fn new(bits: usize) -> Result<Self> {
        if bits < 64 {
            return domain(format!(
                "oracle precision must be at least 64 bits, got {bits}"
            ));
        }
        let consts = Consts::new().map_err(|e| CfError::Domain(format!("oracle init: {e}")))?;
        Ok(Self { bits, consts })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    fn num(&self, x: f64) -> Hp {
        BigFloat::from_f64(x, self.bits)
    }

    fn int(&self, x: u64) -> Hp {
        BigFloat::from_u64(x, self.bits)
    }

    fn add(&self, x: &Hp, y: &Hp) -> Hp {
        x.add(y, self.bits, RM)
    }

    fn sub(&self, x: &Hp, y: &Hp) -> Hp {
        x.sub(y, self.bits, RM)
    }

    fn mul(&self, x: &Hp, y: &Hp) -> Hp {
        x.mul(y, self.bits, RM)
    }

    fn div(&self, x: &Hp, y: &Hp) -> Hp {
        x.div(y, self.bits, RM)
    }

    fn sq(&self, x: &Hp) -> Hp {
        self.mul(x, x)
    }

    fn sqrt(&self, x: &Hp) -> Hp {
        x.sqrt(self.bits, RM)
    }

    fn exp(&mut self, x: &Hp) -> Hp {
        x.exp(self.bits, RM, &mut self.consts)
    }

    fn ln(&mut self, x: &Hp) -> Hp {
        x.ln(self.bits, RM, &mut self.consts)
    }

    /// `x^y = exp(y·ln x)` for `x > 0`.
    fn pow(&mut self, x: &Hp, y: &Hp) -> Hp {
        let l = self.ln(x);
        let e = self.mul(y, &l);
        self.exp(&e)
    }

    fn sum<'a>(&self, xs: impl IntoIterator<Item = &'a Hp>) -> Hp {
        xs.into_iter()
            .fold(self.num(0.0), |acc, x| self.add(&acc, x))
    }

    fn min_max<'a>(&self, xs: impl IntoIterator<Item = &'a Hp>) -> (Hp, Hp) {
        let mut it = xs.into_iter();
        let first = it.next().expect("non-empty").clone();
        it.fold((first.clone(), first), |(lo, hi), x| (lo.min(x), hi.max(x)))
    }

    pub fn to_f64(&self, x: &Hp) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        if x.is_inf_pos() {
            return f64::INFINITY;
        }
        x.to_string().parse().unwrap_or(f64::NAN)
    }

    fn sandwich(&self, lower: &Hp, middle: &Hp, upper: &Hp) -> ScalarSandwich {
        let lower_ok = lower.cmp(middle).is_some_and(|c| c <= 0);
        let upper_ok = middle.cmp(upper).is_some_and(|c| c <= 0);
        ScalarSandwich::new(
            self.to_f64(lower),
            self.to_f64(middle),
            self.to_f64(upper),
            &Tolerance::default(),
        )
        .with_flags(lower_ok, upper_ok)
    }

    fn all_equal(&self, f: &[Hp], g: &[Hp]) -> bool {
        f.iter().zip(g).all(|(x, y)| x.cmp(y) == Some(0))
    }

    /// `λ(1−λ)(a−b)²/(2·max)`, `λa + (1−λ)b − a^λ b^{1−λ}`, `…/(2·min)`.
    fn cf_two(&mut self, a: f64, b: f64, lambda: f64) -> Result<ScalarSandwich> {
        ScalarPair::new(a, b, lambda)?;
        if a == b || lambda == 0.0 || lambda == 1.0 {
            return Ok(ScalarSandwich::zero());
        }
        let (ha, hb, hl) = (self.num(a), self.num(b), self.num(lambda));
        let one = self.num(1.0);
        let hl1 = self.sub(&one, &hl);
        let arith = self.add(&self.mul(&hl, &ha), &self.mul(&hl1, &hb));
        let pa = self.pow(&ha, &hl);
        let pb = self.pow(&hb, &hl1);
        let middle = self.sub(&arith, &self.mul(&pa, &pb));
        let num = self.mul(&self.mul(&hl, &hl1), &self.sq(&self.sub(&ha, &hb)));
        let two = self.num(2.0);
        let lower = self.div(&num, &self.mul(&two, &self.num(a.max(b))));
        let upper = self.div(&num, &self.mul(&two, &self.num(a.min(b))));
        Ok(self.sandwich(&lower, &middle, &upper))
    }

    fn cf_n(&mut self, points: &[f64], weights: &[f64]) -> Result<ScalarSandwich> {
        WeightedSample::new(points.to_vec(), weights.to_vec(), &Tolerance::default())?;
        let x: Vec<Hp> = points.iter().map(|&v| self.num(v)).collect();
        let raw: Vec<Hp> = weights.iter().map(|&v| self.num(v)).collect();
        let total = self.sum(&raw);
        let w: Vec<Hp> = raw.iter().map(|v| self.div(v, &total)).collect();
        let (lo, hi) = self.min_max(&x);
        if lo.cmp(&hi) == Some(0) {
            return Ok(ScalarSandwich::zero());
        }
        let terms: Vec<Hp> = w.iter().zip(&x).map(|(a, b)| self.mul(a, b)).collect();
        let mean = self.sum(&terms);
        let mut log_gm = self.num(0.0);
        for (a, xi) in w.iter().zip(&x) {
            let l = self.ln(xi);
            log_gm = self.add(&log_gm, &self.mul(a, &l));
        }
        let gm = self.exp(&log_gm);
        let middle = self.sub(&mean, &gm);
        let var_terms: Vec<Hp> = w
            .iter()
            .zip(&x)
            .map(|(a, xi)| self.mul(a, &self.sq(&self.sub(xi, &mean))))
            .collect();
        let var = self.sum(&var_terms);
        let two = self.num(2.0);
        let lower = self.div(&var, &self.mul(&two, &hi));
        let upper = self.div(&var, &self.mul(&two, &lo));
        Ok(self.sandwich(&lower, &middle, &upper))
    }

    fn bernoulli(&mut self, x: f64, lambda: f64) -> Result<ScalarSandwich> {
        if !(x > -1.0 && x.is_finite()) {
            return domain(format!("x must be finite and greater than -1, got {x}"));
        }
        check_lambda(lambda)?;
        if x == 0.0 || lambda == 0.0 || lambda == 1.0 {
            return Ok(ScalarSandwich::zero());
        }
        let (hx, hl, one) = (self.num(x), self.num(lambda), self.num(1.0));
        let t = self.add(&hx, &one);
        let tl = self.pow(&t, &hl);
        let middle = self.sub(&self.add(&self.mul(&hl, &hx), &one), &tl);
        let num = self.mul(&self.mul(&hl, &self.sub(&one, &hl)), &self.sq(&hx));
        let two = self.num(2.0);
        let (lo, hi) = if x < 0.0 {
            (t.clone(), one.clone())
        } else {
            (one.clone(), t.clone())
        };
        let lower = self.div(&num, &self.mul(&two, &hi));
        let upper = self.div(&num, &self.mul(&two, &lo));
        Ok(self.sandwich(&lower, &middle, &upper))
    }

    fn power_mean(
        &mut self,
        values: &[f64],
        weights: &[f64],
        r: f64,
        s: f64,
    ) -> Result<ScalarSandwich> {
        PowerMeanSpec::new(values.to_vec(), weights.to_vec(), r, s)?;
        let a: Vec<Hp> = values.iter().map(|&v| self.num(v)).collect();
        let p: Vec<Hp> = weights.iter().map(|&v| self.num(v)).collect();
        let (lo, hi) = self.min_max(&a);
        if r == s || lo.cmp(&hi) == Some(0) {
            return Ok(ScalarSandwich::zero());
        }
        let (hr, hs) = (self.num(r), self.num(s));
        let psum = self.sum(&p);
        let mut a_s = Vec::with_capacity(a.len());
        let mut a_r = Vec::with_capacity(a.len());
        for ai in &a {
            a_s.push(self.pow(ai, &hs));
            a_r.push(self.pow(ai, &hr));
        }
        let mom = |ctx: &Self, xs: &[Hp]| {
            let t: Vec<Hp> = p.iter().zip(xs).map(|(w, x)| ctx.mul(w, x)).collect();
            ctx.div(&ctx.sum(&t), &psum)
        };
        let ms_s = mom(self, &a_s);
        let mr_r = mom(self, &a_r);
        let ms_r = self.pow(&ms_s, &self.div(&hr, &hs));
        let middle = self.sub(&ms_r, &mr_r);
        let one = self.num(1.0);
        let t: Vec<Hp> = a_s.iter().map(|x| self.div(x, &ms_s)).collect();
        let dev: Vec<Hp> = t.iter().map(|ti| self.sq(&self.sub(ti, &one))).collect();
        let dispersion = mom(self, &dev);
        let factor = self.div(
            &self.mul(&hr, &self.sub(&hs, &hr)),
            &self.mul(&self.num(2.0), &self.sq(&hs)),
        );
        let coef = self.mul(&self.mul(&factor, &ms_r), &dispersion);
        let (m, big_m) = self.min_max(t.iter().chain(std::iter::once(&one)));
        Ok(self.sandwich(&self.div(&coef, &big_m), &middle, &self.div(&coef, &m)))
    }

    /// Fractions `x_i^e/∑x^e` and `(∑x^e)^{1/e}`.
    fn normalized(&mut self, x: &[f64], e: f64) -> (Vec<Hp>, Hp) {
        let he = self.num(e);
        let pows: Vec<Hp> = x
            .iter()
            .map(|&v| {
                let hv = self.num(v);
                self.pow(&hv, &he)
            })
            .collect();
        let total = self.sum(&pows);
        let norm = self.pow(&total, &self.div(&self.num(1.0), &he));
        (pows.iter().map(|v| self.div(v, &total)).collect(), norm)
    }

    fn sum_sq_diff(&self, f: &[Hp], g: &[Hp]) -> Hp {
        let d: Vec<Hp> = f
            .iter()
            .zip(g)
            .map(|(x, y)| self.sq(&self.sub(x, y)))
            .collect();
        self.sum(&d)
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> Hp {
        let t: Vec<Hp> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| self.mul(&self.num(x), &self.num(y)))
            .collect();
        self.sum(&t)
    }

    fn holder(&mut self, avec: &[f64], bvec: &[f64], p: f64, q: f64) -> Result<ScalarSandwich> {
        HolderSpec::new(avec.to_vec(), bvec.to_vec(), p, q)?;
        let (f, na) = self.normalized(avec, p);
        let (g, nb) = self.normalized(bvec, q);
        if self.all_equal(&f, &g) {
            return Ok(ScalarSandwich::zero());
        }
        let prod = self.mul(&na, &nb);
        let middle = self.sub(&prod, &self.inner(avec, bvec));
        let pq2 = self.num(2.0 * p * q);
        let coef = self.mul(&self.div(&prod, &pq2), &self.sum_sq_diff(&f, &g));
        let (m, big_m) = self.min_max(f.iter().chain(&g));
        Ok(self.sandwich(&self.div(&coef, &big_m), &middle, &self.div(&coef, &m)))
    }

    /// `y² + 2y·s`.
    fn lift(&self, y: &Hp, s: &Hp) -> Hp {
        let two = self.num(2.0);
        self.add(&self.sq(y), &self.mul(&self.mul(&two, y), s))
    }

    fn cauchy(&mut self, avec: &[f64], bvec: &[f64]) -> Result<ScalarSandwich> {
        HolderSpec::new(avec.to_vec(), bvec.to_vec(), 2.0, 2.0)?;
        let (f, na) = self.normalized(avec, 2.0);
        let (g, nb) = self.normalized(bvec, 2.0);
        if self.all_equal(&f, &g) {
            return Ok(ScalarSandwich::zero());
        }
        let inner = self.inner(avec, bvec);
        let sa = self.inner(avec, avec);
        let sb = self.inner(bvec, bvec);
        let middle = self.sub(&self.mul(&sa, &sb), &self.sq(&inner));
        let coef = self.mul(
            &self.div(&self.mul(&na, &nb), &self.num(8.0)),
            &self.sum_sq_diff(&f, &g),
        );
        let (m, big_m) = self.min_max(f.iter().chain(&g));
        let lower = self.lift(&self.div(&coef, &big_m), &inner);
        let upper = self.lift(&self.div(&coef, &m), &inner);
        Ok(self.sandwich(&lower, &middle, &upper))
    }

    fn bergstrom(&mut self, xvec: &[f64], avec: &[f64]) -> Result<ScalarSandwich> {
        if xvec.len() != avec.len() || avec.is_empty() {
            return domain("x and a must be non-empty and of equal length");
        }
        if avec.iter().any(|a| !(*a > 0.0 && a.is_finite())) || xvec.iter().any(|x| !x.is_finite())
        {
            return domain("a entries must be positive and x entries finite");
        }
        if xvec.iter().all(|x| *x == 0.0) {
            return Err(CfError::Degenerate(
                "all x_i are zero; fractions undefined".into(),
            ));
        }
        let ratios: Vec<Hp> = xvec
            .iter()
            .zip(avec)
            .map(|(&x, &a)| self.div(&self.sq(&self.num(x)), &self.num(a)))
            .collect();
        let ha: Vec<Hp> = avec.iter().map(|&a| self.num(a)).collect();
        let s_ratio = self.sum(&ratios);
        let s_a = self.sum(&ha);
        let abs: Vec<Hp> = xvec.iter().map(|&x| self.num(x.abs())).collect();
        let s_abs = self.sum(&abs);
        let u: Vec<Hp> = ratios.iter().map(|r| self.div(r, &s_ratio)).collect();
        let v: Vec<Hp> = ha.iter().map(|a| self.div(a, &s_a)).collect();
        if self.all_equal(&u, &v) {
            return Ok(ScalarSandwich::zero());
        }
        let middle = self.sub(&s_ratio, &self.div(&self.sq(&s_abs), &s_a));
        let root = self.sqrt(&self.mul(&s_ratio, &s_a));
        let coef = self.mul(&self.div(&root, &self.num(8.0)), &self.sum_sq_diff(&u, &v));
        let (m, big_m) = self.min_max(u.iter().chain(&v));
        let lower = self.div(&self.lift(&self.div(&coef, &big_m), &s_abs), &s_a);
        let upper = if m.is_zero() {
            BigFloat::from_f64(f64::INFINITY, self.bits)
        } else {
            self.div(&self.lift(&self.div(&coef, &m), &s_abs), &s_a)
        };
        Ok(self.sandwich(&lower, &middle, &upper))
    }

    fn divisor_mean(&mut self, n: u64, k: f64, unitary: bool) -> Result<ScalarSandwich> {
        if !(k >= 0.0 && k.is_finite()) {
            return domain(format!("k must be a finite nonnegative real, got {k}"));
        }
        let mut ds = brute_divisors(n)?;
        if unitary {
            ds.retain(|&d| num_integer::gcd(d, n / d) == 1);
        }
        if n == 1 || k == 0.0 {
            return Ok(ScalarSandwich::zero());
        }
        let hk = self.num(k);
        let xs: Vec<Hp> = ds
            .iter()
            .map(|&d| {
                let hd = self.int(d);
                self.pow(&hd, &hk)
            })
            .collect();
        let tau = self.int(ds.len() as u64);
        let mean = self.div(&self.sum(&xs), &tau);
        let hn = self.int(n);
        let root = self.pow(&hn, &self.div(&hk, &self.num(2.0)));
        let middle = self.sub(&mean, &root);
        let dev: Vec<Hp> = xs.iter().map(|x| self.sq(&self.sub(x, &mean))).collect();
        let bracket = self.sum(&dev);
        let two_tau = self.mul(&self.num(2.0), &tau);
        let n_k = self.pow(&hn, &hk);
        let lower = self.div(&bracket, &self.mul(&two_tau, &n_k));
        let upper = self.div(&bracket, &two_tau);
        Ok(self.sandwich(&lower, &middle, &upper))
    }

    /// Evaluates the sandwich named by `input` at this context's precision.
    pub fn hp_sandwich(&mut self, input: &OracleInput) -> Result<ScalarSandwich> {
        match input {
            OracleInput::CfTwo { a, b, lambda } => self.cf_two(*a, *b, *lambda),
            OracleInput::CfN { points, weights } => self.cf_n(points, weights),
            OracleInput::Bernoulli { x, lambda } => self.bernoulli(*x, *lambda),
            OracleInput::PowerMean {
                values,
                weights,
                r,
                s,
            } => self.power_mean(values, weights, *r, *s),
            OracleInput::Holder { avec, bvec, p, q } => self.holder(avec, bvec, *p, *q),
            OracleInput::Cauchy { avec, bvec } => self.cauchy(avec, bvec),
            OracleInput::Bergstrom { xvec, avec } => self.bergstrom(xvec, avec),
            OracleInput::DivisorMean { n, k, unitary } => self.divisor_mean(*n, *k, *unitary),
        }
    }

    /// Single-value oracles used outside the sandwich family.
    pub fn reverse_young_exp(&mut self, a: f64, b: f64, lambda: f64) -> Result<f64> {
        ScalarPair::new(a, b, lambda)?;
        let (ha, hb, hl, one) = (self.num(a), self.num(b), self.num(lambda), self.num(1.0));
        let hl1 = self.sub(&one, &hl);
        let pa = self.pow(&ha, &hl);
        let pb = self.pow(&hb, &hl1);
        let gm = self.mul(&pa, &pb);
        let m = self.num(a.min(b));
        let e = self.mul(
            &self.mul(&hl, &hl1),
            &self.sq(&self.div(&self.sub(&ha, &hb), &m)),
        );
        let ex = self.exp(&e);
        Ok(self.to_f64(&self.mul(&gm, &self.sub(&ex, &one))))
    }

    pub fn reverse_young_log(&mut self, a: f64, b: f64, lambda: f64) -> Result<f64> {
        ScalarPair::new(a, b, lambda)?;
        let (ha, hb, hl, one) = (self.num(a), self.num(b), self.num(lambda), self.num(1.0));
        let l = self.ln(&self.div(&ha, &hb));
        let v = self.mul(
            &self.mul(&self.mul(&hl, &self.sub(&one, &hl)), &self.sq(&l)),
            &self.num(a.max(b)),
        );
        Ok(self.to_f64(&v))
    }
}

/// One-shot evaluation at [`DEFAULT_PRECISION_BITS`].
pub fn hp_sandwich(input: &OracleInput) -> Result<ScalarSandwich> {
    HpContext::new(DEFAULT_PRECISION_BITS)?.hp_sandwich(input)
}

pub fn fixture(ctx: &mut HpContext, input: OracleInput) -> Result<Fixture> {
    let s = ctx.hp_sandwich(&input)?;
    Ok(Fixture {
        input,
        lower: s.lower,
        middle: s.middle,
        upper: s.upper,
        precision_bits: ctx.bits(),
    })
}

/// `|fast − oracle| ≤ rel·max(1, |oracle|)` on all three components
/// (infinite components must match exactly).
pub fn agrees(fast: &ScalarSandwich, oracle: &ScalarSandwich, rel: f64) -> bool {
    let close = |f: f64, o: f64| {
        if o.is_infinite() || f.is_infinite() {
            f == o
        } else {
            (f - o).abs() <= rel * o.abs().max(1.0)
        }
    };
    close(fast.lower, oracle.lower)
        && close(fast.middle, oracle.middle)
        && close(fast.upper, oracle.upper)
}

/// Divisors by trial division over `1..=⌊√n⌋` with paired complements.
pub fn brute_divisors(n: u64) -> Result<Vec<u64>> {
    if n == 0 || n > 10_000_000 {
        return domain(format!("brute_divisors needs 1 <= n <= 10^7, got {n}"));
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    Ok(small)
}
