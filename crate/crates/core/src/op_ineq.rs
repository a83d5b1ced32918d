//! Matrix versions of the two-point AM-GM refinement: the sandwich for
//! `(1−λ)A + λB − A♯_λB` under a Loewner ordering of `A`, `B`, the
//! companion bounds for the harmonic mean, and the cubic consequence
//! `3(A−B) + BA^{-1}B − AB^{-1}A ≥ 0`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, CfError, Result};
use crate::scalar_cf::check_lambda;
use crate::symker::{
    arithmetic_mean, check_dims, eigenvalues, geometric_mean, harmonic_mean, is_psd, loewner_cmp,
    pd_floor, spd_inverse, LoewnerRelation, LoewnerVerdict, SymMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "A_leq_B")]
    ALeqB,
    #[serde(rename = "B_leq_A")]
    BLeqA,
}

/// Which of the two candidate bound matrices turned out to be the lower one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundAssignment {
    /// Lower/upper as labelled in the printed statement.
    AsPrinted,
    /// The printed labels exchanged.
    Swapped,
    /// Both labellings hold within the PSD tolerance (candidates closer than
    /// the tolerance); oriented by the larger raw slack.
    Indistinct,
    /// Neither labelling brackets the middle term.
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSandwich {
    pub lower: SymMatrix,
    pub middle: SymMatrix,
    pub upper: SymMatrix,
    /// `lower` compared with `middle`.
    pub lower_verdict: LoewnerVerdict,
    /// `middle` compared with `upper`.
    pub upper_verdict: LoewnerVerdict,
    #[serde(rename = "case")]
    pub case_tag: CaseTag,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assignment: Option<BoundAssignment>,
}

impl OperatorSandwich {
    pub fn passed(&self) -> bool {
        self.lower_verdict.holds_leq() && self.upper_verdict.holds_leq()
    }

    /// Smallest eigenvalue of `middle − lower`.
    pub fn min_eig_lower_gap(&self) -> f64 {
        self.lower_verdict.min_eig_b_minus_a
    }

    /// Smallest eigenvalue of `upper − middle`.
    pub fn min_eig_upper_gap(&self) -> f64 {
        self.upper_verdict.min_eig_b_minus_a
    }
}

fn case_of(a: &SymMatrix, b: &SymMatrix) -> Result<CaseTag> {
    match loewner_cmp(a, b)?.relation {
        LoewnerRelation::Leq | LoewnerRelation::Equal => Ok(CaseTag::ALeqB),
        LoewnerRelation::Geq => Ok(CaseTag::BLeqA),
        LoewnerRelation::Incomparable => Err(CfError::OrderingIndeterminate),
    }
}

/// `X Y^{-1} X − 2X + Y`, which equals `(X−Y) Y^{-1} (X−Y)`.
fn quadratic_term(x: &SymMatrix, y_inv: &SymMatrix, y: &SymMatrix) -> Result<SymMatrix> {
    x.congruence(y_inv)?
        .lincomb(1.0, &x.lincomb(-2.0, y, 1.0)?, 1.0)
}

fn zero_sandwich(a: &SymMatrix, case_tag: CaseTag) -> Result<OperatorSandwich> {
    let z = SymMatrix::zeros(a.dim());
    let v = loewner_cmp(&z, &z)?;
    Ok(OperatorSandwich {
        lower: z.clone(),
        middle: z.clone(),
        upper: z,
        lower_verdict: v,
        upper_verdict: v,
        case_tag,
        assignment: None,
    })
}

/// For `A ≤ B`:
/// `λ(1−λ)/2·(AB^{-1}A − 2A + B) ≤ (1−λ)A + λB − A♯_λB ≤ λ(1−λ)/2·(BA^{-1}B − 2B + A)`;
/// for `B ≤ A` the two bound matrices trade places.
pub fn theorem41_sandwich(a: &SymMatrix, b: &SymMatrix, lambda: f64) -> Result<OperatorSandwich> {
    check_dims(a, b)?;
    check_lambda(lambda)?;
    let a_inv = spd_inverse(a)?;
    let b_inv = spd_inverse(b)?;
    let case_tag = case_of(a, b)?;
    if a == b || lambda == 0.0 || lambda == 1.0 {
        return zero_sandwich(a, case_tag);
    }
    let c = 0.5 * lambda * (1.0 - lambda);
    let t1 = quadratic_term(a, &b_inv, b)?.scale(c);
    let t2 = quadratic_term(b, &a_inv, a)?.scale(c);
    let middle = arithmetic_mean(a, b, lambda)?.sub(&geometric_mean(a, b, lambda)?)?;
    let (lower, upper) = match case_tag {
        CaseTag::ALeqB => (t1, t2),
        CaseTag::BLeqA => (t2, t1),
    };
    Ok(OperatorSandwich {
        lower_verdict: loewner_cmp(&lower, &middle)?,
        upper_verdict: loewner_cmp(&middle, &upper)?,
        lower,
        middle,
        upper,
        case_tag,
        assignment: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdTerms {
    /// `AB^{-1}A − 2A + B`
    pub t1: SymMatrix,
    /// `BA^{-1}B − 2B + A`
    pub t2: SymMatrix,
    pub t1_min_eig: f64,
    pub t2_min_eig: f64,
    pub both_psd: bool,
}

/// The two quadratic terms bounding the operator AM-GM gap; both are
/// positive semidefinite for every positive definite pair.
pub fn remark41_psd_terms(a: &SymMatrix, b: &SymMatrix) -> Result<PsdTerms> {
    check_dims(a, b)?;
    let a_inv = spd_inverse(a)?;
    let b_inv = spd_inverse(b)?;
    let (t1, t2) = if a == b {
        (SymMatrix::zeros(a.dim()), SymMatrix::zeros(a.dim()))
    } else {
        (quadratic_term(a, &b_inv, b)?, quadratic_term(b, &a_inv, a)?)
    };
    let (ok1, t1_min_eig) = is_psd(&t1)?;
    let (ok2, t2_min_eig) = is_psd(&t2)?;
    Ok(PsdTerms {
        t1,
        t2,
        t1_min_eig,
        t2_min_eig,
        both_psd: ok1 && ok2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanChain {
    pub hm_leq_gm: LoewnerVerdict,
    pub gm_leq_am: LoewnerVerdict,
}

impl MeanChain {
    pub fn passed(&self) -> bool {
        self.hm_leq_gm.holds_leq() && self.gm_leq_am.holds_leq()
    }
}

/// `((1−λ)A^{-1} + λB^{-1})^{-1} ≤ A♯_λB ≤ (1−λ)A + λB`.
pub fn amghm_chain_check(a: &SymMatrix, b: &SymMatrix, lambda: f64) -> Result<MeanChain> {
    let hm = harmonic_mean(a, b, lambda)?;
    let gm = geometric_mean(a, b, lambda)?;
    let am = arithmetic_mean(a, b, lambda)?;
    Ok(MeanChain {
        hm_leq_gm: loewner_cmp(&hm, &gm)?,
        gm_leq_am: loewner_cmp(&gm, &am)?,
    })
}

/// `G − G·{(2/(λ(1−λ)))·Z^{-1} + G}^{-1}·G`, i.e. `(G^{-1} + λ(1−λ)/2·Z)^{-1}`.
fn corollary42_candidate(g: &SymMatrix, z: &SymMatrix, lambda: f64) -> Result<SymMatrix> {
    let z_inv = spd_inverse(z)?;
    let brace = z_inv.lincomb(2.0 / (lambda * (1.0 - lambda)), g, 1.0)?;
    g.sub(&g.congruence(&spd_inverse(&brace)?)?)
}

/// Brackets the harmonic mean `((1−λ)A^{-1} + λB^{-1})^{-1}` between the two
/// candidates built from `Z = A^{-1}BA^{-1} − 2A^{-1} + B^{-1}` and
/// `Z = B^{-1}AB^{-1} − 2B^{-1} + A^{-1}`.
///
/// The braces are inverted. Which candidate is the lower bound is decided by
/// evaluating both Loewner verdicts and recorded in `assignment`.
pub fn corollary42_sandwich(a: &SymMatrix, b: &SymMatrix, lambda: f64) -> Result<OperatorSandwich> {
    check_dims(a, b)?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return domain(format!(
            "lambda must lie strictly inside (0, 1), got {lambda}"
        ));
    }
    let a_inv = spd_inverse(a)?;
    let b_inv = spd_inverse(b)?;
    let case_tag = case_of(a, b)?;

    let rho = eigenvalues(a)?
        .into_iter()
        .chain(eigenvalues(b)?)
        .fold(0.0f64, |acc, l| acc.max(l.abs()));
    let gap = eigenvalues(&b.sub(a)?)?
        .into_iter()
        .fold(f64::INFINITY, |acc, l| acc.min(l.abs()));
    if gap <= 10.0 * pd_floor(&[rho]) {
        return Err(CfError::Degenerate(format!(
            "B - A is numerically singular (smallest |eigenvalue| {gap:e})"
        )));
    }

    let g = geometric_mean(a, b, lambda)?;
    let middle = harmonic_mean(a, b, lambda)?;
    let z_from_b = quadratic_term(&b_inv, a, &a_inv)?;
    let z_from_a = quadratic_term(&a_inv, b, &b_inv)?;
    let c_from_b = corollary42_candidate(&g, &z_from_b, lambda)?;
    let c_from_a = corollary42_candidate(&g, &z_from_a, lambda)?;
    let (printed_lower, printed_upper) = match case_tag {
        CaseTag::ALeqB => (c_from_b, c_from_a),
        CaseTag::BLeqA => (c_from_a, c_from_b),
    };

    let lv = loewner_cmp(&printed_lower, &middle)?;
    let uv = loewner_cmp(&middle, &printed_upper)?;
    let slv = loewner_cmp(&printed_upper, &middle)?;
    let suv = loewner_cmp(&middle, &printed_lower)?;
    let printed_ok = lv.holds_leq() && uv.holds_leq();
    let swapped_ok = slv.holds_leq() && suv.holds_leq();
    let printed_slack = lv.min_eig_b_minus_a.min(uv.min_eig_b_minus_a);
    let swapped_slack = slv.min_eig_b_minus_a.min(suv.min_eig_b_minus_a);
    let (assignment, keep_printed) = match (printed_ok, swapped_ok) {
        (true, true) => (BoundAssignment::Indistinct, printed_slack >= swapped_slack),
        (true, false) => (BoundAssignment::AsPrinted, true),
        (false, true) => (BoundAssignment::Swapped, false),
        (false, false) => (BoundAssignment::Neither, true),
    };
    let (lower, upper, lower_verdict, upper_verdict) = if keep_printed {
        (printed_lower, printed_upper, lv, uv)
    } else {
        (printed_upper, printed_lower, slv, suv)
    };
    Ok(OperatorSandwich {
        lower,
        middle,
        upper,
        lower_verdict,
        upper_verdict,
        case_tag,
        assignment: Some(assignment),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicCheck {
    pub expr: SymMatrix,
    pub min_eig: f64,
    pub psd: bool,
}

/// `3(A−B) + BA^{-1}B − AB^{-1}A ≥ 0` for `A ≤ B`.
pub fn corollary43_check(a: &SymMatrix, b: &SymMatrix) -> Result<CubicCheck> {
    check_dims(a, b)?;
    let a_inv = spd_inverse(a)?;
    let b_inv = spd_inverse(b)?;
    if case_of(a, b)? != CaseTag::ALeqB {
        return Err(CfError::OrderingIndeterminate);
    }
    let expr = if a == b {
        SymMatrix::zeros(a.dim())
    } else {
        a.sub(b)?
            .scale(3.0)
            .add(&b.congruence(&a_inv)?)?
            .sub(&a.congruence(&b_inv)?)?
    };
    let (psd, min_eig) = is_psd(&expr)?;
    Ok(CubicCheck { expr, min_eig, psd })
}
