//! Dense real symmetric matrices: cyclic Jacobi eigendecomposition, spectral
//! functions of positive definite matrices, weighted geometric and harmonic
//! means, and Loewner-order comparison.

use serde::{Deserialize, Serialize};

use crate::error::{domain, CfError, Result};
use crate::scalar_cf::check_lambda;

const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;
const PD_FLOOR_REL: f64 = 1e-12;
const PSD_TOL_REL: f64 = 1e-10;

/// Symmetric matrix stored densely in row-major order. Every write is
/// mirrored, so `get(i, j) == get(j, i)` holds exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1.0; dim])
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i * m.dim + i] = *v;
        }
        m
    }

    /// Builds from the upper triangle of `f(i, j)`, `i <= j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Accepts a square array of rows that is symmetric up to `1e-12` relative
    /// to its largest entry; the stored matrix is the symmetric part.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return domain("matrix must have at least one row");
        }
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return domain(format!(
                "matrix is not square: row of length {} in {dim} rows",
                r.len()
            ));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return domain("matrix entries must be finite");
        }
        let scale = rows
            .iter()
            .flatten()
            .fold(1.0f64, |acc, x| acc.max(x.abs()));
        let asymmetric = (0..dim).flat_map(|i| (i + 1..dim).map(move |j| (i, j)));
        if let Some((i, j)) = asymmetric
            .into_iter()
            .find(|&(i, j)| (rows[i][j] - rows[j][i]).abs() > 1e-12 * scale)
        {
            return domain(format!("matrix is not symmetric at ({i}, {j})"));
        }
        Ok(Self::from_fn(dim, |i, j| 0.5 * (rows[i][j] + rows[j][i])))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    /// `alpha·self + beta·other`.
    pub fn lincomb(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        check_dims(self, other)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| alpha * x + beta * y)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lincomb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lincomb(1.0, other, -1.0)
    }

    /// `self · inner · self`, symmetrized.
    pub fn congruence(&self, inner: &Self) -> Result<Self> {
        check_dims(self, inner)?;
        let n = self.dim;
        let t = matmul(n, &inner.data, &self.data);
        let r = matmul(n, &self.data, &t);
        Ok(symmetrize(n, &r))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = CfError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.rows()
    }
}

pub(crate) fn check_dims(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(CfError::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    Ok(())
}

fn matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

fn symmetrize(n: usize, m: &[f64]) -> SymMatrix {
    SymMatrix::from_fn(n, |i, j| 0.5 * (m[i * n + j] + m[j * n + i]))
}

/// `S = Q·diag(eigenvalues)·Qᵀ` with eigenvalues ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Row-major `dim × dim`; column `j` is the eigenvector for `eigenvalues[j]`.
    pub basis: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Q·diag(f(λ))·Qᵀ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.dim();
        let q = &self.basis;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        SymMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| q[i * n + k] * fl[k] * q[j * n + k]).sum()
        })
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map(|l| l)
    }

    /// `‖QQᵀ − I‖_F`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.dim();
        let q = &self.basis;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| q[i * n + k] * q[j * n + k]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                acc += (dot - target).powi(2);
            }
        }
        acc.sqrt()
    }

    /// `‖Q diag(λ) Qᵀ − S‖_F`.
    pub fn reconstruction_residual(&self, s: &SymMatrix) -> f64 {
        let r = self.reconstruct();
        r.data
            .iter()
            .zip(&s.data)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.min_eigenvalue().abs().max(self.max_eigenvalue().abs())
    }
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops to
/// `1e-13·‖S‖_F`.
pub fn jacobi_eigh(s: &SymMatrix) -> Result<EigenDecomposition> {
    jacobi(s, true)
}

/// Eigenvalues only (ascending), skipping the basis accumulation.
pub fn eigenvalues(s: &SymMatrix) -> Result<Vec<f64>> {
    Ok(jacobi(s, false)?.eigenvalues)
}

fn jacobi(s: &SymMatrix, with_basis: bool) -> Result<EigenDecomposition> {
    let n = s.dim;
    let mut a = s.data.clone();
    let mut v = if with_basis {
        SymMatrix::identity(n).data
    } else {
        Vec::new()
    };
    let threshold = JACOBI_REL_TOL * s.frobenius_norm();
    let off_norm = |a: &[f64]| {
        let mut acc = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                acc += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        acc.sqrt()
    };

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - sn * akq;
                    let new_kq = sn * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                if with_basis {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - sn * vkq;
                        v[k * n + q] = sn * vkp + c * vkq;
                    }
                }
            }
        }
    }
    if !converged {
        let off = off_norm(&a);
        if off > threshold {
            return Err(CfError::Convergence {
                sweeps: JACOBI_MAX_SWEEPS,
                off_norm: off,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let basis = if with_basis {
        let mut q = vec![0.0; n * n];
        for (col, &src) in order.iter().enumerate() {
            for k in 0..n {
                q[k * n + col] = v[k * n + src];
            }
        }
        q
    } else {
        Vec::new()
    };
    Ok(EigenDecomposition { eigenvalues, basis })
}

/// `1e-12·(1 + max|λ|)`: eigenvalues at or below this are treated as singular.
pub fn pd_floor(eigenvalues: &[f64]) -> f64 {
    let rho = eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    PD_FLOOR_REL * (1.0 + rho)
}

fn require_pd(eig: &EigenDecomposition) -> Result<()> {
    let floor = pd_floor(&eig.eigenvalues);
    let min_eig = eig.min_eigenvalue();
    if min_eig <= floor {
        return Err(CfError::NotPositiveDefinite { min_eig, floor });
    }
    Ok(())
}

/// Checks positive definiteness against [`pd_floor`].
pub fn check_pd(s: &SymMatrix) -> Result<()> {
    let eig = EigenDecomposition {
        eigenvalues: eigenvalues(s)?,
        basis: Vec::new(),
    };
    require_pd(&eig)
}

/// `S^t = Q·diag(λ^t)·Qᵀ` for positive definite `S`.
pub fn spd_power(s: &SymMatrix, t: f64) -> Result<SymMatrix> {
    let eig = jacobi_eigh(s)?;
    require_pd(&eig)?;
    Ok(eig.map(|l| (t * l.ln()).exp()))
}

pub fn spd_inverse(s: &SymMatrix) -> Result<SymMatrix> {
    let eig = jacobi_eigh(s)?;
    require_pd(&eig)?;
    Ok(eig.map(f64::recip))
}

/// `A ♯_λ B = A^{1/2}(A^{-1/2} B A^{-1/2})^λ A^{1/2}`, evaluated through the
/// two congruences as written.
pub fn geometric_mean(a: &SymMatrix, b: &SymMatrix, lambda: f64) -> Result<SymMatrix> {
    check_dims(a, b)?;
    check_lambda(lambda)?;
    let eig_a = jacobi_eigh(a)?;
    require_pd(&eig_a)?;
    check_pd(b)?;
    if lambda == 0.0 {
        return Ok(a.clone());
    }
    if lambda == 1.0 {
        return Ok(b.clone());
    }
    let a_half = eig_a.map(f64::sqrt);
    let a_neg_half = eig_a.map(|l| 1.0 / l.sqrt());
    let inner = a_neg_half.congruence(b)?;
    let inner_pow = spd_power(&inner, lambda)?;
    a_half.congruence(&inner_pow)
}

/// `((1−λ)A^{-1} + λB^{-1})^{-1}`.
pub fn harmonic_mean(a: &SymMatrix, b: &SymMatrix, lambda: f64) -> Result<SymMatrix> {
    check_dims(a, b)?;
    check_lambda(lambda)?;
    let ai = spd_inverse(a)?;
    let bi = spd_inverse(b)?;
    if lambda == 0.0 {
        return Ok(a.clone());
    }
    if lambda == 1.0 {
        return Ok(b.clone());
    }
    spd_inverse(&ai.lincomb(1.0 - lambda, &bi, lambda)?)
}

/// `(1−λ)A + λB`.
pub fn arithmetic_mean(a: &SymMatrix, b: &SymMatrix, lambda: f64) -> Result<SymMatrix> {
    check_lambda(lambda)?;
    a.lincomb(1.0 - lambda, b, lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LoewnerRelation {
    Leq,
    Geq,
    Equal,
    Incomparable,
}

/// Spectral evidence for the Loewner relation between two matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoewnerVerdict {
    pub relation: LoewnerRelation,
    #[serde(rename = "min_eig_B_minus_A")]
    pub min_eig_b_minus_a: f64,
    #[serde(rename = "min_eig_A_minus_B")]
    pub min_eig_a_minus_b: f64,
    pub tol_used: f64,
}

impl LoewnerVerdict {
    /// `A ≤ B` holds (`LEQ` or `EQUAL`).
    pub fn holds_leq(&self) -> bool {
        matches!(self.relation, LoewnerRelation::Leq | LoewnerRelation::Equal)
    }
}

/// Compares `A` and `B` by the extreme eigenvalues of `B − A`, with
/// tolerance `1e-10·(1 + max(ρ(A), ρ(B)))`.
pub fn loewner_cmp(a: &SymMatrix, b: &SymMatrix) -> Result<LoewnerVerdict> {
    check_dims(a, b)?;
    let diff = eigenvalues(&b.sub(a)?)?;
    let rho = |m: &SymMatrix| -> Result<f64> {
        let e = eigenvalues(m)?;
        Ok(e.iter().fold(0.0f64, |acc, l| acc.max(l.abs())))
    };
    let tol_used = PSD_TOL_REL * (1.0 + rho(a)?.max(rho(b)?));
    let min_eig_b_minus_a = diff.first().copied().unwrap_or(0.0);
    let min_eig_a_minus_b = -diff.last().copied().unwrap_or(0.0);
    let leq = min_eig_b_minus_a >= -tol_used;
    let geq = min_eig_a_minus_b >= -tol_used;
    let relation = match (leq, geq) {
        (true, true) => LoewnerRelation::Equal,
        (true, false) => LoewnerRelation::Leq,
        (false, true) => LoewnerRelation::Geq,
        (false, false) => LoewnerRelation::Incomparable,
    };
    Ok(LoewnerVerdict {
        relation,
        min_eig_b_minus_a,
        min_eig_a_minus_b,
        tol_used,
    })
}

/// Positive semidefiniteness of `S` against `1e-10·(1 + ρ(S))`.
pub fn is_psd(s: &SymMatrix) -> Result<(bool, f64)> {
    let e = eigenvalues(s)?;
    let rho = e.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    let min = e.first().copied().unwrap_or(0.0);
    Ok((min >= -PSD_TOL_REL * (1.0 + rho), min))
}
