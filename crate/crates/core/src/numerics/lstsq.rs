//! Rank-revealing least squares.
//!
//! Householder QR with column pivoting, followed (on rank deficiency) by a
//! second QR of the leading trapezoid's transpose, i.e. a complete
//! orthogonal decomposition. The result is the minimum-norm minimizer of
//! `‖A x − b‖₂`.

use super::matrix::{euclidean_norm, Matrix, Vector};
use crate::error::{ensure_len, Error, Result};

/// Column-major working copy with the Householder vectors stored below the
/// diagonal, LAPACK style (`v[0] = 1` implicit).
struct Householder {
    m: usize,
    a: Vec<f64>,
    tau: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl Householder {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[j * self.m + i]
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.a[j * self.m..(j + 1) * self.m]
    }

    /// Factor `a` (column-major, m×n). With `pivot`, columns are permuted so
    /// that the diagonal of R is non-increasing in magnitude and the
    /// numerical rank is detected.
    fn factor(m: usize, n: usize, mut a: Vec<f64>, pivot: bool) -> Self {
        let steps = m.min(n);
        let mut tau = vec![0.0; steps];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut first_diag = 0.0f64;
        let mut rank = steps;
        let tol = f64::EPSILON * (m.max(n) as f64);

        for k in 0..steps {
            if pivot {
                // Recompute trailing column norms each step; sizes here are
                // small and this avoids norm-downdating cancellation.
                let (mut best, mut best_norm) = (k, -1.0);
                for j in k..n {
                    let c = &a[j * m + k..(j + 1) * m];
                    let nrm = euclidean_norm(c);
                    if nrm > best_norm {
                        best = j;
                        best_norm = nrm;
                    }
                }
                if best != k {
                    for i in 0..m {
                        a.swap(k * m + i, best * m + i);
                    }
                    perm.swap(k, best);
                }
                if k == 0 {
                    first_diag = best_norm;
                }
                if best_norm <= tol * first_diag || best_norm == 0.0 {
                    rank = k;
                    break;
                }
            }

            let (t, beta) = {
                let col = &mut a[k * m + k..(k + 1) * m];
                make_reflector(col)
            };
            tau[k] = t;
            if t != 0.0 {
                for j in k + 1..n {
                    let (left, right) = a.split_at_mut(j * m);
                    let v = &left[k * m + k..(k + 1) * m];
                    let c = &mut right[k..m];
                    apply_reflector(v, t, c);
                }
            }
            a[k * m + k] = beta;
        }

        Householder {
            m,
            a,
            tau,
            perm,
            rank,
        }
    }

    /// `b ← Qᵀ b` using the first `count` reflectors.
    fn apply_qt(&self, b: &mut [f64], count: usize) {
        for k in 0..count {
            if self.tau[k] != 0.0 {
                let v = &self.col(k)[k..];
                apply_reflector(v, self.tau[k], &mut b[k..]);
            }
        }
    }

    /// `b ← Q b` using the first `count` reflectors.
    fn apply_q(&self, b: &mut [f64], count: usize) {
        for k in (0..count).rev() {
            if self.tau[k] != 0.0 {
                let v = &self.col(k)[k..];
                apply_reflector(v, self.tau[k], &mut b[k..]);
            }
        }
    }
}

/// Builds `H = I − τ v vᵀ` with `H x = β e₁`. On return `x[1..]` holds
/// `v[1..]`; the caller stores `β` at `x[0]`.
fn make_reflector(x: &mut [f64]) -> (f64, f64) {
    let alpha = x[0];
    let sigma: f64 = x[1..].iter().map(|v| v * v).sum();
    if sigma == 0.0 {
        return (0.0, alpha);
    }
    let norm = (alpha * alpha + sigma).sqrt();
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let v0 = alpha - beta;
    for v in &mut x[1..] {
        *v /= v0;
    }
    ((beta - alpha) / beta, beta)
}

/// `c ← (I − τ v vᵀ) c` where `v[0]` is taken to be 1.
#[inline]
fn apply_reflector(v: &[f64], tau: f64, c: &mut [f64]) {
    let mut s = c[0];
    for (vi, ci) in v[1..].iter().zip(&c[1..]) {
        s += vi * ci;
    }
    s *= tau;
    c[0] -= s;
    for (vi, ci) in v[1..].iter().zip(&mut c[1..]) {
        *ci -= s * vi;
    }
}

/// Minimum-norm least squares solution of `A x ≈ b`.
pub fn lstsq(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    ensure_len("least squares rhs", m, b.len())?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let colmajor: Vec<f64> = (0..n)
        .flat_map(|j| (0..m).map(move |i| (i, j)))
        .map(|ij| a[ij])
        .collect();
    let qr = Householder::factor(m, n, colmajor, true);
    let r = qr.rank;
    let mut x = vec![0.0; n];
    if r == 0 {
        return Ok(x);
    }

    let mut c = b.to_vec();
    qr.apply_qt(&mut c, r);
    c.truncate(r);

    let z = if r == n {
        back_substitute(|i, j| qr.at(i, j), &c)
    } else {
        // S = R[0..r, 0..n] is r×n upper trapezoidal. Factor Sᵀ = Q₂R₂,
        // so S = R₂ᵀQ₂ᵀ and the minimum-norm solution of S z = c is
        // z = Q₂ [R₂⁻ᵀ c; 0].
        let st: Vec<f64> = (0..r)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .map(|(i, j)| if j <= i { qr.at(j, i) } else { 0.0 })
            .collect();
        let lq = Householder::factor(n, r, st, false);
        let w = forward_substitute_transposed(|i, j| lq.at(i, j), &c);
        let mut z = vec![0.0; n];
        z[..r].copy_from_slice(&w);
        lq.apply_q(&mut z, r);
        z
    };

    for (k, &p) in qr.perm.iter().enumerate() {
        x[p] = z[k];
    }
    Ok(x)
}

/// Solves `R x = c` with `R` upper triangular, `r(i, j)` its entries.
fn back_substitute(r: impl Fn(usize, usize) -> f64, c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = c[i];
        for j in i + 1..n {
            s -= r(i, j) * x[j];
        }
        x[i] = s / r(i, i);
    }
    x
}

/// Solves `Rᵀ x = c` with `R` upper triangular.
fn forward_substitute_transposed(r: impl Fn(usize, usize) -> f64, c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut s = c[i];
        for j in 0..i {
            s -= r(j, i) * x[j];
        }
        x[i] = s / r(i, i);
    }
    x
}

/// Result of a masked regression fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresFit {
    /// Full-length coefficients; zero wherever the mask is off.
    pub theta: Vector,
    /// `‖X θ − y‖₂` (unsquared).
    pub loss: f64,
}

/// Minimizes `‖X(θ ∘ mask) − y‖₂` over θ, solving on the unmasked columns
/// only. Rank-deficient designs get the minimum-norm solution.
pub fn solve_least_squares(x: &Matrix, y: &[f64], mask: &[bool]) -> Result<LeastSquaresFit> {
    if x.rows() == 0 {
        return Err(Error::Validation(
            "least squares needs at least one sample".into(),
        ));
    }
    ensure_len("least squares targets", x.rows(), y.len())?;
    ensure_len("least squares mask", x.cols(), mask.len())?;
    let active: Vec<usize> = mask
        .iter()
        .enumerate()
        .filter_map(|(j, &on)| on.then_some(j))
        .collect();
    let mut theta = vec![0.0; x.cols()];
    if !active.is_empty() {
        let sub = x.select_columns(&active);
        let coef = lstsq(&sub, y)?;
        for (&j, c) in active.iter().zip(coef) {
            theta[j] = c;
        }
    }
    let loss = residual_norm(x, &theta, y)?;
    Ok(LeastSquaresFit {
        theta: Vector::from_raw(theta),
        loss,
    })
}

/// `‖X θ − y‖₂`
pub fn residual_norm(x: &Matrix, theta: &[f64], y: &[f64]) -> Result<f64> {
    ensure_len("residual targets", x.rows(), y.len())?;
    let pred = x.mul_vec(theta)?;
    Ok(pred
        .iter()
        .zip(y)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        .sqrt())
}
