//! Masked non-negative matrix factorization by multiplicative updates.
//!
//! Minimizes `‖A − (W ∘ M) H‖_F` for a fixed binary mask `M`. The standard
//! Frobenius multiplicative rules are used:
//!
//! ```text
//! H ← H ∘ (Wᵀ A) / (Wᵀ W H + ε)
//! W ← W ∘ (A Hᵀ) / (W H Hᵀ + ε),   then   W ← W ∘ M
//! ```
//!
//! A zero in `W` stays zero under the multiplicative rule, so a masked
//! initialization alone would keep the mask; the explicit projection after
//! each `W` step makes that exact regardless of rounding.

use super::matrix::Matrix;
use super::rng::Rng;
use crate::error::{ensure_len, Error, Result};

/// Additive constant in the update denominators.
pub const DENOMINATOR_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NmfFit {
    /// Already multiplied by the mask.
    pub w: Matrix,
    pub h: Matrix,
    /// `‖A − W H‖_F` (unsquared).
    pub loss: f64,
}

/// Checks a binary `n × k` mask.
fn check_mask(mask: &Matrix, n: usize, k: usize) -> Result<()> {
    ensure_len("nmf mask rows", n, mask.rows())?;
    ensure_len("nmf mask cols", k, mask.cols())?;
    if mask.as_slice().iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Domain("nmf mask entries must be 0 or 1".into()));
    }
    Ok(())
}

pub fn nmf_multiplicative(
    a: &Matrix,
    k: usize,
    mask: &Matrix,
    iters: usize,
    rng: &mut Rng,
) -> Result<NmfFit> {
    nmf_multiplicative_observed(a, k, mask, iters, rng, |_, _, _| {})
}

/// Same as [`nmf_multiplicative`], but calls `observe(iteration, W, H)` on
/// the initial point (iteration 0) and after every update.
pub fn nmf_multiplicative_observed(
    a: &Matrix,
    k: usize,
    mask: &Matrix,
    iters: usize,
    rng: &mut Rng,
    mut observe: impl FnMut(usize, &Matrix, &Matrix),
) -> Result<NmfFit> {
    let (n, m) = (a.rows(), a.cols());
    if k == 0 {
        return Err(Error::Validation("nmf rank k must be at least 1".into()));
    }
    if a.min_value() < 0.0 {
        return Err(Error::Domain(
            "nmf input matrix has a negative entry".into(),
        ));
    }
    check_mask(mask, n, k)?;

    let mut w = Matrix::from_fn(n, k, |_, _| rng.next_f64_open_closed());
    let mut h = Matrix::from_fn(k, m, |_, _| rng.next_f64_open_closed());
    project(&mut w, mask);
    observe(0, &w, &h);

    for it in 1..=iters {
        // H step
        let wta = w.t_matmul(a)?;
        let wtw = w.t_matmul(&w)?;
        let wtwh = wtw.matmul(&h)?;
        multiplicative_step(&mut h, &wta, &wtwh);

        // W step
        let aht = a.matmul_t(&h)?;
        let hht = h.matmul_t(&h)?;
        let whht = w.matmul(&hht)?;
        multiplicative_step(&mut w, &aht, &whht);
        project(&mut w, mask);

        observe(it, &w, &h);
    }

    let loss = reconstruction_loss(a, &w, &h)?;
    Ok(NmfFit { w, h, loss })
}

/// `‖A − W H‖_F`
pub fn reconstruction_loss(a: &Matrix, w: &Matrix, h: &Matrix) -> Result<f64> {
    a.frobenius_distance(&w.matmul(h)?)
}

#[inline]
fn multiplicative_step(x: &mut Matrix, numer: &Matrix, denom: &Matrix) {
    for ((v, &num), &den) in x
        .data_mut()
        .iter_mut()
        .zip(numer.as_slice())
        .zip(denom.as_slice())
    {
        *v *= num / (den + DENOMINATOR_EPS);
    }
}

#[inline]
fn project(w: &mut Matrix, mask: &Matrix) {
    for (v, &keep) in w.data_mut().iter_mut().zip(mask.as_slice()) {
        if keep == 0.0 {
            *v = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planted_rank_one() -> Matrix {
        let w = [0.5, 1.0, 2.0, 0.25];
        let h = [1.0, 3.0, 0.2, 0.7, 1.5];
        Matrix::from_fn(4, 5, |i, j| w[i] * h[j])
    }

    #[test]
    fn recovers_rank_one() {
        let a = planted_rank_one();
        let fit =
            nmf_multiplicative(&a, 1, &Matrix::filled(4, 1, 1.0), 500, &mut Rng::new(1)).unwrap();
        assert!(fit.loss <= 1e-6 * a.frobenius_norm(), "loss {}", fit.loss);
    }

    #[test]
    fn zero_mask_column_stays_zero() {
        let a = planted_rank_one();
        let mut mask = Matrix::filled(4, 2, 1.0);
        for i in 0..4 {
            mask[(i, 1)] = 0.0;
        }
        nmf_multiplicative_observed(&a, 2, &mask, 50, &mut Rng::new(5), |_, w, _| {
            assert!((0..4).all(|i| w[(i, 1)] == 0.0));
        })
        .unwrap();
    }

    #[test]
    fn no_iterations_returns_masked_init() {
        let a = planted_rank_one();
        let mut mask = Matrix::filled(4, 2, 1.0);
        mask[(0, 0)] = 0.0;
        let fit = nmf_multiplicative(&a, 2, &mask, 0, &mut Rng::new(9)).unwrap();

        let mut rng = Rng::new(9);
        let w0 = Matrix::from_fn(4, 2, |_, _| rng.next_f64_open_closed());
        let h0 = Matrix::from_fn(2, 5, |_, _| rng.next_f64_open_closed());
        let w0 = w0.hadamard(&mask).unwrap();
        assert_eq!(fit.w, w0);
        assert_eq!(fit.h, h0);
        assert_eq!(fit.loss, reconstruction_loss(&a, &w0, &h0).unwrap());
    }

    #[test]
    fn rejects_negative_input() {
        let mut a = planted_rank_one();
        a[(1, 1)] = -0.1;
        let err = nmf_multiplicative(&a, 1, &Matrix::filled(4, 1, 1.0), 1, &mut Rng::new(0));
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_bad_mask() {
        let a = planted_rank_one();
        assert!(
            nmf_multiplicative(&a, 1, &Matrix::filled(4, 1, 0.5), 1, &mut Rng::new(0)).is_err()
        );
        assert!(
            nmf_multiplicative(&a, 2, &Matrix::filled(4, 1, 1.0), 1, &mut Rng::new(0)).is_err()
        );
    }
}
