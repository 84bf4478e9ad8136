//! Dense kernels and the two inner learners: masked least squares and
//! masked multiplicative-update NMF.
//!
//! Losses are reported unsquared everywhere (`‖·‖₂` for vectors, Frobenius
//! for matrices).

mod lstsq;
mod matrix;
mod nmf;
mod norms;
mod rng;

pub use lstsq::{lstsq, residual_norm, solve_least_squares, LeastSquaresFit};
pub use matrix::{euclidean_norm, Matrix, Vector};
pub use nmf::{
    nmf_multiplicative, nmf_multiplicative_observed, reconstruction_loss, NmfFit, DENOMINATOR_EPS,
};
pub use norms::{lp_distance, lp_norm, masked_l0_cost, masked_lp_norm, norm_l0};
pub use rng::{derive_seed, Rng};
