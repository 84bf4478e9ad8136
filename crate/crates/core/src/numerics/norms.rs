use crate::error::{ensure_len, Result};

/// Number of entries with `|v_i| > eps`.
pub fn norm_l0(v: &[f64], eps: f64) -> usize {
    debug_assert!(eps >= 0.0);
    v.iter().filter(|x| x.abs() > eps).count()
}

/// `‖y ∘ t̄‖₀`: entries of `y` that are nonzero (beyond `eps`) where the
/// binary pattern `t` is zero.
pub fn masked_l0_cost(y: &[f64], t: &[f64], eps: f64) -> Result<usize> {
    ensure_len("masked l0 cost", y.len(), t.len())?;
    Ok(y.iter()
        .zip(t)
        .filter(|(yi, ti)| **ti == 0.0 && yi.abs() > eps)
        .count())
}

/// `‖y ∘ t̄‖_p`, the size of the part of `y` that falls outside the binary
/// pattern `t`.
pub fn masked_lp_norm(y: &[f64], t: &[f64], p: f64) -> Result<f64> {
    ensure_len("masked lp norm", y.len(), t.len())?;
    Ok(lp_norm_iter(
        y.iter()
            .zip(t)
            .map(|(yi, ti)| if *ti == 0.0 { *yi } else { 0.0 }),
        p,
    ))
}

/// `‖y − t‖_p`. `p = 0` counts differing coordinates, `p = ∞` is the max norm.
pub fn lp_distance(y: &[f64], t: &[f64], p: f64) -> Result<f64> {
    ensure_len("lp distance", y.len(), t.len())?;
    Ok(lp_norm_iter(y.iter().zip(t).map(|(a, b)| a - b), p))
}

pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    lp_norm_iter(v.iter().copied(), p)
}

fn lp_norm_iter(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    assert!(p == 0.0 || p >= 1.0, "p must be 0 or >= 1, got {p}");
    if p == 0.0 {
        values.filter(|d| *d != 0.0).count() as f64
    } else if p.is_infinite() {
        values.fold(0.0, |m, d| m.max(d.abs()))
    } else if p == 1.0 {
        values.map(f64::abs).sum()
    } else {
        // scaled so tiny or huge entries neither underflow nor overflow
        let values: Vec<f64> = values.map(f64::abs).collect();
        let scale = values.iter().fold(0.0, |m: f64, d| m.max(*d));
        if scale == 0.0 {
            return 0.0;
        }
        let sum: f64 = if p == 2.0 {
            values.iter().map(|d| (d / scale) * (d / scale)).sum()
        } else {
            values.iter().map(|d| (d / scale).powf(p)).sum()
        };
        scale
            * if p == 2.0 {
                sum.sqrt()
            } else {
                sum.powf(1.0 / p)
            }
    }
}
