//! Empirical quantiles with linear interpolation between order statistics.
//!
//! For sorted values `x_0 <= ... <= x_{n-1}` the `p`-quantile is
//! `x_k + (h - k)(x_{k+1} - x_k)` with `h = (n - 1) p` and `k = floor(h)`
//! (type 7 in the Hyndman-Fan classification).

use alloc::vec::Vec;

use super::HdrError;

/// Quantile of already sorted values. `p` is clamped to `[0, 1]`; an empty
/// slice gives NaN.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let k = h.floor() as usize;
    if k + 1 >= n {
        return sorted[n - 1];
    }
    sorted[k] + (h - k as f64) * (sorted[k + 1] - sorted[k])
}

pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

/// The `tau`-quantile of density values over the sample: the threshold of
/// the estimated region `{f_n >= threshold}`.
pub fn hyndman_threshold(values: &[f64], tau: f64) -> Result<f64, HdrError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(HdrError::InvalidTau(tau));
    }
    if values.is_empty() || values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(HdrError::InvalidValues);
    }
    Ok(quantile(values, tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_convention() {
        assert_eq!(hyndman_threshold(&[4.0, 2.0, 1.0, 3.0], 0.5).unwrap(), 2.5);
        assert_eq!(hyndman_threshold(&[0.7; 9], 0.13).unwrap(), 0.7);
        assert_eq!(quantile_sorted(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.25), 2.0);
        assert_eq!(quantile_sorted(&[1.0, 2.0], 1.0), 2.0);
        assert!(hyndman_threshold(&[1.0], 1.0).is_err());
        assert!(hyndman_threshold(&[-1.0], 0.5).is_err());
    }
}
