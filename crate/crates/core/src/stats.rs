//! Means, batch-means error bars and least-squares fits.

use serde::{Deserialize, Serialize};

/// Number of batches used for Monte Carlo error bars.
pub const BATCHES: usize = 20;

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Standard error of the mean by batch means.
///
/// Samples are cut into `min(BATCHES, n)` contiguous batches of nearly equal
/// size; the error is the spread of the batch means over `√batches`. Fewer
/// than two samples give 0.
pub fn batch_stderr(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let b = BATCHES.min(n);
    let means: Vec<f64> = (0..b)
        .map(|k| {
            let lo = k * n / b;
            let hi = (k + 1) * n / b;
            mean(&x[lo..hi])
        })
        .collect();
    let m = mean(&means);
    let var = means.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - slope * a - intercept;
            e * e
        })
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
        rms: (ss_res / n as f64).sqrt(),
    })
}

/// Fit of `value ≈ C e^{-α distance}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub alpha: f64,
    pub c: f64,
    pub r_squared: f64,
    /// Set when some value was not positive, so no log-linear fit exists.
    pub degenerate: bool,
}

/// Least squares on `ln(value)` against distance.
pub fn exp_decay_fit(distances: &[f64], values: &[f64]) -> DecayFit {
    let degenerate = DecayFit {
        alpha: 0.0,
        c: 0.0,
        r_squared: 0.0,
        degenerate: true,
    };
    if values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return degenerate;
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    match linear_fit(distances, &logs) {
        Some(f) => DecayFit {
            alpha: -f.slope,
            c: f.intercept.exp(),
            r_squared: f.r_squared,
            degenerate: false,
        },
        None => degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exponential() {
        let d = [4.0f64, 6.0, 8.0, 10.0];
        let v: Vec<f64> = d.iter().map(|x| 3.0 * (-0.4 * x).exp()).collect();
        let f = exp_decay_fit(&d, &v);
        assert!((f.alpha - 0.4).abs() < 1e-12 && (f.c - 3.0).abs() < 1e-12);
        assert!(exp_decay_fit(&d, &[1.0, 0.0, 1.0, 1.0]).degenerate);
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(batch_stderr(&[2.0; 40]), 0.0);
        let x: Vec<f64> = (0..40).map(|i| (i % 3) as f64).collect();
        assert!(batch_stderr(&x) > 0.0);
    }
}
