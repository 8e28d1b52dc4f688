//! Savitzky-Golay least-squares smoothing.
//!
//! Interior samples are replaced by the value at the window center of the
//! least-squares polynomial fitted over the centered window. The first and
//! last `(window - 1) / 2` samples come from evaluating the polynomial
//! fitted to the first (respectively last) full window at their offsets, so
//! a signal that *is* a polynomial of the configured order is reproduced
//! exactly everywhere.

use crate::data::SignalChannel;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgConfig {
    /// Odd window length in samples, at least 5.
    pub window_length: usize,
    /// Polynomial order of the fit; must be below the window length.
    pub poly_order: usize,
}

impl Default for SgConfig {
    /// Third-order fit over 11 samples: at 256 Hz this flattens sensor
    /// jitter without blunting ~1 Hz PPG pulses.
    fn default() -> Self {
        SgConfig {
            window_length: 11,
            poly_order: 3,
        }
    }
}

impl SgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_length < 5 || self.window_length.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "Savitzky-Golay window must be odd and >= 5, got {}",
                self.window_length
            )));
        }
        if self.poly_order >= self.window_length {
            return Err(Error::Config(format!(
                "Savitzky-Golay polynomial order {} must be below window length {}",
                self.poly_order, self.window_length
            )));
        }
        Ok(())
    }

    fn half(&self) -> usize {
        self.window_length / 2
    }
}

/// Smooth a channel, preserving its length, name and rate.
pub fn savitzky_golay(signal: &SignalChannel, cfg: &SgConfig) -> Result<SignalChannel> {
    cfg.validate()?;
    let n = signal.len();
    let w = cfg.window_length;
    if n < w {
        return Err(Error::Config(format!(
            "signal '{}' has {n} samples, shorter than the {w}-sample window",
            signal.name
        )));
    }
    let h = cfg.half();
    let x = &signal.samples;
    let mut out = vec![0.0; n];

    // Interior: fixed convolution with the center-evaluation weights.
    let center = evaluation_weights(w, cfg.poly_order, 0.0);
    for i in h..n - h {
        let mut acc = 0.0;
        for (j, wj) in center.iter().enumerate() {
            acc += wj * x[i - h + j];
        }
        out[i] = acc;
    }

    // Leading edge: polynomial fitted to the first full window, evaluated at
    // offsets -h..-1 from that window's center.
    for i in 0..h {
        let t = i as f64 - h as f64;
        let wts = evaluation_weights(w, cfg.poly_order, t);
        out[i] = wts.iter().zip(&x[0..w]).map(|(a, b)| a * b).sum();
    }
    // Trailing edge: same with the last full window, offsets 1..=h.
    for i in n - h..n {
        let t = i as f64 - (n - 1 - h) as f64;
        let wts = evaluation_weights(w, cfg.poly_order, t);
        out[i] = wts.iter().zip(&x[n - w..n]).map(|(a, b)| a * b).sum();
    }

    SignalChannel::new(signal.name.clone(), signal.sample_rate, out)
}

/// Interior (center-evaluation) convolution weights for a window/order pair.
pub fn sg_interior_weights(window_length: usize, poly_order: usize) -> Result<Vec<f64>> {
    let cfg = SgConfig {
        window_length,
        poly_order,
    };
    cfg.validate()?;
    Ok(evaluation_weights(window_length, poly_order, 0.0))
}

/// Weights w_j such that p(t) = sum_j w_j y_j, where p is the least-squares
/// polynomial of the given order through the window samples y at offsets
/// j - h, j = 0..window.
fn evaluation_weights(window: usize, order: usize, t: f64) -> Vec<f64> {
    let h = (window / 2) as f64;
    let m = order + 1;

    // Normal-equations matrix M_ab = sum_j t_j^(a+b).
    let mut moments = vec![0.0; 2 * order + 1];
    for j in 0..window {
        let tj = j as f64 - h;
        let mut p = 1.0;
        for moment in moments.iter_mut() {
            *moment += p;
            p *= tj;
        }
    }
    let mut mat = vec![vec![0.0; m]; m];
    for a in 0..m {
        mat[a].copy_from_slice(&moments[a..a + m]);
    }

    // Solve M c_j = v(t_j-th basis) column by column is equivalent to one
    // solve against the t-powers vector: w_j = v(t)^T M^-1 [1, t_j, t_j^2..].
    let mut rhs = vec![0.0; m];
    let mut p = 1.0;
    for r in rhs.iter_mut() {
        *r = p;
        p *= t;
    }
    let q = solve(mat, rhs);

    (0..window)
        .map(|j| {
            let tj = j as f64 - h;
            let mut p = 1.0;
            let mut acc = 0.0;
            for qk in &q {
                acc += qk * p;
                p *= tj;
            }
            acc
        })
        .collect()
}

/// Gaussian elimination with partial pivoting; systems here are at most
/// (order+1) x (order+1) and well conditioned for practical windows.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let diag = a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / diag;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}
