//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson).
//!
//! Used for the transport maps and tabulated potentials. When derivative
//! values are supplied they are trusted as exact and used as-is, keeping
//! full fourth-order accuracy. Otherwise derivatives are estimated from
//! weighted secant slopes and clamped by the Fritsch–Carlson condition
//! (`alpha^2 + beta^2 <= 9`) so the interpolant cannot overshoot between
//! nodes of monotone data.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl Pchip {
    /// Build an interpolant through `(xs, ys)`. `xs` must be strictly
    /// increasing and finite. `derivs`, if given, supplies exact slopes.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, derivs: Option<Vec<f64>>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::Precondition(format!(
                "pchip needs >= 2 nodes with matching values, got {} / {}",
                n,
                ys.len()
            )));
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Precondition(format!(
                    "pchip nodes must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Precondition("pchip nodes must be finite".into()));
        }
        let slopes: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let ds = match derivs {
            Some(d) => {
                if d.len() != n {
                    return Err(Error::Precondition(
                        "pchip derivative count must match nodes".into(),
                    ));
                }
                if d.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Precondition("pchip derivatives must be finite".into()));
                }
                d
            }
            None => {
                let mut ds = estimate_slopes(&xs, &slopes);
                clamp_fritsch_carlson(&slopes, &mut ds);
                ds
            }
        };
        Ok(Pchip { xs, ys, ds })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().expect("non-empty"))
    }

    fn segment(&self, x: f64) -> usize {
        // partition_point returns the first index with node > x.
        let k = self.xs.partition_point(|&t| t <= x);
        k.clamp(1, self.xs.len() - 1) - 1
    }

    /// Evaluate. Outside the node range the end cubic is extended, which
    /// callers only rely on over distances comparable to one spacing.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.ds[i] * h, self.ds[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * (t3 - t2)
    }

    /// Derivative of the interpolant.
    pub fn eval_deriv(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.ds[i], self.ds[i + 1]);
        let t2 = t * t;
        y0 * (6.0 * t2 - 6.0 * t) / h
            + d0 * (3.0 * t2 - 4.0 * t + 1.0)
            + y1 * (-6.0 * t2 + 6.0 * t) / h
            + d1 * (3.0 * t2 - 2.0 * t)
    }
}

/// Weighted-harmonic-mean slope estimates (the classic PCHIP choice).
fn estimate_slopes(xs: &[f64], slopes: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n == 2 {
        return vec![slopes[0]; 2];
    }
    let mut ds = vec![0.0; n];
    for i in 1..n - 1 {
        let (s0, s1) = (slopes[i - 1], slopes[i]);
        if s0 * s1 <= 0.0 {
            ds[i] = 0.0;
        } else {
            let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
            let (w0, w1) = (2.0 * h1 + h0, h1 + 2.0 * h0);
            ds[i] = (w0 + w1) / (w0 / s0 + w1 / s1);
        }
    }
    ds[0] = end_slope(xs[1] - xs[0], xs[2] - xs[1], slopes[0], slopes[1]);
    ds[n - 1] = end_slope(
        xs[n - 1] - xs[n - 2],
        xs[n - 2] - xs[n - 3],
        slopes[n - 2],
        slopes[n - 3],
    );
    ds
}

fn end_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d * s0 <= 0.0 {
        0.0
    } else if s0 * s1 < 0.0 && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}

/// Scale derivative pairs so that (alpha, beta) stays inside the
/// Fritsch–Carlson monotonicity region.
fn clamp_fritsch_carlson(slopes: &[f64], ds: &mut [f64]) {
    for i in 0..slopes.len() {
        let s = slopes[i];
        if s == 0.0 {
            ds[i] = 0.0;
            ds[i + 1] = 0.0;
            continue;
        }
        let alpha = ds[i] / s;
        let beta = ds[i + 1] / s;
        if alpha < 0.0 {
            ds[i] = 0.0;
        }
        if beta < 0.0 {
            ds[i + 1] = 0.0;
        }
        let r = alpha.max(0.0).powi(2) + beta.max(0.0).powi(2);
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            ds[i] = tau * alpha.max(0.0) * s;
            ds[i + 1] = tau * beta.max(0.0) * s;
        }
    }
}
