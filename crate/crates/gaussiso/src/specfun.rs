//! Gaussian CDF/tail functions and their inverses.
//!
//! Two closely related integrals appear everywhere in this crate:
//!
//! * `gauss_cdf(y)`  = `(2*pi)^(-1/2) * Integral_{-inf}^{y} exp(-t^2/2) dt`
//! * `gauss_tail(t)` = `Integral_{t}^{+inf} exp(-s^2/2) ds`
//!
//! `gauss_tail` is the *unnormalized* upper tail, so the two are linked by
//! `gauss_tail(t) = sqrt(2*pi) * (1 - gauss_cdf(t))`. Both are evaluated
//! through `erfc`, which keeps full relative accuracy in the far tails; the
//! inverses use a rational initial guess polished by a bisection-safeguarded
//! Newton iteration on the bracket `[-40, 40]`.

use crate::error::{Error, Result};

/// `sqrt(2*pi)`, the total mass of `exp(-t^2/2)` on the line.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_2;

/// `sqrt(pi/2)`, the value of `gauss_tail(0)`.
pub const SQRT_PI_OVER_2: f64 = 1.253_314_137_315_500_1;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Shared accuracy targets for iterative routines.
///
/// `abs_tol` and `rel_tol` must lie in `(0, 1)` and `max_iter` must be at
/// least 1; [`Tolerance::new`] enforces this. The default asks for an
/// absolute residual of `1e-12`, a relative residual of `1e-10`, and allows
/// 200 iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol < 1.0) || !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::Domain(format!(
                "tolerances must lie in (0, 1), got abs={abs_tol:e} rel={rel_tol:e}"
            )));
        }
        if max_iter == 0 {
            return Err(Error::Domain("max_iter must be >= 1".into()));
        }
        Ok(Tolerance {
            abs_tol,
            rel_tol,
            max_iter,
        })
    }

    /// Scale both residual targets by `factor` (> 0), keeping the budget.
    pub fn scaled(&self, factor: f64) -> Tolerance {
        Tolerance {
            abs_tol: (self.abs_tol * factor).clamp(f64::MIN_POSITIVE, 0.5),
            rel_tol: (self.rel_tol * factor).clamp(f64::MIN_POSITIVE, 0.5),
            max_iter: self.max_iter,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_iter: 200,
        }
    }
}

/// Standard Gaussian density `exp(-y^2/2) / sqrt(2*pi)`.
#[inline]
pub fn gauss_pdf(y: f64) -> f64 {
    (-0.5 * y * y).exp() / SQRT_2PI
}

#[inline]
pub(crate) fn cdf_raw(y: f64) -> f64 {
    // erfc keeps relative accuracy on the small side; the complementary
    // branch avoids evaluating `1 - tiny`.
    0.5 * libm::erfc(-y * FRAC_1_SQRT_2)
}

#[inline]
pub(crate) fn tail_raw(t: f64) -> f64 {
    SQRT_PI_OVER_2 * libm::erfc(t * FRAC_1_SQRT_2)
}

/// Standard Gaussian CDF. Accepts the extended reals: `-inf -> 0`,
/// `+inf -> 1`. `NaN` is a domain error.
pub fn gauss_cdf(y: f64) -> Result<f64> {
    if y.is_nan() {
        return Err(Error::Domain("gauss_cdf: NaN argument".into()));
    }
    if y == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if y == f64::INFINITY {
        return Ok(1.0);
    }
    Ok(cdf_raw(y))
}

/// Unnormalized Gaussian upper tail. Accepts the extended reals:
/// `-inf -> sqrt(2*pi)`, `+inf -> 0`. `NaN` is a domain error.
pub fn gauss_tail(t: f64) -> Result<f64> {
    if t.is_nan() {
        return Err(Error::Domain("gauss_tail: NaN argument".into()));
    }
    if t == f64::NEG_INFINITY {
        return Ok(SQRT_2PI);
    }
    if t == f64::INFINITY {
        return Ok(0.0);
    }
    Ok(tail_raw(t))
}

/// Rational approximation to the inverse CDF for `p <= 1/2`
/// (Abramowitz & Stegun 26.2.23 form); absolute error below `4.5e-4`,
/// which Newton then contracts to machine precision.
fn inv_cdf_guess(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p <= 0.5);
    let t = (-2.0 * p.ln()).sqrt();
    let num = 2.515517 + t * (0.802853 + t * 0.010328);
    let den = 1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308));
    -(t - num / den)
}

/// Safeguarded Newton on a monotone increasing `f` with known bracket
/// `[lo, hi]` around the root; `target_abs` is the residual goal.
pub(crate) fn newton_bracketed(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut x: f64,
    mut lo: f64,
    mut hi: f64,
    target_abs: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut fx = f(x);
    for _ in 0..max_iter {
        if fx.abs() <= target_abs {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= 1e-15 * (1.0 + x.abs()) {
            return Ok(x);
        }
        let d = df(x);
        let step = fx / d;
        let mut next = x - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        x = next;
        fx = f(x);
    }
    if fx.abs() <= target_abs {
        Ok(x)
    } else {
        Err(Error::Convergence(format!(
            "inverse iteration stalled at x={x:.6e} with residual {:.3e}",
            fx.abs()
        )))
    }
}

/// Inverse of [`gauss_cdf`] for `p` strictly inside `(0, 1)`.
///
/// The residual satisfies `|gauss_cdf(y) - p| <= tol.abs_tol`, and the
/// iteration actually targets `rel_tol * p` on the small side so that the
/// round trip `gauss_cdf_inv(gauss_cdf(y))` stays accurate deep in the tail.
pub fn gauss_cdf_inv(p: f64, tol: &Tolerance) -> Result<f64> {
    if !p.is_finite() || p <= 0.0 || p >= 1.0 {
        return Err(Error::Domain(format!(
            "gauss_cdf_inv: p must lie in (0, 1), got {p:e}"
        )));
    }
    // Mirror onto the lower tail, where erfc carries relative accuracy.
    let (q, sign) = if p <= 0.5 { (p, 1.0) } else { (1.0 - p, -1.0) };
    let target = (tol.rel_tol * q).min(tol.abs_tol).max(1e-300);
    let x0 = inv_cdf_guess(q);
    let y = newton_bracketed(
        |y| cdf_raw(y) - q,
        gauss_pdf,
        x0.clamp(-39.9, 39.9),
        -40.0,
        40.0,
        target,
        tol.max_iter,
    )?;
    Ok(sign * y)
}

/// Inverse of [`gauss_tail`] for `m` strictly inside `(0, sqrt(2*pi))`.
///
/// Satisfies `|gauss_tail(t) - m| <= tol.abs_tol` with the same
/// relative-accuracy refinement as [`gauss_cdf_inv`].
pub fn gauss_tail_inv(m: f64, tol: &Tolerance) -> Result<f64> {
    if !m.is_finite() || m <= 0.0 || m >= SQRT_2PI {
        return Err(Error::Domain(format!(
            "gauss_tail_inv: m must lie in (0, sqrt(2*pi)), got {m:e}"
        )));
    }
    // Work on whichever side keeps the tail small: F(t) = sqrt(2pi) - F(-t).
    let (q, sign) = if m <= SQRT_PI_OVER_2 {
        (m, 1.0)
    } else {
        (SQRT_2PI - m, -1.0)
    };
    let target = (tol.rel_tol * q).min(tol.abs_tol).max(1e-300);
    let x0 = -inv_cdf_guess((q / SQRT_2PI).min(0.5));
    // tail_raw is decreasing; negate to reuse the increasing-function solver.
    let t = newton_bracketed(
        |t| q - tail_raw(t),
        |t| (-0.5 * t * t).exp(),
        x0.clamp(-39.9, 39.9),
        -40.0,
        40.0,
        target,
        tol.max_iter,
    )?;
    Ok(sign * t)
}
