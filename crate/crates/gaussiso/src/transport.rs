//! Increasing one-dimensional maps that push axis densities onto the
//! standard Gaussian.
//!
//! For an axis weight `w = exp(-x^2/2 - B)` with normalization `c`
//! (`c * Integral w = 1`), the map `A` is defined through
//!
//! ```text
//! Phi(A(x)) = c * Integral_{lo}^{x} w(t) dt,
//! ```
//!
//! where `Phi` is the standard normal CDF: `A` carries the normalized axis
//! distribution onto the standard normal. Differentiating gives the
//! closed-form derivative identity
//!
//! ```text
//! exp(-A(x)^2/2) * A'(x) = c * sqrt(2 pi) * w(x),
//! ```
//!
//! which is how [`TransportMap::deriv`] is always evaluated. When `B` is
//! convex, `A' >= 1` holds everywhere (the map never contracts);
//! [`TransportMap::certify_noncontraction`] measures exactly that on a refined
//! grid, and [`build_map`] rejects potentials whose map contracts at the
//! nodes.
//!
//! Maps are stored as monotone cubic interpolants through node pairs
//! `(x_j, y_j)` with exact derivative data, where the `y_j` are uniform in
//! the Gaussian variable and `x_j` are found by marching the cumulative
//! axis mass.

use crate::density::{self, AxisPotential, EPS_CONVEX_NUMERIC};
use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::quad;
use crate::specfun::{self, Tolerance, SQRT_2PI};

/// Slack allowed when checking the non-contraction bound `A' >= 1`.
pub const EPS_NONCONTRACTION: f64 = 1e-7;

/// Node layout for building a map: `nodes` points with Gaussian images
/// uniform on `[-y_max, y_max]`.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub nodes: usize,
    pub y_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nodes: 401,
            y_max: 7.0,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if self.nodes < 33 {
            return Err(Error::Precondition(format!(
                "map grid needs at least 33 nodes, got {}",
                self.nodes
            )));
        }
        // The lower bound keeps the extreme nodes deep in the tails
        // (|A| >= 6); the upper bound keeps CDF values away from
        // saturation so the marching targets stay meaningful.
        if !(6.0..=8.0).contains(&self.y_max) {
            return Err(Error::Precondition(format!(
                "map grid needs y_max in [6, 8], got {}",
                self.y_max
            )));
        }
        Ok(())
    }
}

/// Monotone map with closed-form derivative, stored at nodes and
/// interpolated in between.
#[derive(Debug, Clone)]
pub struct TransportMap {
    potential: AxisPotential,
    c: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    aprimes: Vec<f64>,
    interp: Pchip,
}

/// Outcome of sampling `A'` on a refined grid.
#[derive(Debug, Clone, Copy)]
pub struct NoncontractionCertificate {
    pub min_aprime: f64,
    pub argmin: f64,
    pub eps: f64,
    pub pass: bool,
}

impl NoncontractionCertificate {
    pub fn require(&self) -> Result<()> {
        if self.pass {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "map contracts: A' reaches {:.9} at x = {:.6}",
                self.min_aprime, self.argmin
            )))
        }
    }
}

/// Build the map for `potential` by marching the cumulative axis mass to
/// the Gaussian quantiles of a uniform grid in the image variable.
///
/// Errors: non-integrable weights surface as `Integrability`; a map that
/// contracts below `1 - EPS_NONCONTRACTION` at some node (possible only for
/// non-convex potentials) surfaces as `Precondition`.
pub fn build_map(
    potential: &AxisPotential,
    grid: &GridSpec,
    tol: &Tolerance,
) -> Result<TransportMap> {
    grid.validate()?;
    let c = potential.normalization_c(tol)?;
    let n = grid.nodes;
    let ys: Vec<f64> = (0..n)
        .map(|j| -grid.y_max + 2.0 * grid.y_max * j as f64 / (n - 1) as f64)
        .collect();
    // Left-half targets are CDF values, right-half targets are tail masses
    // (exact by symmetry); each half is anchored at its own truncation cut
    // so node-placement errors stay *relative* to the local tail mass. A
    // single left-anchored march would carry absolute quadrature drift
    // across the bulk, and near |y| ~ 7 the density is ~1e-11, so even
    // 1e-13 of drift would corrupt the x <-> A pairing there (a placement
    // error dx costs a relative |y| dx in A').
    let ps: Vec<f64> = ys.iter().map(|&y| specfun::gauss_cdf(y)).collect::<Result<_>>()?;
    let qs: Vec<f64> = ys.iter().map(|&y| specfun::gauss_cdf(-y)).collect::<Result<_>>()?;

    // Truncate the support so the discarded mass and the slack of its
    // analytic bound are both far below the extreme targets.
    let head_tol = (1e-8 * ps[0] / c).max(f64::MIN_POSITIVE);
    let win = potential.truncation_window(head_tol)?;

    // Gap integrals are driven by relative tolerance: near the tails both
    // the masses and the integrand are tiny, and a fixed absolute floor
    // would let the placement drift.
    let gap_tol = Tolerance::new(f64::MIN_POSITIVE, 1e-11, tol.max_iter.max(300))?;
    // Solver targets sit far below evaluation noise in the tails, so the
    // bracket-width exit (~1e-15 in x) decides there, which is what the
    // A' accuracy needs.
    let weight = |t: f64| potential.weight(t);
    let dens = |x: f64| (c * potential.weight(x)).max(f64::MIN_POSITIVE);

    let split = (n - 1) / 2;
    let mut xs = vec![0.0; n];

    // Left sweep: accumulate mass from the lower cut up to the median node.
    let mut cum = c * win.tail_lo;
    let mut x_prev = win.lo;
    for j in 0..=split {
        let p = ps[j];
        let f = |x: f64| -> f64 {
            if x <= x_prev {
                return cum - p;
            }
            match quad::adaptive(weight, x_prev, x, &gap_tol) {
                Ok(g) => cum + c * g.value - p,
                Err(_) => f64::NAN,
            }
        };
        let mut step = 0.25;
        let mut hi = (x_prev + step).min(win.hi);
        while f(hi) < 0.0 && hi < win.hi {
            step *= 2.0;
            hi = (hi + step).min(win.hi);
        }
        if f(hi) < 0.0 {
            return Err(Error::Convergence(format!(
                "cumulative mass saturates below quantile {j} (p = {p:.6e})"
            )));
        }
        let target = (1e-13 * p).max(1e-250);
        let x_j = specfun::newton_bracketed(
            f,
            dens,
            0.5 * (x_prev + hi),
            x_prev,
            hi,
            target,
            tol.max_iter.max(80),
        )?;
        let gap = quad::adaptive(weight, x_prev, x_j, &gap_tol)?;
        cum += c * gap.value;
        xs[j] = x_j;
        x_prev = x_j;
    }

    // Right sweep: accumulate tail mass from the upper cut down to the seam.
    let mut cum_r = c * win.tail_hi;
    let mut x_next = win.hi;
    for j in (split + 1..n).rev() {
        let q = qs[j];
        // Increasing in x: zero where the tail mass beyond x matches q.
        let f = |x: f64| -> f64 {
            if x >= x_next {
                return q - cum_r;
            }
            match quad::adaptive(weight, x, x_next, &gap_tol) {
                Ok(g) => q - cum_r - c * g.value,
                Err(_) => f64::NAN,
            }
        };
        let mut step = 0.25;
        let mut lo = (x_next - step).max(win.lo);
        while f(lo) > 0.0 && lo > win.lo {
            step *= 2.0;
            lo = (lo - step).max(win.lo);
        }
        if f(lo) > 0.0 {
            return Err(Error::Convergence(format!(
                "tail mass saturates below quantile {j} (q = {q:.6e})"
            )));
        }
        let target = (1e-13 * q).max(1e-250);
        let x_j = specfun::newton_bracketed(
            f,
            dens,
            0.5 * (lo + x_next),
            lo,
            x_next,
            target,
            tol.max_iter.max(80),
        )?;
        let gap = quad::adaptive(weight, x_j, x_next, &gap_tol)?;
        cum_r += c * gap.value;
        xs[j] = x_j;
        x_next = x_j;
    }

    // Node derivatives from the closed-form identity, in log space so
    // extreme nodes cannot overflow.
    let log_c_sqrt2pi = c.ln() + SQRT_2PI.ln();
    let aprimes: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| (log_c_sqrt2pi + potential.log_weight(x) + 0.5 * y * y).exp())
        .collect();
    for (j, &ap) in aprimes.iter().enumerate() {
        if !ap.is_finite() {
            return Err(Error::Convergence(format!(
                "map derivative not finite at node {j} (x = {:.6e})",
                xs[j]
            )));
        }
        if ap < 1.0 - EPS_NONCONTRACTION {
            return Err(Error::Precondition(format!(
                "map contracts at node {j}: A'({:.6}) = {:.9} < 1",
                xs[j], ap
            )));
        }
    }

    let interp = Pchip::new(xs.clone(), ys.clone(), Some(aprimes.clone()))?;
    Ok(TransportMap {
        potential: potential.clone(),
        c,
        xs,
        ys,
        aprimes,
        interp,
    })
}

impl TransportMap {
    /// `A(x)` via the monotone interpolant. Outside the node range the end
    /// cubic is extended; callers should stay within [`Self::node_range`].
    pub fn eval(&self, x: f64) -> f64 {
        self.interp.eval(x)
    }

    /// `A'(x)` from the closed-form identity
    /// `A' = c sqrt(2 pi) w(x) exp(A(x)^2 / 2)`, with `A` interpolated.
    pub fn deriv(&self, x: f64) -> f64 {
        let a = self.interp.eval(x);
        (self.c.ln() + SQRT_2PI.ln() + self.potential.log_weight(x) + 0.5 * a * a).exp()
    }

    /// Derivative of the interpolant itself; diagnostic only, `deriv` is
    /// the map derivative.
    pub fn interp_deriv(&self, x: f64) -> f64 {
        self.interp.eval_deriv(x)
    }

    pub fn normalization(&self) -> f64 {
        self.c
    }

    pub fn potential(&self) -> &AxisPotential {
        &self.potential
    }

    /// Node data `(x, A, A')`, e.g. for CSV export.
    pub fn nodes(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.xs, &self.ys, &self.aprimes)
    }

    /// Covered interval `[x_0, x_{n-1}]`.
    pub fn node_range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().expect("non-empty"))
    }

    /// Sample `A'` on a grid `refine` times denser than the nodes and
    /// report the minimum against the non-contraction bound.
    pub fn certify_noncontraction(&self, refine: usize) -> NoncontractionCertificate {
        let refine = refine.max(1);
        let mut min_aprime = f64::INFINITY;
        let mut argmin = self.xs[0];
        for w in self.xs.windows(2) {
            for k in 0..refine {
                let x = w[0] + (w[1] - w[0]) * k as f64 / refine as f64;
                let ap = self.deriv(x);
                if ap < min_aprime {
                    min_aprime = ap;
                    argmin = x;
                }
            }
        }
        let last = *self.xs.last().expect("non-empty");
        let ap = self.deriv(last);
        if ap < min_aprime {
            min_aprime = ap;
            argmin = last;
        }
        NoncontractionCertificate {
            min_aprime,
            argmin,
            eps: EPS_NONCONTRACTION,
            pass: min_aprime >= 1.0 - EPS_NONCONTRACTION,
        }
    }
}

/// Anything that behaves like an increasing map with a derivative.
pub trait MonotoneMap {
    fn eval(&self, x: f64) -> f64;
    fn deriv(&self, x: f64) -> f64;
}

impl MonotoneMap for TransportMap {
    fn eval(&self, x: f64) -> f64 {
        TransportMap::eval(self, x)
    }
    fn deriv(&self, x: f64) -> f64 {
        TransportMap::deriv(self, x)
    }
}

/// The polynomial map `A(x) = x + alpha x^3`, increasing for `alpha >= 0`.
#[derive(Debug, Clone, Copy)]
pub struct CubicMap {
    pub alpha: f64,
}

impl MonotoneMap for CubicMap {
    fn eval(&self, x: f64) -> f64 {
        x + self.alpha * x * x * x
    }
    fn deriv(&self, x: f64) -> f64 {
        1.0 + 3.0 * self.alpha * x * x
    }
}

/// Potential reconstructed from a map, tabulated on uniform samples.
///
/// The normalization convention is `c = 1`: the reconstruction
/// `B = ln sqrt(2 pi) + A^2/2 - x^2/2 - ln A'` makes
/// `exp(-x^2/2 - B) = exp(-A^2/2) A' / sqrt(2 pi)` integrate to one. Any
/// other normalization shifts `B` by a constant, which drops out of all
/// derivatives.
#[derive(Debug, Clone)]
pub struct RecoveredPotential {
    pub xs: Vec<f64>,
    pub b: Vec<f64>,
    pub b_second: Vec<f64>,
    pub min_second: f64,
    pub argmin: f64,
    /// Convexity verdict with the finite-difference tolerance.
    pub convex: bool,
}

impl RecoveredPotential {
    pub fn to_table(&self) -> Result<AxisPotential> {
        AxisPotential::from_table(self.xs.clone(), self.b.clone())
    }
}

/// Reconstruct the potential that a monotone map transports onto the
/// standard Gaussian, sampled at `samples` uniform points of `[lo, hi]`.
/// Second derivatives are taken by fourth-order central differences.
pub fn potential_from_map(
    map: &dyn MonotoneMap,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Result<RecoveredPotential> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Precondition(format!(
            "reconstruction interval must be finite with lo < hi, got [{lo}, {hi}]"
        )));
    }
    let n = samples.max(5);
    let b_at = |x: f64| -> Result<f64> {
        let a = map.eval(x);
        let ap = map.deriv(x);
        if !(ap > 0.0) || !ap.is_finite() || !a.is_finite() {
            return Err(Error::Domain(format!(
                "map must be increasing with finite values, got A={a}, A'={ap} at x={x}"
            )));
        }
        Ok(SQRT_2PI.ln() + 0.5 * a * a - 0.5 * x * x - ap.ln())
    };
    let mut xs = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut b_second = Vec::with_capacity(n);
    let mut min_second = f64::INFINITY;
    let mut argmin = lo;
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let h = density::fd_step(x);
        let s = (-b_at(x + 2.0 * h)? + 16.0 * b_at(x + h)? - 30.0 * b_at(x)?
            + 16.0 * b_at(x - h)?
            - b_at(x - 2.0 * h)?)
            / (12.0 * h * h);
        xs.push(x);
        b.push(b_at(x)?);
        b_second.push(s);
        if s < min_second {
            min_second = s;
            argmin = x;
        }
    }
    Ok(RecoveredPotential {
        xs,
        b,
        b_second,
        min_second,
        argmin,
        convex: min_second >= -EPS_CONVEX_NUMERIC,
    })
}
