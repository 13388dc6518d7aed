//! Axis potentials for weighted product densities.
//!
//! Each axis carries a density `w(x) = exp(-x^2/2 - B(x))` on an open
//! interval, where `B` is the axis potential. Built-in families:
//!
//! * `gaussian` — `B = 0` on the whole line;
//! * `power(k)` — `B = -k ln x` on `(0, inf)`, `k >= 0`, i.e. `w = x^k e^{-x^2/2}`;
//! * `quadratic(beta)` — `B = beta x^2 / 2` on the whole line, `beta > -1`;
//! * `softplus_mix` — nonnegative combinations of `ln(1 + e^{s x + c})`,
//!   smooth and convex by construction;
//! * `from_table` — monotone-cubic interpolation of sampled values, with
//!   derivatives taken by high-order central differences.
//!
//! Convexity of `B` is what the transport construction downstream relies
//! on, so this module owns the convexity certification and the
//! convexity-based tail bounds used to truncate integrals over unbounded
//! supports.

use crate::error::{Error, Result};
use crate::grid::BoxDomain;
use crate::interp::Pchip;
use crate::quad;
use crate::specfun::{self, Tolerance, SQRT_2PI};
use crate::transport::TransportMap;

/// Slack allowed in the convexity certificate when second derivatives are exact.
pub const EPS_CONVEX_ANALYTIC: f64 = 1e-8;
/// Slack allowed when second derivatives come from finite differences.
pub const EPS_CONVEX_NUMERIC: f64 = 1e-5;

/// Hard ceiling for the tail-truncation search. Needing a cutoff beyond
/// this means the weight decays too slowly to certify integrability.
const TRUNCATION_LIMIT: f64 = 80.0;

/// One convex term `weight * ln(1 + exp(slope * x + shift))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftplusAtom {
    pub weight: f64,
    pub slope: f64,
    pub shift: f64,
}

/// `ln(1 + e^u)` without overflow on either side.
fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

/// `1 / (1 + e^{-u})` without overflow on either side.
fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Zero,
    Power { k: f64 },
    Quadratic { beta: f64 },
    SoftplusMix { atoms: Vec<SoftplusAtom> },
    Table { interp: Pchip },
}

/// Potential `B` of an axis density `exp(-x^2/2 - B(x))` on `(lo, hi)`.
#[derive(Debug, Clone)]
pub struct AxisPotential {
    lo: f64,
    hi: f64,
    kind: Kind,
}

/// Result of sampling the second derivative of a potential.
#[derive(Debug, Clone, Copy)]
pub struct ConvexityReport {
    pub min_second: f64,
    pub argmin: f64,
    /// Slack used: analytic kinds get the tight tolerance, tabulated ones
    /// the finite-difference tolerance.
    pub eps: f64,
    pub pass: bool,
}

impl ConvexityReport {
    pub fn require(&self) -> Result<()> {
        if self.pass {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "potential is not convex: second derivative reaches {:.6e} at x = {:.6}",
                self.min_second, self.argmin
            )))
        }
    }
}

/// Window `[lo, hi]` outside which the axis weight carries provably little
/// mass. `tail_lo`/`tail_hi` are upper bounds for the discarded mass.
#[derive(Debug, Clone, Copy)]
pub struct TruncationWindow {
    pub lo: f64,
    pub hi: f64,
    pub tail_lo: f64,
    pub tail_hi: f64,
}

/// Step for high-order central differences: machine-eps^(1/5), scaled.
pub(crate) fn fd_step(x: f64) -> f64 {
    f64::EPSILON.powf(0.2) * x.abs().max(1.0)
}

impl AxisPotential {
    pub fn gaussian() -> Self {
        AxisPotential {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            kind: Kind::Zero,
        }
    }

    /// `w = x^k e^{-x^2/2}` on `(0, inf)`. Requires `k >= 0`; negative
    /// exponents make the weight singular at the origin, which the
    /// quadrature layer does not certify to full accuracy.
    pub fn power(k: f64) -> Result<Self> {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::Domain(format!("power exponent must be >= 0, got {k}")));
        }
        Ok(AxisPotential {
            lo: 0.0,
            hi: f64::INFINITY,
            kind: Kind::Power { k },
        })
    }

    /// `B = beta x^2 / 2` on the whole line. Requires `beta > -1` so the
    /// total weight `exp(-(1+beta) x^2 / 2)` is integrable.
    pub fn quadratic(beta: f64) -> Result<Self> {
        if !(beta > -1.0) || !beta.is_finite() {
            return Err(Error::Integrability(format!(
                "quadratic coefficient must be > -1 for an integrable weight, got {beta}"
            )));
        }
        Ok(AxisPotential {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            kind: Kind::Quadratic { beta },
        })
    }

    /// Nonnegative mixture of softplus terms; convex and smooth on the line.
    pub fn softplus_mix(atoms: Vec<SoftplusAtom>) -> Result<Self> {
        for a in &atoms {
            if !(a.weight >= 0.0) || !a.weight.is_finite() || !a.slope.is_finite() || !a.shift.is_finite() {
                return Err(Error::Domain(format!(
                    "softplus atoms need finite parameters and weight >= 0, got {a:?}"
                )));
            }
        }
        Ok(AxisPotential {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            kind: Kind::SoftplusMix { atoms },
        })
    }

    /// Potential interpolated from samples `(xs[i], bs[i])` on `[xs[0], xs[n-1]]`.
    /// Derivatives of tabulated potentials are numeric.
    pub fn from_table(xs: Vec<f64>, bs: Vec<f64>) -> Result<Self> {
        let interp = Pchip::new(xs, bs, None)?;
        let (lo, hi) = interp.domain();
        Ok(AxisPotential {
            lo,
            hi,
            kind: Kind::Table { interp },
        })
    }

    /// Open support `(lo, hi)` of the axis density.
    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Whether derivatives are closed-form (false only for tabulated kinds).
    pub fn is_analytic(&self) -> bool {
        !matches!(self.kind, Kind::Table { .. })
    }

    /// `B(x)`. Returns `+inf` outside the open support (zero density there),
    /// NaN for NaN input.
    pub fn eval(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if !(x > self.lo && x < self.hi) {
            return f64::INFINITY;
        }
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Power { k } => -k * x.ln(),
            Kind::Quadratic { beta } => 0.5 * beta * x * x,
            Kind::SoftplusMix { atoms } => atoms
                .iter()
                .map(|a| a.weight * softplus(a.slope * x + a.shift))
                .sum(),
            Kind::Table { interp } => interp.eval(x),
        }
    }

    /// `B'(x)`; NaN outside the open support. Tabulated kinds use
    /// fourth-order central differences of the interpolant.
    pub fn deriv(&self, x: f64) -> f64 {
        if !(x > self.lo && x < self.hi) {
            return f64::NAN;
        }
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Power { k } => -k / x,
            Kind::Quadratic { beta } => beta * x,
            Kind::SoftplusMix { atoms } => atoms
                .iter()
                .map(|a| a.weight * a.slope * sigmoid(a.slope * x + a.shift))
                .sum(),
            Kind::Table { interp } => {
                let h = self.clamped_step(x);
                let f = |t: f64| interp.eval(t);
                (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
            }
        }
    }

    /// `B''(x)`; NaN outside the open support.
    pub fn second_deriv(&self, x: f64) -> f64 {
        if !(x > self.lo && x < self.hi) {
            return f64::NAN;
        }
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Power { k } => k / (x * x),
            Kind::Quadratic { beta } => *beta,
            Kind::SoftplusMix { atoms } => atoms
                .iter()
                .map(|a| {
                    let s = sigmoid(a.slope * x + a.shift);
                    a.weight * a.slope * a.slope * s * (1.0 - s)
                })
                .sum(),
            Kind::Table { interp } => {
                let h = self.clamped_step(x);
                let f = |t: f64| interp.eval(t);
                (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x)
                    + 16.0 * f(x - h)
                    - f(x - 2.0 * h))
                    / (12.0 * h * h)
            }
        }
    }

    /// Largest step keeping the `x +- 2h` stencil inside the support.
    fn clamped_step(&self, x: f64) -> f64 {
        let mut h = fd_step(x);
        if self.lo.is_finite() {
            h = h.min((x - self.lo) / 2.5);
        }
        if self.hi.is_finite() {
            h = h.min((self.hi - x) / 2.5);
        }
        h
    }

    /// `ln w(x) = -x^2/2 - B(x)`; `-inf` outside the support.
    pub fn log_weight(&self, x: f64) -> f64 {
        -0.5 * x * x - self.eval(x)
    }

    /// Axis density `w(x) = exp(-x^2/2 - B(x))`.
    pub fn weight(&self, x: f64) -> f64 {
        self.log_weight(x).exp()
    }

    /// Sample `B''` on an interior grid and report the minimum.
    ///
    /// Numeric kinds are sampled on the interior 99% of the window because
    /// difference stencils clamped against an endpoint lose accuracy.
    pub fn convexity_report(&self, samples: usize) -> Result<ConvexityReport> {
        let n = samples.max(3);
        let win = self.truncation_window(1e-12)?;
        let inset = if self.is_analytic() { 1e-8 } else { 5e-3 } * (win.hi - win.lo);
        let (lo, hi) = (win.lo + inset, win.hi - inset);
        let mut min_second = f64::INFINITY;
        let mut argmin = lo;
        for i in 0..n {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let s = self.second_deriv(x);
            if s.is_nan() {
                return Err(Error::Domain(format!(
                    "second derivative undefined at sample point {x}"
                )));
            }
            if s < min_second {
                min_second = s;
                argmin = x;
            }
        }
        let eps = if self.is_analytic() {
            EPS_CONVEX_ANALYTIC
        } else {
            EPS_CONVEX_NUMERIC
        };
        Ok(ConvexityReport {
            min_second,
            argmin,
            eps,
            pass: min_second >= -eps,
        })
    }

    /// Find a window whose outside mass is provably below `tail_tol` per side.
    ///
    /// At a cutoff `R > 0` with decay rate `r = R + B'(R) > 0`, convexity of
    /// `B` makes `x + B'(x)` nondecreasing, so `w(x) <= w(R) e^{-r (x - R)}`
    /// for `x >= R` and the tail mass is at most `w(R) / r`. (Every built-in
    /// family has nondecreasing `x + B'(x)` even when `B` itself is not
    /// convex.) The mirrored bound handles the left tail. Finite support
    /// endpoints are kept as-is with zero discarded mass.
    pub fn truncation_window(&self, tail_tol: f64) -> Result<TruncationWindow> {
        if !(tail_tol > 0.0) {
            return Err(Error::Precondition(format!(
                "tail tolerance must be positive, got {tail_tol}"
            )));
        }
        let (hi, tail_hi) = if self.hi.is_finite() {
            (self.hi, 0.0)
        } else {
            let start = if self.lo.is_finite() { (self.lo + 1.0).max(1.0) } else { 1.0 };
            self.grow_cutoff(start, 1.0, tail_tol)?
        };
        let (lo, tail_lo) = if self.lo.is_finite() {
            (self.lo, 0.0)
        } else {
            let start = if self.hi.is_finite() { (self.hi - 1.0).min(-1.0) } else { -1.0 };
            self.grow_cutoff(start, -1.0, tail_tol)?
        };
        Ok(TruncationWindow {
            lo,
            hi,
            tail_lo,
            tail_hi,
        })
    }

    /// March a cutoff outward in steps of 0.5 until the exponential tail
    /// bound drops below `tail_tol`. `dir` is +1 for the right tail, -1 for
    /// the left.
    fn grow_cutoff(&self, start: f64, dir: f64, tail_tol: f64) -> Result<(f64, f64)> {
        let mut r = start;
        while r.abs() <= TRUNCATION_LIMIT {
            let rate = dir * (r + self.deriv(r));
            if rate > 0.5 {
                let bound = self.weight(r) / rate;
                if bound <= tail_tol {
                    return Ok((r, bound));
                }
            }
            r += dir * 0.5;
        }
        Err(Error::Integrability(format!(
            "weight decays too slowly to certify a tail bound of {tail_tol:.3e} within |x| <= {TRUNCATION_LIMIT}"
        )))
    }

    /// `Integral w(x) dx` over the support, truncation and quadrature errors
    /// both kept inside `tol`.
    pub fn weight_integral(&self, tol: &Tolerance) -> Result<f64> {
        // Coarse pass fixes the scale so relative tolerance can be converted
        // into an absolute tail budget.
        let rough_win = self.truncation_window(1e-4)?;
        let rough = quad::adaptive(
            |x| self.weight(x),
            rough_win.lo,
            rough_win.hi,
            &Tolerance::new(1e-6, 1e-6, tol.max_iter)?,
        )?;
        let budget = tol.abs_tol.max(tol.rel_tol * rough.value.abs());
        let win = self.truncation_window((0.05 * budget).max(f64::MIN_POSITIVE))?;
        // Grade toward finite support endpoints, where the weight can have
        // unbounded derivatives; truncated (formerly infinite) ends are smooth.
        let grade_left = self.lo.is_finite();
        let grade_right = self.hi.is_finite();
        let inner_tol = Tolerance::new((0.8 * budget).min(0.5), tol.rel_tol, tol.max_iter)?;
        let q = quad::adaptive_graded(
            |x| self.weight(x),
            win.lo,
            win.hi,
            grade_left,
            grade_right,
            &inner_tol,
        )?;
        Ok(q.value)
    }

    /// Constant `c` with `c * Integral w = 1`.
    pub fn normalization_c(&self, tol: &Tolerance) -> Result<f64> {
        Ok(1.0 / self.weight_integral(tol)?)
    }
}

/// One cross-sectional axis of a product density: either a potential,
/// normalized on construction, or a prebuilt transport map.
#[derive(Debug, Clone)]
pub enum AxisFactor {
    Potential(AxisPotential),
    Map(TransportMap),
}

#[derive(Debug, Clone)]
struct CrossAxis {
    factor: AxisFactor,
    c: f64,
}

/// Product density on `R^N` with `N - 1` cross axes and a distinguished
/// Gaussian last axis.
///
/// Every cross axis carries the canonical density
/// `g_i(t) = c_i sqrt(2 pi) w_i(t) = exp(-A_i(t)^2/2) A_i'(t)` of total
/// mass exactly `sqrt(2 pi)`, and the last axis carries `exp(-t^2/2)`.
/// With this scaling the diagonal map `(A_1, ..., A_{N-1}, id)` pushes the
/// measure `phi dx` onto the unnormalized Gaussian `exp(-|y|^2/2) dy`, so
/// the mass of any region equals `(2 pi)^{N/2}` times the Gaussian
/// probability of its image.
#[derive(Debug, Clone)]
pub struct ProductDensity {
    cross: Vec<CrossAxis>,
}

impl ProductDensity {
    pub fn new(factors: Vec<AxisFactor>, tol: &Tolerance) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Precondition(
                "a product density needs at least one cross axis".into(),
            ));
        }
        let cross = factors
            .into_iter()
            .map(|factor| -> Result<CrossAxis> {
                let c = match &factor {
                    AxisFactor::Potential(p) => p.normalization_c(tol)?,
                    AxisFactor::Map(m) => m.normalization(),
                };
                Ok(CrossAxis { factor, c })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProductDensity { cross })
    }

    /// Ambient dimension `N` (cross axes plus the Gaussian axis).
    pub fn dim(&self) -> usize {
        self.cross.len() + 1
    }

    pub fn cross_dim(&self) -> usize {
        self.cross.len()
    }

    pub fn axis_factor(&self, i: usize) -> &AxisFactor {
        &self.cross[i].factor
    }

    /// Normalization constant of cross axis `i`.
    pub fn axis_c(&self, i: usize) -> f64 {
        self.cross[i].c
    }

    /// Open support of cross axis `i`.
    pub fn axis_support(&self, i: usize) -> (f64, f64) {
        match &self.cross[i].factor {
            AxisFactor::Potential(p) => p.support(),
            AxisFactor::Map(m) => m.potential().support(),
        }
    }

    /// `ln g_i(t)`; `-inf` outside the support.
    pub fn axis_log_density(&self, i: usize, t: f64) -> f64 {
        let ax = &self.cross[i];
        let pot = match &ax.factor {
            AxisFactor::Potential(p) => p,
            AxisFactor::Map(m) => m.potential(),
        };
        ax.c.ln() + SQRT_2PI.ln() + pot.log_weight(t)
    }

    pub fn axis_density(&self, i: usize, t: f64) -> f64 {
        self.axis_log_density(i, t).exp()
    }

    /// `Integral_{lo}^{hi} g_i`, bounds clipped to the support, graded
    /// toward finite support endpoints the range touches.
    pub fn axis_mass(&self, i: usize, lo: f64, hi: f64, tol: &Tolerance) -> Result<f64> {
        let (slo, shi) = self.axis_support(i);
        let a = lo.max(slo);
        let b = hi.min(shi);
        if !(a < b) {
            return Ok(0.0);
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Precondition(format!(
                "axis mass needs finite clipped bounds, got [{a}, {b}]; truncate first"
            )));
        }
        let q = quad::adaptive_graded(
            |t| self.axis_density(i, t),
            a,
            b,
            a == slo,
            b == shi,
            tol,
        )?;
        Ok(q.value)
    }

    /// Mass of the Gaussian axis over `[lo, hi]`:
    /// `sqrt(2 pi) (Phi(hi) - Phi(lo))`.
    pub fn gaussian_axis_mass(lo: f64, hi: f64) -> Result<f64> {
        Ok(SQRT_2PI * (specfun::gauss_cdf(hi)? - specfun::gauss_cdf(lo)?))
    }

    /// Window holding all but `tail_tol` of cross axis `i`'s mass.
    pub fn axis_truncation(&self, i: usize, tail_tol: f64) -> Result<(f64, f64)> {
        let ax = &self.cross[i];
        match &ax.factor {
            AxisFactor::Potential(p) => {
                let win = p.truncation_window(tail_tol / (ax.c * SQRT_2PI))?;
                Ok((win.lo, win.hi))
            }
            AxisFactor::Map(m) => {
                // Beyond the node range the canonical mass is a Gaussian
                // tail of the image grid, below 2 sqrt(2pi) Phi(-6).
                let (lo, hi) = m.node_range();
                let (_, ys, _) = m.nodes();
                let beyond = SQRT_2PI * 2.0 * specfun::gauss_cdf(ys[0])?;
                if beyond > tail_tol {
                    return Err(Error::Precondition(format!(
                        "map node range only bounds tails to {beyond:.3e}, need {tail_tol:.3e}"
                    )));
                }
                Ok((lo, hi))
            }
        }
    }

    /// Cross-sectional total mass `(2 pi)^{(N-1)/2}`; exact because every
    /// canonical axis density integrates to `sqrt(2 pi)`.
    pub fn c_mu(&self) -> f64 {
        SQRT_2PI.powi(self.cross.len() as i32)
    }

    /// `ln phi(x)`; `x` must lie strictly inside the support.
    pub fn log_phi(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!(
                "density is {}-dimensional, point has {} coordinates",
                self.dim(),
                x.len()
            )));
        }
        let mut acc = 0.0;
        for (i, &xi) in x.iter().take(self.cross_dim()).enumerate() {
            let (lo, hi) = self.axis_support(i);
            if !(xi > lo && xi < hi) {
                return Err(Error::Domain(format!(
                    "coordinate {i} = {xi} outside open support ({lo}, {hi})"
                )));
            }
            acc += self.axis_log_density(i, xi);
        }
        let xn = x[self.dim() - 1];
        if !xn.is_finite() {
            return Err(Error::Domain(format!("last coordinate must be finite, got {xn}")));
        }
        Ok(acc - 0.5 * xn * xn)
    }

    pub fn phi(&self, x: &[f64]) -> Result<f64> {
        Ok(self.log_phi(x)?.exp())
    }

    /// Mass of an axis-aligned box, computed axis by axis.
    pub fn box_mass(&self, domain: &BoxDomain, tol: &Tolerance) -> Result<f64> {
        if domain.dim() != self.dim() {
            return Err(Error::Domain(format!(
                "box is {}-dimensional, density is {}-dimensional",
                domain.dim(),
                self.dim()
            )));
        }
        let mut mass = 1.0;
        for i in 0..self.cross_dim() {
            mass *= self.axis_mass(i, domain.lo[i], domain.hi[i], tol)?;
        }
        let n = self.dim() - 1;
        mass *= Self::gaussian_axis_mass(domain.lo[n], domain.hi[n])?;
        Ok(mass)
    }
}

/// Mass-preservation comparison for a diagonal product map: the direct
/// mass of a box against `(2 pi)^{N/2}` times the Gaussian probability of
/// its image, evaluated through two independent routes (quadrature of
/// `exp(-A^2/2) A'` versus CDF differences of the node images).
#[derive(Debug, Clone, Copy)]
pub struct MassComparison {
    pub mass_direct: f64,
    pub mass_mapped: f64,
    pub rel_gap: f64,
}

pub fn product_map_apply(
    maps: &[TransportMap],
    domain: &BoxDomain,
    tol: &Tolerance,
) -> Result<MassComparison> {
    if domain.dim() != maps.len() + 1 {
        return Err(Error::Domain(format!(
            "{} maps need a {}-dimensional box, got {}",
            maps.len(),
            maps.len() + 1,
            domain.dim()
        )));
    }
    let mut direct = 1.0;
    let mut mapped = 1.0;
    for (i, m) in maps.iter().enumerate() {
        let (lo, hi) = (domain.lo[i], domain.hi[i]);
        let q = quad::adaptive(
            |x| {
                let a = m.eval(x);
                (-0.5 * a * a).exp() * m.deriv(x)
            },
            lo,
            hi,
            tol,
        )?;
        direct *= q.value;
        mapped *= SQRT_2PI * (specfun::gauss_cdf(m.eval(hi))? - specfun::gauss_cdf(m.eval(lo))?);
    }
    let n = domain.dim() - 1;
    let gauss = ProductDensity::gaussian_axis_mass(domain.lo[n], domain.hi[n])?;
    direct *= gauss;
    mapped *= gauss;
    let rel_gap = (direct - mapped).abs() / mapped.abs().max(f64::MIN_POSITIVE);
    Ok(MassComparison {
        mass_direct: direct,
        mass_mapped: mapped,
        rel_gap,
    })
}

/// Verdict on whether a sampled positive function factors as
/// `g(x') h(x_N)` on a box: the last-axis logarithmic derivative must not
/// depend on the cross coordinates.
#[derive(Debug, Clone, Copy)]
pub struct SeparabilityReport {
    pub max_spread: f64,
    pub threshold: f64,
    pub separable: bool,
}

pub fn separability_check(
    f: impl Fn(&[f64]) -> f64,
    domain: &BoxDomain,
    nodes_per_axis: usize,
    tol: f64,
) -> Result<SeparabilityReport> {
    let d = domain.dim();
    if d < 2 {
        return Err(Error::Precondition(
            "separability needs at least two axes".into(),
        ));
    }
    let n = nodes_per_axis.max(3);
    let coord = |k: usize, i: usize| domain.lo[k] + domain.extent(k) * i as f64 / (n - 1) as f64;
    let h_last = domain.extent(d - 1) / (n - 1) as f64;

    // ln f on the full tensor grid, last axis fastest.
    let total = n.pow(d as u32);
    let mut logf = Vec::with_capacity(total);
    let mut multi = vec![0usize; d];
    for flat in 0..total {
        let mut rem = flat;
        for k in (0..d).rev() {
            multi[k] = rem % n;
            rem /= n;
        }
        let x: Vec<f64> = (0..d).map(|k| coord(k, multi[k])).collect();
        let v = f(&x);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!(
                "separability check needs a positive finite sample, got {v:e} at {x:?}"
            )));
        }
        logf.push(v.ln());
    }

    // Centered log-derivative along the last axis; spread across the cross
    // indices at each interior level.
    let cross_count = total / n;
    let mut max_spread: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for level in 1..n - 1 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in 0..cross_count {
            let base = c * n;
            let g = (logf[base + level + 1] - logf[base + level - 1]) / (2.0 * h_last);
            lo = lo.min(g);
            hi = hi.max(g);
            max_abs = max_abs.max(g.abs());
        }
        max_spread = max_spread.max(hi - lo);
    }
    let threshold = tol * (1.0 + max_abs);
    Ok(SeparabilityReport {
        max_spread,
        threshold,
        separable: max_spread <= threshold,
    })
}
