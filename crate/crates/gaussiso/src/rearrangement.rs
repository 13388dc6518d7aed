//! Weighted decreasing rearrangement onto half-space slices.
//!
//! For a grid function `u` on a box `G` with cell masses from the product
//! density, the decreasing rearrangement `u*` is the right-continuous
//! step function obtained by sorting cells by `|u|` descending and
//! accumulating their masses. The slice rearrangement composes it with
//! the Gaussian tail of the last coordinate,
//!
//! ```text
//! ubigstar(x) = u*(C_mu * F(x_N))   on   {x_N > lambda},
//! C_mu * F(lambda) = mu(G),
//! ```
//!
//! where `F` is the unnormalized Gaussian tail and `C_mu` the
//! cross-sectional mass of the density. Since `F` decreases and `u*`
//! does not increase, `ubigstar` is non-decreasing in `x_N`: its
//! super-level sets are the mass-matched upper slices, which is exactly
//! what makes it equimeasurable with `u`.
//!
//! On top of the profile the module certifies the classical inequality
//! suite: Cavalieri (norm preservation), Polya-Szego (Dirichlet-energy
//! decrease), the slice Poincare bound, and the Hardy-Littlewood
//! restricted-integral inequality.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::quad;
use crate::region::RegionSpec;
use crate::specfun::{self, Tolerance};
use crate::spectral::{dirichlet_left_smallest, SigmaProfile};

/// Weighted measure of the strict super-level set `{|u| > t}`.
pub fn distribution_function(f: &GridFunction, t: f64) -> f64 {
    f.values
        .iter()
        .zip(&f.masses)
        .filter(|(v, _)| v.abs() > t)
        .map(|(_, m)| m)
        .sum()
}

/// Decreasing rearrangement of `|u|` as a step profile in cumulative
/// mass, plus the slice parameters for the ambient density.
#[derive(Debug, Clone)]
pub struct RearrangedProfile {
    /// Cumulative mass after each step; increasing, ends at
    /// `total_mass`. Steps are maximal runs of equal sorted values.
    cum: Vec<f64>,
    /// Step values, strictly decreasing.
    values: Vec<f64>,
    /// Exact integrals of the step profile up to each `cum` entry.
    cumint: Vec<f64>,
    /// Knots of the differentiable interpolant: mass-bin centers and
    /// bin-mean values. Bins hold several cells of mass, so the slope
    /// between knots averages over sorting noise (near-equal values
    /// from symmetric cells land adjacently but in arbitrary order).
    bin_mids: Vec<f64>,
    bin_vals: Vec<f64>,
    /// Largest single-cell mass of the source grid (granularity unit).
    source_max_mass: f64,
    pub total_mass: f64,
    /// Level of the slice with mass `total_mass`.
    pub lambda: f64,
    pub c_mu: f64,
}

/// Sort the cells of `f` by decreasing `|value|` and accumulate masses.
pub fn decreasing_rearrangement(
    f: &GridFunction,
    c_mu: f64,
    tol: &Tolerance,
) -> Result<RearrangedProfile> {
    if !(c_mu > 0.0) || !c_mu.is_finite() {
        return Err(Error::Precondition(format!(
            "cross-sectional mass must be positive, got {c_mu:e}"
        )));
    }
    let n = f.values.len();
    if n == 0 {
        return Err(Error::Domain("cannot rearrange an empty grid".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    // Descending by |value|; ties broken by cell index for determinism.
    order.sort_by(|&a, &b| {
        f.values[b]
            .abs()
            .partial_cmp(&f.values[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    // Equal values are merged into one step: keeping them as separate
    // knots would turn the linear interpolant into plateaus joined by
    // spikes one cell wide, which quadratures cannot see.
    let mut blocks: Vec<(f64, f64)> = Vec::new();
    let mut source_max_mass: f64 = 0.0;
    for &i in &order {
        let m = f.masses[i];
        let v = f.values[i].abs();
        source_max_mass = source_max_mass.max(m);
        match blocks.last_mut() {
            Some((bm, bv)) if *bv == v => *bm += m,
            _ => blocks.push((m, v)),
        }
    }
    let k = blocks.len();
    let mut cum = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    let mut cumint = Vec::with_capacity(k);
    let mut mass = 0.0;
    let mut integral = 0.0;
    for &(m, v) in &blocks {
        mass += m;
        integral += v * m;
        cum.push(mass);
        values.push(v);
        cumint.push(integral);
    }
    if !(mass > 0.0) {
        return Err(Error::Domain("grid carries no mass".into()));
    }
    // Quantile bins for the interpolant: wide enough to average the
    // tie-noise of symmetric grids, narrow enough to resolve the
    // profile. Runs of equal values stay atomic.
    let delta = (8.0 * source_max_mass).min(mass / 16.0).max(mass / 4096.0);
    let mut bin_mids = Vec::new();
    let mut bin_vals = Vec::new();
    let mut start = 0.0;
    let mut acc_m = 0.0;
    let mut acc_i = 0.0;
    for &(m, v) in &blocks {
        acc_m += m;
        acc_i += v * m;
        if acc_m >= delta {
            bin_mids.push(start + 0.5 * acc_m);
            bin_vals.push(acc_i / acc_m);
            start += acc_m;
            acc_m = 0.0;
            acc_i = 0.0;
        }
    }
    if acc_m > 0.0 {
        bin_mids.push(start + 0.5 * acc_m);
        bin_vals.push(acc_i / acc_m);
    }
    let lambda = specfun::gauss_tail_inv(mass / c_mu, tol)?;
    Ok(RearrangedProfile {
        cum,
        values,
        cumint,
        bin_mids,
        bin_vals,
        source_max_mass,
        total_mass: mass,
        lambda,
        c_mu,
    })
}

impl RearrangedProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_cell_mass(&self) -> f64 {
        self.source_max_mass
    }

    /// Largest value, `u*(0+) = ess sup |u|`.
    pub fn sup(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `(cumulative mass, value)` pairs of the step profile, for export.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.cum.iter().copied().zip(self.values.iter().copied())
    }

    /// Right-continuous step evaluation of `u*`.
    pub fn eval_step(&self, s: f64) -> f64 {
        if s < 0.0 {
            return self.values[0];
        }
        let k = self.cum.partition_point(|&c| c <= s);
        self.values[k.min(self.values.len() - 1)]
    }

    /// Piecewise-linear interpolant through the bin knots, constant
    /// beyond the first and last knot.
    pub fn eval_linear(&self, s: f64) -> f64 {
        let n = self.bin_vals.len();
        if s <= self.bin_mids[0] {
            return self.bin_vals[0];
        }
        if s >= self.bin_mids[n - 1] {
            return self.bin_vals[n - 1];
        }
        let k = self.bin_mids.partition_point(|&m| m <= s);
        let (m0, m1) = (self.bin_mids[k - 1], self.bin_mids[k]);
        let (v0, v1) = (self.bin_vals[k - 1], self.bin_vals[k]);
        v0 + (v1 - v0) * (s - m0) / (m1 - m0)
    }

    /// Slope of the linear interpolant (nonpositive).
    pub fn deriv_linear(&self, s: f64) -> f64 {
        let n = self.bin_vals.len();
        if s <= self.bin_mids[0] || s >= self.bin_mids[n - 1] {
            return 0.0;
        }
        let k = self.bin_mids.partition_point(|&m| m <= s);
        (self.bin_vals[k] - self.bin_vals[k - 1]) / (self.bin_mids[k] - self.bin_mids[k - 1])
    }

    /// Exact integral of the step profile over `[0, s]`.
    pub fn cumulative(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.total_mass {
            // Extended by the last value.
            let tail = (s - self.total_mass) * self.values[self.values.len() - 1];
            return self.cumint[self.cumint.len() - 1] + tail;
        }
        let k = self.cum.partition_point(|&c| c <= s);
        let (c0, i0) = if k == 0 {
            (0.0, 0.0)
        } else {
            (self.cum[k - 1], self.cumint[k - 1])
        };
        i0 + self.values[k] * (s - c0)
    }

    /// Distribution function of the step profile itself (mass where the
    /// profile exceeds `t`); equals the source's up to ties.
    pub fn distribution(&self, t: f64) -> f64 {
        let k = self
            .values
            .partition_point(|&v| v > t);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// The slice rearrangement `u*(C_mu F(x_N))`, step convention.
    pub fn ubigstar(&self, x_n: f64) -> f64 {
        self.eval_step(self.c_mu * specfun::tail_raw(x_n))
    }

    /// Smooth variant used inside quadratures.
    pub fn ubigstar_linear(&self, x_n: f64) -> f64 {
        self.eval_linear(self.c_mu * specfun::tail_raw(x_n))
    }

    /// Chain-rule derivative of the smooth variant; nonnegative.
    pub fn ubigstar_deriv(&self, x_n: f64) -> f64 {
        let s = self.c_mu * specfun::tail_raw(x_n);
        -self.deriv_linear(s) * self.c_mu * (-0.5 * x_n * x_n).exp()
    }

    /// Right end of the quadrature window: beyond it the remaining
    /// cumulative mass is below `frac * total_mass`.
    pub fn tail_cut(&self, frac: f64, tol: &Tolerance) -> Result<f64> {
        let target = (frac * self.total_mass / self.c_mu).max(1e-280);
        Ok(specfun::gauss_tail_inv(target, tol)?.max(self.lambda + 0.5))
    }
}

/// Norm agreement between `u` and its slice rearrangement.
#[derive(Debug, Clone, Copy)]
pub struct CavalieriReport {
    pub p: f64,
    /// `int |u|^p dmu` (max |u| for infinite `p`).
    pub lhs: f64,
    /// Same functional of the rearranged profile by 1-D quadrature.
    pub rhs: f64,
    /// Granularity allowance: one cell mass of value movement plus
    /// quadrature roundoff.
    pub tol: f64,
    pub pass: bool,
}

/// Compare `int_G |u|^p dmu` with `C_mu int |ubigstar|^p e^{-t^2/2} dt`.
/// For `p = inf` both sides are suprema and agree exactly.
pub fn cavalieri_report(
    f: &GridFunction,
    profile: &RearrangedProfile,
    p: f64,
    quad_cells: usize,
    tol: &Tolerance,
) -> Result<CavalieriReport> {
    if !(p >= 1.0) {
        return Err(Error::Precondition(format!(
            "Cavalieri requires p >= 1, got {p}"
        )));
    }
    if p.is_infinite() {
        let lhs = f.lp_norm(p);
        let rhs = profile.sup();
        return Ok(CavalieriReport {
            p,
            lhs,
            rhs,
            tol: 0.0,
            pass: lhs == rhs,
        });
    }
    // Both sides as integrals int |.|^p dmu, not rooted norms.
    let lhs = f.lp_norm(p).powf(p);
    let x_end = profile.tail_cut(1e-12, tol)?;
    let (nodes, weights) = quad::simpson_rule(profile.lambda, x_end, quad_cells.max(8));
    let mut rhs = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        let v = profile.ubigstar(*x);
        rhs += w * profile.c_mu * (-0.5 * x * x).exp() * v.powf(p);
    }
    // Quadrature of a step integrand: each jump can be misplaced by one
    // quadrature cell, and the jumps of |u*|^p telescope to sup^p; the
    // profile's own granularity adds one source cell of mass.
    let h = (x_end - profile.lambda) / quad_cells.max(8) as f64;
    let tol_cav = (2.0 * profile.max_cell_mass() + 4.0 * profile.c_mu * h)
        * profile.sup().powf(p)
        + 1e-9 * (1.0 + lhs);
    Ok(CavalieriReport {
        p,
        lhs,
        rhs,
        tol: tol_cav,
        pass: (lhs - rhs).abs() <= tol_cav,
    })
}

/// Dirichlet-energy comparison between `u` and its rearrangement.
#[derive(Debug, Clone, Copy)]
pub struct PolyaSzegoReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub pass: bool,
}

/// Certify `int_G |Du|^2 dmu >= int |d ubigstar / dx_N|^2 dmu`.
///
/// `u` must be nonnegative and vanish on the grid boundary up to
/// `boundary_tol` (its zero-trace class membership); pass
/// `f64::INFINITY` to skip the gate for profile-shaped test functions.
pub fn polya_szego_gap(
    f: &GridFunction,
    c_mu: f64,
    boundary_tol: f64,
    quad_cells: usize,
    tol_rearr: f64,
    tol: &Tolerance,
) -> Result<PolyaSzegoReport> {
    if f.values.iter().any(|&v| v < 0.0) {
        return Err(Error::Precondition(
            "energy comparison requires a nonnegative function".into(),
        ));
    }
    let faces = vec![(true, true); f.grid.dim()];
    let worst = f.max_abs_on_faces(&faces);
    if worst > boundary_tol {
        return Err(Error::Precondition(format!(
            "function does not vanish on the boundary: |u| reaches {worst:.3e} there"
        )));
    }
    let lhs = f.gradient_lq(2.0);
    let profile = decreasing_rearrangement(f, c_mu, tol)?;
    let x_end = profile.tail_cut(1e-12, tol)?;
    let (nodes, weights) = quad::simpson_rule(profile.lambda, x_end, quad_cells.max(8));
    let mut rhs = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        let d = profile.ubigstar_deriv(*x);
        rhs += w * profile.c_mu * (-0.5 * x * x).exp() * d * d;
    }
    let gap = lhs - rhs;
    Ok(PolyaSzegoReport {
        lhs,
        rhs,
        gap,
        pass: gap >= -tol_rearr,
    })
}

/// Rayleigh-quotient lower bound through the rearranged profile.
#[derive(Debug, Clone, Copy)]
pub struct PoincareReport {
    /// `int |Du|^2 dmu / int u^2 dmu` of the grid function.
    pub ratio: f64,
    /// Smallest eigenvalue of the 1-D slice problem with a Dirichlet
    /// condition at `lambda`.
    pub k_bound: f64,
    pub lambda: f64,
    pub pass: bool,
}

pub fn poincare_bound(
    f: &GridFunction,
    c_mu: f64,
    boundary_tol: f64,
    tol_bound: f64,
    tol: &Tolerance,
) -> Result<PoincareReport> {
    let norm2 = f.lp_norm(2.0);
    if !(norm2 > 0.0) {
        return Err(Error::Domain(
            "Poincare quotient undefined for the zero function".into(),
        ));
    }
    let faces = vec![(true, true); f.grid.dim()];
    let worst = f.max_abs_on_faces(&faces);
    if worst > boundary_tol {
        return Err(Error::Precondition(format!(
            "function does not vanish on the boundary: |u| reaches {worst:.3e} there"
        )));
    }
    // Rayleigh quotient: both numerator and denominator are integrals.
    let ratio = f.gradient_lq(2.0) / (norm2 * norm2);
    let profile = decreasing_rearrangement(f, c_mu, tol)?;
    let x_end = profile.tail_cut(1e-12, tol)?.max(profile.lambda + 4.0).max(8.0);
    // Gaussian weight e^{-t^2/2}; the cell count keeps the per-cell
    // weight change within the solver's resolution gate.
    let cells = (((x_end - profile.lambda) * x_end.abs().max(4.0) / 0.4).ceil() as usize).max(400);
    let eig = dirichlet_left_smallest(
        &SigmaProfile::Gaussian { c: 0.5 },
        profile.lambda,
        x_end,
        cells,
        tol,
    )?;
    Ok(PoincareReport {
        ratio,
        k_bound: eig.value,
        lambda: profile.lambda,
        pass: ratio >= eig.value - tol_bound,
    })
}

/// Restricted-integral comparison `int_E |f| dmu <= int_0^{mu(E)} f*`.
#[derive(Debug, Clone, Copy)]
pub struct HardyReport {
    pub lhs: f64,
    pub rhs: f64,
    pub mass_e: f64,
    pub pass: bool,
}

/// Hardy-Littlewood over an explicit cell selection.
pub fn hardy_check_cells(
    f: &GridFunction,
    in_e: &[bool],
    profile: &RearrangedProfile,
) -> Result<HardyReport> {
    if in_e.len() != f.values.len() {
        return Err(Error::Precondition(format!(
            "selection length {} does not match {} cells",
            in_e.len(),
            f.values.len()
        )));
    }
    let mut lhs = 0.0;
    let mut mass_e = 0.0;
    for ((v, m), &inside) in f.values.iter().zip(&f.masses).zip(in_e) {
        if inside {
            lhs += v.abs() * m;
            mass_e += m;
        }
    }
    let rhs = profile.cumulative(mass_e);
    Ok(HardyReport {
        lhs,
        rhs,
        mass_e,
        pass: lhs <= rhs + 1e-12 * (1.0 + rhs.abs()),
    })
}

/// Hardy-Littlewood with `E` described by a region; cells are selected
/// by their centers. Slab and box regions must lie inside the grid
/// domain; slices and graphs are intersected with it.
pub fn hardy_check(
    f: &GridFunction,
    region: &RegionSpec,
    profile: &RearrangedProfile,
) -> Result<HardyReport> {
    let dom = &f.grid.domain;
    let dim = dom.dim();
    let inside_domain = |lo: f64, hi: f64| lo >= dom.lo[dim - 1] && hi <= dom.hi[dim - 1];
    match region {
        RegionSpec::SlabUnion { intervals } => {
            if intervals.iter().any(|&(a, b)| !inside_domain(a, b)) {
                return Err(Error::Domain(
                    "slab component leaves the grid domain".into(),
                ));
            }
        }
        RegionSpec::BoxUnion { boxes } => {
            for b in boxes {
                let ok = b.dim() == dim
                    && (0..dim).all(|k| b.lo[k] >= dom.lo[k] && b.hi[k] <= dom.hi[k]);
                if !ok {
                    return Err(Error::Domain("box component leaves the grid domain".into()));
                }
            }
        }
        _ => {}
    }
    let mut center = vec![0.0; dim];
    let in_e: Vec<bool> = (0..f.grid.cell_count())
        .map(|flat| {
            let multi = f.grid.multi_index(flat);
            for k in 0..dim {
                center[k] = f.grid.cell_center(k, multi[k]);
            }
            region.contains(&center)
        })
        .collect();
    hardy_check_cells(f, &in_e, profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{AxisFactor, AxisPotential, ProductDensity};
    use crate::grid::{BoxDomain, UniformGrid};
    use proptest::prelude::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn gaussian_density() -> ProductDensity {
        ProductDensity::new(
            vec![AxisFactor::Potential(AxisPotential::gaussian())],
            &tol(),
        )
        .unwrap()
    }

    fn sample_on(
        dens: &ProductDensity,
        domain: BoxDomain,
        cells: Vec<usize>,
        f: impl Fn(&[f64]) -> f64,
    ) -> GridFunction {
        let grid = UniformGrid::new(domain, cells).unwrap();
        GridFunction::sample(grid, f, |x| dens.phi(x).unwrap()).unwrap()
    }

    fn bump(x: &[f64], dom: &BoxDomain) -> f64 {
        let mut v = 1.3;
        for k in 0..x.len() {
            let t = (x[k] - dom.lo[k]) / (dom.hi[k] - dom.lo[k]);
            v *= (std::f64::consts::PI * t).sin().powi(2);
        }
        v
    }

    #[test]
    fn distribution_of_constant_is_total_or_zero() {
        let dens = gaussian_density();
        let dom = BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let f = sample_on(&dens, dom, vec![16, 16], |_| 3.0);
        let total = f.total_mass();
        assert_eq!(distribution_function(&f, 2.0), total);
        assert_eq!(distribution_function(&f, 3.0), 0.0);
    }

    #[test]
    fn constant_rearranges_to_itself() {
        let dens = gaussian_density();
        let dom = BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let f = sample_on(&dens, dom, vec![16, 16], |_| 2.5);
        let prof = decreasing_rearrangement(&f, dens.c_mu(), &tol()).unwrap();
        for s in [0.0, 0.3 * prof.total_mass, 0.999 * prof.total_mass] {
            assert_eq!(prof.eval_step(s), 2.5);
        }
        assert_eq!(prof.ubigstar(prof.lambda + 0.7), 2.5);
        // The slice level reproduces the total mass.
        let back = prof.c_mu * specfun::gauss_tail(prof.lambda).unwrap();
        assert!((back - prof.total_mass).abs() <= 1e-10 * prof.total_mass);
    }

    #[test]
    fn indicator_rearranges_to_two_levels() {
        let dens = gaussian_density();
        let dom = BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let f = sample_on(&dens, dom, vec![32, 32], |x| {
            if x[1] > 0.25 && x[1] < 1.0 {
                1.0
            } else {
                0.0
            }
        });
        let prof = decreasing_rearrangement(&f, dens.c_mu(), &tol()).unwrap();
        let m = distribution_function(&f, 0.5);
        assert!(m > 0.0);
        assert_eq!(prof.eval_step(0.5 * m), 1.0);
        // Right continuity: at s = m the profile has already dropped.
        assert_eq!(prof.eval_step(m), 0.0);
        assert_eq!(prof.eval_step(1.0001 * m), 0.0);
    }

    #[test]
    fn equimeasurability_at_many_levels() {
        let dens = gaussian_density();
        let dom = BoxDomain::new(vec![-2.5, -2.5], vec![2.5, 2.5]).unwrap();
        let f = sample_on(&dens, dom.clone(), vec![40, 40], |x| {
            bump(x, &dom) * (1.0 + 0.4 * (1.7 * x[0] + 0.9 * x[1]).sin())
        });
        let prof = decreasing_rearrangement(&f, dens.c_mu(), &tol()).unwrap();
        let cell = prof.max_cell_mass();
        let top = prof.sup();
        for i in 0..50 {
            let t = top * (i as f64 + 0.5) / 50.0;
            let a = distribution_function(&f, t);
            let b = prof.distribution(t);
            assert!(
                (a - b).abs() <= cell + 1e-12,
                "level {t}: {a} vs {b} (cell {cell})"
            );
        }
    }

    #[test]
    fn step_profile_monotone_and_composition_reverses() {
        let dens = gaussian_density();
        let dom = BoxDomain::new(vec![-2.5, -2.5], vec![2.5, 2.5]).unwrap();
        let f = sample_on(&dens, dom.clone(), vec![24, 24], |x| bump(x, &dom));
        let prof = decreasing_rearrangement(&f, dens.c_mu(), &tol()).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let s = prof.total_mass * i as f64 / 200.0;
            let v = prof.eval_step(s);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        // Composed with the decreasing tail, the slice profile gains
        // its largest values far out: non-decreasing in x_N.
        let mut prev = -1.0;
        for i in 0..=200 {
            let x = prof.lambda + 6.0 * i as f64 / 200.0;
            let v = prof.ubigstar(x);
            assert!(v + 1e-15 >= prev, "ubigstar drops at x={x}");
            prev = v;
        }
    }

    #[test]
    fn cavalieri_norms_agree() {
        let dens = gaussian_density();
        let dom = BoxDomain::new(vec![-2.5, -2.5], vec![2.5, 2.5]).unwrap();
        let f = sample_on(&dens, dom.clone(), vec![48, 48], |x| {
            bump(x, &dom) * (1.0 + 0.3 * (2.1 * x[0] - 1.3 * x[1]).cos())
        });
        let prof = decreasing_rearrangement(&f, dens.c_mu(), &tol()).unwrap();
        for p in [1.0, 2.0] {
            let rep = cavalieri_report(&f, &prof, p, 6000, &tol()).unwrap();
            assert!(
                rep.pass,
                "p={p}: lhs {} rhs {} tol {}",
                rep.lhs, rep.rhs, rep.tol
            );
            // The declared tolerance is not vacuous.
            assert!((rep.lhs - rep.rhs).abs() <= rep.tol);
            assert!(rep.tol < 0.05 * rep.lhs.max(1e-12));
        }
        let inf = cavalieri_report(&f, &prof, f64::INFINITY, 8, &tol()).unwrap();
        assert!(inf.pass);
        assert_eq!(inf.lhs, inf.rhs);
    }

    #[test]
    fn polya_szego_gap_zero_for_profile_shaped_function() {
        // A function of x_N alone, monotone, on a near-full window: its
        // rearrangement is itself up to tail truncation.
        let dens = gaussian_density();
        let dom = BoxDomain::new(vec![-6.0, -1.2], vec![6.0, 6.5]).unwrap();
        let f = sample_on(&dens, dom, vec![64, 256], |x| 1.0 + (0.8 * x[1]).tanh());
        let rep = polya_szego_gap(&f, dens.c_mu(), f64::INFINITY, 8000, 1e-3, &tol()).unwrap();
        assert!(
            rep.gap.abs() <= 2e-3 * rep.lhs.max(1e-12),
            "lhs {} rhs {}",
            rep.lhs,
            rep.rhs
        );
    }

    #[test]
    fn polya_szego_strict_for_bumps() {
        let dens = gaussian_density();
        let dom = BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let f = sample_on(&dens, dom.clone(), vec![40, 40], |x| bump(x, &dom));
        // Sampled traces of a boundary-vanishing bump are O(h^2).
        let rep = polya_szego_gap(&f, dens.c_mu(), 0.01, 4000, 1e-6, &tol()).unwrap();
        assert!(rep.pass, "lhs {} rhs {} gap {}", rep.lhs, rep.rhs, rep.gap);
        assert!(
            rep.gap > 0.1 * rep.rhs,
            "expected a strict energy drop: lhs {} rhs {}",
            rep.lhs,
            rep.rhs
        );
    }

    #[test]
    fn polya_szego_rejects_bad_inputs() {
        let dens = gaussian_density();
        let dom = BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let neg = sample_on(&dens, dom.clone(), vec![8, 8], |x| x[0]);
        assert!(polya_szego_gap(&neg, dens.c_mu(), 1e-6, 400, 1e-6, &tol()).is_err());
        let nonzero_boundary = sample_on(&dens, dom, vec![8, 8], |_| 1.0);
        assert!(
            polya_szego_gap(&nonzero_boundary, dens.c_mu(), 1e-6, 400, 1e-6, &tol()).is_err()
        );
    }

    #[test]
    fn poincare_holds_for_bumps() {
        let dens = gaussian_density();
        let dom = BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let f = sample_on(&dens, dom.clone(), vec![40, 40], |x| {
            bump(x, &dom) * (1.0 + 0.2 * (x[0] * 2.3).sin())
        });
        let rep = poincare_bound(&f, dens.c_mu(), 0.01, 1e-6, &tol()).unwrap();
        assert!(
            rep.ratio >= rep.k_bound,
            "ratio {} vs bound {}",
            rep.ratio,
            rep.k_bound
        );
        assert!(rep.k_bound > 0.0);
    }

    #[test]
    fn poincare_tight_for_lifted_eigenfunction() {
        // G spans the slice {x_N > lambda} up to truncation, and u is the
        // extremal 1-D profile itself: the quotient meets the bound.
        let dens = gaussian_density();
        let lambda = 0.3;
        let eig =
            dirichlet_left_smallest(&SigmaProfile::Gaussian { c: 0.5 }, lambda, 8.0, 1200, &tol())
                .unwrap();
        let nodes = eig.nodes.clone();
        let vecv = eig.vector.clone();
        let interp = move |t: f64| -> f64 {
            if t <= nodes[0] {
                return vecv[0] * (t - lambda) / (nodes[0] - lambda);
            }
            let k = nodes.partition_point(|&x| x <= t);
            if k >= nodes.len() {
                return vecv[nodes.len() - 1];
            }
            let (x0, x1) = (nodes[k - 1], nodes[k]);
            vecv[k - 1] + (vecv[k] - vecv[k - 1]) * (t - x0) / (x1 - x0)
        };
        let dom = BoxDomain::new(vec![-6.0, lambda], vec![6.0, 8.0]).unwrap();
        let f = sample_on(&dens, dom, vec![48, 400], |x| interp(x[1]));
        let rep = poincare_bound(&f, dens.c_mu(), f64::INFINITY, 1e-6, &tol()).unwrap();
        assert!(
            (rep.ratio - rep.k_bound).abs() <= 0.02 * rep.k_bound,
            "ratio {} vs bound {}",
            rep.ratio,
            rep.k_bound
        );
        // Midpoint cell masses bias the recovered level by O(h^2).
        assert!((rep.lambda - lambda).abs() < 1e-4);
    }

    #[test]
    fn hardy_saturates_for_constants_and_superlevel_sets() {
        let dens = gaussian_density();
        let dom = BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let ones = sample_on(&dens, dom.clone(), vec![24, 24], |_| 1.0);
        let prof = decreasing_rearrangement(&ones, dens.c_mu(), &tol()).unwrap();
        let slab = RegionSpec::SlabUnion {
            intervals: vec![(-0.5, 0.75)],
        };
        let rep = hardy_check(&ones, &slab, &prof).unwrap();
        assert!((rep.lhs - rep.mass_e).abs() < 1e-12);
        assert!((rep.rhs - rep.mass_e).abs() < 1e-12 * (1.0 + rep.mass_e));
        assert!(rep.pass);

        // Super-level sets saturate Hardy-Littlewood exactly.
        let f = sample_on(&dens, dom.clone(), vec![24, 24], |x| bump(x, &dom));
        let prof = decreasing_rearrangement(&f, dens.c_mu(), &tol()).unwrap();
        let level = 0.4 * prof.sup();
        let in_e: Vec<bool> = f.values.iter().map(|&v| v.abs() > level).collect();
        let rep = hardy_check_cells(&f, &in_e, &prof).unwrap();
        assert!(
            (rep.lhs - rep.rhs).abs() <= 1e-11 * (1.0 + rep.rhs),
            "lhs {} rhs {}",
            rep.lhs,
            rep.rhs
        );
    }

    #[test]
    fn hardy_rejects_regions_leaving_the_domain() {
        let dens = gaussian_density();
        let dom = BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let f = sample_on(&dens, dom, vec![8, 8], |_| 1.0);
        let prof = decreasing_rearrangement(&f, dens.c_mu(), &tol()).unwrap();
        let slab = RegionSpec::SlabUnion {
            intervals: vec![(1.0, 3.0)],
        };
        assert!(hardy_check(&f, &slab, &prof).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn hardy_holds_for_random_slabs_and_waves(
            a in -1.8f64..0.5,
            len in 0.2f64..1.4,
            freq in 0.5f64..2.5,
            amp in 0.0f64..0.8,
        ) {
            let dens = gaussian_density();
            let dom = BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
            let f = sample_on(&dens, dom.clone(), vec![20, 20], |x| {
                bump(x, &dom) * (1.0 + amp * (freq * x[0]).sin())
            });
            let prof = decreasing_rearrangement(&f, dens.c_mu(), &tol()).unwrap();
            let slab = RegionSpec::SlabUnion { intervals: vec![(a, a + len)] };
            let rep = hardy_check(&f, &slab, &prof).unwrap();
            prop_assert!(rep.lhs <= rep.rhs + 1e-12 * (1.0 + rep.rhs));
        }
    }
}
