//! Weighted measure, weighted perimeter, and the isoperimetric
//! certificate comparing regions against the mass-matched slice.
//!
//! The measure is a [`ProductDensity`]: canonical cross-axis densities
//! `g_i = exp(-A_i^2/2) A_i'` times the Gaussian weight `exp(-x_N^2/2)` on
//! the last axis. For that measure the half-space slice `{x_N > lambda}`
//! is conjectured (and, through the pushforward chain, provable) to
//! minimize weighted perimeter among regions of equal mass:
//!
//! ```text
//! P(M) >= W * exp(-lambda*^2 / 2),   mu(M) = W * T(lambda*),
//! ```
//!
//! where `W` is the cross-sectional mass and `T` the unnormalized Gaussian
//! tail. [`isoperimetric_check`] evaluates both sides at two quadrature
//! levels and certifies the gap with a tolerance taken from the observed
//! refinement, so "pass" is a statement about numbers, not about hope.
//!
//! Perimeters are De Giorgi style: the weighted surface measure of the
//! topological boundary inside the open support of the density. Boundary
//! pieces on the support edge itself (where the weight vanishes or the
//! region leaves the support) carry no perimeter.

use crate::density::ProductDensity;
use crate::error::{Error, Result};
use crate::quad;
use crate::region::{Profile, RegionSpec};
use crate::specfun::{self, Tolerance};
use crate::transport::TransportMap;

/// Per-axis-side tail mass discarded when truncating cross windows.
const WINDOW_TAIL: f64 = 1e-11;

/// Truncated integration windows for all cross axes.
fn cross_windows(dens: &ProductDensity, tail_tol: f64) -> Result<Vec<(f64, f64)>> {
    (0..dens.cross_dim())
        .map(|i| dens.axis_truncation(i, tail_tol))
        .collect()
}

/// Composite-Simpson nodes and weights per cross axis.
fn simpson_axes(windows: &[(f64, f64)], cells: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    windows
        .iter()
        .map(|&(a, b)| quad::simpson_rule(a, b, cells))
        .collect()
}

/// Visit the tensor product of per-axis quadrature nodes with the combined
/// weight.
fn for_each_tensor(axes: &[(Vec<f64>, Vec<f64>)], mut f: impl FnMut(&[f64], f64)) {
    let dim = axes.len();
    let total: usize = axes.iter().map(|a| a.0.len()).product();
    let mut x = vec![0.0; dim];
    for flat in 0..total {
        let mut rem = flat;
        let mut w = 1.0;
        for k in (0..dim).rev() {
            let n = axes[k].0.len();
            let i = rem % n;
            rem /= n;
            x[k] = axes[k].0[i];
            w *= axes[k].1[i];
        }
        f(&x, w);
    }
}

/// Product of canonical cross-axis densities at `xp`.
fn cross_density(dens: &ProductDensity, xp: &[f64]) -> f64 {
    let mut log = 0.0;
    for (i, &t) in xp.iter().enumerate() {
        log += dens.axis_log_density(i, t);
    }
    log.exp()
}

/// Mass, perimeter, and cross-sectional mass of a region.
#[derive(Debug, Clone, Copy)]
pub struct MeasureReport {
    pub mass: f64,
    pub perimeter: f64,
    /// Cross-sectional mass `W` of the truncated window, measured with the
    /// same quadrature as `mass` so that ratios are internally consistent.
    pub cross_mass: f64,
}

/// Level `lambda*` and perimeter of the slice with the given mass:
/// `mass = cross_mass * T(lambda*)`, bound `= cross_mass * e^{-lambda*^2/2}`.
pub fn matched_slice_bound(mass: f64, cross_mass: f64, tol: &Tolerance) -> Result<(f64, f64)> {
    if !(mass > 0.0) || !(cross_mass > 0.0) {
        return Err(Error::Precondition(format!(
            "matched slice needs positive masses, got {mass:.3e} / {cross_mass:.3e}"
        )));
    }
    let lambda = specfun::gauss_tail_inv(mass / cross_mass, tol)?;
    Ok((lambda, cross_mass * (-0.5 * lambda * lambda).exp()))
}

/// Compute mass and weighted perimeter of `region` under `dens`.
///
/// `cells` controls the per-axis Simpson resolution for graph regions;
/// the other kinds reduce to one-dimensional adaptive quadratures.
pub fn measure_and_perimeter(
    dens: &ProductDensity,
    region: &RegionSpec,
    cells: usize,
    tol: &Tolerance,
) -> Result<MeasureReport> {
    region.validate(dens.cross_dim(), f64::INFINITY)?;
    let windows = cross_windows(dens, WINDOW_TAIL)?;
    match region {
        RegionSpec::HalfspaceSlice { lambda } => {
            let w = axis_masses_product(dens, &windows, tol)?;
            Ok(MeasureReport {
                mass: w * specfun::gauss_tail(*lambda)?,
                perimeter: w * (-0.5 * lambda * lambda).exp(),
                cross_mass: w,
            })
        }
        RegionSpec::SlabUnion { intervals } => {
            let w = axis_masses_product(dens, &windows, tol)?;
            let mut mass = 0.0;
            let mut perim = 0.0;
            for &(lo, hi) in intervals {
                mass += specfun::gauss_tail(lo)? - specfun::gauss_tail(hi)?;
                perim += (-0.5 * lo * lo).exp() + (-0.5 * hi * hi).exp();
            }
            Ok(MeasureReport {
                mass: w * mass,
                perimeter: w * perim,
                cross_mass: w,
            })
        }
        RegionSpec::Graph { profile } => {
            let axes = simpson_axes(&windows, cells.max(8));
            let d = dens.cross_dim();
            let mut grad = vec![0.0; d];
            let mut mass = 0.0;
            let mut perim = 0.0;
            let mut w_cross = 0.0;
            let mut failed: Option<f64> = None;
            for_each_tensor(&axes, |xp, wq| {
                let g = cross_density(dens, xp);
                if !g.is_finite() {
                    failed = Some(g);
                    return;
                }
                let u = profile.eval(xp);
                profile.grad_into(xp, &mut grad);
                let slope2: f64 = grad.iter().map(|v| v * v).sum();
                w_cross += wq * g;
                mass += wq * g * specfun::tail_raw(u);
                perim += wq * g * (-0.5 * u * u).exp() * (1.0 + slope2).sqrt();
            });
            if let Some(bad) = failed {
                return Err(Error::Domain(format!(
                    "cross density not finite on the integration window ({bad:e})"
                )));
            }
            Ok(MeasureReport {
                mass,
                perimeter: perim,
                cross_mass: w_cross,
            })
        }
        RegionSpec::BoxUnion { boxes } => {
            let w = axis_masses_product(dens, &windows, tol)?;
            let d = dens.cross_dim();
            let mut mass = 0.0;
            let mut perim = 0.0;
            for b in boxes {
                // Per-axis interval masses for this box.
                let mut axis_mass = Vec::with_capacity(d);
                for i in 0..d {
                    axis_mass.push(dens.axis_mass(i, b.lo[i], b.hi[i], tol)?);
                }
                let last_mass = ProductDensity::gaussian_axis_mass(b.lo[d], b.hi[d])?;
                mass += axis_mass.iter().product::<f64>() * last_mass;

                // Cross-axis faces: density at the face coordinate times
                // the other axes' interval masses.
                for i in 0..d {
                    let others: f64 = (0..d)
                        .filter(|&j| j != i)
                        .map(|j| axis_mass[j])
                        .product::<f64>()
                        * last_mass;
                    perim += others * (dens.axis_density(i, b.lo[i]) + dens.axis_density(i, b.hi[i]));
                }
                // Last-axis faces (two horizontal lids).
                let others: f64 = axis_mass.iter().product();
                perim += others
                    * ((-0.5 * b.lo[d] * b.lo[d]).exp() + (-0.5 * b.hi[d] * b.hi[d]).exp());
            }
            Ok(MeasureReport {
                mass,
                perimeter: perim,
                cross_mass: w,
            })
        }
    }
}

fn axis_masses_product(
    dens: &ProductDensity,
    windows: &[(f64, f64)],
    tol: &Tolerance,
) -> Result<f64> {
    let mut w = 1.0;
    for (i, &(lo, hi)) in windows.iter().enumerate() {
        w *= dens.axis_mass(i, lo, hi, tol)?;
    }
    Ok(w)
}

/// Two-level isoperimetric certificate for one region.
#[derive(Debug, Clone, Copy)]
pub struct IsoperimetryCertificate {
    pub mass: f64,
    pub perimeter: f64,
    /// Level of the mass-matched slice.
    pub lambda_star: f64,
    /// Perimeter of that slice — the lower bound being certified.
    pub bound: f64,
    /// `perimeter - bound` at the fine level.
    pub gap: f64,
    /// Certification tolerance: twice the observed coarse-to-fine movement
    /// of the gap, plus a floor for roundoff.
    pub tol_geom: f64,
    /// `gap >= -tol_geom`.
    pub pass: bool,
    /// `|gap| <= tol_geom`: the region is (numerically) a minimizer.
    pub equality: bool,
}

/// Evaluate the isoperimetric comparison at resolutions `cells` and
/// `2 * cells` and certify the gap against the refinement movement.
pub fn isoperimetric_check(
    dens: &ProductDensity,
    region: &RegionSpec,
    cells: usize,
    tol: &Tolerance,
) -> Result<IsoperimetryCertificate> {
    let gap_at = |mp: &MeasureReport| -> Result<(f64, f64, f64)> {
        let (lambda, bound) = matched_slice_bound(mp.mass, mp.cross_mass, tol)?;
        Ok((lambda, bound, mp.perimeter - bound))
    };
    let coarse = measure_and_perimeter(dens, region, cells, tol)?;
    let fine = measure_and_perimeter(dens, region, cells * 2, tol)?;
    let (_, _, gap_c) = gap_at(&coarse)?;
    let (lambda_star, bound, gap_f) = gap_at(&fine)?;
    let tol_geom = 2.0 * (gap_f - gap_c).abs() + 1e-9 * (1.0 + fine.perimeter.abs());
    Ok(IsoperimetryCertificate {
        mass: fine.mass,
        perimeter: fine.perimeter,
        lambda_star,
        bound,
        gap: gap_f,
        tol_geom,
        pass: gap_f >= -tol_geom,
        equality: gap_f.abs() <= tol_geom,
    })
}

/// Both links of the pushforward comparison for a graph region over
/// mapped axes.
#[derive(Debug, Clone, Copy)]
pub struct ChainReport {
    /// Weighted perimeter of the graph region.
    pub p_direct: f64,
    /// Perimeter of the mapped region in the Gaussian image, pulled back
    /// to the source coordinates (gradient components divided by `A_i'`).
    pub p_mapped: f64,
    /// Gaussian slice bound for the (mass-matched) image.
    pub gauss_bound: f64,
    pub tol: f64,
    /// `p_direct >= p_mapped - tol` (map does not contract perimeter).
    pub link1: bool,
    /// `p_mapped >= gauss_bound - tol` (Gaussian isoperimetry).
    pub link2: bool,
}

/// Evaluate `P(M) >= P_image(T(M)) >= slice bound` for the epigraph of
/// `profile` under a density whose cross axes are all maps.
pub fn pushforward_chain_check(
    dens: &ProductDensity,
    maps: &[TransportMap],
    profile: &Profile,
    cells: usize,
    tol: &Tolerance,
) -> Result<ChainReport> {
    let d = dens.cross_dim();
    if maps.len() != d {
        return Err(Error::Precondition(format!(
            "need one map per cross axis: {} maps for {d} axes",
            maps.len()
        )));
    }
    let windows = cross_windows(dens, WINDOW_TAIL)?;
    let level = |cells: usize| -> Result<(f64, f64, f64, f64)> {
        let axes = simpson_axes(&windows, cells.max(8));
        let mut grad = vec![0.0; d];
        let mut mass = 0.0;
        let mut w_cross = 0.0;
        let mut p_direct = 0.0;
        let mut p_mapped = 0.0;
        for_each_tensor(&axes, |xp, wq| {
            let g = cross_density(dens, xp);
            let u = profile.eval(xp);
            profile.grad_into(xp, &mut grad);
            let mut s_direct = 1.0;
            let mut s_mapped = 1.0;
            for (k, &gk) in grad.iter().enumerate() {
                let ap = maps[k].deriv(xp[k]);
                s_direct += gk * gk;
                s_mapped += (gk / ap) * (gk / ap);
            }
            let e = (-0.5 * u * u).exp();
            mass += wq * g * specfun::tail_raw(u);
            w_cross += wq * g;
            p_direct += wq * g * e * s_direct.sqrt();
            p_mapped += wq * g * e * s_mapped.sqrt();
        });
        let (_, bound) = matched_slice_bound(mass, w_cross, tol)?;
        Ok((p_direct, p_mapped, bound, mass))
    };
    let (pd_c, pm_c, b_c, _) = level(cells)?;
    let (pd_f, pm_f, b_f, _) = level(cells * 2)?;
    let movement = (pd_f - pd_c).abs().max((pm_f - pm_c).abs()).max((b_f - b_c).abs());
    let tol_chain = 2.0 * movement + 1e-9 * (1.0 + pd_f.abs());
    Ok(ChainReport {
        p_direct: pd_f,
        p_mapped: pm_f,
        gauss_bound: b_f,
        tol: tol_chain,
        link1: pd_f >= pm_f - tol_chain,
        link2: pm_f >= b_f - tol_chain,
    })
}

/// Volume-preserving perturbation study of a slice.
#[derive(Debug, Clone)]
pub struct VariationSpec {
    /// Level of the unperturbed slice `{x_N > lambda}`.
    pub lambda: f64,
    /// Perturbation direction: the boundary moves to
    /// `x_N = lambda + eps * u(x') + s(eps)`.
    pub profile: Profile,
    /// Base step; the curve is sampled at `+-eps` and `+-eps/2`.
    pub eps: f64,
    /// Per-axis Simpson cells for the cross quadrature.
    pub cells: usize,
}

#[derive(Debug, Clone)]
pub struct VariationReport {
    pub p0: f64,
    /// Richardson-extrapolated `dP/deps` at `eps = 0`; zero for a critical
    /// point of the isoperimetric problem.
    pub p_prime: f64,
    /// Richardson-extrapolated second derivative; nonnegative when the
    /// slice is stable in this direction.
    pub p_second: f64,
    /// Mass-restoring shifts `s(eps)` for each sampled step.
    pub shifts: Vec<(f64, f64)>,
}

/// Sample the perimeter of the mass-corrected perturbed slice at
/// `eps in {-e, -e/2, 0, e/2, e}` on one fixed quadrature grid
/// (so grid bias cancels in the differences) and extrapolate the
/// derivatives at zero.
pub fn variation_curve(
    dens: &ProductDensity,
    spec: &VariationSpec,
    tol: &Tolerance,
) -> Result<VariationReport> {
    if !(spec.eps > 0.0) || !spec.eps.is_finite() {
        return Err(Error::Precondition(format!(
            "variation step must be positive, got {}",
            spec.eps
        )));
    }
    let windows = cross_windows(dens, WINDOW_TAIL)?;
    let axes = simpson_axes(&windows, spec.cells.max(8));
    let d = dens.cross_dim();

    // Precompute densities, profile values, and gradient norms at all
    // quadrature points once.
    let mut gs = Vec::new();
    let mut wqs = Vec::new();
    let mut us = Vec::new();
    let mut slope2s = Vec::new();
    {
        let mut grad = vec![0.0; d];
        for_each_tensor(&axes, |xp, wq| {
            gs.push(cross_density(dens, xp));
            wqs.push(wq);
            us.push(spec.profile.eval(xp));
            spec.profile.grad_into(xp, &mut grad);
            slope2s.push(grad.iter().map(|v| v * v).sum::<f64>());
        });
    }
    let mass_at = |eps: f64, s: f64| -> f64 {
        gs.iter()
            .zip(&wqs)
            .zip(&us)
            .map(|((g, wq), u)| wq * g * specfun::tail_raw(spec.lambda + eps * u + s))
            .sum()
    };
    let dmass_ds = |eps: f64, s: f64| -> f64 {
        // d/ds of the tail integral: minus the boundary density.
        -gs.iter()
            .zip(&wqs)
            .zip(&us)
            .map(|((g, wq), u)| {
                let t = spec.lambda + eps * u + s;
                wq * g * (-0.5 * t * t).exp()
            })
            .sum::<f64>()
    };
    let perim_at = |eps: f64, s: f64| -> f64 {
        gs.iter()
            .zip(&wqs)
            .zip(us.iter().zip(&slope2s))
            .map(|((g, wq), (u, sl2))| {
                let t = spec.lambda + eps * u + s;
                wq * g * (-0.5 * t * t).exp() * (1.0 + eps * eps * sl2).sqrt()
            })
            .sum()
    };

    let m0 = mass_at(0.0, 0.0);
    let solve_shift = |eps: f64| -> Result<f64> {
        let mut s = 0.0;
        for _ in 0..tol.max_iter.max(50) {
            let r = mass_at(eps, s) - m0;
            if r.abs() <= 1e-13 * (1.0 + m0) {
                return Ok(s);
            }
            let dm = dmass_ds(eps, s);
            if !(dm < 0.0) {
                return Err(Error::Convergence(format!(
                    "mass correction stalled at eps={eps}, s={s}"
                )));
            }
            s -= r / dm;
        }
        Err(Error::Convergence(format!(
            "mass correction did not converge at eps={eps}"
        )))
    };

    let p0 = perim_at(0.0, 0.0);
    let steps = [spec.eps, 0.5 * spec.eps];
    let mut shifts = Vec::new();
    let mut d1 = [0.0; 2];
    let mut d2 = [0.0; 2];
    for (k, &e) in steps.iter().enumerate() {
        let sp = solve_shift(e)?;
        let sm = solve_shift(-e)?;
        shifts.push((e, sp));
        shifts.push((-e, sm));
        let pp = perim_at(e, sp);
        let pm = perim_at(-e, sm);
        d1[k] = (pp - pm) / (2.0 * e);
        d2[k] = (pp - 2.0 * p0 + pm) / (e * e);
    }
    // Richardson on the central differences (steps e and e/2).
    let p_prime = (4.0 * d1[1] - d1[0]) / 3.0;
    let p_second = (4.0 * d2[1] - d2[0]) / 3.0;
    Ok(VariationReport {
        p0,
        p_prime,
        p_second,
        shifts,
    })
}
