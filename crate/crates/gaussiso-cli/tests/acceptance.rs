//! Acceptance gate: ten end-to-end certificates over the full pipeline.
//!
//! Each criterion prints exactly one `PASS`/`FAIL` line with its key
//! numbers and runtime; failures are collected so every line always
//! prints, and the test panics at the end if any criterion failed.
//! Tolerances and time budgets are pinned here, not read from files.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use gaussiso::config::AxisConfig;
use gaussiso::corpus;
use gaussiso::density::{AxisFactor, AxisPotential, ProductDensity};
use gaussiso::grid::{BoxDomain, GridFunction, UniformGrid};
use gaussiso::isoperimetry::{
    isoperimetric_check, pushforward_chain_check, variation_curve, VariationSpec,
};
use gaussiso::pde::{comparison_certificate, solve_nodes, CoefficientField, EllipticProblem};
use gaussiso::rearrangement::{
    cavalieri_report, decreasing_rearrangement, distribution_function, hardy_check,
    poincare_bound, polya_szego_gap,
};
use gaussiso::region::{Profile, RegionSpec, WaveTerm};
use gaussiso::specfun::{Tolerance, SQRT_2PI};
use gaussiso::spectral::{stability_report, SigmaProfile, WeightedNeumannProblem};
use gaussiso::transport::{build_map, potential_from_map, CubicMap, GridSpec};

const TOL_IDENTITY: f64 = 1e-8;
const TOL_APRIME: f64 = 1e-7;
const TOL_SECOND_AT_ZERO: f64 = 1e-3;
const TOL_CLOSED_FORM: f64 = 1e-8;
const SHRINK_FACTOR: f64 = 2.0;
/// Coarse tolerances below 50x the roundoff floor are already converged;
/// a shrink ratio is meaningless at the floor.
const FLOOR_GUARD: f64 = 50.0;
const TOL_KAPPA_ANCHOR: f64 = 0.02;
const TOL_TAU_ANCHOR: f64 = 1e-6;
const TOL_KAPPA_COUNTER: f64 = 0.005;
const TOL_P_PRIME: f64 = 1e-5;
const TOL_P_SECOND_NEUTRAL: f64 = 1e-4;
const MIN_RATE: f64 = 1.8;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn gaussian_2d() -> ProductDensity {
    ProductDensity::new(
        vec![AxisFactor::Potential(AxisPotential::gaussian())],
        &tol(),
    )
    .unwrap()
}

fn named_families() -> Vec<(&'static str, AxisPotential)> {
    vec![
        ("gaussian", AxisPotential::gaussian()),
        ("power-1", AxisPotential::power(1.0).unwrap()),
        ("power-2", AxisPotential::power(2.0).unwrap()),
        ("power-3", AxisPotential::power(3.0).unwrap()),
        ("quadratic-0.5", AxisPotential::quadratic(0.5).unwrap()),
        ("quadratic-1", AxisPotential::quadratic(1.0).unwrap()),
    ]
}

fn density_for(axes: &[AxisConfig]) -> ProductDensity {
    let factors = axes
        .iter()
        .map(|a| AxisFactor::Potential(a.potential().unwrap()))
        .collect();
    ProductDensity::new(factors, &tol()).unwrap()
}

fn budget(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("{what} took {elapsed:?}, budget {limit:?}"))
    }
}

/// 1. Derivative identity at every map node for each named family.
fn criterion_transport_identity() -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for (name, pot) in named_families() {
        let t0 = Instant::now();
        let map = build_map(&pot, &GridSpec::default(), &tol()).map_err(|e| format!("{e}"))?;
        let c = map.normalization();
        let (xs, ys, aps) = map.nodes();
        let mut resid = 0.0f64;
        for ((&x, &y), &ap) in xs.iter().zip(ys).zip(aps) {
            let lhs = (-0.5 * y * y).exp() * ap;
            let rhs = c * SQRT_2PI * pot.weight(x);
            resid = resid.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
        }
        let dt = t0.elapsed();
        slowest = slowest.max(dt);
        budget(dt, Duration::from_secs(1), name)?;
        if resid > TOL_IDENTITY {
            return Err(format!("{name}: residual {resid:.3e} > {TOL_IDENTITY:.0e}"));
        }
        worst = worst.max(resid);
    }
    Ok(format!(
        "6 families, worst residual {worst:.3e}, slowest {slowest:?}"
    ))
}

/// 2. Non-contraction floor over random convex potentials + named families.
fn criterion_non_contraction() -> Result<String, String> {
    let t0 = Instant::now();
    let mut pots: Vec<(String, AxisPotential)> = named_families()
        .into_iter()
        .map(|(n, p)| (String::from(n), p))
        .collect();
    pots.extend(corpus::convex_potential_corpus(2, 100).map_err(|e| format!("{e}"))?);
    let mut worst = f64::INFINITY;
    for (name, pot) in &pots {
        let map = build_map(pot, &GridSpec::default(), &tol()).map_err(|e| format!("{name}: {e}"))?;
        let cert = map.certify_noncontraction(8);
        if cert.min_aprime < 1.0 - TOL_APRIME {
            return Err(format!(
                "{name}: min A' = {:.12} at {:.4}",
                cert.min_aprime, cert.argmin
            ));
        }
        worst = worst.min(cert.min_aprime);
    }
    let dt = t0.elapsed();
    budget(dt, Duration::from_secs(10), "corpus")?;
    Ok(format!(
        "{} potentials, min A' = {worst:.9}, total {dt:?}",
        pots.len()
    ))
}

/// 3. Potential recovered from the cubic map: curvature at the origin and
/// the closed form at sample points.
fn criterion_cubic_map_anchor() -> Result<String, String> {
    let mut worst_second = 0.0f64;
    let mut worst_value = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let rec = potential_from_map(&CubicMap { alpha }, -6.0, 6.0, 961)
            .map_err(|e| format!("alpha={alpha}: {e}"))?;
        let mid = rec
            .xs
            .iter()
            .position(|x| x.abs() < 1e-9)
            .ok_or_else(|| String::from("no sample at the origin"))?;
        let err_second = (rec.b_second[mid] + 6.0 * alpha).abs();
        if err_second > TOL_SECOND_AT_ZERO {
            return Err(format!(
                "alpha={alpha}: B''(0) = {:.6}, want {:.6} within {TOL_SECOND_AT_ZERO}",
                rec.b_second[mid],
                -6.0 * alpha
            ));
        }
        worst_second = worst_second.max(err_second);
        // B(x) = ln sqrt(2 pi) + T(x)^2/2 - x^2/2 - ln T'(x) for the
        // normalization c = 1.
        let closed = |x: f64| {
            let t = x + alpha * x * x * x;
            SQRT_2PI.ln() + 0.5 * t * t - 0.5 * x * x - (1.0 + 3.0 * alpha * x * x).ln()
        };
        for k in 0..20 {
            let i = k * (rec.xs.len() - 1) / 19;
            let err = (rec.b[i] - closed(rec.xs[i])).abs();
            if err > TOL_CLOSED_FORM {
                return Err(format!(
                    "alpha={alpha}: |B - closed form| = {err:.3e} at x = {:.3}",
                    rec.xs[i]
                ));
            }
            worst_value = worst_value.max(err);
        }
    }
    Ok(format!(
        "3 strengths, |B''(0)+6a| <= {worst_second:.2e}, closed form within {worst_value:.2e}"
    ))
}

/// 4. Volume-matched slice bound over the 200-region corpus at two grids.
fn criterion_region_bound() -> Result<String, String> {
    let t0 = Instant::now();
    let cases = corpus::region_corpus(7, 200);
    let mut floor_dominated = 0usize;
    let mut worst_gap = f64::INFINITY;
    for (i, case) in cases.iter().enumerate() {
        let dens = density_for(&case.axes);
        let coarse = isoperimetric_check(&dens, &case.region, 24, &tol())
            .map_err(|e| format!("case {i} {}: {e}", case.label))?;
        let fine = isoperimetric_check(&dens, &case.region, 48, &tol())
            .map_err(|e| format!("case {i} {}: {e}", case.label))?;
        if !fine.pass {
            return Err(format!(
                "case {i} {}: gap {:.3e} below -{:.3e}",
                case.label, fine.gap, fine.tol_geom
            ));
        }
        worst_gap = worst_gap.min(fine.gap);
        if fine.equality != case.expect_equality {
            return Err(format!(
                "case {i} {}: equality flag {} (expected {}), gap {:.3e}, tol {:.3e}",
                case.label, fine.equality, case.expect_equality, fine.gap, fine.tol_geom
            ));
        }
        let floor = 1e-9 * (1.0 + fine.perimeter.abs());
        if coarse.tol_geom < FLOOR_GUARD * floor {
            floor_dominated += 1;
        } else if coarse.tol_geom < SHRINK_FACTOR * fine.tol_geom {
            return Err(format!(
                "case {i} {}: tol_geom {:.3e} -> {:.3e}, shrink < {SHRINK_FACTOR}",
                case.label, coarse.tol_geom, fine.tol_geom
            ));
        }
    }
    let dt = t0.elapsed();
    budget(dt, Duration::from_secs(300), "corpus")?;
    Ok(format!(
        "200 regions, min gap {worst_gap:.2e}, {floor_dominated} converged at floor, total {dt:?}"
    ))
}

/// 5. Perimeter chain (no contraction, then the Gaussian bound) on the
/// graph regions of the same corpus.
fn criterion_pushforward_chain() -> Result<String, String> {
    let t0 = Instant::now();
    let mut checked = 0usize;
    for (i, case) in corpus::region_corpus(7, 200).iter().enumerate() {
        let RegionSpec::Graph { profile } = &case.region else {
            continue;
        };
        let maps: Vec<_> = case
            .axes
            .iter()
            .map(|a| build_map(&a.potential().unwrap(), &GridSpec::default(), &tol()).unwrap())
            .collect();
        let dens = ProductDensity::new(
            maps.iter().cloned().map(AxisFactor::Map).collect(),
            &tol(),
        )
        .map_err(|e| format!("case {i}: {e}"))?;
        let rep = pushforward_chain_check(&dens, &maps, profile, 48, &tol())
            .map_err(|e| format!("case {i} {}: {e}", case.label))?;
        if !rep.link1 || !rep.link2 {
            return Err(format!(
                "case {i} {}: direct {:.6} mapped {:.6} bound {:.6} tol {:.2e}",
                case.label, rep.p_direct, rep.p_mapped, rep.gauss_bound, rep.tol
            ));
        }
        checked += 1;
    }
    let dt = t0.elapsed();
    budget(dt, Duration::from_secs(300), "chain corpus")?;
    Ok(format!("{checked} graph regions, both links hold, total {dt:?}"))
}

/// 6. Spectral anchors: Gaussian weight meets the curvature ceiling with
/// equality; the flat weight on a short interval is flagged.
fn criterion_stability_anchors() -> Result<String, String> {
    let t0 = Instant::now();
    let anchor = WeightedNeumannProblem {
        domain: BoxDomain::new(vec![-8.0], vec![8.0]).map_err(|e| format!("{e}"))?,
        cells: vec![480],
        rho_axes: vec![SigmaProfile::Gaussian { c: 1.0 }],
    };
    let rep = stability_report(
        &anchor,
        &SigmaProfile::Gaussian { c: 1.0 },
        (-8.0, 8.0),
        &tol(),
    )
    .map_err(|e| format!("anchor: {e}"))?;
    if (rep.kappa1 - 2.0).abs() > TOL_KAPPA_ANCHOR {
        return Err(format!("anchor kappa1 = {:.6}, want 2 +- {TOL_KAPPA_ANCHOR}", rep.kappa1));
    }
    if (rep.tau - 2.0).abs() > TOL_TAU_ANCHOR {
        return Err(format!("anchor tau = {:.9}, want 2 +- {TOL_TAU_ANCHOR:.0e}", rep.tau));
    }
    if !rep.satisfied {
        return Err(String::from("anchor should satisfy the gap condition"));
    }
    let counter = WeightedNeumannProblem {
        domain: BoxDomain::new(vec![0.0], vec![2.0 * std::f64::consts::PI])
            .map_err(|e| format!("{e}"))?,
        cells: vec![480],
        rho_axes: vec![SigmaProfile::Constant],
    };
    let crep = stability_report(
        &counter,
        &SigmaProfile::Gaussian { c: 0.5 },
        (0.0, 2.0 * std::f64::consts::PI),
        &tol(),
    )
    .map_err(|e| format!("counterexample: {e}"))?;
    if (crep.kappa1 - 0.25).abs() > TOL_KAPPA_COUNTER {
        return Err(format!(
            "counterexample kappa1 = {:.6}, want 0.25 +- {TOL_KAPPA_COUNTER}",
            crep.kappa1
        ));
    }
    if (crep.tau - 1.0).abs() > TOL_TAU_ANCHOR {
        return Err(format!("counterexample tau = {:.9}, want 1", crep.tau));
    }
    if crep.satisfied {
        return Err(String::from("counterexample must be flagged not satisfied"));
    }
    let dt = t0.elapsed();
    budget(dt, Duration::from_secs(30), "anchors")?;
    Ok(format!(
        "kappa1 = {:.4} ~ tau = {:.6} satisfied; 1/4 = {:.4} < 1 not satisfied; total {dt:?}",
        rep.kappa1, rep.tau, crep.kappa1
    ))
}

/// 7. Slices are critical and stable under mass-preserving boundary
/// perturbations; the tilt direction is neutral.
fn criterion_slice_variation() -> Result<String, String> {
    let t0 = Instant::now();
    let dens = gaussian_2d();
    let wave = |amp: f64, freq: f64, phase: f64| Profile::WaveSum {
        base: 0.0,
        terms: vec![WaveTerm { axis: 0, amp, freq, phase }],
    };
    let profiles = vec![
        (String::from("sin-a"), wave(1.0, 1.4, 0.3), true),
        (String::from("sin-b"), wave(0.6, 2.2, 1.1), true),
        (
            String::from("tilt"),
            Profile::Affine { intercept: 0.0, slopes: vec![1.0] },
            false,
        ),
    ];
    let mut worst_prime = 0.0f64;
    for (name, profile, is_wave) in profiles {
        let spec = VariationSpec {
            lambda: 0.3,
            profile,
            eps: 0.04,
            cells: 240,
        };
        let rep = variation_curve(&dens, &spec, &tol()).map_err(|e| format!("{name}: {e}"))?;
        if rep.p_prime.abs() > TOL_P_PRIME {
            return Err(format!("{name}: P'(0) = {:.3e}", rep.p_prime));
        }
        worst_prime = worst_prime.max(rep.p_prime.abs());
        if is_wave && rep.p_second < -TOL_P_PRIME {
            return Err(format!("{name}: P''(0) = {:.3e} < 0", rep.p_second));
        }
        if !is_wave && rep.p_second.abs() > TOL_P_SECOND_NEUTRAL {
            return Err(format!(
                "{name}: neutral direction has P''(0) = {:.3e}",
                rep.p_second
            ));
        }
    }
    let dt = t0.elapsed();
    budget(dt, Duration::from_secs(30), "variation curves")?;
    Ok(format!(
        "3 profiles, |P'(0)| <= {worst_prime:.2e}, wave stable, tilt neutral, total {dt:?}"
    ))
}

/// 8. Rearrangement suite on 50 random bumps.
fn criterion_rearrangement_suite() -> Result<String, String> {
    let t0 = Instant::now();
    let dens = gaussian_2d();
    let dom = BoxDomain::new(vec![-4.0, -4.0], vec![4.0, 4.0]).map_err(|e| format!("{e}"))?;
    let grid = UniformGrid::new(dom.clone(), vec![40, 40]).map_err(|e| format!("{e}"))?;
    let slice = RegionSpec::HalfspaceSlice { lambda: 0.25 };
    for (i, bump) in corpus::bump_corpus(8, 50, 2).iter().enumerate() {
        let f = GridFunction::sample(
            grid.clone(),
            |x| bump.eval(x, &dom),
            |x| dens.phi(x).unwrap(),
        )
        .map_err(|e| format!("bump {i}: {e}"))?;
        let profile =
            decreasing_rearrangement(&f, dens.c_mu(), &tol()).map_err(|e| format!("bump {i}: {e}"))?;

        let sup = profile.sup();
        let cell = profile.max_cell_mass();
        for j in 0..50 {
            let t = sup * (j as f64 + 0.5) / 50.0;
            let diff = (distribution_function(&f, t) - profile.distribution(t)).abs();
            if diff > cell + 1e-12 {
                return Err(format!(
                    "bump {i}: distribution functions differ by {diff:.3e} > cell mass {cell:.3e}"
                ));
            }
        }

        for p in [1.0, 2.0, f64::INFINITY] {
            let cav = cavalieri_report(&f, &profile, p, 6000, &tol())
                .map_err(|e| format!("bump {i} p={p}: {e}"))?;
            if !cav.pass || (cav.lhs - cav.rhs).abs() > 2.0 * cav.tol.max(1e-15) {
                return Err(format!(
                    "bump {i} p={p}: lhs {:.9e} rhs {:.9e} tol {:.3e}",
                    cav.lhs, cav.rhs, cav.tol
                ));
            }
        }

        let boundary_tol = 0.05 * (1.0 + sup);
        let ps = polya_szego_gap(&f, dens.c_mu(), boundary_tol, 6000, 1e-6, &tol())
            .map_err(|e| format!("bump {i}: {e}"))?;
        if !ps.pass {
            return Err(format!("bump {i}: energy gap {:.3e} negative", ps.gap));
        }
        let poi = poincare_bound(&f, dens.c_mu(), boundary_tol, 1e-6, &tol())
            .map_err(|e| format!("bump {i}: {e}"))?;
        if !poi.pass {
            return Err(format!(
                "bump {i}: quotient {:.6} below bound {:.6}",
                poi.ratio, poi.k_bound
            ));
        }
        let hardy = hardy_check(&f, &slice, &profile).map_err(|e| format!("bump {i}: {e}"))?;
        if !hardy.pass {
            return Err(format!(
                "bump {i}: restricted integral {:.9e} exceeds {:.9e}",
                hardy.lhs, hardy.rhs
            ));
        }
    }
    let dt = t0.elapsed();
    budget(dt, Duration::from_secs(120), "bump suite")?;
    Ok(format!("50 bumps x 6 checks, total {dt:?}"))
}

/// 9. Elliptic comparison across coefficients, data, and grid levels,
/// plus manufactured-solution convergence.
fn criterion_elliptic_comparison() -> Result<String, String> {
    let t0 = Instant::now();
    let dens = gaussian_2d();
    let dom = BoxDomain::new(vec![-2.5, -2.5], vec![2.5, 2.5]).map_err(|e| format!("{e}"))?;
    let mut combos = 0usize;
    for (cname, coeff, c_ell) in corpus::pde_coefficients() {
        for (dname, datum) in corpus::pde_data() {
            for cells in [100usize, 200] {
                let p = EllipticProblem::new(
                    dom.clone(),
                    [cells, cells],
                    coeff,
                    c_ell,
                    corpus::datum_fn(datum, &dom),
                )
                .map_err(|e| format!("{cname}/{dname}/{cells}: {e}"))?;
                let rep = comparison_certificate(&p, &dens, &[0.5, 1.0, 2.0], &tol())
                    .map_err(|e| format!("{cname}/{dname}/{cells}: {e}"))?;
                if !rep.pointwise_pass {
                    return Err(format!(
                        "{cname}/{dname}/{cells}: pointwise violation {:.3e} > {:.3e}",
                        rep.max_violation, rep.tol_point
                    ));
                }
                for g in &rep.gradient {
                    if !g.pass {
                        return Err(format!(
                            "{cname}/{dname}/{cells} q={}: {:.6e} > {:.6e} + {:.2e}",
                            g.q, g.lhs, g.rhs, g.tol
                        ));
                    }
                }
                if !rep.linf_pass {
                    return Err(format!(
                        "{cname}/{dname}/{cells}: sup {:.6} above bound {:.6}",
                        rep.sup_u, rep.linf.bound
                    ));
                }
                combos += 1;
            }
        }
    }

    // Manufactured convergence: scalar and rotated coefficients.
    let pi = std::f64::consts::PI;
    let node_error = |coeff: CoefficientField, c_ell: f64, cells: usize| -> Result<f64, String> {
        let (lx, ly) = (dom.hi[0] - dom.lo[0], dom.hi[1] - dom.lo[1]);
        let (x0, y0) = (dom.lo[0], dom.lo[1]);
        let u0 = move |x: &[f64]| (pi * (x[0] - x0) / lx).sin() * (pi * (x[1] - y0) / ly).sin();
        let m = coeff.matrix();
        let f = move |x: &[f64]| {
            let (sx, cx) = (pi * (x[0] - x0) / lx).sin_cos();
            let (sy, cy) = (pi * (x[1] - y0) / ly).sin_cos();
            let (kx, ky) = (pi / lx, pi / ly);
            let ux = kx * cx * sy;
            let uy = ky * sx * cy;
            let uxx = -kx * kx * sx * sy;
            let uyy = -ky * ky * sx * sy;
            let uxy = kx * ky * cx * cy;
            let second = m[0][0] * uxx + 2.0 * m[0][1] * uxy + m[1][1] * uyy;
            let drift =
                (m[0][0] * ux + m[0][1] * uy) * (-x[0]) + (m[0][1] * ux + m[1][1] * uy) * (-x[1]);
            -(second + drift)
        };
        let p = EllipticProblem::new(dom.clone(), [cells, cells], coeff, c_ell, f)
            .map_err(|e| format!("{e}"))?;
        let rep = solve_nodes(&p, &dens, &tol()).map_err(|e| format!("{e}"))?;
        let mut worst = 0.0f64;
        for i in 0..rep.nodes[0] {
            for j in 0..rep.nodes[1] {
                let x = [dom.lo[0] + i as f64 * rep.h[0], dom.lo[1] + j as f64 * rep.h[1]];
                worst = worst.max((rep.node_value(i, j) - u0(&x)).abs());
            }
        }
        Ok(worst)
    };
    let mut worst_rate = f64::INFINITY;
    for (coeff, c_ell) in [
        (CoefficientField::ScalarPhi, 1.0),
        (
            CoefficientField::RotatedPhi {
                theta: pi / 6.0,
                ratio: 2.0,
            },
            2.0,
        ),
    ] {
        let e1 = node_error(coeff, c_ell, 32)?;
        let e2 = node_error(coeff, c_ell, 64)?;
        let rate = (e1 / e2).log2();
        if rate < MIN_RATE {
            return Err(format!(
                "convergence rate {rate:.3} < {MIN_RATE} ({e1:.3e} -> {e2:.3e})"
            ));
        }
        worst_rate = worst_rate.min(rate);
    }
    let dt = t0.elapsed();
    budget(dt, Duration::from_secs(300), "elliptic corpus")?;
    Ok(format!(
        "{combos} certificates (3 coefficients x 3 data x 2 levels), rate >= {worst_rate:.2}, total {dt:?}"
    ))
}

/// 10. Corrupted inputs must exit with code 2.
fn criterion_negative_controls() -> Result<String, String> {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let outdir = tempfile::tempdir().map_err(|e| format!("{e}"))?;
    let mut details = Vec::new();
    for (task, file) in [
        ("isoperimetry", "isoperimetry_corrupt.conf"),
        ("pde", "pde_corrupt.conf"),
    ] {
        let cfg: PathBuf = configs.join(file);
        let out = Command::new(env!("CARGO_BIN_EXE_gaussiso"))
            .args([
                task,
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                outdir.path().to_str().unwrap(),
            ])
            .output()
            .map_err(|e| format!("spawning {task}: {e}"))?;
        let code = out.status.code();
        if code != Some(2) {
            return Err(format!(
                "{file}: exit {code:?}, want 2; stdout: {}",
                String::from_utf8_lossy(&out.stdout)
            ));
        }
        details.push(format!("{task} exit 2"));
    }
    Ok(details.join(", "))
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Result<String, String>)> = vec![
        ("transport-identity", criterion_transport_identity),
        ("non-contraction", criterion_non_contraction),
        ("cubic-map-anchor", criterion_cubic_map_anchor),
        ("region-bound", criterion_region_bound),
        ("pushforward-chain", criterion_pushforward_chain),
        ("stability-anchors", criterion_stability_anchors),
        ("slice-variation", criterion_slice_variation),
        ("rearrangement-suite", criterion_rearrangement_suite),
        ("elliptic-comparison", criterion_elliptic_comparison),
        ("negative-controls", criterion_negative_controls),
    ];
    let mut failures = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:02} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                println!("criterion {:02} {name}: FAIL ({detail})", i + 1);
                failures.push(format!("{} {name}: {detail}", i + 1));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "{} acceptance criteria failed:\n{}",
        failures.len(),
        failures.join("\n")
    );
}
