//! Certificate runners over experiment files.
//!
//! Each subcommand loads one experiment file, runs the matching
//! certificate suite, writes a CSV report, and prints a single verdict
//! line (`PASS k/k` or `FAIL j/k`).  Exit codes: 0 all certificates
//! pass, 1 usage or configuration error, 2 at least one certificate
//! failed.  Output is a pure function of the file and the seed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use gaussiso::config::{
    AxisConfig, ExperimentConfig, PdeConfig, RearrangeConfig, TaskKind,
};
use gaussiso::corpus;
use gaussiso::density::{AxisFactor, ProductDensity};
use gaussiso::error::{Error, Result};
use gaussiso::grid::{BoxDomain, GridFunction, UniformGrid};
use gaussiso::isoperimetry;
use gaussiso::pde::{self, CoefficientField, EllipticProblem};
use gaussiso::rearrangement::{
    cavalieri_report, decreasing_rearrangement, distribution_function, hardy_check,
    poincare_bound, polya_szego_gap,
};
use gaussiso::region::RegionSpec;
use gaussiso::report::{Field, Report, Summary};
use gaussiso::spectral::{self, WeightedNeumannProblem};
use gaussiso::specfun::{self, Tolerance, SQRT_2PI};
use gaussiso::transport::{build_map, GridSpec};

#[derive(Parser)]
#[command(name = "gaussiso", version, about = "Certificate runners for perturbed-Gaussian product measures")]
struct Cli {
    #[command(subcommand)]
    task: Task,
}

#[derive(Subcommand)]
enum Task {
    /// Axis transport maps: derivative identity and non-contraction.
    Transport(RunArgs),
    /// Measured regions against the matched-slice perimeter bound.
    Isoperimetry(RunArgs),
    /// Weighted Neumann gap against the curvature ceiling.
    Stability(RunArgs),
    /// Rearrangement inequalities on sampled bumps.
    Rearrange(RunArgs),
    /// Elliptic comparison against the symmetrized slice profile.
    Pde(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV reports.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Multiply every grid resolution by this factor.
    #[arg(long, default_value_t = 1.0)]
    grid_scale: f64,
    /// Override the seed from the experiment file.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let kind = e.kind();
            if kind == ErrorKind::DisplayHelp || kind == ErrorKind::DisplayVersion {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let (kind, args) = match &cli.task {
        Task::Transport(a) => (TaskKind::Transport, a),
        Task::Isoperimetry(a) => (TaskKind::Isoperimetry, a),
        Task::Stability(a) => (TaskKind::Stability, a),
        Task::Rearrange(a) => (TaskKind::Rearrange, a),
        Task::Pde(a) => (TaskKind::Pde, a),
    };
    match run(kind, args) {
        Ok(summary) => {
            println!("{}", summary.line());
            if summary.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(kind: TaskKind, args: &RunArgs) -> Result<Summary> {
    if !(args.grid_scale > 0.0) || !args.grid_scale.is_finite() {
        return Err(Error::Precondition(format!(
            "--grid-scale must be positive and finite, got {}",
            args.grid_scale
        )));
    }
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(declared) = cfg.kind {
        if declared != kind {
            return Err(Error::Precondition(format!(
                "experiment file declares kind `{}`, invoked as `{}`",
                declared.as_str(),
                kind.as_str()
            )));
        }
    }
    std::fs::create_dir_all(&args.out)?;
    let csv = args.out.join(format!("{}.csv", kind.as_str()));
    match kind {
        TaskKind::Transport => run_transport(&cfg, args.grid_scale, &csv),
        TaskKind::Isoperimetry => run_isoperimetry(&cfg, args.grid_scale, &csv),
        TaskKind::Stability => run_stability(&cfg, args.grid_scale, &csv),
        TaskKind::Rearrange => run_rearrange(&cfg, args.grid_scale, &csv),
        TaskKind::Pde => run_pde(&cfg, args.grid_scale, &csv),
    }
}

/// Resolution after `--grid-scale`, kept above the solver minimums.
fn scaled(cells: usize, scale: f64) -> usize {
    ((cells as f64 * scale).round() as usize).max(4)
}

fn density_for(axes: &[AxisConfig], tol: &Tolerance) -> Result<ProductDensity> {
    let mut factors = Vec::with_capacity(axes.len());
    for a in axes {
        factors.push(AxisFactor::Potential(a.potential()?));
    }
    ProductDensity::new(factors, tol)
}

/// Relative sup of `e^{-y^2/2} A'(y) - c sqrt(2 pi) w(A(y))` at the map
/// nodes; both sides of the derivative identity are evaluated in closed
/// form.
const TOL_IDENTITY: f64 = 1e-8;

/// Relative agreement required between the profile-integral uniform
/// bound and its independent quadrature.
const TOL_PROFILE_AGREE: f64 = 1e-5;

fn run_transport(cfg: &ExperimentConfig, scale: f64, csv: &Path) -> Result<Summary> {
    let families = if cfg.axes.is_empty() {
        corpus::named_axis_families()
    } else {
        cfg.axes.iter().map(|a| (a.label(), a.clone())).collect()
    };
    let gspec = GridSpec {
        nodes: scaled(cfg.map_nodes, scale).max(33),
        y_max: 7.0,
    };
    let mut rep = Report::new(&[
        "family",
        "nodes",
        "max_residual",
        "identity_pass",
        "min_aprime",
        "argmin",
        "noncontraction_pass",
    ]);
    let mut summary = Summary::default();
    for (label, axis) in families {
        let pot = axis.potential()?;
        let map = build_map(&pot, &gspec, &cfg.tolerance)?;
        let c = map.normalization();
        let (xs, ys, aps) = map.nodes();
        let mut resid = 0.0f64;
        for ((&x, &y), &ap) in xs.iter().zip(ys).zip(aps) {
            let lhs = (-0.5 * y * y).exp() * ap;
            let rhs = c * SQRT_2PI * pot.weight(x);
            resid = resid.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
        }
        let identity_pass = resid <= TOL_IDENTITY;
        let noncon = map.certify_noncontraction(8);
        summary.tick(identity_pass);
        summary.tick(noncon.pass);
        rep.row(vec![
            Field::Text(label),
            Field::from(gspec.nodes),
            Field::from(resid),
            Field::from(identity_pass),
            Field::from(noncon.min_aprime),
            Field::from(noncon.argmin),
            Field::from(noncon.pass),
        ])?;
    }
    rep.write_to(csv)?;
    Ok(summary)
}

fn run_isoperimetry(cfg: &ExperimentConfig, scale: f64, csv: &Path) -> Result<Summary> {
    // Explicit regions from the file use the file's density; otherwise a
    // small seeded corpus cycling density families and region kinds.
    let mut cases: Vec<(String, ProductDensity, RegionSpec)> = Vec::new();
    if cfg.regions.is_empty() {
        for case in corpus::region_corpus(cfg.seed, 12) {
            let dens = density_for(&case.axes, &cfg.tolerance)?;
            cases.push((case.label, dens, case.region));
        }
    } else {
        let dens = cfg.density()?;
        for r in &cfg.regions {
            cases.push((r.label.clone(), dens.clone(), r.spec.clone()));
        }
    }
    let cells = scaled(cfg.grid_cells, scale);
    let ps = cfg.corrupt.perimeter_scale;
    let mut rep = Report::new(&[
        "label",
        "dimension",
        "cells",
        "mass",
        "perimeter",
        "bound",
        "gap",
        "tol_geom",
        "equality",
        "pass",
    ]);
    let mut summary = Summary::default();
    for (label, dens, region) in &cases {
        let cert = isoperimetry::isoperimetric_check(dens, region, cells, &cfg.tolerance)?;
        let perimeter = cert.perimeter * ps;
        let gap = perimeter - cert.bound;
        let pass = gap >= -cert.tol_geom;
        let equality = gap.abs() <= cert.tol_geom;
        summary.tick(pass);
        rep.row(vec![
            Field::text(label.clone()),
            Field::from(dens.dim()),
            Field::from(cells),
            Field::from(cert.mass),
            Field::from(perimeter),
            Field::from(cert.bound),
            Field::from(gap),
            Field::from(cert.tol_geom),
            Field::from(equality),
            Field::from(pass),
        ])?;
    }
    rep.write_to(csv)?;
    Ok(summary)
}

fn run_stability(cfg: &ExperimentConfig, scale: f64, csv: &Path) -> Result<Summary> {
    let sc = cfg.stability.as_ref().ok_or_else(|| {
        Error::Precondition("stability run needs a [stability] section".into())
    })?;
    let problem = WeightedNeumannProblem {
        domain: BoxDomain::new(vec![sc.domain.0], vec![sc.domain.1])?,
        cells: vec![scaled(sc.cells, scale)],
        rho_axes: vec![sc.rho],
    };
    let report = spectral::stability_report(&problem, &sc.sigma, sc.sigma_window, &cfg.tolerance)?;
    let mut rep = Report::new(&[
        "kappa1",
        "tau",
        "margin",
        "tol_spec",
        "tau_edge_trend",
        "satisfied",
    ]);
    rep.row(vec![
        Field::from(report.kappa1),
        Field::from(report.tau),
        Field::from(report.margin),
        Field::from(report.tol_spec),
        Field::from(report.tau_edge_trend),
        Field::from(report.satisfied),
    ])?;
    rep.write_to(csv)?;
    let mut summary = Summary::default();
    summary.tick(report.satisfied);
    Ok(summary)
}

fn run_rearrange(cfg: &ExperimentConfig, scale: f64, csv: &Path) -> Result<Summary> {
    let defaults = RearrangeConfig {
        bumps: 6,
        cells: 40,
        levels: 50,
        p_list: vec![1.0, 2.0, f64::INFINITY],
    };
    let rc = cfg.rearrange.as_ref().unwrap_or(&defaults);
    let dim = cfg.dimension;
    let dens = cfg.density()?;
    // Bumps carry no mass past a few standard deviations; a tighter box
    // spends cells where the weight lives.
    let r = cfg.radius.min(4.0);
    let dom = BoxDomain::new(vec![-r; dim], vec![r; dim])?;
    let cells = scaled(rc.cells, scale);
    let grid = UniformGrid::new(dom.clone(), vec![cells; dim])?;
    let bumps = corpus::bump_corpus(cfg.seed, rc.bumps, dim);
    let mut rep = Report::new(&["bump", "check", "lhs", "rhs", "tol", "pass"]);
    let mut summary = Summary::default();
    let push = |rep: &mut Report,
                    summary: &mut Summary,
                    bump: usize,
                    check: String,
                    lhs: f64,
                    rhs: f64,
                    tol: f64,
                    pass: bool|
     -> Result<()> {
        summary.tick(pass);
        rep.row(vec![
            Field::from(bump),
            Field::Text(check),
            Field::from(lhs),
            Field::from(rhs),
            Field::from(tol),
            Field::from(pass),
        ])
    };
    for (idx, spec) in bumps.iter().enumerate() {
        let f = GridFunction::sample(
            grid.clone(),
            |x| spec.eval(x, &dom),
            |x| dens.phi(x).expect("weight positive on the grid"),
        )?;
        let profile = decreasing_rearrangement(&f, dens.c_mu(), &cfg.tolerance)?;

        // Equimeasurability: distribution functions agree to one cell mass.
        let sup = profile.sup();
        let mut worst = 0.0f64;
        for j in 0..rc.levels {
            let t = sup * (j as f64 + 0.5) / rc.levels as f64;
            let a = distribution_function(&f, t);
            let b = profile.distribution(t);
            worst = worst.max((a - b).abs());
        }
        let cell = profile.max_cell_mass();
        push(
            &mut rep,
            &mut summary,
            idx,
            String::from("equimeasurable"),
            worst,
            cell,
            1e-12,
            worst <= cell + 1e-12,
        )?;

        for &p in &rc.p_list {
            let cav = cavalieri_report(&f, &profile, p, cfg.profile_cells, &cfg.tolerance)?;
            let name = if p.is_infinite() {
                String::from("cavalieri-pinf")
            } else {
                format!("cavalieri-p{p}")
            };
            push(&mut rep, &mut summary, idx, name, cav.lhs, cav.rhs, cav.tol, cav.pass)?;
        }

        // Sampled traces of a boundary-vanishing bump are O(h^2) at the
        // face-adjacent centers; gate scales with the bump size.
        let boundary_tol = 0.05 * (1.0 + sup);
        let psg = polya_szego_gap(
            &f,
            dens.c_mu(),
            boundary_tol,
            cfg.profile_cells,
            1e-6,
            &cfg.tolerance,
        )?;
        push(
            &mut rep,
            &mut summary,
            idx,
            String::from("polya-szego"),
            psg.lhs,
            psg.rhs,
            1e-6,
            psg.pass,
        )?;

        let poi = poincare_bound(&f, dens.c_mu(), boundary_tol, 1e-6, &cfg.tolerance)?;
        push(
            &mut rep,
            &mut summary,
            idx,
            String::from("poincare"),
            poi.ratio,
            poi.k_bound,
            1e-6,
            poi.pass,
        )?;

        let slice = RegionSpec::HalfspaceSlice { lambda: 0.25 };
        let hardy = hardy_check(&f, &slice, &profile)?;
        push(
            &mut rep,
            &mut summary,
            idx,
            String::from("hardy"),
            hardy.lhs,
            hardy.rhs,
            1e-12,
            hardy.pass,
        )?;
    }
    rep.write_to(csv)?;
    Ok(summary)
}

fn run_pde(cfg: &ExperimentConfig, scale: f64, csv: &Path) -> Result<Summary> {
    let defaults = PdeConfig {
        coefficient: CoefficientField::ScalarPhi,
        c_ell: 1.0,
        cells: [48, 48],
        domain: BoxDomain::new(vec![-2.5, -2.5], vec![2.5, 2.5])?,
        datum: gaussiso::config::PdeDatum::Unit,
        q_list: vec![0.5, 1.0, 2.0],
    };
    let pc = cfg.pde.as_ref().unwrap_or(&defaults);
    if cfg.dimension != 2 {
        return Err(Error::Precondition(format!(
            "elliptic comparison is two-dimensional, experiment declares {}",
            cfg.dimension
        )));
    }
    let dens = cfg.density()?;
    // The two-level certificate needs even counts at both levels.
    let even = |c: usize| {
        let c = scaled(c, scale).max(8);
        c + c % 2
    };
    let cells = [even(pc.cells[0]), even(pc.cells[1])];
    let problem = EllipticProblem::new(
        pc.domain.clone(),
        cells,
        pc.coefficient,
        pc.c_ell,
        corpus::datum_fn(pc.datum, &pc.domain),
    )?;
    let report = pde::comparison_certificate(&problem, &dens, &pc.q_list, &cfg.tolerance)?;
    let vs = cfg.corrupt.v_scale;

    let mut rep = Report::new(&["check", "lhs", "rhs", "tol", "pass"]);
    let mut summary = Summary::default();

    // Pointwise: rearranged solution against the (possibly scaled)
    // symmetrized profile at the step mass midpoints.
    let (violation, point_pass) = if vs == 1.0 {
        (report.max_violation, report.pointwise_pass)
    } else {
        let prof = decreasing_rearrangement(&report.solution, dens.c_mu(), &cfg.tolerance)?;
        let mut worst = f64::NEG_INFINITY;
        let mut prev = 0.0;
        for (cum, val) in prof.steps() {
            let s_mid = 0.5 * (prev + cum);
            prev = cum;
            let x = specfun::gauss_tail_inv(s_mid / prof.c_mu, &cfg.tolerance)?;
            worst = worst.max(val - vs * report.symmetrized.eval_v(x));
        }
        (worst, worst <= report.tol_point)
    };
    summary.tick(point_pass);
    rep.row(vec![
        Field::from("pointwise"),
        Field::from(violation),
        Field::from(0.0),
        Field::from(report.tol_point),
        Field::from(point_pass),
    ])?;

    for g in &report.gradient {
        let rhs = vs.powf(g.q) * g.rhs;
        let pass = if vs == 1.0 { g.pass } else { g.lhs <= rhs + g.tol };
        summary.tick(pass);
        rep.row(vec![
            Field::Text(format!("gradient-q{}", g.q)),
            Field::from(g.lhs),
            Field::from(rhs),
            Field::from(g.tol),
            Field::from(pass),
        ])?;
    }

    let bound = vs * report.linf.bound;
    let linf_pass = if vs == 1.0 {
        report.linf_pass
    } else {
        report.sup_u <= bound + report.tol_point
    };
    summary.tick(linf_pass);
    rep.row(vec![
        Field::from("linf"),
        Field::from(report.sup_u),
        Field::from(bound),
        Field::from(report.tol_point),
        Field::from(linf_pass),
    ])?;

    // The uniform bound is trusted only if the profile integral and an
    // independent adaptive quadrature of the same integrand agree.
    let agree_tol = TOL_PROFILE_AGREE * (1.0 + report.linf.independent.abs());
    let agreement = (bound - report.linf.independent).abs();
    let agree_pass = agreement <= agree_tol;
    summary.tick(agree_pass);
    rep.row(vec![
        Field::from("profile-consistency"),
        Field::from(bound),
        Field::from(report.linf.independent),
        Field::from(agree_tol),
        Field::from(agree_pass),
    ])?;

    rep.row(vec![
        Field::from("iterations"),
        Field::from(report.iterations),
        Field::from(0.0),
        Field::from(0.0),
        Field::from(true),
    ])?;
    rep.row(vec![
        Field::from("unbounded_flag"),
        Field::from(if report.symmetrized.unbounded { 1.0 } else { 0.0 }),
        Field::from(0.0),
        Field::from(0.0),
        Field::from(true),
    ])?;
    rep.write_to(csv)?;
    Ok(summary)
}
