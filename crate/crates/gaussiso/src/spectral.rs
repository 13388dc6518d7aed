//! Stability constants for separated densities `rho(x') sigma(x_N)`:
//! the curvature supremum `tau = sup (sigma'/sigma)^2 - sigma''/sigma`
//! of the one-dimensional factor, and the first nontrivial weighted
//! Neumann eigenvalue `kappa_1` of the cross factor,
//!
//! ```text
//! kappa_1 = inf  int |grad v|^2 rho dx'  /  int v^2 rho dx'
//! ```
//!
//! over mean-zero `v`. The slice `{x_N > lambda}` can only be a stable
//! critical point of the weighted isoperimetric problem when
//! `kappa_1 >= tau`; [`stability_report`] certifies that comparison with
//! a refinement-based tolerance.
//!
//! The eigenvalue solver is matrix-free: flux-form finite differences
//! with harmonic-mean face weights and a lumped (trapezoid) mass, the
//! constant eigenpair deflated by weighted-mean projection, and inverse
//! power iteration with a projected Jacobi-preconditioned CG as the
//! inner solve. Boxes of dimension one and two are supported.

use crate::error::{Error, Result};
use crate::grid::BoxDomain;
use crate::specfun::Tolerance;

/// One-dimensional positive weight families with two analytic
/// derivatives. Multi-dimensional weights are products of these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaProfile {
    /// `sigma(t) = exp(-c t^2)`; curvature expression constantly `2c`.
    Gaussian { c: f64 },
    /// `sigma = 1`.
    Constant,
    /// `sigma(t) = exp(-t^2/2 - a cos t)`; curvature expression
    /// `1 - a cos t`, maximized at odd multiples of pi.
    LogCosine { a: f64 },
}

impl SigmaProfile {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            SigmaProfile::Gaussian { c } => c.is_finite(),
            SigmaProfile::Constant => true,
            SigmaProfile::LogCosine { a } => a.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition("weight parameter must be finite".into()))
        }
    }

    pub fn sigma(&self, t: f64) -> f64 {
        match self {
            SigmaProfile::Gaussian { c } => (-c * t * t).exp(),
            SigmaProfile::Constant => 1.0,
            SigmaProfile::LogCosine { a } => (-0.5 * t * t - a * t.cos()).exp(),
        }
    }

    /// `sigma' / sigma`.
    fn log_deriv(&self, t: f64) -> f64 {
        match self {
            SigmaProfile::Gaussian { c } => -2.0 * c * t,
            SigmaProfile::Constant => 0.0,
            SigmaProfile::LogCosine { a } => -(t - a * t.sin()),
        }
    }

    /// `sigma'' / sigma`.
    fn second_ratio(&self, t: f64) -> f64 {
        let ld = self.log_deriv(t);
        let log_second = match self {
            SigmaProfile::Gaussian { c } => -2.0 * c,
            SigmaProfile::Constant => 0.0,
            SigmaProfile::LogCosine { a } => -(1.0 - a * t.cos()),
        };
        ld * ld + log_second
    }

    /// The expression under the sup defining `tau`.
    pub fn curvature_expr(&self, t: f64) -> f64 {
        let ld = self.log_deriv(t);
        ld * ld - self.second_ratio(t)
    }
}

/// Result of the windowed curvature supremum.
#[derive(Debug, Clone, Copy)]
pub struct TauReport {
    pub tau: f64,
    pub argmax: f64,
    /// The grid maximum sits at the window edge and the expression is
    /// still increasing there; the true sup may be larger (or infinite),
    /// so stability must not be certified from this value.
    pub edge_trend: bool,
}

/// Maximize the curvature expression over `[window.0, window.1]` by a
/// dense scan followed by golden-section refinement around the argmax.
pub fn tau_sup(profile: &SigmaProfile, window: (f64, f64), samples: usize) -> Result<TauReport> {
    profile.validate()?;
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!(
            "curvature window must be a finite interval, got ({lo}, {hi})"
        )));
    }
    let n = samples.max(16);
    let expr = |t: f64| profile.curvature_expr(t);
    let mut best = f64::NEG_INFINITY;
    let mut best_i = 0;
    for i in 0..=n {
        let t = lo + (hi - lo) * i as f64 / n as f64;
        let e = expr(t);
        if !e.is_finite() {
            return Err(Error::Domain(format!(
                "curvature expression not finite at t = {t}"
            )));
        }
        if e > best {
            best = e;
            best_i = i;
        }
    }
    let step = (hi - lo) / n as f64;
    let edge_trend = (best_i == 0 && expr(lo) > expr(lo + step))
        || (best_i == n && expr(hi) > expr(hi - step));
    // Golden-section refinement on the bracket around the grid argmax.
    let mut a = lo + step * (best_i.saturating_sub(1)) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (expr(x1), expr(x2));
    for _ in 0..90 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = expr(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = expr(x1);
        }
    }
    let argmax = 0.5 * (a + b);
    let tau = best.max(f1).max(f2).max(expr(argmax));
    Ok(TauReport {
        tau,
        argmax,
        edge_trend,
    })
}

/// Neumann eigenproblem `-div(rho grad v) = kappa rho v` on a box, with
/// `rho` a product of per-axis [`SigmaProfile`] factors sampled at the
/// grid nodes.
#[derive(Debug, Clone)]
pub struct WeightedNeumannProblem {
    pub domain: BoxDomain,
    pub cells: Vec<usize>,
    pub rho_axes: Vec<SigmaProfile>,
}

/// Eigenvalue, the Rayleigh quotient of the returned vector, and solver
/// diagnostics.
#[derive(Debug, Clone)]
pub struct EigReport {
    pub value: f64,
    pub rayleigh: f64,
    /// `|K v - value * M v|_2 / |M v|_2` at exit.
    pub residual: f64,
    pub iterations: usize,
    /// Eigenvector at the grid nodes, normalized in the weighted mass
    /// inner product.
    pub vector: Vec<f64>,
}

/// Node-based discretization shared by the Neumann and Dirichlet solvers.
struct Operator {
    dims: Vec<usize>,
    h: Vec<f64>,
    rho: Vec<f64>,
    /// Per-axis trapezoid factors `t(i) * h` (halved at interval ends).
    trap: Vec<Vec<f64>>,
    mass: Vec<f64>,
    diag: Vec<f64>,
}

fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

impl Operator {
    fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    fn multi_into(&self, mut flat: usize, idx: &mut [usize; 2]) {
        for k in (0..self.dims.len()).rev() {
            idx[k] = flat % self.dims[k];
            flat /= self.dims[k];
        }
    }

    fn stride(&self, axis: usize) -> usize {
        self.dims[axis + 1..].iter().product()
    }

    /// Visit every face with its stiffness weight: `(node, neighbor, w)`.
    fn for_each_face(&self, mut f: impl FnMut(usize, usize, f64)) {
        let total = self.node_count();
        let dim = self.dims.len();
        let mut idx = [0usize; 2];
        for flat in 0..total {
            self.multi_into(flat, &mut idx);
            // Transverse trapezoid product, all axes included; each face
            // divides out its own axis factor.
            let t_all: f64 = (0..dim).map(|l| self.trap[l][idx[l]]).product();
            for k in 0..dim {
                if idx[k] + 1 >= self.dims[k] {
                    continue;
                }
                let nb = flat + self.stride(k);
                let w = harmonic_mean(self.rho[flat], self.rho[nb]) * t_all
                    / self.trap[k][idx[k]]
                    / self.h[k];
                f(flat, nb, w);
            }
        }
    }

    /// `out = K v` for the flux-form stiffness.
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        self.for_each_face(|a, b, w| {
            let d = w * (v[a] - v[b]);
            out[a] += d;
            out[b] -= d;
        });
    }

    fn build_diag(&mut self) {
        let mut diag = vec![0.0; self.node_count()];
        self.for_each_face(|a, b, w| {
            diag[a] += w;
            diag[b] += w;
        });
        self.diag = diag;
    }

    /// Jacobi-preconditioned CG for `K x = b`. `project` removes the
    /// kernel component after the solve (Neumann case); pass `None` for
    /// nonsingular systems.
    fn solve(
        &self,
        b: &[f64],
        tol: &Tolerance,
        project: Option<&dyn Fn(&mut [f64])>,
    ) -> Result<Vec<f64>> {
        let n = b.len();
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(ri, d)| ri / d).collect();
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let target = (tol.rel_tol * bnorm).max(1e-15 * bnorm);
        let mut ap = vec![0.0; n];
        let cap = 40 * tol.max_iter.max(50) + 10 * n;
        for _ in 0..cap {
            let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rnorm <= target {
                if let Some(proj) = project {
                    proj(&mut x);
                }
                return Ok(x);
            }
            self.apply(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if !(pap > 0.0) {
                return Err(Error::Convergence(format!(
                    "stiffness lost positive-definiteness in CG (p'Kp = {pap:e})"
                )));
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = r[i] / self.diag[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::Convergence(
            "CG did not reach the requested residual".into(),
        ))
    }

    fn rayleigh(&self, v: &[f64]) -> f64 {
        let mut kv = vec![0.0; v.len()];
        self.apply(v, &mut kv);
        let num: f64 = v.iter().zip(&kv).map(|(a, b)| a * b).sum();
        let den: f64 = v
            .iter()
            .zip(&self.mass)
            .map(|(a, m)| a * a * m)
            .sum();
        num / den
    }

    /// Smallest eigenvalue of `K v = kappa M v` by inverse power
    /// iteration, optionally deflating the constant mode.
    fn smallest_eig(&self, deflate_constant: bool, tol: &Tolerance) -> Result<EigReport> {
        let n = self.node_count();
        let mass_total: f64 = self.mass.iter().sum();
        let project = |v: &mut [f64]| {
            let mean: f64 = v.iter().zip(&self.mass).map(|(a, m)| a * m).sum::<f64>() / mass_total;
            for vi in v.iter_mut() {
                *vi -= mean;
            }
        };
        // Deterministic start with broad overlap: sum of node coordinates
        // with distinct axis weights plus a mild nonlinearity.
        let mut idx = [0usize; 2];
        let mut v = vec![0.0; n];
        for (flat, vi) in v.iter_mut().enumerate() {
            self.multi_into(flat, &mut idx);
            let mut s = 0.0;
            for (k, &dim_k) in self.dims.iter().enumerate() {
                let t = idx[k] as f64 / (dim_k - 1) as f64;
                s += (1.0 + 0.3 * k as f64) * t + 0.05 * (3.1 * t + 0.7 * k as f64).sin();
            }
            *vi = s;
        }
        if deflate_constant {
            project(&mut v);
        }
        let normalize = |v: &mut [f64]| {
            let norm: f64 = v
                .iter()
                .zip(&self.mass)
                .map(|(a, m)| a * a * m)
                .sum::<f64>()
                .sqrt();
            for vi in v.iter_mut() {
                *vi /= norm;
            }
        };
        normalize(&mut v);
        let mut value = self.rayleigh(&v);
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        let mut kv = vec![0.0; n];
        for outer in 0..tol.max_iter.max(60) {
            iterations = outer + 1;
            let rhs: Vec<f64> = v.iter().zip(&self.mass).map(|(a, m)| a * m).collect();
            let mut w = if deflate_constant {
                self.solve(&rhs, tol, Some(&project))?
            } else {
                self.solve(&rhs, tol, None)?
            };
            if deflate_constant {
                project(&mut w);
            }
            normalize(&mut w);
            // After M-normalization the Rayleigh quotient is w'Kw, and
            // the same matvec gives the eigen-residual.
            self.apply(&w, &mut kv);
            let new_value: f64 = w.iter().zip(&kv).map(|(a, b)| a * b).sum();
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..n {
                let mv = self.mass[i] * w[i];
                let r = kv[i] - new_value * mv;
                num += r * r;
                den += mv * mv;
            }
            residual = (num / den).sqrt();
            let done = (new_value - value).abs() <= tol.abs_tol + tol.rel_tol * new_value.abs()
                && residual <= 1e-9 * (1.0 + new_value.abs());
            v = w;
            value = new_value;
            if done && outer > 0 {
                break;
            }
        }
        Ok(EigReport {
            value,
            rayleigh: value,
            residual,
            iterations,
            vector: v,
        })
    }
}

impl WeightedNeumannProblem {
    pub fn new(
        domain: BoxDomain,
        cells: Vec<usize>,
        rho_axes: Vec<SigmaProfile>,
    ) -> Result<Self> {
        let dim = domain.dim();
        if dim == 0 || dim > 2 {
            return Err(Error::Precondition(format!(
                "eigenproblems support one or two axes, got {dim}"
            )));
        }
        if cells.len() != dim || rho_axes.len() != dim {
            return Err(Error::Precondition(format!(
                "expected {dim} cell counts and weight factors, got {} and {}",
                cells.len(),
                rho_axes.len()
            )));
        }
        if cells.iter().any(|&c| c < 8) {
            return Err(Error::Precondition(
                "eigenproblems need at least 8 cells per axis".into(),
            ));
        }
        let problem = WeightedNeumannProblem {
            domain,
            cells,
            rho_axes,
        };
        problem.check_resolution()?;
        Ok(problem)
    }

    /// The grid must resolve the weight: relative change of each axis
    /// factor across one cell stays below 1/2.
    fn check_resolution(&self) -> Result<()> {
        for k in 0..self.domain.dim() {
            let n = self.cells[k];
            let h = self.domain.extent(k) / n as f64;
            for i in 0..n {
                let a = self.rho_axes[k].sigma(self.domain.lo[k] + i as f64 * h);
                let b = self.rho_axes[k].sigma(self.domain.lo[k] + (i + 1) as f64 * h);
                if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::Domain(
                        "weight must be positive and finite at all nodes".into(),
                    ));
                }
                let change = (b / a - 1.0).abs().max((a / b - 1.0).abs());
                if change >= 0.5 {
                    return Err(Error::Precondition(format!(
                        "grid does not resolve the weight on axis {k}: relative change {change:.2} per cell"
                    )));
                }
            }
        }
        Ok(())
    }

    fn operator(&self) -> Operator {
        let dim = self.domain.dim();
        let dims: Vec<usize> = self.cells.iter().map(|&c| c + 1).collect();
        let h: Vec<f64> = (0..dim)
            .map(|k| self.domain.extent(k) / self.cells[k] as f64)
            .collect();
        let trap: Vec<Vec<f64>> = (0..dim)
            .map(|k| {
                (0..dims[k])
                    .map(|i| {
                        let t = if i == 0 || i == dims[k] - 1 { 0.5 } else { 1.0 };
                        t * h[k]
                    })
                    .collect()
            })
            .collect();
        let total: usize = dims.iter().product();
        let mut rho = vec![0.0; total];
        let mut mass = vec![0.0; total];
        let mut idx = [0usize; 2];
        for flat in 0..total {
            let mut rem = flat;
            for k in (0..dim).rev() {
                idx[k] = rem % dims[k];
                rem /= dims[k];
            }
            let mut r = 1.0;
            let mut t = 1.0;
            for k in 0..dim {
                let x = self.domain.lo[k] + idx[k] as f64 * h[k];
                r *= self.rho_axes[k].sigma(x);
                t *= trap[k][idx[k]];
            }
            rho[flat] = r;
            mass[flat] = r * t;
        }
        let mut op = Operator {
            dims,
            h,
            rho,
            trap,
            mass,
            diag: Vec::new(),
        };
        op.build_diag();
        op
    }

    /// First nontrivial Neumann eigenvalue.
    pub fn kappa1(&self, tol: &Tolerance) -> Result<EigReport> {
        self.operator().smallest_eig(true, tol)
    }

    /// Rayleigh quotient of an arbitrary node vector (after removing its
    /// weighted mean), for external consistency checks.
    pub fn rayleigh_quotient(&self, v: &[f64]) -> Result<f64> {
        let op = self.operator();
        if v.len() != op.node_count() {
            return Err(Error::Precondition(format!(
                "vector length {} does not match {} nodes",
                v.len(),
                op.node_count()
            )));
        }
        let mass_total: f64 = op.mass.iter().sum();
        let mean: f64 = v.iter().zip(&op.mass).map(|(a, m)| a * m).sum::<f64>() / mass_total;
        let centered: Vec<f64> = v.iter().map(|a| a - mean).collect();
        Ok(op.rayleigh(&centered))
    }

    /// Problem with every axis refined by the given factor.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        WeightedNeumannProblem::new(
            self.domain.clone(),
            self.cells.iter().map(|&c| c * factor).collect(),
            self.rho_axes.clone(),
        )
    }

    pub fn node_count(&self) -> usize {
        self.cells.iter().map(|&c| c + 1).product()
    }

    #[cfg(test)]
    fn dense_matrices(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let op = self.operator();
        let n = op.node_count();
        let mut k = vec![vec![0.0; n]; n];
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e.fill(0.0);
            e[j] = 1.0;
            op.apply(&e, &mut col);
            for i in 0..n {
                k[i][j] = col[i];
            }
        }
        (k, op.mass)
    }
}

/// Smallest eigenvalue of the one-dimensional problem
/// `-(w v')' = K w v` on `(lo, hi)` with `v(lo) = 0` and a natural
/// condition at `hi`, `w` given by a [`SigmaProfile`].
#[derive(Debug, Clone)]
pub struct DirichletReport {
    pub value: f64,
    /// Interior node coordinates (the Dirichlet node is excluded).
    pub nodes: Vec<f64>,
    pub vector: Vec<f64>,
    pub residual: f64,
}

pub fn dirichlet_left_smallest(
    weight: &SigmaProfile,
    lo: f64,
    hi: f64,
    cells: usize,
    tol: &Tolerance,
) -> Result<DirichletReport> {
    weight.validate()?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Domain(format!(
            "interval must be finite with lo < hi, got ({lo}, {hi})"
        )));
    }
    if cells < 8 {
        return Err(Error::Precondition(
            "Dirichlet eigenproblem needs at least 8 cells".into(),
        ));
    }
    let h = (hi - lo) / cells as f64;
    // Unknowns at nodes 1..=cells; node 0 carries the Dirichlet value 0.
    let n = cells;
    let w_at = |i: usize| weight.sigma(lo + i as f64 * h);
    let mut rho = vec![0.0; n];
    let mut trap = vec![0.0; n];
    for i in 0..n {
        rho[i] = w_at(i + 1);
        trap[i] = if i == n - 1 { 0.5 * h } else { h };
    }
    // Reuse Operator in one dimension; the Dirichlet coupling of node 1
    // to the boundary node is added to the diagonal afterwards.
    let mut op = Operator {
        dims: vec![n],
        h: vec![h],
        rho,
        trap: vec![trap],
        mass: Vec::new(),
        diag: Vec::new(),
    };
    op.mass = op
        .rho
        .iter()
        .zip(&op.trap[0])
        .map(|(r, t)| r * t)
        .collect();
    op.build_diag();
    let boundary_w = harmonic_mean(w_at(0), w_at(1)) / h;
    op.diag[0] += boundary_w;
    // apply() omits the boundary flux, so wrap it.
    let base = op;
    struct DirichletOp {
        base: Operator,
        boundary_w: f64,
    }
    impl DirichletOp {
        fn apply(&self, v: &[f64], out: &mut [f64]) {
            self.base.apply(v, out);
            out[0] += self.boundary_w * v[0];
        }
    }
    let dop = DirichletOp { base, boundary_w };

    // Inverse power iteration with plain CG (system is SPD).
    let n_unknowns = n;
    let mut v: Vec<f64> = (0..n_unknowns)
        .map(|i| (i + 1) as f64 / n_unknowns as f64)
        .collect();
    let m = &dop.base.mass;
    let normalize = |v: &mut [f64]| {
        let norm: f64 = v.iter().zip(m).map(|(a, mi)| a * a * mi).sum::<f64>().sqrt();
        for vi in v.iter_mut() {
            *vi /= norm;
        }
    };
    let rayleigh = |v: &[f64]| -> f64 {
        let mut kv = vec![0.0; v.len()];
        dop.apply(v, &mut kv);
        let num: f64 = v.iter().zip(&kv).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().zip(m).map(|(a, mi)| a * a * mi).sum();
        num / den
    };
    let cg = |b: &[f64]| -> Result<Vec<f64>> {
        let nn = b.len();
        let mut x = vec![0.0; nn];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&dop.base.diag).map(|(ri, d)| ri / d).collect();
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let bnorm = b.iter().map(|q| q * q).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let mut ap = vec![0.0; nn];
        for _ in 0..(20 * nn + 200) {
            if r.iter().map(|q| q * q).sum::<f64>().sqrt() <= 1e-13 * bnorm {
                return Ok(x);
            }
            dop.apply(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if !(pap > 0.0) {
                return Err(Error::Convergence("CG breakdown in Dirichlet solve".into()));
            }
            let alpha = rz / pap;
            for i in 0..nn {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..nn {
                z[i] = r[i] / dop.base.diag[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..nn {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::Convergence(
            "Dirichlet CG did not reach the requested residual".into(),
        ))
    };
    normalize(&mut v);
    let mut value = rayleigh(&v);
    let mut residual = f64::INFINITY;
    let mut kv = vec![0.0; n_unknowns];
    for outer in 0..tol.max_iter.max(60) {
        let rhs: Vec<f64> = v.iter().zip(m).map(|(a, mi)| a * mi).collect();
        let mut w = cg(&rhs)?;
        normalize(&mut w);
        dop.apply(&w, &mut kv);
        let new_value: f64 = w.iter().zip(&kv).map(|(a, b)| a * b).sum();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n_unknowns {
            let mv = m[i] * w[i];
            let r = kv[i] - new_value * mv;
            num += r * r;
            den += mv * mv;
        }
        residual = (num / den).sqrt();
        let done = (new_value - value).abs() <= tol.abs_tol + tol.rel_tol * new_value.abs()
            && residual <= 1e-9 * (1.0 + new_value.abs());
        v = w;
        value = new_value;
        if done && outer > 0 {
            break;
        }
    }
    Ok(DirichletReport {
        value,
        nodes: (0..n_unknowns).map(|i| lo + (i + 1) as f64 * h).collect(),
        vector: v,
        residual,
    })
}

/// Outcome of the stability comparison `kappa_1 >= tau`.
#[derive(Debug, Clone, Copy)]
pub struct StabilityReport {
    pub kappa1: f64,
    pub tau: f64,
    pub margin: f64,
    /// Twice the observed coarse-to-fine eigenvalue movement plus a
    /// roundoff floor.
    pub tol_spec: f64,
    pub satisfied: bool,
    pub tau_edge_trend: bool,
}

/// Evaluate `kappa_1` at the given resolution and at twice it, compute
/// `tau` over the window, and certify `kappa_1 >= tau` against the
/// refinement movement. An edge-trending `tau` always fails.
pub fn stability_report(
    problem: &WeightedNeumannProblem,
    sigma: &SigmaProfile,
    sigma_window: (f64, f64),
    tol: &Tolerance,
) -> Result<StabilityReport> {
    let coarse = problem.kappa1(tol)?;
    let fine = problem.refined(2)?.kappa1(tol)?;
    let kappa1 = fine.value;
    let tol_spec = 2.0 * (fine.value - coarse.value).abs() + 1e-9 * (1.0 + kappa1.abs());
    let tau_rep = tau_sup(sigma, sigma_window, 2001)?;
    let margin = kappa1 - tau_rep.tau;
    Ok(StabilityReport {
        kappa1,
        tau: tau_rep.tau,
        margin,
        tol_spec,
        satisfied: !tau_rep.edge_trend && margin >= -tol_spec,
        tau_edge_trend: tau_rep.edge_trend,
    })
}
