//! Adaptive quadrature on finite intervals.
//!
//! The basic rule is the 15-point Kronrod extension of 7-point Gauss
//! (nodes and weights from the QUADPACK `dqk15` tables). Intervals are
//! subdivided worst-first until the summed error estimate drops below
//! `max(abs_tol, rel_tol * |I|)`. Endpoint singularities that are
//! integrable (`x^k` with `k > -1`, logarithms) are handled by geometric
//! grading toward the endpoint before the adaptive pass; the rule itself
//! never evaluates the integrand at interval ends.

use crate::error::{Error, Result};
use crate::specfun::Tolerance;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae (positive half, descending) for the 7-15 pair.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

/// Gauss weights for the embedded 7-point rule (odd-index abscissae).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod evaluation: returns `(kronrod, |kronrod - gauss|)`.
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let fsum = f(c - x) + f(c + x);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    kronrod *= h;
    gauss *= h;
    (kronrod, (kronrod - gauss).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Conservative error estimate (sum of per-segment `|K15 - G7|`).
    pub abs_err: f64,
}

/// Adaptive integration of `f` over the finite interval `[a, b]`.
///
/// Fails with a convergence error if the target cannot be met within
/// `64 * max_iter` segments (non-finite integrand values are reported the
/// same way: they keep the error estimate infinite).
pub fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: &Tolerance) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "adaptive quadrature needs finite bounds, got [{a:e}, {b:e}]"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_err: 0.0,
        });
    }
    let (sign, lo, hi) = if a < b { (1.0, a, b) } else { (-1.0, b, a) };
    let fref: &dyn Fn(f64) -> f64 = &f;
    let (v0, e0) = gk15(fref, lo, hi);
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a: lo,
        b: hi,
        value: v0,
        err: e0,
    });
    // Segments narrower than the splitting floor are accepted as-is and
    // moved to the frozen accumulators; their error stays in the budget so
    // an unresolvable singularity fails loudly instead of silently.
    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;
    let mut heap_value = v0;
    let mut heap_err = e0;
    let cap = 64 * tol.max_iter;
    let mut splits = 0usize;
    loop {
        let total = frozen_value + heap_value;
        let total_err = frozen_err + heap_err;
        if total_err <= tol.abs_tol.max(tol.rel_tol * total.abs()) {
            if !total.is_finite() {
                return Err(Error::Integrability(format!(
                    "integrand produced non-finite values on [{lo:.3e}, {hi:.3e}]"
                )));
            }
            return Ok(QuadResult {
                value: sign * total,
                abs_err: total_err,
            });
        }
        if splits >= cap || heap.is_empty() {
            return Err(Error::Convergence(format!(
                "quadrature error {total_err:.3e} above target after {splits} splits on [{lo:.3e}, {hi:.3e}]"
            )));
        }
        let worst = heap.pop().expect("heap checked non-empty");
        // Below this width the GK nodes start colliding with the interval
        // ends in f64, so further splitting is meaningless.
        if worst.b - worst.a < 1e-14 * (1.0 + worst.a.abs().max(worst.b.abs())) {
            heap_value -= worst.value;
            heap_err -= worst.err;
            frozen_value += worst.value;
            frozen_err += worst.err;
            continue;
        }
        splits += 1;
        let m = 0.5 * (worst.a + worst.b);
        let (vl, el) = gk15(fref, worst.a, m);
        let (vr, er) = gk15(fref, m, worst.b);
        heap_value += vl + vr - worst.value;
        heap_err += el + er - worst.err;
        heap.push(Segment {
            a: worst.a,
            b: m,
            value: vl,
            err: el,
        });
        heap.push(Segment {
            a: m,
            b: worst.b,
            value: vr,
            err: er,
        });
    }
}

/// Adaptive integration with geometric grading toward one or both finite
/// endpoints, for integrands with integrable endpoint blow-up or strong
/// endpoint variation (e.g. `x^k` behavior near `x = 0`).
pub fn adaptive_graded(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    grade_left: bool,
    grade_right: bool,
    tol: &Tolerance,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_err: 0.0,
        });
    }
    let len = b - a;
    if !(len > 0.0) {
        return Err(Error::Domain(format!("graded quadrature needs a < b, got [{a:e}, {b:e}]")));
    }
    // Panel breakpoints in [0, 1], geometrically refined toward a graded end.
    // The innermost panel width (0.25^16 / 2 ~ 1e-10 of the interval) leaves
    // the adaptive pass room to refine further without its nodes rounding
    // onto the endpoint.
    let mut cuts = vec![0.0, 1.0];
    const RATIO: f64 = 0.25;
    const LEVELS: usize = 16;
    if grade_left {
        let mut t = 1.0;
        for _ in 0..LEVELS {
            t *= RATIO;
            cuts.push(t * 0.5);
        }
    }
    if grade_right {
        let mut t = 1.0;
        for _ in 0..LEVELS {
            t *= RATIO;
            cuts.push(1.0 - t * 0.5);
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let panel_tol = Tolerance {
        abs_tol: tol.abs_tol / cuts.len() as f64,
        ..*tol
    };
    let mut value = 0.0;
    let mut abs_err = 0.0;
    for w in cuts.windows(2) {
        let (pa, pb) = (a + w[0] * len, a + w[1] * len);
        if pa >= pb {
            continue;
        }
        let r = adaptive(&f, pa, pb, &panel_tol)?;
        value += r.value;
        abs_err += r.abs_err;
    }
    Ok(QuadResult { value, abs_err })
}

/// Composite Simpson nodes and weights on `[a, b]` with `cells` cells
/// (`cells` is rounded up to the next even number). The returned nodes are
/// uniformly spaced, which downstream code relies on for centered
/// differences on the same grid.
pub fn simpson_rule(a: f64, b: f64, cells: usize) -> (Vec<f64>, Vec<f64>) {
    let n = cells.max(2) + cells.max(2) % 2;
    let h = (b - a) / n as f64;
    let nodes: Vec<f64> = (0..=n).map(|i| a + i as f64 * h).collect();
    let weights: Vec<f64> = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect();
    (nodes, weights)
}
