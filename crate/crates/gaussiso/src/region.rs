//! Region descriptions for measure and perimeter computations.
//!
//! All regions live in `R^N` with a distinguished last axis. Four kinds:
//!
//! * `HalfspaceSlice` — `{ x_N > lambda }`, the conjectured-optimal shape;
//! * `Graph` — the epigraph `{ x_N > u(x') }` of a Lipschitz profile `u`
//!   over the cross coordinates;
//! * `SlabUnion` — a disjoint union of horizontal slabs
//!   `{ lo_k < x_N < hi_k }` (cylinders over the cross section);
//! * `BoxUnion` — a disjoint union of axis-aligned boxes.
//!
//! Validation enforces the invariants the downstream quadratures rely on:
//! finite parameters, a Lipschitz bound for profiles, and strictly
//! positive separation between union components (so boundary faces never
//! merge or cancel).

use crate::error::{Error, Result};
use crate::grid::BoxDomain;

/// One sinusoidal profile term `amp * sin(freq * x_axis + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveTerm {
    pub axis: usize,
    pub amp: f64,
    pub freq: f64,
    pub phase: f64,
}

/// Graph profile `u(x')` over the cross coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Flat { level: f64 },
    Affine { intercept: f64, slopes: Vec<f64> },
    WaveSum { base: f64, terms: Vec<WaveTerm> },
}

impl Profile {
    pub fn eval(&self, xp: &[f64]) -> f64 {
        match self {
            Profile::Flat { level } => *level,
            Profile::Affine { intercept, slopes } => {
                intercept + slopes.iter().zip(xp).map(|(s, x)| s * x).sum::<f64>()
            }
            Profile::WaveSum { base, terms } => {
                base + terms
                    .iter()
                    .map(|t| t.amp * (t.freq * xp[t.axis] + t.phase).sin())
                    .sum::<f64>()
            }
        }
    }

    /// Exact gradient written into `out` (length = cross dimension).
    pub fn grad_into(&self, xp: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        match self {
            Profile::Flat { .. } => {}
            Profile::Affine { slopes, .. } => {
                for (o, s) in out.iter_mut().zip(slopes) {
                    *o = *s;
                }
            }
            Profile::WaveSum { terms, .. } => {
                for t in terms {
                    out[t.axis] += t.amp * t.freq * (t.freq * xp[t.axis] + t.phase).cos();
                }
            }
        }
    }

    pub fn grad(&self, xp: &[f64], dim: usize) -> Vec<f64> {
        let mut g = vec![0.0; dim];
        self.grad_into(xp, &mut g);
        g
    }

    /// Upper bound for `|grad u|` over all of `R^{N-1}`.
    pub fn lipschitz_bound(&self, cross_dim: usize) -> f64 {
        match self {
            Profile::Flat { .. } => 0.0,
            Profile::Affine { slopes, .. } => {
                slopes.iter().map(|s| s * s).sum::<f64>().sqrt()
            }
            Profile::WaveSum { terms, .. } => {
                // Per-axis worst case |d/dx_k| <= sum of |amp * freq|.
                let mut per_axis = vec![0.0f64; cross_dim];
                for t in terms {
                    per_axis[t.axis] += (t.amp * t.freq).abs();
                }
                per_axis.iter().map(|g| g * g).sum::<f64>().sqrt()
            }
        }
    }

    fn validate(&self, cross_dim: usize) -> Result<()> {
        let finite = |v: f64, what: &str| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Region(format!("profile {what} must be finite, got {v}")))
            }
        };
        match self {
            Profile::Flat { level } => finite(*level, "level"),
            Profile::Affine { intercept, slopes } => {
                finite(*intercept, "intercept")?;
                if slopes.len() != cross_dim {
                    return Err(Error::Region(format!(
                        "affine profile needs {cross_dim} slopes, got {}",
                        slopes.len()
                    )));
                }
                for &s in slopes {
                    finite(s, "slope")?;
                }
                Ok(())
            }
            Profile::WaveSum { base, terms } => {
                finite(*base, "base")?;
                for t in terms {
                    if t.axis >= cross_dim {
                        return Err(Error::Region(format!(
                            "wave term axis {} out of range for {cross_dim} cross axes",
                            t.axis
                        )));
                    }
                    finite(t.amp, "amplitude")?;
                    finite(t.freq, "frequency")?;
                    finite(t.phase, "phase")?;
                }
                Ok(())
            }
        }
    }
}

/// Measurable region with a distinguished last axis.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    HalfspaceSlice { lambda: f64 },
    Graph { profile: Profile },
    SlabUnion { intervals: Vec<(f64, f64)> },
    BoxUnion { boxes: Vec<BoxDomain> },
}

/// What validation established about a region.
#[derive(Debug, Clone, Copy)]
pub struct RegionReport {
    /// Upper bound for the profile gradient (0 for non-graph kinds).
    pub lipschitz: f64,
    /// Smallest gap between union components (infinite when fewer than 2).
    pub min_separation: f64,
}

impl RegionSpec {
    /// Membership of a point `(x', x_N)` in the open region.
    pub fn contains(&self, x: &[f64]) -> bool {
        let n = x.len();
        if n < 2 {
            return false;
        }
        let (xp, xn) = (&x[..n - 1], x[n - 1]);
        match self {
            RegionSpec::HalfspaceSlice { lambda } => xn > *lambda,
            RegionSpec::Graph { profile } => xn > profile.eval(xp),
            RegionSpec::SlabUnion { intervals } => {
                intervals.iter().any(|&(a, b)| xn > a && xn < b)
            }
            RegionSpec::BoxUnion { boxes } => boxes
                .iter()
                .any(|b| b.dim() == n && (0..n).all(|k| x[k] > b.lo[k] && x[k] < b.hi[k])),
        }
    }

    /// Check the invariants for an `N = cross_dim + 1` dimensional ambient
    /// space. Graph profiles must be `max_lipschitz`-Lipschitz; unions must
    /// have strictly positive separation.
    pub fn validate(&self, cross_dim: usize, max_lipschitz: f64) -> Result<RegionReport> {
        match self {
            RegionSpec::HalfspaceSlice { lambda } => {
                if !lambda.is_finite() {
                    return Err(Error::Region(format!("slice level must be finite, got {lambda}")));
                }
                Ok(RegionReport {
                    lipschitz: 0.0,
                    min_separation: f64::INFINITY,
                })
            }
            RegionSpec::Graph { profile } => {
                profile.validate(cross_dim)?;
                let l = profile.lipschitz_bound(cross_dim);
                if l > max_lipschitz {
                    return Err(Error::Region(format!(
                        "profile gradient bound {l:.6} exceeds the allowed {max_lipschitz}"
                    )));
                }
                Ok(RegionReport {
                    lipschitz: l,
                    min_separation: f64::INFINITY,
                })
            }
            RegionSpec::SlabUnion { intervals } => {
                if intervals.is_empty() {
                    return Err(Error::Region("slab union needs at least one slab".into()));
                }
                let mut min_sep = f64::INFINITY;
                for (k, &(lo, hi)) in intervals.iter().enumerate() {
                    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                        return Err(Error::Region(format!(
                            "slab {k} needs finite lo < hi, got ({lo}, {hi})"
                        )));
                    }
                    if k > 0 {
                        let gap = lo - intervals[k - 1].1;
                        if gap <= 0.0 {
                            return Err(Error::Region(format!(
                                "slabs {} and {k} overlap or touch (gap {gap})",
                                k - 1
                            )));
                        }
                        min_sep = min_sep.min(gap);
                    }
                }
                Ok(RegionReport {
                    lipschitz: 0.0,
                    min_separation: min_sep,
                })
            }
            RegionSpec::BoxUnion { boxes } => {
                if boxes.is_empty() {
                    return Err(Error::Region("box union needs at least one box".into()));
                }
                let dim = cross_dim + 1;
                for (k, b) in boxes.iter().enumerate() {
                    if b.dim() != dim {
                        return Err(Error::Region(format!(
                            "box {k} is {}-dimensional, ambient space is {dim}-dimensional",
                            b.dim()
                        )));
                    }
                }
                let mut min_sep = f64::INFINITY;
                for a in 0..boxes.len() {
                    for b in a + 1..boxes.len() {
                        // Two boxes are strictly separated when some axis
                        // has a positive gap between their intervals.
                        let gap = (0..dim)
                            .map(|k| {
                                (boxes[b].lo[k] - boxes[a].hi[k])
                                    .max(boxes[a].lo[k] - boxes[b].hi[k])
                            })
                            .fold(f64::NEG_INFINITY, f64::max);
                        if gap <= 0.0 {
                            return Err(Error::Region(format!(
                                "boxes {a} and {b} overlap or touch (gap {gap})"
                            )));
                        }
                        min_sep = min_sep.min(gap);
                    }
                }
                Ok(RegionReport {
                    lipschitz: 0.0,
                    min_separation: min_sep,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_gradients_match_differences() {
        let profiles: Vec<Profile> = vec![
            Profile::Affine {
                intercept: 0.3,
                slopes: vec![0.5, -1.2],
            },
            Profile::WaveSum {
                base: 1.0,
                terms: vec![
                    WaveTerm { axis: 0, amp: 0.4, freq: 2.0, phase: 0.1 },
                    WaveTerm { axis: 1, amp: -0.3, freq: 1.5, phase: -0.7 },
                    WaveTerm { axis: 0, amp: 0.2, freq: 0.5, phase: 2.0 },
                ],
            },
        ];
        let pts = [[0.0, 0.0], [0.7, -1.1], [-2.0, 0.4]];
        let h = 1e-6;
        for p in &profiles {
            for xp in pts {
                let g = p.grad(&xp, 2);
                for k in 0..2 {
                    let mut a = xp;
                    let mut b = xp;
                    a[k] += h;
                    b[k] -= h;
                    let fd = (p.eval(&a) - p.eval(&b)) / (2.0 * h);
                    assert!((g[k] - fd).abs() < 1e-8, "{p:?} at {xp:?} axis {k}");
                }
            }
        }
    }

    #[test]
    fn lipschitz_bounds_dominate_samples() {
        let p = Profile::WaveSum {
            base: 0.0,
            terms: vec![
                WaveTerm { axis: 0, amp: 0.4, freq: 2.0, phase: 0.0 },
                WaveTerm { axis: 1, amp: 0.3, freq: 1.0, phase: 1.0 },
            ],
        };
        let bound = p.lipschitz_bound(2);
        assert!((bound - (0.8f64 * 0.8 + 0.3 * 0.3).sqrt()).abs() < 1e-12);
        for i in 0..50 {
            for j in 0..50 {
                let xp = [-5.0 + 10.0 * i as f64 / 49.0, -5.0 + 10.0 * j as f64 / 49.0];
                let g = p.grad(&xp, 2);
                let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
                assert!(norm <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn validation_accepts_good_regions() {
        assert!(RegionSpec::HalfspaceSlice { lambda: 0.5 }.validate(2, 1.0).is_ok());
        let r = RegionSpec::SlabUnion {
            intervals: vec![(-1.0, 0.0), (0.5, 1.5), (2.0, 2.5)],
        }
        .validate(1, 1.0)
        .unwrap();
        assert!((r.min_separation - 0.5).abs() < 1e-12);

        let boxes = vec![
            BoxDomain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            BoxDomain::new(vec![1.25, 0.0], vec![2.0, 1.0]).unwrap(),
        ];
        let r = RegionSpec::BoxUnion { boxes }.validate(1, 1.0).unwrap();
        assert!((r.min_separation - 0.25).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_regions() {
        assert!(RegionSpec::HalfspaceSlice { lambda: f64::NAN }.validate(2, 1.0).is_err());
        assert!(RegionSpec::SlabUnion { intervals: vec![] }.validate(1, 1.0).is_err());
        assert!(RegionSpec::SlabUnion {
            intervals: vec![(0.0, 1.0), (1.0, 2.0)],
        }
        .validate(1, 1.0)
        .is_err());
        assert!(RegionSpec::SlabUnion {
            intervals: vec![(0.0, 1.5), (1.0, 2.0)],
        }
        .validate(1, 1.0)
        .is_err());

        let overlapping = vec![
            BoxDomain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            BoxDomain::new(vec![0.5, 0.5], vec![2.0, 2.0]).unwrap(),
        ];
        assert!(RegionSpec::BoxUnion { boxes: overlapping }.validate(1, 1.0).is_err());

        // Steep profile rejected by the Lipschitz gate.
        let steep = RegionSpec::Graph {
            profile: Profile::Affine {
                intercept: 0.0,
                slopes: vec![3.0, 4.0],
            },
        };
        assert!(steep.validate(2, 1.0).is_err());
        assert!(steep.validate(2, 6.0).is_ok());

        // Wave term pointing at a missing axis.
        let bad_axis = RegionSpec::Graph {
            profile: Profile::WaveSum {
                base: 0.0,
                terms: vec![WaveTerm { axis: 2, amp: 0.1, freq: 1.0, phase: 0.0 }],
            },
        };
        assert!(bad_axis.validate(2, 1.0).is_err());
    }
}
