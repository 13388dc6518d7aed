//! Axis-aligned boxes, uniform tensor grids, and cell-sampled functions.
//!
//! Conventions used throughout the crate:
//! * grids are uniform per axis; `cells[k]` counts cells along axis `k`,
//!   so there are `cells[k] + 1` node coordinates;
//! * flat indices are row-major with the **last axis fastest**;
//! * `GridFunction` is cell-centered: one value and one weighted cell mass
//!   (`phi(center) * cell_volume`) per cell, which is the discrete measure
//!   every rearrangement-style operation works with.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Region(format!(
                "box needs matching non-empty bounds, got {} / {}",
                lo.len(),
                hi.len()
            )));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::Region(format!("box needs finite lo < hi, got [{l}, {h}]")));
            }
        }
        Ok(BoxDomain { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.extent(k)).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| v >= l && v <= h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformGrid {
    pub domain: BoxDomain,
    pub cells: Vec<usize>,
}

impl UniformGrid {
    pub fn new(domain: BoxDomain, cells: Vec<usize>) -> Result<Self> {
        if cells.len() != domain.dim() || cells.iter().any(|&c| c == 0) {
            return Err(Error::Region(format!(
                "grid needs one positive cell count per axis, got {cells:?} for dim {}",
                domain.dim()
            )));
        }
        Ok(UniformGrid { domain, cells })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.domain.extent(axis) / self.cells[axis] as f64
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.spacing(k)).product()
    }

    pub fn cell_center(&self, axis: usize, i: usize) -> f64 {
        self.domain.lo[axis] + (i as f64 + 0.5) * self.spacing(axis)
    }

    pub fn node_coord(&self, axis: usize, i: usize) -> f64 {
        if i == self.cells[axis] {
            // Exact endpoint, immune to accumulated rounding.
            self.domain.hi[axis]
        } else {
            self.domain.lo[axis] + i as f64 * self.spacing(axis)
        }
    }

    /// Row-major strides, last axis fastest.
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut s = vec![1usize; d];
        for k in (0..d.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.cells[k + 1];
        }
        s
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim());
        multi
            .iter()
            .zip(self.strides())
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut rem = flat;
        self.strides()
            .iter()
            .map(|&s| {
                let i = rem / s;
                rem %= s;
                i
            })
            .collect()
    }

    pub fn center_of(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.cell_center(k, i))
            .collect()
    }

    /// Grid with every axis refined by `factor`.
    pub fn refined(&self, factor: usize) -> UniformGrid {
        UniformGrid {
            domain: self.domain.clone(),
            cells: self.cells.iter().map(|c| c * factor).collect(),
        }
    }
}

/// A function sampled at cell centers together with the discrete measure
/// `masses[i] = phi(center_i) * cell_volume`.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
    pub masses: Vec<f64>,
}

impl GridFunction {
    /// Sample `f` and the positive weight `phi` at all cell centers.
    pub fn sample(
        grid: UniformGrid,
        f: impl Fn(&[f64]) -> f64,
        phi: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let vol = grid.cell_volume();
        let n = grid.cell_count();
        let mut values = Vec::with_capacity(n);
        let mut masses = Vec::with_capacity(n);
        for flat in 0..n {
            let x = grid.center_of(flat);
            let v = f(&x);
            let w = phi(&x);
            if !v.is_finite() {
                return Err(Error::Precondition(format!(
                    "sampled value not finite at {x:?}"
                )));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Domain(format!(
                    "weight must be positive and finite, got {w:e} at {x:?}"
                )));
            }
            values.push(v);
            masses.push(w * vol);
        }
        Ok(GridFunction {
            grid,
            values,
            masses,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `Integral |f|^p dmu` for finite `p`, or `max |f|` for `p = inf`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
        } else {
            self.values
                .iter()
                .zip(&self.masses)
                .map(|(v, m)| v.abs().powf(p) * m)
                .sum::<f64>()
                .powf(1.0 / p)
        }
    }

    /// Centered-difference gradient at the cell with flat index `flat`
    /// (second-order one-sided at domain-edge cells).
    pub fn gradient(&self, flat: usize) -> Vec<f64> {
        let multi = self.grid.multi_index(flat);
        let strides = self.grid.strides();
        (0..self.grid.dim())
            .map(|k| {
                let h = self.grid.spacing(k);
                let i = multi[k];
                let n = self.grid.cells[k];
                let s = strides[k];
                let v = |j: usize| self.values[flat + (j - i) * s];
                let vm = |j: usize| self.values[flat - (i - j) * s];
                if n == 1 {
                    0.0
                } else if i == 0 {
                    if n >= 3 {
                        (-3.0 * self.values[flat] + 4.0 * v(1) - v(2)) / (2.0 * h)
                    } else {
                        (v(1) - self.values[flat]) / h
                    }
                } else if i == n - 1 {
                    if n >= 3 {
                        (3.0 * self.values[flat] - 4.0 * vm(i - 1) + vm(i - 2)) / (2.0 * h)
                    } else {
                        (self.values[flat] - vm(i - 1)) / h
                    }
                } else {
                    (v(i + 1) - vm(i - 1)) / (2.0 * h)
                }
            })
            .collect()
    }

    /// `Integral |grad f|^q dmu` over all cells.
    pub fn gradient_lq(&self, q: f64) -> f64 {
        (0..self.grid.cell_count())
            .map(|flat| {
                let g2: f64 = self.gradient(flat).iter().map(|g| g * g).sum();
                g2.sqrt().powf(q) * self.masses[flat]
            })
            .sum()
    }

    /// Largest `|value|` among cells touching the given faces
    /// (`faces[k] = (check_low_side, check_high_side)`), used for
    /// discrete trace conditions.
    pub fn max_abs_on_faces(&self, faces: &[(bool, bool)]) -> f64 {
        let mut worst: f64 = 0.0;
        for flat in 0..self.grid.cell_count() {
            let multi = self.grid.multi_index(flat);
            let on_face = multi.iter().enumerate().any(|(k, &i)| {
                (faces[k].0 && i == 0) || (faces[k].1 && i == self.grid.cells[k] - 1)
            });
            if on_face {
                worst = worst.max(self.values[flat].abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(nx: usize, ny: usize) -> UniformGrid {
        let b = BoxDomain::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        UniformGrid::new(b, vec![nx, ny]).unwrap()
    }

    #[test]
    fn index_round_trip() {
        let g = grid2(4, 7);
        for flat in 0..g.cell_count() {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
    }

    #[test]
    fn masses_sum_to_weighted_volume() {
        let g = grid2(20, 20);
        let f = GridFunction::sample(g, |_| 1.0, |_| 3.0).unwrap();
        assert!((f.total_mass() - 3.0 * 4.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_exact_for_affine() {
        let g = grid2(9, 13);
        let f = GridFunction::sample(g, |x| 2.0 * x[0] - 0.5 * x[1] + 1.0, |_| 1.0).unwrap();
        for flat in 0..f.grid.cell_count() {
            let gr = f.gradient(flat);
            assert!((gr[0] - 2.0).abs() < 1e-11, "flat={flat} grad={gr:?}");
            assert!((gr[1] + 0.5).abs() < 1e-11);
        }
    }

    #[test]
    fn lp_norms() {
        let g = grid2(50, 50);
        let f = GridFunction::sample(g, |x| x[0], |_| 1.0).unwrap();
        // Integral_0^2 x^2 dx * Integral_{-1}^{1} dy = 16/3, sqrt -> L2.
        assert!((f.lp_norm(2.0) - (16.0f64 / 3.0).sqrt()).abs() < 1e-3);
        assert!((f.lp_norm(f64::INFINITY) - 1.98).abs() < 1e-12);
    }

    #[test]
    fn face_trace() {
        let g = grid2(8, 8);
        let f = GridFunction::sample(g, |x| x[0], |_| 1.0).unwrap();
        // Low-x face cells have centers at x = 0.125.
        let t = f.max_abs_on_faces(&[(true, false), (false, false)]);
        assert!((t - 0.125).abs() < 1e-12);
        let t2 = f.max_abs_on_faces(&[(false, true), (false, false)]);
        assert!((t2 - 1.875).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_weight() {
        let g = grid2(2, 2);
        assert!(GridFunction::sample(g, |_| 1.0, |x| x[0] - 1.0).is_err());
    }
}
