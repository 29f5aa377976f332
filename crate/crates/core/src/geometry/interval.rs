use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::scalar::Real;

/// Half-open axis-aligned box `(lo, hi]` in a k-dimensional velocity (or position) space.
///
/// Zero-width sides are accepted so that empty windows can be represented;
/// operations that need a proper box call [`IntervalBox::require_proper`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalBox<T> {
    lo: Vec<T>,
    hi: Vec<T>,
}

impl<T: Real> IntervalBox<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Result<Self, GeometryError> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(GeometryError::InvalidBox(format!(
                "bounds have dimensions {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !a.is_finite() || !b.is_finite() || a > b {
                return Err(GeometryError::InvalidBox(format!("side ({a}, {b}] is not a finite interval")));
            }
        }
        Ok(Self { lo, hi })
    }

    /// One-dimensional interval `(a, b]`.
    pub fn interval(a: T, b: T) -> Result<Self, GeometryError> {
        Self::new(vec![a], vec![b])
    }

    /// Cube `(-h, h]^k`.
    pub fn centered_cube(dim: usize, half: T) -> Result<Self, GeometryError> {
        Self::new(vec![-half; dim], vec![half; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[T] {
        &self.lo
    }

    pub fn hi(&self) -> &[T] {
        &self.hi
    }

    pub fn side(&self, axis: usize) -> T {
        self.hi[axis] - self.lo[axis]
    }

    pub fn min_side(&self) -> T {
        (0..self.dim()).map(|i| self.side(i)).fold(T::infinity(), T::min)
    }

    pub fn is_degenerate(&self) -> bool {
        self.min_side() <= T::zero()
    }

    pub fn require_proper(&self) -> Result<(), GeometryError> {
        if self.is_degenerate() {
            Err(GeometryError::InvalidBox("box has a zero-width side".into()))
        } else {
            Ok(())
        }
    }

    /// Lebesgue measure of the box.
    pub fn volume(&self) -> T {
        (0..self.dim()).fold(T::one(), |acc, i| acc * self.side(i))
    }

    pub fn center(&self) -> Vec<T> {
        let two = T::lit(2.0);
        self.lo.iter().zip(&self.hi).map(|(&a, &b)| (a + b) / two).collect()
    }

    /// Half-open membership `lo < x <= hi` on every axis.
    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&a, &b))| v > a && v <= b)
    }

    /// Membership in the closure, widened by `tol`.
    pub fn contains_closed(&self, x: &[T], tol: T) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&a, &b))| v >= a - tol && v <= b + tol)
    }

    /// `I₋ε = (a+ε, b−ε]`; requires `ε < min side / 2`.
    pub fn shrink(&self, eps: T) -> Result<Self, GeometryError> {
        if !(eps > T::zero()) || eps * T::lit(2.0) >= self.min_side() {
            return Err(GeometryError::InvalidBox(format!(
                "shrink by {eps} needs 0 < eps < min side / 2 = {}",
                self.min_side() / T::lit(2.0)
            )));
        }
        Ok(Self {
            lo: self.lo.iter().map(|&a| a + eps).collect(),
            hi: self.hi.iter().map(|&b| b - eps).collect(),
        })
    }

    /// `I₊ε = (a−ε, b+ε]`.
    pub fn grow(&self, eps: T) -> Self {
        Self {
            lo: self.lo.iter().map(|&a| a - eps).collect(),
            hi: self.hi.iter().map(|&b| b + eps).collect(),
        }
    }

    /// The box `{s·v : v ∈ self}` for `s > 0`; the cone cross-section at time `s`.
    pub fn scaled(&self, s: T) -> Self {
        Self {
            lo: self.lo.iter().map(|&a| a * s).collect(),
            hi: self.hi.iter().map(|&b| b * s).collect(),
        }
    }

    pub fn translated(&self, shift: &[T]) -> Self {
        Self {
            lo: self.lo.iter().zip(shift).map(|(&a, &d)| a + d).collect(),
            hi: self.hi.iter().zip(shift).map(|(&b, &d)| b + d).collect(),
        }
    }

    /// Point reflection `v ↦ −v` (the reflected box is `(−b, −a]`).
    pub fn reflected(&self) -> Self {
        Self {
            lo: self.hi.iter().map(|&b| -b).collect(),
            hi: self.lo.iter().map(|&a| -a).collect(),
        }
    }

    /// Splits along `axis` at the midpoint.
    pub fn halves(&self, axis: usize) -> (Self, Self) {
        let mid = (self.lo[axis] + self.hi[axis]) / T::lit(2.0);
        let mut left = self.clone();
        let mut right = self.clone();
        left.hi[axis] = mid;
        right.lo[axis] = mid;
        (left, right)
    }

    /// The 2^k children obtained by halving every axis.
    pub fn bisect_all(&self) -> Vec<Self> {
        let mut out = vec![self.clone()];
        for axis in 0..self.dim() {
            out = out
                .into_iter()
                .flat_map(|b| {
                    let (l, r) = b.halves(axis);
                    [l, r]
                })
                .collect();
        }
        out
    }

    /// Regular partition into `cells` pieces per axis, in row-major order (last axis fastest).
    pub fn partition(&self, cells: usize) -> Vec<Self> {
        let cells = cells.max(1);
        let k = self.dim();
        let total = cells.pow(k as u32);
        let n = T::lit(cells as f64);
        (0..total)
            .map(|mut idx| {
                let mut lo = vec![T::zero(); k];
                let mut hi = vec![T::zero(); k];
                for axis in (0..k).rev() {
                    let j = idx % cells;
                    idx /= cells;
                    let h = self.side(axis) / n;
                    lo[axis] = self.lo[axis] + h * T::lit(j as f64);
                    hi[axis] = if j + 1 == cells { self.hi[axis] } else { self.lo[axis] + h * T::lit((j + 1) as f64) };
                }
                Self { lo, hi }
            })
            .collect()
    }

    /// Closed tensor grid with `per_axis` points per side (corners included).
    pub fn grid_points(&self, per_axis: usize) -> Vec<Vec<T>> {
        let per_axis = per_axis.max(2);
        let k = self.dim();
        let total = per_axis.pow(k as u32);
        let denom = T::lit((per_axis - 1) as f64);
        (0..total)
            .map(|mut idx| {
                let mut p = vec![T::zero(); k];
                for axis in (0..k).rev() {
                    let j = idx % per_axis;
                    idx /= per_axis;
                    p[axis] = self.lo[axis] + self.side(axis) * T::lit(j as f64) / denom;
                }
                p
            })
            .collect()
    }

    /// Overlap volume with another box of the same dimension.
    pub fn overlap_volume(&self, o: &Self) -> T {
        let mut v = T::one();
        for i in 0..self.dim() {
            let w = self.hi[i].min(o.hi[i]) - self.lo[i].max(o.lo[i]);
            if w <= T::zero() {
                return T::zero();
            }
            v = v * w;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrink_requires_small_epsilon() {
        let b = IntervalBox::centered_cube(3, 1.0).unwrap();
        assert!(b.shrink(0.2).is_ok());
        assert!(b.shrink(1.0).is_err());
        assert!(b.shrink(0.0).is_err());
        assert_eq!(b.grow(0.5).volume(), 27.0);
    }

    #[test]
    fn half_open_membership() {
        let b = IntervalBox::interval(0.0, 1.0).unwrap();
        assert!(!b.contains(&[0.0]));
        assert!(b.contains(&[1.0]));
        assert!(b.contains_closed(&[0.0], 0.0));
    }

    #[test]
    fn partition_tiles_volume() {
        let b = IntervalBox::new(vec![-1.0, 0.0], vec![1.0, 3.0]).unwrap();
        let parts = b.partition(4);
        assert_eq!(parts.len(), 16);
        let total: f64 = parts.iter().map(|p| p.volume()).sum();
        assert!((total - b.volume()).abs() < 1e-12);
        assert_eq!(b.bisect_all().len(), 4);
    }

    #[test]
    fn rejects_inverted_bounds() {
        assert!(IntervalBox::interval(1.0, 0.0).is_err());
        assert!(IntervalBox::new(vec![0.0], vec![1.0, 2.0]).is_err());
        let empty = IntervalBox::interval(0.5, 0.5).unwrap();
        assert!(empty.is_degenerate());
        assert_eq!(empty.volume(), 0.0);
    }
}
