//! Direct kernel density evaluation at points and on grids.

use alloc::vec::Vec;
use super::{BandwidthMatrix, DensityError};
use crate::geometry::{Point, PointSet};

/// Kernel terms with squared Mahalanobis length above this are dropped on
/// grids (`exp(-40)` relative to the peak).
const GRID_CUTOFF: f64 = 80.0;

/// Regular lattice over a rectangle. Node `(i, j)` sits at
/// `(x_min + i dx, y_min + j dy)` with `dx = (x_max - x_min) / (nx - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self, DensityError> {
        let g = GridSpec {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid over the bounding box of `points` padded by `pad` on every side.
    pub fn around(points: &[Point], pad: f64, nx: usize, ny: usize) -> Result<Self, DensityError> {
        let (lo, hi) = crate::geometry::PointSet::new(points.to_vec())
            .ok()
            .and_then(|s| s.bounds())
            .ok_or(DensityError::InvalidGrid("no finite points"))?;
        Self::new(lo.x - pad, hi.x + pad, lo.y - pad, hi.y + pad, nx, ny)
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        if self.nx < 2 || self.ny < 2 {
            return Err(DensityError::InvalidGrid("need at least two nodes per axis"));
        }
        let finite = self.x_min.is_finite() && self.x_max.is_finite() && self.y_min.is_finite() && self.y_max.is_finite();
        if !finite || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(DensityError::InvalidGrid("empty or non-finite range"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy()
    }

    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new(self.x(i), self.y(j))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }
}

/// Density values on a grid, row-major: `values[j * nx + i]` is node `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub bandwidth: Option<BandwidthMatrix>,
}

impl DensityField {
    /// Tabulates `f` at every node.
    pub fn from_fn<F: Fn(Point) -> f64>(grid: GridSpec, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.node(i, j)));
            }
        }
        DensityField {
            grid,
            values,
            bandwidth: None,
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Node with the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let k = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
            .0;
        (k % self.grid.nx, k / self.grid.nx)
    }

    /// Trapezoidal integral over the grid rectangle.
    pub fn integral(&self) -> f64 {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut total = 0.0;
        for j in 0..ny {
            let wy = if j == 0 || j == ny - 1 { 0.5 } else { 1.0 };
            for i in 0..nx {
                let wx = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
                total += wx * wy * self.at(i, j);
            }
        }
        total * self.grid.dx() * self.grid.dy()
    }

    /// Bilinear interpolation; zero outside the grid.
    pub fn interpolate(&self, p: Point) -> f64 {
        let g = &self.grid;
        let u = (p.x - g.x_min) / g.dx();
        let v = (p.y - g.y_min) / g.dy();
        if !(u >= 0.0 && v >= 0.0 && u <= (g.nx - 1) as f64 && v <= (g.ny - 1) as f64) {
            return 0.0;
        }
        let i = (u.floor() as usize).min(g.nx - 2);
        let j = (v.floor() as usize).min(g.ny - 2);
        let (fu, fv) = (u - i as f64, v - j as f64);
        let a = self.at(i, j) * (1.0 - fu) + self.at(i + 1, j) * fu;
        let b = self.at(i, j + 1) * (1.0 - fu) + self.at(i + 1, j + 1) * fu;
        a * (1.0 - fv) + b * fv
    }
}

/// `f_n(q)` by direct summation over the sample.
pub fn kde_eval_at(points: &[Point], h: &BandwidthMatrix, q: Point) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let (a, b, c) = h.inverse();
    let mut sum = 0.0;
    for p in points {
        let dx = q.x - p.x;
        let dy = q.y - p.y;
        sum += (-0.5 * (a * dx * dx + 2.0 * b * dx * dy + c * dy * dy)).exp();
    }
    sum * h.peak() / points.len() as f64
}

/// `f_n` at every query point: `(1/n) sum_i phi_H(q - X_i)`.
pub fn kde_eval(points: &PointSet, h: &BandwidthMatrix, queries: &PointSet) -> Vec<f64> {
    let pts = points.points();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        queries.points().par_iter().map(|&q| kde_eval_at(pts, h, q)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        queries.points().iter().map(|&q| kde_eval_at(pts, h, q)).collect()
    }
}

/// Adds one kernel's contribution to a grid row, walking outwards from the
/// row's peak with the exponential updated multiplicatively.
///
/// Along the row the exponent is `-(A k^2 + B k + C) / 2` in the node index `k`.
#[allow(clippy::too_many_arguments)]
fn add_row(row: &mut [f64], x0: f64, dx: f64, px: f64, yoff: f64, inv: (f64, f64, f64), weight: f64) {
    let (a, b, c) = inv;
    let nx = row.len();
    let u0 = x0 - px;
    let qa = a * dx * dx;
    let qb = 2.0 * (a * u0 + b * yoff) * dx;
    let qc = a * u0 * u0 + 2.0 * b * u0 * yoff + c * yoff * yoff;
    let q = |k: f64| qa * k * k + qb * k + qc;
    let peak = (-qb / (2.0 * qa)).round().clamp(0.0, (nx - 1) as f64) as usize;
    let step = (-qa).exp();
    let qk = q(peak as f64);
    if qk > GRID_CUTOFF {
        return;
    }
    let start = (-0.5 * qk).exp();
    // rightwards: e_{k+1} = e_k exp(-(qa (2k + 1) + qb) / 2)
    let mut e = start;
    let mut ratio = (-0.5 * (qa * (2.0 * peak as f64 + 1.0) + qb)).exp();
    row[peak] += weight * e;
    for slot in row.iter_mut().skip(peak + 1) {
        e *= ratio;
        ratio *= step;
        if e < 1e-300 {
            break;
        }
        *slot += weight * e;
    }
    // leftwards: e_{k-1} = e_k exp(-(qa (1 - 2k) - qb) / 2)
    let mut e = start;
    let mut ratio = (-0.5 * (qa * (1.0 - 2.0 * peak as f64) - qb)).exp();
    for slot in row[..peak].iter_mut().rev() {
        e *= ratio;
        ratio *= step;
        if e < 1e-300 {
            break;
        }
        *slot += weight * e;
    }
}

/// Tabulates `f_n` on a grid. Node values equal [`kde_eval`] up to rounding:
/// kernels are truncated where their squared Mahalanobis distance exceeds 80.
pub fn kde_grid(points: &PointSet, h: &BandwidthMatrix, grid: &GridSpec) -> Result<DensityField, DensityError> {
    grid.validate()?;
    let (nx, ny) = (grid.nx, grid.ny);
    let inv = h.inverse();
    let weight = h.peak() / points.len().max(1) as f64;
    // rows where the kernel can exceed the cutoff: (y - py)^2 <= cutoff * h22
    let reach = (GRID_CUTOFF * h.h22()).sqrt();
    let dx = grid.dx();
    let fill_row = |j: usize, row: &mut [f64]| {
        let y = grid.y(j);
        for p in points.points() {
            let yoff = y - p.y;
            if yoff.abs() <= reach {
                add_row(row, grid.x_min, dx, p.x, yoff, inv, weight);
            }
        }
    };
    let mut values = alloc::vec![0.0; nx * ny];
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        values.par_chunks_mut(nx).enumerate().for_each(|(j, row)| fill_row(j, row));
    }
    #[cfg(not(feature = "parallel"))]
    {
        values.chunks_mut(nx).enumerate().for_each(|(j, row)| fill_row(j, row));
    }
    Ok(DensityField {
        grid: *grid,
        values,
        bandwidth: Some(*h),
    })
}
