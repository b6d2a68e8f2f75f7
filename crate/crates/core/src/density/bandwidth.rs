//! Bandwidth matrices and selectors.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{moments, DensityError, DensityWarning};
use crate::geometry::{Point, PointSet};

/// Symmetric positive definite 2x2 bandwidth in covariance scale
/// (squared length units).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandwidthMatrix {
    h11: f64,
    h12: f64,
    h22: f64,
}

impl BandwidthMatrix {
    pub fn new(h11: f64, h12: f64, h22: f64) -> Result<Self, DensityError> {
        let ok = h11.is_finite() && h12.is_finite() && h22.is_finite() && h11 > 0.0 && h22 > 0.0 && h11 * h22 - h12 * h12 > 0.0;
        if ok {
            Ok(BandwidthMatrix { h11, h12, h22 })
        } else {
            Err(DensityError::NotPositiveDefinite)
        }
    }

    /// `h^2 I`, a kernel with standard deviation `h` along every direction.
    pub fn isotropic(h: f64) -> Result<Self, DensityError> {
        Self::new(h * h, 0.0, h * h)
    }

    pub fn h11(&self) -> f64 {
        self.h11
    }

    pub fn h12(&self) -> f64 {
        self.h12
    }

    pub fn h22(&self) -> f64 {
        self.h22
    }

    pub fn to_array(&self) -> [[f64; 2]; 2] {
        [[self.h11, self.h12], [self.h12, self.h22]]
    }

    pub fn det(&self) -> f64 {
        self.h11 * self.h22 - self.h12 * self.h12
    }

    pub fn trace(&self) -> f64 {
        self.h11 + self.h22
    }

    pub fn scaled(&self, c: f64) -> Self {
        BandwidthMatrix {
            h11: self.h11 * c,
            h12: self.h12 * c,
            h22: self.h22 * c,
        }
    }

    /// Eigenvalues, largest first.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * self.trace();
        let d = (0.25 * (self.h11 - self.h22) * (self.h11 - self.h22) + self.h12 * self.h12).sqrt();
        (m + d, (m - d).max(0.0))
    }

    /// Kernel standard deviation along its widest direction.
    pub fn max_sigma(&self) -> f64 {
        self.eigenvalues().0.sqrt()
    }

    /// Lower-triangular factor `L` with `H = L L^T`, as `(l11, l21, l22)`.
    pub fn cholesky(&self) -> (f64, f64, f64) {
        let l11 = self.h11.sqrt();
        let l21 = self.h12 / l11;
        let l22 = (self.h22 - l21 * l21).sqrt();
        (l11, l21, l22)
    }

    /// Entries `(a, b, c)` of `H^{-1} = [[a, b], [b, c]]`.
    pub fn inverse(&self) -> (f64, f64, f64) {
        let det = self.det();
        (self.h22 / det, -self.h12 / det, self.h11 / det)
    }

    /// Squared Mahalanobis length `d^T H^{-1} d`.
    #[inline]
    pub fn quad(&self, dx: f64, dy: f64) -> f64 {
        let (a, b, c) = self.inverse();
        a * dx * dx + 2.0 * b * dx * dy + c * dy * dy
    }

    /// Peak value of the `N(0, H)` density.
    pub fn peak(&self) -> f64 {
        1.0 / (2.0 * PI * self.det().sqrt())
    }
}

/// Which bandwidth rule a procedure uses.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BandwidthSelector {
    NormalScale,
    /// Two-stage plug-in ([`bandwidth_plugin`]).
    #[default]
    Plugin,
    /// Least-squares cross-validation over the default grid ([`bandwidth_lscv`]).
    Lscv,
    Fixed(BandwidthMatrix),
}

impl BandwidthSelector {
    pub fn select(&self, points: &PointSet) -> Result<BandwidthMatrix, DensityError> {
        match self {
            BandwidthSelector::NormalScale => bandwidth_normal_scale(points),
            BandwidthSelector::Plugin => bandwidth_plugin(points),
            BandwidthSelector::Lscv => bandwidth_lscv(points, &LscvGrid::default()).map(|s| s.bandwidth),
            BandwidthSelector::Fixed(h) => Ok(*h),
        }
    }
}

fn covariance(points: &[Point], needed: usize) -> Result<(Point, [f64; 3]), DensityError> {
    if points.len() < needed {
        return Err(DensityError::TooFewPoints {
            needed,
            got: points.len(),
        });
    }
    let (mean, s) = moments(points);
    let det = s[0] * s[2] - s[1] * s[1];
    if !(s[0] > 0.0 && s[2] > 0.0 && det > 1e-12 * s[0] * s[2]) {
        return Err(DensityError::DegenerateSample);
    }
    Ok((mean, s))
}

/// Normal-reference rule `H = n^{-1/3} S`, with `S` the sample covariance.
///
/// In two dimensions the general factor `(4 / (d + 2))^{2/(d+4)} n^{-2/(d+4)}`
/// reduces to `n^{-1/3}`.
pub fn bandwidth_normal_scale(points: &PointSet) -> Result<BandwidthMatrix, DensityError> {
    let (_, s) = covariance(points.points(), 3)?;
    let f = (points.len() as f64).powf(-1.0 / 3.0);
    BandwidthMatrix::new(f * s[0], f * s[1], f * s[2])
}

/// Largest sample used to estimate density functionals in the plug-in rule.
const PLUGIN_MAX_SAMPLE: usize = 5000;

/// Density functional of the standard normal, `int f^{(r)} f` in one dimension.
fn normal_psi(r: u32) -> f64 {
    let half = r / 2;
    let sign = if half % 2 == 0 { 1.0 } else { -1.0 };
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    sign * fact(r) / (2f64.powi(r as i32 + 1) * fact(half) * PI.sqrt())
}

/// `phi^{(2k)}(0)` for the standard normal density.
fn kernel_derivative_at_zero(order: u32) -> f64 {
    let k = order / 2;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let double_fact = (1..=k).map(|i| f64::from(2 * i - 1)).product::<f64>();
    sign * double_fact / (2.0 * PI).sqrt()
}

#[inline]
fn hermite(order: u32, z: f64) -> f64 {
    let z2 = z * z;
    match order {
        0 => 1.0,
        2 => z2 - 1.0,
        4 => z2 * z2 - 6.0 * z2 + 3.0,
        6 => z2 * z2 * z2 - 15.0 * z2 * z2 + 45.0 * z2 - 15.0,
        _ => unreachable!("only even orders up to six are used"),
    }
}

/// Estimates `psi_{r1,r2} = int f^{(r1,r2)} f` of the sample with an isotropic
/// Gaussian pilot of standard deviation `g` (diagonal terms included).
fn psi_hat(points: &[Point], r1: u32, r2: u32, g: f64) -> f64 {
    let n = points.len();
    let inv_g = 1.0 / g;
    let mut off = 0.0;
    for i in 0..n {
        let pi = points[i];
        for pj in &points[i + 1..] {
            let zx = (pi.x - pj.x) * inv_g;
            let zy = (pi.y - pj.y) * inv_g;
            off += hermite(r1, zx) * hermite(r2, zy) * (-0.5 * (zx * zx + zy * zy)).exp();
        }
    }
    let diag = n as f64 * hermite(r1, 0.0) * hermite(r2, 0.0);
    let norm = 2.0 * PI * g.powi((r1 + r2 + 2) as i32) * (n * n) as f64;
    (diag + 2.0 * off) / norm
}

/// Pilot standard deviation for estimating the functional of the given order
/// when the sum of its two neighbours two orders up is `next_sum`.
fn pilot(order: (u32, u32), next_sum: f64, n: usize) -> f64 {
    let k0 = kernel_derivative_at_zero(order.0) * kernel_derivative_at_zero(order.1);
    let r = order.0 + order.1;
    (-2.0 * k0 / (n as f64 * next_sum)).powf(1.0 / f64::from(r + 4))
}

/// `psi_(r1, r2)` of the standard bivariate normal.
fn normal_psi2(r1: u32, r2: u32) -> f64 {
    normal_psi(r1) * normal_psi(r2)
}

/// Estimates `psi_(r1, r2)` with the pilot built from `next(r1 + 2, r2) +
/// next(r1, r2 + 2)`. A neighbour sum of the wrong sign (a sample too small
/// to estimate it) is replaced by the normal reference.
fn staged_psi<F: Fn(u32, u32) -> f64>(points: &[Point], r: (u32, u32), next: F) -> f64 {
    let mut sum = next(r.0 + 2, r.1) + next(r.0, r.1 + 2);
    let sign = if (r.0 + r.1) % 4 == 0 { -1.0 } else { 1.0 };
    if !(sign * sum > 0.0) {
        sum = normal_psi2(r.0 + 2, r.1) + normal_psi2(r.0, r.1 + 2);
    }
    psi_hat(points, r.0, r.1, pilot(r, sum, points.len()))
}

/// Two-stage plug-in bandwidth.
///
/// The sample is standardized per axis. The sixth-order density functionals
/// are estimated with pilots from the normal reference; they set the pilots
/// of the fourth-order functionals `psi_40, psi_22, psi_04`, and then the diagonal bandwidth `diag(h1^2, h2^2)` minimizing
///
/// ```text
/// AMISE = 1 / (4 pi n h1 h2) + (h1^4 psi_40 + 2 h1^2 h2^2 psi_22 + h2^4 psi_04) / 4
/// ```
///
/// is found (closed form in `h1` for a fixed ratio `h2 / h1`, golden-section
/// search over the ratio). The result is mapped back to the data scale and
/// given the sample correlation as off-diagonal correlation.
///
/// Functionals are estimated on an evenly strided subsample of at most 5000
/// points.
pub fn bandwidth_plugin(points: &PointSet) -> Result<BandwidthMatrix, DensityError> {
    let (mean, s) = covariance(points.points(), 10)?;
    let n = points.len();
    let (s1, s2) = (s[0].sqrt(), s[2].sqrt());
    let rho = s[1] / (s1 * s2);
    let m = n.min(PLUGIN_MAX_SAMPLE);
    let std: Vec<Point> = (0..m)
        .map(|k| {
            let p = points.points()[k * n / m];
            Point::new((p.x - mean.x) / s1, (p.y - mean.y) / s2)
        })
        .collect();

    let mut psi6 = [0.0; 4];
    for (k, slot) in psi6.iter_mut().enumerate() {
        let r1 = 6 - 2 * k as u32;
        *slot = staged_psi(&std, (r1, 6 - r1), normal_psi2);
    }
    let sixth = |r1: u32, _r2: u32| psi6[((6 - r1) / 2) as usize];
    let psi40 = staged_psi(&std, (4, 0), sixth);
    let psi22 = staged_psi(&std, (2, 2), sixth);
    let psi04 = staged_psi(&std, (0, 4), sixth);

    let nf = n as f64;
    let a = |c: f64| psi40 + 2.0 * c * c * psi22 + c.powi(4) * psi04;
    let h1_of = |c: f64| (1.0 / (2.0 * PI * nf * c * a(c))).powf(1.0 / 6.0);
    let amise = |c: f64| {
        let h1 = h1_of(c);
        1.0 / (4.0 * PI * nf * c * h1 * h1) + 0.25 * h1.powi(4) * a(c)
    };
    if !(psi40 > 0.0 && psi04 > 0.0 && psi22 > -(psi40 * psi04).sqrt()) {
        return bandwidth_normal_scale(points);
    }
    let c = golden_min(|t| amise(t.exp()), (0.05f64).ln(), (20.0f64).ln()).exp();
    let h1 = h1_of(c) * s1;
    let h2 = c * h1_of(c) * s2;
    BandwidthMatrix::new(h1 * h1, rho * h1 * h2, h2 * h2)
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if (hi - lo).abs() < 1e-10 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Multiplicative search grid for [`bandwidth_lscv`]: candidates are
/// `c * H_NS` for `steps` log-spaced `c` in `[min_scale, max_scale]`, plus
/// `c = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LscvGrid {
    pub min_scale: f64,
    pub max_scale: f64,
    pub steps: usize,
}

impl Default for LscvGrid {
    fn default() -> Self {
        LscvGrid {
            min_scale: 0.05,
            max_scale: 2.0,
            steps: 41,
        }
    }
}

impl LscvGrid {
    pub fn scales(&self) -> Vec<f64> {
        let (lo, hi) = (self.min_scale.ln(), self.max_scale.ln());
        let k = self.steps.max(2);
        let mut out: Vec<f64> = (0..k).map(|i| (lo + (hi - lo) * i as f64 / (k - 1) as f64).exp()).collect();
        if !out.iter().any(|&c| (c - 1.0).abs() < 1e-12) {
            out.push(1.0);
            out.sort_by(f64::total_cmp);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LscvSelection {
    pub bandwidth: BandwidthMatrix,
    /// Selected multiple of the normal-scale bandwidth.
    pub scale: f64,
    pub score: f64,
    pub normal_scale_score: f64,
    pub warning: Option<DensityWarning>,
}

/// LSCV criterion for each multiple `c` of `base`:
/// `int f_c^2 - (2/n) sum_i f_{c,-i}(X_i)`.
fn lscv_scores(points: &[Point], base: &BandwidthMatrix, scales: &[f64]) -> Vec<f64> {
    let n = points.len();
    let (a, b, c) = base.inverse();
    let halves: Vec<f64> = scales.iter().map(|&s| -0.25 / s).collect();
    let mut twice = alloc::vec![0.0; scales.len()];
    let mut once = alloc::vec![0.0; scales.len()];
    for i in 0..n {
        let pi = points[i];
        for pj in &points[i + 1..] {
            let dx = pi.x - pj.x;
            let dy = pi.y - pj.y;
            let q = a * dx * dx + 2.0 * b * dx * dy + c * dy * dy;
            for (k, &h) in halves.iter().enumerate() {
                // exp(-q / (4c)) is the 2cH kernel shape; its square is the cH shape
                let e = (h * q).exp();
                twice[k] += e;
                once[k] += e * e;
            }
        }
    }
    let peak = base.peak();
    let nf = n as f64;
    scales
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let integral = (nf * peak / (2.0 * s) + 2.0 * twice[k] * peak / (2.0 * s)) / (nf * nf);
            let loo = 2.0 * once[k] * peak / s / (nf * (nf - 1.0));
            integral - 2.0 * loo
        })
        .collect()
}

/// LSCV criterion of a single bandwidth.
pub fn lscv_score(points: &PointSet, h: &BandwidthMatrix) -> f64 {
    lscv_scores(points.points(), h, &[1.0])[0]
}

/// Least-squares cross-validation over multiples of the normal-scale
/// bandwidth.
pub fn bandwidth_lscv(points: &PointSet, grid: &LscvGrid) -> Result<LscvSelection, DensityError> {
    if points.len() < 20 {
        return Err(DensityError::TooFewPoints {
            needed: 20,
            got: points.len(),
        });
    }
    let base = bandwidth_normal_scale(points)?;
    let scales = grid.scales();
    let scores = lscv_scores(points.points(), &base, &scales);
    let ns = scales.iter().position(|&c| (c - 1.0).abs() < 1e-12).unwrap_or(0);
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if hi - lo < 1e-12 {
        return Ok(LscvSelection {
            bandwidth: base,
            scale: 1.0,
            score: scores[ns],
            normal_scale_score: scores[ns],
            warning: Some(DensityWarning::FlatObjective),
        });
    }
    let best = scores
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(ns);
    Ok(LscvSelection {
        bandwidth: base.scaled(scales[best]),
        scale: scales[best],
        score: scores[best],
        normal_scale_score: scores[ns],
        warning: None,
    })
}
