//! Bivariate normal mixtures and the nine benchmark densities.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::SimError;
use crate::geometry::{Point, PointSet};
use crate::seed;

/// One weighted bivariate normal.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Component {
    pub weight: f64,
    pub mean: Point,
    /// `[s11, s12, s22]`.
    pub cov: [f64; 3],
}

impl Component {
    /// From standard deviations and correlation.
    pub fn new(weight: f64, mean: (f64, f64), sigma: (f64, f64), rho: f64) -> Self {
        Component {
            weight,
            mean: Point::new(mean.0, mean.1),
            cov: [sigma.0 * sigma.0, rho * sigma.0 * sigma.1, sigma.1 * sigma.1],
        }
    }

    fn det(&self) -> f64 {
        self.cov[0] * self.cov[2] - self.cov[1] * self.cov[1]
    }
}

/// Per-component constants for fast evaluation.
#[derive(Debug, Clone, Copy)]
struct Prepared {
    mean: Point,
    /// Inverse covariance `[a, b, c]` with quadratic form `a dx^2 + 2 b dx dy + c dy^2`.
    inv: [f64; 3],
    /// `weight / (2 pi sqrt(det))`.
    scale: f64,
    /// Cholesky factor `(l11, l21, l22)`.
    chol: (f64, f64, f64),
}

#[derive(Debug, Clone)]
pub struct MixtureModel {
    pub id: u8,
    pub name: String,
    components: Vec<Component>,
    prepared: Vec<Prepared>,
    cumulative: Vec<f64>,
}

impl PartialEq for MixtureModel {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.name == other.name && self.components == other.components
    }
}

impl MixtureModel {
    /// Checks positive weights summing to one (within `1e-12`) and positive
    /// definite covariances.
    pub fn new(id: u8, name: &str, components: Vec<Component>) -> Result<Self, SimError> {
        if components.is_empty() {
            return Err(SimError::InvalidModel("a mixture needs at least one component"));
        }
        if components.iter().any(|c| !(c.weight > 0.0) || !c.mean.is_finite()) {
            return Err(SimError::InvalidModel("weights must be positive and means finite"));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(SimError::InvalidModel("weights must sum to one"));
        }
        if components.iter().any(|c| !(c.cov[0] > 0.0 && c.det() > 0.0)) {
            return Err(SimError::InvalidModel("covariances must be positive definite"));
        }
        let prepared = components
            .iter()
            .map(|c| {
                let det = c.det();
                let l11 = c.cov[0].sqrt();
                let l21 = c.cov[1] / l11;
                Prepared {
                    mean: c.mean,
                    inv: [c.cov[2] / det, -c.cov[1] / det, c.cov[0] / det],
                    scale: c.weight / (2.0 * PI * det.sqrt()),
                    chol: (l11, l21, (c.cov[2] - l21 * l21).sqrt()),
                }
            })
            .collect();
        let mut acc = 0.0;
        let cumulative = components
            .iter()
            .map(|c| {
                acc += c.weight;
                acc
            })
            .collect();
        Ok(MixtureModel {
            id,
            name: name.to_string(),
            components,
            prepared,
            cumulative,
        })
    }

    /// A single normal with the given mean and covariance `[s11, s12, s22]`.
    pub fn gaussian(mean: Point, cov: [f64; 3]) -> Result<Self, SimError> {
        Self::new(0, "Normal", alloc::vec![Component { weight: 1.0, mean, cov }])
    }

    pub fn standard_normal() -> Self {
        Self::gaussian(Point::default(), [1.0, 0.0, 1.0]).expect("valid model")
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn density(&self, p: Point) -> f64 {
        self.prepared
            .iter()
            .map(|c| {
                let (dx, dy) = (p.x - c.mean.x, p.y - c.mean.y);
                c.scale * (-0.5 * (c.inv[0] * dx * dx + 2.0 * c.inv[1] * dx * dy + c.inv[2] * dy * dy)).exp()
            })
            .sum()
    }

    /// Component labels and points of an i.i.d. sample.
    pub fn sample_labelled(&self, n: usize, seed: u64) -> (Vec<usize>, Vec<Point>) {
        let mut rng = seed::rng(seed);
        let mut labels = Vec::with_capacity(n);
        let mut pts = Vec::with_capacity(n);
        let last = self.components.len() - 1;
        for _ in 0..n {
            let u: f64 = rng.gen();
            let k = self.cumulative.partition_point(|&c| c <= u).min(last);
            let c = &self.prepared[k];
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let (l11, l21, l22) = c.chol;
            labels.push(k);
            pts.push(Point::new(c.mean.x + l11 * z1, c.mean.y + l21 * z1 + l22 * z2));
        }
        (labels, pts)
    }

    pub fn sample(&self, n: usize, seed: u64) -> PointSet {
        PointSet::new(self.sample_labelled(n, seed).1).expect("normal draws are finite")
    }

    /// Benchmark model `1..=9`.
    pub fn catalog(id: u8) -> Option<Self> {
        let c = Component::new;
        let s = 2.0f64.sqrt();
        let t = 2.0 * 3.0f64.sqrt() / 3.0;
        let (name, comps) = match id {
            1 => ("Uncorrelated Normal", alloc::vec![c(1.0, (0.0, 0.0), (0.5, s / 2.0), 0.0)]),
            2 => ("Correlated Normal", alloc::vec![c(1.0, (0.0, 0.0), (s / 2.0, s / 2.0), 0.7)]),
            3 => (
                "Skewed",
                alloc::vec![
                    c(0.2, (0.0, 0.0), (1.0, 1.0), 0.0),
                    c(0.2, (0.5, 0.5), (2.0 / 3.0, 2.0 / 3.0), 0.0),
                    c(0.6, (13.0 / 12.0, 13.0 / 12.0), (5.0 / 9.0, 5.0 / 9.0), 0.0),
                ],
            ),
            4 => (
                "Kurtotic",
                alloc::vec![
                    c(2.0 / 3.0, (0.0, 0.0), (1.0, s), 0.5),
                    c(1.0 / 3.0, (0.0, 0.0), (2.0 / 3.0, s / 3.0), -0.5),
                ],
            ),
            5 => (
                "Bimodal I",
                alloc::vec![
                    c(0.5, (-1.0, 0.0), (2.0 / 3.0, 2.0 / 3.0), 0.0),
                    c(0.5, (1.0, 0.0), (2.0 / 3.0, 2.0 / 3.0), 0.0),
                ],
            ),
            6 => (
                "Bimodal III",
                alloc::vec![
                    c(0.5, (-1.0, 1.0), (2.0 / 3.0, 2.0 / 3.0), 0.6),
                    c(0.5, (1.0, -1.0), (2.0 / 3.0, 2.0 / 3.0), 0.6),
                ],
            ),
            7 => (
                "Trimodal I",
                alloc::vec![
                    c(0.45, (-1.2, 1.2), (0.6, 0.6), 0.3),
                    c(0.45, (1.2, -1.2), (0.6, 0.6), -0.6),
                    c(0.1, (0.0, 0.0), (0.25, 0.25), 0.2),
                ],
            ),
            8 => (
                "Trimodal II",
                alloc::vec![
                    c(1.0 / 3.0, (-1.0, 0.0), (0.6, 0.7), 0.6),
                    c(1.0 / 3.0, (1.0, t), (0.6, 0.7), 0.0),
                    c(1.0 / 3.0, (1.0, -t), (0.6, 0.7), 0.0),
                ],
            ),
            9 => (
                "Trimodal III",
                alloc::vec![
                    c(3.0 / 7.0, (-1.0, 0.0), (0.6, 0.7), 0.6),
                    c(3.0 / 7.0, (1.0, t), (0.6, 0.7), 0.0),
                    c(1.0 / 7.0, (1.0, -t), (0.6, 0.7), 0.0),
                ],
            ),
            _ => return None,
        };
        let mut comps = comps;
        // thirds and sevenths do not sum to one exactly in floating point
        let rest: f64 = comps[1..].iter().map(|c| c.weight).sum();
        comps[0].weight = 1.0 - rest;
        Some(Self::new(id, name, comps).expect("catalog models are valid"))
    }

    pub fn all() -> Vec<Self> {
        (1..=9).filter_map(Self::catalog).collect()
    }

    /// One line per component, for report headers.
    pub fn describe(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        let _ = write!(out, "model {} ({}):", self.id, self.name);
        for c in &self.components {
            let (s1, s2) = (c.cov[0].sqrt(), c.cov[2].sqrt());
            let _ = write!(
                out,
                " {:.4} N(({:.4}, {:.4}), sd ({:.4}, {:.4}), rho {:.4});",
                c.weight,
                c.mean.x,
                c.mean.y,
                s1,
                s2,
                c.cov[1] / (s1 * s2)
            );
        }
        out
    }
}

pub fn mixture_density(model: &MixtureModel, p: Point) -> f64 {
    model.density(p)
}

pub fn mixture_sample(model: &MixtureModel, n: usize, seed: u64) -> PointSet {
    model.sample(n, seed)
}
