//! Classical Paley-Wiener model on the real line.
//!
//! The band `[-omega, omega]` is replaced by a uniform quadrature grid, so a
//! function of the model is a finite exponential sum. Note that such a sum is
//! (anti)periodic in `x` with period `1 / dt`; sample-energy comparisons are only
//! meaningful inside one period.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Geometry, KernelParams, PWFunction, Point, SpectralModel, SpectralNode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    Midpoint,
    Trapezoid,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierBandGrid {
    pub omega: f64,
    pub k: usize,
    pub rule: QuadratureRule,
}

impl FourierBandGrid {
    pub fn new(omega: f64, k: usize, rule: QuadratureRule) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::param("omega", "bandlimit must be positive and finite"));
        }
        if k < 2 {
            return Err(Error::param("k", format!("need at least 2 nodes, got {k}")));
        }
        Ok(FourierBandGrid { omega, k, rule })
    }

    /// Node spacing.
    pub fn step(&self) -> f64 {
        match self.rule {
            QuadratureRule::Midpoint => 2.0 * self.omega / self.k as f64,
            QuadratureRule::Trapezoid => 2.0 * self.omega / (self.k - 1) as f64,
        }
    }

    /// Nodes written as `omega * (integer) / (integer)` so the centre node of an
    /// odd trapezoid grid is exactly zero.
    pub fn nodes(&self) -> Vec<f64> {
        let k = self.k as f64;
        (0..self.k)
            .map(|m| {
                let m = m as f64;
                match self.rule {
                    QuadratureRule::Midpoint => self.omega * (2.0 * m + 1.0 - k) / k,
                    QuadratureRule::Trapezoid => self.omega * (2.0 * m - (k - 1.0)) / (k - 1.0),
                }
            })
            .collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.k)
            .map(|m| match self.rule {
                QuadratureRule::Trapezoid if m == 0 || m == self.k - 1 => 0.5 * h,
                _ => h,
            })
            .collect()
    }

    pub fn build_model(&self) -> Result<Arc<SpectralModel>> {
        let nodes = self
            .nodes()
            .into_iter()
            .zip(self.weights())
            .enumerate()
            .map(|(id, (t, weight))| SpectralNode {
                id,
                eigenvalue: (2.0 * PI * t).powi(2),
                weight,
                params: KernelParams::Frequency { t },
            })
            .collect();
        SpectralModel::from_nodes(Geometry::RealLine, self.omega, nodes)
    }
}

/// Band model with kernels `exp(2 pi i t x)` and eigenvalues `(2 pi t)^2` of
/// `-d^2/dx^2`.
pub fn build_fourier_model(omega: f64, k: usize, rule: QuadratureRule) -> Result<Arc<SpectralModel>> {
    FourierBandGrid::new(omega, k, rule)?.build_model()
}

/// `sin(pi a) / (pi a)` with exact zeros at nonzero integers.
pub fn sinc_pi(a: f64) -> f64 {
    if a == 0.0 {
        return 1.0;
    }
    let n = a.round();
    let r = a - n;
    let sign = if (n as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * (PI * r).sin() / (PI * a)
}

/// Truncated Shannon series `sum_{|j|<=J} f(j/2w) sinc(2w x - j)`.
/// Indices missing from `samples` count as zero.
pub fn shannon_reconstruct(samples: &BTreeMap<i64, Complex64>, omega: f64, x: f64, truncation: i64) -> Complex64 {
    let a = 2.0 * omega * x;
    samples
        .range(-truncation..=truncation)
        .fold(Complex64::new(0.0, 0.0), |acc, (&j, v)| acc + v * sinc_pi(a - j as f64))
}

/// Values `f(j / 2 omega)` for `|j| <= truncation`.
pub fn regular_samples(f: &PWFunction, truncation: i64) -> Result<BTreeMap<i64, Complex64>> {
    let spacing = 1.0 / (2.0 * f.model().bandlimit());
    (-truncation..=truncation)
        .map(|j| Ok((j, f.evaluate(&Point::Line(j as f64 * spacing))?)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParsevalReport {
    pub continuous: f64,
    pub discrete: f64,
    /// `discrete / continuous`, absent when the samples do not decay.
    pub ratio: Option<f64>,
    /// Share of sample energy carried by `J/2 < |j| <= J`.
    pub tail_fraction: f64,
    pub non_decaying: bool,
}

/// Above this tail share the truncated sample sum is not approximating a
/// convergent series.
pub const NON_DECAYING_TAIL_FRACTION: f64 = 0.1;

pub fn parseval_check(f: &PWFunction, truncation: i64) -> Result<ParsevalReport> {
    if f.model().geometry() != Geometry::RealLine {
        return Err(Error::PointKind {
            expected: Geometry::RealLine.name(),
        });
    }
    if f.is_zero() {
        return Err(Error::EmptyFunction);
    }
    if truncation < 1 {
        return Err(Error::param("J", "truncation must be at least 1"));
    }
    let omega = f.model().bandlimit();
    let samples = regular_samples(f, truncation)?;
    let mut total = 0.0;
    let mut tail = 0.0;
    for (j, v) in &samples {
        let e = v.norm_sqr();
        total += e;
        if 2 * j.abs() > truncation {
            tail += e;
        }
    }
    let continuous = f.norm();
    let discrete = (total / (2.0 * omega)).sqrt();
    let tail_fraction = if total > 0.0 { tail / total } else { 0.0 };
    let non_decaying = tail_fraction > NON_DECAYING_TAIL_FRACTION;
    Ok(ParsevalReport {
        continuous,
        discrete,
        ratio: (!non_decaying).then(|| discrete / continuous),
        tail_fraction,
        non_decaying,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JitteredPoints {
    /// `x_j` for `j = -J..=J`, in order.
    pub points: Vec<f64>,
    pub warning: Option<String>,
}

/// `x_j = j/2w + u_j delta/2w` with `u_j` uniform on `[-1, 1]`.
pub fn jittered_sample_points(omega: f64, truncation: i64, delta: f64, seed: u64) -> Result<JitteredPoints> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::param("omega", "bandlimit must be positive and finite"));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", "jitter fraction must be a finite nonnegative real"));
    }
    if truncation < 0 {
        return Err(Error::param("J", "truncation must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spacing = 1.0 / (2.0 * omega);
    let points: Vec<f64> = (-truncation..=truncation)
        .map(|j| {
            let u: f64 = rng.random_range(-1.0..=1.0);
            (j as f64 + u * delta) * spacing
        })
        .collect();
    let warning = if delta >= 0.25 {
        let ordered = points.windows(2).all(|w| w[0] < w[1]);
        Some(format!(
            "jitter fraction {delta} is at or beyond 1/4; frame bounds are not guaranteed{}",
            if ordered { "" } else { " and points are no longer increasing" }
        ))
    } else {
        None
    };
    Ok(JitteredPoints { points, warning })
}
