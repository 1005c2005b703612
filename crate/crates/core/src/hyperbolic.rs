//! Poincare upper half-plane: geometry, the discretized Helgason spectrum and
//! the transform of sampling functionals.
//!
//! Metric `y^-2 (dx^2 + dy^2)`, Laplace-Beltrami operator `y^2 (d_xx + d_yy)`.
//! The library works with the positive Laplacian `-y^2 (d_xx + d_yy)`, whose
//! eigenvalue on `Im(k z)^(it + 1/2)` is `t^2 + 1/4`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::SamplingFunctional;
use crate::spectral::{Geometry, KernelParams, PWFunction, Point, SpectralModel, SpectralNode};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct UpperHalfPoint {
    x: f64,
    y: f64,
}

#[derive(Deserialize)]
struct RawPoint {
    x: f64,
    y: f64,
}

impl TryFrom<RawPoint> for UpperHalfPoint {
    type Error = Error;
    fn try_from(p: RawPoint) -> Result<Self> {
        UpperHalfPoint::new(p.x, p.y)
    }
}

impl UpperHalfPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() || y <= 0.0 {
            return Err(Error::Domain(format!("({x}, {y}) is not in the upper half-plane")));
        }
        Ok(UpperHalfPoint { x, y })
    }

    /// The point `i`, fixed by every rotation.
    pub fn i() -> Self {
        UpperHalfPoint { x: 0.0, y: 1.0 }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    fn from_complex(z: Complex64) -> Result<Self> {
        UpperHalfPoint::new(z.re, z.im)
    }
}

/// `Im(k z)` for `k = [[cos a, -sin a], [sin a, cos a]]` acting by Mobius map.
pub fn rotated_imaginary_part(angle: f64, z: &UpperHalfPoint) -> f64 {
    let (s, c) = angle.sin_cos();
    let re = z.x * s + c;
    let im = z.y * s;
    z.y / (re * re + im * im)
}

/// `Im(k z)^(i t + 1/2)` for the boundary direction `phi` in `(0, 2 pi]`.
///
/// The boundary angle `phi` is carried by the matrix rotation of angle
/// `phi / 2`; the matrix angle is only defined modulo `pi` on H.
pub fn eigenfunction(t: f64, phi: f64, z: &UpperHalfPoint) -> Complex64 {
    let log_im = rotated_imaginary_part(0.5 * phi, z).ln();
    (Complex64::new(0.5, t) * log_im).exp()
}

pub fn geodesic_distance(z: &UpperHalfPoint, w: &UpperHalfPoint) -> f64 {
    // 2 asinh(|z - w| / (2 sqrt(y_z y_w))) == arccosh(1 + |z - w|^2 / (2 y_z y_w))
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    let chord = (dx * dx + dy * dy).sqrt();
    2.0 * (chord / (2.0 * (z.y * w.y).sqrt())).asinh()
}

/// Point at geodesic distance `r` from `center` in direction `theta`.
pub fn geodesic_polar_point(center: &UpperHalfPoint, r: f64, theta: f64) -> UpperHalfPoint {
    let w = Complex64::from_polar((0.5 * r).tanh(), theta);
    let one = Complex64::new(1.0, 0.0);
    let at_i = Complex64::i() * (one + w) / (one - w);
    let z = at_i * center.y + center.x;
    // tanh(r/2) < 1 keeps Im z > 0; clamp only guards against underflow.
    UpperHalfPoint::from_complex(Complex64::new(z.re, z.im.max(f64::MIN_POSITIVE)))
        .expect("Cayley image lies in H")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelgasonGrid {
    pub omega: f64,
    pub k_t: usize,
    pub k_phi: usize,
}

impl HelgasonGrid {
    pub fn new(omega: f64, k_t: usize, k_phi: usize) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::param("omega", "bandlimit must be positive and finite"));
        }
        if k_t % 2 == 1 {
            return Err(Error::OddTGrid);
        }
        if k_t < 2 {
            return Err(Error::param("k_t", "need at least 2 t-nodes"));
        }
        if k_phi < 1 {
            return Err(Error::param("k_phi", "need at least 1 phi-node"));
        }
        Ok(HelgasonGrid { omega, k_t, k_phi })
    }

    pub fn t_step(&self) -> f64 {
        2.0 * self.omega / self.k_t as f64
    }

    pub fn phi_step(&self) -> f64 {
        2.0 * PI / self.k_phi as f64
    }

    pub fn t_nodes(&self) -> Vec<f64> {
        let k = self.k_t as f64;
        (0..self.k_t)
            .map(|i| self.omega * (2.0 * i as f64 + 1.0 - k) / k)
            .collect()
    }

    pub fn phi_nodes(&self) -> Vec<f64> {
        let h = self.phi_step();
        (0..self.k_phi).map(|j| (j as f64 + 0.5) * h).collect()
    }

    /// Plancherel density `t tanh(pi t) / (8 pi^2)` times the cell area.
    pub fn weight(&self, t: f64) -> f64 {
        t * (PI * t).tanh() * self.t_step() * self.phi_step() / (8.0 * PI * PI)
    }

    pub fn build_model(&self) -> Result<Arc<SpectralModel>> {
        let phis = self.phi_nodes();
        let mut nodes = Vec::with_capacity(self.k_t * self.k_phi);
        for t in self.t_nodes() {
            for &phi in &phis {
                nodes.push(SpectralNode {
                    id: nodes.len(),
                    eigenvalue: t * t + 0.25,
                    weight: self.weight(t),
                    params: KernelParams::Helgason { t, phi },
                });
            }
        }
        SpectralModel::from_nodes(Geometry::UpperHalfPlane, self.omega, nodes)
    }
}

pub fn build_helgason_model(omega: f64, k_t: usize, k_phi: usize) -> Result<Arc<SpectralModel>> {
    HelgasonGrid::new(omega, k_t, k_phi)?.build_model()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LaplacianReport {
    pub fd_value: Complex64,
    pub spectral_value: Complex64,
    pub rel_err: f64,
}

/// Five-point finite-difference Laplace-Beltrami operator against the
/// spectral multiplier `-(t^2 + 1/4)`.
pub fn laplacian_pointwise_check(f: &PWFunction, z: &UpperHalfPoint, h: f64) -> Result<LaplacianReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param("h", "step must be positive"));
    }
    if f.model().geometry() != Geometry::UpperHalfPlane {
        return Err(Error::PointKind {
            expected: Geometry::UpperHalfPlane.name(),
        });
    }
    let at = |dx: f64, dy: f64| -> Result<Complex64> { f.evaluate(&Point::half(z.x + dx, z.y + dy)?) };
    let centre = at(0.0, 0.0)?;
    let d_xx = at(h, 0.0)? - centre * 2.0 + at(-h, 0.0)?;
    let d_yy = at(0.0, h)? - centre * 2.0 + at(0.0, -h)?;
    let fd_value = (d_xx + d_yy) * (z.y * z.y / (h * h));
    let spectral_value = f.apply_multiplier(|lambda| -lambda)?.evaluate(&Point::Half(*z))?;
    let scale = spectral_value.norm();
    let diff = (fd_value - spectral_value).norm();
    let rel_err = if scale > 0.0 {
        diff / scale
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(LaplacianReport {
        fd_value,
        spectral_value,
        rel_err,
    })
}

/// Transform of a sampling functional: component `m` is the functional applied
/// to the eigenfunction of node `m`.
pub fn functional_transform(functional: &SamplingFunctional, model: &SpectralModel) -> Result<Vec<Complex64>> {
    if model.geometry() != Geometry::UpperHalfPlane {
        return Err(Error::PointKind {
            expected: Geometry::UpperHalfPlane.name(),
        });
    }
    functional.kernel_transform(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random_pw;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> UpperHalfPoint {
        UpperHalfPoint::new(x, y).unwrap()
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(matches!(UpperHalfPoint::new(0.0, 0.0), Err(Error::Domain(_))));
        assert!(UpperHalfPoint::new(1.0, -2.0).is_err());
    }

    #[test]
    fn rotation_examples() {
        let z = p(0.7, 1.3);
        assert_eq!(rotated_imaginary_part(0.0, &z), 1.3);
        let v = rotated_imaginary_part(PI / 2.0, &p(0.0, 2.0));
        assert!((v - 0.5).abs() < 1e-15);
        // Mobius oracle: Im((a z + b) / (c z + d)).
        let (s, c) = (0.9f64).sin_cos();
        let zc = z.as_complex();
        let image = (zc * c - s) / (zc * s + c);
        assert!((rotated_imaginary_part(0.9, &z) - image.im).abs() < 1e-14);
    }

    #[test]
    fn rotation_fixes_i() {
        for k in 0..360 {
            let phi = 2.0 * PI * k as f64 / 360.0;
            assert!((rotated_imaginary_part(phi, &UpperHalfPoint::i()) - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn eigenfunction_examples() {
        for (t, phi) in [(0.0, 0.3), (1.7, 2.0), (-3.0, 6.2)] {
            let v = eigenfunction(t, phi, &UpperHalfPoint::i());
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        let v = eigenfunction(0.0, 0.0, &p(3.0, 2.25));
        assert!((v - Complex64::new(1.5, 0.0)).norm() < 1e-15);
        for t in [-2.0, 0.5, 7.0] {
            assert!((eigenfunction(t, 0.0, &p(0.0, 4.0)).norm() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn distance_examples() {
        let i = UpperHalfPoint::i();
        assert_eq!(geodesic_distance(&i, &i), 0.0);
        assert!((geodesic_distance(&i, &p(0.0, 2.0)) - 2f64.ln()).abs() < 1e-15);
    }

    fn simpson_vertical(y0: f64, y1: f64) -> f64 {
        let n = 2000;
        let h = (y1 - y0) / n as f64;
        let f = |y: f64| 1.0 / y;
        let mut s = f(y0) + f(y1);
        for k in 1..n {
            let y = y0 + h * k as f64;
            s += if k % 2 == 1 { 4.0 * f(y) } else { 2.0 * f(y) };
        }
        (s * h / 3.0).abs()
    }

    #[test]
    fn distance_matches_metric_integration_on_vertical_lines() {
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let x = 4.0 * next() - 2.0;
            let y0 = 0.2 + 3.0 * next();
            let y1 = 0.2 + 3.0 * next();
            let d = geodesic_distance(&p(x, y0), &p(x, y1));
            assert!((d - simpson_vertical(y0.min(y1), y0.max(y1))).abs() < 1e-8);
        }
    }

    #[test]
    fn polar_point_is_at_requested_distance() {
        let c = p(0.4, 0.7);
        for (r, th) in [(0.1, 0.0), (0.5, 1.0), (1.3, 4.0)] {
            let q = geodesic_polar_point(&c, r, th);
            assert!((geodesic_distance(&c, &q) - r).abs() < 1e-12);
        }
    }

    #[test]
    fn helgason_grid_examples() {
        let m = build_helgason_model(2.0, 8, 8).unwrap();
        assert_eq!(m.len(), 64);
        assert!(m.nodes().iter().all(|n| n.weight > 0.0));
        let min = m.min_eigenvalue();
        assert!(min > 0.25);
        let g = HelgasonGrid::new(2.0, 8, 8).unwrap();
        assert_eq!(g.weight(0.0), 0.0);
        for n in m.nodes() {
            let t = n.params.t();
            assert_eq!(n.eigenvalue, t * t + 0.25);
        }
        // eigenvalues approach 1/4 as the grid refines
        let fine = build_helgason_model(2.0, 400, 1).unwrap();
        assert!(fine.min_eigenvalue() - 0.25 < 1e-4);
    }

    #[test]
    fn odd_t_grid_is_rejected() {
        let err = build_helgason_model(2.0, 7, 4).unwrap_err();
        assert_eq!(err.to_string(), "t-grid must avoid t=0 (zero Plancherel weight)");
    }

    #[test]
    fn phi_grid_kernels_are_distinct() {
        // Even K_phi pairs phi with phi + pi; the kernels must still differ.
        let m = build_helgason_model(1.0, 2, 4).unwrap();
        let z = p(0.3, 1.4);
        let row = m.kernel_row(&Point::Half(z)).unwrap();
        for a in 0..row.len() {
            for b in a + 1..row.len() {
                assert!((row[a] - row[b]).norm() > 1e-3);
            }
        }
    }

    #[test]
    fn spectral_multiplier_on_t_zero_direction() {
        // A node near t = 0 carries eigenvalue close to 1/4.
        let m = build_helgason_model(0.001, 2, 1).unwrap();
        let f = PWFunction::basis(m.clone(), 0).unwrap();
        let g = f.apply_multiplier(|l| l).unwrap();
        assert!((g.coefficients()[0].re - 0.25).abs() < 1e-6);
    }

    #[test]
    fn laplacian_zero_function() {
        let m = build_helgason_model(2.0, 4, 4).unwrap();
        let r = laplacian_pointwise_check(&PWFunction::zero(m), &p(1.0, 2.0), 1e-3).unwrap();
        assert_eq!(r.fd_value, Complex64::new(0.0, 0.0));
        assert_eq!(r.spectral_value, Complex64::new(0.0, 0.0));
        assert!(laplacian_pointwise_check(&PWFunction::zero(build_helgason_model(2.0, 4, 4).unwrap()), &p(1.0, 2.0), 0.0).is_err());
    }

    #[test]
    fn laplacian_single_node_second_order() {
        let m = build_helgason_model(2.0, 4, 3).unwrap();
        let f = PWFunction::basis(m, 5).unwrap();
        let z = p(0.3, 1.5);
        let errs: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&h| laplacian_pointwise_check(&f, &z, h).unwrap().rel_err)
            .collect();
        for w in errs.windows(2) {
            let rate = w[0] / w[1];
            assert!((3.5..4.5).contains(&rate), "rate {rate}");
        }
    }

    #[test]
    fn laplacian_random_function() {
        let m = build_helgason_model(2.0, 8, 6).unwrap();
        let f = random_pw(&m, 4);
        let r = laplacian_pointwise_check(&f, &p(1.0, 2.0), 1e-3).unwrap();
        assert!(r.rel_err <= 1e-5, "{}", r.rel_err);
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(
            x1 in -5.0..5.0f64, y1 in 0.05..5.0f64,
            x2 in -5.0..5.0f64, y2 in 0.05..5.0f64,
            x3 in -5.0..5.0f64, y3 in 0.05..5.0f64,
        ) {
            let (a, b, c) = (p(x1, y1), p(x2, y2), p(x3, y3));
            let ab = geodesic_distance(&a, &b);
            prop_assert!((ab - geodesic_distance(&b, &a)).abs() <= 1e-12 * (1.0 + ab));
            prop_assert!(ab <= geodesic_distance(&a, &c) + geodesic_distance(&c, &b) + 1e-9);
            prop_assert!(ab >= 0.0);
        }

        #[test]
        fn rotation_keeps_points_in_h(phi in 0.0..(2.0 * PI), x in -10.0..10.0f64, y in 1e-3..10.0f64) {
            prop_assert!(rotated_imaginary_part(phi, &p(x, y)) > 0.0);
        }
    }
}
