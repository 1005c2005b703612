//! Finite spectral representation shared by both geometric models.
//!
//! A model is a list of nodes of the (positive) Laplacian spectrum inside the
//! band, each carrying a Plancherel quadrature weight and the parameters of its
//! eigenfunction. A Paley-Wiener function is a coefficient vector over those
//! nodes; its values are recovered by the quadrature form of the inversion
//! integral, `f(x) = sum_m w_m c_m e_m(x)`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{self, UpperHalfPoint};

/// Which space the model's functions live on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    RealLine,
    UpperHalfPlane,
}

impl Geometry {
    pub fn name(self) -> &'static str {
        match self {
            Geometry::RealLine => "real-line point",
            Geometry::UpperHalfPlane => "upper-half-plane point",
        }
    }

    /// Topological dimension of the underlying manifold.
    pub fn dimension(self) -> usize {
        match self {
            Geometry::RealLine => 1,
            Geometry::UpperHalfPlane => 2,
        }
    }
}

/// A point of either model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Line(f64),
    Half(UpperHalfPoint),
}

impl Point {
    pub fn half(x: f64, y: f64) -> Result<Point> {
        UpperHalfPoint::new(x, y).map(Point::Half)
    }

    pub fn geometry(&self) -> Geometry {
        match self {
            Point::Line(_) => Geometry::RealLine,
            Point::Half(_) => Geometry::UpperHalfPlane,
        }
    }

    /// Riemannian distance: `|x - y|` on the line, the Poincare distance on H.
    pub fn distance(&self, other: &Point) -> Result<f64> {
        match (self, other) {
            (Point::Line(a), Point::Line(b)) => Ok((a - b).abs()),
            (Point::Half(z), Point::Half(w)) => Ok(hyperbolic::geodesic_distance(z, w)),
            _ => Err(Error::PointKind {
                expected: self.geometry().name(),
            }),
        }
    }

    /// `(coord1, coord2)`; the second coordinate is absent on the line.
    pub fn coords(&self) -> (f64, Option<f64>) {
        match self {
            Point::Line(x) => (*x, None),
            Point::Half(z) => (z.x(), Some(z.y())),
        }
    }
}

/// Parameters identifying the eigenfunction attached to a node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum KernelParams {
    /// `e(x) = exp(2 pi i t x)`.
    Frequency { t: f64 },
    /// `e(z) = Im(k_phi z)^(i t + 1/2)`.
    Helgason { t: f64, phi: f64 },
}

impl KernelParams {
    pub fn t(&self) -> f64 {
        match *self {
            KernelParams::Frequency { t } | KernelParams::Helgason { t, .. } => t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralNode {
    pub id: usize,
    pub eigenvalue: f64,
    pub weight: f64,
    pub params: KernelParams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralModel {
    nodes: Vec<SpectralNode>,
    bandlimit: f64,
    geometry: Geometry,
}

impl SpectralModel {
    /// Validates and wraps a node list. Ids are reassigned densely in order.
    pub fn from_nodes(
        geometry: Geometry,
        bandlimit: f64,
        mut nodes: Vec<SpectralNode>,
    ) -> Result<Arc<SpectralModel>> {
        if !(bandlimit > 0.0 && bandlimit.is_finite()) {
            return Err(Error::param("omega", "bandlimit must be positive and finite"));
        }
        if nodes.is_empty() {
            return Err(Error::param("nodes", "a model needs at least one node"));
        }
        for (id, node) in nodes.iter_mut().enumerate() {
            node.id = id;
            if !(node.weight > 0.0 && node.weight.is_finite()) {
                return Err(Error::param("weight", format!("node {id} has weight {}", node.weight)));
            }
            if !(node.eigenvalue >= 0.0) {
                return Err(Error::param(
                    "eigenvalue",
                    format!("node {id} has eigenvalue {}", node.eigenvalue),
                ));
            }
            let kernel_ok = matches!(
                (geometry, node.params),
                (Geometry::RealLine, KernelParams::Frequency { .. })
                    | (Geometry::UpperHalfPlane, KernelParams::Helgason { .. })
            );
            if !kernel_ok {
                return Err(Error::param("params", format!("node {id} kernel does not fit the geometry")));
            }
            if node.params.t().abs() > bandlimit * (1.0 + 1e-14) {
                return Err(Error::param("t", format!("node {id} lies outside the band")));
            }
            if geometry == Geometry::UpperHalfPlane && node.eigenvalue < 0.25 {
                return Err(Error::param("eigenvalue", format!("node {id} is below 1/4")));
            }
        }
        Ok(Arc::new(SpectralModel {
            nodes,
            bandlimit,
            geometry,
        }))
    }

    pub fn nodes(&self) -> &[SpectralNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn bandlimit(&self) -> f64 {
        self.bandlimit
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.weight)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.nodes.iter().map(|n| n.eigenvalue).fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.nodes.iter().map(|n| n.eigenvalue).fold(0.0, f64::max)
    }

    /// Largest eigenvalue admitted by the band: `(2 pi omega)^2` on the line,
    /// `omega^2 + 1/4` on H.
    pub fn band_eigenvalue_bound(&self) -> f64 {
        match self.geometry {
            Geometry::RealLine => (2.0 * std::f64::consts::PI * self.bandlimit).powi(2),
            Geometry::UpperHalfPlane => self.bandlimit * self.bandlimit + 0.25,
        }
    }

    /// Bottom of the continuous spectrum of the band: `0` on the line (the
    /// band contains `t = 0` however the grid is chosen), `1/4` on H.
    pub fn band_spectrum_floor(&self) -> f64 {
        match self.geometry {
            Geometry::RealLine => 0.0,
            Geometry::UpperHalfPlane => 0.25,
        }
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        if x.geometry() != self.geometry {
            return Err(Error::PointKind {
                expected: self.geometry.name(),
            });
        }
        Ok(())
    }

    /// Eigenfunction of `node` evaluated at `x`.
    pub fn kernel(&self, node: &SpectralNode, x: &Point) -> Result<Complex64> {
        match (node.params, x) {
            (KernelParams::Frequency { t }, Point::Line(x)) => {
                Ok(Complex64::cis(2.0 * std::f64::consts::PI * t * x))
            }
            (KernelParams::Helgason { t, phi }, Point::Half(z)) => {
                Ok(hyperbolic::eigenfunction(t, phi, z))
            }
            _ => Err(Error::PointKind {
                expected: self.geometry.name(),
            }),
        }
    }

    /// All kernel values at one point, in node order.
    pub fn kernel_row(&self, x: &Point) -> Result<Vec<Complex64>> {
        self.check_point(x)?;
        self.nodes.iter().map(|n| self.kernel(n, x)).collect()
    }

    /// Same model, same data: either the same allocation or structurally equal.
    pub fn compatible(a: &Arc<SpectralModel>, b: &Arc<SpectralModel>) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }
}

/// A function of `PW_omega` in spectral form.
#[derive(Clone, Debug)]
pub struct PWFunction {
    model: Arc<SpectralModel>,
    coeffs: Vec<Complex64>,
}

impl PWFunction {
    pub fn new(model: Arc<SpectralModel>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != model.len() {
            return Err(Error::LengthMismatch {
                expected: model.len(),
                got: coeffs.len(),
            });
        }
        Ok(PWFunction { model, coeffs })
    }

    pub fn zero(model: Arc<SpectralModel>) -> Self {
        let k = model.len();
        PWFunction {
            model,
            coeffs: vec![Complex64::new(0.0, 0.0); k],
        }
    }

    /// Unit coefficient on a single node.
    pub fn basis(model: Arc<SpectralModel>, node: usize) -> Result<Self> {
        if node >= model.len() {
            return Err(Error::param("node", format!("index {node} out of range")));
        }
        let mut f = PWFunction::zero(model);
        f.coeffs[node] = Complex64::new(1.0, 0.0);
        Ok(f)
    }

    pub fn model(&self) -> &Arc<SpectralModel> {
        &self.model
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coeffs
    }

    fn ensure_same_model(&self, other: &PWFunction) -> Result<()> {
        if SpectralModel::compatible(&self.model, &other.model) {
            Ok(())
        } else {
            Err(Error::IncompatibleModels)
        }
    }

    /// `sum_m w_m c_m(f) conj(c_m(g))`.
    pub fn inner_product(&self, other: &PWFunction) -> Result<Complex64> {
        self.ensure_same_model(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &PWFunction) -> Complex64 {
        self.model
            .nodes
            .iter()
            .zip(self.coeffs.iter().zip(&other.coeffs))
            .fold(Complex64::new(0.0, 0.0), |acc, (n, (a, b))| acc + a * b.conj() * n.weight)
    }

    pub fn norm_squared(&self) -> f64 {
        self.model
            .nodes
            .iter()
            .zip(&self.coeffs)
            .fold(0.0, |acc, (n, c)| acc + n.weight * c.norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn evaluate(&self, x: &Point) -> Result<Complex64> {
        self.model.check_point(x)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (node, c) in self.model.nodes.iter().zip(&self.coeffs) {
            acc += *c * node.weight * self.model.kernel(node, x)?;
        }
        Ok(acc)
    }

    /// `c_m -> m(lambda_m) c_m`.
    pub fn apply_multiplier<M: Fn(f64) -> f64>(&self, multiplier: M) -> Result<PWFunction> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (node, c) in self.model.nodes.iter().zip(&self.coeffs) {
            let m = multiplier(node.eigenvalue);
            if !m.is_finite() {
                return Err(Error::NonFiniteMultiplier {
                    node: node.id,
                    eigenvalue: node.eigenvalue,
                });
            }
            coeffs.push(c * m);
        }
        Ok(PWFunction {
            model: Arc::clone(&self.model),
            coeffs,
        })
    }

    /// `Delta^s f` for the positive Laplacian.
    pub fn laplacian_power(&self, s: f64) -> Result<PWFunction> {
        self.apply_multiplier(|lambda| lambda.powf(s))
    }

    pub fn scale(&self, alpha: Complex64) -> PWFunction {
        PWFunction {
            model: Arc::clone(&self.model),
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: Complex64, other: &PWFunction) -> Result<()> {
        self.ensure_same_model(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn sub(&self, other: &PWFunction) -> Result<PWFunction> {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }
}

pub fn inner_product(f: &PWFunction, g: &PWFunction) -> Result<Complex64> {
    f.inner_product(g)
}

pub fn evaluate(f: &PWFunction, x: &Point) -> Result<Complex64> {
    f.evaluate(x)
}

pub fn apply_spectral_multiplier<M: Fn(f64) -> f64>(f: &PWFunction, m: M) -> Result<PWFunction> {
    f.apply_multiplier(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BernsteinReport {
    /// `||Delta^s f||`
    pub lhs: f64,
    /// `lambda_max^s ||f||` with the largest node eigenvalue of the model.
    pub rhs: f64,
    /// `B_omega^s ||f||` with the band bound (`omega^2 + 1/4` on H).
    pub band_rhs: f64,
    pub holds: bool,
}

pub fn bernstein_verify(f: &PWFunction, s: f64) -> Result<BernsteinReport> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::param("s", "exponent must be a finite nonnegative real"));
    }
    if f.is_zero() {
        return Err(Error::EmptyFunction);
    }
    let norm = f.norm();
    let lhs = f.laplacian_power(s)?.norm();
    let rhs = f.model.max_eigenvalue().powf(s) * norm;
    let band_rhs = f.model.band_eigenvalue_bound().powf(s) * norm;
    Ok(BernsteinReport {
        lhs,
        rhs,
        band_rhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
    })
}

fn gaussian_coefficients(k: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..k)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re * scale, im * scale)
        })
        .collect()
}

fn normalized(model: Arc<SpectralModel>, coeffs: Vec<Complex64>) -> PWFunction {
    let f = PWFunction { model, coeffs };
    let norm = f.norm();
    if norm > 0.0 {
        f.scale(Complex64::new(1.0 / norm, 0.0))
    } else {
        f
    }
}

/// Standard complex Gaussian coefficients (ChaCha8 stream seeded with `seed`),
/// rescaled to unit Plancherel norm.
pub fn random_pw(model: &Arc<SpectralModel>, seed: u64) -> PWFunction {
    normalized(Arc::clone(model), gaussian_coefficients(model.len(), seed))
}

/// Like [`random_pw`] but with coefficients multiplied by a Hann taper in
/// `|t| / omega` that vanishes for `|t| >= interior * omega`.
pub fn random_band_interior(model: &Arc<SpectralModel>, seed: u64, interior: f64) -> PWFunction {
    let edge = interior.clamp(f64::MIN_POSITIVE, 1.0) * model.bandlimit();
    let coeffs = gaussian_coefficients(model.len(), seed)
        .into_iter()
        .zip(model.nodes())
        .map(|(c, node)| {
            let r = node.params.t().abs() / edge;
            let taper = if r >= 1.0 {
                0.0
            } else {
                0.5 * (1.0 + (std::f64::consts::PI * r).cos())
            };
            c * taper
        })
        .collect();
    normalized(Arc::clone(model), coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_model(ts: &[(f64, f64)]) -> Arc<SpectralModel> {
        let nodes = ts
            .iter()
            .map(|&(t, w)| SpectralNode {
                id: 0,
                eigenvalue: (2.0 * std::f64::consts::PI * t).powi(2),
                weight: w,
                params: KernelParams::Frequency { t },
            })
            .collect();
        SpectralModel::from_nodes(Geometry::RealLine, 1.0, nodes).unwrap()
    }

    #[test]
    fn single_node_parseval() {
        let m = line_model(&[(0.0, 1.0)]);
        let f = PWFunction::basis(m, 0).unwrap();
        assert_eq!(f.inner_product(&f).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn disjoint_supports_are_orthogonal() {
        let m = line_model(&[(0.0, 1.0), (0.5, 0.3)]);
        let f = PWFunction::basis(m.clone(), 0).unwrap();
        let g = PWFunction::basis(m, 1).unwrap();
        assert_eq!(f.inner_product(&g).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn mismatched_models_are_rejected() {
        let a = line_model(&[(0.0, 1.0)]);
        let b = line_model(&[(0.1, 1.0)]);
        let err = PWFunction::zero(a).inner_product(&PWFunction::zero(b)).unwrap_err();
        assert_eq!(err.to_string(), "incompatible spectral models");
    }

    #[test]
    fn constant_eigenfunction_evaluates_to_weight() {
        let m = line_model(&[(0.0, 0.75)]);
        let f = PWFunction::basis(m, 0).unwrap();
        for x in [-3.0, 0.0, 0.4, 12.5] {
            let v = f.evaluate(&Point::Line(x)).unwrap();
            assert_eq!(v, Complex64::new(0.75, 0.0));
        }
    }

    #[test]
    fn zero_function_evaluates_to_zero() {
        let m = line_model(&[(0.0, 0.5), (0.3, 0.5)]);
        let f = PWFunction::zero(m);
        assert_eq!(f.evaluate(&Point::Line(1.7)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn wrong_point_kind_is_rejected() {
        let m = line_model(&[(0.0, 1.0)]);
        let f = PWFunction::basis(m, 0).unwrap();
        assert!(matches!(
            f.evaluate(&Point::half(0.0, 1.0).unwrap()),
            Err(Error::PointKind { .. })
        ));
    }

    #[test]
    fn multiplier_identity_and_inverse_pair() {
        let m = line_model(&[(0.0, 0.2), (0.25, 0.3), (0.5, 0.5)]);
        let f = random_pw(&m, 3);
        let same = f.apply_multiplier(|_| 1.0).unwrap();
        assert_eq!(same.coefficients(), f.coefficients());
        let back = f
            .apply_multiplier(|l| 1.0 / (1.0 + l))
            .unwrap()
            .apply_multiplier(|l| 1.0 + l)
            .unwrap();
        for (a, b) in back.coefficients().iter().zip(f.coefficients()) {
            assert!((a - b).norm() <= 1e-14);
        }
    }

    #[test]
    fn non_finite_multiplier_names_the_node() {
        let m = line_model(&[(0.25, 0.5), (0.0, 0.5)]);
        let f = random_pw(&m, 1);
        let err = f.apply_multiplier(|l| 1.0 / l).unwrap_err();
        assert!(matches!(err, Error::NonFiniteMultiplier { node: 1, .. }));
        assert!(err.to_string().contains("node 1"));
    }

    #[test]
    fn bernstein_s_zero_is_equality() {
        let m = line_model(&[(0.1, 0.5), (0.4, 0.5)]);
        let f = random_pw(&m, 11);
        let r = bernstein_verify(&f, 0.0).unwrap();
        assert_eq!(r.lhs, r.rhs);
        assert!(r.holds);
    }

    #[test]
    fn bernstein_equality_on_extreme_node() {
        let m = line_model(&[(0.1, 0.5), (0.4, 0.5)]);
        let f = PWFunction::basis(m, 1).unwrap().scale(Complex64::new(0.3, -2.0));
        let r = bernstein_verify(&f, 1.5).unwrap();
        assert!((r.lhs - r.rhs).abs() <= 1e-12 * r.rhs);
        assert!(r.holds);
    }

    #[test]
    fn bernstein_rejects_zero_function() {
        let m = line_model(&[(0.1, 0.5)]);
        let err = bernstein_verify(&PWFunction::zero(m), 1.0).unwrap_err();
        assert_eq!(err.to_string(), "empty function");
    }

    #[test]
    fn random_pw_is_deterministic_and_normalized() {
        let m = line_model(&[(0.0, 0.2), (0.25, 0.3), (0.5, 0.5)]);
        let a = random_pw(&m, 42);
        let b = random_pw(&m, 42);
        let c = random_pw(&m, 43);
        assert_eq!(a.coefficients(), b.coefficients());
        assert!(a.coefficients().iter().zip(c.coefficients()).any(|(x, y)| x != y));
        assert!((a.norm() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn band_interior_vanishes_near_edges() {
        let ts: Vec<(f64, f64)> = (0..21).map(|i| (-1.0 + 0.1 * i as f64, 0.1)).collect();
        let m = line_model(&ts);
        let f = random_band_interior(&m, 5, 0.8);
        for (node, c) in m.nodes().iter().zip(f.coefficients()) {
            if node.params.t().abs() >= 0.8 - 1e-12 {
                assert_eq!(*c, Complex64::new(0.0, 0.0));
            }
        }
        assert!((f.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_weight_nodes_are_rejected() {
        let nodes = vec![SpectralNode {
            id: 0,
            eigenvalue: 0.0,
            weight: 0.0,
            params: KernelParams::Frequency { t: 0.0 },
        }];
        assert!(SpectralModel::from_nodes(Geometry::RealLine, 1.0, nodes).is_err());
    }
}
