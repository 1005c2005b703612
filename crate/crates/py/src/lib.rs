use std::path::PathBuf;
use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pwframes::euclid1d::{build_fourier_model, QuadratureRule};
use pwframes::frames::{build_frame, direct_samples, reconstruct_with, ReconstructionReport, SolverMethod, SolverOptions};
use pwframes::harness::{self, ExperimentConfig};
use pwframes::hyperbolic::build_helgason_model;
use pwframes::sampling::{build_lattice, make_functional_family, FamilyParams};
use pwframes::spectral::random_pw;
use pwframes::{Complex64, DomainBox, Error, FunctionalKind, MultiplierKind, Point};

create_exception!(pwframes, NotCertifiedError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NotCertified => NotCertifiedError::new_err(e.to_string()),
        Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_multiplier(name: &str) -> PyResult<MultiplierKind> {
    match name {
        "shifted" => Ok(MultiplierKind::Shifted),
        "pure" => Ok(MultiplierKind::Pure),
        other => Err(PyValueError::new_err(format!("unknown multiplier {other:?}"))),
    }
}

fn parse_functional(name: &str) -> PyResult<FunctionalKind> {
    match name {
        "dirac" => Ok(FunctionalKind::Dirac),
        "weighted_diracs" => Ok(FunctionalKind::WeightedDiracs),
        "ball_average" => Ok(FunctionalKind::BallAverage),
        other => Err(PyValueError::new_err(format!("unknown functional kind {other:?}"))),
    }
}

/// Discretized spectrum of the Laplacian on the line or the hyperbolic plane.
#[pyclass(name = "SpectralModel", frozen)]
struct PySpectralModel {
    inner: Arc<pwframes::SpectralModel>,
}

#[pymethods]
impl PySpectralModel {
    #[staticmethod]
    #[pyo3(signature = (omega, k, rule = "midpoint"))]
    fn euclid1d(omega: f64, k: usize, rule: &str) -> PyResult<Self> {
        let rule = match rule {
            "midpoint" => QuadratureRule::Midpoint,
            "trapezoid" => QuadratureRule::Trapezoid,
            other => return Err(PyValueError::new_err(format!("unknown rule {other:?}"))),
        };
        let inner = build_fourier_model(omega, k, rule).map_err(to_py)?;
        Ok(PySpectralModel { inner })
    }

    #[staticmethod]
    fn hyperbolic(omega: f64, k_t: usize, k_phi: usize) -> PyResult<Self> {
        let inner = build_helgason_model(omega, k_t, k_phi).map_err(to_py)?;
        Ok(PySpectralModel { inner })
    }

    /// Model kind as spelled in experiment configs.
    #[getter]
    fn geometry(&self) -> &'static str {
        match self.inner.geometry() {
            pwframes::Geometry::RealLine => "euclid1d",
            pwframes::Geometry::UpperHalfPlane => "hyperbolic",
        }
    }

    #[getter]
    fn bandlimit(&self) -> f64 {
        self.inner.bandlimit()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.nodes().iter().map(|n| n.eigenvalue).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SpectralModel(geometry={:?}, omega={}, nodes={})",
            self.geometry(),
            self.inner.bandlimit(),
            self.inner.len()
        )
    }
}

fn point_for(model: &pwframes::SpectralModel, x: f64, y: Option<f64>) -> PyResult<Point> {
    match (model.geometry(), y) {
        (pwframes::Geometry::RealLine, None) => Ok(Point::Line(x)),
        (pwframes::Geometry::UpperHalfPlane, Some(y)) => Point::half(x, y).map_err(to_py),
        (pwframes::Geometry::RealLine, Some(_)) => Err(PyValueError::new_err("points on the line take one coordinate")),
        (pwframes::Geometry::UpperHalfPlane, None) => Err(PyValueError::new_err("points in H take two coordinates")),
    }
}

/// Bandlimited function given by its spectral coefficients.
#[pyclass(name = "PWFunction", frozen)]
struct PyPWFunction {
    inner: pwframes::PWFunction,
}

#[pymethods]
impl PyPWFunction {
    #[new]
    fn new(model: &PySpectralModel, coefficients: Vec<Complex64>) -> PyResult<Self> {
        let inner = pwframes::PWFunction::new(Arc::clone(&model.inner), coefficients).map_err(to_py)?;
        Ok(PyPWFunction { inner })
    }

    /// Unit-norm function with Gaussian coefficients.
    #[staticmethod]
    fn random(model: &PySpectralModel, seed: u64) -> Self {
        PyPWFunction {
            inner: random_pw(&model.inner, seed),
        }
    }

    #[getter]
    fn coefficients(&self) -> Vec<Complex64> {
        self.inner.coefficients().to_vec()
    }

    #[pyo3(signature = (x, y = None))]
    fn evaluate(&self, x: f64, y: Option<f64>) -> PyResult<Complex64> {
        let p = point_for(self.inner.model(), x, y)?;
        self.inner.evaluate(&p).map_err(to_py)
    }

    fn inner_product(&self, other: &PyPWFunction) -> PyResult<Complex64> {
        self.inner.inner_product(&other.inner).map_err(to_py)
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    /// `Delta^s f` through the spectral multiplier `lambda^s`.
    fn laplacian_power(&self, s: f64) -> PyResult<Self> {
        let inner = self.inner.laplacian_power(s).map_err(to_py)?;
        Ok(PyPWFunction { inner })
    }

    fn __sub__(&self, other: &PyPWFunction) -> PyResult<Self> {
        let inner = self.inner.sub(&other.inner).map_err(to_py)?;
        Ok(PyPWFunction { inner })
    }
}

/// Separated, covering point set with its certificate.
#[pyclass(name = "Lattice", frozen)]
struct PyLattice {
    inner: pwframes::Lattice,
}

#[pymethods]
impl PyLattice {
    #[staticmethod]
    #[pyo3(signature = (lo, hi, rho, candidate_count = 4000, seed = 0))]
    fn interval(lo: f64, hi: f64, rho: f64, candidate_count: usize, seed: u64) -> PyResult<Self> {
        let inner = build_lattice(&DomainBox::interval(lo, hi), rho, candidate_count, seed).map_err(to_py)?;
        Ok(PyLattice { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (x, y, rho, candidate_count = 4000, seed = 0))]
    fn half_plane(x: (f64, f64), y: (f64, f64), rho: f64, candidate_count: usize, seed: u64) -> PyResult<Self> {
        let inner = build_lattice(&DomainBox::half_plane(x, y), rho, candidate_count, seed).map_err(to_py)?;
        Ok(PyLattice { inner })
    }

    #[getter]
    fn points(&self) -> Vec<(f64, Option<f64>)> {
        self.inner.points.iter().map(Point::coords).collect()
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho
    }

    #[getter]
    fn certificate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = &self.inner.certificate;
        let d = PyDict::new(py);
        d.set_item("min_pairwise_distance", c.min_pairwise_distance)?;
        d.set_item("covering_radius", c.covering_radius)?;
        d.set_item("multiplicity_bound", c.multiplicity_bound)?;
        Ok(d)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

fn report_dict<'py>(py: Python<'py>, r: &ReconstructionReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("iterations", r.iterations)?;
    d.set_item("residuals", r.residuals.clone())?;
    d.set_item("A", r.a)?;
    d.set_item("B", r.b)?;
    d.set_item("contraction", r.contraction)?;
    d.set_item("rel_error", r.rel_error)?;
    d.set_item("flags", r.flags.clone())?;
    Ok(d)
}

/// Frame of Riesz representers of sampling functionals on a lattice.
#[pyclass(name = "FrameSystem", frozen)]
struct PyFrameSystem {
    inner: pwframes::FrameSystem,
}

#[pymethods]
impl PyFrameSystem {
    #[new]
    #[pyo3(signature = (model, lattice, kind = "dirac", order = 0, multiplier = "shifted", seed = 0))]
    fn new(model: &PySpectralModel, lattice: &PyLattice, kind: &str, order: u32, multiplier: &str, seed: u64) -> PyResult<Self> {
        let params = FamilyParams {
            sub_radius: 0.25 * lattice.inner.rho,
            ..FamilyParams::default()
        };
        let family = make_functional_family(&lattice.inner, parse_functional(kind)?, &params, order, seed).map_err(to_py)?;
        let inner = build_frame(&family, &model.inner, parse_multiplier(multiplier)?).map_err(to_py)?;
        Ok(PyFrameSystem { inner })
    }

    /// `(A, B)`
    #[getter]
    fn bounds(&self) -> (f64, f64) {
        let b = self.inner.bounds();
        (b.lower, b.upper)
    }

    #[getter]
    fn certified(&self) -> bool {
        self.inner.is_certified()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Sampling functionals applied to `f`.
    fn samples(&self, f: &PyPWFunction) -> PyResult<Vec<Complex64>> {
        direct_samples(&self.inner, &f.inner).map_err(to_py)
    }

    #[pyo3(signature = (samples, tol = 1e-8, max_iter = None, method = "neumann"))]
    fn reconstruct<'py>(
        &self,
        py: Python<'py>,
        samples: Vec<Complex64>,
        tol: f64,
        max_iter: Option<usize>,
        method: &str,
    ) -> PyResult<(PyPWFunction, Bound<'py, PyDict>)> {
        let method = match method {
            "neumann" => SolverMethod::Neumann,
            "conjugate_gradient" => SolverMethod::ConjugateGradient,
            other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
        };
        let opts = SolverOptions { tol, max_iter, method };
        let (f, report) = py
            .detach(|| reconstruct_with(&self.inner, &samples, &opts))
            .map_err(to_py)?;
        Ok((PyPWFunction { inner: f }, report_dict(py, &report)?))
    }
}

/// Runs the reconstruction pipeline for a JSON config; writes report.json and
/// run.json into `out` and returns `(report, exit_code)`.
#[pyfunction]
fn run_reconstruct<'py>(py: Python<'py>, config_json: &str, out: PathBuf) -> PyResult<(Bound<'py, PyDict>, i32)> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(to_py)?;
    let (outcome, code) = py.detach(|| harness::cmd_reconstruct(&cfg, &out)).map_err(to_py)?;
    Ok((report_dict(py, &outcome.report)?, code))
}

#[pymodule]
fn pwframes_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpectralModel>()?;
    m.add_class::<PyPWFunction>()?;
    m.add_class::<PyLattice>()?;
    m.add_class::<PyFrameSystem>()?;
    m.add_function(wrap_pyfunction!(run_reconstruct, m)?)?;
    m.add("NotCertifiedError", m.py().get_type::<NotCertifiedError>())?;
    Ok(())
}
