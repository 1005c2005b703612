//! Frame engine on a finite spectral model.
//!
//! A frame is stored through the Riesz representers `phi_j` of its sampling
//! functionals. Everything here is matrix-free: the frame operator
//! `F f = sum_j <f, phi_j> phi_j` is applied as analysis followed by synthesis.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{apply_functional_with, representer, Derivative, FunctionalFamily, MultiplierKind};
use crate::spectral::{random_pw, PWFunction, SpectralModel};

/// A frame is certified when `A > CERTIFICATION_THRESHOLD * B`.
pub const CERTIFICATION_THRESHOLD: f64 = 1e-10;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const BOUND_ITERATIONS: usize = 5000;
pub const BOUND_SEED: u64 = 0x5eed;
/// Power iterations stop once the relative eigen-residual drops below this.
pub const BOUND_RESIDUAL: f64 = 1e-10;
/// Hard ceiling on solver iterations when the contraction is close to 1.
const MAX_ITER_CAP: usize = 1_000_000;
const PARALLEL_WORK: usize = 50_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_residual: f64,
    pub upper_residual: f64,
    pub iterations: usize,
    pub low_confidence: bool,
    pub method: String,
}

impl FrameBounds {
    /// `(B - A) / B`, the Neumann contraction factor.
    pub fn contraction(&self) -> f64 {
        if self.upper > 0.0 {
            ((self.upper - self.lower) / self.upper).max(0.0)
        } else {
            1.0
        }
    }
}

#[derive(Clone, Debug)]
pub struct FrameSystem {
    model: Arc<SpectralModel>,
    representers: Vec<PWFunction>,
    derivative: Derivative,
    family: Option<FunctionalFamily>,
    bounds: FrameBounds,
    certified: bool,
}

impl FrameSystem {
    /// Wraps explicit representers and estimates their bounds.
    pub fn from_representers(
        model: Arc<SpectralModel>,
        representers: Vec<PWFunction>,
        derivative: Derivative,
    ) -> Result<FrameSystem> {
        if representers.is_empty() {
            return Err(Error::param("representers", "a frame needs at least one element"));
        }
        for r in &representers {
            if !SpectralModel::compatible(&model, r.model()) {
                return Err(Error::IncompatibleModels);
            }
        }
        let mut frame = FrameSystem {
            model,
            representers,
            derivative,
            family: None,
            bounds: FrameBounds {
                lower: 0.0,
                upper: 0.0,
                lower_residual: f64::INFINITY,
                upper_residual: f64::INFINITY,
                iterations: 0,
                low_confidence: true,
                method: String::new(),
            },
            certified: false,
        };
        let bounds = estimate_frame_bounds(&frame, BOUND_ITERATIONS, BOUND_SEED)?;
        frame.set_bounds(bounds);
        Ok(frame)
    }

    fn set_bounds(&mut self, bounds: FrameBounds) {
        self.certified = !self.is_rank_deficient()
            && bounds.upper > 0.0
            && bounds.lower > CERTIFICATION_THRESHOLD * bounds.upper;
        self.bounds = bounds;
    }

    /// Replaces the bound estimate, e.g. with a longer power iteration.
    pub fn with_bounds(mut self, bounds: FrameBounds) -> Self {
        self.set_bounds(bounds);
        self
    }

    pub fn model(&self) -> &Arc<SpectralModel> {
        &self.model
    }

    pub fn representers(&self) -> &[PWFunction] {
        &self.representers
    }

    pub fn derivative(&self) -> Derivative {
        self.derivative
    }

    pub fn family(&self) -> Option<&FunctionalFamily> {
        self.family.as_ref()
    }

    pub fn bounds(&self) -> &FrameBounds {
        &self.bounds
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// Fewer functionals than the dimension of the model.
    pub fn is_rank_deficient(&self) -> bool {
        self.representers.len() < self.model.len()
    }

    pub fn len(&self) -> usize {
        self.representers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representers.is_empty()
    }

    fn check(&self, f: &PWFunction) -> Result<()> {
        if SpectralModel::compatible(&self.model, f.model()) {
            Ok(())
        } else {
            Err(Error::IncompatibleModels)
        }
    }

    fn analysis_unchecked(&self, f: &PWFunction) -> Vec<Complex64> {
        if self.representers.len() * self.model.len() >= PARALLEL_WORK {
            self.representers.par_iter().map(|phi| f.inner_unchecked(phi)).collect()
        } else {
            self.representers.iter().map(|phi| f.inner_unchecked(phi)).collect()
        }
    }

    fn synthesis_unchecked(&self, v: &[Complex64]) -> PWFunction {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.model.len()];
        for (vj, phi) in v.iter().zip(&self.representers) {
            for (c, p) in coeffs.iter_mut().zip(phi.coefficients()) {
                *c += vj * p;
            }
        }
        PWFunction::new(Arc::clone(&self.model), coeffs).expect("length matches model")
    }

    fn apply_unchecked(&self, f: &PWFunction) -> PWFunction {
        self.synthesis_unchecked(&self.analysis_unchecked(f))
    }
}

/// Builds the frame of representers of `family` composed with `(1+Delta)^n`
/// (`Shifted`) or `Delta^n` (`Pure`), `n = family.order`.
pub fn build_frame(family: &FunctionalFamily, model: &Arc<SpectralModel>, multiplier: MultiplierKind) -> Result<FrameSystem> {
    if family.is_empty() {
        return Err(Error::EmptyLattice);
    }
    if multiplier == MultiplierKind::Pure && !(model.band_spectrum_floor() > 0.0 && model.min_eigenvalue() > 0.0) {
        return Err(Error::PureMultiplierUnbounded);
    }
    let derivative = Derivative {
        order: family.order,
        kind: multiplier,
    };
    let representers = family
        .functionals
        .par_iter()
        .map(|phi| representer(phi, derivative, model))
        .collect::<Result<Vec<_>>>()?;
    let mut frame = FrameSystem::from_representers(Arc::clone(model), representers, derivative)?;
    frame.family = Some(family.clone());
    Ok(frame)
}

/// `v_j = <f, phi_j>`, the samples of `f`.
pub fn analysis(frame: &FrameSystem, f: &PWFunction) -> Result<Vec<Complex64>> {
    frame.check(f)?;
    Ok(frame.analysis_unchecked(f))
}

/// `sum_j v_j phi_j`, the adjoint of [`analysis`].
pub fn synthesis(frame: &FrameSystem, v: &[Complex64]) -> Result<PWFunction> {
    if v.len() != frame.len() {
        return Err(Error::LengthMismatch {
            expected: frame.len(),
            got: v.len(),
        });
    }
    Ok(frame.synthesis_unchecked(v))
}

pub fn frame_operator(frame: &FrameSystem, f: &PWFunction) -> Result<PWFunction> {
    frame.check(f)?;
    Ok(frame.apply_unchecked(f))
}

fn random_unit(model: &Arc<SpectralModel>, rng: &mut ChaCha8Rng) -> PWFunction {
    let coeffs = (0..model.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    let f = PWFunction::new(Arc::clone(model), coeffs).expect("length matches model");
    let n = f.norm();
    f.scale(Complex64::new(1.0 / n, 0.0))
}

/// Power iteration for the top eigenpair of a self-adjoint PSD operator.
/// Returns `(vector, rayleigh quotient, relative residual, iterations)`.
fn power_iteration<O>(start: PWFunction, iterations: usize, scale: f64, op: O) -> (PWFunction, f64, f64, usize)
where
    O: Fn(&PWFunction) -> PWFunction,
{
    let mut v = start;
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut used = 0;
    for it in 1..=iterations.max(1) {
        used = it;
        let w = op(&v);
        lambda = w.inner_unchecked(&v).re;
        let mut r = w.clone();
        for (a, b) in r.coefficients_mut().iter_mut().zip(v.coefficients()) {
            *a -= b * lambda;
        }
        let denom = if scale > 0.0 { scale } else { lambda.abs() };
        residual = if denom > 0.0 { r.norm() / denom } else { 0.0 };
        let wn = w.norm();
        if wn == 0.0 {
            break;
        }
        v = w.scale(Complex64::new(1.0 / wn, 0.0));
        if residual < BOUND_RESIDUAL {
            break;
        }
    }
    (v, lambda, residual, used)
}

/// `B` by power iteration on `F`; `A` from power iteration on `B I - F`,
/// read off as the Rayleigh quotient of `F` at the converged vector.
pub fn estimate_frame_bounds(frame: &FrameSystem, iterations: usize, seed: u64) -> Result<FrameBounds> {
    if frame.is_empty() {
        return Err(Error::param("representers", "a frame needs at least one element"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = random_unit(&frame.model, &mut rng);
    let (_, upper, upper_residual, it_upper) = power_iteration(start, iterations, 0.0, |v| frame.apply_unchecked(v));
    let upper = upper.max(0.0);

    let start = random_unit(&frame.model, &mut rng);
    let (v, _, lower_residual, it_lower) = power_iteration(start, iterations, upper, |v| {
        let fv = frame.apply_unchecked(v);
        let mut out = v.scale(Complex64::new(upper, 0.0));
        for (a, b) in out.coefficients_mut().iter_mut().zip(fv.coefficients()) {
            *a -= b;
        }
        out
    });
    let lower = frame.apply_unchecked(&v).inner_unchecked(&v).re / v.norm_squared();
    let lower = lower.clamp(0.0, upper);
    Ok(FrameBounds {
        lower,
        upper,
        lower_residual,
        upper_residual,
        iterations: it_upper + it_lower,
        low_confidence: upper_residual >= BOUND_RESIDUAL || lower_residual >= BOUND_RESIDUAL,
        method: format!("power iteration on F and on B*I - F, seed {seed}, budget {iterations}"),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// Richardson iteration with relaxation `1/B`: the partial sums of the
    /// Neumann series `B^-1 sum_m (I - F/B)^m`.
    #[default]
    Neumann,
    /// Conjugate gradients in the Plancherel inner product.
    ConjugateGradient,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    /// `None` selects `ceil(ln tol / ln((B - A)/B)) + 10`.
    pub max_iter: Option<usize>,
    pub method: SolverMethod,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            max_iter: None,
            method: SolverMethod::Neumann,
        }
    }
}

impl SolverOptions {
    pub fn neumann(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Default::default()
        }
    }
}

pub fn default_max_iter(bounds: &FrameBounds, tol: f64) -> usize {
    let c = bounds.contraction();
    if c <= 0.0 {
        return 10;
    }
    if c >= 1.0 {
        return MAX_ITER_CAP;
    }
    let n = (tol.ln() / c.ln()).ceil();
    if n.is_finite() && n >= 0.0 {
        (n as usize).saturating_add(10).min(MAX_ITER_CAP)
    } else {
        MAX_ITER_CAP
    }
}

#[derive(Clone, Debug)]
pub struct Inversion {
    pub solution: PWFunction,
    pub iterations: usize,
    /// `||h - F g_m|| / ||h||` for every iterate.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

fn residual_of(frame: &FrameSystem, h: &PWFunction, g: &PWFunction) -> PWFunction {
    let fg = frame.apply_unchecked(g);
    let mut r = h.clone();
    for (a, b) in r.coefficients_mut().iter_mut().zip(fg.coefficients()) {
        *a -= b;
    }
    r
}

/// Solves `F g = h`.
pub fn invert_frame_operator(frame: &FrameSystem, h: &PWFunction, tol: f64, max_iter: Option<usize>) -> Result<Inversion> {
    invert_with(
        frame,
        h,
        &SolverOptions {
            tol,
            max_iter,
            method: SolverMethod::Neumann,
        },
    )
}

pub fn invert_with(frame: &FrameSystem, h: &PWFunction, opts: &SolverOptions) -> Result<Inversion> {
    frame.check(h)?;
    if !frame.is_certified() {
        return Err(Error::NotCertified);
    }
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let h_norm = h.norm();
    if h_norm == 0.0 {
        return Ok(Inversion {
            solution: PWFunction::zero(Arc::clone(&frame.model)),
            iterations: 0,
            residuals: vec![0.0],
            converged: true,
        });
    }
    let max_iter = opts
        .max_iter
        .unwrap_or_else(|| default_max_iter(&frame.bounds, opts.tol))
        .max(1);
    match opts.method {
        SolverMethod::Neumann => Ok(neumann(frame, h, h_norm, opts.tol, max_iter)),
        SolverMethod::ConjugateGradient => Ok(conjugate_gradient(frame, h, h_norm, opts.tol, max_iter)),
    }
}

fn neumann(frame: &FrameSystem, h: &PWFunction, h_norm: f64, tol: f64, max_iter: usize) -> Inversion {
    let relax = Complex64::new(1.0 / frame.bounds.upper, 0.0);
    let mut g = h.scale(relax);
    let mut residuals = Vec::new();
    let mut iterations = 1;
    loop {
        let r = residual_of(frame, h, &g);
        let rel = r.norm() / h_norm;
        residuals.push(rel);
        if rel <= tol {
            return Inversion {
                solution: g,
                iterations,
                residuals,
                converged: true,
            };
        }
        if iterations >= max_iter {
            return Inversion {
                solution: g,
                iterations,
                residuals,
                converged: false,
            };
        }
        g.axpy(relax, &r).expect("same model");
        iterations += 1;
    }
}

fn conjugate_gradient(frame: &FrameSystem, h: &PWFunction, h_norm: f64, tol: f64, max_iter: usize) -> Inversion {
    let mut x = h.scale(Complex64::new(1.0 / frame.bounds.upper, 0.0));
    let mut r = residual_of(frame, h, &x);
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    let mut residuals = vec![rr.sqrt() / h_norm];
    let mut iterations = 1;
    while residuals[residuals.len() - 1] > tol && iterations < max_iter {
        let fp = frame.apply_unchecked(&p);
        let curvature = fp.inner_unchecked(&p).re;
        if !(curvature > 0.0) {
            break;
        }
        let alpha = Complex64::new(rr / curvature, 0.0);
        x.axpy(alpha, &p).expect("same model");
        r.axpy(-alpha, &fp).expect("same model");
        let rr_next = r.norm_squared();
        let beta = rr_next / rr;
        rr = rr_next;
        let mut next = r.clone();
        next.axpy(Complex64::new(beta, 0.0), &p).expect("same model");
        p = next;
        iterations += 1;
        // recompute the true residual so the history is comparable with Neumann
        residuals.push(residual_of(frame, h, &x).norm() / h_norm);
    }
    let converged = residuals[residuals.len() - 1] <= tol;
    Inversion {
        solution: x,
        iterations,
        residuals,
        converged,
    }
}

/// `Theta_j = F^-1 phi_j`.
pub fn dual_frame(frame: &FrameSystem, tol: f64) -> Result<Vec<PWFunction>> {
    if !frame.is_certified() {
        return Err(Error::NotCertified);
    }
    frame
        .representers
        .par_iter()
        .map(|phi| invert_frame_operator(frame, phi, tol, None).map(|inv| inv.solution))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub iterations: usize,
    pub residuals: Vec<f64>,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub contraction: f64,
    pub rel_error: Option<f64>,
    pub flags: Vec<String>,
}

impl ReconstructionReport {
    /// Report for a frame that could not be certified.
    pub fn uncertified(frame: &FrameSystem) -> Self {
        let mut flags = vec!["not certified".to_string()];
        if frame.is_rank_deficient() {
            flags.push("rank deficient".to_string());
        }
        ReconstructionReport {
            iterations: 0,
            residuals: Vec::new(),
            a: frame.bounds.lower,
            b: frame.bounds.upper,
            contraction: frame.bounds.contraction(),
            rel_error: None,
            flags,
        }
    }

    /// Records `||f - reference|| / ||reference||`.
    pub fn set_reference(&mut self, f: &PWFunction, reference: &PWFunction) -> Result<()> {
        let diff = f.sub(reference)?.norm();
        let norm = reference.norm();
        self.rel_error = Some(if norm > 0.0 { diff / norm } else { diff });
        Ok(())
    }
}

pub const FLAG_PROJECTED: &str = "projected";
pub const FLAG_MAX_ITER: &str = "max_iter exceeded";
pub const FLAG_LOW_CONFIDENCE: &str = "low-confidence bounds";

/// `f = F^-1 (sum_j v_j phi_j)`; equals `sum_j v_j Theta_j`.
///
/// Samples outside the range of the analysis operator give the least-squares
/// element, flagged `projected`.
pub fn reconstruct(frame: &FrameSystem, samples: &[Complex64], tol: f64, max_iter: Option<usize>) -> Result<(PWFunction, ReconstructionReport)> {
    reconstruct_with(
        frame,
        samples,
        &SolverOptions {
            tol,
            max_iter,
            method: SolverMethod::Neumann,
        },
    )
}

pub fn reconstruct_with(frame: &FrameSystem, samples: &[Complex64], opts: &SolverOptions) -> Result<(PWFunction, ReconstructionReport)> {
    if !frame.is_certified() {
        return Err(Error::NotCertified);
    }
    let h = synthesis(frame, samples)?;
    let inv = invert_with(frame, &h, opts)?;
    let mut flags = Vec::new();
    if !inv.converged {
        flags.push(FLAG_MAX_ITER.to_string());
    }
    if frame.bounds.low_confidence {
        flags.push(FLAG_LOW_CONFIDENCE.to_string());
    }
    let v_norm = samples.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if v_norm > 0.0 {
        let fitted = frame.analysis_unchecked(&inv.solution);
        let mismatch = fitted
            .iter()
            .zip(samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let ratio = frame.bounds.upper / frame.bounds.lower;
        if mismatch > 10.0 * opts.tol * ratio * v_norm + 1e-13 * v_norm {
            flags.push(FLAG_PROJECTED.to_string());
        }
    }
    let report = ReconstructionReport {
        iterations: inv.iterations,
        residuals: inv.residuals,
        a: frame.bounds.lower,
        b: frame.bounds.upper,
        contraction: frame.bounds.contraction(),
        rel_error: None,
        flags,
    };
    Ok((inv.solution, report))
}

/// Samples of `f` taken directly through the functionals of the frame's
/// family (not through the representers).
pub fn direct_samples(frame: &FrameSystem, f: &PWFunction) -> Result<Vec<Complex64>> {
    match &frame.family {
        Some(family) => family
            .functionals
            .iter()
            .map(|phi| apply_functional_with(phi, f, frame.derivative))
            .collect(),
        None => analysis(frame, f),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlancherelPolyaReport {
    #[serde(rename = "A_emp")]
    pub a_emp: f64,
    #[serde(rename = "B_emp")]
    pub b_emp: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    /// `A - 1e-10 B <= A_emp <= B_emp <= B + 1e-10 B`
    pub bounds_hold: bool,
    /// Worst `||f_rec - f|| / ||noise||` over the noise trials.
    pub noise_gain: f64,
    /// `sqrt(B) / A`
    pub noise_bound: f64,
    pub noise_trials: usize,
    /// Dimension of the underlying manifold.
    pub dimension: usize,
}

pub const NOISE_TRIALS: usize = 20;
pub const NOISE_LEVEL: f64 = 1e-3;
const NOISE_TOL: f64 = 1e-10;

/// Empirical sampling inequalities over `trials` random unit functions, plus
/// a noise-amplification experiment.
pub fn plancherel_polya_report(frame: &FrameSystem, trials: usize, seed: u64) -> Result<PlancherelPolyaReport> {
    if trials < 1 {
        return Err(Error::param("trials", "need at least one trial"));
    }
    let (a, b) = (frame.bounds.lower, frame.bounds.upper);
    let mut a_emp = f64::INFINITY;
    let mut b_emp: f64 = 0.0;
    for k in 0..trials {
        let f = random_pw(&frame.model, seed.wrapping_add(k as u64));
        let energy: f64 = direct_samples(frame, &f)?.iter().map(|v| v.norm_sqr()).sum();
        a_emp = a_emp.min(energy);
        b_emp = b_emp.max(energy);
    }
    let slack = 1e-10 * b;
    let bounds_hold = a - slack <= a_emp && a_emp <= b_emp && b_emp <= b + slack;

    let mut noise_gain: f64 = 0.0;
    if frame.is_certified() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        for k in 0..NOISE_TRIALS {
            let f = random_pw(&frame.model, seed.wrapping_add(1_000_000 + k as u64));
            let mut samples = direct_samples(frame, &f)?;
            let v_norm = samples.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let mut noise: Vec<Complex64> = (0..samples.len())
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect();
            let n_norm = noise.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let scale = NOISE_LEVEL * v_norm / n_norm;
            for (s, e) in samples.iter_mut().zip(noise.iter_mut()) {
                *e *= scale;
                *s += *e;
            }
            let (rec, _) = reconstruct(frame, &samples, NOISE_TOL, None)?;
            let err = rec.sub(&f)?.norm();
            noise_gain = noise_gain.max(err / (NOISE_LEVEL * v_norm));
        }
    }
    Ok(PlancherelPolyaReport {
        a_emp,
        b_emp,
        a,
        b,
        bounds_hold,
        noise_gain,
        noise_bound: b.sqrt() / a,
        noise_trials: if frame.is_certified() { NOISE_TRIALS } else { 0 },
        dimension: frame.model.geometry().dimension(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclid1d::{build_fourier_model, QuadratureRule};
    use crate::hyperbolic::build_helgason_model;
    use crate::sampling::FunctionalFamily;
    use crate::spectral::Point;

    fn orthonormal_basis(model: &Arc<SpectralModel>) -> Vec<PWFunction> {
        model
            .nodes()
            .iter()
            .map(|n| {
                PWFunction::basis(Arc::clone(model), n.id)
                    .unwrap()
                    .scale(Complex64::new(1.0 / n.weight.sqrt(), 0.0))
            })
            .collect()
    }

    fn small_model() -> Arc<SpectralModel> {
        build_fourier_model(0.5, 8, QuadratureRule::Midpoint).unwrap()
    }

    #[test]
    fn orthonormal_basis_is_identity() {
        let m = small_model();
        let frame = FrameSystem::from_representers(m.clone(), orthonormal_basis(&m), Derivative::shifted(0)).unwrap();
        let f = random_pw(&m, 1);
        let ff = frame_operator(&frame, &f).unwrap();
        for (a, b) in ff.coefficients().iter().zip(f.coefficients()) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!((frame.bounds().lower - 1.0).abs() < 1e-10);
        assert!((frame.bounds().upper - 1.0).abs() < 1e-10);
    }

    fn doubled(m: &Arc<SpectralModel>) -> FrameSystem {
        let mut reps = orthonormal_basis(m);
        reps.extend(orthonormal_basis(m));
        FrameSystem::from_representers(m.clone(), reps, Derivative::shifted(0)).unwrap()
    }

    #[test]
    fn duplicated_basis_is_twice_identity() {
        let m = small_model();
        let frame = doubled(&m);
        assert!((frame.bounds().lower - 2.0).abs() < 1e-10);
        assert!((frame.bounds().upper - 2.0).abs() < 1e-10);
        let h = random_pw(&m, 5);
        let inv = invert_frame_operator(&frame, &h, 1e-12, None).unwrap();
        assert_eq!(inv.iterations, 1);
        for (a, b) in inv.solution.coefficients().iter().zip(h.coefficients()) {
            assert!((a * 2.0 - b).norm() < 1e-14);
        }
    }

    #[test]
    fn tight_frame_dual_is_scaled_frame() {
        let m = small_model();
        let frame = doubled(&m);
        let duals = dual_frame(&frame, 1e-12).unwrap();
        for (theta, phi) in duals.iter().zip(frame.representers()) {
            for (a, b) in theta.coefficients().iter().zip(phi.coefficients()) {
                assert!((a - b / 2.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_deficient_frame_is_not_certified() {
        let m = small_model();
        let reps = orthonormal_basis(&m)[..5].to_vec();
        let frame = FrameSystem::from_representers(m.clone(), reps, Derivative::shifted(0)).unwrap();
        assert!(frame.is_rank_deficient());
        assert!(!frame.is_certified());
        assert!(frame.bounds().lower <= 1e-12 * frame.bounds().upper);
        let err = invert_frame_operator(&frame, &random_pw(&m, 1), 1e-8, None).unwrap_err();
        assert_eq!(err.to_string(), "frame not certified; inversion undefined");
        let samples = vec![Complex64::new(1.0, 0.0); 5];
        assert!(matches!(reconstruct(&frame, &samples, 1e-8, None), Err(Error::NotCertified)));
    }

    #[test]
    fn pure_multiplier_needs_positive_spectrum() {
        let m = build_fourier_model(0.5, 9, QuadratureRule::Trapezoid).unwrap();
        let fam = FunctionalFamily::diracs(&[Point::Line(0.0), Point::Line(1.0)], 1.0, 1).unwrap();
        let err = build_frame(&fam, &m, MultiplierKind::Pure).unwrap_err();
        assert_eq!(err.to_string(), "pure-derivative sampling requires spectrum bounded away from zero");
        // a midpoint grid skips t = 0, but the band on the line still reaches it
        let m = build_fourier_model(0.5, 8, QuadratureRule::Midpoint).unwrap();
        assert!(m.min_eigenvalue() > 0.0);
        assert!(matches!(build_frame(&fam, &m, MultiplierKind::Pure), Err(Error::PureMultiplierUnbounded)));
    }

    #[test]
    fn pure_representers_rescale_shifted_ones() {
        let m = build_helgason_model(2.0, 4, 4).unwrap();
        let pts: Vec<Point> = (0..6).map(|i| Point::half(0.3 * i as f64 - 0.7, 0.8 + 0.1 * i as f64).unwrap()).collect();
        let fam = FunctionalFamily::diracs(&pts, 1.0, 1).unwrap();
        let shifted = build_frame(&fam, &m, MultiplierKind::Shifted).unwrap();
        let pure = build_frame(&fam, &m, MultiplierKind::Pure).unwrap();
        for (p, s) in pure.representers().iter().zip(shifted.representers()) {
            for (node, (a, b)) in m.nodes().iter().zip(p.coefficients().iter().zip(s.coefficients())) {
                let expected = b * (node.eigenvalue / (1.0 + node.eigenvalue));
                assert!((a - expected).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn synthesis_checks_length_and_basis_vectors() {
        let m = small_model();
        let frame = doubled(&m);
        assert!(matches!(synthesis(&frame, &[Complex64::new(1.0, 0.0)]), Err(Error::LengthMismatch { .. })));
        let mut e = vec![Complex64::new(0.0, 0.0); frame.len()];
        e[3] = Complex64::new(1.0, 0.0);
        let s = synthesis(&frame, &e).unwrap();
        assert_eq!(s.coefficients(), frame.representers()[3].coefficients());
    }

    #[test]
    fn zero_samples_reconstruct_to_zero() {
        let m = small_model();
        let frame = doubled(&m);
        let (f, rep) = reconstruct(&frame, &vec![Complex64::new(0.0, 0.0); frame.len()], 1e-8, None).unwrap();
        assert!(f.is_zero());
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn default_iteration_budget() {
        let b = FrameBounds {
            lower: 1.0,
            upper: 2.0,
            lower_residual: 0.0,
            upper_residual: 0.0,
            iterations: 0,
            low_confidence: false,
            method: String::new(),
        };
        // ln(1e-8) / ln(0.5) = 26.6
        assert_eq!(default_max_iter(&b, 1e-8), 37);
        let tight = FrameBounds { lower: 2.0, ..b };
        assert_eq!(default_max_iter(&tight, 1e-8), 10);
    }

    #[test]
    fn report_field_names() {
        let rep = ReconstructionReport {
            iterations: 3,
            residuals: vec![0.5, 0.1],
            a: 1.0,
            b: 2.0,
            contraction: 0.5,
            rel_error: None,
            flags: vec![],
        };
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        keys.sort();
        assert_eq!(keys, ["A", "B", "contraction", "flags", "iterations", "rel_error", "residuals"]);
    }
}
