#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use pwframes::euclid1d::{build_fourier_model, QuadratureRule};
use pwframes::frames::build_frame;
use pwframes::hyperbolic::build_helgason_model;
use pwframes::sampling::{build_lattice, FunctionalFamily};
use pwframes::{Complex64, DomainBox, FrameSystem, MultiplierKind, SpectralModel};

/// Exact spectrum of the frame operator.
///
/// With `u_m = sqrt(w_m) c_m` the Plancherel space becomes plain `C^K` and the
/// analysis operator is the matrix `M_jm = sqrt(w_m) conj(p_jm)`, so the frame
/// operator is the Hermitian matrix `M^H M`.
pub fn frame_matrix(frame: &FrameSystem) -> DMatrix<Complex64> {
    let model = frame.model();
    let sqrt_w: Vec<f64> = model.weights().map(f64::sqrt).collect();
    let m = DMatrix::from_fn(frame.len(), model.len(), |j, k| {
        frame.representers()[j].coefficients()[k].conj() * sqrt_w[k]
    });
    m.adjoint() * m
}

/// Sorted eigenvalues of the frame operator.
pub fn frame_spectrum(frame: &FrameSystem) -> Vec<f64> {
    let mut ev: Vec<f64> = frame_matrix(frame).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn euclid_model() -> Arc<SpectralModel> {
    build_fourier_model(2.0, 32, QuadratureRule::Midpoint).unwrap()
}

/// Small hyperbolic model whose frames on the standard box are well conditioned.
pub fn hyperbolic_model() -> Arc<SpectralModel> {
    build_helgason_model(8.0, 4, 4).unwrap()
}

pub fn hyperbolic_box() -> DomainBox {
    DomainBox::half_plane((-2.0, 2.0), (0.5, 4.0))
}

pub fn dirac_frame(model: &Arc<SpectralModel>, domain: &DomainBox, rho: f64, seed: u64, order: u32, kind: MultiplierKind) -> FrameSystem {
    let lattice = build_lattice(domain, rho, 4000, seed).unwrap();
    let family = FunctionalFamily::diracs(&lattice.points, 1.0, order).unwrap();
    build_frame(&family, model, kind).unwrap()
}

pub fn euclid_frame(rho: f64, seed: u64) -> FrameSystem {
    dirac_frame(&euclid_model(), &DomainBox::interval(0.0, 8.0), rho, seed, 0, MultiplierKind::Shifted)
}

pub fn hyperbolic_frame(order: u32, kind: MultiplierKind) -> FrameSystem {
    dirac_frame(&hyperbolic_model(), &hyperbolic_box(), 0.5, 7, order, kind)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
