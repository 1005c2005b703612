//! Paley-Wiener frames on the real line and the hyperbolic plane.
//!
//! Bandlimited functions are represented spectrally on a finite quadrature of
//! the band. Irregular samples taken through compactly supported functionals
//! define a frame of Riesz representers; the frame operator is inverted by its
//! Neumann series and the function is recovered through the dual frame.
//!
//! Module map:
//! - [`spectral`]: nodes, Plancherel inner product, synthesis, multipliers.
//! - [`euclid1d`]: Fourier band model, Shannon series, Parseval check.
//! - [`hyperbolic`]: upper half-plane geometry and the Helgason spectrum.
//! - [`sampling`]: rho-lattices, sampling functionals, representers.
//! - [`frames`]: frame operator, bounds, Neumann inversion, duals.
//! - [`harness`]: experiment configs and the pipeline behind the CLI.

pub mod error;
pub mod euclid1d;
pub mod frames;
pub mod harness;
pub mod hyperbolic;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
pub use frames::{FrameBounds, FrameSystem, ReconstructionReport, SolverMethod, SolverOptions};
pub use sampling::{Derivative, DomainBox, FunctionalKind, Lattice, MultiplierKind, SamplingFunctional};
pub use spectral::{Geometry, PWFunction, Point, SpectralModel};

pub use num_complex::Complex64;
