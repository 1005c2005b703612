//! Experiment configuration and the model -> lattice -> functionals -> frame
//! -> reconstruction pipeline behind the `pwframes` command line.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euclid1d::{build_fourier_model, QuadratureRule};
use crate::frames::{build_frame, direct_samples, reconstruct_with, FrameBounds, FrameSystem, ReconstructionReport, SolverMethod, SolverOptions};
use crate::hyperbolic::build_helgason_model;
use crate::sampling::{build_lattice, make_functional_family, DomainBox, FamilyParams, FunctionalKind, Lattice, MultiplierKind};
use crate::spectral::{random_pw, Geometry, SpectralModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_CONFIG: i32 = 1;
pub const EXIT_UNCERTIFIED: i32 = 2;

pub const SWEEP_HEADER: [&str; 9] = ["rho", "n", "multiplier", "A", "B", "contraction", "iterations", "rel_error", "certified"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Euclid1d {
        omega: f64,
        k: usize,
        #[serde(default = "default_rule")]
        rule: QuadratureRule,
    },
    Hyperbolic {
        omega: f64,
        k_t: usize,
        k_phi: usize,
    },
}

fn default_rule() -> QuadratureRule {
    QuadratureRule::Midpoint
}

impl ModelConfig {
    pub fn geometry(&self) -> Geometry {
        match self {
            ModelConfig::Euclid1d { .. } => Geometry::RealLine,
            ModelConfig::Hyperbolic { .. } => Geometry::UpperHalfPlane,
        }
    }

    pub fn build(&self) -> Result<Arc<SpectralModel>> {
        match *self {
            ModelConfig::Euclid1d { omega, k, rule } => build_fourier_model(omega, k, rule),
            ModelConfig::Hyperbolic { omega, k_t, k_phi } => build_helgason_model(omega, k_t, k_phi),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalConfig {
    pub kind: FunctionalKind,
    #[serde(default)]
    pub n: u32,
    #[serde(default = "default_multiplier")]
    pub multiplier: MultiplierKind,
    #[serde(default = "default_masses")]
    pub masses: Vec<f64>,
    #[serde(default = "default_c_phi")]
    pub c_phi: f64,
    #[serde(rename = "C_phi", default = "default_upper_c_phi")]
    pub upper_c_phi: f64,
    #[serde(default = "default_sub_count")]
    pub sub_count: usize,
    /// Defaults to `rho / 4` for spread functionals.
    #[serde(default)]
    pub sub_radius: Option<f64>,
}

fn default_multiplier() -> MultiplierKind {
    MultiplierKind::Shifted
}
fn default_masses() -> Vec<f64> {
    vec![1.0]
}
fn default_c_phi() -> f64 {
    0.5
}
fn default_upper_c_phi() -> f64 {
    2.0
}
fn default_sub_count() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub method: SolverMethod,
}

fn default_tol() -> f64 {
    crate::frames::DEFAULT_TOL
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: default_tol(),
            max_iter: None,
            method: SolverMethod::Neumann,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub rho: Option<Vec<f64>>,
    #[serde(default)]
    pub n: Option<Vec<u32>>,
    #[serde(default)]
    pub multiplier: Option<Vec<MultiplierKind>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub domain: DomainBox,
    pub rho: f64,
    #[serde(default = "default_candidates")]
    pub candidate_count: usize,
    pub functional: FunctionalConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_candidates() -> usize {
    4000
}
fn default_trials() -> usize {
    20
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("`{field}`: {reason}"))
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Reconstruction on H that certifies with the Neumann solver.
    pub fn default_hyperbolic() -> Self {
        ExperimentConfig {
            model: ModelConfig::Hyperbolic {
                omega: 8.0,
                k_t: 4,
                k_phi: 4,
            },
            domain: DomainBox::half_plane((-2.0, 2.0), (0.5, 4.0)),
            rho: 0.5,
            candidate_count: default_candidates(),
            functional: FunctionalConfig {
                kind: FunctionalKind::Dirac,
                n: 0,
                multiplier: MultiplierKind::Shifted,
                masses: default_masses(),
                c_phi: default_c_phi(),
                upper_c_phi: default_upper_c_phi(),
                sub_count: default_sub_count(),
                sub_radius: None,
            },
            solver: SolverConfig::default(),
            trials: default_trials(),
            seed: 7,
            sweep: None,
        }
    }

    /// One period of a 32-node band model sampled on `[0, 8]`.
    pub fn default_euclid1d() -> Self {
        ExperimentConfig {
            model: ModelConfig::Euclid1d {
                omega: 2.0,
                k: 32,
                rule: QuadratureRule::Midpoint,
            },
            domain: DomainBox::interval(0.0, 8.0),
            rho: 0.4,
            ..Self::default_hyperbolic()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.model {
            ModelConfig::Euclid1d { omega, k, .. } => {
                positive("model.omega", omega)?;
                if k < 2 {
                    return Err(invalid("model.k", "need at least 2 nodes"));
                }
            }
            ModelConfig::Hyperbolic { omega, k_t, k_phi } => {
                positive("model.omega", omega)?;
                if k_t < 2 || k_t % 2 == 1 {
                    return Err(invalid("model.k_t", "must be even and at least 2"));
                }
                if k_phi < 1 {
                    return Err(invalid("model.k_phi", "must be at least 1"));
                }
            }
        }
        if self.domain.geometry() != self.model.geometry() {
            return Err(invalid("domain", "does not match the model kind"));
        }
        self.domain.validate().map_err(|e| invalid("domain", e))?;
        positive("rho", self.rho)?;
        if self.candidate_count < 1 {
            return Err(invalid("candidate_count", "must be at least 1"));
        }
        let f = &self.functional;
        positive("functional.c_phi", f.c_phi)?;
        positive("functional.C_phi", f.upper_c_phi)?;
        if f.c_phi > f.upper_c_phi {
            return Err(invalid("functional.c_phi", "must not exceed C_phi"));
        }
        if f.masses.is_empty() {
            return Err(invalid("functional.masses", "must not be empty"));
        }
        for m in &f.masses {
            positive("functional.masses", *m)?;
        }
        if let Some(r) = f.sub_radius {
            positive("functional.sub_radius", r)?;
        }
        if f.kind == FunctionalKind::WeightedDiracs && f.sub_count < 1 {
            return Err(invalid("functional.sub_count", "must be at least 1"));
        }
        let pure_requested = f.multiplier == MultiplierKind::Pure
            || self
                .sweep
                .as_ref()
                .and_then(|s| s.multiplier.as_ref())
                .is_some_and(|m| m.contains(&MultiplierKind::Pure));
        if pure_requested && self.model.geometry() != Geometry::UpperHalfPlane {
            return Err(invalid("functional.multiplier", "pure requires model.kind = hyperbolic"));
        }
        positive("solver.tol", self.solver.tol)?;
        if self.solver.max_iter == Some(0) {
            return Err(invalid("solver.max_iter", "must be at least 1"));
        }
        if self.trials < 1 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if let Some(sweep) = &self.sweep {
            for r in sweep.rho.iter().flatten() {
                positive("sweep.rho", *r)?;
            }
        }
        Ok(())
    }

    fn family_params(&self, rho: f64) -> FamilyParams {
        let f = &self.functional;
        FamilyParams {
            masses: f.masses.clone(),
            sub_count: f.sub_count,
            sub_radius: f.sub_radius.unwrap_or(0.25 * rho),
            mass_lower: f.c_phi,
            mass_upper: f.upper_c_phi,
        }
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            method: self.solver.method,
        }
    }
}

pub fn make_lattice(cfg: &ExperimentConfig) -> Result<Lattice> {
    build_lattice(&cfg.domain, cfg.rho, cfg.candidate_count, cfg.seed)
}

pub fn make_frame(cfg: &ExperimentConfig, model: &Arc<SpectralModel>, lattice: &Lattice) -> Result<FrameSystem> {
    let family = make_functional_family(lattice, cfg.functional.kind, &cfg.family_params(cfg.rho), cfg.functional.n, cfg.seed)?;
    build_frame(&family, model, cfg.functional.multiplier)
}

#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub lattice: Lattice,
    pub frame: FrameSystem,
    pub report: ReconstructionReport,
    pub elapsed_ms: f64,
}

impl PipelineOutcome {
    pub fn certified(&self) -> bool {
        self.frame.is_certified()
    }
}

/// Synthesizes a random function, samples it with the configured family and
/// reconstructs it.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineOutcome> {
    let start = Instant::now();
    let model = cfg.model.build()?;
    let lattice = make_lattice(cfg)?;
    let frame = make_frame(cfg, &model, &lattice)?;
    let report = if frame.is_certified() {
        let truth = random_pw(&model, cfg.seed);
        let samples = direct_samples(&frame, &truth)?;
        let (f, mut report) = reconstruct_with(&frame, &samples, &cfg.solver_options())?;
        report.set_reference(&f, &truth)?;
        report
    } else {
        ReconstructionReport::uncertified(&frame)
    };
    Ok(PipelineOutcome {
        lattice,
        frame,
        report,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Clone, Debug, Serialize)]
struct RunMetadata<'a> {
    certified: bool,
    functionals: usize,
    nodes: usize,
    dimension: usize,
    seed: u64,
    bounds: &'a FrameBounds,
    elapsed_ms: f64,
}

pub fn cmd_lattice(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Lattice> {
    fs::create_dir_all(out_dir)?;
    let lattice = make_lattice(cfg)?;
    lattice.write_csv(fs::File::create(out_dir.join("lattice.csv"))?)?;
    fs::write(out_dir.join("certificate.json"), serde_json::to_string_pretty(&lattice.certificate)?)?;
    Ok(lattice)
}

/// Writes `report.json` (deterministic) and `run.json` (with timing).
/// Returns the outcome and the process exit code.
pub fn cmd_reconstruct(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(PipelineOutcome, i32)> {
    fs::create_dir_all(out_dir)?;
    let outcome = run_pipeline(cfg)?;
    fs::write(out_dir.join("report.json"), serde_json::to_string_pretty(&outcome.report)?)?;
    let meta = RunMetadata {
        certified: outcome.certified(),
        functionals: outcome.frame.len(),
        nodes: outcome.frame.model().len(),
        dimension: outcome.frame.model().geometry().dimension(),
        seed: cfg.seed,
        bounds: outcome.frame.bounds(),
        elapsed_ms: outcome.elapsed_ms,
    };
    fs::write(out_dir.join("run.json"), serde_json::to_string_pretty(&meta)?)?;
    let code = if outcome.certified() { EXIT_OK } else { EXIT_UNCERTIFIED };
    Ok((outcome, code))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub rho: f64,
    pub n: u32,
    pub multiplier: MultiplierKind,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub contraction: f64,
    pub iterations: usize,
    pub rel_error: Option<f64>,
    pub certified: bool,
}

/// One pipeline run per `(rho, n, multiplier)` cell, rows sorted by `(rho, n)`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let sweep = cfg.sweep.clone().unwrap_or_default();
    let rhos = sweep.rho.unwrap_or_else(|| vec![cfg.rho]);
    let orders = sweep.n.unwrap_or_else(|| vec![cfg.functional.n]);
    let multipliers = sweep.multiplier.unwrap_or_else(|| vec![cfg.functional.multiplier]);
    let mut cells = Vec::new();
    for &rho in &rhos {
        for &n in &orders {
            for &multiplier in &multipliers {
                let mut cell = cfg.clone();
                cell.rho = rho;
                cell.functional.n = n;
                cell.functional.multiplier = multiplier;
                cell.sweep = None;
                cells.push(cell);
            }
        }
    }
    let mut rows = cells
        .par_iter()
        .map(|cell| {
            let out = run_pipeline(cell)?;
            Ok(SweepRow {
                rho: cell.rho,
                n: cell.functional.n,
                multiplier: cell.functional.multiplier,
                a: out.report.a,
                b: out.report.b,
                contraction: out.report.contraction,
                iterations: out.report.iterations,
                rel_error: out.report.rel_error,
                certified: out.certified(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|x, y| {
        x.rho
            .total_cmp(&y.rho)
            .then(x.n.cmp(&y.n))
            .then(x.multiplier.name().cmp(y.multiplier.name()))
    });
    Ok(rows)
}

pub fn cmd_sweep(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<SweepRow>> {
    fs::create_dir_all(out_dir)?;
    let rows = run_sweep(cfg)?;
    let mut w = csv::Writer::from_path(out_dir.join("sweep.csv"))?;
    w.write_record(SWEEP_HEADER)?;
    for r in &rows {
        w.write_record([
            r.rho.to_string(),
            r.n.to_string(),
            r.multiplier.name().to_string(),
            r.a.to_string(),
            r.b.to_string(),
            r.contraction.to_string(),
            r.iterations.to_string(),
            r.rel_error.map(|e| e.to_string()).unwrap_or_default(),
            r.certified.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(rows)
}
