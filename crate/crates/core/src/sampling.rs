//! rho-lattices, sampling functionals and their Riesz representers.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{geodesic_polar_point, UpperHalfPoint};
use crate::spectral::{Geometry, PWFunction, Point, SpectralModel};

/// Region the lattice is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum DomainBox {
    Interval { interval: [f64; 2] },
    HalfPlane { x: [f64; 2], y: [f64; 2] },
}

impl DomainBox {
    pub fn interval(lo: f64, hi: f64) -> Self {
        DomainBox::Interval { interval: [lo, hi] }
    }

    pub fn half_plane(x: (f64, f64), y: (f64, f64)) -> Self {
        DomainBox::HalfPlane {
            x: [x.0, x.1],
            y: [y.0, y.1],
        }
    }

    pub fn geometry(&self) -> Geometry {
        match self {
            DomainBox::Interval { .. } => Geometry::RealLine,
            DomainBox::HalfPlane { .. } => Geometry::UpperHalfPlane,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
        match *self {
            DomainBox::Interval { interval } => {
                if !ordered(interval) {
                    return Err(Error::param("domain", "interval must be finite with lo <= hi"));
                }
            }
            DomainBox::HalfPlane { x, y } => {
                if !ordered(x) || !ordered(y) {
                    return Err(Error::param("domain", "box ranges must be finite with lo <= hi"));
                }
                if y[0] <= 0.0 {
                    return Err(Error::Domain(format!("box reaches y = {} <= 0", y[0])));
                }
            }
        }
        Ok(())
    }

    /// Uniform in the Riemannian measure (`dx`, resp. `y^-2 dx dy`).
    fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        match *self {
            DomainBox::Interval { interval: [lo, hi] } => Point::Line(lo + (hi - lo) * rng.random::<f64>()),
            DomainBox::HalfPlane { x, y } => {
                let px = x[0] + (x[1] - x[0]) * rng.random::<f64>();
                let (a, b) = (1.0 / y[0], 1.0 / y[1]);
                let py = 1.0 / (a - (a - b) * rng.random::<f64>());
                Point::Half(UpperHalfPoint::new(px, py.clamp(y[0], y[1])).expect("box lies in H"))
            }
        }
    }

    /// Deterministic grid whose points are pairwise at least `spacing` apart.
    fn seed_grid(&self, spacing: f64) -> Vec<Point> {
        fn ticks(lo: f64, hi: f64, step: f64) -> Vec<f64> {
            let width = hi - lo;
            let n = (width / step).floor();
            if !(n >= 1.0) {
                return vec![0.5 * (lo + hi)];
            }
            let n = n as usize;
            // clamp: lo + width * n / n can round one ulp past hi
            (0..=n).map(|k| (lo + width * k as f64 / n as f64).min(hi)).collect()
        }
        match *self {
            DomainBox::Interval { interval: [lo, hi] } => {
                ticks(lo, hi, spacing).into_iter().map(Point::Line).collect()
            }
            DomainBox::HalfPlane { x, y } => {
                let mut out = Vec::new();
                for log_y in ticks(y[0].ln(), y[1].ln(), spacing) {
                    let height = log_y.exp().clamp(y[0], y[1]);
                    let dx = 2.0 * height * (0.5 * spacing).sinh();
                    for px in ticks(x[0], x[1], dx) {
                        out.push(Point::Half(UpperHalfPoint::new(px, height).expect("box lies in H")));
                    }
                }
                out
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub min_pairwise_distance: f64,
    pub covering_radius: f64,
    pub multiplicity_bound: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lattice {
    pub points: Vec<Point>,
    pub rho: f64,
    pub certificate: Certificate,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn geometry(&self) -> Option<Geometry> {
        self.points.first().map(Point::geometry)
    }

    /// CSV with header `index,coord1,coord2`; `coord2` is empty on the line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "coord1", "coord2"])?;
        for (i, p) in self.points.iter().enumerate() {
            let (a, b) = p.coords();
            w.write_record([i.to_string(), a.to_string(), b.map(|v| v.to_string()).unwrap_or_default()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Greedy maximal packing: grid seeds first, then `candidate_count` random
/// candidates, each accepted iff it is at distance `>= rho/2` from all accepted
/// points. The covering radius over the candidate pool is therefore `< rho/2`.
pub fn build_lattice(domain: &DomainBox, rho: f64, candidate_count: usize, seed: u64) -> Result<Lattice> {
    domain.validate()?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::param("rho", "must be positive and finite"));
    }
    if candidate_count < 1 {
        return Err(Error::param("candidate_count", "need at least one candidate"));
    }
    let separation = 0.5 * rho;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut seeds = domain.seed_grid(separation * (1.0 + 1e-9));
    seeds.shuffle(&mut rng);
    let mut candidates: Vec<Point> = (0..candidate_count).map(|_| domain.sample(&mut rng)).collect();
    candidates.shuffle(&mut rng);

    let mut accepted: Vec<Point> = Vec::new();
    for c in seeds.iter().chain(&candidates) {
        let far = accepted
            .iter()
            .all(|p| p.distance(c).map(|d| d >= separation).unwrap_or(false));
        if far {
            accepted.push(*c);
        }
    }
    let probes: Vec<Point> = seeds.into_iter().chain(candidates).collect();
    let certificate = certify(&accepted, rho, &probes)?;
    Ok(Lattice {
        points: accepted,
        rho,
        certificate,
    })
}

fn certify(points: &[Point], rho: f64, probes: &[Point]) -> Result<Certificate> {
    if points.is_empty() {
        return Err(Error::EmptyLattice);
    }
    let mut min_pair = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            min_pair = min_pair.min(a.distance(b)?);
        }
    }
    let mut covering: f64 = 0.0;
    let mut multiplicity = 0usize;
    for probe in probes {
        let mut nearest = f64::INFINITY;
        let mut count = 0usize;
        for p in points {
            let d = probe.distance(p)?;
            nearest = nearest.min(d);
            if d < rho {
                count += 1;
            }
        }
        covering = covering.max(nearest);
        multiplicity = multiplicity.max(count);
    }
    Ok(Certificate {
        min_pairwise_distance: min_pair,
        covering_radius: covering,
        multiplicity_bound: multiplicity,
    })
}

/// Recomputes the packing/covering certificate of `lattice` over `probes`.
pub fn verify_lattice(lattice: &Lattice, probes: &[Point]) -> Result<Certificate> {
    certify(&lattice.points, lattice.rho, probes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    Dirac,
    WeightedDiracs,
    BallAverage,
}

/// Which operator the functionals are composed with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiplierKind {
    /// `(1 + Delta)^n`
    Shifted,
    /// `Delta^n`
    Pure,
}

impl MultiplierKind {
    pub fn name(self) -> &'static str {
        match self {
            MultiplierKind::Shifted => "shifted",
            MultiplierKind::Pure => "pure",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivative {
    pub order: u32,
    pub kind: MultiplierKind,
}

impl Derivative {
    pub fn shifted(order: u32) -> Self {
        Derivative {
            order,
            kind: MultiplierKind::Shifted,
        }
    }

    pub fn pure(order: u32) -> Self {
        Derivative {
            order,
            kind: MultiplierKind::Pure,
        }
    }

    pub fn factor(&self, lambda: f64) -> f64 {
        let n = self.order as i32;
        match self.kind {
            MultiplierKind::Shifted => (1.0 + lambda).powi(n),
            MultiplierKind::Pure => lambda.powi(n),
        }
    }
}

/// A positive measure with finite support near `center`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingFunctional {
    pub center: Point,
    pub kind: FunctionalKind,
    pub support: Vec<Point>,
    pub masses: Vec<f64>,
    pub radius: f64,
}

impl SamplingFunctional {
    pub fn dirac(center: Point, mass: f64) -> Self {
        SamplingFunctional {
            center,
            kind: FunctionalKind::Dirac,
            support: vec![center],
            masses: vec![mass],
            radius: 0.0,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `Phi(f) = sum_k mu_k f(p_k)`.
    pub fn apply(&self, f: &PWFunction) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, mu) in self.support.iter().zip(&self.masses) {
            acc += f.evaluate(p)? * *mu;
        }
        Ok(acc)
    }

    /// `Phi(e_m)` for every node `m` of `model`.
    pub fn kernel_transform(&self, model: &SpectralModel) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); model.len()];
        for (p, mu) in self.support.iter().zip(&self.masses) {
            for (o, e) in out.iter_mut().zip(model.kernel_row(p)?) {
                *o += e * *mu;
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    /// Dirac / ball average: one total mass. Weighted Diracs: one mass per
    /// support point, or a single total split evenly over `sub_count` points.
    pub masses: Vec<f64>,
    pub sub_count: usize,
    pub sub_radius: f64,
    pub mass_lower: f64,
    pub mass_upper: f64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            masses: vec![1.0],
            sub_count: 2,
            sub_radius: 0.0,
            mass_lower: 0.5,
            mass_upper: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalFamily {
    pub functionals: Vec<SamplingFunctional>,
    pub order: u32,
    pub mass_lower: f64,
    pub mass_upper: f64,
}

impl FunctionalFamily {
    /// Unit-free Dirac family at arbitrary points, e.g. jittered sample sets.
    pub fn diracs(points: &[Point], mass: f64, order: u32) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::param("masses", "must be positive"));
        }
        Ok(FunctionalFamily {
            functionals: points.iter().map(|p| SamplingFunctional::dirac(*p, mass)).collect(),
            order,
            mass_lower: mass,
            mass_upper: mass,
        })
    }

    pub fn len(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functionals.is_empty()
    }
}

const BALL_RINGS: usize = 4;
const BALL_ANGLES: usize = 8;
const BALL_SEGMENTS_1D: usize = 8;

fn ball_rule(center: &Point, radius: f64) -> (Vec<Point>, Vec<f64>) {
    match center {
        Point::Line(x) => {
            let h = 2.0 * radius / BALL_SEGMENTS_1D as f64;
            let pts = (0..BALL_SEGMENTS_1D)
                .map(|i| Point::Line(x - radius + (i as f64 + 0.5) * h))
                .collect();
            (pts, vec![h; BALL_SEGMENTS_1D])
        }
        Point::Half(z) => {
            let dr = radius / BALL_RINGS as f64;
            let dtheta = 2.0 * std::f64::consts::PI / BALL_ANGLES as f64;
            let mut pts = Vec::with_capacity(BALL_RINGS * BALL_ANGLES);
            let mut w = Vec::with_capacity(BALL_RINGS * BALL_ANGLES);
            for i in 0..BALL_RINGS {
                let r = (i as f64 + 0.5) * dr;
                for j in 0..BALL_ANGLES {
                    let theta = (j as f64 + 0.5 * (i % 2) as f64) * dtheta;
                    pts.push(Point::Half(geodesic_polar_point(z, r, theta)));
                    // area element of H in geodesic polar coordinates
                    w.push(r.sinh() * dr * dtheta);
                }
            }
            (pts, w)
        }
    }
}

fn random_in_ball<R: Rng>(center: &Point, radius: f64, rng: &mut R) -> Point {
    match center {
        Point::Line(x) => Point::Line(x + radius * rng.random_range(-1.0..=1.0)),
        Point::Half(z) => {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            Point::Half(geodesic_polar_point(z, r, theta))
        }
    }
}

/// One functional per lattice point.
pub fn make_functional_family(
    lattice: &Lattice,
    kind: FunctionalKind,
    params: &FamilyParams,
    order: u32,
    seed: u64,
) -> Result<FunctionalFamily> {
    if lattice.is_empty() {
        return Err(Error::EmptyLattice);
    }
    let (lower, upper) = (params.mass_lower, params.mass_upper);
    if !(lower > 0.0 && lower <= upper && upper.is_finite()) {
        return Err(Error::param("c_phi", "mass bounds must satisfy 0 < c_phi <= C_phi"));
    }
    if params.masses.is_empty() || params.masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(Error::param("masses", "masses must be a nonempty list of positive reals"));
    }
    if kind != FunctionalKind::Dirac {
        if !(params.sub_radius > 0.0) {
            return Err(Error::param("sub_radius", "must be positive for spread functionals"));
        }
        if params.sub_radius > 0.5 * lattice.rho * (1.0 + 1e-12) {
            return Err(Error::param("sub_radius", "must not exceed rho/2"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut functionals = Vec::with_capacity(lattice.len());
    for (j, center) in lattice.points.iter().enumerate() {
        let functional = match kind {
            FunctionalKind::Dirac => SamplingFunctional::dirac(*center, params.masses[0]),
            FunctionalKind::WeightedDiracs => {
                let masses = if params.masses.len() == 1 {
                    let count = params.sub_count.max(1);
                    vec![params.masses[0] / count as f64; count]
                } else {
                    params.masses.clone()
                };
                let support = masses
                    .iter()
                    .map(|_| random_in_ball(center, params.sub_radius, &mut rng))
                    .collect();
                SamplingFunctional {
                    center: *center,
                    kind,
                    support,
                    masses,
                    radius: params.sub_radius,
                }
            }
            FunctionalKind::BallAverage => {
                let (support, raw) = ball_rule(center, params.sub_radius);
                let total: f64 = raw.iter().sum();
                let masses = raw.iter().map(|w| params.masses[0] * w / total).collect();
                SamplingFunctional {
                    center: *center,
                    kind,
                    support,
                    masses,
                    radius: params.sub_radius,
                }
            }
        };
        let mass = functional.total_mass();
        if mass < lower * (1.0 - 1e-12) || mass > upper * (1.0 + 1e-12) {
            return Err(Error::MassBound {
                functional: j,
                mass,
                lower,
                upper,
            });
        }
        functionals.push(functional);
    }
    Ok(FunctionalFamily {
        functionals,
        order,
        mass_lower: lower,
        mass_upper: upper,
    })
}

/// `Phi((1 + Delta)^n f)`.
pub fn apply_functional(functional: &SamplingFunctional, f: &PWFunction, order: u32) -> Result<Complex64> {
    apply_functional_with(functional, f, Derivative::shifted(order))
}

pub fn apply_functional_with(functional: &SamplingFunctional, f: &PWFunction, derivative: Derivative) -> Result<Complex64> {
    let g = f.apply_multiplier(|l| derivative.factor(l))?;
    functional.apply(&g)
}

/// The element `phi` of the model with `<f, phi> = Phi(D f)` for all `f`:
/// coefficient `m` is `conj(D(lambda_m) Phi(e_m))`.
pub fn representer(functional: &SamplingFunctional, derivative: Derivative, model: &Arc<SpectralModel>) -> Result<PWFunction> {
    let transform = functional.kernel_transform(model)?;
    let coeffs = transform
        .into_iter()
        .zip(model.nodes())
        .map(|(v, node)| (v * derivative.factor(node.eigenvalue)).conj())
        .collect();
    PWFunction::new(Arc::clone(model), coeffs)
}
