//! Fixed-point schemes for the periodic conductivity problem.
//!
//! Both iterations are written once against the [`Space`] abstraction and run
//! either in the original field space (constitutive law `sigma(x)`) or in the
//! augmented space of triples (constitutive law `A = (t - 1) chi'' + I`):
//!
//! * basic (Moulinec–Suquet): `e <- e0 + Gamma1[(I - L/sigma0) e]`;
//! * Eyre–Milton: `w <- 2 sigma0 e0 - (2 Gamma1 - I)[R w]` with
//!   `R = (L - sigma0)(L + sigma0)^{-1}` and `e = (L + sigma0)^{-1} w`.
//!
//! Every iteration records the current `sigma_*` estimate and the equilibrium
//! residual `|Gamma1 j| / |Gamma0 j|` of the flux `j = L e`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PhaseMap;
use crate::spectral_ops::{
    apply_local_a, gamma1_aug, invert_shifted_a, AugmentedField, Discretization, FourierProjector,
    GradientProjection, Vector, VectorField,
};
use crate::transform::{map_t, principal_sqrt, solve_p, SchemeKind, SpectralInterval, SubstitutionParams};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 1000;
/// A run is declared divergent once its residual exceeds this multiple of the
/// first recorded residual.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: SchemeKind,
    pub sigma1: Complex64,
    pub interval: Option<SpectralInterval>,
    /// Applied (average) field.
    pub e0: Vector,
    pub tol: f64,
    pub max_iters: usize,
    pub sigma0_override: Option<Complex64>,
    pub discretization: Discretization,
}

impl SolverConfig {
    pub fn new(scheme: SchemeKind, sigma1: Complex64) -> Self {
        Self {
            scheme,
            sigma1,
            interval: None,
            e0: [ONE, ZERO],
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            sigma0_override: None,
            discretization: Discretization::default(),
        }
    }

    pub fn with_discretization(mut self, disc: Discretization) -> Self {
        self.discretization = disc;
        self
    }

    pub fn with_interval(mut self, interval: SpectralInterval) -> Self {
        self.interval = Some(interval);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_e0(mut self, e0: Vector) -> Self {
        self.e0 = e0;
        self
    }

    pub fn with_sigma0(mut self, sigma0: Complex64) -> Self {
        self.sigma0_override = Some(sigma0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Parameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be positive".into()));
        }
        if field_norm2(&self.e0) == 0.0 {
            return Err(Error::Contract("applied field e0 is zero".into()));
        }
        if self.scheme.is_substituted() && self.interval.is_none() {
            return Err(Error::Contract(format!(
                "scheme {} requires a spectral interval",
                self.scheme
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub sigma_star: Complex64,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceHistory {
    pub records: Vec<IterationRecord>,
}

impl ConvergenceHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.residual)
    }

    /// First iteration whose residual is at or below `threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.records.iter().find(|r| r.residual <= threshold).map(|r| r.iter)
    }

    /// Build a history from bare residuals, numbering from 1.
    pub fn from_residuals(residuals: impl IntoIterator<Item = f64>) -> Self {
        Self {
            records: residuals
                .into_iter()
                .enumerate()
                .map(|(k, residual)| IterationRecord { iter: k + 1, sigma_star: ZERO, residual })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub scheme: SchemeKind,
    pub sigma_star: Complex64,
    pub e_field: VectorField,
    pub j_field: VectorField,
    pub history: ConvergenceHistory,
    pub status: Status,
    pub sigma0: Complex64,
    /// Substituted conductivity, for the augmented-space schemes.
    pub t: Option<Complex64>,
    /// Final augmented iterate, for the augmented-space schemes.
    pub augmented: Option<AugmentedField>,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.residual)
    }
}

fn field_norm2(v: &Vector) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// Projection of an average flux onto the applied direction.
fn along_applied(mean: &Vector, e0: &Vector) -> Result<Complex64> {
    let n2 = field_norm2(e0);
    if n2 == 0.0 {
        return Err(Error::Contract("applied field is zero".into()));
    }
    let dot: Complex64 = mean.iter().zip(e0).map(|(m, e)| m * e.conj()).sum();
    Ok(dot / n2)
}

/// Field space an iteration runs in.
trait Space {
    type Field: Clone;

    fn applied(&self) -> Self::Field;
    fn flux(&self, e: &Self::Field) -> Self::Field;
    fn shifted_inverse(&self, w: &Self::Field, sigma0: Complex64) -> Result<Self::Field>;
    fn gamma1(&self, f: &Self::Field) -> Result<Self::Field>;
    /// The constant part `Gamma0 f` (first component in the augmented space).
    fn mean(&self, f: &Self::Field) -> Vector;
    fn norm(&self, f: &Self::Field) -> f64;
    fn axpy(&self, f: &mut Self::Field, c: Complex64, g: &Self::Field);
    fn scale(&self, f: &mut Self::Field, c: Complex64);
}

struct OriginalSpace<'a> {
    map: &'a PhaseMap,
    sigma1: Complex64,
    e0: Vector,
    projector: FourierProjector,
}

impl Space for OriginalSpace<'_> {
    type Field = VectorField;

    fn applied(&self) -> VectorField {
        VectorField::constant(self.map.nx(), self.map.ny(), self.e0)
    }

    fn flux(&self, e: &VectorField) -> VectorField {
        let mut j = e.clone();
        j.scale_by_phase(self.map, self.sigma1, ONE);
        j
    }

    fn shifted_inverse(&self, w: &VectorField, sigma0: Complex64) -> Result<VectorField> {
        let (d1, d2) = (self.sigma1 + sigma0, ONE + sigma0);
        if d1 == ZERO || d2 == ZERO {
            return Err(Error::SingularShift(format!(
                "sigma(x) + sigma0 vanishes for sigma0 = {sigma0}"
            )));
        }
        let mut e = w.clone();
        e.scale_by_phase(self.map, 1.0 / d1, 1.0 / d2);
        Ok(e)
    }

    fn gamma1(&self, f: &VectorField) -> Result<VectorField> {
        Ok(self.projector.gamma1(f))
    }

    fn mean(&self, f: &VectorField) -> Vector {
        f.mean()
    }

    fn norm(&self, f: &VectorField) -> f64 {
        f.norm()
    }

    fn axpy(&self, f: &mut VectorField, c: Complex64, g: &VectorField) {
        f.add_scaled(c, g);
    }

    fn scale(&self, f: &mut VectorField, c: Complex64) {
        f.scale(c);
    }
}

struct AugmentedSpace<'a> {
    map: &'a PhaseMap,
    t: Complex64,
    params: SubstitutionParams,
    e0: Vector,
    projector: FourierProjector,
}

impl Space for AugmentedSpace<'_> {
    type Field = AugmentedField;

    fn applied(&self) -> AugmentedField {
        AugmentedField::applied(self.map.nx(), self.map.ny(), self.e0)
    }

    fn flux(&self, e: &AugmentedField) -> AugmentedField {
        apply_local_a(e, self.t, &self.params, self.map)
    }

    fn shifted_inverse(&self, w: &AugmentedField, sigma0: Complex64) -> Result<AugmentedField> {
        invert_shifted_a(w, self.t, sigma0, &self.params, self.map)
    }

    fn gamma1(&self, f: &AugmentedField) -> Result<AugmentedField> {
        gamma1_aug(&self.projector, f, self.map)
    }

    fn mean(&self, f: &AugmentedField) -> Vector {
        f.q.mean()
    }

    fn norm(&self, f: &AugmentedField) -> f64 {
        f.norm(self.map)
    }

    fn axpy(&self, f: &mut AugmentedField, c: Complex64, g: &AugmentedField) {
        f.add_scaled(c, g);
        f.enforce_support(self.map);
    }

    fn scale(&self, f: &mut AugmentedField, c: Complex64) {
        f.scale(c);
    }
}

/// Equilibrium residual `|Gamma1 j| / |Gamma0 j|` given `Gamma1 j` and `<j>`.
fn residual_from_parts(gamma1_norm: f64, mean_flux: &Vector) -> Result<f64> {
    let m = field_norm2(mean_flux).sqrt();
    if m == 0.0 || !m.is_finite() {
        return Err(Error::DegenerateFlux);
    }
    Ok(gamma1_norm / m)
}

struct Monitor {
    tol: f64,
    e0: Vector,
    history: ConvergenceHistory,
    first_residual: Option<f64>,
}

enum Verdict {
    Continue,
    Stop(Status),
}

impl Monitor {
    fn new(cfg: &SolverConfig) -> Self {
        Self {
            tol: cfg.tol,
            e0: cfg.e0,
            history: ConvergenceHistory::default(),
            first_residual: None,
        }
    }

    fn record(&mut self, gamma1_norm: f64, mean_flux: &Vector) -> Result<Verdict> {
        let residual = residual_from_parts(gamma1_norm, mean_flux)?;
        let sigma_star = along_applied(mean_flux, &self.e0)?;
        let iter = self.history.len() + 1;
        let previous = self.history.last().map(|r| r.sigma_star);
        self.history.records.push(IterationRecord { iter, sigma_star, residual });
        let first = *self.first_residual.get_or_insert(residual);

        if !residual.is_finite() || (first > 0.0 && residual > DIVERGENCE_FACTOR * first) {
            return Ok(Verdict::Stop(Status::Diverged));
        }
        let settled = previous.is_none_or(|p| (sigma_star - p).norm() <= self.tol * sigma_star.norm());
        if residual <= self.tol && settled {
            return Ok(Verdict::Stop(Status::Converged));
        }
        Ok(Verdict::Continue)
    }
}

struct RawOutcome<F> {
    field: F,
    flux: F,
    status: Status,
    history: ConvergenceHistory,
}

fn run_basic<S: Space>(space: &S, sigma0: Complex64, cfg: &SolverConfig) -> Result<RawOutcome<S::Field>> {
    if sigma0 == ZERO {
        return Err(Error::SingularShift("reference conductivity sigma0 is zero".into()));
    }
    let mut monitor = Monitor::new(cfg);
    let mut e = space.applied();
    let inv = 1.0 / sigma0;
    loop {
        let j = space.flux(&e);
        let g = space.gamma1(&j)?;
        let verdict = monitor.record(space.norm(&g), &space.mean(&j))?;
        let status = match verdict {
            Verdict::Stop(s) => Some(s),
            Verdict::Continue if monitor.history.len() >= cfg.max_iters => Some(Status::MaxIters),
            Verdict::Continue => None,
        };
        if let Some(status) = status {
            return Ok(RawOutcome { field: e, flux: j, status, history: monitor.history });
        }
        // e stays in U + E, so e0 + Gamma1[(I - L/sigma0) e] = e - Gamma1[j]/sigma0
        space.axpy(&mut e, -inv, &g);
    }
}

fn run_eyre_milton<S: Space>(space: &S, sigma0: Complex64, cfg: &SolverConfig) -> Result<RawOutcome<S::Field>> {
    let mut monitor = Monitor::new(cfg);
    let applied = space.applied();
    let mut w = space.flux(&applied);
    space.axpy(&mut w, sigma0, &applied);
    loop {
        let e = space.shifted_inverse(&w, sigma0)?;
        let mut j = w.clone();
        space.axpy(&mut j, -sigma0, &e);
        let g = space.gamma1(&j)?;
        let verdict = monitor.record(space.norm(&g), &space.mean(&j))?;
        let status = match verdict {
            Verdict::Stop(s) => Some(s),
            Verdict::Continue if monitor.history.len() >= cfg.max_iters => Some(Status::MaxIters),
            Verdict::Continue => None,
        };
        if let Some(status) = status {
            return Ok(RawOutcome { field: e, flux: j, status, history: monitor.history });
        }
        // R w = (L - sigma0) e = j - sigma0 e
        let mut rw = j;
        space.axpy(&mut rw, -sigma0, &e);
        let grw = space.gamma1(&rw)?;
        // w <- 2 sigma0 e0 - 2 Gamma1[R w] + R w
        let mut next = applied.clone();
        space.scale(&mut next, 2.0 * sigma0);
        space.axpy(&mut next, Complex64::new(-2.0, 0.0), &grw);
        space.axpy(&mut next, ONE, &rw);
        w = next;
    }
}

fn expect_scheme(cfg: &SolverConfig, scheme: SchemeKind) -> Result<()> {
    if cfg.scheme != scheme {
        return Err(Error::Contract(format!(
            "configuration is for scheme {}, solver is {scheme}",
            cfg.scheme
        )));
    }
    cfg.validate()
}

fn original_space<'a>(map: &'a PhaseMap, cfg: &SolverConfig) -> OriginalSpace<'a> {
    OriginalSpace {
        map,
        sigma1: cfg.sigma1,
        e0: cfg.e0,
        projector: FourierProjector::for_map_with(map, cfg.discretization),
    }
}

fn finish_original(cfg: &SolverConfig, sigma0: Complex64, raw: RawOutcome<VectorField>) -> SolveResult {
    let sigma_star = raw.history.last().map_or(ZERO, |r| r.sigma_star);
    SolveResult {
        scheme: cfg.scheme,
        sigma_star,
        e_field: raw.field,
        j_field: raw.flux,
        history: raw.history,
        status: raw.status,
        sigma0,
        t: None,
        augmented: None,
    }
}

/// Moulinec–Suquet iteration with `sigma0 = (sigma1 + 1)/2` unless overridden.
pub fn solve_basic(map: &PhaseMap, cfg: &SolverConfig) -> Result<SolveResult> {
    expect_scheme(cfg, SchemeKind::Basic)?;
    let sigma0 = cfg.sigma0_override.unwrap_or((cfg.sigma1 + 1.0) / 2.0);
    let space = original_space(map, cfg);
    let raw = run_basic(&space, sigma0, cfg)?;
    Ok(finish_original(cfg, sigma0, raw))
}

/// Eyre–Milton iteration with `sigma0 = sqrt(sigma1)` unless overridden.
pub fn solve_em(map: &PhaseMap, cfg: &SolverConfig) -> Result<SolveResult> {
    expect_scheme(cfg, SchemeKind::EyreMilton)?;
    let sigma0 = match cfg.sigma0_override {
        Some(s) => s,
        None => principal_sqrt(cfg.sigma1)?,
    };
    let space = original_space(map, cfg);
    let raw = run_eyre_milton(&space, sigma0, cfg)?;
    Ok(finish_original(cfg, sigma0, raw))
}

fn augmented_space<'a>(map: &'a PhaseMap, cfg: &SolverConfig) -> Result<AugmentedSpace<'a>> {
    let interval = cfg
        .interval
        .ok_or_else(|| Error::Contract("substituted scheme without interval".into()))?;
    let params = solve_p(&interval);
    let t = map_t(cfg.sigma1, &interval)?;
    Ok(AugmentedSpace {
        map,
        t,
        params,
        e0: cfg.e0,
        projector: FourierProjector::for_map_with(map, cfg.discretization),
    })
}

fn finish_augmented(
    cfg: &SolverConfig,
    space: &AugmentedSpace<'_>,
    sigma0: Complex64,
    raw: RawOutcome<AugmentedField>,
) -> SolveResult {
    let sigma_star = raw.history.last().map_or(ZERO, |r| r.sigma_star);
    let (e_field, j_field) = (raw.field.q.clone(), raw.flux.q);
    SolveResult {
        scheme: cfg.scheme,
        sigma_star,
        e_field,
        j_field,
        history: raw.history,
        status: raw.status,
        sigma0,
        t: Some(space.t),
        augmented: Some(raw.field),
    }
}

/// Moulinec–Suquet iteration in the augmented space, `sigma0 = (t + 1)/2`.
pub fn solve_basic_sub(map: &PhaseMap, cfg: &SolverConfig) -> Result<SolveResult> {
    expect_scheme(cfg, SchemeKind::BasicSub)?;
    let space = augmented_space(map, cfg)?;
    let sigma0 = cfg.sigma0_override.unwrap_or((space.t + 1.0) / 2.0);
    let raw = run_basic(&space, sigma0, cfg)?;
    Ok(finish_augmented(cfg, &space, sigma0, raw))
}

/// Eyre–Milton iteration in the augmented space, `sigma0 = sqrt(t)`.
pub fn solve_em_sub(map: &PhaseMap, cfg: &SolverConfig) -> Result<SolveResult> {
    expect_scheme(cfg, SchemeKind::EyreMiltonSub)?;
    let space = augmented_space(map, cfg)?;
    let sigma0 = match cfg.sigma0_override {
        Some(s) => s,
        None => principal_sqrt(space.t)?,
    };
    let raw = run_eyre_milton(&space, sigma0, cfg)?;
    Ok(finish_augmented(cfg, &space, sigma0, raw))
}

/// Dispatch on `cfg.scheme`.
pub fn solve(map: &PhaseMap, cfg: &SolverConfig) -> Result<SolveResult> {
    match cfg.scheme {
        SchemeKind::Basic => solve_basic(map, cfg),
        SchemeKind::EyreMilton => solve_em(map, cfg),
        SchemeKind::BasicSub => solve_basic_sub(map, cfg),
        SchemeKind::EyreMiltonSub => solve_em_sub(map, cfg),
    }
}

/// `sigma_* = <sigma(x) e> . conj(<e>) / |<e>|^2`.
pub fn extract_sigma_star(e: &VectorField, map: &PhaseMap, sigma1: Complex64) -> Result<Complex64> {
    if !e.matches(map) {
        return Err(Error::Mismatch("field and phase map differ in size".into()));
    }
    let mut j = e.clone();
    j.scale_by_phase(map, sigma1, ONE);
    along_applied(&j.mean(), &e.mean())
}

/// `sigma_*` from an augmented field: the average of the first component of
/// `A F` along `<Q>`.
pub fn extract_sigma_star_aug(
    f: &AugmentedField,
    t: Complex64,
    params: &SubstitutionParams,
    map: &PhaseMap,
) -> Result<Complex64> {
    f.check_support(map)?;
    let j = apply_local_a(f, t, params, map);
    along_applied(&j.q.mean(), &f.q.mean())
}

/// Physical fields from an augmented solution: `E = Q` and `J` the first
/// component of `A F`.
pub fn recover_physical_fields(
    f: &AugmentedField,
    t: Complex64,
    params: &SubstitutionParams,
    map: &PhaseMap,
) -> Result<(VectorField, VectorField)> {
    f.check_support(map)?;
    let j = apply_local_a(f, t, params, map);
    Ok((f.q.clone(), j.q))
}

/// Augmented pair `(E'', J'')` built from a solution `(E, J)` of the original
/// problem at `sigma1 = t^{-1}`:
/// `E'' = (E, E2' chi E, 0)`, `J'' = (J, 0, J3' chi E)`.
pub fn lift_solution(
    e: &VectorField,
    j: &VectorField,
    t: Complex64,
    params: &SubstitutionParams,
    map: &PhaseMap,
) -> Result<(AugmentedField, AugmentedField)> {
    let (e2, j3) = crate::transform::aux_constants(t, params)?;
    let mut s = e.scaled(e2);
    s.mask_phase1(map);
    let mut tt = e.scaled(j3);
    tt.mask_phase1(map);
    let lifted_e = AugmentedField {
        q: e.clone(),
        s,
        t: VectorField::zeros(e.nx(), e.ny()),
    };
    let lifted_j = AugmentedField {
        q: j.clone(),
        s: VectorField::zeros(e.nx(), e.ny()),
        t: tt,
    };
    Ok((lifted_e, lifted_j))
}

/// Equilibrium residual of a flux in the original space.
pub fn residual(projector: &dyn GradientProjection, j: &VectorField) -> Result<f64> {
    residual_from_parts(projector.gamma1(j).norm(), &j.mean())
}

/// Equilibrium residual of an augmented flux.
pub fn residual_aug(
    projector: &dyn GradientProjection,
    j: &AugmentedField,
    map: &PhaseMap,
) -> Result<f64> {
    let g = gamma1_aug(projector, j, map)?;
    residual_from_parts(g.norm(map), &j.q.mean())
}

/// Geometric-mean ratio of successive residuals over the final `window`
/// iterations.
pub fn estimate_rate(history: &ConvergenceHistory, window: usize) -> Result<f64> {
    if window == 0 || history.len() < window + 1 {
        return Err(Error::Contract(format!(
            "rate window {window} needs {} residuals, history has {}",
            window + 1,
            history.len()
        )));
    }
    let tail = &history.records[history.len() - window - 1..];
    if tail.iter().any(|r| !(r.residual > 0.0)) {
        return Err(Error::Contract("rate estimate needs positive residuals".into()));
    }
    let first = tail[0].residual;
    let last = tail[window].residual;
    Ok((last / first).powf(1.0 / window as f64))
}
