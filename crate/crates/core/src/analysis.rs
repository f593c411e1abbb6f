//! Exact references and convergence-rate prediction.
//!
//! The predicted asymptotic rate of a scheme at `sigma1` is `|z|`, the modulus
//! of the scheme's conformal coordinate (see [`map_z`]). Grids of `|z|` over a
//! window of the complex `sigma1`-plane give the contours `|z| = c`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PhaseMap;
use crate::solvers::{estimate_rate, solve_em_sub, SolverConfig, Status};
use crate::transform::{map_z, principal_sqrt, SchemeKind, SpectralInterval};

/// Trailing window used for measured rates.
pub const RATE_WINDOW: usize = 10;

/// Exact effective conductivity of the 25% square array of squares with
/// matrix conductivity 1: `sqrt((1 + 3 sigma1) / (3 + sigma1))`.
pub fn obnosov(sigma1: Complex64) -> Result<Complex64> {
    let den = sigma1 + 3.0;
    if den.norm() <= f64::EPSILON * 3.0 {
        return Err(Error::Pole(format!("obnosov formula has a pole at sigma1 = -3, got {sigma1}")));
    }
    principal_sqrt((1.0 + 3.0 * sigma1) / den)
}

pub fn predicted_rate(
    scheme: SchemeKind,
    sigma1: Complex64,
    interval: Option<&SpectralInterval>,
) -> Result<f64> {
    Ok(map_z(scheme, sigma1, interval)?.norm())
}

/// Rectangular window of the complex `sigma1`-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite())
            && re_min <= re_max
            && im_min <= im_max;
        if !ok {
            return Err(Error::Parameter(format!(
                "bad window re [{re_min}, {re_max}] im [{im_min}, {im_max}]"
            )));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }
}

/// `|z|` sampled on an `nr x ni` lattice, real index fastest.
///
/// Samples where `z` is undefined (poles, branch cuts, degenerate `t`) hold
/// NaN and are marked in `flagged`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateGrid {
    pub scheme: SchemeKind,
    pub window: Window,
    pub nr: usize,
    pub ni: usize,
    pub values: Vec<f64>,
    pub flagged: Vec<bool>,
}

fn lattice(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
    if n == 1 {
        lo
    } else {
        lo + (hi - lo) * k as f64 / (n - 1) as f64
    }
}

impl RateGrid {
    pub fn point(&self, ir: usize, ii: usize) -> Complex64 {
        Complex64::new(
            lattice(self.window.re_min, self.window.re_max, self.nr, ir),
            lattice(self.window.im_min, self.window.im_max, self.ni, ii),
        )
    }

    pub fn value(&self, ir: usize, ii: usize) -> Option<f64> {
        let k = ii * self.nr + ir;
        (!self.flagged[k]).then_some(self.values[k])
    }

    /// `(sigma1, |z|, flagged)` in storage order.
    pub fn samples(&self) -> impl Iterator<Item = (Complex64, f64, bool)> + '_ {
        (0..self.ni).flat_map(move |ii| {
            (0..self.nr).map(move |ir| {
                let k = ii * self.nr + ir;
                (self.point(ir, ii), self.values[k], self.flagged[k])
            })
        })
    }

    /// Largest unflagged value, `None` when every sample is flagged.
    pub fn max_unflagged(&self) -> Option<f64> {
        self.samples().filter(|s| !s.2).map(|s| s.1).reduce(f64::max)
    }
}

pub fn rate_contours(
    scheme: SchemeKind,
    interval: Option<&SpectralInterval>,
    window: Window,
    resolution: (usize, usize),
) -> Result<RateGrid> {
    let (nr, ni) = resolution;
    if nr == 0 || ni == 0 {
        return Err(Error::Parameter(format!("grid resolution must be positive, got {nr}x{ni}")));
    }
    if scheme.is_substituted() && interval.is_none() {
        return Err(Error::Contract(format!("scheme {scheme} needs a spectral interval")));
    }
    let mut grid = RateGrid {
        scheme,
        window,
        nr,
        ni,
        values: Vec::with_capacity(nr * ni),
        flagged: Vec::with_capacity(nr * ni),
    };
    for ii in 0..ni {
        for ir in 0..nr {
            let rate = predicted_rate(scheme, grid.point(ir, ii), interval)
                .ok()
                .filter(|r| r.is_finite());
            grid.values.push(rate.unwrap_or(f64::NAN));
            grid.flagged.push(rate.is_none());
        }
    }
    Ok(grid)
}

/// One `em_sub` run under a given interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub interval: SpectralInterval,
    pub status: Status,
    pub iterations: usize,
    pub sigma_star: Complex64,
    pub estimated_rate: Option<f64>,
    pub predicted_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MisestimationReport {
    pub sigma1: Complex64,
    pub true_run: RunSummary,
    pub assumed_run: RunSummary,
}

impl MisestimationReport {
    pub fn both_converged(&self) -> bool {
        self.true_run.status == Status::Converged && self.assumed_run.status == Status::Converged
    }

    /// Measured rate under the assumed interval minus that under the true one.
    pub fn rate_penalty(&self) -> Option<f64> {
        Some(self.assumed_run.estimated_rate? - self.true_run.estimated_rate?)
    }
}

fn summarize(map: &PhaseMap, sigma1: Complex64, interval: SpectralInterval, cfg: &SolverConfig) -> Result<RunSummary> {
    let mut run_cfg = cfg.clone();
    run_cfg.scheme = SchemeKind::EyreMiltonSub;
    run_cfg.sigma1 = sigma1;
    run_cfg.interval = Some(interval);
    let result = solve_em_sub(map, &run_cfg)?;
    Ok(RunSummary {
        interval,
        status: result.status,
        iterations: result.iterations(),
        sigma_star: result.sigma_star,
        estimated_rate: estimate_rate(&result.history, RATE_WINDOW).ok(),
        predicted_rate: predicted_rate(SchemeKind::EyreMiltonSub, sigma1, Some(&interval))?,
    })
}

/// Runs `em_sub` under both intervals with the remaining settings of `cfg`.
pub fn misestimation_report(
    map: &PhaseMap,
    sigma1: Complex64,
    true_interval: SpectralInterval,
    assumed_interval: SpectralInterval,
    cfg: &SolverConfig,
) -> Result<MisestimationReport> {
    Ok(MisestimationReport {
        sigma1,
        true_run: summarize(map, sigma1, true_interval, cfg)?,
        assumed_run: summarize(map, sigma1, assumed_interval, cfg)?,
    })
}
