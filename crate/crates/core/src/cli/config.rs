//! Run configuration files.
//!
//! A config is a TOML document with these tables (unknown keys are rejected):
//!
//! ```toml
//! [geometry]
//! kind = "square"          # "square" (n, side) | "disk" (n, radius) | "raster" (path)
//! n = 128
//! side = 0.5
//!
//! [physics]
//! sigma1 = [0.0, 0.0]      # [re, im]; the matrix conductivity is 1
//!
//! [scheme]
//! name = "em_sub"          # basic | em | basic_sub | em_sub
//! compare = ["basic", "em", "basic_sub", "em_sub"]   # used by `compare`
//! alpha = 0.25             # assumed interval [-beta, -alpha]
//! beta = 4.0
//! tol = 1e-8
//! max_iters = 1000
//! sigma0 = [0.5, 0.0]      # optional reference override
//! e0 = [1.0, 0.0]          # applied field direction
//! discretization = "rotated"   # rotated | truncated
//!
//! [contours]               # used by `contours`
//! scheme = "em_sub"        # defaults to scheme.name
//! re_min = 0.01
//! re_max = 4.0
//! im_min = -2.0
//! im_max = 2.0
//! nr = 81
//! ni = 81
//!
//! [output]
//! dir = "out"              # relative to the config file
//! prefix = "run"
//! fields = false           # also dump E and J per pixel
//! ```
//!
//! Only `geometry`, `physics.sigma1` and `scheme.name` are required.
//! An override `key=value` addresses a dotted path such as `scheme.tol`; the
//! value is read as a TOML value and falls back to a bare string.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::Window;
use crate::error::{Error, Result};
use crate::geometry::{build_disk_array, build_square_array, load_raster, PhaseMap};
use crate::solvers::{SolverConfig, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::spectral_ops::Discretization;
use crate::transform::{SchemeKind, SpectralInterval};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub physics: PhysicsConfig,
    pub scheme: SchemeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contours: Option<ContoursConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryConfig {
    Square { n: usize, side: f64 },
    Disk { n: usize, radius: f64 },
    Raster { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub sigma1: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub name: SchemeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<Vec<SchemeKind>>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<[f64; 2]>,
    #[serde(default = "default_e0")]
    pub e0: [f64; 2],
    #[serde(default)]
    pub discretization: Discretization,
}

fn default_alpha() -> f64 {
    SpectralInterval::square_array_widened().alpha()
}

fn default_beta() -> f64 {
    SpectralInterval::square_array_widened().beta()
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}

fn default_e0() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContoursConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeKind>,
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nr: usize,
    pub ni: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_prefix")]
    pub prefix: String,
    #[serde(default)]
    pub fields: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

fn default_prefix() -> String {
    "run".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), prefix: default_prefix(), fields: false }
    }
}

fn config_err(msg: impl std::fmt::Display) -> Error {
    Error::Config(msg.to_string())
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{spec}` is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(config_err(format!("override key `{key}` is malformed")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| config_err(format!("override `{key}`: `{p}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Parse config text, apply overrides in order, then validate.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(config_err)?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scheme;
        SpectralInterval::new(s.alpha, s.beta).map_err(config_err)?;
        if !(s.tol > 0.0) || s.max_iters == 0 {
            return Err(config_err("scheme.tol and scheme.max_iters must be positive"));
        }
        if s.e0 == [0.0, 0.0] {
            return Err(config_err("scheme.e0 must be nonzero"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.physics.sigma1) || !finite(&s.e0) || !s.sigma0.is_none_or(|v| finite(&v)) {
            return Err(config_err("physics.sigma1, scheme.e0 and scheme.sigma0 must be finite"));
        }
        if let Some(list) = &s.compare {
            if list.len() < 2 {
                return Err(config_err("scheme.compare needs at least two schemes"));
            }
        }
        if let Some(c) = &self.contours {
            if c.nr == 0 || c.ni == 0 {
                return Err(config_err(format!("contours resolution {}x{} must be positive", c.nr, c.ni)));
            }
            self.window()?;
        }
        if self.output.prefix.is_empty() || self.output.prefix.contains(['/', '\\']) {
            return Err(config_err("output.prefix must be a plain file-name stem"));
        }
        Ok(())
    }

    pub fn sigma1(&self) -> Complex64 {
        Complex64::new(self.physics.sigma1[0], self.physics.sigma1[1])
    }

    pub fn interval(&self) -> Result<SpectralInterval> {
        SpectralInterval::new(self.scheme.alpha, self.scheme.beta).map_err(config_err)
    }

    pub fn window(&self) -> Result<Window> {
        let c = self.contours.as_ref().ok_or_else(|| config_err("missing [contours] table"))?;
        Window::new(c.re_min, c.re_max, c.im_min, c.im_max).map_err(config_err)
    }

    /// Solver settings for `scheme` with every other field from the file.
    pub fn solver_config(&self, scheme: SchemeKind) -> Result<SolverConfig> {
        let s = &self.scheme;
        let mut cfg = SolverConfig::new(scheme, self.sigma1())
            .with_interval(self.interval()?)
            .with_tol(s.tol)
            .with_max_iters(s.max_iters)
            .with_e0(s.e0.map(|v| Complex64::new(v, 0.0)))
            .with_discretization(s.discretization);
        if let Some([re, im]) = s.sigma0 {
            cfg = cfg.with_sigma0(Complex64::new(re, im));
        }
        Ok(cfg)
    }

    /// Phase map described by the geometry table, raster paths resolved
    /// against `base`.
    pub fn build_map(&self, base: &Path) -> Result<PhaseMap> {
        match &self.geometry {
            GeometryConfig::Square { n, side } => build_square_array(*n, *side),
            GeometryConfig::Disk { n, radius } => build_disk_array(*n, *radius),
            GeometryConfig::Raster { path } => {
                let full = base.join(path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| Error::Io(format!("{}: {e}", full.display())))?;
                load_raster(&text)
            }
        }
    }

    /// The exact `sigma_*` when the geometry is the 25% square array.
    pub fn exact_reference(&self) -> Option<Complex64> {
        match self.geometry {
            GeometryConfig::Square { side, .. } if side == 0.5 => crate::analysis::obnosov(self.sigma1()).ok(),
            _ => None,
        }
    }
}

/// A config read from disk with the directory used to resolve relative paths.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let config = RunConfig::parse(&text, overrides)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { config, base })
    }

    pub fn output_path(&self, suffix: &str) -> PathBuf {
        let out = &self.config.output;
        self.base.join(&out.dir).join(format!("{}_{suffix}", out.prefix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BENCH: &str = r#"
[geometry]
kind = "square"
n = 16
side = 0.5

[physics]
sigma1 = [0.0, 0.0]

[scheme]
name = "em_sub"
"#;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let cfg = RunConfig::parse(BENCH, &[]).unwrap();
        assert_eq!(cfg.geometry, GeometryConfig::Square { n: 16, side: 0.5 });
        assert_eq!(cfg.scheme.name, SchemeKind::EyreMiltonSub);
        assert_eq!((cfg.scheme.alpha, cfg.scheme.beta), (0.25, 4.0));
        assert_eq!(cfg.scheme.tol, DEFAULT_TOL);
        assert_eq!(cfg.scheme.discretization, Discretization::Rotated);
        assert_eq!(cfg.output, OutputConfig::default());
        assert!((cfg.exact_reference().unwrap().re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn overrides_apply_in_order() {
        let o = |s: &str| s.to_string();
        let cfg = RunConfig::parse(
            BENCH,
            &[o("scheme.name=basic"), o("scheme.tol = 1e-6"), o("physics.sigma1=[2, 0.5]"), o("scheme.name=em")],
        )
        .unwrap();
        assert_eq!(cfg.scheme.name, SchemeKind::EyreMilton);
        assert_eq!(cfg.scheme.tol, 1e-6);
        assert_eq!(cfg.sigma1(), Complex64::new(2.0, 0.5));
        let cfg = RunConfig::parse(BENCH, &[o("output.prefix=bench"), o("scheme.discretization=truncated")]).unwrap();
        assert_eq!(cfg.output.prefix, "bench");
        assert_eq!(cfg.scheme.discretization, Discretization::Truncated);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = |text: &str, o: &[&str]| {
            let o: Vec<String> = o.iter().map(|s| s.to_string()).collect();
            matches!(RunConfig::parse(text, &o), Err(Error::Config(_)))
        };
        assert!(bad(BENCH, &["scheme.alpha=5"]));
        assert!(bad(BENCH, &["scheme.bogus=1"]));
        assert!(bad(BENCH, &["geometry.radius=0.3"]));
        assert!(bad(BENCH, &["scheme.name=fancy"]));
        assert!(bad(BENCH, &["scheme.compare=[\"em\"]"]));
        assert!(bad(BENCH, &["scheme.tol=0"]));
        assert!(bad(BENCH, &["noequals"]));
        assert!(bad(BENCH, &["physics.sigma1.re=1"]));
        assert!(bad(&format!("{BENCH}\n[extra]\nx = 1\n"), &[]));
        assert!(bad(&format!("{BENCH}\n[contours]\nre_min=0\nre_max=1\nim_min=0\nim_max=1\nnr=0\nni=3\n"), &[]));
        assert!(bad("[geometry]\nkind = \"square\"\nn = 8\nside = 0.5\n", &[]));
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::parse(BENCH, &["scheme.sigma0=[0.5, 0.0]".into()]).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::parse(&text, &[]).unwrap(), cfg);
    }
}
