//! Periodic unit cell `[0,1)^2` sampled on a pixel grid, with a two-phase
//! indicator. Pixel `(i, j)` is the cell-centered sample at
//! `((i + 1/2)/nx, (j + 1/2)/ny)`; data is row-major with row 0 the lowest y.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Spatial dimension of every grid and field in the crate.
pub const DIM: usize = 2;

/// Indicator of phase 1 (the inclusion) on a periodic pixel grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhaseMap {
    nx: usize,
    ny: usize,
    chi: Vec<bool>,
}

impl PhaseMap {
    pub fn new(nx: usize, ny: usize, chi: Vec<bool>) -> Result<Self> {
        check_dims(nx, ny)?;
        if chi.len() != nx * ny {
            return Err(Error::Mismatch(format!(
                "indicator has {} entries, grid needs {}",
                chi.len(),
                nx * ny
            )));
        }
        Ok(Self { nx, ny, chi })
    }

    /// Map with every pixel in one phase.
    pub fn uniform(nx: usize, ny: usize, phase1: bool) -> Result<Self> {
        Self::new(nx, ny, vec![phase1; nx * ny])
    }

    pub fn from_fn(nx: usize, ny: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        check_dims(nx, ny)?;
        let chi = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        Ok(Self { nx, ny, chi })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }

    pub fn indicator(&self) -> &[bool] {
        &self.chi
    }

    #[inline]
    pub fn is_phase1(&self, idx: usize) -> bool {
        self.chi[idx]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.chi[j * self.nx + i]
    }

    pub fn phase1_count(&self) -> usize {
        self.chi.iter().filter(|&&c| c).count()
    }

    /// Pixel center in cell units.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            (i as f64 + 0.5) / self.nx as f64,
            (j as f64 + 0.5) / self.ny as f64,
        )
    }
}

/// Exact volume fraction as a reduced `count / total` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VolumeFraction {
    pub count: usize,
    pub total: usize,
}

impl VolumeFraction {
    pub fn as_f64(&self) -> f64 {
        self.count as f64 / self.total as f64
    }

    /// Lowest-terms form of the fraction.
    pub fn reduced(&self) -> (usize, usize) {
        let g = gcd(self.count, self.total).max(1);
        (self.count / g, self.total / g)
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn volume_fraction(map: &PhaseMap) -> VolumeFraction {
    VolumeFraction {
        count: map.phase1_count(),
        total: map.len(),
    }
}

fn check_dims(nx: usize, ny: usize) -> Result<()> {
    if nx < 2 || ny < 2 || !nx.is_multiple_of(2) || !ny.is_multiple_of(2) {
        return Err(Error::OddGrid { nx, ny });
    }
    Ok(())
}

/// Centered axis-aligned square of side `side_fraction` (cell units) on an
/// `n x n` grid. The side must cover an even number of pixels.
pub fn build_square_array(n: usize, side_fraction: f64) -> Result<PhaseMap> {
    check_dims(n, n)?;
    if !(side_fraction > 0.0 && side_fraction < 1.0) {
        return Err(Error::GeometryParam(format!(
            "side fraction must lie in (0, 1), got {side_fraction}"
        )));
    }
    let pixels = side_fraction * n as f64;
    let m = pixels.round();
    if (pixels - m).abs() > 1e-9 * n as f64 {
        return Err(Error::Representability {
            n,
            reason: format!("side {side_fraction} spans {pixels} pixels, not an integer"),
        });
    }
    let m = m as usize;
    if !m.is_multiple_of(2) {
        return Err(Error::Representability {
            n,
            reason: format!("side spans {m} pixels; an even count is needed to center it"),
        });
    }
    let lo = n / 2 - m / 2;
    let hi = n / 2 + m / 2;
    PhaseMap::from_fn(n, n, |i, j| (lo..hi).contains(&i) && (lo..hi).contains(&j))
}

/// Disk of the given radius centered in the cell; a pixel is phase 1 when its
/// center lies within `radius` of `(1/2, 1/2)`.
pub fn build_disk_array(n: usize, radius: f64) -> Result<PhaseMap> {
    check_dims(n, n)?;
    if !(radius > 0.0 && radius < 0.5) {
        return Err(Error::GeometryParam(format!(
            "disk radius must lie in (0, 0.5), got {radius}"
        )));
    }
    let r2 = radius * radius;
    let h = 1.0 / n as f64;
    PhaseMap::from_fn(n, n, |i, j| {
        let dx = (i as f64 + 0.5) * h - 0.5;
        let dy = (j as f64 + 0.5) * h - 0.5;
        dx * dx + dy * dy <= r2
    })
}

const RASTER_MAGIC: &str = "P-PHASE";

/// Parse the plain-text bitmap: a `P-PHASE <nx> <ny>` header line followed by
/// `ny` rows of `nx` whitespace-separated `0`/`1` tokens, row 0 first.
pub fn load_raster(text: &str) -> Result<PhaseMap> {
    let parse_err = |line: usize, column: usize, message: String| Error::Parse {
        line,
        column,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, "empty input, expected header".into()))?;
    let header_tokens = tokens_with_columns(header);
    match header_tokens.first() {
        Some((_, RASTER_MAGIC)) => {}
        Some((col, tok)) => {
            return Err(parse_err(1, *col, format!("expected `{RASTER_MAGIC}`, found `{tok}`")))
        }
        None => return Err(parse_err(1, 1, "missing header".into())),
    }
    if header_tokens.len() != 3 {
        let col = header_tokens.get(3).map_or(header.len() + 1, |t| t.0);
        return Err(parse_err(1, col, "header must be `P-PHASE <nx> <ny>`".into()));
    }
    let dim = |k: usize| -> Result<usize> {
        let (col, tok) = header_tokens[k];
        tok.parse::<usize>()
            .map_err(|_| parse_err(1, col, format!("invalid dimension `{tok}`")))
    };
    let nx = dim(1)?;
    let ny = dim(2)?;
    if nx < 2 || ny < 2 || nx % 2 != 0 || ny % 2 != 0 {
        return Err(parse_err(
            1,
            header_tokens[1].0,
            format!("dimensions {nx}x{ny} must be even and at least 2"),
        ));
    }

    let mut chi = Vec::with_capacity(nx * ny);
    let mut rows = 0;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let toks = tokens_with_columns(line);
        if toks.is_empty() {
            // blank lines are tolerated only after the body
            if rows == ny {
                continue;
            }
            return Err(parse_err(line_no, 1, format!("blank line inside body, row {rows}")));
        }
        if rows == ny {
            return Err(parse_err(line_no, toks[0].0, format!("more than {ny} rows")));
        }
        if toks.len() != nx {
            let col = toks.get(nx).map_or(line.len() + 1, |t| t.0);
            return Err(parse_err(
                line_no,
                col,
                format!("expected {nx} tokens, found {}", toks.len()),
            ));
        }
        for (col, tok) in toks {
            chi.push(match tok {
                "0" => false,
                "1" => true,
                other => {
                    return Err(parse_err(line_no, col, format!("expected 0 or 1, found `{other}`")))
                }
            });
        }
        rows += 1;
    }
    if rows != ny {
        return Err(parse_err(
            text.lines().count() + 1,
            1,
            format!("expected {ny} rows, found {rows}"),
        ));
    }
    PhaseMap::new(nx, ny, chi)
}

/// Canonical text form accepted by [`load_raster`].
pub fn save_raster(map: &PhaseMap) -> String {
    let mut out = String::with_capacity(16 + 2 * map.len());
    let _ = writeln!(out, "{RASTER_MAGIC} {} {}", map.nx, map.ny);
    for row in map.chi.chunks(map.nx) {
        for (i, &c) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push(if c { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// Whitespace-separated tokens with their 1-based column.
fn tokens_with_columns(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (pos, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..pos]));
            }
        } else if start.is_none() {
            start = Some(pos);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}
