//! Fields on the periodic grid, the Fourier-space projection `Gamma1` onto
//! zero-mean curl-free fields, its counterpart on the augmented space of
//! triples `(Q, S, T)`, and the pixel-local operators built from the rank-one
//! projection `p (x) p`.
//!
//! Per Fourier mode `Gamma1^ = d (x) conj(d) / |d|^2` for a discrete wave
//! vector `d` chosen by [`Discretization`], with the `k = 0` mode zeroed. The
//! forward transform is unnormalized and the inverse divides by `nx * ny`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::geometry::{PhaseMap, DIM};
use crate::sum::{sum_complex, sum_f64};
use crate::transform::SubstitutionParams;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A constant `DIM`-vector.
pub type Vector = [Complex64; DIM];

/// Complex vector field sampled on the pixel grid, stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    nx: usize,
    ny: usize,
    comps: [Vec<Complex64>; DIM],
}

impl VectorField {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            comps: std::array::from_fn(|_| vec![ZERO; nx * ny]),
        }
    }

    pub fn constant(nx: usize, ny: usize, value: Vector) -> Self {
        Self {
            nx,
            ny,
            comps: std::array::from_fn(|d| vec![value[d]; nx * ny]),
        }
    }

    /// Field from a function of pixel indices `(i, j)`.
    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> Vector) -> Self {
        let mut out = Self::zeros(nx, ny);
        for j in 0..ny {
            for i in 0..nx {
                let v = f(i, j);
                for d in 0..DIM {
                    out.comps[d][j * nx + i] = v[d];
                }
            }
        }
        out
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn component(&self, d: usize) -> &[Complex64] {
        &self.comps[d]
    }

    pub fn component_mut(&mut self, d: usize) -> &mut [Complex64] {
        &mut self.comps[d]
    }

    #[inline]
    pub fn at(&self, idx: usize) -> Vector {
        std::array::from_fn(|d| self.comps[d][idx])
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: Vector) {
        for d in 0..DIM {
            self.comps[d][idx] = v[d];
        }
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.nx == other.nx && self.ny == other.ny
    }

    pub fn matches(&self, map: &PhaseMap) -> bool {
        self.nx == map.nx() && self.ny == map.ny()
    }

    /// Pixel mean, i.e. the projection onto constant fields.
    pub fn mean(&self) -> Vector {
        let n = self.len() as f64;
        std::array::from_fn(|d| sum_complex(self.comps[d].iter().copied()) / n)
    }

    /// `(self, other) = < conj(self) . other >`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert!(self.same_grid(other));
        let n = self.len() as f64;
        let terms = (0..DIM).flat_map(|d| {
            self.comps[d]
                .iter()
                .zip(&other.comps[d])
                .map(|(a, b)| a.conj() * b)
        });
        sum_complex(terms) / n
    }

    pub fn norm(&self) -> f64 {
        let n = self.len() as f64;
        let terms = self.comps.iter().flat_map(|c| c.iter().map(|v| v.norm_sqr()));
        (sum_f64(terms) / n).sqrt()
    }

    pub fn scale(&mut self, c: Complex64) {
        for comp in &mut self.comps {
            comp.iter_mut().for_each(|v| *v *= c);
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: Complex64, other: &Self) {
        debug_assert!(self.same_grid(other));
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// Zero the field on phase-2 pixels.
    pub fn mask_phase1(&mut self, map: &PhaseMap) {
        for (idx, &c) in map.indicator().iter().enumerate() {
            if !c {
                for comp in &mut self.comps {
                    comp[idx] = ZERO;
                }
            }
        }
    }

    /// Pixelwise multiplication by a scalar function of the phase.
    pub fn scale_by_phase(&mut self, map: &PhaseMap, phase1: Complex64, phase2: Complex64) {
        for (idx, &c) in map.indicator().iter().enumerate() {
            let f = if c { phase1 } else { phase2 };
            for comp in &mut self.comps {
                comp[idx] *= f;
            }
        }
    }

    /// Apply the same permutation of pixel sites to every component.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.nx, self.ny);
        for (dst, &src) in perm.iter().enumerate() {
            out.set(dst, self.at(src));
        }
        out
    }
}

/// Field `(Q, chi S, chi T)` of the augmented space: `Q` lives everywhere, `S`
/// and `T` only on phase-1 pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedField {
    pub q: VectorField,
    pub s: VectorField,
    pub t: VectorField,
}

impl AugmentedField {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            q: VectorField::zeros(nx, ny),
            s: VectorField::zeros(nx, ny),
            t: VectorField::zeros(nx, ny),
        }
    }

    /// `(e0, 0, 0)`, the constant field carrying the applied field.
    pub fn applied(nx: usize, ny: usize, e0: Vector) -> Self {
        Self {
            q: VectorField::constant(nx, ny, e0),
            s: VectorField::zeros(nx, ny),
            t: VectorField::zeros(nx, ny),
        }
    }

    pub fn nx(&self) -> usize {
        self.q.nx
    }

    pub fn ny(&self) -> usize {
        self.q.ny
    }

    pub fn parts(&self) -> [&VectorField; 3] {
        [&self.q, &self.s, &self.t]
    }

    fn parts_mut(&mut self) -> [&mut VectorField; 3] {
        [&mut self.q, &mut self.s, &mut self.t]
    }

    pub fn matches(&self, map: &PhaseMap) -> bool {
        self.parts().iter().all(|p| p.matches(map))
    }

    /// `S` and `T` vanish exactly on phase-2 pixels.
    pub fn satisfies_support(&self, map: &PhaseMap) -> bool {
        map.indicator().iter().enumerate().all(|(idx, &c)| {
            c || (0..DIM).all(|d| self.s.comps[d][idx] == ZERO && self.t.comps[d][idx] == ZERO)
        })
    }

    pub fn check_support(&self, map: &PhaseMap) -> Result<()> {
        if !self.matches(map) {
            return Err(Error::Mismatch("augmented field and phase map differ in size".into()));
        }
        if !self.satisfies_support(map) {
            return Err(Error::Contract(
                "augmented field has S or T components on phase-2 pixels".into(),
            ));
        }
        Ok(())
    }

    pub fn enforce_support(&mut self, map: &PhaseMap) {
        self.s.mask_phase1(map);
        self.t.mask_phase1(map);
    }

    /// `< conj(S).S~ + conj(T).T~ >_chi + < conj(Q).Q~ >`.
    pub fn inner(&self, other: &Self, map: &PhaseMap) -> Complex64 {
        let n = self.q.len() as f64;
        let chi = map.indicator();
        let masked = |a: &VectorField, b: &VectorField| {
            (0..DIM)
                .flat_map(move |d| {
                    a.comps[d]
                        .iter()
                        .zip(&b.comps[d])
                        .zip(chi)
                        .filter(|(_, &c)| c)
                        .map(|((x, y), _)| x.conj() * y)
                })
                .collect::<Vec<_>>()
        };
        let mut terms = masked(&self.s, &other.s);
        terms.extend(masked(&self.t, &other.t));
        sum_complex(terms) / n + self.q.inner(&other.q)
    }

    pub fn norm(&self, map: &PhaseMap) -> f64 {
        self.inner(self, map).re.max(0.0).sqrt()
    }

    pub fn scale(&mut self, c: Complex64) {
        for p in self.parts_mut() {
            p.scale(c);
        }
    }

    pub fn add_scaled(&mut self, c: Complex64, other: &Self) {
        self.q.add_scaled(c, &other.q);
        self.s.add_scaled(c, &other.s);
        self.t.add_scaled(c, &other.t);
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            q: self.q.permuted(perm),
            s: self.s.permuted(perm),
            t: self.t.permuted(perm),
        }
    }

    #[inline]
    fn triple(&self, d: usize, idx: usize) -> [Complex64; 3] {
        [self.q.comps[d][idx], self.s.comps[d][idx], self.t.comps[d][idx]]
    }

    #[inline]
    fn set_triple(&mut self, d: usize, idx: usize, v: [Complex64; 3]) {
        self.q.comps[d][idx] = v[0];
        self.s.comps[d][idx] = v[1];
        self.t.comps[d][idx] = v[2];
    }
}

/// Projection onto zero-mean curl-free fields.
pub trait GradientProjection {
    fn gamma1(&self, f: &VectorField) -> VectorField;
}

/// FFT-backed `Gamma1` for one grid size.
#[derive(Clone)]
pub struct FourierProjector {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    disc: Discretization,
    /// `d (x) conj(d) / |d|^2` entries `(xx, xy, yx, yy)` per mode, row-major.
    multiplier: Arc<Vec<[Complex64; 4]>>,
}

impl std::fmt::Debug for FourierProjector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierProjector")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("disc", &self.disc)
            .finish()
    }
}

/// Discrete wave vector used to build `Gamma1`.
///
/// `Rotated` takes `d = (i sin(k1/2) e^(i k1/2) (1 + e^(i k2)),
/// i sin(k2/2) e^(i k2/2) (1 + e^(i k1)))` with `k = 2 pi m / n`, the symbol of
/// the centered difference on the rotated (corner) stencil. `Truncated` takes
/// the integer wave vector `m` itself, including the `m = -n/2` row and column.
/// Modes where `d` vanishes are zeroed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    #[default]
    Rotated,
    Truncated,
}

impl Discretization {
    pub const ALL: [Discretization; 2] = [Discretization::Rotated, Discretization::Truncated];

    pub fn name(self) -> &'static str {
        match self {
            Discretization::Rotated => "rotated",
            Discretization::Truncated => "truncated",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name() == name)
    }

    /// Discrete wave vector for DFT indices `(i, j)`.
    pub fn wave_vector(self, i: usize, nx: usize, j: usize, ny: usize) -> Vector {
        match self {
            Discretization::Truncated => [
                Complex64::new(wave_number(i, nx), 0.0),
                Complex64::new(wave_number(j, ny), 0.0),
            ],
            Discretization::Rotated => {
                let k1 = std::f64::consts::TAU * i as f64 / nx as f64;
                let k2 = std::f64::consts::TAU * j as f64 / ny as f64;
                let half = |k: f64| Complex64::new(0.0, (k / 2.0).sin()) * Complex64::from_polar(1.0, k / 2.0);
                let avg = |k: f64| 1.0 + Complex64::from_polar(1.0, k);
                [half(k1) * avg(k2), half(k2) * avg(k1)]
            }
        }
    }

    fn mode_projector(self, i: usize, nx: usize, j: usize, ny: usize) -> [Complex64; 4] {
        let [dx, dy] = self.wave_vector(i, nx, j, ny);
        let d2 = dx.norm_sqr() + dy.norm_sqr();
        if d2 < 1e-24 {
            return [ZERO; 4];
        }
        [
            dx * dx.conj() / d2,
            dx * dy.conj() / d2,
            dy * dx.conj() / d2,
            dy * dy.conj() / d2,
        ]
    }
}

/// Integer wave number of DFT index `i` on an `n`-point axis.
pub fn wave_number(i: usize, n: usize) -> f64 {
    if i < n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

impl FourierProjector {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self::with_discretization(nx, ny, Discretization::default())
    }

    pub fn with_discretization(nx: usize, ny: usize, disc: Discretization) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let mut multiplier = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                multiplier.push(disc.mode_projector(i, nx, j, ny));
            }
        }
        Self {
            nx,
            ny,
            disc,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
            multiplier: Arc::new(multiplier),
        }
    }

    pub fn for_map(map: &PhaseMap) -> Self {
        Self::new(map.nx(), map.ny())
    }

    pub fn for_map_with(map: &PhaseMap, disc: Discretization) -> Self {
        Self::with_discretization(map.nx(), map.ny(), disc)
    }

    pub fn discretization(&self) -> Discretization {
        self.disc
    }

    fn transform(&self, data: &mut [Complex64], x: &dyn Fft<f64>, y: &dyn Fft<f64>) {
        let (nx, ny) = (self.nx, self.ny);
        x.process(data);
        let mut column = vec![ZERO; ny * nx];
        for j in 0..ny {
            for i in 0..nx {
                column[i * ny + j] = data[j * nx + i];
            }
        }
        y.process(&mut column);
        for i in 0..nx {
            for j in 0..ny {
                data[j * nx + i] = column[i * ny + j];
            }
        }
    }

    /// Unnormalized forward 2-D DFT in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, self.fwd_x.as_ref(), self.fwd_y.as_ref());
    }

    /// Inverse 2-D DFT in place, divided by `nx * ny`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, self.inv_x.as_ref(), self.inv_y.as_ref());
        let scale = 1.0 / (self.nx * self.ny) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }
}

impl GradientProjection for FourierProjector {
    fn gamma1(&self, f: &VectorField) -> VectorField {
        assert!(
            f.nx == self.nx && f.ny == self.ny,
            "field {}x{} applied to a {}x{} projector",
            f.nx,
            f.ny,
            self.nx,
            self.ny
        );
        let mut fx = f.comps[0].clone();
        let mut fy = f.comps[1].clone();
        self.forward(&mut fx);
        self.forward(&mut fy);
        for ((a, b), m) in fx.iter_mut().zip(fy.iter_mut()).zip(self.multiplier.iter()) {
            let (x, y) = (*a, *b);
            *a = x * m[0] + y * m[1];
            *b = x * m[2] + y * m[3];
        }
        self.inverse(&mut fx);
        self.inverse(&mut fy);
        VectorField {
            nx: f.nx,
            ny: f.ny,
            comps: [fx, fy],
        }
    }
}

/// Projection onto constant fields: the compensated pixel mean.
pub fn gamma0(f: &VectorField) -> Vector {
    f.mean()
}

/// `(Q, chi S, chi T) -> (Gamma1 Q, chi S, 0)`.
pub fn gamma1_aug(
    projector: &dyn GradientProjection,
    f: &AugmentedField,
    map: &PhaseMap,
) -> Result<AugmentedField> {
    f.check_support(map)?;
    Ok(AugmentedField {
        q: projector.gamma1(&f.q),
        s: f.s.clone(),
        t: VectorField::zeros(f.nx(), f.ny()),
    })
}

/// Projection onto `U''`: `(<Q>, 0, 0)`.
pub fn gamma0_aug(f: &AugmentedField) -> Vector {
    f.q.mean()
}

#[inline]
fn p_dot(p: &[Complex64; 3], v: &[Complex64; 3]) -> Complex64 {
    p[0] * v[0] + p[1] * v[1] + p[2] * v[2]
}

/// Pixel-local map applied to every phase-1 triple, phase-2 pixels handled by
/// `phase2` acting on `Q` alone.
fn map_local(
    f: &AugmentedField,
    map: &PhaseMap,
    phase1: impl Fn([Complex64; 3]) -> [Complex64; 3],
    phase2: impl Fn(Complex64) -> Complex64,
) -> AugmentedField {
    let mut out = AugmentedField::zeros(f.nx(), f.ny());
    for (idx, &c) in map.indicator().iter().enumerate() {
        for d in 0..DIM {
            if c {
                out.set_triple(d, idx, phase1(f.triple(d, idx)));
            } else {
                out.q.comps[d][idx] = phase2(f.q.comps[d][idx]);
            }
        }
    }
    out
}

/// `chi'' = (p (x) p) chi`, unconjugated; a projection but not self-adjoint.
pub fn apply_chi_aug(f: &AugmentedField, params: &SubstitutionParams, map: &PhaseMap) -> AugmentedField {
    let p = params.p();
    map_local(
        f,
        map,
        |v| {
            let s = p_dot(&p, &v);
            [p[0] * s, p[1] * s, p[2] * s]
        },
        |_| ZERO,
    )
}

/// Local constitutive operator `A = (t - 1) chi'' + I`.
pub fn apply_local_a(
    f: &AugmentedField,
    t: Complex64,
    params: &SubstitutionParams,
    map: &PhaseMap,
) -> AugmentedField {
    let p = params.p();
    let tm1 = t - 1.0;
    map_local(
        f,
        map,
        |v| {
            let s = tm1 * p_dot(&p, &v);
            [v[0] + p[0] * s, v[1] + p[1] * s, v[2] + p[2] * s]
        },
        |q| q,
    )
}

/// `(A + sigma0 I)^{-1}` evaluated pixel by pixel through the rank-one
/// structure of `A`.
pub fn invert_shifted_a(
    f: &AugmentedField,
    t: Complex64,
    sigma0: Complex64,
    params: &SubstitutionParams,
    map: &PhaseMap,
) -> Result<AugmentedField> {
    let a = sigma0 + 1.0;
    let b = t + sigma0;
    if a == ZERO || b == ZERO {
        return Err(Error::SingularShift(format!(
            "A + sigma0 I is singular for sigma0 = {sigma0}, t = {t}"
        )));
    }
    let p = params.p();
    let inv_a = 1.0 / a;
    let c = (t - 1.0) / b;
    Ok(map_local(
        f,
        map,
        |v| {
            let s = c * p_dot(&p, &v);
            [
                (v[0] - p[0] * s) * inv_a,
                (v[1] - p[1] * s) * inv_a,
                (v[2] - p[2] * s) * inv_a,
            ]
        },
        |q| q * inv_a,
    ))
}
