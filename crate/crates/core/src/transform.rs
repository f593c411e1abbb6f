//! Scalar algebra of the substitution: the fractional-linear map `sigma1 -> t`,
//! the rate variables `z` of the four schemes, the choice of the complex unit
//! vector `p` from a spectral interval, and the discrete resistor analogue.
//!
//! The matrix phase conductivity is fixed at 1 throughout.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// The interval `[-beta, -alpha]` assumed to contain every singularity of
/// `sigma_*(sigma1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralInterval {
    alpha: f64,
    beta: f64,
}

impl SpectralInterval {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > alpha && beta.is_finite()) {
            return Err(Error::Interval { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The exact cut of the 25% square array, `[-3, -1/3]`.
    pub fn square_array_exact() -> Self {
        Self { alpha: 1.0 / 3.0, beta: 3.0 }
    }

    /// The widened estimate `[-4, -1/4]` used for the benchmark runs.
    pub fn square_array_widened() -> Self {
        Self { alpha: 0.25, beta: 4.0 }
    }
}

/// The four fixed-point families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    /// Moulinec–Suquet iteration in the original space.
    Basic,
    /// Eyre–Milton iteration in the original space.
    #[serde(rename = "em")]
    EyreMilton,
    /// Moulinec–Suquet iteration in the substituted space.
    BasicSub,
    /// Eyre–Milton iteration in the substituted space.
    #[serde(rename = "em_sub")]
    EyreMiltonSub,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Basic,
        SchemeKind::EyreMilton,
        SchemeKind::BasicSub,
        SchemeKind::EyreMiltonSub,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Basic => "basic",
            SchemeKind::EyreMilton => "em",
            SchemeKind::BasicSub => "basic_sub",
            SchemeKind::EyreMiltonSub => "em_sub",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn is_substituted(&self) -> bool {
        matches!(self, SchemeKind::BasicSub | SchemeKind::EyreMiltonSub)
    }

    pub fn uses_sqrt(&self) -> bool {
        matches!(self, SchemeKind::EyreMilton | SchemeKind::EyreMiltonSub)
    }
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Principal square root, refusing arguments on the closed negative real axis.
pub fn principal_sqrt(w: Complex64) -> Result<Complex64> {
    if w.im == 0.0 && w.re <= 0.0 {
        return Err(Error::BranchCut { re: w.re, im: w.im });
    }
    Ok(w.sqrt())
}

fn is_zero(x: Complex64, scale: f64) -> bool {
    x.norm() <= f64::EPSILON * scale.max(f64::MIN_POSITIVE)
}

/// `t = (sigma1 + alpha)(1 + beta) / ((sigma1 + beta)(1 + alpha))`.
pub fn map_t(sigma1: Complex64, interval: &SpectralInterval) -> Result<Complex64> {
    let (a, b) = (interval.alpha, interval.beta);
    let den = (sigma1 + b) * (1.0 + a);
    if is_zero(sigma1 + b, b) {
        return Err(Error::Pole(format!("map_t is singular at sigma1 = -beta = {}", -b)));
    }
    Ok((sigma1 + a) * (1.0 + b) / den)
}

/// Inverse of [`map_t`].
pub fn inverse_map_t(t: Complex64, interval: &SpectralInterval) -> Result<Complex64> {
    let (a, b) = (interval.alpha, interval.beta);
    // written in t - 1 and beta - alpha, which stay exact near t = 1
    let (dt, w) = (t - 1.0, b - a);
    let den = w - (1.0 + a) * dt;
    if is_zero(den, w) {
        let c = (1.0 + b) / (1.0 + a);
        return Err(Error::Pole(format!("t = {c} is the image of sigma1 = infinity")));
    }
    Ok((w + b * (1.0 + a) * dt) / den)
}

/// The expansion variable `z` of a scheme; the iterates of that scheme realize
/// partial sums of a power series in `z`.
pub fn map_z(
    scheme: SchemeKind,
    sigma1: Complex64,
    interval: Option<&SpectralInterval>,
) -> Result<Complex64> {
    let cayley = |w: Complex64| -> Result<Complex64> {
        if is_zero(w + 1.0, 1.0) {
            return Err(Error::Pole("z = (w - 1)/(w + 1) at w = -1".into()));
        }
        Ok((w - 1.0) / (w + 1.0))
    };
    let need = || {
        interval.ok_or_else(|| Error::Contract(format!("scheme {scheme} needs a spectral interval")))
    };
    match scheme {
        SchemeKind::Basic => cayley(sigma1),
        SchemeKind::EyreMilton => cayley(principal_sqrt(sigma1)?),
        SchemeKind::BasicSub => cayley(map_t(sigma1, need()?)?),
        SchemeKind::EyreMiltonSub => cayley(principal_sqrt(map_t(sigma1, need()?)?)?),
    }
}

/// Complex unit vector `p` (`p1^2 + p2^2 + p3^2 = 1`, unconjugated) that makes
/// the rank-one local medium `(t - 1) p (x) p + I` reproduce `sigma1 = t^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstitutionParams {
    pub interval: SpectralInterval,
    pub p1: Complex64,
    pub p2: Complex64,
    pub p3: Complex64,
}

impl SubstitutionParams {
    pub fn p(&self) -> [Complex64; 3] {
        [self.p1, self.p2, self.p3]
    }

    /// `p . p` without conjugation.
    pub fn bilinear_norm(&self) -> Complex64 {
        self.p1 * self.p1 + self.p2 * self.p2 + self.p3 * self.p3
    }

    /// `(alpha, beta)` reconstructed from `p1^2, p2^2`.
    pub fn recovered_interval(&self) -> (Complex64, Complex64) {
        let (q1, q2) = (self.p1 * self.p1, self.p2 * self.p2);
        (-ONE - q1 / (q2 - 1.0), -ONE - q1 / q2)
    }
}

/// Solve for `p` given the interval. Branches: `p1 > 0` real, `p2` and `p3`
/// on the positive imaginary axis.
pub fn solve_p(interval: &SpectralInterval) -> SubstitutionParams {
    let (a, b) = (interval.alpha, interval.beta);
    let width = b - a;
    let p1 = ((1.0 + a) * (1.0 + b) / width).sqrt();
    let p2 = ((1.0 + a) / width).sqrt();
    // p3^2 = 1 - p1^2 - p2^2 = -alpha (1 + beta) / (beta - alpha)
    let p3 = (a * (1.0 + b) / width).sqrt();
    SubstitutionParams {
        interval: *interval,
        p1: Complex64::new(p1, 0.0),
        p2: Complex64::new(0.0, p2),
        p3: Complex64::new(0.0, p3),
    }
}

fn local_denominator(t: Complex64, params: &SubstitutionParams) -> Result<Complex64> {
    let den = (t - 1.0) * params.p2 * params.p2 + 1.0;
    if is_zero(den, 1.0) {
        return Err(Error::DegenerateT(format!(
            "(t - 1) p2^2 + 1 vanishes at t = {t}; this t is the image of sigma1 = infinity"
        )));
    }
    Ok(den)
}

/// Auxiliary constants `(E2', J3')` of the three-component local problem with
/// `E1' = 1`.
pub fn aux_constants(t: Complex64, params: &SubstitutionParams) -> Result<(Complex64, Complex64)> {
    let den = local_denominator(t, params)?;
    let e2 = (1.0 - t) * params.p1 * params.p2 / den;
    let j3 = params.p1 * params.p3 * (t - 1.0) / den;
    Ok((e2, j3))
}

/// `sigma1` as the effective modulus of the local problem at `t`.
pub fn verify_sigma1(t: Complex64, params: &SubstitutionParams) -> Result<Complex64> {
    let den = local_denominator(t, params)?;
    Ok(1.0 + params.p1 * params.p1 * (t - 1.0) / den)
}

/// Residuals of the three rows of the local system
/// `(J1', 0, J3') = [(t - 1) p (x) p + I] (1, E2', 0)` with `J1' = sigma1`.
pub fn local_system_residuals(
    t: Complex64,
    sigma1: Complex64,
    params: &SubstitutionParams,
) -> Result<[f64; 3]> {
    let (e2, j3) = aux_constants(t, params)?;
    let [p1, p2, p3] = params.p();
    let e = [ONE, e2, Complex64::new(0.0, 0.0)];
    let pe = p1 * e[0] + p2 * e[1];
    let rows = [
        (t - 1.0) * p1 * pe + e[0] - sigma1,
        (t - 1.0) * p2 * pe + e[1],
        (t - 1.0) * p3 * pe - j3,
    ];
    Ok(rows.map(|r| r.norm()))
}

/// Resistance of the compound replacing `R1`: `k1 R2` in series with the
/// parallel pair `k2 R1`, `k3 R2`.
pub fn compound_resistance(r1: f64, r2: f64, k1: f64, k2: f64, k3: f64) -> Result<f64> {
    check_ks(k1, k2, k3)?;
    let parallel = 1.0 / (k2 * r1) + 1.0 / (k3 * r2);
    if parallel == 0.0 {
        return Err(Error::Pole("parallel branch has zero conductance".into()));
    }
    Ok(k1 * r2 + 1.0 / parallel)
}

/// The conductivity seen after the compound replacement, a fractional-linear
/// function of `sigma1`. An infinite `sigma1` returns the limit `delta / k1`.
pub fn resistor_substitution_map(
    sigma1: Complex64,
    k1: f64,
    k2: f64,
    k3: f64,
    delta: f64,
) -> Result<Complex64> {
    check_ks(k1, k2, k3)?;
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!("lattice scale must be positive, got {delta}")));
    }
    if sigma1.re.is_infinite() || sigma1.im.is_infinite() {
        return Ok(Complex64::new(delta / k1, 0.0));
    }
    let den = k1 * sigma1 / k2 + k1 / k3 + 1.0;
    if is_zero(den, 1.0) {
        return Err(Error::Pole(format!("resistor map singular at sigma1 = {sigma1}")));
    }
    Ok((sigma1 / k2 + 1.0 / k3) * delta / den)
}

fn check_ks(k1: f64, k2: f64, k3: f64) -> Result<()> {
    for (name, k) in [("k1", k1), ("k2", k2), ("k3", k3)] {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Parameter(format!("{name} must be positive, got {k}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1.0)
    }

    fn bench() -> SpectralInterval {
        SpectralInterval::square_array_widened()
    }

    #[test]
    fn interval_validation() {
        assert!(SpectralInterval::new(0.25, 4.0).is_ok());
        assert!(SpectralInterval::new(4.0, 0.25).is_err());
        assert!(SpectralInterval::new(1.0, 1.0).is_err());
        assert!(SpectralInterval::new(0.0, 1.0).is_err());
        assert!(SpectralInterval::new(0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn map_t_reference_points() {
        for iv in [bench(), SpectralInterval::new(0.01, 70.0).unwrap()] {
            assert!(rel(map_t(ONE, &iv).unwrap(), ONE) < 1e-15);
            assert_eq!(map_t(c(-iv.alpha(), 0.0), &iv).unwrap().norm(), 0.0);
        }
        // (0 + 1/4)(5) / ((4)(5/4)) = 1/4
        assert!(rel(map_t(c(0.0, 0.0), &bench()).unwrap(), c(0.25, 0.0)) < 1e-15);
        assert!(matches!(map_t(c(-4.0, 0.0), &bench()), Err(Error::Pole(_))));
    }

    #[test]
    fn map_t_two_forms_agree() {
        let iv = SpectralInterval::new(0.3, 7.0).unwrap();
        for s in [c(2.0, 0.0), c(-0.1, 3.0), c(10.0, -1.0)] {
            let alt = 1.0 + (s - 1.0) * (iv.beta() - iv.alpha()) / ((s + iv.beta()) * (1.0 + iv.alpha()));
            assert!(rel(map_t(s, &iv).unwrap(), alt) < 1e-14);
        }
    }

    #[test]
    fn inverse_map_t_reference_points() {
        let iv = bench();
        assert!(rel(inverse_map_t(ONE, &iv).unwrap(), ONE) < 1e-15);
        assert!(inverse_map_t(c(0.25, 0.0), &iv).unwrap().norm() < 1e-15);
        assert!(rel(inverse_map_t(c(0.0, 0.0), &iv).unwrap(), c(-0.25, 0.0)) < 1e-15);
        assert!(matches!(inverse_map_t(c(4.0, 0.0), &iv), Err(Error::Pole(_))));
    }

    #[test]
    fn map_z_reference_points() {
        let iv = bench();
        assert!(rel(map_z(SchemeKind::Basic, c(3.0, 0.0), None).unwrap(), c(0.5, 0.0)) < 1e-15);
        assert!(rel(map_z(SchemeKind::EyreMilton, c(9.0, 0.0), None).unwrap(), c(0.5, 0.0)) < 1e-15);
        let z = map_z(SchemeKind::EyreMiltonSub, c(0.0, 0.0), Some(&iv)).unwrap();
        assert!(rel(z, c(-1.0 / 3.0, 0.0)) < 1e-15);
        let z = map_z(SchemeKind::BasicSub, c(0.0, 0.0), Some(&iv)).unwrap();
        assert!(rel(z, c(-0.6, 0.0)) < 1e-15);
    }

    #[test]
    fn map_z_errors() {
        let iv = bench();
        assert!(matches!(map_z(SchemeKind::EyreMilton, c(-2.0, 0.0), None), Err(Error::BranchCut { .. })));
        assert!(matches!(map_z(SchemeKind::EyreMilton, c(0.0, 0.0), None), Err(Error::BranchCut { .. })));
        assert!(matches!(
            map_z(SchemeKind::EyreMiltonSub, c(-1.0, 0.0), Some(&iv)),
            Err(Error::BranchCut { .. })
        ));
        assert!(matches!(map_z(SchemeKind::BasicSub, ONE, None), Err(Error::Contract(_))));
        assert!(matches!(map_z(SchemeKind::Basic, c(-1.0, 0.0), None), Err(Error::Pole(_))));
        // just off the cut is fine
        assert!(map_z(SchemeKind::EyreMilton, c(-2.0, 1e-300), None).is_ok());
    }

    #[test]
    fn solve_p_benchmark_values() {
        let p = solve_p(&bench());
        assert!(rel(p.p1 * p.p1, c(5.0 / 3.0, 0.0)) < 1e-15);
        assert!(rel(p.p2 * p.p2, c(-1.0 / 3.0, 0.0)) < 1e-15);
        assert!(rel(p.p3 * p.p3, c(-1.0 / 3.0, 0.0)) < 1e-15);
        assert!(rel(p.bilinear_norm(), ONE) < 1e-15);
        let (a, b) = p.recovered_interval();
        assert!(rel(a, c(0.25, 0.0)) < 1e-14 && rel(b, c(4.0, 0.0)) < 1e-14);
        assert!(p.p1.re > 0.0 && p.p2.im > 0.0 && p.p3.im > 0.0);
    }

    #[test]
    fn aux_constants_benchmark() {
        let p = solve_p(&bench());
        let (e2, j3) = aux_constants(ONE, &p).unwrap();
        assert_eq!((e2.norm(), j3.norm()), (0.0, 0.0));
        let (e2, j3) = aux_constants(c(0.25, 0.0), &p).unwrap();
        let inv_sqrt5 = 1.0 / 5f64.sqrt();
        assert!(rel(e2, c(0.0, inv_sqrt5)) < 1e-14, "{e2}");
        assert!(rel(j3, c(0.0, -inv_sqrt5)) < 1e-14, "{j3}");
        assert!(verify_sigma1(c(0.25, 0.0), &p).unwrap().norm() < 1e-15);
        assert!(rel(verify_sigma1(ONE, &p).unwrap(), ONE) < 1e-15);
        // t = 4 is the image of sigma1 = infinity
        assert!(matches!(aux_constants(c(4.0, 0.0), &p), Err(Error::DegenerateT(_))));
    }

    #[test]
    fn resistor_reference_values() {
        assert!((compound_resistance(1.0, 1.0, 1.0, 1.0, 1.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((compound_resistance(f64::INFINITY, 1.0, 1.0, 1.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(compound_resistance(1.0, 1.0, 0.0, 1.0, 1.0).is_err());
        let m = |s: f64| resistor_substitution_map(c(s, 0.0), 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(rel(m(0.0), c(0.5, 0.0)) < 1e-15);
        assert!(rel(m(1.0), c(2.0 / 3.0, 0.0)) < 1e-15);
        assert!(rel(m(f64::INFINITY), ONE) < 1e-15);
        assert!(rel(m(1e15), ONE) < 1e-14);
        assert!(resistor_substitution_map(ONE, 1.0, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn resistor_map_is_scaled_reciprocal_of_compound() {
        // unit lattice: R1 = 1/sigma1, R2 = 1; the map is delta / R_compound
        let (k1, k2, k3, delta) = (0.7, 1.3, 2.1, 0.5);
        for s in [0.1, 1.0, 3.5, 20.0] {
            let r = compound_resistance(1.0 / s, 1.0, k1, k2, k3).unwrap();
            let mapped = resistor_substitution_map(c(s, 0.0), k1, k2, k3, delta).unwrap();
            assert!(rel(mapped, c(delta / r, 0.0)) < 1e-14);
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in SchemeKind::ALL {
            assert_eq!(SchemeKind::from_name(s.name()), Some(s));
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
        }
    }

    fn cross_ratio(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
        (a - c) * (b - d) / ((a - d) * (b - c))
    }

    proptest! {
        #[test]
        fn t_round_trip(re in -50.0f64..50.0, im in -50.0f64..50.0, a in 0.001f64..10.0, w in 0.001f64..90.0) {
            let iv = SpectralInterval::new(a, a + w).unwrap();
            let s = c(re, im);
            prop_assume!((s + iv.beta()).norm() > 1e-6);
            let t = map_t(s, &iv).unwrap();
            let back = inverse_map_t(t, &iv).unwrap();
            prop_assert!(rel(back, s) < 1e-10);
            let t2 = map_t(inverse_map_t(t, &iv).unwrap(), &iv).unwrap();
            prop_assert!(rel(t2, t) < 1e-10);
        }

        #[test]
        fn verify_sigma1_matches_inverse(re in -20.0f64..20.0, im in -20.0f64..20.0, a in 0.001f64..10.0, w in 0.001f64..90.0) {
            let iv = SpectralInterval::new(a, a + w).unwrap();
            let p = solve_p(&iv);
            let t = c(re, im);
            let direct = verify_sigma1(t, &p).unwrap();
            let inv = inverse_map_t(t, &iv).unwrap();
            prop_assert!(rel(direct, inv) < 1e-10, "{direct} vs {inv}");
        }

        #[test]
        fn cross_ratio_preserved(pts in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4), a in 0.01f64..2.0, w in 0.1f64..10.0) {
            let iv = SpectralInterval::new(a, a + w).unwrap();
            let z: Vec<Complex64> = pts.iter().map(|&(r, i)| c(r, i)).collect();
            for i in 0..4 { for j in 0..i { prop_assume!((z[i] - z[j]).norm() > 0.1); } }
            for p in &z { prop_assume!((p + iv.beta()).norm() > 0.1); }
            let before = cross_ratio(z[0], z[1], z[2], z[3]);
            let m: Vec<Complex64> = z.iter().map(|&p| map_t(p, &iv).unwrap()).collect();
            let after = cross_ratio(m[0], m[1], m[2], m[3]);
            prop_assert!(rel(after, before) < 1e-10);
        }

        #[test]
        fn em_sub_rate_below_one_in_right_half_plane(re in 1e-6f64..100.0, im in -100.0f64..100.0, a in 0.001f64..10.0, w in 0.001f64..90.0) {
            let iv = SpectralInterval::new(a, a + w).unwrap();
            let z = map_z(SchemeKind::EyreMiltonSub, c(re, im), Some(&iv)).unwrap();
            prop_assert!(z.norm() < 1.0);
        }

        #[test]
        fn resistor_map_keeps_positive_axis_positive(s in 0.0f64..1e6, k1 in 0.01f64..10.0, k2 in 0.01f64..10.0, k3 in 0.01f64..10.0) {
            let m = resistor_substitution_map(c(s, 0.0), k1, k2, k3, 1.0).unwrap();
            prop_assert!(m.re > 0.0 && m.im == 0.0);
        }
    }

    #[test]
    fn map_t_monotone_in_alpha_and_beta() {
        for s in [1.5, 2.0, 5.0, 10.0, 100.0] {
            let beta = 4.0;
            let ts: Vec<f64> = (1..40)
                .map(|k| k as f64 * beta / 40.0)
                .map(|a| map_t(c(s, 0.0), &SpectralInterval::new(a, beta).unwrap()).unwrap().re)
                .collect();
            assert!(ts.windows(2).all(|w| w[1] < w[0]), "t not decreasing in alpha at sigma1={s}");
            let alpha = 0.25;
            let ts: Vec<f64> = (1..40)
                .map(|k| alpha + k as f64 * 0.5)
                .map(|b| map_t(c(s, 0.0), &SpectralInterval::new(alpha, b).unwrap()).unwrap().re)
                .collect();
            assert!(ts.windows(2).all(|w| w[1] > w[0]), "t not increasing in beta at sigma1={s}");
        }
    }

    #[test]
    fn local_system_rows_vanish() {
        let iv = SpectralInterval::new(0.2, 9.0).unwrap();
        let p = solve_p(&iv);
        for s in [c(0.0, 0.0), c(2.0, 0.0), c(0.5, 0.5)] {
            let t = map_t(s, &iv).unwrap();
            let r = local_system_residuals(t, s, &p).unwrap();
            assert!(r.iter().all(|&x| x < 1e-13), "{r:?}");
        }
    }
}
