//! Fixed-seed invariant suites behind the `selftest` command.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{build_square_array, PhaseMap};
use crate::solvers::{lift_solution, solve, SolverConfig};
use crate::spectral_ops::{apply_chi_aug, apply_local_a, gamma1_aug, AugmentedField, GradientProjection, VectorField};
use crate::transform::{
    inverse_map_t, local_system_residuals, map_t, solve_p, verify_sigma1, SchemeKind, SpectralInterval,
};

const SEED: u64 = 0x5eed;
pub const SELFTEST_GRID: usize = 32;

/// One named invariant with the largest violation seen and its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub max_err: f64,
    pub bound: f64,
}

impl Check {
    fn new(name: &'static str, bound: f64, errs: impl IntoIterator<Item = f64>) -> Self {
        // NaN must fail, so fold with a comparison that propagates it
        let max_err = errs.into_iter().fold(0.0, |m: f64, e| if e > m || e.is_nan() { e } else { m });
        Self { name, max_err, bound }
    }

    pub fn passed(&self) -> bool {
        self.max_err <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = if c.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{:<26} {verdict}  max_err {:.3e}  bound {:.0e}", c.name, c.max_err, c.bound);
        }
        let n_fail = self.failures().len();
        let _ = writeln!(out, "{} of {} invariants passed", self.checks.len() - n_fail, self.checks.len());
        out
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Random `sigma1` with nonnegative real part and an interval with
/// `0 < alpha < beta <= 100`.
pub fn draw_case(rng: &mut ChaCha8Rng) -> (Complex64, SpectralInterval) {
    let sigma1 = Complex64::new(rng.gen_range(0.0..100.0), rng.gen_range(-100.0..100.0));
    let mut a: f64 = rng.gen_range(1e-3..100.0);
    let mut b: f64 = rng.gen_range(1e-3..100.0);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    if b - a < 1e-3 {
        b = (a + 1e-3).min(100.0);
        a = b - 1e-3;
    }
    (sigma1, SpectralInterval::new(a, b).expect("ordered draw"))
}

/// Transform identities over `draws` random cases.
pub fn algebraic_suite(draws: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut trip, mut recov, mut verify, mut rows) = (vec![], vec![], vec![], vec![]);
    for _ in 0..draws {
        let (s, iv) = draw_case(&mut rng);
        let params = solve_p(&iv);
        let t = match map_t(s, &iv) {
            Ok(t) => t,
            Err(_) => {
                trip.push(f64::NAN);
                continue;
            }
        };
        let round = inverse_map_t(t, &iv).and_then(|back| map_t(back, &iv));
        trip.push(round.map_or(f64::NAN, |t2| rel(t2, t)));
        let (ra, rb) = params.recovered_interval();
        recov.push(rel(ra, Complex64::new(iv.alpha(), 0.0)).max(rel(rb, Complex64::new(iv.beta(), 0.0))));
        // compared at one t: rounding t itself costs up to
        // |sigma1 + beta| / (beta - alpha) ulps in sigma1
        let Ok(back) = inverse_map_t(t, &iv) else {
            verify.push(f64::NAN);
            continue;
        };
        verify.push(verify_sigma1(t, &params).map_or(f64::NAN, |v| rel(v, back)));
        rows.push(
            local_system_residuals(t, back, &params)
                .map_or(f64::NAN, |r| r.iter().fold(0.0, |m: f64, &x| m.max(x)) / back.norm().max(1.0)),
        );
    }
    vec![
        Check::new("t_round_trip", 1e-12, trip),
        Check::new("interval_recovery", 1e-12, recov),
        Check::new("verify_sigma1", 1e-12, verify),
        Check::new("local_system_rows", 1e-12, rows),
    ]
}

fn random_field(rng: &mut ChaCha8Rng, n: usize) -> VectorField {
    VectorField::from_fn(n, n, |_, _| {
        [
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ]
    })
}

fn random_aug(rng: &mut ChaCha8Rng, map: &PhaseMap) -> AugmentedField {
    let n = map.nx();
    let mut f = AugmentedField { q: random_field(rng, n), s: random_field(rng, n), t: random_field(rng, n) };
    f.enforce_support(map);
    f
}

fn gap(a: &VectorField, b: &VectorField) -> f64 {
    let mut d = a.clone();
    d.add_scaled(Complex64::new(-1.0, 0.0), b);
    d.norm()
}

fn aug_gap(a: &AugmentedField, b: &AugmentedField, map: &PhaseMap) -> f64 {
    let mut d = a.clone();
    d.add_scaled(Complex64::new(-1.0, 0.0), b);
    d.norm(map)
}

/// Projection and local-operator identities on `SELFTEST_GRID`-sided random
/// fields, `proj` standing in for `Gamma1`.
pub fn operator_suite(proj: &dyn GradientProjection) -> Vec<Check> {
    let n = SELFTEST_GRID;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let map = build_square_array(n, 0.5).expect("benchmark geometry");
    let iv = SpectralInterval::square_array_widened();
    let params = solve_p(&iv);

    let (mut idem, mut adj, mut mean) = (vec![], vec![], vec![]);
    for _ in 0..4 {
        let f = random_field(&mut rng, n);
        let g = random_field(&mut rng, n);
        let pf = proj.gamma1(&f);
        idem.push(gap(&proj.gamma1(&pf), &pf) / f.norm());
        adj.push((pf.inner(&g) - f.inner(&proj.gamma1(&g))).norm() / (f.norm() * g.norm()));
        let m = pf.mean();
        mean.push(m[0].norm().max(m[1].norm()) / f.norm());
    }

    let (mut aidem, mut acomp, mut chi) = (vec![], vec![], vec![]);
    for _ in 0..4 {
        let f = random_aug(&mut rng, &map);
        let scale = f.norm(&map);
        match gamma1_aug(proj, &f, &map) {
            Ok(once) => {
                let twice = gamma1_aug(proj, &once, &map).map_or(f64::NAN, |t| aug_gap(&t, &once, &map));
                aidem.push(twice / scale);
                let expect_q = proj.gamma1(&f.q);
                acomp.push((gap(&once.q, &expect_q) + gap(&once.s, &f.s) + once.t.norm()) / scale);
            }
            Err(_) => {
                aidem.push(f64::NAN);
                acomp.push(f64::NAN);
            }
        }
        let c1 = apply_chi_aug(&f, &params, &map);
        let c2 = apply_chi_aug(&c1, &params, &map);
        chi.push(aug_gap(&c2, &c1, &map) / scale);
    }

    // construction identity from a converged original-space solution
    let s1 = Complex64::new(2.0, 0.0);
    let (mut law, mut e_sub, mut j_sub) = (vec![], vec![], vec![]);
    let cfg = SolverConfig::new(SchemeKind::Basic, s1).with_tol(1e-13).with_max_iters(400);
    match solve(&map, &cfg) {
        Ok(r) => {
            let t = map_t(s1, &iv).expect("t at sigma1 = 2");
            if let Ok((le, lj)) = lift_solution(&r.e_field, &r.j_field, t, &params, &map) {
                let scale = lj.norm(&map);
                law.push(aug_gap(&apply_local_a(&le, t, &params, &map), &lj, &map) / scale);
                let mut fluct = le.clone();
                let m = fluct.q.mean();
                fluct.q.add_scaled(Complex64::new(-1.0, 0.0), &VectorField::constant(n, n, m));
                // E'' minus its mean lies in E''
                e_sub.push(gamma1_aug(proj, &fluct, &map).map_or(f64::NAN, |g| aug_gap(&g, &fluct, &map)) / le.norm(&map));
                // J'' lies in U'' + J''
                j_sub.push(gamma1_aug(proj, &lj, &map).map_or(f64::NAN, |g| g.norm(&map)) / scale);
            } else {
                law.push(f64::NAN);
            }
        }
        Err(_) => law.push(f64::NAN),
    }

    vec![
        Check::new("gamma1_idempotent", 1e-10, idem),
        Check::new("gamma1_self_adjoint", 1e-10, adj),
        Check::new("gamma1_zero_mean", 1e-10, mean),
        Check::new("gamma1_aug_idempotent", 1e-10, aidem),
        Check::new("gamma1_aug_components", 1e-10, acomp),
        Check::new("chi_aug_idempotent", 1e-10, chi),
        Check::new("lift_local_law", 1e-10, law),
        Check::new("lift_e_in_gradient_space", 1e-10, e_sub),
        Check::new("lift_j_in_flux_space", 1e-10, j_sub),
    ]
}

pub fn selftest_with(proj: &dyn GradientProjection) -> SelftestReport {
    let mut checks = algebraic_suite(1000);
    checks.extend(operator_suite(proj));
    SelftestReport { checks }
}
