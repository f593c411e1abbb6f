//! Acceptance criteria 1 to 9, one verdict line each.
//!
//! Expected values come from closed forms evaluated here, not from the
//! library's own reference functions.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subspace_fft::analysis::{predicted_rate, RATE_WINDOW};
use subspace_fft::geometry::{build_square_array, PhaseMap};
use subspace_fft::solvers::{estimate_rate, extract_sigma_star, extract_sigma_star_aug, lift_solution, solve, SolveResult, SolverConfig, Status};
use subspace_fft::spectral_ops::{
    apply_chi_aug, apply_local_a, gamma1_aug, AugmentedField, FourierProjector, GradientProjection, VectorField,
};
use subspace_fft::transform::{
    aux_constants, inverse_map_t, map_t, resistor_substitution_map, solve_p, verify_sigma1, SchemeKind,
    SpectralInterval,
};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn timed(map: &PhaseMap, cfg: &SolverConfig) -> (Result<SolveResult, String>, Duration) {
    let start = Instant::now();
    let r = solve(map, cfg).map_err(|e| e.to_string());
    (r, start.elapsed())
}

fn widened() -> SpectralInterval {
    SpectralInterval::new(0.25, 4.0).unwrap()
}

fn criterion_1() -> Verdict {
    let exact = (7.0f64 / 5.0).sqrt();
    let map = build_square_array(128, 0.5).unwrap();
    let mut stars = vec![];
    let mut notes = vec![];
    let mut pass = true;
    for scheme in SchemeKind::ALL {
        let cfg = SolverConfig::new(scheme, c(2.0, 0.0)).with_interval(widened()).with_tol(1e-10);
        let (r, dt) = timed(&map, &cfg);
        match r {
            Ok(r) => {
                let err = (r.sigma_star - exact).norm();
                pass &= r.status == Status::Converged && err <= 1e-2 && dt.as_secs_f64() <= 30.0;
                notes.push(format!("{scheme} {:.8} ({:.2}s)", r.sigma_star.re, dt.as_secs_f64()));
                stars.push(r.sigma_star);
            }
            Err(e) => {
                pass = false;
                notes.push(format!("{scheme} error {e}"));
            }
        }
    }
    let spread = stars
        .iter()
        .flat_map(|a| stars.iter().map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    pass &= spread <= 1e-6;
    verdict(pass, format!("exact {exact:.8}; {}; max pairwise gap {spread:.2e}", notes.join(", ")))
}

/// The sigma1 = 0 runs shared by criteria 2 to 4.
struct ZeroContrast {
    runs: Vec<(SchemeKind, Result<SolveResult, String>)>,
}

impl ZeroContrast {
    fn run() -> Self {
        let map = build_square_array(128, 0.5).unwrap();
        let runs = SchemeKind::ALL
            .iter()
            .map(|&k| {
                let cfg = SolverConfig::new(k, ZERO).with_interval(widened()).with_tol(1e-8).with_max_iters(200);
                (k, solve(&map, &cfg).map_err(|e| e.to_string()))
            })
            .collect();
        Self { runs }
    }

    fn get(&self, k: SchemeKind) -> &Result<SolveResult, String> {
        &self.runs.iter().find(|(s, _)| *s == k).unwrap().1
    }
}

fn criterion_2(z: &ZeroContrast) -> Verdict {
    let exact = 1.0 / 3f64.sqrt();
    match z.get(SchemeKind::EyreMiltonSub) {
        Ok(r) => {
            let err = (r.sigma_star - exact).norm();
            let pass = r.status == Status::Converged && r.iterations() <= 80 && err <= 2e-2;
            verdict(
                pass,
                format!(
                    "em_sub {:?} in {} iterations (cap 80), sigma* {:.8} vs {exact:.8}, error {err:.2e}",
                    r.status,
                    r.iterations(),
                    r.sigma_star.re
                ),
            )
        }
        Err(e) => verdict(false, format!("em_sub error {e}")),
    }
}

fn criterion_3(z: &ZeroContrast) -> Verdict {
    let rate = |k| z.get(k).as_ref().ok().and_then(|r| estimate_rate(&r.history, RATE_WINDOW).ok());
    let em = rate(SchemeKind::EyreMiltonSub);
    let basic = rate(SchemeKind::BasicSub);
    let em_ok = em.is_some_and(|r| (0.23..=0.43).contains(&r));
    let basic_ok = basic.is_some_and(|r| (0.50..=0.70).contains(&r));
    let show = |r: Option<f64>| r.map_or("none".into(), |v| format!("{v:.4}"));
    verdict(
        em_ok && basic_ok,
        format!(
            "em_sub rate {} in [0.23, 0.43]: {em_ok}; basic_sub rate {} in [0.50, 0.70]: {basic_ok}",
            show(em),
            show(basic)
        ),
    )
}

fn criterion_4(z: &ZeroContrast) -> Verdict {
    let reached = |k, level| match z.get(k) {
        Ok(r) => r.history.first_below(level),
        Err(_) => None,
    };
    let describe = |k: SchemeKind, level: f64| match z.get(k) {
        Ok(r) => match r.history.first_below(level) {
            Some(i) => format!("{k} reaches {level:e} at {i}"),
            None => format!("{k} misses {level:e} in {}", r.iterations()),
        },
        Err(e) => format!("{k} does not run ({e})"),
    };
    let baselines_fail = reached(SchemeKind::Basic, 1e-3).is_none() && reached(SchemeKind::EyreMilton, 1e-3).is_none();
    let basic_sub = reached(SchemeKind::BasicSub, 1e-8);
    let em_sub = reached(SchemeKind::EyreMiltonSub, 1e-8);
    let subs_reach = basic_sub.is_some() && em_sub.is_some();
    let ordered = matches!((em_sub, basic_sub), (Some(a), Some(b)) if a < b);
    verdict(
        baselines_fail && subs_reach && ordered,
        format!(
            "{}; {}; {}; {}",
            describe(SchemeKind::Basic, 1e-3),
            describe(SchemeKind::EyreMilton, 1e-3),
            describe(SchemeKind::BasicSub, 1e-8),
            describe(SchemeKind::EyreMiltonSub, 1e-8)
        ),
    )
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_905);
    let (mut trip, mut recov, mut verify, mut rows) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut failures = 0usize;
    for _ in 0..1000 {
        let s = c(rng.gen_range(0.0..100.0), rng.gen_range(-100.0..100.0));
        let (mut a, mut b): (f64, f64) = (rng.gen_range(1e-3..100.0), rng.gen_range(1e-3..100.0));
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        if b - a < 1e-3 {
            continue;
        }
        let iv = SpectralInterval::new(a, b).unwrap();
        let p = solve_p(&iv);
        let Ok(t) = map_t(s, &iv) else {
            failures += 1;
            continue;
        };
        let Ok(back) = inverse_map_t(t, &iv) else {
            failures += 1;
            continue;
        };
        trip = trip.max(rel(map_t(back, &iv).unwrap(), t));
        // alpha, beta from the squares of p
        let (q1, q2) = (p.p1 * p.p1, p.p2 * p.p2);
        let alpha = -1.0 - q1 / (q2 - 1.0);
        let beta = -1.0 - q1 / q2;
        recov = recov.max(rel(alpha, c(a, 0.0))).max(rel(beta, c(b, 0.0)));
        // verify_sigma1 and the inverse map at the same floating t
        verify = verify.max(rel(verify_sigma1(t, &p).unwrap(), back));
        let (e2, j3) = aux_constants(t, &p).unwrap();
        let pe = p.p1 + p.p2 * e2;
        let r = [
            (t - 1.0) * p.p1 * pe + 1.0 - back,
            (t - 1.0) * p.p2 * pe + e2,
            (t - 1.0) * p.p3 * pe - j3,
        ];
        let scale = back.norm().max(1.0);
        rows = rows.max(r.iter().map(|x| x.norm() / scale).fold(0.0, f64::max));
    }
    let dt = start.elapsed().as_secs_f64();
    let worst = trip.max(recov).max(verify).max(rows);
    verdict(
        worst <= 1e-12 && failures == 0 && dt <= 1.0,
        format!(
            "round trip {trip:.1e}, interval recovery {recov:.1e}, verify {verify:.1e}, local rows {rows:.1e}, {failures} map failures, {dt:.3}s"
        ),
    )
}

fn random_field(rng: &mut ChaCha8Rng, n: usize) -> VectorField {
    VectorField::from_fn(n, n, |_, _| {
        [c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))]
    })
}

fn minus(a: &VectorField, b: &VectorField) -> VectorField {
    let mut d = a.clone();
    d.add_scaled(c(-1.0, 0.0), b);
    d
}

fn aug_minus(a: &AugmentedField, b: &AugmentedField) -> AugmentedField {
    let mut d = a.clone();
    d.add_scaled(c(-1.0, 0.0), b);
    d
}

fn criterion_6() -> Verdict {
    let n = 32;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let map = build_square_array(n, 0.5).unwrap();
    let proj = FourierProjector::new(n, n);
    let p = solve_p(&widened());
    let mut worst: Vec<(&str, f64)> = vec![];
    let mut note = |name, v: f64| match worst.iter_mut().find(|(k, _)| *k == name) {
        Some(e) => e.1 = e.1.max(v),
        None => worst.push((name, v)),
    };
    for _ in 0..3 {
        let f = random_field(&mut rng, n);
        let g = random_field(&mut rng, n);
        let pf = proj.gamma1(&f);
        note("gamma1 idempotent", minus(&proj.gamma1(&pf), &pf).norm() / f.norm());
        note("gamma1 self-adjoint", (pf.inner(&g) - f.inner(&proj.gamma1(&g))).norm() / (f.norm() * g.norm()));
        let m = pf.mean();
        note("gamma1 zero mean", m[0].norm().max(m[1].norm()));

        let mut aug = AugmentedField { q: random_field(&mut rng, n), s: random_field(&mut rng, n), t: random_field(&mut rng, n) };
        aug.enforce_support(&map);
        let scale = aug.norm(&map);
        let once = gamma1_aug(&proj, &aug, &map).unwrap();
        let twice = gamma1_aug(&proj, &once, &map).unwrap();
        note("gamma1'' idempotent", aug_minus(&twice, &once).norm(&map) / scale);
        let comp = minus(&once.q, &proj.gamma1(&aug.q)).norm() + minus(&once.s, &aug.s).norm() + once.t.norm();
        note("gamma1'' components", comp / scale);
        let chi1 = apply_chi_aug(&aug, &p, &map);
        let chi2 = apply_chi_aug(&chi1, &p, &map);
        note("chi'' idempotent", aug_minus(&chi2, &chi1).norm(&map) / scale);
    }
    let pp = p.p1 * p.p1 + p.p2 * p.p2 + p.p3 * p.p3;
    note("p.p = 1", (pp - 1.0).norm());

    let s1 = c(2.0, 0.0);
    let r = solve(&map, &SolverConfig::new(SchemeKind::Basic, s1).with_tol(1e-12)).unwrap();
    let t = map_t(s1, &widened()).unwrap();
    let (le, lj) = lift_solution(&r.e_field, &r.j_field, t, &p, &map).unwrap();
    note("J'' = A E''", aug_minus(&apply_local_a(&le, t, &p, &map), &lj).norm(&map) / lj.norm(&map));
    let direct = extract_sigma_star(&r.e_field, &map, s1).unwrap();
    note("lifted sigma*", (extract_sigma_star_aug(&le, t, &p, &map).unwrap() - direct).norm());

    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let detail = worst.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect::<Vec<_>>().join(", ");
    verdict(max <= 1e-10, detail)
}

fn criterion_7() -> Verdict {
    let map = build_square_array(128, 0.5).unwrap();
    let run = |a: f64, b: f64| {
        let cfg = SolverConfig::new(SchemeKind::EyreMiltonSub, ZERO)
            .with_interval(SpectralInterval::new(a, b).unwrap())
            .with_tol(1e-6)
            .with_max_iters(500);
        solve(&map, &cfg)
    };
    match (run(0.6, 4.0), run(0.25, 4.0)) {
        (Ok(off), Ok(good)) => {
            let r_off = estimate_rate(&off.history, RATE_WINDOW).ok();
            let r_good = estimate_rate(&good.history, RATE_WINDOW).ok();
            let slower = matches!((r_off, r_good), (Some(x), Some(y)) if x > y);
            let pass = off.status == Status::Converged && off.iterations() <= 500 && slower;
            verdict(
                pass,
                format!(
                    "(0.6, 4): {:?} in {} iterations, rate {:?}; (1/4, 4): rate {:?}",
                    off.status,
                    off.iterations(),
                    r_off.map(|v| (v * 1e4).round() / 1e4),
                    r_good.map(|v| (v * 1e4).round() / 1e4)
                ),
            )
        }
        (a, b) => verdict(false, format!("solver error: {:?} / {:?}", a.err(), b.err())),
    }
}

fn criterion_8() -> Verdict {
    let rate = |s: f64, a: f64, b: f64| {
        predicted_rate(SchemeKind::EyreMiltonSub, c(s, 0.0), Some(&SpectralInterval::new(a, b).unwrap())).unwrap()
    };
    let mut pass = true;
    let mut notes = vec![];
    for s in [2.0, 5.0, 10.0] {
        let (lo_a, hi_a) = (rate(s, 0.05, 4.0), rate(s, 0.25, 4.0));
        let (wide_b, narrow_b) = (rate(s, 0.25, 10.0), rate(s, 0.25, 4.0));
        pass &= hi_a < lo_a && narrow_b < wide_b;
        notes.push(format!("sigma1 {s}: alpha {lo_a:.4} -> {hi_a:.4}, beta {wide_b:.4} -> {narrow_b:.4}"));
    }
    verdict(pass, notes.join("; "))
}

fn criterion_9() -> Verdict {
    let oracle = |s: f64| if s.is_infinite() { 1.0 } else { (s + 1.0) / (s + 2.0) };
    let mut pass = true;
    let mut notes = vec![];
    for s in [0.0, 1.0, f64::INFINITY] {
        let got = resistor_substitution_map(c(s, 0.0), 1.0, 1.0, 1.0, 1.0).unwrap();
        pass &= (got - oracle(s)).norm() <= 1e-14;
        notes.push(format!("{s} -> {:.6}", got.re));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut positive = 0;
    for _ in 0..1000 {
        let s: f64 = rng.gen_range(0.0..=1e6);
        let got = resistor_substitution_map(c(s, 0.0), 1.0, 1.0, 1.0, 1.0).unwrap();
        if got.im == 0.0 && got.re > 0.0 && (got.re - oracle(s)).abs() <= 1e-14 {
            positive += 1;
        }
    }
    pass &= positive == 1000;
    verdict(pass, format!("{}; {positive}/1000 samples positive real", notes.join(", ")))
}

fn main() -> ExitCode {
    let zero = ZeroContrast::run();
    let results = [
        criterion_1(),
        criterion_2(&zero),
        criterion_3(&zero),
        criterion_4(&zero),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ];
    for (i, v) in results.iter().enumerate() {
        println!("criterion {} {}: {}", i + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    let failed = results.iter().filter(|v| !v.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
