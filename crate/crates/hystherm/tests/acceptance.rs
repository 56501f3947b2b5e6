//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use hystherm_core::hysteresis::{
    play_bouligand_evaluate, play_evaluate, play_newton_apply, PlayConfig, ScalarSignal,
};
use hystherm_core::verification::estimates::{energy_growth_rate, fit_log_growth};
use hystherm_core::verification::{
    check_estimates, check_first_order_estimates, check_max_principle, run_remainder_study, semismooth_newton_solve,
    EstimateSource, NewtonOptions, DEFAULT_LADDER,
};
use hystherm_core::{
    Boundary, BoundarySpec, DerivativeMode, Forcing, Problem, SolverParams, SpaceTimeField, SpatialMesh, TimeGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: usize = 10_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("play oracle suite", play_oracles),
        ("derivative oracle suite", derivative_oracles),
        ("heat solver convergence and maximum principle", heat_solver),
        ("sup-norm estimate", linf_estimate),
        ("energy estimate", energy_estimate),
        ("remainder decay", remainder_decay),
        ("first-order estimates", first_order_estimates),
        ("semismooth Newton", newton),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.passed {
            failures += 1;
        }
        println!(
            "criterion {}: {} - {name}: {}",
            n + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- helpers

fn signal(v: &[f64]) -> ScalarSignal {
    ScalarSignal::on_unit_interval(v.to_vec()).unwrap()
}

fn play(v: &[f64], cfg: &PlayConfig) -> Vec<f64> {
    play_evaluate(&signal(v), cfg).unwrap().into_values()
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn prefix_sup(v: &[f64], m: usize) -> f64 {
    v[..=m].iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Multiples of 2^-10: every operation of the play on these is exact.
fn dyadic(rng: &mut ChaCha8Rng, range: i32) -> f64 {
    rng.random_range(-range..=range) as f64 / 1024.0
}

fn dyadic_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| dyadic(rng, 4096)).collect()
}

fn dyadic_cfg(rng: &mut ChaCha8Rng) -> PlayConfig {
    PlayConfig::new(rng.random_range(1..=2048) as f64 / 1024.0, dyadic(rng, 3000)).unwrap()
}

fn desk_problem(n_x: usize, n_t: usize, r: f64, bc: BoundarySpec) -> Problem {
    Problem::new(
        SpatialMesh::new(1.0, n_x).unwrap(),
        TimeGrid::new(1.0, n_t).unwrap(),
        bc,
        PlayConfig::new(r, 0.0).unwrap(),
        Forcing::Play,
        SolverParams::default(),
    )
    .unwrap()
}

fn dirichlet_neumann() -> BoundarySpec {
    BoundarySpec::new(Boundary::Dirichlet, Boundary::Neumann).unwrap()
}

fn sine_control(p: &Problem, amp: f64) -> SpaceTimeField {
    SpaceTimeField::from_fn(p.mesh, p.grid, |x, _| amp * (PI * x).sin())
}

fn desk_direction(p: &Problem) -> SpaceTimeField {
    SpaceTimeField::from_fn(p.mesh, p.grid, |x, t| (2.0 * PI * x).sin() * t)
}

// ------------------------------------------------------------ criterion 1

fn play_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = Vec::new();
    for case in 0..CASES {
        let n = rng.random_range(2..48);
        let cfg = dyadic_cfg(&mut rng);
        let v = dyadic_vec(&mut rng, n);
        let vt = dyadic_vec(&mut rng, n);
        let w = play(&v, &cfg);
        let wt = play(&vt, &cfg);
        let din: Vec<f64> = v.iter().zip(&vt).map(|(a, b)| a - b).collect();
        let dout: Vec<f64> = w.iter().zip(&wt).map(|(a, b)| a - b).collect();
        for m in 0..n {
            if prefix_sup(&dout, m) > cfg.lipschitz() * prefix_sup(&din, m) {
                bad.push(format!("lipschitz case {case}"));
            }
            if w[m].abs() > cfg.lipschitz() * prefix_sup(&v, m) + cfg.growth() {
                bad.push(format!("growth case {case}"));
            }
        }
        let cut = rng.random_range(1..n);
        if play(&v[..=cut], &cfg)[..] != w[..=cut] {
            bad.push(format!("causality case {case}"));
        }
        let mut stretched = Vec::new();
        let mut expected = Vec::new();
        for k in 0..n {
            for _ in 0..rng.random_range(1..4) {
                stretched.push(v[k]);
                expected.push(w[k]);
            }
        }
        if play(&stretched, &cfg) != expected {
            bad.push(format!("rate independence case {case}"));
        }
    }

    // fine-grid oracle: monotone piecewise-linear resampling of a coarse signal
    let mut refine_cases = 0;
    for case in 0..1000 {
        let coarse: Vec<f64> = (0..16).map(|_| rng.random_range(-3.0..3.0)).collect();
        let cfg = PlayConfig::new(rng.random_range(0.05..1.5), rng.random_range(-1.0..1.0)).unwrap();
        let sub = 17;
        let mut fine = Vec::new();
        for s in coarse.windows(2) {
            let (lo, hi) = (s[0].min(s[1]), s[0].max(s[1]));
            for j in 0..sub {
                fine.push((s[0] + (s[1] - s[0]) * (j as f64 / sub as f64)).clamp(lo, hi));
            }
        }
        fine.push(coarse[15]);
        let wc = play(&coarse, &cfg);
        let wf = play(&fine, &cfg);
        if (0..16).any(|k| wc[k] != wf[sub * k]) {
            bad.push(format!("refinement case {case}"));
        }
        refine_cases += 1;
    }
    outcome(
        bad.is_empty(),
        format!(
            "{CASES} dyadic cases (Lipschitz, growth, causality, rate independence) and {refine_cases} refinement cases, {} violations{}",
            bad.len(),
            bad.first().map(|b| format!(", first: {b}")).unwrap_or_default()
        ),
    )
}

// ------------------------------------------------------------ criterion 2

/// Smallest nonzero distance of the base memory to either clamp boundary.
fn min_gap(v: &[f64], base: &[f64], cfg: &PlayConfig) -> f64 {
    let r = cfg.radius();
    let mut gap = f64::INFINITY;
    let mut prev = cfg.w_init();
    for k in 0..v.len() {
        for g in [prev - (v[k] - r), (v[k] + r) - prev] {
            if g != 0.0 {
                gap = gap.min(g.abs());
            }
        }
        prev = base[k];
    }
    gap
}

fn derivative_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let eighth = |n: i32| n as f64 / 8.0;
    let mut quotient_fail = 0;
    let mut ties = 0;
    let mut min_threshold = f64::INFINITY;
    for _ in 0..CASES {
        let n = rng.random_range(2..=8);
        let cfg = PlayConfig::new(eighth(rng.random_range(1..=8)), eighth(rng.random_range(-8..=8))).unwrap();
        let v: Vec<f64> = (0..n).map(|_| eighth(rng.random_range(-16..=16))).collect();
        let eta: Vec<f64> = (0..n).map(|_| eighth(rng.random_range(-16..=16))).collect();
        let d = play_bouligand_evaluate(&signal(&v), &signal(&eta), &cfg)
            .unwrap()
            .into_values();
        let base = play(&v, &cfg);
        let eta_sup = prefix_sup(&eta, n - 1);
        let threshold = if eta_sup == 0.0 {
            f64::INFINITY
        } else {
            min_gap(&v, &base, &cfg) / (2.0 * eta_sup)
        };
        min_threshold = min_threshold.min(threshold);
        let exact_at = |j: i32| {
            let lam = (2.0f64).powi(-j);
            let pert: Vec<f64> = v.iter().zip(&eta).map(|(a, e)| a + lam * e).collect();
            let wp = play(&pert, &cfg);
            (0..n).all(|k| (wp[k] - base[k]) / lam == d[k])
        };
        // brute force over lambda = 2^-j, j = 0..=40
        let mut tail = 40;
        while tail > 0 && exact_at(tail - 1) {
            tail -= 1;
        }
        if !exact_at(40) || (0..=40).any(|j| (2.0f64).powi(-j) < threshold && j < tail) {
            quotient_fail += 1;
        }
        let mut prev = cfg.w_init();
        for k in 0..n {
            if prev == v[k] - cfg.radius() || prev == v[k] + cfg.radius() {
                ties += 1;
            }
            prev = base[k];
        }
    }

    let mut bound_fail = 0;
    for _ in 0..CASES {
        let n = rng.random_range(2..40);
        let cfg = dyadic_cfg(&mut rng);
        let v = dyadic_vec(&mut rng, n);
        let eta = dyadic_vec(&mut rng, n);
        let zeta = dyadic_vec(&mut rng, n);
        let de = play_bouligand_evaluate(&signal(&v), &signal(&eta), &cfg).unwrap().into_values();
        let dz = play_bouligand_evaluate(&signal(&v), &signal(&zeta), &cfg).unwrap().into_values();
        let me = play_newton_apply(&signal(&v), &signal(&eta), &cfg).unwrap().into_values();
        let dd: Vec<f64> = de.iter().zip(&dz).map(|(a, b)| a - b).collect();
        let di: Vec<f64> = eta.iter().zip(&zeta).map(|(a, b)| a - b).collect();
        for m in 0..n {
            if prefix_sup(&me, m) > prefix_sup(&eta, m)
                || prefix_sup(&de, m) > prefix_sup(&eta, m)
                || prefix_sup(&dd, m) > prefix_sup(&di, m)
            {
                bound_fail += 1;
                break;
            }
        }
    }
    outcome(
        quotient_fail == 0 && bound_fail == 0 && ties > 0,
        format!(
            "difference quotients exact below threshold in {}/{CASES} cases ({ties} ties, smallest threshold {min_threshold:.3e}); derivative bounds violated in {bound_fail}/{CASES} cases",
            CASES - quotient_fail
        ),
    )
}

// ------------------------------------------------------------ criterion 3

fn heat_error(n_x: usize, n_t: usize) -> f64 {
    let p = Problem::new(
        SpatialMesh::new(1.0, n_x).unwrap(),
        TimeGrid::new(0.1, n_t).unwrap(),
        BoundarySpec::dirichlet(),
        PlayConfig::new(0.4, 0.0).unwrap(),
        Forcing::Off,
        SolverParams::default(),
    )
    .unwrap();
    let mut y0: Vec<f64> = (0..n_x).map(|i| (PI * p.mesh.coord(i)).sin()).collect();
    y0[0] = 0.0;
    y0[n_x - 1] = 0.0;
    let (y, _) = p.solve_state(&p.zeros(), &y0).unwrap();
    let exact = SpaceTimeField::from_fn(p.mesh, p.grid, |x, t| (-PI * PI * t).exp() * (PI * x).sin());
    y.sub(&exact).max_abs()
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn heat_solver() -> Outcome {
    let dt_err: Vec<f64> = [11, 21, 41].iter().map(|&n_t| heat_error(1025, n_t)).collect();
    let dx_err: Vec<f64> = [9, 17, 33].iter().map(|&n_x| heat_error(n_x, 100_001)).collect();
    let (dt_ord, dx_ord) = (orders(&dt_err), orders(&dx_err));
    let orders_ok = dt_ord.iter().all(|&o| o >= 0.9) && dx_ord.iter().all(|&o| o >= 1.8);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let specs = [
        BoundarySpec::dirichlet(),
        dirichlet_neumann(),
        BoundarySpec::new(Boundary::Neumann, Boundary::Dirichlet).unwrap(),
    ];
    let mut violations = 0;
    for case in 0..100 {
        let bc = specs[case % 3];
        let p = desk_problem(65, 129, 0.4, bc).with_forcing(Forcing::Off);
        let lo = if case % 2 == 0 { 0.0 } else { -1.0 };
        let z0: Vec<f64> = (0..65)
            .map(|i| if bc.is_dirichlet_node(i, 65) { 0.0 } else { rng.random_range(lo..1.0) })
            .collect();
        let report = check_max_principle(&p, &z0).unwrap();
        if !report.passed() || (lo == 0.0 && !report.nonnegative_data) {
            violations += 1;
        }
    }
    outcome(
        orders_ok && violations == 0,
        format!(
            "dt orders {dt_ord:.3?} (>= 0.9), dx orders {dx_ord:.3?} (>= 1.8); max principle violations {violations}/100"
        ),
    )
}

// ------------------------------------------------------------ criterion 4

fn linf_estimate() -> Outcome {
    let p = desk_problem(129, 257, 0.4, BoundarySpec::dirichlet());
    let f = p.zeros().map(|_| 1.0);
    let (_, linf) = check_estimates(&p, &f, &[0.0; 129], EstimateSource::PlayDriven).unwrap();
    let bound = (p.play.lipschitz() * 1.0).exp() + 0.1;
    outcome(
        linf.is_consistent() && linf.constant() <= bound,
        format!("C2 = {:.4} <= e^(LT) + 0.1 = {bound:.4}", linf.constant()),
    )
}

// ------------------------------------------------------------ criterion 5

fn energy_constant(n_x: usize, t: f64, n_t: usize) -> f64 {
    let p = desk_problem(n_x, 2, 0.4, BoundarySpec::dirichlet())
        .with_grid(TimeGrid::new(t, n_t).unwrap())
        .unwrap();
    let f = p.zeros().map(|_| 1.0);
    let (energy, _) = check_estimates(&p, &f, &vec![0.0; n_x], EstimateSource::PlayDriven).unwrap();
    energy.constant()
}

fn energy_estimate() -> Outcome {
    let coarse = energy_constant(65, 1.0, 129);
    let fine = energy_constant(129, 1.0, 257);
    let change = (fine - coarse).abs() / coarse;
    let samples: Vec<(f64, f64)> = [0.25, 0.5, 1.0, 2.0]
        .iter()
        .map(|&t| (t, energy_constant(129, t, (256.0 * t) as usize + 1)))
        .collect();
    let fit = fit_log_growth(&samples).unwrap();
    let bound = energy_growth_rate(1.0);
    let enveloped = samples.iter().all(|&(t, c)| c.ln() <= fit.envelope(t) + 1e-12);
    outcome(
        change <= 0.2 && enveloped && fit.slope <= bound,
        format!(
            "C1 {coarse:.4} -> {fine:.4} under refinement ({:.2}% <= 20%); log C1 slope {:.3} <= {bound:.3}, envelope offset {:.3}",
            100.0 * change,
            fit.slope,
            fit.envelope_offset
        ),
    )
}

// ------------------------------------------------------------ criterion 6

fn remainder_decay() -> Outcome {
    let p = desk_problem(129, 257, 0.4, dirichlet_neumann());
    let u = sine_control(&p, 2.0);
    let h = desk_direction(&p);
    let frozen = desk_problem(129, 257, 5.0, BoundarySpec::dirichlet());
    let uf = sine_control(&frozen, 0.1);
    let hf = desk_direction(&frozen);
    let noise = 100.0 * frozen.params.fp_tol;
    let mut ok = true;
    let mut detail = Vec::new();
    for mode in [DerivativeMode::Bouligand, DerivativeMode::Newton] {
        let r = run_remainder_study(&p, &u, &h, &[0.0; 129], &DEFAULT_LADDER, mode, 0.5).unwrap();
        let rf = run_remainder_study(&frozen, &uf, &hf, &[0.0; 129], &DEFAULT_LADDER, mode, 0.5).unwrap();
        let frozen_max = rf.ratios().iter().fold(0.0f64, |m, &x| m.max(x));
        let pass = r.eventually_decreasing() && r.decay_factor() <= 0.2 && frozen_max <= noise;
        ok &= pass;
        detail.push(format!(
            "{mode:?}: ratios {}, decay {:.3}, frozen max {frozen_max:.1e}",
            sci(&r.ratios()),
            r.decay_factor()
        ));
    }
    outcome(ok, detail.join("; "))
}

// ------------------------------------------------------------ criterion 7

fn first_order_estimates() -> Outcome {
    let p = desk_problem(129, 257, 0.4, dirichlet_neumann());
    let u = sine_control(&p, 2.0);
    let h = desk_direction(&p);
    let (y, _) = p.solve_state(&u, &[0.0; 129]).unwrap();
    let (yh, _) = p.solve_state(&u.add(&h), &[0.0; 129]).unwrap();
    let mut finite = true;
    let mut consts = Vec::new();
    for (mode, base) in [(DerivativeMode::Bouligand, &y), (DerivativeMode::Newton, &yh)] {
        let (d, _) = p.solve_first_order(mode, base, &h).unwrap();
        let est = check_first_order_estimates(&d, &h, 0.5).unwrap();
        finite &= [est.energy, est.linf].iter().all(|e| e.constant().is_finite() && e.rhs > 0.0);
        consts.push(format!("{mode:?} C1 {:.4} C2 {:.4}", est.energy.constant(), est.linf.constant()));
    }
    let tol = 10.0 * p.params.fp_tol;
    let (d1, _) = p.solve_first_order(DerivativeMode::Newton, &yh, &h).unwrap();
    let e1 = check_first_order_estimates(&d1, &h, 0.5).unwrap().energy;
    let mut worst = 0.0f64;
    for a in [-2.0, 0.5, 3.7] {
        let ha = h.scale(a);
        let (da, _) = p.solve_first_order(DerivativeMode::Newton, &yh, &ha).unwrap();
        let ea = check_first_order_estimates(&da, &ha, 0.5).unwrap().energy;
        worst = worst
            .max((ea.lhs - a * a * e1.lhs).abs() / (a * a * e1.lhs))
            .max((ea.rhs - a * a * e1.rhs).abs() / (a * a * e1.rhs));
    }
    outcome(
        finite && worst <= tol,
        format!("{}; a^2 scaling relative error {worst:.1e} <= {tol:.0e}", consts.join(", ")),
    )
}

// ------------------------------------------------------------ criterion 8

fn newton() -> Outcome {
    let p = desk_problem(129, 257, 0.4, dirichlet_neumann());
    let y0 = [0.0; 129];
    let u_star = sine_control(&p, 2.0);
    let (target, _) = p.solve_state(&u_star, &y0).unwrap();
    let pert = SpaceTimeField::from_fn(p.mesh, p.grid, |x, t| (3.0 * PI * x).sin() * (1.0 + t) / 2.0);
    let u0 = u_star.axpy(0.5, &pert);
    let (_, run) = semismooth_newton_solve(&p, &target, &y0, &u0, Some(&u_star), &NewtonOptions::default()).unwrap();
    let generic = run.converged && run.iterations <= 10 && run.ratios_strictly_decreasing(3);

    let f = desk_problem(129, 257, 5.0, BoundarySpec::dirichlet());
    let fu = sine_control(&f, 0.1);
    let (ft, _) = f.solve_state(&fu, &y0).unwrap();
    let fu0 = fu.axpy(0.05, &pert);
    let (_, frun) = semismooth_newton_solve(&f, &ft, &y0, &fu0, Some(&fu), &NewtonOptions::default()).unwrap();
    let frozen = frun.converged && frun.iterations == 1;
    outcome(
        generic && frozen,
        format!(
            "desk: {} iterations, errors {}, ratios {}; frozen: {} iteration(s)",
            run.iterations,
            sci(&run.errors),
            sci(&run.error_ratios()),
            frun.iterations
        ),
    )
}

// ------------------------------------------------------------ criterion 9

fn run_cli(args: &[&str], out: &Path, threads: &str) -> bool {
    Command::new(env!("CARGO_BIN_EXE_hystherm"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("HYSTHERM_THREADS", threads)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for sub in ["fields", "reports"] {
        let mut entries: Vec<_> = std::fs::read_dir(dir.join(sub)).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for path in entries {
            files.push((format!("{sub}/{}", path.file_name().unwrap().to_string_lossy()), std::fs::read(&path).unwrap()));
        }
    }
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("random.json");
    std::fs::write(
        &config,
        r#"{"mesh": {"n_x": 33}, "time": {"n_t": 65},
            "problem": {"u_preset": "random", "h_preset": "random"},
            "max_principle": {"cases": 12}, "seed": 7}"#,
    )
    .unwrap();
    let cfg = config.to_str().unwrap();
    let mut compared = 0;
    let mut ok = true;
    for cmd in ["simulate", "first-order", "verify", "estimates", "max-principle", "newton-solve"] {
        let a = tmp.path().join(format!("{cmd}-a"));
        let b = tmp.path().join(format!("{cmd}-b"));
        if !(run_cli(&[cmd, "--config", cfg, "--seed", "11"], &a, "1")
            && run_cli(&[cmd, "--config", cfg, "--seed", "11"], &b, "4"))
        {
            return outcome(false, format!("`{cmd}` did not run"));
        }
        let (fa, fb) = (csv_files(&a), csv_files(&b));
        ok &= !fa.is_empty() && fa == fb;
        compared += fa.len();
    }
    outcome(ok, format!("{compared} CSV files byte-identical across repeated runs (1 vs 4 threads)"))
}
