//! The six subcommands. Each writes `fields/*.csv`, `reports/*.csv` and a
//! `summary.json` below the output directory; independent jobs (ladder
//! points, final times, initial profiles) run on the rayon pool and are
//! reassembled by index, so outputs do not depend on the thread count.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hystherm_core::field::apply_w;
use hystherm_core::verification::estimates::{energy_growth_rate, fit_log_growth};
use hystherm_core::verification::max_principle::Violation;
use hystherm_core::verification::{
    check_estimates, check_first_order_estimates, check_max_principle, semismooth_newton_solve, EstimateReport,
    EstimateSource, NewtonOptions, RemainderStudy,
};
use hystherm_core::{norms, DerivativeMode, Forcing, Problem, SpaceTimeField, TimeGrid};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{dirichlet_projection, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::fieldio::{fmt_f64, write_field};
use crate::random::{rng, Stream};

/// Largest admissible `ratios(lambda_min) / ratios(lambda_max)`.
pub const DECAY_THRESHOLD: f64 = 0.2;
/// Frozen-regime ratios are solver noise: at most this multiple of `fp_tol`.
pub const FROZEN_NOISE_FACTOR: f64 = 100.0;
/// Slack added to the Gronwall factor `e^{LT}` for the sup estimate.
pub const GRONWALL_SLACK: f64 = 0.1;
/// Relative change of `C1` allowed under one mesh refinement.
pub const REFINEMENT_TOLERANCE: f64 = 0.2;
/// Relative tolerance of the `a^2` scaling, in units of `fp_tol`.
pub const SCALING_TOLERANCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    FirstOrder,
    Verify,
    Estimates,
    MaxPrinciple,
    NewtonSolve,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::FirstOrder => "first-order",
            Command::Verify => "verify",
            Command::Estimates => "estimates",
            Command::MaxPrinciple => "max-principle",
            Command::NewtonSolve => "newton-solve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Mode {
    #[default]
    Bouligand,
    Newton,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Bouligand => "bouligand",
            Mode::Newton => "newton",
        }
    }

    pub fn derivative(self) -> DerivativeMode {
        match self {
            Mode::Bouligand => DerivativeMode::Bouligand,
            Mode::Newton => DerivativeMode::Newton,
        }
    }
}

/// Result of one subcommand, serialized as `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<&'static str>,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub checks: BTreeMap<String, bool>,
    pub passed: bool,
    pub constants: BTreeMap<String, Value>,
    pub outputs: Vec<String>,
}

struct Output {
    root: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(root: &Path) -> Result<Self> {
        for sub in ["fields", "reports"] {
            let dir = root.join(sub);
            fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        }
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn field(&mut self, name: &str, field: &SpaceTimeField) -> Result<()> {
        let rel = format!("fields/{name}.csv");
        write_field(&self.root.join(&rel), field)?;
        self.files.push(rel);
        Ok(())
    }

    fn report(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let rel = format!("reports/{name}.csv");
        let path = self.root.join(&rel);
        let csv_err = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(&path, io),
            other => CliError::io(&path, std::io::Error::other(format!("{other:?}"))),
        };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.files.push(rel);
        Ok(())
    }
}

/// Collects checks and constants for the summary.
#[derive(Default)]
struct Findings {
    checks: BTreeMap<String, bool>,
    constants: BTreeMap<String, Value>,
}

impl Findings {
    fn check(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.into(), ok);
    }

    fn constant(&mut self, name: &str, v: impl Into<Value>) {
        self.constants.insert(name.into(), v.into());
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn run(command: Command, cfg: &ExperimentConfig, mode: Mode, out_dir: &Path) -> Result<Summary> {
    let mut out = Output::new(out_dir)?;
    let mut found = Findings::default();
    let problem = cfg.problem()?;
    match command {
        Command::Simulate => simulate(cfg, &problem, &mut out, &mut found)?,
        Command::FirstOrder => first_order(cfg, &problem, mode, &mut out, &mut found)?,
        Command::Verify => verify(cfg, &problem, mode, &mut out, &mut found)?,
        Command::Estimates => estimates(cfg, &problem, &mut out, &mut found)?,
        Command::MaxPrinciple => max_principle(cfg, &problem, &mut out, &mut found)?,
        Command::NewtonSolve => newton_solve(cfg, &problem, &mut out, &mut found)?,
    }
    let uses_mode = matches!(command, Command::FirstOrder | Command::Verify);
    let summary = Summary {
        command: command.name(),
        mode: uses_mode.then(|| mode.name()),
        seed: cfg.seed,
        config: cfg.clone(),
        passed: found.checks.values().all(|&c| c),
        checks: found.checks,
        constants: found.constants,
        outputs: out.files,
    };
    let path = out_dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(summary)
}

fn simulate(cfg: &ExperimentConfig, problem: &Problem, out: &mut Output, found: &mut Findings) -> Result<()> {
    let u = cfg.control(problem)?;
    let y0 = cfg.initial_profile(problem)?;
    let (y, w) = problem.solve_state(&u, &y0)?;
    out.field("u", &u)?;
    out.field("y", &y)?;
    out.field("w", &w)?;
    let rows: Vec<Vec<String>> = (0..y.n_t())
        .map(|k| {
            let sup = |f: &SpaceTimeField| f.column(k).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            vec![k.to_string(), fmt_f64(problem.grid.time(k)), fmt_f64(sup(&y)), fmt_f64(sup(&w))]
        })
        .collect();
    out.report("state", &["k", "t", "y_sup", "w_sup"], &rows)?;
    found.check("finite", y.is_finite() && w.is_finite());
    found.constant("y_sup", y.max_abs());
    found.constant("w_sup", w.max_abs());
    found.constant("y_ys", norms::norm_ys(&y));
    Ok(())
}

fn estimate_rows(name: &str, r: &EstimateReport) -> Vec<String> {
    vec![name.to_string(), fmt_f64(r.lhs), fmt_f64(r.rhs), opt(r.empirical_constant)]
}

fn first_order(
    cfg: &ExperimentConfig,
    problem: &Problem,
    mode: Mode,
    out: &mut Output,
    found: &mut Findings,
) -> Result<()> {
    let u = cfg.control(problem)?;
    let h = cfg.direction(problem)?;
    let y0 = cfg.initial_profile(problem)?;
    let (y, _) = problem.solve_state(&u, &y0)?;
    let base = match mode {
        Mode::Bouligand => y,
        Mode::Newton => problem.solve_state(&u.add(&h), &y0)?.0,
    };
    let (d, omega) = problem.solve_first_order(mode.derivative(), &base, &h)?;
    out.field("h", &h)?;
    out.field("d", &d)?;
    out.field("omega", &omega)?;
    let est = check_first_order_estimates(&d, &h, cfg.norms.epsilon)?;
    let rows = vec![
        estimate_rows("energy", &est.energy),
        estimate_rows("linf", &est.linf),
        estimate_rows("lq_time_derivative", &est.lq),
    ];
    out.report("first_order_estimates", &["estimate", "lhs", "rhs", "empirical_constant"], &rows)?;
    for (name, r) in [("energy", &est.energy), ("linf", &est.linf), ("lq_time_derivative", &est.lq)] {
        found.check(&format!("{name}_finite_constant"), r.constant().is_finite());
        found.constant(&format!("{name}_constant"), r.empirical_constant);
    }

    if mode == Mode::Newton {
        // the Newton derivative is linear: h -> a h scales both sides by a^2
        let a = 2.0;
        let (da, _) = problem.solve_first_order(mode.derivative(), &base, &h.scale(a))?;
        let scaled = check_first_order_estimates(&da, &h.scale(a), cfg.norms.epsilon)?;
        let rel = |s: f64, b: f64| if b == 0.0 { s.abs() } else { (s - a * a * b).abs() / (a * a * b).abs() };
        let worst = rel(scaled.energy.lhs, est.energy.lhs).max(rel(scaled.energy.rhs, est.energy.rhs));
        found.constant("energy_scaling_relative_error", worst);
        found.check("energy_scales_quadratically", worst <= SCALING_TOLERANCE_FACTOR * cfg.solver.fp_tol);
    }
    Ok(())
}

/// The play memory never leaves its initial value along `y`.
fn is_frozen(problem: &Problem, y: &SpaceTimeField) -> bool {
    if problem.forcing == Forcing::Off {
        return true;
    }
    let w0 = problem.play.w_init();
    apply_w(y, &problem.play).values().iter().all(|&w| w == w0)
}

fn verify(cfg: &ExperimentConfig, problem: &Problem, mode: Mode, out: &mut Output, found: &mut Findings) -> Result<()> {
    let u = cfg.control(problem)?;
    let h = cfg.direction(problem)?;
    let y0 = cfg.initial_profile(problem)?;
    let ladder = &cfg.problem.lambda_ladder;
    let study = RemainderStudy::new(problem, &u, &h, &y0, mode.derivative(), cfg.norms.epsilon)?;
    let points = ladder
        .par_iter()
        .map(|&l| study.point(l))
        .collect::<hystherm_core::Result<Vec<_>>>()?;
    let report = study.report(points);

    let rows: Vec<Vec<String>> = report
        .points
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.lambda),
                fmt_f64(p.ratio),
                fmt_f64(p.remainder_ys),
                fmt_f64(p.step_xs),
                fmt_f64(p.increment_ys),
                fmt_f64(p.derivative_ys),
                p.sandwich_holds().to_string(),
            ]
        })
        .collect();
    out.report(
        &format!("remainder_{}", mode.name()),
        &["lambda", "ratio", "remainder_ys", "step_xs", "increment_ys", "derivative_ys", "sandwich_holds"],
        &rows,
    )?;

    let frozen = is_frozen(problem, study.base_state());
    let max_ratio = report.ratios().iter().fold(0.0f64, |m, &r| m.max(r));
    found.check("ratios_finite", report.ratios().iter().all(|r| r.is_finite() && *r >= 0.0));
    found.check("sandwich", report.points.iter().all(|p| p.sandwich_holds()));
    if frozen {
        found.check("frozen_ratios_at_noise", max_ratio <= FROZEN_NOISE_FACTOR * cfg.solver.fp_tol);
    } else {
        found.check("eventually_decreasing", report.eventually_decreasing());
        found.check("decay_factor_le_threshold", report.decay_factor() <= DECAY_THRESHOLD);
    }
    found.constant("frozen", frozen);
    found.constant("decay_factor", report.decay_factor());
    found.constant("decay_threshold", DECAY_THRESHOLD);
    found.constant("monotone_from", report.monotone_from() as u64);
    found.constant("max_ratio", max_ratio);
    found.constant("epsilon", report.epsilon);
    Ok(())
}

/// Nodes of a grid with the problem's step ending at `t`.
fn steps_for(problem: &Problem, t: f64) -> usize {
    (t / problem.grid.dt()).round().max(1.0) as usize + 1
}

fn estimates(cfg: &ExperimentConfig, problem: &Problem, out: &mut Output, found: &mut Findings) -> Result<()> {
    let source = match problem.forcing {
        Forcing::Play => EstimateSource::PlayDriven,
        Forcing::Off => EstimateSource::Pure,
    };
    let lip = match problem.forcing {
        Forcing::Play => problem.play.lipschitz(),
        Forcing::Off => 0.0,
    };
    let run = |p: &Problem| -> Result<(EstimateReport, EstimateReport)> {
        let f = cfg.estimate_source(p)?;
        let z0 = cfg.initial_profile(p)?;
        Ok(check_estimates(p, &f, &z0, source)?)
    };
    let sweep = cfg
        .estimates
        .t_grid
        .par_iter()
        .map(|&t| {
            let p = problem.with_grid(TimeGrid::new(t, steps_for(problem, t))?)?;
            run(&p)
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<Vec<String>> = sweep
        .iter()
        .map(|(e, l)| {
            vec![
                fmt_f64(e.final_time),
                e.n_x.to_string(),
                e.n_t.to_string(),
                fmt_f64(e.lhs),
                fmt_f64(e.rhs),
                opt(e.empirical_constant),
                fmt_f64(l.lhs),
                fmt_f64(l.rhs),
                opt(l.empirical_constant),
                fmt_f64((lip * e.final_time).exp()),
            ]
        })
        .collect();
    out.report(
        "estimates",
        &["T", "n_x", "n_t", "energy_lhs", "energy_rhs", "c1", "linf_lhs", "linf_rhs", "c2", "gronwall_factor"],
        &rows,
    )?;

    found.check("consistent", sweep.iter().all(|(e, l)| e.is_consistent() && l.is_consistent()));
    found.check(
        "linf_within_gronwall",
        sweep
            .iter()
            .all(|(_, l)| l.constant() <= (lip * l.final_time).exp() + GRONWALL_SLACK),
    );
    let samples: Vec<(f64, f64)> = sweep.iter().map(|(e, _)| (e.final_time, e.constant())).collect();
    match fit_log_growth(&samples) {
        Ok(fit) => {
            let bound = energy_growth_rate(lip);
            found.check("energy_growth_exponential", fit.slope <= bound);
            found.constant("log_c1_slope", fit.slope);
            found.constant("log_c1_intercept", fit.intercept);
            found.constant("log_c1_envelope_offset", fit.envelope_offset);
            found.constant("log_c1_slope_bound", bound);
        }
        Err(_) => found.check("energy_growth_exponential", false),
    }

    // one uniform refinement at the configured grid
    let coarse = run(problem)?;
    let fine_problem = Problem::new(
        hystherm_core::SpatialMesh::new(problem.mesh.length(), 2 * problem.mesh.nodes() - 1)?,
        TimeGrid::new(problem.grid.final_time(), 2 * problem.grid.nodes() - 1)?,
        problem.boundary,
        problem.play,
        problem.forcing,
        problem.params,
    )?;
    let fine = run(&fine_problem)?;
    let change = |a: f64, b: f64| (b - a).abs() / a.abs();
    let c1_change = change(coarse.0.constant(), fine.0.constant());
    let c2_change = change(coarse.1.constant(), fine.1.constant());
    found.check("energy_refinement_stable", c1_change <= REFINEMENT_TOLERANCE);
    found.check("linf_refinement_stable", c2_change <= REFINEMENT_TOLERANCE);
    found.constant("c1", coarse.0.empirical_constant);
    found.constant("c1_refined", fine.0.empirical_constant);
    found.constant("c1_refinement_change", c1_change);
    found.constant("c2", coarse.1.empirical_constant);
    found.constant("c2_refined", fine.1.empirical_constant);
    found.constant("c2_refinement_change", c2_change);
    Ok(())
}

fn violation_text(v: Option<Violation>) -> String {
    match v {
        None => String::new(),
        Some(Violation::SupExceeded { node, step }) => format!("sup_exceeded@{node}:{step}"),
        Some(Violation::SupIncreased { step }) => format!("sup_increased@{step}"),
        Some(Violation::Negative { node, step }) => format!("negative@{node}:{step}"),
    }
}

fn max_principle(cfg: &ExperimentConfig, problem: &Problem, out: &mut Output, found: &mut Findings) -> Result<()> {
    let problem = problem.with_forcing(Forcing::Off);
    let n_x = problem.mesh.nodes();
    let mut rng = rng(cfg.seed, Stream::InitialData);
    // even cases non-negative, odd cases with mixed signs
    let data: Vec<Vec<f64>> = (0..cfg.max_principle.cases)
        .map(|j| {
            let lo = if j % 2 == 0 { 0.0 } else { -1.0 };
            let z0 = (0..n_x).map(|_| rng.random_range(lo..1.0)).collect();
            dirichlet_projection(&problem, z0)
        })
        .collect();
    let reports = data
        .par_iter()
        .map(|z0| check_max_principle(&problem, z0))
        .collect::<hystherm_core::Result<Vec<_>>>()?;

    let rows: Vec<Vec<String>> = reports
        .iter()
        .enumerate()
        .map(|(j, r)| {
            vec![
                j.to_string(),
                r.nonnegative_data.to_string(),
                fmt_f64(r.initial_sup),
                fmt_f64(r.sup_per_step.iter().fold(0.0f64, |m, &v| m.max(v))),
                fmt_f64(*r.sup_per_step.last().unwrap_or(&0.0)),
                fmt_f64(r.min_per_step.iter().copied().fold(f64::INFINITY, f64::min)),
                r.passed().to_string(),
                violation_text(r.violation),
            ]
        })
        .collect();
    out.report(
        "max_principle",
        &["case", "nonnegative_data", "initial_sup", "max_sup", "final_sup", "min_value", "passed", "violation"],
        &rows,
    )?;
    let violations = reports.iter().filter(|r| !r.passed()).count();
    found.check("no_violations", violations == 0);
    found.constant("cases", reports.len() as u64);
    found.constant("violations", violations as u64);
    Ok(())
}

fn newton_solve(cfg: &ExperimentConfig, problem: &Problem, out: &mut Output, found: &mut Findings) -> Result<()> {
    let u_star = cfg.control(problem)?;
    let y0 = cfg.initial_profile(problem)?;
    let (target, _) = problem.solve_state(&u_star, &y0)?;
    let u0 = u_star.add(&cfg.perturbation(problem)?);
    let opts = NewtonOptions {
        tol: cfg.newton.tol,
        max_iter: cfg.newton.max_iter,
        epsilon: cfg.norms.epsilon,
    };
    let (u, report) = semismooth_newton_solve(problem, &target, &y0, &u0, Some(&u_star), &opts)?;
    out.field("u_final", &u)?;
    let ratios = report.error_ratios();
    let rows: Vec<Vec<String>> = (0..report.errors.len())
        .map(|k| {
            vec![
                k.to_string(),
                fmt_f64(report.errors[k]),
                fmt_f64(report.residuals[k]),
                if k == 0 { String::new() } else { fmt_f64(ratios[k - 1]) },
            ]
        })
        .collect();
    out.report("newton", &["iteration", "error", "residual", "error_ratio"], &rows)?;

    found.check("converged", report.converged);
    if report.iterations >= 3 {
        found.check("ratios_strictly_decreasing", report.ratios_strictly_decreasing(3));
    }
    if is_frozen(problem, &target) && problem.forcing == Forcing::Play {
        found.check("frozen_single_iteration", report.iterations <= 1);
    }
    found.constant("iterations", report.iterations as u64);
    found.constant("final_residual", *report.residuals.last().unwrap_or(&f64::NAN));
    found.constant("final_error", *report.errors.last().unwrap_or(&f64::NAN));
    found.constant("error_ratios", json!(ratios));
    Ok(())
}
