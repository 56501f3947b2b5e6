//! Experiment configuration: JSON schema, defaults, validation and the
//! mapping onto solver objects.
//!
//! Every section and key is optional; omitted values take the defaults of
//! the default desk problem. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use hystherm_core::presets::{self, Separable, CONTROL_PRESETS, DIRECTION_PRESETS, PROFILE_PRESETS};
use hystherm_core::verification::DEFAULT_LADDER;
use hystherm_core::{
    Boundary, BoundarySpec, Forcing, PlayConfig, Problem, SolverParams, SpaceTimeField, SpatialMesh, TimeGrid,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, FieldError, Result};
use crate::fieldio::read_field;
use crate::random::{random_field, Stream};

/// Preset name for seeded random fields, accepted wherever a space-time
/// field preset is.
pub const RANDOM_PRESET: &str = "random";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(rename = "X")]
    pub length: f64,
    pub n_x: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { length: 1.0, n_x: 129 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T")]
    pub final_time: f64,
    pub n_t: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            final_time: 1.0,
            n_t: 257,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryConfig {
    pub left: String,
    pub right: String,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            left: "dirichlet".into(),
            right: "neumann".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlaySection {
    pub r: f64,
    pub w_init: f64,
    /// `false` drops the hysteresis term: the plain heat equation.
    pub enabled: bool,
}

impl Default for PlaySection {
    fn default() -> Self {
        Self {
            r: 0.4,
            w_init: 0.0,
            enabled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub dt_guard: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let p = SolverParams::default();
        Self {
            fp_tol: p.fp_tol,
            fp_max_iter: p.fp_max_iter,
            dt_guard: p.dt_guard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsSection {
    pub epsilon: f64,
}

impl Default for NormsSection {
    fn default() -> Self {
        Self {
            epsilon: hystherm_core::norms::DEFAULT_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    /// Control preset; defaults to `desk` unless `u_file` is given.
    pub u_preset: Option<String>,
    /// Field CSV on the configured grid, relative to the config file.
    pub u_file: Option<PathBuf>,
    pub y0_preset: String,
    pub h_preset: String,
    pub lambda_ladder: Vec<f64>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            u_preset: None,
            u_file: None,
            y0_preset: "zero".into(),
            h_preset: "desk".into(),
            lambda_ladder: DEFAULT_LADDER.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatesSection {
    /// Final times of the estimate sweep; each run keeps the configured `dt`.
    pub t_grid: Vec<f64>,
    /// Source `f` (a control preset).
    pub f_preset: String,
}

impl Default for EstimatesSection {
    fn default() -> Self {
        Self {
            t_grid: vec![0.25, 0.5, 1.0, 2.0],
            f_preset: "one".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonSection {
    pub tol: f64,
    pub max_iter: usize,
    /// `u0 = u* + amplitude * perturbation`.
    pub perturbation_preset: String,
    pub amplitude: f64,
}

impl Default for NewtonSection {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10,
            perturbation_preset: "sin3_ramp".into(),
            amplitude: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxPrincipleSection {
    /// Number of random initial profiles.
    pub cases: usize,
}

impl Default for MaxPrincipleSection {
    fn default() -> Self {
        Self { cases: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mesh: MeshConfig,
    pub time: TimeConfig,
    pub boundary: BoundaryConfig,
    pub play: PlaySection,
    pub solver: SolverSection,
    pub norms: NormsSection,
    pub problem: ProblemSection,
    pub estimates: EstimatesSection,
    pub newton: NewtonSection,
    pub max_principle: MaxPrincipleSection,
    pub seed: u64,
    /// Directory relative paths in the config resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Reads, parses and validates a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(CliError::ConfigMissing {
                path: path.to_path_buf(),
            })
        }
        Err(e) => return Err(CliError::io(path, e)),
    };
    let mut cfg = parse_config_str(&text, path)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    cfg.validate()?;
    Ok(cfg)
}

/// Parses without validating; `origin` only labels errors.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => CliError::ConfigInvalid(vec![FieldError::new(
                if field == "." { "<root>".to_string() } else { field },
                strip_position(&inner.to_string()),
            )]),
            _ => CliError::ConfigSyntax {
                path: origin.to_path_buf(),
                line: inner.line(),
                column: inner.column(),
                message: strip_position(&inner.to_string()),
            },
        }
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn names<T>(table: &[(&str, T)], random: bool) -> String {
    let mut v: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
    if random {
        v.push(RANDOM_PRESET);
    }
    v.join(", ")
}

fn unknown_preset(name: &str, table: String) -> String {
    format!("unknown preset `{name}`; available presets: {table}")
}

fn parse_boundary(s: &str) -> Option<Boundary> {
    match s {
        "dirichlet" => Some(Boundary::Dirichlet),
        "neumann" => Some(Boundary::Neumann),
        _ => None,
    }
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

impl ExperimentConfig {
    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut err = |f: &str, m: String| errs.push(FieldError::new(f, m));

        if !positive(self.mesh.length) {
            err("mesh.X", "must be finite and > 0".into());
        }
        if self.mesh.n_x < 3 {
            err("mesh.n_x", "must be >= 3".into());
        }
        if !positive(self.time.final_time) {
            err("time.T", "must be finite and > 0".into());
        }
        if self.time.n_t < 2 {
            err("time.n_t", "must be >= 2".into());
        }
        let left = parse_boundary(&self.boundary.left);
        let right = parse_boundary(&self.boundary.right);
        for (name, side, raw) in [("boundary.left", left, &self.boundary.left), ("boundary.right", right, &self.boundary.right)] {
            if side.is_none() {
                err(name, format!("`{raw}` is not one of: dirichlet, neumann"));
            }
        }
        if left == Some(Boundary::Neumann) && right == Some(Boundary::Neumann) {
            err("boundary", "at least one side must be dirichlet".into());
        }
        if !positive(self.play.r) {
            err("play.r", format!("must be finite and > 0, got {}", self.play.r));
        }
        if !self.play.w_init.is_finite() {
            err("play.w_init", "must be finite".into());
        }
        if !positive(self.solver.fp_tol) {
            err("solver.fp_tol", "must be finite and > 0".into());
        }
        if self.solver.fp_max_iter == 0 {
            err("solver.fp_max_iter", "must be >= 1".into());
        }
        if self.play.enabled && self.solver.dt_guard && self.time.n_t >= 2 && positive(self.time.final_time) {
            let dt = self.time.final_time / (self.time.n_t - 1) as f64;
            // the play is 1-Lipschitz
            if dt > 0.5 {
                err("time.n_t", format!("step guard L*dt <= 1/2 violated: dt = {dt}"));
            }
        }
        if !positive(self.norms.epsilon) {
            err("norms.epsilon", "must be finite and > 0".into());
        }

        let p = &self.problem;
        match (&p.u_preset, &p.u_file) {
            (Some(_), Some(_)) => err("problem.u_file", "give either u_preset or u_file, not both".into()),
            (Some(name), None) if name != RANDOM_PRESET && presets::control(name).is_none() => {
                err("problem.u_preset", unknown_preset(name, names(CONTROL_PRESETS, true)));
            }
            (None, Some(file)) => {
                let full = self.base_dir.join(file);
                if !full.is_file() {
                    err("problem.u_file", format!("file not found: {}", full.display()));
                }
            }
            _ => {}
        }
        if presets::profile(&p.y0_preset).is_none() {
            err("problem.y0_preset", unknown_preset(&p.y0_preset, names(PROFILE_PRESETS, false)));
        }
        if p.h_preset != RANDOM_PRESET && presets::direction(&p.h_preset).is_none() {
            err("problem.h_preset", unknown_preset(&p.h_preset, names(DIRECTION_PRESETS, true)));
        }
        if let Err(e) = hystherm_core::verification::remainder::check_ladder(&p.lambda_ladder) {
            err("problem.lambda_ladder", e.to_string());
        }

        let e = &self.estimates;
        if e.t_grid.len() < 2 {
            err("estimates.t_grid", "needs at least two final times".into());
        } else if e.t_grid.iter().any(|&t| !positive(t)) {
            err("estimates.t_grid", "final times must be finite and > 0".into());
        } else if e.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            err("estimates.t_grid", "final times must be strictly increasing".into());
        }
        if presets::control(&e.f_preset).is_none() {
            err("estimates.f_preset", unknown_preset(&e.f_preset, names(CONTROL_PRESETS, false)));
        }

        let n = &self.newton;
        if !positive(n.tol) {
            err("newton.tol", "must be finite and > 0".into());
        }
        if n.max_iter == 0 {
            err("newton.max_iter", "must be >= 1".into());
        }
        if n.perturbation_preset != RANDOM_PRESET && presets::direction(&n.perturbation_preset).is_none() {
            err(
                "newton.perturbation_preset",
                unknown_preset(&n.perturbation_preset, names(DIRECTION_PRESETS, true)),
            );
        }
        if !n.amplitude.is_finite() {
            err("newton.amplitude", "must be finite".into());
        }
        if self.max_principle.cases == 0 {
            err("max_principle.cases", "must be >= 1".into());
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::ConfigInvalid(errs))
        }
    }

    pub fn mesh(&self) -> Result<SpatialMesh> {
        Ok(SpatialMesh::new(self.mesh.length, self.mesh.n_x)?)
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        Ok(TimeGrid::new(self.time.final_time, self.time.n_t)?)
    }

    pub fn boundary(&self) -> Result<BoundarySpec> {
        let side = |s: &str, f: &str| {
            parse_boundary(s).ok_or_else(|| CliError::ConfigInvalid(vec![FieldError::new(f, "invalid boundary")]))
        };
        Ok(BoundarySpec::new(
            side(&self.boundary.left, "boundary.left")?,
            side(&self.boundary.right, "boundary.right")?,
        )?)
    }

    pub fn play(&self) -> Result<PlayConfig> {
        Ok(PlayConfig::new(self.play.r, self.play.w_init)?)
    }

    pub fn solver_params(&self) -> SolverParams {
        SolverParams {
            fp_tol: self.solver.fp_tol,
            fp_max_iter: self.solver.fp_max_iter,
            dt_guard: self.solver.dt_guard,
        }
    }

    pub fn forcing(&self) -> Forcing {
        if self.play.enabled {
            Forcing::Play
        } else {
            Forcing::Off
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(Problem::new(
            self.mesh()?,
            self.grid()?,
            self.boundary()?,
            self.play()?,
            self.forcing(),
            self.solver_params(),
        )?)
    }

    /// Control `u` on the problem grid.
    pub fn control(&self, problem: &Problem) -> Result<SpaceTimeField> {
        let p = &self.problem;
        if let Some(file) = &p.u_file {
            return read_field(&self.base_dir.join(file), problem.mesh, problem.grid);
        }
        let name = p.u_preset.as_deref().unwrap_or("desk");
        self.separable_or_random(problem, name, presets::control(name), Stream::Control, "problem.u_preset")
    }

    /// Direction `h` on the problem grid.
    pub fn direction(&self, problem: &Problem) -> Result<SpaceTimeField> {
        let name = &self.problem.h_preset;
        self.separable_or_random(problem, name, presets::direction(name), Stream::Direction, "problem.h_preset")
    }

    /// Newton perturbation scaled by `newton.amplitude`.
    pub fn perturbation(&self, problem: &Problem) -> Result<SpaceTimeField> {
        let name = &self.newton.perturbation_preset;
        let f = self.separable_or_random(
            problem,
            name,
            presets::direction(name),
            Stream::Perturbation,
            "newton.perturbation_preset",
        )?;
        Ok(f.scale(self.newton.amplitude))
    }

    /// Initial profile, set to zero on Dirichlet nodes.
    pub fn initial_profile(&self, problem: &Problem) -> Result<Vec<f64>> {
        let shape = presets::profile(&self.problem.y0_preset).ok_or_else(|| {
            CliError::ConfigInvalid(vec![FieldError::new(
                "problem.y0_preset",
                unknown_preset(&self.problem.y0_preset, names(PROFILE_PRESETS, false)),
            )])
        })?;
        Ok(dirichlet_projection(problem, shape.profile(&problem.mesh)))
    }

    /// Source of the estimate runs on the given problem's grid.
    pub fn estimate_source(&self, problem: &Problem) -> Result<SpaceTimeField> {
        let name = &self.estimates.f_preset;
        self.separable_or_random(problem, name, presets::control(name), Stream::Control, "estimates.f_preset")
    }

    fn separable_or_random(
        &self,
        problem: &Problem,
        name: &str,
        preset: Option<Separable>,
        stream: Stream,
        field: &str,
    ) -> Result<SpaceTimeField> {
        if name == RANDOM_PRESET {
            return Ok(random_field(problem.mesh, problem.grid, self.seed, stream));
        }
        preset
            .map(|s| s.field(problem.mesh, problem.grid))
            .ok_or_else(|| CliError::ConfigInvalid(vec![FieldError::new(field, format!("unknown preset `{name}`"))]))
    }
}

pub fn dirichlet_projection(problem: &Problem, mut profile: Vec<f64>) -> Vec<f64> {
    let op = problem.heat_operator();
    for (i, v) in profile.iter_mut().enumerate() {
        if op.is_dirichlet(i) {
            *v = 0.0;
        }
    }
    profile
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg = parse_config_str(text, Path::new("test.json"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn fields(err: CliError) -> Vec<String> {
        match err {
            CliError::ConfigInvalid(f) => f.into_iter().map(|e| e.field).collect(),
            other => panic!("expected invalid config, got {other:?}"),
        }
    }

    #[test]
    fn empty_object_gives_defaults() {
        let cfg = parse("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.mesh.n_x, 129);
        assert_eq!(cfg.time.n_t, 257);
        assert_eq!(cfg.play.r, 0.4);
        assert_eq!(cfg.problem.lambda_ladder, DEFAULT_LADDER.to_vec());
    }

    #[test]
    fn negative_radius_names_the_field() {
        let err = parse(r#"{"play": {"r": -1}}"#).unwrap_err();
        assert_eq!(fields(err), ["play.r"]);
    }

    #[test]
    fn errors_are_aggregated() {
        let err = parse(r#"{"play": {"r": 0}, "mesh": {"n_x": 2}, "norms": {"epsilon": -1}}"#).unwrap_err();
        assert_eq!(fields(err), ["mesh.n_x", "play.r", "norms.epsilon"]);
    }

    #[test]
    fn unknown_preset_lists_available() {
        let err = parse(r#"{"problem": {"h_preset": "nope"}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("problem.h_preset"));
        for (name, _) in DIRECTION_PRESETS {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn syntax_and_type_errors_are_distinct() {
        assert!(matches!(parse("{\"mesh\": "), Err(CliError::ConfigSyntax { .. })));
        let err = parse(r#"{"mesh": {"n_x": "many"}}"#).unwrap_err();
        assert_eq!(fields(err), ["mesh.n_x"]);
        let err = parse(r#"{"mesh": {"nx": 3}}"#).unwrap_err();
        assert_eq!(fields(err), ["mesh.nx"]);
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            parse_config(Path::new("/definitely/not/here.json")),
            Err(CliError::ConfigMissing { .. })
        ));
    }

    #[test]
    fn boundary_and_step_guard() {
        let err = parse(r#"{"boundary": {"left": "neumann", "right": "neumann"}, "time": {"n_t": 2}}"#).unwrap_err();
        assert_eq!(fields(err), ["boundary", "time.n_t"]);
        let err = parse(r#"{"boundary": {"left": "robin"}}"#).unwrap_err();
        assert_eq!(fields(err), ["boundary.left"]);
    }
}
