//! Backward-Euler finite-difference solver for `z_t - z_xx = g` on `(0, X)`.
//!
//! Each step solves `(I - dt * D2) z^k = z^{k-1} + dt * g^k` where `g^k` may
//! depend on `z^k` through a hysteresis memory. That implicit coupling is
//! resolved by Picard iteration; with `L * dt <= 1/2` the sweep map is a
//! contraction with factor at most `L * dt`, because the inverse of the
//! M-matrix has unit-bounded row sums. Sources that are affine in `z^k` are
//! solved directly instead.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{apply_w, apply_w_bouligand, apply_w_newton};
use crate::grid::{Boundary, BoundarySpec, SpaceTimeField, SpatialMesh, TimeGrid};
use crate::hysteresis::{bouligand_rule, clamp_step, newton_active, PlayConfig};
use crate::tridiag::{TridiagonalFactor, TridiagonalMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Sup-norm tolerance on successive Picard iterates.
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    /// Reject steps with `L * dt > 1/2`.
    pub dt_guard: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            fp_tol: 1e-10,
            fp_max_iter: 100,
            dt_guard: true,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.fp_tol.is_finite() && self.fp_tol > 0.0) {
            return Err(Error::invalid("solver: fp_tol must be > 0"));
        }
        if self.fp_max_iter == 0 {
            return Err(Error::invalid("solver: fp_max_iter must be >= 1"));
        }
        Ok(())
    }
}

/// `I - dt * D2` with boundary rows: identity on Dirichlet nodes, ghost-node
/// reflection on Neumann nodes.
#[derive(Debug, Clone)]
pub struct HeatOperator {
    mesh: SpatialMesh,
    boundary: BoundarySpec,
    dt: f64,
    matrix: TridiagonalMatrix,
    factor: TridiagonalFactor,
}

impl HeatOperator {
    pub fn new(mesh: SpatialMesh, boundary: BoundarySpec, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::invalid("heat operator: dt must be finite and >= 0"));
        }
        let n = mesh.nodes();
        let c = dt / (mesh.dx() * mesh.dx());
        let mut lower = vec![-c; n - 1];
        let mut diag = vec![1.0 + 2.0 * c; n];
        let mut upper = vec![-c; n - 1];
        match boundary.left() {
            Boundary::Dirichlet => {
                diag[0] = 1.0;
                upper[0] = 0.0;
            }
            Boundary::Neumann => upper[0] = -2.0 * c,
        }
        match boundary.right() {
            Boundary::Dirichlet => {
                diag[n - 1] = 1.0;
                lower[n - 2] = 0.0;
            }
            Boundary::Neumann => lower[n - 2] = -2.0 * c,
        }
        let matrix = TridiagonalMatrix::new(lower, diag, upper)?;
        let factor = matrix.factor()?;
        Ok(Self {
            mesh,
            boundary,
            dt,
            matrix,
            factor,
        })
    }

    pub fn mesh(&self) -> SpatialMesh {
        self.mesh
    }

    pub fn boundary(&self) -> BoundarySpec {
        self.boundary
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn matrix(&self) -> &TridiagonalMatrix {
        &self.matrix
    }

    pub fn is_dirichlet(&self, i: usize) -> bool {
        self.boundary.is_dirichlet_node(i, self.mesh.nodes())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.apply(x)
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) -> Result<()> {
        self.factor.solve_in_place(rhs)
    }

    /// Factors `A - dt * diag(coeff)` (Dirichlet rows untouched).
    fn factor_with_reaction(&self, coeff: &[f64]) -> Result<TridiagonalFactor> {
        let mut m = self.matrix.clone();
        for (i, &c) in coeff.iter().enumerate() {
            if !self.is_dirichlet(i) {
                m.diag[i] -= self.dt * c;
            }
        }
        m.factor()
    }

    fn zero_dirichlet(&self, v: &mut [f64]) {
        let n = v.len();
        if self.boundary.left() == Boundary::Dirichlet {
            v[0] = 0.0;
        }
        if self.boundary.right() == Boundary::Dirichlet {
            v[n - 1] = 0.0;
        }
    }
}

/// Solves `A x = rhs` with the factored heat operator.
pub fn tridiag_solve(op: &HeatOperator, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != op.mesh.nodes() {
        return Err(Error::invalid("tridiag_solve: rhs length differs from n_x"));
    }
    let mut x = rhs.to_vec();
    op.solve_in_place(&mut x)?;
    Ok(x)
}

/// A source `g^k` for the step to time node `k`, possibly depending on the
/// unknown profile `z^k` and on memory carried from earlier steps.
pub trait SourceRule {
    /// Lipschitz constant of `g` with respect to the running sup of `z`.
    fn lipschitz(&self) -> f64;

    fn start(&mut self, _z0: &[f64]) {}

    /// Source at time node `k >= 1` for the trial profile `z`.
    fn evaluate(&self, k: usize, z: &[f64], g: &mut [f64]);

    /// Commits the accepted profile of step `k`.
    fn accept(&mut self, _k: usize, _z: &[f64]) {}

    /// If the source is affine in `z^k`, writes `g = coeff * z + offset` and
    /// returns `true`.
    fn affine(&self, _k: usize, _coeff: &mut [f64], _offset: &mut [f64]) -> bool {
        false
    }
}

pub struct ZeroSource;

impl SourceRule for ZeroSource {
    fn lipschitz(&self) -> f64 {
        0.0
    }

    fn evaluate(&self, _k: usize, _z: &[f64], g: &mut [f64]) {
        g.fill(0.0);
    }

    fn affine(&self, _k: usize, coeff: &mut [f64], offset: &mut [f64]) -> bool {
        coeff.fill(0.0);
        offset.fill(0.0);
        true
    }
}

/// A prescribed source field independent of the state.
pub struct FieldSource<'a> {
    pub f: &'a SpaceTimeField,
}

impl SourceRule for FieldSource<'_> {
    fn lipschitz(&self) -> f64 {
        0.0
    }

    fn evaluate(&self, k: usize, _z: &[f64], g: &mut [f64]) {
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = self.f.get(i, k);
        }
    }

    fn affine(&self, k: usize, coeff: &mut [f64], offset: &mut [f64]) -> bool {
        coeff.fill(0.0);
        self.evaluate(k, &[], offset);
        true
    }
}

/// `g = f + W[z]`: the state equation source.
pub struct PlayDrivenSource<'a> {
    f: &'a SpaceTimeField,
    play: PlayConfig,
    memory: Vec<f64>,
}

impl<'a> PlayDrivenSource<'a> {
    pub fn new(f: &'a SpaceTimeField, play: PlayConfig) -> Self {
        Self {
            f,
            play,
            memory: vec![play.w_init(); f.n_x()],
        }
    }
}

impl SourceRule for PlayDrivenSource<'_> {
    fn lipschitz(&self) -> f64 {
        self.play.lipschitz()
    }

    fn start(&mut self, z0: &[f64]) {
        let r = self.play.radius();
        for (m, &z) in self.memory.iter_mut().zip(z0) {
            *m = clamp_step(self.play.w_init(), z, r);
        }
    }

    fn evaluate(&self, k: usize, z: &[f64], g: &mut [f64]) {
        let r = self.play.radius();
        for i in 0..g.len() {
            g[i] = self.f.get(i, k) + clamp_step(self.memory[i], z[i], r);
        }
    }

    fn accept(&mut self, _k: usize, z: &[f64]) {
        let r = self.play.radius();
        for (m, &zi) in self.memory.iter_mut().zip(z) {
            *m = clamp_step(*m, zi, r);
        }
    }
}

/// `g = h + W^BD[base; z]`: the Bouligand first-order source.
pub struct BouligandSource<'a> {
    h: &'a SpaceTimeField,
    base: &'a SpaceTimeField,
    w_base: SpaceTimeField,
    play: PlayConfig,
    omega: Vec<f64>,
}

impl<'a> BouligandSource<'a> {
    pub fn new(h: &'a SpaceTimeField, base: &'a SpaceTimeField, play: PlayConfig) -> Result<Self> {
        h.check_shape(base, "bouligand source")?;
        Ok(Self {
            h,
            base,
            w_base: apply_w(base, &play),
            play,
            omega: vec![0.0; h.n_x()],
        })
    }
}

impl SourceRule for BouligandSource<'_> {
    fn lipschitz(&self) -> f64 {
        self.play.lipschitz()
    }

    fn start(&mut self, z0: &[f64]) {
        let r = self.play.radius();
        for (i, om) in self.omega.iter_mut().enumerate() {
            *om = bouligand_rule(self.play.w_init(), 0.0, self.base.get(i, 0), z0[i], r);
        }
    }

    fn evaluate(&self, k: usize, z: &[f64], g: &mut [f64]) {
        let r = self.play.radius();
        for i in 0..g.len() {
            let om = bouligand_rule(
                self.w_base.get(i, k - 1),
                self.omega[i],
                self.base.get(i, k),
                z[i],
                r,
            );
            g[i] = self.h.get(i, k) + om;
        }
    }

    fn accept(&mut self, k: usize, z: &[f64]) {
        let r = self.play.radius();
        for i in 0..self.omega.len() {
            self.omega[i] = bouligand_rule(
                self.w_base.get(i, k - 1),
                self.omega[i],
                self.base.get(i, k),
                z[i],
                r,
            );
        }
    }
}

/// `g = h + M^W z` with the active-branch selection taken at `base`.
/// Affine in `z^k`, so each step is one direct solve.
pub struct NewtonSource<'a> {
    h: &'a SpaceTimeField,
    base: &'a SpaceTimeField,
    w_base: SpaceTimeField,
    play: PlayConfig,
    omega: Vec<f64>,
}

impl<'a> NewtonSource<'a> {
    pub fn new(h: &'a SpaceTimeField, base: &'a SpaceTimeField, play: PlayConfig) -> Result<Self> {
        h.check_shape(base, "newton source")?;
        Ok(Self {
            h,
            base,
            w_base: apply_w(base, &play),
            play,
            omega: vec![0.0; h.n_x()],
        })
    }

    fn active(&self, i: usize, k: usize) -> bool {
        let w_prev = if k == 0 {
            self.play.w_init()
        } else {
            self.w_base.get(i, k - 1)
        };
        newton_active(w_prev, self.base.get(i, k), self.play.radius())
    }
}

impl SourceRule for NewtonSource<'_> {
    fn lipschitz(&self) -> f64 {
        self.play.lipschitz()
    }

    fn start(&mut self, z0: &[f64]) {
        for i in 0..self.omega.len() {
            self.omega[i] = if self.active(i, 0) { z0[i] } else { 0.0 };
        }
    }

    fn evaluate(&self, k: usize, z: &[f64], g: &mut [f64]) {
        for i in 0..g.len() {
            let om = if self.active(i, k) { z[i] } else { self.omega[i] };
            g[i] = self.h.get(i, k) + om;
        }
    }

    fn accept(&mut self, k: usize, z: &[f64]) {
        for i in 0..self.omega.len() {
            if self.active(i, k) {
                self.omega[i] = z[i];
            }
        }
    }

    fn affine(&self, k: usize, coeff: &mut [f64], offset: &mut [f64]) -> bool {
        for i in 0..coeff.len() {
            if self.active(i, k) {
                coeff[i] = 1.0;
                offset[i] = self.h.get(i, k);
            } else {
                coeff[i] = 0.0;
                offset[i] = self.h.get(i, k) + self.omega[i];
            }
        }
        true
    }
}

/// Picard statistics of one time integration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub steps: usize,
    pub total_sweeps: usize,
    pub max_sweeps: usize,
    /// Largest observed ratio of successive Picard increments.
    pub max_contraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Forcing {
    /// `W = 0`; the plain heat equation.
    Off,
    Play,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivativeMode {
    Bouligand,
    Newton,
}

/// Increments below this are rounding noise and excluded from contraction
/// ratios.
const CONTRACTION_FLOOR: f64 = 1e-13;

/// Discretized problem data shared by every solve.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: SpatialMesh,
    pub grid: TimeGrid,
    pub boundary: BoundarySpec,
    pub play: PlayConfig,
    pub forcing: Forcing,
    pub params: SolverParams,
    op: HeatOperator,
}

impl Problem {
    pub fn new(
        mesh: SpatialMesh,
        grid: TimeGrid,
        boundary: BoundarySpec,
        play: PlayConfig,
        forcing: Forcing,
        params: SolverParams,
    ) -> Result<Self> {
        params.validate()?;
        let op = HeatOperator::new(mesh, boundary, grid.dt())?;
        Ok(Self {
            mesh,
            grid,
            boundary,
            play,
            forcing,
            params,
            op,
        })
    }

    /// Same data on a different time grid.
    pub fn with_grid(&self, grid: TimeGrid) -> Result<Self> {
        Self::new(self.mesh, grid, self.boundary, self.play, self.forcing, self.params)
    }

    pub fn with_forcing(&self, forcing: Forcing) -> Self {
        let mut p = self.clone();
        p.forcing = forcing;
        p
    }

    pub fn heat_operator(&self) -> &HeatOperator {
        &self.op
    }

    pub fn zeros(&self) -> SpaceTimeField {
        SpaceTimeField::zeros(self.mesh, self.grid)
    }

    fn check_field(&self, f: &SpaceTimeField, what: &str) -> Result<()> {
        if f.mesh() != self.mesh || f.grid() != self.grid {
            return Err(Error::InvalidArgument(alloc::format!(
                "{what}: field does not live on the problem grid"
            )));
        }
        Ok(())
    }

    /// State `y = S(u)` and `w = W[y]`.
    pub fn solve_state(&self, u: &SpaceTimeField, y0: &[f64]) -> Result<(SpaceTimeField, SpaceTimeField)> {
        self.check_field(u, "solve_state")?;
        if y0.len() != self.mesh.nodes() {
            return Err(Error::invalid("solve_state: y0 length differs from n_x"));
        }
        if (0..y0.len()).any(|i| self.op.is_dirichlet(i) && y0[i] != 0.0) {
            return Err(Error::invalid("solve_state: y0 must vanish on Dirichlet nodes"));
        }
        let y = match self.forcing {
            Forcing::Off => self.solve_inhomogeneous(&mut FieldSource { f: u }, y0)?,
            Forcing::Play => self.solve_inhomogeneous(&mut PlayDrivenSource::new(u, self.play), y0)?,
        };
        let w = match self.forcing {
            Forcing::Off => self.zeros(),
            Forcing::Play => apply_w(&y, &self.play),
        };
        Ok((y, w))
    }

    /// First-order problem `d_t - d_xx = h + omega`, `d(., 0) = 0`.
    ///
    /// `base` is `S(u)` for the Bouligand derivative and `S(u + h)` for the
    /// Newton derivative.
    pub fn solve_first_order(
        &self,
        mode: DerivativeMode,
        base: &SpaceTimeField,
        h: &SpaceTimeField,
    ) -> Result<(SpaceTimeField, SpaceTimeField)> {
        self.check_field(base, "solve_first_order")?;
        self.check_field(h, "solve_first_order")?;
        let d0 = vec![0.0; self.mesh.nodes()];
        if self.forcing == Forcing::Off {
            let d = self.solve_inhomogeneous(&mut FieldSource { f: h }, &d0)?;
            return Ok((d, self.zeros()));
        }
        match mode {
            DerivativeMode::Bouligand => {
                let d = self.solve_inhomogeneous(&mut BouligandSource::new(h, base, self.play)?, &d0)?;
                let omega = apply_w_bouligand(base, &d, &self.play)?;
                Ok((d, omega))
            }
            DerivativeMode::Newton => {
                let d = self.solve_inhomogeneous(&mut NewtonSource::new(h, base, self.play)?, &d0)?;
                let omega = apply_w_newton(base, &d, &self.play)?;
                Ok((d, omega))
            }
        }
    }

    pub fn solve_inhomogeneous(&self, rule: &mut dyn SourceRule, z0: &[f64]) -> Result<SpaceTimeField> {
        self.solve_inhomogeneous_with_stats(rule, z0).map(|(z, _)| z)
    }

    pub fn solve_inhomogeneous_with_stats(
        &self,
        rule: &mut dyn SourceRule,
        z0: &[f64],
    ) -> Result<(SpaceTimeField, SolveStats)> {
        let n_x = self.mesh.nodes();
        let n_t = self.grid.nodes();
        let dt = self.grid.dt();
        if z0.len() != n_x {
            return Err(Error::invalid("initial profile length differs from n_x"));
        }
        if z0.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("initial profile has a non-finite entry"));
        }
        let lip = rule.lipschitz();
        if self.params.dt_guard && lip * dt > 0.5 {
            return Err(Error::StepGuard { lipschitz: lip, dt });
        }

        let mut z = SpaceTimeField::zeros(self.mesh, self.grid);
        z.set_column(0, z0);
        rule.start(z0);

        let mut stats = SolveStats::default();
        let mut prev = z0.to_vec();
        let mut g = vec![0.0; n_x];
        let mut coeff = vec![0.0; n_x];
        let mut next = vec![0.0; n_x];

        for k in 1..n_t {
            if rule.affine(k, &mut coeff, &mut g) {
                for i in 0..n_x {
                    next[i] = prev[i] + dt * g[i];
                }
                self.op.zero_dirichlet(&mut next);
                if coeff.iter().all(|&c| c == 0.0) {
                    self.op.solve_in_place(&mut next)?;
                } else {
                    self.op.factor_with_reaction(&coeff)?.solve_in_place(&mut next)?;
                }
                stats.total_sweeps += 1;
                stats.max_sweeps = stats.max_sweeps.max(1);
            } else {
                let mut guess = prev.clone();
                let mut last_res = f64::INFINITY;
                let mut converged = false;
                for sweep in 1..=self.params.fp_max_iter {
                    rule.evaluate(k, &guess, &mut g);
                    for i in 0..n_x {
                        next[i] = prev[i] + dt * g[i];
                    }
                    self.op.zero_dirichlet(&mut next);
                    self.op.solve_in_place(&mut next)?;
                    let res = next
                        .iter()
                        .zip(&guess)
                        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                    if sweep > 1 && last_res > CONTRACTION_FLOOR {
                        stats.max_contraction = stats.max_contraction.max(res / last_res);
                    }
                    stats.total_sweeps += 1;
                    stats.max_sweeps = stats.max_sweeps.max(sweep);
                    guess.copy_from_slice(&next);
                    last_res = res;
                    if !res.is_finite() {
                        break;
                    }
                    if res <= self.params.fp_tol {
                        converged = true;
                        break;
                    }
                }
                if !converged {
                    return Err(Error::FixedPointDiverged {
                        step: k,
                        residual: last_res,
                    });
                }
            }
            rule.accept(k, &next);
            z.set_column(k, &next);
            core::mem::swap(&mut prev, &mut next);
            stats.steps += 1;
        }
        Ok((z, stats))
    }

    /// `(A z^k - z^{k-1}) / dt`, the discrete `z_t - z_xx`, at every node with
    /// `k >= 1`; zero at `k = 0` and on Dirichlet rows.
    pub fn heat_residual(&self, z: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.check_field(z, "heat_residual")?;
        let dt = self.grid.dt();
        let mut out = self.zeros();
        let mut prev = z.column(0);
        for k in 1..self.grid.nodes() {
            let cur = z.column(k);
            let az = self.op.apply(&cur);
            for i in 0..self.mesh.nodes() {
                if !self.op.is_dirichlet(i) {
                    out.set(i, k, (az[i] - prev[i]) / dt);
                }
            }
            prev = cur;
        }
        Ok(out)
    }
}
