//! Semismooth Newton iteration for `S(u) = y_target`.
//!
//! The Newton derivative `M^S` at `u_k` maps `h` to the solution `d` of the
//! first-order problem with `omega = M^W d`, the selection taken at
//! `S(u_k)`. It is inverted in closed form: for a prescribed `d` the discrete
//! first-order equation reads `h = (A d^k - d^{k-1}) / dt - (M^W d)^k`, which
//! costs one pass over the grid.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::apply_w_newton;
use crate::grid::SpaceTimeField;
use crate::norms::{norm_xs, norm_ys};
use crate::solver::{Forcing, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMeasure {
    /// `||u_k - u*||_{X_S}` on the nodes the solver actually reads.
    ControlError,
    /// `||S(u_k) - y_target||_{Y_S}`
    Residual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonRunReport {
    pub measure: ErrorMeasure,
    /// `e_k` for `k = 0..=iterations`.
    pub errors: Vec<f64>,
    /// `||S(u_k) - y_target||_{Y_S}` for `k = 0..=iterations`.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl NewtonRunReport {
    /// `e_{k+1} / e_k`
    pub fn error_ratios(&self) -> Vec<f64> {
        self.errors
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
            .collect()
    }

    /// The last `count` error ratios are strictly decreasing.
    pub fn ratios_strictly_decreasing(&self, count: usize) -> bool {
        let r = self.error_ratios();
        if r.len() < count {
            return false;
        }
        r[r.len() - count..].windows(2).all(|w| w[1] < w[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Stop once `||S(u_k) - y_target||_{Y_S} <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Exponent of the `X_S` error norm.
    pub epsilon: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10,
            epsilon: crate::norms::DEFAULT_EPSILON,
        }
    }
}

/// Zeroes the entries the solver never reads: time node 0 and Dirichlet rows.
pub fn identifiable_part(problem: &Problem, u: &SpaceTimeField) -> SpaceTimeField {
    let mut out = u.clone();
    let op = problem.heat_operator();
    for i in 0..out.n_x() {
        if op.is_dirichlet(i) {
            out.row_mut(i).fill(0.0);
        } else {
            out.set(i, 0, 0.0);
        }
    }
    out
}

/// Solves `M^S delta = residual` for the selection at the trajectory `state`.
/// `residual` must vanish at `t = 0`.
pub fn newton_step(problem: &Problem, state: &SpaceTimeField, residual: &SpaceTimeField) -> Result<SpaceTimeField> {
    let delta = problem.heat_residual(residual)?;
    let delta = match problem.forcing {
        Forcing::Off => delta,
        Forcing::Play => delta.sub(&apply_w_newton(state, residual, &problem.play)?),
    };
    Ok(identifiable_part(problem, &delta))
}

/// Runs the iteration from `u0`; returns the final control and the run report.
/// Reaching `max_iter` yields a non-converged report, not an error.
pub fn semismooth_newton_solve(
    problem: &Problem,
    y_target: &SpaceTimeField,
    y0: &[f64],
    u0: &SpaceTimeField,
    u_star: Option<&SpaceTimeField>,
    opts: &NewtonOptions,
) -> Result<(SpaceTimeField, NewtonRunReport)> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("newton: tol must be > 0"));
    }
    if (0..y_target.n_x()).any(|i| y_target.get(i, 0) != y0.get(i).copied().unwrap_or(f64::NAN)) {
        return Err(Error::invalid("newton: y_target(., 0) must equal y0"));
    }
    let measure = if u_star.is_some() {
        ErrorMeasure::ControlError
    } else {
        ErrorMeasure::Residual
    };
    let mut u = u0.clone();
    let mut errors = Vec::new();
    let mut residuals = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    loop {
        let (y, _) = problem.solve_state(&u, y0)?;
        let rho = y_target.sub(&y);
        let res = norm_ys(&rho);
        residuals.push(res);
        errors.push(match u_star {
            Some(us) => norm_xs(&identifiable_part(problem, &u.sub(us)), opts.epsilon),
            None => res,
        });
        if res <= opts.tol {
            converged = true;
            break;
        }
        if iterations == opts.max_iter {
            break;
        }
        let delta = newton_step(problem, &y, &rho)?;
        u = u.add(&delta);
        iterations += 1;
    }
    Ok((
        u,
        NewtonRunReport {
            measure,
            errors,
            residuals,
            converged,
            iterations,
        },
    ))
}
