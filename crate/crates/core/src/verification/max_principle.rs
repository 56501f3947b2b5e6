//! Discrete maximum principle for the source-free heat equation.

use alloc::vec::Vec;

use crate::error::Result;
use crate::solver::{Problem, ZeroSource};

/// Rounding allowance relative to `||z0||_inf` for the sup-norm checks.
/// Non-negativity is checked exactly: Thomas elimination on an M-matrix with
/// non-negative data never produces a negative entry.
pub const SUP_ROUNDING: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// `||z(., t_k)||_inf > ||z0||_inf`
    SupExceeded { node: usize, step: usize },
    /// `||z(., t_k)||_inf > ||z(., t_{k-1})||_inf`
    SupIncreased { step: usize },
    /// `z < 0` although `z0 >= 0`
    Negative { node: usize, step: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxPrincipleReport {
    pub initial_sup: f64,
    /// `||z(., t_k)||_inf` for every time node.
    pub sup_per_step: Vec<f64>,
    pub min_per_step: Vec<f64>,
    pub nonnegative_data: bool,
    /// First violation in time-major order.
    pub violation: Option<Violation>,
}

impl MaxPrincipleReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

pub fn check_max_principle(problem: &Problem, z0: &[f64]) -> Result<MaxPrincipleReport> {
    let z = problem.solve_inhomogeneous(&mut ZeroSource, z0)?;
    let initial_sup = z0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let nonnegative_data = z0.iter().all(|&v| v >= 0.0);
    let slack = SUP_ROUNDING * initial_sup;

    let mut sup_per_step = Vec::with_capacity(z.n_t());
    let mut min_per_step = Vec::with_capacity(z.n_t());
    let mut violation = None;
    for k in 0..z.n_t() {
        let col = z.column(k);
        let sup = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        if violation.is_none() {
            if let Some(node) = col.iter().position(|v| v.abs() > initial_sup + slack) {
                violation = Some(Violation::SupExceeded { node, step: k });
            } else if k > 0 && sup > sup_per_step[k - 1] + slack {
                violation = Some(Violation::SupIncreased { step: k });
            } else if nonnegative_data {
                if let Some(node) = col.iter().position(|&v| v < 0.0) {
                    violation = Some(Violation::Negative { node, step: k });
                }
            }
        }
        sup_per_step.push(sup);
        min_per_step.push(min);
    }
    Ok(MaxPrincipleReport {
        initial_sup,
        sup_per_step,
        min_per_step,
        nonnegative_data,
        violation,
    })
}
