//! Empirical constants of the a priori estimates for
//! `z_t - z_xx = g`, `|g| <= L sup_{s<=t} |z| + f`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::SpaceTimeField;
use crate::norms::{norm, norm_xs, time_derivative_lq, NormKind, NormSpec};
use crate::solver::{FieldSource, PlayDrivenSource, Problem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; `None` when `rhs = 0 < lhs` (inconsistent).
    pub empirical_constant: Option<f64>,
    pub final_time: f64,
    pub n_x: usize,
    pub n_t: usize,
}

impl EstimateReport {
    fn new(lhs: f64, rhs: f64, z: &SpaceTimeField) -> Self {
        let empirical_constant = if rhs > 0.0 {
            Some(lhs / rhs)
        } else if lhs == 0.0 {
            Some(0.0)
        } else {
            None
        };
        Self {
            lhs,
            rhs,
            empirical_constant,
            final_time: z.grid().final_time(),
            n_x: z.n_x(),
            n_t: z.n_t(),
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.empirical_constant.is_some()
    }

    pub fn constant(&self) -> f64 {
        self.empirical_constant.unwrap_or(f64::INFINITY)
    }
}

/// Which source drives the estimate problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateSource {
    /// `g = f`
    Pure,
    /// `g = f + W[z]` with the problem's play.
    PlayDriven,
}

pub fn solve_estimate_problem(
    problem: &Problem,
    f: &SpaceTimeField,
    z0: &[f64],
    source: EstimateSource,
) -> Result<SpaceTimeField> {
    match source {
        EstimateSource::Pure => problem.solve_inhomogeneous(&mut FieldSource { f }, z0),
        EstimateSource::PlayDriven => {
            problem.solve_inhomogeneous(&mut PlayDrivenSource::new(f, problem.play), z0)
        }
    }
}

fn sq(v: f64) -> f64 {
    v * v
}

/// `int |z0|^2 + 1/2 int |grad z0|^2`
fn initial_energy(problem: &Problem, z0: &[f64]) -> f64 {
    let wx = problem.mesh.weights();
    let dx = problem.mesh.dx();
    let n = z0.len();
    let mut s = 0.0;
    for i in 0..n {
        let g = if i == 0 {
            (z0[1] - z0[0]) / dx
        } else if i + 1 == n {
            (z0[n - 1] - z0[n - 2]) / dx
        } else {
            (z0[i + 1] - z0[i - 1]) / (2.0 * dx)
        };
        s += wx[i] * (z0[i] * z0[i] + 0.5 * g * g);
    }
    s
}

/// Energy-type bound:
/// `int sup_t |z|^2 dx + sup_t int |z_x|^2 dx + int int z_t^2
///   <= C1(T) (int int f^2 + int z0^2 + 1/2 int |z0_x|^2)`.
pub fn energy_sides(problem: &Problem, z: &SpaceTimeField, f: &SpaceTimeField, z0: &[f64]) -> Result<(f64, f64)> {
    let lhs = sq(norm(z, &NormSpec::lq_x_ct(2.0))?)
        + sq(norm(z, &NormSpec::new(NormKind::LinfTV))?)
        + sq(norm(z, &NormSpec::new(NormKind::H1tL2x))?);
    let rhs = sq(norm(f, &NormSpec::new(NormKind::L2Qt))?) + initial_energy(problem, z0);
    Ok((lhs, rhs))
}

/// Sup bound: `||z||_inf <= C2(T) (int_0^T ||f||_inf + ||z0||_inf)`.
pub fn linf_sides(z: &SpaceTimeField, f: &SpaceTimeField, z0: &[f64]) -> Result<(f64, f64)> {
    let lhs = z.max_abs();
    let z0_sup = z0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rhs = norm(f, &NormSpec::new(NormKind::L1tLinfx))? + z0_sup;
    Ok((lhs, rhs))
}

pub fn check_energy_estimate(
    problem: &Problem,
    f: &SpaceTimeField,
    z0: &[f64],
    source: EstimateSource,
) -> Result<EstimateReport> {
    let z = solve_estimate_problem(problem, f, z0, source)?;
    let (lhs, rhs) = energy_sides(problem, &z, f, z0)?;
    Ok(EstimateReport::new(lhs, rhs, &z))
}

pub fn check_linf_estimate(
    problem: &Problem,
    f: &SpaceTimeField,
    z0: &[f64],
    source: EstimateSource,
) -> Result<EstimateReport> {
    let z = solve_estimate_problem(problem, f, z0, source)?;
    let (lhs, rhs) = linf_sides(&z, f, z0)?;
    Ok(EstimateReport::new(lhs, rhs, &z))
}

/// Both estimates from one solve.
pub fn check_estimates(
    problem: &Problem,
    f: &SpaceTimeField,
    z0: &[f64],
    source: EstimateSource,
) -> Result<(EstimateReport, EstimateReport)> {
    let z = solve_estimate_problem(problem, f, z0, source)?;
    let (el, er) = energy_sides(problem, &z, f, z0)?;
    let (ll, lr) = linf_sides(&z, f, z0)?;
    Ok((EstimateReport::new(el, er, &z), EstimateReport::new(ll, lr, &z)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderEstimates {
    /// `int int d_t^2 + sup_t int |d_x|^2 <= C1 int int h^2`
    pub energy: EstimateReport,
    /// `||d||_inf <= C2 int_0^T ||h||_inf dt`
    pub linf: EstimateReport,
    /// `||d_t||^2_{L^{2+eps}(Q_T)}` against `||h||^2_{X_S}`
    pub lq: EstimateReport,
}

pub fn check_first_order_estimates(
    d: &SpaceTimeField,
    h: &SpaceTimeField,
    epsilon: f64,
) -> Result<FirstOrderEstimates> {
    d.check_shape(h, "first-order estimates")?;
    if h.max_abs() == 0.0 && d.max_abs() != 0.0 {
        return Err(Error::invalid("first-order estimates: h = 0 but d != 0"));
    }
    let energy_lhs = sq(norm(d, &NormSpec::new(NormKind::H1tL2x))?)
        + sq(norm(d, &NormSpec::new(NormKind::LinfTV))?);
    let energy_rhs = sq(norm(h, &NormSpec::new(NormKind::L2Qt))?);
    let linf_lhs = d.max_abs();
    let linf_rhs = norm(h, &NormSpec::new(NormKind::L1tLinfx))?;
    let lq_lhs = sq(time_derivative_lq(d, 2.0 + epsilon));
    let lq_rhs = sq(norm_xs(h, epsilon));
    Ok(FirstOrderEstimates {
        energy: EstimateReport::new(energy_lhs, energy_rhs, d),
        linf: EstimateReport::new(linf_lhs, linf_rhs, d),
        lq: EstimateReport::new(lq_lhs, lq_rhs, d),
    })
}

/// Step length of the energy argument's time slicing,
/// `dt* = 3/4 (L^2/4 + L + 2)^{-1}`; the energy constant can grow at most
/// by a factor 3 per slice, i.e. at rate `ln 3 / dt*`.
pub fn energy_slice_length(lipschitz: f64) -> f64 {
    0.75 / (0.25 * lipschitz * lipschitz + lipschitz + 2.0)
}

pub fn energy_growth_rate(lipschitz: f64) -> f64 {
    libm::log(3.0) / energy_slice_length(lipschitz)
}

/// Least-squares affine fit of `log C1` against `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub intercept: f64,
    pub slope: f64,
    /// Lift of the fitted line that puts every sample on or below it.
    pub envelope_offset: f64,
}

impl GrowthFit {
    pub fn envelope(&self, t: f64) -> f64 {
        self.intercept + self.slope * t + self.envelope_offset
    }
}

pub fn fit_log_growth(samples: &[(f64, f64)]) -> Result<GrowthFit> {
    if samples.len() < 2 {
        return Err(Error::invalid("growth fit needs at least two samples"));
    }
    if samples.iter().any(|&(_, c)| !(c > 0.0 && c.is_finite())) {
        return Err(Error::invalid("growth fit needs positive finite constants"));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(t, c)| (t, libm::log(c))).collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    if stt == 0.0 {
        return Err(Error::invalid("growth fit needs distinct final times"));
    }
    let stl: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let slope = stl / stt;
    let intercept = ml - slope * mt;
    let envelope_offset = pts
        .iter()
        .map(|p| p.1 - intercept - slope * p.0)
        .fold(0.0f64, f64::max);
    Ok(GrowthFit {
        intercept,
        slope,
        envelope_offset,
    })
}
