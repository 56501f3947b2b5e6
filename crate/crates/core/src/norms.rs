//! Discrete Bochner norms on space-time fields.
//!
//! Time integrals use the right-endpoint rectangle rule over the `n_t - 1`
//! steps (matching backward Euler, which never reads a source at `t_0`);
//! space integrals use trapezoid weights; sup norms are exact grid maxima.

use alloc::format;

use crate::error::{Error, Result};
use crate::grid::SpaceTimeField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    /// `L^2(Omega_T)`
    L2Qt,
    /// `H^1(0,T; L^2)` seminorm: the `L^2(Omega_T)` norm of the forward
    /// time difference.
    H1tL2x,
    /// `L^inf(0,T; H^1)` seminorm: max over time of the `L^2` norm of the
    /// central-difference gradient.
    LinfTV,
    /// `L^{2+eps}(0,T; L^inf)`, the control space.
    Xs,
    /// `L^q(Omega; C[0,T])`
    LqXCt,
    /// `L^1(0,T; L^inf)`
    L1tLinfx,
    /// `L^q(Omega_T)`
    LqQt,
}

impl NormKind {
    pub const ALL: [NormKind; 7] = [
        NormKind::L2Qt,
        NormKind::H1tL2x,
        NormKind::LinfTV,
        NormKind::Xs,
        NormKind::LqXCt,
        NormKind::L1tLinfx,
        NormKind::LqQt,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NormKind::L2Qt => "L2_QT",
            NormKind::H1tL2x => "H1t_L2x",
            NormKind::LinfTV => "LinfT_V",
            NormKind::Xs => "XS",
            NormKind::LqXCt => "Lq_x_Ct",
            NormKind::L1tLinfx => "L1t_Linfx",
            NormKind::LqQt => "Lq_QT",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown norm kind `{name}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub kind: NormKind,
    /// Exponent for `Lq_x_Ct` and `Lq_QT`.
    pub q: f64,
    /// `eps` of the `L^{2+eps}` time exponent in `XS`.
    pub epsilon: f64,
}

pub const DEFAULT_EPSILON: f64 = 0.5;

impl NormSpec {
    pub fn new(kind: NormKind) -> Self {
        Self {
            kind,
            q: 2.0,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn xs(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::new(NormKind::Xs)
        }
    }

    pub fn lq_x_ct(q: f64) -> Self {
        Self {
            q,
            ..Self::new(NormKind::LqXCt)
        }
    }

    pub fn lq_qt(q: f64) -> Self {
        Self {
            q,
            ..Self::new(NormKind::LqQt)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            NormKind::Xs if !(self.epsilon > 0.0 && self.epsilon.is_finite()) => {
                Err(Error::invalid("XS norm needs epsilon > 0"))
            }
            NormKind::LqXCt | NormKind::LqQt if !(self.q >= 1.0 && self.q.is_finite()) => {
                Err(Error::invalid("Lq norms need q >= 1"))
            }
            _ => Ok(()),
        }
    }
}

pub fn norm(field: &SpaceTimeField, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    if !field.is_finite() {
        return Err(Error::invalid("norm of a non-finite field"));
    }
    Ok(match spec.kind {
        NormKind::L2Qt => lq_qt(field, 2.0),
        NormKind::H1tL2x => time_derivative_lq(field, 2.0),
        NormKind::LinfTV => linf_t_gradient(field),
        NormKind::Xs => xs(field, spec.epsilon),
        NormKind::LqXCt => lq_x_ct(field, spec.q),
        NormKind::L1tLinfx => {
            let dt = field.grid().dt();
            (1..field.n_t()).map(|k| dt * space_sup(field, k)).sum()
        }
        NormKind::LqQt => lq_qt(field, spec.q),
    })
}

/// `H1t_L2x + LinfT_V`, the norm of the state space.
pub fn norm_ys(field: &SpaceTimeField) -> f64 {
    time_derivative_lq(field, 2.0) + linf_t_gradient(field)
}

/// `L^{2+eps}(0,T; L^inf)` norm.
pub fn norm_xs(field: &SpaceTimeField, epsilon: f64) -> f64 {
    xs(field, epsilon)
}

fn space_sup(field: &SpaceTimeField, k: usize) -> f64 {
    (0..field.n_x()).fold(0.0, |m, i| m.max(field.get(i, k).abs()))
}

fn lq_qt(field: &SpaceTimeField, q: f64) -> f64 {
    let dt = field.grid().dt();
    let wx = field.mesh().weights();
    let mut s = 0.0;
    for (i, row) in field.rows().enumerate() {
        let r: f64 = row[1..].iter().map(|&v| pow_abs(v, q)).sum();
        s += wx[i] * dt * r;
    }
    root(s, q)
}

/// `L^q(Omega_T)` norm of the forward time difference `(f^{k+1} - f^k) / dt`.
pub fn time_derivative_lq(field: &SpaceTimeField, q: f64) -> f64 {
    let dt = field.grid().dt();
    let wx = field.mesh().weights();
    let mut s = 0.0;
    for (i, row) in field.rows().enumerate() {
        let r: f64 = row.windows(2).map(|p| pow_abs((p[1] - p[0]) / dt, q)).sum();
        s += wx[i] * dt * r;
    }
    root(s, q)
}

fn linf_t_gradient(field: &SpaceTimeField) -> f64 {
    let n = field.n_x();
    let dx = field.mesh().dx();
    let wx = field.mesh().weights();
    let mut best = 0.0f64;
    for k in 0..field.n_t() {
        let mut s = 0.0;
        for i in 0..n {
            let g = if i == 0 {
                (field.get(1, k) - field.get(0, k)) / dx
            } else if i + 1 == n {
                (field.get(n - 1, k) - field.get(n - 2, k)) / dx
            } else {
                (field.get(i + 1, k) - field.get(i - 1, k)) / (2.0 * dx)
            };
            s += wx[i] * g * g;
        }
        best = best.max(s);
    }
    libm::sqrt(best)
}

fn xs(field: &SpaceTimeField, epsilon: f64) -> f64 {
    let p = 2.0 + epsilon;
    let dt = field.grid().dt();
    let s: f64 = (1..field.n_t()).map(|k| dt * pow_abs(space_sup(field, k), p)).sum();
    root(s, p)
}

fn lq_x_ct(field: &SpaceTimeField, q: f64) -> f64 {
    let wx = field.mesh().weights();
    let s: f64 = field
        .rows()
        .zip(&wx)
        .map(|(row, w)| {
            let m = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            w * pow_abs(m, q)
        })
        .sum();
    root(s, q)
}

fn pow_abs(v: f64, q: f64) -> f64 {
    let a = v.abs();
    if q == 2.0 {
        a * a
    } else {
        libm::pow(a, q)
    }
}

fn root(s: f64, q: f64) -> f64 {
    if q == 2.0 {
        libm::sqrt(s)
    } else if s == 0.0 {
        0.0
    } else {
        libm::pow(s, 1.0 / q)
    }
}
