//! Scalar play operator on time grids.
//!
//! The time-discrete play is the clamp recursion
//!
//! ```text
//! w_k = max(v_k - r, min(v_k + r, w_{k-1})),   w_{-1} = w_init
//! ```
//!
//! which reproduces the continuous play exactly at the nodes of a
//! piecewise-linear input. Alongside it live the exact directional derivative
//! of the recursion (Bouligand derivative) and a linear selection of its
//! Newton derivative that resolves ties to the active (clamped) branch.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Node values of a time signal on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSignal {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl ScalarSignal {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nodes() {
            return Err(Error::invalid("signal length differs from grid node count"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("signal contains a non-finite value"));
        }
        Ok(Self { grid, values })
    }

    /// Signal on `[0, 1]` with `values.len()` uniformly spaced nodes.
    pub fn on_unit_interval(values: Vec<f64>) -> Result<Self> {
        let grid = TimeGrid::new(1.0, values.len())?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.len() != other.len() {
            return Err(Error::invalid("signals live on different time grids"));
        }
        Ok(())
    }
}

/// Play radius and initial memory.
///
/// `lipschitz` and `growth` are the constants `L` and `c0` of the Lipschitz
/// and linear-growth bounds; for the play they are `1` and `r + |w_init|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayConfig {
    radius: f64,
    w_init: f64,
    lipschitz: f64,
    growth: f64,
}

impl PlayConfig {
    pub fn new(radius: f64, w_init: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid("play radius r must be finite and > 0"));
        }
        if !w_init.is_finite() {
            return Err(Error::invalid("play initial memory must be finite"));
        }
        Ok(Self {
            radius,
            w_init,
            lipschitz: 1.0,
            growth: radius + w_init.abs(),
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn w_init(&self) -> f64 {
        self.w_init
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn initial_state(&self) -> PlayState {
        PlayState { w: self.w_init }
    }
}

/// Running memory of a play.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayState {
    pub w: f64,
}

impl PlayState {
    /// Advances the memory with input `v`; returns the new output.
    pub fn update(&mut self, v: f64, r: f64) -> Result<f64> {
        self.w = play_step(self.w, v, r)?;
        Ok(self.w)
    }
}

#[inline]
pub(crate) fn clamp_step(w_prev: f64, v: f64, r: f64) -> f64 {
    (v - r).max((v + r).min(w_prev))
}

pub fn play_step(w_prev: f64, v: f64, r: f64) -> Result<f64> {
    if !(w_prev.is_finite() && v.is_finite() && r.is_finite()) {
        return Err(Error::invalid("play_step: non-finite input"));
    }
    if r <= 0.0 {
        return Err(Error::invalid("play_step: radius must be > 0"));
    }
    Ok(clamp_step(w_prev, v, r))
}

/// Derivative of one clamp step in the direction `(dw_prev, dv)`.
#[inline]
pub(crate) fn bouligand_rule(w_prev: f64, dw_prev: f64, v: f64, dv: f64, r: f64) -> f64 {
    let lo = v - r;
    let hi = v + r;
    if w_prev < lo || w_prev > hi {
        dv
    } else if w_prev == lo {
        dv.max(dw_prev)
    } else if w_prev == hi {
        dv.min(dw_prev)
    } else {
        dw_prev
    }
}

/// Branch selection of the Newton derivative: ties count as active.
#[inline]
pub(crate) fn newton_active(w_prev: f64, v: f64, r: f64) -> bool {
    w_prev <= v - r || w_prev >= v + r
}

pub fn play_bouligand_step(w_prev: f64, dw_prev: f64, v: f64, dv: f64, r: f64) -> Result<f64> {
    if ![w_prev, dw_prev, v, dv, r].iter().all(|x| x.is_finite()) {
        return Err(Error::invalid("play_bouligand_step: non-finite input"));
    }
    if r <= 0.0 {
        return Err(Error::invalid("play_bouligand_step: radius must be > 0"));
    }
    Ok(bouligand_rule(w_prev, dw_prev, v, dv, r))
}

/// Folds the play over a raw slice of node values.
pub(crate) fn play_fold(v: &[f64], cfg: &PlayConfig, out: &mut [f64]) {
    let r = cfg.radius;
    let mut w = cfg.w_init;
    for (o, &vk) in out.iter_mut().zip(v) {
        w = clamp_step(w, vk, r);
        *o = w;
    }
}

/// Folds the Bouligand recursion given the base memory trajectory `w_base`
/// (the play output of `v`).
pub(crate) fn bouligand_fold(v: &[f64], w_base: &[f64], eta: &[f64], cfg: &PlayConfig, out: &mut [f64]) {
    let r = cfg.radius;
    let mut w_prev = cfg.w_init;
    let mut dw = 0.0;
    for k in 0..v.len() {
        dw = bouligand_rule(w_prev, dw, v[k], eta[k], r);
        out[k] = dw;
        w_prev = w_base[k];
    }
}

pub(crate) fn newton_fold(v: &[f64], w_base: &[f64], eta: &[f64], cfg: &PlayConfig, out: &mut [f64]) {
    let r = cfg.radius;
    let mut w_prev = cfg.w_init;
    let mut dw = 0.0;
    for k in 0..v.len() {
        if newton_active(w_prev, v[k], r) {
            dw = eta[k];
        }
        out[k] = dw;
        w_prev = w_base[k];
    }
}

pub fn play_evaluate(v: &ScalarSignal, cfg: &PlayConfig) -> Result<ScalarSignal> {
    let mut out = vec![0.0; v.len()];
    play_fold(&v.values, cfg, &mut out);
    Ok(ScalarSignal {
        grid: v.grid,
        values: out,
    })
}

/// Directional derivative of the play at `v` in direction `eta`.
///
/// Positively homogeneous but not linear in `eta`.
pub fn play_bouligand_evaluate(
    v: &ScalarSignal,
    eta: &ScalarSignal,
    cfg: &PlayConfig,
) -> Result<ScalarSignal> {
    v.check_grid(eta)?;
    let mut w_base = vec![0.0; v.len()];
    play_fold(&v.values, cfg, &mut w_base);
    let mut out = vec![0.0; v.len()];
    bouligand_fold(&v.values, &w_base, &eta.values, cfg, &mut out);
    Ok(ScalarSignal {
        grid: v.grid,
        values: out,
    })
}

/// Applies the Newton-derivative selection taken at `v_base` to `eta`.
pub fn play_newton_apply(
    v_base: &ScalarSignal,
    eta: &ScalarSignal,
    cfg: &PlayConfig,
) -> Result<ScalarSignal> {
    v_base.check_grid(eta)?;
    let mut w_base = vec![0.0; v_base.len()];
    play_fold(&v_base.values, cfg, &mut w_base);
    let mut out = vec![0.0; v_base.len()];
    newton_fold(&v_base.values, &w_base, &eta.values, cfg, &mut out);
    Ok(ScalarSignal {
        grid: v_base.grid,
        values: out,
    })
}
