//! Remainder `r = S(u + lambda h) - S(u) - d` of the first-order expansion,
//! measured along a decreasing ladder of step sizes.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::SpaceTimeField;
use crate::norms::{norm_xs, norm_ys};
use crate::solver::{DerivativeMode, Problem};

pub const DEFAULT_LADDER: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderPoint {
    pub lambda: f64,
    /// `||r||_{Y_S} / ||lambda h||_{X_S}`
    pub ratio: f64,
    pub remainder_ys: f64,
    pub step_xs: f64,
    /// `||S(u + lambda h) - S(u)||_{Y_S}`
    pub increment_ys: f64,
    pub derivative_ys: f64,
}

impl RemainderPoint {
    /// Triangle inequality `||y_l - y|| <= ||d|| + ratio * ||lambda h||`.
    pub fn sandwich_holds(&self) -> bool {
        let bound = self.derivative_ys + self.ratio * self.step_xs;
        self.increment_ys <= bound * (1.0 + 1e-12) + 1e-300
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainderReport {
    pub mode: DerivativeMode,
    pub epsilon: f64,
    pub points: Vec<RemainderPoint>,
}

impl RemainderReport {
    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ratio).collect()
    }

    /// `ratio(lambda_min) / ratio(lambda_max)`.
    pub fn decay_factor(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) if a.ratio > 0.0 => b.ratio / a.ratio,
            _ => 0.0,
        }
    }

    /// Index from which the ratios are non-increasing to the end of the
    /// ladder.
    pub fn monotone_from(&self) -> usize {
        let r = self.ratios();
        let mut start = r.len().saturating_sub(1);
        while start > 0 && r[start - 1] >= r[start] {
            start -= 1;
        }
        start
    }

    /// Ratios are non-increasing over at least the last three ladder points.
    pub fn eventually_decreasing(&self) -> bool {
        self.points.len() >= 3 && self.monotone_from() + 3 <= self.points.len()
    }
}

/// Fixed data of a remainder study; the base state `S(u)` is computed once.
pub struct RemainderStudy<'a> {
    problem: &'a Problem,
    u: &'a SpaceTimeField,
    h: &'a SpaceTimeField,
    y0: &'a [f64],
    mode: DerivativeMode,
    epsilon: f64,
    y: SpaceTimeField,
}

impl<'a> RemainderStudy<'a> {
    pub fn new(
        problem: &'a Problem,
        u: &'a SpaceTimeField,
        h: &'a SpaceTimeField,
        y0: &'a [f64],
        mode: DerivativeMode,
        epsilon: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid("remainder study: epsilon must be > 0"));
        }
        if norm_xs(h, epsilon) == 0.0 {
            return Err(Error::invalid(
                "remainder study: direction h vanishes in X_S, ratio undefined",
            ));
        }
        let (y, _) = problem.solve_state(u, y0)?;
        Ok(Self {
            problem,
            u,
            h,
            y0,
            mode,
            epsilon,
            y,
        })
    }

    pub fn base_state(&self) -> &SpaceTimeField {
        &self.y
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Remainder field, perturbed state and derivative at one ladder value.
    pub fn fields(&self, lambda: f64) -> Result<RemainderFields> {
        let step = self.h.scale(lambda);
        let (y_l, _) = self.problem.solve_state(&self.u.add(&step), self.y0)?;
        let base = match self.mode {
            DerivativeMode::Bouligand => &self.y,
            DerivativeMode::Newton => &y_l,
        };
        let (d, omega) = self.problem.solve_first_order(self.mode, base, &step)?;
        let remainder = y_l.sub(&self.y).sub(&d);
        Ok(RemainderFields {
            step,
            y_lambda: y_l,
            d,
            omega,
            remainder,
        })
    }

    pub fn point(&self, lambda: f64) -> Result<RemainderPoint> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("remainder study: lambda must be > 0"));
        }
        let f = self.fields(lambda).map_err(|e| Error::AtLadderPoint {
            lambda,
            source: Box::new(e),
        })?;
        let remainder_ys = norm_ys(&f.remainder);
        let step_xs = norm_xs(&f.step, self.epsilon);
        Ok(RemainderPoint {
            lambda,
            ratio: remainder_ys / step_xs,
            remainder_ys,
            step_xs,
            increment_ys: norm_ys(&f.y_lambda.sub(&self.y)),
            derivative_ys: norm_ys(&f.d),
        })
    }

    /// Assembles a report from points computed in any order.
    pub fn report(&self, points: Vec<RemainderPoint>) -> RemainderReport {
        RemainderReport {
            mode: self.mode,
            epsilon: self.epsilon,
            points,
        }
    }

    pub fn run(&self, ladder: &[f64]) -> Result<RemainderReport> {
        check_ladder(ladder)?;
        let points = ladder.iter().map(|&l| self.point(l)).collect::<Result<Vec<_>>>()?;
        Ok(self.report(points))
    }
}

pub struct RemainderFields {
    pub step: SpaceTimeField,
    pub y_lambda: SpaceTimeField,
    pub d: SpaceTimeField,
    pub omega: SpaceTimeField,
    pub remainder: SpaceTimeField,
}

pub fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::invalid("lambda ladder is empty"));
    }
    if ladder.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::invalid("lambda ladder entries must be positive"));
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("lambda ladder must be strictly decreasing"));
    }
    Ok(())
}

pub fn run_remainder_study(
    problem: &Problem,
    u: &SpaceTimeField,
    h: &SpaceTimeField,
    y0: &[f64],
    ladder: &[f64],
    mode: DerivativeMode,
    epsilon: f64,
) -> Result<RemainderReport> {
    check_ladder(ladder)?;
    RemainderStudy::new(problem, u, h, y0, mode, epsilon)?.run(ladder)
}
