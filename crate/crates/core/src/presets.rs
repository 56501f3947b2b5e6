//! Named analytic fields: separable `a(x) * b(t)` controls, directions and
//! initial profiles.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::grid::{SpaceTimeField, SpatialMesh, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialShape {
    Constant(f64),
    /// `amp * sin(m * pi * x / X)`
    Sine { m: u32, amp: f64 },
    /// Smooth bump of height one centred in the domain, support of half its length.
    Bump,
}

impl SpatialShape {
    pub fn eval(&self, x: f64, length: f64) -> f64 {
        match *self {
            SpatialShape::Constant(c) => c,
            SpatialShape::Sine { m, amp } => amp * libm::sin(m as f64 * PI * x / length),
            SpatialShape::Bump => {
                let s = (x - 0.5 * length) / (0.25 * length);
                let b = 1.0 - s * s;
                if b > 0.0 {
                    b * b
                } else {
                    0.0
                }
            }
        }
    }

    pub fn profile(&self, mesh: &SpatialMesh) -> Vec<f64> {
        (0..mesh.nodes())
            .map(|i| self.eval(mesh.coord(i), mesh.length()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemporalShape {
    One,
    /// `t`
    Linear,
    /// `sin(omega * t)`
    Sine { omega: f64 },
    /// `a + b * t`
    Affine { a: f64, b: f64 },
}

impl TemporalShape {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TemporalShape::One => 1.0,
            TemporalShape::Linear => t,
            TemporalShape::Sine { omega } => libm::sin(omega * t),
            TemporalShape::Affine { a, b } => a + b * t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separable {
    pub space: SpatialShape,
    pub time: TemporalShape,
}

impl Separable {
    pub const fn new(space: SpatialShape, time: TemporalShape) -> Self {
        Self { space, time }
    }

    pub fn field(&self, mesh: SpatialMesh, grid: TimeGrid) -> SpaceTimeField {
        let length = mesh.length();
        SpaceTimeField::from_fn(mesh, grid, |x, t| self.space.eval(x, length) * self.time.eval(t))
    }
}

const fn sine(m: u32, amp: f64) -> SpatialShape {
    SpatialShape::Sine { m, amp }
}

/// Controls `u`.
pub const CONTROL_PRESETS: &[(&str, Separable)] = &[
    ("zero", Separable::new(SpatialShape::Constant(0.0), TemporalShape::One)),
    ("desk", Separable::new(sine(1, 2.0), TemporalShape::One)),
    ("frozen", Separable::new(sine(1, 0.1), TemporalShape::One)),
    ("one", Separable::new(SpatialShape::Constant(1.0), TemporalShape::One)),
    ("sin1", Separable::new(sine(1, 1.0), TemporalShape::One)),
];

/// Directions `h` (and Newton perturbations).
pub const DIRECTION_PRESETS: &[(&str, Separable)] = &[
    ("desk", Separable::new(sine(2, 1.0), TemporalShape::Linear)),
    ("sin1", Separable::new(sine(1, 1.0), TemporalShape::One)),
    ("sin1_t", Separable::new(sine(1, 1.0), TemporalShape::Linear)),
    ("sin2", Separable::new(sine(2, 1.0), TemporalShape::One)),
    ("sin1_sin", Separable::new(sine(1, 1.0), TemporalShape::Sine { omega: 2.0 * PI })),
    ("bump", Separable::new(SpatialShape::Bump, TemporalShape::One)),
    ("bump_t", Separable::new(SpatialShape::Bump, TemporalShape::Linear)),
    // unit sup norm on T <= 1
    ("sin3_ramp", Separable::new(sine(3, 1.0), TemporalShape::Affine { a: 0.5, b: 0.5 })),
];

/// Initial profiles `y0`.
pub const PROFILE_PRESETS: &[(&str, SpatialShape)] = &[
    ("zero", SpatialShape::Constant(0.0)),
    ("sin1", sine(1, 1.0)),
    ("bump", SpatialShape::Bump),
];

fn lookup<T: Copy>(table: &[(&str, T)], name: &str) -> Option<T> {
    table.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
}

pub fn control(name: &str) -> Option<Separable> {
    lookup(CONTROL_PRESETS, name)
}

pub fn direction(name: &str) -> Option<Separable> {
    lookup(DIRECTION_PRESETS, name)
}

pub fn profile(name: &str) -> Option<SpatialShape> {
    lookup(PROFILE_PRESETS, name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookups() {
        assert!(control("desk").is_some());
        assert!(direction("bump_t").is_some());
        assert!(profile("sin1").is_some());
        assert!(control("nope").is_none());
    }

    #[test]
    fn bump_support() {
        let b = SpatialShape::Bump;
        assert_eq!(b.eval(0.5, 1.0), 1.0);
        assert_eq!(b.eval(0.2, 1.0), 0.0);
        assert_eq!(b.eval(0.0, 1.0), 0.0);
    }
}
