//! Seeded random fields. The generator is ChaCha8 keyed by the config seed;
//! each consumer draws from its own stream so adding one does not shift the
//! others.

use std::f64::consts::PI;

use hystherm_core::{SpaceTimeField, SpatialMesh, TimeGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent ChaCha8 streams under one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Control = 0,
    Direction = 1,
    Perturbation = 2,
    InitialData = 3,
}

pub fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Number of sine modes in a random field.
pub const MODES: usize = 4;

/// `sum_{m=1..4} (a_m + b_m t / T) sin(m pi x / X) / m` with `a_m, b_m`
/// uniform on `[-1, 1)`, drawn in the order `a_1, b_1, a_2, ...`.
pub fn random_field(mesh: SpatialMesh, grid: TimeGrid, seed: u64, stream: Stream) -> SpaceTimeField {
    let mut rng = rng(seed, stream);
    let coeffs: Vec<(f64, f64)> = (0..MODES)
        .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let (length, t_end) = (mesh.length(), grid.final_time());
    SpaceTimeField::from_fn(mesh, grid, |x, t| {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, (a, b))| {
                let m = (j + 1) as f64;
                (a + b * t / t_end) * libm::sin(m * PI * x / length) / m
            })
            .sum()
    })
}
