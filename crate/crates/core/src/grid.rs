//! Uniform grids in time and space, boundary labels and space-time fields.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Uniform discretization of `[0, T]` with `n_t` nodes `t_k = k * dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    final_time: f64,
    nodes: usize,
}

impl TimeGrid {
    pub fn new(final_time: f64, nodes: usize) -> Result<Self> {
        if !(final_time.is_finite() && final_time > 0.0) {
            return Err(Error::invalid("time grid: T must be finite and > 0"));
        }
        if nodes < 2 {
            return Err(Error::invalid("time grid: n_t must be >= 2"));
        }
        Ok(Self { final_time, nodes })
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dt(&self) -> f64 {
        self.final_time / (self.nodes - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    /// The prefix grid `[0, t_{nodes-1}]` with the same spacing.
    pub fn prefix(&self, nodes: usize) -> Result<Self> {
        if nodes < 2 || nodes > self.nodes {
            return Err(Error::invalid("time grid prefix out of range"));
        }
        Self::new(self.time(nodes - 1), nodes)
    }
}

/// Uniform mesh of the interval `(0, X)` with `n_x` nodes including both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialMesh {
    length: f64,
    nodes: usize,
}

impl SpatialMesh {
    pub fn new(length: f64, nodes: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid("mesh: X must be finite and > 0"));
        }
        if nodes < 3 {
            return Err(Error::invalid("mesh: n_x must be >= 3"));
        }
        Ok(Self { length, nodes })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.nodes - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// Trapezoid quadrature weights (half weight on the two end nodes).
    pub fn weights(&self) -> Vec<f64> {
        let dx = self.dx();
        let mut w = vec![dx; self.nodes];
        w[0] = 0.5 * dx;
        w[self.nodes - 1] = 0.5 * dx;
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

/// Homogeneous boundary condition on each end of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundarySpec {
    left: Boundary,
    right: Boundary,
}

impl BoundarySpec {
    /// At least one side has to carry the Dirichlet condition.
    pub fn new(left: Boundary, right: Boundary) -> Result<Self> {
        if left == Boundary::Neumann && right == Boundary::Neumann {
            return Err(Error::invalid(
                "boundary: at least one side must be Dirichlet",
            ));
        }
        Ok(Self { left, right })
    }

    pub fn dirichlet() -> Self {
        Self {
            left: Boundary::Dirichlet,
            right: Boundary::Dirichlet,
        }
    }

    pub fn left(&self) -> Boundary {
        self.left
    }

    pub fn right(&self) -> Boundary {
        self.right
    }

    /// Whether spatial node `i` of a mesh with `n_x` nodes is a Dirichlet node.
    pub fn is_dirichlet_node(&self, i: usize, n_x: usize) -> bool {
        (i == 0 && self.left == Boundary::Dirichlet)
            || (i + 1 == n_x && self.right == Boundary::Dirichlet)
    }
}

/// Real values on the `n_x x n_t` tensor grid.
///
/// Stored row-major by spatial node, so `row(i)` is the time series at `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    mesh: SpatialMesh,
    grid: TimeGrid,
    values: Vec<f64>,
}

impl SpaceTimeField {
    pub fn zeros(mesh: SpatialMesh, grid: TimeGrid) -> Self {
        Self {
            mesh,
            grid,
            values: vec![0.0; mesh.nodes() * grid.nodes()],
        }
    }

    pub fn from_fn(mesh: SpatialMesh, grid: TimeGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut field = Self::zeros(mesh, grid);
        for i in 0..mesh.nodes() {
            let x = mesh.coord(i);
            for k in 0..grid.nodes() {
                field.values[i * grid.nodes() + k] = f(x, grid.time(k));
            }
        }
        field
    }

    /// Builds a field from row-major (by spatial node) values.
    pub fn from_values(mesh: SpatialMesh, grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.nodes() * grid.nodes() {
            return Err(Error::invalid("field: value count does not match n_x * n_t"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("field: non-finite entry"));
        }
        Ok(Self { mesh, grid, values })
    }

    pub fn mesh(&self) -> SpatialMesh {
        self.mesh
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn n_x(&self) -> usize {
        self.mesh.nodes()
    }

    pub fn n_t(&self) -> usize {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.n_t() + k]
    }

    pub fn set(&mut self, i: usize, k: usize, v: f64) {
        let n_t = self.n_t();
        self.values[i * n_t + k] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n_t = self.n_t();
        &self.values[i * n_t..(i + 1) * n_t]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let n_t = self.n_t();
        &mut self.values[i * n_t..(i + 1) * n_t]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_t())
    }

    /// Spatial profile at time node `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n_x()).map(|i| self.get(i, k)).collect()
    }

    pub fn set_column(&mut self, k: usize, col: &[f64]) {
        debug_assert_eq!(col.len(), self.n_x());
        for (i, &v) in col.iter().enumerate() {
            self.set(i, k, v);
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n_x() == other.n_x()
            && self.n_t() == other.n_t()
            && self.mesh == other.mesh
            && self.grid == other.grid
    }

    pub(crate) fn check_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(alloc::format!("{what}: field shapes differ")))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            mesh: self.mesh,
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination; panics on a shape mismatch.
    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        assert!(self.same_shape(other), "zip_map: field shapes differ");
        Self {
            mesh: self.mesh,
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `self + a * other`
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        self.zip_map(other, |x, y| x + a * y)
    }

    /// The first `nodes` time nodes of the field.
    pub fn truncate_time(&self, nodes: usize) -> Result<Self> {
        let grid = self.grid.prefix(nodes)?;
        let mut out = Self::zeros(self.mesh, grid);
        for i in 0..self.n_x() {
            out.row_mut(i).copy_from_slice(&self.row(i)[..nodes]);
        }
        Ok(out)
    }
}
