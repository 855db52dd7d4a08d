//! Regular 1D lattice and the fields that live on it.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    /// Zero-gradient outflow: ghost nodes replicate the boundary value.
    Transmissive,
}

/// A regular grid of `n_nodes` nodes, node `i` at `x_min + i * dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    n_nodes: usize,
    x_min: f64,
    x_max: f64,
    boundary: Boundary,
}

impl Grid {
    pub fn new(n_nodes: usize, x_min: f64, x_max: f64, boundary: Boundary) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::GridTooSmall { n_nodes, required: 1 });
        }
        if !(x_max > x_min) {
            return Err(Error::Config(format!("empty domain [{x_min}, {x_max}]")));
        }
        Ok(Self { n_nodes, x_min, x_max, boundary })
    }

    pub fn periodic(n_nodes: usize, x_min: f64, x_max: f64) -> Result<Self> {
        Self::new(n_nodes, x_min, x_max, Boundary::Periodic)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_nodes as f64
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x_min, self.x_max)
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes).map(move |i| self.x(i))
    }

    /// Maps a possibly out-of-range node index onto a stored node.
    #[inline]
    pub fn wrap(&self, i: isize) -> usize {
        let n = self.n_nodes as isize;
        match self.boundary {
            Boundary::Periodic => i.rem_euclid(n) as usize,
            Boundary::Transmissive => i.clamp(0, n - 1) as usize,
        }
    }

    /// Same grid with a different resolution.
    pub fn with_nodes(&self, n_nodes: usize) -> Result<Self> {
        Self::new(n_nodes, self.x_min, self.x_max, self.boundary)
    }
}

/// Conserved variables, `n_nodes x components`, node-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionField {
    grid: Grid,
    components: usize,
    values: Vec<f64>,
}

impl SolutionField {
    pub fn zeros(grid: Grid, components: usize) -> Self {
        let values = vec![0.0; grid.n_nodes() * components];
        Self { grid, components, values }
    }

    pub fn from_values(grid: Grid, components: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() * components {
            return Err(Error::Config(format!(
                "field has {} values, expected {} x {}",
                values.len(),
                grid.n_nodes(),
                components
            )));
        }
        Ok(Self { grid, components, values })
    }

    pub fn from_fn(grid: Grid, components: usize, f: impl Fn(f64) -> Vec<f64>) -> Self {
        let mut values = Vec::with_capacity(grid.n_nodes() * components);
        for x in grid.nodes() {
            let u = f(x);
            debug_assert_eq!(u.len(), components);
            values.extend_from_slice(&u);
        }
        Self { grid, components, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.values[i * self.components..(i + 1) * self.components]
    }

    pub fn node_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.components..(i + 1) * self.components]
    }

    /// One component as a contiguous vector.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.components).copied().collect()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Sum over nodes of each component, accumulated in node order.
    pub fn totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.components];
        for node in self.values.chunks_exact(self.components) {
            for (t, v) in totals.iter_mut().zip(node) {
                *t += v;
            }
        }
        totals
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Kinetic distributions for every DEC stage: `stages x n_nodes x velocities x components`.
///
/// Stage 0 holds the distribution at the start of the time step.
#[derive(Clone, Debug, PartialEq)]
pub struct KineticField {
    grid: Grid,
    velocities: usize,
    components: usize,
    stages: Vec<Vec<f64>>,
}

impl KineticField {
    pub fn new(grid: Grid, velocities: usize, components: usize, n_stages: usize) -> Self {
        let len = grid.n_nodes() * velocities * components;
        Self { grid, velocities, components, stages: vec![vec![0.0; len]; n_stages] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn velocities(&self) -> usize {
        self.velocities
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    /// Values per node (`velocities * components`).
    pub fn node_len(&self) -> usize {
        self.velocities * self.components
    }

    pub fn stage(&self, j: usize) -> &[f64] {
        &self.stages[j]
    }

    pub fn stage_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.stages[j]
    }

    pub fn stages(&self) -> &[Vec<f64>] {
        &self.stages
    }

    pub fn stages_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.stages
    }

    #[inline]
    pub fn index(&self, node: usize, velocity: usize, component: usize) -> usize {
        (node * self.velocities + velocity) * self.components + component
    }

    /// P F for one stage: the sum over velocities.
    pub fn project(&self, j: usize) -> SolutionField {
        project_stage(&self.grid, self.velocities, self.components, &self.stages[j])
    }

    /// Copies stage `from` into every other stage.
    pub fn broadcast(&mut self, from: usize) {
        let src = self.stages[from].clone();
        for (j, stage) in self.stages.iter_mut().enumerate() {
            if j != from {
                stage.copy_from_slice(&src);
            }
        }
    }
}

pub(crate) fn project_stage(
    grid: &Grid,
    velocities: usize,
    components: usize,
    stage: &[f64],
) -> SolutionField {
    let mut out = SolutionField::zeros(grid.clone(), components);
    for (node, dst) in stage.chunks_exact(velocities * components).zip(out.values.chunks_exact_mut(components)) {
        for f in node.chunks_exact(components) {
            for (d, v) in dst.iter_mut().zip(f) {
                *d += v;
            }
        }
    }
    out
}
