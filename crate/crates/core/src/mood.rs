//! A-posteriori detection of troubled nodes and low-order recomputation.
//!
//! Detection works on the projected variables. A flagged node flags both
//! adjacent elements; flagged elements use first-order residual pairs.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Grid, SolutionField};
use crate::stencil::StencilOperator;
use crate::waves::{EulerState, Law};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MoodMode {
    #[default]
    Off,
    Full,
    /// Admissibility only: non-finite values and, for Euler, the invariance domain.
    NanOnly,
}

impl fmt::Display for MoodMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoodMode::Off => "off",
            MoodMode::Full => "full",
            MoodMode::NanOnly => "nan_only",
        })
    }
}

impl FromStr for MoodMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "off" | "none" => Ok(MoodMode::Off),
            "full" | "on" => Ok(MoodMode::Full),
            "nan_only" | "nan" => Ok(MoodMode::NanOnly),
            other => Err(Error::Config(format!("unknown mood mode '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoodSettings {
    pub mode: MoodMode,
    /// Also test the velocity for Euler.
    pub check_velocity: bool,
    /// Plateau threshold and interval margin; `None` means `dx^3`.
    pub tolerance: Option<f64>,
}

impl MoodSettings {
    pub fn new(mode: MoodMode) -> Self {
        Self { mode, check_velocity: false, tolerance: None }
    }

    pub fn is_active(&self) -> bool {
        self.mode != MoodMode::Off
    }

    pub fn tolerance_for(&self, dx: f64) -> f64 {
        self.tolerance.unwrap_or(dx * dx * dx)
    }
}

impl Default for MoodSettings {
    fn default() -> Self {
        Self::new(MoodMode::Off)
    }
}

/// Result of one detection pass.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagField {
    node_bad: Vec<bool>,
    /// Nodes failing admissibility (non-finite or outside the invariance domain).
    pub inadmissible: usize,
    /// Per tested variable, nodes rejected by the extrema tests.
    pub by_variable: Vec<usize>,
}

impl FlagField {
    pub fn clean(n_nodes: usize, n_vars: usize) -> Self {
        Self { node_bad: vec![false; n_nodes], inadmissible: 0, by_variable: vec![0; n_vars] }
    }

    pub fn node_flags(&self) -> &[bool] {
        &self.node_bad
    }

    pub fn any(&self) -> bool {
        self.node_bad.iter().any(|&b| b)
    }

    pub fn flagged_nodes(&self) -> usize {
        self.node_bad.iter().filter(|&&b| b).count()
    }

    /// Element `[k, k+1]`, `k` possibly `-1` or `n - 1`.
    #[inline]
    pub fn element(&self, k: isize, grid: &Grid) -> bool {
        self.node_bad[grid.wrap(k)] || self.node_bad[grid.wrap(k + 1)]
    }

    /// Flags of elements `[k, k+1]` for `k = 0..n`.
    pub fn element_flags(&self, grid: &Grid) -> Vec<bool> {
        (0..grid.n_nodes() as isize).map(|k| self.element(k, grid)).collect()
    }

    pub fn flagged_elements(&self, grid: &Grid) -> usize {
        self.element_flags(grid).iter().filter(|&&b| b).count()
    }

    /// Componentwise union.
    pub fn merge(&mut self, other: &FlagField) {
        for (a, b) in self.node_bad.iter_mut().zip(&other.node_bad) {
            *a |= *b;
        }
        self.inadmissible += other.inadmissible;
        for (a, b) in self.by_variable.iter_mut().zip(&other.by_variable) {
            *a += b;
        }
    }
}

/// Names of the variables tested by the extrema criteria.
pub fn tested_variables(law: &Law, settings: &MoodSettings) -> Vec<&'static str> {
    match law {
        Law::Euler { .. } if settings.check_velocity => vec!["density", "pressure", "velocity"],
        Law::Euler { .. } => vec!["density", "pressure"],
        _ => vec!["u"],
    }
}

fn variables(field: &SolutionField, law: &Law, settings: &MoodSettings) -> (Vec<Vec<f64>>, Vec<bool>) {
    let n = field.grid().n_nodes();
    match *law {
        Law::Euler { gamma } => {
            let mut rho = Vec::with_capacity(n);
            let mut p = Vec::with_capacity(n);
            let mut vel = Vec::with_capacity(n);
            let mut ok = Vec::with_capacity(n);
            for i in 0..n {
                let u = field.node(i);
                let s = EulerState::from_conserved(u, gamma);
                let pr = s.pressure();
                rho.push(s.rho);
                p.push(pr);
                vel.push(s.velocity());
                ok.push(u.iter().all(|v| v.is_finite()) && s.rho > 0.0 && pr > 0.0 && pr.is_finite());
            }
            let mut vars = vec![rho, p];
            if settings.check_velocity {
                vars.push(vel);
            }
            (vars, ok)
        }
        _ => {
            let u = field.component(0);
            let ok = u.iter().map(|v| v.is_finite()).collect();
            (vec![u], ok)
        }
    }
}

/// Runs the criteria chain on a candidate against the data at `t_n`.
pub fn detect(
    candidate: &SolutionField,
    previous: &SolutionField,
    law: &Law,
    op: &StencilOperator,
    settings: &MoodSettings,
) -> FlagField {
    let grid = candidate.grid();
    let n = grid.n_nodes();
    let (new_vars, new_ok) = variables(candidate, law, settings);
    let mut flags = FlagField::clean(n, new_vars.len());
    if !settings.is_active() {
        return flags;
    }
    let w = op.half_width() as isize;

    // criterion 1, widened so that a bad value anywhere in the stencil fails the node
    for i in 0..n {
        if !new_ok[i] {
            flags.inadmissible += 1;
        }
        if (-w - 1..=w + 1).any(|l| !new_ok[grid.wrap(i as isize + l)]) {
            flags.node_bad[i] = true;
        }
    }
    if settings.mode == MoodMode::NanOnly {
        return flags;
    }

    let (old_vars, _) = variables(previous, law, settings);
    let tol = settings.tolerance_for(grid.dx());
    let dx = grid.dx();
    let mut window = vec![0.0; (2 * w + 3) as usize];
    for i in 0..n {
        if flags.node_bad[i] {
            continue;
        }
        for (v, (new, old)) in new_vars.iter().zip(&old_vars).enumerate() {
            let at = |data: &[f64], l: isize| data[grid.wrap(i as isize + l)];
            // criterion 2: plateau
            let (lo, hi) = (-w..=w).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), l| {
                let x = at(new, l);
                (a.min(x), b.max(x))
            });
            if hi - lo <= tol {
                continue;
            }
            // criterion 3a: bounds from t_n on the stencil extended by one cell
            let (lo, hi) = (-w - 1..=w + 1).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), l| {
                let x = at(old, l);
                (a.min(x), b.max(x))
            });
            let u = new[i];
            if u >= lo + tol && u <= hi - tol {
                continue;
            }
            // criterion 3b: smooth extremum
            for (slot, l) in window.iter_mut().zip(-w - 1..=w + 1) {
                *slot = at(new, l);
            }
            if smooth_extrema_alpha(&window, dx) < 1.0 {
                flags.node_bad[i] = true;
                flags.by_variable[v] += 1;
                break;
            }
        }
    }
    flags
}

/// Smoothness indicator at the centre of `values` (length `2w + 3`, unit node spacing `dx`).
///
/// `P_j` interpolates the `2w + 1` values centred on node `j`. With `D_j = P_j'(x_j)`,
/// the half-point slopes `P_j'(x_j -+ dx/2)` are clamped against `[D_{j-1}, D_j]` and
/// `[D_j, D_{j+1}]`. Returns 1 when both lie inside, i.e. a smooth extremum.
pub fn smooth_extrema_alpha(values: &[f64], dx: f64) -> f64 {
    assert!(values.len() >= 3 && values.len() % 2 == 1, "window must have odd length >= 3");
    let w = (values.len() - 3) / 2;
    let c = w + 1;
    let d = |centre: usize, t: f64| lagrange_derivative(&values[centre - w..=centre + w], t) / dx;
    let (d_left, u_prime, d_right) = (d(c - 1, 0.0), d(c, 0.0), d(c + 1, 0.0));
    let v_l = d(c, -0.5);
    let v_r = d(c, 0.5);
    let alpha_l = clamp_ratio(u_prime, v_l, d_left.min(u_prime), d_left.max(u_prime));
    let alpha_r = clamp_ratio(u_prime, v_r, d_right.min(u_prime), d_right.max(u_prime));
    alpha_l.min(alpha_r)
}

fn clamp_ratio(u_prime: f64, v: f64, v_min: f64, v_max: f64) -> f64 {
    if v > u_prime {
        (1.0_f64).min((v_max - u_prime) / (v - u_prime))
    } else if v < u_prime {
        (1.0_f64).min((v_min - u_prime) / (v - u_prime))
    } else {
        1.0
    }
}

/// Derivative at offset `t` of the interpolant through `values` at offsets `-w..=w`.
fn lagrange_derivative(values: &[f64], t: f64) -> f64 {
    let w = (values.len() / 2) as isize;
    let nodes: Vec<f64> = (-w..=w).map(|k| k as f64).collect();
    let mut total = 0.0;
    for (m, &xm) in nodes.iter().enumerate() {
        let mut dl = 0.0;
        for (k, &xk) in nodes.iter().enumerate() {
            if k == m {
                continue;
            }
            let mut term = 1.0 / (xm - xk);
            for (l, &xl) in nodes.iter().enumerate() {
                if l != m && l != k {
                    term *= (t - xl) / (xm - xl);
                }
            }
            dl += term;
        }
        total += values[m] * dl;
    }
    total
}

/// Residual pairs of element `[k, k+1]` for one stage: `phi_left` goes to node `k`,
/// `phi_right` to node `k+1`. Entry `e` holds element `k = e - 1`, so entry 0 is the
/// element left of node 0 (it duplicates entry `n` on periodic grids).
#[derive(Clone, Debug, PartialEq)]
pub struct ElementResiduals {
    pub node_len: usize,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub low_order: bool,
}

impl ElementResiduals {
    pub fn n_elements(&self) -> usize {
        self.left.len() / self.node_len
    }

    pub fn pair(&self, e: usize) -> (&[f64], &[f64]) {
        let r = e * self.node_len..(e + 1) * self.node_len;
        (&self.left[r.clone()], &self.right[r])
    }

    /// `delta F_n = phi_left([n, n+1]) + phi_right([n-1, n])`, scaled by the speeds.
    pub fn node_increments(&self) -> Vec<f64> {
        let n = self.n_elements() - 1;
        let len = self.node_len;
        let mut out = vec![0.0; n * len];
        for i in 0..n {
            for c in 0..len {
                out[i * len + c] = self.left[(i + 1) * len + c] + self.right[i * len + c];
            }
        }
        out
    }
}

/// Element residual pairs `phi_left = lambda (F_{k+1/2} - F_k)`, `phi_right = lambda (F_{k+1} - F_{k+1/2})`
/// for a stage stored node-major as `(velocity, component)`.
pub fn element_residuals(
    stage: &[f64],
    grid: &Grid,
    speeds: &[f64],
    components: usize,
    op: &StencilOperator,
    low_order: bool,
) -> ElementResiduals {
    let n = grid.n_nodes();
    let len = speeds.len() * components;
    let mut left = vec![0.0; (n + 1) * len];
    let mut right = vec![0.0; (n + 1) * len];
    for e in 0..=n {
        let k = e as isize - 1;
        let (a, b) = (grid.wrap(k), grid.wrap(k + 1));
        for (v, &lam) in speeds.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            for c in 0..components {
                let slot = v * components + c;
                let at = |node: usize| stage[node * len + slot];
                let face = interface_value(stage, grid, len, slot, k, lam, op, low_order);
                left[e * len + slot] = lam * (face - at(a));
                right[e * len + slot] = lam * (at(b) - face);
            }
        }
    }
    ElementResiduals { node_len: len, left, right, low_order }
}

/// `F_{k+1/2}` for one `(velocity, component)` slot.
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn interface_value(
    stage: &[f64],
    grid: &Grid,
    len: usize,
    slot: usize,
    k: isize,
    lam: f64,
    op: &StencilOperator,
    low_order: bool,
) -> f64 {
    if low_order {
        let node = if lam > 0.0 { grid.wrap(k) } else { grid.wrap(k + 1) };
        return stage[node * len + slot];
    }
    let beta = op.beta(lam);
    let mut acc = 0.0;
    for (j, &b) in beta.coeffs.iter().enumerate() {
        acc += b * stage[grid.wrap(k + beta.lo + j as isize) * len + slot];
    }
    acc
}

/// Per-element choice between high- and low-order pairs.
pub fn blend_residuals(
    high: &ElementResiduals,
    low: &ElementResiduals,
    flags: &FlagField,
    grid: &Grid,
) -> ElementResiduals {
    let len = high.node_len;
    let mut out = high.clone();
    for e in 0..high.n_elements() {
        if flags.element(e as isize - 1, grid) {
            let r = e * len..(e + 1) * len;
            out.left[r.clone()].copy_from_slice(&low.left[r.clone()]);
            out.right[r.clone()].copy_from_slice(&low.right[r]);
        }
    }
    out
}
