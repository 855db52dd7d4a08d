//! Defect-correction time stepping of the relaxation system.
//!
//! Each sweep evaluates the transport residuals of every stage, advances the
//! projected moments explicitly, then updates the distributions either in the
//! relaxed limit or through the implicit source solve. Sweeps are Jacobi: every
//! stage is rebuilt from the previous iterate.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{project_stage, Grid, KineticField, SolutionField};
use crate::mood::{detect, interface_value, FlagField, MoodSettings};
use crate::stencil::{Delta, StencilOperator};
use crate::time_scheme::TimeScheme;
use crate::waves::{speed_bound, Law, WaveModel};

/// How the lattice speed evolves during a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpeedPolicy {
    /// Keep the speed of the model as constructed.
    Fixed,
    /// Recompute from the Euler bound at the start of each step.
    PerStep { safety: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepSettings {
    pub epsilon: f64,
    pub dec_iterations: usize,
    pub mood: MoodSettings,
}

/// Stage storage for one time step.
#[derive(Clone, Debug)]
pub struct DecWorkspace {
    pub stages: KineticField,
    /// `P F` of every stage.
    pub projected: Vec<SolutionField>,
    /// Per stage, `lambda delta F` at every node.
    pub residuals: Vec<Vec<f64>>,
    /// Per stage, high-order interface values `F_{k+1/2}` for `k = -1..n-1`.
    pub interfaces: Vec<Vec<f64>>,
    /// Per target stage `1..=q`, `sum_l a_il lambda delta F_l`.
    pub transport: Vec<Vec<f64>>,
    /// `M(P F^n)`.
    pub anchor_maxwellian: Vec<f64>,
    pub iteration: usize,
}

impl DecWorkspace {
    /// All stages start from `F^n` (stage 0 of `fn_`).
    pub fn new(fn_: &KineticField, model: &WaveModel, scheme: &TimeScheme) -> Result<Self> {
        let grid = fn_.grid().clone();
        let mut stages = KineticField::new(grid.clone(), fn_.velocities(), fn_.components(), scheme.n_stages());
        stages.stage_mut(0).copy_from_slice(fn_.stage(0));
        stages.broadcast(0);
        let pf = stages.project(0);
        let anchor = maxwellian_field(model, &pf)?;
        let len = fn_.stage(0).len();
        let node_len = fn_.node_len();
        Ok(Self {
            projected: vec![pf; scheme.n_stages()],
            residuals: vec![vec![0.0; len]; scheme.n_stages()],
            interfaces: vec![vec![0.0; (grid.n_nodes() + 1) * node_len]; scheme.n_stages()],
            transport: vec![vec![0.0; len]; scheme.q()],
            anchor_maxwellian: anchor,
            stages,
            iteration: 0,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.stages.grid()
    }
}

/// `M(u)` at every node.
pub fn maxwellian_field(model: &WaveModel, u: &SolutionField) -> Result<Vec<f64>> {
    let n = u.grid().n_nodes();
    let len = model.velocities() * model.components();
    let mut out = vec![0.0; n * len];
    for i in 0..n {
        model.maxwellian_into(i, u.node(i), &mut out[i * len..(i + 1) * len])?;
    }
    Ok(out)
}

/// Interface values and residuals `lambda delta F` of one stage.
pub fn stage_residuals(
    stage: &[f64],
    grid: &Grid,
    speeds: &[f64],
    components: usize,
    op: &StencilOperator,
    interfaces: &mut [f64],
    residuals: &mut [f64],
) {
    let n = grid.n_nodes();
    let len = speeds.len() * components;
    for e in 0..=n {
        let k = e as isize - 1;
        for (v, &lam) in speeds.iter().enumerate() {
            for c in 0..components {
                let slot = v * components + c;
                interfaces[e * len + slot] =
                    if lam == 0.0 { 0.0 } else { interface_value(stage, grid, len, slot, k, lam, op, false) };
            }
        }
    }
    for i in 0..n {
        for (v, &lam) in speeds.iter().enumerate() {
            for c in 0..components {
                let slot = v * components + c;
                residuals[i * len + slot] = lam * (interfaces[(i + 1) * len + slot] - interfaces[i * len + slot]);
            }
        }
    }
}

/// Residuals for all stages; stage 0 only on the first sweep.
pub fn compute_residuals(ws: &mut DecWorkspace, model: &WaveModel, op: &StencilOperator) {
    let speeds = model.speeds();
    let first = if ws.iteration == 0 { 0 } else { 1 };
    for l in first..ws.stages.n_stages() {
        let grid = ws.stages.grid();
        stage_residuals(
            ws.stages.stage(l),
            grid,
            &speeds,
            model.components(),
            op,
            &mut ws.interfaces[l],
            &mut ws.residuals[l],
        );
    }
}

/// `transport_i = sum_l a_il lambda delta F_l`.
pub fn combine_transport(ws: &mut DecWorkspace, scheme: &TimeScheme) {
    for (i, row) in scheme.weights().iter().enumerate() {
        let t = &mut ws.transport[i];
        t.iter_mut().for_each(|v| *v = 0.0);
        for (l, &w) in row.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (a, r) in t.iter_mut().zip(&ws.residuals[l]) {
                *a += w * r;
            }
        }
    }
}

/// Recomputes `transport_i` with first-order interface values on flagged elements.
pub fn blend_transport(
    ws: &mut DecWorkspace,
    scheme: &TimeScheme,
    model: &WaveModel,
    target: usize,
    flags: &FlagField,
) {
    let grid = ws.stages.grid().clone();
    let n = grid.n_nodes();
    let speeds = model.speeds();
    let p = model.components();
    let len = speeds.len() * p;
    let row = &scheme.weights()[target];
    let elem: Vec<bool> = (0..=n).map(|e| flags.element(e as isize - 1, &grid)).collect();
    let low = StencilOperator::new(Delta::D1);
    let t = &mut ws.transport[target];
    t.iter_mut().for_each(|v| *v = 0.0);
    for (l, &w) in row.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let stage = ws.stages.stage(l);
        let faces = &ws.interfaces[l];
        let face = |e: usize, slot: usize, lam: f64| {
            if elem[e] {
                interface_value(stage, &grid, len, slot, e as isize - 1, lam, &low, true)
            } else {
                faces[e * len + slot]
            }
        };
        for i in 0..n {
            for (v, &lam) in speeds.iter().enumerate() {
                if lam == 0.0 {
                    continue;
                }
                for c in 0..p {
                    let slot = v * p + c;
                    t[i * len + slot] += w * (lam * (face(i + 1, slot, lam) - face(i, slot, lam)));
                }
            }
        }
    }
}

/// `P F_i = P F^n - (dt/dx) P(transport_i)` for every active stage.
pub fn dec_project_update(ws: &mut DecWorkspace, model: &WaveModel, dt: f64, dx: f64) {
    let ratio = dt / dx;
    let grid = ws.stages.grid().clone();
    let (k, p) = (model.velocities(), model.components());
    for i in 0..ws.transport.len() {
        let incr = project_stage(&grid, k, p, &ws.transport[i]);
        let mut pf = ws.projected[0].clone();
        for (u, d) in pf.values_mut().iter_mut().zip(incr.values()) {
            *u -= ratio * d;
        }
        ws.projected[i + 1] = pf;
    }
}

/// Relaxed limit: `F_i = M(P F_i) + [A^{-1} a_0]_i (M(P F^n) - F^n)`.
pub fn dec_kinetic_update_relaxed(ws: &mut DecWorkspace, scheme: &TimeScheme, model: &WaveModel) -> Result<()> {
    let corr = scheme.relaxed_correction()?;
    for (i, &ci) in corr.iter().enumerate() {
        let m = maxwellian_field(model, &ws.projected[i + 1])?;
        let (f0, rest) = ws.stages.stages_mut().split_at_mut(1);
        let dst = &mut rest[i];
        for ((d, mi), (m0, f)) in dst.iter_mut().zip(&m).zip(ws.anchor_maxwellian.iter().zip(&f0[0])) {
            *d = mi + ci * (m0 - f);
        }
    }
    Ok(())
}

/// `F = B [F^n - (dt/dx) transport] + mu B a_0 (M^n - F^n) + mu B A M(P F)` with
/// `B = (Id + mu A)^{-1}` on the active stages.
pub fn dec_kinetic_update_stiff(
    ws: &mut DecWorkspace,
    scheme: &TimeScheme,
    model: &WaveModel,
    mu: f64,
    dt: f64,
    dx: f64,
) -> Result<()> {
    let q = scheme.q();
    let b: DMatrix<f64> = scheme.active_inverse(mu)?;
    let a = scheme.active_source();
    let a0 = scheme.a0();
    let ratio = dt / dx;
    let maxw: Vec<Vec<f64>> =
        (1..=q).map(|l| maxwellian_field(model, &ws.projected[l])).collect::<Result<_>>()?;
    let f0 = ws.stages.stage(0).to_vec();
    let len = f0.len();
    // rhs_m = F^n - (dt/dx) T_m + mu a0_m (M^n - F^n) + mu sum_l A_ml M_l
    let mut rhs = vec![vec![0.0; len]; q];
    for (m, r) in rhs.iter_mut().enumerate() {
        for x in 0..len {
            let mut v = f0[x] - ratio * ws.transport[m][x] + mu * a0[m] * (ws.anchor_maxwellian[x] - f0[x]);
            for (l, ml) in maxw.iter().enumerate() {
                v += mu * a[(m, l)] * ml[x];
            }
            r[x] = v;
        }
    }
    for i in 0..q {
        let dst = ws.stages.stage_mut(i + 1);
        for x in 0..len {
            dst[x] = (0..q).map(|m| b[(i, m)] * rhs[m][x]).sum();
        }
    }
    for l in 1..=q {
        ws.projected[l] = ws.stages.project(l);
    }
    Ok(())
}

/// Per-step diagnostics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    pub a: f64,
    pub flagged_nodes: usize,
    pub flagged_elements: usize,
    pub inadmissible: usize,
    pub flags_by_variable: Vec<usize>,
}

/// One time step. `fn_` holds `F^n` in its stage 0 and receives `F^{n+1}`.
#[allow(clippy::too_many_arguments)]
pub fn advance_step(
    fn_: &mut KineticField,
    model: &WaveModel,
    scheme: &TimeScheme,
    op: &StencilOperator,
    settings: &StepSettings,
    dt: f64,
    step: usize,
) -> Result<StepReport> {
    let grid = fn_.grid().clone();
    let dx = grid.dx();
    let mut ws = DecWorkspace::new(fn_, model, scheme)?;
    let vars = crate::mood::tested_variables(model.law(), &settings.mood).len();
    let mut report = StepReport { dt, a: model.a(), flags_by_variable: vec![0; vars], ..Default::default() };
    let mut step_flags = FlagField::clean(grid.n_nodes(), vars);
    for p in 0..settings.dec_iterations {
        ws.iteration = p;
        compute_residuals(&mut ws, model, op);
        combine_transport(&mut ws, scheme);
        dec_project_update(&mut ws, model, dt, dx);
        if settings.mood.is_active() {
            let mut redo = false;
            for i in 0..scheme.q() {
                let flags = detect(&ws.projected[i + 1], &ws.projected[0], model.law(), op, &settings.mood);
                if flags.any() {
                    blend_transport(&mut ws, scheme, model, i, &flags);
                    redo = true;
                }
                step_flags.merge(&flags);
            }
            if redo {
                dec_project_update(&mut ws, model, dt, dx);
            }
        }
        if ws.projected[1..].iter().any(|f| !f.is_finite()) {
            return Err(Error::Diverged { step, iteration: p });
        }
        if settings.epsilon == 0.0 {
            dec_kinetic_update_relaxed(&mut ws, scheme, model)?;
        } else {
            dec_kinetic_update_stiff(&mut ws, scheme, model, dt / settings.epsilon, dt, dx)?;
        }
        if ws.stages.stages()[1..].iter().any(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::Diverged { step, iteration: p });
        }
    }
    let q = scheme.q();
    fn_.stage_mut(0).copy_from_slice(ws.stages.stage(q));
    report.flagged_nodes = step_flags.flagged_nodes();
    report.flagged_elements = step_flags.flagged_elements(&grid);
    report.inadmissible = step_flags.inadmissible;
    report.flags_by_variable = step_flags.by_variable;
    Ok(report)
}

/// Summary of a completed run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    pub dt_nominal: f64,
    pub a_max: f64,
    pub flagged_elements: usize,
    pub flags_by_variable: Vec<usize>,
    pub per_step_flags: Vec<usize>,
}

/// Owns `F^n` and drives the time loop.
#[derive(Clone, Debug)]
pub struct Solver {
    model: WaveModel,
    scheme: TimeScheme,
    op: StencilOperator,
    settings: StepSettings,
    speed: SpeedPolicy,
    cfl: f64,
    state: KineticField,
    time: f64,
    steps: usize,
}

impl Solver {
    /// Starts from the equilibrium `F = M(u_0)`.
    pub fn new(
        model: WaveModel,
        scheme: TimeScheme,
        op: StencilOperator,
        settings: StepSettings,
        speed: SpeedPolicy,
        cfl: f64,
        initial: &SolutionField,
    ) -> Result<Self> {
        let grid = initial.grid().clone();
        let needed = 2 * op.half_width() + 1;
        if grid.n_nodes() < needed {
            return Err(Error::GridTooSmall { n_nodes: grid.n_nodes(), required: needed });
        }
        if initial.components() != model.components() {
            return Err(Error::Config("initial data does not match the model".into()));
        }
        if !(cfl > 0.0) {
            return Err(Error::Config(format!("cfl must be positive, got {cfl}")));
        }
        if settings.epsilon < 0.0 || !settings.epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon must be non-negative, got {}", settings.epsilon)));
        }
        if settings.dec_iterations == 0 {
            return Err(Error::Config("at least one DEC iteration is needed".into()));
        }
        let mut solver = Self {
            state: KineticField::new(grid, model.velocities(), model.components(), 1),
            model,
            scheme,
            op,
            settings,
            speed,
            cfl,
            time: 0.0,
            steps: 0,
        };
        solver.update_speed(initial)?;
        let m = maxwellian_field(&solver.model, initial)?;
        solver.state.stage_mut(0).copy_from_slice(&m);
        Ok(solver)
    }

    pub fn model(&self) -> &WaveModel {
        &self.model
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn kinetic(&self) -> &KineticField {
        &self.state
    }

    pub fn solution(&self) -> SolutionField {
        self.state.project(0)
    }

    fn update_speed(&mut self, u: &SolutionField) -> Result<bool> {
        if let SpeedPolicy::PerStep { safety } = self.speed {
            let Law::Euler { gamma } = *self.model.law() else {
                return Ok(false);
            };
            let a = speed_bound(u, gamma, safety)?;
            if a != self.model.a() {
                self.model.set_speed(a)?;
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn nominal_dt(&self) -> f64 {
        self.cfl * self.state.grid().dx() / self.model.a()
    }

    /// One step of at most `max_dt`.
    pub fn step(&mut self, max_dt: f64) -> Result<StepReport> {
        let u = self.state.project(0);
        if self.update_speed(&u)? && self.settings.epsilon == 0.0 {
            let m = maxwellian_field(&self.model, &u)?;
            self.state.stage_mut(0).copy_from_slice(&m);
        }
        let dt = self.nominal_dt().min(max_dt);
        let report = advance_step(&mut self.state, &self.model, &self.scheme, &self.op, &self.settings, dt, self.steps)?;
        self.time += dt;
        self.steps += 1;
        Ok(report)
    }

    /// Advances to `t_end`, clipping the last step.
    pub fn run_until(&mut self, t_end: f64) -> Result<RunSummary> {
        let mut summary = RunSummary { dt_nominal: self.nominal_dt(), ..Default::default() };
        let tol = 1e-12 * t_end.abs().max(1.0);
        while self.time < t_end - tol {
            let report = self.step(t_end - self.time)?;
            summary.a_max = summary.a_max.max(report.a);
            summary.flagged_elements += report.flagged_elements;
            if summary.flags_by_variable.len() < report.flags_by_variable.len() {
                summary.flags_by_variable.resize(report.flags_by_variable.len(), 0);
            }
            for (a, b) in summary.flags_by_variable.iter_mut().zip(&report.flags_by_variable) {
                *a += b;
            }
            summary.per_step_flags.push(report.flagged_elements);
        }
        summary.steps = self.steps;
        summary.final_time = self.time;
        Ok(summary)
    }
}
