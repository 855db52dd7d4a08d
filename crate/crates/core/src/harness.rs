//! Runs, error norms, convergence studies and reference solutions.

use std::time::Instant;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::dec::{RunSummary, Solver, SpeedPolicy, StepSettings};
use crate::error::{Error, Result};
use crate::grid::SolutionField;
use crate::mood::MoodMode;
use crate::problems::{ProblemId, ReferenceStrategy};
use crate::stencil::StencilOperator;
use crate::time_scheme::TimeScheme;
use crate::waves::{scalar_speed, Law, WaveModel};

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: RunConfig,
    pub initial: SolutionField,
    pub solution: SolutionField,
    pub summary: RunSummary,
    /// Speed at the start of the run.
    pub a: f64,
    pub wall_seconds: f64,
}

/// Builds the solver for a configuration: two-wave scalar runs keep `a` fixed at
/// `safety * max |f'(u_0)|`, Euler runs recompute it every step.
pub fn build_solver(config: &RunConfig) -> Result<(Solver, SolutionField)> {
    config.validate()?;
    let spec = config.problem.spec();
    let grid = spec.grid(config.n_nodes)?;
    let u0 = spec.initial(&grid);
    let (a, speed) = match spec.law {
        Law::Euler { gamma } => {
            (crate::waves::speed_bound(&u0, gamma, config.speed_safety)?, SpeedPolicy::PerStep { safety: config.speed_safety })
        }
        law => (scalar_speed(&law, &u0, config.speed_safety), SpeedPolicy::Fixed),
    };
    let model = WaveModel::new(spec.wave, spec.law, a)?;
    let scheme = TimeScheme::for_order(config.time_order)?;
    let op = StencilOperator::new(config.delta);
    let settings = StepSettings {
        epsilon: config.epsilon,
        dec_iterations: config.dec_iterations,
        mood: config.mood_settings(),
    };
    let solver = Solver::new(model, scheme, op, settings, speed, config.cfl, &u0)?;
    Ok((solver, u0))
}

pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let (mut solver, initial) = build_solver(config)?;
    let a = solver.model().a();
    let summary = solver.run_until(config.final_time)?;
    Ok(RunOutput {
        config: config.clone(),
        initial,
        solution: solver.solution(),
        summary,
        a,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// `[L1, L2, Linf]` with `L1 = dx sum |e|`, `L2 = (dx sum e^2)^{1/2}`, `Linf = max |e|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    pub relative: [f64; 3],
    pub absolute: [f64; 3],
    /// False when the exact solution has a zero norm; `relative` then repeats `absolute`.
    pub normalized: bool,
}

fn norms(values: impl Iterator<Item = f64>, dx: f64) -> [f64; 3] {
    let (mut l1, mut l2, mut linf) = (0.0, 0.0, 0.0_f64);
    for v in values {
        let a = v.abs();
        l1 += a;
        l2 += a * a;
        linf = linf.max(a);
    }
    [dx * l1, (dx * l2).sqrt(), linf]
}

/// Norms over all components of the field.
pub fn error_norms(numeric: &SolutionField, exact: &SolutionField) -> Result<ErrorNorms> {
    error_norms_in(numeric, exact, None)
}

/// Norms of one component, or all when `component` is `None`.
pub fn error_norms_in(numeric: &SolutionField, exact: &SolutionField, component: Option<usize>) -> Result<ErrorNorms> {
    if numeric.grid() != exact.grid() || numeric.components() != exact.components() {
        return Err(Error::Config("error norms need fields on the same grid".into()));
    }
    let dx = numeric.grid().dx();
    let p = numeric.components();
    let pick = |i: &usize| component.is_none_or(|c| i % p == c);
    let err = numeric.values().iter().zip(exact.values()).enumerate().filter(|(i, _)| pick(i)).map(|(_, (a, b))| a - b);
    let absolute = norms(err, dx);
    let reference = norms(exact.values().iter().enumerate().filter(|(i, _)| pick(i)).map(|(_, v)| *v), dx);
    if reference.iter().any(|&r| r == 0.0) {
        return Ok(ErrorNorms { relative: absolute, absolute, normalized: false });
    }
    let relative = [absolute[0] / reference[0], absolute[1] / reference[1], absolute[2] / reference[2]];
    Ok(ErrorNorms { relative, absolute, normalized: true })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n_nodes: usize,
    /// `None` when the run diverged.
    pub errors: Option<ErrorNorms>,
    /// `log2(e_{N/2} / e_N)` per norm against the previous row (relative norms).
    pub rates: Option<[f64; 3]>,
    pub flagged_elements: usize,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub config: RunConfig,
    pub rows: Vec<ConvergenceRow>,
}

pub const RESOLUTIONS: [usize; 5] = [50, 100, 200, 400, 800];

/// Convergence against the exact solution; resolutions run in parallel.
pub fn run_convergence(template: &RunConfig, resolutions: &[usize]) -> Result<ConvergenceTable> {
    let spec = template.problem.spec();
    if spec.reference != ReferenceStrategy::Exact {
        return Err(Error::Unsupported(format!("no exact solution for {}", template.problem)));
    }
    let results: Vec<(usize, Result<(ErrorNorms, usize)>)> = resolutions
        .par_iter()
        .map(|&n| {
            let mut cfg = template.clone();
            cfg.n_nodes = n;
            let out = run(&cfg).and_then(|out| {
                let exact = spec.exact(out.solution.grid(), cfg.final_time)?.expect("exact solution");
                Ok((error_norms(&out.solution, &exact)?, out.summary.flagged_elements))
            });
            (n, out)
        })
        .collect();
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(results.len());
    for (n, res) in results {
        let row = match res {
            Ok((e, flags)) => {
                let rates = rows.last().and_then(|prev: &ConvergenceRow| prev.errors).map(|p| {
                    let ratio = n as f64 / rows.last().unwrap().n_nodes as f64;
                    std::array::from_fn(|k| (p.relative[k] / e.relative[k]).ln() / ratio.ln())
                });
                ConvergenceRow { n_nodes: n, errors: Some(e), rates, flagged_elements: flags, failure: None }
            }
            Err(err) => {
                ConvergenceRow { n_nodes: n, errors: None, rates: None, flagged_elements: 0, failure: Some(err.to_string()) }
            }
        };
        rows.push(row);
    }
    Ok(ConvergenceTable { config: template.clone(), rows })
}

/// Comparison solution on `coarse`'s grid; fine runs use `fine_nodes` nodes.
pub fn reference_solution(coarse: &RunConfig, strategy: ReferenceStrategy, fine_nodes: usize) -> Result<SolutionField> {
    let spec = coarse.problem.spec();
    let grid = spec.grid(coarse.n_nodes)?;
    if strategy == ReferenceStrategy::Exact {
        return spec
            .exact(&grid, coarse.final_time)?
            .ok_or_else(|| Error::Unsupported(format!("no exact solution for {}", coarse.problem)));
    }
    if fine_nodes % coarse.n_nodes != 0 {
        return Err(Error::NonNestedGrids { fine: fine_nodes, coarse: coarse.n_nodes });
    }
    let mut fine = match strategy {
        ReferenceStrategy::FirstOrderFine => RunConfig::new(coarse.problem, 1)?,
        _ => {
            let mut c = RunConfig::new(coarse.problem, 3)?;
            c.mood = MoodMode::Full;
            c
        }
    };
    fine.n_nodes = fine_nodes;
    fine.final_time = coarse.final_time;
    fine.speed_safety = coarse.speed_safety;
    fine.epsilon = coarse.epsilon;
    let out = run(&fine)?;
    restrict(&out.solution, coarse.n_nodes)
}

/// Nodal restriction: coarse node `i` takes fine node `i * m`.
pub fn restrict(fine: &SolutionField, n_coarse: usize) -> Result<SolutionField> {
    let n_fine = fine.grid().n_nodes();
    if n_coarse == 0 || n_fine % n_coarse != 0 {
        return Err(Error::NonNestedGrids { fine: n_fine, coarse: n_coarse });
    }
    let m = n_fine / n_coarse;
    let grid = fine.grid().with_nodes(n_coarse)?;
    let p = fine.components();
    let mut values = Vec::with_capacity(n_coarse * p);
    for i in 0..n_coarse {
        values.extend_from_slice(fine.node(i * m));
    }
    SolutionField::from_values(grid, p, values)
}

/// Total variation of one component.
pub fn total_variation(field: &SolutionField, component: usize) -> f64 {
    let u = field.component(component);
    let n = u.len();
    let periodic = field.grid().boundary() == crate::grid::Boundary::Periodic;
    let mut tv: f64 = u.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    if periodic && n > 1 {
        tv += (u[0] - u[n - 1]).abs();
    }
    tv
}

/// Convenience: advection template at an order with the default operator.
pub fn advection_template(order: usize, final_time: f64) -> RunConfig {
    let mut c = RunConfig::new(ProblemId::Advection, order).expect("valid order");
    c.final_time = final_time;
    c
}
