//! Von Neumann analysis of the implicit schemes and of their DEC iterations.
//!
//! With `z = lambda g(theta)` and `g` the Fourier symbol of the positive-wind
//! operator, each scheme maps a Fourier mode to `G(z)` per step.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stencil::{Delta, StencilOperator};

pub const THETA_POINTS: usize = 4096;
pub const STABILITY_TOL: f64 = 1e-10;
pub const CFL_CEILING: f64 = 8.0;
pub const CFL_STEP: f64 = 0.01;
pub const CFL_FLOOR: f64 = 1e-3;
pub const BISECTION_TOL: f64 = 1e-7;

/// Weights of the third-order scheme: `e = 1 - z w0`, `theta` the active block.
const W0: [f64; 2] = [5.0 / 24.0, 1.0 / 6.0];
const THETA: [[f64; 2]; 2] = [[1.0 / 3.0, -1.0 / 24.0], [2.0 / 3.0, 1.0 / 6.0]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IterationMode {
    Direct,
    DecJacobi,
    DecGaussSeidel,
}

impl IterationMode {
    pub fn name(self) -> &'static str {
        match self {
            IterationMode::Direct => "direct",
            IterationMode::DecJacobi => "dec_jacobi",
            IterationMode::DecGaussSeidel => "dec_gauss_seidel",
        }
    }
}

/// Starting value of the DEC recursion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum InitialGuess {
    /// `G^(0) = 1`: every stage starts from `u^n`, as the solver does.
    #[default]
    Anchor,
    /// `G^(0) = e`, the vector of explicit terms (order 3 only).
    Explicit,
    /// `G^(0) = 0`: the first sweep yields `e`.
    Zero,
}

/// Which stage factors enter `|G|`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Measure {
    /// The last stage, which is `u^{n+1}`.
    #[default]
    LastStage,
    /// The largest over all active stages.
    AllStages,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplificationQuery {
    pub time_order: usize,
    pub delta: Delta,
    pub mode: IterationMode,
    pub iterations: usize,
    pub theta_points: usize,
    pub initial: InitialGuess,
    pub measure: Measure,
}

impl AmplificationQuery {
    pub fn new(time_order: usize, delta: Delta, mode: IterationMode, iterations: usize) -> Self {
        Self {
            time_order,
            delta,
            mode,
            iterations,
            theta_points: THETA_POINTS,
            initial: InitialGuess::Anchor,
            measure: Measure::LastStage,
        }
    }

    pub fn with_initial(mut self, initial: InitialGuess) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_measure(mut self, measure: Measure) -> Self {
        self.measure = measure;
        self
    }
}

/// `theta_k = 2 pi k / n`; contains `pi` for even `n`.
pub fn theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * std::f64::consts::PI * k as f64 / n as f64).collect()
}

fn checked_div(num: Complex64, den: Complex64, theta: f64) -> Result<Complex64> {
    if den.norm() < 1e-12 {
        return Err(Error::SingularSymbol { theta });
    }
    Ok(num / den)
}

/// Amplification of the implicit scheme; order 3 returns both stage factors.
pub fn direct_factors(order: usize, g: Complex64, lambda: f64, theta: f64) -> Result<Vec<Complex64>> {
    let z = g * lambda;
    let one = Complex64::new(1.0, 0.0);
    match order {
        1 => Ok(vec![checked_div(one, one + z, theta)?]),
        2 => Ok(vec![checked_div(one - z / 2.0, one + z / 2.0, theta)?]),
        3 => {
            let z2 = z * z;
            let g1 = checked_div(-z2 + 24.0, z2 * 2.0 + z * 12.0 + 24.0, theta)?;
            let g2 = checked_div(z2 - z * 6.0 + 12.0, z2 + z * 6.0 + 12.0, theta)?;
            Ok(vec![g1, g2])
        }
        _ => Err(Error::Config(format!("time order must be 1, 2 or 3, got {order}"))),
    }
}

/// `|G|` of the last stage of the implicit scheme.
pub fn amplification_direct(order: usize, g: Complex64, lambda: f64) -> Result<f64> {
    Ok(modulus(&direct_factors(order, g, lambda, f64::NAN)?, Measure::LastStage))
}

fn start(initial: InitialGuess, e: [Complex64; 2]) -> [Complex64; 2] {
    match initial {
        InitialGuess::Anchor => [Complex64::new(1.0, 0.0); 2],
        InitialGuess::Explicit => e,
        InitialGuess::Zero => [Complex64::new(0.0, 0.0); 2],
    }
}

fn e_vector(z: Complex64) -> [Complex64; 2] {
    [Complex64::new(1.0, 0.0) - z * W0[0], Complex64::new(1.0, 0.0) - z * W0[1]]
}

/// DEC factors after `p` Jacobi sweeps.
pub fn dec_factors(order: usize, g: Complex64, lambda: f64, p: usize, initial: InitialGuess) -> Result<Vec<Complex64>> {
    let z = g * lambda;
    let one = Complex64::new(1.0, 0.0);
    match order {
        1 => {
            // a single explicit stage: the sweep count does not matter past the first
            if p == 0 { Ok(vec![one]) } else { Ok(vec![one - z]) }
        }
        2 => {
            let mut gp = if initial == InitialGuess::Zero { Complex64::new(0.0, 0.0) } else { one };
            for _ in 0..p {
                gp = one - z / 2.0 * (one + gp);
            }
            Ok(vec![gp])
        }
        3 => {
            let e = e_vector(z);
            let mut gp = start(initial, e);
            for _ in 0..p {
                gp = [
                    e[0] - z * (gp[0] * THETA[0][0] + gp[1] * THETA[0][1]),
                    e[1] - z * (gp[0] * THETA[1][0] + gp[1] * THETA[1][1]),
                ];
            }
            Ok(gp.to_vec())
        }
        _ => Err(Error::Config(format!("time order must be 1, 2 or 3, got {order}"))),
    }
}

fn modulus(factors: &[Complex64], measure: Measure) -> f64 {
    match measure {
        Measure::LastStage => factors.last().map_or(0.0, |c| c.norm()),
        Measure::AllStages => factors.iter().map(|c| c.norm()).fold(0.0, f64::max),
    }
}

/// `|G|` of the last stage after `p` Jacobi sweeps from `G^(0) = 1`.
pub fn amplification_dec(order: usize, g: Complex64, lambda: f64, p: usize) -> Result<f64> {
    Ok(modulus(&dec_factors(order, g, lambda, p, InitialGuess::Anchor)?, Measure::LastStage))
}

/// `(Id + z Theta_1) G^(p+1) = e - z Theta_2 G^(p)` with the strict-lower / upper split of `theta`.
pub fn gauss_seidel_factors(g: Complex64, lambda: f64, p: usize, initial: InitialGuess) -> [Complex64; 2] {
    let z = g * lambda;
    let e = e_vector(z);
    let mut gp = start(initial, e);
    for _ in 0..p {
        let g0 = e[0] - z * (gp[0] * THETA[0][0] + gp[1] * THETA[0][1]);
        let g1 = e[1] - z * (g0 * THETA[1][0] + gp[1] * THETA[1][1]);
        gp = [g0, g1];
    }
    gp
}

pub fn amplification_gs(g: Complex64, lambda: f64, p: usize) -> f64 {
    modulus(&gauss_seidel_factors(g, lambda, p, InitialGuess::Anchor), Measure::LastStage)
}

fn symbols(query: &AmplificationQuery) -> Vec<(f64, Complex64)> {
    let op = StencilOperator::new(query.delta);
    theta_grid(query.theta_points).into_iter().map(|t| (t, op.fourier_symbol(t))).collect()
}

/// Largest `|G|` over `symbols`; stops early once `stop` is exceeded.
fn scan(query: &AmplificationQuery, symbols: &[(f64, Complex64)], lambda: f64, stop: f64) -> Result<f64> {
    if query.mode == IterationMode::DecGaussSeidel && query.time_order != 3 {
        return Err(Error::Unsupported("Gauss-Seidel sweeps need two active stages".into()));
    }
    let mut worst = 0.0_f64;
    for &(theta, g) in symbols {
        let factors = match query.mode {
            IterationMode::Direct => direct_factors(query.time_order, g, lambda, theta)?,
            IterationMode::DecJacobi => dec_factors(query.time_order, g, lambda, query.iterations, query.initial)?,
            IterationMode::DecGaussSeidel => gauss_seidel_factors(g, lambda, query.iterations, query.initial).to_vec(),
        };
        worst = worst.max(modulus(&factors, query.measure));
        if worst > stop {
            break;
        }
    }
    Ok(worst)
}

/// Maximum `|G|` over the theta grid for one query at `lambda`.
pub fn max_modulus(query: &AmplificationQuery, lambda: f64) -> Result<f64> {
    scan(query, &symbols(query), lambda, f64::INFINITY)
}

pub fn is_stable(query: &AmplificationQuery, lambda: f64) -> bool {
    stable_on(query, &symbols(query), lambda)
}

fn stable_on(query: &AmplificationQuery, symbols: &[(f64, Complex64)], lambda: f64) -> bool {
    let limit = 1.0 + STABILITY_TOL;
    matches!(scan(query, symbols, lambda, limit), Ok(m) if m <= limit)
}

/// Largest stable CFL: coarse scan on `(0, 8]`, then bisection at the last stable
/// point. Returns 0 when unstable already at the smallest probe and 8 when the
/// whole range is stable.
pub fn max_stable_cfl(query: &AmplificationQuery) -> f64 {
    let symbols = symbols(query);
    largest_true(|lambda| stable_on(query, &symbols, lambda))
}

fn largest_true(pred: impl Fn(f64) -> bool) -> f64 {
    let steps = (CFL_CEILING / CFL_STEP).round() as usize;
    let probes: Vec<f64> = std::iter::once(CFL_FLOOR).chain((1..=steps).map(|k| k as f64 * CFL_STEP)).collect();
    let mut last: Option<usize> = None;
    for (k, &l) in probes.iter().enumerate() {
        if pred(l) {
            last = Some(k);
        }
    }
    let Some(k) = last else { return 0.0 };
    if k + 1 == probes.len() {
        return CFL_CEILING;
    }
    let (mut lo, mut hi) = (probes[k], probes[k + 1]);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Sign condition of the implicit schemes: `lambda Re(g) >= 0` for orders 1 and 2,
/// `lambda Re(g - lambda g^2 / 6) > 0` for order 3. Holds trivially where `g = 0`.
pub fn analytic_condition(order: usize, g: Complex64, lambda: f64) -> bool {
    if g.norm() < 1e-12 {
        return true;
    }
    match order {
        1 | 2 => lambda * g.re >= -1e-12,
        _ => lambda * (g - g * g * lambda / 6.0).re > -1e-12,
    }
}

/// Largest CFL at which the sign condition holds on the whole theta grid.
pub fn analytic_max_cfl(order: usize, delta: Delta) -> f64 {
    let op = StencilOperator::new(delta);
    let symbols: Vec<Complex64> = theta_grid(THETA_POINTS).into_iter().map(|t| op.fourier_symbol(t)).collect();
    largest_true(|lambda| symbols.iter().all(|&g| analytic_condition(order, g, lambda)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub samples: usize,
    /// `(lambda, theta, |G| stable, condition holds)` where the two disagree.
    pub mismatches: Vec<(f64, f64, bool, bool)>,
}

impl ConditionReport {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares `|G| <= 1` of the implicit scheme with the sign condition on a
/// `n x n` lattice of `lambda in (0, 8]`, `theta in [0, 2 pi)`.
pub fn analytic_condition_check(order: usize, delta: Delta, n: usize) -> ConditionReport {
    let op = StencilOperator::new(delta);
    let mut mismatches = Vec::new();
    for i in 1..=n {
        let lambda = CFL_CEILING * i as f64 / n as f64;
        for theta in theta_grid(n) {
            let g = op.fourier_symbol(theta);
            let stable = direct_factors(order, g, lambda, theta)
                .map(|f| f.iter().all(|c| c.norm() <= 1.0 + STABILITY_TOL))
                .unwrap_or(false);
            let cond = analytic_condition(order, g, lambda);
            if stable != cond {
                mismatches.push((lambda, theta, stable, cond));
            }
        }
    }
    ConditionReport { samples: n * n, mismatches }
}

/// The `2 x 2` active block of the third-order weights.
pub fn theta_matrix() -> [[f64; 2]; 2] {
    THETA
}

/// Spectral radius of a real `2 x 2` matrix.
pub fn spectral_radius(m: [[f64; 2]; 2]) -> f64 {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        (tr / 2.0 + s).abs().max((tr / 2.0 - s).abs())
    } else {
        det.sqrt()
    }
}

pub fn mat_pow(m: [[f64; 2]; 2], p: usize) -> [[f64; 2]; 2] {
    let mut out = [[1.0, 0.0], [0.0, 1.0]];
    for _ in 0..p {
        out = [
            [out[0][0] * m[0][0] + out[0][1] * m[1][0], out[0][0] * m[0][1] + out[0][1] * m[1][1]],
            [out[1][0] * m[0][0] + out[1][1] * m[1][0], out[1][0] * m[0][1] + out[1][1] * m[1][1]],
        ];
    }
    out
}

/// `sqrt(17/16 + sqrt(241)/16) (1 / (2 sqrt 3))^p`.
pub fn mu_bound(p: usize) -> f64 {
    let c = (17.0 / 16.0 + 241.0_f64.sqrt() / 16.0).sqrt();
    c * (1.0 / (2.0 * 3.0_f64.sqrt())).powi(p as i32)
}

/// One row of a stability table.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRow {
    pub time_order: usize,
    pub delta: Delta,
    pub mode: IterationMode,
    pub iterations: usize,
    pub max_cfl: f64,
}

fn evaluate(queries: Vec<AmplificationQuery>) -> Vec<StabilityRow> {
    queries
        .par_iter()
        .map(|q| StabilityRow {
            time_order: q.time_order,
            delta: q.delta,
            mode: q.mode,
            iterations: if q.mode == IterationMode::Direct { 0 } else { q.iterations },
            max_cfl: max_stable_cfl(q),
        })
        .collect()
}

/// Implicit schemes, orders 1 to 3, every operator.
pub fn direct_table() -> Vec<StabilityRow> {
    let mut qs = Vec::new();
    for delta in Delta::ALL {
        for order in 1..=3 {
            qs.push(AmplificationQuery::new(order, delta, IterationMode::Direct, 0));
        }
    }
    evaluate(qs)
}

/// Jacobi DEC, orders 2 and 3, 1 to 6 sweeps. Order 2 starts from `G^(0) = 1`,
/// order 3 from `G^(0) = 0` so that the explicit predictor `e` is the first sweep.
pub fn dec_table() -> Vec<StabilityRow> {
    dec_table_with(InitialGuess::Anchor, InitialGuess::Zero)
}

pub fn dec_table_with(second: InitialGuess, third: InitialGuess) -> Vec<StabilityRow> {
    let mut qs = Vec::new();
    for (order, initial) in [(2, second), (3, third)] {
        for delta in Delta::ALL {
            for p in 1..=6 {
                qs.push(AmplificationQuery::new(order, delta, IterationMode::DecJacobi, p).with_initial(initial));
            }
        }
    }
    evaluate(qs)
}

/// Third order, Gauss-Seidel then Jacobi, 1 to 5 sweeps.
pub fn sweep_table() -> Vec<StabilityRow> {
    let mut qs = Vec::new();
    for mode in [IterationMode::DecGaussSeidel, IterationMode::DecJacobi] {
        for delta in Delta::ALL {
            for p in 1..=5 {
                qs.push(AmplificationQuery::new(3, delta, mode, p));
            }
        }
    }
    evaluate(qs)
}
