//! Independent reference computations compared with the library.

use nalgebra::{DMatrix, DVector};

use kinetic::dec::{Solver, SpeedPolicy, StepSettings};
use kinetic::harness::{build_solver, error_norms_in, reference_solution, restrict, run, total_variation};
use kinetic::problems::{smooth_ic, ProblemId, ReferenceStrategy, SOD_LEFT, SOD_RIGHT};
use kinetic::riemann::{sod_exact, star_state, Primitive};
use kinetic::stencil::apply_delta;
use kinetic::waves::{EulerState, Law, WaveKind, WaveModel};
use kinetic::{Delta, Grid, MoodMode, MoodSettings, RunConfig, SolutionField, StencilOperator, TimeScheme};

/// `delta` as a dense matrix, column by column.
fn delta_matrix(op: &StencilOperator, wind: f64, grid: &Grid) -> DMatrix<f64> {
    let n = grid.n_nodes();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        for (i, v) in apply_delta(&e, op, wind, grid).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

/// Two-wave advection pieces: `M: u -> (M+, M-)`, `P`, `Lambda delta`.
struct Linear {
    m: DMatrix<f64>,
    p: DMatrix<f64>,
    l: DMatrix<f64>,
}

fn linear_two_wave(op: &StencilOperator, a: f64, grid: &Grid) -> Linear {
    let n = grid.n_nodes();
    let mut m = DMatrix::zeros(2 * n, n);
    let mut p = DMatrix::zeros(n, 2 * n);
    let mut l = DMatrix::zeros(2 * n, 2 * n);
    let dp = delta_matrix(op, a, grid) * a;
    let dm = delta_matrix(op, -a, grid) * -a;
    // solver layout: node-major, velocity (+a, -a) inside
    for i in 0..n {
        m[(2 * i, i)] = 0.5 * (1.0 + 1.0 / a);
        m[(2 * i + 1, i)] = 0.5 * (1.0 - 1.0 / a);
        p[(i, 2 * i)] = 1.0;
        p[(i, 2 * i + 1)] = 1.0;
        for j in 0..n {
            l[(2 * i, 2 * j)] = dp[(i, j)];
            l[(2 * i + 1, 2 * j + 1)] = dm[(i, j)];
        }
    }
    Linear { m, p, l }
}

fn advection_solver(n: usize, a: f64, order: usize, delta: Delta, iterations: usize, epsilon: f64, cfl: f64) -> Solver {
    let grid = Grid::periodic(n, 0.0, 1.0).unwrap();
    let u0 = SolutionField::from_fn(grid, 1, |x| vec![smooth_ic(x)]);
    let model = WaveModel::new(WaveKind::TwoWave, Law::Advection, a).unwrap();
    let settings = StepSettings { epsilon, dec_iterations: iterations, mood: MoodSettings::new(MoodMode::Off) };
    Solver::new(
        model,
        TimeScheme::for_order(order).unwrap(),
        StencilOperator::new(delta),
        settings,
        SpeedPolicy::Fixed,
        cfl,
        &u0,
    )
    .unwrap()
}

#[test]
fn stiff_crank_nicolson_step_matches_dense_solve() {
    let (n, a, cfl, mu) = (16, 1.5, 0.5, 2.0);
    let grid = Grid::periodic(n, 0.0, 1.0).unwrap();
    let dx = grid.dx();
    let dt = cfl * dx / a;
    let op = StencilOperator::new(Delta::D2);
    let mut solver = advection_solver(n, a, 2, Delta::D2, 80, dt / mu, cfl);
    let f0 = DVector::from_column_slice(solver.kinetic().stage(0));
    solver.step(f64::INFINITY).unwrap();
    let got = DVector::from_column_slice(solver.kinetic().stage(0));

    let lin = linear_two_wave(&op, a, &grid);
    let r = dt / dx;
    let id = DMatrix::<f64>::identity(2 * n, 2 * n);
    let mp = &lin.m * &lin.p;
    let lhs = &id + &lin.l * (0.5 * r) + (&id - &mp) * (0.5 * mu);
    let rhs = &f0 - &lin.l * &f0 * (0.5 * r) + (&mp * &f0 - &f0) * (0.5 * mu);
    let want = lhs.lu().solve(&rhs).unwrap();
    assert!((got - want).amax() < 1e-12);
}

fn relaxed_dense(order: usize, delta: Delta) -> (Vec<f64>, Vec<f64>) {
    let (n, a, cfl) = (8, 1.01, 1.0);
    let grid = Grid::periodic(n, 0.0, 1.0).unwrap();
    let r = cfl / a * a;
    let op = StencilOperator::new(delta);
    let scheme = TimeScheme::for_order(order).unwrap();
    let mut solver = advection_solver(n, a, order, delta, 60, 0.0, cfl);
    let u0 = DVector::from_vec(solver.solution().values().to_vec());
    solver.step(f64::INFINITY).unwrap();
    let got = solver.solution().values().to_vec();

    // u_i = u0 - r sum_l a_il P L M u_l over the active stages
    let lin = linear_two_wave(&op, a, &grid);
    let k = &lin.p * &lin.l * &lin.m / a;
    let q = scheme.q();
    let mut lhs = DMatrix::<f64>::identity(q * n, q * n);
    let mut rhs = DVector::zeros(q * n);
    for i in 0..q {
        let w = &scheme.weights()[i];
        let explicit = &u0 - &k * &u0 * (r * w[0]);
        rhs.rows_mut(i * n, n).copy_from(&explicit);
        for l in 0..q {
            let block = &k * (r * w[l + 1]);
            let mut view = lhs.view_mut((i * n, l * n), (n, n));
            view += block;
        }
    }
    let stages = lhs.lu().solve(&rhs).unwrap();
    let want = stages.rows((q - 1) * n, n).iter().copied().collect();
    (got, want)
}

#[test]
fn relaxed_fixed_point_on_eight_nodes() {
    for (order, delta) in [(2, Delta::D2), (3, Delta::D32), (3, Delta::D31)] {
        let (got, want) = relaxed_dense(order, delta);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "order {order} {delta}: {g} vs {w}");
        }
    }
}

/// Pressure function written out independently of the library.
fn pressure_function(p: f64, l: &Primitive, r: &Primitive, g: f64) -> f64 {
    let side = |s: &Primitive| {
        let c = (g * s.p / s.rho).sqrt();
        if p > s.p {
            let a = 2.0 / ((g + 1.0) * s.rho);
            let b = (g - 1.0) / (g + 1.0) * s.p;
            (p - s.p) * (a / (p + b)).sqrt()
        } else {
            2.0 * c / (g - 1.0) * ((p / s.p).powf((g - 1.0) / (2.0 * g)) - 1.0)
        }
    };
    side(l) + side(r) + (r.u - l.u)
}

#[test]
fn sod_star_pressure_against_bisection() {
    let (mut lo, mut hi) = (1e-6, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pressure_function(mid, &SOD_LEFT, &SOD_RIGHT, 1.4) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let oracle = 0.5 * (lo + hi);
    let star = star_state(&SOD_LEFT, &SOD_RIGHT, 1.4).unwrap();
    assert!((star.p - oracle).abs() < 1e-10);
    assert!((oracle - 0.30313).abs() < 1e-5);
}

#[test]
fn mirrored_riemann_data_mirror_the_solution() {
    let l = Primitive::new(1.0, 0.2, 1.0);
    let r = Primitive::new(0.125, -0.1, 0.1);
    let ml = Primitive::new(r.rho, -r.u, r.p);
    let mr = Primitive::new(l.rho, -l.u, l.p);
    for k in 0..41 {
        let x = k as f64 / 40.0;
        let a = sod_exact(x, 0.2, 0.5, &l, &r, 1.4).unwrap();
        let b = sod_exact(1.0 - x, 0.2, 0.5, &ml, &mr, 1.4).unwrap();
        if (x - 0.5).abs() < 1e-12 {
            continue;
        }
        assert!((a.rho - b.rho).abs() < 1e-10 && (a.u + b.u).abs() < 1e-10 && (a.p - b.p).abs() < 1e-10, "x = {x}");
    }
}

#[test]
fn buckley_speed_from_dense_sample() {
    let f = |u: f64| u * u / (u * u + (1.0 - u) * (1.0 - u));
    let h = 1e-6;
    let n = 1_000_000;
    let max = (0..=n)
        .map(|k| -0.5 + 2.0 * k as f64 / n as f64)
        .map(|u| ((f(u + h) - f(u - h)) / (2.0 * h)).abs())
        .fold(0.0, f64::max);
    assert!((max - 2.0).abs() < 1e-6);
    let cfg = RunConfig::new(ProblemId::BuckleyLeverett, 2).unwrap();
    let (solver, _) = build_solver(&cfg).unwrap();
    assert!((solver.model().a() - 1.01 * max).abs() < 1e-6);
}

fn burgers_characteristics(grid: &Grid, t: f64) -> SolutionField {
    SolutionField::from_fn(grid.clone(), 1, |x| {
        // xi + u0(xi) t = x, Newton from xi = x
        let mut xi = x;
        for _ in 0..100 {
            let g = xi + smooth_ic(xi) * t - x;
            let dg = 1.0 + 2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * xi).cos() * t;
            xi -= g / dg;
        }
        vec![smooth_ic(xi)]
    })
}

#[test]
fn burgers_before_the_shock_follows_characteristics() {
    let mut errors = Vec::new();
    for n in [100, 200] {
        let mut cfg = RunConfig::new(ProblemId::Burgers, 3).unwrap();
        cfg.n_nodes = n;
        cfg.final_time = 0.1;
        let out = run(&cfg).unwrap();
        let exact = burgers_characteristics(out.solution.grid(), 0.1);
        errors.push(error_norms_in(&out.solution, &exact, None).unwrap().absolute[0]);
    }
    assert!(errors[0] < 1e-3, "{errors:?}");
    assert!(errors[0] / errors[1] >= 2f64.powf(1.7), "{errors:?}");
}

#[test]
fn d32_truncation_error_is_fourth_order() {
    let err = |n: usize| {
        let grid = Grid::periodic(n, 0.0, 1.0).unwrap();
        let u: Vec<f64> = grid.nodes().map(|x| (2.0 * std::f64::consts::PI * x).sin()).collect();
        let d = apply_delta(&u, &StencilOperator::new(Delta::D32), 1.0, &grid);
        grid.nodes()
            .zip(d)
            .map(|(x, v)| (v / grid.dx() - 2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * x).cos()).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(64) / err(128);
    assert!((ratio - 16.0).abs() < 0.5, "ratio {ratio}");
}

#[test]
fn source_inverse_is_an_inverse() {
    for order in 1..=3 {
        let s = TimeScheme::for_order(order).unwrap();
        let a = s.padded_source();
        let n = a.nrows();
        for mu in [0.0, 1.0, 1e3, 1e8] {
            let inv = s.source_matrix_inverse(mu).unwrap();
            let prod = inv * (DMatrix::<f64>::identity(n, n) + &a * mu);
            assert!((prod - DMatrix::<f64>::identity(n, n)).amax() < 1e-9, "order {order}, mu {mu}");
        }
    }
}

fn advection_order2(n: usize, eps: f64) -> (SolutionField, SolutionField) {
    let mut cfg = RunConfig::new(ProblemId::Advection, 2).unwrap();
    cfg.n_nodes = n;
    cfg.epsilon = eps;
    let out = run(&cfg).unwrap();
    let exact = cfg.problem.spec().exact(out.solution.grid(), cfg.final_time).unwrap().unwrap();
    (out.solution, exact)
}

fn rate_to_exact(eps: f64) -> f64 {
    let e: Vec<f64> = [100, 200]
        .iter()
        .map(|&n| {
            let (num, exact) = advection_order2(n, eps);
            error_norms_in(&num, &exact, None).unwrap().relative[0]
        })
        .collect();
    (e[0] / e[1]).log2()
}

#[test]
fn rates_are_uniform_in_small_epsilon() {
    let base = rate_to_exact(0.0);
    let r = rate_to_exact(1e-6);
    assert!((r - base).abs() <= 0.3, "rate {r} vs {base}");
}

/// At this epsilon the O(epsilon) model error swamps the discretisation error at N = 200.
#[test]
#[ignore = "epsilon = 1e-2 solves a different relaxation system; its distance to the equilibrium solution stops shrinking"]
fn rates_are_uniform_up_to_epsilon_one_hundredth() {
    let base = rate_to_exact(0.0);
    let r = rate_to_exact(1e-2);
    assert!((r - base).abs() <= 0.3, "rate {r} vs {base}");
}

#[test]
fn finite_epsilon_still_self_converges_at_second_order() {
    let u: Vec<SolutionField> = [100, 200, 400].iter().map(|&n| advection_order2(n, 1e-2).0).collect();
    let gap = |c: &SolutionField, f: &SolutionField| {
        let f = restrict(f, c.grid().n_nodes()).unwrap();
        error_norms_in(c, &f, None).unwrap().absolute[0]
    };
    let rate = (gap(&u[0], &u[1]) / gap(&u[1], &u[2])).log2();
    assert!((rate - rate_to_exact(0.0)).abs() <= 0.3, "self-convergence rate {rate}");
}

#[test]
fn error_drops_with_resolution_at_every_order() {
    for order in 1..=3 {
        let e: Vec<f64> = [50, 100]
            .iter()
            .map(|&n| {
                let mut cfg = RunConfig::new(ProblemId::Advection, order).unwrap();
                cfg.n_nodes = n;
                let out = run(&cfg).unwrap();
                let exact = cfg.problem.spec().exact(out.solution.grid(), cfg.final_time).unwrap().unwrap();
                error_norms_in(&out.solution, &exact, None).unwrap().relative[0]
            })
            .collect();
        assert!(e[0] / e[1] >= 2f64.powf(order as f64 - 0.3), "order {order}: {e:?}");
    }
}

/// Stable schemes stay bounded over a long run; unstable ones blow up.
#[test]
fn solver_agrees_with_the_analyzer() {
    use kinetic::stability::{max_stable_cfl, AmplificationQuery, IterationMode};
    let cases = [(2, Delta::D2, 3), (2, Delta::D2, 1), (3, Delta::D31, 4), (3, Delta::D32, 2), (3, Delta::D1, 5)];
    for (order, delta, p) in cases {
        let lambda = max_stable_cfl(&AmplificationQuery::new(order, delta, IterationMode::DecJacobi, p));
        let mut cfg = RunConfig::new(ProblemId::Advection, order).unwrap();
        cfg.delta = delta;
        cfg.dec_iterations = p;
        cfg.n_nodes = 200;
        cfg.final_time = 10.0;
        let blew_up = match run(&cfg) {
            Ok(out) => out.solution.max_abs() > 1e3 || !out.solution.is_finite(),
            Err(_) => true,
        };
        assert_eq!(blew_up, lambda < 1.0, "order {order} {delta} p={p}: lambda* = {lambda}");
    }
}

#[test]
fn limited_scalar_runs_do_not_grow_total_variation() {
    for problem in [ProblemId::Burgers, ProblemId::BuckleyLeverett] {
        for order in 2..=3 {
            let mut cfg = RunConfig::new(problem, order).unwrap();
            cfg.mood = MoodMode::Full;
            let out = run(&cfg).unwrap();
            let tv0 = total_variation(&out.initial, 0);
            let tv = total_variation(&out.solution, 0);
            assert!(tv <= tv0 + 0.1, "{problem} order {order}: {tv} vs {tv0}");
        }
    }
}

#[test]
fn buckley_reference_is_monotone_across_the_shock() {
    let cfg = RunConfig::new(ProblemId::BuckleyLeverett, 1).unwrap();
    let spec = cfg.problem.spec();
    let reference = reference_solution(&cfg, ReferenceStrategy::FirstOrderFine, spec.reference_nodes).unwrap();
    // the fine run restricted to 100 nodes: find the steepest drop, check the window around it
    let u = reference.component(0);
    let n = u.len();
    let jump = |i: usize| u[(i + 1) % n] - u[i];
    let k = (0..n).max_by(|&i, &j| jump(i).abs().total_cmp(&jump(j).abs())).unwrap();
    let sign = jump(k).signum();
    let at = |d: isize| jump((k as isize + d).rem_euclid(n as isize) as usize);
    // upstream of the jump the profile climbs into it; downstream it has one trend
    for d in -4..0 {
        assert!(at(d) * sign >= -1e-12, "upstream oscillation at offset {d}");
    }
    let trend = at(1).signum();
    for d in 2..=4 {
        assert!(at(d) * trend >= -1e-12, "downstream oscillation at offset {d}");
    }
}

#[test]
fn sod_l1_distance_drops_with_order() {
    let mut l1 = Vec::new();
    for order in 1..=3 {
        let mut cfg = RunConfig::new(ProblemId::EulerSod, order).unwrap();
        cfg.mood = MoodMode::Full;
        let out = run(&cfg).unwrap();
        for i in 0..out.solution.grid().n_nodes() {
            let s = EulerState::from_conserved(out.solution.node(i), 1.4);
            assert!(s.rho > 0.0 && s.pressure() > 0.0);
        }
        let exact = cfg.problem.spec().exact(out.solution.grid(), cfg.final_time).unwrap().unwrap();
        l1.push(error_norms_in(&out.solution, &exact, Some(0)).unwrap().absolute[0]);
    }
    assert!(l1[0] > l1[1] && l1[1] > l1[2], "{l1:?}");
}

/// Max-norm distance is dominated by the node nearest the shock; recorded as observed.
#[test]
#[ignore = "max-norm distance to the exact Sod solution does not drop with order at N = 100"]
fn sod_max_distance_drops_with_order() {
    let mut linf = Vec::new();
    for order in 1..=3 {
        let mut cfg = RunConfig::new(ProblemId::EulerSod, order).unwrap();
        cfg.mood = MoodMode::Full;
        let out = run(&cfg).unwrap();
        let exact = cfg.problem.spec().exact(out.solution.grid(), cfg.final_time).unwrap().unwrap();
        linf.push(error_norms_in(&out.solution, &exact, Some(0)).unwrap().absolute[2]);
    }
    assert!(linf[0] > linf[1] && linf[1] > linf[2], "{linf:?}");
}
