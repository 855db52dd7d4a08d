//! CSV output with a `#` metadata header.

use std::fmt::Write as _;

use crate::harness::{ConvergenceTable, RunOutput};
use crate::stability::StabilityRow;

pub const SCHEMA: u32 = 1;

fn header(out: &mut String, kind: &str) {
    let _ = writeln!(out, "# schema={SCHEMA}");
    let _ = writeln!(out, "# kind={kind}");
}

fn echo_config(out: &mut String, text: &str) {
    for line in text.lines() {
        let _ = writeln!(out, "# config.{}", line.replacen(" = ", "=", 1));
    }
}

fn variable_names(components: usize) -> &'static [&'static str] {
    if components == 3 { &["rho", "momentum", "energy"] } else { &["u"] }
}

/// Solution CSV: `x` then the components, MOOD totals in the footer.
pub fn solution_csv(run: &RunOutput) -> String {
    let mut out = String::new();
    header(&mut out, "solution");
    echo_config(&mut out, &run.config.to_text());
    let s = &run.summary;
    let _ = writeln!(out, "# a={}", run.a);
    let _ = writeln!(out, "# a_max={}", s.a_max);
    let _ = writeln!(out, "# dt={}", s.dt_nominal);
    let _ = writeln!(out, "# steps={}", s.steps);
    let _ = writeln!(out, "# final_time={}", s.final_time);
    let _ = writeln!(out, "# mood_tolerance={}", run.config.mood_settings().tolerance_for(run.solution.grid().dx()));
    let _ = writeln!(out, "# wall_seconds={:.3}", run.wall_seconds);
    let names = variable_names(run.solution.components());
    let _ = writeln!(out, "x,{}", names.join(","));
    let grid = run.solution.grid();
    for i in 0..grid.n_nodes() {
        let vals: Vec<String> = run.solution.node(i).iter().map(|v| format!("{v:.17e}")).collect();
        let _ = writeln!(out, "{:.17e},{}", grid.x(i), vals.join(","));
    }
    let tested: &[&str] = if run.solution.components() == 3 {
        if run.config.mood_velocity { &["rho", "p", "velocity"] } else { &["rho", "p"] }
    } else {
        &["u"]
    };
    let _ = writeln!(out, "# mood_flagged_elements={}", s.flagged_elements);
    for (k, name) in tested.iter().enumerate() {
        let _ = writeln!(out, "# mood_flags.{name}={}", s.flags_by_variable.get(k).copied().unwrap_or(0));
    }
    let per_step: Vec<String> = s.per_step_flags.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(out, "# mood_flags_per_step={}", per_step.join(" "));
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.8e}")).unwrap_or_default()
}

/// Convergence CSV: relative errors and rates per norm, absolute errors after.
pub fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut out = String::new();
    header(&mut out, "convergence");
    echo_config(&mut out, &table.config.to_text());
    let _ = writeln!(
        out,
        "n,l1,rate_l1,l2,rate_l2,linf,rate_linf,abs_l1,abs_l2,abs_linf,flagged_elements,status"
    );
    for row in &table.rows {
        let rel = |k: usize| fmt_opt(row.errors.map(|e| e.relative[k]));
        let abs = |k: usize| fmt_opt(row.errors.map(|e| e.absolute[k]));
        let rate = |k: usize| row.rates.map(|r| format!("{:.4}", r[k])).unwrap_or_default();
        let status = row.failure.as_deref().map(|f| format!("diverged: {}", f.replace(',', ";"))).unwrap_or("ok".into());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            row.n_nodes,
            rel(0),
            rate(0),
            rel(1),
            rate(1),
            rel(2),
            rate(2),
            abs(0),
            abs(1),
            abs(2),
            row.flagged_elements,
            status
        );
    }
    out
}

/// Stability CSV: `time_order, delta, mode, iterations, max_cfl`.
pub fn stability_csv(rows: &[StabilityRow], preset: &str) -> String {
    let mut out = String::new();
    header(&mut out, "stability");
    let _ = writeln!(out, "# table={preset}");
    let _ = writeln!(out, "# theta_points={}", crate::stability::THETA_POINTS);
    let _ = writeln!(out, "# cfl_ceiling={}", crate::stability::CFL_CEILING);
    let _ = writeln!(out, "time_order,delta,mode,iterations,max_cfl");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{:.6}", r.time_order, r.delta, r.mode.name(), r.iterations, r.max_cfl);
    }
    out
}

/// Data rows of a CSV, skipping comments and the column header.
pub fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::IterationMode;
    use crate::stencil::Delta;

    #[test]
    fn stability_layout() {
        let rows = vec![StabilityRow {
            time_order: 3,
            delta: Delta::D2,
            mode: IterationMode::Direct,
            iterations: 0,
            max_cfl: 4.5,
        }];
        let csv = stability_csv(&rows, "2");
        assert!(csv.starts_with("# schema=1\n"));
        assert!(csv.contains("time_order,delta,mode,iterations,max_cfl\n"));
        assert_eq!(data_rows(&csv), vec![vec!["3", "d2", "direct", "0", "4.500000"]]);
    }
}
