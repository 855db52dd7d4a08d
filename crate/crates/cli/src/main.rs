use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use kinetic::goldens;
use kinetic::harness::{self, RESOLUTIONS};
use kinetic::output;
use kinetic::stability::{self, StabilityRow};
use kinetic::{Delta, MoodMode, ProblemId, RunConfig};

#[derive(Parser)]
#[command(name = "kinetic", version, about = "Kinetic relaxation schemes at unit CFL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write the solution CSV.
    Run(RunArgs),
    /// Convergence table against the exact solution.
    Converge(ConvergeArgs),
    /// Largest stable CFL per scheme.
    Stability(StabilityArgs),
    /// Regenerate every table into a directory and diff against the published values.
    Tables(TablesArgs),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    problem: Option<ProblemId>,
    /// Order in space and time.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    delta: Option<Delta>,
    /// DEC sweeps per step.
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    mood: Option<MoodMode>,
    /// Also test the velocity in the Euler criteria.
    #[arg(long)]
    mood_velocity: bool,
    #[arg(long)]
    n: Option<usize>,
    /// Final time.
    #[arg(long = "T")]
    final_time: Option<f64>,
    /// Flat `key = value` config; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated node counts.
    #[arg(long, value_delimiter = ',', default_values_t = RESOLUTIONS.to_vec())]
    resolutions: Vec<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    #[value(name = "2")]
    Direct,
    #[value(name = "3")]
    Dec,
    #[value(name = "appendix")]
    Sweeps,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Direct => "2",
            Preset::Dec => "3",
            Preset::Sweeps => "appendix",
        }
    }

    fn rows(self) -> Vec<StabilityRow> {
        match self {
            Preset::Direct => stability::direct_table(),
            Preset::Dec => stability::dec_table(),
            Preset::Sweeps => stability::sweep_table(),
        }
    }

    fn golden(self) -> goldens::StabilityTable {
        match self {
            Preset::Direct => goldens::StabilityTable::Direct,
            Preset::Dec => goldens::StabilityTable::Dec,
            Preset::Sweeps => goldens::StabilityTable::Sweeps,
        }
    }
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long)]
    table: Preset,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TablesArgs {
    /// Output directory.
    #[arg(long, default_value = "tables")]
    output: PathBuf,
    /// Skip the T = 10 convergence runs.
    #[arg(long)]
    quick: bool,
}

fn build_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match (&c.config, c.problem) {
        (Some(path), _) => RunConfig::from_file(path)?,
        (None, Some(p)) => RunConfig::new(p, c.order.unwrap_or(2))?,
        (None, None) => bail!("either --problem or --config is required"),
    };
    if let Some(p) = c.problem.filter(|&p| p != cfg.problem) {
        cfg.problem = p;
        cfg.final_time = p.spec().default_final_time;
    }
    if let Some(o) = c.order {
        let fresh = RunConfig::new(cfg.problem, o)?;
        cfg.space_order = o;
        cfg.time_order = o;
        cfg.delta = fresh.delta;
        cfg.dec_iterations = fresh.dec_iterations;
    }
    if let Some(d) = c.delta {
        cfg.delta = d;
    }
    if let Some(i) = c.iterations {
        cfg.dec_iterations = i;
    }
    if let Some(v) = c.cfl {
        cfg.cfl = v;
    }
    if let Some(v) = c.epsilon {
        cfg.epsilon = v;
    }
    if let Some(m) = c.mood {
        cfg.mood = m;
    }
    if c.mood_velocity {
        cfg.mood_velocity = true;
    }
    if let Some(n) = c.n {
        cfg.n_nodes = n;
    }
    if let Some(t) = c.final_time {
        cfg.final_time = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn stability_report(preset: Preset, rows: &[StabilityRow]) -> (usize, usize, String) {
    let diffs = goldens::diff_stability(preset.golden(), rows, 0.05);
    let mut text = String::from("time_order,delta,mode,iterations,max_cfl,published,ok\n");
    let mut ok = 0;
    for (r, d) in &diffs {
        ok += d.ok as usize;
        text.push_str(&format!(
            "{},{},{},{},{:.6},{},{}\n",
            r.time_order,
            r.delta,
            r.mode.name(),
            r.iterations,
            d.computed,
            d.published.label(),
            d.ok
        ));
    }
    (ok, diffs.len(), text)
}

fn convergence_report(order: usize, final_time: f64, table: &harness::ConvergenceTable) -> (usize, usize, String) {
    let Some(golden) = goldens::advection_golden(order, final_time) else {
        return (0, 0, String::new());
    };
    let mut text = String::from("n,l1,published_l1,ratio,rate_l1,published_rate,ok\n");
    let mut ok = 0;
    for (row, g) in table.rows.iter().zip(golden.iter()) {
        let (e, rate) = (row.errors.map(|e| e.relative[0]), row.rates.map(|r| r[0]));
        let ratio = e.map(|e| e / g.errors[0]);
        let good = ratio.is_some_and(|r| (1.0 / 1.5..=1.5).contains(&r))
            && match (rate, g.rates) {
                (Some(r), Some(p)) => (r - p[0]).abs() <= 0.2,
                _ => true,
            };
        ok += good as usize;
        text.push_str(&format!(
            "{},{},{:.8e},{},{},{},{}\n",
            row.n_nodes,
            e.map(|v| format!("{v:.8e}")).unwrap_or_default(),
            g.errors[0],
            ratio.map(|v| format!("{v:.4}")).unwrap_or_default(),
            rate.map(|v| format!("{v:.4}")).unwrap_or_default(),
            g.rates.map(|p| format!("{}", p[0])).unwrap_or_default(),
            good
        ));
    }
    (ok, golden.len(), text)
}

fn tables(args: &TablesArgs) -> Result<bool> {
    fs::create_dir_all(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
    let mut summary = String::new();
    let mut all_ok = true;
    for preset in [Preset::Direct, Preset::Dec, Preset::Sweeps] {
        let rows = preset.rows();
        fs::write(args.output.join(format!("stability_{}.csv", preset.name())), output::stability_csv(&rows, preset.name()))?;
        let (ok, total, diff) = stability_report(preset, &rows);
        fs::write(args.output.join(format!("stability_{}_diff.csv", preset.name())), diff)?;
        all_ok &= ok == total;
        summary.push_str(&format!("stability table {}: {ok}/{total} cells match\n", preset.name()));
    }
    let times: &[f64] = if args.quick { &[0.5] } else { &[0.5, 10.0] };
    for &t in times {
        for order in 1..=3 {
            let template = harness::advection_template(order, t);
            let table = harness::run_convergence(&template, &RESOLUTIONS)?;
            let stem = format!("convergence_T{t}_order{order}");
            fs::write(args.output.join(format!("{stem}.csv")), output::convergence_csv(&table))?;
            let (ok, total, diff) = convergence_report(order, t, &table);
            fs::write(args.output.join(format!("{stem}_diff.csv")), diff)?;
            all_ok &= ok == total;
            summary.push_str(&format!("convergence T={t} order {order}: {ok}/{total} rows within tolerance\n"));
        }
    }
    fs::write(args.output.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(all_ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(a) => build_config(&a.common).and_then(|cfg| {
            let out = harness::run(&cfg)?;
            emit(a.common.output.as_deref(), &output::solution_csv(&out))?;
            Ok(true)
        }),
        Command::Converge(a) => build_config(&a.common).and_then(|cfg| {
            let table = harness::run_convergence(&cfg, &a.resolutions)?;
            emit(a.common.output.as_deref(), &output::convergence_csv(&table))?;
            Ok(true)
        }),
        Command::Stability(a) => {
            let rows = a.table.rows();
            emit(a.output.as_deref(), &output::stability_csv(&rows, a.table.name())).map(|_| true)
        }
        Command::Tables(a) => tables(&a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
