use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lagflow_core::exec::Mode;
use lagflow_core::io::{atomic_write, read_curve_json};
use lagflow_core::shrinker::{self, ClosedShrinker};
use lagflow_core::Vec2;
use lagflow_lab::config::{self, Overrides};
use lagflow_lab::error::{EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};
use lagflow_lab::experiment::{experiment, snapshot_files};
use lagflow_lab::sweep::{self, Axes};
use lagflow_lab::validate::{self, PRESERVATION_CASES};
use lagflow_lab::{svg, LabError, LabResult};

#[derive(Parser)]
#[command(name = "lagflow", version, about = "Equivariant Lagrangian mean curvature flow of profile curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flow one scenario to its singularity and write the artifacts.
    Simulate(SimulateArgs),
    /// Shoot for closed self-shrinkers.
    Shrinker(ShrinkerArgs),
    /// Run a grid of scenarios and write a summary CSV.
    Sweep(SweepArgs),
    /// Run the residual suites and the random preservation suite.
    Validate(ValidateArgs),
    /// Redraw the SVG plots of an existing run directory.
    Plot(PlotArgs),
}

#[derive(Args)]
struct Common {
    /// JSON configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    overrides: Overrides,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ShrinkerArgs {
    #[arg(long, default_value_t = 2)]
    n: u32,
    #[arg(long, default_value_t = 4.0)]
    eps: f64,
    /// Turns around the origin (rotation number = winding number).
    #[arg(long, default_value_t = 1)]
    wind: i64,
    /// Radial oscillations; 0 asks for the round solution. Repeatable.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    lobes: Vec<u32>,
    /// Shooting bracket for the start radius: LO,HI.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    bracket: Option<Vec<f64>>,
    #[arg(long = "N", default_value_t = 512)]
    nodes: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Grid file with `scenarios` and optional `flows` arrays.
    #[arg(long, conflicts_with = "config")]
    grid: Option<PathBuf>,
    #[arg(long, value_enum)]
    scenario: Option<lagflow_lab::ScenarioKind>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<u32>,
    #[arg(long = "R", value_delimiter = ',')]
    radius: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    a: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    l: Vec<u32>,
    #[arg(long = "N")]
    nodes: Option<usize>,
    #[arg(long)]
    omega0: Option<u32>,
    #[arg(long)]
    cfl: Option<f64>,
    /// Run the rows one after another.
    #[arg(long)]
    sequential: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Seed of the random preservation suite.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = PRESERVATION_CASES)]
    cases: usize,
    /// Also write `validate.json` here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Run directory holding `trajectory.csv`, `report.json` and snapshots.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn simulate(args: &SimulateArgs) -> LabResult<i32> {
    let cfg = config::resolve(args.common.config.as_deref(), &args.overrides)?;
    if args.common.dump_config {
        print!("{}", cfg.to_json());
        return Ok(EXIT_OK);
    }
    let exp = experiment(&cfg, Some(&args.out))?;
    let r = &exp.report;
    println!("stop: {:?} at t = {:.6e} after {} steps", r.stop.reason, r.stop.t, r.stop.steps);
    match &r.singularity {
        Some(s) => println!("T_est = {:.6e}  class = {:?}  type1 = {}  tail spread = {:.3}", s.t_est, s.class, s.type1, s.tail_spread),
        None => println!("no singularity estimate: {}", r.singularity_error.as_deref().unwrap_or("-")),
    }
    if let Some(rel) = r.area_law_relative {
        println!("area law residual (relative) = {rel:.3e}");
    }
    for v in &r.violations {
        eprintln!("violation: {} = {:.6e} (limit {:.6e})", v.check, v.value, v.limit);
    }
    println!("wrote {}", args.out.display());
    Ok(exp.exit_code())
}

fn shrinker_cmd(args: &ShrinkerArgs) -> LabResult<i32> {
    let round = shrinker::ShrinkerSpec::circle_radius(args.n, args.eps);
    let mut found: Vec<ClosedShrinker> = Vec::new();
    for &lobes in &args.lobes {
        let s = if lobes == 0 {
            let (lo, hi) = match &args.bracket {
                Some(b) => (b[0], b[1]),
                None => (0.8 * round, 1.2 * round),
            };
            shrinker::shoot_closed(args.n, args.eps, (args.wind, args.wind), (lo, hi), args.nodes)?
        } else {
            let b = args.bracket.as_ref().ok_or_else(|| LabError::Config("a lobed shrinker needs --bracket LO,HI".into()))?;
            shrinker::shoot_lobed(args.n, args.eps, args.wind, lobes, (b[0], b[1]), args.nodes)?
        };
        let path = args.out.join(format!("shrinker_n{}_eps{}_w{}_l{}.json", args.n, args.eps, args.wind, lobes));
        shrinker::write_shrinker_json(&path, &s)?;
        println!(
            "lobes {lobes}: r_start = {:.12}  r in [{:.6}, {:.6}]  p = {:.12e}  drift = {:.2e}  -> {}",
            s.spec.r_start,
            s.r_min,
            s.r_max,
            s.p_value,
            s.p_drift,
            path.display()
        );
        found.push(s);
    }
    shrinker::write_catalogue(&args.out.join("catalogue.csv"), &found)?;
    Ok(EXIT_OK)
}

fn sweep_cmd(args: &SweepArgs) -> LabResult<i32> {
    sweep::init_pool_from_env()?;
    let grid = match &args.grid {
        Some(path) => sweep::grid_from_json(&std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?)?,
        None => {
            let flags = Overrides {
                scenario: args.scenario,
                nodes: args.nodes,
                omega0: args.omega0,
                cfl: args.cfl,
                ..Default::default()
            };
            let base = config::resolve(args.common.config.as_deref(), &flags)?;
            let axes = Axes { n: args.n.clone(), radius: args.radius.clone(), a: args.a.clone(), l: args.l.clone() };
            sweep::expand(&base, &axes)?
        }
    };
    if args.common.dump_config {
        for cfg in &grid {
            print!("{}", cfg.to_json());
        }
        return Ok(EXIT_OK);
    }
    let mode = if args.sequential { Mode::Sequential } else { Mode::Parallel };
    let rows = sweep::sweep(&grid, Some(&args.out), mode)?;
    print!("{}", String::from_utf8_lossy(&sweep::summary_csv(&rows)));
    let bad = rows.iter().any(|r| !r.violations.is_empty());
    Ok(if bad { EXIT_VIOLATION } else { EXIT_OK })
}

fn validate_cmd(args: &ValidateArgs) -> LabResult<i32> {
    sweep::init_pool_from_env()?;
    let v = validate::validate(args.seed, args.cases, Mode::Parallel)?;
    for c in &v.checks {
        println!("{c}");
    }
    if let Some(dir) = &args.out {
        let mut text = serde_json::to_string_pretty(&v).expect("validation serialises");
        text.push('\n');
        atomic_write(&dir.join("validate.json"), text.as_bytes())?;
    }
    Ok(if v.passed() { EXIT_OK } else { EXIT_VIOLATION })
}

fn read_report(dir: &Path) -> LabResult<serde_json::Value> {
    let path = dir.join("report.json");
    let text = std::fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
}

fn read_column(dir: &Path, name: &str) -> LabResult<Vec<f64>> {
    let path = dir.join("trajectory.csv");
    let mut r = csv::Reader::from_path(&path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    let bad = |e: csv::Error| LabError::Config(format!("{}: {e}", path.display()));
    let col = r.headers().map_err(bad)?.iter().position(|h| h == name).ok_or_else(|| LabError::Config(format!("{}: no column {name}", path.display())))?;
    r.records().map(|rec| Ok(rec.map_err(bad)?.get(col).and_then(|v| v.parse().ok()).unwrap_or(f64::NAN))).collect()
}

fn plot_cmd(args: &PlotArgs) -> LabResult<i32> {
    let dir = &args.out;
    let report = read_report(dir)?;
    let snaps: Vec<f64> = report["snapshots"].as_array().map(|a| a.iter().map(|s| s["t"].as_f64().unwrap_or(f64::NAN)).collect()).unwrap_or_default();
    let mut curves = Vec::new();
    for (i, path) in snapshot_files(dir)?.iter().enumerate() {
        curves.push((snaps.get(i).copied().unwrap_or(i as f64), read_curve_json(path)?.curve));
    }
    let refs: Vec<(f64, &[Vec2])> = curves.iter().map(|(t, c)| (*t, c.points())).collect();
    atomic_write(&dir.join("curves.svg"), svg::curve_overlay(&refs).as_bytes())?;

    let times = read_column(dir, "t")?;
    let area = read_column(dir, "area")?;
    let a_proxy = read_column(dir, "a_proxy_sq")?;
    let t_est = report["singularity"]["T_est"].as_f64();
    let m: Option<Vec<f64>> = t_est.map(|te| times.iter().zip(&a_proxy).map(|(t, a)| a * (te - t)).collect());
    let init = &report["initial"];
    let q = match (init["rot"].as_i64(), init["wind0"].as_i64(), report["config"]["scenario"]["n"].as_i64()) {
        (Some(rot), Some(w), Some(n)) => Some((rot + (n - 1) * w) as f64),
        _ => None,
    };
    let series = svg::Series {
        times: &times,
        area: &area,
        predicted: q.zip(area.first().copied()).map(|(q, a0)| (a0, -std::f64::consts::TAU * q)),
        m: m.as_deref(),
    };
    atomic_write(&dir.join("invariants.svg"), svg::time_series(&series).as_bytes())?;
    println!("wrote {} and {}", dir.join("curves.svg").display(), dir.join("invariants.svg").display());
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_OK as u8 });
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Shrinker(a) => shrinker_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Validate(a) => validate_cmd(a),
        Command::Plot(a) => plot_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
