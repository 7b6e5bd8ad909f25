//! The `warpspec` command line.
//!
//! Exit status: 0 success, 1 validation mismatches, 2 usage or I/O errors,
//! 3 model precondition violations.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde_json::json;

use crate::measurements::{self, CalibrateError};
use crate::model::{self, MachineConfig, ProblemSize, TilingConfig, WaveTimeMode};
use crate::num::fraction_string;
use crate::optimizer::{self, Objective, SearchSpace};
use crate::profile::MachineProfileDocument;
use crate::simulator;
use crate::trace;
use crate::validate;
use crate::Nanos;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MODEL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "warpspec", version, about = "Performance model for warp-specialized GeMM kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Predict the execution time of one tiling.
    Simulate(SimulateArgs),
    /// Search tilings for the best objective value.
    Optimize(OptimizeArgs),
    /// Build a machine profile from a measurement file.
    Calibrate(CalibrateArgs),
    /// Check the recurrences against the protocol simulation over a grid.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Equation,
    Prose,
}

impl From<ModeArg> for WaveTimeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Equation => WaveTimeMode::EquationAsWritten,
            ModeArg::Prose => WaveTimeMode::ProseWithFinalMath,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Time,
    Wait,
}

#[derive(Debug, Args)]
struct ProblemArgs {
    #[arg(long)]
    m: u64,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    tm: u64,
    #[arg(long)]
    tn: u64,
    #[arg(long)]
    tk: u64,
    /// Machine profile (JSON).
    #[arg(long)]
    machine: PathBuf,
    /// Write a Trace Event Format file of one wave.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Override the profile's wave time convention.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Print every stage's event times.
    #[arg(long)]
    events: bool,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    machine: PathBuf,
    /// Candidate tile sizes: one list for all dimensions ("64,128") or one
    /// per dimension separated by '/' ("64,128/64/32,64").
    #[arg(long, default_value = "64,128")]
    space: String,
    #[arg(long, value_enum, default_value = "time")]
    objective: ObjectiveArg,
    /// Write the per-configuration report (JSON).
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// CSV: benchmark_name,t_m,t_n,t_k,duration_ns
    #[arg(long)]
    measurements: PathBuf,
    #[arg(long)]
    num_sms: u64,
    #[arg(long, default_value_t = MachineConfig::MIN_BUFFER_DEPTH)]
    buffer_depth: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "calibrated")]
    name: String,
    #[arg(long, value_enum, default_value = "equation")]
    mode: ModeArg,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    machine: PathBuf,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    grid_step: u64,
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u64).range(1..))]
    grid_max: u64,
    /// Check this many randomly chosen grid points instead of all of them.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "64,128")]
    space: String,
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.to_string(),
    }
}

fn model_err(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_MODEL,
        message: message.to_string(),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a, out, err),
        Command::Optimize(a) => cmd_optimize(a, out),
        Command::Calibrate(a) => cmd_calibrate(a, out),
        Command::Validate(a) => cmd_validate(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// `12345 ns (12.345 us)`, exact.
pub fn render_ns(ns: Nanos) -> String {
    format!("{ns} ns ({}.{:03} us)", ns / 1000, ns % 1000)
}

fn load_profile(path: &Path, mode: Option<ModeArg>) -> Result<(String, MachineConfig), Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let doc = MachineProfileDocument::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut mc = doc.to_machine().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if let Some(m) = mode {
        mc.wave_time_mode = m.into();
    }
    mc.validate().map_err(model_err)?;
    Ok((doc.name, mc))
}

fn problem(a: &ProblemArgs) -> Result<ProblemSize, Failure> {
    ProblemSize::new(a.m, a.n, a.k).map_err(model_err)
}

fn parse_list(text: &str) -> Result<Vec<u64>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>().map_err(|_| usage(format!("bad tile size {s:?} in --space"))))
        .collect()
}

fn parse_space(text: &str) -> Result<SearchSpace, Failure> {
    let lists = text.split('/').map(parse_list).collect::<Result<Vec<_>, _>>()?;
    match lists.as_slice() {
        [all] => SearchSpace::uniform(all),
        [m, n, k] => SearchSpace::new(m, n, k),
        _ => return Err(usage("--space takes one list or three '/'-separated lists")),
    }
    .map_err(model_err)
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| usage(format!("{}: {e}", path.display()))
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let (_, mc) = load_profile(&a.machine, a.mode)?;
    let p = problem(&a.problem)?;
    let t = TilingConfig::new(a.tm, a.tn, a.tk).map_err(model_err)?;
    if !t.divides(&p) {
        let _ = writeln!(
            err,
            "warning: tiling {t} does not divide the problem; partial tiles are costed as full tiles and the prediction overestimates"
        );
    }
    let r = simulator::simulate(&p, &t, &mc).map_err(model_err)?;
    let sync = model::synchronous_overall_time(&p, &t, &mc);

    let w = |out: &mut dyn Write, label: &str, v: String| writeln!(out, "{label:<14}{v}");
    let res = (|| -> std::io::Result<()> {
        w(out, "problem", format!("m={} n={} k={}", p.m(), p.n(), p.k()))?;
        w(out, "tiling", t.to_string())?;
        w(out, "stages", r.stage_count.to_string())?;
        w(out, "waves", r.wave_count.to_string())?;
        w(out, "t_load_a", render_ns(r.tile_times.t_load_a))?;
        w(out, "t_load_b", render_ns(r.tile_times.t_load_b))?;
        w(out, "t_math", render_ns(r.tile_times.t_math))?;
        w(out, "wave_time", render_ns(r.wave_time))?;
        w(out, "total_wait", render_ns(r.total_wait))?;
        w(out, "overall_time", render_ns(r.overall_time))?;
        w(out, "synchronous", render_ns(sync))?;
        if a.events {
            writeln!(out, "{:>6} {:>14} {:>14} {:>14} {:>14}", "stage", "s_a", "s_b", "s_m", "wait")?;
            let tl = &r.timeline;
            for i in 0..tl.stages() {
                writeln!(
                    out,
                    "{:>6} {:>14} {:>14} {:>14} {:>14}",
                    i + 1,
                    tl.s_a[i],
                    tl.s_b[i],
                    tl.s_m[i],
                    r.wait[i]
                )?;
            }
        }
        Ok(())
    })();
    res.map_err(|e| usage(e.to_string()))?;

    if let Some(path) = &a.trace {
        let events = trace::export_trace(&r, &r.tile_times);
        fs::write(path, trace::to_json(&events)).map_err(io(path))?;
    }
    Ok(EXIT_OK)
}

fn objective_name(o: Objective) -> &'static str {
    match o {
        Objective::MinOverallTime => "time",
        Objective::MinTotalWait => "wait",
    }
}

fn cmd_optimize(a: OptimizeArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (name, mc) = load_profile(&a.machine, a.mode)?;
    let p = problem(&a.problem)?;
    let space = parse_space(&a.space)?;
    let objective = match a.objective {
        ObjectiveArg::Time => Objective::MinOverallTime,
        ObjectiveArg::Wait => Objective::MinTotalWait,
    };
    let r = optimizer::optimize(&p, &mc, &space, objective).map_err(model_err)?;

    let tiling = |t: &TilingConfig| json!({"t_m": t.t_m(), "t_n": t.t_n(), "t_k": t.t_k()});
    writeln!(out, "winner        {}", r.best)
        .and_then(|_| writeln!(out, "objective     {}", objective_name(objective)))
        .and_then(|_| writeln!(out, "value         {}", render_ns(r.objective_value)))
        .and_then(|_| writeln!(out, "evaluated     {}", r.evaluated))
        .map_err(|e| usage(e.to_string()))?;

    if let Some(path) = &a.report {
        let per_config: Vec<_> = r
            .per_config
            .iter()
            .map(|(t, v)| {
                let mut row = tiling(t);
                row["value"] = json!(v);
                row
            })
            .collect();
        let report = json!({
            "problem": {"m": p.m(), "n": p.n(), "k": p.k()},
            "machine": name,
            "objective": objective_name(objective),
            "per_config": per_config,
            "winner": tiling(&r.best),
            "objective_value": r.objective_value,
            "evaluated": r.evaluated,
        });
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        fs::write(path, text).map_err(io(path))?;
    }
    Ok(EXIT_OK)
}

fn cmd_calibrate(a: CalibrateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let file = fs::File::open(&a.measurements).map_err(io(&a.measurements))?;
    let records = measurements::read_records(file)
        .map_err(|e| usage(format!("{}: {e}", a.measurements.display())))?;
    let c = measurements::calibrate(&records, a.num_sms, a.buffer_depth, a.mode.into()).map_err(
        |e| match e {
            CalibrateError::Fit { .. } | CalibrateError::MissingGroup(_) | CalibrateError::Model(_) => {
                model_err(e)
            }
        },
    )?;

    let res = (|| -> std::io::Result<()> {
        for (label, m) in [("init", &c.init), ("epilogue", &c.epilogue)] {
            writeln!(
                out,
                "{label:<14}mean {} ns, stddev {:.3} ns, n={}",
                m.mean,
                approx(&m.stddev),
                m.count
            )?;
        }
        writeln!(
            out,
            "load          throughput {} elem/ns, latency {} ns{}",
            fraction_string(&c.load.throughput),
            c.load.startup_latency,
            if c.load.clamped { " (clamped)" } else { "" }
        )?;
        writeln!(
            out,
            "compute       throughput {} elem/ns, latency {} ns{}",
            fraction_string(&c.compute.throughput),
            c.compute.startup_latency,
            if c.compute.clamped { " (clamped)" } else { "" }
        )
    })();
    res.map_err(|e| usage(e.to_string()))?;

    let doc = MachineProfileDocument::from_machine(&a.name, &c.machine);
    fs::write(&a.out, doc.to_canonical()).map_err(io(&a.out))?;
    Ok(EXIT_OK)
}

fn approx(q: &crate::Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn cmd_validate(a: ValidateArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (_, mc) = load_profile(&a.machine, None)?;
    let space = parse_space(&a.space)?;
    if a.grid_step > a.grid_max {
        return Err(usage("--grid-step exceeds --grid-max"));
    }
    let grid = validate::validation_grid(a.grid_step, a.grid_max, &space);
    let grid = match a.sample {
        Some(n) => validate::subsample(&grid, n, a.seed),
        None => grid,
    };
    let report = validate::cross_validate(&grid, &mc).map_err(model_err)?;

    let res = (|| -> std::io::Result<()> {
        for m in &report.mismatches {
            let p = &m.point.problem;
            writeln!(
                out,
                "mismatch m={} n={} k={} tiling {}: recurrence {} reference {} first divergent stage {}",
                p.m(),
                p.n(),
                p.k(),
                m.point.tiling,
                m.recurrence,
                m.reference,
                m.divergent_stage.map_or("-".to_owned(), |s| s.to_string())
            )?;
        }
        writeln!(out, "checked       {}", report.checked)?;
        writeln!(out, "mismatches    {}", report.mismatches.len())
    })();
    res.map_err(|e| usage(e.to_string()))?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_MISMATCH })
}
