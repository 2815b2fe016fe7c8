//! Command-line front end: `run`, `convergence` and `compare`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::diagnostics::{fit_convergence_order, HistoryRecord};
use crate::error::{Error, Result};
use crate::io::{load_config, write_snapshot, HistoryWriter};
use crate::problems::{desk_scale_drop_spec, full_scale_drop_spec, manufactured_spec, ProblemSpec};
use crate::schemes::SchemeKind;
use crate::simulation::{RunOutcome, Simulation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BASELINE_DIVERGED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ch-gpav", version, about = "Energy-stable Cahn–Hilliard solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one simulation described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Temporal convergence study on the manufactured solution.
    Convergence {
        /// Scheme: 1a, 1b, 2a, 2b, semi or sav.
        #[arg(long)]
        scheme: String,
        /// Comma-separated step sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        dts: Vec<f64>,
        /// Grid points per direction.
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run several schemes on a drop-array benchmark and write their histories.
    Compare {
        /// Comma-separated schemes.
        #[arg(long, value_delimiter = ',', required = true)]
        schemes: Vec<String>,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Benchmark::Desk)]
        problem: Benchmark,
        #[arg(long, default_value_t = 1)]
        history_every: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Benchmark {
    /// 5×5 drops on a 128² grid.
    Desk,
    /// 19×19 drops on a 512² grid.
    #[value(alias = "paper")]
    Full,
}

impl Benchmark {
    fn spec(self) -> ProblemSpec {
        match self {
            Benchmark::Desk => desk_scale_drop_spec(),
            Benchmark::Full => full_scale_drop_spec(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run { config } => cli_run(&config),
        Command::Convergence { scheme, dts, n, out } => cli_convergence(&scheme, &dts, n, &out),
        Command::Compare {
            schemes,
            dt,
            steps,
            problem,
            history_every,
            out,
        } => cli_compare(&schemes, dt, steps, problem, history_every, &out),
    }
}

fn config_error(e: &Error) -> i32 {
    eprintln!("configuration error: {e}");
    EXIT_CONFIG
}

fn failure(e: &Error) -> i32 {
    eprintln!("error: {e}");
    EXIT_FAILURE
}

fn parse_schemes(list: &[String]) -> Result<Vec<SchemeKind>> {
    list.iter().map(|s| s.parse()).collect()
}

/// Runs `sim` for `steps` steps, writing a history row every `history_every`
/// steps (and at the end) plus optional snapshots.
fn run_to_files(
    sim: &Simulation,
    steps: usize,
    history_every: usize,
    snapshot_every: usize,
    history_path: &Path,
    snapshot_dir: Option<&Path>,
) -> Result<(RunOutcome, HistoryRecord)> {
    let mut writer = HistoryWriter::create(history_path)?;
    let summary = sim.run(steps, 1, |rec, state| {
        if rec.step % history_every == 0 || rec.step == steps {
            writer.write(rec)?;
        }
        if let Some(dir) = snapshot_dir {
            if snapshot_every > 0 && rec.step % snapshot_every == 0 {
                let path = dir.join(format!("snapshot_{:06}.bin", rec.step));
                write_snapshot(&state.phi_cur, rec.t, path)?;
            }
        }
        Ok(())
    })?;
    Ok((summary.outcome, summary.last_record))
}

fn report_outcome(kind: SchemeKind, outcome: RunOutcome, last: &HistoryRecord) -> i32 {
    match outcome {
        RunOutcome::Completed => {
            println!(
                "{kind}: completed {} steps, t = {:.6}, E = {:.10e}, mass = {:.10e}",
                last.step, last.t, last.energy, last.mass
            );
            EXIT_OK
        }
        RunOutcome::Diverged { step, max_abs } => {
            eprintln!("{kind}: diverged at step {step} (max |phi| = {max_abs:e})");
            if kind.is_baseline() {
                EXIT_BASELINE_DIVERGED
            } else {
                EXIT_FAILURE
            }
        }
    }
}

pub fn cli_run(config_path: &Path) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(cfg) => cfg,
        Err(e) => return config_error(&e),
    };
    let sim = match Simulation::new(cfg.problem.clone(), cfg.scheme, cfg.dealias) {
        Ok(sim) => sim,
        Err(e) => return config_error(&e),
    };
    if let Err(e) = fs::create_dir_all(&cfg.output_dir) {
        return failure(&e.into());
    }
    let history = cfg.output_dir.join(format!("history_{}.csv", cfg.scheme));
    let result = run_to_files(
        &sim,
        cfg.problem.num_steps(),
        cfg.history_every,
        cfg.snapshot_every,
        &history,
        Some(&cfg.output_dir),
    );
    match result {
        Ok((outcome, last)) => report_outcome(cfg.scheme, outcome, &last),
        Err(e) => failure(&e),
    }
}

/// One row of a convergence study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergencePoint {
    pub dt: f64,
    pub linf: f64,
    pub l2: f64,
}

/// Final-time errors of the manufactured problem on an `n²` grid for each
/// step size. Cases run concurrently.
pub fn convergence_study(kind: SchemeKind, dts: &[f64], n: usize) -> Result<Vec<ConvergencePoint>> {
    let specs = dts
        .iter()
        .map(|&dt| manufactured_spec(n, dt))
        .collect::<Result<Vec<_>>>()?;
    std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .into_iter()
            .map(|spec| {
                scope.spawn(move || -> Result<ConvergencePoint> {
                    let dt = spec.dt;
                    let sim = Simulation::new(spec, kind, false)?;
                    let summary = sim.run(sim.problem().num_steps(), usize::MAX, |_, _| Ok(()))?;
                    if let RunOutcome::Diverged { step, max_abs } = summary.outcome {
                        return Err(Error::Diverged { step, max_abs });
                    }
                    let rec = summary.last_record;
                    Ok(ConvergencePoint {
                        dt,
                        linf: rec.linf_err.unwrap_or(f64::NAN),
                        l2: rec.l2_err.unwrap_or(f64::NAN),
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("convergence worker panicked"))
            .collect()
    })
}

pub fn cli_convergence(scheme: &str, dts: &[f64], n: usize, out: &Path) -> i32 {
    let kind: SchemeKind = match scheme.parse() {
        Ok(k) => k,
        Err(e) => return config_error(&e),
    };
    if dts.is_empty() || dts.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return config_error(&Error::validation("dts", "step sizes must be positive"));
    }
    let mut dts = dts.to_vec();
    dts.sort_by(|a, b| b.total_cmp(a));
    dts.dedup();
    let points = match convergence_study(kind, &dts, n) {
        Ok(p) => p,
        Err(e @ Error::Validation { .. }) | Err(e @ Error::InvalidGrid(_)) => return config_error(&e),
        Err(e) => return failure(&e),
    };
    if let Err(e) = fs::create_dir_all(out) {
        return failure(&e.into());
    }
    let mut text = String::from("dt,linf,l2\n");
    for p in &points {
        text.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", p.dt, p.linf, p.l2));
        println!("dt = {:.6e}  linf = {:.6e}  l2 = {:.6e}", p.dt, p.linf, p.l2);
    }
    let path = out.join(format!("convergence_{kind}.csv"));
    if let Err(e) = fs::write(&path, text) {
        return failure(&e.into());
    }
    let dts: Vec<f64> = points.iter().map(|p| p.dt).collect();
    let linf: Vec<f64> = points.iter().map(|p| p.linf).collect();
    let l2: Vec<f64> = points.iter().map(|p| p.l2).collect();
    match (fit_convergence_order(&dts, &linf), fit_convergence_order(&dts, &l2)) {
        (Ok(s_inf), Ok(s_2)) => println!("{kind}: fitted order linf = {s_inf:.4}, l2 = {s_2:.4}"),
        (_, Err(e)) | (Err(e), _) => println!("{kind}: no order fitted ({e})"),
    }
    EXIT_OK
}

pub fn cli_compare(
    schemes: &[String],
    dt: f64,
    steps: usize,
    problem: Benchmark,
    history_every: usize,
    out: &Path,
) -> i32 {
    let kinds = match parse_schemes(schemes) {
        Ok(k) => k,
        Err(e) => return config_error(&e),
    };
    if history_every == 0 {
        return config_error(&Error::validation("history-every", "must be at least 1"));
    }
    let mut spec = problem.spec();
    spec.dt = dt;
    spec.tf = spec.t0 + dt * steps as f64;
    if let Err(e) = spec.validate() {
        return config_error(&e);
    }
    if let Err(e) = fs::create_dir_all(out) {
        return failure(&e.into());
    }
    let results: Vec<(SchemeKind, Result<(RunOutcome, HistoryRecord)>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&kind| {
                let spec = spec.clone();
                scope.spawn(move || {
                    let path = out.join(format!("history_{kind}.csv"));
                    let res = Simulation::new(spec, kind, false)
                        .and_then(|sim| run_to_files(&sim, steps, history_every, 0, &path, None));
                    (kind, res)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("compare worker panicked"))
            .collect()
    });
    let mut code = EXIT_OK;
    for (kind, res) in results {
        let c = match res {
            Ok((outcome, last)) => report_outcome(kind, outcome, &last),
            Err(e) => failure(&e),
        };
        // A tool failure outranks an expected baseline blow-up.
        code = match (code, c) {
            (EXIT_FAILURE, _) | (_, EXIT_FAILURE) => EXIT_FAILURE,
            (EXIT_BASELINE_DIVERGED, _) | (_, EXIT_BASELINE_DIVERGED) => EXIT_BASELINE_DIVERGED,
            _ => EXIT_OK,
        };
    }
    code
}
