use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ngmres_flow::experiments::{
    emit_plot, read_records_csv, write_atomic, write_compare_csv, write_run, write_sweep_csv, PlotSeries,
};
use ngmres_flow::{DepthSchedule, DriveStatus, ExperimentError, Mode, NormChoice, RunConfig, RunLog};

const EXIT_MAX_ITERS: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_CONFIG: u8 = 64;

#[derive(Parser)]
#[command(name = "ngmres-flow", version, about = "NGMRES-accelerated Picard iteration for the lid-driven cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write run.csv / run.json
    Run {
        #[command(flatten)]
        common: Common,
        /// Write the final u, v, p fields under <out>/fields
        #[arg(long)]
        dump_fields: bool,
    },
    /// Repeat one experiment over several grid sizes
    SweepMesh {
        #[command(flatten)]
        common: Common,
        /// Grid sizes, nondecreasing
        #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
        sizes: Vec<usize>,
    },
    /// Run with the V' and the l2 optimization norm
    CompareNorms {
        #[command(flatten)]
        common: Common,
    },
    /// Plot residual histories from run, sweep or comparison CSVs
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// SVG file to write
        #[arg(long, default_value = "convergence.svg")]
        out: PathBuf,
        /// Add a panel comparing theta with the observed residual ratio
        #[arg(long)]
        theta: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Reynolds number (viscosity 1/re)
    #[arg(long, default_value_t = 1000.0)]
    re: f64,
    /// Cells per side
    #[arg(long, default_value_t = 64)]
    nx: usize,
    /// History depth: a count, `inf`, or `early:switch_tol:late`
    #[arg(long, default_value = "5")]
    m: DepthSchedule,
    /// Optimization norm: vprime or l2
    #[arg(long, default_value = "vprime")]
    norm: NormChoice,
    /// Stop once the V' residual norm is at most this
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// picard or ngmres
    #[arg(long, default_value = "ngmres")]
    mode: Mode,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Record per-iteration wall times in the CSV
    #[arg(long)]
    timing: bool,
    /// Also write an SVG convergence plot
    #[arg(long)]
    plot: bool,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            re: self.re,
            nx: self.nx,
            m: self.m,
            norm: self.norm,
            tol: self.tol,
            max_iters: self.max_iters,
            mode: self.mode,
            timing: self.timing,
            check_beta_equivalence: false,
        }
    }
}

fn threads() -> Result<usize, ExperimentError> {
    match std::env::var("NGMRES_FLOW_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => s.trim().parse::<usize>().ok().filter(|&n| n >= 1).ok_or(ExperimentError::InvalidConfig {
            field: "NGMRES_FLOW_THREADS",
            reason: format!("expected a positive integer, got '{s}'"),
        }),
    }
}

fn status_code(logs: &[&RunLog]) -> u8 {
    logs.iter()
        .map(|l| match l.status {
            DriveStatus::Converged => 0,
            DriveStatus::MaxIters => EXIT_MAX_ITERS,
            DriveStatus::Diverged => EXIT_DIVERGED,
        })
        .max()
        .unwrap_or(0)
}

fn summarize(log: &RunLog) {
    let g = log.final_record().map_or(f64::NAN, |r| r.g_vprime);
    let status = match log.status {
        DriveStatus::Converged => "converged",
        DriveStatus::MaxIters => "max_iters",
        DriveStatus::Diverged => "diverged",
    };
    println!(
        "{}: {status} after {} iterations, |g|_V' = {g:.3e}, {} Oseen / {} Riesz solves, {:.0} ms",
        log.config.label(),
        log.totals.iterations,
        log.totals.linear_solves,
        log.totals.riesz_solves,
        log.totals.wall_ms
    );
    if let Some(e) = &log.error {
        println!("  error: {e}");
    }
}

fn plot_logs(logs: &[&RunLog], path: &Path, theta: bool) -> Result<()> {
    let series: Vec<PlotSeries> = logs.iter().map(|l| PlotSeries::from(*l)).collect();
    emit_plot(&series, path, theta).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Legend label for a CSV: the config stored next to it, else the file stem.
fn csv_label(path: &Path, key: &str) -> String {
    let stem = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    if key.is_empty() {
        let json = path.with_extension("json");
        let config = std::fs::read_to_string(&json)
            .ok()
            .and_then(|s| serde_json::from_str::<serde_json::Value>(&s).ok())
            .and_then(|v| serde_json::from_value::<RunConfig>(v.get("config")?.clone()).ok());
        config.map_or(stem, |c| c.label())
    } else {
        format!("{stem} {key}")
    }
}

fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run { common, dump_fields } => {
            let log = ngmres_flow::run(&common.config())?;
            summarize(&log);
            for p in write_run(&log, &common.out, "run", dump_fields)? {
                println!("wrote {}", p.display());
            }
            if common.plot {
                plot_logs(&[&log], &common.out.join("run.svg"), true)?;
            }
            Ok(status_code(&[&log]))
        }
        Command::SweepMesh { common, sizes } => {
            let logs = ngmres_flow::sweep_mesh(&common.config(), &sizes, threads()?)?;
            if logs.is_empty() {
                println!("no grid sizes given, nothing to do");
                return Ok(0);
            }
            logs.iter().for_each(summarize);
            let mut buf = Vec::new();
            write_sweep_csv(&logs, &mut buf)?;
            let path = common.out.join("sweep.csv");
            write_atomic(&path, &buf)?;
            println!("wrote {}", path.display());
            let path = common.out.join("sweep.json");
            write_atomic(&path, serde_json::to_string_pretty(&logs)?.as_bytes())?;
            println!("wrote {}", path.display());
            let refs: Vec<&RunLog> = logs.iter().collect();
            if common.plot {
                plot_logs(&refs, &common.out.join("sweep.svg"), false)?;
            }
            Ok(status_code(&refs))
        }
        Command::CompareNorms { common } => {
            let (vp, l2) = ngmres_flow::compare_norms(&common.config(), threads()?)?;
            summarize(&vp);
            summarize(&l2);
            let refs = [&vp, &l2];
            let mut buf = Vec::new();
            write_compare_csv(&refs, &mut buf)?;
            let path = common.out.join("compare.csv");
            write_atomic(&path, &buf)?;
            println!("wrote {}", path.display());
            let path = common.out.join("compare.json");
            write_atomic(&path, serde_json::to_string_pretty(&refs)?.as_bytes())?;
            println!("wrote {}", path.display());
            if common.plot {
                plot_logs(&refs, &common.out.join("compare.svg"), false)?;
            }
            Ok(status_code(&refs))
        }
        Command::Plot { csv, out, theta } => {
            let mut series = Vec::new();
            for path in &csv {
                let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
                let groups = read_records_csv(file).with_context(|| format!("reading {}", path.display()))?;
                for (key, records) in groups {
                    series.push(PlotSeries {
                        label: csv_label(path, &key),
                        records,
                    });
                }
            }
            emit_plot(&series, &out, theta).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {}", out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = matches!(
                e.downcast_ref::<ExperimentError>(),
                Some(ExperimentError::InvalidConfig { .. })
            );
            ExitCode::from(if config { EXIT_CONFIG } else { 1 })
        }
    }
}
