//! Experiment harness: validated run configurations, single runs, mesh
//! sweeps, norm comparisons, and their CSV/JSON/SVG outputs.

mod output;
mod plot;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::accel::{drive, Depth, DepthSchedule, DriveStatus, DriverConfig, IterationRecord, Mode, NormChoice};
use crate::flow::FlowProblem;
use crate::grid::{PressureField, VelocityField};

pub use output::{
    read_records_csv, records_csv, write_atomic, write_compare_csv, write_records_csv, write_run, write_sweep_csv,
    CSV_HEADER,
};
pub use plot::{emit_plot, render_svg, PlotSeries};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("nothing to plot")]
    EmptyPlot,
    #[error("{0}")]
    Parse(String),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ExperimentError {
    ExperimentError::InvalidConfig {
        field,
        reason: reason.into(),
    }
}

/// One experiment. `ν = 1/re`, unit lid speed, zero interior initial guess.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub re: f64,
    pub nx: usize,
    pub m: DepthSchedule,
    pub norm: NormChoice,
    pub tol: f64,
    pub max_iters: usize,
    pub mode: Mode,
    /// Write per-iteration wall times to CSV. Off by default so repeated
    /// runs produce identical files.
    #[serde(default)]
    pub timing: bool,
    /// Solve the unconstrained form alongside and record the iterate gap.
    #[serde(default)]
    pub check_beta_equivalence: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            re: 1000.0,
            nx: 64,
            m: DepthSchedule::Fixed(Depth::Finite(5)),
            norm: NormChoice::VPrime,
            tol: 1e-8,
            max_iters: 100,
            mode: Mode::Ngmres,
            timing: false,
            check_beta_equivalence: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(self.re > 0.0 && self.re.is_finite()) {
            return Err(invalid("re", format!("must be positive, got {}", self.re)));
        }
        if self.nx < 8 {
            return Err(invalid("nx", format!("must be at least 8, got {}", self.nx)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn driver_config(&self) -> DriverConfig {
        DriverConfig {
            mode: self.mode,
            depth: self.m,
            norm: self.norm,
            tol: self.tol,
            max_iters: self.max_iters,
            force_picard_coefficients: false,
            check_beta_equivalence: self.check_beta_equivalence,
        }
    }

    /// Short legend label.
    pub fn label(&self) -> String {
        match self.mode {
            Mode::Picard => format!("picard nx={} Re={}", self.nx, self.re),
            Mode::Ngmres => format!("ngmres m={} {} nx={} Re={}", self.m, self.norm, self.nx, self.re),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    /// Nonlinear steps taken (index of the final record).
    pub iterations: usize,
    pub wall_ms: f64,
    pub linear_solves: usize,
    pub riesz_solves: usize,
}

/// Outcome of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunLog {
    pub config: RunConfig,
    #[serde(skip)]
    pub records: Vec<IterationRecord>,
    pub status: DriveStatus,
    pub totals: Totals,
    /// Solver failure message; the status is then `diverged`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub solution: Option<(VelocityField, PressureField)>,
}

impl RunLog {
    pub fn final_record(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn converged(&self) -> bool {
        self.status == DriveStatus::Converged
    }
}

/// Run one experiment. Only configuration problems are errors; solver
/// failures end up in the log.
pub fn run(cfg: &RunConfig) -> Result<RunLog, ExperimentError> {
    cfg.validate()?;
    let prob = FlowProblem::cavity(cfg.nx, cfg.re).map_err(|e| invalid("nx", e.to_string()))?;
    let t0 = Instant::now();
    let outcome = drive(&prob, &cfg.driver_config());
    let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    let (records, status, error, solution) = match outcome {
        Ok(out) => {
            let p = out.pressure.unwrap_or_else(|| PressureField::zeros(prob.grid()));
            (out.records, out.status, None, Some((out.solution, p)))
        }
        Err(e) => {
            warn!("{}: {e}", cfg.label());
            (Vec::new(), DriveStatus::Diverged, Some(e.to_string()), None)
        }
    };
    let totals = Totals {
        iterations: records.last().map_or(0, |r| r.k),
        wall_ms,
        linear_solves: prob.linear_solves(),
        riesz_solves: prob.riesz_solves(),
    };
    info!("{}: {:?} after {} iterations", cfg.label(), status, totals.iterations);
    Ok(RunLog {
        config: cfg.clone(),
        records,
        status,
        totals,
        error,
        solution,
    })
}

/// Run validated configs on up to `threads` worker threads, preserving order.
fn run_all(configs: &[RunConfig], threads: usize) -> Vec<RunLog> {
    let threads = threads.clamp(1, configs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<RunLog>>> = Mutex::new(vec![None; configs.len()]);
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cfg) = configs.get(i) else { break };
                let log = run(cfg).expect("configs validated before dispatch");
                slots.lock().expect("no panics while holding the lock")[i] = Some(log);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|l| l.expect("every slot filled"))
        .collect()
}

/// One run per grid size, everything else fixed.
pub fn sweep_mesh(cfg: &RunConfig, sizes: &[usize], threads: usize) -> Result<Vec<RunLog>, ExperimentError> {
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("sizes", "must be nondecreasing"));
    }
    let configs: Vec<RunConfig> = sizes.iter().map(|&nx| RunConfig { nx, ..cfg.clone() }).collect();
    for c in &configs {
        c.validate()?;
    }
    Ok(run_all(&configs, threads))
}

/// Paired runs differing only in the optimization norm: (V', ℓ²).
pub fn compare_norms(cfg: &RunConfig, threads: usize) -> Result<(RunLog, RunLog), ExperimentError> {
    let configs = [
        RunConfig {
            norm: NormChoice::VPrime,
            ..cfg.clone()
        },
        RunConfig {
            norm: NormChoice::L2,
            ..cfg.clone()
        },
    ];
    cfg.validate()?;
    let mut logs = run_all(&configs, threads).into_iter();
    Ok((logs.next().expect("two runs"), logs.next().expect("two runs")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_names_the_field() {
        let bad = RunConfig {
            nx: 4,
            ..Default::default()
        };
        let err = bad.validate().unwrap_err().to_string();
        assert!(err.contains("nx"), "{err}");
        let bad = RunConfig {
            re: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().unwrap_err().to_string().contains("re"));
        let bad = RunConfig {
            tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().unwrap_err().to_string().contains("tol"));
    }

    #[test]
    fn empty_sweep_is_empty() {
        assert!(sweep_mesh(&RunConfig::default(), &[], 1).unwrap().is_empty());
        assert!(sweep_mesh(&RunConfig::default(), &[64, 32], 1).is_err());
    }
}
