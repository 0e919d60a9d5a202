//! Nonlinear GMRES acceleration of the Picard iteration.
//!
//! Each step solves one Oseen problem from the current iterate to obtain a
//! candidate `ũ = q(u_k)`, then picks the affine combination of the candidate
//! and the last `m_k + 1` iterates whose linearized residual is smallest in
//! the configured norm.

mod driver;
mod ls;
mod window;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::flow::FlowError;

pub use driver::{drive, DriveOutput, DriveStatus, DriverConfig, IterationRecord};
pub use ls::{
    beta_to_alpha, beta_update, gram_matrix, ngmres_update, solve_constrained_ls, solve_unconstrained_ls,
    LsSolution, KKT_COND_LIMIT,
};
pub use window::{HistoryEntry, HistoryWindow};

/// Dense symmetric matrix of residual inner products.
pub type GramMatrix = nalgebra::DMatrix<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AccelError {
    #[error("window entry {0} has no Riesz representer")]
    MissingRepresenter(usize),
    #[error("expected {expected} coefficients, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("window has no candidate iterate")]
    NoCandidate,
    #[error("invalid driver configuration: {0}")]
    InvalidConfig(String),
    #[error("iteration {iteration}: {source}")]
    Solver {
        iteration: usize,
        #[source]
        source: FlowError,
    },
}

/// Inner product used by the least-squares problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormChoice {
    /// Dual norm, realized through Riesz representers.
    VPrime,
    /// Plain `h²`-weighted Euclidean norm of the momentum defect.
    L2,
}

impl fmt::Display for NormChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormChoice::VPrime => "vprime",
            NormChoice::L2 => "l2",
        })
    }
}

impl FromStr for NormChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "vprime" | "v'" => Ok(NormChoice::VPrime),
            "l2" => Ok(NormChoice::L2),
            _ => Err(format!("unknown norm '{s}', expected vprime or l2")),
        }
    }
}

/// Iteration mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Picard,
    Ngmres,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Picard => "picard",
            Mode::Ngmres => "ngmres",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "picard" => Ok(Mode::Picard),
            "ngmres" => Ok(Mode::Ngmres),
            _ => Err(format!("unknown mode '{s}', expected picard or ngmres")),
        }
    }
}

/// History depth `m`; `Full` keeps every previous iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Depth {
    Finite(usize),
    Full,
}

impl Depth {
    /// Number of stored iterates this depth allows (`m + 1`).
    pub fn capacity(self) -> usize {
        match self {
            Depth::Finite(m) => m + 1,
            Depth::Full => usize::MAX,
        }
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Finite(m) => write!(f, "{m}"),
            Depth::Full => f.write_str("inf"),
        }
    }
}

impl FromStr for Depth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" | "full" | "∞" => Ok(Depth::Full),
            _ => s
                .parse()
                .map(Depth::Finite)
                .map_err(|_| format!("invalid depth '{s}', expected a count or 'inf'")),
        }
    }
}

impl From<Depth> for String {
    fn from(d: Depth) -> String {
        d.to_string()
    }
}

impl TryFrom<String> for Depth {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Fixed depth, or a single switch from `early` to `late` once
/// `‖g(u_k)‖_{V'}` first drops below `switch_tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DepthSchedule {
    Fixed(Depth),
    Switch { early: Depth, switch_tol: f64, late: Depth },
}

impl DepthSchedule {
    pub(crate) fn depth(&self, switched: bool) -> Depth {
        match *self {
            DepthSchedule::Fixed(d) => d,
            DepthSchedule::Switch { early, late, .. } => {
                if switched {
                    late
                } else {
                    early
                }
            }
        }
    }
}

impl From<Depth> for DepthSchedule {
    fn from(d: Depth) -> Self {
        DepthSchedule::Fixed(d)
    }
}

impl fmt::Display for DepthSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepthSchedule::Fixed(d) => write!(f, "{d}"),
            DepthSchedule::Switch { early, switch_tol, late } => write!(f, "{early}:{switch_tol:e}:{late}"),
        }
    }
}

impl FromStr for DepthSchedule {
    type Err = String;

    /// `5`, `inf`, or `early:switch_tol:late` such as `0:1e-3:10`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [d] => Ok(DepthSchedule::Fixed(d.parse()?)),
            [a, t, b] => {
                let switch_tol: f64 = t.parse().map_err(|_| format!("invalid switch tolerance '{t}'"))?;
                if !(switch_tol > 0.0 && switch_tol.is_finite()) {
                    return Err(format!("switch tolerance must be positive, got {t}"));
                }
                Ok(DepthSchedule::Switch {
                    early: a.parse()?,
                    switch_tol,
                    late: b.parse()?,
                })
            }
            _ => Err(format!("invalid depth schedule '{s}', expected m, inf or early:tol:late")),
        }
    }
}

impl From<DepthSchedule> for String {
    fn from(d: DepthSchedule) -> String {
        d.to_string()
    }
}

impl TryFrom<String> for DepthSchedule {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}
