//! NGMRES acceleration of the Picard iteration for the steady incompressible
//! Navier-Stokes equations on a MAC-discretized lid-driven cavity.

pub mod accel;
pub mod experiments;
pub mod flow;
pub mod grid;
pub mod sparse;

pub use accel::{
    drive, AccelError, Depth, DepthSchedule, DriveOutput, DriveStatus, DriverConfig, IterationRecord, Mode,
    NormChoice,
};
pub use experiments::{compare_norms, run, sweep_mesh, ExperimentError, RunConfig, RunLog};
pub use flow::{FlowError, FlowProblem, PicardStep, Residual};
pub use grid::{BoundaryData, MacGrid, PressureField, VelocityField};
pub use sparse::{LuFactors, SparseError, SparseMatrix};
