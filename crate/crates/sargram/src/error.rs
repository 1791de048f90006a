//! Error type shared by all modules of the crate.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error enum. Variants carry enough structure for callers to
/// react programmatically (pivot indices, cell indices, step counts).
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid grid geometry (non-positive spacing, too few cells).
    Grid(String),
    /// Lattice construction produced no nodes inside the disk.
    EmptyLattice { radius: f64, cell_side: f64 },
    /// Coefficient vector length does not match the lattice node count.
    CoefficientCount { expected: usize, got: usize },
    /// Rasterized permittivity is non-positive at a cell.
    NonPositivePermittivity { ix: usize, iy: usize, value: f64 },
    /// Scene definition problem (shape outside support, bad geometry).
    Scene(String),
    /// Beam parameter violation.
    Beam(String),
    /// Focal-length formulas need a negative initial quadratic phase.
    NoFiniteFocus { q0: f64 },
    /// Initial-condition support overlaps the heterogeneous region or the PML.
    InitialConditionSupport(String),
    /// Absorbing-layer configuration problem.
    Pml(String),
    /// Time step exceeds the stability bound.
    CflViolation { dt: f64, bound: f64 },
    /// Field became non-finite during time stepping.
    BlowUp { step: usize },
    /// Snapshot/field defined on a different grid than expected.
    GridMismatch(String),
    /// A required raw-data sample is missing.
    MissingSample { index: i64, kind: &'static str },
    /// Data series too short for the requested Gramian size.
    SeriesTooShort { needed: usize, got: usize },
    /// Cholesky pivot failure; the boost eta was insufficient.
    NonPositivePivot { index: usize, value: f64 },
    /// Triangular factor is singular (zero diagonal entry).
    SingularFactor { index: usize },
    /// Gauss-Newton normal equations could not be solved.
    NormalEquations { condition_estimate: f64 },
    /// Jacobian pass would exceed the configured memory budget.
    StorageExhausted { needed_mb: f64, budget_mb: f64 },
    /// Configuration file problem (unknown key, missing key, bad value).
    Config(String),
    /// Underlying I/O failure.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Grid(msg) => write!(f, "grid: {msg}"),
            Error::EmptyLattice { radius, cell_side } => write!(
                f,
                "empty lattice: no node within radius {radius} at cell side {cell_side}"
            ),
            Error::CoefficientCount { expected, got } => write!(
                f,
                "coefficient vector has {got} entries, lattice has {expected} nodes"
            ),
            Error::NonPositivePermittivity { ix, iy, value } => write!(
                f,
                "non-positive permittivity {value} at cell ({ix}, {iy})"
            ),
            Error::Scene(msg) => write!(f, "scene: {msg}"),
            Error::Beam(msg) => write!(f, "beam: {msg}"),
            Error::NoFiniteFocus { q0 } => {
                write!(f, "no finite focus: initial quadratic phase q0 = {q0} >= 0")
            }
            Error::InitialConditionSupport(msg) => {
                write!(f, "initial condition not homogeneous-supported: {msg}")
            }
            Error::Pml(msg) => write!(f, "pml: {msg}"),
            Error::CflViolation { dt, bound } => {
                write!(f, "CFL violation: dt = {dt} exceeds bound {bound}")
            }
            Error::BlowUp { step } => write!(f, "blow-up at step {step}"),
            Error::GridMismatch(msg) => write!(f, "grid mismatch: {msg}"),
            Error::MissingSample { index, kind } => {
                write!(f, "missing {kind} sample at index {index}")
            }
            Error::SeriesTooShort { needed, got } => {
                write!(f, "data series too short: need {needed} lags, have {got}")
            }
            Error::NonPositivePivot { index, value } => write!(
                f,
                "non-positive Cholesky pivot {value} at index {index} (increase the boost eta)"
            ),
            Error::SingularFactor { index } => {
                write!(f, "singular triangular factor at diagonal index {index}")
            }
            Error::NormalEquations { condition_estimate } => write!(
                f,
                "normal equation solve failed (condition estimate {condition_estimate:.3e})"
            ),
            Error::StorageExhausted { needed_mb, budget_mb } => write!(
                f,
                "snapshot storage needs {needed_mb:.0} MB but the budget is {budget_mb:.0} MB; \
                 reduce the snapshot count M, shrink the domain, or raise [inversion] memory_budget_mb"
            ),
            Error::Config(msg) => write!(f, "config: {msg}"),
            Error::Io(msg) => write!(f, "io: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
