//! Quantitative SAR inversion library.
//!
//! Two-step inversion for the dielectric permittivity of a 2D medium
//! probed by pulsed beams from a moving antenna: per slow time, the
//! measured data series is mapped to a structured snapshot Gramian and its
//! Cholesky square root; inversion then minimizes the Frobenius misfit of
//! the predicted factors against the data factors by Gauss-Newton with
//! multiplicative regularization. A conventional least-squares data-fit
//! objective over the same series is provided for comparison, along with
//! the full synthetic-data pipeline (Gaussian-beam source, FDTD solver
//! with an absorbing layer, correlated noise).

pub mod acquisition;
pub mod beam;
pub mod config;
pub mod error;
pub mod gramian;
pub mod grid;
pub mod inversion;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod scene;
pub mod sensitivity;
pub mod solver;
pub mod units;
pub mod validate;

pub use error::{Error, Result};
