//! Reduction of the perturbed Schrödinger equation
//! `-h² f'' + (Q(x) + h Q₁(x,h)) f = 0` to its canonical form near a
//! turning point of order `M`, working throughout with truncated power
//! series in `h` whose coefficients are truncated Taylor series in the
//! Liouville variable `z`.
//!
//! The pipeline computes the change of independent variable `y(x,h)`,
//! the energy corrections `E_j(h)` and the scaling factor `ψ(x,h)` so
//! that `f = ψ·g(y)` turns the equation into
//! `-h² g'' + (h E₀(h) + ... + h E_{M-2}(h) y^{M-2} - y^M/4) g = 0`,
//! and verifies the claim residually.
//!
//! Two solvers are provided for the underlying mildly nonlinear
//! equation `F(T, E₀, ..., E_{M-2}) = 0`:
//! order-by-order recursion ([`newton::solve_recursive`]) and a Newton
//! method of tangents with a guaranteed-order schedule
//! ([`newton::newton_iterate`]). Gevrey-growth diagnostics quantify the
//! factorial divergence of the computed series.

pub mod dominant;
pub mod liouville;
pub mod newton;
pub mod normal_form;
pub mod norms;
pub mod pipeline;
pub mod series;

pub use dominant::{check_dominant_bounds, solve_dominant, DominantSolution};
pub use liouville::{compute_z_of_x, PotentialSpec, Transform};
pub use newton::{
    build_initial_guess, invert_dominant_block, newton_iterate, solve_recursive, NewtonConfig,
    NewtonTrace, SolverMode,
};
pub use normal_form::{
    eval_df, eval_f, residual_order, verify_canonical_form, CanonicalReport, StatePoint,
    TangentVector,
};
pub use norms::{fit_gevrey, GevreyFit, NormParams};
pub use series::{HSeries, SeriesError, ZSeries};

use thiserror::Error;

/// Crate-level error type; CLI exit codes are derived from the variant.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series error: {0}")]
    Series(#[from] SeriesError),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("residual failure: {0}")]
    ResidualFailure(String),
    #[error("newton iteration {iter} failed to reach guaranteed order {required}: achieved {achieved}")]
    NonConvergence {
        iter: usize,
        required: usize,
        achieved: usize,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 validation, 3 residual failure, 4 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Parse(_) | Error::Series(_) | Error::Io(_) => 2,
            Error::ResidualFailure(_) => 3,
            Error::NonConvergence { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
