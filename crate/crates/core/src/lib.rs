//! Random structured matrices and their spectral norms.
//!
//! The crate builds random Toeplitz-type ensembles (symmetric and
//! nonsymmetric Toeplitz, Hankel, symmetric circulant, palindromic Toeplitz)
//! from reproducible entry sequences, computes their spectral norms either
//! densely or with FFT-backed Krylov iterations, and evaluates the random
//! trigonometric processes that bracket the norm of a symmetric Toeplitz
//! matrix:
//!
//! ```text
//!   sup_x |X_0 + 2 Σ (1 - j/n) X_j cos(2πjx)|  <=  ‖T_n‖  <=  sup_x |X_0 + 2 Σ X_j cos(2πjx)|
//! ```
//!
//! The [`bounds`] module holds closed-form calculators for the covering,
//! entropy-integral, Hoeffding and concentration inequalities that drive the
//! `√(n log n)` growth law, and [`experiments`] runs reproducible Monte Carlo
//! sweeps over all of it.

pub mod bounds;
pub mod ensembles;
pub mod entries;
mod error;
pub mod experiments;
pub mod linalg;
mod par;
pub mod trigpoly;

pub use ensembles::{EnsembleKind, StructuredMatrix};
pub use entries::{DistributionKind, DistributionSpec, EntrySequence};
pub use error::{Error, Result};
pub use linalg::{NormMethod, SpectralEstimate};
pub use par::Execution;
pub use trigpoly::{SupEstimate, TrigProcessKind};

/// `√(n ln n)`, the normalisation used for every growth ratio. `None` for `n <= 1`.
pub fn sqrt_n_log_n(n: usize) -> Option<f64> {
    if n <= 1 {
        return None;
    }
    let n = n as f64;
    Some((n * n.ln()).sqrt())
}
