//! Random cosine polynomials attached to a symmetric Toeplitz matrix.
//!
//! With coefficients `X_0, X_1, ...`:
//!
//! * `upper_Y`: `Y_x = X_0 + 2 Σ_{j=1}^{n-1} X_j cos(2πjx)`, the symbol of the
//!   Laurent operator containing `T_n`, so `‖T_n‖ ≤ sup |Y_x|`;
//! * `fejer_lower`: `X_0 + 2 Σ_{j=1}^{n-1} (1 - j/n) X_j cos(2πjx)`, which is
//!   `⟨T_n v_x, v_x⟩ / n` for `v_x = (e^{2πijx})_j`, so every value is a
//!   Rayleigh quotient and `sup ≤ ‖T_n‖`;
//! * `plain_Z`: `Z_x = Σ_{j=1}^{n} X_j cos(2πjx)`.
//!
//! Suprema are taken on the grid `x = i/M` and certified with Bernstein's
//! inequality `‖p'‖ ≤ 2πd ‖p‖` for degree-`d` trigonometric polynomials: any
//! point is within `1/(2M)` of the grid, so `sup |p| ≤ grid_max / (1 - πd/M)`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleKind, StructuredMatrix};
use crate::entries::EntrySequence;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrigProcessKind {
    #[serde(rename = "upper_Y")]
    UpperY,
    #[serde(rename = "fejer_lower")]
    FejerLower,
    #[serde(rename = "plain_Z")]
    PlainZ,
}

impl TrigProcessKind {
    pub fn name(self) -> &'static str {
        match self {
            TrigProcessKind::UpperY => "upper_Y",
            TrigProcessKind::FejerLower => "fejer_lower",
            TrigProcessKind::PlainZ => "plain_Z",
        }
    }

    /// Trigonometric degree of the process at dimension `n`.
    pub fn degree(self, n: usize) -> usize {
        match self {
            TrigProcessKind::UpperY | TrigProcessKind::FejerLower => n - 1,
            TrigProcessKind::PlainZ => n,
        }
    }

    /// Cosine coefficients `c_0..=c_d` given `X_j` through `x`.
    fn cosine_coeffs(self, n: usize, x: impl Fn(usize) -> Option<f64>) -> Option<Vec<f64>> {
        let d = self.degree(n);
        let nf = n as f64;
        (0..=d)
            .map(|j| match (self, j) {
                (TrigProcessKind::PlainZ, 0) => Some(0.0),
                (TrigProcessKind::PlainZ, _) => x(j),
                (_, 0) => x(0),
                (TrigProcessKind::UpperY, _) => x(j).map(|v| 2.0 * v),
                (TrigProcessKind::FejerLower, _) => x(j).map(|v| 2.0 * (1.0 - j as f64 / nf) * v),
            })
            .collect()
    }
}

impl std::str::FromStr for TrigProcessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper_Y" => Ok(TrigProcessKind::UpperY),
            "fejer_lower" => Ok(TrigProcessKind::FejerLower),
            "plain_Z" => Ok(TrigProcessKind::PlainZ),
            _ => Err(Error::Config(format!("unknown process `{s}`"))),
        }
    }
}

/// Grid supremum of `|p|` and its Bernstein certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    /// `max_i |p(i/M)|`, a lower bound on the supremum.
    pub grid_max: f64,
    pub argmax_x: f64,
    /// `grid_max / (1 - πd/M)`, an upper bound on the supremum.
    pub certified_upper: f64,
    pub grid_size: usize,
    pub degree: usize,
}

/// Default grid size `64 · max(n, 8)`.
pub fn default_grid_size(n: usize) -> usize {
    64 * n.max(8)
}

/// Values `Σ_j c_j cos(2πj i/M)` for `i = 0..M`, by one FFT of length `M`.
pub fn evaluate_cosine_grid(coeffs: &[f64], m: usize) -> Result<Vec<f64>> {
    let degree = coeffs.len().saturating_sub(1);
    if m < 2 * degree + 1 {
        return Err(Error::GridTooSmall {
            m,
            degree,
            requirement: "M ≥ 2d + 1",
        });
    }
    let mut buf = vec![Complex::new(0.0, 0.0); m];
    for (b, &c) in buf.iter_mut().zip(coeffs) {
        b.re = c;
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    Ok(buf.into_iter().map(|z| z.re).collect())
}

fn process_coeffs(entries: &EntrySequence, kind: TrigProcessKind, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    kind.cosine_coeffs(n, |j| entries.get(j as i64)).ok_or_else(|| {
        let first = if kind == TrigProcessKind::PlainZ { 1 } else { 0 };
        Error::InsufficientEntries {
            kind: kind.name(),
            n,
            needed: (kind.degree(n) + 1 - first),
            got: entries.len(),
        }
    })
}

/// Process values on `x = i/M`, `i = 0..M`.
pub fn evaluate_process_grid(entries: &EntrySequence, kind: TrigProcessKind, n: usize, m: usize) -> Result<Vec<f64>> {
    evaluate_cosine_grid(&process_coeffs(entries, kind, n)?, m)
}

/// Certified supremum of `|Σ_j c_j cos(2πjx)|` on `[0, 1]`.
pub fn certified_sup_of_coeffs(coeffs: &[f64], m: usize) -> Result<SupEstimate> {
    let degree = coeffs.len().saturating_sub(1);
    let ratio = PI * degree as f64 / m as f64;
    if ratio >= 1.0 {
        return Err(Error::GridTooSmall {
            m,
            degree,
            requirement: "M > πd",
        });
    }
    let values = evaluate_cosine_grid(coeffs, m)?;
    let (argmax, grid_max) = values
        .iter()
        .map(|v| v.abs())
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok(SupEstimate {
        grid_max,
        argmax_x: argmax as f64 / m as f64,
        certified_upper: grid_max / (1.0 - ratio),
        grid_size: m,
        degree,
    })
}

pub fn certified_sup(entries: &EntrySequence, kind: TrigProcessKind, n: usize, m: usize) -> Result<SupEstimate> {
    certified_sup_of_coeffs(&process_coeffs(entries, kind, n)?, m)
}

/// Certified supremum of a process built from the coefficients of a
/// symmetric Toeplitz-type matrix (`X_j = coeffs[j]`). For `plain_Z` only
/// `X_1..X_{n-1}` are available, so the process has degree `n - 1`.
pub fn matrix_process_sup(matrix: &StructuredMatrix, kind: TrigProcessKind, m: usize) -> Result<SupEstimate> {
    if !matrix.kind().is_symmetric() {
        return Err(Error::WrongKind {
            expected: "a symmetric Toeplitz kind",
            got: matrix.kind().name(),
        });
    }
    let c = matrix.coeffs();
    let n = matrix.n();
    let coeffs = match kind {
        TrigProcessKind::PlainZ => kind.cosine_coeffs(n - 1, |j| c.get(j).copied()),
        _ => kind.cosine_coeffs(n, |j| c.get(j).copied()),
    };
    match coeffs {
        Some(coeffs) => certified_sup_of_coeffs(&coeffs, m),
        // plain_Z at n = 1 has no terms.
        None => certified_sup_of_coeffs(&[0.0], m),
    }
}

/// `sup_x |⟨T v_x, v_x⟩| / n` on the grid, a lower bound on `‖T‖`.
pub fn rayleigh_lower_bound(matrix: &StructuredMatrix, m: usize) -> Result<f64> {
    if matrix.kind() != EnsembleKind::SymToeplitz {
        return Err(Error::WrongKind {
            expected: "sym_toeplitz",
            got: matrix.kind().name(),
        });
    }
    Ok(matrix_process_sup(matrix, TrigProcessKind::FejerLower, m)?.grid_max)
}

/// `d(x, y) = (Σ_{j=1}^{n-1} [cos 2πjx - cos 2πjy]²)^{1/2}`, the canonical
/// pseudometric of `Y_x` for unit-variance entries (up to the factor 2).
pub fn pseudometric_d(x: f64, y: f64, n: usize) -> f64 {
    (1..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64;
            ((t * x).cos() - (t * y).cos()).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}
