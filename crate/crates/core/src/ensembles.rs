//! Structured random matrix ensembles stored in coefficient form.
//!
//! | kind                   | entry `(j, k)`, 1-based | `coeffs[i]`          |
//! |------------------------|--------------------------|----------------------|
//! | `sym_toeplitz`         | `X_{|j-k|}`              | `X_i`, `i < n`       |
//! | `sym_circulant`        | `X_{|j-k|}`, `X_{n-i} = X_i` | `X_i`, `i < n`   |
//! | `palindromic_toeplitz` | `X_{|j-k|}`, `X_{n-1-i} = X_i` | `X_i`, `i < n` |
//! | `nonsym_toeplitz`      | `X_{k-j}`                | `X_{i-(n-1)}`        |
//! | `hankel`               | `X_{j+k-1}`              | `X_{i+1}`            |
//!
//! Constrained kinds keep their leading coefficients and overwrite the
//! dependent half, so dependent entries repeat a free variable rather than
//! carrying fresh randomness.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::entries::EntrySequence;
use crate::error::{Error, Result};

/// Largest dimension [`StructuredMatrix::densify`] accepts by default.
pub const DEFAULT_DENSE_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    SymToeplitz,
    NonsymToeplitz,
    Hankel,
    SymCirculant,
    PalindromicToeplitz,
}

impl EnsembleKind {
    pub const ALL: [EnsembleKind; 5] = [
        EnsembleKind::SymToeplitz,
        EnsembleKind::NonsymToeplitz,
        EnsembleKind::Hankel,
        EnsembleKind::SymCirculant,
        EnsembleKind::PalindromicToeplitz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::SymToeplitz => "sym_toeplitz",
            EnsembleKind::NonsymToeplitz => "nonsym_toeplitz",
            EnsembleKind::Hankel => "hankel",
            EnsembleKind::SymCirculant => "sym_circulant",
            EnsembleKind::PalindromicToeplitz => "palindromic_toeplitz",
        }
    }

    pub fn is_symmetric(self) -> bool {
        // Hankel matrices are symmetric too, but they are handled through
        // singular values like the nonsymmetric Toeplitz family.
        matches!(
            self,
            EnsembleKind::SymToeplitz | EnsembleKind::SymCirculant | EnsembleKind::PalindromicToeplitz
        )
    }

    /// Number of coefficients a matrix of dimension `n` stores.
    pub fn coeff_len(self, n: usize) -> usize {
        if self.is_symmetric() {
            n
        } else {
            2 * n - 1
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnsembleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown ensemble `{s}`")))
    }
}

impl std::fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct StructuredMatrix {
    kind: EnsembleKind,
    n: usize,
    coeffs: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMatrix {
    kind: EnsembleKind,
    n: usize,
    coeffs: Vec<f64>,
}

impl TryFrom<RawMatrix> for StructuredMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        StructuredMatrix::from_coeffs(raw.kind, raw.n, raw.coeffs)
    }
}

fn fold(kind: EnsembleKind, coeffs: &mut [f64]) {
    let n = coeffs.len();
    match kind {
        EnsembleKind::SymCirculant => {
            for j in n / 2 + 1..n {
                coeffs[j] = coeffs[n - j];
            }
        }
        EnsembleKind::PalindromicToeplitz => {
            for j in n.div_ceil(2)..n {
                coeffs[j] = coeffs[n - 1 - j];
            }
        }
        _ => {}
    }
}

/// Builds the `n × n` matrix of `kind` from the leading values of `entries`.
pub fn build_matrix(kind: EnsembleKind, entries: &EntrySequence, n: usize) -> Result<StructuredMatrix> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let needed = kind.coeff_len(n);
    if entries.len() < needed {
        return Err(Error::InsufficientEntries {
            kind: kind.name(),
            n,
            needed,
            got: entries.len(),
        });
    }
    let mut coeffs = entries.values[..needed].to_vec();
    fold(kind, &mut coeffs);
    Ok(StructuredMatrix { kind, n, coeffs })
}

impl StructuredMatrix {
    /// Wraps an explicit coefficient vector, checking length, finiteness and
    /// the folding constraint of constrained kinds.
    pub fn from_coeffs(kind: EnsembleKind, n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let expected = kind.coeff_len(n);
        if coeffs.len() != expected {
            return Err(Error::CoeffLength {
                kind: kind.name(),
                n,
                expected,
                got: coeffs.len(),
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let mut folded = coeffs.clone();
        fold(kind, &mut folded);
        if let Some(index) = (0..n).find(|&i| folded[i] != coeffs[i]) {
            return Err(Error::ConstraintViolated {
                kind: kind.name(),
                index,
            });
        }
        Ok(StructuredMatrix { kind, n, coeffs })
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Same structure with every coefficient mapped through `f`.
    pub fn map_coeffs(&self, f: impl Fn(f64) -> f64) -> StructuredMatrix {
        StructuredMatrix {
            kind: self.kind,
            n: self.n,
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
        }
    }

    /// Entry `(j, k)` with 1-based indices.
    pub fn entry_at(&self, j: usize, k: usize) -> Result<f64> {
        let n = self.n;
        if j == 0 || k == 0 || j > n || k > n {
            return Err(Error::IndexOutOfRange { j, k, n });
        }
        Ok(self.entry0(j - 1, k - 1))
    }

    /// Entry with 0-based indices; callers guarantee range.
    pub(crate) fn entry0(&self, j: usize, k: usize) -> f64 {
        match self.kind {
            EnsembleKind::SymToeplitz | EnsembleKind::SymCirculant | EnsembleKind::PalindromicToeplitz => {
                self.coeffs[j.abs_diff(k)]
            }
            EnsembleKind::NonsymToeplitz => self.coeffs[self.n - 1 + k - j],
            EnsembleKind::Hankel => self.coeffs[j + k],
        }
    }

    /// Dense copy, refused above [`DEFAULT_DENSE_CAP`].
    pub fn densify(&self) -> Result<DMatrix<f64>> {
        self.densify_capped(DEFAULT_DENSE_CAP)
    }

    pub fn densify_capped(&self, cap: usize) -> Result<DMatrix<f64>> {
        if self.n > cap {
            return Err(Error::DenseCapExceeded { n: self.n, cap });
        }
        Ok(DMatrix::from_fn(self.n, self.n, |j, k| self.entry0(j, k)))
    }

    /// First column and first row of the Toeplitz form. Hankel matrices are
    /// represented through their row reversal.
    pub(crate) fn toeplitz_col_row(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        match self.kind {
            EnsembleKind::NonsymToeplitz | EnsembleKind::Hankel => {
                // X_{k-j}: column holds X_0, X_{-1}, ..., row holds X_0, X_1, ...
                let col = (0..n).map(|i| self.coeffs[n - 1 - i]).collect();
                let row = (0..n).map(|i| self.coeffs[n - 1 + i]).collect();
                (col, row)
            }
            _ => (self.coeffs.clone(), self.coeffs.clone()),
        }
    }
}

/// Reverses the row order of a Hankel matrix, giving a nonsymmetric Toeplitz
/// matrix with the same singular values.
///
/// Row `j` of the result is row `n + 1 - j` of `H`, so its `(j, k)` entry is
/// `X_{n + k - j}`; in the Toeplitz layout that is the coefficient stored at
/// the same position, so the coefficient vector carries over unchanged.
pub fn hankel_to_toeplitz(h: &StructuredMatrix) -> Result<StructuredMatrix> {
    if h.kind != EnsembleKind::Hankel {
        return Err(Error::WrongKind {
            expected: "hankel",
            got: h.kind.name(),
        });
    }
    Ok(StructuredMatrix {
        kind: EnsembleKind::NonsymToeplitz,
        n: h.n,
        coeffs: h.coeffs.clone(),
    })
}
