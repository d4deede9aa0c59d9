//! Spectral norms of structured matrices.
//!
//! Small matrices go through a dense eigensolver or SVD; large ones through
//! Krylov iterations driven by the FFT matvec in [`fft`]. Symmetric
//! circulants additionally have their exact spectrum available as a DFT.

mod fft;
mod krylov;
mod tridiag;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

pub use fft::{structured_matvec, structured_matvec_transpose, ToeplitzOperator};

use crate::ensembles::{EnsembleKind, StructuredMatrix, DEFAULT_DENSE_CAP};
use crate::entries::unit_probe;
use crate::error::{positive, Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Dense,
    Lanczos,
    GolubKahan,
    DftExact,
}

impl EstimateMethod {
    pub fn name(self) -> &'static str {
        match self {
            EstimateMethod::Dense => "dense",
            EstimateMethod::Lanczos => "lanczos",
            EstimateMethod::GolubKahan => "golub_kahan",
            EstimateMethod::DftExact => "dft_exact",
        }
    }
}

impl std::str::FromStr for EstimateMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            EstimateMethod::Dense,
            EstimateMethod::Lanczos,
            EstimateMethod::GolubKahan,
            EstimateMethod::DftExact,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| Error::Config(format!("unknown estimate method `{s}`")))
    }
}

/// Operator-norm estimate with its certificate.
///
/// For Krylov methods `value` is the largest Ritz value in magnitude, which
/// never exceeds the true norm, and `residual` is the explicit residual
/// `‖Mx - θx‖` of the certifying Ritz pair (for Golub–Kahan, of the augmented
/// operator `[[0, Mᵀ], [M, 0]]`), so some eigenvalue lies within `residual` of
/// the reported end of the Ritz spectrum. Dense and DFT results carry
/// residual 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub value: f64,
    pub method: EstimateMethod,
    pub residual: f64,
    pub iterations: usize,
    pub matvecs: usize,
}

/// Which route a caller wants for the norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    Dense,
    Iterative,
    /// Dense up to the dense cap, iterative above.
    #[default]
    Auto,
}

impl std::str::FromStr for NormMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(NormMethod::Dense),
            "iterative" => Ok(NormMethod::Iterative),
            "auto" => Ok(NormMethod::Auto),
            _ => Err(Error::Config(format!("unknown norm method `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterativeOptions {
    pub tol: f64,
    /// Defaults to `4n`.
    pub max_iter: Option<usize>,
    pub probe_seed: u64,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        IterativeOptions {
            tol: DEFAULT_TOL,
            max_iter: None,
            probe_seed: 0x5EED,
        }
    }
}

/// Dense reference: max |eigenvalue| for symmetric kinds, largest singular
/// value otherwise.
pub fn dense_spectral_norm(m: &StructuredMatrix) -> Result<SpectralEstimate> {
    dense_spectral_norm_capped(m, DEFAULT_DENSE_CAP)
}

pub fn dense_spectral_norm_capped(m: &StructuredMatrix, cap: usize) -> Result<SpectralEstimate> {
    let d = m.densify_capped(cap)?;
    let value = if m.kind().is_symmetric() {
        d.symmetric_eigenvalues().iter().fold(0.0f64, |acc, l| acc.max(l.abs()))
    } else {
        d.singular_values().iter().fold(0.0f64, |acc, s| acc.max(*s))
    };
    Ok(SpectralEstimate {
        value,
        method: EstimateMethod::Dense,
        residual: 0.0,
        iterations: 0,
        matvecs: 0,
    })
}

/// Krylov estimate: Lanczos for symmetric kinds, Golub–Kahan otherwise.
///
/// Non-convergence within `max_iter` is reported as
/// [`Error::NotConverged`] carrying the best estimate found.
pub fn iterative_spectral_norm(m: &StructuredMatrix, opts: &IterativeOptions) -> Result<SpectralEstimate> {
    positive("tol", opts.tol)?;
    let n = m.n();
    let max_iter = opts.max_iter.unwrap_or(4 * n);
    if max_iter == 0 {
        return Err(Error::InvalidParameter {
            name: "max_iter",
            requirement: "at least 1",
            value: 0.0,
        });
    }
    let op = ToeplitzOperator::new(m);
    let probe = unit_probe(n, opts.probe_seed);
    let outcome = if m.kind().is_symmetric() {
        krylov::lanczos(&op, probe, opts.tol, max_iter)
    } else {
        krylov::golub_kahan(&op, probe, opts.tol, max_iter)
    };
    if outcome.converged {
        Ok(outcome.estimate)
    } else {
        Err(Error::NotConverged(outcome.estimate))
    }
}

/// Dispatches on [`NormMethod`]; `Auto` uses the dense path up to `dense_cap`.
pub fn spectral_norm(
    m: &StructuredMatrix,
    method: NormMethod,
    opts: &IterativeOptions,
    dense_cap: usize,
) -> Result<SpectralEstimate> {
    match method {
        NormMethod::Dense => dense_spectral_norm_capped(m, dense_cap),
        NormMethod::Iterative => iterative_spectral_norm(m, opts),
        NormMethod::Auto if m.n() <= dense_cap => dense_spectral_norm_capped(m, dense_cap),
        NormMethod::Auto => iterative_spectral_norm(m, opts),
    }
}

/// Eigenvalues of a symmetric circulant, `λ_k = Σ_j c_j e^{-2πijk/n}`, in DFT order.
pub fn circulant_eigenvalues(m: &StructuredMatrix) -> Result<Vec<f64>> {
    if m.kind() != EnsembleKind::SymCirculant {
        return Err(Error::WrongKind {
            expected: "sym_circulant",
            got: m.kind().name(),
        });
    }
    let mut buf: Vec<Complex<f64>> = m.coeffs().iter().map(|&c| Complex::new(c, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    Ok(buf.into_iter().map(|z| z.re).collect())
}

/// Exact norm of a symmetric circulant from its DFT spectrum.
pub fn circulant_spectral_norm(m: &StructuredMatrix) -> Result<SpectralEstimate> {
    let value = circulant_eigenvalues(m)?.iter().fold(0.0f64, |acc, l| acc.max(l.abs()));
    Ok(SpectralEstimate {
        value,
        method: EstimateMethod::DftExact,
        residual: 0.0,
        iterations: 0,
        matvecs: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::build_matrix;
    use crate::entries::{sample_entries, DistributionSpec, EntrySequence};

    fn sym(values: &[f64]) -> StructuredMatrix {
        build_matrix(
            EnsembleKind::SymToeplitz,
            &EntrySequence::from_values(values.to_vec()).unwrap(),
            values.len(),
        )
        .unwrap()
    }

    fn random(kind: EnsembleKind, n: usize, seed: u64) -> StructuredMatrix {
        let e = sample_entries(&[DistributionSpec::rademacher()], 2 * n, seed).unwrap();
        build_matrix(kind, &e, n).unwrap()
    }

    #[test]
    fn dense_examples() {
        assert!((dense_spectral_norm(&sym(&[1.0, 1.0, 1.0])).unwrap().value - 3.0).abs() < 1e-12);
        assert!((dense_spectral_norm(&sym(&[0.0, 1.0, 0.0])).unwrap().value - 2f64.sqrt()).abs() < 1e-12);
        let c = StructuredMatrix::from_coeffs(EnsembleKind::SymCirculant, 3, vec![0.0, 1.0, 1.0]).unwrap();
        let est = dense_spectral_norm(&c).unwrap();
        assert!((est.value - 2.0).abs() < 1e-12);
        assert_eq!(est.residual, 0.0);
        assert_eq!(est.method, EstimateMethod::Dense);
    }

    #[test]
    fn dense_cap() {
        let m = StructuredMatrix::from_coeffs(EnsembleKind::SymToeplitz, 10, vec![1.0; 10]).unwrap();
        assert!(matches!(
            dense_spectral_norm_capped(&m, 5),
            Err(Error::DenseCapExceeded { n: 10, cap: 5 })
        ));
    }

    #[test]
    fn iterative_all_ones() {
        let opts = IterativeOptions {
            tol: 1e-10,
            ..Default::default()
        };
        let est = iterative_spectral_norm(&sym(&[1.0, 1.0, 1.0]), &opts).unwrap();
        assert!((est.value - 3.0).abs() < 1e-10);
        assert_eq!(est.method, EstimateMethod::Lanczos);
    }

    #[test]
    fn iterative_zero_and_tiny() {
        for kind in EnsembleKind::ALL {
            let z = StructuredMatrix::from_coeffs(kind, 6, vec![0.0; kind.coeff_len(6)]).unwrap();
            let est = iterative_spectral_norm(&z, &IterativeOptions::default()).unwrap();
            assert_eq!(est.value, 0.0);
        }
        let one = StructuredMatrix::from_coeffs(EnsembleKind::SymToeplitz, 1, vec![-2.5]).unwrap();
        assert!((iterative_spectral_norm(&one, &IterativeOptions::default()).unwrap().value - 2.5).abs() < 1e-15);
        let h1 = StructuredMatrix::from_coeffs(EnsembleKind::Hankel, 1, vec![-2.5]).unwrap();
        assert!((iterative_spectral_norm(&h1, &IterativeOptions::default()).unwrap().value - 2.5).abs() < 1e-15);
    }

    #[test]
    fn iterative_rejects_bad_tol() {
        assert!(iterative_spectral_norm(&sym(&[1.0, 2.0]), &IterativeOptions { tol: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn iterative_matches_dense_each_kind() {
        for kind in EnsembleKind::ALL {
            for seed in 0..10 {
                let m = random(kind, 128, seed);
                let dense = dense_spectral_norm(&m).unwrap().value;
                let est = iterative_spectral_norm(&m, &IterativeOptions::default()).unwrap();
                let rel = (est.value - dense).abs() / dense;
                assert!(rel <= 1e-8, "{kind} seed {seed}: rel {rel}");
                assert!(est.value <= dense * (1.0 + 1e-12), "{kind}: Ritz value above the norm");
                assert!(est.residual <= 1e-8 * est.value);
            }
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let m = random(EnsembleKind::SymToeplitz, 256, 3);
        let opts = IterativeOptions {
            tol: 1e-12,
            max_iter: Some(3),
            ..Default::default()
        };
        match iterative_spectral_norm(&m, &opts) {
            Err(Error::NotConverged(est)) => {
                assert_eq!(est.iterations, 3);
                assert!(est.residual > 1e-12 * est.value);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn circulant_examples() {
        let c = StructuredMatrix::from_coeffs(EnsembleKind::SymCirculant, 3, vec![0.0, 1.0, 1.0]).unwrap();
        let mut eig = circulant_eigenvalues(&c).unwrap();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in eig.iter().zip([2.0, -1.0, -1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let mut coeffs = vec![0.0; 5];
        coeffs[0] = 4.5;
        let s = StructuredMatrix::from_coeffs(EnsembleKind::SymCirculant, 5, coeffs).unwrap();
        assert!(circulant_eigenvalues(&s).unwrap().iter().all(|&l| (l - 4.5).abs() < 1e-14));
        assert!(circulant_eigenvalues(&sym(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn circulant_spectrum_matches_dense() {
        let m = random(EnsembleKind::SymCirculant, 64, 8);
        let mut eig = circulant_eigenvalues(&m).unwrap();
        let mut dense: Vec<f64> = m.densify().unwrap().symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        dense.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in eig.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
