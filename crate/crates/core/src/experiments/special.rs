//! Mean-shift law, concentration tail profiles and ensemble identities.

use serde::{Deserialize, Serialize};

use super::stats::RatioStats;
use super::{trial_matrix, trial_norm, trial_seed, ExperimentConfig, ProcessFlags};
use crate::bounds::{concentration_tail_bound, ConcentrationHypothesis};
use crate::ensembles::{build_matrix, hankel_to_toeplitz, EnsembleKind, DEFAULT_DENSE_CAP};
use crate::entries::{derive_seed, sample_entries, DistributionSpec};
use crate::error::{Error, Result};
use crate::linalg::{circulant_spectral_norm, dense_spectral_norm, iterative_spectral_norm, IterativeOptions, SpectralEstimate};
use crate::par::{map_collect, Execution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanShiftTrial {
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    pub norm: SpectralEstimate,
    /// Norm of `T_n - mJ_n`, the matrix of the centred entries.
    pub centered_norm: SpectralEstimate,
    pub converged: bool,
    /// `‖T_n‖ / n`.
    pub ratio_n: f64,
    /// `‖T_n - mJ_n‖ / (√n ln n)`; absent at `n = 1`.
    pub centered_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanShiftCell {
    pub n: usize,
    pub ratio_n: Option<RatioStats>,
    pub centered_ratio: Option<RatioStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanShiftReport {
    pub mean_shift: f64,
    pub per_n: Vec<MeanShiftCell>,
    pub trials: Vec<MeanShiftTrial>,
}

/// `‖T_n‖/n` and `‖T_n - mJ_n‖/(√n ln n)` for entries with mean shifted by
/// `config.mean_shift`. The centred matrix is built by subtracting `m` from
/// every coefficient.
pub fn mean_shift_experiment(config: &ExperimentConfig, mode: Execution) -> Result<MeanShiftReport> {
    config.validate()?;
    let m = config.mean_shift;
    if m == 0.0 {
        return Err(Error::InvalidParameter {
            name: "mean_shift",
            requirement: "nonzero",
            value: m,
        });
    }
    let specs = config.effective_specs();
    let config = ExperimentConfig {
        processes: ProcessFlags {
            upper_y: false,
            fejer_lower: false,
            plain_z: false,
        },
        ..config.clone()
    };
    let grid: Vec<(usize, usize)> = config
        .n_list
        .iter()
        .flat_map(|&n| (0..config.replications).map(move |r| (n, r)))
        .collect();
    let trials = map_collect(&grid, mode, |&(n, r)| -> Result<MeanShiftTrial> {
        let seed = trial_seed(config.master_seed, n, r);
        let (_, matrix) = trial_matrix(&config, &specs, n, seed)?;
        let (norm, ok) = trial_norm(&config, &matrix, seed)?;
        let centered = matrix.map_coeffs(|c| c - m);
        let (centered_norm, centered_ok) = trial_norm(&config, &centered, seed)?;
        let nf = n as f64;
        let log_scale = nf.sqrt() * nf.ln();
        Ok(MeanShiftTrial {
            n,
            replication: r,
            seed,
            ratio_n: norm.value / nf,
            centered_ratio: (n > 1).then(|| centered_norm.value / log_scale),
            norm,
            centered_norm,
            converged: ok && centered_ok,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let per_n = config
        .n_list
        .iter()
        .map(|&n| {
            let good: Vec<&MeanShiftTrial> = trials.iter().filter(|t| t.n == n && t.converged).collect();
            let ratio_n: Vec<f64> = good.iter().map(|t| t.ratio_n).collect();
            let centered: Vec<f64> = good.iter().filter_map(|t| t.centered_ratio).collect();
            MeanShiftCell {
                n,
                ratio_n: RatioStats::from_values(&ratio_n),
                centered_ratio: RatioStats::from_values(&centered),
            }
        })
        .collect();
    Ok(MeanShiftReport {
        mean_shift: m,
        per_n,
        trials,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    /// Fraction of replications with `‖T_n‖ ≥ sample mean + t`.
    pub empirical: f64,
    /// `concentration_tail_bound(bounded, A, n, t)`, 1 at `t = 0`.
    pub analytic: f64,
    /// Binomial standard error `√(p(1-p)/R)` at `p = analytic`.
    pub std_error: f64,
    /// `empirical ≤ analytic + 3 · std_error`.
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProfile {
    pub n: usize,
    pub replications: usize,
    /// Almost-sure bound `A` on the entries.
    pub bound_a: f64,
    pub mean_norm: f64,
    pub rows: Vec<TailRow>,
}

/// Empirical upper-deviation tails of `‖T_n‖` against the bounded-entries
/// concentration bound, one profile per dimension.
pub fn tail_profile(config: &ExperimentConfig, thresholds: &[f64], mode: Execution) -> Result<Vec<TailProfile>> {
    let specs = config.effective_specs();
    let bound_a = specs
        .iter()
        .map(|s| s.as_bound())
        .try_fold(0.0f64, |acc, b| b.map(|b| acc.max(b)))
        .ok_or_else(|| {
            Error::Config("tail profile under the bounded hypothesis needs almost surely bounded entries".into())
        })?;
    if bound_a == 0.0 {
        return Err(Error::Config("tail profile needs entries that are not identically zero".into()));
    }
    if let Some(&t) = thresholds.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "t",
            requirement: "finite and ≥ 0",
            value: t,
        });
    }
    let config = ExperimentConfig {
        processes: ProcessFlags {
            upper_y: false,
            fejer_lower: false,
            plain_z: false,
        },
        ..config.clone()
    };
    let out = super::run_sweep_with(&config, mode)?;
    config
        .n_list
        .iter()
        .map(|&n| {
            let norms: Vec<f64> = out
                .records
                .iter()
                .filter(|r| r.n == n && r.converged)
                .map(|r| r.norm.value)
                .collect();
            if norms.is_empty() {
                return Err(Error::EmptyInput("no converged replications"));
            }
            let count = norms.len() as f64;
            let mean_norm = norms.iter().sum::<f64>() / count;
            let rows = thresholds
                .iter()
                .map(|&t| {
                    let empirical = norms.iter().filter(|&&v| v >= mean_norm + t).count() as f64 / count;
                    let analytic = if t == 0.0 {
                        1.0
                    } else {
                        concentration_tail_bound(ConcentrationHypothesis::Bounded, bound_a, n, t)?
                    };
                    let std_error = (analytic * (1.0 - analytic) / count).sqrt();
                    Ok(TailRow {
                        t,
                        empirical,
                        analytic,
                        std_error,
                        within: empirical <= analytic + 3.0 * std_error,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TailProfile {
                n,
                replications: norms.len(),
                bound_a,
                mean_norm,
                rows,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub n: usize,
    pub seeds: usize,
    /// Max relative gap between `‖H_n‖` and the norm of its row reversal.
    pub hankel_max: f64,
    /// Max relative gap between the DFT spectral radius and the dense norm of a symmetric circulant.
    pub circulant_max: f64,
    /// Max relative gap between dense and iterative norms of a palindromic matrix.
    pub palindromic_max: f64,
    pub palindromic_symmetric: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub rows: Vec<EquivalenceRow>,
    pub max_hankel: f64,
    pub max_circulant: f64,
    pub max_palindromic: f64,
    pub all_symmetric: bool,
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Cross-checks of the exactly known identities between ensembles, with
/// Gaussian entries drawn from `derive_seed(seed, [n, kind])`.
pub fn equivalence_suite(n_list: &[usize], seeds: &[u64], mode: Execution) -> Result<EquivalenceReport> {
    if seeds.is_empty() {
        return Err(Error::EmptyInput("no seeds"));
    }
    for &n in n_list {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if n > DEFAULT_DENSE_CAP {
            return Err(Error::DenseCapExceeded {
                n,
                cap: DEFAULT_DENSE_CAP,
            });
        }
    }
    let specs = [DistributionSpec::gaussian_std()];
    let grid: Vec<(usize, u64)> = n_list.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    let gaps = map_collect(&grid, mode, |&(n, seed)| -> Result<(f64, f64, f64, bool)> {
        let draw = |kind: EnsembleKind| {
            let s = derive_seed(seed, &[n as u64, kind as u64]);
            sample_entries(&specs, kind.coeff_len(n), s).and_then(|e| build_matrix(kind, &e, n))
        };
        let h = draw(EnsembleKind::Hankel)?;
        let hankel = rel_gap(
            dense_spectral_norm(&h)?.value,
            dense_spectral_norm(&hankel_to_toeplitz(&h)?)?.value,
        );
        let c = draw(EnsembleKind::SymCirculant)?;
        let circulant = rel_gap(circulant_spectral_norm(&c)?.value, dense_spectral_norm(&c)?.value);
        let p = draw(EnsembleKind::PalindromicToeplitz)?;
        let d = p.densify()?;
        let symmetric = d == d.transpose();
        let opts = IterativeOptions {
            probe_seed: derive_seed(seed, &[n as u64]),
            ..IterativeOptions::default()
        };
        let palindromic = rel_gap(iterative_spectral_norm(&p, &opts)?.value, dense_spectral_norm(&p)?.value);
        Ok((hankel, circulant, palindromic, symmetric))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let rows: Vec<EquivalenceRow> = n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let cell = &gaps[i * seeds.len()..(i + 1) * seeds.len()];
            EquivalenceRow {
                n,
                seeds: seeds.len(),
                hankel_max: cell.iter().map(|g| g.0).fold(0.0, f64::max),
                circulant_max: cell.iter().map(|g| g.1).fold(0.0, f64::max),
                palindromic_max: cell.iter().map(|g| g.2).fold(0.0, f64::max),
                palindromic_symmetric: cell.iter().all(|g| g.3),
            }
        })
        .collect();
    Ok(EquivalenceReport {
        max_hankel: rows.iter().map(|r| r.hankel_max).fold(0.0, f64::max),
        max_circulant: rows.iter().map(|r| r.circulant_max).fold(0.0, f64::max),
        max_palindromic: rows.iter().map(|r| r.palindromic_max).fold(0.0, f64::max),
        all_symmetric: rows.iter().all(|r| r.palindromic_symmetric),
        rows,
    })
}
