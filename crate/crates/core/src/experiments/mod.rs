//! Reproducible Monte Carlo sweeps.
//!
//! Every trial `(n, r)` draws its entries from its own substream seeded by
//! `derive_seed(master_seed, [n, r])`, so a cell's result does not depend on
//! which other dimensions are in the sweep, on scheduling, or on the number
//! of threads. Trials run through the data-parallel helpers and are
//! collected in `(n, replication)` order before anything is aggregated.

mod config;
mod report;
mod special;
mod stats;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{ExperimentConfig, ProcessFlags, DEFAULT_AUTO_DENSE_CAP, DEFAULT_GRID_FACTOR};
pub use report::{ratio_points, read_csv, render_svg, write_csv, CsvRow, CSV_HEADER, UNCONVERGED_SUFFIX};
pub use special::{
    equivalence_suite, mean_shift_experiment, tail_profile, EquivalenceReport, EquivalenceRow, MeanShiftCell,
    MeanShiftReport, MeanShiftTrial, TailProfile, TailRow,
};
pub use stats::{fit_constant, fit_exponent, RatioStats};

use crate::ensembles::{build_matrix, EnsembleKind, StructuredMatrix};
use crate::entries::{derive_seed, sample_entries_at, DistributionSpec, EntrySequence};
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, IterativeOptions, SpectralEstimate};
use crate::par::{map_collect, Execution};
use crate::trigpoly::{certified_sup, matrix_process_sup, SupEstimate, TrigProcessKind};
use crate::sqrt_n_log_n;

/// Label mixed into a trial seed to obtain its Krylov probe seed.
const PROBE_LABEL: u64 = 0x5052_4F42;

/// One replication at one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    pub ensemble: EnsembleKind,
    pub dist: String,
    pub norm: SpectralEstimate,
    /// `false` when the Krylov solver hit its iteration limit; `norm` then
    /// holds the best estimate and the row is excluded from summaries.
    pub converged: bool,
    /// `‖T_n‖ / √(n ln n)`; absent at `n = 1`.
    pub ratio_sqrt_nlogn: Option<f64>,
    pub ratio_n: f64,
    pub upper_y: Option<SupEstimate>,
    /// Grid maximum of the Fejér process, a lower bound on the norm.
    pub fejer_lower: Option<f64>,
    pub plain_z: Option<SupEstimate>,
    /// Wall time of the trial; 0 unless timing was requested.
    pub elapsed_ms: f64,
}

impl TrialRecord {
    /// `fejer_lower - tol ≤ norm ≤ certified_upper + tol`, with `tol` scaled by `max(1, norm)`.
    /// Vacuously true when either side was not computed.
    pub fn sandwich_holds(&self, tol: f64) -> bool {
        let slack = tol * self.norm.value.max(1.0);
        let lower_ok = self.fejer_lower.is_none_or(|l| l <= self.norm.value + slack);
        let upper_ok = self
            .upper_y
            .as_ref()
            .is_none_or(|u| self.norm.value <= u.certified_upper + slack);
        lower_ok && upper_ok
    }
}

/// Per-dimension aggregates over the converged records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionSummary {
    pub n: usize,
    pub count: usize,
    pub unconverged: usize,
    pub ratio_sqrt_nlogn: Option<RatioStats>,
    pub ratio_n: Option<RatioStats>,
    /// `sup |Z_x| / √(n ln n)` with the certified upper value of the supremum.
    pub plain_z_ratio: Option<RatioStats>,
    pub mean_norm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub ensemble: EnsembleKind,
    pub dist: String,
    pub master_seed: u64,
    pub replications: usize,
    pub per_n: Vec<DimensionSummary>,
    /// Least-squares `c` in `‖T_n‖ ≈ c √(n ln n)` over all converged records with `n > 1`.
    pub fitted_c: Option<f64>,
    /// Slope of `log(mean ‖T_n‖)` against `log n`.
    pub fitted_exponent: Option<f64>,
    pub sandwich_violations: usize,
    pub unconverged: usize,
    pub total_records: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<TrialRecord>,
    pub summary: SweepSummary,
}

/// Sandwich tolerance, relative to `max(1, ‖T_n‖)`.
pub const SANDWICH_TOL: f64 = 1e-9;

pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    run_sweep_with(config, Execution::Auto)
}

pub fn run_sweep_with(config: &ExperimentConfig, mode: Execution) -> Result<SweepOutput> {
    let records = run_trials(config, &config.effective_specs(), mode)?;
    let summary = summarize(config, &records);
    Ok(SweepOutput { records, summary })
}

/// The `(n, replication)` grid of a config, in output order.
fn trial_grid(config: &ExperimentConfig) -> Vec<(usize, usize)> {
    config
        .n_list
        .iter()
        .flat_map(|&n| (0..config.replications).map(move |r| (n, r)))
        .collect()
}

pub(crate) fn trial_seed(master: u64, n: usize, replication: usize) -> u64 {
    derive_seed(master, &[n as u64, replication as u64])
}

fn run_trials(config: &ExperimentConfig, specs: &[DistributionSpec], mode: Execution) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let grid = trial_grid(config);
    map_collect(&grid, mode, |&(n, r)| run_trial(config, specs, n, r))
        .into_iter()
        .collect()
}

/// Entries and matrix of one trial.
pub(crate) fn trial_matrix(
    config: &ExperimentConfig,
    specs: &[DistributionSpec],
    n: usize,
    seed: u64,
) -> Result<(EntrySequence, StructuredMatrix)> {
    let mut len = config.ensemble.coeff_len(n);
    if config.processes.plain_z {
        // Z_x uses X_1..X_n.
        len = len.max(n + 1);
    }
    let entries = sample_entries_at(specs, len, seed, 0, Execution::Sequential)?;
    let matrix = build_matrix(config.ensemble, &entries, n)?;
    Ok((entries, matrix))
}

/// Norm of one matrix under the config's method; non-convergence is returned
/// as `(estimate, false)`, any other failure is an error.
pub(crate) fn trial_norm(config: &ExperimentConfig, matrix: &StructuredMatrix, seed: u64) -> Result<(SpectralEstimate, bool)> {
    let opts = IterativeOptions {
        tol: config.tol,
        max_iter: config.max_iter,
        probe_seed: derive_seed(seed, &[PROBE_LABEL]),
    };
    match spectral_norm(matrix, config.norm_method, &opts, config.dense_cap) {
        Ok(est) => Ok((est, true)),
        Err(Error::NotConverged(est)) => Ok((est, false)),
        Err(e) => Err(e),
    }
}

fn run_trial(config: &ExperimentConfig, specs: &[DistributionSpec], n: usize, replication: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let seed = trial_seed(config.master_seed, n, replication);
    let (entries, matrix) = trial_matrix(config, specs, n, seed)?;
    let (norm, converged) = trial_norm(config, &matrix, seed)?;
    let m = config.grid_size(n);
    // The processes bracket symmetric Toeplitz-type matrices only.
    let bracketable = config.ensemble.is_symmetric();
    let upper_y = if bracketable && config.processes.upper_y {
        Some(matrix_process_sup(&matrix, TrigProcessKind::UpperY, m)?)
    } else {
        None
    };
    let fejer_lower = if bracketable && config.processes.fejer_lower {
        Some(matrix_process_sup(&matrix, TrigProcessKind::FejerLower, m)?.grid_max)
    } else {
        None
    };
    let plain_z = if config.processes.plain_z {
        Some(certified_sup(&entries, TrigProcessKind::PlainZ, n, m)?)
    } else {
        None
    };
    let elapsed_ms = if config.record_timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    Ok(TrialRecord {
        n,
        replication,
        seed,
        ensemble: config.ensemble,
        dist: config.dist_label(),
        ratio_sqrt_nlogn: sqrt_n_log_n(n).map(|s| norm.value / s),
        ratio_n: norm.value / n as f64,
        norm,
        converged,
        upper_y,
        fejer_lower,
        plain_z,
        elapsed_ms,
    })
}

/// Aggregates records (assumed in `(n, replication)` order).
pub fn summarize(config: &ExperimentConfig, records: &[TrialRecord]) -> SweepSummary {
    let mut per_n = Vec::new();
    let mut means = Vec::new();
    for &n in &config.n_list {
        let cell: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
        let good: Vec<&TrialRecord> = cell.iter().copied().filter(|r| r.converged).collect();
        let ratio_sqrt: Vec<f64> = good.iter().filter_map(|r| r.ratio_sqrt_nlogn).collect();
        let ratio_n: Vec<f64> = good.iter().map(|r| r.ratio_n).collect();
        let plain_z: Vec<f64> = good
            .iter()
            .filter_map(|r| Some(r.plain_z.as_ref()?.certified_upper / sqrt_n_log_n(n)?))
            .collect();
        let norms: Vec<f64> = good.iter().map(|r| r.norm.value).collect();
        let mean_norm = RatioStats::from_values(&norms).map(|s| s.mean);
        if let Some(m) = mean_norm {
            means.push((n, m));
        }
        per_n.push(DimensionSummary {
            n,
            count: good.len(),
            unconverged: cell.len() - good.len(),
            ratio_sqrt_nlogn: RatioStats::from_values(&ratio_sqrt),
            ratio_n: RatioStats::from_values(&ratio_n),
            plain_z_ratio: RatioStats::from_values(&plain_z),
            mean_norm,
        });
    }
    let fit_points: Vec<(usize, f64)> = records
        .iter()
        .filter(|r| r.converged)
        .map(|r| (r.n, r.norm.value))
        .collect();
    SweepSummary {
        ensemble: config.ensemble,
        dist: config.dist_label(),
        master_seed: config.master_seed,
        replications: config.replications,
        per_n,
        fitted_c: fit_constant(&fit_points),
        fitted_exponent: fit_exponent(&means),
        sandwich_violations: records.iter().filter(|r| !r.sandwich_holds(SANDWICH_TOL)).count(),
        unconverged: records.iter().filter(|r| !r.converged).count(),
        total_records: records.len(),
    }
}

/// JSON document of a summary (pretty-printed, trailing newline).
pub fn summary_json(summary: &SweepSummary) -> Result<String> {
    let mut s = serde_json::to_string_pretty(summary)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dense_spectral_norm, NormMethod};

    fn config(n_list: Vec<usize>, replications: usize) -> ExperimentConfig {
        ExperimentConfig {
            n_list,
            replications,
            master_seed: 7,
            ..ExperimentConfig::new(EnsembleKind::SymToeplitz, vec![DistributionSpec::rademacher()])
        }
    }

    #[test]
    fn single_dense_record_matches_direct_computation() {
        let mut c = config(vec![64], 1);
        c.norm_method = NormMethod::Dense;
        let out = run_sweep(&c).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        let (_, m) = trial_matrix(&c, &c.effective_specs(), 64, r.seed).unwrap();
        // Independent route: nalgebra SVD of the densified matrix.
        let direct = m.densify().unwrap().singular_values().max();
        assert!((r.norm.value - direct).abs() < 1e-10);
        assert!((r.norm.value - dense_spectral_norm(&m).unwrap().value).abs() < 1e-12);
        assert!(r.sandwich_holds(SANDWICH_TOL));
        assert_eq!(out.summary.sandwich_violations, 0);
    }

    #[test]
    fn degenerate_zero_spec_gives_zero_norms() {
        let zero = DistributionSpec::shifted(DistributionSpec::rademacher().with_variance(0.0).unwrap(), 0.0);
        let mut c = config(vec![8, 16], 3);
        c.specs = vec![zero];
        let out = run_sweep(&c).unwrap();
        for r in &out.records {
            assert_eq!(r.norm.value, 0.0);
            assert_eq!(r.ratio_n, 0.0);
            assert_eq!(r.ratio_sqrt_nlogn, Some(0.0));
        }
    }

    #[test]
    fn cells_do_not_depend_on_other_dimensions() {
        let a = run_sweep(&config(vec![16, 32], 3)).unwrap();
        let b = run_sweep(&config(vec![8, 32, 64], 3)).unwrap();
        let pick = |o: &SweepOutput| o.records.iter().filter(|r| r.n == 32).cloned().collect::<Vec<_>>();
        assert_eq!(pick(&a), pick(&b));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let mut c = config(vec![16, 64, 128], 5);
        c.processes.plain_z = true;
        let a = run_sweep_with(&c, Execution::Auto).unwrap();
        let b = run_sweep_with(&c, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        write_csv(&a.records, &mut csv_a).unwrap();
        write_csv(&b.records, &mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn records_sorted_and_counted() {
        let out = run_sweep(&config(vec![4, 9, 30], 4)).unwrap();
        let keys: Vec<_> = out.records.iter().map(|r| (r.n, r.replication)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        for cell in &out.summary.per_n {
            assert_eq!(cell.count + cell.unconverged, 4);
        }
        let seeds: std::collections::HashSet<_> = out.records.iter().map(|r| r.seed).collect();
        assert_eq!(seeds.len(), out.records.len());
    }

    #[test]
    fn unconverged_rows_are_flagged_not_dropped() {
        let mut c = config(vec![200], 3);
        c.norm_method = NormMethod::Iterative;
        c.max_iter = Some(3);
        let out = run_sweep(&c).unwrap();
        assert_eq!(out.records.len(), 3);
        assert!(out.records.iter().all(|r| !r.converged));
        assert_eq!(out.summary.unconverged, 3);
        assert_eq!(out.summary.per_n[0].count, 0);
        assert!(out.summary.per_n[0].ratio_sqrt_nlogn.is_none());
    }

    #[test]
    fn nonsymmetric_kinds_skip_processes() {
        for kind in [EnsembleKind::NonsymToeplitz, EnsembleKind::Hankel] {
            let mut c = config(vec![16], 2);
            c.ensemble = kind;
            let out = run_sweep(&c).unwrap();
            assert!(out.records.iter().all(|r| r.upper_y.is_none() && r.fejer_lower.is_none()));
        }
    }

    #[test]
    fn sandwich_on_every_symmetric_kind() {
        for kind in [EnsembleKind::SymToeplitz, EnsembleKind::SymCirculant, EnsembleKind::PalindromicToeplitz] {
            for spec in [DistributionSpec::rademacher(), DistributionSpec::gaussian_std(), DistributionSpec::uniform_symmetric()] {
                let mut c = config(vec![1, 2, 3, 17, 100], 6);
                c.ensemble = kind;
                c.specs = vec![spec];
                let out = run_sweep(&c).unwrap();
                assert_eq!(out.summary.sandwich_violations, 0, "{kind}");
                assert!(out.records.iter().all(|r| r.fejer_lower.is_some() && r.upper_y.is_some()));
            }
        }
    }

    #[test]
    fn summary_of_n1_has_no_sqrt_ratio() {
        let out = run_sweep(&config(vec![1, 2], 2)).unwrap();
        assert!(out.summary.per_n[0].ratio_sqrt_nlogn.is_none());
        assert!(out.summary.per_n[1].ratio_sqrt_nlogn.is_some());
        assert!(out.records[0].ratio_sqrt_nlogn.is_none());
    }

    #[test]
    fn timing_is_opt_in() {
        let mut c = config(vec![32], 2);
        assert!(run_sweep(&c).unwrap().records.iter().all(|r| r.elapsed_ms == 0.0));
        c.record_timing = true;
        assert!(run_sweep(&c).unwrap().records.iter().all(|r| r.elapsed_ms >= 0.0));
    }
}
