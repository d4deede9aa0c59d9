use serde::{Deserialize, Serialize};

use crate::ensembles::EnsembleKind;
use crate::entries::DistributionSpec;
use crate::error::{positive, Error, Result};
use crate::linalg::{NormMethod, DEFAULT_TOL};

/// Grid size is `grid_factor · max(n, 8)`.
pub const DEFAULT_GRID_FACTOR: usize = 64;

/// Largest dimension for which `auto` picks the dense solver.
pub const DEFAULT_AUTO_DENSE_CAP: usize = 512;

/// Which trigonometric processes to evaluate per trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProcessFlags {
    #[serde(rename = "upper_Y")]
    pub upper_y: bool,
    pub fejer_lower: bool,
    #[serde(rename = "plain_Z")]
    pub plain_z: bool,
}

impl Default for ProcessFlags {
    fn default() -> Self {
        ProcessFlags {
            upper_y: true,
            fejer_lower: true,
            plain_z: false,
        }
    }
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_grid_factor() -> usize {
    DEFAULT_GRID_FACTOR
}

fn default_dense_cap() -> usize {
    DEFAULT_AUTO_DENSE_CAP
}

/// A sweep: ensemble, entry laws, dimensions, replications and solver settings.
///
/// In JSON the entry laws are `dist` and the master seed is `seed`; every
/// field after `seed` is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleKind,
    /// `X_j ~ specs[j mod specs.len()]`.
    #[serde(rename = "dist", alias = "specs")]
    pub specs: Vec<DistributionSpec>,
    pub n_list: Vec<usize>,
    pub replications: usize,
    #[serde(rename = "seed", alias = "master_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub norm_method: NormMethod,
    #[serde(default)]
    pub processes: ProcessFlags,
    /// Added to the mean of every entry law.
    #[serde(default)]
    pub mean_shift: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_grid_factor")]
    pub grid_factor: usize,
    #[serde(default)]
    pub max_iter: Option<usize>,
    /// Dense solver limit: `auto` goes dense up to here, `dense` refuses above it.
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
    /// Fill `elapsed_ms`. Off by default so outputs stay byte-reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

impl ExperimentConfig {
    /// Config with every optional field at its default, `n_list = [64]`, one replication, seed 0.
    pub fn new(ensemble: EnsembleKind, specs: Vec<DistributionSpec>) -> Self {
        ExperimentConfig {
            ensemble,
            specs,
            n_list: vec![64],
            replications: 1,
            master_seed: 0,
            norm_method: NormMethod::Auto,
            processes: ProcessFlags::default(),
            mean_shift: 0.0,
            tol: DEFAULT_TOL,
            grid_factor: DEFAULT_GRID_FACTOR,
            max_iter: None,
            dense_cap: DEFAULT_AUTO_DENSE_CAP,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() {
            return Err(Error::EmptySpecs);
        }
        if self.n_list.is_empty() {
            return Err(Error::Config("n_list must not be empty".into()));
        }
        if self.n_list.contains(&0) {
            return Err(Error::ZeroDimension);
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_list must be strictly ascending".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be ≥ 1".into()));
        }
        positive("tol", self.tol)?;
        if !self.mean_shift.is_finite() {
            return Err(Error::Config("mean_shift must be finite".into()));
        }
        if self.grid_factor < 4 {
            return Err(Error::Config(format!(
                "grid_factor must be ≥ 4 so the grid certificate applies, got {}",
                self.grid_factor
            )));
        }
        if self.max_iter == Some(0) {
            return Err(Error::Config("max_iter must be ≥ 1".into()));
        }
        if self.dense_cap == 0 {
            return Err(Error::Config("dense_cap must be ≥ 1".into()));
        }
        let largest = self.n_list[self.n_list.len() - 1];
        if self.norm_method == NormMethod::Dense && largest > self.dense_cap {
            return Err(Error::Config(format!(
                "norm_method \"dense\" with n = {largest} exceeds dense_cap = {}; raise dense_cap or use \"iterative\" or \"auto\"",
                self.dense_cap
            )));
        }
        Ok(())
    }

    /// Entry laws with `mean_shift` applied.
    pub fn effective_specs(&self) -> Vec<DistributionSpec> {
        self.specs
            .iter()
            .map(|s| {
                if self.mean_shift == 0.0 {
                    s.clone()
                } else {
                    DistributionSpec::shifted(s.clone(), self.mean_shift)
                }
            })
            .collect()
    }

    /// Label of the effective entry laws, joined with `|` when cycling.
    pub fn dist_label(&self) -> String {
        self.effective_specs().iter().map(|s| s.label()).collect::<Vec<_>>().join("|")
    }

    /// Trigonometric grid size `grid_factor · max(n, 8)` at dimension `n`.
    pub fn grid_size(&self, n: usize) -> usize {
        self.grid_factor * n.max(8)
    }
}
