//! Entry laws and reproducible coefficient sequences.
//!
//! Every index `j` of a sequence draws from its own ChaCha8 stream: the key is
//! expanded from the master seed with SplitMix64 and the stream id is `j`
//! itself. Values therefore do not depend on how many other indices are
//! sampled, nor on the order or thread in which they are produced.

use std::f64::consts::{LN_2, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_range, Execution};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Base law of an entry, before shifting and scaling. Every base law has mean
/// zero and variance one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    /// Uniform on `{-1, +1}`.
    Rademacher,
    GaussianStd,
    /// Uniform on `[-√3, √3]`.
    UniformSymmetric,
}

impl DistributionKind {
    pub fn name(self) -> &'static str {
        match self {
            DistributionKind::Rademacher => "rademacher",
            DistributionKind::GaussianStd => "gaussian_std",
            DistributionKind::UniformSymmetric => "uniform_symmetric",
        }
    }

    /// Canonical `a` with `P[|X| ≥ t] ≤ 2 exp(-a t²)` for the unit-variance law.
    pub fn canonical_subgaussian_a(self) -> f64 {
        match self {
            DistributionKind::Rademacher => LN_2,
            DistributionKind::GaussianStd => 0.5,
            DistributionKind::UniformSymmetric => LN_2 / 3.0,
        }
    }

    /// `E|X|` of the unit-variance law.
    pub fn mean_abs(self) -> f64 {
        match self {
            DistributionKind::Rademacher => 1.0,
            DistributionKind::GaussianStd => (2.0 / std::f64::consts::PI).sqrt(),
            DistributionKind::UniformSymmetric => SQRT_3 / 2.0,
        }
    }

    /// Almost-sure bound on `|X|`, if any.
    pub fn support_bound(self) -> Option<f64> {
        match self {
            DistributionKind::Rademacher => Some(1.0),
            DistributionKind::GaussianStd => None,
            DistributionKind::UniformSymmetric => Some(SQRT_3),
        }
    }

    /// Exact `P[|X| ≥ t]` for `t > 0`.
    fn tail(self, t: f64) -> f64 {
        match self {
            DistributionKind::Rademacher => {
                if t <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionKind::GaussianStd => libm::erfc(t / SQRT_2),
            DistributionKind::UniformSymmetric => (1.0 - t / SQRT_3).max(0.0),
        }
    }

    fn draw(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            DistributionKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            DistributionKind::GaussianStd => rng.sample(StandardNormal),
            DistributionKind::UniformSymmetric => SQRT_3 * (2.0 * rng.random::<f64>() - 1.0),
        }
    }
}

/// One entry law: `X = m + √variance · Z` with `Z` drawn from `kind`.
///
/// Serialized as a flat object, e.g. `{"kind": "rademacher", "m": 5.0, "variance": 1.0}`.
/// On input `m` and `variance` are optional, and the nested form
/// `{"kind": "shifted", "base": {...}, "m": 5.0}` is accepted as well.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct DistributionSpec {
    kind: DistributionKind,
    shift: f64,
    variance: f64,
}

impl DistributionSpec {
    pub fn new(kind: DistributionKind) -> Self {
        DistributionSpec {
            kind,
            shift: 0.0,
            variance: 1.0,
        }
    }

    pub fn rademacher() -> Self {
        Self::new(DistributionKind::Rademacher)
    }

    pub fn gaussian_std() -> Self {
        Self::new(DistributionKind::GaussianStd)
    }

    pub fn uniform_symmetric() -> Self {
        Self::new(DistributionKind::UniformSymmetric)
    }

    /// `base + m`: mean moves by `m`, centered tails are unchanged.
    pub fn shifted(base: DistributionSpec, m: f64) -> Self {
        DistributionSpec {
            shift: base.shift + m,
            ..base
        }
    }

    /// Rescales the centered part to the given variance. `0` gives the point mass at the mean.
    pub fn with_variance(self, variance: f64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "variance must be finite and ≥ 0, got {variance}"
            )));
        }
        Ok(DistributionSpec { variance, ..self })
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn mean(&self) -> f64 {
        self.shift
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    fn scale(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Subgaussian constant of the centered law (infinite for a point mass).
    pub fn subgaussian_a(&self) -> f64 {
        if self.variance == 0.0 {
            f64::INFINITY
        } else {
            self.kind.canonical_subgaussian_a() / self.variance
        }
    }

    /// Log-Sobolev constant of the centered law, where one is known (Gaussian only).
    pub fn lsi_constant(&self) -> Option<f64> {
        match self.kind {
            DistributionKind::GaussianStd if self.variance > 0.0 => Some(self.variance),
            _ => None,
        }
    }

    /// Almost-sure bound on `|X|`.
    pub fn as_bound(&self) -> Option<f64> {
        if self.variance == 0.0 {
            return Some(self.shift.abs());
        }
        self.kind
            .support_bound()
            .map(|b| self.shift.abs() + b * self.scale())
    }

    /// `E|X - EX|`.
    pub fn centered_mean_abs(&self) -> f64 {
        self.kind.mean_abs() * self.scale()
    }

    /// Exact `P[|X - EX| ≥ t]`.
    pub fn centered_tail(&self, t: f64) -> f64 {
        if self.variance == 0.0 {
            return if t <= 0.0 { 1.0 } else { 0.0 };
        }
        self.kind.tail(t / self.scale())
    }

    /// Short label used in CSV rows, e.g. `rademacher`, `rademacher+1`, `gaussian_std*0.25`.
    pub fn label(&self) -> String {
        let mut s = self.kind.name().to_string();
        if self.variance != 1.0 {
            s.push_str(&format!("*{}", self.variance));
        }
        if self.shift != 0.0 {
            s.push_str(&format!("{:+}", self.shift));
        }
        s
    }

    fn sample_one(&self, rng: &mut ChaCha8Rng) -> f64 {
        let z = self.kind.draw(rng);
        if self.variance == 0.0 {
            self.shift
        } else {
            self.shift + self.scale() * z
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawKind {
    Rademacher,
    GaussianStd,
    UniformSymmetric,
    Shifted,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    kind: RawKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<Box<RawSpec>>,
    #[serde(default)]
    m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variance: Option<f64>,
}

impl TryFrom<RawSpec> for DistributionSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        if !raw.m.is_finite() {
            return Err(Error::InvalidDistribution(format!("m must be finite, got {}", raw.m)));
        }
        let base = match raw.kind {
            RawKind::Rademacher => DistributionSpec::rademacher(),
            RawKind::GaussianStd => DistributionSpec::gaussian_std(),
            RawKind::UniformSymmetric => DistributionSpec::uniform_symmetric(),
            RawKind::Shifted => {
                let inner = raw.base.ok_or_else(|| {
                    Error::InvalidDistribution("kind `shifted` requires a `base` object".into())
                })?;
                DistributionSpec::try_from(*inner)?
            }
        };
        let spec = DistributionSpec::shifted(base, raw.m);
        match raw.variance {
            Some(v) => spec.with_variance(v),
            None => Ok(spec),
        }
    }
}

impl From<DistributionSpec> for RawSpec {
    fn from(spec: DistributionSpec) -> Self {
        RawSpec {
            kind: match spec.kind {
                DistributionKind::Rademacher => RawKind::Rademacher,
                DistributionKind::GaussianStd => RawKind::GaussianStd,
                DistributionKind::UniformSymmetric => RawKind::UniformSymmetric,
            },
            base: None,
            m: spec.shift,
            variance: Some(spec.variance),
        }
    }
}

/// Checks `P[|X - EX| ≥ t] ≤ 2 exp(-a t²)` on every grid point using the exact tail.
pub fn verify_subgaussian_tail(spec: &DistributionSpec, a: f64, t_grid: &[f64]) -> Result<bool> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter {
            name: "a",
            requirement: "positive",
            value: a,
        });
    }
    Ok(t_grid.iter().all(|&t| {
        let bound = 2.0 * (-a * t * t).exp();
        spec.centered_tail(t) <= bound * (1.0 + 1e-12)
    }))
}

/// Coefficients `X_j`, `j = index_offset, index_offset + 1, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntrySequence {
    pub values: Vec<f64>,
    pub specs: Vec<DistributionSpec>,
    pub master_seed: u64,
    pub index_offset: i64,
}

impl EntrySequence {
    /// Wraps explicit values (index offset 0), e.g. for hand-built examples.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(EntrySequence {
            values,
            specs: Vec::new(),
            master_seed: 0,
            index_offset: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value of `X_j`, if it is part of the sequence.
    pub fn get(&self, j: i64) -> Option<f64> {
        let pos = j.checked_sub(self.index_offset)?;
        usize::try_from(pos).ok().and_then(|p| self.values.get(p).copied())
    }
}

/// SplitMix64 step.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a list of labels into a new 64-bit seed.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    let mut state = master;
    let mut out = splitmix64(&mut state);
    for &label in labels {
        state ^= label.wrapping_mul(0xD1B5_4A32_D192_ED03);
        out = splitmix64(&mut state) ^ out.rotate_left(17);
    }
    out
}

fn chacha_key(master: u64) -> [u8; 32] {
    let mut state = master;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// Random generator for one index of the sequence keyed by `master`.
pub(crate) fn index_rng(key: [u8; 32], index: i64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index as u64);
    rng
}

/// Samples `X_0, ..., X_{len-1}` with `X_j ~ specs[j mod specs.len()]`.
pub fn sample_entries(specs: &[DistributionSpec], len: usize, master_seed: u64) -> Result<EntrySequence> {
    sample_entries_at(specs, len, master_seed, 0, Execution::Auto)
}

/// Samples `X_offset, ..., X_{offset+len-1}`. The value of `X_j` depends only on
/// `(specs, j, master_seed)`.
pub fn sample_entries_at(
    specs: &[DistributionSpec],
    len: usize,
    master_seed: u64,
    index_offset: i64,
    mode: Execution,
) -> Result<EntrySequence> {
    if specs.is_empty() {
        return Err(Error::EmptySpecs);
    }
    if len == 0 {
        return Err(Error::EmptySequence);
    }
    let key = chacha_key(master_seed);
    let draw = |i: usize| {
        let j = index_offset + i as i64;
        let spec = &specs[j.rem_euclid(specs.len() as i64) as usize];
        spec.sample_one(&mut index_rng(key, j))
    };
    // Per-index streams make chunking irrelevant to the result; only go
    // parallel when the sequence is long enough to pay for it.
    let mode = if len >= 1 << 15 { mode } else { Execution::Sequential };
    let values = map_range(len, mode, draw);
    Ok(EntrySequence {
        values,
        specs: specs.to_vec(),
        master_seed,
        index_offset,
    })
}

/// Probe vector with i.i.d. standard normal entries, normalised to unit length.
pub(crate) fn unit_probe(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_grid() -> Vec<f64> {
        (1..=1000).map(|i| i as f64 * 0.01).collect()
    }

    #[test]
    fn rademacher_support() {
        let seq = sample_entries(&[DistributionSpec::rademacher()], 4, 11).unwrap();
        assert!(seq.values.iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn shifted_rademacher_support() {
        let spec = DistributionSpec::shifted(DistributionSpec::rademacher(), 5.0);
        let seq = sample_entries(&[spec], 3, 11).unwrap();
        assert!(seq.values.iter().all(|&v| v == 4.0 || v == 6.0));
    }

    #[test]
    fn rademacher_mean_within_clt_band() {
        let seq = sample_entries(&[DistributionSpec::rademacher()], 1_000_000, 20_240_601).unwrap();
        let mean = seq.values.iter().sum::<f64>() / seq.len() as f64;
        assert!(mean.abs() <= 0.005, "mean {mean}");
    }

    #[test]
    fn errors_on_empty_inputs() {
        assert!(matches!(sample_entries(&[], 3, 1), Err(Error::EmptySpecs)));
        assert!(matches!(
            sample_entries(&[DistributionSpec::rademacher()], 0, 1),
            Err(Error::EmptySequence)
        ));
    }

    #[test]
    fn cyclic_specs() {
        let specs = [
            DistributionSpec::rademacher(),
            DistributionSpec::shifted(DistributionSpec::rademacher(), 10.0),
        ];
        let seq = sample_entries(&specs, 6, 3).unwrap();
        for (j, v) in seq.values.iter().enumerate() {
            if j % 2 == 0 {
                assert!(v.abs() == 1.0);
            } else {
                assert!(*v == 9.0 || *v == 11.0);
            }
        }
    }

    #[test]
    fn prefix_and_offset_stability() {
        let specs = [DistributionSpec::gaussian_std()];
        let long = sample_entries(&specs, 100, 9).unwrap();
        let short = sample_entries(&specs, 40, 9).unwrap();
        assert_eq!(&long.values[..40], &short.values[..]);
        let tail = sample_entries_at(&specs, 60, 9, 40, Execution::Sequential).unwrap();
        assert_eq!(&long.values[40..], &tail.values[..]);
        assert_eq!(tail.get(41), Some(long.values[41]));
        assert_eq!(tail.get(39), None);
    }

    #[test]
    fn parallel_matches_sequential() {
        let specs = [DistributionSpec::uniform_symmetric(), DistributionSpec::gaussian_std()];
        let a = sample_entries_at(&specs, 70_000, 5, -3, Execution::Auto).unwrap();
        let b = sample_entries_at(&specs, 70_000, 5, -3, Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lag_one_autocorrelation_small() {
        let seq = sample_entries(&[DistributionSpec::rademacher()], 100_000, 77).unwrap();
        let v = &seq.values;
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        let cov = v.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>();
        assert!((cov / var).abs() < 0.02);
    }

    #[test]
    fn moments_per_kind() {
        let len = 100_000;
        for spec in [
            DistributionSpec::rademacher(),
            DistributionSpec::gaussian_std(),
            DistributionSpec::uniform_symmetric(),
            DistributionSpec::shifted(DistributionSpec::gaussian_std(), -2.5),
            DistributionSpec::uniform_symmetric().with_variance(4.0).unwrap(),
        ] {
            let seq = sample_entries(&[spec.clone()], len, 123).unwrap();
            let mean = seq.values.iter().sum::<f64>() / len as f64;
            let var = seq.values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (len - 1) as f64;
            let band = 5.0 * spec.variance().sqrt() / (len as f64).sqrt();
            assert!((mean - spec.mean()).abs() <= band, "{spec:?}: mean {mean}");
            assert!((var / spec.variance() - 1.0).abs() < 0.1, "{spec:?}: var {var}");
        }
    }

    #[test]
    fn point_mass_via_zero_variance() {
        let spec = DistributionSpec::shifted(DistributionSpec::rademacher(), 2.0)
            .with_variance(0.0)
            .unwrap();
        let seq = sample_entries(&[spec.clone()], 5, 1).unwrap();
        assert!(seq.values.iter().all(|&v| v == 2.0));
        assert_eq!(spec.as_bound(), Some(2.0));
        assert!(verify_subgaussian_tail(&spec, spec.subgaussian_a(), &dense_grid()).unwrap());
    }

    #[test]
    fn subgaussian_examples() {
        let grid = dense_grid();
        assert!(verify_subgaussian_tail(&DistributionSpec::gaussian_std(), 0.5, &grid).unwrap());
        assert!(verify_subgaussian_tail(&DistributionSpec::rademacher(), LN_2, &grid).unwrap());
        assert!(!verify_subgaussian_tail(&DistributionSpec::gaussian_std(), 10.0, &[1.0]).unwrap());
        assert!(verify_subgaussian_tail(&DistributionSpec::rademacher(), 0.0, &grid).is_err());
    }

    #[test]
    fn canonical_constants_hold() {
        let grid = dense_grid();
        for spec in [
            DistributionSpec::rademacher(),
            DistributionSpec::gaussian_std(),
            DistributionSpec::uniform_symmetric(),
            DistributionSpec::shifted(DistributionSpec::uniform_symmetric(), 3.0),
            DistributionSpec::gaussian_std().with_variance(9.0).unwrap(),
        ] {
            assert!(verify_subgaussian_tail(&spec, spec.subgaussian_a(), &grid).unwrap(), "{spec:?}");
        }
        // A slightly larger constant breaks the two bounded laws at their support edge.
        assert!(!verify_subgaussian_tail(&DistributionSpec::rademacher(), LN_2 * 1.01, &[1.0]).unwrap());
        assert!(!verify_subgaussian_tail(&DistributionSpec::gaussian_std(), 0.6, &grid).unwrap());
    }

    #[test]
    fn gaussian_tail_matches_erfc() {
        // P[|Z| ≥ 1] = 0.3173105078629141
        let p = DistributionSpec::gaussian_std().centered_tail(1.0);
        assert!((p - 0.317_310_507_862_914_1).abs() < 1e-15, "{p}");
    }

    #[test]
    fn json_forms() {
        let flat: DistributionSpec = serde_json::from_str(r#"{"kind":"rademacher","m":5.0}"#).unwrap();
        let nested: DistributionSpec =
            serde_json::from_str(r#"{"kind":"shifted","base":{"kind":"rademacher"},"m":5.0}"#).unwrap();
        assert_eq!(flat, nested);
        assert_eq!(flat.mean(), 5.0);
        let back: DistributionSpec = serde_json::from_str(&serde_json::to_string(&flat).unwrap()).unwrap();
        assert_eq!(back, flat);
        assert!(serde_json::from_str::<DistributionSpec>(r#"{"kind":"shifted","m":1}"#).is_err());
        assert!(serde_json::from_str::<DistributionSpec>(r#"{"kind":"cauchy"}"#).is_err());
    }
}
