//! Closed-form calculators for the inequalities behind the `√(n log n)` law.
//!
//! Absolute constants that the underlying results leave unspecified live in
//! [`BoundConstants`] and default to 1, so the calculators report the shape of
//! each bound rather than a sharp value.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::trigpoly::pseudometric_d;

/// Free constants of the bounds. All strictly positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// Entropy-integral constant `K` of the Dudley bound.
    pub k_dudley: f64,
    /// Hoeffding exponent constant `b`.
    pub b_subg: f64,
    /// Exponent constant `c` of the entropy-integral tail bound.
    pub c_tail: f64,
    /// Constant `K` of the Kashin–Tzafriri lower bound.
    pub k_kt: f64,
    /// Bound / log-Sobolev constant `A` of the entries.
    pub a_conc: f64,
    /// Lower bound `B` on `E|X_j|`.
    pub b_abs: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants {
            k_dudley: 1.0,
            b_subg: 1.0,
            c_tail: 1.0,
            k_kt: 1.0,
            a_conc: 1.0,
            b_abs: 1.0,
        }
    }
}

impl BoundConstants {
    pub fn validate(&self) -> Result<()> {
        positive("K", self.k_dudley)?;
        positive("b", self.b_subg)?;
        positive("c", self.c_tail)?;
        positive("K_kt", self.k_kt)?;
        positive("A", self.a_conc)?;
        positive("B", self.b_abs)
    }
}

/// `N([0,1], d, ε) ≤ 4n^{3/2}/ε`, and `= 1` once `ε ≥ 2√n`.
pub fn covering_number_bound(n: usize, eps: f64) -> Result<f64> {
    positive("eps", eps)?;
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let nf = n as f64;
    if eps >= 2.0 * nf.sqrt() {
        return Ok(1.0);
    }
    Ok((4.0 * nf.powf(1.5) / eps).max(1.0))
}

/// Size of a greedy `ε`-net of `{i / resolution}` in the pseudometric `d`.
///
/// Every net point is at distance `> ε` from the earlier ones, so this is an
/// upper bound on the covering number of the discretised interval.
pub fn greedy_cover_size(n: usize, eps: f64, resolution: usize) -> Result<usize> {
    positive("eps", eps)?;
    if n == 0 || resolution == 0 {
        return Err(Error::ZeroDimension);
    }
    let points: Vec<f64> = (0..=resolution).map(|i| i as f64 / resolution as f64).collect();
    // d(x, y) is the Euclidean distance between the feature vectors (cos 2πjx)_j.
    let features: Vec<Vec<f64>> = points
        .iter()
        .map(|&x| (1..n).map(|j| (2.0 * PI * j as f64 * x).cos()).collect())
        .collect();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let mut covered = vec![false; points.len()];
    let mut centers = 0;
    for i in 0..points.len() {
        if covered[i] {
            continue;
        }
        centers += 1;
        for j in i..points.len() {
            if !covered[j] && dist(&features[i], &features[j]) <= eps {
                covered[j] = true;
            }
        }
    }
    debug_assert!(pseudometric_d(0.0, 0.0, n) == 0.0);
    Ok(centers)
}

// 15-point Kronrod nodes / weights and the embedded 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature on `[a, b]`.
///
/// Repeatedly bisects the subinterval with the largest error estimate until
/// the summed estimate is below `rel_tol · |value|` or 4096 subintervals exist.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    const MAX_INTERVALS: usize = 4096;
    let (v, e) = gauss_kronrod(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let value: f64 = intervals.iter().map(|iv| iv.2).sum();
        let error: f64 = intervals.iter().map(|iv| iv.3).sum();
        if error <= rel_tol * value.abs() || intervals.len() >= MAX_INTERVALS {
            return value;
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (lv, le) = gauss_kronrod(&f, lo, mid);
        let (rv, re) = gauss_kronrod(&f, mid, hi);
        intervals.push((lo, mid, lv, le));
        intervals.push((mid, hi, rv, re));
    }
}

/// Upper limit beyond which `t² e^{-t²/2}` (or `u² e^{-u²}`) is negligible relative to its value at `s`.
fn tail_cutoff(s: f64) -> f64 {
    s.max(0.0) + 40.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DudleyBound {
    /// `K ∫_0^{2√n} √(log(4n^{3/2}/ε)) dε`, by quadrature.
    pub integral_value: f64,
    /// `√2 K √n (√(2 ln 2n) + √(2π))`.
    pub closed_form: f64,
}

/// Entropy-integral bound on `E‖T_n‖` and its closed-form relaxation.
///
/// The integrand is singular (`√log`) at `ε → 0`; the substitution
/// `ε = 4n^{3/2} e^{-u²}` turns the integral into
/// `8 n^{3/2} ∫_{√(ln 2n)}^∞ u² e^{-u²} du`, which is smooth.
pub fn dudley_bound(n: usize, consts: &BoundConstants) -> Result<DudleyBound> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    consts.validate()?;
    let nf = n as f64;
    let u0 = (2.0 * nf).ln().sqrt();
    let tail = integrate(|u| u * u * (-u * u).exp(), u0, tail_cutoff(u0), 1e-12);
    let integral_value = consts.k_dudley * 8.0 * nf.powf(1.5) * tail;
    let s = (2.0 * (2.0 * nf).ln()).sqrt();
    let closed_form = SQRT_2 * consts.k_dudley * nf.sqrt() * (s + (2.0 * PI).sqrt());
    Ok(DudleyBound {
        integral_value,
        closed_form,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailMoment {
    /// `(s + √(2π)) e^{-s²/2}`.
    pub bound: f64,
    /// `∫_s^∞ t² e^{-t²/2} dt` by quadrature.
    pub exact: f64,
}

pub fn gaussian_tail_moment(s: f64) -> Result<TailMoment> {
    positive("s", s)?;
    let exact = integrate(|t| t * t * (-0.5 * t * t).exp(), s, tail_cutoff(s), 1e-12);
    let bound = (s + (2.0 * PI).sqrt()) * (-0.5 * s * s).exp();
    Ok(TailMoment { bound, exact })
}

/// `min(1, 2 exp(-b t² / Σ a_j²))`.
pub fn hoeffding_tail_bound(a: &[f64], t: f64, b: f64) -> Result<f64> {
    positive("t", t)?;
    positive("b", b)?;
    let sum_sq: f64 = a.iter().map(|x| x * x).sum();
    if sum_sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((2.0 * (-b * t * t / sum_sq).exp()).min(1.0))
}

/// Hypothesis under which `‖T_n‖` concentrates around its mean.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcentrationHypothesis {
    /// `|X_j| ≤ A` almost surely.
    Bounded,
    /// Each `X_j` satisfies a log-Sobolev inequality with constant `A`.
    Lsi,
}

/// Upper-deviation tail `P[‖T_n‖ ≥ E‖T_n‖ + t]`: `exp(-t²/(32A²n))` for
/// bounded entries, `exp(-t²/(4An))` under a log-Sobolev inequality.
pub fn concentration_tail_bound(hypothesis: ConcentrationHypothesis, a: f64, n: usize, t: f64) -> Result<f64> {
    positive("A", a)?;
    positive("t", t)?;
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let nf = n as f64;
    let exponent = match hypothesis {
        ConcentrationHypothesis::Bounded => t * t / (32.0 * a * a * nf),
        ConcentrationHypothesis::Lsi => t * t / (4.0 * a * nf),
    };
    Ok((-exponent).exp().min(1.0))
}

/// Lipschitz constant `2√n` of `(X_0..X_{n-1}) ↦ ‖T_n‖`.
pub fn norm_lipschitz_constant(n: usize) -> f64 {
    2.0 * (n as f64).sqrt()
}

/// `min(1, 2 exp(-c t²/α²))`.
pub fn dudley_tail_bound(alpha: f64, t: f64, c: f64) -> Result<f64> {
    positive("alpha", alpha)?;
    positive("t", t)?;
    positive("c", c)?;
    Ok((2.0 * (-c * t * t / (alpha * alpha)).exp()).min(1.0))
}

/// `a_0 = 1`, `a_j = √2 (1 - j/n)`.
pub fn fejer_weights(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let nf = n as f64;
    Ok((0..n)
        .map(|j| if j == 0 { 1.0 } else { SQRT_2 * (1.0 - j as f64 / nf) })
        .collect())
}

/// Checks `‖a‖₂ > √n/2` and `‖a‖₄ < 2n^{1/4}` for the Fejér weights in
/// integer arithmetic:
///
/// * `‖a‖₂² = 1 + 2 Σ_{k<n} k²/n²`, so the first is `4n² + 8 Σk² > n³`;
/// * `‖a‖₄⁴ = 1 + 4 Σ_{k<n} k⁴/n⁴`, so the second is `n⁴ + 4 Σk⁴ < 16 n⁵`.
pub fn fejer_norm_inequalities_hold(n: u64) -> (bool, bool) {
    let n = n as u128;
    let s2: u128 = (1..n).map(|k| k * k).sum();
    let s4: u128 = (1..n).map(|k| k * k * k * k).sum();
    let l2 = 4 * n * n + 8 * s2 > n * n * n;
    let l4 = n.pow(4) + 4 * s4 < 16 * n.pow(5);
    (l2, l4)
}

pub fn lp_norm(a: &[f64], p: f64) -> f64 {
    a.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `K ‖a‖₂ √(ln(‖a‖₂/‖a‖₄))`, zero when the two norms coincide.
pub fn kt_lower_bound(a: &[f64], k: f64) -> Result<f64> {
    positive("K", k)?;
    let l2 = lp_norm(a, 2.0);
    if l2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let l4 = lp_norm(a, 4.0);
    let log = (l2 / l4).ln();
    Ok(if log > 0.0 { k * l2 * log.sqrt() } else { 0.0 })
}

/// All calculators evaluated at one dimension, as printed by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub constants: BoundConstants,
    pub sqrt_n_log_n: Option<f64>,
    pub covering_at_eps_1: f64,
    pub covering_at_sqrt_n: f64,
    pub dudley: DudleyBound,
    pub kt_lower: f64,
    pub fejer_l2: f64,
    pub fejer_l4: f64,
    pub fejer_l2_threshold: f64,
    pub fejer_l4_threshold: f64,
    pub lipschitz_constant: f64,
    /// Deviation tails at `t = √(n ln n)` (or `t = 1` when `n = 1`).
    pub concentration_t: f64,
    pub concentration_bounded: f64,
    pub concentration_lsi: f64,
    /// Entropy-integral tail at `t = 2α`, `α = integral_value / K`.
    pub dudley_tail_at_2alpha: f64,
    /// Hoeffding tail of `Y_0 = X_0 + 2 Σ X_j` at `t = √(n ln n)`.
    pub hoeffding_y0: f64,
}

pub fn bounds_report(n: usize, constants: BoundConstants) -> Result<BoundsReport> {
    constants.validate()?;
    let nf = n as f64;
    let dudley = dudley_bound(n, &constants)?;
    let weights = fejer_weights(n)?;
    let t = crate::sqrt_n_log_n(n).unwrap_or(1.0);
    let alpha = dudley.integral_value / constants.k_dudley;
    let y0: Vec<f64> = (0..n).map(|j| if j == 0 { 1.0 } else { 2.0 }).collect();
    Ok(BoundsReport {
        n,
        constants,
        sqrt_n_log_n: crate::sqrt_n_log_n(n),
        covering_at_eps_1: covering_number_bound(n, 1.0)?,
        covering_at_sqrt_n: covering_number_bound(n, nf.sqrt())?,
        dudley,
        kt_lower: kt_lower_bound(&weights, constants.k_kt)?,
        fejer_l2: lp_norm(&weights, 2.0),
        fejer_l4: lp_norm(&weights, 4.0),
        fejer_l2_threshold: nf.sqrt() / 2.0,
        fejer_l4_threshold: 2.0 * nf.powf(0.25),
        lipschitz_constant: norm_lipschitz_constant(n),
        concentration_t: t,
        concentration_bounded: concentration_tail_bound(ConcentrationHypothesis::Bounded, constants.a_conc, n, t)?,
        concentration_lsi: concentration_tail_bound(ConcentrationHypothesis::Lsi, constants.a_conc, n, t)?,
        dudley_tail_at_2alpha: dudley_tail_bound(alpha, 2.0 * alpha, constants.c_tail)?,
        hoeffding_y0: hoeffding_tail_bound(&y0, t, constants.b_subg)?,
    })
}
