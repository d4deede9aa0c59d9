//! Toeplitz matrix-vector products through circulant embedding.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::ensembles::{EnsembleKind, StructuredMatrix};
use crate::error::{Error, Result};

/// A structured matrix prepared for repeated `O(n log n)` products.
///
/// The Toeplitz part is embedded in a circulant of size `P`, the next power
/// of two `≥ 2n - 1`, whose spectrum is computed once. Hankel matrices are
/// applied as a row reversal of that Toeplitz part.
pub struct ToeplitzOperator {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    spectrum: Vec<Complex<f64>>,
    reverse_rows: bool,
}

impl ToeplitzOperator {
    pub fn new(m: &StructuredMatrix) -> Self {
        let n = m.n();
        let size = (2 * n - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);

        let (col, row) = m.toeplitz_col_row();
        let mut spectrum = vec![Complex::new(0.0, 0.0); size];
        for (i, &c) in col.iter().enumerate() {
            spectrum[i].re = c;
        }
        for i in 1..n {
            spectrum[size - i].re = row[i];
        }
        forward.process(&mut spectrum);
        // Fold the 1/P normalisation of the inverse transform into the spectrum.
        let scale = 1.0 / size as f64;
        spectrum.iter_mut().for_each(|z| *z *= scale);

        ToeplitzOperator {
            n,
            forward,
            inverse,
            spectrum,
            reverse_rows: m.kind() == EnsembleKind::Hankel,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn embedding_size(&self) -> usize {
        self.spectrum.len()
    }

    fn toeplitz_apply(&self, v: &[f64], out: &mut [f64], transpose: bool) {
        let mut buf = vec![Complex::new(0.0, 0.0); self.spectrum.len()];
        for (b, &x) in buf.iter_mut().zip(v) {
            b.re = x;
        }
        self.forward.process(&mut buf);
        // The transposed Toeplitz matrix embeds into the transposed circulant,
        // whose eigenvalues are the conjugates.
        if transpose {
            buf.iter_mut().zip(&self.spectrum).for_each(|(b, s)| *b *= s.conj());
        } else {
            buf.iter_mut().zip(&self.spectrum).for_each(|(b, s)| *b *= s);
        }
        self.inverse.process(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = b.re;
        }
    }

    /// `out = M v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        if self.reverse_rows {
            self.toeplitz_apply(v, out, false);
            out.reverse();
        } else {
            self.toeplitz_apply(v, out, false);
        }
    }

    /// `out = Mᵀ v`.
    pub fn apply_transpose(&self, v: &[f64], out: &mut [f64]) {
        if self.reverse_rows {
            let reversed: Vec<f64> = v.iter().rev().copied().collect();
            self.toeplitz_apply(&reversed, out, true);
        } else {
            self.toeplitz_apply(v, out, true);
        }
    }
}

/// `M v` by circulant embedding and FFT.
pub fn structured_matvec(m: &StructuredMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            got: v.len(),
        });
    }
    let op = ToeplitzOperator::new(m);
    let mut out = vec![0.0; m.n()];
    op.apply(v, &mut out);
    Ok(out)
}

/// `Mᵀ v` by circulant embedding and FFT.
pub fn structured_matvec_transpose(m: &StructuredMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != m.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            got: v.len(),
        });
    }
    let op = ToeplitzOperator::new(m);
    let mut out = vec![0.0; m.n()];
    op.apply_transpose(v, &mut out);
    Ok(out)
}
