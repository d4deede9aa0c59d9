//! Extreme eigenpairs of small symmetric tridiagonal matrices.
//!
//! Eigenvalues come from Sturm-count bisection, eigenvectors from inverse
//! iteration with a pivoted tridiagonal LU, both `O(k)` per call.

pub(crate) struct Tridiagonal<'a> {
    diag: &'a [f64],
    off: &'a [f64],
    pivmin: f64,
}

impl<'a> Tridiagonal<'a> {
    pub fn new(diag: &'a [f64], off: &'a [f64]) -> Self {
        debug_assert!(!diag.is_empty() && off.len() + 1 == diag.len());
        let max_off = off.iter().fold(0.0f64, |m, e| m.max(e * e));
        let pivmin = f64::MIN_POSITIVE * max_off.max(1.0);
        Tridiagonal { diag, off, pivmin }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let k = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..k {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < k { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        let pad = f64::EPSILON * lo.abs().max(hi.abs()) * 4.0 + self.pivmin;
        (lo - pad, hi + pad)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            }
            if q.abs() < self.pivmin {
                q = -self.pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `index`-th smallest eigenvalue (0-based).
    pub fn eigenvalue(&self, index: usize) -> f64 {
        if self.diag.iter().chain(self.off).all(|&x| x == 0.0) {
            return 0.0;
        }
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..256 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + self.pivmin {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalue(self.len() - 1)
    }

    pub fn smallest(&self) -> f64 {
        self.eigenvalue(0)
    }

    /// Unit eigenvector for the (accurately known) eigenvalue `theta`.
    pub fn eigenvector(&self, theta: f64) -> Vec<f64> {
        let k = self.len();
        if k == 1 {
            return vec![1.0];
        }
        let scale = self
            .diag
            .iter()
            .chain(self.off)
            .fold(theta.abs(), |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        let lu = ShiftedLu::factor(self.diag, self.off, theta, (f64::EPSILON * scale).max(f64::MIN_POSITIVE));
        // Irregular start so it is not orthogonal to the wanted vector by symmetry.
        let mut y: Vec<f64> = (0..k).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_7).sin()).collect();
        normalize(&mut y);
        for _ in 0..3 {
            let mut next = y.clone();
            lu.solve(&mut next);
            if !normalize(&mut next) {
                break;
            }
            y = next;
        }
        y
    }
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        v.iter_mut().for_each(|x| *x /= norm);
        true
    } else {
        false
    }
}

/// Partially pivoted LU of `T - θI` in the layout of LAPACK `dgttrf`.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(diag: &[f64], off: &[f64], theta: f64, tiny: f64) -> Self {
        let k = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|a| a - theta).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; k.saturating_sub(2)];
        let mut swapped = vec![false; k.saturating_sub(1)];
        for i in 0..k - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 1 < k - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        for x in d.iter_mut() {
            if x.abs() < tiny {
                *x = if *x < 0.0 { -tiny } else { tiny };
            }
        }
        ShiftedLu { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let k = self.d.len();
        for i in 0..k - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[k - 1] /= self.d[k - 1];
        if k > 1 {
            b[k - 2] = (b[k - 2] - self.du[k - 2] * b[k - 1]) / self.d[k - 2];
        }
        for i in (0..k.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}
