//! Lanczos and Golub–Kahan iterations with full reorthogonalisation.

use super::fft::ToeplitzOperator;
use super::tridiag::Tridiagonal;
use super::{EstimateMethod, SpectralEstimate};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

/// Two passes of classical Gram–Schmidt against every stored basis vector.
fn reorthogonalize(basis: &[Vec<f64>], w: &mut [f64]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

fn combine(basis: &[Vec<f64>], coeffs: impl Iterator<Item = f64>, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (q, c) in basis.iter().zip(coeffs) {
        axpy(c, q, &mut out);
    }
    out
}

pub(crate) struct KrylovOutcome {
    pub estimate: SpectralEstimate,
    pub converged: bool,
}

fn accept(value: f64, residual: f64, tol: f64) -> bool {
    residual <= tol * value || residual <= f64::EPSILON * f64::MIN_POSITIVE.max(value)
}

/// Explicit residual `‖M x - θ x‖` of the Ritz pair for eigenvalue `theta`
/// of `T_k`, with `x = Q y`.
fn ritz_residual(
    op: &ToeplitzOperator,
    basis: &[Vec<f64>],
    t: &Tridiagonal<'_>,
    theta: f64,
    scratch: &mut [f64],
) -> f64 {
    let n = op.dim();
    let y = t.eigenvector(theta);
    let mut x = combine(basis, y.into_iter(), n);
    let xn = norm(&x);
    if xn == 0.0 {
        return 0.0;
    }
    x.iter_mut().for_each(|v| *v /= xn);
    op.apply(&x, scratch);
    scratch.iter().zip(&x).map(|(mx, x)| (mx - theta * x).powi(2)).sum::<f64>().sqrt()
}

/// Symmetric Lanczos tracking both ends of the Ritz spectrum.
pub(crate) fn lanczos(op: &ToeplitzOperator, probe: Vec<f64>, tol: f64, max_iter: usize) -> KrylovOutcome {
    let n = op.dim();
    let kmax = max_iter.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = vec![probe];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut matvecs = 0;
    let mut scale = 0.0f64;

    loop {
        let k = basis.len();
        let q = &basis[k - 1];
        op.apply(q, &mut w);
        matvecs += 1;
        let alpha = dot(&w, q);
        axpy(-alpha, q, &mut w);
        if k >= 2 {
            axpy(-betas[k - 2], &basis[k - 2], &mut w);
        }
        reorthogonalize(&basis, &mut w);
        let beta = norm(&w);
        alphas.push(alpha);
        scale = scale.max(alpha.abs()).max(beta);

        let t = Tridiagonal::new(&alphas, &betas);
        let top = t.largest();
        let bottom = t.smallest();
        let value = top.abs().max(bottom.abs());
        let last = |theta: f64| t.eigenvector(theta).last().copied().unwrap_or(0.0).abs();
        let est_res = beta * last(top).max(last(bottom));

        let breakdown = beta <= 1e-13 * scale || scale == 0.0;
        let exhausted = k >= kmax;
        if accept(value, est_res, tol) || breakdown || exhausted {
            // Certify with explicit residuals of both end Ritz pairs.
            let r_top = ritz_residual(op, &basis, &t, top, &mut scratch);
            let r_bottom = ritz_residual(op, &basis, &t, bottom, &mut scratch);
            matvecs += 2;
            let residual = r_top.max(r_bottom);
            let converged = accept(value, residual, tol);
            if converged || breakdown || exhausted {
                return KrylovOutcome {
                    estimate: SpectralEstimate {
                        value,
                        method: EstimateMethod::Lanczos,
                        residual,
                        iterations: k,
                        matvecs,
                    },
                    converged,
                };
            }
        }

        w.iter_mut().for_each(|x| *x /= beta);
        betas.push(beta);
        basis.push(std::mem::replace(&mut w, vec![0.0; n]));
    }
}

/// Golub–Kahan bidiagonalisation for the largest singular value.
///
/// The bidiagonal `B_k` (diagonal `α`, superdiagonal `β`) is handled through
/// the zero-diagonal tridiagonal with off-diagonal `α₁, β₁, α₂, …, α_k`, the
/// perfect shuffle of `[[0, B_kᵀ], [B_k, 0]]`, whose eigenvalues are `±σ_i`.
pub(crate) fn golub_kahan(op: &ToeplitzOperator, probe: Vec<f64>, tol: f64, max_iter: usize) -> KrylovOutcome {
    let n = op.dim();
    let kmax = max_iter.min(n).max(1);
    let mut right: Vec<Vec<f64>> = vec![probe];
    let mut left: Vec<Vec<f64>> = Vec::new();
    let mut off: Vec<f64> = Vec::new();
    let mut p = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut matvecs = 0;
    let mut scale = 0.0f64;

    op.apply(&right[0], &mut p);
    matvecs += 1;

    loop {
        let k = right.len();
        // p holds A v_k - β_{k-1} u_{k-1}
        reorthogonalize(&left, &mut p);
        let alpha = norm(&p);
        scale = scale.max(alpha);
        off.push(alpha);
        if alpha > 0.0 {
            p.iter_mut().for_each(|x| *x /= alpha);
        }
        left.push(std::mem::replace(&mut p, vec![0.0; n]));

        op.apply_transpose(&left[k - 1], &mut r);
        matvecs += 1;
        axpy(-alpha, &right[k - 1], &mut r);
        reorthogonalize(&right, &mut r);
        let beta = norm(&r);
        scale = scale.max(beta);

        let zeros = vec![0.0; 2 * k];
        let t = Tridiagonal::new(&zeros, &off);
        let sigma = t.largest().max(0.0);
        let z = t.eigenvector(sigma);
        let est_res = beta * std::f64::consts::SQRT_2 * z[2 * k - 1].abs();

        let breakdown = alpha <= 1e-13 * scale || beta <= 1e-13 * scale || scale == 0.0;
        let exhausted = k >= kmax;
        if accept(sigma, est_res, tol) || breakdown || exhausted {
            let residual = singular_residual(op, &right, &left, &z, sigma);
            matvecs += 2;
            let converged = accept(sigma, residual, tol);
            if converged || breakdown || exhausted {
                return KrylovOutcome {
                    estimate: SpectralEstimate {
                        value: sigma,
                        method: EstimateMethod::GolubKahan,
                        residual,
                        iterations: k,
                        matvecs,
                    },
                    converged,
                };
            }
        }

        r.iter_mut().for_each(|x| *x /= beta);
        right.push(std::mem::replace(&mut r, vec![0.0; n]));
        op.apply(&right[k], &mut p);
        matvecs += 1;
        axpy(-beta, &left[k - 1], &mut p);
        off.push(beta);
    }
}

/// `‖S z - σ z‖` for the augmented operator `S = [[0, Aᵀ], [A, 0]]` and the
/// unit Ritz vector `z = (x, u) / √2`.
fn singular_residual(op: &ToeplitzOperator, right: &[Vec<f64>], left: &[Vec<f64>], z: &[f64], sigma: f64) -> f64 {
    let n = op.dim();
    let mut x = combine(right, z.iter().step_by(2).copied(), n);
    let mut u = combine(left, z.iter().skip(1).step_by(2).copied(), n);
    let (xn, un) = (norm(&x), norm(&u));
    if xn == 0.0 || un == 0.0 {
        return 0.0;
    }
    x.iter_mut().for_each(|v| *v /= xn);
    u.iter_mut().for_each(|v| *v /= un);
    let mut ax = vec![0.0; n];
    let mut atu = vec![0.0; n];
    op.apply(&x, &mut ax);
    op.apply_transpose(&u, &mut atu);
    let r1 = ax.iter().zip(&u).map(|(a, u)| (a - sigma * u).powi(2)).sum::<f64>();
    let r2 = atu.iter().zip(&x).map(|(a, x)| (a - sigma * x).powi(2)).sum::<f64>();
    ((r1 + r2) / 2.0).sqrt()
}
