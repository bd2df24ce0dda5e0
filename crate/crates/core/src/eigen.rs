//! Cyclic Jacobi eigenvalue solver for small dense symmetric matrices.

use nalgebra::DMatrix;

use crate::error::{AleError, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix, ascending.
///
/// Runs threshold cyclic Jacobi sweeps until the off-diagonal Frobenius norm
/// drops below `tol·‖S‖_F`.
pub fn symmetric_eigen(s: &DMatrix<f64>, tol: f64) -> Result<Vec<f64>> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(AleError::DimensionMismatch {
            expected: n,
            got: s.ncols(),
        });
    }
    let scale = s.amax();
    let asym = (s - s.transpose()).amax();
    if asym > 1e-12 * scale {
        return Err(AleError::NotSymmetric {
            asymmetry: asym,
            scale,
        });
    }
    // symmetrize away rounding-level asymmetry
    let mut a = (s + s.transpose()) * 0.5;
    let frob = a.norm();
    if frob == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let target = tol * frob;

    for sweep in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= target {
            return Ok(sorted_diagonal(&a));
        }
        // skip rotations on negligible entries during the first sweeps
        let threshold = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= threshold || apq == 0.0 {
                    continue;
                }
                rotate(&mut a, p, q);
            }
        }
    }
    let off = off_diagonal_norm(&a);
    if off <= target {
        Ok(sorted_diagonal(&a))
    } else {
        Err(AleError::EigenNoConvergence {
            sweeps: MAX_SWEEPS,
            off,
        })
    }
}

/// Annihilates `a[(p, q)]` with a plane rotation applied from both sides.
fn rotate(a: &mut DMatrix<f64>, p: usize, q: usize) {
    let n = a.nrows();
    let apq = a[(p, q)];
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_rp = arp - s * (arq + tau * arp);
        let new_rq = arq + s * (arp - tau * arq);
        a[(r, p)] = new_rp;
        a[(p, r)] = new_rp;
        a[(r, q)] = new_rq;
        a[(q, r)] = new_rq;
    }
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

fn sorted_diagonal(a: &DMatrix<f64>) -> Vec<f64> {
    let mut d: Vec<f64> = (0..a.nrows()).map(|i| a[(i, i)]).collect();
    d.sort_by(|x, y| x.total_cmp(y));
    d
}

/// Counts of (negative, zero, positive) eigenvalues, with `|λ| ≤ zero_tol`
/// counted as zero.
pub fn inertia(eigenvalues: &[f64], zero_tol: f64) -> (usize, usize, usize) {
    eigenvalues.iter().fold((0, 0, 0), |(neg, zero, pos), &l| {
        if l < -zero_tol {
            (neg + 1, zero, pos)
        } else if l > zero_tol {
            (neg, zero, pos + 1)
        } else {
            (neg, zero + 1, pos)
        }
    })
}
