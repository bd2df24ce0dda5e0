//! Constant-preserving, non-energy-increasing post-step filters.
//!
//! Any admissible filter `𝓕` satisfies `𝓕𝟙 = 𝟙` and
//! `diag(𝓟)(𝓕 − I) + (𝓕 − I)ᵀdiag(𝓟) ≤ 0`. Both conditions are checked when
//! a filter is constructed.

use nalgebra::{DMatrix, DVector};

use crate::eigen::{symmetric_eigen, DEFAULT_TOL};
use crate::error::{AleError, Result};
use crate::integrator::Filter;

const CHECK_TOL: f64 = 1e-12;

/// Checks `𝓕𝟙 = 𝟙` and the energy condition for a dense filter matrix.
pub fn validate_filter_matrix(f: &DMatrix<f64>, p: &[f64]) -> Result<()> {
    let n = p.len();
    if f.nrows() != n || f.ncols() != n {
        return Err(AleError::DimensionMismatch {
            expected: n,
            got: f.nrows(),
        });
    }
    let scale = 1.0 + f.amax();
    let ones = f * DVector::from_element(n, 1.0);
    let dev = ones.iter().fold(0.0_f64, |m, v| m.max((v - 1.0).abs()));
    if dev > CHECK_TOL * scale * n as f64 {
        return Err(AleError::InvalidFilter(format!(
            "constants are not preserved (deviation {dev:e})"
        )));
    }
    let s = DMatrix::from_fn(n, n, |i, j| {
        let fij = f[(i, j)] - if i == j { 1.0 } else { 0.0 };
        let fji = f[(j, i)] - if i == j { 1.0 } else { 0.0 };
        p[i] * fij + fji * p[j]
    });
    let eigs = symmetric_eigen(&s, DEFAULT_TOL)?;
    let norm = eigs.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    let top = *eigs.last().unwrap_or(&0.0);
    if top > CHECK_TOL * norm.max(f64::MIN_POSITIVE) {
        return Err(AleError::InvalidFilter(format!(
            "filter increases energy (largest eigenvalue {top:e})"
        )));
    }
    Ok(())
}

/// A validated dense filter.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFilter {
    f: DMatrix<f64>,
}

impl MatrixFilter {
    pub fn new(f: DMatrix<f64>, p: &[f64]) -> Result<Self> {
        validate_filter_matrix(&f, p)?;
        Ok(Self { f })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            f: DMatrix::identity(n, n),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.f
    }
}

impl Filter for MatrixFilter {
    fn apply(&self, u: &mut [f64]) {
        let v = &self.f * DVector::from_column_slice(u);
        u.copy_from_slice(v.as_slice());
    }
}

/// `𝓕 = I − (σ/4ᵏ) diag(w)⁻¹AᵀA` on each block, where `A` is the `k`-th
/// undivided difference and `w` the block's quadrature weights in units of
/// the spacing.
///
/// Scaling the weights by the block spacing leaves `𝓕` unchanged and keeps
/// `diag(𝓟)(𝓕 − I) = −(σh/4ᵏ)AᵀA` symmetric negative semidefinite, so the
/// energy condition holds for every mesh of the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceFilter {
    order: usize,
    sigma: f64,
    blocks: Vec<(usize, Vec<f64>)>,
    binom: Vec<f64>,
}

impl DifferenceFilter {
    /// `blocks` lists each block's first global index and its dimensionless
    /// weights.
    pub fn new(order: usize, sigma: f64, blocks: Vec<(usize, Vec<f64>)>) -> Result<Self> {
        if order == 0 {
            return Err(AleError::InvalidFilter("difference order must be positive".into()));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(AleError::InvalidFilter(format!("strength must be non-negative, got {sigma}")));
        }
        for (_, w) in &blocks {
            if w.len() <= order {
                return Err(AleError::InvalidFilter(format!(
                    "block of {} nodes is too small for order {order}",
                    w.len()
                )));
            }
            if w.iter().any(|v| !(*v > 0.0)) {
                return Err(AleError::InvalidFilter("weights must be positive".into()));
            }
        }
        let mut binom = vec![1.0; order + 1];
        for j in 1..=order {
            binom[j] = binom[j - 1] * (order + 1 - j) as f64 / j as f64;
        }
        for (j, b) in binom.iter_mut().enumerate() {
            if (order - j) % 2 == 1 {
                *b = -*b;
            }
        }
        let filter = Self {
            order,
            sigma,
            blocks,
            binom,
        };
        let n = filter.len();
        let p: Vec<f64> = {
            let mut p = vec![1.0; n];
            for (off, w) in &filter.blocks {
                p[*off..*off + w.len()].copy_from_slice(w);
            }
            p
        };
        validate_filter_matrix(&filter.to_dense(), &p)?;
        Ok(filter)
    }

    fn len(&self) -> usize {
        self.blocks
            .iter()
            .map(|(off, w)| off + w.len())
            .max()
            .unwrap_or(0)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut f = DMatrix::identity(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.apply(&mut e);
            for i in 0..n {
                f[(i, j)] = e[i];
            }
        }
        f
    }
}

impl Filter for DifferenceFilter {
    fn apply(&self, u: &mut [f64]) {
        if self.sigma == 0.0 {
            return;
        }
        let k = self.order;
        let c = self.sigma / 4f64.powi(k as i32);
        for (off, w) in &self.blocks {
            let nb = w.len();
            let block = &mut u[*off..*off + nb];
            let a: Vec<f64> = (0..nb - k)
                .map(|i| {
                    self.binom
                        .iter()
                        .enumerate()
                        .map(|(j, b)| b * block[i + j])
                        .sum()
                })
                .collect();
            let mut ata = vec![0.0; nb];
            for (i, ai) in a.iter().enumerate() {
                for (j, b) in self.binom.iter().enumerate() {
                    ata[i + j] += b * ai;
                }
            }
            for ((v, r), wi) in block.iter_mut().zip(&ata).zip(w) {
                *v -= c * r / wi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weights(n: usize) -> Vec<f64> {
        let mut w = vec![1.0; n];
        for (i, c) in [17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0].iter().enumerate() {
            w[i] = *c;
            w[n - 1 - i] = *c;
        }
        w
    }

    #[test]
    fn identity_filter_leaves_state() {
        let f = MatrixFilter::identity(4);
        let mut u = vec![1.0, -2.0, 3.5, 0.25];
        let before = u.clone();
        f.apply(&mut u);
        assert_eq!(u, before);
        assert!(MatrixFilter::new(DMatrix::identity(4, 4), &[1.0; 4]).is_ok());
    }

    #[test]
    fn rejects_non_constant_preserving() {
        let f = DMatrix::identity(3, 3) * 0.9;
        assert!(matches!(MatrixFilter::new(f, &[1.0; 3]), Err(AleError::InvalidFilter(_))));
    }

    #[test]
    fn rejects_energy_increasing() {
        // averaging with negative strength sharpens
        let a = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        let f = DMatrix::identity(3, 3) + a * 0.1;
        assert!(matches!(MatrixFilter::new(f, &[1.0; 3]), Err(AleError::InvalidFilter(_))));
    }

    #[test]
    fn difference_filter_conditions() {
        for k in [2, 4, 6] {
            let f = DifferenceFilter::new(k, 0.3, vec![(0, weights(16)), (16, weights(20))]).unwrap();
            let d = f.to_dense();
            let mut p = weights(16);
            p.extend(weights(20));
            validate_filter_matrix(&d, &p).unwrap();
            let mut u = vec![-3.7; 36];
            f.apply(&mut u);
            assert!(u.iter().all(|v| (v + 3.7).abs() < 1e-14));
        }
    }

    #[test]
    fn difference_filter_damps_odd_even_mode() {
        let f = DifferenceFilter::new(2, 1.0, vec![(0, vec![1.0; 20])]).unwrap();
        let mut u: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let e0: f64 = u.iter().map(|v| v * v).sum();
        f.apply(&mut u);
        let e1: f64 = u.iter().map(|v| v * v).sum();
        assert!(e1 < e0);
        // interior: (AᵀA)u = 16u for the odd-even mode, damping factor 1 − 16/16
        assert!(u[10].abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DifferenceFilter::new(0, 0.1, vec![(0, vec![1.0; 5])]).is_err());
        assert!(DifferenceFilter::new(2, -0.1, vec![(0, vec![1.0; 5])]).is_err());
        assert!(DifferenceFilter::new(6, 0.1, vec![(0, vec![1.0; 5])]).is_err());
    }
}
