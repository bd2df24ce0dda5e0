//! Semi-boundedness audit of the assembled system matrices.
//!
//! The energy condition in physical variables
//!
//! ```text
//! S = diag(𝓟)𝓜 + 𝓜ᵀdiag(𝓟) + Eᵀdiag(P)diag(NᵀẊ)E − α·diag(𝓟) ≤ 0
//! ```
//!
//! is congruent to the semi-boundedness condition on the reference domain,
//! `Ŝ = diag(𝓟̂)𝓜̂ + 𝓜̂ᵀdiag(𝓟̂) − α·diag(𝓟̂) = diag(√𝓙)⁻¹ S diag(√𝓙)⁻¹`,
//! so the two matrices share their inertia. Here α multiplies `diag(𝓟)` once;
//! a stationary-domain estimate written with `2α` corresponds to passing `2α`.

use std::io::Write;

use nalgebra::DMatrix;

use crate::ale::{AleOperators, SystemMatrices};
use crate::eigen::{inertia, symmetric_eigen, DEFAULT_TOL};
use crate::error::Result;

/// Relative threshold for a non-positive largest eigenvalue.
pub const PASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub t: f64,
    pub alpha: f64,
    pub lambda_max_energy: f64,
    pub lambda_max_ref: f64,
    /// Spectral norm of `S`.
    pub norm_energy: f64,
    /// Spectral norm of `Ŝ`.
    pub norm_ref: f64,
    pub inertia_energy: (usize, usize, usize),
    pub inertia_ref: (usize, usize, usize),
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.lambda_max_energy <= PASS_TOL * self.norm_energy
    }

    pub fn inertia_match(&self) -> bool {
        self.inertia_energy == self.inertia_ref
    }
}

fn scale_rows_cols(m: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| w[i] * m[(i, j)] * w[j])
}

fn weighted_symmetric(m: &DMatrix<f64>, p: &[f64]) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| p[i] * m[(i, j)] + m[(j, i)] * p[j])
}

/// `S` of the energy condition.
pub fn energy_matrix(system: &SystemMatrices, ale: &AleOperators, alpha: f64) -> DMatrix<f64> {
    let p = ale.p();
    let mut s = weighted_symmetric(&system.m, &p);
    for i in 0..p.len() {
        s[(i, i)] += ale.surface_flux[i] - alpha * p[i];
    }
    s
}

/// `Ŝ` of the reference-domain semi-boundedness condition.
pub fn reference_matrix(system: &SystemMatrices, ale: &AleOperators, alpha: f64) -> DMatrix<f64> {
    let mut s = weighted_symmetric(&system.m_hat, &ale.p_ref);
    for (i, p) in ale.p_ref.iter().enumerate() {
        s[(i, i)] -= alpha * p;
    }
    s
}

/// `diag(√𝓙)⁻¹ S diag(√𝓙)⁻¹`.
pub fn congruent_energy_matrix(s: &DMatrix<f64>, jsqrt: &[f64]) -> DMatrix<f64> {
    let inv: Vec<f64> = jsqrt.iter().map(|v| 1.0 / v).collect();
    scale_rows_cols(s, &inv)
}

fn spectrum(s: &DMatrix<f64>) -> Result<(Vec<f64>, f64)> {
    let e = symmetric_eigen(s, DEFAULT_TOL)?;
    let norm = e.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    Ok((e, norm))
}

pub fn audit(t: f64, system: &SystemMatrices, ale: &AleOperators, alpha: f64) -> Result<AuditReport> {
    let (e, ne) = spectrum(&energy_matrix(system, ale, alpha))?;
    let (r, nr) = spectrum(&reference_matrix(system, ale, alpha))?;
    Ok(AuditReport {
        t,
        alpha,
        lambda_max_energy: *e.last().unwrap_or(&0.0),
        lambda_max_ref: *r.last().unwrap_or(&0.0),
        norm_energy: ne,
        norm_ref: nr,
        inertia_energy: inertia(&e, PASS_TOL * ne),
        inertia_ref: inertia(&r, PASS_TOL * nr),
    })
}

/// True when `S` and `Ŝ` have the same inertia.
pub fn inertia_equivalence(system: &SystemMatrices, ale: &AleOperators, alpha: f64) -> Result<bool> {
    Ok(audit(f64::NAN, system, ale, alpha)?.inertia_match())
}

/// CSV rows `t,lambda_max_energy,lambda_max_ref,pass`.
pub fn write_audit_csv<W: Write>(reports: &[AuditReport], mut w: W) -> Result<()> {
    writeln!(w, "t,lambda_max_energy,lambda_max_ref,pass")?;
    for r in reports {
        writeln!(
            w,
            "{:.12},{:.6e},{:.6e},{}",
            r.t,
            r.lambda_max_energy,
            r.lambda_max_ref,
            if r.pass() && r.inertia_match() { "PASS" } else { "FAIL" }
        )?;
    }
    Ok(())
}
