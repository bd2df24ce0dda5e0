//! Discrete ALE machinery: the skew-symmetric material-derivative operator
//! `D_m`, the mesh-velocity divergence, the square-root Jacobian ODE and the
//! variable-substituted system matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{AleError, Result};
use crate::sbp::SbpDerivative;

/// Smallest admissible Jacobian entry before the mesh is declared degenerate.
pub const JACOBIAN_FLOOR: f64 = 1e-8;

/// Which divergence vector enters the split time derivative and the
/// Jacobian ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DivergenceMode {
    /// `D·Ẋ`, the choice required for free-stream preservation.
    #[default]
    Discrete,
    /// Analytic values supplied by the motion.
    Exact,
}

/// `D_m = ½(diag(Ẋ)D + D diag(Ẋ))` as a dense matrix.
pub fn build_dm<Op: SbpDerivative + ?Sized>(op: &Op, xdot: &[f64]) -> DMatrix<f64> {
    let d = op.to_dense();
    let n = op.len();
    DMatrix::from_fn(n, n, |i, j| 0.5 * (xdot[i] + xdot[j]) * d[(i, j)])
}

/// `out = D_m·u` without forming the matrix. `scratch` must have length n.
pub fn apply_dm<Op: SbpDerivative + ?Sized>(
    op: &Op,
    xdot: &[f64],
    u: &[f64],
    du: &[f64],
    scratch: &mut [f64],
    out: &mut [f64],
) {
    // du = D u is supplied by the caller, who usually needs it anyway.
    for ((s, x), v) in scratch.iter_mut().zip(xdot).zip(u) {
        *s = x * v;
    }
    op.apply_into(scratch, out);
    for ((o, x), d) in out.iter_mut().zip(xdot).zip(du) {
        *o = 0.5 * (*o + x * d);
    }
}

/// `∇·Ẋ = D·Ẋ`.
pub fn divergence_discrete<Op: SbpDerivative + ?Sized>(op: &Op, xdot: &[f64]) -> Vec<f64> {
    op.apply(xdot)
}

/// Right-hand side `½ diag(∇·Ẋ) √𝓙` of the square-root Jacobian ODE.
pub fn jacobian_rhs(div_x: &[f64], jsqrt: &[f64]) -> Result<Vec<f64>> {
    check_positive(jsqrt, f64::NAN)?;
    Ok(div_x.iter().zip(jsqrt).map(|(d, j)| 0.5 * d * j).collect())
}

/// Errors if any entry of `jsqrt` is at or below the degeneracy floor.
pub fn check_positive(jsqrt: &[f64], t: f64) -> Result<()> {
    match jsqrt
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0 && v.powi(2) > JACOBIAN_FLOOR))
    {
        Some((node, v)) => Err(AleError::DegenerateMesh {
            t,
            node,
            value: v * v,
        }),
        None => Ok(()),
    }
}

/// Snapshot of the ALE operators at one instant.
#[derive(Debug, Clone)]
pub struct AleOperators {
    pub dm: DMatrix<f64>,
    pub div_x: Vec<f64>,
    pub jsqrt: Vec<f64>,
    /// Reference quadrature `𝓟̂`, with `𝓟 = diag(𝓙)𝓟̂`.
    pub p_ref: Vec<f64>,
    /// Diagonal of `Eᵀ diag(P_surf) diag(NᵀẊ) E`.
    pub surface_flux: Vec<f64>,
}

impl AleOperators {
    /// Builds the snapshot from the instantaneous physical operator. The
    /// reference quadrature is `P / 𝓙`.
    pub fn new<Op: SbpDerivative + ?Sized>(
        op: &Op,
        xdot: &[f64],
        jsqrt: Vec<f64>,
        div_mode: DivergenceMode,
        exact_div: Option<&[f64]>,
    ) -> Result<Self> {
        check_positive(&jsqrt, f64::NAN)?;
        let div_x = match (div_mode, exact_div) {
            (DivergenceMode::Exact, Some(d)) => d.to_vec(),
            (DivergenceMode::Exact, None) => {
                return Err(AleError::Config(
                    "exact divergence mode needs analytic values".into(),
                ))
            }
            (DivergenceMode::Discrete, _) => divergence_discrete(op, xdot),
        };
        let p_ref = op
            .quadrature()
            .iter()
            .zip(&jsqrt)
            .map(|(p, j)| p / (j * j))
            .collect();
        Ok(Self {
            dm: build_dm(op, xdot),
            div_x,
            jsqrt,
            p_ref,
            surface_flux: surface_flux(op, xdot),
        })
    }

    pub fn jacobian(&self) -> Vec<f64> {
        self.jsqrt.iter().map(|s| s * s).collect()
    }

    /// Physical quadrature `𝓟 = diag(𝓙)𝓟̂`.
    pub fn p(&self) -> Vec<f64> {
        self.p_ref
            .iter()
            .zip(&self.jsqrt)
            .map(|(p, s)| p * s * s)
            .collect()
    }
}

/// Diagonal of `Eᵀ diag(P_surf) diag(NᵀẊ) E` for an operator's surface.
pub fn surface_flux<Op: SbpDerivative + ?Sized>(op: &Op, xdot: &[f64]) -> Vec<f64> {
    let s = op.surface();
    let xs = s.restriction.restrict(xdot);
    let w: Vec<f64> = s
        .weights
        .iter()
        .zip(&s.normals)
        .zip(&xs)
        .map(|((p, n), x)| p * n * x)
        .collect();
    s.restriction.extend(&w)
}

/// Physical and reference-variable system matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub m: DMatrix<f64>,
    pub m_hat: DMatrix<f64>,
}

/// `𝓜̂ = diag(√𝓙)(𝓜 + D_m)diag(√𝓙)⁻¹`.
pub fn assemble(m: DMatrix<f64>, dm: &DMatrix<f64>, jsqrt: &[f64]) -> Result<SystemMatrices> {
    check_positive(jsqrt, f64::NAN)?;
    let n = m.nrows();
    if dm.nrows() != n || jsqrt.len() != n {
        return Err(AleError::DimensionMismatch {
            expected: n,
            got: jsqrt.len().min(dm.nrows()),
        });
    }
    let m_hat = DMatrix::from_fn(n, n, |i, j| jsqrt[i] * (m[(i, j)] + dm[(i, j)]) / jsqrt[j]);
    Ok(SystemMatrices { m, m_hat })
}

/// `max |diag(𝓟)D_m + D_mᵀdiag(𝓟) − Eᵀdiag(P_surf)diag(NᵀẊ)E|`.
pub fn reynolds_identity_residual<Op: SbpDerivative + ?Sized>(op: &Op, xdot: &[f64]) -> f64 {
    let dm = build_dm(op, xdot);
    let p = DVector::from_column_slice(op.quadrature());
    let pdm = DMatrix::from_diagonal(&p) * &dm;
    let flux = DMatrix::from_diagonal(&surface_flux(op, xdot).into());
    let r = &pdm + pdm.transpose() - flux;
    r.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
