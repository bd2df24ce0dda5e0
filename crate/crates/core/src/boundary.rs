//! Boundary operators imposed weakly through a lifting operator, and the
//! discrete energy functional.
//!
//! For the advection-diffusion model `u_t = εu_xx − u_x + F` the left end
//! carries the characteristic inflow condition `εu_x − (1 − ẋ_s)u = g_s` and
//! the right end the Dirichlet condition `u = g_e`:
//!
//! ```text
//! B = [ εE_sD − (1 − ẋ_s)E_s ]      δ = [ E_s                      ]
//!     [ E_e                  ]          [ −εE_eD + ½(1 − ẋ_e)E_e  ]
//! ```
//!
//! The sign of the `E_eD` term in `δ` and the factor `½(1 − ẋ_e)` follow
//! the advection speed 1 of the model; with speed `a` the Dirichlet lifting
//! reads `½(a − ẋ_e)E_e − εE_eD`.

use nalgebra::{DMatrix, DVector};

use crate::error::{AleError, Result};
use crate::sbp::SbpDerivative;

/// `B`, `δ` (both `n_S × n_V`) and the boundary data `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryOperators {
    pub b: DMatrix<f64>,
    pub delta: DMatrix<f64>,
    pub g: Vec<f64>,
    pub surface_weights: Vec<f64>,
}

impl BoundaryOperators {
    /// `B·u − g`.
    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        let bu = &self.b * DVector::from_column_slice(u);
        bu.iter().zip(&self.g).map(|(a, g)| a - g).collect()
    }

    /// `𝓛_δ(B·u − g)` added into `out`, using the volume quadrature `p`.
    pub fn add_sat(&self, p: &[f64], u: &[f64], out: &mut [f64]) {
        let r = self.residual(u);
        let n = p.len();
        for (k, rk) in r.iter().enumerate() {
            let scaled = rk * self.surface_weights[k];
            if scaled == 0.0 {
                continue;
            }
            for i in 0..n {
                let d = self.delta[(k, i)];
                if d != 0.0 {
                    out[i] += d * scaled / p[i];
                }
            }
        }
    }

    /// `𝓛_δ·𝓑` as a dense matrix.
    pub fn lifted_matrix(&self, p: &[f64]) -> DMatrix<f64> {
        LiftingOperator::new(&self.delta, p, &self.surface_weights).l * &self.b
    }
}

/// `𝓛_δ = diag(𝓟)⁻¹ δᵀ diag(P_surf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftingOperator {
    pub l: DMatrix<f64>,
}

impl LiftingOperator {
    pub fn new(delta: &DMatrix<f64>, p: &[f64], surface_weights: &[f64]) -> Self {
        let mut l = delta.transpose();
        for (i, pi) in p.iter().enumerate() {
            l.row_mut(i).scale_mut(1.0 / pi);
        }
        for (k, w) in surface_weights.iter().enumerate() {
            l.column_mut(k).scale_mut(*w);
        }
        Self { l }
    }

    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        (&self.l * DVector::from_column_slice(psi)).as_slice().to_vec()
    }
}

/// Applies a lifting operator to surface data.
pub fn lifting_apply(l: &LiftingOperator, psi: &[f64]) -> Vec<f64> {
    l.apply(psi)
}

/// Mesh-velocity values at the two ends needed by the boundary operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndVelocities {
    pub xdot_s: f64,
    pub xdot_e: f64,
}

/// Characteristic inflow at the left end, Dirichlet at the right end.
pub fn make_model_bcs<Op: SbpDerivative + ?Sized>(
    op: &Op,
    epsilon: f64,
    ends: EndVelocities,
    g: [f64; 2],
) -> Result<BoundaryOperators> {
    if ends.xdot_s > 1.0 {
        return Err(AleError::OutflowAtInflowBoundary(ends.xdot_s));
    }
    let n = op.len();
    let d = op.to_dense();
    let mut b = DMatrix::zeros(2, n);
    let mut delta = DMatrix::zeros(2, n);
    for j in 0..n {
        b[(0, j)] = epsilon * d[(0, j)];
        delta[(1, j)] = -epsilon * d[(n - 1, j)];
    }
    b[(0, 0)] -= 1.0 - ends.xdot_s;
    b[(1, n - 1)] = 1.0;
    delta[(0, 0)] = 1.0;
    delta[(1, n - 1)] += 0.5 * (1.0 - ends.xdot_e);
    Ok(BoundaryOperators {
        b,
        delta,
        g: g.to_vec(),
        surface_weights: op.surface().weights,
    })
}

/// `𝓔 = (Φ, 𝓓Φ)_𝓟 + (δΦ, BΦ)_P + ½(Φ_surf, diag(NᵀẊ)Φ_surf)_P`.
///
/// `surface_flux` is the n-vector diagonal of `Eᵀ diag(P_surf) diag(NᵀẊ) E`.
pub fn energy_functional(
    d: &DMatrix<f64>,
    bcs: &BoundaryOperators,
    p: &[f64],
    surface_flux: &[f64],
    phi: &[f64],
) -> f64 {
    let v = DVector::from_column_slice(phi);
    let dphi = d * &v;
    let volume: f64 = (0..phi.len()).map(|i| phi[i] * p[i] * dphi[i]).sum();
    let dl = &bcs.delta * &v;
    let bl = &bcs.b * &v;
    let surface: f64 = (0..dl.len())
        .map(|k| dl[k] * bcs.surface_weights[k] * bl[k])
        .sum();
    let flux: f64 = phi
        .iter()
        .zip(surface_flux)
        .map(|(f, s)| 0.5 * s * f * f)
        .sum();
    volume + surface + flux
}
