//! Two-dimensional curvilinear machinery on the unit square: tensor-product
//! SBP operators, discrete Jacobian determinants, split-form physical
//! derivative operators and a free-stream demonstration for constant
//! advection on a moving curvilinear grid.
//!
//! Nodes are ordered with `ξ₁` as the slow index, so `D_ξ₁ = D ⊗ I` and
//! `D_ξ₂ = I ⊗ D`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{AleError, Result};
use crate::integrator::{run_with, AleSystem, ButcherTableau, JacobianMode, RunOptions, SolverState};
use crate::sbp::{SbpDerivative, SbpOperator1D, SbpOrder};

/// Time-dependent map from the unit square to physical space.
pub trait Mapping2D: Send + Sync {
    fn name(&self) -> String;

    fn position(&self, xi: [f64; 2], t: f64) -> [f64; 2];

    fn velocity(&self, xi: [f64; 2], t: f64) -> [f64; 2];
}

/// `x = Aξ + b`, fixed in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMapping {
    pub matrix: [[f64; 2]; 2],
    pub shift: [f64; 2],
}

impl AffineMapping {
    pub fn identity() -> Self {
        Self {
            matrix: [[1.0, 0.0], [0.0, 1.0]],
            shift: [0.0, 0.0],
        }
    }

    /// Rotation by `theta` composed with a scaling.
    pub fn rotate_scale(theta: f64, scale: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            matrix: [[scale * c, -scale * s], [scale * s, scale * c]],
            shift: [0.0, 0.0],
        }
    }
}

impl Mapping2D for AffineMapping {
    fn name(&self) -> String {
        "affine".into()
    }

    fn position(&self, xi: [f64; 2], _t: f64) -> [f64; 2] {
        let m = self.matrix;
        [
            m[0][0] * xi[0] + m[0][1] * xi[1] + self.shift[0],
            m[1][0] * xi[0] + m[1][1] * xi[1] + self.shift[1],
        ]
    }

    fn velocity(&self, _xi: [f64; 2], _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }
}

/// `x = (1 + t)ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dilation;

impl Mapping2D for Dilation {
    fn name(&self) -> String {
        "dilation".into()
    }

    fn position(&self, xi: [f64; 2], t: f64) -> [f64; 2] {
        [(1.0 + t) * xi[0], (1.0 + t) * xi[1]]
    }

    fn velocity(&self, xi: [f64; 2], _t: f64) -> [f64; 2] {
        xi
    }
}

/// `x = ξ + vt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Translation {
    pub v: [f64; 2],
}

impl Mapping2D for Translation {
    fn name(&self) -> String {
        "translation".into()
    }

    fn position(&self, xi: [f64; 2], t: f64) -> [f64; 2] {
        [xi[0] + self.v[0] * t, xi[1] + self.v[1] * t]
    }

    fn velocity(&self, _xi: [f64; 2], _t: f64) -> [f64; 2] {
        self.v
    }
}

/// `xᵢ = ξᵢ + aᵢ sin(π(kᵢ₁ξ₁ + kᵢ₂ξ₂)) sin(ωᵢt + φᵢ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigMapping {
    pub amplitude: [f64; 2],
    pub wave: [[f64; 2]; 2],
    pub omega: [f64; 2],
    pub phase: [f64; 2],
}

impl TrigMapping {
    /// `x₁ = ξ₁ + 0.1 sin(πξ₂) sin t`, `x₂ = ξ₂ + 0.1 sin(πξ₁) sin 2t`.
    ///
    /// Every metric term of this map depends on a single reference
    /// coordinate, so both divergence definitions agree on it.
    pub fn separable() -> Self {
        Self {
            amplitude: [0.1, 0.1],
            wave: [[0.0, 1.0], [1.0, 0.0]],
            omega: [1.0, 2.0],
            phase: [0.0, 0.0],
        }
    }

    /// `x₁ = ξ₁ + 0.1 sin(π(ξ₁ + ξ₂)) sin t`, `x₂ = ξ₂ + 0.1 sin(π(ξ₁ − ξ₂)) sin 2t`.
    pub fn wavy() -> Self {
        Self {
            amplitude: [0.1, 0.1],
            wave: [[1.0, 1.0], [1.0, -1.0]],
            omega: [1.0, 2.0],
            phase: [0.0, 0.0],
        }
    }

    fn spatial(&self, i: usize, xi: [f64; 2]) -> f64 {
        (PI * (self.wave[i][0] * xi[0] + self.wave[i][1] * xi[1])).sin()
    }
}

impl Mapping2D for TrigMapping {
    fn name(&self) -> String {
        "wavy".into()
    }

    fn position(&self, xi: [f64; 2], t: f64) -> [f64; 2] {
        let f = |i: usize| xi[i] + self.amplitude[i] * self.spatial(i, xi) * (self.omega[i] * t + self.phase[i]).sin();
        [f(0), f(1)]
    }

    fn velocity(&self, xi: [f64; 2], t: f64) -> [f64; 2] {
        let f = |i: usize| {
            self.amplitude[i] * self.spatial(i, xi) * self.omega[i] * (self.omega[i] * t + self.phase[i]).cos()
        };
        [f(0), f(1)]
    }
}

/// `D_ξ₁ = D ⊗ I`, `D_ξ₂ = I ⊗ D` and `𝓟̂ = P ⊗ P`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorOps2D {
    d1: SbpOperator1D,
    d2: SbpOperator1D,
    p: Vec<f64>,
}

impl TensorOps2D {
    /// `n1 × n2` nodes on the unit square.
    pub fn new(order: SbpOrder, n1: usize, n2: usize) -> Result<Self> {
        let d1 = SbpOperator1D::new(order, n1, 1.0 / (n1 - 1).max(1) as f64)?;
        let d2 = SbpOperator1D::new(order, n2, 1.0 / (n2 - 1).max(1) as f64)?;
        let p = d1
            .quadrature()
            .iter()
            .flat_map(|a| d2.quadrature().iter().map(move |b| a * b))
            .collect();
        Ok(Self { d1, d2, p })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.d1.len(), self.d2.len())
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Reference quadrature `𝓟̂`.
    pub fn quadrature(&self) -> &[f64] {
        &self.p
    }

    /// Reference coordinates `(ξ₁, ξ₂)` of every node.
    pub fn nodes(&self) -> Vec<[f64; 2]> {
        let a = self.d1.nodes();
        let b = self.d2.nodes();
        a.iter().flat_map(|x| b.iter().map(move |y| [*x, *y])).collect()
    }

    pub fn apply_xi1(&self, u: &[f64]) -> Vec<f64> {
        let (n1, n2) = self.shape();
        let mut out = vec![0.0; n1 * n2];
        let mut col = vec![0.0; n1];
        let mut dcol = vec![0.0; n1];
        for j in 0..n2 {
            for i in 0..n1 {
                col[i] = u[i * n2 + j];
            }
            self.d1.apply_into(&col, &mut dcol);
            for i in 0..n1 {
                out[i * n2 + j] = dcol[i];
            }
        }
        out
    }

    pub fn apply_xi2(&self, u: &[f64]) -> Vec<f64> {
        let (n1, n2) = self.shape();
        let mut out = vec![0.0; n1 * n2];
        for i in 0..n1 {
            self.d2
                .apply_into(&u[i * n2..(i + 1) * n2], &mut out[i * n2..(i + 1) * n2]);
        }
        out
    }

    pub fn dense_xi1(&self) -> DMatrix<f64> {
        self.d1.to_dense().kronecker(&DMatrix::identity(self.d2.len(), self.d2.len()))
    }

    pub fn dense_xi2(&self) -> DMatrix<f64> {
        DMatrix::identity(self.d1.len(), self.d1.len()).kronecker(&self.d2.to_dense())
    }

    /// Diagonals of `Q_ξ₁ + Q_ξ₁ᵀ` and `Q_ξ₂ + Q_ξ₂ᵀ`.
    pub fn boundary_diagonals(&self) -> [Vec<f64>; 2] {
        let (n1, n2) = self.shape();
        let p1 = self.d1.quadrature();
        let p2 = self.d2.quadrature();
        let sign = |k: usize, n: usize| {
            if k == n - 1 {
                1.0
            } else if k == 0 {
                -1.0
            } else {
                0.0
            }
        };
        let mut b1 = vec![0.0; n1 * n2];
        let mut b2 = vec![0.0; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                b1[i * n2 + j] = sign(i, n1) * p2[j];
                b2[i * n2 + j] = p1[i] * sign(j, n2);
            }
        }
        [b1, b2]
    }

    /// Nodal coordinates `(X₁, X₂)` of a mapping at time `t`.
    pub fn coordinates(&self, mapping: &dyn Mapping2D, t: f64) -> [Vec<f64>; 2] {
        let (x1, x2) = self.nodes().iter().map(|xi| mapping.position(*xi, t)).map(|p| (p[0], p[1])).unzip();
        [x1, x2]
    }

    /// Nodal velocities `(Ẋ₁, Ẋ₂)` at time `t`.
    pub fn velocities(&self, mapping: &dyn Mapping2D, t: f64) -> [Vec<f64>; 2] {
        let (v1, v2) = self.nodes().iter().map(|xi| mapping.velocity(*xi, t)).map(|p| (p[0], p[1])).unzip();
        [v1, v2]
    }

    /// Discrete metric terms of nodal coordinates.
    pub fn metrics(&self, x: &[Vec<f64>; 2]) -> Metrics {
        Metrics {
            x1_xi1: self.apply_xi1(&x[0]),
            x1_xi2: self.apply_xi2(&x[0]),
            x2_xi1: self.apply_xi1(&x[1]),
            x2_xi2: self.apply_xi2(&x[1]),
        }
    }
}

/// `D_ξⱼXᵢ` at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub x1_xi1: Vec<f64>,
    pub x1_xi2: Vec<f64>,
    pub x2_xi1: Vec<f64>,
    pub x2_xi2: Vec<f64>,
}

impl Metrics {
    /// `(D_ξ₁X₁)(D_ξ₂X₂) − (D_ξ₂X₁)(D_ξ₁X₂)`.
    pub fn jacobian(&self) -> Vec<f64> {
        (0..self.x1_xi1.len())
            .map(|k| self.x1_xi1[k] * self.x2_xi2[k] - self.x1_xi2[k] * self.x2_xi1[k])
            .collect()
    }
}

fn check_jacobian(j: &[f64], t: f64) -> Result<()> {
    match j.iter().position(|v| !(*v > 0.0)) {
        Some(node) => Err(AleError::DegenerateMesh {
            t,
            node,
            value: j[node],
        }),
        None => Ok(()),
    }
}

/// Product-formula Jacobian determinant.
pub fn jacobian_discrete(ops: &TensorOps2D, mapping: &dyn Mapping2D, t: f64) -> Result<Vec<f64>> {
    let j = ops.metrics(&ops.coordinates(mapping, t)).jacobian();
    check_jacobian(&j, t)?;
    Ok(j)
}

/// `𝓙⁻¹ d𝓙/dt` for the product-formula Jacobian.
pub fn divergence_from_jacobian(ops: &TensorOps2D, mapping: &dyn Mapping2D, t: f64) -> Result<Vec<f64>> {
    let m = ops.metrics(&ops.coordinates(mapping, t));
    let j = m.jacobian();
    check_jacobian(&j, t)?;
    let v = ops.velocities(mapping, t);
    let v1_xi1 = ops.apply_xi1(&v[0]);
    let v1_xi2 = ops.apply_xi2(&v[0]);
    let v2_xi1 = ops.apply_xi1(&v[1]);
    let v2_xi2 = ops.apply_xi2(&v[1]);
    Ok((0..j.len())
        .map(|k| {
            (v1_xi1[k] * m.x2_xi2[k] + m.x1_xi1[k] * v2_xi2[k]
                - v1_xi2[k] * m.x2_xi1[k]
                - m.x1_xi2[k] * v2_xi1[k])
                / j[k]
        })
        .collect())
}

/// Split-form physical derivative operators `D_x₁`, `D_x₂` with the
/// Jacobian prefactor `𝓙⁻¹`.
#[derive(Debug, Clone)]
pub struct PhysicalOps<'a> {
    ops: &'a TensorOps2D,
    metrics: Metrics,
    jacobian: Vec<f64>,
}

impl<'a> PhysicalOps<'a> {
    /// Operators with an explicitly supplied `𝓙`.
    pub fn with_jacobian(ops: &'a TensorOps2D, metrics: Metrics, jacobian: Vec<f64>, t: f64) -> Result<Self> {
        check_jacobian(&jacobian, t)?;
        Ok(Self {
            ops,
            metrics,
            jacobian,
        })
    }

    pub fn jacobian(&self) -> &[f64] {
        &self.jacobian
    }

    fn split(&self, u: &[f64], first: (&[f64], bool), second: (&[f64], bool)) -> Vec<f64> {
        // ½𝓙⁻¹[D_a(c u) + c D_a u − D_b(d u) − d D_b u]
        let apply = |xi1: bool, v: &[f64]| {
            if xi1 {
                self.ops.apply_xi1(v)
            } else {
                self.ops.apply_xi2(v)
            }
        };
        let (c, a_is_1) = first;
        let (d, b_is_1) = second;
        let cu: Vec<f64> = c.iter().zip(u).map(|(x, y)| x * y).collect();
        let du: Vec<f64> = d.iter().zip(u).map(|(x, y)| x * y).collect();
        let t1 = apply(a_is_1, &cu);
        let t2 = apply(a_is_1, u);
        let t3 = apply(b_is_1, &du);
        let t4 = apply(b_is_1, u);
        (0..u.len())
            .map(|k| 0.5 * (t1[k] + c[k] * t2[k] - t3[k] - d[k] * t4[k]) / self.jacobian[k])
            .collect()
    }

    pub fn apply_x1(&self, u: &[f64]) -> Vec<f64> {
        self.split(u, (&self.metrics.x2_xi2, true), (&self.metrics.x2_xi1, false))
    }

    pub fn apply_x2(&self, u: &[f64]) -> Vec<f64> {
        self.split(u, (&self.metrics.x1_xi1, false), (&self.metrics.x1_xi2, true))
    }

    pub fn dense(&self) -> [DMatrix<f64>; 2] {
        let n = self.jacobian.len();
        let mut a = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let c1 = self.apply_x1(&e);
            let c2 = self.apply_x2(&e);
            for i in 0..n {
                a[(i, j)] = c1[i];
                b[(i, j)] = c2[i];
            }
            e[j] = 0.0;
        }
        [a, b]
    }

    /// `D_x₁Ẋ₁ + D_x₂Ẋ₂`.
    pub fn divergence(&self, v: &[Vec<f64>; 2]) -> Vec<f64> {
        let a = self.apply_x1(&v[0]);
        let b = self.apply_x2(&v[1]);
        a.iter().zip(&b).map(|(x, y)| x + y).collect()
    }

    /// Diagonals of `𝓟D_xᵢ + (𝓟D_xᵢ)ᵀ`, independent of `𝓙`.
    pub fn boundary_diagonals(&self) -> [Vec<f64>; 2] {
        let [b1, b2] = self.ops.boundary_diagonals();
        let m = &self.metrics;
        let n = b1.len();
        [
            (0..n).map(|k| b1[k] * m.x2_xi2[k] - b2[k] * m.x2_xi1[k]).collect(),
            (0..n).map(|k| b2[k] * m.x1_xi1[k] - b1[k] * m.x1_xi2[k]).collect(),
        ]
    }
}

/// Physical operators with the product-formula Jacobian.
pub fn physical_ops<'a>(ops: &'a TensorOps2D, mapping: &dyn Mapping2D, t: f64) -> Result<PhysicalOps<'a>> {
    let m = ops.metrics(&ops.coordinates(mapping, t));
    let j = m.jacobian();
    PhysicalOps::with_jacobian(ops, m, j, t)
}

/// `u_t + a·∇u = 0` on a moving curvilinear grid with characteristic SATs
/// imposing `u = g` wherever `(a − ẋ)·n < 0`. `𝓙` comes from the stage
/// values of the discrete GCL ODE, with the divergence `D_x₁Ẋ₁ + D_x₂Ẋ₂`.
pub struct Advection2D {
    ops: TensorOps2D,
    mapping: Box<dyn Mapping2D>,
    pub speed: [f64; 2],
    pub boundary_value: f64,
}

impl Advection2D {
    pub fn new(ops: TensorOps2D, mapping: Box<dyn Mapping2D>, speed: [f64; 2], boundary_value: f64) -> Self {
        Self {
            ops,
            mapping,
            speed,
            boundary_value,
        }
    }

    pub fn ops(&self) -> &TensorOps2D {
        &self.ops
    }

    fn physical(&self, t: f64, jsqrt: &[f64]) -> Result<PhysicalOps<'_>> {
        let m = self.ops.metrics(&self.ops.coordinates(self.mapping.as_ref(), t));
        PhysicalOps::with_jacobian(&self.ops, m, jsqrt.iter().map(|s| s * s).collect(), t)
    }
}

impl AleSystem for Advection2D {
    fn len(&self) -> usize {
        self.ops.len()
    }

    fn divergence(&self, t: f64, jsqrt: &[f64]) -> Vec<f64> {
        match self.physical(t, jsqrt) {
            Ok(px) => px.divergence(&self.ops.velocities(self.mapping.as_ref(), t)),
            Err(_) => vec![f64::NAN; self.len()],
        }
    }

    fn rhs(&self, t: f64, jsqrt: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let px = self.physical(t, jsqrt)?;
        let v = self.ops.velocities(self.mapping.as_ref(), t);
        let n = u.len();
        let ux1 = px.apply_x1(u);
        let ux2 = px.apply_x2(u);
        let v1u: Vec<f64> = v[0].iter().zip(u).map(|(a, b)| a * b).collect();
        let v2u: Vec<f64> = v[1].iter().zip(u).map(|(a, b)| a * b).collect();
        let d1 = px.apply_x1(&v1u);
        let d2 = px.apply_x2(&v2u);
        let [c1, c2] = px.boundary_diagonals();
        let p = self.ops.quadrature();
        for k in 0..n {
            let dm = 0.5 * (v[0][k] * ux1[k] + d1[k] + v[1][k] * ux2[k] + d2[k]);
            let w = (self.speed[0] - v[0][k]) * c1[k] + (self.speed[1] - v[1][k]) * c2[k];
            let sat = w.min(0.0) * (u[k] - self.boundary_value) / (p[k] * px.jacobian[k]);
            out[k] = -self.speed[0] * ux1[k] - self.speed[1] * ux2[k] + dm + sat;
        }
        Ok(())
    }
}

/// Largest `‖U − u_∞𝟙‖_∞` over a coupled-Jacobian march of the 2D free
/// stream from `t = 0` to `t_end`.
pub fn run_free_stream_2d(
    ops: TensorOps2D,
    mapping: Box<dyn Mapping2D>,
    speed: [f64; 2],
    u_inf: f64,
    t_end: f64,
    dt: f64,
) -> Result<f64> {
    let j0 = jacobian_discrete(&ops, mapping.as_ref(), 0.0)?;
    let n = ops.len();
    let sys = Advection2D::new(ops, mapping, speed, u_inf);
    let state = SolverState::new(0.0, j0.iter().map(|j| j.sqrt()).collect(), vec![u_inf; n])?;
    let opts = RunOptions::new(dt, t_end, JacobianMode::Coupled);
    let mut dev = 0.0_f64;
    run_with(&sys, state, &ButcherTableau::classical_rk4(), opts, |s| {
        for v in &s.u {
            dev = dev.max((v - u_inf).abs());
        }
    })?;
    Ok(dev)
}

/// Outcome of comparing the two divergence definitions on one mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct FspReport {
    pub mapping: String,
    /// `𝓙` definition the free-stream run used.
    pub mode: String,
    /// Largest difference between the product-formula divergence and
    /// `D_x₁Ẋ₁ + D_x₂Ẋ₂` over the sampled instants.
    pub discrepancy: f64,
    pub fsp_deviation: f64,
}

/// Divergence discrepancy at `samples` instants of `[0, 2π)`, and the
/// free-stream deviation of a coupled-Jacobian run over one period.
pub fn fsp_mode_check(
    order: SbpOrder,
    nodes: usize,
    mapping: Box<dyn Mapping2D>,
    u_inf: f64,
    samples: usize,
) -> Result<FspReport> {
    let ops = TensorOps2D::new(order, nodes, nodes)?;
    let mut disc = 0.0_f64;
    for k in 0..samples {
        let t = 2.0 * PI * k as f64 / samples as f64;
        let from_j = divergence_from_jacobian(&ops, mapping.as_ref(), t)?;
        let px = physical_ops(&ops, mapping.as_ref(), t)?;
        let from_ops = px.divergence(&ops.velocities(mapping.as_ref(), t));
        for (a, b) in from_j.iter().zip(&from_ops) {
            disc = disc.max((a - b).abs());
        }
    }
    let name = mapping.name();
    let h = 1.0 / (nodes - 1) as f64;
    let dev = run_free_stream_2d(ops, mapping, [1.0, 0.5], u_inf, 2.0 * PI, 0.2 * h)?;
    Ok(FspReport {
        mapping: name,
        mode: "gcl-ode".into(),
        discrepancy: disc,
        fsp_deviation: dev,
    })
}

/// The wavy-mapping demonstration for each free-stream value.
pub fn fsp_demo_default(u_inf: &[f64]) -> Result<Vec<FspReport>> {
    u_inf
        .iter()
        .map(|&u| fsp_mode_check(SbpOrder::Order42, 17, Box::new(TrigMapping::wavy()), u, 8))
        .collect()
}

/// CSV rows `mapping,mode,discrepancy,fsp_deviation`.
pub fn write_fsp_csv<W: Write>(reports: &[FspReport], mut w: W) -> Result<()> {
    writeln!(w, "mapping,mode,discrepancy,fsp_deviation")?;
    for r in reports {
        writeln!(w, "{},{},{:.3e},{:.3e}", r.mapping, r.mode, r.discrepancy, r.fsp_deviation)?;
    }
    Ok(())
}
