//! Diagonal-norm summation-by-parts first-derivative operators in one
//! dimension, and their SAT-coupled multiblock encapsulation.
//!
//! Every operator here has the structure `D = P⁻¹Q` with `P` diagonal and
//! `Q + Qᵀ = −e₀e₀ᵀ + eₙeₙᵀ`. The multiblock operator keeps duplicate nodes at
//! block interfaces and glues the blocks with penalty terms chosen so that the
//! interface contributions to `Q + Qᵀ` cancel.

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{AleError, Result};

/// Interior / boundary accuracy pair of a diagonal-norm operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SbpOrder {
    /// Second order interior, first order closure.
    Order21,
    /// Fourth order interior, second order closure.
    Order42,
}

struct Tables {
    /// Quadrature weights of the closure nodes, in units of `h`.
    weights: &'static [f64],
    /// Left closure rows of `h·D`.
    closure: &'static [&'static [f64]],
    /// Interior stencil coefficients of `h·D` for offsets 1..=w (antisymmetric).
    stencil: &'static [f64],
}

const TABLES_21: Tables = Tables {
    weights: &[0.5],
    closure: &[&[-1.0, 1.0]],
    stencil: &[0.5],
};

// Classical diagonal-norm (4,2) closure (Strand / Mattsson-Nordström).
const TABLES_42: Tables = Tables {
    weights: &[17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0],
    closure: &[
        &[-24.0 / 17.0, 59.0 / 34.0, -4.0 / 17.0, -3.0 / 34.0, 0.0, 0.0],
        &[-1.0 / 2.0, 0.0, 1.0 / 2.0, 0.0, 0.0, 0.0],
        &[4.0 / 43.0, -59.0 / 86.0, 0.0, 59.0 / 86.0, -4.0 / 43.0, 0.0],
        &[3.0 / 98.0, 0.0, -59.0 / 98.0, 0.0, 32.0 / 49.0, -4.0 / 49.0],
    ],
    stencil: &[2.0 / 3.0, -1.0 / 12.0],
};

impl SbpOrder {
    fn tables(self) -> &'static Tables {
        match self {
            SbpOrder::Order21 => &TABLES_21,
            SbpOrder::Order42 => &TABLES_42,
        }
    }

    pub fn interior_order(self) -> usize {
        match self {
            SbpOrder::Order21 => 2,
            SbpOrder::Order42 => 4,
        }
    }

    pub fn boundary_order(self) -> usize {
        match self {
            SbpOrder::Order21 => 1,
            SbpOrder::Order42 => 2,
        }
    }

    /// Number of rows carrying boundary closure coefficients at each end.
    pub fn closure_width(self) -> usize {
        self.tables().closure.len()
    }

    pub fn min_nodes(self) -> usize {
        2 * self.closure_width()
    }

    /// Parses `"2,1"` or `"4,2"`.
    pub fn parse(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.trim_matches(|c| c == '(' || c == ')') {
            "2,1" | "21" => Ok(SbpOrder::Order21),
            "4,2" | "42" => Ok(SbpOrder::Order42),
            other => Err(AleError::Config(format!("unknown SBP order '{other}'"))),
        }
    }
}

impl fmt::Display for SbpOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.interior_order(), self.boundary_order())
    }
}

/// Selection matrix from volume nodes onto a subset of surface nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    indices: Vec<usize>,
    volume_len: usize,
}

impl Restriction {
    pub fn new(indices: Vec<usize>, volume_len: usize) -> Result<Self> {
        for &i in &indices {
            if i >= volume_len {
                return Err(AleError::DimensionMismatch {
                    expected: volume_len,
                    got: i + 1,
                });
            }
        }
        Ok(Self {
            indices,
            volume_len,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn surface_len(&self) -> usize {
        self.indices.len()
    }

    pub fn volume_len(&self) -> usize {
        self.volume_len
    }

    /// `E·Φ`
    pub fn restrict(&self, volume: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| volume[i]).collect()
    }

    /// `Eᵀ·Ψ`
    pub fn extend(&self, surface: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.volume_len];
        for (&i, &v) in self.indices.iter().zip(surface) {
            out[i] += v;
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut e = DMatrix::zeros(self.indices.len(), self.volume_len);
        for (row, &i) in self.indices.iter().enumerate() {
            e[(row, i)] = 1.0;
        }
        e
    }
}

/// Surface quadrature: restriction, outward normals and surface weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub restriction: Restriction,
    pub normals: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Surface {
    /// The two end points of a 1D node set of length `n`.
    pub fn endpoints(n: usize) -> Self {
        Self {
            restriction: Restriction::new(vec![0, n - 1], n).expect("valid endpoints"),
            normals: vec![-1.0, 1.0],
            weights: vec![1.0, 1.0],
        }
    }

    /// `Eᵀ diag(P_surf) diag(N) E` as an n-vector (the matrix is diagonal
    /// whenever surface indices are distinct).
    pub fn boundary_diagonal(&self) -> Vec<f64> {
        let w: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.normals)
            .map(|(p, n)| p * n)
            .collect();
        self.restriction.extend(&w)
    }
}

/// A first-derivative operator with diagonal norm satisfying the SBP
/// structure.
pub trait SbpDerivative {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Diagonal of `P`.
    fn quadrature(&self) -> &[f64];

    /// `out = D·u`.
    fn apply_into(&self, u: &[f64], out: &mut [f64]);

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.apply_into(u, &mut out);
        out
    }

    fn surface(&self) -> Surface {
        Surface::endpoints(self.len())
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut d = DMatrix::zeros(n, n);
        let mut unit = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            unit[j] = 1.0;
            self.apply_into(&unit, &mut col);
            for i in 0..n {
                d[(i, j)] = col[i];
            }
            unit[j] = 0.0;
        }
        d
    }

    /// `Q = diag(P)·D`.
    fn q_dense(&self) -> DMatrix<f64> {
        let mut q = self.to_dense();
        for (i, p) in self.quadrature().iter().enumerate() {
            q.row_mut(i).scale_mut(*p);
        }
        q
    }

    /// `Eᵀ diag(P_surf) diag(N) E`.
    fn boundary_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.surface().boundary_diagonal().into())
    }
}

/// Diagonal-norm SBP operator on a uniform block.
#[derive(Debug, Clone, PartialEq)]
pub struct SbpOperator1D {
    order: SbpOrder,
    h: f64,
    origin: f64,
    weights: Vec<f64>,
}

impl SbpOperator1D {
    pub fn new(order: SbpOrder, n: usize, h: f64) -> Result<Self> {
        if n < order.min_nodes() {
            return Err(AleError::TooFewNodes {
                order: order.to_string(),
                min: order.min_nodes(),
                got: n,
            });
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(AleError::NonPositiveSpacing(h));
        }
        let tw = order.tables().weights;
        let mut weights = vec![h; n];
        for (i, w) in tw.iter().enumerate() {
            weights[i] = w * h;
            weights[n - 1 - i] = w * h;
        }
        Ok(Self {
            order,
            h,
            origin: 0.0,
            weights,
        })
    }

    /// Places the first node at `x0`.
    pub fn with_origin(mut self, x0: f64) -> Self {
        self.origin = x0;
        self
    }

    /// Same operator on the same node count with a new spacing.
    pub fn rescaled(&self, h: f64) -> Result<Self> {
        Ok(Self::new(self.order, self.len(), h)?.with_origin(self.origin))
    }

    pub fn order(&self) -> SbpOrder {
        self.order
    }

    pub fn order_interior(&self) -> usize {
        self.order.interior_order()
    }

    pub fn order_boundary(&self) -> usize {
        self.order.boundary_order()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn end(&self) -> f64 {
        self.origin + (self.len() - 1) as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.origin + i as f64 * self.h)
            .collect()
    }

    /// Coefficients of row `i` of `D` as (column, value) pairs.
    pub fn row(&self, i: usize) -> Vec<(usize, f64)> {
        let n = self.len();
        let t = self.order.tables();
        let r = t.closure.len();
        let inv_h = 1.0 / self.h;
        if i < r {
            t.closure[i]
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, c)| (j, c * inv_h))
                .collect()
        } else if i >= n - r {
            let k = n - 1 - i;
            t.closure[k]
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, c)| (n - 1 - j, -c * inv_h))
                .collect()
        } else {
            let mut out = Vec::with_capacity(2 * t.stencil.len());
            for (k, c) in t.stencil.iter().enumerate().rev() {
                out.push((i - k - 1, -c * inv_h));
            }
            for (k, c) in t.stencil.iter().enumerate() {
                out.push((i + k + 1, c * inv_h));
            }
            out
        }
    }
}

impl SbpDerivative for SbpOperator1D {
    fn len(&self) -> usize {
        self.weights.len()
    }

    fn quadrature(&self) -> &[f64] {
        &self.weights
    }

    fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(u.len(), n);
        debug_assert_eq!(out.len(), n);
        let t = self.order.tables();
        let r = t.closure.len();
        let inv_h = 1.0 / self.h;
        for (i, row) in t.closure.iter().enumerate() {
            let mut left = 0.0;
            let mut right = 0.0;
            for (j, c) in row.iter().enumerate() {
                left += c * u[j];
                right += c * u[n - 1 - j];
            }
            out[i] = left * inv_h;
            out[n - 1 - i] = -right * inv_h;
        }
        for i in r..n - r {
            let mut acc = 0.0;
            for (k, c) in t.stencil.iter().enumerate() {
                acc += c * (u[i + k + 1] - u[i - k - 1]);
            }
            out[i] = acc * inv_h;
        }
    }
}

/// Penalty coefficients of one SAT interface: the left block gets
/// `σ_L P⁻¹(u_L − u_R)` at its last node, the right block `σ_R P⁻¹(u_R − u_L)`
/// at its first node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePenalty {
    pub sigma_left: f64,
    pub sigma_right: f64,
}

impl InterfacePenalty {
    /// The choice that cancels the interface terms of `Q + Qᵀ`.
    pub const CONSERVATIVE: InterfacePenalty = InterfacePenalty {
        sigma_left: -0.5,
        sigma_right: 0.5,
    };
}

impl Default for InterfacePenalty {
    fn default() -> Self {
        Self::CONSERVATIVE
    }
}

/// Blocks glued by SAT penalties into one operator on the concatenated node
/// set (interface nodes duplicated, one per block).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiblockOperator {
    blocks: Vec<SbpOperator1D>,
    offsets: Vec<usize>,
    penalties: Vec<InterfacePenalty>,
    weights: Vec<f64>,
}

impl MultiblockOperator {
    pub fn new(blocks: Vec<SbpOperator1D>, penalties: Vec<InterfacePenalty>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(AleError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if penalties.len() + 1 != blocks.len() {
            return Err(AleError::DimensionMismatch {
                expected: blocks.len() - 1,
                got: penalties.len(),
            });
        }
        for pair in blocks.windows(2) {
            let (left_end, right_start) = (pair[0].end(), pair[1].origin());
            let scale = 1.0 + left_end.abs().max(right_start.abs());
            if (left_end - right_start).abs() > 1e-12 * scale {
                return Err(AleError::InterfaceMismatch {
                    left_end,
                    right_start,
                });
            }
        }
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut weights = Vec::new();
        for b in &blocks {
            offsets.push(weights.len());
            weights.extend_from_slice(b.quadrature());
        }
        Ok(Self {
            blocks,
            offsets,
            penalties,
            weights,
        })
    }

    pub fn blocks(&self) -> &[SbpOperator1D] {
        &self.blocks
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn penalties(&self) -> &[InterfacePenalty] {
        &self.penalties
    }

    /// Global node coordinates, duplicates included.
    pub fn nodes(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|b| b.nodes()).collect()
    }

    /// Same layout with new per-block spacings; the first block keeps its
    /// origin and later blocks are placed end to end.
    pub fn with_spacings(&self, origin: f64, spacings: &[f64]) -> Result<Self> {
        if spacings.len() != self.blocks.len() {
            return Err(AleError::DimensionMismatch {
                expected: self.blocks.len(),
                got: spacings.len(),
            });
        }
        let mut x0 = origin;
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (b, &h) in self.blocks.iter().zip(spacings) {
            let nb = SbpOperator1D::new(b.order(), b.len(), h)?.with_origin(x0);
            x0 = nb.end();
            blocks.push(nb);
        }
        Self::new(blocks, self.penalties.clone())
    }
}

/// Glues two blocks that meet at a common interface point.
pub fn couple_blocks(
    left: SbpOperator1D,
    right: SbpOperator1D,
    penalty: InterfacePenalty,
) -> Result<MultiblockOperator> {
    MultiblockOperator::new(vec![left, right], vec![penalty])
}

impl SbpDerivative for MultiblockOperator {
    fn len(&self) -> usize {
        self.weights.len()
    }

    fn quadrature(&self) -> &[f64] {
        &self.weights
    }

    fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        for (b, &off) in self.blocks.iter().zip(&self.offsets) {
            let n = b.len();
            b.apply_into(&u[off..off + n], &mut out[off..off + n]);
        }
        for (k, pen) in self.penalties.iter().enumerate() {
            let il = self.offsets[k + 1] - 1;
            let ir = self.offsets[k + 1];
            let jump = u[il] - u[ir];
            out[il] += pen.sigma_left * jump / self.weights[il];
            out[ir] -= pen.sigma_right * jump / self.weights[ir];
        }
    }
}

/// `max |Q + Qᵀ − B|` for a given `Q` and boundary matrix `B`.
pub fn q_residual(q: &DMatrix<f64>, boundary: &DMatrix<f64>) -> f64 {
    let sym = q + q.transpose() - boundary;
    sym.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Deviation of an operator from the 1D SBP structure.
pub fn sbp_residual<Op: SbpDerivative + ?Sized>(op: &Op) -> f64 {
    q_residual(&op.q_dense(), &op.boundary_matrix())
}

/// Writes `P`, `Q` and `D` as CSV blocks (debugging aid).
pub fn write_operator_csv<Op: SbpDerivative + ?Sized, W: Write>(op: &Op, mut w: W) -> Result<()> {
    let n = op.len();
    writeln!(w, "# P")?;
    let p: Vec<String> = op.quadrature().iter().map(|v| format!("{v:.17e}")).collect();
    writeln!(w, "{}", p.join(","))?;
    for (name, m) in [("Q", op.q_dense()), ("D", op.to_dense())] {
        writeln!(w, "# {name}")?;
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| format!("{:.17e}", m[(i, j)])).collect();
            writeln!(w, "{}", row.join(","))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dot_p(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
        p.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
    }

    #[test]
    fn order21_three_nodes() {
        let op = SbpOperator1D::new(SbpOrder::Order21, 3, 1.0).unwrap();
        assert_eq!(op.quadrature(), &[0.5, 1.0, 0.5]);
        let d = op.to_dense();
        let expected = [[-1.0, 1.0, 0.0], [-0.5, 0.0, 0.5], [0.0, -1.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d[(i, j)], expected[i][j], "D[{i}][{j}]");
            }
        }
        let q = op.q_dense();
        let sym = &q + q.transpose();
        assert_eq!(sym, DMatrix::from_diagonal(&vec![-1.0, 0.0, 1.0].into()));
    }

    #[test]
    fn too_few_nodes_names_minimum() {
        let err = SbpOperator1D::new(SbpOrder::Order42, 7, 0.1).unwrap_err();
        assert_eq!(
            err,
            AleError::TooFewNodes {
                order: "(4,2)".into(),
                min: 8,
                got: 7
            }
        );
        assert!(err.to_string().contains("at least 8"));
        assert!(SbpOperator1D::new(SbpOrder::Order42, 8, 0.1).is_ok());
        assert!(SbpOperator1D::new(SbpOrder::Order21, 2, 0.0).is_err());
    }

    #[test]
    fn constants_are_annihilated() {
        for order in [SbpOrder::Order21, SbpOrder::Order42] {
            let op = SbpOperator1D::new(order, 17, 0.3).unwrap();
            let d1 = op.apply(&[1.0; 17]);
            assert!(d1.iter().all(|v| v.abs() < 1e-13), "{order}: {d1:?}");
        }
    }

    #[test]
    fn polynomial_exactness_sweep() {
        for order in [SbpOrder::Order21, SbpOrder::Order42] {
            let n = 21;
            let h = 0.1;
            let op = SbpOperator1D::new(order, n, h).unwrap().with_origin(-0.4);
            let x = op.nodes();
            let r = order.closure_width();
            for deg in 0..=order.interior_order() {
                let u: Vec<f64> = x.iter().map(|xi| xi.powi(deg as i32)).collect();
                let du = op.apply(&u);
                for i in 0..n {
                    let closure = i < r || i >= n - r;
                    let limit = if closure {
                        order.boundary_order()
                    } else {
                        order.interior_order()
                    };
                    if deg > limit {
                        continue;
                    }
                    let exact = if deg == 0 {
                        0.0
                    } else {
                        deg as f64 * x[i].powi(deg as i32 - 1)
                    };
                    assert!(
                        (du[i] - exact).abs() <= 1e-12 * (1.0 + exact.abs()),
                        "{order} deg {deg} row {i}: {} vs {exact}",
                        du[i]
                    );
                }
            }
        }
    }

    #[test]
    fn order42_derivative_of_linear_is_one() {
        let op = SbpOperator1D::new(SbpOrder::Order42, 12, 0.25).unwrap().with_origin(1.0);
        let du = op.apply(&op.nodes());
        assert!(du.iter().all(|v| (v - 1.0).abs() <= 1e-13), "{du:?}");
    }

    #[test]
    fn residual_of_fresh_operators() {
        let op = SbpOperator1D::new(SbpOrder::Order21, 9, 0.7).unwrap();
        assert!(sbp_residual(&op) <= 1e-15);
        let op = SbpOperator1D::new(SbpOrder::Order42, 16, 0.05).unwrap();
        assert!(sbp_residual(&op) <= 1e-13);
    }

    #[test]
    fn residual_sees_symmetric_perturbation() {
        let op = SbpOperator1D::new(SbpOrder::Order21, 5, 1.0).unwrap();
        let mut q = op.q_dense();
        q[(0, 0)] += 1e-3;
        let r = q_residual(&q, &op.boundary_matrix());
        assert!((r - 2e-3).abs() < 1e-15, "{r}");
    }

    #[test]
    fn coupled_blocks_satisfy_global_sbp() {
        let left = SbpOperator1D::new(SbpOrder::Order42, 10, 0.5).unwrap().with_origin(-4.5);
        let right = SbpOperator1D::new(SbpOrder::Order42, 10, 0.1).unwrap();
        let mb = couple_blocks(left, right, InterfacePenalty::CONSERVATIVE).unwrap();
        assert!(sbp_residual(&mb) <= 1e-13, "{}", sbp_residual(&mb));
        let ones = vec![1.0; mb.len()];
        assert!(mb.apply(&ones).iter().all(|v| v.abs() < 1e-12));
        let dx = mb.apply(&mb.nodes());
        assert!(dx.iter().all(|v| (v - 1.0).abs() <= 1e-13), "{dx:?}");
    }

    #[test]
    fn identical_blocks_coupled() {
        let left = SbpOperator1D::new(SbpOrder::Order21, 6, 1.0).unwrap();
        let right = SbpOperator1D::new(SbpOrder::Order21, 6, 1.0).unwrap().with_origin(5.0);
        let mb = couple_blocks(left, right, InterfacePenalty::default()).unwrap();
        assert!(sbp_residual(&mb) <= 1e-13);
    }

    #[test]
    fn non_conservative_penalty_shows_in_residual() {
        let left = SbpOperator1D::new(SbpOrder::Order21, 6, 1.0).unwrap();
        let right = SbpOperator1D::new(SbpOrder::Order21, 6, 1.0).unwrap().with_origin(5.0);
        let pen = InterfacePenalty {
            sigma_left: -1.0,
            sigma_right: 1.0,
        };
        let mb = couple_blocks(left, right, pen).unwrap();
        assert!(sbp_residual(&mb) > 0.5);
    }

    #[test]
    fn mismatched_interface_is_rejected() {
        let left = SbpOperator1D::new(SbpOrder::Order21, 6, 1.0).unwrap();
        let right = SbpOperator1D::new(SbpOrder::Order21, 6, 1.0).unwrap().with_origin(5.5);
        assert!(matches!(
            couple_blocks(left, right, InterfacePenalty::default()),
            Err(AleError::InterfaceMismatch { .. })
        ));
    }

    #[test]
    fn with_spacings_places_blocks_end_to_end() {
        let left = SbpOperator1D::new(SbpOrder::Order42, 9, 0.5).unwrap();
        let right = SbpOperator1D::new(SbpOrder::Order42, 9, 0.1).unwrap().with_origin(4.0);
        let mb = couple_blocks(left, right, InterfacePenalty::default()).unwrap();
        let moved = mb.with_spacings(-1.0, &[0.25, 0.2]).unwrap();
        assert_eq!(moved.blocks()[1].origin(), 1.0);
        assert!(sbp_residual(&moved) <= 1e-13);
    }

    #[test]
    fn restriction_is_a_selection() {
        let e = Restriction::new(vec![0, 4], 5).unwrap().to_dense();
        let eet = &e * e.transpose();
        assert_eq!(eet, DMatrix::identity(2, 2));
        for row in e.row_iter() {
            assert_eq!(row.iter().filter(|v| **v == 1.0).count(), 1);
            assert_eq!(row.iter().filter(|v| **v == 0.0).count(), 4);
        }
        assert!(Restriction::new(vec![5], 5).is_err());
    }

    #[test]
    fn sparse_rows_match_dense() {
        let op = SbpOperator1D::new(SbpOrder::Order42, 11, 0.2).unwrap();
        let d = op.to_dense();
        for i in 0..11 {
            let mut row = [0.0; 11];
            for (j, v) in op.row(i) {
                row[j] = v;
            }
            for j in 0..11 {
                assert!((row[j] - d[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn csv_dump_has_all_sections() {
        let op = SbpOperator1D::new(SbpOrder::Order21, 3, 1.0).unwrap();
        let mut buf = Vec::new();
        write_operator_csv(&op, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().filter(|l| l.starts_with('#')).count(), 3);
        assert_eq!(s.lines().count(), 1 + 1 + 1 + 3 + 1 + 3);
    }

    proptest! {
        #[test]
        fn inner_product_sbp_property(
            phi in prop::collection::vec(-10.0f64..10.0, 22),
            psi in prop::collection::vec(-10.0f64..10.0, 22),
            h in 0.01f64..2.0,
            coupled in any::<bool>(),
        ) {
            let ops: Vec<Box<dyn SbpDerivative>> = if coupled {
                let l = SbpOperator1D::new(SbpOrder::Order42, 11, h).unwrap();
                let r = SbpOperator1D::new(SbpOrder::Order42, 11, h / 5.0).unwrap().with_origin(l.end());
                vec![Box::new(couple_blocks(l, r, InterfacePenalty::default()).unwrap())]
            } else {
                vec![
                    Box::new(SbpOperator1D::new(SbpOrder::Order21, 22, h).unwrap()),
                    Box::new(SbpOperator1D::new(SbpOrder::Order42, 22, h).unwrap()),
                ]
            };
            for op in ops {
                let p = op.quadrature();
                let lhs = dot_p(p, &phi, &op.apply(&psi)) + dot_p(p, &op.apply(&phi), &psi);
                let rhs = phi[21] * psi[21] - phi[0] * psi[0];
                let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * norm(&phi) * norm(&psi));
            }
        }
    }
}
