//! Prescribed mesh motion for the two-block moving domain.
//!
//! The domain `[x_s, x_e]` is split at `x_m = x_e − w` where `w` is the width
//! of a boundary-layer block. The left block stretches affinely between `x_s`
//! and `x_m`, the right block translates rigidly with `x_e`.

use std::f64::consts::PI;

use crate::error::{AleError, Result};

/// Node counts and widths of the two blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockLayout {
    /// Spacings in the left (coarse, stretching) block.
    pub left_spacings: usize,
    /// Spacings in the right (boundary-layer, rigid) block.
    pub right_spacings: usize,
    /// Width of the rigid boundary-layer block.
    pub layer_width: f64,
}

impl BlockLayout {
    /// Layout with `n` spacings in the boundary layer of width π/3 on
    /// `[−π, π]`.
    ///
    /// The left block spans 5π/3 at t = 0, so a spacing ratio of 5 between
    /// the blocks requires `n` spacings in the left block as well.
    pub fn boundary_layer(n: usize) -> Self {
        Self {
            left_spacings: n,
            right_spacings: n,
            layer_width: PI / 3.0,
        }
    }

    pub fn left_nodes(&self) -> usize {
        self.left_spacings + 1
    }

    pub fn right_nodes(&self) -> usize {
        self.right_spacings + 1
    }

    pub fn total_nodes(&self) -> usize {
        self.left_nodes() + self.right_nodes()
    }
}

/// Boundary and interface trajectories at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryState {
    pub x_s: f64,
    pub x_m: f64,
    pub x_e: f64,
    pub xdot_s: f64,
    pub xdot_m: f64,
    pub xdot_e: f64,
}

/// Mesh motion given as data: node positions and velocities as functions
/// of time.
pub trait MeshMotion: Send + Sync {
    fn layout(&self) -> &BlockLayout;

    fn boundaries(&self, t: f64) -> BoundaryState;

    /// Spacings of the left and right block.
    fn spacings(&self, t: f64) -> [f64; 2] {
        let b = self.boundaries(t);
        let l = self.layout();
        [
            (b.x_m - b.x_s) / l.left_spacings as f64,
            (b.x_e - b.x_m) / l.right_spacings as f64,
        ]
    }

    /// Node coordinates, left block then right block (interface duplicated).
    fn positions(&self, t: f64) -> Vec<f64> {
        let b = self.boundaries(t);
        let l = self.layout();
        let nl = l.left_spacings as f64;
        let nr = l.right_spacings as f64;
        let left = (0..=l.left_spacings).map(|i| b.x_s + (i as f64 / nl) * (b.x_m - b.x_s));
        let right = (0..=l.right_spacings).map(|j| b.x_m + (j as f64 / nr) * (b.x_e - b.x_m));
        left.chain(right).collect()
    }

    /// Nodal velocities `ẋ`, obtained by differentiating [`Self::positions`].
    fn velocities(&self, t: f64) -> Vec<f64> {
        let b = self.boundaries(t);
        let l = self.layout();
        let nl = l.left_spacings as f64;
        let nr = l.right_spacings as f64;
        let left =
            (0..=l.left_spacings).map(|i| b.xdot_s + (i as f64 / nl) * (b.xdot_m - b.xdot_s));
        let right =
            (0..=l.right_spacings).map(|j| b.xdot_m + (j as f64 / nr) * (b.xdot_e - b.xdot_m));
        left.chain(right).collect()
    }

    /// Analytic volume ratio relative to t = 0 (each block is affine).
    fn exact_jacobian(&self, t: f64) -> Vec<f64> {
        let [hl, hr] = self.spacings(t);
        let [hl0, hr0] = self.spacings(0.0);
        let l = self.layout();
        let mut j = vec![hl / hl0; l.left_nodes()];
        j.extend(std::iter::repeat_n(hr / hr0, l.right_nodes()));
        j
    }

    /// Analytic divergence of the mesh velocity (piecewise constant).
    fn exact_divergence(&self, t: f64) -> Vec<f64> {
        let b = self.boundaries(t);
        let l = self.layout();
        let mut d = vec![(b.xdot_m - b.xdot_s) / (b.x_m - b.x_s); l.left_nodes()];
        d.extend(
            std::iter::repeat_n((b.xdot_e - b.xdot_m) / (b.x_e - b.x_m), l.right_nodes()),
        );
        d
    }

    /// Smallest node spacing over `samples` uniform instants in `[0, period]`.
    fn min_spacing(&self, period: f64, samples: usize) -> f64 {
        (0..=samples)
            .map(|k| period * k as f64 / samples as f64)
            .map(|t| {
                let [a, b] = self.spacings(t);
                a.min(b)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Oscillating domain `x_s = −π + sin t`, `x_e = π − sin t`, with a rigid
/// boundary layer block of width π/3 attached to `x_e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatingMotion {
    layout: BlockLayout,
}

impl OscillatingMotion {
    pub fn new(layout: BlockLayout) -> Self {
        Self { layout }
    }
}

impl MeshMotion for OscillatingMotion {
    fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    fn boundaries(&self, t: f64) -> BoundaryState {
        let (s, c) = t.sin_cos();
        let x_e = PI - s;
        BoundaryState {
            x_s: -PI + s,
            x_m: x_e - self.layout.layer_width,
            x_e,
            xdot_s: c,
            xdot_m: -c,
            xdot_e: -c,
        }
    }
}

/// The t = 0 layout of [`OscillatingMotion`], frozen in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryMotion {
    layout: BlockLayout,
}

impl StationaryMotion {
    pub fn new(layout: BlockLayout) -> Self {
        Self { layout }
    }
}

impl MeshMotion for StationaryMotion {
    fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    fn boundaries(&self, _t: f64) -> BoundaryState {
        BoundaryState {
            x_s: -PI,
            x_m: PI - self.layout.layer_width,
            x_e: PI,
            xdot_s: 0.0,
            xdot_m: 0.0,
            xdot_e: 0.0,
        }
    }
}

/// Checks strict ordering within each block (the discrete analogue of a
/// positive Jacobian). Interface duplicates are allowed to coincide.
pub fn check_nondegenerate(layout: &BlockLayout, positions: &[f64], t: f64) -> Result<()> {
    if positions.len() != layout.total_nodes() {
        return Err(AleError::DimensionMismatch {
            expected: layout.total_nodes(),
            got: positions.len(),
        });
    }
    let split = layout.left_nodes();
    for (offset, block) in [(0, &positions[..split]), (split, &positions[split..])] {
        if let Some(k) = block.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(AleError::NodeOrdering { t, node: offset + k });
        }
    }
    if (positions[split - 1] - positions[split]).abs() > 1e-12 * (1.0 + positions[split].abs()) {
        return Err(AleError::InterfaceMismatch {
            left_end: positions[split - 1],
            right_start: positions[split],
        });
    }
    Ok(())
}
