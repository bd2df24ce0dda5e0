//! Manufactured-solution experiment for `u_t = εu_xx − u_x + F` on the
//! oscillating two-block domain, convergence tables, free-stream runs and
//! stability audit sweeps.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::ale::{apply_dm, assemble, AleOperators, DivergenceMode, SystemMatrices};
use crate::audit::{audit, AuditReport};
use crate::boundary::{make_model_bcs, EndVelocities};
use crate::error::{AleError, Result};
use crate::filter::DifferenceFilter;
use crate::integrator::{run_with, AleSystem, ButcherTableau, JacobianMode, RunOptions, SolverState};
use crate::mesh::{BlockLayout, BoundaryState, MeshMotion, OscillatingMotion, StationaryMotion};
use crate::sbp::{InterfacePenalty, MultiblockOperator, SbpDerivative, SbpOperator1D, SbpOrder};

/// Stationary or oscillating domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Stationary,
    Moving,
}

impl Case {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "stationary" => Ok(Case::Stationary),
            "moving" => Ok(Case::Moving),
            other => Err(AleError::Config(format!("unknown case '{other}'"))),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Stationary => "stationary",
            Case::Moving => "moving",
        })
    }
}

fn parse_jacobian_mode(s: &str) -> Result<JacobianMode> {
    match s.trim() {
        "exact" => Ok(JacobianMode::Exact),
        "coupled" => Ok(JacobianMode::Coupled),
        other => Err(AleError::Config(format!("unknown jacobian mode '{other}'"))),
    }
}

/// Post-step filter settings: `order` of the undivided difference and
/// strength `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    pub order: usize,
    pub sigma: f64,
}

impl FilterConfig {
    /// Accepts `none`, `off`, or `ORDER:SIGMA`.
    pub fn parse(s: &str) -> Result<Option<Self>> {
        let s = s.trim();
        if s == "none" || s == "off" {
            return Ok(None);
        }
        let (k, sigma) = s
            .split_once(':')
            .ok_or_else(|| AleError::Config(format!("filter must be 'none' or ORDER:SIGMA, got '{s}'")))?;
        let order = k
            .trim()
            .parse()
            .map_err(|_| AleError::Config(format!("bad filter order '{k}'")))?;
        let sigma = sigma
            .trim()
            .parse()
            .map_err(|_| AleError::Config(format!("bad filter strength '{sigma}'")))?;
        Ok(Some(Self { order, sigma }))
    }
}

impl fmt::Display for FilterConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.order, self.sigma)
    }
}

/// Parameters of one experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub epsilon: f64,
    pub amplitude: f64,
    /// Spacings in the boundary-layer block.
    pub n: usize,
    pub order: SbpOrder,
    pub t_end: f64,
    pub dt_safety: f64,
    pub case: Case,
    pub jacobian_mode: JacobianMode,
    pub filter: Option<FilterConfig>,
    pub out: Option<PathBuf>,
}

/// Fourth undivided differences at full strength.
pub const DEFAULT_FILTER: FilterConfig = FilterConfig { order: 4, sigma: 1.0 };

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1 * PI,
            amplitude: 0.1,
            n: 16,
            order: SbpOrder::Order42,
            t_end: 2.0 * PI,
            dt_safety: 0.5,
            case: Case::Moving,
            jacobian_mode: JacobianMode::Exact,
            filter: Some(DEFAULT_FILTER),
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(AleError::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.n < 8 {
            return Err(AleError::Config(format!("N must be at least 8, got {}", self.n)));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(AleError::Config(format!(
                "dt_safety must lie in (0, 1], got {}",
                self.dt_safety
            )));
        }
        if !(self.t_end >= 0.0) {
            return Err(AleError::Config(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                AleError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(k.trim(), v.trim())
                .map_err(|e| AleError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_config_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_config_text(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| AleError::Config(format!("'{v}' is not a number")))
        };
        match key {
            "epsilon" => self.epsilon = num(value)?,
            "A" | "amplitude" => self.amplitude = num(value)?,
            "N" | "n" => {
                self.n = value
                    .parse()
                    .map_err(|_| AleError::Config(format!("'{value}' is not a count")))?
            }
            "order" | "orders" => self.order = SbpOrder::parse(value)?,
            "t_end" => self.t_end = num(value)?,
            "dt_safety" => self.dt_safety = num(value)?,
            "case" => self.case = Case::parse(value)?,
            "jacobian_mode" => self.jacobian_mode = parse_jacobian_mode(value)?,
            "filter" => self.filter = FilterConfig::parse(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(AleError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn motion(&self) -> Box<dyn MeshMotion> {
        let layout = BlockLayout::boundary_layer(self.n);
        match self.case {
            Case::Stationary => Box::new(StationaryMotion::new(layout)),
            Case::Moving => Box::new(OscillatingMotion::new(layout)),
        }
    }

    /// `Δt = dt_safety·Δx_min²/ε`, with `Δx_min` taken over the motion period.
    pub fn time_step(&self) -> f64 {
        let h = self.motion().min_spacing(2.0 * PI, 256);
        self.dt_safety * h * h / self.epsilon
    }

    /// Filter cadence `0.5·Δx_min²/ε`: one application per step at the
    /// default safety factor, and the same filtering instants when only
    /// `Δt` is refined.
    pub fn filter_period(&self) -> f64 {
        let h = self.motion().min_spacing(2.0 * PI, 256);
        0.5 * h * h / self.epsilon
    }
}

pub fn parse_jacobian_mode_str(s: &str) -> Result<JacobianMode> {
    parse_jacobian_mode(s)
}

/// `u = (1 + A sin(x − t))(1 − e^{(x − x_e)/ε})`.
pub fn mms_solution(x: f64, t: f64, x_e: f64, cfg: &ExperimentConfig) -> f64 {
    (1.0 + cfg.amplitude * (x - t).sin()) * (1.0 - ((x - x_e) / cfg.epsilon).exp())
}

/// Forcing, left boundary datum and initial value at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsData {
    pub f: f64,
    pub g_s: f64,
    pub u0: f64,
}

fn forcing(x: f64, t: f64, x_e: f64, xdot_e: f64, eps: f64, a: f64) -> f64 {
    let (s, c) = (x - t).sin_cos();
    let e = ((x - x_e) / eps).exp();
    a * eps * s + (xdot_e / eps * (1.0 + a * s) + 2.0 * a * c - a * eps * s) * e
}

fn inflow_datum(t: f64, b: &BoundaryState, eps: f64, a: f64) -> f64 {
    let (s, c) = (b.x_s - t).sin_cos();
    let e = ((b.x_s - b.x_e) / eps).exp();
    -(1.0 + a * s) + (a * eps * c + b.xdot_s * (1.0 + a * s)) * (1.0 - e)
}

/// `F(x, t)`, `g_s(t)` and `u(x, 0)` of the manufactured solution on the
/// configured motion.
pub fn mms_data(x: f64, t: f64, cfg: &ExperimentConfig) -> MmsData {
    let motion = cfg.motion();
    let b = motion.boundaries(t);
    let b0 = motion.boundaries(0.0);
    MmsData {
        f: forcing(x, t, b.x_e, b.xdot_e, cfg.epsilon, cfg.amplitude),
        g_s: inflow_datum(t, &b, cfg.epsilon, cfg.amplitude),
        u0: mms_solution(x, 0.0, b0.x_e, cfg),
    }
}

/// Source terms of the advection-diffusion system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Data {
    Manufactured,
    /// Zero forcing and boundary data consistent with `u ≡ u_∞`.
    FreeStream(f64),
}

/// `u_t = εu_xx − u_x + F` on a two-block moving mesh, with characteristic
/// inflow on the left and Dirichlet data on the right.
pub struct AdvectionDiffusion {
    motion: Box<dyn MeshMotion>,
    base: MultiblockOperator,
    epsilon: f64,
    amplitude: f64,
    data: Data,
}

impl AdvectionDiffusion {
    pub fn new(cfg: &ExperimentConfig, data: Data) -> Result<Self> {
        cfg.validate()?;
        let motion = cfg.motion();
        let l = *motion.layout();
        let [hl, hr] = motion.spacings(0.0);
        let b0 = motion.boundaries(0.0);
        let left = SbpOperator1D::new(cfg.order, l.left_nodes(), hl)?.with_origin(b0.x_s);
        let right = SbpOperator1D::new(cfg.order, l.right_nodes(), hr)?.with_origin(b0.x_m);
        let base = MultiblockOperator::new(vec![left, right], vec![InterfacePenalty::CONSERVATIVE])?;
        Ok(Self {
            motion,
            base,
            epsilon: cfg.epsilon,
            amplitude: cfg.amplitude,
            data,
        })
    }

    pub fn motion(&self) -> &dyn MeshMotion {
        self.motion.as_ref()
    }

    /// Physical operator on the mesh at time `t`.
    pub fn operator_at(&self, t: f64) -> Result<MultiblockOperator> {
        let b = self.motion.boundaries(t);
        self.base.with_spacings(b.x_s, &self.motion.spacings(t))
    }

    fn boundary_data(&self, t: f64, b: &BoundaryState) -> [f64; 2] {
        match self.data {
            Data::Manufactured => [inflow_datum(t, b, self.epsilon, self.amplitude), 0.0],
            Data::FreeStream(u) => [-(1.0 - b.xdot_s) * u, u],
        }
    }

    /// Initial state on the t = 0 mesh with `√J = 1`.
    pub fn initial_state(&self, cfg: &ExperimentConfig) -> Result<SolverState> {
        let x = self.motion.positions(0.0);
        let b0 = self.motion.boundaries(0.0);
        let u = match self.data {
            Data::Manufactured => x.iter().map(|&xi| mms_solution(xi, 0.0, b0.x_e, cfg)).collect(),
            Data::FreeStream(v) => vec![v; x.len()],
        };
        SolverState::new(0.0, vec![1.0; x.len()], u)
    }

    /// Dense `𝓜 = ε D² − D + 𝓛_δ𝓑` at time `t`, and the ALE snapshot with
    /// the analytic `√J`.
    pub fn system_at(&self, t: f64) -> Result<(SystemMatrices, AleOperators)> {
        let op = self.operator_at(t)?;
        let b = self.motion.boundaries(t);
        let d = op.to_dense();
        let bcs = make_model_bcs(
            &op,
            self.epsilon,
            EndVelocities {
                xdot_s: b.xdot_s,
                xdot_e: b.xdot_e,
            },
            [0.0, 0.0],
        )?;
        let m: DMatrix<f64> = &d * &d * self.epsilon - &d + bcs.lifted_matrix(op.quadrature());
        let jsqrt: Vec<f64> = self.motion.exact_jacobian(t).iter().map(|j| j.sqrt()).collect();
        let xdot = self.motion.velocities(t);
        let ale = AleOperators::new(&op, &xdot, jsqrt, DivergenceMode::Discrete, None)?;
        let sys = assemble(m, &ale.dm, &ale.jsqrt)?;
        Ok((sys, ale))
    }
}

impl AleSystem for AdvectionDiffusion {
    fn len(&self) -> usize {
        self.base.len()
    }

    fn divergence(&self, t: f64, _jsqrt: &[f64]) -> Vec<f64> {
        match self.operator_at(t) {
            Ok(op) => op.apply(&self.motion.velocities(t)),
            Err(_) => vec![f64::NAN; self.len()],
        }
    }

    fn exact_jsqrt(&self, t: f64) -> Option<Vec<f64>> {
        Some(self.motion.exact_jacobian(t).iter().map(|j| j.sqrt()).collect())
    }

    fn rhs(&self, t: f64, _jsqrt: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.len();
        let op = self.operator_at(t)?;
        let b = self.motion.boundaries(t);
        let xdot = self.motion.velocities(t);
        let mut du = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        op.apply_into(u, &mut du);
        apply_dm(&op, &xdot, u, &du, &mut scratch, out);
        op.apply_into(&du, &mut scratch);
        for i in 0..n {
            out[i] += self.epsilon * scratch[i] - du[i];
        }
        if let Data::Manufactured = self.data {
            let x = self.motion.positions(t);
            for (o, xi) in out.iter_mut().zip(&x) {
                *o += forcing(*xi, t, b.x_e, b.xdot_e, self.epsilon, self.amplitude);
            }
        }
        // weak boundary conditions; only the end rows of B and δ are nonzero
        let [g_s, g_e] = self.boundary_data(t, &b);
        let p = op.quadrature();
        let r_s = self.epsilon * du[0] - (1.0 - b.xdot_s) * u[0] - g_s;
        out[0] += r_s / p[0];
        let r_e = u[n - 1] - g_e;
        let last = op.blocks().last().expect("at least one block");
        let off = n - last.len();
        for (j, c) in last.row(last.len() - 1) {
            out[off + j] -= self.epsilon * c * r_e / p[off + j];
        }
        out[n - 1] += 0.5 * (1.0 - b.xdot_e) * r_e / p[n - 1];
        Ok(())
    }
}

/// Builds the configured post-step filter for a layout.
pub fn build_filter(cfg: &ExperimentConfig, fc: FilterConfig) -> Result<DifferenceFilter> {
    let l = BlockLayout::boundary_layer(cfg.n);
    let unit = |n: usize| -> Result<Vec<f64>> { Ok(SbpOperator1D::new(cfg.order, n, 1.0)?.quadrature().to_vec()) };
    DifferenceFilter::new(
        fc.order,
        fc.sigma,
        vec![(0, unit(l.left_nodes())?), (l.left_nodes(), unit(l.right_nodes())?)],
    )
}

/// Outcome of one manufactured-solution run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub n: usize,
    pub steps: usize,
    pub dt: f64,
    pub linf_error: f64,
    pub min_jacobian: f64,
}

/// Runs one manufactured-solution case to `t_end` and measures the discrete
/// `L_∞` error on the final mesh.
pub fn run_mms(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let sys = AdvectionDiffusion::new(cfg, Data::Manufactured)?;
    let state = sys.initial_state(cfg)?;
    let filter = cfg.filter.map(|fc| build_filter(cfg, fc)).transpose()?;
    let dt = cfg.time_step();
    let mut opts = RunOptions::new(dt, cfg.t_end, cfg.jacobian_mode);
    if let Some(f) = &filter {
        opts = opts.with_filter(f, cfg.filter_period());
    }
    let mut steps = 0usize;
    let mut min_j = f64::INFINITY;
    let fin = run_with(&sys, state, &ButcherTableau::classical_rk4(), opts, |s| {
        steps += 1;
        for j in &s.jsqrt {
            min_j = min_j.min(j * j);
        }
    })?;
    let x = sys.motion().positions(fin.t);
    let b = sys.motion().boundaries(fin.t);
    let err = x
        .iter()
        .zip(&fin.u)
        .map(|(xi, ui)| (ui - mms_solution(*xi, fin.t, b.x_e, cfg)).abs())
        .fold(0.0_f64, f64::max);
    Ok(RunOutcome {
        n: cfg.n,
        steps: steps - 1,
        dt,
        linf_error: err,
        min_jacobian: min_j,
    })
}

/// One line of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub log10_error: f64,
    /// `(log10 e_N − log10 e_{N/2}) / log10(1/2)`; `None` for the first row.
    pub rate: Option<f64>,
}

/// Runs every `N` (concurrently) and assembles the table in input order.
pub fn run_convergence(cfg: &ExperimentConfig, ns: &[usize]) -> Result<Vec<ConvergenceRow>> {
    for w in ns.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(AleError::Config(format!(
                "N values must double from row to row, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let errors: Vec<Result<f64>> = ns
        .par_iter()
        .map(|&n| {
            let c = ExperimentConfig { n, ..cfg.clone() };
            run_mms(&c).map(|o| o.linf_error.log10())
        })
        .collect();
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ns.len());
    for (&n, e) in ns.iter().zip(errors) {
        let e = e?;
        let rate = rows
            .last()
            .map(|prev| (e - prev.log10_error) / 0.5f64.log10());
        rows.push(ConvergenceRow {
            n,
            log10_error: e,
            rate,
        });
    }
    Ok(rows)
}

pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut w: W) -> Result<()> {
    writeln!(w, "N,log10_err,rate")?;
    for r in rows {
        match r.rate {
            Some(p) => writeln!(w, "{},{:.4},{:.2}", r.n, r.log10_error, p)?,
            None => writeln!(w, "{},{:.4},", r.n, r.log10_error)?,
        }
    }
    Ok(())
}

/// Result of a free-stream run.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeStreamReport {
    pub u_inf: f64,
    pub max_deviation: f64,
    pub steps: usize,
}

/// Coupled-Jacobian march of `u ≡ u_∞` over `[0, t_end]`, tracking the
/// largest deviation at any step.
pub fn run_free_stream(cfg: &ExperimentConfig, u_inf: f64) -> Result<FreeStreamReport> {
    let sys = AdvectionDiffusion::new(cfg, Data::FreeStream(u_inf))?;
    let state = sys.initial_state(cfg)?;
    let filter = cfg.filter.map(|fc| build_filter(cfg, fc)).transpose()?;
    let mut opts = RunOptions::new(cfg.time_step(), cfg.t_end, JacobianMode::Coupled);
    if let Some(f) = &filter {
        opts = opts.with_filter(f, cfg.filter_period());
    }
    let mut dev = 0.0_f64;
    let mut steps = 0usize;
    run_with(&sys, state, &ButcherTableau::classical_rk4(), opts, |s| {
        steps += 1;
        for v in &s.u {
            dev = dev.max((v - u_inf).abs());
        }
    })?;
    Ok(FreeStreamReport {
        u_inf,
        max_deviation: dev,
        steps: steps - 1,
    })
}

/// Stability audit at `samples` uniform instants of `[0, 2π)`.
pub fn audit_sweep(cfg: &ExperimentConfig, samples: usize, alpha: f64) -> Result<Vec<AuditReport>> {
    let sys = AdvectionDiffusion::new(cfg, Data::Manufactured)?;
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let t = 2.0 * PI * k as f64 / samples as f64;
            let (m, ale) = sys.system_at(t)?;
            audit(t, &m, &ale, alpha)
        })
        .collect()
}
