//! Explicit Runge-Kutta marching of the coupled `(√𝓙, Û = √𝓙⊙U)` system.
//!
//! Both equations are advanced with the same tableau, which makes the fully
//! discrete scheme free-stream preserving whenever the spatial scheme is.

use std::io::Write;

use crate::ale::check_positive;
use crate::error::{AleError, Result};

/// Explicit Butcher tableau.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ButcherTableau {
    /// `a` is given as its strictly lower triangle: row `k` holds `k` entries.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let s = b.len();
        if s == 0 || a.len() != s || c.len() != s {
            return Err(AleError::InvalidTableau("inconsistent stage counts".into()));
        }
        for (k, row) in a.iter().enumerate() {
            if row.len() > k
                && row[k..].iter().any(|v| *v != 0.0) {
                    return Err(AleError::InvalidTableau(format!(
                        "row {k} is not strictly lower triangular"
                    )));
                }
            let sum: f64 = row.iter().take(k).sum();
            if (sum - c[k]).abs() > 1e-14 {
                return Err(AleError::InvalidTableau(format!(
                    "c[{k}] = {} differs from row sum {sum}",
                    c[k]
                )));
            }
        }
        let bsum: f64 = b.iter().sum();
        if (bsum - 1.0).abs() > 1e-14 {
            return Err(AleError::InvalidTableau(format!("weights sum to {bsum}")));
        }
        let a = a
            .into_iter()
            .enumerate()
            .map(|(k, mut row)| {
                row.resize(k, 0.0);
                row
            })
            .collect();
        Ok(Self { a, b, c })
    }

    pub fn classical_rk4() -> Self {
        Self::new(
            vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 0.5, 1.0],
        )
        .expect("classical RK4 is a valid tableau")
    }

    pub fn forward_euler() -> Self {
        Self::new(vec![vec![]], vec![1.0], vec![0.0]).expect("valid")
    }

    pub fn heun() -> Self {
        Self::new(vec![vec![], vec![1.0]], vec![0.5, 0.5], vec![0.0, 1.0]).expect("valid")
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self, k: usize, nu: usize) -> f64 {
        if nu < k {
            self.a[k][nu]
        } else {
            0.0
        }
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }
}

/// How `√𝓙` is obtained during the march.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianMode {
    /// Analytic values supplied by the system at each stage time.
    Exact,
    /// Integrated alongside `Û` with the same tableau.
    #[default]
    Coupled,
}

/// Semi-discrete problem in ALE form.
pub trait AleSystem {
    fn len(&self) -> usize;

    /// Divergence vector `∇·Ẋ` at time `t` given the stage `√𝓙`.
    fn divergence(&self, t: f64, jsqrt: &[f64]) -> Vec<f64>;

    /// Analytic `√J` at the nodes, when known.
    fn exact_jsqrt(&self, _t: f64) -> Option<Vec<f64>> {
        None
    }

    /// `D_m U + 𝓓U + 𝓛_δ(𝓑U − G) + F` at time `t`; the marching variable's
    /// right-hand side is this vector scaled by `√𝓙`.
    fn rhs(&self, t: f64, jsqrt: &[f64], u: &[f64], out: &mut [f64]) -> Result<()>;
}

/// State of the coupled march.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub jsqrt: Vec<f64>,
    pub uhat: Vec<f64>,
    pub u: Vec<f64>,
}

impl SolverState {
    pub fn new(t: f64, jsqrt: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if jsqrt.len() != u.len() {
            return Err(AleError::DimensionMismatch {
                expected: u.len(),
                got: jsqrt.len(),
            });
        }
        check_positive(&jsqrt, t)?;
        let uhat = jsqrt.iter().zip(&u).map(|(s, v)| s * v).collect();
        Ok(Self { t, jsqrt, uhat, u })
    }

    fn from_hat(t: f64, jsqrt: Vec<f64>, uhat: Vec<f64>) -> Result<Self> {
        check_positive(&jsqrt, t)?;
        let u = uhat.iter().zip(&jsqrt).map(|(v, s)| v / s).collect();
        Ok(Self { t, jsqrt, uhat, u })
    }
}

/// One explicit RK step of the coupled system.
pub fn rk_step<S: AleSystem + ?Sized>(
    system: &S,
    state: &SolverState,
    dt: f64,
    tableau: &ButcherTableau,
    mode: JacobianMode,
) -> Result<SolverState> {
    let n = state.u.len();
    let s = tableau.stages();
    let mut k_j: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut k_u: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut rhs = vec![0.0; n];
    for k in 0..s {
        let tk = state.t + tableau.c()[k] * dt;
        let jsqrt_k = match mode {
            JacobianMode::Coupled => {
                let mut j = state.jsqrt.clone();
                for nu in 0..k {
                    let a = tableau.a(k, nu);
                    if a != 0.0 {
                        for (ji, kv) in j.iter_mut().zip(&k_j[nu]) {
                            *ji += dt * a * kv;
                        }
                    }
                }
                j
            }
            JacobianMode::Exact => exact_jsqrt(system, tk)?,
        };
        let mut uhat_k = state.uhat.clone();
        for nu in 0..k {
            let a = tableau.a(k, nu);
            if a != 0.0 {
                for (ui, kv) in uhat_k.iter_mut().zip(&k_u[nu]) {
                    *ui += dt * a * kv;
                }
            }
        }
        let stage = SolverState::from_hat(tk, jsqrt_k, uhat_k)?;
        system.rhs(tk, &stage.jsqrt, &stage.u, &mut rhs)?;
        k_u.push(stage.jsqrt.iter().zip(&rhs).map(|(j, r)| j * r).collect());
        if mode == JacobianMode::Coupled {
            let div = system.divergence(tk, &stage.jsqrt);
            k_j.push(
                stage
                    .jsqrt
                    .iter()
                    .zip(&div)
                    .map(|(j, d)| 0.5 * d * j)
                    .collect(),
            );
        }
    }
    let t_new = state.t + dt;
    let jsqrt = match mode {
        JacobianMode::Coupled => {
            let mut j = state.jsqrt.clone();
            for (b, kv) in tableau.b().iter().zip(&k_j) {
                for (ji, v) in j.iter_mut().zip(kv) {
                    *ji += dt * b * v;
                }
            }
            j
        }
        JacobianMode::Exact => exact_jsqrt(system, t_new)?,
    };
    let mut uhat = state.uhat.clone();
    for (b, kv) in tableau.b().iter().zip(&k_u) {
        for (ui, v) in uhat.iter_mut().zip(kv) {
            *ui += dt * b * v;
        }
    }
    let next = SolverState::from_hat(t_new, jsqrt, uhat)?;
    if next.u.iter().any(|v| !v.is_finite()) {
        return Err(AleError::NonFinite { t: t_new });
    }
    Ok(next)
}

fn exact_jsqrt<S: AleSystem + ?Sized>(system: &S, t: f64) -> Result<Vec<f64>> {
    system.exact_jsqrt(t).ok_or_else(|| {
        AleError::Config("exact jacobian mode requires analytic jacobian values".into())
    })
}

/// Post-step filter acting on the physical solution.
pub trait Filter {
    fn apply(&self, u: &mut [f64]);
}

/// `U ← 𝓕U`, then `Û` is rebuilt from the filtered `U`.
pub fn filter_step<F: Filter + ?Sized>(mut state: SolverState, filter: &F) -> SolverState {
    filter.apply(&mut state.u);
    for ((h, u), j) in state.uhat.iter_mut().zip(&state.u).zip(&state.jsqrt) {
        *h = j * u;
    }
    state
}

/// Marching options.
#[derive(Clone, Copy)]
pub struct RunOptions<'a> {
    pub dt: f64,
    pub t_end: f64,
    pub mode: JacobianMode,
    pub filter: Option<&'a dyn Filter>,
    /// The filter acts after each step that crosses a multiple of this
    /// interval (measured from the start time) and after the final step;
    /// zero filters every step.
    pub filter_period: f64,
}

impl<'a> RunOptions<'a> {
    pub fn new(dt: f64, t_end: f64, mode: JacobianMode) -> Self {
        Self {
            dt,
            t_end,
            mode,
            filter: None,
            filter_period: 0.0,
        }
    }

    pub fn with_filter(mut self, filter: &'a dyn Filter, period: f64) -> Self {
        self.filter = Some(filter);
        self.filter_period = period;
        self
    }
}

fn crosses(period: f64, from: f64, to: f64) -> bool {
    if !(period > 0.0) {
        return true;
    }
    let k = |s: f64| (s / period + 1e-9).floor();
    k(to) > k(from)
}

/// Marches from `state` to `t_end` with steps of `dt`, shortening the last
/// step to land on `t_end`. `observe` sees every accepted state, including
/// the initial one.
pub fn run_with<S, O>(
    system: &S,
    mut state: SolverState,
    tableau: &ButcherTableau,
    opts: RunOptions<'_>,
    mut observe: O,
) -> Result<SolverState>
where
    S: AleSystem + ?Sized,
    O: FnMut(&SolverState),
{
    if !(opts.dt > 0.0) {
        return Err(AleError::Config(format!("time step must be positive, got {}", opts.dt)));
    }
    observe(&state);
    let t0 = state.t;
    let span = opts.t_end - t0;
    if span <= 0.0 {
        return Ok(state);
    }
    let full = (span / opts.dt * (1.0 - 1e-12)).floor() as usize;
    for step in 0..=full {
        let t_next = if step == full {
            opts.t_end
        } else {
            t0 + (step + 1) as f64 * opts.dt
        };
        let dt = t_next - state.t;
        if dt <= 0.0 {
            break;
        }
        let t_prev = state.t;
        state = rk_step(system, &state, dt, tableau, opts.mode)?;
        state.t = t_next;
        if let Some(f) = opts.filter {
            if step == full || crosses(opts.filter_period, t_prev - t0, t_next - t0) {
                state = filter_step(state, f);
            }
        }
        observe(&state);
    }
    Ok(state)
}

pub fn run<S: AleSystem + ?Sized>(
    system: &S,
    state: SolverState,
    tableau: &ButcherTableau,
    opts: RunOptions<'_>,
) -> Result<SolverState> {
    run_with(system, state, tableau, opts, |_| {})
}

/// Writes one checkpoint as CSV rows `t,x,u`.
pub fn write_checkpoint_csv<W: Write>(state: &SolverState, nodes: &[f64], mut w: W) -> Result<()> {
    for (x, u) in nodes.iter().zip(&state.u) {
        writeln!(w, "{:.12},{:.15e},{:.15e}", state.t, x, u)?;
    }
    Ok(())
}
