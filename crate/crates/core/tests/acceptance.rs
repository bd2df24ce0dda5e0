//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::f64::consts::PI;
use std::process::ExitCode;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use ale_mol::ale::reynolds_identity_residual;
use ale_mol::curvilinear::fsp_demo_default;
use ale_mol::eigen::{symmetric_eigen, DEFAULT_TOL};
use ale_mol::experiment::{
    audit_sweep, mms_data, mms_solution, run_convergence, run_free_stream, AdvectionDiffusion, Case, Data,
    ExperimentConfig, DEFAULT_FILTER,
};
use ale_mol::integrator::{rk_step, run, AleSystem, ButcherTableau, JacobianMode, RunOptions, SolverState};
use ale_mol::sbp::{couple_blocks, sbp_residual, InterfacePenalty, SbpDerivative, SbpOperator1D, SbpOrder};
use ale_mol::Result;

const TABLE_NS: [usize; 5] = [8, 16, 32, 64, 128];
const MOVING_LOG_ERR: [f64; 5] = [-2.0192, -2.7303, -3.5558, -4.4243, -5.3045];
const MOVING_RATE: [f64; 4] = [2.36, 2.74, 2.89, 2.92];
const STATIONARY_LOG_ERR: [f64; 5] = [-1.8639, -2.6741, -3.5329, -4.3916, -5.2678];
const STATIONARY_RATE: [f64; 4] = [2.69, 2.85, 2.85, 2.91];
const RATE_TOL: f64 = 0.25;
const LOG_ERR_TOL: f64 = 0.3;
const FSP_TOL: f64 = 1e-12;
const AUDIT_SAMPLES: usize = 32;
const SBP_TOL: f64 = 1e-13;
const REYNOLDS_TOL: f64 = 1e-12;
const RICHARDSON_TARGET: f64 = 16.0;
const RICHARDSON_TOL: f64 = 1.0;
const MOL_STEP_TOL: f64 = 1e-15;
const MMS_TOL: f64 = 1e-6;
const MMS_PROBE: f64 = 1e-4;
const EIGEN_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn table(case: Case, log_err: &[f64; 5], rates: &[f64; 4]) -> Result<Outcome> {
    let cfg = ExperimentConfig {
        case,
        jacobian_mode: JacobianMode::Exact,
        filter: Some(DEFAULT_FILTER),
        ..Default::default()
    };
    let rows = run_convergence(&cfg, &TABLE_NS)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        pass &= (row.log10_error - log_err[k]).abs() <= LOG_ERR_TOL;
        match row.rate {
            Some(p) => {
                pass &= (p - rates[k - 1]).abs() <= RATE_TOL;
                parts.push(format!("N={} e={:.4} p={:.2}", row.n, row.log10_error, p));
            }
            None => parts.push(format!("N={} e={:.4}", row.n, row.log10_error)),
        }
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn free_stream() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    for filter in [None, Some(DEFAULT_FILTER)] {
        let cfg = ExperimentConfig {
            n: 32,
            case: Case::Moving,
            filter,
            ..Default::default()
        };
        for u in [1.0, -3.7] {
            worst = worst.max(run_free_stream(&cfg, u)?.max_deviation);
        }
    }
    let worst_2d = fsp_demo_default(&[1.0, -3.7])?
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.fsp_deviation));
    Ok(Outcome {
        pass: worst <= FSP_TOL && worst_2d <= FSP_TOL,
        detail: format!("1D max deviation {worst:.2e}, 2D max deviation {worst_2d:.2e}"),
    })
}

fn stability_audit() -> Result<Outcome> {
    let cfg = ExperimentConfig {
        n: 16,
        case: Case::Moving,
        ..Default::default()
    };
    let reports = audit_sweep(&cfg, AUDIT_SAMPLES, 0.0)?;
    let worst = reports
        .iter()
        .map(|r| r.lambda_max_energy / r.norm_energy)
        .fold(f64::NEG_INFINITY, f64::max);
    let ok = reports.len() == AUDIT_SAMPLES && reports.iter().all(|r| r.pass() && r.inertia_match());
    Ok(Outcome {
        pass: ok,
        detail: format!("{} samples, max λ_max/‖S‖ = {worst:.2e}", reports.len()),
    })
}

fn sbp_structure() -> Result<Outcome> {
    let n = 21;
    let mut worst = 0.0_f64;
    for order in [SbpOrder::Order21, SbpOrder::Order42] {
        worst = worst.max(sbp_residual(&SbpOperator1D::new(order, n, 0.1)?));
    }
    let left = SbpOperator1D::new(SbpOrder::Order42, n, 0.5)?.with_origin(-PI);
    let right = SbpOperator1D::new(SbpOrder::Order42, n, 0.1)?.with_origin(left.end());
    let op = couple_blocks(left, right, InterfacePenalty::CONSERVATIVE)?;
    worst = worst.max(sbp_residual(&op));
    let pmax = op.quadrature().iter().cloned().fold(0.0, f64::max);
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let mut worst_dm = 0.0_f64;
    for _ in 0..50 {
        let xdot: Vec<f64> = (0..op.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        worst_dm = worst_dm.max(reynolds_identity_residual(&op, &xdot) / pmax);
    }
    Ok(Outcome {
        pass: worst <= SBP_TOL && worst_dm <= REYNOLDS_TOL,
        detail: format!("sbp residual {worst:.2e}, D_m identity residual / ‖P‖ {worst_dm:.2e}"),
    })
}

struct ConstantDivergence(f64);

impl AleSystem for ConstantDivergence {
    fn len(&self) -> usize {
        3
    }
    fn divergence(&self, _t: f64, _jsqrt: &[f64]) -> Vec<f64> {
        vec![self.0; 3]
    }
    fn rhs(&self, _t: f64, _jsqrt: &[f64], _u: &[f64], out: &mut [f64]) -> Result<()> {
        out.iter_mut().for_each(|v| *v = 0.0);
        Ok(())
    }
}

fn jacobian_ode() -> Result<Outcome> {
    let c = 1.3;
    let t_end = 1.0;
    let j0 = [1.0, 0.7, 2.5];
    let err = |dt: f64| -> Result<f64> {
        let st = SolverState::new(0.0, j0.to_vec(), vec![1.0; 3])?;
        let fin = run(
            &ConstantDivergence(c),
            st,
            &ButcherTableau::classical_rk4(),
            RunOptions::new(dt, t_end, JacobianMode::Coupled),
        )?;
        Ok(fin
            .jsqrt
            .iter()
            .zip(&j0)
            .map(|(s, s0)| (s - s0 * (0.5 * c * t_end).exp()).abs())
            .fold(0.0, f64::max))
    };
    let ratio = err(0.1)? / err(0.05)?;
    Ok(Outcome {
        pass: (ratio - RICHARDSON_TARGET).abs() <= RICHARDSON_TOL,
        detail: format!("Richardson ratio {ratio:.3}"),
    })
}

fn method_of_lines() -> Result<Outcome> {
    let cfg = ExperimentConfig {
        n: 16,
        case: Case::Stationary,
        ..Default::default()
    };
    let sys = AdvectionDiffusion::new(&cfg, Data::Manufactured)?;
    let dt = cfg.time_step();
    let n = sys.len();
    let ones = vec![1.0; n];
    let f = |t: f64, u: &[f64]| -> Result<Vec<f64>> {
        let mut out = vec![0.0; n];
        sys.rhs(t, &ones, u, &mut out)?;
        Ok(out)
    };
    let mut reference = sys.initial_state(&cfg)?.u;
    let mut t = 0.0;
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let k1 = f(t, &reference)?;
        let s: Vec<f64> = (0..n).map(|i| reference[i] + 0.5 * dt * k1[i]).collect();
        let k2 = f(t + 0.5 * dt, &s)?;
        let s: Vec<f64> = (0..n).map(|i| reference[i] + 0.5 * dt * k2[i]).collect();
        let k3 = f(t + 0.5 * dt, &s)?;
        let s: Vec<f64> = (0..n).map(|i| reference[i] + dt * k3[i]).collect();
        let k4 = f(t + dt, &s)?;
        let next: Vec<f64> = (0..n)
            .map(|i| reference[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        let st = SolverState::new(t, ones.clone(), reference.clone())?;
        let coupled = rk_step(&sys, &st, dt, &ButcherTableau::classical_rk4(), JacobianMode::Coupled)?;
        for (a, b) in coupled.u.iter().zip(&next) {
            worst = worst.max((a - b).abs());
        }
        reference = next;
        t += dt;
    }
    Ok(Outcome {
        pass: worst <= MOL_STEP_TOL,
        detail: format!("max per-step difference {worst:.2e} over 50 steps"),
    })
}

fn fd1(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

fn fd2(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h)
}

fn mms_residual() -> Result<Outcome> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(8);
    let mut worst = 0.0_f64;
    let h = MMS_PROBE;
    for case in [Case::Moving, Case::Stationary] {
        let cfg = ExperimentConfig {
            case,
            ..Default::default()
        };
        let motion = cfg.motion();
        for _ in 0..100 {
            let t = rng.gen_range(0.0..2.0 * PI);
            let b = motion.boundaries(t);
            let x = rng.gen_range(b.x_s..b.x_e);
            let x_e = |s: f64| motion.boundaries(s).x_e;
            let u_x = |y: f64| mms_solution(y, t, b.x_e, &cfg);
            let u_t = |s: f64| mms_solution(x, s, x_e(s), &cfg);
            let d = mms_data(x, t, &cfg);
            let r = fd1(&u_t, t, h) - cfg.epsilon * fd2(&u_x, x, h) + fd1(&u_x, x, h) - d.f;
            worst = worst.max(r.abs());
            let ub = |y: f64| mms_solution(y, t, b.x_e, &cfg);
            let g = cfg.epsilon * fd1(&ub, b.x_s, h) - (1.0 - b.xdot_s) * ub(b.x_s) - d.g_s;
            worst = worst.max(g.abs());
            let u0 = mms_solution(x, 0.0, motion.boundaries(0.0).x_e, &cfg);
            worst = worst.max((u0 - d.u0).abs());
        }
    }
    Ok(Outcome {
        pass: worst <= MMS_TOL,
        detail: format!("max residual {worst:.2e} at 200 points"),
    })
}

/// Characteristic polynomial coefficients, constant term first.
fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + DMatrix::identity(n, n) * c[n - k + 1];
        c[n - k] = -(a * &m).trace() / k as f64;
    }
    c
}

fn poly_roots(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    let eval = |z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck);
    let bound = 1.0 + c[..n].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let prev = z.clone();
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, zj) in prev.iter().enumerate() {
                if j != i {
                    denom *= z[i] - zj;
                }
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
        }
    }
    let real = |x: f64| c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck);
    let dreal = |x: f64| {
        c.iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &ck)| acc * x + k as f64 * ck)
    };
    let mut roots: Vec<f64> = z
        .iter()
        .map(|r| {
            let mut x = r.re;
            for _ in 0..3 {
                let d = dreal(x);
                if d != 0.0 {
                    x -= real(x) / d;
                }
            }
            x
        })
        .collect();
    roots.sort_by(|a, b| a.total_cmp(b));
    roots
}

fn eigen_oracle() -> Result<Outcome> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(9);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let g = DMatrix::from_fn(8, 8, |_, _| rng.gen_range(-1.0..1.0));
        let s = (&g + g.transpose()) * 0.5;
        let jac = symmetric_eigen(&s, DEFAULT_TOL)?;
        let oracle = poly_roots(&char_poly(&s));
        let scale = jac.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        for (a, b) in jac.iter().zip(&oracle) {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    Ok(Outcome {
        pass: worst <= EIGEN_TOL,
        detail: format!("max relative deviation {worst:.2e}"),
    })
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, fn() -> Result<Outcome>)> = vec![
        ("1 convergence table, moving domain", || table(Case::Moving, &MOVING_LOG_ERR, &MOVING_RATE)),
        ("2 convergence table, stationary domain", || {
            table(Case::Stationary, &STATIONARY_LOG_ERR, &STATIONARY_RATE)
        }),
        ("3 free-stream preservation", free_stream),
        ("4 stability audit", stability_audit),
        ("5 SBP structure", sbp_structure),
        ("6 Jacobian ODE order", jacobian_ode),
        ("7 method-of-lines sanity", method_of_lines),
        ("8 manufactured data", mms_residual),
        ("9 eigensolver oracle", eigen_oracle),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
