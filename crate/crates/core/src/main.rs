use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ale_mol::audit::write_audit_csv;
use ale_mol::curvilinear::{fsp_demo_default, write_fsp_csv};
use ale_mol::experiment::{
    audit_sweep, parse_jacobian_mode_str, run_convergence, run_free_stream, write_convergence_csv, Case,
    ExperimentConfig, FilterConfig,
};
use ale_mol::sbp::{couple_blocks, sbp_residual, InterfacePenalty, SbpOperator1D, SbpOrder};
use ale_mol::{AleError, Result};

const FSP_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "ale-mol", version, about = "SBP method of lines on moving meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence table for the manufactured solution.
    Converge(Common),
    /// Eigenvalue audit of the energy condition over one motion period.
    Audit {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 32)]
        samples: usize,
    },
    /// Free-stream preservation check in 1D and on the 2D curvilinear demo.
    Freestream {
        #[command(flatten)]
        common: Common,
        /// Free-stream values to test.
        #[arg(long, value_delimiter = ',', default_value = "1,-3.7")]
        u_inf: Vec<f64>,
    },
    /// SBP residuals of single-block and coupled operators.
    Ops(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Plain-text key = value file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    /// Boundary-layer spacings; comma separated for `converge`.
    #[arg(long = "N", value_delimiter = ',')]
    n: Vec<usize>,
    /// Operator accuracy pair, `4,2` or `2,1`.
    #[arg(long)]
    orders: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// `exact` or `coupled`.
    #[arg(long = "jacobian-mode")]
    jacobian_mode: Option<String>,
    /// `none` or ORDER:SIGMA.
    #[arg(long)]
    filter: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(p) = &self.config {
            cfg.apply_config_file(p)?;
        }
        if let Some(c) = &self.case {
            cfg.case = Case::parse(c)?;
        }
        if let Some(&n) = self.n.first() {
            cfg.n = n;
        }
        if let Some(o) = &self.orders {
            cfg.order = SbpOrder::parse(o)?;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(m) = &self.jacobian_mode {
            cfg.jacobian_mode = parse_jacobian_mode_str(m)?;
        }
        if let Some(f) = &self.filter {
            cfg.filter = FilterConfig::parse(f)?;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output(cfg: &ExperimentConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout()),
    })
}

fn converge(common: &Common) -> Result<bool> {
    let cfg = common.config()?;
    let ns = if common.n.is_empty() {
        vec![8, 16, 32, 64, 128]
    } else {
        common.n.clone()
    };
    let rows = run_convergence(&cfg, &ns)?;
    write_convergence_csv(&rows, output(&cfg)?)?;
    Ok(true)
}

fn audit(common: &Common, samples: usize) -> Result<bool> {
    let cfg = common.config()?;
    let reports = audit_sweep(&cfg, samples, 0.0)?;
    write_audit_csv(&reports, output(&cfg)?)?;
    Ok(reports.iter().all(|r| r.pass() && r.inertia_match()))
}

fn freestream(common: &Common, u_inf: &[f64]) -> Result<bool> {
    let cfg = common.config()?;
    let mut ok = true;
    let mut w = output(&cfg)?;
    writeln!(w, "u_inf,max_deviation,pass")?;
    for &u in u_inf {
        let rep = run_free_stream(&cfg, u)?;
        let pass = rep.max_deviation <= FSP_TOL;
        ok &= pass;
        writeln!(w, "{},{:.3e},{}", u, rep.max_deviation, if pass { "PASS" } else { "FAIL" })?;
    }
    let reports = fsp_demo_default(u_inf)?;
    ok &= reports.iter().all(|r| r.fsp_deviation <= FSP_TOL);
    write_fsp_csv(&reports, &mut w)?;
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

fn ops(common: &Common) -> Result<bool> {
    let cfg = common.config()?;
    let mut w = output(&cfg)?;
    writeln!(w, "operator,nodes,residual")?;
    let mut worst = 0.0_f64;
    for order in [SbpOrder::Order21, SbpOrder::Order42] {
        let n = order.min_nodes().max(cfg.n + 1);
        let single = SbpOperator1D::new(order, n, 1.0 / (n - 1) as f64)?;
        let r = sbp_residual(&single);
        worst = worst.max(r);
        writeln!(w, "{order} single,{n},{r:.3e}")?;
        let left = SbpOperator1D::new(order, n, 5.0 / (n - 1) as f64)?;
        let right = SbpOperator1D::new(order, n, 1.0 / (n - 1) as f64)?.with_origin(left.end());
        let coupled = couple_blocks(left, right, InterfacePenalty::CONSERVATIVE)?;
        let r = sbp_residual(&coupled);
        worst = worst.max(r);
        writeln!(w, "{order} two-block,{},{r:.3e}", 2 * n)?;
    }
    Ok(worst <= 1e-13)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Converge(c) => converge(c),
        Command::Audit { common, samples } => audit(common, *samples),
        Command::Freestream { common, u_inf } => freestream(common, u_inf),
        Command::Ops(c) => ops(c),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            report(&e);
            ExitCode::from(2)
        }
    }
}

fn report(e: &AleError) {
    eprintln!("error: {e}");
}
