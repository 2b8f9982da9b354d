use std::fs;
use std::path::Path;

use lpmerit_core::{
    generate_optimal_lp, generate_unbounded_lp, solve_homogeneous, solve_with_reference,
    to_json_string, Algorithm, FormatError, HomogeneousPoint, PointFile, PrimalDualPoint,
    ProblemFile, SolveStatus, SolverConfig, StandardFormLp,
};
use serde_json::Value;
use thiserror::Error;

use crate::args::{CheckArgs, GenArgs, Kind, SolveArgs};
use crate::report::{trace_csv, HomogeneousReport, OutcomeReport};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NO_OPTIMUM: u8 = 10;
pub const EXIT_ITERATION_LIMIT: u8 = 11;
pub const EXIT_NUMERICAL: u8 = 12;

pub const SEED_ENV: &str = "LPMERIT_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        if e.is_io() {
            Self::Io(e.to_string())
        } else {
            Self::Usage(e.to_string())
        }
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_problem(path: &Path) -> Result<(ProblemFile, StandardFormLp), CliError> {
    let file = ProblemFile::read(path).map_err(|e| match e {
        FormatError::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
        other => usage(format!("{}: {other}", path.display())),
    })?;
    let lp = file.to_lp().map_err(usage)?;
    Ok((file, lp))
}

fn effective_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(text) => text.trim().parse().map_err(|_| {
            usage(format!(
                "{SEED_ENV} must be an unsigned integer, got {text:?}"
            ))
        }),
        Err(_) => Ok(flag),
    }
}

pub fn gen(args: &GenArgs) -> Result<u8, CliError> {
    let seed = effective_seed(args.seed)?;
    let generated = match args.kind {
        Kind::Optimal => generate_optimal_lp(args.m, args.n, seed),
        Kind::Unbounded => generate_unbounded_lp(args.m, args.n, seed),
    }
    .map_err(usage)?;
    write_file(
        &args.out,
        &ProblemFile::from_generated(&generated).to_json(),
    )?;
    println!(
        "wrote {:?} problem ({}x{}, seed {seed}) to {}",
        args.kind,
        args.m,
        args.n,
        args.out.display()
    );
    Ok(EXIT_OK)
}

fn build_config(args: &SolveArgs) -> Result<SolverConfig, CliError> {
    let algorithm = Algorithm::from(args.alg);
    let mut cfg = SolverConfig::for_algorithm(algorithm);
    if let Some(q) = args.q {
        cfg.q = q;
    }
    if let Some(theta) = args.theta {
        cfg.theta = theta;
    }
    if let Some(mu) = args.mu {
        cfg.mu_const = mu;
    }
    if let Some(nu0) = args.nu0 {
        cfg.nu0 = nu0;
    }
    if let Some(max_iter) = args.max_iter {
        cfg.max_iter = max_iter;
    }
    if let Some(tol) = args.tol_grad {
        cfg.tol_grad = tol;
    }
    if let Some(tol) = args.tol_f {
        cfg.tol_f = tol;
    }
    cfg.validate().map_err(usage)?;
    if algorithm == Algorithm::LmAdaptive && cfg.q != 3.0 {
        eprintln!(
            "warning: lm-adaptive uses Lipschitz constant {} which is only justified for q = 3 (got q = {})",
            cfg.lipschitz, cfg.q
        );
    }
    Ok(cfg)
}

pub fn solve(args: &SolveArgs) -> Result<u8, CliError> {
    let cfg = build_config(args)?;
    let (file, lp) = read_problem(&args.input)?;
    let reference = file
        .known_optimum()
        .filter(|p| p.check_dims(lp.m(), lp.n()).is_ok())
        .map(|p| p.x);
    let outcome = solve_with_reference(&lp, &cfg, None, reference.as_ref()).map_err(usage)?;

    let mut report = OutcomeReport::new(&lp, &outcome, &cfg);
    if args.homogeneous_escalate && outcome.status == SolveStatus::NoOptimalSolution {
        let start = HomogeneousPoint::ones(lp.m(), lp.n());
        let h = solve_homogeneous(&lp, &cfg, &start).map_err(usage)?;
        println!(
            "homogeneous model: {} after {} iterations",
            h.status.label(),
            h.iterations
        );
        report.homogeneous = Some(HomogeneousReport::from(&h));
    }

    if let Some(path) = &args.trace {
        write_file(path, &trace_csv(&outcome.trace))?;
    }
    if let Some(path) = &args.report {
        write_file(path, &to_json_string(&report).map_err(usage)?)?;
    }

    println!(
        "status {:?} after {} iterations: f = {:.3e}, |grad|_inf = {:.3e}, c.x = {:.12e}",
        outcome.status,
        outcome.iterations,
        outcome.final_f,
        outcome.final_grad_norm,
        report.objective_primal
    );
    if let Some(class) = outcome.classification {
        println!("classification {class:?}");
    }
    if let Some(msg) = &outcome.message {
        println!("note: {msg}");
    }
    Ok(match outcome.status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::NoOptimalSolution => EXIT_NO_OPTIMUM,
        SolveStatus::IterationLimit => EXIT_ITERATION_LIMIT,
        SolveStatus::NumericalFailure => EXIT_NUMERICAL,
    })
}

fn read_solution(path: &Path) -> Result<PrimalDualPoint, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let inner = ["point", "known_optimum"]
        .iter()
        .find_map(|key| value.get(key).filter(|v| v.is_object()))
        .cloned()
        .unwrap_or(value);
    let point: PointFile = serde_json::from_value(inner).map_err(|e| {
        usage(format!(
            "{}: no x/lambda/s point found ({e})",
            path.display()
        ))
    })?;
    Ok(PrimalDualPoint::from(&point))
}

pub fn check(args: &CheckArgs) -> Result<u8, CliError> {
    let (_, lp) = read_problem(&args.input)?;
    let point = read_solution(&args.solution)?;
    let r = lp.residuals(&point).map_err(usage)?;
    let tol = 1e-6 * lp.scale();
    let gap = r.gap.abs();
    let primal = r.primal.amax();
    let dual = r.dual.amax();
    let min_x = point.x.min();
    let min_s = point.s.min();
    println!("gap     {gap:.6e}");
    println!("primal  {primal:.6e}");
    println!("dual    {dual:.6e}");
    println!("min_x   {min_x:.6e}");
    println!("min_s   {min_s:.6e}");
    let ok = gap <= tol && primal <= tol && dual <= tol && min_x >= -tol && min_s >= -tol;
    println!(
        "tolerance {tol:.6e}: {}",
        if ok { "ok" } else { "violated" }
    );
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}
