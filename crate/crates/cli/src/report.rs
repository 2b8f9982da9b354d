use std::fmt::Write as _;

use lpmerit_core::{
    Classification, HomogeneousOutcome, HomogeneousStatus, IterationRecord, PointFile,
    SolveOutcome, SolveStatus, SolverConfig, StandardFormLp,
};
use serde::{Deserialize, Serialize};

pub const TRACE_HEADER: &str =
    "iter,f,grad_norm,mu,nu,alpha,gap,primal_res,dual_res,min_x,min_s,rel_err_x";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trace_csv(rows: &[IterationRecord]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        let rel = r.rel_err_x.map(num).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.k,
            num(r.f),
            num(r.grad_norm),
            num(r.mu),
            num(r.nu),
            num(r.alpha),
            num(r.gap),
            num(r.primal_res),
            num(r.dual_res),
            num(r.min_x),
            num(r.min_s),
            rel
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousReport {
    pub status: String,
    pub tau: f64,
    pub kappa: f64,
    pub final_f: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovered: Option<PointFile>,
}

impl From<&HomogeneousOutcome> for HomogeneousReport {
    fn from(h: &HomogeneousOutcome) -> Self {
        Self {
            status: h.status.label().to_string(),
            tau: h.point.tau,
            kappa: h.point.kappa,
            final_f: h.final_f,
            iterations: h.iterations,
            converged: h.converged,
            recovered: match &h.status {
                HomogeneousStatus::OptimalRecovered(p) => Some(PointFile::from(p)),
                _ => None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub status: SolveStatus,
    pub classification: Option<Classification>,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub iterations: usize,
    pub objective_primal: f64,
    pub objective_dual: f64,
    pub point: PointFile,
    pub config: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homogeneous: Option<HomogeneousReport>,
}

impl OutcomeReport {
    pub fn new(lp: &StandardFormLp, outcome: &SolveOutcome, config: &SolverConfig) -> Self {
        Self {
            status: outcome.status,
            classification: outcome.classification,
            final_f: outcome.final_f,
            final_grad_norm: outcome.final_grad_norm,
            iterations: outcome.iterations,
            objective_primal: lp.c.dot(&outcome.point.x),
            objective_dual: lp.b.dot(&outcome.point.lambda),
            point: PointFile::from(&outcome.point),
            config: config.clone(),
            message: outcome.message.clone(),
            homogeneous: None,
        }
    }
}
