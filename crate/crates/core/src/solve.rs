//! Solver dispatch and the JSON solve request/report.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matching::{self, DemandCertificate, MatchingError};
use crate::metric::LossKind;
use crate::minimax::{self, AgnosticOptions, AgnosticProblem, BruteForceOptions, SolveError, DEFAULT_BUDGET};
use crate::oig::{build_problem, evaluate, AssignmentProblem, LearnerAssignment, OigError, TableDoc};
use crate::rational::{self, Rational};

#[derive(Debug, Error)]
pub enum DispatchError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Oig(#[from] OigError),
    #[error("the matching solver only handles realizable zero-one problems")]
    MatchingUnsupported,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Realizable,
    Agnostic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    #[default]
    Auto,
    Matching,
    Brute,
    Local,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Auto => "auto",
            SolverKind::Matching => "matching",
            SolverKind::Brute => "brute",
            SolverKind::Local => "local",
        }
    }
}

/// An exact optimum together with the solver that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSolution {
    pub value: Rational,
    pub learner: LearnerAssignment,
    pub solver: SolverKind,
    pub d_star: Option<usize>,
    pub certificate: Option<DemandCertificate>,
}

/// Exact optimum: the matching solver for realizable 0-1 problems,
/// exhaustive search otherwise.
pub fn solve_exact(problem: &AssignmentProblem, budget: u64) -> Result<ExactSolution, DispatchError> {
    if problem.space().kind() == LossKind::ZeroOne && !problem.has_offsets() {
        let sol = matching::optimal_zero_one(problem)?;
        return Ok(ExactSolution {
            value: sol.epsilon,
            learner: sol.learner,
            solver: SolverKind::Matching,
            d_star: Some(sol.d_star),
            certificate: sol.certificate,
        });
    }
    let sol = minimax::brute_force_minimax(problem, &BruteForceOptions { budget, table_labels_only: false })?;
    Ok(ExactSolution {
        value: sol.value,
        learner: sol.learner,
        solver: SolverKind::Brute,
        d_star: None,
        certificate: None,
    })
}

fn default_seed() -> u64 {
    0
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

fn default_restarts() -> usize {
    16
}

/// CLI-facing solve request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveRequest {
    pub table: TableDoc,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RowError {
    pub row: String,
    #[serde(with = "rational::as_string")]
    pub error: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub mode: Mode,
    pub solver: SolverKind,
    /// `false` when the value is only a local-search upper bound.
    pub exact: bool,
    #[serde(with = "rational::as_string")]
    pub epsilon: Rational,
    pub d_star: Option<usize>,
    pub learner: BTreeMap<String, String>,
    pub certificates: Vec<DemandCertificate>,
    pub per_row: Vec<RowError>,
    pub seed: u64,
    pub budget: u64,
    pub version: &'static str,
}

fn report(
    request: &SolveRequest,
    problem: &AssignmentProblem,
    solver: SolverKind,
    exact: bool,
    learner: &LearnerAssignment,
    d_star: Option<usize>,
    certificates: Vec<DemandCertificate>,
) -> Result<SolveReport, DispatchError> {
    let eval = evaluate(problem, learner)?;
    let per_row = eval
        .per_row
        .iter()
        .enumerate()
        .map(|(r, &error)| RowError { row: problem.table().row_name(r), error })
        .collect();
    Ok(SolveReport {
        mode: request.mode,
        solver,
        exact,
        epsilon: eval.worst,
        d_star,
        learner: learner.to_named(problem),
        certificates,
        per_row,
        seed: request.seed,
        budget: request.budget,
        version: env!("CARGO_PKG_VERSION"),
    })
}

/// Runs a solve request; `base_dir` resolves a label space given by path.
pub fn run_request(request: &SolveRequest, base_dir: &Path) -> Result<SolveReport, DispatchError> {
    let table = request.table.into_table(base_dir)?;
    match request.mode {
        Mode::Realizable => {
            let problem = build_problem(&table);
            let zero_one = table.space().kind() == LossKind::ZeroOne;
            let solver = match request.solver {
                SolverKind::Auto if zero_one => SolverKind::Matching,
                SolverKind::Auto => {
                    let opts = BruteForceOptions { budget: request.budget, table_labels_only: false };
                    match minimax::brute_force_minimax(&problem, &opts) {
                        Ok(sol) => {
                            return report(request, &problem, SolverKind::Brute, true, &sol.learner, None, vec![])
                        }
                        Err(SolveError::BudgetExceeded { .. }) => SolverKind::Local,
                        Err(e) => return Err(e.into()),
                    }
                }
                other => other,
            };
            match solver {
                SolverKind::Matching => {
                    if !zero_one {
                        return Err(DispatchError::MatchingUnsupported);
                    }
                    let sol = matching::optimal_zero_one(&problem)?;
                    let certs = sol.certificate.iter().cloned().collect();
                    report(request, &problem, solver, true, &sol.learner, Some(sol.d_star), certs)
                }
                SolverKind::Brute => {
                    let opts = BruteForceOptions { budget: request.budget, table_labels_only: false };
                    let sol = minimax::brute_force_minimax(&problem, &opts)?;
                    report(request, &problem, solver, true, &sol.learner, None, vec![])
                }
                SolverKind::Local | SolverKind::Auto => {
                    let sol = minimax::local_search_minimax(&problem, request.restarts, request.seed)?;
                    report(request, &problem, SolverKind::Local, false, &sol.learner, None, vec![])
                }
            }
        }
        Mode::Agnostic => {
            let agnostic = AgnosticProblem::from_table(&table);
            let opts = AgnosticOptions { budget: request.budget, restarts: request.restarts, seed: request.seed };
            let exact = match request.solver {
                SolverKind::Matching => return Err(DispatchError::MatchingUnsupported),
                SolverKind::Brute => true,
                SolverKind::Local => false,
                SolverKind::Auto => agnostic.exhaustive_size().is_some_and(|s| s <= request.budget as u128),
            };
            let sol = minimax::agnostic_minimax(&agnostic, exact, &opts)?;
            let solver = if exact { SolverKind::Brute } else { SolverKind::Local };
            report(request, &sol.problem, solver, exact, &sol.learner, None, vec![])
        }
    }
}
