//! Apportionments and the factor-two learner for metric losses.
//!
//! An α-apportionment splits a row's error budget α across its `n`
//! coordinates. Given apportionments satisfied by some witness learner, the
//! factor-two learner fills each variable with the completion of the
//! dependent row that budgets the least error to it. The triangle inequality
//! then bounds every row's error by `2α + δ/3`.

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::matching::{self, MatchingError};
use crate::metric::LossKind;
use crate::minimax::{self, BruteForceOptions, SolveError};
use crate::oig::{evaluate, AssignmentProblem, LearnerAssignment, OigError};
use crate::rational::{self, Rational};

#[derive(Debug, Error)]
pub enum ApportionError {
    #[error("apportionment entry {index} is negative")]
    Negative { index: usize },
    #[error("apportionment entries sum to {sum}, expected {total}")]
    SumMismatch { total: Rational, sum: Rational },
    #[error("witness error {error} on row {row} exceeds alpha = {alpha}")]
    WitnessExceeds { row: usize, error: Rational, alpha: Rational },
    #[error("variable {0} has no dependent row")]
    NoDependents(usize),
    #[error("delta must be positive, got {0}")]
    NonPositiveDelta(Rational),
    #[error("factor-two learner needs a metric loss, got {0}")]
    NotMetric(LossKind),
    #[error("epsilon {epsilon} is below the optimal error {optimum}")]
    EpsilonBelowOptimum { epsilon: Rational, optimum: Rational },
    #[error("triangle step fails on row {row} coordinate {coordinate}: loss {loss} > {budget}")]
    TriangleViolated { row: usize, coordinate: usize, loss: Rational, budget: Rational },
    #[error("factor-two bound fails on row {row}: {realized} > {bound}")]
    BoundViolated { row: usize, realized: Rational, bound: Rational },
    #[error(transparent)]
    Oig(#[from] OigError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Matching(#[from] MatchingError),
}

/// Nonnegative entries summing exactly to `total`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Apportionment {
    total: Rational,
    entries: Vec<Rational>,
}

impl Apportionment {
    pub fn new(entries: Vec<Rational>) -> Result<Self, ApportionError> {
        let total = entries.iter().copied().sum();
        Self::with_total(total, entries)
    }

    pub fn with_total(total: Rational, entries: Vec<Rational>) -> Result<Self, ApportionError> {
        if let Some(index) = entries.iter().position(|e| !rational::is_nonnegative(e)) {
            return Err(ApportionError::Negative { index });
        }
        let sum: Rational = entries.iter().copied().sum();
        if sum != total {
            return Err(ApportionError::SumMismatch { total, sum });
        }
        Ok(Apportionment { total, entries })
    }

    pub fn uniform(total: Rational, n: usize) -> Self {
        let share = total / Rational::from_integer(n as i64);
        Apportionment { total, entries: vec![share; n] }
    }

    pub fn total(&self) -> Rational {
        self.total
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }
}

/// Reads per-row α-apportionments off a witness learner.
///
/// Entry `i` of row `r` is `(1/n)·loss(rᵢ, witness(ℓᵢ))` plus an equal share
/// of the row's slack `α − error(r)`, so every entry vector sums to `alpha`
/// and the witness satisfies all of them.
pub fn derive_apportionments(
    problem: &AssignmentProblem,
    witness: &LearnerAssignment,
    alpha: Rational,
) -> Result<Vec<Apportionment>, ApportionError> {
    let eval = evaluate(problem, witness)?;
    let n = Rational::from_integer(problem.n() as i64);
    let mut out = Vec::with_capacity(problem.rows().len());
    for (r, (row, deps)) in problem.rows().iter().zip(problem.dependence()).enumerate() {
        let error = eval.per_row[r];
        if error > alpha {
            return Err(ApportionError::WitnessExceeds { row: r, error, alpha });
        }
        let slack = (alpha - error) / n;
        let entries =
            row.iter().zip(deps).map(|(&y, &v)| problem.space().loss_at(y, witness.get(v)) / n + slack).collect();
        out.push(Apportionment::with_total(alpha, entries)?);
    }
    Ok(out)
}

/// Per-coordinate window: a row may be chosen when its budget for the
/// variable is within `δ/3` of the minimum on the loss scale, i.e. within
/// `δ/(3n)` on the apportionment scale.
fn choice_window(delta: Rational, n: usize) -> Rational {
    delta / Rational::from_integer(3 * n as i64)
}

/// For each variable, the dependent row whose apportionment budgets the
/// least error to it (within the δ window, lowest row index first), and that
/// row's completion as the prediction. Returns the learner and the chosen
/// row per variable.
pub fn two_factor_choice(
    problem: &AssignmentProblem,
    apportionments: &[Apportionment],
    delta: Rational,
) -> Result<(LearnerAssignment, Vec<usize>), ApportionError> {
    if delta <= Rational::zero() {
        return Err(ApportionError::NonPositiveDelta(delta));
    }
    let rows = problem.rows().len();
    if apportionments.len() != rows {
        return Err(OigError::ApportionmentCount { expected: rows, got: apportionments.len() }.into());
    }
    let n = problem.n();
    for (row, app) in apportionments.iter().enumerate() {
        if app.entries().len() != n {
            return Err(OigError::ApportionmentLength { row, expected: n, got: app.entries().len() }.into());
        }
    }
    let window = choice_window(delta, n);
    let mut choice = Vec::with_capacity(problem.variables().len());
    let mut chosen_rows = Vec::with_capacity(problem.variables().len());
    for (v, var) in problem.variables().iter().enumerate() {
        let deps = problem.dependents(v);
        let budget = |r: usize| apportionments[r].entries()[var.hole()];
        let min = deps.iter().map(|&r| budget(r)).min().ok_or(ApportionError::NoDependents(v))?;
        let chosen =
            *deps.iter().find(|&&r| budget(r) - min <= window).expect("the minimising row is always inside the window");
        choice.push(problem.completion(chosen, v));
        chosen_rows.push(chosen);
    }
    Ok((LearnerAssignment::new(choice), chosen_rows))
}

pub fn two_factor_learner(
    problem: &AssignmentProblem,
    apportionments: &[Apportionment],
    delta: Rational,
) -> Result<LearnerAssignment, ApportionError> {
    two_factor_choice(problem, apportionments, delta).map(|(learner, _)| learner)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowVerification {
    pub row: usize,
    #[serde(with = "rational::as_string")]
    pub error: Rational,
    /// Smallest `n·(λ_N + λᵢ) − loss(chosen, yᵢ)` over the row's coordinates.
    #[serde(with = "rational::as_string")]
    pub triangle_slack: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorTwoReport {
    #[serde(with = "rational::as_string")]
    pub epsilon: Rational,
    #[serde(with = "rational::as_string")]
    pub delta: Rational,
    #[serde(with = "rational::as_string")]
    pub realized: Rational,
    #[serde(with = "rational::as_string")]
    pub bound: Rational,
    pub holds: bool,
    pub per_row: Vec<RowVerification>,
}

/// Runs the factor-two construction against an optimal witness found by the
/// exact solvers and checks `realized ≤ 2ε + δ` exactly.
pub fn verify_factor_two(
    problem: &AssignmentProblem,
    epsilon: Rational,
    delta: Rational,
) -> Result<FactorTwoReport, ApportionError> {
    let (optimum, witness) = match problem.space().kind() {
        LossKind::ZeroOne => {
            let sol = matching::optimal_zero_one(problem)?;
            (sol.epsilon, sol.learner)
        }
        LossKind::Metric => {
            let sol = minimax::brute_force_minimax(problem, &BruteForceOptions::default())?;
            (sol.value, sol.learner)
        }
        kind => return Err(ApportionError::NotMetric(kind)),
    };
    if optimum > epsilon {
        return Err(ApportionError::EpsilonBelowOptimum { epsilon, optimum });
    }
    verify_factor_two_with_witness(problem, &witness, epsilon, delta)
}

/// As [`verify_factor_two`], with a caller-supplied witness of error ≤ ε.
pub fn verify_factor_two_with_witness(
    problem: &AssignmentProblem,
    witness: &LearnerAssignment,
    epsilon: Rational,
    delta: Rational,
) -> Result<FactorTwoReport, ApportionError> {
    let kind = problem.space().kind();
    if kind == LossKind::General {
        return Err(ApportionError::NotMetric(kind));
    }
    if delta <= Rational::zero() {
        return Err(ApportionError::NonPositiveDelta(delta));
    }
    let alpha = epsilon + delta / Rational::from_integer(3);
    let apps = derive_apportionments(problem, witness, alpha)?;
    let (learner, chosen) = two_factor_choice(problem, &apps, delta)?;
    let eval = evaluate(problem, &learner)?;
    let bound = Rational::from_integer(2) * epsilon + delta;
    let n = problem.n();
    let scale = Rational::from_integer(n as i64);

    let mut per_row = Vec::with_capacity(problem.rows().len());
    for (r, (row, deps)) in problem.rows().iter().zip(problem.dependence()).enumerate() {
        let mut slack: Option<Rational> = None;
        for (i, (&y, &v)) in row.iter().zip(deps).enumerate() {
            let budget = scale * (apps[chosen[v]].entries()[i] + apps[r].entries()[i]);
            let loss = problem.space().loss_at(learner.get(v), y);
            if loss > budget {
                return Err(ApportionError::TriangleViolated { row: r, coordinate: i, loss, budget });
            }
            let s = budget - loss;
            slack = Some(slack.map_or(s, |cur| cur.min(s)));
        }
        let error = eval.per_row[r];
        if error > bound {
            return Err(ApportionError::BoundViolated { row: r, realized: error, bound });
        }
        per_row.push(RowVerification { row: r, error, triangle_slack: slack.unwrap_or_default() });
    }
    Ok(FactorTwoReport { epsilon, delta, realized: eval.worst, bound, holds: eval.worst <= bound, per_row })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::LabelSpace;
    use crate::oig::{build_problem, evaluate_apportioned, BehaviorTable};
    use std::sync::Arc;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    fn corner() -> AssignmentProblem {
        let space = Arc::new(LabelSpace::zero_one(["0", "1"]).unwrap());
        let table = BehaviorTable::new(space, 3, vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0]]).unwrap();
        build_problem(&table)
    }

    #[test]
    fn apportionment_invariants() {
        assert!(matches!(Apportionment::new(vec![q(1, 2), q(-1, 3)]), Err(ApportionError::Negative { index: 1 })));
        assert!(matches!(
            Apportionment::with_total(q(1, 1), vec![q(1, 2), q(1, 3)]),
            Err(ApportionError::SumMismatch { .. })
        ));
        let a = Apportionment::uniform(q(1, 1), 3);
        assert_eq!(a.entries(), &[q(1, 3), q(1, 3), q(1, 3)]);
    }

    #[test]
    fn corner_apportionments_from_optimal_learner() {
        let p = corner();
        let witness = LearnerAssignment::new(vec![0, 1, 0, 0, 0, 0, 0]);
        let apps = derive_apportionments(&p, &witness, q(1, 3)).unwrap();
        // row (0,0,0): miss at position 1, no slack
        assert_eq!(apps[0].entries(), &[q(0, 1), q(1, 3), q(0, 1)]);
        assert_eq!(apps[1].entries(), &[q(1, 3), q(0, 1), q(0, 1)]);
        // row (0,1,0): no error, slack 1/3 spread as 1/9
        assert_eq!(apps[2].entries(), &[q(1, 9), q(1, 9), q(1, 9)]);
        assert!(apps.iter().all(|a| a.total() == q(1, 3)));
        assert!(evaluate_apportioned(&p, &witness, &apps).unwrap().satisfied);
    }

    #[test]
    fn zero_error_witness_gives_zero_apportionments() {
        let space = Arc::new(LabelSpace::zero_one(["0", "1"]).unwrap());
        let table = BehaviorTable::new(space, 2, vec![vec![0, 1]]).unwrap();
        let p = build_problem(&table);
        let witness = LearnerAssignment::first_completion(&p);
        let apps = derive_apportionments(&p, &witness, q(0, 1)).unwrap();
        assert_eq!(apps[0].entries(), &[q(0, 1), q(0, 1)]);
    }

    #[test]
    fn extra_alpha_adds_uniform_slack() {
        let p = corner();
        let witness = LearnerAssignment::new(vec![0, 1, 0, 0, 0, 0, 0]);
        let tight = derive_apportionments(&p, &witness, q(1, 3)).unwrap();
        let loose = derive_apportionments(&p, &witness, q(4, 3)).unwrap();
        for (t, l) in tight.iter().zip(&loose) {
            for (a, b) in t.entries().iter().zip(l.entries()) {
                assert_eq!(*b - *a, q(1, 3));
            }
        }
        assert!(evaluate_apportioned(&p, &witness, &loose).unwrap().satisfied);
    }

    #[test]
    fn witness_above_alpha_is_rejected() {
        let p = corner();
        let witness = LearnerAssignment::new(vec![0, 1, 0, 0, 0, 0, 0]);
        assert!(matches!(
            derive_apportionments(&p, &witness, q(1, 4)),
            Err(ApportionError::WitnessExceeds { row: 0, .. })
        ));
    }

    #[test]
    fn uniform_apportionments_pick_lowest_row() {
        let p = corner();
        let apps = vec![Apportionment::uniform(q(1, 3), 3); 3];
        let learner = two_factor_learner(&p, &apps, q(1, 100)).unwrap();
        let expected: Vec<usize> = (0..p.variables().len()).map(|v| p.completion(p.dependents(v)[0], v)).collect();
        assert_eq!(learner.choice(), expected.as_slice());
    }

    #[test]
    fn single_row_gives_perfect_learner() {
        let space = Arc::new(LabelSpace::zero_one(["a", "b", "c"]).unwrap());
        let table = BehaviorTable::new(space, 3, vec![vec![2, 0, 1]]).unwrap();
        let p = build_problem(&table);
        let apps = vec![Apportionment::new(vec![q(1, 1), q(0, 1), q(5, 2)]).unwrap()];
        let learner = two_factor_learner(&p, &apps, q(1, 2)).unwrap();
        assert_eq!(evaluate(&p, &learner).unwrap().worst, q(0, 1));
    }

    #[test]
    fn corner_factor_two() {
        let p = corner();
        let report = verify_factor_two(&p, q(1, 3), q(1, 100)).unwrap();
        assert!(report.holds);
        assert!(report.realized <= q(2, 3) + q(1, 100));
        assert!(report.per_row.iter().all(|r| r.triangle_slack >= q(0, 1)));
        assert!(matches!(verify_factor_two(&p, q(1, 4), q(1, 100)), Err(ApportionError::EpsilonBelowOptimum { .. })));
        assert!(matches!(verify_factor_two(&p, q(1, 3), q(0, 1)), Err(ApportionError::NonPositiveDelta(_))));
    }

    #[test]
    fn zero_error_problem_realizes_at_most_delta() {
        let space = Arc::new(LabelSpace::zero_one(["0", "1"]).unwrap());
        let table = BehaviorTable::new(space, 2, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let p = build_problem(&table);
        let report = verify_factor_two(&p, q(0, 1), q(1, 7)).unwrap();
        assert!(report.realized <= q(1, 7));
    }

    #[test]
    fn general_losses_are_refused() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let loss = vec![vec![q(0, 1), q(1, 1)], vec![q(3, 1), q(0, 1)]];
        let space = Arc::new(LabelSpace::new(labels, loss, LossKind::General).unwrap());
        let table = BehaviorTable::new(space, 1, vec![vec![0], vec![1]]).unwrap();
        let p = build_problem(&table);
        assert!(matches!(verify_factor_two(&p, q(3, 1), q(1, 10)), Err(ApportionError::NotMetric(LossKind::General))));
    }
}
