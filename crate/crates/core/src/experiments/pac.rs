use std::collections::HashMap;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ExperimentError;
use crate::oig::{build_problem, evaluate, AssignmentProblem, BehaviorTable, LearnerAssignment};
use crate::rational::{self, Rational};
use crate::solve::solve_exact;

/// Cap on the number of distinct size-`n` multisets solved up front.
const MAX_MULTISETS: u64 = 20_000;

#[derive(Debug, Clone, Serialize)]
pub struct RowEstimate {
    pub row: String,
    #[serde(with = "rational::as_string")]
    pub mean: Rational,
    pub std_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PacEstimate {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    /// Mean error on the worst row.
    #[serde(with = "rational::as_string")]
    pub mean: Rational,
    pub mean_f64: f64,
    pub std_error: f64,
    pub worst_row: String,
    /// Max of the exact transductive value over every size-`n` multiset.
    #[serde(with = "rational::as_string")]
    pub transductive_bound: Rational,
    pub multisets: usize,
    pub per_row: Vec<RowEstimate>,
    /// Every row's mean is within three standard errors of the bound.
    pub holds: bool,
}

/// Nondecreasing sequences of length `n` over `0..domain`.
fn multisets(domain: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..n).rev().find(|&p| cur[p] + 1 < domain) else {
            return out;
        };
        let next = cur[pos] + 1;
        cur[pos..].iter_mut().for_each(|c| *c = next);
    }
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    (0..k).try_fold(1u64, |acc, i| acc.checked_mul(n - i).map(|x| x / (i + 1)))
}

/// Variables whose dependents all agree on the held-out label get that label.
/// No row's error can increase.
fn settle_forced(problem: &AssignmentProblem, learner: LearnerAssignment) -> LearnerAssignment {
    let mut choice = learner.choice().to_vec();
    for (v, slot) in choice.iter_mut().enumerate() {
        let mut completions = problem.dependents(v).iter().map(|&r| problem.completion(r, v));
        let first = completions.next().expect("every variable has a dependent");
        if completions.all(|c| c == first) {
            *slot = first;
        }
    }
    LearnerAssignment::new(choice)
}

struct Solved {
    index: HashMap<Vec<usize>, usize>,
    per_row: Vec<Rational>,
    value: Rational,
}

fn solve_multiset(table: &BehaviorTable, columns: &[usize], budget: u64) -> Result<Solved, ExperimentError> {
    let projected = table.project_columns(columns)?;
    let problem = build_problem(&projected);
    let sol = solve_exact(&problem, budget)?;
    let learner = settle_forced(&problem, sol.learner);
    let eval = evaluate(&problem, &learner)?;
    let index = projected.rows().iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
    Ok(Solved { index, per_row: eval.per_row, value: sol.value })
}

/// Draws `n` columns uniformly with replacement, labels them by a fixed row
/// and charges the optimal transductive learner for that multiset its exact
/// leave-one-out error. Repeated for every row of the table.
pub fn pac_bridge_check(
    table: &BehaviorTable,
    n: usize,
    trials: u64,
    seed: u64,
    budget: u64,
) -> Result<PacEstimate, ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::ZeroTrials);
    }
    if n == 0 {
        return Err(ExperimentError::OutOfRange { what: "n", value: n, allowed: ">= 1" });
    }
    let domain = table.n();
    let count = binomial((domain + n - 1) as u64, n as u64).filter(|&c| c <= MAX_MULTISETS);
    if count.is_none() {
        return Err(ExperimentError::TooLarge(format!("size-{n} multisets over {domain} points")));
    }
    let sets = multisets(domain, n);
    let solved: HashMap<Vec<usize>, Solved> = sets
        .par_iter()
        .map(|s| Ok((s.clone(), solve_multiset(table, s, budget)?)))
        .collect::<Result<_, ExperimentError>>()?;
    let bound = solved.values().map(|s| s.value).max().expect("at least one multiset");

    let per_row: Vec<RowEstimate> = (0..table.len())
        .into_par_iter()
        .map(|h| {
            let row = &table.rows()[h];
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (h as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut sum = Rational::zero();
            let (mut s1, mut s2) = (0.0f64, 0.0f64);
            let mut sample = vec![0usize; n];
            for _ in 0..trials {
                sample.iter_mut().for_each(|c| *c = rng.gen_range(0..domain));
                sample.sort_unstable();
                let entry = &solved[&sample];
                let labels: Vec<usize> = sample.iter().map(|&c| row[c]).collect();
                let loss = entry.per_row[entry.index[&labels]];
                sum += loss;
                let x = rational::to_f64(&loss);
                s1 += x;
                s2 += x * x;
            }
            let t = trials as f64;
            let variance = if trials > 1 { ((s2 - s1 * s1 / t) / (t - 1.0)).max(0.0) } else { 0.0 };
            RowEstimate {
                row: table.row_name(h),
                mean: sum / Rational::from_integer(trials as i64),
                std_error: (variance / t).sqrt(),
            }
        })
        .collect();

    let within =
        |r: &RowEstimate| r.mean <= bound || rational::to_f64(&r.mean) <= rational::to_f64(&bound) + 3.0 * r.std_error;
    let holds = per_row.iter().all(within);
    let worst = per_row
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.mean.cmp(&b.1.mean).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("table is nonempty");
    Ok(PacEstimate {
        n,
        trials,
        seed,
        mean: per_row[worst].mean,
        mean_f64: rational::to_f64(&per_row[worst].mean),
        std_error: per_row[worst].std_error,
        worst_row: per_row[worst].row.clone(),
        transductive_bound: bound,
        multisets: sets.len(),
        holds,
        per_row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{single_row_table, zero_one_space};
    use crate::minimax::DEFAULT_BUDGET;

    #[test]
    fn multiset_enumeration() {
        assert_eq!(multisets(3, 2), vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 1], vec![1, 2], vec![2, 2]]);
        assert_eq!(multisets(3, 3).len() as u64, binomial(5, 3).unwrap());
    }

    #[test]
    fn single_row_estimate_is_zero() {
        let r = pac_bridge_check(&single_row_table(3), 3, 200, 1, DEFAULT_BUDGET).unwrap();
        assert!(r.mean.is_zero() && r.transductive_bound.is_zero() && r.holds);
    }

    #[test]
    fn corner_bound() {
        let table =
            BehaviorTable::new(zero_one_space(2), 3, vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0]]).unwrap();
        let r = pac_bridge_check(&table, 3, 2000, 7, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.transductive_bound, Rational::new(1, 3));
        assert_eq!(r.multisets, 10);
        assert!(r.holds);
        assert!(pac_bridge_check(&table, 3, 0, 7, DEFAULT_BUDGET).is_err());
    }
}
