//! Exact and heuristic minimax solvers for arbitrary finite losses.
//!
//! Both solvers work on integer row values: every loss is rescaled by a
//! common unit so that row errors and offsets stay exact
//! without rational arithmetic in the inner loops.

use std::cmp::Ordering;
use std::sync::Arc;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::metric::{LabelSpace, SpaceError};
use crate::oig::{build_problem, AssignmentProblem, BehaviorTable, LearnerAssignment, OigError};
use crate::rational::Rational;

/// Default cap on `|candidates|^|variables|` for exhaustive search.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("exhaustive search needs {required} evaluations, budget is {budget}; use local search")]
    BudgetExceeded { required: String, budget: u64 },
    #[error("row values overflow the integer scale")]
    Overflow,
    #[error("class row {row} is invalid: {reason}")]
    BadClassRow { row: usize, reason: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Oig(#[from] OigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceOptions {
    pub budget: u64,
    /// Only try labels that occur somewhere in the table.
    pub table_labels_only: bool,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions { budget: DEFAULT_BUDGET, table_labels_only: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimaxSolution {
    pub value: Rational,
    pub learner: LearnerAssignment,
}

/// A problem compiled to integer row values in units of `1/unit`.
struct Compiled {
    unit: i64,
    /// `deps[v]`: `(row, completion label)` for each dependent row.
    deps: Vec<Vec<(usize, usize)>>,
    /// `weight[a * labels + b]`: contribution of predicting `b` when the row expects `a`.
    weight: Vec<i64>,
    labels: usize,
    /// Row values before any variable is assigned (`−offset`).
    init: Vec<i64>,
    candidates: Vec<Vec<usize>>,
}

impl Compiled {
    fn new(problem: &AssignmentProblem, table_labels_only: bool) -> Result<Self, SolveError> {
        let space = problem.space();
        let scaled = space.scaled()?;
        let n = problem.n() as i64;
        let mut unit = scaled.denom().checked_mul(n).ok_or(SolveError::Overflow)?;
        for o in problem.offsets() {
            unit = unit.lcm(o.denom());
        }
        let factor = unit / (scaled.denom() * n);
        let labels = space.len();
        let mut weight = Vec::with_capacity(labels * labels);
        for a in 0..labels {
            for b in 0..labels {
                weight.push(scaled.get(a, b).checked_mul(factor).ok_or(SolveError::Overflow)?);
            }
        }
        let init = problem
            .offsets()
            .iter()
            .map(|o| o.numer().checked_mul(unit / o.denom()).map(|x| -x).ok_or(SolveError::Overflow))
            .collect::<Result<Vec<_>, _>>()?;
        let deps = (0..problem.variables().len())
            .map(|v| problem.dependents(v).iter().map(|&r| (r, problem.completion(r, v))).collect())
            .collect();
        let all: Vec<usize> = if table_labels_only {
            let mut used = vec![false; labels];
            for row in problem.rows() {
                for &l in row {
                    used[l] = true;
                }
            }
            (0..labels).filter(|&l| used[l]).collect()
        } else {
            (0..labels).collect()
        };
        let candidates = vec![all; problem.variables().len()];
        Ok(Compiled { unit, deps, weight, labels, init, candidates })
    }

    #[inline]
    fn w(&self, expected: usize, predicted: usize) -> i64 {
        self.weight[expected * self.labels + predicted]
    }

    fn value(&self, units: i64) -> Rational {
        Rational::new(units, self.unit)
    }

    fn search_space(&self) -> u128 {
        self.candidates.iter().fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128))
    }

    fn row_values(&self, choice: &[usize]) -> Vec<i64> {
        let mut sums = self.init.clone();
        for (v, deps) in self.deps.iter().enumerate() {
            for &(r, c) in deps {
                sums[r] += self.w(c, choice[v]);
            }
        }
        sums
    }
}

struct Search<'a> {
    c: &'a Compiled,
    sums: Vec<i64>,
    current: Vec<usize>,
    best: i64,
    best_choice: Option<Vec<usize>>,
    floor: i64,
}

impl Search<'_> {
    /// Depth-first over variables in index order and labels in index order.
    /// Row sums only grow along a path, so a partial maximum at or above the
    /// incumbent can never yield a strictly better completion.
    fn dfs(&mut self, v: usize, cur_max: i64) {
        if v == self.c.deps.len() {
            self.best = cur_max;
            self.best_choice = Some(self.current.clone());
            return;
        }
        for i in 0..self.c.candidates[v].len() {
            let y = self.c.candidates[v][i];
            let mut m = cur_max;
            for &(r, c) in &self.c.deps[v] {
                self.sums[r] += self.c.w(c, y);
                m = m.max(self.sums[r]);
            }
            if m < self.best {
                self.current[v] = y;
                self.dfs(v + 1, m);
            }
            for &(r, c) in &self.c.deps[v] {
                self.sums[r] -= self.c.w(c, y);
            }
            if self.best <= self.floor {
                return;
            }
        }
    }
}

/// Exhaustive minimax over all total assignments.
///
/// Returns the minimum worst-case row value and the lexicographically first
/// assignment attaining it.
pub fn brute_force_minimax(
    problem: &AssignmentProblem,
    options: &BruteForceOptions,
) -> Result<MinimaxSolution, SolveError> {
    let c = Compiled::new(problem, options.table_labels_only)?;
    let required = c.search_space();
    if required > options.budget as u128 {
        let required = if required == u128::MAX { "more than 2^128".to_string() } else { required.to_string() };
        return Err(SolveError::BudgetExceeded { required, budget: options.budget });
    }
    let floor = *c.init.iter().max().expect("at least one row");
    let mut search = Search {
        c: &c,
        sums: c.init.clone(),
        current: vec![0; c.deps.len()],
        best: i64::MAX,
        best_choice: None,
        floor,
    };
    search.dfs(0, floor);
    let choice = search.best_choice.expect("search space is nonempty");
    Ok(MinimaxSolution { value: c.value(search.best), learner: LearnerAssignment::new(choice) })
}

/// Compares two descending value profiles that differ only in the rows whose
/// old values are `old` and new values are `new`. `Less` means the new
/// profile is lexicographically smaller.
fn compare_change(old: &mut [i64], new: &mut [i64]) -> Ordering {
    old.sort_unstable_by(|a, b| b.cmp(a));
    new.sort_unstable_by(|a, b| b.cmp(a));
    let (mut i, mut j) = (0, 0);
    while i < old.len() && j < new.len() {
        match old[i].cmp(&new[j]) {
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
            Ordering::Greater => return Ordering::Less,
            Ordering::Less => return Ordering::Greater,
        }
    }
    match (i < old.len(), j < new.len()) {
        (true, _) => Ordering::Less,
        (_, true) => Ordering::Greater,
        _ => Ordering::Equal,
    }
}

fn descend(c: &Compiled, choice: &mut [usize]) -> i64 {
    let mut sums = c.row_values(choice);
    let mut old = Vec::new();
    let mut new = Vec::new();
    loop {
        let mut improved = false;
        for v in 0..c.deps.len() {
            for &y in &c.candidates[v] {
                let from = choice[v];
                if y == from {
                    continue;
                }
                old.clear();
                new.clear();
                for &(r, e) in &c.deps[v] {
                    old.push(sums[r]);
                    new.push(sums[r] - c.w(e, from) + c.w(e, y));
                }
                if compare_change(&mut old, &mut new) == Ordering::Less {
                    for &(r, e) in &c.deps[v] {
                        sums[r] += c.w(e, y) - c.w(e, from);
                    }
                    choice[v] = y;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    *sums.iter().max().expect("at least one row")
}

/// Coordinate descent on the sorted error profile from `restarts` starts.
///
/// Start 0 predicts each variable's first dependent completion; the others
/// are uniform random assignments seeded from `seed` and the restart index.
/// The result is an upper bound on the exact optimum and does not depend on
/// how restarts are scheduled.
pub fn local_search_minimax(
    problem: &AssignmentProblem,
    restarts: usize,
    seed: u64,
) -> Result<MinimaxSolution, SolveError> {
    let c = Compiled::new(problem, false)?;
    let first = LearnerAssignment::first_completion(problem).choice().to_vec();
    let (best, choice) = (0..restarts.max(1) as u64)
        .into_par_iter()
        .map(|k| {
            let mut choice = if k == 0 {
                first.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                c.candidates.iter().map(|cands| cands[rng.gen_range(0..cands.len())]).collect()
            };
            let value = descend(&c, &mut choice);
            (value, choice)
        })
        .reduce_with(|a, b| if b < a { b } else { a })
        .expect("at least one restart");
    Ok(MinimaxSolution { value: c.value(best), learner: LearnerAssignment::new(choice) })
}

/// Agnostic learning over a class: every row of `Yⁿ` is a possible labelling,
/// judged relative to the best class row.
#[derive(Debug, Clone)]
pub struct AgnosticProblem {
    space: Arc<LabelSpace>,
    n: usize,
    class_rows: Vec<Vec<usize>>,
}

impl AgnosticProblem {
    pub fn new(space: Arc<LabelSpace>, n: usize, class_rows: Vec<Vec<usize>>) -> Result<Self, SolveError> {
        if class_rows.is_empty() {
            return Err(SolveError::BadClassRow { row: 0, reason: "class is empty".into() });
        }
        for (row, r) in class_rows.iter().enumerate() {
            if r.len() != n {
                return Err(SolveError::BadClassRow { row, reason: format!("length {} != {n}", r.len()) });
            }
            if r.iter().any(|&l| l >= space.len()) {
                return Err(SolveError::BadClassRow { row, reason: "label outside the space".into() });
            }
        }
        Ok(AgnosticProblem { space, n, class_rows })
    }

    pub fn from_table(table: &BehaviorTable) -> Self {
        AgnosticProblem { space: table.space().clone(), n: table.n(), class_rows: table.rows().to_vec() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> &Arc<LabelSpace> {
        &self.space
    }

    pub fn class_rows(&self) -> &[Vec<usize>] {
        &self.class_rows
    }

    /// `|Y|ⁿ`, or `None` on overflow.
    pub fn row_count(&self) -> Option<u64> {
        (self.space.len() as u64).checked_pow(self.n as u32)
    }

    /// All of `Yⁿ` in lexicographic order, generated lazily.
    pub fn rows(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let k = self.space.len();
        let mut next = Some(vec![0usize; self.n]);
        std::iter::from_fn(move || {
            let out = next.take()?;
            let mut succ = out.clone();
            for pos in (0..succ.len()).rev() {
                succ[pos] += 1;
                if succ[pos] < k {
                    next = Some(succ);
                    break;
                }
                succ[pos] = 0;
            }
            Some(out)
        })
    }

    /// Best-in-class error on `row`: `min_h (1/n)·Σᵢ loss(hᵢ, rowᵢ)`.
    pub fn offset(&self, row: &[usize]) -> Rational {
        let n = Rational::from_integer(self.n as i64);
        self.class_rows
            .iter()
            .map(|h| h.iter().zip(row).map(|(&a, &b)| self.space.loss_at(a, b)).sum::<Rational>() / n)
            .min()
            .expect("class is nonempty")
    }

    /// The assignment system over all of `Yⁿ` with best-in-class offsets.
    /// Refuses to materialise more than `max_rows` rows.
    pub fn to_problem(&self, max_rows: u64) -> Result<AssignmentProblem, SolveError> {
        let count = self.row_count().filter(|&c| c <= max_rows).ok_or_else(|| SolveError::BudgetExceeded {
            required: format!("{}^{} rows", self.space.len(), self.n),
            budget: max_rows,
        })?;
        let mut rows = Vec::with_capacity(count as usize);
        let mut offsets = Vec::with_capacity(count as usize);
        for row in self.rows() {
            offsets.push(self.offset(&row));
            rows.push(row);
        }
        let table = BehaviorTable::new(self.space.clone(), self.n, rows)?;
        Ok(build_problem(&table).with_offsets(offsets)?)
    }

    /// `|Y|^(n·|Y|^(n−1))`: exhaustive assignments of the full system.
    pub fn exhaustive_size(&self) -> Option<u128> {
        let k = self.space.len() as u128;
        let vars = (self.n as u128).checked_mul(k.checked_pow(self.n as u32 - 1)?)?;
        k.checked_pow(u32::try_from(vars).ok()?)
    }
}

#[derive(Debug, Clone)]
pub struct AgnosticSolution {
    pub value: Rational,
    pub learner: LearnerAssignment,
    pub problem: AssignmentProblem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgnosticOptions {
    pub budget: u64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for AgnosticOptions {
    fn default() -> Self {
        AgnosticOptions { budget: DEFAULT_BUDGET, restarts: 16, seed: 0 }
    }
}

/// `min_learner max_row (raw error − best-in-class error)` over all of `Yⁿ`.
pub fn agnostic_minimax(
    agnostic: &AgnosticProblem,
    exact: bool,
    options: &AgnosticOptions,
) -> Result<AgnosticSolution, SolveError> {
    if exact {
        let size = agnostic.exhaustive_size();
        if size.is_none_or(|s| s > options.budget as u128) {
            let required = size.map_or_else(|| "more than 2^128".to_string(), |s| s.to_string());
            return Err(SolveError::BudgetExceeded { required, budget: options.budget });
        }
    }
    let problem = agnostic.to_problem(options.budget)?;
    let sol = if exact {
        brute_force_minimax(&problem, &BruteForceOptions { budget: options.budget, table_labels_only: false })?
    } else {
        local_search_minimax(&problem, options.restarts, options.seed)?
    };
    Ok(AgnosticSolution { value: sol.value, learner: sol.learner, problem })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::LossKind;
    use crate::oig::evaluate;
    use num_traits::Zero;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    fn corner() -> AssignmentProblem {
        let space = Arc::new(LabelSpace::zero_one(["0", "1"]).unwrap());
        let table = BehaviorTable::new(space, 3, vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0]]).unwrap();
        build_problem(&table)
    }

    /// a, b at distance 2 and c at distance 1 from both.
    fn center_space() -> Arc<LabelSpace> {
        let labels = ["a", "b", "c"].map(String::from).to_vec();
        let loss =
            vec![vec![q(0, 1), q(2, 1), q(1, 1)], vec![q(2, 1), q(0, 1), q(1, 1)], vec![q(1, 1), q(1, 1), q(0, 1)]];
        Arc::new(LabelSpace::new(labels, loss, LossKind::Metric).unwrap())
    }

    #[test]
    fn corner_brute_force() {
        let sol = brute_force_minimax(&corner(), &BruteForceOptions::default()).unwrap();
        assert_eq!(sol.value, q(1, 3));
        assert_eq!(evaluate(&corner(), &sol.learner).unwrap().worst, q(1, 3));
    }

    #[test]
    fn single_row_is_zero() {
        let space = Arc::new(LabelSpace::zero_one(["0", "1", "2"]).unwrap());
        let table = BehaviorTable::new(space, 3, vec![vec![2, 1, 0]]).unwrap();
        let p = build_problem(&table);
        assert_eq!(brute_force_minimax(&p, &BruteForceOptions::default()).unwrap().value, q(0, 1));
        assert_eq!(local_search_minimax(&p, 1, 7).unwrap().value, q(0, 1));
    }

    #[test]
    fn one_center_prediction() {
        let space = center_space();
        let table = BehaviorTable::new(space.clone(), 1, vec![vec![0], vec![1]]).unwrap();
        let p = build_problem(&table);
        let sol = brute_force_minimax(&p, &BruteForceOptions::default()).unwrap();
        assert_eq!(sol.value, q(1, 1));
        assert_eq!(sol.learner.choice(), &[2]);
        // the centre appears in no row, so restricting to table labels loses it
        let restricted = BruteForceOptions { table_labels_only: true, ..Default::default() };
        assert_eq!(brute_force_minimax(&p, &restricted).unwrap().value, q(2, 1));
    }

    #[test]
    fn budget_is_enforced() {
        let p = corner();
        let tight = BruteForceOptions { budget: 100, table_labels_only: false };
        assert!(matches!(brute_force_minimax(&p, &tight), Err(SolveError::BudgetExceeded { .. })));
        let enough = BruteForceOptions { budget: 128, table_labels_only: false };
        assert!(brute_force_minimax(&p, &enough).is_ok());
    }

    #[test]
    fn lexicographic_tie_break() {
        // n=1, rows {0},{1}: predicting 0 and 1 both give worst case 1; 0 comes first
        let space = Arc::new(LabelSpace::zero_one(["0", "1"]).unwrap());
        let p = build_problem(&BehaviorTable::new(space, 1, vec![vec![1], vec![0]]).unwrap());
        let sol = brute_force_minimax(&p, &BruteForceOptions::default()).unwrap();
        assert_eq!(sol.learner.choice(), &[0]);
    }

    #[test]
    fn local_search_on_corner() {
        for seed in 0..5 {
            let sol = local_search_minimax(&corner(), 4, seed).unwrap();
            assert_eq!(sol.value, q(1, 3));
        }
    }

    #[test]
    fn local_search_is_reproducible() {
        let p = corner();
        let a = local_search_minimax(&p, 8, 42).unwrap();
        let b = local_search_minimax(&p, 8, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn profile_comparison() {
        assert_eq!(compare_change(&mut [3, 1], &mut [2, 2]), Ordering::Less);
        assert_eq!(compare_change(&mut [3, 1], &mut [3, 2]), Ordering::Greater);
        assert_eq!(compare_change(&mut [3, 1], &mut [1, 3]), Ordering::Equal);
        assert_eq!(compare_change(&mut [3, 2], &mut [3, 1]), Ordering::Less);
    }

    #[test]
    fn agnostic_with_whole_cube_matches_realizable() {
        let space = Arc::new(LabelSpace::zero_one(["0", "1"]).unwrap());
        let agn = AgnosticProblem::new(space.clone(), 2, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]).unwrap();
        let sol = agnostic_minimax(&agn, true, &AgnosticOptions::default()).unwrap();
        let table = BehaviorTable::new(space, 2, agn.rows().collect()).unwrap();
        let realizable = brute_force_minimax(&build_problem(&table), &BruteForceOptions::default()).unwrap();
        assert_eq!(sol.value, realizable.value);
        assert_eq!(sol.value, q(1, 2));
    }

    #[test]
    fn agnostic_single_class_row() {
        let space = Arc::new(LabelSpace::zero_one(["a", "b"]).unwrap());
        let agn = AgnosticProblem::new(space, 1, vec![vec![0]]).unwrap();
        assert_eq!(agn.offset(&[0]), q(0, 1));
        assert_eq!(agn.offset(&[1]), q(1, 1));
        let sol = agnostic_minimax(&agn, true, &AgnosticOptions::default()).unwrap();
        assert_eq!(sol.value, q(0, 1));
        assert_eq!(sol.learner.choice(), &[0]);
    }

    #[test]
    fn agnostic_offsets_vanish_on_class_rows() {
        let space = center_space();
        let agn = AgnosticProblem::new(space, 2, vec![vec![0, 1], vec![2, 2]]).unwrap();
        assert_eq!(agn.rows().count(), 9);
        for row in agn.rows() {
            let off = agn.offset(&row);
            let in_class = agn.class_rows().contains(&row);
            assert_eq!(off.is_zero(), in_class, "row {row:?}");
        }
    }

    #[test]
    fn agnostic_budget() {
        let space = Arc::new(LabelSpace::zero_one(["0", "1"]).unwrap());
        let agn = AgnosticProblem::new(space, 4, vec![vec![0; 4]]).unwrap();
        assert!(matches!(
            agnostic_minimax(&agn, true, &AgnosticOptions::default()),
            Err(SolveError::BudgetExceeded { .. })
        ));
        assert!(agnostic_minimax(&agn, false, &AgnosticOptions { restarts: 2, ..Default::default() }).is_ok());
    }
}
