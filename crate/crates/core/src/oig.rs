//! The one-inclusion variable-assignment system of a finite behavior table.
//!
//! Rows of a [`BehaviorTable`] act as functions; each row depends on the `n`
//! one-hole projections of itself (the variables). Rows differing in a single
//! position share the variable holed at that position, so a learner, which
//! assigns a label to every variable, trades error between neighbouring rows.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apportion::Apportionment;
use crate::metric::{LabelSpace, LabelSpaceDoc, SpaceError};
use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum OigError {
    #[error("behavior table has no rows")]
    NoRows,
    #[error("behavior table must have at least one column")]
    NoColumns,
    #[error("row {row} has {len} entries, expected {n}")]
    RowLength { row: usize, len: usize, n: usize },
    #[error("row {row} column {col}: label index {label} is not in the space")]
    LabelOutOfRange { row: usize, col: usize, label: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("learner leaves variable {index} {name} unassigned")]
    Unassigned { index: usize, name: String },
    #[error("learner assigns variable {index} to label index {label}, outside the space")]
    BadLabel { index: usize, label: usize },
    #[error("learner names unknown variable {0}")]
    UnknownVariable(String),
    #[error("expected {expected} apportionments, got {got}")]
    ApportionmentCount { expected: usize, got: usize },
    #[error("apportionment for row {row} has length {got}, expected {expected}")]
    ApportionmentLength { row: usize, expected: usize, got: usize },
    #[error("expected {expected} per-row values, got {got}")]
    PerRowLength { expected: usize, got: usize },
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

/// The finite projection of a class onto a sample: deduplicated rows in `Yⁿ`.
#[derive(Debug, Clone)]
pub struct BehaviorTable {
    space: Arc<LabelSpace>,
    n: usize,
    rows: Vec<Vec<usize>>,
}

impl BehaviorTable {
    /// Builds a table from label-index rows. Duplicate rows are collapsed,
    /// keeping the first occurrence.
    pub fn new(space: Arc<LabelSpace>, n: usize, rows: Vec<Vec<usize>>) -> Result<Self, OigError> {
        if n == 0 {
            return Err(OigError::NoColumns);
        }
        if rows.is_empty() {
            return Err(OigError::NoRows);
        }
        let mut seen = HashSet::new();
        let mut kept = Vec::with_capacity(rows.len());
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(OigError::RowLength { row: r, len: row.len(), n });
            }
            if let Some((col, &label)) = row.iter().enumerate().find(|(_, &l)| l >= space.len()) {
                return Err(OigError::LabelOutOfRange { row: r, col, label });
            }
            if seen.insert(row.clone()) {
                kept.push(row);
            }
        }
        Ok(BehaviorTable { space, n, rows: kept })
    }

    pub fn from_labels<S: AsRef<str>>(space: Arc<LabelSpace>, rows: &[Vec<S>]) -> Result<Self, OigError> {
        let n = rows.first().map_or(0, Vec::len);
        let rows = rows
            .iter()
            .map(|row| row.iter().map(|l| space.index_of(l.as_ref())).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(space, n, rows)
    }

    pub fn space(&self) -> &Arc<LabelSpace> {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Keeps the listed rows, in the given order.
    pub fn restrict_rows(&self, keep: &[usize]) -> Result<Self, OigError> {
        let rows = keep.iter().map(|&r| self.rows[r].clone()).collect();
        Self::new(self.space.clone(), self.n, rows)
    }

    /// Restricts every row to the listed columns (repeats allowed), then
    /// collapses rows that became equal.
    pub fn project_columns(&self, columns: &[usize]) -> Result<Self, OigError> {
        let rows = self.rows.iter().map(|row| columns.iter().map(|&c| row[c]).collect()).collect();
        Self::new(self.space.clone(), columns.len(), rows)
    }

    pub fn row_name(&self, r: usize) -> String {
        let parts: Vec<&str> = self.rows[r].iter().map(|&l| self.space.label(l)).collect();
        format!("({})", parts.join(","))
    }

    pub fn to_doc(&self) -> TableDoc {
        TableDoc {
            space: SpaceRef::Inline(self.space.to_doc()),
            n: self.n,
            rows: self.rows.iter().map(|row| row.iter().map(|&l| self.space.label(l).to_string()).collect()).collect(),
        }
    }
}

/// Label space given inline or as a path to a label-space document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Inline(LabelSpaceDoc),
    File(String),
}

/// JSON document form of a behavior table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDoc {
    pub space: SpaceRef,
    pub n: usize,
    pub rows: Vec<Vec<String>>,
}

impl TableDoc {
    /// Resolves the space (relative paths against `base_dir`) and builds the table.
    pub fn into_table(&self, base_dir: &Path) -> Result<BehaviorTable, OigError> {
        let space_doc = match &self.space {
            SpaceRef::Inline(doc) => doc.clone(),
            SpaceRef::File(path) => {
                let path = base_dir.join(path);
                let text =
                    std::fs::read_to_string(&path).map_err(|source| OigError::Io { path: path.clone(), source })?;
                serde_json::from_str(&text).map_err(|source| OigError::Json { path, source })?
            }
        };
        let space = Arc::new(LabelSpace::from_doc(&space_doc)?);
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|l| space.index_of(l)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        BehaviorTable::new(space, self.n, rows)
    }
}

/// A row with exactly one entry replaced by a hole.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialBehavior {
    values: Vec<Option<usize>>,
    hole: usize,
}

impl PartialBehavior {
    pub fn from_row(row: &[usize], hole: usize) -> Self {
        let values = row.iter().enumerate().map(|(i, &l)| (i != hole).then_some(l)).collect();
        PartialBehavior { values, hole }
    }

    pub fn hole(&self) -> usize {
        self.hole
    }

    pub fn values(&self) -> &[Option<usize>] {
        &self.values
    }

    /// The row obtained by filling the hole with `label`.
    pub fn complete(&self, label: usize) -> Vec<usize> {
        self.values.iter().map(|v| v.unwrap_or(label)).collect()
    }

    pub fn display<'a>(&'a self, space: &'a LabelSpace) -> impl fmt::Display + 'a {
        DisplayPartial { partial: self, space }
    }
}

struct DisplayPartial<'a> {
    partial: &'a PartialBehavior,
    space: &'a LabelSpace,
}

impl fmt::Display for DisplayPartial<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.partial.values.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match v {
                Some(l) => f.write_str(self.space.label(*l))?,
                None => f.write_str("?")?,
            }
        }
        f.write_str(")")
    }
}

/// Rows as functions of shared one-hole variables.
#[derive(Debug, Clone)]
pub struct AssignmentProblem {
    table: BehaviorTable,
    variables: Vec<PartialBehavior>,
    dependence: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
    targets: Vec<Rational>,
    offsets: Vec<Rational>,
}

/// Builds the assignment system of `table`.
///
/// Variables are numbered in first-seen order scanning rows, then holes,
/// left to right. `dependence[r][i]` is the variable equal to row `r` holed at
/// position `i`. Targets and offsets start at zero.
pub fn build_problem(table: &BehaviorTable) -> AssignmentProblem {
    let n = table.n();
    let mut index: HashMap<PartialBehavior, usize> = HashMap::new();
    let mut variables = Vec::new();
    let mut neighbors: Vec<Vec<usize>> = Vec::new();
    let mut dependence = Vec::with_capacity(table.len());
    for (r, row) in table.rows().iter().enumerate() {
        let mut deps = Vec::with_capacity(n);
        for hole in 0..n {
            let partial = PartialBehavior::from_row(row, hole);
            let v = *index.entry(partial.clone()).or_insert_with(|| {
                variables.push(partial);
                neighbors.push(Vec::new());
                variables.len() - 1
            });
            neighbors[v].push(r);
            deps.push(v);
        }
        dependence.push(deps);
    }
    let rows = table.len();
    AssignmentProblem {
        table: table.clone(),
        variables,
        dependence,
        neighbors,
        targets: vec![Rational::zero(); rows],
        offsets: vec![Rational::zero(); rows],
    }
}

impl AssignmentProblem {
    pub fn table(&self) -> &BehaviorTable {
        &self.table
    }

    pub fn space(&self) -> &LabelSpace {
        self.table.space()
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        self.table.rows()
    }

    pub fn variables(&self) -> &[PartialBehavior] {
        &self.variables
    }

    pub fn dependence(&self) -> &[Vec<usize>] {
        &self.dependence
    }

    /// Rows depending on variable `v`, ascending.
    pub fn dependents(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// The label row `r` expects at the hole of variable `v`.
    pub fn completion(&self, r: usize, v: usize) -> usize {
        self.table.rows()[r][self.variables[v].hole]
    }

    pub fn targets(&self) -> &[Rational] {
        &self.targets
    }

    /// Per-row amount subtracted from the raw error (best-in-class offset).
    pub fn offsets(&self) -> &[Rational] {
        &self.offsets
    }

    pub fn with_uniform_target(mut self, epsilon: Rational) -> Self {
        self.targets = vec![epsilon; self.table.len()];
        self
    }

    pub fn with_targets(mut self, targets: Vec<Rational>) -> Result<Self, OigError> {
        if targets.len() != self.table.len() {
            return Err(OigError::PerRowLength { expected: self.table.len(), got: targets.len() });
        }
        self.targets = targets;
        Ok(self)
    }

    pub fn with_offsets(mut self, offsets: Vec<Rational>) -> Result<Self, OigError> {
        if offsets.len() != self.table.len() {
            return Err(OigError::PerRowLength { expected: self.table.len(), got: offsets.len() });
        }
        self.offsets = offsets;
        Ok(self)
    }

    pub fn has_offsets(&self) -> bool {
        self.offsets.iter().any(|o| !o.is_zero())
    }

    pub fn variable_name(&self, v: usize) -> String {
        self.variables[v].display(self.space()).to_string()
    }
}

/// A learner: one label per variable of a problem.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LearnerAssignment {
    choice: Vec<usize>,
}

impl LearnerAssignment {
    pub fn new(choice: Vec<usize>) -> Self {
        LearnerAssignment { choice }
    }

    /// Fails on the first `None`.
    pub fn from_partial(problem: &AssignmentProblem, choice: Vec<Option<usize>>) -> Result<Self, OigError> {
        let mut total = Vec::with_capacity(choice.len());
        for (index, c) in choice.into_iter().enumerate() {
            match c {
                Some(l) => total.push(l),
                None => return Err(OigError::Unassigned { index, name: problem.variable_name(index) }),
            }
        }
        Ok(Self::new(total))
    }

    /// Builds a learner from `variable name -> label` pairs, e.g. `"(?,0,0)" -> "0"`.
    pub fn from_named(problem: &AssignmentProblem, named: &BTreeMap<String, String>) -> Result<Self, OigError> {
        let names: HashMap<String, usize> =
            (0..problem.variables().len()).map(|v| (problem.variable_name(v), v)).collect();
        let mut choice = vec![None; problem.variables().len()];
        for (name, label) in named {
            let v = *names.get(name).ok_or_else(|| OigError::UnknownVariable(name.clone()))?;
            choice[v] = Some(problem.space().index_of(label)?);
        }
        Self::from_partial(problem, choice)
    }

    pub fn to_named(&self, problem: &AssignmentProblem) -> BTreeMap<String, String> {
        self.choice
            .iter()
            .enumerate()
            .map(|(v, &l)| (problem.variable_name(v), problem.space().label(l).to_string()))
            .collect()
    }

    /// Every variable predicts its first dependent row's completion.
    pub fn first_completion(problem: &AssignmentProblem) -> Self {
        let choice = (0..problem.variables().len()).map(|v| problem.completion(problem.dependents(v)[0], v)).collect();
        Self::new(choice)
    }

    pub fn choice(&self) -> &[usize] {
        &self.choice
    }

    pub fn get(&self, v: usize) -> usize {
        self.choice[v]
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }

    fn check(&self, problem: &AssignmentProblem) -> Result<(), OigError> {
        let vars = problem.variables().len();
        if self.choice.len() < vars {
            let index = self.choice.len();
            return Err(OigError::Unassigned { index, name: problem.variable_name(index) });
        }
        if let Some((index, &label)) = self.choice.iter().enumerate().find(|(_, &l)| l >= problem.space().len()) {
            return Err(OigError::BadLabel { index, label });
        }
        Ok(())
    }
}

/// Per-row errors of a learner and their maximum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub per_row: Vec<Rational>,
    pub worst: Rational,
}

/// Exact per-row error `(1/n)·Σᵢ loss(rowᵢ, learner(ℓᵢ)) − offset(row)`.
pub fn evaluate(problem: &AssignmentProblem, learner: &LearnerAssignment) -> Result<Evaluation, OigError> {
    learner.check(problem)?;
    let n = Rational::from_integer(problem.n() as i64);
    let space = problem.space();
    let per_row: Vec<Rational> = problem
        .rows()
        .iter()
        .zip(problem.dependence())
        .zip(problem.offsets())
        .map(|((row, deps), offset)| {
            let sum: Rational = row.iter().zip(deps).map(|(&y, &v)| space.loss_at(y, learner.get(v))).sum();
            sum / n - offset
        })
        .collect();
    let worst = per_row.iter().copied().max().expect("tables have at least one row");
    Ok(Evaluation { per_row, worst })
}

/// Coordinate-wise check of a learner against per-row apportionments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApportionmentCheck {
    pub satisfied: bool,
    /// `per_row[r][i]`: whether `(1/n)·loss(rowᵢ, learner(ℓᵢ)) ≤ xᵢ`.
    pub per_row: Vec<Vec<bool>>,
    /// `(row, coordinate)` pairs that fail, in order.
    pub violations: Vec<(usize, usize)>,
}

pub fn evaluate_apportioned(
    problem: &AssignmentProblem,
    learner: &LearnerAssignment,
    apportionments: &[Apportionment],
) -> Result<ApportionmentCheck, OigError> {
    learner.check(problem)?;
    let rows = problem.rows();
    if apportionments.len() != rows.len() {
        return Err(OigError::ApportionmentCount { expected: rows.len(), got: apportionments.len() });
    }
    let n = problem.n();
    let scale = Rational::from_integer(n as i64);
    let mut per_row = Vec::with_capacity(rows.len());
    let mut violations = Vec::new();
    for (r, (row, app)) in rows.iter().zip(apportionments).enumerate() {
        if app.entries().len() != n {
            return Err(OigError::ApportionmentLength { row: r, expected: n, got: app.entries().len() });
        }
        let flags: Vec<bool> = (0..n)
            .map(|i| {
                let v = problem.dependence()[r][i];
                problem.space().loss_at(row[i], learner.get(v)) / scale <= app.entries()[i]
            })
            .collect();
        violations.extend(flags.iter().enumerate().filter(|(_, &ok)| !ok).map(|(i, _)| (r, i)));
        per_row.push(flags);
    }
    Ok(ApportionmentCheck { satisfied: violations.is_empty(), per_row, violations })
}
