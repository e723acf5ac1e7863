//! Finite label spaces and their loss matrices.
//!
//! A [`LabelSpace`] is a finite, ordered set of opaque labels together with a
//! dense matrix of exact nonnegative rational losses. Construction validates
//! the axioms of the declared [`LossKind`], so a `LabelSpace` value is always
//! well formed and can be shared freely between solver runs.

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Rational};

/// Default cap on the number of labels in a space.
pub const DEFAULT_MAX_LABELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// Symmetric, positive off the diagonal, triangle inequality.
    Metric,
    /// The discrete metric: loss 1 between distinct labels.
    ZeroOne,
    /// Any nonnegative loss with a zero diagonal.
    General,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Metric => "metric",
            LossKind::ZeroOne => "zero-one",
            LossKind::General => "general",
        })
    }
}

/// The first axiom a candidate loss matrix violates.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("label space is empty")]
    Empty,
    #[error("{count} labels exceed the cap of {cap}")]
    TooManyLabels { count: usize, cap: usize },
    #[error("duplicate label {label:?} at indices {first} and {second}")]
    DuplicateLabel { label: String, first: usize, second: usize },
    #[error("loss matrix has {rows} rows but {labels} labels")]
    RowCount { rows: usize, labels: usize },
    #[error("loss row {row} has {len} entries but {labels} labels")]
    RowLength { row: usize, len: usize, labels: usize },
    #[error("negative loss at ({i}, {j})")]
    Negative { i: usize, j: usize },
    #[error("nonzero diagonal loss at ({i}, {i})")]
    NonzeroDiagonal { i: usize },
    #[error("zero-one axiom fails at ({i}, {j})")]
    ZeroOne { i: usize, j: usize },
    #[error("symmetry fails at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("positivity fails at ({i}, {j})")]
    NotPositive { i: usize, j: usize },
    #[error("triangle inequality fails at ({i}, {j}, {k}): loss[{i}][{k}] > loss[{i}][{j}] + loss[{j}][{k}]")]
    Triangle { i: usize, j: usize, k: usize },
}

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error(transparent)]
    Invalid(#[from] Violation),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("label index {0} out of range")]
    IndexOutOfRange(usize),
    #[error(transparent)]
    Parse(#[from] rational::ParseRationalError),
    #[error("loss denominators overflow the common scale")]
    ScaleOverflow,
}

/// Checks `loss` against the axioms of `kind`, returning the first violation.
///
/// Checks run in a fixed order (shape, sign, diagonal, kind-specific axioms)
/// and scan indices lexicographically, so the witness is deterministic.
pub fn validate(labels: &[String], loss: &[Vec<Rational>], kind: LossKind) -> Result<(), Violation> {
    validate_with_cap(labels, loss, kind, DEFAULT_MAX_LABELS)
}

pub fn validate_with_cap(
    labels: &[String],
    loss: &[Vec<Rational>],
    kind: LossKind,
    cap: usize,
) -> Result<(), Violation> {
    let k = labels.len();
    if k == 0 {
        return Err(Violation::Empty);
    }
    if k > cap {
        return Err(Violation::TooManyLabels { count: k, cap });
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (idx, label) in labels.iter().enumerate() {
        if let Some(&first) = seen.get(label.as_str()) {
            return Err(Violation::DuplicateLabel { label: label.clone(), first, second: idx });
        }
        seen.insert(label, idx);
    }
    if loss.len() != k {
        return Err(Violation::RowCount { rows: loss.len(), labels: k });
    }
    for (row, entries) in loss.iter().enumerate() {
        if entries.len() != k {
            return Err(Violation::RowLength { row, len: entries.len(), labels: k });
        }
    }
    for i in 0..k {
        for j in 0..k {
            if !rational::is_nonnegative(&loss[i][j]) {
                return Err(Violation::Negative { i, j });
            }
        }
    }
    for i in 0..k {
        if !loss[i][i].is_zero() {
            return Err(Violation::NonzeroDiagonal { i });
        }
    }
    match kind {
        LossKind::General => {}
        LossKind::ZeroOne => {
            for i in 0..k {
                for j in 0..k {
                    let expected = if i == j { Rational::zero() } else { Rational::one() };
                    if loss[i][j] != expected {
                        return Err(Violation::ZeroOne { i, j });
                    }
                }
            }
        }
        LossKind::Metric => {
            for i in 0..k {
                for j in (i + 1)..k {
                    if loss[i][j] != loss[j][i] {
                        return Err(Violation::Asymmetric { i, j });
                    }
                }
            }
            for i in 0..k {
                for j in 0..k {
                    if i != j && loss[i][j].is_zero() {
                        return Err(Violation::NotPositive { i, j });
                    }
                }
            }
            for i in 0..k {
                for j in 0..k {
                    for l in 0..k {
                        if loss[i][l] > loss[i][j] + loss[j][l] {
                            return Err(Violation::Triangle { i, j, k: l });
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// A validated finite label space. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSpace {
    labels: Vec<String>,
    loss: Vec<Vec<Rational>>,
    kind: LossKind,
    index: HashMap<String, usize>,
}

impl LabelSpace {
    pub fn new(labels: Vec<String>, loss: Vec<Vec<Rational>>, kind: LossKind) -> Result<Self, Violation> {
        Self::with_cap(labels, loss, kind, DEFAULT_MAX_LABELS)
    }

    pub fn with_cap(
        labels: Vec<String>,
        loss: Vec<Vec<Rational>>,
        kind: LossKind,
        cap: usize,
    ) -> Result<Self, Violation> {
        validate_with_cap(&labels, &loss, kind, cap)?;
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Ok(LabelSpace { labels, loss, kind, index })
    }

    /// The discrete metric over the given labels.
    pub fn zero_one<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self, Violation> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let k = labels.len();
        let loss =
            (0..k).map(|i| (0..k).map(|j| if i == j { Rational::zero() } else { Rational::one() }).collect()).collect();
        Self::new(labels, loss, LossKind::ZeroOne)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, SpaceError> {
        self.index.get(label).copied().ok_or_else(|| SpaceError::UnknownLabel(label.to_string()))
    }

    /// Loss between two labels by identifier.
    pub fn loss(&self, a: &str, b: &str) -> Result<Rational, SpaceError> {
        Ok(self.loss[self.index_of(a)?][self.index_of(b)?])
    }

    /// Loss between two labels by index. Panics on out-of-range indices.
    pub fn loss_at(&self, a: usize, b: usize) -> Rational {
        self.loss[a][b]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.loss
    }

    /// The loss matrix over a common denominator, for integer hot loops.
    pub fn scaled(&self) -> Result<ScaledLoss, SpaceError> {
        let mut denom: i64 = 1;
        for row in &self.loss {
            for v in row {
                denom = denom.lcm(v.denom());
                if denom > (1 << 40) {
                    return Err(SpaceError::ScaleOverflow);
                }
            }
        }
        let k = self.len();
        let mut entries = Vec::with_capacity(k * k);
        for row in &self.loss {
            for v in row {
                let scaled = v.numer().checked_mul(denom / v.denom()).ok_or(SpaceError::ScaleOverflow)?;
                entries.push(scaled);
            }
        }
        Ok(ScaledLoss { labels: k, denom, entries })
    }

    pub fn to_doc(&self) -> LabelSpaceDoc {
        LabelSpaceDoc {
            labels: self.labels.clone(),
            kind: self.kind,
            loss: self.loss.iter().map(|row| row.iter().map(rational::format).collect()).collect(),
        }
    }

    pub fn from_doc(doc: &LabelSpaceDoc) -> Result<Self, SpaceError> {
        let loss = doc
            .loss
            .iter()
            .map(|row| row.iter().map(|t| rational::parse(t)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(doc.labels.clone(), loss, doc.kind)?)
    }
}

/// Loss matrix multiplied through by the lcm of its denominators.
#[derive(Debug, Clone)]
pub struct ScaledLoss {
    labels: usize,
    denom: i64,
    entries: Vec<i64>,
}

impl ScaledLoss {
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> i64 {
        self.entries[a * self.labels + b]
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    /// Converts a sum of `n` scaled losses back into the averaged rational.
    pub fn average(&self, sum: i64, n: usize) -> Rational {
        Rational::new(sum, self.denom * n as i64)
    }

    /// Inverse of [`ScaledLoss::average`]; `None` if `value` is off the grid.
    pub fn to_units(&self, value: &Rational, n: usize) -> Option<i64> {
        let scaled = *value * Rational::from_integer(self.denom * n as i64);
        scaled.is_integer().then(|| scaled.to_integer())
    }
}

/// JSON document form of a label space; losses are `"p/q"` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSpaceDoc {
    pub labels: Vec<String>,
    pub kind: LossKind,
    pub loss: Vec<Vec<String>>,
}
