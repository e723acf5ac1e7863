//! Reference implementations that share no code with the library solvers.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_traits::Zero;
use transductive_core::Rational;

/// One-hole projections of `rows`, keyed by the row with `None` at the hole,
/// each mapped to its list of (row, held-out label).
pub fn naive_variables(rows: &[Vec<usize>]) -> BTreeMap<Vec<Option<usize>>, Vec<(usize, usize)>> {
    let mut vars: BTreeMap<Vec<Option<usize>>, Vec<(usize, usize)>> = BTreeMap::new();
    for (r, row) in rows.iter().enumerate() {
        for i in 0..row.len() {
            let mut key: Vec<Option<usize>> = row.iter().map(|&l| Some(l)).collect();
            key[i] = None;
            vars.entry(key).or_default().push((r, row[i]));
        }
    }
    vars
}

/// Worst-case transductive error of the learner given by `predict` on each
/// one-hole projection, computed straight from the definition.
pub fn naive_error(
    loss: &[Vec<Rational>],
    rows: &[Vec<usize>],
    offsets: &[Rational],
    predict: impl Fn(&[Option<usize>]) -> usize,
) -> Rational {
    rows.iter()
        .enumerate()
        .map(|(r, row)| {
            let n = row.len();
            let mut total = Rational::zero();
            for i in 0..n {
                let mut key: Vec<Option<usize>> = row.iter().map(|&l| Some(l)).collect();
                key[i] = None;
                total += loss[row[i]][predict(&key)];
            }
            total / Rational::from_integer(n as i64) - offsets[r]
        })
        .max()
        .expect("at least one row")
}

/// Minimax value by trying every assignment of `candidates` to every
/// variable. Only meant for a few thousand assignments.
pub fn naive_xi(loss: &[Vec<Rational>], rows: &[Vec<usize>], offsets: &[Rational], candidates: &[usize]) -> Rational {
    let vars: Vec<Vec<Option<usize>>> = naive_variables(rows).into_keys().collect();
    let c = candidates.len();
    let total = c.checked_pow(vars.len() as u32).expect("small instance");
    assert!(total <= 5_000_000, "naive oracle asked for {total} assignments");
    let mut best: Option<Rational> = None;
    for code in 0..total {
        let mut rest = code;
        let mut assign = BTreeMap::new();
        for v in &vars {
            assign.insert(v.clone(), candidates[rest % c]);
            rest /= c;
        }
        let value = naive_error(loss, rows, offsets, |key| assign[key]);
        if best.is_none_or(|b| value < b) {
            best = Some(value);
        }
    }
    best.expect("at least one assignment")
}

/// Zero-one loss over `k` labels.
pub fn zero_one(k: usize) -> Vec<Vec<Rational>> {
    (0..k).map(|i| (0..k).map(|j| Rational::from_integer(i64::from(i != j))).collect()).collect()
}

/// `max_{R'} |R'| − |N(R')|` by enumerating every right subset.
pub fn hall_deficiency(right: usize, edges: &[Vec<usize>]) -> usize {
    let mut right_nbrs = vec![0u64; right];
    for (l, es) in edges.iter().enumerate() {
        for &r in es {
            right_nbrs[r] |= 1 << l;
        }
    }
    (0u32..1 << right)
        .map(|mask| {
            let nbrs = (0..right).filter(|r| mask >> r & 1 == 1).fold(0u64, |acc, r| acc | right_nbrs[r]);
            (mask.count_ones() as usize).saturating_sub(nbrs.count_ones() as usize)
        })
        .max()
        .unwrap_or(0)
}

/// Metric axioms checked directly, for cross-checking validation.
pub fn is_metric(d: &[Vec<Rational>]) -> bool {
    let k = d.len();
    (0..k).all(|i| {
        (0..k).all(|j| {
            d[i][j] >= Rational::zero()
                && (d[i][j].is_zero() == (i == j))
                && d[i][j] == d[j][i]
                && (0..k).all(|m| d[i][m] <= d[i][j] + d[j][m])
        })
    })
}
