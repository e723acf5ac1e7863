//! Seeded random instances for property checks and experiment sweeps.

use std::sync::Arc;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::matching::BipartiteGraph;
use crate::metric::{LabelSpace, LossKind};
use crate::oig::BehaviorTable;
use crate::rational::Rational;

pub fn label_names(k: usize) -> Vec<String> {
    (0..k).map(|i| i.to_string()).collect()
}

pub fn zero_one_space(k: usize) -> Arc<LabelSpace> {
    Arc::new(LabelSpace::zero_one(label_names(k)).expect("k >= 1"))
}

/// Shortest-path closure of random positive weights in `{1/2, 1, 3/2, …, 3}`,
/// which is always a metric.
pub fn random_metric_space<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Arc<LabelSpace> {
    let mut d = vec![vec![Rational::zero(); k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let w = Rational::new(rng.gen_range(1..=6), 2);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for via in 0..k {
        for i in 0..k {
            for j in 0..k {
                let through = d[i][via] + d[via][j];
                if through < d[i][j] {
                    d[i][j] = through;
                }
            }
        }
    }
    Arc::new(LabelSpace::new(label_names(k), d, LossKind::Metric).expect("closure is a metric"))
}

/// Between 1 and `max_rows` random rows (duplicates collapse).
pub fn random_table<R: Rng + ?Sized>(rng: &mut R, space: Arc<LabelSpace>, n: usize, max_rows: usize) -> BehaviorTable {
    let count = rng.gen_range(1..=max_rows.max(1));
    let k = space.len();
    let rows = (0..count).map(|_| (0..n).map(|_| rng.gen_range(0..k)).collect()).collect();
    BehaviorTable::new(space, n, rows).expect("rows are well formed")
}

/// A uniformly random subset of `Yⁿ` with between 1 and `max_rows` rows.
pub fn random_distinct_table<R: Rng + ?Sized>(
    rng: &mut R,
    space: Arc<LabelSpace>,
    n: usize,
    max_rows: usize,
) -> BehaviorTable {
    let mut all = all_rows(space.len(), n);
    all.shuffle(rng);
    let count = rng.gen_range(1..=max_rows.clamp(1, all.len()));
    all.truncate(count);
    BehaviorTable::new(space, n, all).expect("rows are well formed")
}

/// All of `{0..k}ⁿ`, lexicographic.
pub fn all_rows(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..k).map(move |l| {
                    let mut row = prefix.clone();
                    row.push(l);
                    row
                })
            })
            .collect();
    }
    out
}

/// Each edge present independently with probability `p`.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, left: usize, right: usize, p: f64) -> BipartiteGraph {
    let edges = (0..left).map(|_| (0..right).filter(|_| rng.gen_bool(p)).collect()).collect();
    BipartiteGraph::new(left, right, edges).expect("indices in range")
}

/// The all-zero row plus the `n` unit rows, over `{0, 1}`.
pub fn star_table(n: usize) -> BehaviorTable {
    let mut rows = vec![vec![0; n]];
    for i in 0..n {
        let mut row = vec![0; n];
        row[i] = 1;
        rows.push(row);
    }
    BehaviorTable::new(zero_one_space(2), n, rows).expect("rows are well formed")
}

pub fn single_row_table(n: usize) -> BehaviorTable {
    BehaviorTable::new(zero_one_space(2), n, vec![vec![0; n]]).expect("rows are well formed")
}
