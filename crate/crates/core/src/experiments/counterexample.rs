use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::apportion::{verify_factor_two, FactorTwoReport};
use crate::generate::all_rows;
use crate::metric::{LabelSpace, LossKind};
use crate::oig::{build_problem, BehaviorTable};
use crate::rational::{self, Rational};
use crate::solve::solve_exact;

/// The core set `R_m`, plus one label `s_A` for every nonempty `A ⊆ R_m`.
/// Core labels sit 2 apart; `s_A` is 1 from members of `A`, 2 from the rest
/// of the core and 1 from every other `s` label. Without the full cover the
/// label `s_{R_m}` is left out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleSpec {
    pub m: usize,
    pub include_full_cover: bool,
    /// Number of free input points; the table is `R_m^k` at `n = k`.
    #[serde(default = "one")]
    pub k: usize,
}

fn one() -> usize {
    1
}

impl CounterexampleSpec {
    pub fn new(m: usize, include_full_cover: bool) -> Self {
        CounterexampleSpec { m, include_full_cover, k: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub space: Arc<LabelSpace>,
    pub table: BehaviorTable,
}

fn subset_label(mask: usize, m: usize) -> String {
    let members: Vec<String> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| (i + 1).to_string()).collect();
    format!("s{{{}}}", members.join(","))
}

pub fn generate_counterexample(spec: &CounterexampleSpec) -> Result<Counterexample, ExperimentError> {
    let m = spec.m;
    if !(2..=5).contains(&m) {
        return Err(ExperimentError::OutOfRange { what: "m", value: m, allowed: "2..=5" });
    }
    if !(1..=3).contains(&spec.k) {
        return Err(ExperimentError::OutOfRange { what: "k", value: spec.k, allowed: "1..=3" });
    }
    let full = (1usize << m) - 1;
    let masks: Vec<usize> = (1..=full).filter(|&a| spec.include_full_cover || a != full).collect();

    let mut labels: Vec<String> = (1..=m).map(|i| format!("r{i}")).collect();
    labels.extend(masks.iter().map(|&a| subset_label(a, m)));
    let size = labels.len();
    let two = Rational::from_integer(2);
    let unit = Rational::from_integer(1);
    let mut loss = vec![vec![Rational::zero(); size]; size];
    for i in 0..size {
        for j in 0..size {
            if i == j {
                continue;
            }
            loss[i][j] = match (i < m, j < m) {
                (true, true) => two,
                (false, false) => unit,
                (core, _) => {
                    let (c, s) = if core { (i, j) } else { (j, i) };
                    if masks[s - m] >> c & 1 == 1 {
                        unit
                    } else {
                        two
                    }
                }
            };
        }
    }
    let space = Arc::new(LabelSpace::new(labels, loss, LossKind::Metric)?);
    let table = BehaviorTable::new(space.clone(), spec.k, all_rows(m, spec.k))?;
    Ok(Counterexample { space, table })
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub m: usize,
    pub k: usize,
    pub labels_with_cover: usize,
    pub labels_without_cover: usize,
    #[serde(with = "rational::as_string")]
    pub xi_with_cover: Rational,
    #[serde(with = "rational::as_string")]
    pub xi_without_cover: Rational,
    /// `None` when the with-cover value is zero.
    #[serde(with = "rational::as_opt_string")]
    pub ratio: Option<Rational>,
    /// Factor-two learner on the with-cover instance at its own optimum.
    pub factor_two: FactorTwoReport,
    /// Whether the factor-two learner realizes exactly twice the optimum.
    pub factor_two_tight: bool,
    /// Dropping a label never helps, and the factor-two bound holds.
    pub holds: bool,
}

/// Solves both variants exactly and runs the factor-two learner on the one
/// with the cover.
pub fn counterexample_gap(m: usize, k: usize, delta: Rational, budget: u64) -> Result<GapReport, ExperimentError> {
    let with = generate_counterexample(&CounterexampleSpec { m, include_full_cover: true, k })?;
    let without = generate_counterexample(&CounterexampleSpec { m, include_full_cover: false, k })?;
    let p_with = build_problem(&with.table);
    let p_without = build_problem(&without.table);
    let xi_with = solve_exact(&p_with, budget)?.value;
    let xi_without = solve_exact(&p_without, budget)?.value;
    let factor_two = verify_factor_two(&p_with, xi_with, delta)?;
    let tight = factor_two.realized == Rational::from_integer(2) * xi_with;
    Ok(GapReport {
        m,
        k,
        labels_with_cover: with.space.len(),
        labels_without_cover: without.space.len(),
        xi_with_cover: xi_with,
        xi_without_cover: xi_without,
        ratio: (!xi_with.is_zero()).then(|| xi_without / xi_with),
        holds: factor_two.holds && xi_with <= xi_without,
        factor_two,
        factor_two_tight: tight,
    })
}
