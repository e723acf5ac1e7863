use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{counterexample_gap, ExperimentError};
use crate::apportion::{derive_apportionments, verify_factor_two_with_witness};
use crate::generate::{random_graph, random_metric_space, random_table, zero_one_space};
use crate::matching::{deficiency, optimal_zero_one, r_matching, MatchingStatus};
use crate::metric::LabelSpace;
use crate::minimax::{self, AgnosticOptions, AgnosticProblem, BruteForceOptions};
use crate::oig::{build_problem, evaluate, evaluate_apportioned, BehaviorTable, LearnerAssignment};
use crate::rational::Rational;
use crate::solve::solve_exact;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub cases: usize,
    pub budget: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 2024, cases: 40, budget: minimax::DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub config: SuiteConfig,
    pub properties: Vec<PropertyOutcome>,
    pub all_passed: bool,
}

/// `Ok(None)` on success, `Ok(Some(reason))` on a counterexample.
type Check = fn(&mut ChaCha8Rng, u64) -> Result<Option<String>, ExperimentError>;

fn any_space(rng: &mut ChaCha8Rng, k: usize) -> Arc<LabelSpace> {
    if rng.gen_bool(0.5) {
        zero_one_space(k)
    } else {
        random_metric_space(rng, k)
    }
}

/// Small enough for every exact solver: at most 12 variables over 3 labels.
fn small_table(rng: &mut ChaCha8Rng) -> BehaviorTable {
    let n = rng.gen_range(1..=3);
    let k = rng.gen_range(2..=3);
    let space = any_space(rng, k);
    random_table(rng, space, n, 4)
}

fn describe(table: &BehaviorTable) -> String {
    serde_json::to_string(&table.to_doc()).unwrap_or_default()
}

fn row_deletion_monotone(rng: &mut ChaCha8Rng, budget: u64) -> Result<Option<String>, ExperimentError> {
    let table = small_table(rng);
    let full = solve_exact(&build_problem(&table), budget)?.value;
    for drop in 0..table.len() {
        if table.len() == 1 {
            break;
        }
        let keep: Vec<usize> = (0..table.len()).filter(|&r| r != drop).collect();
        let sub = solve_exact(&build_problem(&table.restrict_rows(&keep)?), budget)?.value;
        if sub > full {
            return Ok(Some(format!("dropping row {drop} raised {full} to {sub} on {}", describe(&table))));
        }
    }
    Ok(None)
}

fn agnostic_at_least_realizable(rng: &mut ChaCha8Rng, budget: u64) -> Result<Option<String>, ExperimentError> {
    let n = rng.gen_range(1..=2);
    let k = rng.gen_range(2..=3);
    let space = any_space(rng, k);
    let table = random_table(rng, space, n, 3);
    let realizable = solve_exact(&build_problem(&table), budget)?.value;
    let opts = AgnosticOptions { budget, ..AgnosticOptions::default() };
    let agnostic = minimax::agnostic_minimax(&AgnosticProblem::from_table(&table), true, &opts)?.value;
    Ok((agnostic < realizable)
        .then(|| format!("agnostic {agnostic} < realizable {realizable} on {}", describe(&table))))
}

fn local_at_least_brute(rng: &mut ChaCha8Rng, budget: u64) -> Result<Option<String>, ExperimentError> {
    let table = small_table(rng);
    let problem = build_problem(&table);
    let exact = minimax::brute_force_minimax(&problem, &BruteForceOptions { budget, table_labels_only: false })?;
    let local = minimax::local_search_minimax(&problem, 4, rng.gen())?;
    Ok((local.value < exact.value)
        .then(|| format!("local {} < brute {} on {}", local.value, exact.value, describe(&table))))
}

fn matching_equals_brute(rng: &mut ChaCha8Rng, budget: u64) -> Result<Option<String>, ExperimentError> {
    let (n, k) = if rng.gen_bool(0.5) { (3, 2) } else { (rng.gen_range(1..=2), 3) };
    let table = random_table(rng, zero_one_space(k), n, 5);
    let problem = build_problem(&table);
    let m = optimal_zero_one(&problem)?.epsilon;
    let b = minimax::brute_force_minimax(&problem, &BruteForceOptions { budget, table_labels_only: false })?.value;
    Ok((m != b).then(|| format!("matching {m} != brute {b} on {}", describe(&table))))
}

fn factor_two(rng: &mut ChaCha8Rng, budget: u64) -> Result<Option<String>, ExperimentError> {
    let (n, k) = [(1, 5), (2, 4), (3, 3)][rng.gen_range(0..3)];
    let space = random_metric_space(rng, k);
    let table = random_table(rng, space, n, 4);
    let problem = build_problem(&table);
    let sol = solve_exact(&problem, budget)?;
    let rep = verify_factor_two_with_witness(&problem, &sol.learner, sol.value, Rational::new(1, 100))?;
    Ok((!rep.holds).then(|| format!("realized {} > {} on {}", rep.realized, rep.bound, describe(&table))))
}

fn deficiency_certificates(rng: &mut ChaCha8Rng, _budget: u64) -> Result<Option<String>, ExperimentError> {
    let left = rng.gen_range(0..=8);
    let right = rng.gen_range(1..=8);
    let p = rng.gen_range(0.1..0.7);
    let graph = random_graph(rng, left, right, p);
    let res = r_matching(&graph);
    let def = deficiency(&graph);
    let unmatched = right - res.matching.len();
    if def.value != unmatched {
        return Ok(Some(format!("deficiency {} but {unmatched} right nodes unmatched", def.value)));
    }
    if def.value > 0 {
        let n = graph.neighborhood(&def.witness).len();
        if def.witness.len() - n != def.value {
            return Ok(Some(format!("witness attains {} not {}", def.witness.len() - n, def.value)));
        }
    }
    let cert_ok = match (&res.status, &res.certificate) {
        (MatchingStatus::Matched, None) => true,
        (MatchingStatus::Deficient, Some(c)) => c.verify(&graph),
        _ => false,
    };
    Ok((!cert_ok).then(|| format!("bad certificate on {left}x{right} graph")))
}

fn counterexample_family(rng: &mut ChaCha8Rng, budget: u64) -> Result<Option<String>, ExperimentError> {
    let m = rng.gen_range(2..=5);
    let r = counterexample_gap(m, 1, Rational::new(1, 100), budget)?;
    let ok = r.xi_with_cover == Rational::from_integer(1)
        && r.xi_without_cover == Rational::from_integer(2)
        && r.factor_two_tight
        && r.holds;
    Ok((!ok).then(|| format!("m = {m}: with {} without {}", r.xi_with_cover, r.xi_without_cover)))
}

fn derived_apportionments_hold(rng: &mut ChaCha8Rng, _budget: u64) -> Result<Option<String>, ExperimentError> {
    let table = small_table(rng);
    let problem = build_problem(&table);
    let k = problem.space().len();
    let learner = LearnerAssignment::new((0..problem.variables().len()).map(|_| rng.gen_range(0..k)).collect());
    let alpha = evaluate(&problem, &learner)?.worst;
    let apps = derive_apportionments(&problem, &learner, alpha)?;
    let check = evaluate_apportioned(&problem, &learner, &apps)?;
    Ok((!check.satisfied).then(|| format!("violations {:?} on {}", check.violations, describe(&table))))
}

const PROPERTIES: [(&str, Check); 8] = [
    ("row-deletion-monotone", row_deletion_monotone),
    ("agnostic-at-least-realizable", agnostic_at_least_realizable),
    ("local-search-at-least-brute-force", local_at_least_brute),
    ("matching-equals-brute-force", matching_equals_brute),
    ("factor-two-bound", factor_two),
    ("deficiency-certificates", deficiency_certificates),
    ("counterexample-gap", counterexample_family),
    ("derived-apportionments-hold", derived_apportionments_hold),
];

/// Runs every property on `cases` seeded instances. Solver errors count as
/// failures of the property that hit them.
pub fn run_property_suite(config: SuiteConfig) -> PropertyReport {
    let properties: Vec<PropertyOutcome> = PROPERTIES
        .par_iter()
        .enumerate()
        .map(|(idx, &(name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(idx as u64));
            let mut failures = Vec::new();
            for case in 0..config.cases {
                match check(&mut rng, config.budget) {
                    Ok(None) => {}
                    Ok(Some(why)) => failures.push(format!("case {case}: {why}")),
                    Err(e) => failures.push(format!("case {case}: error: {e}")),
                }
            }
            PropertyOutcome { name, cases: config.cases, passed: failures.is_empty(), failures }
        })
        .collect();
    let all_passed = properties.iter().all(|p| p.passed);
    PropertyReport { config, properties, all_passed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_suite_passes() {
        let report = run_property_suite(SuiteConfig { seed: 5, cases: 3, ..SuiteConfig::default() });
        assert_eq!(report.properties.len(), 8);
        for p in &report.properties {
            assert!(p.passed, "{}: {:?}", p.name, p.failures);
        }
    }
}
