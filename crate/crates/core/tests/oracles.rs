mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{hall_deficiency, is_metric, naive_error, naive_variables, naive_xi, zero_one};
use transductive_core::generate::{all_rows, random_graph, random_metric_space, random_table, zero_one_space};
use transductive_core::matching::{deficiency, optimal_zero_one, prune_degrees, r_matching, MatchingStatus};
use transductive_core::metric::validate;
use transductive_core::minimax::{
    agnostic_minimax, brute_force_minimax, AgnosticOptions, AgnosticProblem, BruteForceOptions,
};
use transductive_core::{build_problem, evaluate, BehaviorTable, LabelSpace, LearnerAssignment, LossKind, Rational};

fn squared_grid(k: usize) -> Arc<LabelSpace> {
    let loss =
        (0..k).map(|i| (0..k).map(|j| Rational::from_integer(((i as i64) - (j as i64)).pow(2))).collect()).collect();
    let labels = (0..k).map(|i| format!("g{i}")).collect();
    Arc::new(LabelSpace::new(labels, loss, LossKind::General).unwrap())
}

fn tiny_table(rng: &mut ChaCha8Rng) -> BehaviorTable {
    let shape = [(1, 3, 3), (2, 3, 3), (2, 2, 4), (3, 2, 4)][rng.gen_range(0..4)];
    table_of_shape(rng, shape)
}

/// Includes four-column tables, for checks that do not enumerate learners.
fn wide_table(rng: &mut ChaCha8Rng) -> BehaviorTable {
    let shape = [(2, 3, 4), (3, 3, 5), (4, 2, 6), (4, 3, 5)][rng.gen_range(0..4)];
    table_of_shape(rng, shape)
}

fn table_of_shape(rng: &mut ChaCha8Rng, (n, k, rows): (usize, usize, usize)) -> BehaviorTable {
    let space = match rng.gen_range(0..3) {
        0 => zero_one_space(k),
        1 => random_metric_space(rng, k),
        _ => squared_grid(k),
    };
    random_table(rng, space, n, rows)
}

#[test]
fn variables_and_dependence_match_naive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let table = wide_table(&mut rng);
        let problem = build_problem(&table);
        let naive = naive_variables(table.rows());
        assert_eq!(problem.variables().len(), naive.len());
        for (v, var) in problem.variables().iter().enumerate() {
            let deps: BTreeSet<(usize, usize)> =
                problem.dependents(v).iter().map(|&r| (r, problem.completion(r, v))).collect();
            let expected: BTreeSet<(usize, usize)> = naive[var.values()].iter().copied().collect();
            assert_eq!(deps, expected);
        }
        for (r, row) in table.rows().iter().enumerate() {
            for (i, &v) in problem.dependence()[r].iter().enumerate() {
                assert_eq!(problem.variables()[v].hole(), i);
                assert_eq!(problem.completion(r, v), row[i]);
            }
        }
    }
}

#[test]
fn evaluation_matches_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..200 {
        let table = wide_table(&mut rng);
        let problem = build_problem(&table);
        let k = table.space().len();
        let choice: Vec<usize> = (0..problem.variables().len()).map(|_| rng.gen_range(0..k)).collect();
        let by_key: std::collections::HashMap<Vec<Option<usize>>, usize> =
            problem.variables().iter().zip(&choice).map(|(var, &c)| (var.values().to_vec(), c)).collect();
        let offsets = vec![Rational::from_integer(0); table.len()];
        let expected = naive_error(table.space().matrix(), table.rows(), &offsets, |key| by_key[key]);
        let eval = evaluate(&problem, &LearnerAssignment::new(choice)).unwrap();
        assert_eq!(eval.worst, expected);
    }
}

#[test]
fn brute_force_matches_naive_minimax() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..150 {
        let table = tiny_table(&mut rng);
        let problem = build_problem(&table);
        let all: Vec<usize> = (0..table.space().len()).collect();
        let offsets = vec![Rational::from_integer(0); table.len()];
        let expected = naive_xi(table.space().matrix(), table.rows(), &offsets, &all);
        let got = brute_force_minimax(&problem, &BruteForceOptions::default()).unwrap();
        assert_eq!(got.value, expected, "{:?}", table.to_doc());
        assert_eq!(evaluate(&problem, &got.learner).unwrap().worst, expected);
    }
}

#[test]
fn matching_solver_matches_naive_minimax() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..300 {
        let (n, k) = [(1, 3), (2, 2), (2, 3), (3, 2)][rng.gen_range(0..4)];
        let table = random_table(&mut rng, zero_one_space(k), n, 4);
        let problem = build_problem(&table);
        let all: Vec<usize> = (0..k).collect();
        let offsets = vec![Rational::from_integer(0); table.len()];
        let expected = naive_xi(&zero_one(k), table.rows(), &offsets, &all);
        let sol = optimal_zero_one(&problem).unwrap();
        assert_eq!(sol.epsilon, expected);
        assert_eq!(evaluate(&problem, &sol.learner).unwrap().worst, expected);
        assert_eq!(sol.epsilon, Rational::new((n - sol.d_star) as i64, n as i64));
        if let Some(cert) = sol.certificate {
            let graph = transductive_core::matching::BipartiteGraph::from_problem(&problem);
            let nbhd = graph.neighborhood(&cert.rows);
            assert_eq!(nbhd.len(), cert.neighbors);
            assert!(cert.neighbors < cert.demand * cert.rows.len());
        }
    }
}

#[test]
fn agnostic_matches_naive_over_all_labellings() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for _ in 0..60 {
        let n = rng.gen_range(1..=2);
        let k = rng.gen_range(2..=3);
        let space = if rng.gen_bool(0.5) { zero_one_space(k) } else { random_metric_space(&mut rng, k) };
        let class = random_table(&mut rng, space.clone(), n, 3);
        let rows = all_rows(k, n);
        let d = space.matrix();
        let offsets: Vec<Rational> = rows
            .iter()
            .map(|y| {
                class
                    .rows()
                    .iter()
                    .map(|h| {
                        h.iter().zip(y).map(|(&a, &b)| d[a][b]).sum::<Rational>() / Rational::from_integer(n as i64)
                    })
                    .min()
                    .unwrap()
            })
            .collect();
        let all: Vec<usize> = (0..k).collect();
        let expected = naive_xi(d, &rows, &offsets, &all);
        let got = agnostic_minimax(&AgnosticProblem::from_table(&class), true, &AgnosticOptions::default()).unwrap();
        assert_eq!(got.value, expected);
    }
}

#[test]
fn hall_oracle_agrees_with_matching() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for _ in 0..500 {
        let left = rng.gen_range(0..=9);
        let right = rng.gen_range(1..=8);
        let p = rng.gen_range(0.05..0.8);
        let graph = random_graph(&mut rng, left, right, p);
        let expected = hall_deficiency(right, graph.edges());
        assert_eq!(deficiency(&graph).value, expected);
        let res = r_matching(&graph);
        assert_eq!(res.status == MatchingStatus::Matched, expected == 0);
        if expected == 0 {
            let pruned = prune_degrees(&graph).unwrap();
            assert_eq!(hall_deficiency(right, pruned.graph.edges()), 0);
            assert_eq!(r_matching(&pruned.graph).status, MatchingStatus::Matched);
        }
    }
}

proptest! {
    #[test]
    fn validation_agrees_with_direct_axiom_check(entries in proptest::collection::vec(0i64..5, 9)) {
        let d: Vec<Vec<Rational>> = (0..3)
            .map(|i| (0..3).map(|j| Rational::new(entries[3 * i + j], 2)).collect())
            .collect();
        let labels: Vec<String> = ["x", "y", "z"].map(String::from).to_vec();
        prop_assert_eq!(validate(&labels, &d, LossKind::Metric).is_ok(), is_metric(&d));
    }

    #[test]
    fn symmetric_metrics_validate(a in 1i64..6, b in 1i64..6, c in 1i64..6) {
        let q = |x| Rational::from_integer(x);
        let d = vec![vec![q(0), q(a), q(b)], vec![q(a), q(0), q(c)], vec![q(b), q(c), q(0)]];
        let labels: Vec<String> = ["x", "y", "z"].map(String::from).to_vec();
        prop_assert_eq!(validate(&labels, &d, LossKind::Metric).is_ok(), is_metric(&d));
    }
}
