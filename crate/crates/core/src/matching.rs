//! Hall-theory primitives and the exact 0-1 solver.
//!
//! Graphs are bipartite with *left* nodes (variables) and *right* nodes
//! (functions). An R-matching covers every right node with disjoint edges.
//! Maximum matchings come from Hopcroft–Karp; deficiency witnesses come from
//! the alternating-reachability set of the final matching. For 0-1 loss the
//! optimal transductive error reduces to the largest uniform row demand `d`
//! a variable→row flow can meet.

use std::collections::VecDeque;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::FlowNetwork;
use crate::metric::LossKind;
use crate::oig::{AssignmentProblem, LearnerAssignment};
use crate::rational::{self, Rational};

/// Largest right side `prune_degrees` will enumerate subsets of.
pub const MAX_PRUNE_RIGHT: usize = 16;

#[derive(Debug, Error)]
pub enum MatchingError {
    #[error("graph has {left} left nodes but {lists} adjacency lists")]
    AdjacencyCount { left: usize, lists: usize },
    #[error("left node {left} has an edge to right node {right}, but right has {count} nodes")]
    RightOutOfRange { left: usize, right: usize, count: usize },
    #[error("graph is deficient; Hall violator {0:?}")]
    Deficient(HallCertificate),
    #[error("blocking-set enumeration is capped at {cap} right nodes, graph has {right}")]
    TooManyRight { right: usize, cap: usize },
    #[error("matching solver needs a zero-one loss, got {0}")]
    WrongKind(LossKind),
    #[error("matching solver does not handle per-row offsets")]
    HasOffsets,
    #[error("demand feasibility is not monotone: feasible at {feasible}, infeasible at {infeasible}")]
    NonMonotone { feasible: usize, infeasible: usize },
}

/// Bipartite graph as left → right adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphDoc", into = "GraphDoc")]
pub struct BipartiteGraph {
    left: usize,
    right: usize,
    edges: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphDoc {
    left: usize,
    right: usize,
    edges: Vec<Vec<usize>>,
}

impl TryFrom<GraphDoc> for BipartiteGraph {
    type Error = MatchingError;

    fn try_from(doc: GraphDoc) -> Result<Self, Self::Error> {
        BipartiteGraph::new(doc.left, doc.right, doc.edges)
    }
}

impl From<BipartiteGraph> for GraphDoc {
    fn from(g: BipartiteGraph) -> Self {
        GraphDoc { left: g.left, right: g.right, edges: g.edges }
    }
}

impl BipartiteGraph {
    /// Adjacency lists are sorted and deduplicated.
    pub fn new(left: usize, right: usize, mut edges: Vec<Vec<usize>>) -> Result<Self, MatchingError> {
        if edges.len() != left {
            return Err(MatchingError::AdjacencyCount { left, lists: edges.len() });
        }
        for (l, list) in edges.iter_mut().enumerate() {
            if let Some(&r) = list.iter().find(|&&r| r >= right) {
                return Err(MatchingError::RightOutOfRange { left: l, right: r, count: right });
            }
            list.sort_unstable();
            list.dedup();
        }
        Ok(BipartiteGraph { left, right, edges })
    }

    /// Variables on the left, rows on the right, edges where they agree.
    pub fn from_problem(problem: &AssignmentProblem) -> Self {
        let edges = (0..problem.variables().len()).map(|v| problem.dependents(v).to_vec()).collect();
        BipartiteGraph { left: problem.variables().len(), right: problem.rows().len(), edges }
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn right_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.right];
        for (l, list) in self.edges.iter().enumerate() {
            for &r in list {
                adj[r].push(l);
            }
        }
        adj
    }

    /// Left nodes adjacent to any of `rights`, ascending.
    pub fn neighborhood(&self, rights: &[usize]) -> Vec<usize> {
        let mut member = vec![false; self.right];
        for &r in rights {
            member[r] = true;
        }
        (0..self.left).filter(|&l| self.edges[l].iter().any(|&r| member[r])).collect()
    }
}

/// A right subset with fewer neighbours than members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HallCertificate {
    pub rights: Vec<usize>,
    pub neighbors: Vec<usize>,
}

impl HallCertificate {
    pub fn deficiency(&self) -> usize {
        self.rights.len().saturating_sub(self.neighbors.len())
    }

    /// Recomputes the neighbourhood from `graph` and checks `|N(R')| < |R'|`.
    pub fn verify(&self, graph: &BipartiteGraph) -> bool {
        let n = graph.neighborhood(&self.rights);
        n == self.neighbors && n.len() < self.rights.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchingStatus {
    Matched,
    Deficient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchingResult {
    pub status: MatchingStatus,
    /// A maximum matching as `(left, right)` pairs, ordered by right node.
    /// Covers every right node exactly when `status` is `Matched`.
    pub matching: Vec<(usize, usize)>,
    pub certificate: Option<HallCertificate>,
}

/// Hopcroft–Karp with the right side as the side to cover.
/// Returns `mate[right] = Some(left)`.
fn maximum_matching(graph: &BipartiteGraph) -> Vec<Option<usize>> {
    const INF: usize = usize::MAX;
    let adj = graph.right_adjacency();
    let mut mate_r: Vec<Option<usize>> = vec![None; graph.right];
    let mut mate_l: Vec<Option<usize>> = vec![None; graph.left];
    let mut dist = vec![INF; graph.right];

    fn augment(
        r: usize,
        adj: &[Vec<usize>],
        dist: &mut [usize],
        mate_r: &mut [Option<usize>],
        mate_l: &mut [Option<usize>],
    ) -> bool {
        for &l in &adj[r] {
            let ok = match mate_l[l] {
                None => true,
                Some(next) => dist[next] == dist[r] + 1 && augment(next, adj, dist, mate_r, mate_l),
            };
            if ok {
                mate_r[r] = Some(l);
                mate_l[l] = Some(r);
                return true;
            }
        }
        dist[r] = usize::MAX;
        false
    }

    loop {
        let mut queue = VecDeque::new();
        for r in 0..graph.right {
            if mate_r[r].is_none() {
                dist[r] = 0;
                queue.push_back(r);
            } else {
                dist[r] = INF;
            }
        }
        let mut found = false;
        while let Some(r) = queue.pop_front() {
            for &l in &adj[r] {
                match mate_l[l] {
                    None => found = true,
                    Some(next) if dist[next] == INF => {
                        dist[next] = dist[r] + 1;
                        queue.push_back(next);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }
        for r in 0..graph.right {
            if mate_r[r].is_none() {
                augment(r, &adj, &mut dist, &mut mate_r, &mut mate_l);
            }
        }
    }
    mate_r
}

/// Right nodes reachable from unmatched right nodes along alternating paths.
/// This set has exactly `#unmatched` more members than neighbours.
fn alternating_witness(graph: &BipartiteGraph, mate_r: &[Option<usize>]) -> Vec<usize> {
    let adj = graph.right_adjacency();
    let mut mate_l = vec![None; graph.left];
    for (r, m) in mate_r.iter().enumerate() {
        if let Some(l) = m {
            mate_l[*l] = Some(r);
        }
    }
    let mut seen_r = vec![false; graph.right];
    let mut seen_l = vec![false; graph.left];
    let mut queue: VecDeque<usize> = (0..graph.right).filter(|&r| mate_r[r].is_none()).collect();
    for &r in &queue {
        seen_r[r] = true;
    }
    while let Some(r) = queue.pop_front() {
        for &l in &adj[r] {
            if !seen_l[l] {
                seen_l[l] = true;
                let next = mate_l[l].expect("maximum matching leaves no augmenting path");
                if !seen_r[next] {
                    seen_r[next] = true;
                    queue.push_back(next);
                }
            }
        }
    }
    (0..graph.right).filter(|&r| seen_r[r]).collect()
}

fn pairs(mate_r: &[Option<usize>]) -> Vec<(usize, usize)> {
    mate_r.iter().enumerate().filter_map(|(r, m)| m.map(|l| (l, r))).collect()
}

/// Finds an R-matching, or a Hall violator when none exists.
pub fn r_matching(graph: &BipartiteGraph) -> MatchingResult {
    let mate_r = maximum_matching(graph);
    if mate_r.iter().all(Option::is_some) {
        return MatchingResult { status: MatchingStatus::Matched, matching: pairs(&mate_r), certificate: None };
    }
    let rights = alternating_witness(graph, &mate_r);
    let neighbors = graph.neighborhood(&rights);
    MatchingResult {
        status: MatchingStatus::Deficient,
        matching: pairs(&mate_r),
        certificate: Some(HallCertificate { rights, neighbors }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Deficiency {
    pub value: usize,
    /// Attains `|witness| − |N(witness)| = value`; empty when `value` is 0.
    pub witness: Vec<usize>,
}

/// `max |R'| − |N(R')|` over right subsets, via `|R|` minus a maximum matching.
pub fn deficiency(graph: &BipartiteGraph) -> Deficiency {
    let mate_r = maximum_matching(graph);
    let value = mate_r.iter().filter(|m| m.is_none()).count();
    let witness = if value == 0 { Vec::new() } else { alternating_witness(graph, &mate_r) };
    Deficiency { value, witness }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrunedGraph {
    pub graph: BipartiteGraph,
    /// Left nodes whose edges were all removed, in removal order.
    pub removed: Vec<usize>,
    /// For each kept left node, the blocking set its edges were restricted to.
    pub blocking: Vec<Option<Vec<usize>>>,
}

type Bits = Vec<u64>;

fn popcount(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

fn has_bit(bits: &[u64], i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

/// All nonempty right subsets (as masks) with `|N(R')| = |R'|`, paired with
/// their neighbourhoods.
fn blocking_sets(graph: &BipartiteGraph) -> Vec<(u32, Bits)> {
    let words = graph.left.div_ceil(64).max(1);
    let mut single: Vec<Bits> = vec![vec![0; words]; graph.right];
    for (l, list) in graph.edges.iter().enumerate() {
        for &r in list {
            single[r][l / 64] |= 1 << (l % 64);
        }
    }
    let total = 1usize << graph.right;
    let mut nbhd: Vec<Bits> = Vec::with_capacity(total);
    nbhd.push(vec![0; words]);
    let mut out = Vec::new();
    for mask in 1..total {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let bits: Bits = nbhd[rest].iter().zip(&single[low]).map(|(a, b)| a | b).collect();
        if popcount(&bits) == mask.count_ones() as usize {
            out.push((mask as u32, bits.clone()));
        }
        nbhd.push(bits);
    }
    out
}

/// Executes the finite-degree pruning of a matchable graph literally.
///
/// First, left nodes contained in no blocking set are removed one at a time,
/// highest index first, recomputing blocking sets after each removal. Then
/// each remaining left node, in index order, keeps only its edges into the
/// smallest blocking set containing it (ties by lowest mask). Blocking sets
/// are found by enumerating all `2^|R|` right subsets.
pub fn prune_degrees(graph: &BipartiteGraph) -> Result<PrunedGraph, MatchingError> {
    if graph.right > MAX_PRUNE_RIGHT {
        return Err(MatchingError::TooManyRight { right: graph.right, cap: MAX_PRUNE_RIGHT });
    }
    if let Some(cert) = r_matching(graph).certificate {
        return Err(MatchingError::Deficient(cert));
    }
    let mut g = graph.clone();
    let mut removed = Vec::new();
    loop {
        let sets = blocking_sets(&g);
        let covered = |l: usize| sets.iter().any(|(_, bits)| has_bit(bits, l));
        let candidate = (0..g.left).rev().find(|&l| !g.edges[l].is_empty() && !covered(l));
        match candidate {
            Some(l) => {
                g.edges[l].clear();
                removed.push(l);
            }
            None => break,
        }
    }
    let mut blocking = vec![None; g.left];
    for l in 0..g.left {
        if g.edges[l].is_empty() {
            continue;
        }
        let sets = blocking_sets(&g);
        let (mask, _) = sets
            .iter()
            .filter(|(_, bits)| has_bit(bits, l))
            .min_by_key(|(mask, _)| (mask.count_ones(), *mask))
            .expect("every kept left node lies in a blocking set");
        let members: Vec<usize> = (0..g.right).filter(|r| mask >> r & 1 == 1).collect();
        g.edges[l].retain(|r| members.contains(r));
        blocking[l] = Some(members);
    }
    debug_assert!(r_matching(&g).certificate.is_none());
    Ok(PrunedGraph { graph: g, removed, blocking })
}

/// Rows whose combined demand their neighbourhood cannot meet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DemandCertificate {
    /// Per-row demand that failed.
    pub demand: usize,
    pub rows: Vec<usize>,
    /// `|N(rows)|`, strictly less than `demand · |rows|`.
    pub neighbors: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroOneSolution {
    pub epsilon: Rational,
    pub d_star: usize,
    pub learner: LearnerAssignment,
    /// Present when `d_star < n`: why demand `d_star + 1` is infeasible.
    pub certificate: Option<DemandCertificate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroOneReport {
    #[serde(with = "rational::as_string")]
    pub epsilon: Rational,
    pub d_star: usize,
    pub learner: std::collections::BTreeMap<String, String>,
    pub certificates: Vec<DemandCertificate>,
}

impl ZeroOneSolution {
    pub fn report(&self, problem: &AssignmentProblem) -> ZeroOneReport {
        ZeroOneReport {
            epsilon: self.epsilon,
            d_star: self.d_star,
            learner: self.learner.to_named(problem),
            certificates: self.certificate.iter().cloned().collect(),
        }
    }
}

/// Source → variable (cap 1) → dependent row (cap 1) → sink (cap = demand).
struct DemandNetwork<'a> {
    problem: &'a AssignmentProblem,
    net: FlowNetwork,
    var_edges: Vec<Vec<(usize, usize)>>,
    sink_edges: Vec<usize>,
    source: usize,
    sink: usize,
}

struct DemandOutcome {
    feasible: bool,
    learner: LearnerAssignment,
    cut_rows: Vec<usize>,
}

impl<'a> DemandNetwork<'a> {
    fn new(problem: &'a AssignmentProblem) -> Self {
        let vars = problem.variables().len();
        let rows = problem.rows().len();
        let source = 0;
        let sink = vars + rows + 1;
        let mut net = FlowNetwork::new(vars + rows + 2);
        let mut var_edges = Vec::with_capacity(vars);
        for v in 0..vars {
            net.add_edge(source, 1 + v, 1);
            let edges = problem.dependents(v).iter().map(|&r| (r, net.add_edge(1 + v, 1 + vars + r, 1))).collect();
            var_edges.push(edges);
        }
        let sink_edges = (0..rows).map(|r| net.add_edge(1 + vars + r, sink, 0)).collect();
        DemandNetwork { problem, net, var_edges, sink_edges, source, sink }
    }

    fn run(&mut self, demands: &[usize]) -> DemandOutcome {
        for (&id, &d) in self.sink_edges.iter().zip(demands) {
            self.net.set_capacity(id, d as i64);
        }
        self.net.reset();
        let flow = self.net.max_flow(self.source, self.sink);
        let need: i64 = demands.iter().map(|&d| d as i64).sum();
        let feasible = flow == need;
        let choice = self
            .var_edges
            .iter()
            .enumerate()
            .map(|(v, edges)| {
                edges
                    .iter()
                    .find(|(_, id)| self.net.flow_on(*id) > 0)
                    .map_or(0, |&(r, _)| self.problem.completion(r, v))
            })
            .collect();
        let cut_rows = if feasible {
            Vec::new()
        } else {
            let vars = self.problem.variables().len();
            let reach = self.net.residual_reachable(self.source);
            (0..self.problem.rows().len()).filter(|&r| !reach[1 + vars + r]).collect()
        };
        DemandOutcome { feasible, learner: LearnerAssignment::new(choice), cut_rows }
    }
}

fn check_zero_one(problem: &AssignmentProblem) -> Result<(), MatchingError> {
    let kind = problem.space().kind();
    if kind != LossKind::ZeroOne {
        return Err(MatchingError::WrongKind(kind));
    }
    if problem.has_offsets() {
        return Err(MatchingError::HasOffsets);
    }
    Ok(())
}

fn neighbor_count(problem: &AssignmentProblem, rows: &[usize]) -> usize {
    let mut member = vec![false; problem.rows().len()];
    for &r in rows {
        member[r] = true;
    }
    (0..problem.variables().len()).filter(|&v| problem.dependents(v).iter().any(|&r| member[r])).count()
}

/// Exact optimal worst-case 0-1 error `ε* = 1 − d*/n`.
///
/// `d*` is the largest uniform demand such that every row can be credited by
/// `d*` distinct variables, each variable crediting at most one row.
/// Unmatched variables predict the first label of the space.
pub fn optimal_zero_one(problem: &AssignmentProblem) -> Result<ZeroOneSolution, MatchingError> {
    check_zero_one(problem)?;
    let n = problem.n();
    let rows = problem.rows().len();
    let mut net = DemandNetwork::new(problem);
    let mut feasible_at: Vec<usize> = Vec::new();
    let mut infeasible_at: Vec<usize> = Vec::new();
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if net.run(&vec![mid; rows]).feasible {
            feasible_at.push(mid);
            lo = mid;
        } else {
            infeasible_at.push(mid);
            hi = mid - 1;
        }
    }
    let d_star = lo;
    let best = net.run(&vec![d_star; rows]);
    if !best.feasible {
        return Err(MatchingError::NonMonotone { feasible: 0, infeasible: d_star });
    }
    feasible_at.push(d_star);
    let certificate = if d_star < n {
        let next = net.run(&vec![d_star + 1; rows]);
        if next.feasible {
            return Err(MatchingError::NonMonotone { feasible: d_star + 1, infeasible: d_star + 1 });
        }
        infeasible_at.push(d_star + 1);
        let neighbors = neighbor_count(problem, &next.cut_rows);
        Some(DemandCertificate { demand: d_star + 1, rows: next.cut_rows, neighbors })
    } else {
        None
    };
    let max_ok = feasible_at.iter().copied().max().unwrap_or(0);
    if let Some(&min_bad) = infeasible_at.iter().min() {
        if min_bad <= max_ok {
            return Err(MatchingError::NonMonotone { feasible: max_ok, infeasible: min_bad });
        }
    }
    let epsilon = Rational::new((n - d_star) as i64, n as i64);
    Ok(ZeroOneSolution { epsilon, d_star, learner: best.learner, certificate })
}

/// Demand a row needs so that its 0-1 error stays at or below `target`:
/// `⌈n·(1 − target)⌉`, clamped to `[0, n]`.
pub fn demand_for(target: Rational, n: usize) -> usize {
    let need = (Rational::from_integer(1) - target) * Rational::from_integer(n as i64);
    if need <= Rational::zero() {
        0
    } else {
        (need.ceil().to_integer() as usize).min(n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetFeasibility {
    pub feasible: bool,
    pub demands: Vec<usize>,
    /// A learner meeting every target when feasible; otherwise a best-effort flow.
    pub learner: LearnerAssignment,
    pub certificate: Option<Vec<usize>>,
}

/// Can every row `r` be kept at 0-1 error ≤ `targets[r]` simultaneously?
pub fn feasible_with_targets(problem: &AssignmentProblem) -> Result<TargetFeasibility, MatchingError> {
    check_zero_one(problem)?;
    let demands: Vec<usize> = problem.targets().iter().map(|&t| demand_for(t, problem.n())).collect();
    let outcome = DemandNetwork::new(problem).run(&demands);
    Ok(TargetFeasibility {
        feasible: outcome.feasible,
        certificate: (!outcome.feasible).then_some(outcome.cut_rows),
        demands,
        learner: outcome.learner,
    })
}

/// Is worst-case 0-1 error ≤ `epsilon` achievable?
pub fn zero_one_achievable(problem: &AssignmentProblem, epsilon: Rational) -> Result<bool, MatchingError> {
    check_zero_one(problem)?;
    let demands = vec![demand_for(epsilon, problem.n()); problem.rows().len()];
    Ok(DemandNetwork::new(problem).run(&demands).feasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::LabelSpace;
    use crate::oig::{build_problem, evaluate, BehaviorTable};
    use std::sync::Arc;

    fn graph(left: usize, right: usize, edges: Vec<Vec<usize>>) -> BipartiteGraph {
        BipartiteGraph::new(left, right, edges).unwrap()
    }

    fn zero_one_problem(n: usize, rows: Vec<Vec<usize>>) -> AssignmentProblem {
        let space = Arc::new(LabelSpace::zero_one(["0", "1"]).unwrap());
        build_problem(&BehaviorTable::new(space, n, rows).unwrap())
    }

    #[test]
    fn complete_k33_is_matched() {
        let g = graph(3, 3, vec![vec![0, 1, 2]; 3]);
        let res = r_matching(&g);
        assert_eq!(res.status, MatchingStatus::Matched);
        assert_eq!(res.matching.len(), 3);
        assert_eq!(deficiency(&g), Deficiency { value: 0, witness: vec![] });
    }

    #[test]
    fn pigeonhole_is_deficient() {
        let g = graph(1, 2, vec![vec![0, 1]]);
        let res = r_matching(&g);
        assert_eq!(res.status, MatchingStatus::Deficient);
        let cert = res.certificate.unwrap();
        assert_eq!(cert.rights, vec![0, 1]);
        assert_eq!(cert.neighbors, vec![0]);
        assert!(cert.verify(&g));
        assert_eq!(deficiency(&g), Deficiency { value: 1, witness: vec![0, 1] });
    }

    #[test]
    fn graph_validation() {
        assert!(matches!(
            BipartiteGraph::new(2, 1, vec![vec![0]]),
            Err(MatchingError::AdjacencyCount { left: 2, lists: 1 })
        ));
        assert!(matches!(
            BipartiteGraph::new(1, 1, vec![vec![1]]),
            Err(MatchingError::RightOutOfRange { left: 0, right: 1, count: 1 })
        ));
        let g: BipartiteGraph = serde_json::from_str(r#"{"left":2,"right":2,"edges":[[1,0,1],[0]]}"#).unwrap();
        assert_eq!(g.edges(), &[vec![0, 1], vec![0]]);
        assert!(serde_json::from_str::<BipartiteGraph>(r#"{"left":1,"right":1,"edges":[[3]]}"#).is_err());
    }

    #[test]
    fn prune_identity_is_unchanged() {
        let g = graph(3, 3, vec![vec![0], vec![1], vec![2]]);
        let pruned = prune_degrees(&g).unwrap();
        assert_eq!(pruned.graph, g);
        assert!(pruned.removed.is_empty());
        assert_eq!(pruned.blocking, vec![Some(vec![0]), Some(vec![1]), Some(vec![2])]);
    }

    #[test]
    fn prune_removes_surplus_node() {
        let g = graph(3, 2, vec![vec![0, 1], vec![0, 1], vec![0, 1]]);
        let pruned = prune_degrees(&g).unwrap();
        assert_eq!(pruned.removed, vec![2]);
        assert_eq!(pruned.graph.edges(), &[vec![0, 1], vec![0, 1], vec![]]);
        assert_eq!(r_matching(&pruned.graph).status, MatchingStatus::Matched);
    }

    #[test]
    fn prune_rejects_bad_input() {
        let g = graph(1, 2, vec![vec![0, 1]]);
        assert!(matches!(prune_degrees(&g), Err(MatchingError::Deficient(_))));
        let g = graph(17, 17, (0..17).map(|i| vec![i]).collect());
        assert!(matches!(prune_degrees(&g), Err(MatchingError::TooManyRight { right: 17, cap: 16 })));
    }

    #[test]
    fn corner_zero_one_optimum() {
        let p = zero_one_problem(3, vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0]]);
        let sol = optimal_zero_one(&p).unwrap();
        assert_eq!(sol.epsilon, Rational::new(1, 3));
        assert_eq!(sol.d_star, 2);
        assert_eq!(evaluate(&p, &sol.learner).unwrap().worst, Rational::new(1, 3));
        let cert = sol.certificate.unwrap();
        assert_eq!(cert.demand, 3);
        assert!(cert.neighbors < cert.demand * cert.rows.len());
    }

    #[test]
    fn single_row_is_free() {
        for n in 1..5 {
            let p = zero_one_problem(n, vec![vec![1; n]]);
            let sol = optimal_zero_one(&p).unwrap();
            assert_eq!(sol.epsilon, Rational::zero());
            assert_eq!(sol.d_star, n);
            assert!(sol.certificate.is_none());
        }
    }

    #[test]
    fn full_cube_n2_is_one_half() {
        let p = zero_one_problem(2, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let sol = optimal_zero_one(&p).unwrap();
        assert_eq!(sol.epsilon, Rational::new(1, 2));
        assert_eq!(sol.d_star, 1);
    }

    #[test]
    fn refuses_metric_and_offsets() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let two = Rational::from_integer(2);
        let loss = vec![vec![Rational::zero(), two], vec![two, Rational::zero()]];
        let space = Arc::new(LabelSpace::new(labels, loss, LossKind::Metric).unwrap());
        let p = build_problem(&BehaviorTable::new(space, 1, vec![vec![0]]).unwrap());
        assert!(matches!(optimal_zero_one(&p), Err(MatchingError::WrongKind(LossKind::Metric))));

        let p = zero_one_problem(1, vec![vec![0], vec![1]])
            .with_offsets(vec![Rational::zero(), Rational::from_integer(1)])
            .unwrap();
        assert!(matches!(optimal_zero_one(&p), Err(MatchingError::HasOffsets)));
    }

    #[test]
    fn demand_rounds_up() {
        assert_eq!(demand_for(Rational::new(1, 3), 3), 2);
        assert_eq!(demand_for(Rational::new(1, 2), 3), 2);
        assert_eq!(demand_for(Rational::new(2, 5), 3), 2);
        assert_eq!(demand_for(Rational::zero(), 3), 3);
        assert_eq!(demand_for(Rational::from_integer(2), 3), 0);
    }

    #[test]
    fn per_row_targets() {
        let p = zero_one_problem(3, vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0]]);
        // row 0 exact, rows 1 and 2 may lose one coordinate each
        let third = Rational::new(1, 3);
        let ok = p.clone().with_targets(vec![Rational::zero(), third, third]).unwrap();
        let res = feasible_with_targets(&ok).unwrap();
        assert!(res.feasible);
        let eval = evaluate(&ok, &res.learner).unwrap();
        assert_eq!(eval.per_row[0], Rational::zero());
        let bad = p.with_targets(vec![Rational::zero(), Rational::zero(), third]).unwrap();
        let res = feasible_with_targets(&bad).unwrap();
        assert!(!res.feasible);
        assert!(res.certificate.is_some());
        assert!(zero_one_achievable(&ok, third).unwrap());
        assert!(!zero_one_achievable(&ok, Rational::new(1, 4)).unwrap());
    }
}
