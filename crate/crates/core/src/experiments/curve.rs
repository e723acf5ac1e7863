use serde::{Deserialize, Serialize};

use super::{generate_counterexample, CounterexampleSpec, ExperimentError};
use crate::generate::{single_row_table, star_table};
use crate::oig::{build_problem, BehaviorTable};
use crate::rational::{self, Rational};
use crate::solve::{solve_exact, SolverKind};

/// Built-in table families indexed by sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum Family {
    SingleRow,
    /// The zero row and the `n` unit rows over `{0, 1}`.
    Star,
    /// The counterexample table with `n` free inputs.
    Counterexample {
        m: usize,
        cover: bool,
    },
}

impl Family {
    pub fn table(&self, n: usize) -> Result<BehaviorTable, ExperimentError> {
        match *self {
            Family::SingleRow => Ok(single_row_table(n)),
            Family::Star => Ok(star_table(n)),
            Family::Counterexample { m, cover } => {
                Ok(generate_counterexample(&CounterexampleSpec { m, include_full_cover: cover, k: n })?.table)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub n: usize,
    #[serde(with = "rational::as_string")]
    pub xi: Rational,
    pub solver: SolverKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveEntry {
    #[serde(with = "rational::as_string")]
    pub epsilon: Rational,
    /// `None` when `ξ(n_max) > ε`: unreachable inside the scanned range.
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleComplexityCurve {
    pub n_min: usize,
    pub n_max: usize,
    pub points: Vec<CurvePoint>,
    /// Sorted by increasing epsilon.
    pub entries: Vec<CurveEntry>,
    /// `m` is nonincreasing in epsilon, counting unreachable as infinite.
    pub monotone: bool,
}

/// Exact `ξ(n)` for every `n` in `n_min..=n_max`, then for each `ε` the
/// smallest scanned `n` past which every scanned value is at most `ε`.
pub fn sample_complexity_curve<F>(
    family: F,
    n_min: usize,
    n_max: usize,
    epsilons: &[Rational],
    budget: u64,
) -> Result<SampleComplexityCurve, ExperimentError>
where
    F: Fn(usize) -> Result<BehaviorTable, ExperimentError>,
{
    if n_min == 0 || n_min > n_max {
        return Err(ExperimentError::OutOfRange { what: "n_min", value: n_min, allowed: "1..=n_max" });
    }
    let mut points = Vec::new();
    for n in n_min..=n_max {
        let sol = solve_exact(&build_problem(&family(n)?), budget)?;
        points.push(CurvePoint { n, xi: sol.value, solver: sol.solver });
    }
    let mut sorted = epsilons.to_vec();
    sorted.sort();
    sorted.dedup();
    let entries: Vec<CurveEntry> = sorted
        .into_iter()
        .map(|epsilon| {
            let tail = points.iter().rev().take_while(|p| p.xi <= epsilon).count();
            CurveEntry { epsilon, m: (tail > 0).then(|| n_max + 1 - tail) }
        })
        .collect();
    let monotone = entries.windows(2).all(|w| match (w[0].m, w[1].m) {
        (_, None) => w[0].m.is_none(),
        (None, Some(_)) => true,
        (Some(a), Some(b)) => b <= a,
    });
    Ok(SampleComplexityCurve { n_min, n_max, points, entries, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimax::DEFAULT_BUDGET;

    #[test]
    fn star_family_is_one_over_n() {
        let eps = [Rational::new(1, 2), Rational::new(1, 3), Rational::new(1, 5), Rational::new(1, 9)];
        let c = sample_complexity_curve(|n| Family::Star.table(n), 1, 6, &eps, DEFAULT_BUDGET).unwrap();
        for p in &c.points {
            assert_eq!(p.xi, Rational::new(1, p.n as i64));
        }
        let ms: Vec<Option<usize>> = c.entries.iter().map(|e| e.m).collect();
        assert_eq!(ms, vec![None, Some(5), Some(3), Some(2)]);
        assert!(c.monotone);
    }

    #[test]
    fn single_row_and_counterexample() {
        let eps = [Rational::new(1, 10), Rational::from_integer(1)];
        let c = sample_complexity_curve(|n| Family::SingleRow.table(n), 1, 4, &eps, DEFAULT_BUDGET).unwrap();
        assert!(c.entries.iter().all(|e| e.m == Some(1)));
        let family = Family::Counterexample { m: 3, cover: false };
        let eps = [Rational::new(3, 2), Rational::from_integer(2)];
        let c = sample_complexity_curve(|n| family.table(n), 1, 1, &eps, DEFAULT_BUDGET).unwrap();
        assert_eq!(c.entries[0].m, None);
        assert_eq!(c.entries[1].m, Some(1));
    }
}
