use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::ExperimentError;
use crate::metric::LossKind;
use crate::oig::{build_problem, BehaviorTable};
use crate::rational::{self, Rational};
use crate::solve::solve_exact;

/// Row subsets are enumerated exhaustively, so tables are capped here.
pub const MAX_SWEEP_ROWS: usize = 12;

/// Cap on the total number of exact solves in one sweep.
const MAX_SWEEP_SOLVES: usize = 1 << 20;

#[derive(Debug, Clone, Serialize)]
pub struct ColumnSweep {
    pub columns: Vec<usize>,
    pub rows: usize,
    #[serde(with = "rational::as_string")]
    pub full_xi: Rational,
    /// Max over every nonempty row subset, the full set included.
    #[serde(with = "rational::as_string")]
    pub max_xi: Rational,
    /// Max over nonempty proper row subsets; `None` for a single row.
    #[serde(with = "rational::as_opt_string")]
    pub max_proper_xi: Option<Rational>,
    /// `full_xi / max_proper_xi` when the denominator is positive.
    #[serde(with = "rational::as_opt_string")]
    pub proper_ratio: Option<Rational>,
    /// No row subset beats the full projection.
    pub monotone: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub kind: LossKind,
    pub n: usize,
    pub projections: usize,
    #[serde(with = "rational::as_string")]
    pub full_xi: Rational,
    #[serde(with = "rational::as_string")]
    pub max_projection_xi: Rational,
    /// `max_projection_xi / full_xi`, taken as 1 when both are zero.
    #[serde(with = "rational::as_string")]
    pub ratio: Rational,
    #[serde(with = "rational::as_opt_string")]
    pub max_proper_xi: Option<Rational>,
    #[serde(with = "rational::as_opt_string")]
    pub proper_ratio: Option<Rational>,
    /// One entry per nonempty column subset, the full column set last.
    pub by_columns: Vec<ColumnSweep>,
    pub holds: bool,
}

fn sweep_columns(table: &BehaviorTable, columns: Vec<usize>, budget: u64) -> Result<ColumnSweep, ExperimentError> {
    let projected = table.project_columns(&columns)?;
    let rows = projected.len();
    let full_mask = (1u32 << rows) - 1;
    let values = (1..=full_mask)
        .into_par_iter()
        .map(|mask| {
            let keep: Vec<usize> = (0..rows).filter(|r| mask >> r & 1 == 1).collect();
            let sub = projected.restrict_rows(&keep)?;
            Ok((mask, solve_exact(&build_problem(&sub), budget)?.value))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let full_xi = values.iter().find(|(m, _)| *m == full_mask).map(|(_, v)| *v).expect("full mask solved");
    let max_xi = values.iter().map(|(_, v)| *v).max().expect("nonempty");
    let max_proper_xi = values.iter().filter(|(m, _)| *m != full_mask).map(|(_, v)| *v).max();
    let proper_ratio = max_proper_xi.filter(|p| !p.is_zero()).map(|p| full_xi / p);
    Ok(ColumnSweep { columns, rows, full_xi, max_xi, max_proper_xi, proper_ratio, monotone: max_xi == full_xi })
}

/// Solves every finite projection of `table` exactly: each nonempty row
/// subset at each nonempty column subset.
pub fn compactness_sweep(table: &BehaviorTable, budget: u64) -> Result<SweepReport, ExperimentError> {
    let n = table.n();
    if n == 0 || n > 8 {
        return Err(ExperimentError::OutOfRange { what: "n", value: n, allowed: "1..=8" });
    }
    if table.len() > MAX_SWEEP_ROWS {
        return Err(ExperimentError::TooLarge(format!("{} rows, sweep cap is {MAX_SWEEP_ROWS}", table.len())));
    }
    let column_sets: Vec<Vec<usize>> =
        (1u32..1 << n).map(|mask| (0..n).filter(|c| mask >> c & 1 == 1).collect()).collect();
    let solves = column_sets.len() * ((1usize << table.len()) - 1);
    if solves > MAX_SWEEP_SOLVES {
        return Err(ExperimentError::TooLarge(format!("{solves} projections")));
    }
    let by_columns =
        column_sets.into_par_iter().map(|cols| sweep_columns(table, cols, budget)).collect::<Result<Vec<_>, _>>()?;
    let last = by_columns.last().expect("at least one column set");
    let (full_xi, max_projection_xi) = (last.full_xi, last.max_xi);
    let ratio = if full_xi.is_zero() {
        if max_projection_xi.is_zero() {
            Rational::from_integer(1)
        } else {
            return Err(ExperimentError::TooLarge("projection beats a zero full value".into()));
        }
    } else {
        max_projection_xi / full_xi
    };
    let one = Rational::from_integer(1);
    let ratio_ok = match table.space().kind() {
        LossKind::ZeroOne => ratio == one,
        _ => ratio >= one && ratio <= Rational::from_integer(2),
    };
    Ok(SweepReport {
        kind: table.space().kind(),
        n,
        projections: solves,
        full_xi,
        max_projection_xi,
        ratio,
        max_proper_xi: last.max_proper_xi,
        proper_ratio: last.proper_ratio,
        holds: ratio_ok && by_columns.iter().all(|c| c.monotone),
        by_columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{single_row_table, zero_one_space};
    use crate::minimax::DEFAULT_BUDGET;

    #[test]
    fn corner_sweep() {
        let table =
            BehaviorTable::new(zero_one_space(2), 3, vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0]]).unwrap();
        let r = compactness_sweep(&table, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.full_xi, Rational::new(1, 3));
        assert_eq!(r.max_projection_xi, Rational::new(1, 3));
        assert_eq!(r.ratio, Rational::from_integer(1));
        assert_eq!(r.by_columns.len(), 7);
        assert_eq!(r.projections, 7 * 7);
        assert!(r.holds);
    }

    #[test]
    fn single_row_is_all_zero() {
        let r = compactness_sweep(&single_row_table(3), DEFAULT_BUDGET).unwrap();
        assert!(r.by_columns.iter().all(|c| c.max_xi.is_zero()));
        assert_eq!(r.ratio, Rational::from_integer(1));
        assert_eq!(r.max_proper_xi, None);
    }
}
