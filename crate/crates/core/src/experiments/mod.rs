//! Finite experiments built on the exact solvers. Each driver returns a
//! serializable report with a flag for the inequality it checks.

mod counterexample;
mod curve;
mod pac;
mod properties;
mod sweep;

use thiserror::Error;

use crate::apportion::ApportionError;
use crate::matching::MatchingError;
use crate::metric::Violation;
use crate::minimax::SolveError;
use crate::oig::OigError;
use crate::solve::DispatchError;

pub use counterexample::{counterexample_gap, generate_counterexample, Counterexample, CounterexampleSpec, GapReport};
pub use curve::{sample_complexity_curve, CurveEntry, CurvePoint, Family, SampleComplexityCurve};
pub use pac::{pac_bridge_check, PacEstimate, RowEstimate};
pub use properties::{run_property_suite, PropertyOutcome, PropertyReport, SuiteConfig};
pub use sweep::{compactness_sweep, ColumnSweep, SweepReport, MAX_SWEEP_ROWS};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{what} = {value} is out of range ({allowed})")]
    OutOfRange { what: &'static str, value: usize, allowed: &'static str },
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("generated space is invalid: {0}")]
    Space(#[from] Violation),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
    #[error(transparent)]
    Apportion(#[from] ApportionError),
}

impl From<SolveError> for ExperimentError {
    fn from(e: SolveError) -> Self {
        ExperimentError::Dispatch(e.into())
    }
}

impl From<MatchingError> for ExperimentError {
    fn from(e: MatchingError) -> Self {
        ExperimentError::Dispatch(e.into())
    }
}

impl From<OigError> for ExperimentError {
    fn from(e: OigError) -> Self {
        ExperimentError::Dispatch(e.into())
    }
}
