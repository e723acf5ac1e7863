//! Exact optimal transductive error rates for finite hypothesis classes.
//!
//! A finite class restricted to a sample is a [`oig::BehaviorTable`]. Its
//! one-inclusion assignment system ([`oig::build_problem`]) turns learners
//! into label assignments of shared one-hole variables, and the optimal
//! worst-case error becomes a minimax over those assignments:
//!
//! - [`matching`] solves 0-1 loss exactly through a demand flow, with Hall
//!   certificates;
//! - [`minimax`] solves any finite loss exhaustively or by local search, in
//!   realizable and agnostic modes;
//! - [`apportion`] builds the factor-two learner for metric losses and checks
//!   its guarantee exactly;
//! - [`experiments`] drives the larger finite checks built on top of these.
//!
//! All arithmetic is exact rational arithmetic.

#![allow(clippy::needless_range_loop)]

pub mod apportion;
pub mod experiments;
mod flow;
pub mod generate;
pub mod matching;
pub mod metric;
pub mod minimax;
pub mod oig;
pub mod rational;
pub mod solve;

pub use metric::{LabelSpace, LossKind};
pub use oig::{build_problem, evaluate, AssignmentProblem, BehaviorTable, LearnerAssignment};
pub use rational::Rational;
