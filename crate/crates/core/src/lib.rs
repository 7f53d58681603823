//! Robust scheduling for RCPSP/max with stochastic activity durations.
//!
//! A search over activity lists builds feasible schedules, turns them into
//! partial order schedules (POS) by resource chaining, and scores each POS by
//! an upper bound on the `1 - epsilon` quantile of its makespan, computed from
//! propagated duration moments.

pub mod chaining;
pub mod error;
pub mod generate;
pub mod grid;
pub mod io;
pub mod model;
pub mod montecarlo;
pub mod pos;
pub mod problem;
pub mod rng;
pub mod rules;
pub mod schedule;
pub mod search;
pub mod temporal;

pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use model::{
    check_schedule, validate_instance, Activity, ActivityId, FeasibilityReport, Instance, LagKind, Schedule,
    TemporalConstraint, ValidationReport, Violation,
};
pub use problem::Problem;
pub use temporal::{DistanceGraph, StartWindows, Time};
pub use chaining::{Chaining, OrderGraph};
pub use generate::{fixture_suite, generate_instance, GeneratorConfig};
pub use grid::{run_grid, AggregateRow, GridSpec, RunRow, Variant};
pub use montecarlo::{evaluate_pos, execute_pos, sample_durations, EvaluationConfig, EvaluationReport, Execution};
pub use pos::{CompiledPos, EdgeKind, Pos, PosEdge};
pub use rules::{makespan_moments, pos_fitness, robust_fitness, MomentPair, Rule};
pub use schedule::{generate_schedule, random_activity_list, ActivityList, GenerationConfig, GenerationOutcome};
pub use search::{robust_local_search, validate_trace, RobustResult, SearchConfig, TraceStep};
