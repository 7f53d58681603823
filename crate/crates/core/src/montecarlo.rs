//! Monte Carlo execution of a POS under sampled durations.
//!
//! Each sample draws `max(0, d0 + N(0, σ))` for every real activity, starts
//! every activity as early as the POS allows, and checks the realized
//! schedule against the original constraints. Sample `i` uses its own RNG
//! stream, so results do not depend on the number of worker threads.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_schedule, Instance, Schedule, TemporalConstraint, TIME_EPS};
use crate::pos::{CompiledPos, Pos};
use crate::rng::stream;

/// Quantile levels reported in every [`EvaluationReport`].
pub const QUANTILE_LEVELS: [f64; 5] = [0.5, 0.8, 0.9, 0.95, 0.99];

/// Realized durations; dummies and `σ = 0` activities keep their nominal value.
pub fn sample_durations<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Vec<f64> {
    instance
        .activities
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if instance.is_dummy(i) || a.sigma <= 0.0 {
                a.mean_duration
            } else {
                let z = Normal::new(0.0, a.sigma).expect("positive sigma").sample(rng);
                (a.mean_duration + z).max(0.0)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Execution {
    pub schedule: Schedule,
    pub makespan: f64,
    /// Original MIN/MAX constraints broken by the realized schedule.
    pub violations: Vec<TemporalConstraint>,
    /// Resource overloads; chaining rules these out, so any entry is a bug.
    pub resource_overloads: usize,
}

impl Execution {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty() && self.resource_overloads == 0
    }
}

/// Earliest-start dispatch of `pos` under `durations`.
pub fn execute_pos(pos: &CompiledPos, instance: &Instance, durations: &[f64]) -> Execution {
    let schedule = pos.earliest_start(durations);
    let report = check_schedule(instance, &schedule, durations);
    Execution {
        makespan: schedule.start(instance.sink()),
        schedule,
        violations: report.temporal,
        resource_overloads: report.resource.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub samples: usize,
    pub epsilon: f64,
    pub seed: u64,
    /// Per-instance makespan lower bound for the normalized makespan.
    pub lower_bound: Option<f64>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            samples: 1000,
            epsilon: 0.1,
            seed: 0,
            lower_bound: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub samples: usize,
    pub epsilon: f64,
    /// The bound under test.
    pub robust_makespan: f64,
    pub mean: f64,
    pub variance: f64,
    /// Empirical `1 - ε` quantile of the realized makespans.
    pub quantile: f64,
    /// `(level, value)` for each of [`QUANTILE_LEVELS`].
    pub quantiles: Vec<(f64, f64)>,
    /// Share of samples whose makespan exceeds the bound.
    pub violation_rate: f64,
    /// The same share among samples that executed without violations;
    /// `None` when there were none.
    pub violation_rate_feasible: Option<f64>,
    /// Share of samples whose execution broke an original constraint.
    pub infeasibility_probability: f64,
    pub resource_overload_samples: usize,
    pub lower_bound: Option<f64>,
    /// `quantile / lower_bound`.
    pub mnpm: Option<f64>,
}

/// Nearest-rank quantile of sorted data: the smallest value with at least a
/// share `level` of the data at or below it.
pub fn nearest_rank(sorted: &[f64], level: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let rank = (level * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Share of `makespans` strictly above `bound`.
pub fn violation_rate(makespans: &[f64], bound: f64) -> f64 {
    if makespans.is_empty() {
        return 0.0;
    }
    makespans.iter().filter(|&&m| m > bound + TIME_EPS).count() as f64 / makespans.len() as f64
}

/// Runs `config.samples` executions of `pos` and summarizes them against the
/// bound `robust_makespan`. Also returns the realized makespans in sample
/// order.
pub fn evaluate_pos(
    pos: &Pos,
    instance: &Instance,
    robust_makespan: f64,
    config: &EvaluationConfig,
) -> Result<(EvaluationReport, Vec<f64>)> {
    if config.samples == 0 {
        return Err(Error::Config("at least one sample is required".into()));
    }
    if !(config.epsilon > 0.0 && config.epsilon <= 1.0) {
        return Err(Error::EpsilonOutOfRange(config.epsilon));
    }
    if let Some(lb) = config.lower_bound {
        if !(lb > 0.0) {
            return Err(Error::Config("lower bound must be positive".into()));
        }
    }
    if pos.activity_count != instance.len() {
        return Err(Error::Invalid(format!(
            "POS has {} activities but the instance has {}",
            pos.activity_count,
            instance.len()
        )));
    }
    let compiled = pos.compile()?;

    let runs: Vec<(f64, bool, bool)> = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(config.seed, i as u64);
            let durations = sample_durations(instance, &mut rng);
            let ex = execute_pos(&compiled, instance, &durations);
            (ex.makespan, ex.violations.is_empty(), ex.resource_overloads == 0)
        })
        .collect();

    let n = runs.len() as f64;
    let makespans: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let mean = makespans.iter().sum::<f64>() / n;
    let variance = makespans.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / n;
    let mut sorted = makespans.clone();
    sorted.sort_by(f64::total_cmp);
    let quantile = nearest_rank(&sorted, 1.0 - config.epsilon);

    let feasible: Vec<f64> = runs.iter().filter(|r| r.1 && r.2).map(|r| r.0).collect();
    let infeasible = runs.len() - feasible.len();

    let report = EvaluationReport {
        samples: config.samples,
        epsilon: config.epsilon,
        robust_makespan,
        mean,
        variance,
        quantile,
        quantiles: QUANTILE_LEVELS.iter().map(|&l| (l, nearest_rank(&sorted, l))).collect(),
        violation_rate: violation_rate(&makespans, robust_makespan),
        violation_rate_feasible: (!feasible.is_empty()).then(|| violation_rate(&feasible, robust_makespan)),
        infeasibility_probability: infeasible as f64 / n,
        resource_overload_samples: runs.iter().filter(|r| !r.2).count(),
        lower_bound: config.lower_bound,
        mnpm: config.lower_bound.map(|lb| quantile / lb),
    };
    Ok((report, makespans))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{two_activity, TemporalConstraint};
    use crate::problem::Problem;
    use crate::rng::seeded;

    fn serial(sigma: f64, max_lag: Option<f64>) -> (Instance, Pos) {
        let mut inst = two_activity(1);
        inst.set_uniform_sigma(sigma);
        if let Some(l) = max_lag {
            inst.constraints.push(TemporalConstraint::max(1, 2, l));
        }
        let p = Problem::new(inst.clone()).unwrap();
        let pos = Pos::assemble(&p, vec![vec![vec![1, 2]]]);
        (inst, pos)
    }

    #[test]
    fn zero_sigma_gives_nominal_durations() {
        let (inst, _) = serial(0.0, None);
        assert_eq!(sample_durations(&inst, &mut seeded(1)), inst.nominal_durations());
    }

    #[test]
    fn negative_draws_are_truncated() {
        let mut inst = two_activity(1);
        inst.activities[1].mean_duration = 1.0;
        inst.activities[1].sigma = 2.0;
        let mut rng = seeded(5);
        let n = 100_000;
        let zeros = (0..n).filter(|_| sample_durations(&inst, &mut rng)[1] == 0.0).count();
        // P(1 + 2Z <= 0) = Φ(-0.5)
        assert!((zeros as f64 / n as f64 - 0.308538).abs() < 0.01);
    }

    #[test]
    fn chain_execution() {
        let (inst, pos) = serial(0.0, None);
        let ex = execute_pos(&pos.compile().unwrap(), &inst, &[0.0, 4.0, 2.0, 0.0]);
        assert_eq!(&ex.schedule.starts[1..3], &[0.0, 4.0]);
        assert_eq!(ex.makespan, 6.0);
        assert!(ex.feasible());
    }

    #[test]
    fn stretched_chain_breaks_a_max_lag() {
        let (inst, pos) = serial(0.0, Some(3.0));
        let ex = execute_pos(&pos.compile().unwrap(), &inst, &[0.0, 4.0, 2.0, 0.0]);
        assert_eq!(ex.violations, vec![TemporalConstraint::max(1, 2, 3.0)]);
    }

    #[test]
    fn deterministic_evaluation() {
        let (inst, pos) = serial(0.0, None);
        let cfg = EvaluationConfig { samples: 50, lower_bound: Some(5.0), ..EvaluationConfig::default() };
        let (r, ms) = evaluate_pos(&pos, &inst, 5.0, &cfg).unwrap();
        assert!(ms.iter().all(|&m| m == 5.0));
        assert_eq!(r.violation_rate, 0.0);
        assert_eq!(r.infeasibility_probability, 0.0);
        assert_eq!(r.mnpm, Some(1.0));
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let (inst, pos) = serial(1.0, Some(3.5));
        let cfg = EvaluationConfig { samples: 2000, seed: 11, ..EvaluationConfig::default() };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| evaluate_pos(&pos, &inst, 6.0, &cfg).unwrap());
        let b = evaluate_pos(&pos, &inst, 6.0, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.0.infeasibility_probability > 0.0);
    }

    #[test]
    fn quantiles_use_nearest_rank() {
        let data = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        assert_eq!(nearest_rank(&data, 0.9), 9.0);
        assert_eq!(nearest_rank(&data, 0.95), 10.0);
        assert_eq!(nearest_rank(&data, 0.0), 1.0);
        assert_eq!(violation_rate(&data, 8.0), 0.2);
    }

    #[test]
    fn bad_arguments() {
        let (inst, pos) = serial(1.0, None);
        let cfg = EvaluationConfig { lower_bound: Some(0.0), ..EvaluationConfig::default() };
        assert!(matches!(evaluate_pos(&pos, &inst, 6.0, &cfg), Err(Error::Config(_))));
        let cfg = EvaluationConfig { samples: 0, ..EvaluationConfig::default() };
        assert!(evaluate_pos(&pos, &inst, 6.0, &cfg).is_err());
    }
}
