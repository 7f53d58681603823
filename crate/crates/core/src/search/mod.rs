//! Robust local search over activity lists.
//!
//! The search alternates between lists that yield a feasible schedule (F)
//! and lists that do not (I). From I it shifts the first unplaceable
//! activity ahead; from F it swaps two activities and keeps the neighbour if
//! its robust makespan is no worse. Infeasible neighbours of an F list are
//! accepted with a small probability to move between F regions.

pub mod moves;
pub mod ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chaining::{chain, Chaining, OrderGraph};
use crate::error::{Error, Result};
use crate::model::{ActivityId, Schedule};
use crate::pos::Pos;
use crate::problem::Problem;
use crate::rng::seeded;
use crate::rules::{makespan_moments, robust_fitness, MomentPair, Rule};
use crate::schedule::{generate_schedule, random_activity_list, ActivityList, GenerationConfig, GenerationOutcome};

pub use moves::{shift_ahead_move, swap_is_valid, swap_move};
pub use ordering::{decide, generate_ordering, pairs_selection, Decision, OrderDecision, SelectedPair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub rule: Rule,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub escape_probability: f64,
    pub generation: GenerationConfig,
    pub seed: u64,
    /// `Feedback` is the robustness-feedback chaining enhancement.
    pub chaining: Chaining,
    pub order_generation: bool,
    pub og_samples: usize,
    pub og_index_parameter: f64,
    /// Add `selected pairs × og_samples` iterations, the budget ordering
    /// generation would have spent.
    pub extra_iterations_for_pairs: bool,
    pub record_trace: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            rule: Rule::Gnla,
            epsilon: 0.1,
            max_iterations: 1000,
            escape_probability: 0.01,
            generation: GenerationConfig::default(),
            seed: 0,
            chaining: Chaining::Flexible,
            order_generation: false,
            og_samples: 100,
            og_index_parameter: 0.6,
            extra_iterations_for_pairs: false,
            record_trace: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::EpsilonOutOfRange(self.epsilon));
        }
        if !(0.0..=1.0).contains(&self.escape_probability) {
            return Err(Error::Config(format!(
                "escape probability {} out of [0,1]",
                self.escape_probability
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if self.generation.retries == 0 {
            return Err(Error::Config("retries must be positive".into()));
        }
        if self.og_samples == 0 {
            return Err(Error::Config("og_samples must be positive".into()));
        }
        if !(0.5..=1.0).contains(&self.og_index_parameter) {
            return Err(Error::Config(format!(
                "index parameter {} out of [0.5,1]",
                self.og_index_parameter
            )));
        }
        Ok(())
    }
}

/// A chained, scored schedule.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub pos: Pos,
    pub moments: MomentPair,
    pub fitness: f64,
}

/// Chains `schedule` and scores the resulting POS.
pub fn evaluate_schedule<R: Rng + ?Sized>(
    problem: &Problem,
    schedule: &Schedule,
    config: &SearchConfig,
    order: &OrderGraph,
    rng: &mut R,
) -> Result<Evaluation> {
    let pos = chain(config.chaining, problem, schedule, order, rng)?;
    let compiled = pos.compile()?;
    let moments = makespan_moments(config.rule, &compiled, problem.instance())?;
    let fitness = robust_fitness(moments, config.epsilon)?;
    Ok(Evaluation { pos, moments, fitness })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// The current list yields a feasible schedule.
    F,
    /// It does not.
    I,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Shift,
    Swap,
}

/// One iteration of the search loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: usize,
    /// Region of the current list before the move.
    pub region: Region,
    pub move_kind: MoveKind,
    /// The move changed the list.
    pub moved: bool,
    pub neighbor_feasible: bool,
    /// Robust makespan of the neighbour, when feasible.
    pub fitness: Option<f64>,
    /// Robust makespan of the current list, when in F.
    pub current: Option<f64>,
    /// Escape draw, taken only for infeasible neighbours of F lists.
    pub escape_draw: Option<f64>,
    pub accepted: bool,
    /// Best robust makespan after this step.
    pub best: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustResult {
    pub pos: Option<Pos>,
    pub robust_makespan: Option<f64>,
    pub moments: Option<MomentPair>,
    pub epsilon: f64,
    pub rule: Rule,
    pub iterations_used: usize,
    /// Share of iterations that ended with the current list in F.
    pub feasible_fraction: f64,
    pub seed: u64,
    pub found_feasible: bool,
    pub order_graph: OrderGraph,
    pub order_decisions: Vec<OrderDecision>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceStep>,
}

impl RobustResult {
    /// Recomputes the robust makespan of the stored POS.
    pub fn recompute(&self, problem: &Problem) -> Result<Option<f64>> {
        let Some(pos) = &self.pos else {
            return Ok(None);
        };
        let moments = makespan_moments(self.rule, &pos.compile()?, problem.instance())?;
        Ok(Some(robust_fitness(moments, self.epsilon)?))
    }
}

struct Current {
    list: ActivityList,
    region: Region,
    fitness: Option<f64>,
    failing: Option<ActivityId>,
}

pub fn robust_local_search(problem: &Problem, config: &SearchConfig) -> Result<RobustResult> {
    config.validate()?;

    let (order_graph, order_decisions) = if config.order_generation {
        generate_ordering(problem, &pairs_selection(problem), config)?
    } else {
        (OrderGraph::new(), Vec::new())
    };
    let list_problem = if order_graph.is_empty() {
        problem.clone()
    } else {
        problem.with_list_orders(order_graph.pairs())?
    };
    let mut iterations = config.max_iterations;
    if config.extra_iterations_for_pairs {
        iterations += pairs_selection(problem).len() * config.og_samples;
    }

    let mut rng = seeded(config.seed);
    let mut best: Option<Evaluation> = None;
    let mut trace = Vec::new();

    let list = random_activity_list(&list_problem, &mut rng);
    let mut cur = match generate_schedule(problem, &list, &mut rng, &config.generation) {
        GenerationOutcome::Schedule(s) => match evaluate_schedule(problem, &s, config, &order_graph, &mut rng) {
            Ok(eval) => {
                let fitness = eval.fitness;
                best = Some(eval);
                Current { list, region: Region::F, fitness: Some(fitness), failing: None }
            }
            Err(_) => Current { list, region: Region::I, fitness: None, failing: None },
        },
        GenerationOutcome::FirstFailure(a) => Current { list, region: Region::I, fitness: None, failing: Some(a) },
    };

    let mut feasible_iterations = 0usize;
    for iteration in 1..=iterations {
        let region = cur.region;
        let (move_kind, (neighbor, moved)) = match region {
            Region::I => (
                MoveKind::Shift,
                match cur.failing {
                    Some(a) => shift_ahead_move(&list_problem, &cur.list, a, &mut rng),
                    None => (cur.list.clone(), false),
                },
            ),
            Region::F => (MoveKind::Swap, swap_move(&list_problem, &cur.list, &mut rng)),
        };

        let outcome = generate_schedule(problem, &neighbor, &mut rng, &config.generation);
        let (evaluation, failing) = match outcome {
            GenerationOutcome::Schedule(s) => (evaluate_schedule(problem, &s, config, &order_graph, &mut rng).ok(), None),
            GenerationOutcome::FirstFailure(a) => (None, Some(a)),
        };

        let current = cur.fitness.filter(|_| region == Region::F);
        let mut step = TraceStep {
            iteration,
            region,
            move_kind,
            moved,
            neighbor_feasible: evaluation.is_some(),
            fitness: evaluation.as_ref().map(|e| e.fitness),
            current,
            escape_draw: None,
            accepted: false,
            best: None,
        };

        match evaluation {
            Some(eval) => {
                let accept = region == Region::I || current.is_none_or(|c| eval.fitness <= c);
                if accept {
                    step.accepted = true;
                    cur = Current { list: neighbor, region: Region::F, fitness: Some(eval.fitness), failing: None };
                    if best.as_ref().is_none_or(|b| eval.fitness <= b.fitness) {
                        best = Some(eval);
                    }
                }
            }
            None if region == Region::I => {
                step.accepted = true;
                cur.list = neighbor;
                if failing.is_some() {
                    cur.failing = failing;
                }
            }
            None => {
                let p: f64 = rng.random();
                step.escape_draw = Some(p);
                if p < config.escape_probability {
                    step.accepted = true;
                    cur = Current { list: neighbor, region: Region::I, fitness: None, failing };
                }
            }
        }

        if cur.region == Region::F {
            feasible_iterations += 1;
        }
        step.best = best.as_ref().map(|b| b.fitness);
        if config.record_trace {
            trace.push(step);
        }
    }

    Ok(RobustResult {
        robust_makespan: best.as_ref().map(|b| b.fitness),
        moments: best.as_ref().map(|b| b.moments),
        found_feasible: best.is_some(),
        pos: best.map(|b| b.pos),
        epsilon: config.epsilon,
        rule: config.rule,
        iterations_used: iterations,
        feasible_fraction: feasible_iterations as f64 / iterations.max(1) as f64,
        seed: config.seed,
        order_graph,
        order_decisions,
        trace,
    })
}

/// Checks a recorded trace against the acceptance rule: feasible neighbours
/// are taken from I unconditionally and from F when no worse; infeasible
/// neighbours are taken from I unconditionally and from F when the escape
/// draw falls below `escape_probability`. Also checks that regions and
/// current values chain from step to step and that the best value never
/// increases.
pub fn validate_trace(trace: &[TraceStep], escape_probability: f64) -> std::result::Result<(), String> {
    let mut expected: Option<(Region, Option<f64>)> = None;
    let mut last_best: Option<f64> = None;
    for step in trace {
        let fail = |msg: &str| Err(format!("iteration {}: {msg}", step.iteration));
        if let Some((region, current)) = expected {
            if step.region != region {
                return fail("region does not follow from the previous step");
            }
            if region == Region::F && step.current != current {
                return fail("current value does not follow from the previous step");
            }
        }
        if step.neighbor_feasible != step.fitness.is_some() {
            return fail("feasibility flag and fitness disagree");
        }
        let should_accept = match (step.neighbor_feasible, step.region) {
            (true, Region::I) => true,
            (true, Region::F) => match (step.fitness, step.current) {
                (Some(f), Some(c)) => f <= c,
                _ => return fail("F step without a current value"),
            },
            (false, Region::I) => true,
            (false, Region::F) => match step.escape_draw {
                Some(p) => p < escape_probability,
                None => return fail("infeasible neighbour of an F list without an escape draw"),
            },
        };
        if should_accept != step.accepted {
            return fail("acceptance does not match the rule");
        }
        expected = Some(match (step.accepted, step.neighbor_feasible) {
            (true, true) => (Region::F, step.fitness),
            (true, false) => (Region::I, None),
            (false, _) => (step.region, step.current),
        });
        match (last_best, step.best) {
            (Some(b), Some(now)) if now > b => return fail("best value increased"),
            (Some(_), None) => return fail("best value disappeared"),
            _ => {}
        }
        if let (Some(f), true, Some(now)) = (step.fitness, step.accepted, step.best) {
            if f < now {
                return fail("accepted value below the recorded best");
            }
        }
        last_best = step.best;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::two_activity;

    fn problem(capacity: u32, sigma: f64) -> Problem {
        let mut inst = two_activity(capacity);
        inst.set_uniform_sigma(sigma);
        Problem::new(inst).unwrap()
    }

    #[test]
    fn parallel_pos_wins_on_capacity_two() {
        let p = problem(2, 1.0);
        let cfg = SearchConfig { max_iterations: 200, seed: 7, ..SearchConfig::default() };
        let r = robust_local_search(&p, &cfg).unwrap();
        let f = r.robust_makespan.unwrap();
        assert!((f - 6.26466).abs() < 1e-4, "{f}");
        assert_eq!(r.recompute(&p).unwrap(), Some(f));
    }

    #[test]
    fn deterministic_optimum_on_capacity_one() {
        let p = problem(1, 0.0);
        for rule in [Rule::Sla, Rule::Gnla] {
            let cfg = SearchConfig { rule, max_iterations: 50, ..SearchConfig::default() };
            assert_eq!(robust_local_search(&p, &cfg).unwrap().robust_makespan, Some(5.0));
        }
    }

    #[test]
    fn same_seed_same_result() {
        let p = problem(1, 0.5);
        let cfg = SearchConfig { max_iterations: 100, seed: 3, record_trace: true, ..SearchConfig::default() };
        let a = robust_local_search(&p, &cfg).unwrap();
        let b = robust_local_search(&p, &cfg).unwrap();
        assert_eq!(a, b);
        validate_trace(&a.trace, cfg.escape_probability).unwrap();
    }

    #[test]
    fn tampered_trace_is_caught() {
        let p = problem(2, 1.0);
        let cfg = SearchConfig { max_iterations: 100, seed: 1, record_trace: true, ..SearchConfig::default() };
        let mut trace = robust_local_search(&p, &cfg).unwrap().trace;
        let idx = trace.iter().position(|s| s.region == Region::F && s.neighbor_feasible).unwrap();
        trace[idx].accepted = !trace[idx].accepted;
        assert!(validate_trace(&trace, cfg.escape_probability).is_err());
    }

    #[test]
    fn bad_epsilon_is_rejected() {
        let p = problem(1, 1.0);
        let cfg = SearchConfig { epsilon: 1.5, ..SearchConfig::default() };
        assert_eq!(robust_local_search(&p, &cfg).unwrap_err(), Error::EpsilonOutOfRange(1.5));
    }

    #[test]
    fn extra_iterations_follow_the_pair_count() {
        let p = problem(1, 1.0);
        let cfg = SearchConfig {
            max_iterations: 10,
            og_samples: 7,
            extra_iterations_for_pairs: true,
            ..SearchConfig::default()
        };
        assert_eq!(robust_local_search(&p, &cfg).unwrap().iterations_used, 17);
    }
}
