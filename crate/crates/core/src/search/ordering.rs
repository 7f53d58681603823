//! Ordering generation: decide, for pairs of activities that compete for a
//! resource, which order tends to give the lower robust makespan.
//!
//! For each selected pair `(a, b)` and each of `m` random activity lists,
//! both orders are posted as hard constraints and evaluated with the same
//! random stream. The index value is the share of bilaterally feasible
//! samples in which `a` first wins.

use serde::{Deserialize, Serialize};

use crate::chaining::OrderGraph;
use crate::error::Result;
use crate::model::ActivityId;
use crate::problem::Problem;
use crate::rng::{derive_seed, stream, SolverRng};
use crate::schedule::{generate_schedule, random_activity_list, ActivityList};
use crate::search::{evaluate_schedule, SearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelectedPair {
    pub a: ActivityId,
    pub b: ActivityId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    ABeforeB,
    BBeforeA,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderDecision {
    pub pair: SelectedPair,
    pub decision: Decision,
    /// `None` when no sample was feasible on both sides.
    pub index_value: Option<f64>,
    /// Samples feasible under both orders.
    pub samples_used: usize,
    /// Usable samples won by `a` first and by `b` first; the rest are ties.
    pub wins_a: usize,
    pub wins_b: usize,
    /// Fewer than a quarter of the samples were usable.
    pub insufficient: bool,
    /// The decided order made it into the order graph.
    pub inserted: bool,
}

/// Unordered pairs of real activities with no precedence path between them
/// that cannot run in parallel on some resource.
pub fn pairs_selection(problem: &Problem) -> Vec<SelectedPair> {
    let inst = problem.instance();
    let mut out = Vec::new();
    for a in inst.real_activities() {
        for b in inst.real_activities().filter(|&b| b > a) {
            if problem.related(a, b) {
                continue;
            }
            let clash = inst
                .capacities
                .iter()
                .enumerate()
                .any(|(k, &c)| inst.activities[a].demands[k] + inst.activities[b].demands[k] > c);
            if clash {
                out.push(SelectedPair { a, b });
            }
        }
    }
    out
}

/// `A_BEFORE_B` when `a` first wins more than a share `ip` of the usable
/// samples, `B_BEFORE_A` when `b` first does. Ties count for neither side,
/// so without ties this is the `iv > ip` / `iv < 1 - ip` rule.
pub fn decide(wins_a: usize, wins_b: usize, used: usize, ip: f64) -> Decision {
    if used == 0 {
        return Decision::Undecided;
    }
    let used = used as f64;
    if wins_a as f64 / used > ip {
        Decision::ABeforeB
    } else if wins_b as f64 / used > ip {
        Decision::BBeforeA
    } else {
        Decision::Undecided
    }
}

/// `list` with `first` moved ahead of `second` by exchanging their
/// positions when needed.
pub fn ordered_copy(list: &ActivityList, first: ActivityId, second: ActivityId) -> ActivityList {
    let mut order = list.order.clone();
    let (i, j) = (list.position(first), list.position(second));
    if let (Some(i), Some(j)) = (i, j) {
        if i > j {
            order.swap(i, j);
        }
    }
    ActivityList::new(order)
}

fn side_fitness(
    side: Option<&Problem>,
    list: &ActivityList,
    rng: &SolverRng,
    config: &SearchConfig,
) -> Option<f64> {
    let problem = side?;
    let mut rng = rng.clone();
    let outcome = generate_schedule(problem, list, &mut rng, &config.generation);
    let schedule = outcome.schedule()?;
    evaluate_schedule(problem, schedule, config, &OrderGraph::new(), &mut rng)
        .ok()
        .map(|e| e.fitness)
}

/// Evaluates every pair and inserts the decided orders, most confident
/// first, skipping any that would close a cycle with the problem's
/// precedences or earlier insertions.
pub fn generate_ordering(
    problem: &Problem,
    pairs: &[SelectedPair],
    config: &SearchConfig,
) -> Result<(OrderGraph, Vec<OrderDecision>)> {
    let m = config.og_samples;
    let base_seed = derive_seed(config.seed, 0x4f47);
    let mut decisions = Vec::with_capacity(pairs.len());
    for (pi, pair) in pairs.iter().enumerate() {
        let ab = problem.with_hard_orders(&[(pair.a, pair.b)]).ok();
        let ba = problem.with_hard_orders(&[(pair.b, pair.a)]).ok();
        let mut wins = 0usize;
        let mut losses = 0usize;
        let mut used = 0usize;
        for s in 0..m {
            let mut rng = stream(derive_seed(base_seed, pi as u64), s as u64);
            let list = random_activity_list(problem, &mut rng);
            let fa = side_fitness(ab.as_ref(), &ordered_copy(&list, pair.a, pair.b), &rng, config);
            let fb = side_fitness(ba.as_ref(), &ordered_copy(&list, pair.b, pair.a), &rng, config);
            if let (Some(fa), Some(fb)) = (fa, fb) {
                used += 1;
                if fa < fb {
                    wins += 1;
                } else if fb < fa {
                    losses += 1;
                }
            }
        }
        let insufficient = 4 * used < m;
        let index_value = (used > 0).then(|| wins as f64 / used as f64);
        let decision = if insufficient {
            Decision::Undecided
        } else {
            decide(wins, losses, used, config.og_index_parameter)
        };
        decisions.push(OrderDecision {
            pair: *pair,
            decision,
            index_value,
            samples_used: used,
            wins_a: wins,
            wins_b: losses,
            insufficient,
            inserted: false,
        });
    }

    let mut ranked: Vec<usize> = (0..decisions.len())
        .filter(|&i| decisions[i].decision != Decision::Undecided)
        .collect();
    let confidence = |d: &OrderDecision| d.wins_a.max(d.wins_b) as f64 / d.samples_used.max(1) as f64;
    ranked.sort_by(|&i, &j| confidence(&decisions[j]).total_cmp(&confidence(&decisions[i])).then(i.cmp(&j)));

    let mut graph = OrderGraph::new();
    for i in ranked {
        let d = &decisions[i];
        let edge = match d.decision {
            Decision::ABeforeB => (d.pair.a, d.pair.b),
            Decision::BBeforeA => (d.pair.b, d.pair.a),
            Decision::Undecided => continue,
        };
        let mut candidate = graph.pairs().to_vec();
        candidate.push(edge);
        if problem.with_list_orders(&candidate).is_ok() {
            graph.insert(edge.0, edge.1);
            decisions[i].inserted = true;
        }
    }
    Ok((graph, decisions))
}
