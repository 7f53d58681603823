//! Turning a feasible schedule into a POS by resource chaining.
//!
//! Each unit of each resource is a chain. Activities are visited in order of
//! start time and appended to as many chains as they demand units; a chain is
//! available when its last activity has ended by the current start. Appending
//! posts a duration-bearing edge from the chain's previous last activity.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActivityId, Schedule, TIME_EPS};
use crate::pos::Pos;
use crate::problem::Problem;

/// Pairs `(a, b)` meaning "a before b".
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderGraph {
    pairs: Vec<(ActivityId, ActivityId)>,
}

impl OrderGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (ActivityId, ActivityId)>) -> Self {
        let mut g = Self::new();
        for (a, b) in pairs {
            g.insert(a, b);
        }
        g
    }

    pub fn insert(&mut self, a: ActivityId, b: ActivityId) -> bool {
        if self.contains(a, b) {
            return false;
        }
        self.pairs.push((a, b));
        true
    }

    pub fn contains(&self, a: ActivityId, b: ActivityId) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn pairs(&self) -> &[(ActivityId, ActivityId)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Whether `b` reaches `a` through the stored pairs, i.e. whether adding
    /// `a -> b` would close a cycle.
    pub fn reaches(&self, from: ActivityId, to: ActivityId) -> bool {
        let mut stack = vec![from];
        let mut seen = HashSet::new();
        while let Some(x) = stack.pop() {
            if x == to {
                return true;
            }
            if seen.insert(x) {
                stack.extend(self.pairs.iter().filter(|p| p.0 == x).map(|p| p.1));
            }
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chaining {
    /// Random available chains.
    Basic,
    /// Prefer chains ending in a problem predecessor, then chains sharing the
    /// last activity of the first pick.
    Flexible,
    /// Deterministic first-fit with problem and order-graph preferences.
    Feedback,
}

impl std::str::FromStr for Chaining {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Chaining::Basic),
            "flexible" => Ok(Chaining::Flexible),
            "feedback" => Ok(Chaining::Feedback),
            other => Err(Error::Config(format!("unknown chaining `{other}`"))),
        }
    }
}

struct Chains<'a> {
    problem: &'a Problem,
    /// Per resource, per unit: (last activity, its nominal end).
    tail: Vec<Vec<(ActivityId, f64)>>,
    lists: Vec<Vec<Vec<ActivityId>>>,
}

impl<'a> Chains<'a> {
    fn new(problem: &'a Problem) -> Self {
        let caps = &problem.instance().capacities;
        Self {
            problem,
            tail: caps.iter().map(|&c| vec![(0, 0.0); c as usize]).collect(),
            lists: caps.iter().map(|&c| vec![Vec::new(); c as usize]).collect(),
        }
    }

    fn available(&self, k: usize, start: f64) -> Vec<usize> {
        (0..self.tail[k].len())
            .filter(|&u| self.tail[k][u].1 <= start + TIME_EPS)
            .collect()
    }

    fn last(&self, k: usize, u: usize) -> ActivityId {
        self.tail[k][u].0
    }

    fn assign(&mut self, k: usize, u: usize, a: ActivityId, end: f64) {
        self.tail[k][u] = (a, end);
        self.lists[k][u].push(a);
    }

    fn problem_pred(&self, last: ActivityId, a: ActivityId) -> bool {
        last != 0 && self.problem.precedes(last, a)
    }
}

/// Activities sorted by start; ties follow the precedence DAG, then id.
fn visit_order(problem: &Problem, schedule: &Schedule) -> Vec<ActivityId> {
    let mut order: Vec<ActivityId> = problem.instance().real_activities().collect();
    order.sort_by(|&a, &b| {
        schedule.starts[a]
            .total_cmp(&schedule.starts[b])
            .then(problem.topo_rank(a).cmp(&problem.topo_rank(b)))
            .then(a.cmp(&b))
    });
    order
}

fn run<F>(problem: &Problem, schedule: &Schedule, mut pick: F) -> Result<Pos>
where
    F: FnMut(&Chains, usize, ActivityId, Vec<usize>, usize) -> Vec<usize>,
{
    let inst = problem.instance();
    let mut chains = Chains::new(problem);
    for a in visit_order(problem, schedule) {
        let start = schedule.starts[a];
        let end = start + inst.activities[a].mean_duration;
        for (k, &r) in inst.activities[a].demands.iter().enumerate() {
            if r == 0 {
                continue;
            }
            let avail = chains.available(k, start);
            if avail.len() < r as usize {
                return Err(Error::Invalid(format!(
                    "no available chain for activity {a} on resource {k}; schedule is not resource feasible"
                )));
            }
            let chosen = pick(&chains, k, a, avail, r as usize);
            debug_assert_eq!(chosen.len(), r as usize);
            for u in chosen {
                chains.assign(k, u, a, end);
            }
        }
    }
    Ok(Pos::assemble(problem, chains.lists))
}

pub fn chain_basic<R: Rng + ?Sized>(problem: &Problem, schedule: &Schedule, rng: &mut R) -> Result<Pos> {
    run(problem, schedule, |_, _, _, mut avail, r| {
        avail.shuffle(rng);
        avail.truncate(r);
        avail
    })
}

pub fn chain_flexible<R: Rng + ?Sized>(problem: &Problem, schedule: &Schedule, rng: &mut R) -> Result<Pos> {
    run(problem, schedule, |chains, k, a, avail, r| {
        let (mut preferred, mut rest): (Vec<usize>, Vec<usize>) =
            avail.iter().partition(|&&u| chains.problem_pred(chains.last(k, u), a));
        let first = if preferred.is_empty() {
            rest.swap_remove(rng.random_range(0..rest.len()))
        } else {
            preferred.swap_remove(rng.random_range(0..preferred.len()))
        };
        let mut chosen = vec![first];
        if r == 1 {
            return chosen;
        }
        let head = chains.last(k, first);
        let mut groups: [Vec<usize>; 3] = Default::default();
        for u in preferred.into_iter().chain(rest) {
            let g = if chains.last(k, u) == head {
                0
            } else if chains.problem_pred(chains.last(k, u), a) {
                1
            } else {
                2
            };
            groups[g].push(u);
        }
        for mut g in groups {
            g.shuffle(rng);
            chosen.extend(g.into_iter().take(r - chosen.len()));
            if chosen.len() == r {
                break;
            }
        }
        chosen
    })
}

/// First-fit chaining in canonical unit order. The first chain is taken from
/// those ending in a problem predecessor, else in an activity ordered before
/// `a` by `order`, else any; further units prefer chains with the same last
/// activity as the first pick.
pub fn chain_feedback(problem: &Problem, schedule: &Schedule, order: &OrderGraph) -> Result<Pos> {
    run(problem, schedule, |chains, k, a, avail, r| {
        let first = avail
            .iter()
            .copied()
            .find(|&u| chains.problem_pred(chains.last(k, u), a))
            .or_else(|| {
                avail.iter().copied().find(|&u| {
                    let last = chains.last(k, u);
                    last != 0 && order.contains(last, a)
                })
            })
            .unwrap_or(avail[0]);
        let mut chosen = vec![first];
        let head = chains.last(k, first);
        let same: Vec<usize> = avail.iter().copied().filter(|&u| u != first && chains.last(k, u) == head).collect();
        let other: Vec<usize> = avail.iter().copied().filter(|&u| u != first && chains.last(k, u) != head).collect();
        chosen.extend(same.into_iter().chain(other).take(r - 1));
        chosen
    })
}

pub fn chain<R: Rng + ?Sized>(
    method: Chaining,
    problem: &Problem,
    schedule: &Schedule,
    order: &OrderGraph,
    rng: &mut R,
) -> Result<Pos> {
    match method {
        Chaining::Basic => chain_basic(problem, schedule, rng),
        Chaining::Flexible => chain_flexible(problem, schedule, rng),
        Chaining::Feedback => chain_feedback(problem, schedule, order),
    }
}
