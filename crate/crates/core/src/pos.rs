//! Partial order schedules.
//!
//! Every edge `u -> v` reads `st(v) >= st(u) + lag (+ d(u) if duration
//! bearing)`. Executing a POS means taking the earliest start of every
//! activity under realized durations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActivityId, LagKind, Schedule, TIME_EPS};
use crate::problem::{topological, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Precedence,
    Chain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosEdge {
    pub from: ActivityId,
    pub to: ActivityId,
    pub kind: EdgeKind,
    pub lag: f64,
    pub duration_bearing: bool,
}

impl PosEdge {
    pub fn offset(&self, durations: &[f64]) -> f64 {
        if self.duration_bearing {
            self.lag + durations[self.from]
        } else {
            self.lag
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pos {
    pub activity_count: usize,
    pub edges: Vec<PosEdge>,
    /// `chains[k][u]`: activities assigned to unit `u` of resource `k`, in
    /// execution order.
    pub chains: Vec<Vec<Vec<ActivityId>>>,
}

impl Pos {
    /// Builds the edge set from the problem's nonnegative MIN lags and the
    /// given chains. Real activities whose end no edge accounts for get a
    /// duration-bearing edge to the sink so the makespan covers them.
    pub fn assemble(problem: &Problem, chains: Vec<Vec<Vec<ActivityId>>>) -> Self {
        let inst = problem.instance();
        let n = inst.len();
        let sink = inst.sink();
        let mut edges: Vec<PosEdge> = Vec::new();
        let push = |edges: &mut Vec<PosEdge>, e: PosEdge| {
            let dup = edges.iter().any(|x| {
                x.from == e.from && x.to == e.to && x.duration_bearing == e.duration_bearing && x.lag == e.lag
            });
            if !dup {
                edges.push(e);
            }
        };
        for c in &inst.constraints {
            if c.kind == LagKind::Min && c.effective_lag(inst.activities[c.from].mean_duration) >= -TIME_EPS {
                push(
                    &mut edges,
                    PosEdge {
                        from: c.from,
                        to: c.to,
                        kind: EdgeKind::Precedence,
                        lag: c.lag,
                        duration_bearing: c.end_to_start,
                    },
                );
            }
        }
        for per_resource in &chains {
            for chain in per_resource {
                for w in chain.windows(2) {
                    push(
                        &mut edges,
                        PosEdge {
                            from: w[0],
                            to: w[1],
                            kind: EdgeKind::Chain,
                            lag: 0.0,
                            duration_bearing: true,
                        },
                    );
                }
            }
        }
        let mut covered = vec![false; n];
        for e in &edges {
            if e.duration_bearing {
                covered[e.from] = true;
            }
        }
        for a in inst.real_activities() {
            if !covered[a] {
                push(
                    &mut edges,
                    PosEdge {
                        from: a,
                        to: sink,
                        kind: EdgeKind::Precedence,
                        lag: 0.0,
                        duration_bearing: true,
                    },
                );
            }
        }
        Self {
            activity_count: n,
            edges,
            chains,
        }
    }

    pub fn sink(&self) -> ActivityId {
        self.activity_count - 1
    }

    pub fn successors(&self) -> Vec<Vec<ActivityId>> {
        let mut succ = vec![Vec::new(); self.activity_count];
        for e in &self.edges {
            succ[e.from].push(e.to);
        }
        succ
    }

    pub fn topological_order(&self) -> Result<Vec<ActivityId>> {
        if self.edges.iter().any(|e| e.from >= self.activity_count || e.to >= self.activity_count) {
            return Err(Error::Invalid("POS edge references an unknown activity".into()));
        }
        topological(&self.successors()).map_err(|_| Error::CyclicPos)
    }

    pub fn compile(&self) -> Result<CompiledPos> {
        CompiledPos::new(self)
    }

    /// Longest-path start times under the given durations.
    pub fn earliest_start(&self, durations: &[f64]) -> Result<Schedule> {
        Ok(self.compile()?.earliest_start(durations))
    }

    /// Whether every edge holds in `schedule` under `durations`.
    pub fn is_consistent_with(&self, schedule: &Schedule, durations: &[f64]) -> bool {
        self.edges
            .iter()
            .all(|e| schedule.starts[e.to] + TIME_EPS >= schedule.starts[e.from] + e.offset(durations))
    }

    /// Number of chains of resource `k` that contain `id`.
    pub fn chain_count(&self, k: usize, id: ActivityId) -> usize {
        self.chains
            .get(k)
            .map(|units| units.iter().filter(|c| c.contains(&id)).count())
            .unwrap_or(0)
    }
}

/// A POS with its topological order, incoming edges, and the subset of
/// incoming edges that can ever determine a start time.
#[derive(Debug, Clone)]
pub struct CompiledPos {
    pub edges: Vec<PosEdge>,
    pub order: Vec<ActivityId>,
    pub incoming: Vec<Vec<usize>>,
    /// Incoming edges not implied by another incoming edge of the same node
    /// for every choice of nonnegative durations.
    pub essential: Vec<Vec<usize>>,
}

impl CompiledPos {
    pub fn new(pos: &Pos) -> Result<Self> {
        let n = pos.activity_count;
        let order = pos.topological_order()?;
        let mut incoming = vec![Vec::new(); n];
        for (idx, e) in pos.edges.iter().enumerate() {
            incoming[e.to].push(idx);
        }
        let essential = prune(&pos.edges, &order, &incoming, n);
        Ok(Self {
            edges: pos.edges.clone(),
            order,
            incoming,
            essential,
        })
    }

    pub fn len(&self) -> usize {
        self.incoming.len()
    }

    pub fn is_empty(&self) -> bool {
        self.incoming.is_empty()
    }

    pub fn sink(&self) -> ActivityId {
        self.incoming.len() - 1
    }

    pub fn earliest_start(&self, durations: &[f64]) -> Schedule {
        let mut st = vec![0.0f64; self.len()];
        for &v in &self.order {
            let mut t: f64 = 0.0;
            for &idx in &self.incoming[v] {
                let e = &self.edges[idx];
                t = t.max(st[e.from] + e.offset(durations));
            }
            st[v] = t;
        }
        Schedule::new(st)
    }

    /// A schedule consistent with every edge: activities are taken in a
    /// uniformly chosen linear extension, each started at its earliest time
    /// (never before the previously started one) plus a random integer delay
    /// in `0..=max_delay`.
    pub fn sample_consistent_schedule<R: Rng + ?Sized>(
        &self,
        durations: &[f64],
        rng: &mut R,
        max_delay: u32,
    ) -> Schedule {
        let n = self.len();
        let mut missing: Vec<usize> = self.incoming.iter().map(Vec::len).collect();
        let mut succ = vec![Vec::new(); n];
        for e in &self.edges {
            succ[e.from].push(e.to);
        }
        let mut available: Vec<usize> = (0..n).filter(|&v| missing[v] == 0).collect();
        let mut st = vec![0.0f64; n];
        let mut last = 0.0f64;
        while !available.is_empty() {
            let v = available.swap_remove(rng.random_range(0..available.len()));
            let mut t = last;
            for &idx in &self.incoming[v] {
                let e = &self.edges[idx];
                t = t.max(st[e.from] + e.offset(durations));
            }
            if v != 0 {
                t += rng.random_range(0..=max_delay) as f64;
            }
            st[v] = t;
            last = t;
            for &w in &succ[v] {
                missing[w] -= 1;
                if missing[w] == 0 {
                    available.push(w);
                }
            }
        }
        Schedule::new(st)
    }
}

fn prune(edges: &[PosEdge], order: &[ActivityId], incoming: &[Vec<usize>], n: usize) -> Vec<Vec<usize>> {
    const NONE: f64 = f64::NEG_INFINITY;
    // Point 2x is the start of x, 2x + 1 its end.
    let anchor = |e: &PosEdge| 2 * e.from + usize::from(e.duration_bearing);

    let needed: Vec<bool> = {
        let mut needed = vec![false; 2 * n];
        for inc in incoming.iter().filter(|inc| inc.len() > 1) {
            for &idx in inc {
                needed[anchor(&edges[idx])] = true;
            }
        }
        needed
    };

    // Longest guaranteed offset from each needed point to every point,
    // counting every duration as zero.
    let mut offsets: Vec<Option<Vec<f64>>> = vec![None; 2 * n];
    for p in (0..2 * n).filter(|&p| needed[p]) {
        let mut dist = vec![NONE; 2 * n];
        dist[p] = 0.0;
        for &v in order {
            let s = 2 * v;
            for &idx in &incoming[v] {
                let e = &edges[idx];
                let from = dist[anchor(e)];
                if from > NONE {
                    dist[s] = dist[s].max(from + e.lag);
                }
            }
            dist[s + 1] = dist[s + 1].max(dist[s]);
        }
        offsets[p] = Some(dist);
    }

    incoming
        .iter()
        .map(|inc| {
            if inc.len() < 2 {
                return inc.clone();
            }
            let mut keep: Vec<usize> = inc.clone();
            for &idx in inc {
                let e = &edges[idx];
                let off = offsets[anchor(e)].as_ref().expect("computed above");
                let dominated = keep.iter().any(|&other| {
                    other != idx && {
                        let f = &edges[other];
                        let o = off[anchor(f)];
                        o > NONE && o + f.lag >= e.lag - TIME_EPS
                    }
                });
                if dominated {
                    keep.retain(|&x| x != idx);
                }
            }
            keep
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::two_activity;

    fn serial() -> (Problem, Pos) {
        let p = Problem::new(two_activity(1)).unwrap();
        let pos = Pos::assemble(&p, vec![vec![vec![1, 2]]]);
        (p, pos)
    }

    fn parallel() -> (Problem, Pos) {
        let p = Problem::new(two_activity(2)).unwrap();
        let pos = Pos::assemble(&p, vec![vec![vec![1], vec![2]]]);
        (p, pos)
    }

    #[test]
    fn serial_chain_propagates_durations() {
        let (_, pos) = serial();
        let s = pos.earliest_start(&[0.0, 3.0, 2.0, 0.0]).unwrap();
        assert_eq!(s.starts, vec![0.0, 0.0, 3.0, 5.0]);
        let s = pos.earliest_start(&[0.0, 4.0, 2.0, 0.0]).unwrap();
        assert_eq!(s.start(2), 4.0);
        assert_eq!(s.start(3), 6.0);
    }

    #[test]
    fn parallel_makespan_is_the_max() {
        let (_, pos) = parallel();
        let s = pos.earliest_start(&[0.0, 3.0, 2.0, 0.0]).unwrap();
        assert_eq!(s.start(3), 3.0);
        assert!(pos.edges.iter().all(|e| e.kind != EdgeKind::Chain));
    }

    #[test]
    fn serial_chain_keeps_one_contribution_per_node() {
        let (_, pos) = serial();
        let c = pos.compile().unwrap();
        // a2 only depends on the end of a1; the sink only on the end of a2.
        assert_eq!(c.essential[2].len(), 1);
        assert_eq!(c.edges[c.essential[2][0]].from, 1);
        assert_eq!(c.essential[3].len(), 1);
        assert_eq!(c.edges[c.essential[3][0]].from, 2);
    }

    #[test]
    fn parallel_sink_keeps_both_contributions() {
        let (_, pos) = parallel();
        let c = pos.compile().unwrap();
        assert_eq!(c.essential[3].len(), 2);
    }

    #[test]
    fn cycles_are_rejected() {
        let (_, mut pos) = serial();
        pos.edges.push(PosEdge { from: 2, to: 1, kind: EdgeKind::Chain, lag: 0.0, duration_bearing: true });
        assert_eq!(pos.compile().unwrap_err(), Error::CyclicPos);
    }

    #[test]
    fn pruned_edges_never_bind() {
        use rand::SeedableRng;
        let (_, pos) = serial();
        let c = pos.compile().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let d: Vec<f64> = vec![0.0, rng.random_range(0.0..5.0), rng.random_range(0.0..5.0), 0.0];
            let st = c.earliest_start(&d).starts;
            for v in 0..c.len() {
                let via_essential = c.essential[v]
                    .iter()
                    .map(|&i| st[c.edges[i].from] + c.edges[i].offset(&d))
                    .fold(0.0, f64::max);
                assert!((via_essential - st[v]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampled_schedules_respect_every_edge() {
        use rand::SeedableRng;
        let (_, pos) = serial();
        let c = pos.compile().unwrap();
        let d = [0.0, 3.0, 2.0, 0.0];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let s = c.sample_consistent_schedule(&d, &mut rng, 3);
            assert!(pos.is_consistent_with(&s, &d));
        }
    }
}
