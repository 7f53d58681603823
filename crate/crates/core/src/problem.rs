//! A validated instance bundled with everything the search needs repeatedly:
//! the closed distance graph, the list-precedence DAG and its reachability.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::model::{validate_instance, ActivityId, Instance, LagKind, TemporalConstraint, TIME_EPS};
use crate::temporal::{default_horizon, DistanceGraph, Time};

#[derive(Debug, Clone)]
pub struct Problem {
    instance: Instance,
    horizon: Time,
    graph: DistanceGraph,
    /// Direct precedence among real activities that activity lists must
    /// respect: nonnegative MIN lags plus any extra orders.
    list_succ: Vec<Vec<ActivityId>>,
    list_pred: Vec<Vec<ActivityId>>,
    /// `reach[a * n + b]`: a nonnegative MIN-lag path leads from `a` to `b`.
    reach: Vec<bool>,
    topo_rank: Vec<usize>,
    orders: Vec<(ActivityId, ActivityId)>,
}

impl Problem {
    pub fn new(instance: Instance) -> Result<Self> {
        Self::with_horizon(instance, None)
    }

    /// Validates, completes the source/sink arcs and closes the distance
    /// graph. `horizon` defaults to [`default_horizon`].
    pub fn with_horizon(mut instance: Instance, horizon: Option<Time>) -> Result<Self> {
        let report = validate_instance(&instance);
        if !report.ok() {
            return Err(Error::Invalid(report.to_string()));
        }
        instance.complete_dummy_arcs();
        let horizon = horizon.unwrap_or_else(|| default_horizon(&instance));
        let graph = DistanceGraph::build_and_close(&instance, horizon)?;
        Self::assemble(instance, horizon, graph, Vec::new())
    }

    fn assemble(
        instance: Instance,
        horizon: Time,
        graph: DistanceGraph,
        orders: Vec<(ActivityId, ActivityId)>,
    ) -> Result<Self> {
        let n = instance.len();
        let mut succ: Vec<Vec<ActivityId>> = vec![Vec::new(); n];
        for c in &instance.constraints {
            if c.kind == LagKind::Min && c.effective_lag(instance.activities[c.from].mean_duration) >= -TIME_EPS {
                succ[c.from].push(c.to);
            }
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        let order = topological(&succ).map_err(Error::CyclicPrecedence)?;
        let mut topo_rank = vec![0; n];
        for (rank, &v) in order.iter().enumerate() {
            topo_rank[v] = rank;
        }

        let mut reach = vec![false; n * n];
        for &v in order.iter().rev() {
            for &w in &succ[v] {
                reach[v * n + w] = true;
                for x in 0..n {
                    if reach[w * n + x] {
                        reach[v * n + x] = true;
                    }
                }
            }
        }

        let sink = n - 1;
        let is_real = |v: usize| v != 0 && v != sink;
        let mut list_succ: Vec<Vec<ActivityId>> = vec![Vec::new(); n];
        for (v, s) in succ.iter().enumerate() {
            if is_real(v) {
                list_succ[v].extend(s.iter().copied().filter(|&w| is_real(w)));
            }
        }
        for &(a, b) in &orders {
            list_succ[a].push(b);
        }
        for s in &mut list_succ {
            s.sort_unstable();
            s.dedup();
        }
        topological(&list_succ).map_err(Error::CyclicPrecedence)?;
        let mut list_pred: Vec<Vec<ActivityId>> = vec![Vec::new(); n];
        for (v, s) in list_succ.iter().enumerate() {
            for &w in s {
                list_pred[w].push(v);
            }
        }

        Ok(Self {
            instance,
            horizon,
            graph,
            list_succ,
            list_pred,
            reach,
            topo_rank,
            orders,
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn graph(&self) -> &DistanceGraph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.instance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instance.is_empty()
    }

    /// Whether a path of nonnegative MIN lags leads from `a` to `b`.
    pub fn precedes(&self, a: ActivityId, b: ActivityId) -> bool {
        self.reach[a * self.len() + b]
    }

    pub fn related(&self, a: ActivityId, b: ActivityId) -> bool {
        self.precedes(a, b) || self.precedes(b, a)
    }

    pub fn list_successors(&self, a: ActivityId) -> &[ActivityId] {
        &self.list_succ[a]
    }

    pub fn list_predecessors(&self, a: ActivityId) -> &[ActivityId] {
        &self.list_pred[a]
    }

    /// Position in a fixed topological order of the precedence DAG.
    pub fn topo_rank(&self, a: ActivityId) -> usize {
        self.topo_rank[a]
    }

    /// Extra orders imposed on activity lists only.
    pub fn orders(&self) -> &[(ActivityId, ActivityId)] {
        &self.orders
    }

    /// Same problem with extra `a before b` orders that activity lists must
    /// respect. Schedules are not constrained by them.
    pub fn with_list_orders(&self, pairs: &[(ActivityId, ActivityId)]) -> Result<Self> {
        let mut orders = self.orders.clone();
        orders.extend_from_slice(pairs);
        Self::assemble(self.instance.clone(), self.horizon, self.graph.clone(), orders)
    }

    /// Same problem with each `a before b` posted as a hard end-to-start
    /// constraint.
    pub fn with_hard_orders(&self, pairs: &[(ActivityId, ActivityId)]) -> Result<Self> {
        let mut instance = self.instance.clone();
        let mut graph = self.graph.clone();
        for &(a, b) in pairs {
            let c = TemporalConstraint::end_to_start(a, b, 0.0);
            let lag = c.effective_lag(instance.activities[a].mean_duration);
            graph.add_edge(b, a, -(lag - 1e-9).ceil() as Time)?;
            instance.constraints.push(c);
        }
        Self::assemble(instance, self.horizon, graph, self.orders.clone())
    }

    pub fn is_valid_list(&self, order: &[ActivityId]) -> bool {
        let n = self.len();
        let mut pos = vec![usize::MAX; n];
        for (i, &a) in order.iter().enumerate() {
            if a >= n || pos[a] != usize::MAX {
                return false;
            }
            pos[a] = i;
        }
        if order.len() != self.instance.real_count() {
            return false;
        }
        order
            .iter()
            .all(|&a| self.list_succ[a].iter().all(|&b| pos[a] < pos[b]))
    }
}

/// Kahn's algorithm, smallest id first. On a cycle returns the nodes left
/// unprocessed.
pub(crate) fn topological(succ: &[Vec<usize>]) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for s in succ {
        for &w in s {
            indeg[w] += 1;
        }
    }
    let mut heap: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = heap.pop() {
        order.push(v);
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                heap.push(Reverse(w));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&v| indeg[v] > 0).collect())
    }
}
