//! Distance graphs over integer start times.
//!
//! `weight(i, j)` bounds st(j) - st(i) from above. A MIN lag `i -> j` of `T`
//! becomes `weight(j, i) = -ceil(T)`, a MAX lag becomes `weight(i, j) =
//! floor(T)`, and horizon edges keep every start inside `[0, H]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActivityId, Instance, LagKind};

pub type Time = i64;

/// Sentinel for "no bound". Finite weights stay far below it, and additions
/// involving it saturate.
pub const INF: Time = i64::MAX / 4;

#[inline]
fn add(a: Time, b: Time) -> Time {
    if a >= INF || b >= INF {
        INF
    } else {
        a + b
    }
}

/// Default planning horizon: every nominal duration plus every positive
/// minimum lag, rounded up.
pub fn default_horizon(instance: &Instance) -> Time {
    let durations: f64 = instance.activities.iter().map(|a| a.mean_duration.max(0.0).ceil()).sum();
    let lags: f64 = instance
        .constraints
        .iter()
        .filter(|c| c.kind == LagKind::Min)
        .map(|c| c.lag.ceil().max(0.0))
        .sum();
    (durations + lags) as Time
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceGraph {
    n: usize,
    weight: Vec<Time>,
    horizon: Time,
}

impl DistanceGraph {
    /// Unclosed graph holding the instance's constraints and horizon edges.
    pub fn from_instance(instance: &Instance, horizon: Time) -> Self {
        let n = instance.len();
        let mut g = DistanceGraph {
            n,
            weight: vec![INF; n * n],
            horizon,
        };
        for i in 0..n {
            g.tighten(i, i, 0);
            if i != 0 {
                g.tighten(0, i, horizon);
                g.tighten(i, 0, 0);
            }
        }
        for c in &instance.constraints {
            match c.kind {
                LagKind::Min => {
                    let lag = c.effective_lag(instance.activities[c.from].mean_duration);
                    g.tighten(c.to, c.from, -(lag - 1e-9).ceil() as Time);
                }
                LagKind::Max => g.tighten(c.from, c.to, (c.lag + 1e-9).floor() as Time),
            }
        }
        g
    }

    fn tighten(&mut self, i: usize, j: usize, w: Time) {
        let cell = &mut self.weight[i * self.n + j];
        if w < *cell {
            *cell = w;
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> Time {
        self.weight[i * self.n + j]
    }

    /// Floyd-Warshall closure. Stops at the first negative cycle and returns
    /// it as a witness, rotated to start at its smallest node.
    pub fn close(mut self) -> Result<Self> {
        let n = self.n;
        let mut next: Vec<usize> = (0..n * n)
            .map(|idx| if self.weight[idx] < INF { idx % n } else { usize::MAX })
            .collect();
        for k in 0..n {
            for i in 0..n {
                let dik = self.weight[i * n + k];
                if dik >= INF {
                    continue;
                }
                for j in 0..n {
                    let cand = add(dik, self.weight[k * n + j]);
                    if cand < self.weight[i * n + j] {
                        self.weight[i * n + j] = cand;
                        next[i * n + j] = next[i * n + k];
                    }
                }
            }
            if let Some(v) = (0..n).find(|&v| self.weight[v * n + v] < 0) {
                return Err(Error::TemporalInfeasible {
                    cycle: witness_cycle(&next, n, v),
                });
            }
        }
        Ok(self)
    }

    pub fn build_and_close(instance: &Instance, horizon: Time) -> Result<Self> {
        Self::from_instance(instance, horizon).close()
    }

    pub fn windows(&self) -> StartWindows {
        StartWindows {
            bounds: (0..self.n).map(|i| (-self.weight(i, 0), self.weight(0, i))).collect(),
        }
    }

    /// Pins `activity` to `t` and restores closure with two single-edge
    /// relaxations.
    pub fn fix_start(&self, activity: ActivityId, t: Time) -> Result<Self> {
        let mut g = self.clone();
        g.add_edge(0, activity, t)?;
        g.add_edge(activity, 0, -t)?;
        Ok(g)
    }

    /// Oracle for [`fix_start`](Self::fix_start): add both edges and rerun
    /// the full closure.
    pub fn fix_start_full(&self, activity: ActivityId, t: Time) -> Result<Self> {
        let mut g = self.clone();
        g.tighten(0, activity, t);
        g.tighten(activity, 0, -t);
        g.close()
    }

    /// Adds `st(v) - st(u) <= w` to a closed graph and restores closure in
    /// `O(n^2)`.
    pub fn add_edge(&mut self, u: usize, v: usize, w: Time) -> Result<()> {
        let n = self.n;
        if add(self.weight(v, u), w) < 0 {
            return Err(Error::TemporalInfeasible {
                cycle: rotate_min(vec![u, v, u]),
            });
        }
        if w >= self.weight(u, v) {
            return Ok(());
        }
        let col_u: Vec<Time> = (0..n).map(|i| self.weight(i, u)).collect();
        let row_v: Vec<Time> = (0..n).map(|j| self.weight(v, j)).collect();
        for (i, &diu) in col_u.iter().enumerate() {
            if diu >= INF {
                continue;
            }
            let base = add(diu, w);
            for (j, &dvj) in row_v.iter().enumerate() {
                let cand = add(base, dvj);
                let cell = &mut self.weight[i * n + j];
                if cand < *cell {
                    *cell = cand;
                }
            }
        }
        Ok(())
    }
}

fn rotate_min(mut cycle: Vec<usize>) -> Vec<usize> {
    cycle.pop();
    if let Some(pos) = cycle.iter().enumerate().min_by_key(|(_, &v)| v).map(|(p, _)| p) {
        cycle.rotate_left(pos);
    }
    if let Some(&first) = cycle.first() {
        cycle.push(first);
    }
    cycle
}

fn witness_cycle(next: &[usize], n: usize, start: usize) -> Vec<usize> {
    let mut walk = vec![start];
    let mut cur = start;
    for _ in 0..=n {
        let nx = next[cur * n + start];
        if nx == usize::MAX {
            break;
        }
        cur = nx;
        if let Some(pos) = walk.iter().position(|&v| v == cur) {
            let mut cycle = walk[pos..].to_vec();
            cycle.push(cur);
            return rotate_min(cycle);
        }
        walk.push(cur);
    }
    rotate_min(vec![start, start])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StartWindows {
    /// `(est, lst)` per activity.
    pub bounds: Vec<(Time, Time)>,
}

impl StartWindows {
    pub fn est(&self, id: ActivityId) -> Time {
        self.bounds[id].0
    }

    pub fn lst(&self, id: ActivityId) -> Time {
        self.bounds[id].1
    }

    pub fn is_consistent(&self) -> bool {
        self.bounds.iter().all(|(e, l)| e <= l)
    }
}

/// Tracks start windows while activities are pinned one after another.
///
/// Every pin adds edges incident to the source, so the current distance from
/// `i` to `j` is `min(base(i, j), to_source[i] + from_source[j])` and a pin
/// costs `O(n)` instead of the `O(n^2)` of [`DistanceGraph::fix_start`].
#[derive(Debug, Clone)]
pub struct WindowTracker<'g> {
    base: &'g DistanceGraph,
    from_source: Vec<Time>,
    to_source: Vec<Time>,
}

impl<'g> WindowTracker<'g> {
    pub fn new(base: &'g DistanceGraph) -> Self {
        let n = base.len();
        Self {
            base,
            from_source: (0..n).map(|j| base.weight(0, j)).collect(),
            to_source: (0..n).map(|i| base.weight(i, 0)).collect(),
        }
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> Time {
        self.base.weight(i, j).min(add(self.to_source[i], self.from_source[j]))
    }

    pub fn window(&self, id: ActivityId) -> (Time, Time) {
        (-self.to_source[id], self.from_source[id])
    }

    /// Returns `false` (and leaves the state untouched) if `t` lies outside
    /// the current window.
    pub fn fix(&mut self, id: ActivityId, t: Time) -> bool {
        let (est, lst) = self.window(id);
        if t < est || t > lst {
            return false;
        }
        let n = self.base.len();
        let out: Vec<Time> = (0..n).map(|j| add(t, self.dist(id, j))).collect();
        let inc: Vec<Time> = (0..n).map(|i| add(self.dist(i, id), -t)).collect();
        for j in 0..n {
            self.from_source[j] = self.from_source[j].min(out[j]);
            self.to_source[j] = self.to_source[j].min(inc[j]);
        }
        true
    }

    pub fn windows(&self) -> StartWindows {
        StartWindows {
            bounds: (0..self.base.len()).map(|i| self.window(i)).collect(),
        }
    }
}
