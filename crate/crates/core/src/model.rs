//! Problem data: activities, resources, start-to-start time lags, schedules,
//! and the deterministic feasibility check used throughout the crate.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub type ActivityId = usize;

/// Absolute slack allowed when comparing real-valued times.
pub const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub id: ActivityId,
    /// Nominal (mean) duration.
    #[serde(rename = "d0")]
    pub mean_duration: f64,
    /// Standard deviation of the zero-mean duration perturbation.
    #[serde(default)]
    pub sigma: f64,
    /// Units required per resource type.
    pub demands: Vec<u32>,
}

impl Activity {
    pub fn dummy(id: ActivityId, resources: usize) -> Self {
        Self {
            id,
            mean_duration: 0.0,
            sigma: 0.0,
            demands: vec![0; resources],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LagKind {
    Min,
    Max,
}

/// `Min`: st(to) - st(from) >= lag. `Max`: st(to) - st(from) <= lag.
///
/// A `Min` constraint flagged `end_to_start` additionally counts the realized
/// duration of `from`: st(to) >= st(from) + d(from) + lag. This is how job
/// precedences are carried so that decision rules see the predecessor's
/// stochastic duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalConstraint {
    pub from: ActivityId,
    pub to: ActivityId,
    pub kind: LagKind,
    pub lag: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub end_to_start: bool,
}

impl TemporalConstraint {
    pub fn min(from: ActivityId, to: ActivityId, lag: f64) -> Self {
        Self {
            from,
            to,
            kind: LagKind::Min,
            lag,
            end_to_start: false,
        }
    }

    pub fn max(from: ActivityId, to: ActivityId, lag: f64) -> Self {
        Self {
            from,
            to,
            kind: LagKind::Max,
            lag,
            end_to_start: false,
        }
    }

    pub fn end_to_start(from: ActivityId, to: ActivityId, lag: f64) -> Self {
        Self {
            from,
            to,
            kind: LagKind::Min,
            lag,
            end_to_start: true,
        }
    }

    /// Start-to-start lag at the given duration of `from`.
    pub fn effective_lag(&self, from_duration: f64) -> f64 {
        if self.end_to_start {
            self.lag + from_duration
        } else {
            self.lag
        }
    }

    pub fn is_satisfied(&self, starts: &[f64], durations: &[f64]) -> bool {
        let gap = starts[self.to] - starts[self.from];
        match self.kind {
            LagKind::Min => gap + TIME_EPS >= self.effective_lag(durations[self.from]),
            LagKind::Max => gap <= self.lag + TIME_EPS,
        }
    }
}

/// An RCPSP/max instance. Activity 0 is the source and the last activity is
/// the sink; both are dummies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub activities: Vec<Activity>,
    pub capacities: Vec<u32>,
    pub constraints: Vec<TemporalConstraint>,
}

impl Instance {
    /// Activity count including both dummies.
    pub fn len(&self) -> usize {
        self.activities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activities.len() <= 2
    }

    /// Number of real (non-dummy) activities.
    pub fn real_count(&self) -> usize {
        self.activities.len().saturating_sub(2)
    }

    pub fn source(&self) -> ActivityId {
        0
    }

    pub fn sink(&self) -> ActivityId {
        self.activities.len() - 1
    }

    pub fn resource_count(&self) -> usize {
        self.capacities.len()
    }

    pub fn is_dummy(&self, id: ActivityId) -> bool {
        id == 0 || id == self.sink()
    }

    pub fn real_activities(&self) -> impl Iterator<Item = ActivityId> {
        1..self.activities.len().saturating_sub(1)
    }

    pub fn nominal_durations(&self) -> Vec<f64> {
        self.activities.iter().map(|a| a.mean_duration).collect()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.activities.iter().map(|a| a.sigma).collect()
    }

    pub fn has_max_lags(&self) -> bool {
        self.constraints.iter().any(|c| c.kind == LagKind::Max)
    }

    /// Assigns the same perturbation sigma to every real activity.
    pub fn set_uniform_sigma(&mut self, sigma: f64) {
        let sink = self.sink();
        for a in &mut self.activities {
            a.sigma = if a.id == 0 || a.id == sink { 0.0 } else { sigma };
        }
    }

    /// Assigns sigma = factor * d0 to every real activity.
    pub fn set_proportional_sigma(&mut self, factor: f64) {
        let sink = self.sink();
        for a in &mut self.activities {
            a.sigma = if a.id == 0 || a.id == sink {
                0.0
            } else {
                factor * a.mean_duration
            };
        }
    }

    /// Adds a lag-0 edge from the source to every real activity that no
    /// other activity reaches through a MIN constraint, and an end-to-start
    /// edge to the sink from every real activity without an outgoing MIN
    /// constraint. Returns the number of edges added.
    pub fn complete_dummy_arcs(&mut self) -> usize {
        let n = self.len();
        if n < 2 {
            return 0;
        }
        let sink = self.sink();
        let mut has_in = vec![false; n];
        let mut has_out = vec![false; n];
        for c in self.constraints.iter().filter(|c| c.kind == LagKind::Min) {
            if c.from < n && c.to < n && c.from != c.to {
                has_in[c.to] = true;
                has_out[c.from] = true;
            }
        }
        let mut added = 0;
        for id in 1..sink {
            if !has_in[id] {
                self.constraints.push(TemporalConstraint::min(0, id, 0.0));
                added += 1;
            }
            if !has_out[id] {
                self.constraints
                    .push(TemporalConstraint::end_to_start(id, sink, 0.0));
                added += 1;
            }
        }
        added
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    DuplicateId(ActivityId),
    IdOutOfOrder { position: usize, id: ActivityId },
    DummyDuration(ActivityId),
    DummySigma(ActivityId),
    DummyDemand(ActivityId),
    DemandArity { activity: ActivityId, expected: usize, found: usize },
    DemandExceedsCapacity { activity: ActivityId, resource: usize, demand: u32, capacity: u32 },
    NegativeDuration(ActivityId),
    NegativeSigma(ActivityId),
    ZeroCapacity(usize),
    SelfLoop(ActivityId),
    UnknownActivity { from: ActivityId, to: ActivityId },
    MaxEndToStart { from: ActivityId, to: ActivityId },
    TooFewActivities,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::DuplicateId(id) => write!(f, "duplicate activity id {id}"),
            Violation::IdOutOfOrder { position, id } => {
                write!(f, "activity at position {position} has id {id}; ids must be contiguous")
            }
            Violation::DummyDuration(id) => write!(f, "dummy duration must be 0 (activity {id})"),
            Violation::DummySigma(id) => write!(f, "dummy sigma must be 0 (activity {id})"),
            Violation::DummyDemand(id) => write!(f, "dummy demands must be 0 (activity {id})"),
            Violation::DemandArity { activity, expected, found } => write!(
                f,
                "activity {activity} lists {found} demands, expected {expected}"
            ),
            Violation::DemandExceedsCapacity { activity, resource, demand, capacity } => write!(
                f,
                "demand exceeds capacity: activity {activity} needs {demand} of resource {resource} (capacity {capacity})"
            ),
            Violation::NegativeDuration(id) => write!(f, "negative duration on activity {id}"),
            Violation::NegativeSigma(id) => write!(f, "negative sigma on activity {id}"),
            Violation::ZeroCapacity(k) => write!(f, "resource {k} has zero capacity"),
            Violation::SelfLoop(id) => write!(f, "self-loop constraint on activity {id}"),
            Violation::UnknownActivity { from, to } => {
                write!(f, "constraint {from}->{to} references an unknown activity")
            }
            Violation::MaxEndToStart { from, to } => {
                write!(f, "constraint {from}->{to}: end-to-start anchoring is only supported on MIN lags")
            }
            Violation::TooFewActivities => write!(f, "instance needs a source and a sink"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.ok() {
            return write!(f, "ok");
        }
        let msgs: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

pub fn validate_instance(instance: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    let n = instance.len();
    if n < 2 {
        violations.push(Violation::TooFewActivities);
        return ValidationReport { violations };
    }
    let k = instance.resource_count();
    let sink = instance.sink();

    let mut seen = HashSet::new();
    for (pos, a) in instance.activities.iter().enumerate() {
        if !seen.insert(a.id) {
            violations.push(Violation::DuplicateId(a.id));
        } else if a.id != pos {
            violations.push(Violation::IdOutOfOrder { position: pos, id: a.id });
        }
    }

    for (cap_idx, &cap) in instance.capacities.iter().enumerate() {
        if cap == 0 {
            violations.push(Violation::ZeroCapacity(cap_idx));
        }
    }

    for (pos, a) in instance.activities.iter().enumerate() {
        let dummy = pos == 0 || pos == sink;
        if a.demands.len() != k {
            violations.push(Violation::DemandArity {
                activity: a.id,
                expected: k,
                found: a.demands.len(),
            });
        }
        if dummy {
            if a.mean_duration != 0.0 {
                violations.push(Violation::DummyDuration(a.id));
            }
            if a.sigma != 0.0 {
                violations.push(Violation::DummySigma(a.id));
            }
            if a.demands.iter().any(|&d| d != 0) {
                violations.push(Violation::DummyDemand(a.id));
            }
            continue;
        }
        if !(a.mean_duration >= 0.0) {
            violations.push(Violation::NegativeDuration(a.id));
        }
        if !(a.sigma >= 0.0) {
            violations.push(Violation::NegativeSigma(a.id));
        }
        for (res, (&demand, &capacity)) in a.demands.iter().zip(&instance.capacities).enumerate() {
            if demand > capacity {
                violations.push(Violation::DemandExceedsCapacity {
                    activity: a.id,
                    resource: res,
                    demand,
                    capacity,
                });
            }
        }
    }

    for c in &instance.constraints {
        if c.from >= n || c.to >= n {
            violations.push(Violation::UnknownActivity { from: c.from, to: c.to });
        } else if c.from == c.to {
            violations.push(Violation::SelfLoop(c.from));
        }
        if c.kind == LagKind::Max && c.end_to_start {
            violations.push(Violation::MaxEndToStart { from: c.from, to: c.to });
        }
    }

    ValidationReport { violations }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub starts: Vec<f64>,
}

impl Schedule {
    pub fn new(starts: Vec<f64>) -> Self {
        Self { starts }
    }

    pub fn start(&self, id: ActivityId) -> f64 {
        self.starts[id]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceViolation {
    pub resource: usize,
    pub from: f64,
    pub to: f64,
    pub load: u32,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub temporal: Vec<TemporalConstraint>,
    pub resource: Vec<ResourceViolation>,
    pub makespan: f64,
}

impl FeasibilityReport {
    pub fn ok(&self) -> bool {
        self.temporal.is_empty() && self.resource.is_empty()
    }
}

/// Checks every MIN/MAX lag and every resource profile of `schedule` under the
/// given durations. Activity intervals are half-open `[start, start + d)`.
pub fn check_schedule(instance: &Instance, schedule: &Schedule, durations: &[f64]) -> FeasibilityReport {
    let starts = &schedule.starts;
    let temporal = instance
        .constraints
        .iter()
        .filter(|c| !c.is_satisfied(starts, durations))
        .copied()
        .collect();

    let mut resource = Vec::new();
    for (k, &capacity) in instance.capacities.iter().enumerate() {
        resource.extend(resource_overloads(instance, starts, durations, k, capacity));
    }

    let makespan = instance
        .real_activities()
        .map(|i| starts[i] + durations[i])
        .fold(0.0, f64::max);

    FeasibilityReport {
        temporal,
        resource,
        makespan,
    }
}

fn resource_overloads(
    instance: &Instance,
    starts: &[f64],
    durations: &[f64],
    k: usize,
    capacity: u32,
) -> Vec<ResourceViolation> {
    // (time, delta); ends sort before starts at equal times.
    let mut events: Vec<(f64, i64)> = Vec::new();
    for i in instance.real_activities() {
        let demand = instance.activities[i].demands.get(k).copied().unwrap_or(0);
        if demand == 0 || durations[i] <= TIME_EPS {
            continue;
        }
        events.push((starts[i], demand as i64));
        events.push((starts[i] + durations[i] - TIME_EPS, -(demand as i64)));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut out: Vec<ResourceViolation> = Vec::new();
    let mut load: i64 = 0;
    let mut idx = 0;
    while idx < events.len() {
        let t = events[idx].0;
        while idx < events.len() && events[idx].0 == t {
            load += events[idx].1;
            idx += 1;
        }
        let next = events.get(idx).map(|e| e.0);
        if load > capacity as i64 {
            if let Some(t1) = next {
                match out.last_mut() {
                    Some(last) if (last.to - t).abs() <= TIME_EPS => {
                        last.to = t1;
                        last.load = last.load.max(load as u32);
                    }
                    _ => out.push(ResourceViolation {
                        resource: k,
                        from: t,
                        to: t1,
                        load: load as u32,
                        capacity,
                    }),
                }
            }
        }
    }
    // Undo the end-time nudge so reported intervals read naturally.
    for v in &mut out {
        v.to = (v.to + TIME_EPS).max(v.from);
    }
    out
}


#[cfg(test)]
pub(crate) use tests::two_activity;
