//! Seeded random RCPSP instances for tests, benchmarks and the CLI.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Activity, Instance, TemporalConstraint};
use crate::rng::{derive_seed, seeded};
use crate::temporal::{default_horizon, DistanceGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Real activities, excluding the two dummies.
    pub activities: usize,
    pub resources: usize,
    pub max_capacity: u32,
    /// Durations are uniform integers in `1..=max_duration`.
    pub max_duration: u32,
    /// Chance that an activity needs a given resource. Every activity needs
    /// at least one.
    pub demand_probability: f64,
    /// Chance of an end-to-start precedence between two activities, taken
    /// from lower to higher id.
    pub precedence_density: f64,
    /// Chance that a precedence also gets a MAX lag of the longest path
    /// between its ends plus a random slack.
    pub max_lag_probability: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            activities: 10,
            resources: 2,
            max_capacity: 3,
            max_duration: 10,
            demand_probability: 0.6,
            precedence_density: 0.2,
            max_lag_probability: 0.0,
        }
    }
}

pub fn generate_instance<R: Rng + ?Sized>(config: &GeneratorConfig, rng: &mut R) -> Instance {
    let n = config.activities;
    let k = config.resources.max(1);
    let capacities: Vec<u32> = (0..k).map(|_| rng.random_range(1..=config.max_capacity.max(1))).collect();

    let mut activities = vec![Activity::dummy(0, k)];
    for id in 1..=n {
        let mut demands: Vec<u32> = capacities
            .iter()
            .map(|&c| if rng.random_bool(config.demand_probability) { rng.random_range(1..=c) } else { 0 })
            .collect();
        if demands.iter().all(|&d| d == 0) {
            let r = rng.random_range(0..k);
            demands[r] = rng.random_range(1..=capacities[r]);
        }
        activities.push(Activity {
            id,
            mean_duration: rng.random_range(1..=config.max_duration.max(1)) as f64,
            sigma: 0.0,
            demands,
        });
    }
    activities.push(Activity::dummy(n + 1, k));

    let mut constraints = Vec::new();
    let mut max_candidates = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            if rng.random_bool(config.precedence_density) {
                constraints.push(TemporalConstraint::end_to_start(a, b, 0.0));
                if rng.random_bool(config.max_lag_probability) {
                    max_candidates.push((a, b, rng.random_range(0..=config.max_duration) as f64));
                }
            }
        }
    }

    let mut instance = Instance { activities, capacities, constraints };
    if max_candidates.is_empty() {
        return instance;
    }
    // longest[a][b]: longest precedence path from the start of a to the
    // start of b. Ids increase along every precedence.
    let mut longest = vec![vec![f64::NEG_INFINITY; n + 2]; n + 2];
    for a in 1..=n {
        longest[a][a] = 0.0;
        for b in a + 1..=n {
            for c in instance.constraints.iter().filter(|c| c.to == b && c.from >= a) {
                let via = longest[a][c.from] + instance.activities[c.from].mean_duration;
                longest[a][b] = longest[a][b].max(via);
            }
        }
    }
    // A MAX lag above the longest path is consistent on its own but may
    // still close a negative cycle with other MAX lags; those are dropped.
    for (a, b, slack) in max_candidates {
        instance.constraints.push(TemporalConstraint::max(a, b, longest[a][b] + slack));
        let horizon = default_horizon(&instance);
        if DistanceGraph::build_and_close(&instance, horizon).is_err() {
            instance.constraints.pop();
        }
    }
    instance
}

/// `count` instances of 4 to 10 real activities on one or two resources,
/// without MAX lags.
pub fn fixture_suite(count: usize, seed: u64) -> Vec<Instance> {
    (0..count)
        .map(|i| {
            let mut rng = seeded(derive_seed(seed, i as u64));
            let config = GeneratorConfig {
                activities: 4 + i % 7,
                resources: 1 + i % 2,
                ..GeneratorConfig::default()
            };
            generate_instance(&config, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_instance, LagKind};
    use crate::problem::Problem;

    #[test]
    fn generated_instances_are_valid() {
        for inst in fixture_suite(20, 1) {
            assert!(validate_instance(&inst).ok());
            assert!(!inst.has_max_lags());
            assert!(inst.real_count() <= 10);
            Problem::new(inst).unwrap();
        }
    }

    #[test]
    fn max_lags_follow_their_precedence() {
        let cfg = GeneratorConfig { precedence_density: 0.5, max_lag_probability: 1.0, ..GeneratorConfig::default() };
        let inst = generate_instance(&cfg, &mut seeded(3));
        let maxes: Vec<_> = inst.constraints.iter().filter(|c| c.kind == LagKind::Max).collect();
        assert!(!maxes.is_empty());
        for m in maxes {
            assert!(m.lag >= inst.activities[m.from].mean_duration);
        }
        Problem::new(inst).unwrap();
    }

    #[test]
    fn same_seed_same_suite() {
        assert_eq!(fixture_suite(5, 9), fixture_suite(5, 9));
        assert_ne!(fixture_suite(5, 9), fixture_suite(5, 10));
    }
}
