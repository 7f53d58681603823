//! Shared fixtures for the criterion benchmarks.

use robsched::chaining::chain_flexible;
use robsched::rng::seeded;
use robsched::{
    generate_instance, generate_schedule, random_activity_list, CompiledPos, GenerationConfig, GeneratorConfig,
    Problem,
};

/// A seeded instance with `activities` real activities and σ = 1.
pub fn problem(activities: usize, seed: u64) -> Problem {
    let config = GeneratorConfig { activities, ..GeneratorConfig::default() };
    let mut instance = generate_instance(&config, &mut seeded(seed));
    instance.set_uniform_sigma(1.0);
    Problem::new(instance).expect("generated instances are consistent")
}

/// A POS obtained by chaining one random schedule of `problem`.
pub fn chained_pos(problem: &Problem, seed: u64) -> CompiledPos {
    let mut rng = seeded(seed);
    let list = random_activity_list(problem, &mut rng);
    let outcome = generate_schedule(problem, &list, &mut rng, &GenerationConfig::default());
    let schedule = outcome.schedule().expect("instances without MAX lags always schedule");
    chain_flexible(problem, schedule, &mut rng).and_then(|p| p.compile()).expect("chaining succeeds")
}
