//! Benchmark grids: every instance under every solver variant, σ, ε and
//! repeat, with per-cell averages.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaining::Chaining;
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::problem::Problem;
use crate::rng::derive_seed;
use crate::rules::Rule;
use crate::search::{robust_local_search, SearchConfig};

/// Solver configurations compared in benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Sla,
    Gnla,
    /// GNLA with robustness-feedback chaining.
    GnlaRc,
    /// GNLA with ordering generation.
    GnlaOg,
    GnlaOgRc,
    /// GNLA given the extra iterations ordering generation would have used.
    GnlaPlus,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Sla,
        Variant::Gnla,
        Variant::GnlaRc,
        Variant::GnlaOg,
        Variant::GnlaOgRc,
        Variant::GnlaPlus,
    ];

    pub fn apply(self, base: &SearchConfig) -> SearchConfig {
        let mut c = base.clone();
        c.rule = if self == Variant::Sla { Rule::Sla } else { Rule::Gnla };
        c.chaining = match self {
            Variant::GnlaRc | Variant::GnlaOgRc => Chaining::Feedback,
            _ => base.chaining,
        };
        c.order_generation = matches!(self, Variant::GnlaOg | Variant::GnlaOgRc);
        c.extra_iterations_for_pairs = self == Variant::GnlaPlus;
        c
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Sla => "sla",
            Variant::Gnla => "gnla",
            Variant::GnlaRc => "gnla+rc",
            Variant::GnlaOg => "gnla+og",
            Variant::GnlaOgRc => "gnla+og+rc",
            Variant::GnlaPlus => "gnla+",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Variant::ALL
            .into_iter()
            .find(|v| v.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub instance: String,
    #[serde(serialize_with = "display")]
    pub variant: Variant,
    pub sigma: f64,
    pub epsilon: f64,
    pub repeat: usize,
    pub seed: u64,
    /// `None` when no feasible list was found.
    pub robust_makespan: Option<f64>,
    pub iterations: usize,
    pub feasible_fraction: f64,
    /// Only filled in when timing was requested.
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub instance: String,
    #[serde(serialize_with = "display")]
    pub variant: Variant,
    pub sigma: f64,
    pub epsilon: f64,
    pub runs: usize,
    pub feasible_runs: usize,
    /// Mean over the feasible runs.
    pub mean_robust_makespan: Option<f64>,
    pub mean_wall_ms: Option<f64>,
}

fn display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub variants: Vec<Variant>,
    pub sigmas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub repeats: usize,
    /// Iterations, seed and everything not set by the variant.
    pub base: SearchConfig,
    pub timing: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            variants: vec![Variant::Sla, Variant::Gnla],
            sigmas: vec![0.1, 0.5, 1.0, 2.0],
            epsilons: vec![0.05, 0.1, 0.15, 0.2],
            repeats: 10,
            base: SearchConfig::default(),
            timing: false,
        }
    }
}

struct Cell {
    instance: usize,
    variant: Variant,
    sigma: f64,
    epsilon: f64,
    repeat: usize,
}

/// Runs the grid in parallel. Rows come back ordered by instance, variant,
/// σ, ε and repeat regardless of scheduling. Repeat `r` uses seed
/// `derive_seed(base.seed, r)` in every cell, so cells differ only in their
/// coordinates.
pub fn run_grid(instances: &[(String, Instance)], spec: &GridSpec) -> Result<(Vec<RunRow>, Vec<AggregateRow>)> {
    if instances.is_empty() {
        return Err(Error::Config("no instances to benchmark".into()));
    }
    if spec.repeats == 0 || spec.variants.is_empty() || spec.sigmas.is_empty() || spec.epsilons.is_empty() {
        return Err(Error::Config("every grid axis needs at least one value".into()));
    }
    for &s in &spec.sigmas {
        if !(s >= 0.0) {
            return Err(Error::Config(format!("sigma {s} must be nonnegative")));
        }
    }
    for &e in &spec.epsilons {
        SearchConfig { epsilon: e, ..spec.base.clone() }.validate()?;
    }

    let mut cells = Vec::new();
    for instance in 0..instances.len() {
        for &variant in &spec.variants {
            for &sigma in &spec.sigmas {
                for &epsilon in &spec.epsilons {
                    for repeat in 0..spec.repeats {
                        cells.push(Cell { instance, variant, sigma, epsilon, repeat });
                    }
                }
            }
        }
    }

    let problems: Vec<Vec<Problem>> = instances
        .iter()
        .map(|(_, inst)| {
            spec.sigmas
                .iter()
                .map(|&s| {
                    let mut inst = inst.clone();
                    inst.set_uniform_sigma(s);
                    Problem::new(inst)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let rows: Vec<RunRow> = cells
        .par_iter()
        .map(|cell| {
            let si = spec.sigmas.iter().position(|&s| s == cell.sigma).expect("sigma from the grid");
            let problem = &problems[cell.instance][si];
            let mut config = cell.variant.apply(&spec.base);
            config.epsilon = cell.epsilon;
            config.seed = derive_seed(spec.base.seed, cell.repeat as u64);
            config.record_trace = false;
            let start = Instant::now();
            let result = robust_local_search(problem, &config)?;
            let wall_ms = spec.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
            Ok(RunRow {
                instance: instances[cell.instance].0.clone(),
                variant: cell.variant,
                sigma: cell.sigma,
                epsilon: cell.epsilon,
                repeat: cell.repeat,
                seed: config.seed,
                robust_makespan: result.robust_makespan,
                iterations: result.iterations_used,
                feasible_fraction: result.feasible_fraction,
                wall_ms,
            })
        })
        .collect::<Result<_>>()?;

    let aggregates = rows
        .chunks(spec.repeats)
        .map(|group| {
            let first = &group[0];
            let feasible: Vec<f64> = group.iter().filter_map(|r| r.robust_makespan).collect();
            let walls: Vec<f64> = group.iter().filter_map(|r| r.wall_ms).collect();
            AggregateRow {
                instance: first.instance.clone(),
                variant: first.variant,
                sigma: first.sigma,
                epsilon: first.epsilon,
                runs: group.len(),
                feasible_runs: feasible.len(),
                mean_robust_makespan: mean(&feasible),
                mean_wall_ms: mean(&walls),
            }
        })
        .collect();
    Ok((rows, aggregates))
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}
