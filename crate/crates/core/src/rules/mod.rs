//! Decision rules that bound the makespan distribution of a POS, and the
//! robust fitness built on them.

pub mod fitness;
pub mod gnla;
pub mod moments;
pub mod sla;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::pos::CompiledPos;

pub use fitness::{chebyshev_factor, robust_fitness};
pub use gnla::{gnla_eval, gnla_max_multi, gnla_max_pair, gnla_tournament, group_pairs, GroupingPlan, Operand};
pub use moments::{segregated_moments, Distribution, MomentPair, SegregatedMoments};
pub use sla::{sla_eval, sla_form_moments, sla_max, sla_sum, variance_clamp_count, SegregatedLinearForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Sla,
    Gnla,
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Rule::Sla => "sla",
            Rule::Gnla => "gnla",
        })
    }
}

impl std::str::FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sla" => Ok(Rule::Sla),
            "gnla" => Ok(Rule::Gnla),
            other => Err(Error::Config(format!("unknown rule `{other}`"))),
        }
    }
}

/// Normal segregated moments for every activity of the instance.
pub fn normal_moments(instance: &Instance) -> Vec<SegregatedMoments> {
    instance
        .activities
        .iter()
        .map(|a| segregated_moments(Distribution::Normal, a.sigma.max(0.0)).expect("nonnegative scale"))
        .collect()
}

/// Makespan moments of a POS under normally distributed perturbations.
pub fn makespan_moments(rule: Rule, pos: &CompiledPos, instance: &Instance) -> Result<MomentPair> {
    match rule {
        Rule::Sla => sla_form_moments(&sla_eval(pos, instance)?, &normal_moments(instance)),
        Rule::Gnla => gnla_eval(pos, instance),
    }
}

pub fn pos_fitness(rule: Rule, pos: &CompiledPos, instance: &Instance, epsilon: f64) -> Result<f64> {
    robust_fitness(makespan_moments(rule, pos, instance)?, epsilon)
}
