//! General non-linear approximation: each start time carries an upper bound
//! on its mean and on its variance.
//!
//! Serial composition adds means and variances. At a merge, the maximum of
//! `m_i + Z_i` is bounded by `max_i m_i + max_i Z_i` with centered `Z_i`, and
//! the maximum of the centered parts is reduced pairwise in a tournament.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::pos::CompiledPos;
use crate::rules::moments::MomentPair;

/// Tolerance below zero still accepted as a nonnegative mean.
const MEAN_TOL: f64 = 1e-12;

/// Bound on the maximum of two independent variables with nonnegative means.
///
/// With `leaf_normal = Some((σa, σb))` both operands are taken as centered
/// normals and the tighter variance bound
/// `(1 - 1/π)(σa² + σb²) - (2/π) σa σb` applies; otherwise the general bound
/// `va + vb + (ma² + mb²) / 2`. The mean bound is
/// `(ma + mb)/2 + sqrt(va + vb + ma² + mb²)/2` in both cases.
pub fn gnla_max_pair(a: MomentPair, b: MomentPair, leaf_normal: Option<(f64, f64)>) -> Result<MomentPair> {
    for m in [a.mean, b.mean] {
        if m < -MEAN_TOL || m.is_nan() {
            return Err(Error::NegativeMean(m));
        }
    }
    let (ma, mb) = (a.mean.max(0.0), b.mean.max(0.0));
    let (va, vb) = (a.var.max(0.0), b.var.max(0.0));
    let mean = 0.5 * (ma + mb) + 0.5 * (va + vb + ma * ma + mb * mb).sqrt();
    let var = match leaf_normal {
        Some((sa, sb)) if ma == 0.0 && mb == 0.0 => {
            ((1.0 - 1.0 / PI) * (sa * sa + sb * sb) - (2.0 / PI) * sa * sb).max(0.0)
        }
        _ => va + vb + 0.5 * ma * ma + 0.5 * mb * mb,
    };
    Ok(MomentPair { mean, var })
}

/// Couples of operand indices; the last one may be a singleton.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingPlan {
    pub couples: Vec<Vec<usize>>,
}

/// Sorts by variance, largest first (ties by index), and pairs neighbours.
pub fn group_pairs(variances: &[f64]) -> GroupingPlan {
    let mut idx: Vec<usize> = (0..variances.len()).collect();
    idx.sort_by(|&i, &j| variances[j].total_cmp(&variances[i]).then(i.cmp(&j)));
    GroupingPlan {
        couples: idx.chunks(2).map(<[usize]>::to_vec).collect(),
    }
}

/// Operand of a tournament: moments plus the standard deviation when the
/// operand is a centered normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operand {
    pub moments: MomentPair,
    pub normal_sigma: Option<f64>,
}

/// Reduces the operands level by level. `planner` receives the current
/// variances and returns the couples for that level.
pub fn gnla_tournament<F>(operands: &[Operand], mut planner: F) -> Result<MomentPair>
where
    F: FnMut(&[f64]) -> GroupingPlan,
{
    if operands.is_empty() {
        return Err(Error::EmptyMax);
    }
    let mut level: Vec<Operand> = operands.to_vec();
    while level.len() > 1 {
        let vars: Vec<f64> = level.iter().map(|o| o.moments.var).collect();
        let plan = planner(&vars);
        let mut next = Vec::with_capacity(plan.couples.len());
        for couple in &plan.couples {
            match couple.as_slice() {
                [i] => next.push(level[*i]),
                [i, j] => {
                    let (a, b) = (level[*i], level[*j]);
                    let leaf = a.normal_sigma.zip(b.normal_sigma);
                    next.push(Operand {
                        moments: gnla_max_pair(a.moments, b.moments, leaf)?,
                        normal_sigma: None,
                    });
                }
                _ => return Err(Error::Invalid("grouping plan couples must have one or two members".into())),
            }
        }
        if next.len() >= level.len() {
            return Err(Error::Invalid("grouping plan does not reduce the operand count".into()));
        }
        level = next;
    }
    Ok(level[0].moments)
}

/// Tournament with [`group_pairs`] at every level. Operands are centered
/// perturbation moments; with `leaf_sigmas` they are also taken as normal.
pub fn gnla_max_multi(operands: &[MomentPair], leaf_sigmas: Option<&[f64]>) -> Result<MomentPair> {
    let ops: Vec<Operand> = operands
        .iter()
        .enumerate()
        .map(|(i, &m)| Operand {
            moments: m,
            normal_sigma: leaf_sigmas.map(|s| s[i]),
        })
        .collect();
    gnla_tournament(&ops, group_pairs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct NodeMoments {
    mean: f64,
    var: f64,
    /// Exactly normal (a sum of normal perturbations plus a constant).
    normal: bool,
}

/// Bound on the sink's start time: topological pass over the essential
/// edges, adding `lag` and, on duration-bearing edges, the predecessor's
/// nominal duration and variance.
pub fn gnla_eval(pos: &CompiledPos, instance: &Instance) -> Result<MomentPair> {
    let n = pos.len();
    if instance.len() != n {
        return Err(Error::Invalid(format!(
            "POS has {n} activities but the instance has {}",
            instance.len()
        )));
    }
    let mut nodes = vec![
        NodeMoments {
            mean: 0.0,
            var: 0.0,
            normal: true,
        };
        n
    ];
    for &v in &pos.order {
        let contributions: Vec<NodeMoments> = pos.essential[v]
            .iter()
            .map(|&idx| {
                let e = &pos.edges[idx];
                let u = nodes[e.from];
                let a = &instance.activities[e.from];
                if e.duration_bearing {
                    NodeMoments {
                        mean: u.mean + e.lag + a.mean_duration,
                        var: u.var + a.sigma * a.sigma,
                        normal: u.normal,
                    }
                } else {
                    NodeMoments {
                        mean: u.mean + e.lag,
                        ..u
                    }
                }
            })
            .collect();
        nodes[v] = match contributions.as_slice() {
            [] => NodeMoments {
                mean: 0.0,
                var: 0.0,
                normal: true,
            },
            [single] => *single,
            many => {
                let top = many.iter().map(|c| c.mean).fold(f64::NEG_INFINITY, f64::max);
                if many.iter().all(|c| c.var == 0.0) {
                    NodeMoments {
                        mean: top,
                        var: 0.0,
                        normal: true,
                    }
                } else {
                    let ops: Vec<Operand> = many
                        .iter()
                        .map(|c| Operand {
                            moments: MomentPair::new(0.0, c.var),
                            normal_sigma: c.normal.then(|| c.var.sqrt()),
                        })
                        .collect();
                    let spread = gnla_tournament(&ops, group_pairs)?;
                    NodeMoments {
                        mean: top + spread.mean,
                        var: spread.var,
                        normal: false,
                    }
                }
            }
        };
    }
    let sink = nodes[pos.sink()];
    Ok(MomentPair::new(sink.mean, sink.var))
}
