//! Segregated linear approximation.
//!
//! A start time is bounded by an affine form
//! `c0 + Σ_k (c⁺_k z⁺_k + c⁻_k z⁻_k)`. A realized duration is
//! `d0 + z⁺ - z⁻`, so adding it contributes `+1` on `z⁺` and `-1` on `z⁻`.
//! Merging parallel branches takes the componentwise maximum of the forms,
//! which bounds their pointwise maximum from above because every segregated
//! variable is nonnegative.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActivityId, Instance};
use crate::pos::CompiledPos;
use crate::rules::moments::{MomentPair, SegregatedMoments};

static VARIANCE_CLAMPS: AtomicU64 = AtomicU64::new(0);

/// How often [`sla_form_moments`] has clamped a negative variance to zero in
/// this process.
pub fn variance_clamp_count() -> u64 {
    VARIANCE_CLAMPS.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SegregatedLinearForm {
    pub c0: f64,
    pub cplus: BTreeMap<ActivityId, f64>,
    pub cminus: BTreeMap<ActivityId, f64>,
}

impl SegregatedLinearForm {
    pub fn constant(c0: f64) -> Self {
        Self {
            c0,
            ..Self::default()
        }
    }

    /// The realized duration `d0 + z⁺ - z⁻` of one activity.
    pub fn duration(id: ActivityId, d0: f64) -> Self {
        Self {
            c0: d0,
            cplus: BTreeMap::from([(id, 1.0)]),
            cminus: BTreeMap::from([(id, -1.0)]),
        }
    }

    /// Evaluates the form at given segregated values.
    pub fn value(&self, zplus: &[f64], zminus: &[f64]) -> f64 {
        self.c0
            + self.cplus.iter().map(|(&k, c)| c * zplus[k]).sum::<f64>()
            + self.cminus.iter().map(|(&k, c)| c * zminus[k]).sum::<f64>()
    }

    fn add_assign(&mut self, other: &Self) {
        self.c0 += other.c0;
        for (&k, &c) in &other.cplus {
            *self.cplus.entry(k).or_insert(0.0) += c;
        }
        for (&k, &c) in &other.cminus {
            *self.cminus.entry(k).or_insert(0.0) += c;
        }
    }
}

pub fn sla_sum(forms: &[SegregatedLinearForm], added_const: f64) -> SegregatedLinearForm {
    let mut out = SegregatedLinearForm::constant(added_const);
    for f in forms {
        out.add_assign(f);
    }
    out.cplus.retain(|_, c| *c != 0.0);
    out.cminus.retain(|_, c| *c != 0.0);
    out
}

fn max_coeffs<'a>(maps: impl Iterator<Item = &'a BTreeMap<ActivityId, f64>> + Clone) -> BTreeMap<ActivityId, f64> {
    let mut out: BTreeMap<ActivityId, f64> = BTreeMap::new();
    let count = maps.clone().count();
    let mut seen: BTreeMap<ActivityId, usize> = BTreeMap::new();
    for m in maps {
        for (&k, &c) in m {
            let e = out.entry(k).or_insert(f64::NEG_INFINITY);
            *e = e.max(c);
            *seen.entry(k).or_insert(0) += 1;
        }
    }
    // A form without a key has coefficient 0 there.
    for (k, c) in &mut out {
        if seen[k] < count {
            *c = c.max(0.0);
        }
    }
    out.retain(|_, c| *c != 0.0);
    out
}

pub fn sla_max(forms: &[SegregatedLinearForm]) -> Result<SegregatedLinearForm> {
    if forms.is_empty() {
        return Err(Error::EmptyMax);
    }
    Ok(SegregatedLinearForm {
        c0: forms.iter().map(|f| f.c0).fold(f64::NEG_INFINITY, f64::max),
        cplus: max_coeffs(forms.iter().map(|f| &f.cplus)),
        cminus: max_coeffs(forms.iter().map(|f| &f.cminus)),
    })
}

/// Mean and variance of a form with independent activities:
/// `mean = c0 + Σ (c⁺ + c⁻) mu` and
/// `var = Σ (c⁺)² var⁺ + (c⁻)² var⁻ - 2 c⁺ c⁻ mu²`.
pub fn sla_form_moments(form: &SegregatedLinearForm, moments: &[SegregatedMoments]) -> Result<MomentPair> {
    let get = |k: ActivityId| moments.get(k).copied().ok_or(Error::MissingMoments(k));
    let mut mean = form.c0;
    let mut var = 0.0;
    for (&k, &cp) in &form.cplus {
        let m = get(k)?;
        let cm = form.cminus.get(&k).copied().unwrap_or(0.0);
        mean += (cp + cm) * m.mu;
        var += cp * cp * m.var_p + cm * cm * m.var_m + 2.0 * cp * cm * m.covariance();
    }
    for (&k, &cm) in form.cminus.iter().filter(|(k, _)| !form.cplus.contains_key(k)) {
        let m = get(k)?;
        mean += cm * m.mu;
        var += cm * cm * m.var_m;
    }
    if var < 0.0 {
        VARIANCE_CLAMPS.fetch_add(1, Ordering::Relaxed);
        var = 0.0;
    }
    Ok(MomentPair { mean, var })
}

/// Start-time form of every activity, in topological order over the
/// essential edges of the POS. Dummy durations carry no coefficients.
pub fn sla_forms(pos: &CompiledPos, instance: &Instance) -> Result<Vec<SegregatedLinearForm>> {
    let n = pos.len();
    if instance.len() != n {
        return Err(Error::Invalid(format!(
            "POS has {n} activities but the instance has {}",
            instance.len()
        )));
    }
    let mut forms: Vec<SegregatedLinearForm> = vec![SegregatedLinearForm::default(); n];
    for &v in &pos.order {
        let contributions: Vec<SegregatedLinearForm> = pos.essential[v]
            .iter()
            .map(|&idx| {
                let e = &pos.edges[idx];
                let mut f = forms[e.from].clone();
                f.c0 += e.lag;
                if e.duration_bearing {
                    let d0 = instance.activities[e.from].mean_duration;
                    if instance.is_dummy(e.from) {
                        f.c0 += d0;
                    } else {
                        f.add_assign(&SegregatedLinearForm::duration(e.from, d0));
                    }
                }
                f
            })
            .collect();
        forms[v] = match contributions.len() {
            0 => SegregatedLinearForm::default(),
            1 => contributions.into_iter().next().expect("one element"),
            _ => sla_max(&contributions)?,
        };
        forms[v].cplus.retain(|_, c| *c != 0.0);
        forms[v].cminus.retain(|_, c| *c != 0.0);
    }
    Ok(forms)
}

/// Form bounding the sink's start, i.e. the makespan.
pub fn sla_eval(pos: &CompiledPos, instance: &Instance) -> Result<SegregatedLinearForm> {
    let mut forms = sla_forms(pos, instance)?;
    Ok(forms.swap_remove(pos.sink()))
}
