//! The native JSON instance document.
//!
//! ```json
//! {
//!   "version": 1,
//!   "resources": [1],
//!   "activities": [
//!     {"id": 1, "d0": 3, "sigma": 1, "demands": [1]},
//!     {"id": 2, "d0": 2, "sigma": 1, "demands": [1]}
//!   ],
//!   "constraints": [{"from": 1, "to": 2, "kind": "max", "lag": -1}]
//! }
//! ```
//!
//! Dummy activities may be omitted: when no activity carries id 0 the source
//! and sink are inserted, so real ids run `1..=N` and the sink is `N+1`.

use serde::{Deserialize, Serialize};

use crate::error::{ParseError, ParseErrorKind};
use crate::model::{Activity, Instance, TemporalConstraint};

pub const NATIVE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NativeDocument {
    version: u32,
    #[serde(alias = "capacities")]
    resources: Vec<u32>,
    activities: Vec<Activity>,
    #[serde(default)]
    constraints: Vec<TemporalConstraint>,
}

pub fn parse_native(text: &str) -> Result<Instance, ParseError> {
    let doc: NativeDocument = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let kind = if msg.starts_with("missing field") {
            ParseErrorKind::MissingField
        } else {
            ParseErrorKind::Syntax
        };
        ParseError::new(kind, e.line(), e.column(), msg)
    })?;
    if doc.version != NATIVE_VERSION {
        return Err(ParseError::new(
            ParseErrorKind::Unsupported,
            1,
            1,
            format!("unsupported native format version {}", doc.version),
        ));
    }

    let k = doc.resources.len();
    let has_dummies = doc.activities.iter().any(|a| a.id == 0);
    let mut activities = Vec::with_capacity(doc.activities.len() + 2);
    if has_dummies {
        activities = doc.activities;
    } else {
        activities.push(Activity::dummy(0, k));
        activities.extend(doc.activities);
        let sink = activities.len();
        activities.push(Activity::dummy(sink, k));
    }

    Ok(Instance {
        activities,
        capacities: doc.resources,
        constraints: doc.constraints,
    })
}

/// Canonical form: dummies are always written out.
pub fn write_native(instance: &Instance) -> String {
    let doc = NativeDocument {
        version: NATIVE_VERSION,
        resources: instance.capacities.clone(),
        activities: instance.activities.clone(),
        constraints: instance.constraints.clone(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("instance serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LagKind;

    const MINIMAL: &str = r#"{
        "version": 1,
        "resources": [1],
        "activities": [
            {"id": 1, "d0": 3, "sigma": 1, "demands": [1]},
            {"id": 2, "d0": 2, "sigma": 1, "demands": [1]}
        ],
        "constraints": [{"from": 1, "to": 2, "kind": "max", "lag": -1}]
    }"#;

    #[test]
    fn minimal_document_gets_dummies() {
        let inst = parse_native(MINIMAL).unwrap();
        assert_eq!(inst.real_count(), 2);
        assert_eq!(inst.resource_count(), 1);
        assert_eq!(inst.sink(), 3);
        assert_eq!(inst.activities[3].mean_duration, 0.0);
    }

    #[test]
    fn max_lag_passes_through_verbatim() {
        let inst = parse_native(MINIMAL).unwrap();
        let c = inst.constraints[0];
        assert_eq!((c.from, c.to, c.kind, c.lag), (1, 2, LagKind::Max, -1.0));
    }

    #[test]
    fn missing_resources_names_the_field() {
        let err = parse_native(r#"{"version": 1, "activities": []}"#).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingField);
        assert!(err.message.contains("resources"), "{}", err.message);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_native("{\n  \"version\": 1,\n  oops\n}").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
        assert_eq!(err.line, 3);
    }

    #[test]
    fn canonical_round_trip() {
        let inst = parse_native(MINIMAL).unwrap();
        let text = write_native(&inst);
        assert_eq!(parse_native(&text).unwrap(), inst);
        assert_eq!(write_native(&parse_native(&text).unwrap()), text);
    }
}
