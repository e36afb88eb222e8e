//! JSON documents for norm nets and custom representation powers.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "norms": [
//!     {"id": "n1", "modality": "prohibition", "addressee": "passenger",
//!      "action": "carry_liquids", "cost": 2, "values": ["safety"]}
//!   ],
//!   "generalisation": [["n3", "n4"]],
//!   "exclusivity": [],
//!   "substitutability": [],
//!   "value_order": ["free_movement", "safety"],
//!   "in_force": []
//! }
//! ```
//!
//! Generalisation pairs are `[general, specific]`. Costs are JSON numbers or
//! `"p/q"` strings and default to 0. Serialisation is canonical: sorted keys,
//! norms and pairs sorted by id, every field present, `value_order` kept as
//! given.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::norm_net::{build_norm_net, unordered, IdPair, Modality, Norm, NormNet, Relation, RelationSet, ValidationError};
use crate::rational::{format_exact, parse_rational, Rational};
use crate::representation::RepresentationAssignment;
use crate::values::{ValueError, ValueOrder};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("{path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("{path}: {source}")]
    Invalid { path: String, source: ValidationError },
    #[error("{path}: {source}")]
    Values { path: String, source: ValueError },
}

impl ParseError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError::SchemaViolation { path: path.into(), message: message.into() }
    }

    pub fn path(&self) -> Option<&str> {
        match self {
            ParseError::MalformedJson(_) => None,
            ParseError::SchemaViolation { path, .. } | ParseError::Invalid { path, .. } | ParseError::Values { path, .. } => {
                Some(path)
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNorm {
    id: String,
    modality: Modality,
    addressee: String,
    action: String,
    #[serde(default)]
    cost: Option<Value>,
    #[serde(default)]
    values: Vec<String>,
}

/// The document as written, before any semantic checks.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    schema_version: u64,
    norms: Vec<RawNorm>,
    #[serde(default)]
    generalisation: Vec<[String; 2]>,
    #[serde(default)]
    exclusivity: Vec<[String; 2]>,
    #[serde(default)]
    substitutability: Vec<[String; 2]>,
    #[serde(default)]
    value_order: Vec<String>,
    #[serde(default)]
    in_force: Vec<String>,
}

fn deserialize_with_path<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, ParseError> {
    let malformed = |e: serde_json::Error| ParseError::MalformedJson(e.to_string());
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_data() {
            ParseError::schema(path, inner.to_string())
        } else {
            malformed(inner)
        }
    })?;
    de.end().map_err(malformed)?;
    Ok(value)
}

/// A JSON number or `"p/q"` string as an exact rational.
fn exact_number(value: &Value, path: &str) -> Result<Rational, ParseError> {
    let text = match value {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(ParseError::schema(path, "expected a number or a \"p/q\" string")),
    };
    parse_rational(&text).map_err(|e| ParseError::schema(path, e.to_string()))
}

fn exact_json(value: &Rational) -> Value {
    if value.is_integer() {
        Value::Number(serde_json::from_str(&value.to_integer().to_string()).expect("integer literal"))
    } else {
        Value::String(format_exact(value))
    }
}

pub fn parse_norm_net(text: &str) -> Result<NormNet, ParseError> {
    let raw: RawDocument = deserialize_with_path(text)?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(ParseError::schema(
            "schema_version",
            format!("unsupported schema version {} (expected {SCHEMA_VERSION})", raw.schema_version),
        ));
    }

    let mut norms = Vec::with_capacity(raw.norms.len());
    for (i, n) in raw.norms.iter().enumerate() {
        let cost = match &n.cost {
            Some(v) => exact_number(v, &format!("norms[{i}].cost"))?,
            None => Rational::default(),
        };
        norms.push(Norm {
            id: n.id.clone(),
            modality: n.modality,
            addressee: n.addressee.clone(),
            action: n.action.clone(),
            cost,
            values: n.values.iter().cloned().collect(),
        });
    }

    let relations = RelationSet {
        generalisation: raw.generalisation.iter().map(|[g, s]| (g.clone(), s.clone())).collect(),
        exclusivity: raw.exclusivity.iter().map(|[a, b]| unordered(a.as_str(), b.as_str())).collect(),
        substitutability: raw.substitutability.iter().map(|[a, b]| unordered(a.as_str(), b.as_str())).collect(),
    };
    let in_force: BTreeSet<String> = raw.in_force.iter().cloned().collect();
    let net = build_norm_net(norms, relations, in_force)
        .map_err(|source| ParseError::Invalid { path: locate(&raw, &source), source })?;

    if !raw.value_order.is_empty() {
        let order = ValueOrder::new(raw.value_order.iter().cloned())
            .map_err(|source| ParseError::Values { path: "value_order".into(), source })?;
        for (i, n) in raw.norms.iter().enumerate() {
            if let Some(v) = n.values.iter().find(|v| !order.ids().contains(v)) {
                let source = ValueError::UnknownValueId { norm: n.id.clone(), value: v.clone() };
                return Err(ParseError::Values { path: format!("norms[{i}].values"), source });
            }
        }
    }
    Ok(net.with_value_order(raw.value_order))
}

/// JSON path of the document element a validation error refers to.
fn locate(raw: &RawDocument, err: &ValidationError) -> String {
    let norm_at = |id: &str, last: bool| {
        let mut hits = raw.norms.iter().enumerate().filter(|(_, n)| n.id == id).map(|(i, _)| i);
        let i = if last { hits.next_back() } else { hits.next() };
        i.map_or_else(|| "norms".to_string(), |i| format!("norms[{i}]"))
    };
    let list = |relation: Relation| match relation {
        Relation::Generalisation => &raw.generalisation,
        Relation::Exclusivity => &raw.exclusivity,
        Relation::Substitutability => &raw.substitutability,
    };
    let pair_at = |relation: Relation, pair: &IdPair| {
        let ordered = relation == Relation::Generalisation;
        list(relation)
            .iter()
            .position(|[a, b]| {
                (a == &pair.0 && b == &pair.1) || (!ordered && a == &pair.1 && b == &pair.0)
            })
            .map_or_else(|| relation.to_string(), |i| format!("{relation}[{i}]"))
    };
    match err {
        ValidationError::DuplicateId(id) => norm_at(id, true),
        ValidationError::InvalidId(id) | ValidationError::NegativeCost(id) => norm_at(id, false),
        ValidationError::EmptyField { id, field } => format!("{}.{field}", norm_at(id, false)),
        ValidationError::UnknownEndpoint { relation, pair, .. } => pair_at(*relation, pair),
        ValidationError::SelfRelation { relation, id } => pair_at(*relation, &(id.clone(), id.clone())),
        ValidationError::OverlappingRelationSets { pair, second, .. } => {
            let path = pair_at(*second, pair);
            if *second == Relation::Generalisation && path == "generalisation" {
                pair_at(*second, &(pair.1.clone(), pair.0.clone()))
            } else {
                path
            }
        }
        ValidationError::GeneralisationCycle { .. } | ValidationError::MultipleParents { .. } => "generalisation".into(),
        ValidationError::UnknownInForce(id) => raw
            .in_force
            .iter()
            .position(|x| x == id)
            .map_or_else(|| "in_force".to_string(), |i| format!("in_force[{i}]")),
        ValidationError::IdCollision(_) | ValidationError::UnknownId(_) => "$".into(),
    }
}

/// Canonical JSON text of a net, newline-terminated.
pub fn serialize_norm_net(net: &NormNet) -> String {
    let pairs = |set: &BTreeSet<IdPair>| -> Vec<[String; 2]> { set.iter().map(|(a, b)| [a.clone(), b.clone()]).collect() };
    let norms: Vec<Value> = net
        .norms()
        .map(|n| {
            json!({
                "id": n.id,
                "modality": n.modality,
                "addressee": n.addressee,
                "action": n.action,
                "cost": exact_json(&n.cost),
                "values": n.values,
            })
        })
        .collect();
    let relations = net.relations();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "norms": norms,
        "generalisation": pairs(&relations.generalisation),
        "exclusivity": pairs(&relations.exclusivity),
        "substitutability": pairs(&relations.substitutability),
        "value_order": net.value_order(),
        "in_force": net.in_force(),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialise");
    text.push('\n');
    text
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    power: BTreeMap<String, Value>,
}

/// Reads `{"power": {"<id>": <number or "p/q">, ...}}`.
pub fn parse_representation(text: &str) -> Result<RepresentationAssignment, ParseError> {
    let raw: RawPower = deserialize_with_path(text)?;
    let mut power = BTreeMap::new();
    for (id, v) in &raw.power {
        power.insert(id.clone(), exact_number(v, &format!("power.{id}"))?);
    }
    Ok(RepresentationAssignment::custom(power))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{airport, extended_airport};
    use crate::rational::{int, ratio};

    const MINIMAL: &str = r#"{"schema_version": 1, "norms": [
        {"id": "a", "modality": "obligation", "addressee": "x", "action": "y"},
        {"id": "b", "modality": "permission", "addressee": "x", "action": "z", "cost": 0.25}
    ]}"#;

    #[test]
    fn omitted_costs_default_to_zero() {
        let net = parse_norm_net(MINIMAL).unwrap();
        assert_eq!(net.norm("a").unwrap().cost, int(0));
        assert_eq!(net.norm("b").unwrap().cost, ratio(1, 4));
    }

    #[test]
    fn canonical_round_trip() {
        for net in [airport(), extended_airport(6)] {
            let text = serialize_norm_net(&net);
            let back = parse_norm_net(&text).unwrap();
            assert_eq!(back, net);
            assert_eq!(serialize_norm_net(&back), text);
        }
        let text = serialize_norm_net(&parse_norm_net(MINIMAL).unwrap());
        assert!(text.contains("\"cost\": \"1/4\""), "{text}");
        assert!(text.contains("\"cost\": 0"), "{text}");
    }

    #[test]
    fn keys_are_sorted() {
        let text = serialize_norm_net(&airport());
        let top: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \""))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        let mut sorted = top.clone();
        sorted.sort();
        assert_eq!(top, sorted);
    }

    #[test]
    fn reversed_generalisation_is_a_cycle() {
        let text = serialize_norm_net(&airport()).replace(
            "\"generalisation\": [\n    [\n      \"n3\",\n      \"n4\"\n    ],",
            "\"generalisation\": [\n    [\"n4\", \"n3\"],\n    [\n      \"n3\",\n      \"n4\"\n    ],",
        );
        match parse_norm_net(&text) {
            Err(ParseError::Invalid { path, source: ValidationError::GeneralisationCycle { ids } }) => {
                assert_eq!(path, "generalisation");
                assert!(ids.contains(&"n3".to_string()) && ids.contains(&"n4".to_string()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_endpoint_carries_path() {
        let text = MINIMAL.replace("\n    ]}", "\n    ], \"exclusivity\": [[\"a\", \"b\"], [\"a\", \"ghost\"]]}");
        let err = parse_norm_net(&text).unwrap_err();
        assert_eq!(err.path(), Some("exclusivity[1]"));
        assert!(err.to_string().contains("ghost"), "{err}");
    }

    #[test]
    fn schema_errors_carry_path() {
        let err = parse_norm_net(&MINIMAL.replace("\"obligation\"", "\"must\"")).unwrap_err();
        assert!(matches!(err, ParseError::SchemaViolation { .. }), "{err:?}");
        assert_eq!(err.path(), Some("norms[0].modality"));

        let err = parse_norm_net(&MINIMAL.replace("\"cost\": 0.25", "\"cost\": true")).unwrap_err();
        assert_eq!(err.path(), Some("norms[1].cost"));

        let err = parse_norm_net(&MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 2")).unwrap_err();
        assert_eq!(err.path(), Some("schema_version"));

        let err = parse_norm_net(&MINIMAL.replace("\"norms\"", "\"extra\": 1, \"norms\"")).unwrap_err();
        assert!(matches!(err, ParseError::SchemaViolation { .. }), "{err:?}");
    }

    #[test]
    fn malformed_json() {
        assert!(matches!(parse_norm_net("{\"schema_version\": 1,"), Err(ParseError::MalformedJson(_))));
        assert!(matches!(parse_norm_net(&format!("{MINIMAL} x")), Err(ParseError::MalformedJson(_))));
    }

    #[test]
    fn unknown_value_is_rejected() {
        let text = MINIMAL
            .replace("\"action\": \"y\"", "\"action\": \"y\", \"values\": [\"joy\"]")
            .replace("\n    ]}", "\n    ], \"value_order\": [\"safety\"]}");
        let err = parse_norm_net(&text).unwrap_err();
        assert_eq!(err.path(), Some("norms[0].values"));
    }

    #[test]
    fn exact_decimal_costs() {
        let net = parse_norm_net(&MINIMAL.replace("0.25", "0.1")).unwrap();
        assert_eq!(net.norm("b").unwrap().cost, ratio(1, 10));
        let net = parse_norm_net(&MINIMAL.replace("0.25", "\"2/3\"")).unwrap();
        assert_eq!(net.norm("b").unwrap().cost, ratio(2, 3));
    }

    #[test]
    fn custom_power_file() {
        let a = parse_representation(r#"{"power": {"n1": 2, "n2": "1/3", "n3": 0.5}}"#).unwrap();
        assert_eq!(a.power["n2"], ratio(1, 3));
        assert_eq!(a.power["n3"], ratio(1, 2));
        assert!(parse_representation(r#"{"power": {"n1": []}}"#).unwrap_err().path() == Some("power.n1"));
    }
}
