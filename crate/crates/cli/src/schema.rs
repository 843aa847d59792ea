//! Published JSON schemas, embedded so every request is checked before dispatch.

use serde_json::Value;

use crate::error::CliError;

macro_rules! schemas {
    ($($name:literal),* $(,)?) => {
        pub const SCHEMAS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../schemas/", $name, ".schema.json"))),)*
        ];
    };
}

schemas!(
    "response",
    "request/matrix",
    "request/lin-from-form",
    "request/lin-from-bivector",
    "request/lin-forward",
    "request/lin-backward",
    "request/lin-gauge",
    "request/lin-gauge-bivector",
    "request/lin-leaf-form",
    "request/lin-quotient-bivector",
    "request/lin-check-dual-pair",
    "request/lin-gauge-dual-pair",
    "request/lin-reduce",
    "request/lin-compose",
    "result/lin-from-form",
    "result/lin-from-bivector",
    "result/lin-forward",
    "result/lin-backward",
    "result/lin-gauge",
    "result/lin-gauge-bivector",
    "result/lin-leaf-form",
    "result/lin-quotient-bivector",
    "result/lin-check-dual-pair",
    "result/lin-gauge-dual-pair",
    "result/lin-reduce",
    "result/lin-compose",
    "result/groupoid-check",
    "result/surf-classify",
    "result/surf-compare",
    "result/surf-gauge",
);

pub fn get(name: &str) -> Value {
    let text = SCHEMAS
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("no schema named {name}"))
        .1;
    serde_json::from_str(text).expect("embedded schemas are valid JSON")
}

/// Checks `doc` against the named schema, listing every violation.
pub fn validate(name: &str, doc: &Value) -> Result<(), CliError> {
    let schema = get(name);
    let validator = jsonschema::validator_for(&schema).expect("embedded schemas compile");
    let errors: Vec<String> = validator
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(CliError::Input(format!("schema violation: {}", errors.join("; "))))
    }
}

/// Rounds every float to 12 significant digits, so output is stable across
/// harmless last-bit differences.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_f64(n.as_f64().expect("f64 number"));
            *v = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn round_f64(x: f64) -> f64 {
    format!("{x:.11e}").parse().expect("formatted float parses")
}
