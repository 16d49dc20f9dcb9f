//! Byte-stable JSON rendering: keys sorted, floats with 17 significant
//! digits in scientific notation, non-finite floats as `null`.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        // Avoid "-0.0000000000000000e0".
        let x = if x == 0.0 { 0.0 } else { x };
        format!("{x:.16e}")
    } else {
        "null".to_owned()
    }
}

/// Renders a flat object with one key per line and a trailing newline.
pub fn render_object<'a>(fields: impl IntoIterator<Item = (&'a str, Value)>) -> String {
    let sorted: BTreeMap<&str, Value> = fields.into_iter().collect();
    let body: Vec<String> = sorted
        .into_iter()
        .map(|(key, value)| {
            let value = match value {
                Value::Float(x) => format_float(x),
                Value::Int(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
            };
            format!("  \"{key}\": {value}")
        })
        .collect();
    format!("{{\n{}\n}}\n", body.join(",\n"))
}

/// Reads a float written by [`format_float`], mapping `null` back to `+inf`.
pub fn float_or_infinity<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(de)?.unwrap_or(f64::INFINITY))
}
