//! JSON output with floats pinned to 12 significant digits, so reports can be
//! compared byte-for-byte against golden files.

use serde::Serialize;
use serde_json::{Number, Value};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("float formatting round-trips")
}

/// Rounds every non-integer number in `value`, recursively.
pub fn round_floats(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"));
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with rounded floats and a trailing newline.
pub fn to_json_document<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let v = round_floats(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding() {
        assert_eq!(round_sig(1025.0 / 1023.0), 1.00195503421);
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(-2.0 / 3.0), -0.666666666667);
        assert_eq!(round_sig(123456789012345.0), 123456789012000.0);
    }

    #[test]
    fn nested_values() {
        let v = round_floats(json!({"a": [1, 2.0000000000001, {"b": 1.0 / 3.0}], "c": "x", "d": 7}));
        assert_eq!(v, json!({"a": [1, 2.0, {"b": 0.333333333333}], "c": "x", "d": 7}));
        assert_eq!(to_json_document(&json!([0.5])).unwrap(), "[\n  0.5\n]\n");
    }
}
