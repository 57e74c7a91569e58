//! Text serialization shared by every artifact.

use std::fs;
use std::path::Path;

use crate::error::Result;

/// Shortest decimal that round-trips the value rounded to 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("valid float literal");
    let exp = rounded.abs().log10().floor() as i32;
    if (-5..16).contains(&exp) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Write `contents` to `path`, creating parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Round every float to 12 significant digits before JSON encoding.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        x
    } else {
        format!("{x:.11e}").parse().expect("valid float literal")
    }
}

/// Apply [`round_sig`] to every float inside a JSON value.
pub fn round_json(value: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match value {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.1837), "0.1837");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(-2.0), "-2");
        assert_eq!(fmt_num(123456789.123456789), "123456789.123");
        assert_eq!(fmt_num(1.5e-20), "1.5e-20");
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(-0.0), "0");
    }

    #[test]
    fn json_floats_are_rounded() {
        let v = round_json(serde_json::json!({"a": [1.0 / 3.0, 2], "b": {"c": 0.1 + 0.2}}));
        assert_eq!(v.to_string(), r#"{"a":[0.333333333333,2],"b":{"c":0.3}}"#);
    }
}
