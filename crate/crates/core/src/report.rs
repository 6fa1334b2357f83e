//! Deterministic text output: every float rounded to a fixed number of
//! significant digits before printing.

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

pub const SIG_DIGITS: usize = 12;

/// `v` rounded to `digits` significant decimal digits.
pub fn round_sig(v: f64, digits: usize) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", digits.saturating_sub(1), v).parse().unwrap_or(v)
}

/// Shortest decimal text for `round_sig(v, digits)`.
pub fn format_sig(v: f64, digits: usize) -> String {
    let r = round_sig(v, digits);
    if r == 0.0 {
        // Avoid printing "-0".
        return "0".into();
    }
    format!("{r}")
}

fn round_value(v: &mut Value, digits: usize) {
    match v {
        Value::Number(num) if num.is_f64() => {
            let r = round_sig(num.as_f64().unwrap_or(0.0), digits);
            let r = if r == 0.0 { 0.0 } else { r };
            if let Some(n) = serde_json::Number::from_f64(r) {
                *num = n;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|i| round_value(i, digits)),
        Value::Object(map) => map.values_mut().for_each(|i| round_value(i, digits)),
        _ => {}
    }
}

/// Pretty JSON with floats rounded to [`SIG_DIGITS`] significant digits.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v, SIG_DIGITS);
    Ok(serde_json::to_string_pretty(&v)?)
}
