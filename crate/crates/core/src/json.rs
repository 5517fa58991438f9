//! JSON numbers with 17 significant digits, enough to round-trip any f64.

use serde_json::{Number, Value};

/// `x` as a JSON number in `d.dddddddddddddddde±x` form; `null` if not finite.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    format!("{x:.16e}").parse::<Number>().map(Value::Number).unwrap_or(Value::Null)
}

pub fn num_array(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}
