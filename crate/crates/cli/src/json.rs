//! JSON rendering with `%.17g` numbers.

use hkc_core::numfmt::sig17;
use serde_json::{Number, Value};

/// A finite float as a 17-significant-digit JSON number; non-finite → `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let n: Number = serde_json::from_str(&sig17(x)).expect("sig17 output is a JSON number");
    Value::Number(n)
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn vector(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&c| num(c)).collect())
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(render(&num(1.0 / 6.0)), "0.16666666666666666\n");
        assert_eq!(render(&num(0.1)), "0.10000000000000001\n");
        assert_eq!(render(&num(2.0)), "2\n");
        assert_eq!(render(&num(f64::NAN)), "null\n");
        assert_eq!(render(&vector(&[0.5, 1e-7])), "[\n  0.5,\n  9.9999999999999995e-08\n]\n");
    }
}
