//! Deterministic text formatting shared by every artifact writer.
//!
//! Floats are always written with 17 significant digits so that any `f64`
//! survives a write/parse round trip bit-for-bit, and two runs with the same
//! inputs produce byte-identical files.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Formats a finite float with 17 significant digits (scientific notation).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad float {s:?}: {e}")))
}

/// Parses complex literals like `0.7`, `-0.3i`, `0.5+0.2i` or `i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    s.trim()
        .parse::<Complex64>()
        .map_err(|e| Error::Parse(format!("bad complex number {s:?}: {e}")))
}

/// Minimal builder for JSON objects with a fixed key order.
pub(crate) struct JsonObject {
    buf: String,
    first: bool,
}

impl JsonObject {
    pub fn new() -> Self {
        Self {
            buf: String::from("{"),
            first: true,
        }
    }

    fn key(&mut self, key: &str) {
        if !self.first {
            self.buf.push(',');
        }
        self.first = false;
        let _ = write!(self.buf, "\"{key}\":");
    }

    pub fn raw(mut self, key: &str, value: &str) -> Self {
        self.key(key);
        self.buf.push_str(value);
        self
    }

    pub fn num(self, key: &str, value: f64) -> Self {
        self.raw(key, &fmt_f64(value))
    }

    pub fn int(self, key: &str, value: u64) -> Self {
        self.raw(key, &value.to_string())
    }

    pub fn string(self, key: &str, value: &str) -> Self {
        let quoted = serde_json::to_string(value).expect("strings always serialize");
        self.raw(key, &quoted)
    }

    pub fn finish(mut self) -> String {
        self.buf.push('}');
        self.buf
    }
}

pub(crate) fn json_array<I: IntoIterator<Item = String>>(items: I) -> String {
    let mut out = String::from("[");
    for (k, item) in items.into_iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&item);
    }
    out.push(']');
    out
}

pub(crate) fn json_int_array(values: &[u32]) -> String {
    json_array(values.iter().map(|v| v.to_string()))
}

pub(crate) fn json_complex(z: Complex64) -> String {
    format!("[{},{}]", fmt_f64(z.re), fmt_f64(z.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            0.0,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt_f64(x);
            assert_eq!(parse_f64(&s).unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("-0.3i").unwrap(), Complex64::new(0.0, -0.3));
        assert_eq!(
            parse_complex(" 0.5+0.2i").unwrap(),
            Complex64::new(0.5, 0.2)
        );
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn object_keys_in_insertion_order() {
        let s = JsonObject::new().int("b", 1).string("a", "x\"y").finish();
        assert_eq!(s, r#"{"b":1,"a":"x\"y"}"#);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"], "x\"y");
    }
}
