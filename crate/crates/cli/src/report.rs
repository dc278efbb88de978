//! Deterministic, locale-independent output: numbers with 15 significant
//! digits, small hand-assembled JSON documents, CSV rows, and atomic file
//! writes (never leave a partial artifact behind).

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

/// A float with 15 significant digits, plain decimal notation for moderate
/// exponents and scientific otherwise. Parsing the output and re-formatting
/// it reproduces the same string (an f64 round-trips through 15 digits).
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // The decimal exponent, exactly as the scientific formatter sees it.
    let sci = format!("{:e}", x.abs());
    let exponent: i32 = sci
        .split('e')
        .nth(1)
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    if (-5..15).contains(&exponent) {
        let decimals = (14 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.14e}")
    }
}

/// JSON string literal with escaping.
pub fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialise")
}

/// JSON array of strings.
pub fn json_str_array<S: AsRef<str>>(items: &[S]) -> String {
    let mut out = String::from("[");
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&json_str(item.as_ref()));
    }
    out.push(']');
    out
}

/// Builder for small one-level JSON objects with deterministic field order.
#[derive(Default)]
pub struct JsonObject {
    body: String,
}

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    fn push_key(&mut self, key: &str) {
        if !self.body.is_empty() {
            self.body.push(',');
        }
        let _ = write!(self.body, "{}:", json_str(key));
    }

    pub fn field_num(mut self, key: &str, value: f64) -> Self {
        self.push_key(key);
        self.body.push_str(&fmt_f64(value));
        self
    }

    pub fn field_int(mut self, key: &str, value: i64) -> Self {
        self.push_key(key);
        let _ = write!(self.body, "{value}");
        self
    }

    pub fn field_str(mut self, key: &str, value: &str) -> Self {
        self.push_key(key);
        self.body.push_str(&json_str(value));
        self
    }

    pub fn field_bool(mut self, key: &str, value: bool) -> Self {
        self.push_key(key);
        self.body.push_str(if value { "true" } else { "false" });
        self
    }

    pub fn field_raw(mut self, key: &str, raw: &str) -> Self {
        self.push_key(key);
        self.body.push_str(raw);
        self
    }

    pub fn field_opt_num(self, key: &str, value: Option<f64>) -> Self {
        match value {
            Some(v) => self.field_num(key, v),
            None => self.field_raw(key, "null"),
        }
    }

    pub fn finish(self) -> String {
        format!("{{{}}}", self.body)
    }
}

/// Writes through a sibling temp file and renames into place, so partial
/// output files are never observed.
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".into(),
    });
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(content.as_bytes())?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Sends a finished artifact to a file (atomically) or stdout.
pub fn emit(out: Option<&Path>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => write_atomic(path, content),
        None => {
            print!("{content}");
            std::io::stdout().flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_fifteen_significant_digits() {
        assert_eq!(fmt_f64(0.6875), "0.687500000000000");
        assert_eq!(fmt_f64(1.0), "1.00000000000000");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(4.0 / 27.0), "0.148148148148148");
        assert_eq!(fmt_f64(-0.2), "-0.200000000000000");
        assert_eq!(fmt_f64(1000.0), "1000.00000000000");
        assert_eq!(fmt_f64(1.0e-9), "1.00000000000000e-9");
    }

    #[test]
    fn formatting_round_trips() {
        for &x in &[
            0.44,
            0.6875,
            (3.0 - 5.0f64.sqrt()) / 2.0,
            1.0 / (2.0 * std::f64::consts::E),
            27.0 / 256.0,
            123456.789,
            -1.5e-3,
        ] {
            let s = fmt_f64(x);
            let parsed: f64 = s.parse().unwrap();
            assert_eq!(fmt_f64(parsed), s, "round trip for {x}");
        }
    }

    #[test]
    fn json_object_shape() {
        let doc = JsonObject::new()
            .field_str("label", "ZERO")
            .field_raw("witness", &json_str_array(&["a", "b"]))
            .field_num("value", -0.2)
            .finish();
        assert_eq!(
            doc,
            r#"{"label":"ZERO","witness":["a","b"],"value":-0.200000000000000}"#
        );
        let parsed: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(parsed["label"], "ZERO");
    }
}
