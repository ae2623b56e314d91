//! JSON output.
//!
//! Every document is `{"schema": "codid.v1", "command", "config", "warnings",
//! "result"}`. Floats are written with 17 significant digits so that outputs
//! round-trip exactly and are byte-stable.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use serde_json::{Map, Value};

use codid_core::simplex::{Composition, QuantityVector};

pub const SCHEMA: &str = "codid.v1";

/// 17 significant digits in scientific notation with a signed exponent
/// (`1.0000000000000000e+0`); `NaN`/`inf` spelled out for non-finite values.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.16e}");
    match s.split_once('e') {
        Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
        _ => s,
    }
}

/// A float value; `null` if not finite.
pub fn num(x: f64) -> Value {
    Value::from(x)
}

/// Any layout, with every float through [`fmt_f64`].
struct Sig17<F>(F);

impl<F: Formatter> Formatter for Sig17<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, x: f64) -> io::Result<()> {
        w.write_all(fmt_f64(x).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, x: f32) -> io::Result<()> {
        self.write_f64(w, x as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Compact or pretty JSON text with 17-digit floats.
pub fn to_string(v: &impl Serialize, pretty: bool) -> String {
    let mut buf = Vec::new();
    if pretty {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
        v.serialize(&mut ser).expect("values serialize");
    } else {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(CompactFormatter));
        v.serialize(&mut ser).expect("values serialize");
    }
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn intervals(xs: &[(f64, f64)]) -> Value {
    Value::Array(xs.iter().map(|&(a, b)| Value::Array(vec![num(a), num(b)])).collect())
}

pub fn quantities(q: &QuantityVector) -> Value {
    nums(q.values())
}

pub fn shares(pi: &Composition) -> Value {
    nums(pi.shares())
}

pub fn document(command: &str, config: Value, warnings: &[String], result: Value) -> Value {
    let mut doc = Map::new();
    doc.insert("schema".into(), SCHEMA.into());
    doc.insert("command".into(), command.into());
    doc.insert("config".into(), config);
    doc.insert("warnings".into(), warnings.into());
    doc.insert("result".into(), result);
    Value::Object(doc)
}

pub fn to_text(doc: &Value) -> String {
    let mut s = to_string(doc, true);
    s.push('\n');
    s
}

/// Flattens a document's `result` into `path,value` CSV rows.
pub fn flatten_to_csv(result: &Value) -> String {
    fn walk(v: &Value, path: &str, out: &mut Vec<(String, String)>) {
        let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, x)| walk(x, &join(k), out)),
            Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| walk(x, &format!("{path}[{i}]"), out)),
            Value::String(s) => out.push((path.to_string(), s.clone())),
            Value::Null => out.push((path.to_string(), String::new())),
            Value::Number(n) if n.is_f64() => out.push((path.to_string(), fmt_f64(n.as_f64().unwrap_or(f64::NAN)))),
            other => out.push((path.to_string(), other.to_string())),
        }
    }
    let mut rows = Vec::new();
    walk(result, "", &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["path", "value"]).expect("in-memory write");
    for (p, v) in rows {
        w.write_record([p, v]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_verbatim() {
        let v = nums(&[0.1, 1.0, -2.5e-300]);
        let text = to_string(&v, false);
        assert_eq!(text, "[1.0000000000000001e-1,1.0000000000000000e+0,-2.5000000000000000e-300]");
        assert_eq!(num(f64::NAN), Value::Null);
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, [0.1, 1.0, -2.5e-300]);
    }

    #[test]
    fn flattening() {
        let v = serde_json::json!({"a": [num(1.0), "x"], "b": {"c": Value::Null}});
        assert_eq!(flatten_to_csv(&v), "path,value\na[0],1.0000000000000000e+0\na[1],x\nb.c,\n");
    }
}
