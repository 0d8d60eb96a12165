//! Canonical report tree. Maps are key-sorted and floats print with 17
//! significant digits, so a fixed manifest and tool version always produce
//! byte-identical structured output; golden-file comparisons can be exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::classify::{ConstancyStats, FlagRecord};
use crate::verify::{IdentityEntry, IdentityReport, Outcome};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<Value>),
    Map(BTreeMap<String, Value>),
}

impl Value {
    pub fn map() -> MapBuilder {
        MapBuilder(BTreeMap::new())
    }

    pub fn complex(c: Complex64) -> Value {
        Value::map().field("re", c.re).field("im", c.im).build()
    }

    pub fn point(p: [f64; 3]) -> Value {
        Value::List(p.iter().map(|&v| Value::Float(v)).collect())
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        match self {
            Value::Map(m) => m.get(key),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(f) => Some(*f),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Canonical JSON: sorted keys (guaranteed by the BTreeMap), floats in
    /// `{:.16e}` form (17 significant digits).
    pub fn to_canonical_json(&self) -> String {
        let mut out = String::new();
        self.write_json(&mut out);
        out
    }

    fn write_json(&self, out: &mut String) {
        match self {
            Value::Null => out.push_str("null"),
            Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Value::Int(i) => {
                let _ = write!(out, "{}", i);
            }
            Value::Float(f) => {
                let _ = write!(out, "{:.16e}", f);
            }
            Value::Str(s) => write_json_string(out, s),
            Value::List(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write_json(out);
                }
                out.push(']');
            }
            Value::Map(map) => {
                out.push('{');
                for (i, (k, v)) in map.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_json_string(out, k);
                    out.push(':');
                    v.write_json(out);
                }
                out.push('}');
            }
        }
    }
}

fn write_json_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

pub struct MapBuilder(BTreeMap<String, Value>);

impl MapBuilder {
    pub fn field(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn build(self) -> Value {
        Value::Map(self.0)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Value {
        Value::Bool(b)
    }
}
impl From<i64> for Value {
    fn from(i: i64) -> Value {
        Value::Int(i)
    }
}
impl From<usize> for Value {
    fn from(i: usize) -> Value {
        Value::Int(i as i64)
    }
}
impl From<f64> for Value {
    fn from(f: f64) -> Value {
        Value::Float(f)
    }
}
impl From<&str> for Value {
    fn from(s: &str) -> Value {
        Value::Str(s.to_string())
    }
}
impl From<String> for Value {
    fn from(s: String) -> Value {
        Value::Str(s)
    }
}
impl From<Vec<Value>> for Value {
    fn from(v: Vec<Value>) -> Value {
        Value::List(v)
    }
}

impl From<&FlagRecord> for Value {
    fn from(f: &FlagRecord) -> Value {
        Value::map()
            .field("holds", f.holds)
            .field("max_violation", f.max_violation)
            .field("witness", Value::point(f.witness))
            .build()
    }
}

impl From<&ConstancyStats> for Value {
    fn from(c: &ConstancyStats) -> Value {
        Value::map()
            .field("constant", c.constant)
            .field("mean", Value::complex(c.mean))
            .field("max_deviation", c.max_deviation)
            .field("samples", c.samples)
            .build()
    }
}

impl From<&IdentityEntry> for Value {
    fn from(e: &IdentityEntry) -> Value {
        match &e.outcome {
            Outcome::Checked {
                max_residual,
                worst_point,
                pass,
            } => Value::map()
                .field("status", "checked")
                .field("max_residual", *max_residual)
                .field("worst_point", Value::point(*worst_point))
                .field("pass", *pass)
                .build(),
            Outcome::Skipped { reason } => Value::map()
                .field("status", "skipped")
                .field("reason", reason.as_str())
                .build(),
        }
    }
}

impl From<&IdentityReport> for Value {
    fn from(r: &IdentityReport) -> Value {
        let mut map = Value::map().field("tol", r.tol).field("all_pass", r.all_pass());
        let mut ids = BTreeMap::new();
        for e in &r.entries {
            ids.insert(e.id.clone(), Value::from(e));
        }
        map = map.field("identities", Value::Map(ids));
        map.build()
    }
}
