//! Report structure shared by every command, plus its JSON, text and CSV renderings.

use std::fmt::Write as _;

use lattice_collatz::{CollatzMap, DensityEstimate, EstimateKind};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

/// Integers that fit in 64 bits become JSON numbers, larger ones decimal strings.
pub fn big_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn point_json(coords: &[BigInt]) -> Value {
    Value::Array(coords.iter().map(big_json).collect())
}

/// `d`, rank and the sorted multiplier multiset.
pub fn map_digest(map: &CollatzMap) -> Value {
    let mut ms: Vec<BigInt> = map.multipliers().to_vec();
    ms.sort();
    json!({
        "d": map.modulus(),
        "rank": map.rank(),
        "multipliers": ms.iter().map(big_json).collect::<Vec<_>>(),
    })
}

pub fn estimate_json(est: &DensityEstimate) -> Value {
    json!({
        "value": est.value,
        "exact": est.exact.as_ref().map(|q| q.to_string()),
        "kind": match est.kind {
            EstimateKind::Exact => "exact",
            EstimateKind::MonteCarlo => "monte-carlo",
        },
        "ci_halfwidth": est.ci_halfwidth,
        "samples": est.samples,
        "seed": est.seed,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = line.iter().map(|c| quote(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub args: Vec<String>,
    pub map: Option<Value>,
    pub results: Value,
    pub seed: Option<u64>,
    pub timing_ms: Option<f64>,
    /// Plot series or geometry export for commands that have one.
    pub table: Option<Table>,
}

impl Report {
    pub fn to_value(&self) -> Value {
        let mut top = Map::new();
        top.insert("command".into(), json!({ "name": self.command, "args": self.args }));
        top.insert("map".into(), self.map.clone().unwrap_or(Value::Null));
        top.insert("results".into(), self.results.clone());
        top.insert("seed".into(), json!(self.seed));
        if let Some(ms) = self.timing_ms {
            top.insert("timing_ms".into(), json!(ms));
        }
        Value::Object(top)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        write_text(&mut out, &self.to_value(), 0);
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|i| !i.is_array() && !i.is_object()) => Some(format!(
            "[{}]",
            items.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")
        )),
        _ => None,
    }
}

fn write_text(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                match scalar(item) {
                    Some(s) => writeln!(out, "{pad}{k}: {s}").unwrap(),
                    None => {
                        writeln!(out, "{pad}{k}:").unwrap();
                        write_text(out, item, indent + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match scalar(item) {
                    Some(s) => writeln!(out, "{pad}- {s}").unwrap(),
                    None => {
                        writeln!(out, "{pad}-").unwrap();
                        write_text(out, item, indent + 1);
                    }
                }
            }
        }
        other => writeln!(out, "{pad}{}", scalar(other).unwrap_or_default()).unwrap(),
    }
}
