//! Tabular experiment reports with provenance, rendered as CSV or JSON.
//!
//! CSV output starts with one `#` provenance line naming the experiment,
//! seed and configuration, then a header row. Lines end in LF. Nothing in a
//! report depends on time or thread count, so identical configurations give
//! byte-identical files.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::Result;

/// Rounds `x` to `places` decimals (half away from zero) and prints it.
pub fn decimal_string(x: &BigRational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = x.abs() * BigRational::from_integer(scale.clone());
    let rounded = (scaled + BigRational::new(1.into(), 2.into())).floor().to_integer();
    let (int, frac) = rounded.div_rem(&scale);
    let sign = if x.is_negative() && !rounded.is_zero() { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = places)
}

/// Exact fraction as `p/q` (or `p` when integral).
pub fn fraction_string(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Serializes a rational as `{"decimal": "...", "exact": "p/q"}`.
pub fn ser_rational<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut m = Map::new();
    m.insert("decimal".into(), Value::String(decimal_string(x, 12)));
    m.insert("exact".into(), Value::String(fraction_string(x)));
    Value::Object(m).serialize(s)
}

/// A named pass/fail check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Rows of JSON scalars under named columns.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One experiment's output table with the configuration that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    /// Canonical configuration (no output paths, formats or thread counts).
    pub config: Value,
    #[serde(flatten)]
    pub table: Table,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>, seed: u64, config: Value, table: Table) -> Self {
        Self {
            experiment: experiment.into(),
            seed,
            config,
            table,
        }
    }

    pub fn provenance(&self) -> String {
        format!(
            "# experiment={} seed={} config={}",
            self.experiment, self.seed, self.config
        )
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.table.columns)?;
        for row in &self.table.rows {
            w.write_record(row.iter().map(cell))?;
        }
        let body = w
            .into_inner()
            .map_err(|e| crate::error::Error::Serde(e.to_string()))?;
        Ok(format!(
            "{}\n{}",
            self.provenance(),
            String::from_utf8(body).expect("csv output is utf-8")
        ))
    }

    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<Value> = self
            .table
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.table
                        .columns
                        .iter()
                        .cloned()
                        .zip(r.iter().cloned())
                        .collect(),
                )
            })
            .collect();
        let doc = serde_json::json!({
            "experiment": self.experiment,
            "seed": self.seed,
            "config": self.config,
            "columns": self.table.columns,
            "rows": rows,
        });
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }
}
