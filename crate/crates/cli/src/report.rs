//! Machine-readable experiment reports: one JSON document plus one CSV
//! per table, written with fixed iteration orders so identical inputs
//! reproduce identical bytes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// A checked claim: `pass` is a pure function of `observed`, `bound`,
/// and the direction.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub claim: String,
    pub direction: Direction,
    pub bound: f64,
    pub observed: f64,
    pub pass: bool,
}

impl Verdict {
    pub fn at_most(claim: impl Into<String>, observed: f64, bound: f64) -> Verdict {
        Verdict {
            claim: claim.into(),
            direction: Direction::AtMost,
            bound,
            observed,
            pass: observed <= bound,
        }
    }

    pub fn at_least(claim: impl Into<String>, observed: f64, bound: f64) -> Verdict {
        Verdict {
            claim: claim.into(),
            direction: Direction::AtLeast,
            bound,
            observed,
            pass: observed >= bound,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Table {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, values: Vec<Value>) {
        assert_eq!(values.len(), self.columns.len(), "row shape mismatch");
        self.rows.push(values);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    pub tables: Vec<Table>,
    pub verdicts: Vec<Verdict>,
    pub artifacts: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>) -> ExperimentReport {
        ExperimentReport {
            name: name.into(),
            parameters: BTreeMap::new(),
            tables: Vec::new(),
            verdicts: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// Writes `report.json` and one `<table>.csv` per table into the
    /// directory, recording the artifact names in the report itself.
    pub fn write(&mut self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir)?;
        self.artifacts.clear();
        for t in &self.tables {
            self.artifacts.push(format!("{}.csv", t.name));
        }
        self.artifacts.push("report.json".to_string());
        for t in &self.tables {
            let mut csv = String::new();
            csv.push_str(&t.columns.join(","));
            csv.push('\n');
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(csv_cell).collect();
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            std::fs::write(dir.join(format!("{}.csv", t.name)), csv)?;
        }
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        std::fs::write(dir.join("report.json"), json)?;
        Ok(())
    }

    /// One line per verdict, for terminal consumption.
    pub fn print_verdicts(&self) {
        for v in &self.verdicts {
            let op = match v.direction {
                Direction::AtMost => "<=",
                Direction::AtLeast => ">=",
            };
            println!(
                "[{}] {} (observed {:.6e} {} bound {:.6e})",
                if v.pass { "PASS" } else { "FAIL" },
                v.claim,
                v.observed,
                op,
                v.bound
            );
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => {
            // Table cells are identifiers and numbers; commas and quotes
            // are not expected, so quoting is minimal.
            if s.contains(',') || s.contains('"') {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        other => other.to_string(),
    }
}

pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}
