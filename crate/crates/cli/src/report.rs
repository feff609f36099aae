use std::io::Write;

use phank::precision::to_decimal;
use phank::BigReal;
use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Significant digits used for differences and error estimates.
const SMALL_DIGITS: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Serialize)]
pub struct Parameters {
    pub n: Vec<usize>,
    pub alpha: String,
    pub beta: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    /// Requested digits; `None` means the per-n policy.
    pub digits: Option<u32>,
    pub quad_order: Option<usize>,
    pub cheb_m: Option<usize>,
    pub heine: bool,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: String,
    pub parameters: Parameters,
    pub asymptotic_valid: bool,
    pub rows: Vec<Row>,
    pub elapsed_ms: u128,
}

/// One output row: ordered column name to value.
#[derive(Debug, Default, Serialize)]
#[serde(transparent)]
pub struct Row(Map<String, Value>);

impl Row {
    pub fn new() -> Self {
        Row::default()
    }

    pub fn int(mut self, key: &str, v: usize) -> Self {
        self.0.insert(key.into(), Value::from(v));
        self
    }

    pub fn flag(mut self, key: &str, v: bool) -> Self {
        self.0.insert(key.into(), Value::from(v));
        self
    }

    pub fn text(mut self, key: &str, v: impl Into<String>) -> Self {
        self.0.insert(key.into(), Value::String(v.into()));
        self
    }

    /// A value good to `digits` significant digits.
    pub fn big(self, key: &str, v: &BigReal, digits: u32) -> Self {
        self.text(key, to_decimal(v, digits))
    }

    /// A difference or error estimate, printed short.
    pub fn small(self, key: &str, v: &BigReal) -> Self {
        self.text(key, to_decimal(v, SMALL_DIGITS))
    }

    pub fn error(&self) -> Option<&str> {
        self.0.get("error").and_then(Value::as_str)
    }
}

impl RunReport {
    pub fn write(&self, format: Format, out: &mut impl Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)
            }
            Format::Csv => self.write_csv(out),
        }
    }

    fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "# schema_version: {}", self.schema_version)?;
        writeln!(out, "# tool_version: {}", self.tool_version)?;
        writeln!(out, "# command: {}", self.command)?;
        writeln!(out, "# asymptotic_valid: {}", self.asymptotic_valid)?;
        let mut columns: Vec<&String> = Vec::new();
        for row in &self.rows {
            for k in row.0.keys() {
                if !columns.contains(&k) {
                    columns.push(k);
                }
            }
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&columns)?;
        for row in &self.rows {
            let cells = columns.iter().map(|c| match row.0.get(*c) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) => s.clone(),
                Some(v) => v.to_string(),
            });
            w.write_record(cells)?;
        }
        w.flush()
    }
}
