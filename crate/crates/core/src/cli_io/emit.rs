//! CSV and JSON result files.
//!
//! Every result type is flattened into a [`Table`]; CSV and JSON are two
//! renderings of the same rows, so their record counts always agree.
//! Floating-point values carry 9 significant digits in both formats.

use std::path::Path;

use serde_json::{Map, Value};

use crate::cli_io::config::OutputFormat;
use crate::contours::{Intersection, LevelCurve, SweepGrid};
use crate::error::{Error, Result};
use crate::error_budget::PauliBudget;
use crate::merge_sim::EdgeFailureStats;
use crate::resource_states::AllocationMode;

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Field {
    fn opt_float(v: Option<f64>) -> Field {
        v.map_or(Field::Empty, Field::Float)
    }

    fn csv(&self) -> String {
        match self {
            Field::Float(x) => format_sig(*x),
            Field::Int(i) => i.to_string(),
            Field::Text(s) => s.clone(),
            Field::Bool(b) => u8::from(*b).to_string(),
            Field::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Float(x) => format_sig(*x)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or(Value::Null, Value::Number),
            Field::Int(i) => Value::from(*i),
            Field::Text(s) => Value::from(s.as_str()),
            Field::Bool(b) => Value::from(*b),
            Field::Empty => Value::Null,
        }
    }
}

/// Format with 9 significant digits, `%.9g` style.
pub fn format_sig(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(&self.headers)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Field::csv))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::Csv(csv::Error::from(e.into_error())))?;
        Ok(String::from_utf8(bytes).expect("fields are utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .headers
                    .iter()
                    .zip(row)
                    .map(|(h, f)| (h.to_string(), f.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        Ok(serde_json::to_string_pretty(&records)? + "\n")
    }
}

pub const SWEEP_COLUMNS: [&str; 12] = [
    "C",
    "N",
    "mode",
    "edge_failure_mean",
    "edge_failure_stderr",
    "loss_fraction",
    "pauli_total",
    "carving_term",
    "per_qubit_term",
    "gate_term",
    "trials",
    "seed",
];

fn sweep_row(
    c: f64,
    n: u32,
    mode: AllocationMode,
    stats: &EdgeFailureStats,
    pauli: &PauliBudget,
    seed: u64,
) -> Vec<Field> {
    vec![
        Field::Float(c),
        Field::Int(n as u64),
        Field::Text(mode.as_str().to_string()),
        Field::Float(stats.mean_failure_fraction),
        Field::Float(stats.std_error),
        Field::Float(stats.loss_fraction_mean),
        Field::Float(pauli.total),
        Field::Float(pauli.carving_term),
        Field::Float(pauli.per_qubit_term),
        Field::Float(pauli.gate_term),
        Field::Int(stats.trials),
        Field::Int(seed),
    ]
}

pub fn sweep_table(grid: &SweepGrid) -> Table {
    Table {
        headers: SWEEP_COLUMNS.to_vec(),
        rows: grid
            .cells
            .iter()
            .map(|cell| {
                sweep_row(
                    cell.c,
                    cell.n,
                    cell.mode,
                    &cell.edge_failure,
                    &cell.pauli,
                    grid.master_seed,
                )
            })
            .collect(),
    }
}

/// A single simulated point in sweep layout.
pub fn point_table(
    c: f64,
    n: u32,
    mode: AllocationMode,
    stats: &EdgeFailureStats,
    pauli: &PauliBudget,
    seed: u64,
) -> Table {
    Table {
        headers: SWEEP_COLUMNS.to_vec(),
        rows: vec![sweep_row(c, n, mode, stats, pauli, seed)],
    }
}

pub const CURVE_COLUMNS: [&str; 8] = [
    "kind",
    "target",
    "N",
    "N_ceil",
    "C",
    "C_half_width",
    "trials",
    "unreachable",
];

pub fn curves_table(curves: &[LevelCurve]) -> Table {
    let mut rows = Vec::new();
    for curve in curves {
        for p in &curve.points {
            rows.push(vec![
                Field::Text(curve.kind.label().to_string()),
                Field::Float(curve.target),
                Field::Float(p.n),
                p.n_ceil.map_or(Field::Empty, |n| Field::Int(n as u64)),
                Field::opt_float(p.c),
                Field::opt_float(p.c_half_width),
                Field::Int(p.trials),
                Field::Bool(p.unreachable),
            ]);
        }
    }
    Table {
        headers: CURVE_COLUMNS.to_vec(),
        rows,
    }
}

pub const INTERSECTION_COLUMNS: [&str; 10] = [
    "edge_target",
    "pauli_target",
    "epsilon_n",
    "N",
    "C_edge",
    "C_edge_half_width",
    "C_pauli",
    "C_required",
    "feasible",
    "recommended",
];

pub fn intersections_table(results: &[(f64, Intersection)]) -> Table {
    let mut rows = Vec::new();
    for (epsilon_n, ix) in results {
        let rec_n = ix.recommended.map(|r| r.n);
        for p in &ix.frontier {
            rows.push(vec![
                Field::Float(ix.edge_target),
                Field::Float(ix.pauli_target),
                Field::Float(*epsilon_n),
                Field::Int(p.n as u64),
                Field::opt_float(p.c_edge),
                Field::opt_float(p.c_edge_half_width),
                Field::opt_float(p.c_pauli),
                Field::opt_float(p.c_required),
                Field::Bool(p.feasible),
                Field::Bool(rec_n == Some(p.n)),
            ]);
        }
    }
    Table {
        headers: INTERSECTION_COLUMNS.to_vec(),
        rows,
    }
}

pub const BUDGET_COLUMNS: [&str; 10] = [
    "C",
    "N",
    "epsilon_n",
    "pauli_total",
    "carving_term",
    "per_qubit_term",
    "gate_term",
    "pauli_target",
    "max_feasible_n",
    "C_required",
];

pub fn budget_table(
    c: f64,
    n: u32,
    epsilon_n: f64,
    pauli: &PauliBudget,
    target: f64,
    max_n: Option<u32>,
    c_required: Option<f64>,
) -> Table {
    Table {
        headers: BUDGET_COLUMNS.to_vec(),
        rows: vec![vec![
            Field::Float(c),
            Field::Int(n as u64),
            Field::Float(epsilon_n),
            Field::Float(pauli.total),
            Field::Float(pauli.carving_term),
            Field::Float(pauli.per_qubit_term),
            Field::Float(pauli.gate_term),
            Field::Float(target),
            max_n.map_or(Field::Empty, |m| Field::Int(m as u64)),
            Field::opt_float(c_required),
        ]],
    }
}

/// Write `table` to `path` in `format`. Output always ends with a newline.
pub fn emit_results(table: &Table, format: OutputFormat, path: &Path) -> Result<()> {
    let text = table.render(format)?;
    write_text(path, &text)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
