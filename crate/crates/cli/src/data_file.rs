//! CSV data files: a header row of column names, then one row per lane.
//!
//! Column names decide where values land in data memory:
//! * a kernel input name (`a` .. `h`, `p`, `q`) loads at its packed
//!   kernel region, `index * vec_len`;
//! * `@N` loads at absolute word address `N`;
//! * `s_k` holds the kernel's scalar constant in its first row and is not
//!   loaded into memory.
//!
//! Cells are decimal reals or `0x`-prefixed raw Q32.32 words. A column may
//! end early by leaving its remaining cells empty.

use vproc_core::isa::{parse_value, DataInit};
use vproc_core::kernelbench::{KernelInputs, KernelLayout, INPUT_NAMES, SCALAR_NAME};
use vproc_core::vectorcore::CoreConfig;
use vproc_core::Fixed64;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<Fixed64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataTable {
    pub columns: Vec<Column>,
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

impl DataTable {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .flexible(true)
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| input(format!("data header: {e}")))?.clone();
        let mut columns: Vec<Column> =
            headers.iter().map(|h| Column { name: h.to_string(), values: Vec::new() }).collect();
        for (i, name) in headers.iter().enumerate() {
            if name.is_empty() || headers.iter().take(i).any(|h| h == name) {
                return Err(input(format!("data header: empty or repeated column '{name}'")));
            }
        }
        let mut ended = vec![false; columns.len()];
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| input(format!("data row {}: {e}", row + 1)))?;
            if record.len() > columns.len() {
                return Err(input(format!("data row {}: more cells than columns", row + 1)));
            }
            for (c, cell) in record.iter().enumerate() {
                let col = &mut columns[c];
                if cell.is_empty() {
                    ended[c] = true;
                    continue;
                }
                if ended[c] {
                    return Err(input(format!("data column '{}': value after an empty cell", col.name)));
                }
                let v =
                    parse_value(cell).map_err(|e| input(format!("data column '{}' row {}: {e}", col.name, row + 1)))?;
                col.values.push(v);
            }
        }
        Ok(Self { columns })
    }

    pub fn column(&self, name: &str) -> Option<&[Fixed64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    fn s_k(&self) -> Result<Option<Fixed64>, CliError> {
        match self.column(SCALAR_NAME) {
            None => Ok(None),
            Some([v]) => Ok(Some(*v)),
            Some(_) => Err(input(format!("column '{SCALAR_NAME}' must hold exactly one value"))),
        }
    }

    /// Memory initializers for a core of width `cfg.vec_len`.
    pub fn data_init(&self, cfg: &CoreConfig) -> Result<Vec<DataInit>, CliError> {
        self.s_k()?;
        let layout = KernelLayout::packed(cfg.vec_len);
        let mut out = Vec::new();
        for col in &self.columns {
            if col.name == SCALAR_NAME {
                continue;
            }
            let addr = if let Some(at) = col.name.strip_prefix('@') {
                at.parse::<u32>().map_err(|_| input(format!("bad address column '{}'", col.name)))?
            } else if let Some(base) = layout.input(&col.name) {
                if col.values.len() > cfg.vec_len {
                    return Err(input(format!(
                        "column '{}' has {} values but vec_len is {}",
                        col.name,
                        col.values.len(),
                        cfg.vec_len
                    )));
                }
                base
            } else {
                return Err(input(format!("unknown data column '{}'", col.name)));
            };
            out.push(DataInit::new(addr, col.values.clone()));
        }
        Ok(out)
    }

    /// All ten kernel inputs plus `s_k`, each of length `vec_len`.
    pub fn kernel_inputs(&self, vec_len: usize) -> Result<KernelInputs, CliError> {
        let mut vectors = Vec::with_capacity(INPUT_NAMES.len());
        for name in INPUT_NAMES {
            let col = self.column(name).ok_or_else(|| input(format!("data lacks kernel column '{name}'")))?;
            if col.len() != vec_len {
                return Err(input(format!("column '{name}' has {} values, expected {vec_len}", col.len())));
            }
            vectors.push(col.iter().map(|v| v.to_real()).collect());
        }
        let s_k = self.s_k()?.ok_or_else(|| input(format!("data lacks column '{SCALAR_NAME}'")))?;
        Ok(KernelInputs { vectors, s_k: s_k.to_real() })
    }
}

fn write_rows(header: &[&str], columns: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
    for r in 0..rows {
        let row: Vec<&str> = columns.iter().map(|c| c.get(r).map_or("", String::as_str)).collect();
        w.write_record(&row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

/// Kernel inputs in data-file form.
pub fn render_kernel_inputs(inputs: &KernelInputs) -> String {
    let mut header: Vec<&str> = INPUT_NAMES.to_vec();
    header.push(SCALAR_NAME);
    let mut columns: Vec<Vec<String>> = inputs.vectors.iter().map(|v| v.iter().map(f64::to_string).collect()).collect();
    columns.push(vec![inputs.s_k.to_string()]);
    write_rows(&header, &columns)
}

/// A single `out` column of reals.
pub fn render_outputs(values: &[f64]) -> String {
    write_rows(&["out"], &[values.iter().map(f64::to_string).collect()])
}
