//! Flat `key = value` configuration files.
//!
//! Blank lines and text after `#` are ignored. Every key is optional and
//! falls back to its default; unknown or repeated keys are errors.

use std::collections::BTreeSet;

use vproc_core::resource::Calibration;
use vproc_core::vectorcore::{CoreConfig, DEFAULT_MAX_CYCLES};

use crate::CliError;

/// Everything a command can take from a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub core: CoreConfig,
    pub calibration: Calibration,
    pub max_cycles: u64,
    /// Synchronisation cost added to the tiled latency.
    pub barrier_cost: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            core: CoreConfig::default(),
            calibration: Calibration::default(),
            max_cycles: DEFAULT_MAX_CYCLES,
            barrier_cost: 1,
        }
    }
}

/// Every accepted key, in the order [`render`] writes them.
pub const KEYS: [&str; 24] = [
    "vec_len",
    "n_vregs",
    "n_sregs",
    "n_add",
    "n_mul",
    "n_div",
    "lat_add",
    "lat_mul",
    "lat_div",
    "issue_cost",
    "mem_port_width",
    "enable_converter",
    "lat_convert",
    "dmem_words",
    "clock_mhz",
    "c_add",
    "c_mul",
    "c_div",
    "c_convert",
    "base_vector",
    "base_seq",
    "c_tiled_barrier",
    "max_cycles",
    "barrier_cost",
];

fn num<T: std::str::FromStr>(value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("bad value '{value}'"))
}

fn real(value: &str) -> Result<f64, String> {
    let x: f64 = num(value)?;
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(format!("'{value}' must be a finite non-negative number"))
    }
}

fn set(cfg: &mut RunConfig, key: &str, value: &str) -> Result<(), String> {
    let c = &mut cfg.core;
    let cal = &mut cfg.calibration;
    match key {
        "vec_len" => c.vec_len = num(value)?,
        "n_vregs" => c.n_vregs = num(value)?,
        "n_sregs" => c.n_sregs = num(value)?,
        "n_add" => c.n_add = num(value)?,
        "n_mul" => c.n_mul = num(value)?,
        "n_div" => c.n_div = num(value)?,
        "lat_add" => c.lat_add = num(value)?,
        "lat_mul" => c.lat_mul = num(value)?,
        "lat_div" => c.lat_div = num(value)?,
        "issue_cost" => c.issue_cost = num(value)?,
        "mem_port_width" => {
            c.mem_port_width = if value == "full" { None } else { Some(num(value)?) };
        }
        "enable_converter" => c.enable_converter = num(value)?,
        "lat_convert" => c.lat_convert = num(value)?,
        "dmem_words" => c.dmem_words = num(value)?,
        "clock_mhz" => c.clock_mhz = real(value)?,
        "c_add" => cal.c_add = real(value)?,
        "c_mul" => cal.c_mul = real(value)?,
        "c_div" => cal.c_div = real(value)?,
        "c_convert" => cal.c_convert = real(value)?,
        "base_vector" => cal.base_vector = real(value)?,
        "base_seq" => cal.base_seq = real(value)?,
        "c_tiled_barrier" => cal.c_tiled_barrier = real(value)?,
        "max_cycles" => cfg.max_cycles = num(value)?,
        "barrier_cost" => cfg.barrier_cost = num(value)?,
        _ => return Err(format!("unknown key '{key}'")),
    }
    Ok(())
}

/// Parses config text on top of the defaults.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| CliError::Input(format!("config line {}: {msg}", i + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| err("expected 'key = value'".into()))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(err(format!("key '{key}' given twice")));
        }
        set(&mut cfg, key, value).map_err(err)?;
    }
    cfg.core.check().map_err(|e| CliError::Input(e.to_string()))?;
    cfg.calibration.check().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(cfg)
}

/// Writes every key; `parse(&render(c)) == c`.
pub fn render(cfg: &RunConfig) -> String {
    let c = &cfg.core;
    let cal = &cfg.calibration;
    let port = c.mem_port_width.map_or_else(|| "full".to_string(), |w| w.to_string());
    let values = [
        c.vec_len.to_string(),
        c.n_vregs.to_string(),
        c.n_sregs.to_string(),
        c.n_add.to_string(),
        c.n_mul.to_string(),
        c.n_div.to_string(),
        c.lat_add.to_string(),
        c.lat_mul.to_string(),
        c.lat_div.to_string(),
        c.issue_cost.to_string(),
        port,
        c.enable_converter.to_string(),
        c.lat_convert.to_string(),
        c.dmem_words.to_string(),
        c.clock_mhz.to_string(),
        cal.c_add.to_string(),
        cal.c_mul.to_string(),
        cal.c_div.to_string(),
        cal.c_convert.to_string(),
        cal.base_vector.to_string(),
        cal.base_seq.to_string(),
        cal.c_tiled_barrier.to_string(),
        cfg.max_cycles.to_string(),
        cfg.barrier_cost.to_string(),
    ];
    KEYS.iter().zip(values).map(|(k, v)| format!("{k} = {v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn render_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.core.n_div = 24;
        cfg.core.mem_port_width = Some(4);
        cfg.core.enable_converter = false;
        cfg.calibration.c_add = 123.5;
        cfg.barrier_cost = 3;
        assert_eq!(parse(&render(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn rejects_typos_repeats_and_bad_values() {
        let msg = |t: &str| parse(t).unwrap_err().to_string();
        assert!(msg("n_dvi = 3").contains("unknown key 'n_dvi'"));
        assert!(msg("n_div = 3\nn_div = 4").contains("line 2"));
        assert!(msg("n_div = three").contains("bad value"));
        assert!(msg("c_add = -1").contains("non-negative"));
        assert!(msg("vec_len").contains("key = value"));
        assert!(msg("vec_len = 0").contains("invalid core configuration"));
    }

    #[test]
    fn comments_and_spacing() {
        let cfg = parse("  n_div=24   # more dividers\nenable_converter = false").unwrap();
        assert_eq!(cfg.core.n_div, 24);
        assert!(!cfg.core.enable_converter);
    }
}
