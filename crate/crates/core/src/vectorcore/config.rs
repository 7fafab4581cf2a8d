use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::isa::OpClass;

/// Compile-time parameters of one vector core.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreConfig {
    /// Lanes per vector register (W).
    pub vec_len: usize,
    /// Vector register bank depth.
    pub n_vregs: usize,
    pub n_sregs: usize,
    pub n_add: usize,
    pub n_mul: usize,
    pub n_div: usize,
    /// Cycles per wave for the combinational-registered adder.
    pub lat_add: u64,
    pub lat_mul: u64,
    /// Cycles per element on a (non-pipelined) sequential divider.
    pub lat_div: u64,
    /// Fetch + decode cycles charged to every instruction.
    pub issue_cost: u64,
    /// Lanes moved per memory wave; `None` means the full vector width.
    pub mem_port_width: Option<usize>,
    pub enable_converter: bool,
    pub lat_convert: u64,
    pub dmem_words: usize,
    /// Only used by throughput projections.
    pub clock_mhz: f64,
}

impl Default for CoreConfig {
    fn default() -> Self {
        Self {
            vec_len: 24,
            n_vregs: 16,
            n_sregs: 16,
            n_add: 8,
            n_mul: 8,
            n_div: 8,
            lat_add: 1,
            lat_mul: 1,
            lat_div: 64,
            issue_cost: 2,
            mem_port_width: None,
            enable_converter: true,
            lat_convert: 2,
            dmem_words: 4096,
            clock_mhz: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid core configuration: {0}")]
pub struct ConfigError(pub String);

/// Functional-unit counts `(n_add, n_mul, n_div)`, written `A-M-D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FuMix {
    pub add: usize,
    pub mul: usize,
    pub div: usize,
}

impl FuMix {
    pub const fn new(add: usize, mul: usize, div: usize) -> Self {
        Self { add, mul, div }
    }

    pub const fn symmetric(n: usize) -> Self {
        Self::new(n, n, n)
    }
}

impl fmt::Display for FuMix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.add, self.mul, self.div)
    }
}

impl std::str::FromStr for FuMix {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.trim().split('-').collect();
        if parts.len() != 3 {
            return Err(format!("expected A-M-D, got '{s}'"));
        }
        let n = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad unit count '{t}' in '{s}'"));
        Ok(Self::new(n(parts[0])?, n(parts[1])?, n(parts[2])?))
    }
}

impl CoreConfig {
    pub fn port_width(&self) -> usize {
        self.mem_port_width.unwrap_or(self.vec_len)
    }

    pub fn fu_mix(&self) -> FuMix {
        FuMix::new(self.n_add, self.n_mul, self.n_div)
    }

    pub fn with_mix(&self, mix: FuMix) -> Self {
        Self { n_add: mix.add, n_mul: mix.mul, n_div: mix.div, ..self.clone() }
    }

    /// Units available to a class. Memory counts port lanes; control and
    /// conversion are single units.
    pub fn units(&self, class: OpClass) -> usize {
        match class {
            OpClass::AddClass => self.n_add,
            OpClass::MulClass => self.n_mul,
            OpClass::DivClass => self.n_div,
            OpClass::Mem => self.port_width(),
            OpClass::Control => 1,
            OpClass::Convert => usize::from(self.enable_converter),
        }
    }

    /// Per-element (or per-wave) latency of a class's functional unit.
    pub fn class_latency(&self, class: OpClass) -> u64 {
        match class {
            OpClass::AddClass => self.lat_add,
            OpClass::MulClass => self.lat_mul,
            OpClass::DivClass => self.lat_div,
            OpClass::Convert => self.lat_convert,
            OpClass::Mem => 1,
            OpClass::Control => 0,
        }
    }

    /// Checks structural parameters that every program relies on. Unit
    /// counts are checked per program by [`crate::isa::validate`].
    pub fn check(&self) -> Result<(), ConfigError> {
        let positive = [
            ("vec_len", self.vec_len),
            ("n_vregs", self.n_vregs),
            ("n_sregs", self.n_sregs),
            ("mem_port_width", self.port_width()),
            ("dmem_words", self.dmem_words),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(ConfigError(format!("{name} must be at least 1")));
            }
        }
        if self.n_vregs > u16::MAX as usize || self.n_sregs > u16::MAX as usize {
            return Err(ConfigError("register bank deeper than 65535".into()));
        }
        if !(self.clock_mhz.is_finite() && self.clock_mhz > 0.0) {
            return Err(ConfigError("clock_mhz must be a positive real".into()));
        }
        Ok(())
    }
}
