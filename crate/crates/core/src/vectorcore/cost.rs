//! Cycle accounting: the closed-form per-instruction cost and the
//! sequencing wrapper that the simulator actually steps through.

use crate::isa::{Form, Instruction, OpClass};

use super::CoreConfig;

/// Scheduling rounds needed to push `elements` through `units` units:
/// `ceil(elements / units)`.
pub fn waves(elements: usize, units: usize) -> usize {
    assert!(elements >= 1 && units >= 1, "waves needs at least one element and one unit");
    elements.div_ceil(units)
}

/// Closed-form cost of one instruction on `cfg`. Assumes the instruction
/// validated against `cfg`.
pub fn instr_cost(ins: &Instruction, cfg: &CoreConfig) -> u64 {
    let issue = cfg.issue_cost;
    let class = ins.class();
    let vector = ins.opcode.is_vector();
    let w = cfg.vec_len;
    match class {
        OpClass::Control => issue,
        OpClass::Convert => issue + cfg.lat_convert,
        OpClass::Mem if vector => issue + waves(w, cfg.port_width()) as u64,
        OpClass::Mem => issue + 1,
        OpClass::AddClass | OpClass::MulClass | OpClass::DivClass => {
            let lat = cfg.class_latency(class);
            if vector {
                issue + waves(w, cfg.units(class)) as u64 * lat
            } else {
                issue + lat
            }
        }
    }
}

/// Outcome of sequencing one operation over a bank of identical,
/// non-pipelined units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveSchedule {
    /// Cycle at which the last element completes.
    pub makespan: u64,
    /// Busy cycles per unit.
    pub unit_busy: Vec<u64>,
}

impl WaveSchedule {
    /// Dispatches elements in lane order, each to the unit that frees up
    /// first (lowest index on ties). A unit holds an element for
    /// `latency` cycles.
    pub fn dispatch(elements: usize, units: usize, latency: u64) -> Self {
        assert!(units >= 1, "cannot schedule on zero units");
        let mut free_at = vec![0u64; units];
        let mut unit_busy = vec![0u64; units];
        let mut makespan = 0;
        for _ in 0..elements {
            let (unit, start) =
                free_at.iter().copied().enumerate().min_by_key(|&(i, t)| (t, i)).expect("at least one unit");
            let done = start + latency;
            free_at[unit] = done;
            unit_busy[unit] += latency;
            makespan = makespan.max(done);
        }
        Self { makespan, unit_busy }
    }

    pub fn total_busy(&self) -> u64 {
        self.unit_busy.iter().sum()
    }
}

/// Execution timing of one instruction as seen by the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timing {
    pub cycles: u64,
    /// Unit-cycles consumed in the instruction's own class (excluding the
    /// controller's issue cycles).
    pub class_busy: u64,
}

/// Times an instruction by running the sequencing wrapper for its class.
pub fn timing(ins: &Instruction, cfg: &CoreConfig) -> Timing {
    let class = ins.class();
    let (elements, units, latency) = match (class, ins.opcode.form()) {
        (OpClass::Control, _) => (0, 1, 0),
        (OpClass::Mem, Form::VdAddr | Form::AddrVa) => (cfg.vec_len, cfg.port_width(), 1),
        (OpClass::Mem, _) => (1, 1, 1),
        (OpClass::Convert, _) => (1, 1, cfg.lat_convert),
        (c, _) if ins.opcode.is_vector() => (cfg.vec_len, cfg.units(c), cfg.class_latency(c)),
        (c, _) => (1, 1, cfg.class_latency(c)),
    };
    let sched = WaveSchedule::dispatch(elements, units.max(1), latency);
    Timing { cycles: cfg.issue_cost + sched.makespan, class_busy: sched.total_busy() }
}
