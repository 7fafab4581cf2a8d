//! Cycle-accurate simulator of the configurable vector core.
//!
//! Single-issue and in-order: an instruction starts once its predecessor
//! has finished. Vector operations over `W` lanes are sequenced across the
//! `K` units of their class in `ceil(W / K)` waves.

mod config;
mod cost;

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixedpoint::ArithFlags;
use crate::isa::{validate, DataInit, Diagnostic, Instruction, OpClass, Opcode, Program};
use crate::Fixed64;

pub use config::{ConfigError, CoreConfig, FuMix};
pub use cost::{instr_cost, timing, waves, Timing, WaveSchedule};

/// Result of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecReport {
    pub total_cycles: u64,
    pub instr_count: u64,
    pub busy_cycles: BTreeMap<OpClass, u64>,
    pub utilization: BTreeMap<OpClass, f64>,
    pub flags: ArithFlags,
    pub halted: bool,
    /// First address of `memory`.
    pub observe_start: usize,
    pub memory: Vec<Fixed64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("program does not validate: {}", join(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("bad simulation input: {0}")]
    Input(String),
    #[error("no HALT within {max_cycles} cycles")]
    NonTermination { max_cycles: u64, report: Box<ExecReport> },
    #[error("execution fault at instruction {index}: {message}")]
    Fault { index: usize, message: String, report: Box<ExecReport> },
}

fn join(diags: &[Diagnostic]) -> String {
    diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl SimError {
    /// Partial report for errors raised mid-run.
    pub fn report(&self) -> Option<&ExecReport> {
        match self {
            SimError::NonTermination { report, .. } | SimError::Fault { report, .. } => Some(report),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum StepFault {
    PcOutOfRange,
    Memory { addr: usize, len: usize },
}

impl StepFault {
    fn message(&self) -> String {
        match self {
            StepFault::PcOutOfRange => "program counter ran past the last instruction".into(),
            StepFault::Memory { addr, len } => format!("memory access [{addr}..{}) out of range", addr + len),
        }
    }
}

/// Architectural state plus the cycle and activity counters.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineState {
    cfg: CoreConfig,
    sregs: Vec<Fixed64>,
    /// `n_vregs * vec_len` lanes, register-major.
    vregs: Vec<Fixed64>,
    pub dmem: Vec<Fixed64>,
    pub pc: usize,
    pub flags: ArithFlags,
    pub cycles: u64,
    pub instr_count: u64,
    busy: BTreeMap<OpClass, u64>,
    pub halted: bool,
}

/// What a single step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepEvent {
    pub index: usize,
    pub cycles: u64,
}

impl MachineState {
    /// Zeroed registers, memory and counters.
    pub fn reset(cfg: &CoreConfig) -> Self {
        Self {
            cfg: cfg.clone(),
            sregs: vec![Fixed64::ZERO; cfg.n_sregs],
            vregs: vec![Fixed64::ZERO; cfg.n_vregs * cfg.vec_len],
            dmem: vec![Fixed64::ZERO; cfg.dmem_words],
            pc: 0,
            flags: ArithFlags::default(),
            cycles: 0,
            instr_count: 0,
            busy: OpClass::ALL.iter().map(|&c| (c, 0)).collect(),
            halted: false,
        }
    }

    pub fn config(&self) -> &CoreConfig {
        &self.cfg
    }

    pub fn sreg(&self, r: usize) -> Fixed64 {
        if r == 0 {
            Fixed64::ZERO
        } else {
            self.sregs[r]
        }
    }

    pub fn set_sreg(&mut self, r: usize, v: Fixed64) {
        if r != 0 {
            self.sregs[r] = v;
        }
    }

    pub fn vreg(&self, r: usize) -> &[Fixed64] {
        let w = self.cfg.vec_len;
        &self.vregs[r * w..(r + 1) * w]
    }

    fn vreg_mut(&mut self, r: usize) -> &mut [Fixed64] {
        let w = self.cfg.vec_len;
        &mut self.vregs[r * w..(r + 1) * w]
    }

    pub fn load(&mut self, init: &DataInit) -> Result<(), String> {
        let start = init.addr as usize;
        let slot = self
            .dmem
            .get_mut(start..init.end())
            .ok_or_else(|| format!("initializer [{start}..{}) does not fit data memory", init.end()))?;
        slot.copy_from_slice(&init.values);
        Ok(())
    }

    fn mem_range(&self, addr: usize, len: usize) -> Result<Range<usize>, StepFault> {
        if addr + len <= self.dmem.len() {
            Ok(addr..addr + len)
        } else {
            Err(StepFault::Memory { addr, len })
        }
    }

    /// Elementwise `d[i] = f(a[i], b[i])` over whole vector registers.
    fn vector_binary(
        &mut self,
        d: usize,
        a: usize,
        b: VecSource,
        op: fn(Fixed64, Fixed64, &mut ArithFlags) -> Fixed64,
    ) {
        let lhs = self.vreg(a).to_vec();
        let rhs: Vec<Fixed64> = match b {
            VecSource::Vector(r) => self.vreg(r).to_vec(),
            VecSource::Broadcast(r) => vec![self.sreg(r); self.cfg.vec_len],
        };
        let mut flags = self.flags;
        let out: Vec<Fixed64> = lhs.iter().zip(&rhs).map(|(&x, &y)| op(x, y, &mut flags)).collect();
        self.flags = flags;
        self.vreg_mut(d).copy_from_slice(&out);
    }

    fn scalar_binary(
        &mut self,
        d: usize,
        a: Fixed64,
        b: Fixed64,
        op: fn(Fixed64, Fixed64, &mut ArithFlags) -> Fixed64,
    ) {
        let v = op(a, b, &mut self.flags);
        self.set_sreg(d, v);
    }

    /// Executes the instruction at `pc` and charges its cycles.
    fn step_inner(&mut self, program: &Program) -> Result<StepEvent, StepFault> {
        let index = self.pc;
        let ins: Instruction = *program.instructions.get(index).ok_or(StepFault::PcOutOfRange)?;
        let (d, a, b) = (ins.dst as usize, ins.src_a as usize, ins.src_b as usize);
        let w = self.cfg.vec_len;
        let mut next = index + 1;

        use Opcode::*;
        match ins.opcode {
            Ldi => self.set_sreg(d, ins.imm()),
            Smov => self.set_sreg(d, self.sreg(a)),
            Sld => {
                let r = self.mem_range(ins.addr(), 1)?;
                self.set_sreg(d, self.dmem[r.start]);
            }
            Sst => {
                let r = self.mem_range(ins.addr(), 1)?;
                self.dmem[r.start] = self.sreg(a);
            }
            Sadd => self.scalar_binary(d, self.sreg(a), self.sreg(b), Fixed64::add),
            Ssub => self.scalar_binary(d, self.sreg(a), self.sreg(b), Fixed64::sub),
            Saddi => self.scalar_binary(d, self.sreg(a), ins.imm(), Fixed64::add),
            Smul => self.scalar_binary(d, self.sreg(a), self.sreg(b), Fixed64::mul),
            Sdiv => self.scalar_binary(d, self.sreg(a), self.sreg(b), Fixed64::div),
            Sinv => self.scalar_binary(d, Fixed64::ONE, self.sreg(a), Fixed64::div),
            Jmp => next = ins.target().unwrap_or(usize::MAX),
            Bz => {
                if self.sreg(a).is_zero() {
                    next = ins.target().unwrap_or(usize::MAX);
                }
            }
            Bnz => {
                if !self.sreg(a).is_zero() {
                    next = ins.target().unwrap_or(usize::MAX);
                }
            }
            Halt => self.halted = true,
            F2x => {
                let real = f64::from_bits(self.sreg(a).raw() as u64);
                let v = Fixed64::from_real_flagged(real, &mut self.flags);
                self.set_sreg(d, v);
            }
            X2f => {
                let bits = self.sreg(a).to_real().to_bits();
                self.set_sreg(d, Fixed64::from_raw(bits as i64));
            }
            Vld => {
                let r = self.mem_range(ins.addr(), w)?;
                let words = self.dmem[r].to_vec();
                self.vreg_mut(d).copy_from_slice(&words);
            }
            Vst => {
                let r = self.mem_range(ins.addr(), w)?;
                let words = self.vreg(a).to_vec();
                self.dmem[r].copy_from_slice(&words);
            }
            Vmov => {
                let words = self.vreg(a).to_vec();
                self.vreg_mut(d).copy_from_slice(&words);
            }
            Vadd => self.vector_binary(d, a, VecSource::Vector(b), Fixed64::add),
            Vsub => self.vector_binary(d, a, VecSource::Vector(b), Fixed64::sub),
            Vadds => self.vector_binary(d, a, VecSource::Broadcast(b), Fixed64::add),
            Vsubs => self.vector_binary(d, a, VecSource::Broadcast(b), Fixed64::sub),
            Vmul => self.vector_binary(d, a, VecSource::Vector(b), Fixed64::mul),
            Vmuls => self.vector_binary(d, a, VecSource::Broadcast(b), Fixed64::mul),
            Vdiv => self.vector_binary(d, a, VecSource::Vector(b), Fixed64::div),
            Vdivs => self.vector_binary(d, a, VecSource::Broadcast(b), Fixed64::div),
            Vinv => {
                let src = self.vreg(a).to_vec();
                let mut flags = self.flags;
                let out: Vec<Fixed64> = src.iter().map(|x| x.inv(&mut flags)).collect();
                self.flags = flags;
                self.vreg_mut(d).copy_from_slice(&out);
            }
        }

        let t = timing(&ins, &self.cfg);
        self.cycles += t.cycles;
        self.instr_count += 1;
        *self.busy.entry(OpClass::Control).or_default() += self.cfg.issue_cost;
        if ins.class() != OpClass::Control {
            *self.busy.entry(ins.class()).or_default() += t.class_busy;
        }
        self.pc = next;
        Ok(StepEvent { index, cycles: t.cycles })
    }

    /// Public single-step entry point; faults carry the instruction index.
    pub fn step(&mut self, program: &Program) -> Result<StepEvent, (usize, String)> {
        let pc = self.pc;
        self.step_inner(program).map_err(|f| (pc, f.message()))
    }

    pub fn report(&self, observe: Range<usize>) -> ExecReport {
        let utilization = OpClass::ALL
            .iter()
            .map(|&c| {
                let units = self.cfg.units(c) as f64;
                let busy = self.busy.get(&c).copied().unwrap_or(0) as f64;
                let u = if units == 0.0 || self.cycles == 0 {
                    0.0
                } else {
                    (busy / (self.cycles as f64 * units)).clamp(0.0, 1.0)
                };
                (c, u)
            })
            .collect();
        let observe = observe.start.min(self.dmem.len())..observe.end.min(self.dmem.len());
        ExecReport {
            total_cycles: self.cycles,
            instr_count: self.instr_count,
            busy_cycles: self.busy.clone(),
            utilization,
            flags: self.flags,
            halted: self.halted,
            observe_start: observe.start,
            memory: self.dmem[observe].to_vec(),
        }
    }
}

#[derive(Clone, Copy)]
enum VecSource {
    Vector(usize),
    Broadcast(usize),
}

/// Default cycle budget for [`run`] callers without a specific limit.
pub const DEFAULT_MAX_CYCLES: u64 = 100_000_000;

/// Validates, loads `program.data_init` then `inputs`, and runs to HALT.
pub fn run(
    program: &Program,
    cfg: &CoreConfig,
    inputs: &[DataInit],
    observe: Range<usize>,
    max_cycles: u64,
) -> Result<ExecReport, SimError> {
    let diags = validate(program, cfg);
    if !diags.is_empty() {
        return Err(SimError::Invalid(diags));
    }
    if observe.start > observe.end || observe.end > cfg.dmem_words {
        return Err(SimError::Input(format!(
            "observe range {}..{} outside data memory of {} words",
            observe.start, observe.end, cfg.dmem_words
        )));
    }
    let mut state = MachineState::reset(cfg);
    for init in program.data_init.iter().chain(inputs) {
        state.load(init).map_err(SimError::Input)?;
    }
    while !state.halted {
        if let Err(fault) = state.step_inner(program) {
            return Err(SimError::Fault {
                index: state.pc,
                message: fault.message(),
                report: Box::new(state.report(observe)),
            });
        }
        if state.cycles > max_cycles && !state.halted {
            return Err(SimError::NonTermination { max_cycles, report: Box::new(state.report(observe)) });
        }
    }
    Ok(state.report(observe))
}
