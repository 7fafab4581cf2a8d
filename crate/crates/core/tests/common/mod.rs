//! Test-only oracles and generators, kept independent of the code paths
//! they check.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use vproc_core::archmodels::DataflowKernel;
use vproc_core::isa::{DataInit, Form, Instruction, OpClass, Opcode, Operand, Program};
use vproc_core::vectorcore::{instr_cost, CoreConfig, MachineState};
use vproc_core::Fixed64;

// ---- wide-integer arithmetic reference -------------------------------

/// Result of a reference computation: raw word plus the flags it raises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefResult {
    pub raw: i64,
    pub overflow: bool,
    pub div_by_zero: bool,
}

fn clamp(v: BigInt) -> (i64, bool) {
    let hi = BigInt::from(i64::MAX);
    let lo = BigInt::from(i64::MIN);
    if v > hi {
        (i64::MAX, true)
    } else if v < lo {
        (i64::MIN, true)
    } else {
        (i64::try_from(v).unwrap(), false)
    }
}

fn frac_scale() -> BigInt {
    BigInt::from(1u64 << 32)
}

pub fn ref_add(a: i64, b: i64) -> RefResult {
    let (raw, overflow) = clamp(BigInt::from(a) + BigInt::from(b));
    RefResult { raw, overflow, div_by_zero: false }
}

pub fn ref_sub(a: i64, b: i64) -> RefResult {
    let (raw, overflow) = clamp(BigInt::from(a) - BigInt::from(b));
    RefResult { raw, overflow, div_by_zero: false }
}

/// floor(a * b / 2^32), saturated.
pub fn ref_mul(a: i64, b: i64) -> RefResult {
    let product = BigInt::from(a) * BigInt::from(b);
    let (raw, overflow) = clamp(product.div_floor(&frac_scale()));
    RefResult { raw, overflow, div_by_zero: false }
}

/// trunc(a * 2^32 / b), saturated; b = 0 saturates toward sign(a).
pub fn ref_div(a: i64, b: i64) -> RefResult {
    if b == 0 {
        let raw = if a >= 0 { i64::MAX } else { i64::MIN };
        return RefResult { raw, overflow: false, div_by_zero: true };
    }
    let num = BigInt::from(a) * frac_scale();
    let den = BigInt::from(b);
    // BigInt division truncates toward zero; make that explicit.
    let (q, _) = num.div_rem(&den);
    let (raw, overflow) = clamp(q);
    RefResult { raw, overflow, div_by_zero: false }
}

/// Raw words that stress saturation, zero divisors and rounding.
pub fn interesting_raw(rng: &mut ChaCha8Rng) -> i64 {
    match rng.gen_range(0..10) {
        0 => 0,
        1 => *[i64::MAX, i64::MIN, i64::MAX - 1, i64::MIN + 1, 1, -1, 1 << 32, -(1 << 32)]
            .get(rng.gen_range(0..8))
            .unwrap(),
        2 | 3 => rng.gen_range(-(1i64 << 40)..(1i64 << 40)),
        4 | 5 => rng.gen_range(-(1i64 << 52)..(1i64 << 52)),
        _ => rng.gen(),
    }
}

// ---- brute-force Pareto --------------------------------------------

pub fn brute_pareto(points: &[(u64, u64)]) -> Vec<bool> {
    points.iter().map(|p| !points.iter().any(|q| q.0 <= p.0 && q.1 <= p.1 && (q.0 < p.0 || q.1 < p.1))).collect()
}

// ---- brute-force longest path ---------------------------------------

/// Enumerates every path by DFS from every node; only valid on DAGs.
pub fn brute_longest_path(k: &DataflowKernel, weight: impl Fn(OpClass) -> u64 + Copy) -> u64 {
    let nodes = k.nodes();
    let idx = |id: usize| nodes.iter().position(|n| n.id == id).unwrap();
    fn dfs(
        at: usize,
        acc: u64,
        nodes: &[vproc_core::archmodels::Node],
        edges: &[(usize, usize)],
        idx: &dyn Fn(usize) -> usize,
        weight: &dyn Fn(OpClass) -> u64,
        best: &mut u64,
    ) {
        let here = acc + weight(nodes[at].class);
        *best = (*best).max(here);
        for &(from, to) in edges {
            if from == nodes[at].id {
                dfs(idx(to), here, nodes, edges, idx, weight, best);
            }
        }
    }
    let mut best = 0;
    for start in 0..nodes.len() {
        dfs(start, 0, nodes, k.edges(), &idx, &weight, &mut best);
    }
    best
}

// ---- random valid programs --------------------------------------------

const COUNTER: u16 = 15;

fn random_value(rng: &mut ChaCha8Rng) -> Fixed64 {
    match rng.gen_range(0..6) {
        0 => Fixed64::ZERO,
        1 => Fixed64::ONE,
        2 => Fixed64::from_raw(rng.gen()),
        _ => Fixed64::from_real(rng.gen_range(-100.0..100.0)).unwrap(),
    }
}

fn random_plain(rng: &mut ChaCha8Rng, cfg: &CoreConfig) -> Instruction {
    let candidates: Vec<Opcode> = Opcode::ALL
        .iter()
        .copied()
        .filter(|op| !matches!(op.form(), Form::Label | Form::SaLabel | Form::Nothing))
        .collect();
    let op = candidates[rng.gen_range(0..candidates.len())];
    let s = |rng: &mut ChaCha8Rng| rng.gen_range(0..COUNTER);
    let v = |rng: &mut ChaCha8Rng| rng.gen_range(0..cfg.n_vregs as u16);
    let saddr = |rng: &mut ChaCha8Rng| rng.gen_range(0..cfg.dmem_words as u32);
    let vaddr = |rng: &mut ChaCha8Rng| rng.gen_range(0..=(cfg.dmem_words - cfg.vec_len) as u32);
    match op.form() {
        Form::SdImm => Instruction::new(op, s(rng), 0, 0, Operand::Imm(random_value(rng))),
        Form::SdSa => Instruction::rr(op, s(rng), s(rng)),
        Form::SdAddr => Instruction::load(op, s(rng), saddr(rng)),
        Form::AddrSa => Instruction::store(op, saddr(rng), s(rng)),
        Form::SdSaSb => Instruction::rrr(op, s(rng), s(rng), s(rng)),
        Form::SdSaImm => Instruction::new(op, s(rng), s(rng), 0, Operand::Imm(random_value(rng))),
        Form::VdAddr => Instruction::load(op, v(rng), vaddr(rng)),
        Form::AddrVa => Instruction::store(op, vaddr(rng), v(rng)),
        Form::VdVa => Instruction::rr(op, v(rng), v(rng)),
        Form::VdVaVb => Instruction::rrr(op, v(rng), v(rng), v(rng)),
        Form::VdVaSb => Instruction::rrr(op, v(rng), v(rng), s(rng)),
        Form::Label | Form::SaLabel | Form::Nothing => unreachable!(),
    }
}

/// A terminating program valid on `cfg` (which must enable the converter
/// and have at least 16 scalar registers). Straight-line segments may
/// branch forward; loop segments count down `s15` and are never entered
/// from outside.
pub fn random_program(rng: &mut ChaCha8Rng, cfg: &CoreConfig) -> Program {
    let mut code: Vec<Instruction> = Vec::new();
    let mut loop_body = Vec::new();
    // Forward branches are patched once the final length is known.
    let mut pending: Vec<usize> = Vec::new();
    let segments = rng.gen_range(1..5);
    for _ in 0..segments {
        if rng.gen_bool(0.3) {
            let trips = rng.gen_range(1..4);
            code.push(Instruction::ldi(COUNTER, Fixed64::from_real(trips as f64).unwrap()));
            let top = code.len();
            for _ in 0..rng.gen_range(1..6) {
                loop_body.push(code.len());
                code.push(random_plain(rng, cfg));
            }
            loop_body.push(code.len());
            code.push(Instruction::saddi(COUNTER, COUNTER, -Fixed64::ONE));
            loop_body.push(code.len());
            code.push(Instruction::branch(Opcode::Bnz, COUNTER, top));
        } else {
            for _ in 0..rng.gen_range(1..10) {
                if rng.gen_bool(0.15) {
                    pending.push(code.len());
                    let op = [Opcode::Jmp, Opcode::Bz, Opcode::Bnz][rng.gen_range(0..3)];
                    let reg = if op == Opcode::Jmp { 0 } else { rng.gen_range(0..COUNTER) };
                    code.push(Instruction::branch(op, reg, usize::MAX));
                } else {
                    code.push(random_plain(rng, cfg));
                }
            }
        }
    }
    code.push(Instruction::halt());
    let len = code.len();
    for at in pending {
        let choices: Vec<usize> = (at + 1..len).filter(|i| !loop_body.contains(i)).collect();
        let target = choices[rng.gen_range(0..choices.len())];
        code[at].operand = Operand::Target(target);
    }
    let mut p = Program::new(code);
    for _ in 0..rng.gen_range(0..3) {
        let n = rng.gen_range(1..30);
        let addr = rng.gen_range(0..(cfg.dmem_words - n) as u32);
        p.data_init.push(DataInit::new(addr, (0..n).map(|_| random_value(rng)).collect()));
    }
    p
}

/// Steps the machine to HALT and returns the executed instruction indices.
pub fn trace(p: &Program, cfg: &CoreConfig, limit: usize) -> (MachineState, Vec<usize>) {
    let mut st = MachineState::reset(cfg);
    for d in &p.data_init {
        st.load(d).unwrap();
    }
    let mut executed = Vec::new();
    while !st.halted && executed.len() < limit {
        executed.push(st.step(p).unwrap().index);
    }
    (st, executed)
}

/// Closed-form cycles of a dynamic instruction trace.
pub fn analytic_cycles(p: &Program, cfg: &CoreConfig, executed: &[usize]) -> u64 {
    executed.iter().map(|&i| instr_cost(&p.instructions[i], cfg)).sum()
}
