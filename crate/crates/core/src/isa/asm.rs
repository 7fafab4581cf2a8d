//! Two-pass assembler and canonical disassembler.
//!
//! Grammar, one statement per line:
//!
//! ```text
//! [label:]... [MNEMONIC op, op, ...] [; comment]
//! .data ADDR value value ...
//! ```
//!
//! Registers are `sN` / `vN`, addresses `[N]`, immediates decimal reals or
//! `0x`-prefixed raw 64-bit words.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::{DataInit, Form, Instruction, Opcode, Operand, Program};
use crate::Fixed64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsmErrorKind {
    #[error("unknown mnemonic '{0}'")]
    UnknownMnemonic(String),
    #[error("{mnemonic} expects {expected} operand(s), found {found}")]
    OperandCount { mnemonic: &'static str, expected: usize, found: usize },
    #[error("malformed operand '{text}': {reason}")]
    Operand { text: String, reason: String },
    #[error("invalid label name '{0}'")]
    BadLabel(String),
    #[error("duplicate label '{0}'")]
    DuplicateLabel(String),
    #[error("unresolved label '{0}'")]
    UnresolvedLabel(String),
    #[error("malformed .data directive: {0}")]
    Data(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at line {line}")]
pub struct AsmError {
    pub line: usize,
    pub kind: AsmErrorKind,
}

/// Every error found in a source file, in line order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct AsmErrors(pub Vec<AsmError>);

impl fmt::Display for AsmErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

struct Statement<'a> {
    line: usize,
    mnemonic: &'a str,
    operands: Vec<&'a str>,
}

fn is_label_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn operand_err(text: &str, reason: impl Into<String>) -> AsmErrorKind {
    AsmErrorKind::Operand { text: text.to_string(), reason: reason.into() }
}

fn parse_reg(text: &str, prefix: char) -> Result<u16, AsmErrorKind> {
    let lower = text.to_ascii_lowercase();
    let digits =
        lower.strip_prefix(prefix).ok_or_else(|| operand_err(text, format!("expected a '{prefix}' register")))?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(operand_err(text, format!("expected a '{prefix}' register")));
    }
    digits.parse().map_err(|_| operand_err(text, "register index too large"))
}

fn parse_addr(text: &str) -> Result<u32, AsmErrorKind> {
    let inner = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| operand_err(text, "expected an address '[N]'"))?
        .trim();
    if inner.is_empty() || !inner.bytes().all(|b| b.is_ascii_digit()) {
        return Err(operand_err(text, "address must be a decimal integer"));
    }
    inner.parse().map_err(|_| operand_err(text, "address too large"))
}

/// Parses a decimal real (rounded to the nearest word) or a `0x` raw word.
pub fn parse_value(text: &str) -> Result<Fixed64, String> {
    if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        return u64::from_str_radix(hex, 16)
            .map(|bits| Fixed64::from_raw(bits as i64))
            .map_err(|_| "invalid raw hexadecimal word".to_string());
    }
    let x: f64 = text.parse().map_err(|_| "expected a decimal real".to_string())?;
    Fixed64::from_real(x).map_err(|e| e.to_string())
}

/// Decimal text when it converts back exactly, raw hex otherwise.
pub fn format_value(v: Fixed64) -> String {
    let r = v.to_real();
    match Fixed64::from_real(r) {
        Ok(back) if back == v => format!("{r}"),
        _ => format!("0x{:016X}", v.raw() as u64),
    }
}

fn split_statement(line: &str) -> (Vec<&str>, &str) {
    let code = match line.find(';') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let mut rest = code.trim();
    let mut labels = Vec::new();
    while let Some(pos) = rest.find(':') {
        let head = rest[..pos].trim();
        // A colon inside an operand list is not a label separator.
        if head.contains(char::is_whitespace) || head.contains(',') || head.is_empty() {
            break;
        }
        labels.push(head);
        rest = rest[pos + 1..].trim();
    }
    (labels, rest)
}

fn parse_data(line: usize, body: &str) -> Result<DataInit, AsmError> {
    let err = |m: String| AsmError { line, kind: AsmErrorKind::Data(m) };
    let mut fields = body.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
    fields.next(); // ".data"
    let addr_text = fields.next().ok_or_else(|| err("missing address".into()))?;
    let addr: u32 = addr_text.parse().map_err(|_| err(format!("invalid address '{addr_text}'")))?;
    let values =
        fields.map(|f| parse_value(f).map_err(|m| err(format!("'{f}': {m}")))).collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(err("no values".into()));
    }
    Ok(DataInit::new(addr, values))
}

fn encode(st: &Statement<'_>, labels: &BTreeMap<String, usize>) -> Result<Instruction, AsmErrorKind> {
    let opcode =
        Opcode::from_mnemonic(st.mnemonic).ok_or_else(|| AsmErrorKind::UnknownMnemonic(st.mnemonic.to_string()))?;
    let form = opcode.form();
    let expected = match form {
        Form::Nothing => 0,
        Form::Label => 1,
        Form::SdSaSb | Form::SdSaImm | Form::VdVaVb | Form::VdVaSb => 3,
        _ => 2,
    };
    if st.operands.len() != expected {
        return Err(AsmErrorKind::OperandCount { mnemonic: opcode.mnemonic(), expected, found: st.operands.len() });
    }
    let ops = &st.operands;
    let imm = |t: &str| parse_value(t).map_err(|m| operand_err(t, m));
    let target = |t: &str| {
        if !is_label_name(t) {
            return Err(operand_err(t, "expected a label"));
        }
        labels.get(t).copied().ok_or_else(|| AsmErrorKind::UnresolvedLabel(t.to_string()))
    };
    let s = |t: &str| parse_reg(t, 's');
    let v = |t: &str| parse_reg(t, 'v');
    let ins = match form {
        Form::SdImm => Instruction::new(opcode, s(ops[0])?, 0, 0, Operand::Imm(imm(ops[1])?)),
        Form::SdSa => Instruction::rr(opcode, s(ops[0])?, s(ops[1])?),
        Form::SdAddr => Instruction::load(opcode, s(ops[0])?, parse_addr(ops[1])?),
        Form::AddrSa => Instruction::store(opcode, parse_addr(ops[0])?, s(ops[1])?),
        Form::SdSaSb => Instruction::rrr(opcode, s(ops[0])?, s(ops[1])?, s(ops[2])?),
        Form::SdSaImm => Instruction::new(opcode, s(ops[0])?, s(ops[1])?, 0, Operand::Imm(imm(ops[2])?)),
        Form::Label => Instruction::new(opcode, 0, 0, 0, Operand::Target(target(ops[0])?)),
        Form::SaLabel => Instruction::branch(opcode, s(ops[0])?, target(ops[1])?),
        Form::Nothing => Instruction::new(opcode, 0, 0, 0, Operand::None),
        Form::VdAddr => Instruction::load(opcode, v(ops[0])?, parse_addr(ops[1])?),
        Form::AddrVa => Instruction::store(opcode, parse_addr(ops[0])?, v(ops[1])?),
        Form::VdVa => Instruction::rr(opcode, v(ops[0])?, v(ops[1])?),
        Form::VdVaVb => Instruction::rrr(opcode, v(ops[0])?, v(ops[1])?, v(ops[2])?),
        Form::VdVaSb => Instruction::rrr(opcode, v(ops[0])?, v(ops[1])?, s(ops[2])?),
    };
    Ok(ins)
}

/// Assembles source text. Pass one assigns instruction indices and
/// collects labels; pass two encodes operands and resolves references.
pub fn assemble(source: &str) -> Result<Program, AsmErrors> {
    let mut errors = Vec::new();
    let mut statements = Vec::new();
    let mut labels = BTreeMap::new();
    let mut data_init = Vec::new();

    for (idx, raw_line) in source.lines().enumerate() {
        let line = idx + 1;
        let (line_labels, body) = split_statement(raw_line);
        for name in line_labels {
            if !is_label_name(name) {
                errors.push(AsmError { line, kind: AsmErrorKind::BadLabel(name.to_string()) });
            } else if labels.insert(name.to_string(), statements.len()).is_some() {
                errors.push(AsmError { line, kind: AsmErrorKind::DuplicateLabel(name.to_string()) });
            }
        }
        if body.is_empty() {
            continue;
        }
        if body.starts_with(".data") {
            match parse_data(line, body) {
                Ok(d) => data_init.push(d),
                Err(e) => errors.push(e),
            }
            continue;
        }
        let (mnemonic, rest) = match body.find(char::is_whitespace) {
            Some(pos) => (&body[..pos], body[pos..].trim()),
            None => (body, ""),
        };
        let operands = if rest.is_empty() { Vec::new() } else { rest.split(',').map(str::trim).collect() };
        statements.push(Statement { line, mnemonic, operands });
    }

    let mut instructions = Vec::with_capacity(statements.len());
    for st in &statements {
        match encode(st, &labels) {
            Ok(ins) => instructions.push(ins),
            Err(kind) => errors.push(AsmError { line: st.line, kind }),
        }
    }
    // A label after the last instruction has no instruction to name.
    for ins in &instructions {
        if let Some(t) = ins.target() {
            if t >= statements.len() {
                let name = labels.iter().find(|(_, &i)| i == t).map(|(n, _)| n.clone()).unwrap_or_default();
                let line = statements.last().map_or(1, |s| s.line);
                errors.push(AsmError { line, kind: AsmErrorKind::UnresolvedLabel(name) });
            }
        }
    }

    if errors.is_empty() {
        Ok(Program { instructions, labels, data_init })
    } else {
        errors.sort_by_key(|e| e.line);
        Err(AsmErrors(errors))
    }
}

fn label_for(index: usize) -> String {
    format!("L{index}")
}

/// Formats a single instruction; branch targets print as `L<index>`.
pub(crate) fn format_instruction(ins: &Instruction) -> String {
    let m = ins.opcode.mnemonic();
    let (d, a, b) = (ins.dst, ins.src_a, ins.src_b);
    let addr = ins.addr();
    let imm = || format_value(ins.imm());
    let target = || ins.target().map(label_for).unwrap_or_default();
    match ins.opcode.form() {
        Form::SdImm => format!("{m} s{d}, {}", imm()),
        Form::SdSa => format!("{m} s{d}, s{a}"),
        Form::SdAddr => format!("{m} s{d}, [{addr}]"),
        Form::AddrSa => format!("{m} [{addr}], s{a}"),
        Form::SdSaSb => format!("{m} s{d}, s{a}, s{b}"),
        Form::SdSaImm => format!("{m} s{d}, s{a}, {}", imm()),
        Form::Label => format!("{m} {}", target()),
        Form::SaLabel => format!("{m} s{a}, {}", target()),
        Form::Nothing => m.to_string(),
        Form::VdAddr => format!("{m} v{d}, [{addr}]"),
        Form::AddrVa => format!("{m} [{addr}], v{a}"),
        Form::VdVa => format!("{m} v{d}, v{a}"),
        Form::VdVaVb => format!("{m} v{d}, v{a}, v{b}"),
        Form::VdVaSb => format!("{m} v{d}, v{a}, s{b}"),
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_instruction(self))
    }
}

/// Canonical text for a program. Data directives come first; every branch
/// target gets a synthetic `L<index>:` label.
pub fn disassemble(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.data_init {
        out.push_str(&format!(".data {}", d.addr));
        for v in &d.values {
            out.push(' ');
            out.push_str(&format_value(*v));
        }
        out.push('\n');
    }
    let targets: BTreeSet<usize> = p.instructions.iter().filter_map(Instruction::target).collect();
    for (i, ins) in p.instructions.iter().enumerate() {
        if targets.contains(&i) {
            out.push_str(&label_for(i));
            out.push_str(": ");
        }
        out.push_str(&format_instruction(ins));
        out.push('\n');
    }
    out
}
