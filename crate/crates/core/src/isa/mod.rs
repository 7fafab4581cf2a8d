//! Scalar + vector instruction set.
//!
//! Code memory holds structured [`Instruction`] records; textual assembly
//! (see [`assemble`] / [`disassemble`]) is the interchange format.
//! Scalar register `s0` reads as zero and ignores writes.

mod asm;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Fixed64;

pub use asm::{assemble, disassemble, format_value, parse_value, AsmError, AsmErrorKind, AsmErrors};
pub use validate::{validate, Diagnostic};

/// Functional-unit class an opcode occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OpClass {
    AddClass,
    MulClass,
    DivClass,
    Mem,
    Control,
    Convert,
}

impl OpClass {
    pub const ALL: [OpClass; 6] =
        [OpClass::AddClass, OpClass::MulClass, OpClass::DivClass, OpClass::Mem, OpClass::Control, OpClass::Convert];

    pub fn name(self) -> &'static str {
        match self {
            OpClass::AddClass => "ADD_CLASS",
            OpClass::MulClass => "MUL_CLASS",
            OpClass::DivClass => "DIV_CLASS",
            OpClass::Mem => "MEM",
            OpClass::Control => "CONTROL",
            OpClass::Convert => "CONVERT",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, OpClass::AddClass | OpClass::MulClass | OpClass::DivClass)
    }
}

impl fmt::Display for OpClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Operand shape of an opcode, in source order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// `sd, imm`
    SdImm,
    /// `sd, sa`
    SdSa,
    /// `sd, [addr]`
    SdAddr,
    /// `[addr], sa`
    AddrSa,
    /// `sd, sa, sb`
    SdSaSb,
    /// `sd, sa, imm`
    SdSaImm,
    /// `label`
    Label,
    /// `sa, label`
    SaLabel,
    /// no operands
    Nothing,
    /// `vd, [addr]`
    VdAddr,
    /// `[addr], va`
    AddrVa,
    /// `vd, va`
    VdVa,
    /// `vd, va, vb`
    VdVaVb,
    /// `vd, va, sb`
    VdVaSb,
}

macro_rules! opcodes {
    ($($variant:ident => $mnemonic:literal, $class:ident, $form:ident;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum Opcode {
            $($variant,)*
        }

        impl Opcode {
            pub const ALL: &'static [Opcode] = &[$(Opcode::$variant,)*];

            pub fn mnemonic(self) -> &'static str {
                match self {
                    $(Opcode::$variant => $mnemonic,)*
                }
            }

            pub fn class(self) -> OpClass {
                match self {
                    $(Opcode::$variant => OpClass::$class,)*
                }
            }

            pub fn form(self) -> Form {
                match self {
                    $(Opcode::$variant => Form::$form,)*
                }
            }

            pub fn from_mnemonic(text: &str) -> Option<Opcode> {
                match text.to_ascii_uppercase().as_str() {
                    $($mnemonic => Some(Opcode::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

opcodes! {
    Ldi => "LDI", Control, SdImm;
    Smov => "SMOV", Control, SdSa;
    Sld => "SLD", Mem, SdAddr;
    Sst => "SST", Mem, AddrSa;
    Sadd => "SADD", AddClass, SdSaSb;
    Ssub => "SSUB", AddClass, SdSaSb;
    Saddi => "SADDI", AddClass, SdSaImm;
    Smul => "SMUL", MulClass, SdSaSb;
    Sdiv => "SDIV", DivClass, SdSaSb;
    Sinv => "SINV", DivClass, SdSa;
    Jmp => "JMP", Control, Label;
    Bz => "BZ", Control, SaLabel;
    Bnz => "BNZ", Control, SaLabel;
    Halt => "HALT", Control, Nothing;
    F2x => "F2X", Convert, SdSa;
    X2f => "X2F", Convert, SdSa;
    Vld => "VLD", Mem, VdAddr;
    Vst => "VST", Mem, AddrVa;
    Vmov => "VMOV", Control, VdVa;
    Vadd => "VADD", AddClass, VdVaVb;
    Vsub => "VSUB", AddClass, VdVaVb;
    Vadds => "VADDS", AddClass, VdVaSb;
    Vsubs => "VSUBS", AddClass, VdVaSb;
    Vmul => "VMUL", MulClass, VdVaVb;
    Vmuls => "VMULS", MulClass, VdVaSb;
    Vdiv => "VDIV", DivClass, VdVaVb;
    Vdivs => "VDIVS", DivClass, VdVaSb;
    Vinv => "VINV", DivClass, VdVa;
}

impl Opcode {
    /// True for opcodes that operate on whole vector registers.
    pub fn is_vector(self) -> bool {
        matches!(self.form(), Form::VdAddr | Form::AddrVa | Form::VdVa | Form::VdVaVb | Form::VdVaSb)
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// Non-register operand carried by an instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operand {
    None,
    Imm(Fixed64),
    Addr(u32),
    /// Resolved branch target (instruction index).
    Target(usize),
}

/// One decoded instruction. Register fields not used by the opcode's
/// [`Form`] are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instruction {
    pub opcode: Opcode,
    pub dst: u16,
    pub src_a: u16,
    pub src_b: u16,
    pub operand: Operand,
}

impl Instruction {
    pub fn new(opcode: Opcode, dst: u16, src_a: u16, src_b: u16, operand: Operand) -> Self {
        Self { opcode, dst, src_a, src_b, operand }
    }

    /// Three-register form (`d, a, b`); also used for two-register forms
    /// with `b = 0`.
    pub fn rrr(opcode: Opcode, dst: u16, src_a: u16, src_b: u16) -> Self {
        Self::new(opcode, dst, src_a, src_b, Operand::None)
    }

    pub fn rr(opcode: Opcode, dst: u16, src_a: u16) -> Self {
        Self::new(opcode, dst, src_a, 0, Operand::None)
    }

    pub fn load(opcode: Opcode, dst: u16, addr: u32) -> Self {
        Self::new(opcode, dst, 0, 0, Operand::Addr(addr))
    }

    pub fn store(opcode: Opcode, addr: u32, src: u16) -> Self {
        Self::new(opcode, 0, src, 0, Operand::Addr(addr))
    }

    pub fn ldi(dst: u16, imm: Fixed64) -> Self {
        Self::new(Opcode::Ldi, dst, 0, 0, Operand::Imm(imm))
    }

    pub fn saddi(dst: u16, src: u16, imm: Fixed64) -> Self {
        Self::new(Opcode::Saddi, dst, src, 0, Operand::Imm(imm))
    }

    pub fn branch(opcode: Opcode, src: u16, target: usize) -> Self {
        Self::new(opcode, 0, src, 0, Operand::Target(target))
    }

    pub fn halt() -> Self {
        Self::new(Opcode::Halt, 0, 0, 0, Operand::None)
    }

    pub fn class(&self) -> OpClass {
        self.opcode.class()
    }

    pub fn imm(&self) -> Fixed64 {
        match self.operand {
            Operand::Imm(v) => v,
            _ => Fixed64::ZERO,
        }
    }

    pub fn addr(&self) -> usize {
        match self.operand {
            Operand::Addr(a) => a as usize,
            _ => 0,
        }
    }

    pub fn target(&self) -> Option<usize> {
        match self.operand {
            Operand::Target(t) => Some(t),
            _ => None,
        }
    }
}

/// Initial contents of `values.len()` consecutive data words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DataInit {
    pub addr: u32,
    pub values: Vec<Fixed64>,
}

impl DataInit {
    pub fn new(addr: u32, values: Vec<Fixed64>) -> Self {
        Self { addr, values }
    }

    pub fn end(&self) -> usize {
        self.addr as usize + self.values.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub instructions: Vec<Instruction>,
    pub labels: BTreeMap<String, usize>,
    pub data_init: Vec<DataInit>,
}

impl Program {
    pub fn new(instructions: Vec<Instruction>) -> Self {
        Self { instructions, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Equality of code and data, ignoring label names (which are only
    /// symbolic; disassembly renames them).
    pub fn same_code(&self, other: &Program) -> bool {
        self.instructions == other.instructions && self.data_init == other.data_init
    }

    /// Static count of instructions per class.
    pub fn class_tally(&self) -> BTreeMap<OpClass, usize> {
        let mut tally = BTreeMap::new();
        for ins in &self.instructions {
            *tally.entry(ins.class()).or_insert(0) += 1;
        }
        tally
    }

    pub fn uses_class(&self, class: OpClass) -> bool {
        self.instructions.iter().any(|i| i.class() == class)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_mapping() {
        assert_eq!(Opcode::Ssub.class(), OpClass::AddClass);
        assert_eq!(Opcode::Vsubs.class(), OpClass::AddClass);
        assert_eq!(Opcode::Vinv.class(), OpClass::DivClass);
        assert_eq!(Opcode::Sinv.class(), OpClass::DivClass);
        assert_eq!(Opcode::F2x.class(), OpClass::Convert);
        assert_eq!(Opcode::Vld.class(), OpClass::Mem);
        assert_eq!(Opcode::Bnz.class(), OpClass::Control);
    }

    #[test]
    fn mnemonics_round_trip() {
        for &op in Opcode::ALL {
            assert_eq!(Opcode::from_mnemonic(op.mnemonic()), Some(op));
            assert_eq!(Opcode::from_mnemonic(&op.mnemonic().to_lowercase()), Some(op));
        }
        assert_eq!(Opcode::from_mnemonic("VFOO"), None);
    }
}
