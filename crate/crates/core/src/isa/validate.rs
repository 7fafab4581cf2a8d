use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Form, OpClass, Opcode, Program};
use crate::vectorcore::CoreConfig;

/// A problem that would make a program unsafe or illegal on a core.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// Offending instruction, if the problem is tied to one.
    pub index: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "instruction {i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn class_count_name(class: OpClass) -> &'static str {
    match class {
        OpClass::AddClass => "n_add",
        OpClass::MulClass => "n_mul",
        OpClass::DivClass => "n_div",
        _ => "units",
    }
}

/// Returns every reason `p` cannot run on `cfg`; empty means the program
/// runs without out-of-range register or memory accesses.
pub fn validate(p: &Program, cfg: &CoreConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |index: Option<usize>, message: String| out.push(Diagnostic { index, message });

    if let Err(e) = cfg.check() {
        push(None, e.to_string());
        return out;
    }

    let width = cfg.vec_len;
    let words = cfg.dmem_words;
    let mut converter_reported = false;
    let mut used_classes = BTreeSet::new();

    for (i, ins) in p.instructions.iter().enumerate() {
        let at = Some(i);
        let sreg = |r: u16, push: &mut dyn FnMut(Option<usize>, String)| {
            if r as usize >= cfg.n_sregs {
                push(at, format!("scalar register index {r} out of range"));
            }
        };
        let vreg = |r: u16, push: &mut dyn FnMut(Option<usize>, String)| {
            if r as usize >= cfg.n_vregs {
                push(at, format!("vector register index {r} out of range"));
            }
        };
        let (d, a, b) = (ins.dst, ins.src_a, ins.src_b);
        match ins.opcode.form() {
            Form::SdImm | Form::SdAddr => sreg(d, &mut push),
            Form::SdSa | Form::SdSaImm => {
                sreg(d, &mut push);
                sreg(a, &mut push);
            }
            Form::AddrSa | Form::SaLabel => sreg(a, &mut push),
            Form::SdSaSb => {
                sreg(d, &mut push);
                sreg(a, &mut push);
                sreg(b, &mut push);
            }
            Form::Label | Form::Nothing => {}
            Form::VdAddr => vreg(d, &mut push),
            Form::AddrVa => vreg(a, &mut push),
            Form::VdVa => {
                vreg(d, &mut push);
                vreg(a, &mut push);
            }
            Form::VdVaVb => {
                vreg(d, &mut push);
                vreg(a, &mut push);
                vreg(b, &mut push);
            }
            Form::VdVaSb => {
                vreg(d, &mut push);
                vreg(a, &mut push);
                sreg(b, &mut push);
            }
        }

        match ins.opcode.form() {
            Form::SdAddr | Form::AddrSa if ins.addr() >= words => {
                push(at, format!("address {} outside data memory of {words} words", ins.addr()));
            }
            Form::VdAddr | Form::AddrVa if ins.addr() + width > words => push(
                at,
                format!("vector access [{}..{}) outside data memory of {words} words", ins.addr(), ins.addr() + width),
            ),
            Form::Label | Form::SaLabel => match ins.target() {
                Some(t) if t < p.len() => {}
                _ => push(at, "branch target outside program".to_string()),
            },
            _ => {}
        }

        if matches!(ins.opcode, Opcode::F2x | Opcode::X2f) && !cfg.enable_converter && !converter_reported {
            push(at, format!("{} requires the converter: converter disabled", ins.opcode));
            converter_reported = true;
        }
        used_classes.insert(ins.class());
    }

    for class in used_classes.into_iter().filter(|c| c.is_arithmetic()) {
        let n = cfg.units(class);
        let name = class_count_name(class);
        if n == 0 {
            push(None, format!("program uses {class} but {name} = 0"));
        } else if n > width {
            push(None, format!("{name} = {n} exceeds vector length {width}"));
        }
    }

    for d in &p.data_init {
        if d.end() > words {
            push(None, format!("data initializer [{}..{}) outside data memory of {words} words", d.addr, d.end()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::assemble;

    #[test]
    fn vector_register_out_of_range() {
        let p = assemble("VMUL v9, v0, v1\nHALT").unwrap();
        let cfg = CoreConfig { n_vregs: 8, ..CoreConfig::default() };
        let diags = validate(&p, &cfg);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].index, Some(0));
        assert_eq!(diags[0].message, "vector register index 9 out of range");
    }

    #[test]
    fn converter_disabled() {
        let p = assemble("F2X s1, s2\nHALT").unwrap();
        let cfg = CoreConfig { enable_converter: false, ..CoreConfig::default() };
        let diags = validate(&p, &cfg);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("converter disabled"));
        assert!(validate(&p, &CoreConfig::default()).is_empty());
    }

    #[test]
    fn missing_units_for_used_class() {
        let p = assemble("SDIV s1, s2, s3\nVADD v0, v1, v2\nHALT").unwrap();
        let cfg = CoreConfig { n_div: 0, n_mul: 0, ..CoreConfig::default() };
        let diags = validate(&p, &cfg);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert!(diags[0].message.contains("n_div = 0"));
    }

    #[test]
    fn units_beyond_vector_length() {
        let p = assemble("VADD v0, v1, v2\nHALT").unwrap();
        let cfg = CoreConfig { n_add: 25, ..CoreConfig::default() };
        assert_eq!(validate(&p, &cfg).len(), 1);
    }

    #[test]
    fn memory_bounds() {
        let cfg = CoreConfig { dmem_words: 64, ..CoreConfig::default() };
        let ok = assemble("VLD v0, [40]\nSST [63], s1\nHALT").unwrap();
        assert!(validate(&ok, &cfg).is_empty());
        let bad = assemble("VLD v0, [41]\nSST [64], s1\n.data 60 1 2 3 4 5\nHALT").unwrap();
        assert_eq!(validate(&bad, &cfg).len(), 3);
    }

    #[test]
    fn scalar_register_bounds() {
        let p = assemble("SADD s16, s1, s2\nVADDS v0, v1, s20\nHALT").unwrap();
        let diags = validate(&p, &CoreConfig::default());
        assert_eq!(diags.len(), 2);
        assert!(diags.iter().all(|d| d.message.starts_with("scalar register index")));
    }
}
