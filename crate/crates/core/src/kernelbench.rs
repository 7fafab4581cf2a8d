//! Synthetic benchmark kernel with a fixed per-element operation mix:
//! six multiplications, two additions, two divisions and one inversion.
//!
//! ```text
//! t1 = a*b     t2 = t1*c    t3 = d*e     t4 = t2+t3   t5 = t4*f
//! t6 = g*h     t7 = t6+s_k  t8 = t5*t7   t9 = t8/p    t10 = t9/q
//! out = 1/t10
//! ```

use std::fmt::Write as _;

use num_traits::Float;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archmodels::{DataflowKernel, Node};
use crate::isa::{assemble, format_value, DataInit, OpClass, Program};
use crate::vectorcore::{self, CoreConfig, ExecReport, FuMix, SimError};
use crate::Fixed64;

/// Input vector names in memory-layout order.
pub const INPUT_NAMES: [&str; 10] = ["a", "b", "c", "d", "e", "f", "g", "h", "p", "q"];

/// Name of the scalar constant.
pub const SCALAR_NAME: &str = "s_k";

/// Inputs are drawn from this closed interval.
pub const INPUT_RANGE: (f64, f64) = (0.5, 2.0);

/// Smallest accepted magnitude of p, q and t7.
pub const DIVISOR_BOUND: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("kernel layout regions overlap or exceed data memory: {0}")]
    Layout(String),
    #[error("input '{name}' has {found} lanes, expected {expected}")]
    LaneCount { name: String, found: usize, expected: usize },
    #[error("lane {lane}: {what} = {value} is too close to zero")]
    Divisor { lane: usize, what: &'static str, value: f64 },
    #[error("lane {lane}: input '{name}' is not finite")]
    NonFinite { lane: usize, name: String },
    #[error("vector length must be at least 1")]
    EmptyVector,
}

/// Base word address of each W-word region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelLayout {
    pub inputs: [u32; 10],
    pub out: u32,
}

impl KernelLayout {
    /// Regions packed back to back from address 0, output last.
    pub fn packed(vec_len: usize) -> Self {
        let w = vec_len as u32;
        let mut inputs = [0u32; 10];
        for (i, slot) in inputs.iter_mut().enumerate() {
            *slot = i as u32 * w;
        }
        Self { inputs, out: 10 * w }
    }

    pub fn input(&self, name: &str) -> Option<u32> {
        INPUT_NAMES.iter().position(|&n| n == name).map(|i| self.inputs[i])
    }

    fn regions(&self) -> Vec<(&'static str, u32)> {
        let mut r: Vec<(&'static str, u32)> = INPUT_NAMES.iter().copied().zip(self.inputs).collect();
        r.push(("out", self.out));
        r
    }

    /// Rejects overlapping regions and regions beyond `dmem_words`.
    pub fn check(&self, vec_len: usize, dmem_words: usize) -> Result<(), KernelError> {
        if vec_len == 0 {
            return Err(KernelError::EmptyVector);
        }
        let mut regions = self.regions();
        regions.sort_by_key(|&(_, base)| base);
        for pair in regions.windows(2) {
            let ((n0, b0), (n1, b1)) = (pair[0], pair[1]);
            if b0 as usize + vec_len > b1 as usize {
                return Err(KernelError::Layout(format!("'{n0}' at {b0} overlaps '{n1}' at {b1}")));
            }
        }
        let (last, base) = regions[regions.len() - 1];
        if base as usize + vec_len > dmem_words {
            return Err(KernelError::Layout(format!("'{last}' at {base} ends past {dmem_words} words")));
        }
        Ok(())
    }
}

/// Ten input vectors of equal length plus the scalar constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelInputs {
    /// Indexed like [`INPUT_NAMES`].
    pub vectors: Vec<Vec<f64>>,
    pub s_k: f64,
}

impl KernelInputs {
    pub fn uniform(vec_len: usize, value: f64, s_k: f64) -> Self {
        Self { vectors: vec![vec![value; vec_len]; 10], s_k }
    }

    pub fn vec_len(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        INPUT_NAMES.iter().position(|&n| n == name).map(|i| self.vectors[i].as_slice())
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Vec<f64>> {
        INPUT_NAMES.iter().position(|&n| n == name).map(move |i| &mut self.vectors[i])
    }

    fn check_shape(&self) -> Result<usize, KernelError> {
        let w = self.vec_len();
        if w == 0 || self.vectors.len() != 10 {
            return Err(KernelError::EmptyVector);
        }
        for (name, v) in INPUT_NAMES.iter().zip(&self.vectors) {
            if v.len() != w {
                return Err(KernelError::LaneCount { name: name.to_string(), found: v.len(), expected: w });
            }
            if let Some(lane) = v.iter().position(|x| !x.is_finite()) {
                return Err(KernelError::NonFinite { lane, name: name.to_string() });
            }
        }
        if !self.s_k.is_finite() {
            return Err(KernelError::NonFinite { lane: 0, name: SCALAR_NAME.into() });
        }
        Ok(w)
    }

    /// Memory initializers placing each vector at its layout region.
    pub fn data_init(&self, layout: &KernelLayout) -> Result<Vec<DataInit>, KernelError> {
        self.check_shape()?;
        Ok(INPUT_NAMES
            .iter()
            .zip(&self.vectors)
            .zip(layout.inputs)
            .map(|((_, v), base)| {
                let words = v.iter().map(|&x| Fixed64::from_real(x).expect("finite input")).collect();
                DataInit::new(base, words)
            })
            .collect())
    }

    pub fn s_k_fixed(&self) -> Fixed64 {
        Fixed64::from_real(self.s_k).unwrap_or(Fixed64::ZERO)
    }
}

/// Deterministic inputs in the well-conditioned domain.
pub fn generate_inputs(vec_len: usize, seed: u64) -> KernelInputs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(INPUT_RANGE.0, INPUT_RANGE.1);
    let vectors = (0..10).map(|_| (0..vec_len).map(|_| dist.sample(&mut rng)).collect()).collect();
    let s_k = dist.sample(&mut rng);
    KernelInputs { vectors, s_k }
}

/// Evaluates the kernel per lane in floating point of type `T`.
pub fn oracle<T: Float>(inputs: &KernelInputs) -> Result<Vec<T>, KernelError> {
    let w = inputs.check_shape()?;
    let cast = |x: f64| T::from(x).expect("f64 converts to any Float");
    let bound = cast(DIVISOR_BOUND);
    let s_k = cast(inputs.s_k);
    let col = |name: &str, lane: usize| cast(inputs.get(name).expect("known input")[lane]);
    let mut out = Vec::with_capacity(w);
    for lane in 0..w {
        let x = |n: &str| col(n, lane);
        let (p, q) = (x("p"), x("q"));
        let t1 = x("a") * x("b");
        let t2 = t1 * x("c");
        let t3 = x("d") * x("e");
        let t4 = t2 + t3;
        let t5 = t4 * x("f");
        let t6 = x("g") * x("h");
        let t7 = t6 + s_k;
        for (what, v) in [("p", p), ("q", q), ("t7", t7)] {
            if v.abs() < bound {
                return Err(KernelError::Divisor { lane, what, value: v.to_f64().unwrap_or(f64::NAN) });
            }
        }
        let t8 = t5 * t7;
        let t9 = t8 / p;
        let t10 = t9 / q;
        if t10 == T::zero() {
            return Err(KernelError::Divisor { lane, what: "t10", value: 0.0 });
        }
        out.push(T::one() / t10);
    }
    Ok(out)
}

/// Commented assembly for the straight-line vector kernel.
pub fn program_source(vec_len: usize, layout: &KernelLayout, s_k: Fixed64) -> String {
    let a = |n: &str| layout.input(n).expect("known input");
    let mut s = String::new();
    let _ = writeln!(s, "; benchmark kernel, W = {vec_len}");
    let _ = writeln!(s, "        LDI   s1, {}          ; s_k", format_value(s_k));
    let body = [
        format!("VLD   v0, [{}]", a("a")),
        format!("VLD   v1, [{}]", a("b")),
        "VMUL  v0, v0, v1    ; t1 = a*b".into(),
        format!("VLD   v1, [{}]", a("c")),
        "VMUL  v0, v0, v1    ; t2 = t1*c".into(),
        format!("VLD   v1, [{}]", a("d")),
        format!("VLD   v2, [{}]", a("e")),
        "VMUL  v1, v1, v2    ; t3 = d*e".into(),
        "VADD  v0, v0, v1    ; t4 = t2+t3".into(),
        format!("VLD   v1, [{}]", a("f")),
        "VMUL  v0, v0, v1    ; t5 = t4*f".into(),
        format!("VLD   v1, [{}]", a("g")),
        format!("VLD   v2, [{}]", a("h")),
        "VMUL  v1, v1, v2    ; t6 = g*h".into(),
        "VADDS v1, v1, s1    ; t7 = t6+s_k".into(),
        "VMUL  v0, v0, v1    ; t8 = t5*t7".into(),
        format!("VLD   v1, [{}]", a("p")),
        "VDIV  v0, v0, v1    ; t9 = t8/p".into(),
        format!("VLD   v1, [{}]", a("q")),
        "VDIV  v0, v0, v1    ; t10 = t9/q".into(),
        "VINV  v0, v0        ; out = 1/t10".into(),
        format!("VST   [{}], v0", layout.out),
        "HALT".into(),
    ];
    for line in body {
        let _ = writeln!(s, "        {line}");
    }
    s
}

/// The vector kernel: LDI, 10 VLD, 6 VMUL, VADD, VADDS, 2 VDIV, VINV, VST,
/// HALT.
pub fn emit_program(vec_len: usize, layout: &KernelLayout, s_k: Fixed64) -> Result<Program, KernelError> {
    layout.check(vec_len, usize::MAX)?;
    Ok(assemble(&program_source(vec_len, layout, s_k)).expect("kernel source assembles"))
}

/// Lane-by-lane scalar transcription. The ISA has only absolute
/// addressing, so each lane gets its own unrolled block.
pub fn emit_scalar_program(vec_len: usize, layout: &KernelLayout, s_k: Fixed64) -> Result<Program, KernelError> {
    layout.check(vec_len, usize::MAX)?;
    let mut s = String::new();
    let _ = writeln!(s, "LDI s1, {}", format_value(s_k));
    for lane in 0..vec_len as u32 {
        let a = |n: &str| layout.input(n).expect("known input") + lane;
        let _ = writeln!(s, "; lane {lane}");
        for line in [
            format!("SLD s2, [{}]", a("a")),
            format!("SLD s3, [{}]", a("b")),
            "SMUL s2, s2, s3".into(),
            format!("SLD s3, [{}]", a("c")),
            "SMUL s2, s2, s3".into(),
            format!("SLD s3, [{}]", a("d")),
            format!("SLD s4, [{}]", a("e")),
            "SMUL s3, s3, s4".into(),
            "SADD s2, s2, s3".into(),
            format!("SLD s3, [{}]", a("f")),
            "SMUL s2, s2, s3".into(),
            format!("SLD s3, [{}]", a("g")),
            format!("SLD s4, [{}]", a("h")),
            "SMUL s3, s3, s4".into(),
            "SADD s3, s3, s1".into(),
            "SMUL s2, s2, s3".into(),
            format!("SLD s3, [{}]", a("p")),
            "SDIV s2, s2, s3".into(),
            format!("SLD s3, [{}]", a("q")),
            "SDIV s2, s2, s3".into(),
            "SINV s2, s2".into(),
            format!("SST [{}], s2", layout.out + lane),
        ] {
            let _ = writeln!(s, "{line}");
        }
    }
    let _ = writeln!(s, "HALT");
    Ok(assemble(&s).expect("scalar kernel source assembles"))
}

/// Node ids of the kernel's dataflow graph: 1..=10 for t1..t10, 11 for out.
pub const OUT_NODE: usize = 11;

/// The kernel as a dataflow graph replicated `replication` times.
pub fn dataflow_kernel(replication: usize) -> DataflowKernel {
    use OpClass::*;
    let classes =
        [MulClass, MulClass, MulClass, AddClass, MulClass, MulClass, AddClass, MulClass, DivClass, DivClass, DivClass];
    let nodes = classes.iter().enumerate().map(|(i, &class)| Node { id: i + 1, class }).collect();
    let edges = vec![(1, 2), (2, 4), (3, 4), (4, 5), (6, 7), (5, 8), (7, 8), (8, 9), (9, 10), (10, OUT_NODE)];
    DataflowKernel::new(nodes, edges, replication).expect("kernel graph is well formed")
}

/// Vector-core configuration for the kernel. The kernel issues no
/// conversion instructions, so no converter is instantiated.
pub fn kernel_config(mix: FuMix) -> CoreConfig {
    CoreConfig { enable_converter: false, ..CoreConfig::default().with_mix(mix) }
}

/// Outputs and report of one kernel execution.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRun {
    pub report: ExecReport,
    pub outputs: Vec<Fixed64>,
}

/// Runs `program` (vector or scalar kernel) on `cfg` with `inputs`.
pub fn run_kernel(
    program: &Program,
    cfg: &CoreConfig,
    inputs: &KernelInputs,
    layout: &KernelLayout,
) -> Result<KernelRun, SimError> {
    let data = inputs.data_init(layout).map_err(|e| SimError::Input(e.to_string()))?;
    let w = cfg.vec_len;
    let out = layout.out as usize;
    let report = vectorcore::run(program, cfg, &data, out..out + w, vectorcore::DEFAULT_MAX_CYCLES)?;
    let outputs = report.memory.clone();
    Ok(KernelRun { report, outputs })
}
