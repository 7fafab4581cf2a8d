//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

mod common;

use std::path::PathBuf;

use common::{
    analytic_cycles, brute_pareto, interesting_raw, random_program, ref_add, ref_div, ref_mul, ref_sub, trace,
    RefResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vproc_core::archmodels::tiled_latency;
use vproc_core::dse::{amdahl, pareto_flags};
use vproc_core::isa::{assemble, disassemble, Program};
use vproc_core::kernelbench::{
    dataflow_kernel, emit_program, generate_inputs, kernel_config, oracle, run_kernel, KernelLayout,
};
use vproc_core::resource::{estimate_sequential, estimate_tiled, estimate_vector, Calibration};
use vproc_core::vectorcore::{run, CoreConfig, FuMix};
use vproc_core::{ArithFlags, Fixed64};

const W: usize = 24;
const TILED_BARRIER: u64 = 1;

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn kernel_program() -> Program {
    emit_program(W, &KernelLayout::packed(W), Fixed64::ONE).unwrap()
}

fn vector_point(mix: FuMix) -> (u64, u64) {
    let cfg = kernel_config(mix);
    let layout = KernelLayout::packed(W);
    let inputs = generate_inputs(W, 0);
    let p = emit_program(W, &layout, inputs.s_k_fixed()).unwrap();
    let cycles = run_kernel(&p, &cfg, &inputs, &layout).unwrap().report.total_cycles;
    (cycles, estimate_vector(&cfg, &Calibration::default()).slices)
}

fn sequential_point() -> (u64, u64) {
    // The sequential machine runs the same program with one unit per class.
    let (cycles, _) = vector_point(FuMix::symmetric(1));
    (cycles, estimate_sequential(&Calibration::default()).slices)
}

fn tiled_point() -> (u64, u64) {
    let k = dataflow_kernel(W);
    let cycles = tiled_latency(&k, &kernel_config(FuMix::symmetric(1)), TILED_BARRIER).unwrap();
    (cycles, estimate_tiled(&k, &Calibration::default()).unwrap().slices)
}

fn symmetric_scaling() -> Outcome {
    let (l1, s1) = vector_point(FuMix::symmetric(1));
    let (l24, s24) = vector_point(FuMix::symmetric(24));
    let lat = l1 as f64 / l24 as f64;
    let res = s24 as f64 / s1 as f64;
    check(within(lat, 15.0, 25.0) && within(res, 3.8, 4.2), format!("latency x{lat:.2}, slices x{res:.3}"))
}

fn divider_trade_off() -> Outcome {
    let (l888, s888) = vector_point(FuMix::new(8, 8, 8));
    let (l8824, s8824) = vector_point(FuMix::new(8, 8, 24));
    let (l2488, _) = vector_point(FuMix::new(24, 8, 8));
    let (l8248, _) = vector_point(FuMix::new(8, 24, 8));
    let lat = l888 as f64 / l8824 as f64;
    let res = s8824 as f64 / s888 as f64;
    let dominates = l8824 < l2488 && l8824 < l8248;
    check(
        within(lat, 1.8, 3.0) && within(res, 1.35, 1.45) && dominates,
        format!("latency x{lat:.2}, slices x{res:.3}, 8-8-24={l8824} vs 24-8-8={l2488}, 8-24-8={l8248}"),
    )
}

fn vector_vs_sequential() -> Outcome {
    let (ls, ss) = sequential_point();
    let (lv, sv) = vector_point(FuMix::new(8, 8, 24));
    let lat = ls as f64 / lv as f64;
    let res = sv as f64 / ss as f64;
    check(within(lat, 12.0, 22.0) && within(res, 2.4, 2.6), format!("latency x{lat:.2}, slices x{res:.3}"))
}

fn tiled_comparisons() -> Outcome {
    let (ls, ss) = sequential_point();
    let (lt, st) = tiled_point();
    let (_, sv) = vector_point(FuMix::new(8, 8, 24));
    let res = st as f64 / ss as f64;
    let lat = ls as f64 / lt as f64;
    let ordered = st > sv && sv > ss;
    check(
        within(res, 5.0, 15.0) && within(lat, 4.0, 30.0) && ordered,
        format!("slices x{res:.2}, latency x{lat:.2}, slices tiled {st} > vector {sv} > sequential {ss}: {ordered}"),
    )
}

fn arithmetic_oracle() -> Outcome {
    type Op = fn(Fixed64, Fixed64, &mut ArithFlags) -> Fixed64;
    type Reference = fn(i64, i64) -> RefResult;
    let ops: [(&str, Op, Reference); 4] = [
        ("add", Fixed64::add, ref_add),
        ("sub", Fixed64::sub, ref_sub),
        ("mul", Fixed64::mul, ref_mul),
        ("div", Fixed64::div, ref_div),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    let mut mismatches = Vec::new();
    for (name, op, reference) in ops {
        let mut bad = 0u32;
        for _ in 0..100_000 {
            let (a, b) = (interesting_raw(&mut rng), interesting_raw(&mut rng));
            let mut fl = ArithFlags::default();
            let r = op(Fixed64::from_raw(a), Fixed64::from_raw(b), &mut fl);
            let got = RefResult { raw: r.raw(), overflow: fl.overflow, div_by_zero: fl.div_by_zero };
            if got != reference(a, b) {
                bad += 1;
            }
        }
        if bad > 0 {
            mismatches.push(format!("{name}: {bad}"));
        }
    }
    check(mismatches.is_empty(), format!("4 x 100000 pairs, mismatches [{}]", mismatches.join(", ")))
}

fn kernel_accuracy() -> Outcome {
    let layout = KernelLayout::packed(W);
    let cfg = kernel_config(FuMix::new(8, 8, 24));
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let inputs = generate_inputs(W, seed);
        let p = emit_program(W, &layout, inputs.s_k_fixed()).unwrap();
        let got = run_kernel(&p, &cfg, &inputs, &layout).unwrap().outputs;
        let want = oracle::<f64>(&inputs).unwrap();
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max(((g.to_real() - w) / w).abs());
        }
    }
    check(worst <= 1e-6, format!("100 seeds, worst relative error {worst:.3e}"))
}

fn shipped_programs() -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let mut out: Vec<(PathBuf, String)> = std::fs::read_dir(&dir)
        .map(|rd| {
            rd.filter_map(Result::ok)
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|x| x == "asm"))
                .map(|p| {
                    let text = std::fs::read_to_string(&p).unwrap();
                    (p, text)
                })
                .collect()
        })
        .unwrap_or_default();
    out.sort();
    out
}

fn structural_properties() -> Outcome {
    let mut failures = Vec::new();
    let shipped = shipped_programs();
    if shipped.is_empty() {
        failures.push("no shipped programs found".to_string());
    }
    let mut programs: Vec<Program> = vec![kernel_program()];
    for (path, text) in &shipped {
        match assemble(text) {
            Ok(p) => programs.push(p),
            Err(e) => failures.push(format!("{}: {e}", path.display())),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let base = CoreConfig::default();
    let mixes = [FuMix::new(1, 1, 1), FuMix::new(8, 8, 8), FuMix::new(8, 8, 24), FuMix::new(24, 24, 24)];
    let mut random = 0;
    for i in 0..1000 {
        let p = random_program(&mut rng, &base);
        let cfg = base.with_mix(mixes[i % mixes.len()]);
        let (st, executed) = trace(&p, &cfg, 100_000);
        if !st.halted || st.cycles != analytic_cycles(&p, &cfg, &executed) {
            failures.push(format!("random program {i}: cycles differ from analytic sum"));
        }
        let reports: Vec<_> =
            mixes.iter().map(|&m| run(&p, &base.with_mix(m), &[], 0..base.dmem_words, u64::MAX).unwrap()).collect();
        if reports[1..].iter().any(|r| r.memory != reports[0].memory || r.flags != reports[0].flags) {
            failures.push(format!("random program {i}: values depend on unit mix"));
        }
        programs.push(p);
        random += 1;
    }
    for (i, p) in programs.iter().enumerate() {
        let text = disassemble(p);
        match assemble(&text) {
            Ok(back) if back.same_code(p) && disassemble(&back) == text => {}
            _ => failures.push(format!("program {i}: round trip differs")),
        }
    }
    failures.truncate(5);
    check(
        failures.is_empty(),
        format!(
            "{} shipped + {random} random programs; {}",
            shipped.len(),
            if failures.is_empty() { "ok".into() } else { failures.join("; ") }
        ),
    )
}

fn pareto_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xFA7E);
    let mut bad = 0;
    for _ in 0..100 {
        let n = rng.gen_range(0..=200);
        // A small value range forces ties and duplicates.
        let hi = if rng.gen_bool(0.5) { 20 } else { 100_000 };
        let pts: Vec<(u64, u64)> = (0..n).map(|_| (rng.gen_range(1..hi), rng.gen_range(1..hi))).collect();
        if pareto_flags(&pts) != brute_pareto(&pts) {
            bad += 1;
        }
    }
    check(bad == 0, format!("100 sets, {bad} mismatches"))
}

fn amdahl_spot_values() -> Outcome {
    let a: f64 = amdahl(0.35, f64::INFINITY).unwrap();
    let b: f64 = amdahl(0.0006, 10.0).unwrap();
    check((a - 1.538).abs() <= 1e-3 && (b - 1.00054).abs() <= 1e-4, format!("{a:.5}, {b:.6}"))
}

#[test]
fn acceptance_criteria() {
    type Criterion = fn() -> Outcome;
    let criteria: [(&str, Criterion); 9] = [
        ("1 symmetric scaling", symmetric_scaling),
        ("2 divider trade-off", divider_trade_off),
        ("3 vector vs sequential", vector_vs_sequential),
        ("4 tiled comparisons", tiled_comparisons),
        ("5 arithmetic oracle", arithmetic_oracle),
        ("6 kernel accuracy", kernel_accuracy),
        ("7 structural properties", structural_properties),
        ("8 pareto correctness", pareto_correctness),
        ("9 amdahl spot values", amdahl_spot_values),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let o = f();
        println!("{} {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        if !o.ok {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
