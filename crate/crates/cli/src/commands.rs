//! Subcommand implementations. Each writes its primary output to `out`
//! (or to a file) and warnings to `err`.

use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::Path;

use serde::Serialize;

use vproc_core::archmodels::{sequential_config, tiled_latency};
use vproc_core::dse::{amdahl, pareto_flags, sweep, throughput_projection, DesignPoint, DseError};
use vproc_core::isa::{assemble, validate, Program};
use vproc_core::kernelbench::{dataflow_kernel, emit_program, generate_inputs, oracle, program_source, KernelLayout};
use vproc_core::resource::{estimate_sequential, estimate_tiled, estimate_vector};
use vproc_core::vectorcore::{self, instr_cost, CoreConfig, ExecReport, FuMix, SimError};

use crate::config_file::{self, RunConfig};
use crate::data_file::{self, DataTable};
use crate::report::{self, CompareRatios, CompareReport, CompareRow, ProjectReport, RunReport, Speedup, Throughput};
use crate::{Cli, CliError, Command};

type Out<'a> = &'a mut dyn Write;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: Out, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::Input(format!("cannot write output: {e}"))),
    }
}

fn warn(err: Out, msg: &str) {
    let _ = writeln!(err, "warning: {msg}");
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => config_file::parse(&read(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => Ok(RunConfig::default()),
    }
}

pub fn load_program(path: &Path) -> Result<Program, CliError> {
    assemble(&read(path)?).map_err(|errs| {
        let lines: Vec<String> = errs.0.iter().map(|e| format!("{}: {e}", path.display())).collect();
        CliError::Input(lines.join("\n"))
    })
}

fn load_data(path: Option<&Path>) -> Result<DataTable, CliError> {
    match path {
        Some(p) => DataTable::parse(&read(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => Ok(DataTable::default()),
    }
}

fn check_program(program: &Program, cfg: &CoreConfig, path: &Path) -> Result<(), CliError> {
    let diags = validate(program, cfg);
    if diags.is_empty() {
        return Ok(());
    }
    let lines: Vec<String> = diags.iter().map(|d| format!("{}: {d}", path.display())).collect();
    Err(CliError::Input(lines.join("\n")))
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::Invalid(_) | SimError::Input(_) => CliError::Input(e.to_string()),
        SimError::NonTermination { .. } | SimError::Fault { .. } => CliError::Fault(e.to_string()),
    }
}

fn dse_error(e: DseError) -> CliError {
    match e {
        DseError::Config { label, source } => match sim_error(source) {
            CliError::Input(m) => CliError::Input(format!("mix {label}: {m}")),
            CliError::Fault(m) => CliError::Fault(format!("mix {label}: {m}")),
        },
        other => CliError::Input(other.to_string()),
    }
}

fn flag_warnings(report: &ExecReport, err: Out) {
    if report.flags.div_by_zero {
        warn(err, "division by zero occurred; affected results are saturated");
    }
    if report.flags.overflow {
        warn(err, "arithmetic overflow occurred; affected results are saturated");
    }
}

/// Parses `START..END`.
pub fn parse_range(text: &str) -> Result<Range<usize>, CliError> {
    let bad = || CliError::Input(format!("observe range '{text}' is not START..END"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let (a, b) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok(a..b)
}

/// Parses `A-M-D,A-M-D,...` or `sym:N,N,...`.
pub fn parse_mix_spec(spec: &str) -> Result<Vec<FuMix>, CliError> {
    let spec = spec.trim();
    let (items, symmetric) = match spec.strip_prefix("sym:") {
        Some(rest) => (rest, true),
        None => (spec, false),
    };
    if items.trim().is_empty() {
        return Err(CliError::Input("empty mix specification".into()));
    }
    items
        .split(',')
        .map(|item| {
            let item = item.trim();
            if symmetric {
                item.parse::<usize>()
                    .map(FuMix::symmetric)
                    .map_err(|_| CliError::Input(format!("bad unit count '{item}' in mix specification")))
            } else {
                item.parse::<FuMix>().map_err(CliError::Input)
            }
        })
        .collect()
}

pub fn execute(cli: Cli, out: Out, err: Out) -> Result<(), CliError> {
    match cli.command {
        Command::Asm { program, config, check } => cmd_asm(&program, config.as_deref(), check, out),
        Command::Run { program, config, data, observe, out: path } => {
            cmd_run(&program, config.as_deref(), data.as_deref(), observe.as_deref(), path.as_deref(), out, err)
        }
        Command::Sweep { program, mix, config, data, out: path } => {
            cmd_sweep(&program, &mix, config.as_deref(), data.as_deref(), path.as_deref(), out)
        }
        Command::Compare { config, data, out: path } => {
            cmd_compare(config.as_deref(), data.as_deref(), path.as_deref(), out)
        }
        Command::Project { latency, slices, budget, clock, fraction, speedup, config, out: path } => {
            let cfg = load_config(config.as_deref())?;
            let point = match (latency, slices, budget) {
                (Some(l), Some(s), Some(b)) => Some((l, s, b)),
                _ => None,
            };
            let clock = clock.unwrap_or(cfg.core.clock_mhz);
            let amdahl_args = fraction.zip(speedup);
            cmd_project(point, clock, amdahl_args, path.as_deref(), out)
        }
        Command::KernelGen { veclen, seed, out_prefix } => cmd_kernel_gen(veclen, seed, &out_prefix, out),
    }
}

pub fn cmd_asm(path: &Path, config: Option<&Path>, check_only: bool, out: Out) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let program = load_program(path)?;
    check_program(&program, &cfg.core, path)?;
    if !check_only {
        let mut text = String::new();
        for (i, ins) in program.instructions.iter().enumerate() {
            let line = format!("{i:>5}  {ins}");
            text.push_str(&format!("{line:<40}; {} cycles\n", instr_cost(ins, &cfg.core)));
        }
        emit(out, None, &text)?;
    }
    Ok(())
}

pub fn cmd_run(
    path: &Path,
    config: Option<&Path>,
    data: Option<&Path>,
    observe: Option<&str>,
    report_path: Option<&Path>,
    out: Out,
    err: Out,
) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let program = load_program(path)?;
    let table = load_data(data)?;
    let inputs = table.data_init(&cfg.core)?;
    let observe = match observe {
        Some(text) => parse_range(text)?,
        None => {
            let start = KernelLayout::packed(cfg.core.vec_len).out as usize;
            start.min(cfg.core.dmem_words)..(start + cfg.core.vec_len).min(cfg.core.dmem_words)
        }
    };
    let result = vectorcore::run(&program, &cfg.core, &inputs, observe, cfg.max_cycles);
    let report = result.map_err(sim_error)?;
    flag_warnings(&report, err);
    emit(out, report_path, &report::to_json(&RunReport::from(&report)))
}

#[derive(Serialize)]
struct SweepRow<'a> {
    label: &'a str,
    n_add: usize,
    n_mul: usize,
    n_div: usize,
    latency_cycles: u64,
    slices: u64,
    on_pareto: bool,
}

pub fn sweep_csv(points: &[DesignPoint]) -> String {
    let flags = pareto_flags(points);
    let mut w = csv::Writer::from_writer(Vec::new());
    for (p, on_pareto) in points.iter().zip(flags) {
        let mix = p.mix.unwrap_or(FuMix::symmetric(0));
        w.serialize(SweepRow {
            label: &p.label,
            n_add: mix.add,
            n_mul: mix.mul,
            n_div: mix.div,
            latency_cycles: p.latency_cycles,
            slices: p.slices,
            on_pareto,
        })
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

pub fn cmd_sweep(
    path: &Path,
    spec: &str,
    config: Option<&Path>,
    data: Option<&Path>,
    csv_path: Option<&Path>,
    out: Out,
) -> Result<(), CliError> {
    let mixes = parse_mix_spec(spec)?;
    let cfg = load_config(config)?;
    let program = load_program(path)?;
    let inputs = load_data(data)?.data_init(&cfg.core)?;
    let configs: Vec<CoreConfig> = mixes.iter().map(|&m| cfg.core.with_mix(m)).collect();
    let points = sweep(&program, &configs, &inputs, &cfg.calibration).map_err(dse_error)?;
    emit(out, csv_path, &sweep_csv(&points))
}

fn ratio(a: u64, b: u64) -> f64 {
    a as f64 / b as f64
}

pub fn compare(cfg: &RunConfig, table: &DataTable) -> Result<CompareReport, CliError> {
    let core = &cfg.core;
    let w = core.vec_len;
    let inputs = if table.columns.is_empty() { generate_inputs(w, 0) } else { table.kernel_inputs(w)? };
    let layout = KernelLayout::packed(w);
    let program = emit_program(w, &layout, inputs.s_k_fixed()).map_err(|e| CliError::Input(e.to_string()))?;
    let data = inputs.data_init(&layout).map_err(|e| CliError::Input(e.to_string()))?;
    let cycles = |c: &CoreConfig| -> Result<u64, CliError> {
        let r = vectorcore::run(&program, c, &data, 0..0, cfg.max_cycles).map_err(sim_error)?;
        Ok(r.total_cycles)
    };

    let graph = dataflow_kernel(w);
    let tiled = CompareRow {
        architecture: "tiled".into(),
        mix: None,
        latency_cycles: tiled_latency(&graph, core, cfg.barrier_cost).map_err(|e| CliError::Input(e.to_string()))?,
        slices: estimate_tiled(&graph, &cfg.calibration).map_err(|e| CliError::Input(e.to_string()))?.slices,
    };
    let sequential = CompareRow {
        architecture: "sequential".into(),
        mix: None,
        latency_cycles: cycles(&sequential_config(core))?,
        slices: estimate_sequential(&cfg.calibration).slices,
    };
    let vector = CompareRow {
        architecture: "vector".into(),
        mix: Some(core.fu_mix().to_string()),
        latency_cycles: cycles(core)?,
        slices: estimate_vector(core, &cfg.calibration).slices,
    };
    let ratios = CompareRatios {
        latency_sequential_over_vector: ratio(sequential.latency_cycles, vector.latency_cycles),
        slices_vector_over_sequential: ratio(vector.slices, sequential.slices),
        latency_sequential_over_tiled: ratio(sequential.latency_cycles, tiled.latency_cycles),
        slices_tiled_over_sequential: ratio(tiled.slices, sequential.slices),
        latency_vector_over_tiled: ratio(vector.latency_cycles, tiled.latency_cycles),
        slices_tiled_over_vector: ratio(tiled.slices, vector.slices),
    };
    Ok(CompareReport { schema_version: report::SCHEMA_VERSION, rows: vec![tiled, sequential, vector], ratios })
}

pub fn cmd_compare(config: Option<&Path>, data: Option<&Path>, path: Option<&Path>, out: Out) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let table = load_data(data)?;
    emit(out, path, &report::to_json(&compare(&cfg, &table)?))
}

pub fn project(
    point: Option<(u64, u64, u64)>,
    clock_mhz: f64,
    amdahl_args: Option<(f64, f64)>,
) -> Result<ProjectReport, CliError> {
    if point.is_none() && amdahl_args.is_none() {
        return Err(CliError::Input(
            "nothing to project: give --latency/--slices/--budget and/or --fraction/--speedup".into(),
        ));
    }
    let throughput = point
        .map(|(latency_cycles, slices, budget)| {
            let pr = throughput_projection(&DesignPoint::new("point", latency_cycles, slices), budget, clock_mhz)?;
            Ok::<_, DseError>(Throughput {
                latency_cycles,
                slices,
                slices_budget: pr.slices_budget,
                cores: pr.cores,
                clock_mhz: pr.clock_mhz,
                calls_per_second: pr.calls_per_second,
            })
        })
        .transpose()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let amdahl = amdahl_args
        .map(|(fraction, s)| {
            amdahl(fraction, s).map(|overall_speedup| Speedup {
                fraction,
                kernel_speedup: s.is_finite().then_some(s),
                overall_speedup,
            })
        })
        .transpose()
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(ProjectReport { schema_version: report::SCHEMA_VERSION, throughput, amdahl })
}

pub fn cmd_project(
    point: Option<(u64, u64, u64)>,
    clock_mhz: f64,
    amdahl_args: Option<(f64, f64)>,
    path: Option<&Path>,
    out: Out,
) -> Result<(), CliError> {
    emit(out, path, &report::to_json(&project(point, clock_mhz, amdahl_args)?))
}

/// The three kernel-gen files as `(suffix, contents)`.
pub fn kernel_files(vec_len: usize, seed: u64) -> Result<Vec<(&'static str, String)>, CliError> {
    if vec_len == 0 {
        return Err(CliError::Input("veclen must be at least 1".into()));
    }
    let inputs = generate_inputs(vec_len, seed);
    let layout = KernelLayout::packed(vec_len);
    let expected = oracle::<f64>(&inputs).map_err(|e| CliError::Input(e.to_string()))?;
    let mut asm = program_source(vec_len, &layout, inputs.s_k_fixed());
    asm.insert_str(0, &format!("; seed {seed}; inputs in the matching .csv file\n"));
    Ok(vec![
        (".asm", asm),
        (".csv", data_file::render_kernel_inputs(&inputs)),
        (".expected.csv", data_file::render_outputs(&expected)),
    ])
}

pub fn cmd_kernel_gen(vec_len: usize, seed: u64, prefix: &Path, out: Out) -> Result<(), CliError> {
    for (suffix, text) in kernel_files(vec_len, seed)? {
        let mut name = prefix.as_os_str().to_owned();
        name.push(suffix);
        let path = Path::new(&name);
        write_file(path, &text)?;
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(())
}
