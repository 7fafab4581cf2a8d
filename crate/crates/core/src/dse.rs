//! Design-space exploration: FU-mix sweeps, Pareto filtering, multi-core
//! throughput and whole-application speedup projections.

use num_traits::Float;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::isa::{validate, DataInit, Program};
use crate::resource::{estimate_vector, Calibration};
use crate::vectorcore::{self, CoreConfig, SimError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DseError {
    #[error("config {label}: {source}")]
    Config {
        label: String,
        #[source]
        source: SimError,
    },
    #[error("slice budget {budget} cannot hold one core of {slices} slices")]
    BudgetTooSmall { budget: u64, slices: u64 },
    #[error("design point needs positive latency and slices")]
    DegeneratePoint,
    #[error("clock must be a positive frequency")]
    BadClock,
    #[error("fraction {0} outside [0, 1]")]
    Fraction(f64),
    #[error("kernel speedup {0} must be at least 1")]
    Speedup(f64),
    #[error("speedup is unbounded when the whole application is accelerated infinitely")]
    Unbounded,
}

/// One evaluated configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub label: String,
    /// Unit counts, or `None` for non-vector architectures.
    pub mix: Option<vectorcore::FuMix>,
    pub latency_cycles: u64,
    pub slices: u64,
}

impl DesignPoint {
    pub fn new(label: impl Into<String>, latency_cycles: u64, slices: u64) -> Self {
        Self { label: label.into(), mix: None, latency_cycles, slices }
    }
}

/// Anything with a latency and a resource cost.
pub trait Costed {
    fn latency(&self) -> u64;
    fn slices(&self) -> u64;
}

impl Costed for DesignPoint {
    fn latency(&self) -> u64 {
        self.latency_cycles
    }
    fn slices(&self) -> u64 {
        self.slices
    }
}

impl Costed for (u64, u64) {
    fn latency(&self) -> u64 {
        self.0
    }
    fn slices(&self) -> u64 {
        self.1
    }
}

/// Simulates `program` under every config (in parallel) and prices each
/// with the vector resource model. Output order follows `configs`.
pub fn sweep(
    program: &Program,
    configs: &[CoreConfig],
    inputs: &[DataInit],
    cal: &Calibration,
) -> Result<Vec<DesignPoint>, DseError> {
    configs
        .par_iter()
        .map(|cfg| {
            let label = cfg.fu_mix().to_string();
            let diags = validate(program, cfg);
            if !diags.is_empty() {
                return Err(DseError::Config { label, source: SimError::Invalid(diags) });
            }
            let report = vectorcore::run(program, cfg, inputs, 0..0, vectorcore::DEFAULT_MAX_CYCLES)
                .map_err(|source| DseError::Config { label: label.clone(), source })?;
            Ok(DesignPoint {
                label,
                mix: Some(cfg.fu_mix()),
                latency_cycles: report.total_cycles,
                slices: estimate_vector(cfg, cal).slices,
            })
        })
        .collect()
}

/// Membership flags for the Pareto frontier (minimising both latency and
/// slices). A point is dropped only if another is no worse in both and
/// strictly better in one, so exact duplicates are all kept.
pub fn pareto_flags<P: Costed>(points: &[P]) -> Vec<bool> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| (points[i].latency(), points[i].slices()));
    let mut flags = vec![false; points.len()];
    // Smallest slice count among strictly lower latencies seen so far.
    let mut best_before = u64::MAX;
    let mut i = 0;
    while i < order.len() {
        let lat = points[order[i]].latency();
        let mut j = i;
        while j < order.len() && points[order[j]].latency() == lat {
            j += 1;
        }
        // Sorted by slices within the group: only the group minimum can
        // survive, and only if nothing faster is at least as small.
        let group_min = points[order[i]].slices();
        if group_min < best_before {
            for &k in &order[i..j] {
                if points[k].slices() == group_min {
                    flags[k] = true;
                }
            }
        }
        best_before = best_before.min(group_min);
        i = j;
    }
    flags
}

/// The non-dominated subset, in input order.
pub fn pareto<P: Costed + Clone>(points: &[P]) -> Vec<P> {
    points.iter().zip(pareto_flags(points)).filter(|(_, keep)| *keep).map(|(p, _)| p.clone()).collect()
}

/// Replicated-core throughput under a slice budget, with an optional
/// whole-application speedup attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub slices_budget: u64,
    pub cores: u64,
    pub clock_mhz: f64,
    pub calls_per_second: f64,
    pub amdahl_fraction: f64,
    pub overall_speedup: f64,
}

impl Projection {
    pub fn with_amdahl(mut self, fraction: f64, kernel_speedup: f64) -> Result<Self, DseError> {
        self.overall_speedup = amdahl(fraction, kernel_speedup)?;
        self.amdahl_fraction = fraction;
        Ok(self)
    }
}

/// Fills the budget with independent copies of the core.
pub fn throughput_projection(point: &DesignPoint, slices_budget: u64, clock_mhz: f64) -> Result<Projection, DseError> {
    if point.slices == 0 || point.latency_cycles == 0 {
        return Err(DseError::DegeneratePoint);
    }
    if !(clock_mhz.is_finite() && clock_mhz > 0.0) {
        return Err(DseError::BadClock);
    }
    let cores = slices_budget / point.slices;
    if cores == 0 {
        return Err(DseError::BudgetTooSmall { budget: slices_budget, slices: point.slices });
    }
    Ok(Projection {
        slices_budget,
        cores,
        clock_mhz,
        calls_per_second: cores as f64 * clock_mhz * 1e6 / point.latency_cycles as f64,
        amdahl_fraction: 0.0,
        overall_speedup: 1.0,
    })
}

/// Overall speedup when a fraction `f` of runtime is sped up by `s`;
/// `s = +inf` models an infinitely fast kernel.
pub fn amdahl<T: Float>(f: T, s: T) -> Result<T, DseError> {
    let as_f64 = |x: T| x.to_f64().unwrap_or(f64::NAN);
    if !(f >= T::zero() && f <= T::one()) {
        return Err(DseError::Fraction(as_f64(f)));
    }
    if s.is_nan() || s < T::one() {
        return Err(DseError::Speedup(as_f64(s)));
    }
    let serial = T::one() - f;
    let accelerated = if s.is_infinite() { T::zero() } else { f / s };
    let denom = serial + accelerated;
    if denom == T::zero() {
        return Err(DseError::Unbounded);
    }
    Ok(T::one() / denom)
}
