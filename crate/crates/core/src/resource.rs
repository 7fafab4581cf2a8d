//! Linear slice-count model for the three architectures.
//!
//! Every estimate is a base overhead plus a per-unit cost for each
//! functional unit instantiated. [`calibrate`] derives the coefficients
//! from target resource ratios between configurations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archmodels::{DataflowKernel, GraphError};
use crate::isa::OpClass;
use crate::vectorcore::{CoreConfig, FuMix};

/// Slice-cost coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c_add: f64,
    pub c_mul: f64,
    pub c_div: f64,
    pub c_convert: f64,
    /// Controller, register bank and sequencing wrapper of a vector core.
    pub base_vector: f64,
    /// Controller and array-operation wrappers of the sequential machine.
    pub base_seq: f64,
    pub c_tiled_barrier: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            c_add: 350.0,
            c_mul: 900.0,
            c_div: 750.0,
            c_convert: 800.0,
            base_vector: 13300.0,
            base_seq: 14520.0,
            c_tiled_barrier: 400.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("infeasible calibration: {0}")]
    Infeasible(String),
    #[error("calibrated {name} ratio {achieved:.4} misses target {target} by more than {tolerance:.1}%", tolerance = .tolerance * 100.0)]
    Residual { name: &'static str, target: f64, achieved: f64, tolerance: f64 },
}

impl Calibration {
    /// Enforces non-negativity and the multiplier > divider > adder
    /// ordering.
    pub fn check(&self) -> Result<(), CalibrationError> {
        let all =
            [self.c_add, self.c_mul, self.c_div, self.c_convert, self.base_vector, self.base_seq, self.c_tiled_barrier];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CalibrationError::Infeasible("coefficients must be finite and non-negative".into()));
        }
        if !(self.c_mul > self.c_div && self.c_div > self.c_add) {
            return Err(CalibrationError::Infeasible(format!(
                "unit costs must satisfy c_mul > c_div > c_add (got {} / {} / {})",
                self.c_mul, self.c_div, self.c_add
            )));
        }
        Ok(())
    }

    pub fn unit_cost(&self, class: OpClass) -> f64 {
        match class {
            OpClass::AddClass => self.c_add,
            OpClass::MulClass => self.c_mul,
            OpClass::DivClass => self.c_div,
            OpClass::Convert => self.c_convert,
            OpClass::Mem | OpClass::Control => 0.0,
        }
    }
}

/// Total slices with a per-component breakdown that sums to it exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub slices: u64,
    pub breakdown: BTreeMap<String, u64>,
}

impl ResourceEstimate {
    fn from_parts(parts: &[(&str, f64)]) -> Self {
        let breakdown: BTreeMap<String, u64> =
            parts.iter().map(|&(name, v)| (name.to_string(), v.round() as u64)).collect();
        Self { slices: breakdown.values().sum(), breakdown }
    }
}

pub fn estimate_vector(cfg: &CoreConfig, cal: &Calibration) -> ResourceEstimate {
    let mut parts = vec![
        ("base", cal.base_vector),
        ("add", cfg.n_add as f64 * cal.c_add),
        ("mul", cfg.n_mul as f64 * cal.c_mul),
        ("div", cfg.n_div as f64 * cal.c_div),
    ];
    if cfg.enable_converter {
        parts.push(("convert", cal.c_convert));
    }
    ResourceEstimate::from_parts(&parts)
}

/// One wrapped unit per class and no converter.
pub fn estimate_sequential(cal: &Calibration) -> ResourceEstimate {
    ResourceEstimate::from_parts(&[("base", cal.base_seq), ("add", cal.c_add), ("mul", cal.c_mul), ("div", cal.c_div)])
}

/// One unit per operation per replica, plus the barrier.
pub fn estimate_tiled(k: &DataflowKernel, cal: &Calibration) -> Result<ResourceEstimate, GraphError> {
    k.topological_order()?;
    let r = k.replication() as f64;
    let counts = k.op_counts();
    let per = |class: OpClass| r * counts.get(&class).copied().unwrap_or(0) as f64 * cal.unit_cost(class);
    let mut parts =
        vec![("add", per(OpClass::AddClass)), ("mul", per(OpClass::MulClass)), ("div", per(OpClass::DivClass))];
    if counts.contains_key(&OpClass::Convert) {
        parts.push(("convert", per(OpClass::Convert)));
    }
    parts.push(("barrier", cal.c_tiled_barrier));
    Ok(ResourceEstimate::from_parts(&parts))
}

/// Resource ratios the calibration must reproduce, plus the free choices
/// (overall unit-cost scale, adder/multiplier split, rounding grid) that
/// the ratios leave open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    /// slices(`hi`-`hi`-`hi`) / slices(1-1-1).
    pub symmetric_ratio: f64,
    pub symmetric_units: usize,
    /// slices(k-k-`div_units`) / slices(k-k-k).
    pub asymmetric_ratio: f64,
    pub asymmetric_base: usize,
    pub asymmetric_div_units: usize,
    /// slices(vector k-k-`div_units`) / slices(sequential).
    pub sequential_ratio: f64,
    /// c_add + c_mul + c_div.
    pub unit_scale: f64,
    /// Adder share of `unit_scale - c_div`.
    pub add_share: f64,
    pub c_convert: f64,
    pub c_tiled_barrier: f64,
    pub base_quantum: f64,
    pub unit_quantum: f64,
    /// Largest accepted relative miss on any ratio.
    pub max_residual: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        Self {
            symmetric_ratio: 4.0,
            symmetric_units: 24,
            asymmetric_ratio: 1.4,
            asymmetric_base: 8,
            asymmetric_div_units: 24,
            sequential_ratio: 2.5,
            unit_scale: 2000.0,
            add_share: 0.28,
            c_convert: 800.0,
            c_tiled_barrier: 400.0,
            base_quantum: 100.0,
            unit_quantum: 50.0,
            max_residual: 0.03,
        }
    }
}

fn quantize(x: f64, q: f64) -> f64 {
    if q > 0.0 {
        (x / q).round() * q
    } else {
        x
    }
}

/// Slices of a converter-less vector core; the ratios are defined on the
/// arithmetic datapath.
fn datapath_slices(mix: FuMix, cal: &Calibration) -> f64 {
    let cfg = CoreConfig { enable_converter: false, ..CoreConfig::default().with_mix(mix) };
    estimate_vector(&cfg, cal).slices as f64
}

/// Solves the ratio constraints for the vector-core base and divider cost,
/// splits the remaining unit budget between adder and multiplier, then
/// fixes the sequential base from the vector/sequential ratio.
///
/// With `s = c_add + c_mul + c_div`:
///
/// ```text
/// (base + hi*s) / (base + s)              = symmetric_ratio
/// (base + k*s + (d-k)*c_div) / (base + k*s) = asymmetric_ratio
/// slices(k-k-d) / (base_seq + s)          = sequential_ratio
/// ```
pub fn calibrate(t: &CalibrationTargets) -> Result<Calibration, CalibrationError> {
    let s = t.unit_scale;
    let hi = t.symmetric_units as f64;
    let k = t.asymmetric_base as f64;
    let d = t.asymmetric_div_units as f64;
    if t.symmetric_ratio <= 1.0 || t.asymmetric_ratio <= 1.0 || t.sequential_ratio <= 0.0 {
        return Err(CalibrationError::Infeasible("ratios must exceed 1".into()));
    }
    if d <= k || hi <= 1.0 || s <= 0.0 || !(0.0..=1.0).contains(&t.add_share) {
        return Err(CalibrationError::Infeasible("degenerate target configurations".into()));
    }

    let base = s * (hi - t.symmetric_ratio) / (t.symmetric_ratio - 1.0);
    if base < 0.0 {
        return Err(CalibrationError::Infeasible(format!(
            "symmetric ratio {} needs a negative base",
            t.symmetric_ratio
        )));
    }
    let c_div_exact = (t.asymmetric_ratio - 1.0) * (base + k * s) / (d - k);
    let base_vector = quantize(base, t.base_quantum);
    let c_div = quantize(c_div_exact, t.unit_quantum);
    let rest = s - c_div;
    if rest <= 0.0 {
        return Err(CalibrationError::Infeasible("divider cost exceeds the unit budget".into()));
    }
    let c_add = quantize(t.add_share * rest, t.unit_quantum);
    let c_mul = rest - c_add;

    let mut cal = Calibration {
        c_add,
        c_mul,
        c_div,
        c_convert: t.c_convert,
        base_vector,
        base_seq: 0.0,
        c_tiled_barrier: t.c_tiled_barrier,
    };
    let reference = FuMix::new(t.asymmetric_base, t.asymmetric_base, t.asymmetric_div_units);
    cal.base_seq = (datapath_slices(reference, &cal) / t.sequential_ratio - s).round();
    cal.check()?;

    let achieved = [
        (
            "symmetric",
            t.symmetric_ratio,
            datapath_slices(FuMix::symmetric(t.symmetric_units), &cal) / datapath_slices(FuMix::symmetric(1), &cal),
        ),
        (
            "asymmetric",
            t.asymmetric_ratio,
            datapath_slices(reference, &cal) / datapath_slices(FuMix::symmetric(t.asymmetric_base), &cal),
        ),
        ("sequential", t.sequential_ratio, datapath_slices(reference, &cal) / estimate_sequential(&cal).slices as f64),
    ];
    for (name, target, got) in achieved {
        if ((got - target) / target).abs() > t.max_residual {
            return Err(CalibrationError::Residual { name, target, achieved: got, tolerance: t.max_residual });
        }
    }
    Ok(cal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archmodels::Node;

    fn mix(a: usize, m: usize, d: usize) -> CoreConfig {
        CoreConfig { enable_converter: false, ..CoreConfig::default().with_mix(FuMix::new(a, m, d)) }
    }

    #[test]
    fn vector_estimates() {
        let cal = Calibration::default();
        assert_eq!(estimate_vector(&mix(1, 1, 1), &cal).slices, 15300);
        assert_eq!(estimate_vector(&mix(24, 24, 24), &cal).slices, 61300);
        assert_eq!(estimate_vector(&mix(8, 8, 8), &cal).slices, 29300);
        assert_eq!(estimate_vector(&mix(8, 8, 24), &cal).slices, 41300);
        let with_conv = estimate_vector(&CoreConfig::default().with_mix(FuMix::new(1, 1, 1)), &cal);
        assert_eq!(with_conv.slices, 16100);
        assert_eq!(with_conv.breakdown["convert"], 800);
    }

    #[test]
    fn sequential_estimate() {
        let e = estimate_sequential(&Calibration::default());
        assert_eq!(e.slices, 16520);
        assert!(!e.breakdown.contains_key("convert"));
        let ratio: f64 = 41300.0 / 16520.0;
        assert!((ratio - 2.5).abs() < 1e-12);
    }

    #[test]
    fn tiled_estimate() {
        let mut nodes = Vec::new();
        for i in 0..6 {
            nodes.push(Node { id: i, class: OpClass::MulClass });
        }
        nodes.push(Node { id: 6, class: OpClass::AddClass });
        nodes.push(Node { id: 7, class: OpClass::AddClass });
        for i in 8..11 {
            nodes.push(Node { id: i, class: OpClass::DivClass });
        }
        let k = DataflowKernel::new(nodes, vec![], 24).unwrap();
        let cal = Calibration::default();
        assert_eq!(estimate_tiled(&k, &cal).unwrap().slices, 200_800);
        assert_eq!(estimate_tiled(&k.with_replication(1).unwrap(), &cal).unwrap().slices, 8750);
    }

    #[test]
    fn calibrate_reproduces_default() {
        assert_eq!(calibrate(&CalibrationTargets::default()).unwrap(), Calibration::default());
    }

    #[test]
    fn calibration_residuals_by_substitution() {
        let c = Calibration::default();
        let s = c.c_add + c.c_mul + c.c_div;
        // 20 s = 3 base
        assert!(((20.0 * s - 3.0 * c.base_vector) / (3.0 * c.base_vector)).abs() < 0.003);
        // 16 c_div = 0.4 base + 3.2 s
        let rhs = 0.4 * c.base_vector + 3.2 * s;
        assert!(((16.0 * c.c_div - rhs) / rhs).abs() < 0.025);
    }

    #[test]
    fn calibrate_rejects_bad_ordering() {
        let t = CalibrationTargets { add_share: 0.9, ..CalibrationTargets::default() };
        assert!(matches!(calibrate(&t), Err(CalibrationError::Infeasible(_))));
        let t = CalibrationTargets { symmetric_ratio: 30.0, ..CalibrationTargets::default() };
        assert!(calibrate(&t).is_err());
    }

    #[test]
    fn default_ordering_holds() {
        Calibration::default().check().unwrap();
    }
}
