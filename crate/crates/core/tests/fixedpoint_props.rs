mod common;

use common::{ref_add, ref_div, ref_mul, ref_sub, RefResult};
use proptest::prelude::*;
use vproc_core::{ArithFlags, Fixed64};

fn run(op: fn(Fixed64, Fixed64, &mut ArithFlags) -> Fixed64, a: i64, b: i64) -> RefResult {
    let mut fl = ArithFlags::default();
    let r = op(Fixed64::from_raw(a), Fixed64::from_raw(b), &mut fl);
    RefResult { raw: r.raw(), overflow: fl.overflow, div_by_zero: fl.div_by_zero }
}

fn raw_strategy() -> impl Strategy<Value = i64> {
    prop_oneof![any::<i64>(), -(1i64 << 40)..(1i64 << 40), Just(0i64), Just(i64::MAX), Just(i64::MIN),]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn add_matches_wide_reference(a in raw_strategy(), b in raw_strategy()) {
        prop_assert_eq!(run(Fixed64::add, a, b), ref_add(a, b));
        prop_assert_eq!(run(Fixed64::sub, a, b), ref_sub(a, b));
    }

    #[test]
    fn mul_matches_wide_reference(a in raw_strategy(), b in raw_strategy()) {
        prop_assert_eq!(run(Fixed64::mul, a, b), ref_mul(a, b));
    }

    #[test]
    fn div_matches_wide_reference(a in raw_strategy(), b in raw_strategy()) {
        prop_assert_eq!(run(Fixed64::div, a, b), ref_div(a, b));
    }

    #[test]
    fn add_and_mul_commute(a in any::<i64>(), b in any::<i64>()) {
        prop_assert_eq!(run(Fixed64::add, a, b), run(Fixed64::add, b, a));
        prop_assert_eq!(run(Fixed64::mul, a, b), run(Fixed64::mul, b, a));
    }

    #[test]
    fn exact_values_round_trip(raw in -(1i64 << 52)..(1i64 << 52)) {
        // |raw| < 2^52 keeps the value below 2^20 with at most 53 significant bits.
        let x = raw as f64 / 2f64.powi(32);
        let v = Fixed64::from_real(x).unwrap();
        prop_assert_eq!(v.raw(), raw);
        prop_assert_eq!(v.to_real(), x);
    }

    #[test]
    fn conversion_is_nearest(x in -3.0e9f64..3.0e9) {
        let v = Fixed64::from_real(x).unwrap();
        let scaled = x * 2f64.powi(32);
        if scaled.abs() < 2f64.powi(62) {
            prop_assert!((v.raw() as f64 - scaled).abs() <= 0.5);
        } else if x > 0.0 && scaled >= 2f64.powi(63) {
            prop_assert_eq!(v, Fixed64::MAX);
        } else if x < 0.0 && scaled < -(2f64.powi(63)) {
            prop_assert_eq!(v, Fixed64::MIN);
        }
    }

    #[test]
    fn saturation_hits_the_bound(a in (1i64 << 62)..i64::MAX, b in (1i64 << 62)..i64::MAX) {
        let r = run(Fixed64::add, a, b);
        prop_assert!(r.overflow);
        prop_assert_eq!(r.raw, i64::MAX);
        let r = run(Fixed64::sub, -a, b);
        prop_assert!(r.overflow);
        prop_assert_eq!(r.raw, i64::MIN);
    }
}

#[test]
fn div_by_zero_signs() {
    assert_eq!(ref_div(5, 0).raw, i64::MAX);
    assert_eq!(run(Fixed64::div, -5, 0), ref_div(-5, 0));
    assert_eq!(run(Fixed64::div, 0, 0), ref_div(0, 0));
    assert!(run(Fixed64::div, 0, 0).div_by_zero);
}

#[test]
fn third_times_three_floors() {
    let third = Fixed64::from_real(1.0 / 3.0).unwrap();
    let three = Fixed64::from_real(3.0).unwrap();
    assert_eq!(ref_mul(third.raw(), three.raw()).raw, 0xFFFF_FFFF);
    assert_eq!(ref_div(1 << 32, 3 << 32).raw, 1_431_655_765);
}
