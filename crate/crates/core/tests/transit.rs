mod common;

use common::{oracle_arrival, oracle_transit, random_instance, rng};
use mpisp_core::transit::TransitTables;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn queries_match_time_expanded_oracle() {
    let mut r = rng(11);
    for _ in 0..40 {
        let n = r.gen_range(1..=10);
        let w = r.gen_range(1..=4);
        let length = r.gen_range(15.0..90.0);
        let inst = random_instance(&mut r, n, w, 1, length, f64::INFINITY);
        let tt = TransitTables::new(&inst);
        for _ in 0..200 {
            let i = r.gen_range(0..=n);
            let j = r.gen_range(0..=n);
            let dt = if r.gen_bool(0.2) {
                length * r.gen_range(0..=w) as f64
            } else {
                r.gen_range(0.0..inst.horizon())
            };
            let got = tt.query(i, j, dt).unwrap();
            let want = oracle_transit(&inst, i, j, dt);
            assert!(
                got == want || (got - want).abs() <= 1e-9,
                "{i}->{j} at {dt}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn base_table_equals_oracle_at_openings() {
    let mut r = rng(12);
    for _ in 0..30 {
        let n = r.gen_range(2..=8);
        let length = r.gen_range(20.0..60.0);
        let inst = random_instance(&mut r, n, 3, 1, length, f64::INFINITY);
        let tt = TransitTables::new(&inst);
        for i in 0..=n {
            for j in 0..=n {
                let want = oracle_transit(&inst, i, j, 0.0);
                let got = tt.base().get(i, j);
                assert!(got == want || (got - want).abs() <= 1e-9);
                assert!(got >= inst.travel(i, j) - 1e-9);
            }
        }
    }
}

#[test]
fn prefix_minima_equal_naive_recomputation() {
    let mut r = rng(13);
    let inst = random_instance(&mut r, 7, 2, 1, 40.0, f64::INFINITY);
    let tt = TransitTables::new(&inst);
    let order = tt.neighbor_order();
    for i in 0..=7 {
        let nbrs = order.of(i);
        for k in 0..nbrs.len() {
            for j in 0..=7 {
                let naive = nbrs[..=k].iter().map(|&u| tt.base().get(u, j)).fold(f64::INFINITY, f64::min);
                assert_eq!(tt.prefix_min(i, k, j), naive);
            }
        }
    }
}

#[test]
fn latest_departure_agrees_with_scan() {
    let mut r = rng(14);
    for _ in 0..25 {
        let n = r.gen_range(2..=8);
        let w = r.gen_range(1..=4);
        let length = r.gen_range(20.0..70.0);
        let inst = random_instance(&mut r, n, w, 1, length, f64::INFINITY);
        let tt = TransitTables::new(&inst);
        let horizon = inst.horizon();
        for _ in 0..40 {
            let i = r.gen_range(0..=n);
            let j = r.gen_range(0..=n);
            let deadline = r.gen_range(0.0..horizon * 1.2);
            let ld = tt.latest_departure(i, j, deadline);
            let step = horizon / 2000.0;
            let scan_best = (0..=2000)
                .map(|s| s as f64 * step)
                .filter(|&dt| oracle_arrival(&inst, i, j, dt) <= deadline + 1e-9)
                .fold(f64::NEG_INFINITY, f64::max);
            if ld == f64::NEG_INFINITY {
                assert!(oracle_arrival(&inst, i, j, 0.0) > deadline + 1e-9);
                assert_eq!(scan_best, f64::NEG_INFINITY);
                continue;
            }
            assert!(ld >= -1e-9 && ld <= horizon + 1e-9);
            assert!(oracle_arrival(&inst, i, j, ld) <= deadline + 1e-6, "{i}->{j} by {deadline}: {ld}");
            assert!(ld >= scan_best - 1e-9);
            let later = ld + 1e-6;
            if later <= horizon {
                assert!(oracle_arrival(&inst, i, j, later) > deadline - 1e-9, "{i}->{j} by {deadline}: {ld} not latest");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn arrival_is_fifo(seed in any::<u64>(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=8);
        let w = r.gen_range(1..=4);
        let length = r.gen_range(15.0..80.0);
        let inst = random_instance(&mut r, n, w, 1, length, f64::INFINITY);
        let tt = TransitTables::new(&inst);
        let (d1, d2) = (a.min(b) * inst.horizon(), a.max(b) * inst.horizon());
        for i in 0..=n {
            for j in 0..=n {
                let t1 = tt.query(i, j, d1).unwrap();
                let t2 = tt.query(i, j, d2).unwrap();
                prop_assert!(d1 + t1 <= d2 + t2 + 1e-9);
                prop_assert!(t1 >= inst.travel(i, j) - 1e-9);
            }
        }
    }
}
