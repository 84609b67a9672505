mod common;

use common::{random_instance, rng, simulate, tail_feasible};
use mpisp_core::solution::{Problem, Route, Scoring, Solution};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn random_route(r: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (1..=n).collect();
    all.shuffle(r);
    let len = r.gen_range(0..=n.min(5));
    all.truncate(len);
    all
}

#[test]
fn feasibility_matches_simulator() {
    let mut r = rng(21);
    let mut feasible = 0;
    for _ in 0..60 {
        let n = r.gen_range(1..=8);
        let w = r.gen_range(1..=3);
        let length = r.gen_range(40.0..120.0);
        let p = Problem::new(random_instance(&mut r, n, w, 1, length, 60.0));
        for _ in 0..50 {
            let route = random_route(&mut r, n);
            let sim = simulate(&p.inst, &route);
            let built = Route::build(&p, route.clone());
            assert_eq!(built.is_ok(), sim.feasible, "{route:?}: {built:?}");
            if let Ok(b) = built {
                feasible += 1;
                for (vis, st) in b.visits().iter().zip(&sim.starts) {
                    assert!((vis.start - st).abs() < 1e-9);
                }
            }
        }
    }
    assert!(feasible > 200, "too few feasible samples: {feasible}");
}

#[test]
fn latest_arrival_is_tight() {
    let mut r = rng(22);
    let mut checked = 0;
    for _ in 0..80 {
        let n = r.gen_range(1..=8);
        let w = r.gen_range(1..=3);
        let length = r.gen_range(40.0..120.0);
        let p = Problem::new(random_instance(&mut r, n, w, 1, length, f64::INFINITY));
        for _ in 0..20 {
            let Ok(route) = Route::build(&p, random_route(&mut r, n)) else { continue };
            for (pos, &la) in route.latest().iter().enumerate() {
                assert!(la >= route.visits()[pos].arrival - 1e-9);
                assert!(tail_feasible(&p.inst, route.stops(), pos, la), "la {la} at {pos} infeasible");
                assert!(!tail_feasible(&p.inst, route.stops(), pos, la + 1e-6), "la {la} at {pos} not latest");
                checked += 1;
            }
        }
    }
    assert!(checked > 100);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn removing_a_supplier_keeps_a_route_feasible(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=8);
        let w = r.gen_range(1..=3);
        let length = r.gen_range(40.0..120.0);
        let p = Problem::new(random_instance(&mut r, n, w, 1, length, 80.0));
        for _ in 0..20 {
            let seq = random_route(&mut r, n);
            if seq.is_empty() || Route::build(&p, seq.clone()).is_err() {
                continue;
            }
            for k in 0..seq.len() {
                let mut shorter = seq.clone();
                shorter.remove(k);
                prop_assert!(Route::build(&p, shorter).is_ok());
            }
        }
    }

    #[test]
    fn served_workload_ignores_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = Problem::new(random_instance(&mut r, 6, 2, 2, 200.0, f64::INFINITY));
        let seq = random_route(&mut r, 6);
        let mut rev = seq.clone();
        rev.reverse();
        let a = Solution::from_sequences(&p, Scoring::default(), &[seq, vec![]]);
        let b = Solution::from_sequences(&p, Scoring::default(), &[rev, vec![]]);
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert_eq!(a.fitness().p, b.fitness().p);
        }
    }
}
