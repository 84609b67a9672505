//! Independent reference implementations used by the integration and
//! acceptance tests. None of these call into the transit tables or the
//! route scheduler of the library.

#![allow(dead_code)]

use mpisp_core::instance::{Instance, PeriodGrid, Supplier, TravelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EPS: f64 = 1e-9;

/// Closing time of the period containing `t`; time 0 owns a full period.
pub fn close_of(length: f64, t: f64) -> f64 {
    if t <= EPS {
        return length;
    }
    if !t.is_finite() {
        return f64::INFINITY;
    }
    let mut c = length;
    while c < t - EPS {
        c += length;
    }
    c
}

/// Earliest arrival at `j` leaving `i` at `dt`, by expanding the timeline
/// one period at a time. Within a period the traveller follows chains of
/// direct edges that end before the period closes; at the close it rests
/// at whatever vertex it has reached, and every vertex reached so far is a
/// starting point at the next opening.
pub fn oracle_arrival(inst: &Instance, i: usize, j: usize, dt: f64) -> f64 {
    let n = inst.vertex_count();
    let length = inst.grid.length();
    let mut rest = vec![false; n];
    rest[i] = true;
    let mut start = dt;
    let mut close = close_of(length, dt);
    for _ in 0..=n + 1 {
        // multi-source shortest chains inside [start, close]
        let mut dist = vec![f64::INFINITY; n];
        for v in 0..n {
            if rest[v] {
                dist[v] = 0.0;
            }
        }
        let mut done = vec![false; n];
        loop {
            let mut u = usize::MAX;
            for v in 0..n {
                if !done[v] && dist[v].is_finite() && (u == usize::MAX || dist[v] < dist[u]) {
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for v in 0..n {
                let cand = dist[u] + inst.travel(u, v);
                if start + cand <= close + EPS && cand < dist[v] {
                    dist[v] = cand;
                }
            }
        }
        if dist[j].is_finite() {
            return start + dist[j];
        }
        for v in 0..n {
            if dist[v].is_finite() {
                rest[v] = true;
            }
        }
        start = close;
        close += length;
    }
    f64::INFINITY
}

pub fn oracle_transit(inst: &Instance, i: usize, j: usize, dt: f64) -> f64 {
    oracle_arrival(inst, i, j, dt) - dt
}

/// Outcome of replaying a route event by event.
#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub feasible: bool,
    /// Service start per supplier of the route.
    pub starts: Vec<f64>,
    pub end: f64,
}

/// Replays a route: leave the depot at 0, travel by the earliest arrival,
/// wait for the window to open, wait for the next period when the service
/// would not finish before the current one closes, serve, go on.
pub fn simulate(inst: &Instance, route: &[usize]) -> Replay {
    let length = inst.grid.length();
    let horizon = inst.horizon();
    let mut at = 0usize;
    let mut t = 0.0;
    let mut starts = Vec::new();
    let mut load = 0.0;
    let mut feasible = true;
    for &v in route {
        let s = inst.supplier(v);
        load += s.workload;
        let arrive = oracle_arrival(inst, at, v, t);
        let mut begin = arrive.max(s.ready);
        let close = close_of(length, begin);
        if close - begin + EPS < s.service {
            begin = close;
        }
        starts.push(begin);
        if !(begin <= s.due + EPS) || !(begin + s.service <= horizon + EPS) {
            feasible = false;
        }
        t = begin + s.service;
        at = v;
    }
    let end = oracle_arrival(inst, at, 0, t);
    if !(end <= horizon + EPS) || load > inst.capacity + EPS {
        feasible = false;
    }
    Replay { feasible, starts, end }
}

/// Whether the tail of `route` from `pos` on can still be completed when
/// the inspector arrives at `route[pos]` at time `arrival`.
pub fn tail_feasible(inst: &Instance, route: &[usize], pos: usize, arrival: f64) -> bool {
    let length = inst.grid.length();
    let horizon = inst.horizon();
    let mut arrive = arrival;
    for (k, &v) in route.iter().enumerate().skip(pos) {
        let s = inst.supplier(v);
        let mut begin = arrive.max(s.ready);
        let close = close_of(length, begin);
        if close - begin + EPS < s.service {
            begin = close;
        }
        if !(begin <= s.due + EPS) || !(begin + s.service <= horizon + EPS) {
            return false;
        }
        let next = route.get(k + 1).copied().unwrap_or(0);
        arrive = oracle_arrival(inst, v, next, begin + s.service);
    }
    arrive <= horizon + EPS
}

/// Best served workload over all assignments of disjoint supplier subsets
/// to the inspectors, each subset served in some feasible order.
pub fn exhaustive_optimum(inst: &Instance) -> f64 {
    let n = inst.n();
    assert!(n <= 16, "exhaustive enumeration is for tiny instances");
    let mut ok = vec![false; 1 << n];
    ok[0] = true;
    let mut path = Vec::new();
    extend_routes(inst, &mut path, 0, &mut |m, _| ok[m] = true);
    let weight = |mask: usize| -> f64 {
        (0..n).filter(|b| mask >> b & 1 == 1).map(|b| inst.suppliers[b].workload).sum()
    };
    let full = (1usize << n) - 1;
    // best[m]: heaviest feasible route using only suppliers in m
    let mut best = vec![0.0f64; full + 1];
    for m in 1..=full {
        best[m] = if ok[m] {
            weight(m)
        } else {
            (0..n).filter(|b| m >> b & 1 == 1).map(|b| best[m & !(1 << b)]).fold(0.0, f64::max)
        };
    }
    for _ in 1..inst.inspectors {
        let mut next = best.clone();
        for m in 0..=full {
            let mut sub = m;
            while sub > 0 {
                if ok[sub] {
                    next[m] = next[m].max(weight(sub) + best[m & !sub]);
                }
                sub = (sub - 1) & m;
            }
        }
        best = next;
    }
    best[full]
}

fn extend_routes(inst: &Instance, path: &mut Vec<usize>, mask: usize, found: &mut dyn FnMut(usize, &[usize])) {
    for v in 1..=inst.n() {
        if mask >> (v - 1) & 1 == 1 {
            continue;
        }
        path.push(v);
        // a prefix that misses a window stays infeasible when extended,
        // but a prefix failing only the depot return may not; keep going
        // while every service so far met its window
        let r = simulate(inst, path);
        let windows_ok = path
            .iter()
            .zip(&r.starts)
            .all(|(&u, &st)| st <= inst.supplier(u).due + EPS && st + inst.service(u) <= inst.horizon() + EPS);
        let load: f64 = path.iter().map(|&u| inst.workload(u)).sum();
        if windows_ok && load <= inst.capacity + EPS {
            let m = mask | 1 << (v - 1);
            if r.feasible {
                found(m, path);
            }
            extend_routes(inst, path, m, found);
        }
        path.pop();
    }
}

/// Every feasible single route, as supplier sequences.
pub fn feasible_routes(inst: &Instance) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    extend_routes(inst, &mut Vec::new(), 0, &mut |_, path| out.push(path.to_vec()));
    out
}

/// 0/1 knapsack optimum by DP over integer weights.
pub fn knapsack_dp(values: &[f64], weights: &[usize], capacity: usize) -> f64 {
    let mut best = vec![0.0f64; capacity + 1];
    for (v, &w) in values.iter().zip(weights) {
        for c in (w..=capacity).rev() {
            best[c] = best[c].max(best[c - w] + v);
        }
    }
    best[capacity]
}

/// Random Euclidean instance with `n` suppliers on a `w`-period grid.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, w: usize, m: usize, length: f64, capacity: f64) -> Instance {
    let horizon = length * w as f64;
    let suppliers = (1..=n)
        .map(|id| {
            let service = rng.gen_range(0.0..length * 0.3);
            let a = rng.gen_range(0.0..horizon);
            let b = rng.gen_range(0.0..horizon);
            let (ready, due) = if rng.gen_bool(0.2) { (0.0, horizon) } else { (a.min(b), a.max(b)) };
            Supplier {
                id,
                x: rng.gen_range(0.0..100.0),
                y: rng.gen_range(0.0..100.0),
                workload: rng.gen_range(1..=30) as f64,
                service,
                ready,
                due,
            }
        })
        .collect();
    Instance::new(
        format!("rand-{n}-{w}"),
        (50.0, 50.0),
        suppliers,
        m,
        capacity,
        PeriodGrid::new(w, length).unwrap(),
        TravelSpec::Euclidean { round_to: None },
    )
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
