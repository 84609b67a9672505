use super::moves::descent;
use super::{InsertRule, SearchConfig};
use crate::instance::{DEPOT, TIME_EPS};
use crate::solution::{visit, Problem, Route, Solution};

/// Total lateness of a sequence scheduled without feasibility checks:
/// service starts past the window, services and the return past the horizon.
pub fn window_violation(p: &Problem, seq: &[usize]) -> f64 {
    let horizon = p.inst.horizon();
    let mut total = 0.0;
    let (mut prev, mut left) = (DEPOT, 0.0);
    for &v in seq {
        let vis = visit(p, prev, left, v);
        total += (vis.start - p.inst.window(v).1).max(0.0) + (vis.departure - horizon).max(0.0);
        prev = v;
        left = vis.departure;
    }
    total + (p.transit.arrival(prev, DEPOT, left) - horizon).max(0.0)
}

/// Insertion score `c(i, u, j)` of `u` between the stops at `pos - 1` and `pos`.
fn insertion_score(p: &Problem, cfg: &SearchConfig, r: &Route, pos: usize, u: usize) -> f64 {
    let (prev, left) = r.left_of(pos);
    let next = r.at(pos);
    let at_u = visit(p, prev, left, u);
    let at_next = p.transit.arrival(u, next, at_u.departure);
    let late = (at_u.arrival - p.inst.window(u).1).max(0.0) + (at_next - p.inst.window(next).1).max(0.0);
    cfg.beta[0] * p.inst.workload(u) - cfg.beta[1] * late
}

/// Position chosen for `u`: `(route, position)`.
fn choose_insertion(p: &Problem, cfg: &SearchConfig, s: &Solution, u: usize) -> Option<(usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for (k, r) in s.routes().iter().enumerate() {
        for pos in 0..=r.len() {
            let c = insertion_score(p, cfg, r, pos, u);
            let wins = match best {
                None => true,
                Some((b, _, _)) => match cfg.epa_insert {
                    InsertRule::Min => c < b,
                    InsertRule::Max => c > b,
                },
            };
            if wins {
                best = Some((c, k, pos));
            }
        }
    }
    best.map(|(_, k, pos)| (k, pos))
}

/// Ejects suppliers other than `keep` from `seq` until it is feasible.
/// Returns the feasible route and the ejected suppliers, or `None` when
/// only `keep` is left and still infeasible.
pub fn eject_until_feasible(
    p: &Problem,
    cfg: &SearchConfig,
    mut seq: Vec<usize>,
    keep: usize,
) -> Option<(Route, Vec<usize>)> {
    let mut ejected = Vec::new();
    loop {
        if let Ok(r) = Route::build(p, seq.clone()) {
            return Some((r, ejected));
        }
        if seq.len() <= 1 {
            return None;
        }
        let load: f64 = seq.iter().map(|&v| p.inst.workload(v)).sum();
        let mut best: Option<(f64, usize, usize)> = None;
        for (idx, &i) in seq.iter().enumerate() {
            if i == keep {
                continue;
            }
            let mut rest = seq.clone();
            rest.remove(idx);
            let over = (load - p.inst.workload(i) - p.inst.capacity).max(0.0);
            let c = cfg.beta[2] * p.inst.workload(i) + cfg.beta[3] * over + cfg.beta[4] * window_violation(p, &rest);
            let wins = match best {
                None => true,
                Some((b, bi, _)) => c < b - TIME_EPS || ((c == b || (c - b).abs() <= TIME_EPS) && i < bi),
            };
            if wins {
                best = Some((c, i, idx));
            }
        }
        let (_, i, idx) = best?;
        seq.remove(idx);
        ejected.push(i);
    }
}

/// Ejection pool step: force each pool supplier into the solution, eject
/// others until feasible, polish by descent and keep the best candidate if
/// it beats `s`.
pub fn epa(p: &Problem, cfg: &SearchConfig, s: Solution) -> Solution {
    let sc = s.scoring();
    let mut best: Option<Solution> = None;
    for &u in s.pool() {
        if p.inst.workload(u) > p.inst.capacity + TIME_EPS {
            continue;
        }
        let Some((k, pos)) = choose_insertion(p, cfg, &s, u) else { continue };
        let mut seq = s.route(k).stops().to_vec();
        seq.insert(pos, u);
        let Some((route, _)) = eject_until_feasible(p, cfg, seq, u) else { continue };
        let mut seqs = s.sequences();
        seqs[k] = route.stops().to_vec();
        let cand = Solution::from_sequences(p, sc, &seqs).expect("ejection leaves a feasible route");
        let cand = descent(p, cand);
        if best.as_ref().map_or(true, |b| sc.better(&cand.fitness(), &b.fitness())) {
            best = Some(cand);
        }
    }
    match best {
        Some(b) if sc.better(&b.fitness(), &s.fitness()) => b,
        _ => s,
    }
}
