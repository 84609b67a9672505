//! The five neighbourhoods and the tabu local search over them.

use super::tabu::TabuList;
use crate::instance::{DEPOT, TIME_EPS};
use crate::solution::{splice_feasible, Change, Fitness, Problem, Route, Solution};
use std::cmp::Ordering;

/// Neighbourhood operators in tie-breaking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum Operator {
    TwoOpt,
    OrOpt,
    TwoOptStar,
    Relocate,
    Exchange,
}

/// A neighbour: replacement sequences for some routes and the pool change.
#[derive(Debug, Clone)]
pub struct Proposal {
    pub op: Operator,
    /// Smallest supplier id involved, for tie-breaking.
    pub key: usize,
    pub routes: Vec<(usize, Vec<usize>)>,
    /// Supplier leaving a route for the pool.
    pub pooled: Option<usize>,
    /// Supplier leaving the pool for a route.
    pub unpooled: Option<usize>,
}

/// A move that was applied, recorded for replay checks.
#[derive(Debug, Clone, PartialEq)]
pub struct AppliedMove {
    pub iteration: u64,
    pub op: Operator,
    pub removed: Vec<(usize, usize)>,
    pub created: Vec<(usize, usize)>,
    pub aspiration: bool,
    pub fitness: Fitness,
}

/// Directed edges of a sequence including both depot edges.
pub fn edges(seq: &[usize]) -> Vec<(usize, usize)> {
    if seq.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(seq.len() + 1);
    let mut prev = DEPOT;
    for &v in seq {
        out.push((prev, v));
        prev = v;
    }
    out.push((prev, DEPOT));
    out
}

/// Whether `seq` is time-feasible, checking only the part that differs
/// from the scheduled route `old`.
fn rebuild_feasible(p: &Problem, old: &Route, seq: &[usize]) -> bool {
    let o = old.stops();
    let limit = o.len().min(seq.len());
    let a = o.iter().zip(seq).take_while(|(x, y)| x == y).count();
    let c = o.iter().rev().zip(seq.iter().rev()).take(limit - a).take_while(|(x, y)| x == y).count();
    splice_feasible(p, old, a, &seq[a..seq.len() - c], old, o.len() - c)
}

fn load_of(p: &Problem, seq: &[usize]) -> f64 {
    seq.iter().map(|&v| p.inst.workload(v)).sum()
}

#[inline]
fn fits(p: &Problem, load: f64) -> bool {
    load <= p.inst.capacity + TIME_EPS
}

/// Calls `visit` with every feasible neighbour of `s`, operator by operator.
pub fn scan(p: &Problem, s: &Solution, mut visit: impl FnMut(Proposal)) {
    let routes = s.routes();
    let m = routes.len();
    let mk = |op, key, routes, pooled, unpooled| Proposal { op, key, routes, pooled, unpooled };

    // 2-opt: reverse stops[i..=j]
    for (k, r) in routes.iter().enumerate() {
        let st = r.stops();
        for i in 0..st.len() {
            for j in i + 1..st.len() {
                let mut seq = st.to_vec();
                seq[i..=j].reverse();
                if splice_feasible(p, r, i, &seq[i..=j], r, j + 1) {
                    let key = *st[i..=j].iter().min().unwrap();
                    visit(mk(Operator::TwoOpt, key, vec![(k, seq)], None, None));
                }
            }
        }
    }

    // Or-opt: move the pair stops[i], stops[i+1] elsewhere in the route
    for (k, r) in routes.iter().enumerate() {
        let st = r.stops();
        if st.len() < 3 {
            continue;
        }
        for i in 0..st.len() - 1 {
            let mut rest = st.to_vec();
            let pair: Vec<usize> = rest.drain(i..i + 2).collect();
            for q in 0..=rest.len() {
                if q == i {
                    continue;
                }
                let mut seq = rest.clone();
                seq.splice(q..q, pair.iter().copied());
                if rebuild_feasible(p, r, &seq) {
                    visit(mk(Operator::OrOpt, pair[0].min(pair[1]), vec![(k, seq)], None, None));
                }
            }
        }
    }

    // 2-opt*: exchange the tails of two routes
    for a in 0..m {
        for b in a + 1..m {
            let (ra, rb) = (&routes[a], &routes[b]);
            let (sa, sb) = (ra.stops(), rb.stops());
            for i in 0..=sa.len() {
                for j in 0..=sb.len() {
                    if (i == 0 && j == 0) || (i == sa.len() && j == sb.len()) {
                        continue;
                    }
                    let la = load_of(p, &sa[..i]) + load_of(p, &sb[j..]);
                    let lb = load_of(p, &sb[..j]) + load_of(p, &sa[i..]);
                    if !fits(p, la) || !fits(p, lb) {
                        continue;
                    }
                    if !splice_feasible(p, ra, i, &[], rb, j) || !splice_feasible(p, rb, j, &[], ra, i) {
                        continue;
                    }
                    let na: Vec<usize> = sa[..i].iter().chain(&sb[j..]).copied().collect();
                    let nb: Vec<usize> = sb[..j].iter().chain(&sa[i..]).copied().collect();
                    let key = sa[i..].iter().chain(&sb[j..]).copied().min().unwrap_or(usize::MAX);
                    visit(mk(Operator::TwoOptStar, key, vec![(a, na), (b, nb)], None, None));
                }
            }
        }
    }

    // Relocate
    for (a, ra) in routes.iter().enumerate() {
        let sa = ra.stops();
        for i in 0..sa.len() {
            let v = sa[i];
            let mut rest = sa.to_vec();
            rest.remove(i);
            // within the route
            for q in 0..=rest.len() {
                if q == i {
                    continue;
                }
                let mut seq = rest.clone();
                seq.insert(q, v);
                if rebuild_feasible(p, ra, &seq) {
                    visit(mk(Operator::Relocate, v, vec![(a, seq)], None, None));
                }
            }
            // into another route
            for (b, rb) in routes.iter().enumerate() {
                if b == a || !fits(p, rb.load() + p.inst.workload(v)) {
                    continue;
                }
                for q in 0..=rb.len() {
                    if !splice_feasible(p, rb, q, &[v], rb, q) {
                        continue;
                    }
                    let mut seq = rb.stops().to_vec();
                    seq.insert(q, v);
                    visit(mk(Operator::Relocate, v, vec![(a, rest.clone()), (b, seq)], None, None));
                }
            }
            // into the pool
            visit(mk(Operator::Relocate, v, vec![(a, rest.clone())], Some(v), None));
        }
    }
    // from the pool
    for &u in s.pool() {
        for (b, rb) in routes.iter().enumerate() {
            if !fits(p, rb.load() + p.inst.workload(u)) {
                continue;
            }
            for q in 0..=rb.len() {
                if splice_feasible(p, rb, q, &[u], rb, q) {
                    let mut seq = rb.stops().to_vec();
                    seq.insert(q, u);
                    visit(mk(Operator::Relocate, u, vec![(b, seq)], None, Some(u)));
                }
            }
        }
    }

    // Exchange
    for (a, ra) in routes.iter().enumerate() {
        let sa = ra.stops();
        for i in 0..sa.len() {
            let v = sa[i];
            // within the route
            for j in i + 1..sa.len() {
                let mut seq = sa.to_vec();
                seq.swap(i, j);
                if splice_feasible(p, ra, i, &seq[i..=j], ra, j + 1) {
                    visit(mk(Operator::Exchange, v.min(sa[j]), vec![(a, seq)], None, None));
                }
            }
            // with another route
            for b in a + 1..m {
                let rb = &routes[b];
                for (j, &w) in rb.stops().iter().enumerate() {
                    let dv = p.inst.workload(v);
                    let dw = p.inst.workload(w);
                    if !fits(p, ra.load() - dv + dw) || !fits(p, rb.load() - dw + dv) {
                        continue;
                    }
                    if !splice_feasible(p, ra, i, &[w], ra, i + 1) || !splice_feasible(p, rb, j, &[v], rb, j + 1) {
                        continue;
                    }
                    let mut na = sa.to_vec();
                    na[i] = w;
                    let mut nb = rb.stops().to_vec();
                    nb[j] = v;
                    visit(mk(Operator::Exchange, v.min(w), vec![(a, na), (b, nb)], None, None));
                }
            }
            // with the pool
            for &u in s.pool() {
                if !fits(p, ra.load() - p.inst.workload(v) + p.inst.workload(u)) {
                    continue;
                }
                if splice_feasible(p, ra, i, &[u], ra, i + 1) {
                    let mut seq = sa.to_vec();
                    seq[i] = u;
                    visit(mk(Operator::Exchange, v.min(u), vec![(a, seq)], Some(v), Some(u)));
                }
            }
        }
    }
}

/// Served workload after `prop`, known before any schedule is built.
fn served_after(p: &Problem, s: &Solution, prop: &Proposal) -> f64 {
    let mut total = s.fitness().p;
    if let Some(v) = prop.pooled {
        total -= p.inst.workload(v);
    }
    if let Some(u) = prop.unpooled {
        total += p.inst.workload(u);
    }
    total
}

fn pool_after(s: &Solution, prop: &Proposal) -> Vec<usize> {
    let mut pool = s.pool().to_vec();
    if let Some(u) = prop.unpooled {
        if let Ok(at) = pool.binary_search(&u) {
            pool.remove(at);
        }
    }
    if let Some(v) = prop.pooled {
        if let Err(at) = pool.binary_search(&v) {
            pool.insert(at, v);
        }
    }
    pool
}

/// Edges removed and created when `prop` replaces its routes in `s`.
pub fn edge_diff(s: &Solution, prop: &Proposal) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let mut old: Vec<(usize, usize)> = prop.routes.iter().flat_map(|(k, _)| edges(s.route(*k).stops())).collect();
    let mut new: Vec<(usize, usize)> = prop.routes.iter().flat_map(|(_, seq)| edges(seq)).collect();
    old.sort_unstable();
    new.sort_unstable();
    let removed = old.iter().filter(|e| new.binary_search(e).is_err()).copied().collect();
    let created = new.iter().filter(|e| old.binary_search(e).is_err()).copied().collect();
    (removed, created)
}

/// A fully evaluated neighbour.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub op: Operator,
    pub key: usize,
    pub change: Change,
    pub fitness: Fitness,
    pub removed: Vec<(usize, usize)>,
    pub created: Vec<(usize, usize)>,
    pub tabu: bool,
}

/// Best neighbour of `cur` that is not tabu, or tabu but better than
/// `aspire`. With `improving_only` the neighbour must also beat `cur`.
pub fn best_neighbor(
    p: &Problem,
    cur: &Solution,
    tabu: &TabuList,
    iteration: u64,
    aspire: &Fitness,
    improving_only: bool,
) -> Option<Evaluated> {
    let sc = cur.scoring();
    let cur_fit = cur.fitness();
    let mut best: Option<Evaluated> = None;
    scan(p, cur, |prop| {
        let served = served_after(p, cur, &prop);
        let floor = match &best {
            Some(b) => b.fitness.p,
            None if improving_only => cur_fit.p,
            None => f64::NEG_INFINITY,
        };
        if served < floor - crate::solution::FITNESS_EPS {
            return;
        }
        let (removed, created) = edge_diff(cur, &prop);
        let is_tabu = removed.iter().any(|&(a, b)| tabu.is_tabu(a, b, iteration));
        if is_tabu && served < aspire.p - crate::solution::FITNESS_EPS {
            return;
        }
        let mut routes = Vec::with_capacity(prop.routes.len());
        for (k, seq) in &prop.routes {
            match Route::build(p, seq.clone()) {
                Ok(r) => routes.push((*k, r)),
                Err(_) => return,
            }
        }
        let change = Change { routes, pool: pool_after(cur, &prop) };
        let fitness = cur.evaluate(p, &change);
        if is_tabu && !sc.better(&fitness, aspire) {
            return;
        }
        if improving_only && !sc.better(&fitness, &cur_fit) {
            return;
        }
        let wins = match &best {
            None => true,
            Some(b) => match sc.compare(&fitness, &b.fitness) {
                Ordering::Greater => true,
                Ordering::Equal => (prop.op, prop.key) < (b.op, b.key),
                Ordering::Less => false,
            },
        };
        if wins {
            best = Some(Evaluated { op: prop.op, key: prop.key, change, fitness, removed, created, tabu: is_tabu });
        }
    });
    best
}

/// Mutable state shared by the local searches of one run.
#[derive(Debug, Clone)]
pub struct SearchState {
    pub tabu: TabuList,
    pub iteration: u64,
    /// Applied moves, when recording is enabled.
    pub record: Option<Vec<AppliedMove>>,
}

impl SearchState {
    pub fn new(p: &Problem, tenure: u64) -> Self {
        Self { tabu: TabuList::new(p.inst.vertex_count(), tenure), iteration: 0, record: None }
    }
}

/// Tabu local search from `start`; returns the best solution met. Stops
/// after `max_non_improving` consecutive rounds without a new best, or
/// when no allowable move exists. With zero tenure only improving moves
/// are taken, which is plain best-improvement descent.
pub fn local_search(p: &Problem, start: Solution, state: &mut SearchState, max_non_improving: usize) -> Solution {
    let sc = start.scoring();
    let descent = state.tabu.tenure() == 0;
    let mut best = start.clone();
    let mut cur = start;
    let mut stale = 0;
    while stale < max_non_improving {
        let aspire = best.fitness();
        let Some(mv) = best_neighbor(p, &cur, &state.tabu, state.iteration, &aspire, descent) else {
            break;
        };
        for &(a, b) in &mv.created {
            state.tabu.protect(a, b, state.iteration);
        }
        if let Some(rec) = state.record.as_mut() {
            rec.push(AppliedMove {
                iteration: state.iteration,
                op: mv.op,
                removed: mv.removed.clone(),
                created: mv.created.clone(),
                aspiration: mv.tabu,
                fitness: mv.fitness,
            });
        }
        cur.apply(p, mv.change);
        state.iteration += 1;
        if sc.better(&cur.fitness(), &best.fitness()) {
            best = cur.clone();
            stale = 0;
        } else {
            stale += 1;
        }
    }
    best
}

/// Best-improvement descent to a local optimum.
pub fn descent(p: &Problem, start: Solution) -> Solution {
    let mut state = SearchState::new(p, 0);
    local_search(p, start, &mut state, usize::MAX)
}
