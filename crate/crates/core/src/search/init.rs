use crate::instance::TIME_EPS;
use crate::solution::{splice_feasible, Problem, Route, Scoring, Solution};
use rand::Rng;

/// Randomised greedy construction. Suppliers are ranked by the shortest
/// transit from some route tail divided by their workload; the `k`-th of
/// the ranking is appended with `k = floor(rand^alpha * |U|)`, so larger
/// `alpha` favours the front of the list.
pub fn init_once(p: &Problem, scoring: Scoring, alpha: f64, rng: &mut impl Rng) -> Solution {
    let m = p.inst.inspectors;
    let mut routes: Vec<Route> = vec![Route::empty(p); m];
    let mut open: Vec<usize> = (1..=p.inst.n()).collect();
    let mut ranked: Vec<(f64, usize, usize)> = Vec::with_capacity(open.len());
    loop {
        ranked.clear();
        open.retain(|&v| {
            let d = p.inst.workload(v);
            let mut best = (f64::INFINITY, usize::MAX);
            for (k, r) in routes.iter().enumerate() {
                if r.load() + d > p.inst.capacity + TIME_EPS || !splice_feasible(p, r, r.len(), &[v], r, r.len()) {
                    continue;
                }
                let (tail, left) = r.left_of(r.len());
                let st = p.transit.transit(tail, v, left);
                if st < best.0 {
                    best = (st, k);
                }
            }
            if best.0.is_infinite() {
                return false;
            }
            let ratio = if d > 0.0 { best.0 / d } else { f64::MAX };
            ranked.push((ratio, v, best.1));
            true
        });
        if ranked.is_empty() {
            break;
        }
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let draw: f64 = rng.gen();
        let k = ((draw.powf(alpha) * ranked.len() as f64) as usize).min(ranked.len() - 1);
        let (_, v, route) = ranked[k];
        let mut seq = routes[route].stops().to_vec();
        seq.push(v);
        routes[route] = Route::build(p, seq).expect("append was checked feasible");
        open.retain(|&u| u != v);
    }
    let seqs: Vec<Vec<usize>> = routes.iter().map(|r| r.stops().to_vec()).collect();
    Solution::from_sequences(p, scoring, &seqs).expect("construction keeps routes feasible")
}

/// Best of `tries` constructions; the earliest wins ties.
pub fn best_init(p: &Problem, scoring: Scoring, alpha: f64, tries: usize, rng: &mut impl Rng) -> Solution {
    let mut best = init_once(p, scoring, alpha, rng);
    for _ in 1..tries {
        let s = init_once(p, scoring, alpha, rng);
        if scoring.better(&s.fitness(), &best.fitness()) {
            best = s;
        }
    }
    best
}
