use super::SearchConfig;
use crate::solution::{Problem, Route, Solution};
use rand::Rng;

/// Removal probability of the `rank`-th lightest of `served` suppliers
/// after `repeats` returns to the same local optimum.
pub fn removal_probability(cfg: &SearchConfig, rank: usize, served: usize, repeats: usize) -> f64 {
    let shift = cfg.p_delta * repeats.min(cfg.n_max) as f64;
    let lo = cfg.p_min + shift;
    let hi = cfg.p_max + shift;
    (lo + (hi - lo) * rank as f64 / served as f64).clamp(0.0, 1.0)
}

/// Moves randomly chosen served suppliers to the pool.
pub fn perturb(p: &Problem, cfg: &SearchConfig, s: &Solution, repeats: usize, rng: &mut impl Rng) -> Solution {
    let mut served: Vec<usize> = s.routes().iter().flat_map(|r| r.stops().iter().copied()).collect();
    served.sort_by(|&a, &b| p.inst.workload(a).total_cmp(&p.inst.workload(b)).then(a.cmp(&b)));
    let n = served.len();
    let mut removed = vec![false; p.inst.vertex_count()];
    for (idx, &v) in served.iter().enumerate() {
        let prob = removal_probability(cfg, idx + 1, n, repeats);
        if rng.gen::<f64>() < prob {
            removed[v] = true;
        }
    }
    // a route whose reduced form is infeasible is kept whole
    let seqs: Vec<Vec<usize>> = s
        .routes()
        .iter()
        .map(|r| {
            let kept: Vec<usize> = r.stops().iter().copied().filter(|&v| !removed[v]).collect();
            if Route::build(p, kept.clone()).is_ok() {
                kept
            } else {
                r.stops().to_vec()
            }
        })
        .collect();
    Solution::from_sequences(p, s.scoring(), &seqs).expect("routes were checked feasible")
}
