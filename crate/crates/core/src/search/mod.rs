//! Tabu search with ejection pool and adaptive perturbation.

mod epa;
mod init;
mod moves;
mod perturb;
mod tabu;

pub use epa::{eject_until_feasible, epa, window_violation};
pub use init::{best_init, init_once};
pub use moves::{
    best_neighbor, descent, edge_diff, edges, local_search, scan, AppliedMove, Evaluated, Operator, Proposal,
    SearchState,
};
pub use perturb::{perturb, removal_probability};
pub use tabu::{SolutionLog, TabuList};

use crate::solution::{Fitness, Problem, Scoring, Solution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

/// Which position the ejection pool picks for a forced insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InsertRule {
    /// Smallest insertion score.
    Min,
    /// Largest insertion score.
    Max,
}

impl FromStr for InsertRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min" => Ok(Self::Min),
            "max" => Ok(Self::Max),
            _ => Err(format!("unknown insertion rule `{s}` (expected min or max)")),
        }
    }
}

/// Enabled parts of the outer loop: local search, ejection pool,
/// perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Components {
    pub local_search: bool,
    pub ejection_pool: bool,
    pub perturbation: bool,
}

impl Default for Components {
    fn default() -> Self {
        Self { local_search: true, ejection_pool: true, perturbation: true }
    }
}

impl FromStr for Components {
    type Err = String;

    /// Parses a comma separated subset of `LS`, `EP`, `PER`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut c = Self { local_search: false, ejection_pool: false, perturbation: false };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.to_ascii_uppercase().as_str() {
                "LS" => c.local_search = true,
                "EP" => c.ejection_pool = true,
                "PER" => c.perturbation = true,
                other => return Err(format!("unknown component `{other}` (expected LS, EP or PER)")),
            }
        }
        Ok(c)
    }
}

impl fmt::Display for Components {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.local_search {
            parts.push("LS");
        }
        if self.ejection_pool {
            parts.push("EP");
        }
        if self.perturbation {
            parts.push("PER");
        }
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub eta: f64,
    pub n_init: usize,
    pub alpha1: f64,
    pub max_perturbation: usize,
    pub max_local_iter: usize,
    /// Tabu tenure in local search iterations.
    pub tenure: u64,
    /// Insertion and ejection weights `beta_1..beta_5`.
    pub beta: [f64; 5],
    pub p_min: f64,
    pub p_max: f64,
    pub p_delta: f64,
    pub n_max: usize,
    pub seed: u64,
    pub epa_insert: InsertRule,
    pub components: Components,
    pub maximize_free_time: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            eta: 1.0,
            n_init: 100,
            alpha1: 5.0,
            max_perturbation: 4,
            max_local_iter: 200,
            tenure: 100,
            beta: [0.6, 0.4, 0.4, 0.4, 0.2],
            p_min: 0.05,
            p_max: 0.30,
            p_delta: 0.1,
            n_max: 5,
            seed: 0,
            epa_insert: InsertRule::Min,
            components: Components::default(),
            maximize_free_time: true,
        }
    }
}

impl SearchConfig {
    pub fn scoring(&self) -> Scoring {
        Scoring { eta: self.eta, maximize_free_time: self.maximize_free_time }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 <= self.p_min && self.p_min <= self.p_max && self.p_max <= 1.0) {
            return Err(format!("need 0 <= p_min <= p_max <= 1, got {} and {}", self.p_min, self.p_max));
        }
        if self.n_init == 0 {
            return Err("n_init must be at least 1".into());
        }
        if !(self.alpha1 >= 0.0) {
            return Err("alpha1 must be nonnegative".into());
        }
        Ok(())
    }
}

/// One outer iteration of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub current: Fitness,
    pub best: Fitness,
    pub pool: usize,
    pub elapsed: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: Solution,
    pub initial: Fitness,
    pub trace: Vec<TraceRow>,
    pub local_iterations: u64,
    pub elapsed: f64,
}

/// Full run: construction, then local search, ejection pool and
/// perturbation until `max_perturbation` consecutive outer iterations
/// bring no new best.
pub fn tabu_search(p: &Problem, cfg: &SearchConfig) -> RunResult {
    let clock = Instant::now();
    let sc = cfg.scoring();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = SearchState::new(p, cfg.tenure);
    let mut log = SolutionLog::new();
    let mut s = best_init(p, sc, cfg.alpha1, cfg.n_init, &mut rng);
    let initial = s.fitness();
    let mut best = s.clone();
    let mut trace = Vec::new();
    let mut stale = 0;
    let mut iteration = 0;
    loop {
        if cfg.components.local_search {
            s = local_search(p, s, &mut state, cfg.max_local_iter);
        }
        if cfg.components.ejection_pool {
            s = epa(p, cfg, s);
        }
        if sc.better(&s.fitness(), &best.fitness()) {
            best = s.clone();
            stale = 0;
        } else {
            stale += 1;
        }
        iteration += 1;
        trace.push(TraceRow {
            iteration,
            current: s.fitness(),
            best: best.fitness(),
            pool: s.pool().len(),
            elapsed: clock.elapsed().as_secs_f64(),
        });
        if stale >= cfg.max_perturbation {
            break;
        }
        let repeats = log.repeats(&s.fitness(), &sc);
        log.push(s.fitness());
        if cfg.components.perturbation {
            s = perturb(p, cfg, &s, repeats, &mut rng);
        }
    }
    RunResult { best, initial, trace, local_iterations: state.iteration, elapsed: clock.elapsed().as_secs_f64() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_parse_and_print() {
        let c: Components = "LS,PER".parse().unwrap();
        assert!(c.local_search && !c.ejection_pool && c.perturbation);
        assert_eq!(c.to_string(), "LS,PER");
        assert!("LS,XX".parse::<Components>().is_err());
    }

    #[test]
    fn defaults_match_published_settings() {
        let c = SearchConfig::default();
        assert_eq!((c.n_init, c.max_perturbation, c.max_local_iter, c.tenure, c.n_max), (100, 4, 200, 100, 5));
        assert_eq!(c.beta, [0.6, 0.4, 0.4, 0.4, 0.2]);
        assert_eq!((c.p_min, c.p_max, c.p_delta), (0.05, 0.30, 0.1));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn removal_probability_formula() {
        let mut c = SearchConfig::default();
        assert!((removal_probability(&c, 1, 10, 0) - (0.05 + 0.25 * 0.1)).abs() < 1e-12);
        assert!((removal_probability(&c, 10, 10, 0) - 0.30).abs() < 1e-12);
        // shifted by p_delta * N_max at most
        assert!((removal_probability(&c, 10, 10, 9) - 0.80).abs() < 1e-12);
        c.p_min = 0.0;
        c.p_max = 0.0;
        assert_eq!(removal_probability(&c, 3, 10, 0), 0.0);
        c.p_min = 1.0;
        c.p_max = 1.0;
        assert_eq!(removal_probability(&c, 3, 10, 4), 1.0);
    }
}
