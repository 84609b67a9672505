//! Solutions: routes of served suppliers plus the ejection pool, their
//! schedules, and the lexicographic fitness `(P, D, F)`.

mod route;
mod text;

pub use route::{latest_arrival, splice_feasible, splice_feasible_iter, visit, Route, Violation, Visit};
pub use text::{read_sequences, write_solution};

use crate::instance::{Instance, Time, DEPOT, TIME_EPS};
use crate::transit::TransitTables;
use std::cmp::Ordering;

/// Absolute tolerance of fitness comparisons.
pub const FITNESS_EPS: f64 = 1e-6;

/// An instance together with its preprocessed transit tables.
#[derive(Debug, Clone)]
pub struct Problem {
    pub inst: Instance,
    pub transit: TransitTables,
}

impl Problem {
    pub fn new(inst: Instance) -> Self {
        let transit = TransitTables::new(&inst);
        Self { inst, transit }
    }

    pub fn with_tables(inst: Instance, transit: TransitTables) -> Self {
        Self { inst, transit }
    }
}

/// Total served workload `P`, insertion difficulty `D` of the pool and
/// total maximal free time `F`.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Fitness {
    pub p: f64,
    pub d: f64,
    pub f: f64,
}

/// Parameters of the fitness function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scoring {
    /// Weight of the workload term in `mv(u, r)`.
    pub eta: f64,
    /// Prefer more free time (`true`) or less.
    pub maximize_free_time: bool,
}

impl Default for Scoring {
    fn default() -> Self {
        Self { eta: 1.0, maximize_free_time: true }
    }
}

impl Scoring {
    /// `Greater` when `a` is the better fitness.
    pub fn compare(&self, a: &Fitness, b: &Fitness) -> Ordering {
        let by = |x: f64, y: f64| {
            if (x - y).abs() <= FITNESS_EPS || (x.is_infinite() && x == y) {
                Ordering::Equal
            } else {
                x.total_cmp(&y)
            }
        };
        by(a.p, b.p).then(by(b.d, a.d)).then_with(|| {
            if self.maximize_free_time {
                by(a.f, b.f)
            } else {
                by(b.f, a.f)
            }
        })
    }

    pub fn better(&self, a: &Fitness, b: &Fitness) -> bool {
        self.compare(a, b) == Ordering::Greater
    }
}

/// Lexicographic comparison with the default scoring: higher `P`, then
/// lower `D`, then higher `F`.
pub fn compare(a: &Fitness, b: &Fitness) -> Ordering {
    Scoring::default().compare(a, b)
}

/// `mv_l`: relative workload overflow if `u` joined a route with load `wl`.
#[inline]
pub fn workload_violation(p: &Problem, u: usize, wl: f64) -> f64 {
    let total = wl + p.inst.workload(u);
    let q = p.inst.capacity;
    if total > q + TIME_EPS && total > 0.0 {
        p.inst.horizon() * (total - q) / total
    } else {
        0.0
    }
}

/// Cost of inserting pool supplier `u` into `r`, `max(eta * mv_l, mv_t)`.
pub fn insertion_cost(p: &Problem, eta: f64, u: usize, r: &Route) -> f64 {
    let floor = eta * workload_violation(p, u, r.load());
    let (e, l) = p.inst.window(u);
    let s = p.inst.service(u);
    let mut best = f64::INFINITY;
    for pos in 0..=r.len() {
        let (prev, left) = r.left_of(pos);
        let next = r.at(pos);
        let next_latest = r.latest_at(p, pos);
        let arrival = p.transit.arrival(prev, u, left);
        let late = (arrival - l).max(0.0);
        if late >= best {
            continue;
        }
        let ld = p.transit.latest_departure(u, next, next_latest);
        let latest = p.transit.latest_service_start(l.min(ld - s), s);
        let early = (e - latest).max(0.0);
        if late + early >= best {
            continue;
        }
        let start = p.transit.service_start(arrival.max(e), s);
        let onward = p.transit.arrival(u, next, start + s);
        let c = late + early + (onward - next_latest).max(0.0);
        if c < best {
            best = c;
            if best <= floor {
                break;
            }
        }
    }
    floor.max(cap_violation(p, best))
}

/// Unreachable insertions count as a large finite violation so that
/// pools of different sizes stay comparable.
#[inline]
fn cap_violation(p: &Problem, c: f64) -> f64 {
    c.min(10.0 * p.inst.horizon())
}

/// `D`: sorted insertion costs weighted by `1 / rank`.
pub fn difficulty(costs: &mut [f64]) -> f64 {
    costs.sort_by(f64::total_cmp);
    costs.iter().enumerate().fold(0.0, |acc, (i, c)| acc + c / (i + 1) as f64)
}

/// A feasible solution: one route per inspector and the pool of unserved
/// suppliers, with cached insertion costs of pool suppliers per route.
#[derive(Debug, Clone)]
pub struct Solution {
    routes: Vec<Route>,
    pool: Vec<usize>,
    /// `mv[u][r]` for pool suppliers `u`; stale for served ones.
    mv: Vec<Vec<f64>>,
    free: Vec<Time>,
    fitness: Fitness,
    scoring: Scoring,
}

/// A proposed change: replacement routes by index and the new pool.
#[derive(Debug, Clone)]
pub struct Change {
    pub routes: Vec<(usize, Route)>,
    pub pool: Vec<usize>,
}

impl Solution {
    /// All inspectors idle, every supplier in the pool.
    pub fn empty(p: &Problem, scoring: Scoring) -> Self {
        let routes = vec![Route::empty(p); p.inst.inspectors];
        Self::assemble(p, scoring, routes)
    }

    /// Builds a solution from supplier sequences; unlisted suppliers go to
    /// the pool.
    pub fn from_sequences(p: &Problem, scoring: Scoring, seqs: &[Vec<usize>]) -> Result<Self, SolutionError> {
        if seqs.len() != p.inst.inspectors {
            return Err(SolutionError::RouteCount { expected: p.inst.inspectors, found: seqs.len() });
        }
        let mut seen = vec![false; p.inst.vertex_count()];
        let mut routes = Vec::with_capacity(seqs.len());
        for (k, seq) in seqs.iter().enumerate() {
            for &v in seq {
                if v == DEPOT || v > p.inst.n() {
                    return Err(SolutionError::UnknownSupplier(v));
                }
                if std::mem::replace(&mut seen[v], true) {
                    return Err(SolutionError::Duplicate(v));
                }
            }
            routes.push(Route::build(p, seq.clone()).map_err(|violation| SolutionError::Infeasible { route: k, violation })?);
        }
        Ok(Self::assemble(p, scoring, routes))
    }

    fn assemble(p: &Problem, scoring: Scoring, routes: Vec<Route>) -> Self {
        let mut served = vec![false; p.inst.vertex_count()];
        for r in &routes {
            for &v in r.stops() {
                served[v] = true;
            }
        }
        let pool = (1..=p.inst.n()).filter(|&v| !served[v]).collect();
        let mut s = Self {
            free: routes.iter().map(|r| r.max_free_time(p)).collect(),
            routes,
            pool,
            mv: vec![Vec::new(); p.inst.vertex_count()],
            fitness: Fitness::default(),
            scoring,
        };
        for &u in &s.pool {
            s.mv[u] = s.routes.iter().map(|r| insertion_cost(p, scoring.eta, u, r)).collect();
        }
        s.fitness = s.summarize();
        s
    }

    fn summarize(&self) -> Fitness {
        let mut costs: Vec<f64> = self.pool.iter().map(|&u| self.mv[u].iter().copied().fold(f64::INFINITY, f64::min)).collect();
        Fitness {
            p: self.routes.iter().map(Route::load).fold(0.0, |a, l| a + l),
            d: difficulty(&mut costs),
            f: self.free.iter().fold(0.0, |a, f| a + f),
        }
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn route(&self, k: usize) -> &Route {
        &self.routes[k]
    }

    /// Unserved suppliers in ascending id order.
    pub fn pool(&self) -> &[usize] {
        &self.pool
    }

    pub fn fitness(&self) -> Fitness {
        self.fitness
    }

    pub fn scoring(&self) -> Scoring {
        self.scoring
    }

    /// Cached `mv(u, r_k)` of a pool supplier.
    pub fn cost(&self, u: usize, k: usize) -> f64 {
        self.mv[u][k]
    }

    pub fn sequences(&self) -> Vec<Vec<usize>> {
        self.routes.iter().map(|r| r.stops().to_vec()).collect()
    }

    /// Served workload of a change, without computing `D` or `F`.
    pub fn served_after(&self, change: &Change) -> f64 {
        let mut total = self.fitness.p;
        for (k, r) in &change.routes {
            total += r.load() - self.routes[*k].load();
        }
        total
    }

    /// Fitness the solution would have after `change`.
    pub fn evaluate(&self, p: &Problem, change: &Change) -> Fitness {
        let eta = self.scoring.eta;
        let mut costs = Vec::with_capacity(change.pool.len());
        for &u in &change.pool {
            let fresh = self.pool.binary_search(&u).is_err();
            let mut best = f64::INFINITY;
            for k in 0..self.routes.len() {
                let c = match change.routes.iter().find(|(j, _)| *j == k) {
                    Some((_, r)) => insertion_cost(p, eta, u, r),
                    None if fresh => insertion_cost(p, eta, u, &self.routes[k]),
                    None => self.mv[u][k],
                };
                best = best.min(c);
            }
            costs.push(best);
        }
        let mut free = self.free.clone();
        for (k, r) in &change.routes {
            free[*k] = r.max_free_time(p);
        }
        let f = free.iter().fold(0.0, |a, f| a + f);
        Fitness { p: self.served_after(change), d: difficulty(&mut costs), f }
    }

    /// Applies `change` and refreshes the caches it touches.
    pub fn apply(&mut self, p: &Problem, change: Change) {
        let eta = self.scoring.eta;
        let old_pool = std::mem::take(&mut self.pool);
        let touched: Vec<usize> = change.routes.iter().map(|(k, _)| *k).collect();
        for (k, r) in change.routes {
            self.free[k] = r.max_free_time(p);
            self.routes[k] = r;
        }
        self.pool = change.pool;
        for &u in &self.pool {
            if old_pool.binary_search(&u).is_err() {
                self.mv[u] = self.routes.iter().map(|r| insertion_cost(p, eta, u, r)).collect();
            } else {
                for &k in &touched {
                    self.mv[u][k] = insertion_cost(p, eta, u, &self.routes[k]);
                }
            }
        }
        self.fitness = self.summarize();
    }

    /// Recomputes every cache from the route sequences.
    pub fn recomputed(&self, p: &Problem) -> Result<Self, SolutionError> {
        Self::from_sequences(p, self.scoring, &self.sequences())
    }

    /// Checks the partition, feasibility and cache consistency.
    pub fn check(&self, p: &Problem) -> Result<(), SolutionError> {
        let mut count = vec![0usize; p.inst.vertex_count()];
        for r in &self.routes {
            for &v in r.stops() {
                count[v] += 1;
            }
        }
        for &u in &self.pool {
            count[u] += 1;
        }
        if let Some(v) = (1..=p.inst.n()).find(|&v| count[v] != 1) {
            return Err(SolutionError::Partition(v));
        }
        if !self.pool.windows(2).all(|w| w[0] < w[1]) {
            return Err(SolutionError::Cache("pool not sorted".into()));
        }
        let fresh = self.recomputed(p)?;
        for (k, (a, b)) in self.routes.iter().zip(&fresh.routes).enumerate() {
            if !routes_match(a, b) {
                return Err(SolutionError::Cache(format!("route {k} schedule differs from recomputation")));
            }
        }
        let (a, b) = (self.fitness, fresh.fitness);
        if (a.p - b.p).abs() > FITNESS_EPS || (a.d - b.d).abs() > FITNESS_EPS || (a.f - b.f).abs() > FITNESS_EPS {
            return Err(SolutionError::Cache(format!("fitness {a:?} differs from recomputed {b:?}")));
        }
        Ok(())
    }
}

fn routes_match(a: &Route, b: &Route) -> bool {
    let close = |x: f64, y: f64| x == y || (x - y).abs() <= 1e-9;
    a.stops() == b.stops()
        && close(a.end(), b.end())
        && close(a.latest_leave(), b.latest_leave())
        && a.visits().iter().zip(b.visits()).all(|(x, y)| {
            close(x.arrival, y.arrival) && close(x.start, y.start) && close(x.departure, y.departure)
        })
        && a.latest().iter().zip(b.latest()).all(|(&x, &y)| close(x, y))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolutionError {
    #[error("expected {expected} routes, found {found}")]
    RouteCount { expected: usize, found: usize },
    #[error("unknown supplier {0}")]
    UnknownSupplier(usize),
    #[error("supplier {0} appears more than once")]
    Duplicate(usize),
    #[error("supplier {0} is neither served exactly once nor pooled")]
    Partition(usize),
    #[error("route {route} infeasible: {violation}")]
    Infeasible { route: usize, violation: Violation },
    #[error("stale cache: {0}")]
    Cache(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{PeriodGrid, Supplier, TravelSpec};

    fn toy(periods: usize, length: f64) -> Problem {
        let suppliers = vec![
            Supplier { id: 1, x: 10.0, y: 0.0, workload: 5.0, service: 4.0, ready: 0.0, due: 100.0 },
            Supplier { id: 2, x: 0.0, y: 10.0, workload: 7.0, service: 4.0, ready: 0.0, due: 100.0 },
            Supplier { id: 3, x: -10.0, y: 0.0, workload: 3.0, service: 4.0, ready: 30.0, due: 35.0 },
        ];
        let inst = Instance::new(
            "toy",
            (0.0, 0.0),
            suppliers,
            2,
            10.0,
            PeriodGrid::new(periods, length).unwrap(),
            TravelSpec::Euclidean { round_to: None },
        )
        .unwrap();
        Problem::new(inst)
    }

    #[test]
    fn compare_is_lexicographic() {
        let f = |p, d, f| Fitness { p, d, f };
        assert_eq!(compare(&f(100.0, 5.0, 0.0), &f(90.0, 0.0, 99.0)), Ordering::Greater);
        assert_eq!(compare(&f(90.0, 3.0, 0.0), &f(90.0, 5.0, 0.0)), Ordering::Greater);
        assert_eq!(compare(&f(90.0, 3.0, 10.0), &f(90.0, 3.0, 20.0)), Ordering::Less);
        assert_eq!(compare(&f(90.0, 3.0, 10.0), &f(90.0 + 1e-8, 3.0, 10.0)), Ordering::Equal);
        let min_f = Scoring { eta: 1.0, maximize_free_time: false };
        assert_eq!(min_f.compare(&f(90.0, 3.0, 10.0), &f(90.0, 3.0, 20.0)), Ordering::Greater);
    }

    #[test]
    fn empty_route_is_feasible_and_free() {
        let p = toy(1, 100.0);
        let r = Route::build(&p, vec![]).unwrap();
        assert_eq!(r.end(), 0.0);
        assert_eq!(r.max_free_time(&p), 100.0);
    }

    #[test]
    fn service_waits_for_the_next_period() {
        // arrive at 10 with 0 left in a period of 12: service of 4 moves to 12
        let p = toy(10, 12.0);
        let r = Route::build(&p, vec![1]).unwrap();
        assert_eq!(r.visits()[0].arrival, 10.0);
        assert_eq!(r.visits()[0].start, 12.0);
    }

    #[test]
    fn single_stop_latest_arrival_on_one_period() {
        let p = toy(1, 100.0);
        let r = Route::build(&p, vec![1]).unwrap();
        assert!((r.latest()[0] - (100.0f64 - 4.0 - 10.0).min(100.0)).abs() < 1e-9);
        assert!(r.latest()[0] >= r.visits()[0].arrival);
    }

    #[test]
    fn window_and_capacity_violations() {
        let p = toy(1, 100.0);
        assert_eq!(Route::build(&p, vec![1, 2]), Err(Violation::Capacity));
        let late = toy(1, 100.0);
        // 2 then 3: reach 3 after its window closes? 2 served 10..14, travel 14.1 -> 28.1, wait to 30: fine
        assert!(Route::build(&late, vec![2, 3]).is_ok());
    }

    #[test]
    fn empty_pool_has_zero_difficulty() {
        let p = toy(1, 100.0);
        let s = Solution::from_sequences(&p, Scoring::default(), &[vec![1, 3], vec![2]]).unwrap();
        assert!(s.pool().is_empty());
        assert_eq!(s.fitness().d, 0.0);
        assert_eq!(s.fitness().p, 15.0);
        s.check(&p).unwrap();
    }

    #[test]
    fn difficulty_by_hand() {
        // pool {1, 2} with inspector 0 holding 3 and inspector 1 idle
        let p = toy(1, 100.0);
        let s = Solution::from_sequences(&p, Scoring::default(), &[vec![3], vec![]]).unwrap();
        // both insert free of time violation into the idle route
        assert_eq!(s.cost(1, 1), 0.0);
        assert_eq!(s.cost(2, 1), 0.0);
        assert_eq!(s.fitness().d, 0.0);
        // fill both routes so that 2 overflows capacity
        let s = Solution::from_sequences(&p, Scoring::default(), &[vec![1, 3], vec![]]).unwrap();
        assert_eq!(s.pool(), &[2]);
        // route 0 load 8 + 7 = 15 > 10: mv_l = 100 * 5 / 15
        assert!((workload_violation(&p, 2, 8.0) - 100.0 * 5.0 / 15.0).abs() < 1e-12);
        assert!((s.cost(2, 0) - 100.0 / 3.0).abs() < 1e-9);
        assert_eq!(s.cost(2, 1), 0.0);
    }

    #[test]
    fn evaluate_matches_apply() {
        let p = toy(2, 50.0);
        let s = Solution::from_sequences(&p, Scoring::default(), &[vec![1], vec![]]).unwrap();
        let change = Change { routes: vec![(1, Route::build(&p, vec![3]).unwrap())], pool: vec![2] };
        let predicted = s.evaluate(&p, &change);
        let mut t = s.clone();
        t.apply(&p, change);
        assert_eq!(t.fitness(), predicted);
        t.check(&p).unwrap();
    }

    #[test]
    fn duplicates_rejected() {
        let p = toy(1, 100.0);
        assert_eq!(
            Solution::from_sequences(&p, Scoring::default(), &[vec![1], vec![1]]).unwrap_err(),
            SolutionError::Duplicate(1)
        );
    }
}
