//! Multi-period inspector scheduling: instances, period-aware transit
//! times, solution scheduling and fitness, the tabu search, and the
//! knapsack upper bound.

pub mod instance;
pub mod search;
pub mod solution;
pub mod transit;
pub mod upper_bound;

pub use instance::{Instance, InstanceError, PeriodGrid, Supplier, Time, DEPOT, TIME_EPS};
pub use solution::{compare, Fitness, Problem, Route, Scoring, Solution};
pub use search::{tabu_search, RunResult, SearchConfig};
pub use transit::TransitTables;
