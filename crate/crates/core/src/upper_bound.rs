//! Constrained knapsack relaxation giving an upper bound on the served
//! workload, with a small exact solver and an LP file writer.

use crate::instance::{Instance, Time, DEPOT, TIME_EPS};
use crate::solution::{Problem, Solution};
use crate::transit::TransitTables;
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use std::time::Instant;
use thiserror::Error;

/// Largest `n * m * w` accepted by [`solve_exact_small`].
pub const MAX_EXACT_VARIABLES: usize = 5000;

/// Default branch-and-bound node budget.
pub const DEFAULT_NODE_LIMIT: u64 = 20_000_000;

const ROW_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("model has {0} variables, above the exact solver limit of {MAX_EXACT_VARIABLES}; emit an LP file instead")]
    TooLarge(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Period that owns a service starting at `start`.
fn service_period(inst: &Instance, start: Time, service: Time) -> usize {
    inst.grid.period_of(start + service)
}

/// Windows `[e_i, l_i]` moved to the service starts that actually fit in a
/// period. Index 0 is the depot.
pub fn tighten_windows(inst: &Instance) -> Vec<(Time, Time)> {
    let length = inst.grid.length();
    let horizon = inst.horizon();
    let w = inst.grid.periods();
    let mut out = vec![inst.window(DEPOT)];
    for v in 1..=inst.n() {
        let (mut e, mut l) = inst.window(v);
        let s = inst.service(v);
        if s > 0.0 {
            let p = ((e + TIME_EPS) / length).floor() as usize + 1;
            let close = p as f64 * length;
            if close - e < s - TIME_EPS {
                e = close;
            }
            let p = ((l + TIME_EPS) / length).floor() as usize + 1;
            if p > w {
                l = horizon - s;
            } else {
                let close = p as f64 * length;
                if close - l < s - TIME_EPS {
                    l = close - s;
                }
            }
        } else {
            l = l.min(horizon);
        }
        out.push((e, l));
    }
    out
}

/// Coefficients of the bound model. Vectors are indexed by vertex (depot at
/// 0) and 0-based period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UbCoefficients {
    pub windows: Vec<(Time, Time)>,
    pub f1: Vec<bool>,
    pub f2: Vec<Vec<bool>>,
    pub f3: Vec<Vec<bool>>,
    pub r: Vec<Vec<Time>>,
    /// Travel time from the depot to the nearest servable supplier.
    pub r0: Time,
    pub lambda: Vec<Time>,
    /// The `m` suppliers with the latest return times, latest first.
    pub v_g: Vec<usize>,
    /// Return time paired with each inspector, non-increasing.
    pub lambda_g: Vec<Time>,
}

impl UbCoefficients {
    /// `min(r_i^p, ..., r_i^w)` over finite entries.
    pub fn r_tail(&self, i: usize, p: usize) -> Time {
        self.r[i][p - 1..].iter().copied().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min)
    }
}

pub fn derive_coefficients(inst: &Instance, transit: &TransitTables) -> UbCoefficients {
    let windows = tighten_windows(inst);
    let nv = inst.vertex_count();
    let w = inst.grid.periods();
    let horizon = inst.horizon();
    let mut f1 = vec![true; nv];
    let mut f2 = vec![vec![true; w]; nv];
    for v in 1..nv {
        let (e, l) = windows[v];
        f1[v] = e <= l + TIME_EPS;
        let s = inst.service(v);
        let (p1, p2) = (service_period(inst, e, s), service_period(inst, l, s));
        for p in 1..=w {
            f2[v][p - 1] = f1[v] && p1 <= p && p <= p2;
        }
    }
    let mut f3 = vec![vec![true; nv]; nv];
    for i in 1..nv {
        for j in 1..nv {
            if i != j {
                let (ei, li) = windows[i];
                let (ej, lj) = windows[j];
                f3[i][j] = ei + inst.service(i) + inst.travel(i, j) <= lj + TIME_EPS
                    || ej + inst.service(j) + inst.travel(j, i) <= li + TIME_EPS;
            }
        }
    }
    let mut r = vec![vec![f64::INFINITY; w]; nv];
    for i in 0..nv {
        for p in 0..w {
            r[i][p] = (0..nv)
                .filter(|&j| j != i && f2[j][p] && f3[i][j])
                .map(|j| inst.travel(i, j))
                .fold(f64::INFINITY, f64::min);
        }
    }
    let r0 = (1..nv).filter(|&j| f1[j]).map(|j| inst.travel(DEPOT, j)).fold(f64::INFINITY, f64::min);
    let mut lambda = vec![0.0; nv];
    for i in 1..nv {
        let end = windows[i].1 + inst.service(i);
        let back = transit.base().get(i, DEPOT);
        let x = crate::instance::period_close(inst.grid.length(), end) + back;
        lambda[i] = if x.is_finite() { x } else { horizon };
    }
    let mut ranked: Vec<usize> = (1..nv).collect();
    ranked.sort_by(|&a, &b| lambda[b].total_cmp(&lambda[a]).then(a.cmp(&b)));
    let m = inst.inspectors;
    let v_g: Vec<usize> = ranked.into_iter().take(m).collect();
    let mut lambda_g: Vec<Time> = v_g.iter().map(|&g| lambda[g]).collect();
    let last = lambda_g.last().copied().unwrap_or(0.0);
    lambda_g.resize(m, last);
    UbCoefficients { windows, f1, f2, f3, r, r0, lambda, v_g, lambda_g }
}

/// Binary variable `x_{i,k,p}`: supplier `i` served by inspector `k`
/// (0-based) in period `p` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Var {
    pub supplier: usize,
    pub inspector: usize,
    pub period: usize,
}

impl Var {
    pub fn name(&self) -> String {
        format!("x_{}_{}_{}", self.supplier, self.inspector + 1, self.period)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// Each supplier served at most once.
    Once,
    /// At most one inspector per supplier and period.
    Period,
    /// Suppliers that no single inspector can serve together.
    Pair,
    /// Inspector capacity.
    Capacity,
    /// Service plus outgoing travel within the paired return time.
    Return,
    /// Service plus outgoing travel within one period.
    Day,
}

/// `sum(coef * x) <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub family: Family,
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UbModel {
    pub name: String,
    pub inspectors: usize,
    pub vars: Vec<Var>,
    /// Objective coefficient per variable.
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
}

impl UbModel {
    pub fn var_index(&self, v: Var) -> Option<usize> {
        self.vars.iter().position(|&x| x == v)
    }

    pub fn count(&self, family: Family) -> usize {
        self.rows.iter().filter(|r| r.family == family).count()
    }

    pub fn objective_value(&self, x: &[bool]) -> f64 {
        self.objective.iter().zip(x).filter(|(_, &on)| on).map(|(c, _)| c).sum()
    }

    /// Name of the first row `x` violates, if any.
    pub fn violated_row(&self, x: &[bool]) -> Option<&str> {
        self.rows
            .iter()
            .find(|row| row.terms.iter().filter(|(v, _)| x[*v]).map(|(_, c)| c).sum::<f64>() > row.rhs + ROW_EPS)
            .map(|row| row.name.as_str())
    }
}

/// Builds the relaxation. Variables whose supplier cannot be served in the
/// period, or whose time coefficients are infinite, are left out.
pub fn build_model(inst: &Instance, co: &UbCoefficients) -> UbModel {
    let m = inst.inspectors;
    let w = inst.grid.periods();
    let n = inst.n();
    let mut vars = Vec::new();
    let mut objective = Vec::new();
    let mut c_return = Vec::new();
    let mut c_day = Vec::new();
    for i in 1..=n {
        for k in 0..m {
            for p in 1..=w {
                let ret = inst.service(i) + co.r_tail(i, p);
                let day = inst.service(i) + co.r[i][p - 1];
                if co.f1[i] && co.f2[i][p - 1] && ret.is_finite() && day.is_finite() {
                    vars.push(Var { supplier: i, inspector: k, period: p });
                    objective.push(inst.workload(i));
                    c_return.push(ret);
                    c_day.push(day);
                }
            }
        }
    }
    let select = |f: &dyn Fn(&Var) -> bool| -> Vec<usize> { (0..vars.len()).filter(|&x| f(&vars[x])).collect() };
    let ones = |idx: Vec<usize>| -> Vec<(usize, f64)> { idx.into_iter().map(|x| (x, 1.0)).collect() };
    let mut rows = Vec::new();
    for i in 1..=n {
        let idx = select(&|v| v.supplier == i);
        if !idx.is_empty() {
            rows.push(Row { name: format!("once_{i}"), family: Family::Once, terms: ones(idx), rhs: 1.0 });
        }
    }
    for i in 1..=n {
        for p in 1..=w {
            let idx = select(&|v| v.supplier == i && v.period == p);
            if !idx.is_empty() {
                rows.push(Row { name: format!("period_{i}_{p}"), family: Family::Period, terms: ones(idx), rhs: 1.0 });
            }
        }
    }
    for k in 0..m {
        for i in 1..=n {
            for j in i + 1..=n {
                if co.f3[i][j] {
                    continue;
                }
                let idx = select(&|v| v.inspector == k && (v.supplier == i || v.supplier == j));
                let has = |s: usize| idx.iter().any(|&x| vars[x].supplier == s);
                if has(i) && has(j) {
                    rows.push(Row {
                        name: format!("pair_{i}_{j}_{}", k + 1),
                        family: Family::Pair,
                        terms: ones(idx),
                        rhs: 1.0,
                    });
                }
            }
        }
    }
    for k in 0..m {
        let terms = select(&|v| v.inspector == k).into_iter().map(|x| (x, objective[x])).collect();
        rows.push(Row { name: format!("cap_{}", k + 1), family: Family::Capacity, terms, rhs: inst.capacity });
    }
    for k in 0..m {
        let terms = select(&|v| v.inspector == k).into_iter().map(|x| (x, c_return[x])).collect();
        let rhs = (co.lambda_g[k] - co.r0).max(0.0);
        rows.push(Row { name: format!("return_{}", k + 1), family: Family::Return, terms, rhs });
    }
    for k in 0..m {
        for p in 1..=w {
            let slack = (1..=n).map(|i| co.r[i][p - 1]).filter(|x| x.is_finite()).fold(0.0, f64::max);
            let terms = select(&|v| v.inspector == k && v.period == p).into_iter().map(|x| (x, c_day[x])).collect();
            rows.push(Row {
                name: format!("day_{}_{p}", k + 1),
                family: Family::Day,
                terms,
                rhs: inst.grid.length() + slack,
            });
        }
    }
    UbModel { name: inst.name.clone(), inspectors: m, vars, objective, rows }
}

/// Model variables set by a feasible solution. Routes are ranked by return
/// time, latest first, to match the inspector pairing of the model. Returns
/// the supplier that has no matching variable on failure.
pub fn assignment_of(p: &Problem, model: &UbModel, s: &Solution) -> Result<Vec<bool>, usize> {
    let mut order: Vec<usize> = (0..s.routes().len()).collect();
    let end = |k: usize| if s.route(k).is_empty() { 0.0 } else { s.route(k).end() };
    order.sort_by(|&a, &b| end(b).total_cmp(&end(a)).then(a.cmp(&b)));
    let mut x = vec![false; model.vars.len()];
    for (rank, &k) in order.iter().enumerate() {
        for (&v, vis) in s.route(k).stops().iter().zip(s.route(k).visits()) {
            let period = service_period(&p.inst, vis.start, p.inst.service(v));
            let idx = model.var_index(Var { supplier: v, inspector: rank, period }).ok_or(v)?;
            x[idx] = true;
        }
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Optimal,
    /// Search stopped at the node budget; the bound is the root relaxation.
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub value: f64,
    /// Best assignment found.
    pub x: Vec<bool>,
    pub bound: f64,
    pub status: BoundStatus,
    pub nodes: u64,
}

struct Bnb<'a> {
    model: &'a UbModel,
    /// Rows touched by each variable, with coefficients.
    incidence: Vec<Vec<(usize, f64)>>,
    /// Variable groups per supplier, heaviest supplier first.
    groups: Vec<Vec<usize>>,
    weight: Vec<f64>,
    suffix: Vec<f64>,
    cap_rows: Vec<usize>,
    return_rows: Vec<usize>,
    /// Groups sorted by workload per unit of return-row coefficient.
    by_ratio: Vec<(usize, f64)>,
    /// `twin[k]`: inspector `k` is interchangeable with `k - 1`.
    twin: Vec<bool>,
    slack: Vec<f64>,
    used: Vec<usize>,
    x: Vec<bool>,
    cur: f64,
    best: f64,
    best_x: Vec<bool>,
    nodes: u64,
    limit: u64,
    aborted: bool,
}

impl Bnb<'_> {
    fn relaxation(&self, from: usize) -> f64 {
        let b1 = self.suffix[from];
        let b2: f64 = self.cap_rows.iter().map(|&r| self.slack[r].max(0.0)).sum();
        let mut room: f64 = self.return_rows.iter().map(|&r| self.slack[r].max(0.0)).sum();
        let mut b3 = 0.0;
        for &(g, c) in &self.by_ratio {
            if g < from {
                continue;
            }
            if c <= room {
                room -= c;
                b3 += self.weight[g];
            } else {
                if c > 0.0 {
                    b3 += self.weight[g] * room / c;
                }
                break;
            }
        }
        b1.min(b2).min(b3)
    }

    fn fits(&self, v: usize) -> bool {
        self.incidence[v].iter().all(|&(r, c)| c <= self.slack[r] + ROW_EPS)
    }

    fn set(&mut self, v: usize, on: bool) {
        let sign = if on { -1.0 } else { 1.0 };
        for &(r, c) in &self.incidence[v] {
            self.slack[r] += sign * c;
        }
        let k = self.model.vars[v].inspector;
        if on {
            self.used[k] += 1;
        } else {
            self.used[k] -= 1;
        }
        self.x[v] = on;
        self.cur -= sign * self.model.objective[v];
    }

    fn dfs(&mut self, g: usize) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.limit {
            self.aborted = true;
            return;
        }
        if self.cur > self.best + ROW_EPS {
            self.best = self.cur;
            self.best_x = self.x.clone();
        }
        if g == self.groups.len() || self.cur + self.relaxation(g) <= self.best + ROW_EPS {
            return;
        }
        for idx in 0..self.groups[g].len() {
            let v = self.groups[g][idx];
            let k = self.model.vars[v].inspector;
            if self.twin[k] && self.used[k] == 0 && self.used[k - 1] == 0 {
                continue;
            }
            if self.fits(v) {
                self.set(v, true);
                self.dfs(g + 1);
                self.set(v, false);
            }
        }
        self.dfs(g + 1);
    }
}

/// Exact optimum of the model by depth-first branch and bound. Suppliers are
/// branched heaviest first; the bound is the least of the remaining
/// workload, the pooled capacity slack and a fractional knapsack over the
/// pooled return-time slack.
pub fn solve_exact_small(model: &UbModel, nominal_size: usize, node_limit: u64) -> Result<ExactSolution, BoundError> {
    if nominal_size > MAX_EXACT_VARIABLES {
        return Err(BoundError::TooLarge(nominal_size));
    }
    let nv = model.vars.len();
    let mut incidence = vec![Vec::new(); nv];
    for (r, row) in model.rows.iter().enumerate() {
        for &(v, c) in &row.terms {
            incidence[v].push((r, c));
        }
    }
    let mut suppliers: Vec<usize> = model.vars.iter().map(|v| v.supplier).collect();
    suppliers.dedup();
    let value = |s: usize| model.objective[model.vars.iter().position(|v| v.supplier == s).unwrap()];
    suppliers.sort_by(|&a, &b| value(b).total_cmp(&value(a)).then(a.cmp(&b)));
    let groups: Vec<Vec<usize>> =
        suppliers.iter().map(|&s| (0..nv).filter(|&v| model.vars[v].supplier == s).collect()).collect();
    let weight: Vec<f64> = suppliers.iter().map(|&s| value(s)).collect();
    let mut suffix = vec![0.0; groups.len() + 1];
    for g in (0..groups.len()).rev() {
        suffix[g] = suffix[g + 1] + weight[g];
    }
    let rows_of = |f: Family| -> Vec<usize> { (0..model.rows.len()).filter(|&r| model.rows[r].family == f).collect() };
    let cap_rows = rows_of(Family::Capacity);
    let return_rows = rows_of(Family::Return);
    let mut by_ratio: Vec<(usize, f64)> = groups
        .iter()
        .enumerate()
        .map(|(g, vars)| {
            let c = vars
                .iter()
                .flat_map(|&v| incidence[v].iter().filter(|(r, _)| model.rows[*r].family == Family::Return))
                .map(|&(_, c)| c)
                .fold(f64::INFINITY, f64::min);
            (g, c)
        })
        .collect();
    let ratio = |(g, c): &(usize, f64)| if *c > 0.0 { weight[*g] / c } else { f64::INFINITY };
    by_ratio.sort_by(|a, b| ratio(b).total_cmp(&ratio(a)).then(a.0.cmp(&b.0)));
    let m = model.inspectors;
    let rhs = |k: usize| model.rows[return_rows[k]].rhs;
    let twin: Vec<bool> = (0..m).map(|k| k > 0 && k < return_rows.len() && rhs(k) == rhs(k - 1)).collect();
    let mut bnb = Bnb {
        model,
        incidence,
        groups,
        weight,
        suffix,
        cap_rows,
        return_rows,
        by_ratio,
        twin,
        slack: model.rows.iter().map(|r| r.rhs).collect(),
        used: vec![0; m],
        x: vec![false; nv],
        cur: 0.0,
        best: 0.0,
        best_x: vec![false; nv],
        nodes: 0,
        limit: node_limit,
        aborted: false,
    };
    let root = bnb.relaxation(0);
    bnb.dfs(0);
    let (status, bound) = if bnb.aborted { (BoundStatus::NodeLimit, root.max(bnb.best)) } else { (BoundStatus::Optimal, bnb.best) };
    Ok(ExactSolution { value: bnb.best, x: bnb.best_x, bound, status, nodes: bnb.nodes })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub instance: String,
    pub ub: f64,
    pub solve_time: f64,
    pub status: BoundStatus,
}

/// Builds and solves the model for `p`.
pub fn bound(p: &Problem, node_limit: u64) -> Result<BoundReport, BoundError> {
    let clock = Instant::now();
    let co = derive_coefficients(&p.inst, &p.transit);
    let model = build_model(&p.inst, &co);
    let size = p.inst.n() * p.inst.inspectors * p.inst.grid.periods();
    let sol = solve_exact_small(&model, size, node_limit)?;
    Ok(BoundReport {
        instance: p.inst.name.clone(),
        ub: sol.bound,
        solve_time: clock.elapsed().as_secs_f64(),
        status: sol.status,
    })
}

const LP_WIDTH: usize = 78;

fn write_expr(out: &mut impl Write, label: &str, terms: &[(String, f64)], tail: &str) -> io::Result<()> {
    let mut line = format!(" {label}:");
    let mut first = true;
    for (name, c) in terms {
        let coef = if *c == 1.0 { String::new() } else { format!("{c} ") };
        let piece = if first { format!(" {coef}{name}") } else { format!(" + {coef}{name}") };
        if line.len() + piece.len() > LP_WIDTH {
            writeln!(out, "{line}")?;
            line = "  ".to_string();
        }
        line.push_str(&piece);
        first = false;
    }
    if terms.is_empty() {
        line.push_str(" 0");
    }
    if !tail.is_empty() {
        if line.len() + tail.len() + 1 > LP_WIDTH {
            writeln!(out, "{line}")?;
            line = "   ".to_string();
        }
        line.push(' ');
        line.push_str(tail);
    }
    writeln!(out, "{line}")
}

/// Writes the model in CPLEX LP format. Variables are named `x_i_k_p` with
/// 1-based inspector and period; rows keep their model names.
pub fn emit_lp(model: &UbModel, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "\\ upper bound model for {}", model.name)?;
    writeln!(out, "Maximize")?;
    let obj: Vec<(String, f64)> = model.vars.iter().zip(&model.objective).map(|(v, &c)| (v.name(), c)).collect();
    write_expr(&mut out, "obj", &obj, "")?;
    writeln!(out, "Subject To")?;
    for row in &model.rows {
        if row.terms.is_empty() {
            continue;
        }
        let terms: Vec<(String, f64)> = row.terms.iter().map(|&(v, c)| (model.vars[v].name(), c)).collect();
        write_expr(&mut out, &row.name, &terms, &format!("<= {}", row.rhs))?;
    }
    writeln!(out, "Binaries")?;
    let mut line = String::new();
    for v in &model.vars {
        let name = v.name();
        if !line.is_empty() && line.len() + name.len() + 1 > LP_WIDTH {
            writeln!(out, "{line}")?;
            line.clear();
        }
        line.push(' ');
        line.push_str(&name);
    }
    if !line.is_empty() {
        writeln!(out, "{line}")?;
    }
    writeln!(out, "End")
}
