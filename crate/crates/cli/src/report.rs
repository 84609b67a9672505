use crate::run::RunReport;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

/// Sort key that orders embedded numbers by value, so `r2` precedes `r10`.
fn natural_key(s: &str) -> Vec<(String, u64)> {
    let mut out = Vec::new();
    let mut text = String::new();
    let mut digits = String::new();
    for c in s.chars() {
        if c.is_ascii_digit() {
            digits.push(c);
        } else {
            if !digits.is_empty() {
                out.push((std::mem::take(&mut text), digits.parse().unwrap_or(u64::MAX)));
                digits.clear();
            }
            text.push(c);
        }
    }
    out.push((text, digits.parse().unwrap_or(0)));
    out
}

/// Cells of one instance and period count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub ub: Option<f64>,
    pub max: f64,
    pub avg: f64,
    pub time: f64,
}

/// Results of all instances for one inspector count.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub inspectors: usize,
    pub periods: Vec<usize>,
    /// `(group, source, cells by period count)`, sorted by group then source.
    pub rows: Vec<(String, String, BTreeMap<usize, Cell>)>,
}

/// Groups reports into one table per inspector count. A later report for
/// the same `(source, w, m)` replaces an earlier one.
pub fn tables(reports: &[RunReport]) -> Vec<Table> {
    let mut by_m: BTreeMap<usize, BTreeMap<(String, String), BTreeMap<usize, Cell>>> = BTreeMap::new();
    for r in reports {
        let cell = Cell { ub: r.ub, max: r.max_workload, avg: r.avg_workload, time: r.avg_time };
        by_m.entry(r.inspectors).or_default().entry((r.group.clone(), r.source.clone())).or_default().insert(r.periods, cell);
    }
    by_m.into_iter()
        .map(|(m, rows)| {
            let periods: BTreeSet<usize> = rows.values().flat_map(|c| c.keys().copied()).collect();
            let mut rows: Vec<_> = rows.into_iter().map(|((g, s), c)| (g, s, c)).collect();
            rows.sort_by(|a, b| natural_key(&a.0).cmp(&natural_key(&b.0)).then(natural_key(&a.1).cmp(&natural_key(&b.1))));
            Table { inspectors: m, periods: periods.into_iter().collect(), rows }
        })
        .collect()
}

/// Mean of the average run times per `(group, w)` of a table.
pub fn average_times(t: &Table) -> Vec<(String, BTreeMap<usize, f64>)> {
    let mut acc: Vec<(String, BTreeMap<usize, (f64, usize)>)> = Vec::new();
    for (group, _, cells) in &t.rows {
        if acc.last().map_or(true, |(g, _)| g != group) {
            acc.push((group.clone(), BTreeMap::new()));
        }
        let slot = &mut acc.last_mut().expect("pushed above").1;
        for (&w, c) in cells {
            let e = slot.entry(w).or_insert((0.0, 0));
            e.0 += c.time;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(g, m)| (g, m.into_iter().map(|(w, (s, n))| (w, s / n as f64)).collect())).collect()
}

fn whole(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.1}")
    }
}

fn cells(c: Option<&Cell>) -> [String; 4] {
    match c {
        Some(c) => [
            c.ub.map(whole).unwrap_or_else(|| "-".into()),
            whole(c.max),
            format!("{:.1}", c.avg),
            format!("{:.1}", c.time),
        ],
        None => ["-".into(), "-".into(), "-".into(), "-".into()],
    }
}

pub fn table_csv(t: &Table) -> String {
    let mut out = String::from("group,instance");
    for w in &t.periods {
        let _ = write!(out, ",w{w}_ub,w{w}_max,w{w}_avg,w{w}_time");
    }
    out.push('\n');
    for (group, source, row) in &t.rows {
        let _ = write!(out, "{group},{source}");
        for w in &t.periods {
            for c in cells(row.get(w)) {
                let _ = write!(out, ",{c}");
            }
        }
        out.push('\n');
    }
    out
}

pub fn average_times_csv(t: &Table) -> String {
    let mut out = String::from("group");
    for w in &t.periods {
        let _ = write!(out, ",w{w}");
    }
    out.push('\n');
    for (group, times) in average_times(t) {
        out.push_str(&group);
        for w in &t.periods {
            match times.get(w) {
                Some(x) => {
                    let _ = write!(out, ",{x:.2}");
                }
                None => out.push_str(",-"),
            }
        }
        out.push('\n');
    }
    out
}

/// All tables as Markdown: one results table per inspector count, then the
/// average-time summaries.
pub fn markdown(tables: &[Table]) -> String {
    let mut out = String::new();
    for t in tables {
        let _ = writeln!(out, "## Results with m = {}\n", t.inspectors);
        out.push_str("| Instance |");
        for w in &t.periods {
            let _ = write!(out, " UB (w={w}) | Max. Workload | Ave. Workload | Ave. Time |");
        }
        out.push_str("\n|---|");
        for _ in &t.periods {
            out.push_str("---:|---:|---:|---:|");
        }
        out.push('\n');
        for (_, source, row) in &t.rows {
            let _ = write!(out, "| {source} |");
            for w in &t.periods {
                for c in cells(row.get(w)) {
                    let _ = write!(out, " {c} |");
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    for t in tables {
        let _ = writeln!(out, "## Average time per group, m = {}\n", t.inspectors);
        out.push_str("| Group |");
        for w in &t.periods {
            let _ = write!(out, " w = {w} |");
        }
        out.push_str("\n|---|");
        for _ in &t.periods {
            out.push_str("---:|");
        }
        out.push('\n');
        for (group, times) in average_times(t) {
            let _ = write!(out, "| {group} |");
            for w in &t.periods {
                match times.get(w) {
                    Some(x) => {
                        let _ = write!(out, " {x:.2} |");
                    }
                    None => out.push_str(" - |"),
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
