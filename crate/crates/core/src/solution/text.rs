use super::Solution;
use std::fmt::Write as _;

/// Plain-text rendering of a solution:
///
/// ```text
/// fitness 15 0 171.715729
/// route 1 load 8 end 41.213203
///   1 arrive 10.000000 start 10.000000 depart 14.000000 latest 86.000000
/// route 2 load 0 end 0.000000
/// pool 2
/// ```
pub fn write_solution(s: &Solution) -> String {
    let mut out = String::new();
    let f = s.fitness();
    let _ = writeln!(out, "fitness {} {} {:.6}", f.p, f.d, f.f);
    for (k, r) in s.routes().iter().enumerate() {
        let _ = writeln!(out, "route {} load {} end {:.6}", k + 1, r.load(), r.end());
        for ((v, vis), la) in r.stops().iter().zip(r.visits()).zip(r.latest()) {
            let _ = writeln!(
                out,
                "  {v} arrive {:.6} start {:.6} depart {:.6} latest {:.6}",
                vis.arrival, vis.start, vis.departure, la
            );
        }
    }
    let pool: Vec<String> = s.pool().iter().map(|u| u.to_string()).collect();
    let _ = writeln!(out, "pool {}", pool.join(" "));
    out
}

/// Route sequences from text written by [`write_solution`].
pub fn read_sequences(text: &str) -> Vec<Vec<usize>> {
    let mut seqs: Vec<Vec<usize>> = Vec::new();
    for line in text.lines() {
        if line.starts_with("route ") {
            seqs.push(Vec::new());
        } else if let Some(rest) = line.strip_prefix("  ") {
            if let (Some(last), Some(Ok(v))) = (seqs.last_mut(), rest.split_whitespace().next().map(str::parse)) {
                last.push(v);
            }
        }
    }
    seqs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Instance, PeriodGrid, Supplier, TravelSpec};
    use crate::solution::{Problem, Scoring};

    #[test]
    fn written_sequences_read_back() {
        let suppliers = (1..=4)
            .map(|id| Supplier { id, x: id as f64, y: 1.0, workload: 1.0, service: 1.0, ready: 0.0, due: 50.0 })
            .collect();
        let inst = Instance::new(
            "t",
            (0.0, 0.0),
            suppliers,
            2,
            f64::INFINITY,
            PeriodGrid::new(2, 25.0).unwrap(),
            TravelSpec::Euclidean { round_to: None },
        )
        .unwrap();
        let p = Problem::new(inst);
        let s = Solution::from_sequences(&p, Scoring::default(), &[vec![2, 1], vec![4]]).unwrap();
        let text = write_solution(&s);
        assert!(text.starts_with("fitness 3 "));
        assert!(text.ends_with("pool 3\n"));
        assert_eq!(read_sequences(&text), vec![vec![2, 1], vec![4]]);
    }
}
