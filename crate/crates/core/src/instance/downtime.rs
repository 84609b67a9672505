use super::{InstanceError, Time, TIME_EPS};

/// A closed time interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: Time,
    pub end: Time,
}

impl Interval {
    pub fn new(start: Time, end: Time) -> Self {
        Self { start, end }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedWindow {
    pub window: Interval,
    /// The original window lay entirely inside a rest gap; the supplier cannot be served.
    pub degenerate: bool,
}

enum Locus {
    /// Inside period `p` (0-based).
    Period(usize),
    /// Strictly between period `p` and `p + 1`.
    Gap(usize),
    Before,
    After,
}

fn locate(periods: &[Interval], t: Time) -> Locus {
    if t < periods[0].start - TIME_EPS {
        return Locus::Before;
    }
    for (p, iv) in periods.iter().enumerate() {
        if t <= iv.end + TIME_EPS {
            return if t >= iv.start - TIME_EPS { Locus::Period(p) } else { Locus::Gap(p - 1) };
        }
    }
    Locus::After
}

/// Removes the rest gaps between working periods from the timeline: every
/// time inside period `p` moves left by the downtime accumulated before `p`.
/// Window openings that fall in a gap clamp to the next opening, window
/// closings clamp to the previous closing.
pub fn transform_downtime(
    windows: &[Interval],
    periods: &[Interval],
) -> Result<Vec<TransformedWindow>, InstanceError> {
    let first = periods
        .first()
        .ok_or_else(|| InstanceError::Periods("no periods given".into()))?;
    let length = first.end - first.start;
    if !(length > 0.0) {
        return Err(InstanceError::Periods("period length must be positive".into()));
    }
    for (p, iv) in periods.iter().enumerate() {
        if ((iv.end - iv.start) - length).abs() > TIME_EPS {
            return Err(InstanceError::Periods(format!(
                "period {} has length {}, expected {length}",
                p + 1,
                iv.end - iv.start
            )));
        }
        if p > 0 && iv.start < periods[p - 1].end - TIME_EPS {
            return Err(InstanceError::Periods(format!("period {} overlaps its predecessor", p + 1)));
        }
    }
    let origin = first.start;
    // downtime accumulated before period p
    let shift = |p: usize| periods[p].start - origin - p as f64 * length;
    let map_in = |p: usize, t: Time| t - origin - shift(p);
    let last = periods.len() - 1;

    let open = |t: Time| match locate(periods, t) {
        Locus::Period(p) => map_in(p, t),
        Locus::Gap(p) => map_in(p + 1, periods[p + 1].start),
        Locus::Before => 0.0,
        Locus::After => map_in(last, periods[last].end),
    };
    let close = |t: Time| match locate(periods, t) {
        Locus::Period(p) => map_in(p, t),
        Locus::Gap(p) => map_in(p, periods[p].end),
        Locus::Before => 0.0,
        Locus::After => map_in(last, periods[last].end),
    };

    Ok(windows
        .iter()
        .map(|w| {
            let in_one_gap = match (locate(periods, w.start), locate(periods, w.end)) {
                (Locus::Gap(a), Locus::Gap(b)) => a == b,
                (Locus::Before, Locus::Before) | (Locus::After, Locus::After) => true,
                _ => false,
            };
            let window = Interval::new(open(w.start), close(w.end));
            TransformedWindow { window, degenerate: in_one_gap || window.start > window.end + TIME_EPS }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_gaps_is_identity() {
        let periods = [Interval::new(0.0, 10.0), Interval::new(10.0, 20.0)];
        let ws = [Interval::new(3.0, 17.0), Interval::new(10.0, 10.0)];
        let out = transform_downtime(&ws, &periods).unwrap();
        assert_eq!(out[0].window, ws[0]);
        assert_eq!(out[1].window, ws[1]);
        assert!(out.iter().all(|w| !w.degenerate));
    }

    #[test]
    fn window_inside_gap_is_flagged() {
        let periods = [Interval::new(0.0, 20.0), Interval::new(30.0, 50.0)];
        let out = transform_downtime(&[Interval::new(21.0, 24.0)], &periods).unwrap();
        assert_eq!(out[0].window, Interval::new(20.0, 20.0));
        assert!(out[0].degenerate);
    }

    #[test]
    fn window_spanning_a_gap_keeps_working_time() {
        let periods = [Interval::new(0.0, 20.0), Interval::new(30.0, 50.0)];
        let out = transform_downtime(&[Interval::new(15.0, 35.0)], &periods).unwrap();
        assert_eq!(out[0].window, Interval::new(15.0, 25.0));
        assert!(!out[0].degenerate);
    }

    #[test]
    fn unequal_periods_rejected() {
        let periods = [Interval::new(0.0, 20.0), Interval::new(30.0, 45.0)];
        assert!(transform_downtime(&[], &periods).is_err());
    }
}
