use super::Problem;
use crate::instance::{Time, DEPOT, TIME_EPS};
use std::fmt;

/// Why a route cannot be scheduled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    /// Service at the given position would start after the window closes.
    Window { position: usize },
    /// Service at the given position would end after the horizon.
    Horizon { position: usize },
    /// The inspector cannot return to the depot in time.
    Return,
    Capacity,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Window { position } => write!(f, "time window missed at position {position}"),
            Violation::Horizon { position } => write!(f, "service overruns the horizon at position {position}"),
            Violation::Return => write!(f, "depot reached after the horizon"),
            Violation::Capacity => write!(f, "workload exceeds capacity"),
        }
    }
}

/// Arrival, service start and departure at one stop, computed forward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    pub arrival: Time,
    pub start: Time,
    pub departure: Time,
}

/// Forward step from `prev` (left at `left`) to `v`, without any checks.
#[inline]
pub fn visit(p: &Problem, prev: usize, left: Time, v: usize) -> Visit {
    let arrival = p.transit.arrival(prev, v, left);
    let (e, _) = p.inst.window(v);
    let s = p.inst.service(v);
    let start = p.transit.service_start(arrival.max(e), s);
    Visit { arrival, start, departure: start + s }
}

#[inline]
fn visit_ok(p: &Problem, v: usize, vis: &Visit) -> Result<(), fn(usize) -> Violation> {
    if !(vis.start <= p.inst.window(v).1 + TIME_EPS) {
        return Err(|position| Violation::Window { position });
    }
    if !(vis.departure <= p.inst.horizon() + TIME_EPS) {
        return Err(|position| Violation::Horizon { position });
    }
    Ok(())
}

/// Latest arrival at `v` such that `next` is still reached by `next_latest`.
#[inline]
pub fn latest_arrival(p: &Problem, v: usize, next: usize, next_latest: Time) -> Time {
    let ld = p.transit.latest_departure(v, next, next_latest);
    let (e, l) = p.inst.window(v);
    let s = p.inst.service(v);
    let ls = p.transit.latest_service_start(l.min(ld - s), s);
    if ls >= e - TIME_EPS {
        ls
    } else {
        f64::NEG_INFINITY
    }
}

/// A route of served suppliers; the depot is implicit at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    stops: Vec<usize>,
    visits: Vec<Visit>,
    latest: Vec<Time>,
    load: f64,
    end: Time,
    latest_leave: Time,
}

impl Route {
    pub fn empty(p: &Problem) -> Self {
        let h = p.inst.horizon();
        Self { stops: Vec::new(), visits: Vec::new(), latest: Vec::new(), load: 0.0, end: 0.0, latest_leave: h }
    }

    /// Schedules `stops` from scratch.
    pub fn build(p: &Problem, stops: Vec<usize>) -> Result<Self, Violation> {
        let mut r = Self {
            visits: Vec::with_capacity(stops.len()),
            latest: vec![0.0; stops.len()],
            load: stops.iter().map(|&v| p.inst.workload(v)).fold(0.0, |a, w| a + w),
            stops,
            end: 0.0,
            latest_leave: 0.0,
        };
        if r.load > p.inst.capacity + TIME_EPS {
            return Err(Violation::Capacity);
        }
        r.forward_schedule(p, 0)?;
        r.backward_latest(p);
        Ok(r)
    }

    /// Recomputes arrivals, starts and departures from `from` onwards,
    /// assuming the earlier positions are current.
    pub fn forward_schedule(&mut self, p: &Problem, from: usize) -> Result<(), Violation> {
        self.visits.truncate(from);
        let (mut prev, mut left) = if from == 0 { (DEPOT, 0.0) } else { (self.stops[from - 1], self.visits[from - 1].departure) };
        for pos in from..self.stops.len() {
            let v = self.stops[pos];
            let vis = visit(p, prev, left, v);
            visit_ok(p, v, &vis).map_err(|f| f(pos))?;
            self.visits.push(vis);
            prev = v;
            left = vis.departure;
        }
        self.end = p.transit.arrival(prev, DEPOT, left);
        if !(self.end <= p.inst.horizon() + TIME_EPS) {
            return Err(Violation::Return);
        }
        Ok(())
    }

    /// Recomputes the latest arrival at every position.
    pub fn backward_latest(&mut self, p: &Problem) {
        let mut next = DEPOT;
        let mut next_latest = p.inst.horizon();
        self.latest.resize(self.stops.len(), 0.0);
        for pos in (0..self.stops.len()).rev() {
            let v = self.stops[pos];
            next_latest = latest_arrival(p, v, next, next_latest);
            self.latest[pos] = next_latest;
            next = v;
        }
        self.latest_leave = p.transit.latest_departure(DEPOT, next, next_latest).min(p.inst.horizon());
    }

    pub fn stops(&self) -> &[usize] {
        &self.stops
    }

    pub fn len(&self) -> usize {
        self.stops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    pub fn load(&self) -> f64 {
        self.load
    }

    pub fn visits(&self) -> &[Visit] {
        &self.visits
    }

    /// Latest arrival keeping the rest of the route feasible, per position.
    pub fn latest(&self) -> &[Time] {
        &self.latest
    }

    /// Arrival back at the depot.
    pub fn end(&self) -> Time {
        self.end
    }

    /// Latest departure from the depot that keeps the route feasible.
    pub fn latest_leave(&self) -> Time {
        self.latest_leave
    }

    /// Vertex at `pos`, or the depot past the end.
    #[inline]
    pub fn at(&self, pos: usize) -> usize {
        self.stops.get(pos).copied().unwrap_or(DEPOT)
    }

    /// Vertex before `pos` and the time it is left.
    #[inline]
    pub fn left_of(&self, pos: usize) -> (usize, Time) {
        if pos == 0 {
            (DEPOT, 0.0)
        } else {
            (self.stops[pos - 1], self.visits[pos - 1].departure)
        }
    }

    /// Latest arrival at `pos`; past the end this is the depot deadline.
    #[inline]
    pub fn latest_at(&self, p: &Problem, pos: usize) -> Time {
        self.latest.get(pos).copied().unwrap_or(p.inst.horizon())
    }

    /// Largest slack `latest - arrival` over all positions including both
    /// depot ends.
    pub fn max_free_time(&self, p: &Problem) -> Time {
        let mut best = self.latest_leave;
        for (vis, la) in self.visits.iter().zip(&self.latest) {
            best = best.max(la - vis.arrival);
        }
        best.max(p.inst.horizon() - self.end)
    }
}

/// Whether `head[..cut] ++ middle ++ tail[resume..]` is time-feasible,
/// using the forward data of `head` and the latest arrivals of `tail`.
/// Capacity is left to the caller.
pub fn splice_feasible(p: &Problem, head: &Route, cut: usize, middle: &[usize], tail: &Route, resume: usize) -> bool {
    splice_feasible_iter(p, head, cut, middle.iter().copied(), tail, resume)
}

/// [`splice_feasible`] for a middle given as an iterator.
pub fn splice_feasible_iter(
    p: &Problem,
    head: &Route,
    cut: usize,
    middle: impl IntoIterator<Item = usize>,
    tail: &Route,
    resume: usize,
) -> bool {
    let (mut prev, mut left) = head.left_of(cut);
    for v in middle {
        let vis = visit(p, prev, left, v);
        if visit_ok(p, v, &vis).is_err() {
            return false;
        }
        prev = v;
        left = vis.departure;
    }
    let next = tail.at(resume);
    p.transit.arrival(prev, next, left) <= tail.latest_at(p, resume) + TIME_EPS
}
