//! Period-aware shortest transit times.
//!
//! An inspector may only travel inside a working period and must stop at a
//! vertex when a period closes. Moving from `i` to `j` therefore either uses
//! the direct edge within the current period, or rests at some waypoint
//! reachable before the period closes and continues from there at the next
//! opening. The table `base[i][j]` holds the shortest transit when departing
//! `i` at a period opening; for every vertex the neighbours reachable within
//! one period are kept sorted by distance together with prefix minima of
//! `base`, so that a query for an arbitrary departure time is a binary
//! search.

use crate::instance::{period_close, Instance, PeriodGrid, Time, TIME_EPS};
use std::io::{self, Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransitError {
    #[error("departure time {0} lies outside the planning horizon")]
    OutOfHorizon(Time),
    #[error("service ending at {end} overruns the horizon {horizon}")]
    HorizonOverflow { end: Time, horizon: Time },
    #[error("table dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Shortest transit times when departing at a period opening, `n x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseTable {
    size: usize,
    data: Vec<Time>,
}

impl BaseTable {
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Time {
        self.data[i * self.size + j]
    }
}

/// Transit of the single leg `u -> j` started at elapsed time `x` after a
/// period opening: within the current period if it fits, otherwise from the
/// next opening if the edge fits in one period, otherwise impossible.
#[inline]
fn extend(length: Time, x: Time, leg: Time) -> Time {
    let close = period_close(length, x);
    if close - x + TIME_EPS >= leg {
        x + leg
    } else if leg <= length + TIME_EPS {
        close + leg
    } else {
        f64::INFINITY
    }
}

/// Label-setting computation of the base table, one source at a time.
/// Ties between equal labels settle the smaller vertex id first.
pub fn compute_base(inst: &Instance) -> BaseTable {
    let size = inst.vertex_count();
    let length = inst.grid.length();
    let mut data = vec![f64::INFINITY; size * size];
    let mut settled = vec![false; size];
    let mut label = vec![f64::INFINITY; size];
    for src in 0..size {
        settled.iter_mut().for_each(|s| *s = false);
        label.iter_mut().for_each(|l| *l = f64::INFINITY);
        label[src] = 0.0;
        loop {
            let mut best = usize::MAX;
            let mut best_label = f64::INFINITY;
            for v in 0..size {
                if !settled[v] && label[v] < best_label {
                    best = v;
                    best_label = label[v];
                }
            }
            if best == usize::MAX {
                break;
            }
            settled[best] = true;
            for j in 0..size {
                if settled[j] {
                    continue;
                }
                let cand = extend(length, best_label, inst.travel(best, j));
                if cand < label[j] {
                    label[j] = cand;
                }
            }
        }
        data[src * size..(src + 1) * size].copy_from_slice(&label);
    }
    BaseTable { size, data }
}

/// For each vertex, the vertices reachable within one period sorted by
/// direct travel time, the vertex itself first.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborOrder {
    offsets: Vec<usize>,
    vertices: Vec<usize>,
    reach: Vec<Time>,
}

impl NeighborOrder {
    pub fn new(inst: &Instance) -> Self {
        let size = inst.vertex_count();
        let length = inst.grid.length();
        let mut offsets = Vec::with_capacity(size + 1);
        let mut vertices = Vec::new();
        let mut reach = Vec::new();
        offsets.push(0);
        for i in 0..size {
            let mut row: Vec<usize> = (0..size)
                .filter(|&u| u == i || inst.travel(i, u) <= length + TIME_EPS)
                .collect();
            row.sort_by(|&a, &b| {
                inst.travel(i, a)
                    .total_cmp(&inst.travel(i, b))
                    .then((a != i).cmp(&(b != i)))
                    .then(a.cmp(&b))
            });
            reach.extend(row.iter().map(|&u| if u == i { 0.0 } else { inst.travel(i, u) }));
            vertices.extend(row);
            offsets.push(vertices.len());
        }
        Self { offsets, vertices, reach }
    }

    /// `(i_0, i_1, ..., i_h)` for vertex `i`.
    pub fn of(&self, i: usize) -> &[usize] {
        &self.vertices[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Travel times `t_{i, i_k}` matching [`Self::of`].
    pub fn reach(&self, i: usize) -> &[Time] {
        &self.reach[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// Prefix minima `pm[i][k][j] = min_{k' <= k} base[i_k'][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixMinima {
    size: usize,
    data: Vec<Time>,
}

impl PrefixMinima {
    #[inline]
    fn row(&self, order: &NeighborOrder, i: usize, k: usize) -> &[Time] {
        let at = (order.offsets[i] + k) * self.size;
        &self.data[at..at + self.size]
    }
}

pub fn preprocess_prefix_min(base: &BaseTable, order: &NeighborOrder) -> PrefixMinima {
    let size = base.size;
    let mut data = vec![0.0; order.vertices.len() * size];
    for i in 0..size {
        let nbrs = order.of(i);
        let off = order.offsets[i];
        for (k, &u) in nbrs.iter().enumerate() {
            let at = (off + k) * size;
            for j in 0..size {
                let b = base.get(u, j);
                data[at + j] = if k == 0 { b } else { data[at - size + j].min(b) };
            }
        }
    }
    PrefixMinima { size, data }
}

/// Preprocessed transit data for one instance. Immutable and shareable.
#[derive(Debug, Clone)]
pub struct TransitTables {
    grid: PeriodGrid,
    size: usize,
    travel: Vec<Time>,
    base: BaseTable,
    order: NeighborOrder,
    prefix: PrefixMinima,
}

impl TransitTables {
    pub fn new(inst: &Instance) -> Self {
        let base = compute_base(inst);
        let order = NeighborOrder::new(inst);
        let prefix = preprocess_prefix_min(&base, &order);
        let size = inst.vertex_count();
        let mut travel = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                travel.push(inst.travel(i, j));
            }
        }
        Self { grid: inst.grid, size, travel, base, order, prefix }
    }

    pub fn grid(&self) -> &PeriodGrid {
        &self.grid
    }

    pub fn base(&self) -> &BaseTable {
        &self.base
    }

    pub fn neighbor_order(&self) -> &NeighborOrder {
        &self.order
    }

    /// `t^(k)_{i,j}`.
    pub fn prefix_min(&self, i: usize, k: usize, j: usize) -> Time {
        self.prefix.row(&self.order, i, k)[j]
    }

    #[inline]
    fn direct(&self, i: usize, j: usize) -> Time {
        self.travel[i * self.size + j]
    }

    /// Number of leading neighbours of `i` reachable within `residual`.
    #[inline]
    fn reachable(&self, i: usize, residual: Time) -> usize {
        self.order.reach(i).partition_point(|&r| r <= residual + TIME_EPS)
    }

    /// Smallest `k` with `pm[i][k][j] <= limit`; prefix minima do not
    /// increase in `k`.
    fn first_prefix_within(&self, i: usize, j: usize, limit: Time) -> usize {
        let (mut lo, mut hi) = (0, self.order.reach(i).len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.prefix.row(&self.order, i, mid)[j] <= limit {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// Shortest transit from `i` to `j` departing at `dt`.
    pub fn query(&self, i: usize, j: usize, dt: Time) -> Result<Time, TransitError> {
        if !(dt >= -TIME_EPS && dt <= self.grid.horizon() + TIME_EPS) {
            return Err(TransitError::OutOfHorizon(dt));
        }
        Ok(self.transit(i, j, dt))
    }

    /// [`Self::query`] without the horizon check; the period grid is
    /// extended indefinitely past the horizon.
    #[inline]
    pub fn transit(&self, i: usize, j: usize, dt: Time) -> Time {
        let residual = (period_close(self.grid.length(), dt) - dt).max(0.0);
        let direct = self.direct(i, j);
        if residual + TIME_EPS >= direct {
            return direct;
        }
        let k = self.reachable(i, residual);
        residual + self.prefix.row(&self.order, i, k - 1)[j]
    }

    /// Arrival time at `j` when leaving `i` at `dt`.
    #[inline]
    pub fn arrival(&self, i: usize, j: usize, dt: Time) -> Time {
        dt + self.transit(i, j, dt)
    }

    /// Latest departure from `i` that still reaches `j` by `deadline`, or
    /// `-inf` if no departure inside the horizon does.
    pub fn latest_departure(&self, i: usize, j: usize, deadline: Time) -> Time {
        let length = self.grid.length();
        let direct = self.direct(i, j);
        let reach = self.order.reach(i);
        for p in (1..=self.grid.periods()).rev() {
            let open = self.grid.opening(p);
            let close = self.grid.closing(p);
            if deadline < open - TIME_EPS {
                continue;
            }
            // departures in the last `direct` units before `close` must
            // rest at a waypoint: arrival = close + prefix minimum
            let limit = deadline - close + TIME_EPS;
            let k = self.first_prefix_within(i, j, limit);
            if k < reach.len() {
                let r = reach[k];
                let in_range = if p == 1 { r <= length + TIME_EPS } else { r < length - TIME_EPS };
                if r + TIME_EPS < direct && in_range {
                    return close - r;
                }
            }
            if direct <= length + TIME_EPS {
                let dt = (close - direct).min(deadline - direct);
                let lo = if p == 1 { 0.0 } else { open };
                if dt >= lo - TIME_EPS {
                    return dt.max(lo);
                }
            }
        }
        f64::NEG_INFINITY
    }

    /// Earliest time service of length `service` can start at or after
    /// `ready` without straddling a period boundary.
    #[inline]
    pub fn service_start(&self, ready: Time, service: Time) -> Time {
        let close = period_close(self.grid.length(), ready);
        if close - ready + TIME_EPS >= service {
            ready
        } else {
            close
        }
    }

    /// Earliest departure after a service that may start at `ready`.
    pub fn earliest_departure(&self, ready: Time, service: Time) -> Result<Time, TransitError> {
        let end = self.service_start(ready, service) + service;
        if end > self.grid.horizon() + TIME_EPS {
            return Err(TransitError::HorizonOverflow { end, horizon: self.grid.horizon() });
        }
        Ok(end)
    }

    /// Latest service start `<= latest` whose service fits in one period.
    /// A start exactly at a period boundary runs into the next period.
    #[inline]
    pub fn latest_service_start(&self, latest: Time, service: Time) -> Time {
        if latest < -TIME_EPS {
            return f64::NEG_INFINITY;
        }
        let close = period_close(self.grid.length(), latest);
        let residual = close - latest;
        if residual + TIME_EPS >= service || (residual <= TIME_EPS && latest > TIME_EPS) {
            latest
        } else {
            close - service
        }
    }

    const MAGIC: &'static [u8; 8] = b"MPISPTT1";

    /// Writes the preprocessed tables tagged with `key` (usually the
    /// instance content hash).
    pub fn dump(&self, mut w: impl Write, key: &str) -> Result<(), TransitError> {
        w.write_all(Self::MAGIC)?;
        write_u64(&mut w, key.len() as u64)?;
        w.write_all(key.as_bytes())?;
        write_u64(&mut w, self.size as u64)?;
        write_u64(&mut w, self.grid.periods() as u64)?;
        write_f64s(&mut w, &[self.grid.length()])?;
        write_f64s(&mut w, &self.travel)?;
        write_f64s(&mut w, &self.base.data)?;
        write_u64(&mut w, self.order.vertices.len() as u64)?;
        for &o in &self.order.offsets {
            write_u64(&mut w, o as u64)?;
        }
        for &v in &self.order.vertices {
            write_u64(&mut w, v as u64)?;
        }
        write_f64s(&mut w, &self.order.reach)?;
        write_f64s(&mut w, &self.prefix.data)?;
        Ok(())
    }

    /// Reads tables written by [`Self::dump`], refusing a different key.
    pub fn load(mut r: impl Read, key: &str) -> Result<Self, TransitError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != Self::MAGIC {
            return Err(TransitError::Dump("bad magic".into()));
        }
        let klen = read_u64(&mut r)? as usize;
        let mut kbuf = vec![0u8; klen];
        r.read_exact(&mut kbuf)?;
        if kbuf != key.as_bytes() {
            return Err(TransitError::Dump("key mismatch".into()));
        }
        let size = read_u64(&mut r)? as usize;
        let periods = read_u64(&mut r)? as usize;
        let length = read_f64s(&mut r, 1)?[0];
        let grid = PeriodGrid::new(periods, length).map_err(|e| TransitError::Dump(e.to_string()))?;
        let travel = read_f64s(&mut r, size * size)?;
        let base = BaseTable { size, data: read_f64s(&mut r, size * size)? };
        let total = read_u64(&mut r)? as usize;
        let offsets = (0..=size).map(|_| read_u64(&mut r).map(|v| v as usize)).collect::<Result<Vec<_>, _>>()?;
        let vertices = (0..total).map(|_| read_u64(&mut r).map(|v| v as usize)).collect::<Result<Vec<_>, _>>()?;
        let reach = read_f64s(&mut r, total)?;
        let prefix = PrefixMinima { size, data: read_f64s(&mut r, total * size)? };
        Ok(Self { grid, size, travel, base, order: NeighborOrder { offsets, vertices, reach }, prefix })
    }
}

fn write_u64(w: &mut impl Write, v: u64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_f64s(w: &mut impl Write, vs: &[f64]) -> io::Result<()> {
    for v in vs {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64(r: &mut impl Read) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s(r: &mut impl Read, count: usize) -> io::Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut b = [0u8; 8];
    for _ in 0..count {
        r.read_exact(&mut b)?;
        out.push(f64::from_le_bytes(b));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Supplier, TravelSpec};

    /// Four collinear vertices: depot at 0, then 15, 30 and 45 along a line.
    fn line(periods: usize) -> Instance {
        let suppliers = (1..=3)
            .map(|id| Supplier {
                id,
                x: 15.0 * id as f64,
                y: 0.0,
                workload: 1.0,
                service: 0.0,
                ready: 0.0,
                due: 20.0 * periods as f64,
            })
            .collect();
        Instance::new(
            "line",
            (0.0, 0.0),
            suppliers,
            1,
            10.0,
            PeriodGrid::new(periods, 20.0).unwrap(),
            TravelSpec::Euclidean { round_to: None },
        )
        .unwrap()
    }

    #[test]
    fn direct_edge_within_a_period() {
        let tt = TransitTables::new(&line(5));
        assert_eq!(tt.base().get(0, 1), 15.0);
        assert_eq!(tt.base().get(1, 0), 15.0);
    }

    #[test]
    fn long_edge_uses_a_waypoint() {
        // 0 -> 2 is 30 > T = 20: travel 15 to vertex 1, rest, then 15 more
        let tt = TransitTables::new(&line(5));
        assert_eq!(tt.base().get(0, 2), 35.0);
        assert_eq!(tt.base().get(0, 3), 55.0);
    }

    #[test]
    fn unreachable_pair_is_infinite() {
        let mut inst = line(5);
        let rows = vec![
            vec![0.0, 25.0, 30.0, 45.0],
            vec![25.0, 0.0, 25.0, 30.0],
            vec![30.0, 25.0, 0.0, 25.0],
            vec![45.0, 30.0, 25.0, 0.0],
        ];
        inst.travel = crate::instance::TravelMatrix::from_rows(&rows).unwrap();
        let tt = TransitTables::new(&inst);
        assert!(tt.base().get(0, 3).is_infinite());
        assert!(tt.transit(0, 3, 7.0).is_infinite());
    }

    #[test]
    fn query_branches() {
        let tt = TransitTables::new(&line(5));
        // residual 13 >= 0 -> 1 needs 15? no: residual 13 < 15
        assert_eq!(tt.query(0, 1, 7.0).unwrap(), 13.0 + 15.0);
        assert_eq!(tt.query(0, 1, 5.0).unwrap(), 15.0);
        // at an opening the full period is available
        assert_eq!(tt.query(0, 2, 20.0).unwrap(), 35.0);
        assert_eq!(tt.query(0, 2, 0.0).unwrap(), 35.0);
        assert!(tt.query(0, 1, 101.0).is_err());
    }

    #[test]
    fn prefix_minima_start_at_base_and_do_not_increase() {
        let tt = TransitTables::new(&line(5));
        let order = tt.neighbor_order();
        for i in 0..4 {
            assert_eq!(order.of(i)[0], i);
            for j in 0..4 {
                assert_eq!(tt.prefix_min(i, 0, j), tt.base().get(i, j));
                for k in 1..order.of(i).len() {
                    assert!(tt.prefix_min(i, k, j) <= tt.prefix_min(i, k - 1, j));
                }
            }
        }
    }

    #[test]
    fn earliest_departure_cases() {
        let tt = TransitTables::new(&line(5));
        assert_eq!(tt.earliest_departure(5.0, 10.0).unwrap(), 15.0);
        assert_eq!(tt.earliest_departure(15.0, 10.0).unwrap(), 30.0);
        assert!(tt.earliest_departure(95.0, 10.0).is_err());
        let single = TransitTables::new(&line(1));
        assert_eq!(single.earliest_departure(3.0, 17.0).unwrap(), 20.0);
    }

    #[test]
    fn latest_departure_inverts_arrival() {
        let tt = TransitTables::new(&line(5));
        // direct leg of 15 fits the last period
        assert_eq!(tt.latest_departure(1, 0, 100.0), 85.0);
        // 0 -> 1 by 40: leave at 25 (direct) at the latest
        assert_eq!(tt.latest_departure(0, 1, 40.0), 25.0);
        // too early to arrive at all
        assert_eq!(tt.latest_departure(0, 2, 30.0), f64::NEG_INFINITY);
        // 0 -> 2 by 60: leave at 20 with a full period, or later resting at 1
        let ld = tt.latest_departure(0, 2, 60.0);
        assert!(ld + tt.transit(0, 2, ld) <= 60.0 + 1e-9);
        assert!(ld + 1e-6 + tt.transit(0, 2, ld + 1e-6) > 60.0);
    }

    #[test]
    fn latest_service_start_respects_boundaries() {
        let tt = TransitTables::new(&line(5));
        assert_eq!(tt.latest_service_start(12.0, 5.0), 12.0);
        assert_eq!(tt.latest_service_start(18.0, 5.0), 15.0);
        assert_eq!(tt.latest_service_start(20.0, 5.0), 20.0);
        assert_eq!(tt.latest_service_start(21.0, 5.0), 21.0);
    }

    #[test]
    fn dump_and_load_round_trip() {
        let inst = line(3);
        let tt = TransitTables::new(&inst);
        let mut buf = Vec::new();
        tt.dump(&mut buf, "abc").unwrap();
        let back = TransitTables::load(buf.as_slice(), "abc").unwrap();
        assert_eq!(back.base(), tt.base());
        assert_eq!(back.transit(0, 3, 7.5), tt.transit(0, 3, 7.5));
        assert!(TransitTables::load(buf.as_slice(), "other").is_err());
    }
}
