//! Problem data: suppliers, the working-period grid, the travel matrix and
//! the instance as a whole, together with Solomon ingestion, generation of
//! multi-period instances and validation.

mod downtime;
mod native;
mod solomon;

pub use downtime::{transform_downtime, Interval, TransformedWindow};
pub use native::{read_instance, write_instance, InstanceFile, NATIVE_FORMAT};
pub use solomon::{parse_solomon, write_solomon, SolomonHeader, SolomonInstance, SolomonRow};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Time and distance are measured in the same unit.
pub type Time = f64;

/// Tolerance applied to time comparisons in branch selection.
pub const TIME_EPS: f64 = 1e-9;

/// Vertex index of the depot.
pub const DEPOT: usize = 0;

/// Workload limit used for generated instances.
pub const GENERATED_CAPACITY: f64 = 200.0;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("invalid period layout: {0}")]
    Periods(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Supplier {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub workload: f64,
    pub service: Time,
    pub ready: Time,
    pub due: Time,
}

/// Contiguous working periods `[a_p, b_p]` of equal length starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodGrid {
    periods: usize,
    length: Time,
}

#[derive(Debug, Error, PartialEq)]
#[error("time {0} lies outside the planning horizon")]
pub struct OutOfHorizon(pub Time);

impl PeriodGrid {
    pub fn new(periods: usize, length: Time) -> Result<Self, InstanceError> {
        if periods == 0 {
            return Err(InstanceError::Invalid("at least one period is required".into()));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(InstanceError::Invalid(format!("period length {length} must be positive")));
        }
        Ok(Self { periods, length })
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn length(&self) -> Time {
        self.length
    }

    pub fn horizon(&self) -> Time {
        self.length * self.periods as f64
    }

    /// Opening time of 1-based period `p`.
    pub fn opening(&self, p: usize) -> Time {
        self.length * (p as f64 - 1.0)
    }

    /// Closing time of 1-based period `p`.
    pub fn closing(&self, p: usize) -> Time {
        self.length * p as f64
    }

    /// Closing time of the period containing `dt`, where period `p` owns the
    /// half-open interval `(a_p, b_p]` and time 0 belongs to the first period.
    pub fn ceil(&self, dt: Time) -> Result<Time, OutOfHorizon> {
        if !(dt >= -TIME_EPS && dt <= self.horizon() + TIME_EPS) {
            return Err(OutOfHorizon(dt));
        }
        Ok(period_close(self.length, dt))
    }

    /// 1-based index of the period `(a_p, b_p]` that contains `dt` (time 0 maps to 1).
    pub fn period_of(&self, dt: Time) -> usize {
        let close = period_close(self.length, dt);
        ((close / self.length).round() as usize).clamp(1, self.periods)
    }
}

/// Closing time of the period containing `t` on an unbounded grid of
/// period length `length` that opens at 0. `period_close(0) == length`.
#[inline]
pub fn period_close(length: Time, t: Time) -> Time {
    if t <= TIME_EPS {
        return length;
    }
    let k = ((t - TIME_EPS) / length).ceil().max(1.0);
    k * length
}

/// How travel times are derived from coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TravelSpec {
    /// Euclidean distance, optionally rounded to a multiple of `round_to`.
    Euclidean { round_to: Option<f64> },
    /// Explicit matrix over vertices `0..=n`.
    Matrix { rows: Vec<Vec<f64>> },
}

/// Dense square matrix of travel times over all vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelMatrix {
    size: usize,
    data: Vec<f64>,
}

impl TravelMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, InstanceError> {
        let size = rows.len();
        let mut data = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(InstanceError::Invalid(format!(
                    "travel matrix row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { size, data })
    }

    pub fn euclidean(points: &[(f64, f64)], round_to: Option<f64>) -> Self {
        let size = points.len();
        let mut data = vec![0.0; size * size];
        for (i, a) in points.iter().enumerate() {
            for (j, b) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
                data[i * size + j] = match round_to {
                    Some(q) if q > 0.0 => (d / q).round() * q,
                    _ => d,
                };
            }
        }
        Self { size, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Time {
        self.data[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.size).map(|c| c.to_vec()).collect()
    }
}

/// Where an instance came from; carried through serialization so benchmark
/// runs can be reproduced without re-deriving.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<String>,
    pub periods: Option<usize>,
    pub inspectors: Option<usize>,
    pub round_to: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub depot: (f64, f64),
    pub suppliers: Vec<Supplier>,
    pub inspectors: usize,
    /// Workload limit per inspector; `f64::INFINITY` means unlimited.
    pub capacity: f64,
    pub grid: PeriodGrid,
    pub travel_spec: TravelSpec,
    pub travel: TravelMatrix,
    pub provenance: Provenance,
}

impl Instance {
    /// Builds an instance, deriving the travel matrix from `travel_spec`.
    pub fn new(
        name: impl Into<String>,
        depot: (f64, f64),
        suppliers: Vec<Supplier>,
        inspectors: usize,
        capacity: f64,
        grid: PeriodGrid,
        travel_spec: TravelSpec,
    ) -> Result<Self, InstanceError> {
        let travel = match &travel_spec {
            TravelSpec::Euclidean { round_to } => {
                let mut pts = Vec::with_capacity(suppliers.len() + 1);
                pts.push(depot);
                pts.extend(suppliers.iter().map(|s| (s.x, s.y)));
                TravelMatrix::euclidean(&pts, *round_to)
            }
            TravelSpec::Matrix { rows } => TravelMatrix::from_rows(rows)?,
        };
        if travel.size() != suppliers.len() + 1 {
            return Err(InstanceError::Invalid(format!(
                "travel matrix covers {} vertices, instance has {}",
                travel.size(),
                suppliers.len() + 1
            )));
        }
        Ok(Self {
            name: name.into(),
            depot,
            suppliers,
            inspectors,
            capacity,
            grid,
            travel_spec,
            travel,
            provenance: Provenance::default(),
        })
    }

    /// Number of suppliers `n`; vertices are `0..=n`.
    pub fn n(&self) -> usize {
        self.suppliers.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.suppliers.len() + 1
    }

    pub fn horizon(&self) -> Time {
        self.grid.horizon()
    }

    #[inline]
    pub fn supplier(&self, v: usize) -> &Supplier {
        &self.suppliers[v - 1]
    }

    #[inline]
    pub fn workload(&self, v: usize) -> f64 {
        if v == DEPOT {
            0.0
        } else {
            self.suppliers[v - 1].workload
        }
    }

    #[inline]
    pub fn service(&self, v: usize) -> Time {
        if v == DEPOT {
            0.0
        } else {
            self.suppliers[v - 1].service
        }
    }

    /// Service-start window `[e_v, l_v]`; the depot window is the horizon.
    #[inline]
    pub fn window(&self, v: usize) -> (Time, Time) {
        if v == DEPOT {
            (0.0, self.horizon())
        } else {
            let s = &self.suppliers[v - 1];
            (s.ready, s.due)
        }
    }

    #[inline]
    pub fn travel(&self, i: usize, j: usize) -> Time {
        self.travel.get(i, j)
    }

    pub fn total_workload(&self) -> f64 {
        self.suppliers.iter().map(|s| s.workload).sum()
    }

    /// Same instance with unlimited capacity (the team orienteering case).
    pub fn into_toptw(mut self) -> Self {
        self.capacity = f64::INFINITY;
        self
    }

    /// Checks every structural invariant and returns all violations found.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let horizon = self.horizon();
        let t = self.grid.length();
        if self.inspectors == 0 {
            out.push(Violation::NoInspectors);
        }
        if !(self.capacity > 0.0) {
            out.push(Violation::Capacity(self.capacity));
        }
        for (idx, s) in self.suppliers.iter().enumerate() {
            if s.id != idx + 1 {
                out.push(Violation::SupplierId { position: idx + 1, id: s.id });
            }
            if !(s.workload >= 0.0) || !s.workload.is_finite() {
                out.push(Violation::NegativeWorkload(s.id));
            }
            if !(s.service >= 0.0) || !s.service.is_finite() {
                out.push(Violation::NegativeService(s.id));
            }
            if s.service > t + TIME_EPS {
                out.push(Violation::ServiceExceedsPeriod { supplier: s.id, service: s.service, period: t });
            }
            if !(s.ready >= -TIME_EPS && s.due <= horizon + TIME_EPS) {
                out.push(Violation::WindowOutsideHorizon { supplier: s.id, ready: s.ready, due: s.due });
            }
        }
        let size = self.travel.size();
        let tol = match self.travel_spec {
            TravelSpec::Euclidean { round_to: Some(q) } if q > 0.0 => q + 1e-9,
            _ => 1e-6,
        };
        let mut asym = None;
        let mut neg = None;
        let mut diag = None;
        let mut tri = None;
        for i in 0..size {
            if self.travel.get(i, i).abs() > 1e-12 && diag.is_none() {
                diag = Some(i);
            }
            for j in 0..size {
                let tij = self.travel.get(i, j);
                if !(tij >= 0.0) && neg.is_none() {
                    neg = Some((i, j));
                }
                if (tij - self.travel.get(j, i)).abs() > 1e-9 && asym.is_none() {
                    asym = Some((i, j));
                }
            }
        }
        if size <= 400 {
            'outer: for i in 0..size {
                for k in 0..size {
                    let tik = self.travel.get(i, k);
                    for j in 0..size {
                        if self.travel.get(i, j) > tik + self.travel.get(k, j) + tol {
                            tri = Some((i, k, j));
                            break 'outer;
                        }
                    }
                }
            }
        }
        if let Some(i) = diag {
            out.push(Violation::NonzeroDiagonal(i));
        }
        if let Some((i, j)) = neg {
            out.push(Violation::NegativeTravel { from: i, to: j });
        }
        if let Some((i, j)) = asym {
            out.push(Violation::AsymmetricTravel { from: i, to: j });
        }
        if let Some((i, k, j)) = tri {
            out.push(Violation::TriangleInequality { from: i, via: k, to: j });
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }
}

/// A broken instance invariant, as reported by [`Instance::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoInspectors,
    Capacity(f64),
    SupplierId { position: usize, id: usize },
    NegativeWorkload(usize),
    NegativeService(usize),
    ServiceExceedsPeriod { supplier: usize, service: Time, period: Time },
    WindowOutsideHorizon { supplier: usize, ready: Time, due: Time },
    NonzeroDiagonal(usize),
    NegativeTravel { from: usize, to: usize },
    AsymmetricTravel { from: usize, to: usize },
    TriangleInequality { from: usize, via: usize, to: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoInspectors => write!(f, "no inspectors"),
            Violation::Capacity(q) => write!(f, "capacity {q} is not positive"),
            Violation::SupplierId { position, id } => {
                write!(f, "supplier at position {position} has id {id}")
            }
            Violation::NegativeWorkload(s) => write!(f, "supplier {s}: negative workload"),
            Violation::NegativeService(s) => write!(f, "supplier {s}: negative service time"),
            Violation::ServiceExceedsPeriod { supplier, service, period } => write!(
                f,
                "supplier {supplier}: service exceeds period ({service} > {period})"
            ),
            Violation::WindowOutsideHorizon { supplier, ready, due } => {
                write!(f, "supplier {supplier}: window [{ready}, {due}] outside horizon")
            }
            Violation::NonzeroDiagonal(i) => write!(f, "travel matrix diagonal at {i} is not zero"),
            Violation::NegativeTravel { from, to } => {
                write!(f, "travel matrix negative at ({from}, {to})")
            }
            Violation::AsymmetricTravel { from, to } => {
                write!(f, "travel matrix not symmetric at ({from}, {to})")
            }
            Violation::TriangleInequality { from, via, to } => write!(
                f,
                "travel matrix violates the triangle inequality ({from} -> {via} -> {to})"
            ),
        }
    }
}

/// Builds a multi-period instance from a parsed Solomon file: `periods`
/// equal periods over the depot window, `inspectors` inspectors, workload
/// limit 200 and workload equal to demand.
pub fn generate_mpisp(
    raw: &SolomonInstance,
    periods: usize,
    inspectors: usize,
    round_to: Option<f64>,
) -> Result<Instance, InstanceError> {
    if periods == 0 {
        return Err(InstanceError::Invalid("period count must be at least 1".into()));
    }
    if inspectors == 0 {
        return Err(InstanceError::Invalid("inspector count must be at least 1".into()));
    }
    let e0 = raw.depot.ready;
    let l0 = raw.depot.due;
    if !(l0 > e0) {
        return Err(InstanceError::Invalid(format!("depot window [{e0}, {l0}] is empty")));
    }
    let length = (l0 - e0) / periods as f64;
    let max_service = raw.customers.iter().map(|c| c.service).fold(0.0, f64::max);
    if max_service > length + TIME_EPS {
        return Err(InstanceError::Invalid(format!(
            "period length {length} is shorter than the longest service time {max_service}"
        )));
    }
    let grid = PeriodGrid::new(periods, length)?;
    let suppliers = raw
        .customers
        .iter()
        .enumerate()
        .map(|(idx, c)| Supplier {
            id: idx + 1,
            x: c.x,
            y: c.y,
            workload: c.demand,
            service: c.service,
            ready: (c.ready - e0).clamp(0.0, l0 - e0),
            due: (c.due - e0).clamp(0.0, l0 - e0),
        })
        .collect();
    let name = format!("{}-w{}-m{}", raw.name.to_lowercase(), periods, inspectors);
    let mut inst = Instance::new(
        name,
        (raw.depot.x, raw.depot.y),
        suppliers,
        inspectors,
        GENERATED_CAPACITY,
        grid,
        TravelSpec::Euclidean { round_to },
    )?;
    inst.provenance = Provenance {
        source: Some(raw.name.to_lowercase()),
        periods: Some(periods),
        inspectors: Some(inspectors),
        round_to,
    };
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(service: f64) -> Instance {
        let suppliers = vec![
            Supplier { id: 1, x: 3.0, y: 4.0, workload: 10.0, service, ready: 0.0, due: 50.0 },
            Supplier { id: 2, x: 6.0, y: 8.0, workload: 20.0, service: 1.0, ready: 0.0, due: 90.0 },
        ];
        Instance::new(
            "toy",
            (0.0, 0.0),
            suppliers,
            2,
            30.0,
            PeriodGrid::new(5, 20.0).unwrap(),
            TravelSpec::Euclidean { round_to: None },
        )
        .unwrap()
    }

    #[test]
    fn ceil_half_open_rule() {
        let grid = PeriodGrid::new(5, 20.0).unwrap();
        assert_eq!(grid.ceil(7.0).unwrap(), 20.0);
        assert_eq!(grid.ceil(20.0).unwrap(), 20.0);
        assert_eq!(grid.ceil(20.1).unwrap(), 40.0);
        assert_eq!(grid.ceil(0.0).unwrap(), 20.0);
        assert_eq!(grid.ceil(100.0).unwrap(), 100.0);
        assert!(grid.ceil(100.5).is_err());
        assert!(grid.ceil(-1.0).is_err());
    }

    #[test]
    fn period_of_matches_ceil() {
        let grid = PeriodGrid::new(3, 10.0).unwrap();
        assert_eq!(grid.period_of(0.0), 1);
        assert_eq!(grid.period_of(10.0), 1);
        assert_eq!(grid.period_of(10.5), 2);
        assert_eq!(grid.period_of(30.0), 3);
    }

    #[test]
    fn well_formed_instance_is_valid() {
        assert!(toy(5.0).validate().is_ok());
    }

    #[test]
    fn service_longer_than_period_is_reported() {
        let errs = toy(21.0).validate().unwrap_err();
        assert!(errs.iter().any(|v| v.to_string().contains("service exceeds period")));
    }

    #[test]
    fn asymmetric_matrix_is_reported_with_other_violations() {
        let mut inst = toy(21.0);
        let mut rows = inst.travel.rows();
        rows[0][1] += 1e-3;
        inst.travel = TravelMatrix::from_rows(&rows).unwrap();
        inst.travel_spec = TravelSpec::Matrix { rows };
        let errs = inst.validate().unwrap_err();
        assert!(errs.iter().any(|v| v.to_string().contains("travel matrix not symmetric")));
        assert!(errs.iter().any(|v| v.to_string().contains("service exceeds period")));
    }

    #[test]
    fn rounding_mode_rounds_to_hundredths() {
        let m = TravelMatrix::euclidean(&[(0.0, 0.0), (1.0, 1.0)], Some(0.01));
        assert!((m.get(0, 1) - 1.41).abs() < 1e-12);
    }
}
