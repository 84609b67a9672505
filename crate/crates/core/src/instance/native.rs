use super::{Instance, InstanceError, PeriodGrid, Provenance, Supplier, TravelSpec};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const NATIVE_FORMAT: &str = "mpisp-instance/1";

/// On-disk JSON layout of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format: String,
    pub name: String,
    #[serde(default)]
    pub provenance: Provenance,
    pub inspectors: usize,
    /// `null` for unlimited workload.
    pub capacity: Option<f64>,
    pub periods: usize,
    pub period_length: f64,
    pub depot: Point,
    pub suppliers: Vec<Supplier>,
    pub travel: TravelSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        Self {
            format: NATIVE_FORMAT.to_string(),
            name: inst.name.clone(),
            provenance: inst.provenance.clone(),
            inspectors: inst.inspectors,
            capacity: inst.capacity.is_finite().then_some(inst.capacity),
            periods: inst.grid.periods(),
            period_length: inst.grid.length(),
            depot: Point { x: inst.depot.0, y: inst.depot.1 },
            suppliers: inst.suppliers.clone(),
            travel: inst.travel_spec.clone(),
        }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = InstanceError;

    fn try_from(f: InstanceFile) -> Result<Self, Self::Error> {
        if f.format != NATIVE_FORMAT {
            return Err(InstanceError::Invalid(format!("unsupported format tag `{}`", f.format)));
        }
        let mut inst = Instance::new(
            f.name,
            (f.depot.x, f.depot.y),
            f.suppliers,
            f.inspectors,
            f.capacity.unwrap_or(f64::INFINITY),
            PeriodGrid::new(f.periods, f.period_length)?,
            f.travel,
        )?;
        inst.provenance = f.provenance;
        Ok(inst)
    }
}

impl Instance {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.try_into()
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(&InstanceFile::from(self)).expect("instance serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    Instance::from_json(&std::fs::read_to_string(path)?)
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    std::fs::write(path, inst.to_json())?;
    Ok(())
}
