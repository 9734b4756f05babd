//! Canonical instance file format (versioned JSON document).

use super::instance::{Instance, Node, Warehouse};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const INSTANCE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown instance format version {0}")]
    UnknownVersion(u32),
}

/// On-disk representation. Field names are part of the format contract.
#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub version: u32,
    pub nodes: Vec<Node>,
    /// Dense row-major distance matrix, one list per row.
    pub distance: Vec<Vec<f64>>,
    /// Sparse flow triples (factory, customer, quantity).
    pub flows: Vec<(usize, usize, f64)>,
    pub warehouses: Vec<Warehouse>,
    pub vehicle_capacity: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        InstanceFile {
            version: INSTANCE_FORMAT_VERSION,
            nodes: inst.nodes().to_vec(),
            distance: inst.distance_rows(),
            flows: inst.raw_flows().to_vec(),
            warehouses: inst.warehouse_records().to_vec(),
            vehicle_capacity: inst.vehicle_capacity(),
            alpha: inst.alpha(),
            beta: inst.beta(),
        }
    }

    pub fn into_instance(self) -> Result<Instance, FormatError> {
        if self.version != INSTANCE_FORMAT_VERSION {
            return Err(FormatError::UnknownVersion(self.version));
        }
        Ok(Instance::new(
            self.nodes,
            self.distance,
            self.flows,
            self.warehouses,
            self.vehicle_capacity,
            self.alpha,
            self.beta,
        ))
    }
}

pub fn write_instance(inst: &Instance, path: &Path) -> Result<(), FormatError> {
    std::fs::write(path, instance_to_string(inst))?;
    Ok(())
}

/// Deterministic serialization: same instance, same bytes.
pub fn instance_to_string(inst: &Instance) -> String {
    let file = InstanceFile::from_instance(inst);
    let mut text = serde_json::to_string_pretty(&file).expect("instance serialization");
    text.push('\n');
    text
}

pub fn read_instance(path: &Path) -> Result<Instance, FormatError> {
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text)
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    file.into_instance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testutil::*;
    use crate::model::validate_instance;

    #[test]
    fn round_trip_preserves_instance() {
        let inst = toy_2w1f2c();
        let text = instance_to_string(&inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(back.nodes(), inst.nodes());
        assert_eq!(back.distance_rows(), inst.distance_rows());
        assert_eq!(back.commodities(), inst.commodities());
        assert_eq!(back.vehicle_capacity(), inst.vehicle_capacity());
        assert!(validate_instance(&back).is_ok());
        // Byte determinism.
        assert_eq!(instance_to_string(&back), text);
    }

    #[test]
    fn unknown_version_is_rejected() {
        let inst = toy_1w1f1c();
        let text = instance_to_string(&inst).replace("\"version\": 1", "\"version\": 9");
        match parse_instance(&text) {
            Err(FormatError::UnknownVersion(9)) => {}
            other => panic!("expected version error, got {other:?}"),
        }
    }
}
