//! Replicated runs and manifest-driven experiments.

use super::metrics::{compute_metrics, MetricsError, MetricsRow};
use super::report::{emit_report, ReportError, ReportFormat};
use crate::alnds::{solve, SearchParams, SolveError, SolveResult};
use crate::generator::{
    generate_instance, generate_synthetic_network, load_network, GenerateError, InstanceSpec,
    NetworkError,
};
use crate::model::{
    read_instance, validate_instance, write_instance, FormatError, Instance, VariantConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("replication with seed {seed} failed: {source}")]
    Replication { seed: u64, source: SolveError },
    #[error("instance {name} is invalid: {report}")]
    InvalidInstance { name: String, report: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Run the search `replications` times with seeds `params.seed`,
/// `params.seed + 1`, ... Replications execute concurrently; results come
/// back ordered by seed. A failed replication fails the whole batch.
pub fn run_replicated(
    inst: &Instance,
    cfg: VariantConfig,
    params: &SearchParams,
    replications: usize,
) -> Result<Vec<SolveResult>, ExperimentError> {
    (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let seed = params.seed + r;
            let run_params = params.clone().with_seed(seed);
            solve(inst, cfg, &run_params)
                .map_err(|source| ExperimentError::Replication { seed, source })
        })
        .collect()
}

/// Where an experiment instance comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSource {
    /// An instance file in the canonical format.
    File { path: String },
    /// Generate from a network description.
    Generate {
        network: NetworkSource,
        spec: InstanceSpec,
        /// Overrides the conventional W-F-C-class name.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetworkSource {
    Synthetic { nodes: usize, candidates: usize, seed: u64 },
    Files { distances: String, flows: String, candidates: String },
}

impl NetworkSource {
    pub fn load(&self) -> Result<crate::generator::NetworkData, ExperimentError> {
        match self {
            NetworkSource::Synthetic { nodes, candidates, seed } => {
                Ok(generate_synthetic_network(*nodes, *candidates, *seed)?)
            }
            NetworkSource::Files { distances, flows, candidates } => Ok(load_network(
                Path::new(distances),
                Path::new(flows),
                Path::new(candidates),
            )?),
        }
    }
}

/// A full experiment: instances, variants to compare, search parameters,
/// replication count and output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub instances: Vec<InstanceSource>,
    pub variants: Vec<VariantConfig>,
    #[serde(default)]
    pub params: SearchParams,
    pub replications: usize,
    pub output_dir: String,
    /// External upper bounds (e.g. from a MILP solver) keyed by instance name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ub: BTreeMap<String, f64>,
    #[serde(default)]
    pub format: ReportFormat,
}

impl Manifest {
    pub fn from_path(path: &Path) -> Result<Manifest, ExperimentError> {
        let text = std::fs::read_to_string(path)?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| ExperimentError::Io(std::io::Error::other(e)))?;
        Ok(manifest)
    }
}

fn resolve_instances(
    manifest: &Manifest,
    out_dir: &Path,
) -> Result<Vec<(String, Instance)>, ExperimentError> {
    let mut out = Vec::new();
    let instances_dir = out_dir.join("instances");
    for source in &manifest.instances {
        let (name, inst) = match source {
            InstanceSource::File { path } => {
                let p = Path::new(path);
                let name = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.clone());
                (name, read_instance(p)?)
            }
            InstanceSource::Generate { network, spec, name } => {
                let net = network.load()?;
                let inst = generate_instance(&net, spec)?;
                let name = name.clone().unwrap_or_else(|| spec.name());
                std::fs::create_dir_all(&instances_dir)?;
                write_instance(&inst, &instances_dir.join(format!("{name}.json")))?;
                (name, inst)
            }
        };
        let report = validate_instance(&inst);
        if !report.is_ok() {
            return Err(ExperimentError::InvalidInstance {
                name,
                report: report.to_string(),
            });
        }
        out.push((name, inst));
    }
    Ok(out)
}

/// Run every (instance, variant) combination of a manifest and emit the
/// report files into `output_dir`. Returns the table rows in instance order.
pub fn run_manifest(manifest: &Manifest) -> Result<Vec<MetricsRow>, ExperimentError> {
    let out_dir = PathBuf::from(&manifest.output_dir);
    std::fs::create_dir_all(&out_dir)?;
    let instances = resolve_instances(manifest, &out_dir)?;

    let jobs: Vec<(usize, VariantConfig)> = instances
        .iter()
        .enumerate()
        .flat_map(|(i, _)| manifest.variants.iter().map(move |&v| (i, v)))
        .collect();
    let results: Vec<((usize, VariantConfig), Vec<SolveResult>)> = jobs
        .into_par_iter()
        .map(|(i, v)| {
            run_replicated(&instances[i].1, v, &manifest.params, manifest.replications)
                .map(|r| ((i, v), r))
        })
        .collect::<Result<_, _>>()?;

    let lookup = |i: usize, v: VariantConfig| -> Option<&Vec<SolveResult>> {
        results.iter().find(|((ri, rv), _)| *ri == i && *rv == v).map(|(_, r)| r)
    };

    let mut rows = Vec::new();
    for (i, (name, _)) in instances.iter().enumerate() {
        let wspsdp = lookup(i, VariantConfig::Wspsdp);
        let Some(wspsdp) = wspsdp else {
            continue; // gap metrics are defined relative to the full model
        };
        let row = compute_metrics(
            name,
            wspsdp,
            lookup(i, VariantConfig::WspsSa).map(|v| v.as_slice()),
            lookup(i, VariantConfig::WspsWi).map(|v| v.as_slice()),
            manifest.ub.get(name).copied(),
        )?;
        rows.push(row);
    }

    emit_report(&rows, manifest.format, &out_dir)?;
    Ok(rows)
}
