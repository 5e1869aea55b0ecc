use std::collections::BTreeMap;

use eventbasis::{Clustering, Peak};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// `manifest.toml`: pipeline decisions plus output file → SHA-256 digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub narrowing: NarrowingRecord,
    pub clustering: ClusteringRecord,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarrowingRecord {
    pub applied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_start: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_end: Option<String>,
}

impl NarrowingRecord {
    pub fn applied(p: &Peak) -> Self {
        NarrowingRecord {
            applied: true,
            reason: Some("narrowed to the window of the best correlogram peak".into()),
            shift: Some(p.shift),
            scale: Some(p.scale),
            correlation: Some(p.value),
            window_start: Some(p.window_start.to_string()),
            window_end: Some(p.window_end.to_string()),
        }
    }

    pub fn skipped(threshold: f64) -> Self {
        NarrowingRecord {
            applied: false,
            reason: Some(format!("no correlogram peak at or above threshold {threshold}; dates not narrowed")),
            shift: None,
            scale: None,
            correlation: None,
            window_start: None,
            window_end: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringRecord {
    pub performed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clusters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
}

impl ClusteringRecord {
    pub fn performed(c: &Clustering) -> Self {
        ClusteringRecord {
            performed: true,
            reason: None,
            clusters: Some(c.centroids.len()),
            iterations: Some(c.iterations),
            converged: Some(c.converged),
        }
    }

    pub fn skipped(reason: &str) -> Self {
        ClusteringRecord {
            performed: false,
            reason: Some(reason.into()),
            clusters: None,
            iterations: None,
            converged: None,
        }
    }
}

impl Manifest {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Invariant(format!("manifest does not serialize: {e}")))
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Data(format!("bad manifest: {e}")))
    }
}
