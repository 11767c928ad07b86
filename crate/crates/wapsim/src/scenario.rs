//! Scenario definition, loading, validation, and the canonical scene:
//! two base stations, five access points on the top arc of the mobile's
//! circular path, one mobile switching centre, one mobile station.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::SimTime;
use crate::handoff::HandoffConfig;
use crate::mac::MacConfig;
use crate::mobility::Path;
use crate::radio::RadioProfile;
use crate::NodeId;

/// Bundled canonical scene, also installed at `scenarios/canonical.json`.
pub const CANONICAL_SCENARIO_JSON: &str = include_str!("../scenarios/canonical.json");

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("scenario validation failed ({field}): {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    BaseStation,
    Wap,
    Msc,
    MobileStation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub kind: NodeKind,
    pub path: Path,
    /// Radio parameters; required for every kind except the MSC, which may
    /// be wired-only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radio: Option<RadioProfile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficConfig {
    pub advertisement_interval_ms: u64,
    pub advertisement_start_ms: u64,
    pub data_interval_ms: u64,
    pub data_start_ms: u64,
    pub data_payload_bytes: u32,
    pub mobility_tick_ms: u64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            advertisement_interval_ms: 15_000,
            advertisement_start_ms: 1_000,
            data_interval_ms: 1_000,
            data_start_ms: 500,
            data_payload_bytes: 64,
            mobility_tick_ms: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    pub seed: u64,
    pub duration_ms: u64,
    /// When false, WAP nodes keep their entries but do not participate in
    /// PHY/MAC activity, so both arms of a comparison share one file.
    pub wap_enabled: bool,
    #[serde(default)]
    pub split_horizon: bool,
    pub nodes: Vec<NodeSpec>,
    pub wired_links: Vec<(NodeId, NodeId)>,
    #[serde(default)]
    pub traffic: TrafficConfig,
    #[serde(default)]
    pub handoff: HandoffConfig,
    #[serde(default)]
    pub mac: MacConfig,
}

impl Scenario {
    /// The bundled canonical scene, already validated.
    pub fn canonical() -> Scenario {
        parse_scenario(CANONICAL_SCENARIO_JSON).expect("bundled scenario is valid")
    }

    pub fn duration(&self) -> SimTime {
        SimTime::from_millis(self.duration_ms)
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn mobile_station(&self) -> &NodeSpec {
        self.nodes
            .iter()
            .find(|n| n.kind == NodeKind::MobileStation)
            .expect("validated: at least one mobile station")
    }

    pub fn msc(&self) -> &NodeSpec {
        self.nodes
            .iter()
            .find(|n| n.kind == NodeKind::Msc)
            .expect("validated: exactly one MSC")
    }

    /// Hash of every field except `wap_enabled`, used to guard comparisons
    /// against mismatched arms.
    pub fn fingerprint(&self) -> String {
        let mut normalized = self.clone();
        normalized.wap_enabled = true;
        let bytes = serde_json::to_vec(&normalized).expect("scenario serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.schema_version != 1 {
            return Err(invalid(
                "schema_version",
                format!("unsupported schema_version {}", self.schema_version),
            ));
        }
        let mut seen = BTreeSet::new();
        for node in &self.nodes {
            if !seen.insert(node.id) {
                return Err(invalid("nodes.id", format!("duplicate node id {}", node.id)));
            }
            node.path
                .validate()
                .map_err(|e| invalid(&format!("nodes[{}].path", node.id), e.to_string()))?;
            match &node.radio {
                Some(profile) => profile
                    .validate()
                    .map_err(|e| invalid(&format!("nodes[{}].radio", node.id), e.to_string()))?,
                None => {
                    if node.kind != NodeKind::Msc {
                        return Err(invalid(
                            &format!("nodes[{}].radio", node.id),
                            "radio profile required for non-MSC nodes",
                        ));
                    }
                }
            }
        }
        let count = |kind| self.nodes.iter().filter(|n| n.kind == kind).count();
        if count(NodeKind::Msc) != 1 {
            return Err(invalid(
                "nodes",
                format!("expected exactly one MSC, found {}", count(NodeKind::Msc)),
            ));
        }
        if count(NodeKind::BaseStation) < 1 {
            return Err(invalid("nodes", "at least one base station required"));
        }
        if count(NodeKind::MobileStation) < 1 {
            return Err(invalid("nodes", "at least one mobile station required"));
        }
        for (a, b) in &self.wired_links {
            if a == b {
                return Err(invalid("wired_links", format!("self link on node {a}")));
            }
            for end in [a, b] {
                if !seen.contains(end) {
                    return Err(invalid(
                        "wired_links",
                        format!("link references unknown node {end}"),
                    ));
                }
            }
        }
        // Every WAP and base station must reach the MSC over wired links.
        let msc = self.msc().id;
        let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for (a, b) in &self.wired_links {
            adjacency.entry(*a).or_default().push(*b);
            adjacency.entry(*b).or_default().push(*a);
        }
        let mut reachable = BTreeSet::new();
        let mut frontier = VecDeque::from([msc]);
        reachable.insert(msc);
        while let Some(node) = frontier.pop_front() {
            for &next in adjacency.get(&node).into_iter().flatten() {
                if reachable.insert(next) {
                    frontier.push_back(next);
                }
            }
        }
        for node in &self.nodes {
            if matches!(node.kind, NodeKind::Wap | NodeKind::BaseStation)
                && !reachable.contains(&node.id)
            {
                return Err(invalid(
                    "wired_links",
                    format!("node {} has no backhaul path to the MSC", node.id),
                ));
            }
        }
        self.handoff
            .validate()
            .map_err(|e| invalid("handoff", e.to_string()))?;
        if self.traffic.advertisement_interval_ms == 0 {
            return Err(invalid(
                "traffic.advertisement_interval_ms",
                "must be > 0",
            ));
        }
        if self.traffic.data_interval_ms == 0 {
            return Err(invalid("traffic.data_interval_ms", "must be > 0"));
        }
        if self.traffic.mobility_tick_ms == 0 {
            return Err(invalid("traffic.mobility_tick_ms", "must be > 0"));
        }
        if self.traffic.data_payload_bytes == 0 {
            return Err(invalid("traffic.data_payload_bytes", "must be > 0"));
        }
        if self.mac.cw_min == 0 || self.mac.cw_max < self.mac.cw_min {
            return Err(invalid("mac", "need 1 <= cw_min <= cw_max"));
        }
        if self.mac.bitrate_bps == 0 {
            return Err(invalid("mac.bitrate_bps", "must be > 0"));
        }
        Ok(())
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(json: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = serde_json::from_str(json)?;
    scenario.validate()?;
    Ok(scenario)
}

/// Loads, parses, and validates a scenario file.
pub fn load_scenario(path: impl AsRef<FsPath>) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}
