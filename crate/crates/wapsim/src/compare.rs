//! With-WAP vs. without-WAP comparison: extracts the seventeen reported
//! parameters from two runs, classifies each against its polarity, and
//! computes the QoS score.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::NodeKind;
use crate::sim::RunOutput;
use crate::stats::{
    classify_parameter, qos_score, Classification, DesirableDirection, ParameterPolarity,
};
use crate::NodeId;

/// Bundled polarity table, also installed at `data/polarity.json`.
pub const POLARITY_TABLE_JSON: &str = include_str!("../data/polarity.json");

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("polarity table parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("runs are not comparable: {0}")]
    Mismatch(String),
}

fn default_floor() -> f64 {
    1.0
}

/// One parameter of the polarity table: its desirable direction, the
/// significance floor, and the published fixture values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarityEntry {
    pub name: String,
    pub desirable_direction: DesirableDirection,
    #[serde(default = "default_floor")]
    pub floor: f64,
    pub paper_without: f64,
    pub paper_with: f64,
}

impl PolarityEntry {
    pub fn polarity(&self) -> ParameterPolarity {
        ParameterPolarity {
            name: self.name.clone(),
            desirable_direction: self.desirable_direction,
            floor: self.floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarityTable {
    pub schema_version: u32,
    /// Default relative significance threshold.
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    pub parameters: Vec<PolarityEntry>,
}

impl PolarityTable {
    /// The table shipped with the crate.
    pub fn bundled() -> PolarityTable {
        serde_json::from_str(POLARITY_TABLE_JSON).expect("bundled polarity table is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub parameter: String,
    pub without: f64,
    pub with_wap: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub improved: usize,
    pub undesirable: usize,
    pub insignificant: usize,
    /// `None` when every row is insignificant.
    pub qos_score: Option<f64>,
}

fn build_report(
    table: &PolarityTable,
    epsilon: f64,
    mut value_of: impl FnMut(&PolarityEntry) -> (f64, f64),
) -> ComparisonReport {
    let rows: Vec<ComparisonRow> = table
        .parameters
        .iter()
        .map(|entry| {
            let (without, with_wap) = value_of(entry);
            ComparisonRow {
                parameter: entry.name.clone(),
                without,
                with_wap,
                classification: classify_parameter(without, with_wap, &entry.polarity(), epsilon),
            }
        })
        .collect();
    let count = |c: Classification| rows.iter().filter(|r| r.classification == c).count();
    let classifications: Vec<Classification> = rows.iter().map(|r| r.classification).collect();
    ComparisonReport {
        improved: count(Classification::Improved),
        undesirable: count(Classification::Undesirable),
        insignificant: count(Classification::Insignificant),
        qos_score: qos_score(&classifications).ok(),
        rows,
    }
}

/// Replays the published with/without readings through the classifier.
pub fn paper_fixture_report(table: &PolarityTable, epsilon: f64) -> ComparisonReport {
    build_report(table, epsilon, |e| (e.paper_without, e.paper_with))
}

/// Classifies two live runs of the same scenario. The runs must share a
/// scenario fingerprint and differ exactly in the WAP toggle.
pub fn compare(
    without: &RunOutput,
    with_wap: &RunOutput,
    table: &PolarityTable,
    epsilon: f64,
) -> Result<ComparisonReport, CompareError> {
    if without.fingerprint != with_wap.fingerprint {
        return Err(CompareError::Mismatch(format!(
            "scenario fingerprints differ ({} vs {})",
            without.fingerprint, with_wap.fingerprint
        )));
    }
    if without.wap_enabled || !with_wap.wap_enabled {
        return Err(CompareError::Mismatch(format!(
            "expected (without, with) = (false, true) WAP arms, got ({}, {})",
            without.wap_enabled, with_wap.wap_enabled
        )));
    }
    Ok(build_report(table, epsilon, |e| {
        (
            extract_parameter(without, &e.name),
            extract_parameter(with_wap, &e.name),
        )
    }))
}

fn node_of_kind(run: &RunOutput, kind: NodeKind) -> Option<NodeId> {
    run.nodes.iter().find(|(_, k)| *k == kind).map(|(id, _)| *id)
}

fn infra_mean(run: &RunOutput, field: impl Fn(&crate::stats::LayerStats) -> u64) -> f64 {
    let infra: Vec<NodeId> = run
        .nodes
        .iter()
        .filter(|(_, k)| matches!(k, NodeKind::BaseStation | NodeKind::Wap))
        .map(|(id, _)| *id)
        .collect();
    if infra.is_empty() {
        return 0.0;
    }
    let sum: u64 = infra.iter().map(|id| field(&run.stats[id])).sum();
    sum as f64 / infra.len() as f64
}

/// Reads one reported parameter out of a finished run:
/// - mobile-station counters for the PHY, MAC, IP, and routing rows,
/// - MSC counters for the queueing rows,
/// - run-level channel utilization,
/// - `signal_strength_required` as the weakest anchor power (in mW) the
///   mobile ever had to work with while attached.
pub fn extract_parameter(run: &RunOutput, name: &str) -> f64 {
    let ms = node_of_kind(run, NodeKind::MobileStation).expect("run has a mobile station");
    let msc = node_of_kind(run, NodeKind::Msc).expect("run has an MSC");
    let ms_stats = &run.stats[&ms];
    let msc_stats = &run.stats[&msc];
    match name {
        "signal_strength_required" => run
            .ms_min_anchor_rssi_dbm
            .map(|dbm| 10f64.powf(dbm / 10.0))
            .unwrap_or(0.0),
        "phy_signals_to_mac" => ms_stats.phy_signals_to_mac as f64,
        "phy_signals_locked" => ms_stats.phy_signals_locked as f64,
        "phy_signals_with_errors" => ms_stats.phy_signals_with_errors as f64,
        "mac_broadcast_received" | "mac_dcf_broadcast_received" => {
            ms_stats.mac_broadcast_received as f64
        }
        "link_frames_sent" => infra_mean(run, |s| s.link_frames_sent),
        "link_frames_received" => infra_mean(run, |s| s.link_frames_received),
        "link_utilization" => run.link_utilization,
        "ip_in_receives" => ms_stats.ip_in_receives as f64,
        "ip_in_delivers" => ms_stats.ip_in_delivers as f64,
        "ip_out_requests" => ms_stats.ip_out_requests as f64,
        "ip_ttl_per_delivered" => {
            if ms_stats.ip_in_delivers == 0 {
                0.0
            } else {
                ms_stats.ip_in_delivers_ttl_sum as f64 / ms_stats.ip_in_delivers as f64
            }
        }
        "msc_packets_queued" => msc_stats.queue_packets_queued as f64,
        "fifo_packets_queued_dequeued" => {
            (msc_stats.queue_packets_queued + msc_stats.queue_packets_dequeued) as f64
        }
        "mean_packet_size" => {
            if msc_stats.queue_packets_queued == 0 {
                0.0
            } else {
                msc_stats.queue_bytes_total as f64 / msc_stats.queue_packets_queued as f64
            }
        }
        "bellman_ford_updates_received" => ms_stats.bellman_ford_updates_received as f64,
        other => panic!("unknown comparison parameter {other}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    #[test]
    fn bundled_table_has_seventeen_parameters() {
        let t = PolarityTable::bundled();
        assert_eq!(t.schema_version, 1);
        assert_eq!(t.parameters.len(), 17);
        let names: std::collections::BTreeSet<&str> =
            t.parameters.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names.len(), 17, "parameter names are unique");
    }

    #[test]
    fn fixture_replays_the_published_split() {
        let t = PolarityTable::bundled();
        let report = paper_fixture_report(&t, t.epsilon);
        assert_eq!(
            (report.improved, report.undesirable, report.insignificant),
            (8, 4, 5)
        );
        assert_eq!(report.qos_score, Some(66.67));
    }

    #[test]
    fn mismatched_fingerprints_rejected() {
        let mut a = Scenario::canonical();
        a.duration_ms = 0;
        let mut b = a.clone();
        b.seed = 7;
        a.wap_enabled = false;
        let ra = crate::sim::run(&a);
        let rb = crate::sim::run(&b);
        let t = PolarityTable::bundled();
        assert!(matches!(
            compare(&ra, &rb, &t, t.epsilon),
            Err(CompareError::Mismatch(_))
        ));
    }

    #[test]
    fn swapped_arms_rejected() {
        let mut s = Scenario::canonical();
        s.duration_ms = 0;
        let with_wap = crate::sim::run(&s);
        s.wap_enabled = false;
        let without = crate::sim::run(&s);
        let t = PolarityTable::bundled();
        assert!(compare(&with_wap, &without, &t, t.epsilon).is_err());
        assert!(compare(&without, &with_wap, &t, t.epsilon).is_ok());
    }

    #[test]
    fn extraction_covers_every_table_parameter() {
        let mut s = Scenario::canonical();
        s.duration_ms = 2_000;
        let run = crate::sim::run(&s);
        for entry in &PolarityTable::bundled().parameters {
            let v = extract_parameter(&run, &entry.name);
            assert!(v.is_finite(), "{} produced {v}", entry.name);
        }
    }
}
