//! Per-OSI-layer counters, the improved/undesirable/insignificant
//! classification, and the QoS score.
//!
//! The polarity table ships as data (`data/polarity.json`) and enumerates
//! the seventeen reported parameters together with the published
//! with/without values used by the regression fixture.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::SimTime;
use crate::NodeId;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("QoS score undefined: no Improved or Undesirable classifications")]
    UndefinedScore,
}

/// Counter set for one node, mirroring the reported per-layer parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    // Physical layer.
    pub phy_signals_locked: u64,
    pub phy_signals_with_errors: u64,
    pub phy_signals_to_mac: u64,
    // MAC layer.
    pub mac_broadcast_received: u64,
    // Link layer (wired backhaul).
    pub link_frames_sent: u64,
    pub link_frames_received: u64,
    /// Airtime this node spent transmitting.
    pub link_busy_time: SimTime,
    // IP layer.
    pub ip_in_receives: u64,
    pub ip_in_delivers: u64,
    pub ip_out_requests: u64,
    pub ip_in_delivers_ttl_sum: u64,
    // Queueing (modeled at the MSC).
    pub queue_packets_queued: u64,
    pub queue_packets_dequeued: u64,
    pub queue_peak_size: u64,
    pub queue_bytes_total: u64,
    // UDP.
    pub udp_from_app: u64,
    pub udp_to_app: u64,
    // Application layer.
    pub bellman_ford_updates_received: u64,
    // Call-level.
    pub calls_dropped: u64,
    pub handoffs_soft: u64,
    pub handoffs_hard: u64,
}

impl LayerStats {
    /// `(parameter, value)` pairs in the fixed CSV row order.
    pub fn rows(&self) -> Vec<(&'static str, u64)> {
        vec![
            ("phy_signals_locked", self.phy_signals_locked),
            ("phy_signals_with_errors", self.phy_signals_with_errors),
            ("phy_signals_to_mac", self.phy_signals_to_mac),
            ("mac_broadcast_received", self.mac_broadcast_received),
            ("link_frames_sent", self.link_frames_sent),
            ("link_frames_received", self.link_frames_received),
            ("link_busy_time_us", self.link_busy_time.as_micros()),
            ("ip_in_receives", self.ip_in_receives),
            ("ip_in_delivers", self.ip_in_delivers),
            ("ip_out_requests", self.ip_out_requests),
            ("ip_in_delivers_ttl_sum", self.ip_in_delivers_ttl_sum),
            ("queue_packets_queued", self.queue_packets_queued),
            ("queue_packets_dequeued", self.queue_packets_dequeued),
            ("queue_peak_size", self.queue_peak_size),
            ("queue_bytes_total", self.queue_bytes_total),
            ("udp_from_app", self.udp_from_app),
            ("udp_to_app", self.udp_to_app),
            (
                "bellman_ford_updates_received",
                self.bellman_ford_updates_received,
            ),
            ("calls_dropped", self.calls_dropped),
            ("handoffs_soft", self.handoffs_soft),
            ("handoffs_hard", self.handoffs_hard),
        ]
    }
}

pub type StatsMap = BTreeMap<NodeId, LayerStats>;

/// Conservation checks that must hold at every snapshot during a run.
/// Returns one message per violated invariant.
pub fn check_invariants(stats: &StatsMap) -> Vec<String> {
    let mut violations = Vec::new();
    let mut wired_sent = 0u64;
    let mut wired_received = 0u64;
    for (node, s) in stats {
        if s.phy_signals_locked != s.phy_signals_with_errors + s.phy_signals_to_mac {
            violations.push(format!(
                "node {node}: phy_signals_locked ({}) != with_errors ({}) + to_mac ({})",
                s.phy_signals_locked, s.phy_signals_with_errors, s.phy_signals_to_mac
            ));
        }
        if s.queue_packets_dequeued > s.queue_packets_queued {
            violations.push(format!(
                "node {node}: dequeued ({}) > queued ({})",
                s.queue_packets_dequeued, s.queue_packets_queued
            ));
        }
        if s.ip_in_delivers > s.ip_in_receives {
            violations.push(format!(
                "node {node}: ip_in_delivers ({}) > ip_in_receives ({})",
                s.ip_in_delivers, s.ip_in_receives
            ));
        }
        wired_sent += s.link_frames_sent;
        wired_received += s.link_frames_received;
    }
    if wired_received > wired_sent {
        violations.push(format!(
            "global: link frames received ({wired_received}) > sent ({wired_sent})"
        ));
    }
    violations
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesirableDirection {
    Increase,
    Decrease,
    Either,
}

/// Polarity of one reported parameter: which direction of change counts as
/// improvement, and the absolute floor used when judging significance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPolarity {
    pub name: String,
    pub desirable_direction: DesirableDirection,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_floor() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Improved,
    Undesirable,
    Insignificant,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::Improved => "Improved",
            Classification::Undesirable => "Undesirable",
            Classification::Insignificant => "Insignificant",
        };
        f.write_str(s)
    }
}

/// Classifies a with/without pair. A change smaller than
/// `epsilon * max(|without|, floor)` is insignificant; otherwise the change
/// direction is matched against the desirable direction. Polarity `Either`
/// is always insignificant.
pub fn classify_parameter(
    without: f64,
    with_wap: f64,
    polarity: &ParameterPolarity,
    epsilon: f64,
) -> Classification {
    if matches!(polarity.desirable_direction, DesirableDirection::Either) {
        return Classification::Insignificant;
    }
    let scale = without.abs().max(polarity.floor);
    if (with_wap - without).abs() <= epsilon * scale {
        return Classification::Insignificant;
    }
    let increased = with_wap > without;
    let desirable = match polarity.desirable_direction {
        DesirableDirection::Increase => increased,
        DesirableDirection::Decrease => !increased,
        DesirableDirection::Either => unreachable!(),
    };
    if desirable {
        Classification::Improved
    } else {
        Classification::Undesirable
    }
}

/// `100 * improved / (improved + undesirable)`, rounded to two decimals.
/// Insignificant entries are excluded; an all-insignificant list has no
/// defined score.
pub fn qos_score(classifications: &[Classification]) -> Result<f64, StatsError> {
    let improved = classifications
        .iter()
        .filter(|c| matches!(c, Classification::Improved))
        .count();
    let undesirable = classifications
        .iter()
        .filter(|c| matches!(c, Classification::Undesirable))
        .count();
    if improved + undesirable == 0 {
        return Err(StatsError::UndefinedScore);
    }
    let score = 100.0 * improved as f64 / (improved + undesirable) as f64;
    Ok((score * 100.0).round() / 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn polarity(direction: DesirableDirection) -> ParameterPolarity {
        ParameterPolarity {
            name: "p".into(),
            desirable_direction: direction,
            floor: 1.0,
        }
    }

    #[test]
    fn ip_in_receives_improves() {
        // Published values: 10 -> 32, desirable increase.
        assert_eq!(
            classify_parameter(10.0, 32.0, &polarity(DesirableDirection::Increase), 0.1),
            Classification::Improved
        );
    }

    #[test]
    fn msc_queue_growth_is_undesirable() {
        // Published values: 8 -> 28, desirable decrease.
        assert_eq!(
            classify_parameter(8.0, 28.0, &polarity(DesirableDirection::Decrease), 0.1),
            Classification::Undesirable
        );
    }

    #[test]
    fn constant_link_frames_are_insignificant() {
        assert_eq!(
            classify_parameter(4.0, 4.0, &polarity(DesirableDirection::Increase), 0.1),
            Classification::Insignificant
        );
    }

    #[test]
    fn either_polarity_is_always_insignificant() {
        assert_eq!(
            classify_parameter(3.0, 1.02, &polarity(DesirableDirection::Either), 0.1),
            Classification::Insignificant
        );
    }

    #[test]
    fn floor_governs_small_scale_significance() {
        let mut p = polarity(DesirableDirection::Increase);
        // Default floor 1.0 swallows micro-scale changes...
        assert_eq!(
            classify_parameter(0.000012, 0.000025, &p, 0.1),
            Classification::Insignificant
        );
        // ...a parameter-appropriate floor does not.
        p.floor = 1e-9;
        assert_eq!(
            classify_parameter(0.000012, 0.000025, &p, 0.1),
            Classification::Improved
        );
    }

    #[test]
    fn qos_score_matches_published_split() {
        let mut cs = vec![Classification::Improved; 8];
        cs.extend(vec![Classification::Undesirable; 4]);
        cs.extend(vec![Classification::Insignificant; 5]);
        assert_eq!(qos_score(&cs).unwrap(), 66.67);
    }

    #[test]
    fn qos_score_edges() {
        assert_eq!(qos_score(&[Classification::Improved]).unwrap(), 100.0);
        assert_eq!(qos_score(&[Classification::Undesirable]).unwrap(), 0.0);
        assert_eq!(
            qos_score(&[Classification::Insignificant]),
            Err(StatsError::UndefinedScore)
        );
        assert_eq!(qos_score(&[]), Err(StatsError::UndefinedScore));
    }

    #[test]
    fn invariant_checker_flags_violations() {
        let mut stats = StatsMap::new();
        let s = LayerStats {
            phy_signals_locked: 3,
            phy_signals_to_mac: 1,
            phy_signals_with_errors: 1,
            ..LayerStats::default()
        };
        stats.insert(NodeId(1), s);
        let v = check_invariants(&stats);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("phy_signals_locked"));

        let mut stats = StatsMap::new();
        let s = LayerStats {
            link_frames_received: 2,
            ..LayerStats::default()
        };
        stats.insert(NodeId(1), s);
        assert!(check_invariants(&stats)[0].contains("link frames"));
    }

    proptest! {
        #[test]
        fn classification_antisymmetric_under_polarity_flip(
            without in -1000.0f64..1000.0,
            with_wap in -1000.0f64..1000.0,
            epsilon in 0.0f64..0.5,
        ) {
            let inc = classify_parameter(
                without, with_wap, &polarity(DesirableDirection::Increase), epsilon);
            let dec = classify_parameter(
                without, with_wap, &polarity(DesirableDirection::Decrease), epsilon);
            match inc {
                Classification::Insignificant =>
                    prop_assert_eq!(dec, Classification::Insignificant),
                Classification::Improved => prop_assert_eq!(dec, Classification::Undesirable),
                Classification::Undesirable => prop_assert_eq!(dec, Classification::Improved),
            }
        }

        #[test]
        fn qos_score_permutation_invariant(seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut cs = vec![
                Classification::Improved,
                Classification::Improved,
                Classification::Undesirable,
                Classification::Insignificant,
                Classification::Improved,
                Classification::Undesirable,
            ];
            let base = qos_score(&cs).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            cs.shuffle(&mut rng);
            prop_assert_eq!(qos_score(&cs).unwrap(), base);
        }
    }
}
