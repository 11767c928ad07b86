//! The mobile station's handoff decision state machine: scan for access
//! point and base station signals, pick the strongest, apply hysteresis and
//! attempt thresholds, and execute a soft (make-before-break) or hard
//! (break-before-make) handoff.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::SimTime;
use crate::mobility::Position;
use crate::radio::{self, RadioProfile, SignalSample};
use crate::NodeId;

#[derive(Debug, Error, PartialEq)]
pub enum HandoffConfigError {
    #[error("drop_threshold ({drop}) must be <= candidate_threshold ({candidate})")]
    DropAboveCandidate { drop: f64, candidate: f64 },
    #[error("hysteresis_margin must be >= 0")]
    NegativeHysteresis,
    #[error("max_attempts must be >= 1")]
    ZeroAttempts,
    #[error("scan_interval must be > 0")]
    ZeroScanInterval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandoffConfig {
    pub scan_interval_ms: u64,
    /// Minimum RSSI for a transmitter to be a handoff candidate.
    pub candidate_threshold_dbm: f64,
    /// Below this the current attachment is considered failing.
    pub drop_threshold_dbm: f64,
    /// Old anchor at or above this permits make-before-break.
    pub soft_threshold_dbm: f64,
    /// A candidate must beat the current anchor by this much.
    pub hysteresis_margin_db: f64,
    /// Failed scans tolerated before the call drops.
    pub max_attempts: u32,
}

impl Default for HandoffConfig {
    fn default() -> Self {
        HandoffConfig {
            scan_interval_ms: 500,
            candidate_threshold_dbm: -85.0,
            drop_threshold_dbm: -88.0,
            soft_threshold_dbm: -90.0,
            hysteresis_margin_db: 3.0,
            max_attempts: 3,
        }
    }
}

impl HandoffConfig {
    pub fn validate(&self) -> Result<(), HandoffConfigError> {
        if self.drop_threshold_dbm > self.candidate_threshold_dbm {
            return Err(HandoffConfigError::DropAboveCandidate {
                drop: self.drop_threshold_dbm,
                candidate: self.candidate_threshold_dbm,
            });
        }
        if self.hysteresis_margin_db < 0.0 {
            return Err(HandoffConfigError::NegativeHysteresis);
        }
        if self.max_attempts < 1 {
            return Err(HandoffConfigError::ZeroAttempts);
        }
        if self.scan_interval_ms == 0 {
            return Err(HandoffConfigError::ZeroScanInterval);
        }
        Ok(())
    }

    pub fn scan_interval(&self) -> SimTime {
        SimTime::from_millis(self.scan_interval_ms)
    }
}

/// Attachment state of the mobile station. `Dropped` is terminal for the
/// current call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HandoffState {
    Attached { anchor: NodeId },
    Scanning { anchor: NodeId, failed_attempts: u32 },
    SoftHandoff { old: NodeId, new: NodeId, since: SimTime },
    Unattached { failed_attempts: u32 },
    Dropped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HandoffAction {
    AttachTo(NodeId),
    DetachFrom(NodeId),
    DeclareDrop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HandoffKind {
    Soft,
    Hard,
}

/// Measures every transmitter at the mobile's position and keeps those at
/// or above the candidate threshold, sorted by descending received power
/// with ties broken by ascending node id.
pub fn scan_candidates(
    ms_position: Position,
    transmitters: &[(NodeId, RadioProfile, Position)],
    config: &HandoffConfig,
    measured_at: SimTime,
) -> Vec<SignalSample> {
    let mut samples: Vec<SignalSample> = transmitters
        .iter()
        .filter_map(|(id, profile, pos)| {
            let rx = radio::received_power_dbm(profile, ms_position.distance_to(pos)).ok()?;
            (rx >= config.candidate_threshold_dbm).then_some(SignalSample {
                source: *id,
                rx_power_dbm: rx,
                measured_at,
            })
        })
        .collect();
    samples.sort_by(|a, b| {
        b.rx_power_dbm
            .partial_cmp(&a.rx_power_dbm)
            .expect("rx powers are finite")
            .then(a.source.cmp(&b.source))
    });
    samples
}

/// Head of a candidate list produced by [`scan_candidates`].
pub fn select_best(candidates: &[SignalSample]) -> Option<NodeId> {
    candidates.first().map(|s| s.source)
}

/// Soft when the old anchor is still usable during the transition
/// (make-before-break), hard otherwise. A completely lost anchor
/// (`None`) is always hard.
pub fn classify_handoff_type(
    current_anchor_rssi: Option<f64>,
    config: &HandoffConfig,
) -> HandoffKind {
    match current_anchor_rssi {
        Some(rssi) if rssi >= config.soft_threshold_dbm => HandoffKind::Soft,
        _ => HandoffKind::Hard,
    }
}

/// One scan-tick transition. Pure: replaying a recorded
/// `(state, anchor_rssi, candidates)` trace reproduces identical actions.
pub fn step(
    state: HandoffState,
    anchor_rssi: Option<f64>,
    candidates: &[SignalSample],
    config: &HandoffConfig,
    now: SimTime,
) -> (HandoffState, Vec<HandoffAction>) {
    match state {
        HandoffState::Dropped => (HandoffState::Dropped, vec![]),

        HandoffState::SoftHandoff { old, new, .. } => (
            HandoffState::Attached { anchor: new },
            vec![HandoffAction::DetachFrom(old)],
        ),

        HandoffState::Unattached { failed_attempts } => match select_best(candidates) {
            Some(best) => (
                HandoffState::Attached { anchor: best },
                vec![HandoffAction::AttachTo(best)],
            ),
            None => fail_scan(failed_attempts, config, |n| HandoffState::Unattached {
                failed_attempts: n,
            }),
        },

        HandoffState::Attached { anchor } => {
            let anchor_ok = anchor_rssi.is_some_and(|r| r >= config.drop_threshold_dbm);
            let best_other = candidates.iter().find(|c| c.source != anchor);
            if anchor_ok {
                let anchor_rssi = anchor_rssi.expect("anchor_ok implies Some");
                match best_other {
                    Some(c) if c.rx_power_dbm > anchor_rssi + config.hysteresis_margin_db => {
                        start_handoff(anchor, Some(anchor_rssi), c.source, config, now)
                    }
                    _ => (HandoffState::Attached { anchor }, vec![]),
                }
            } else {
                match best_other {
                    Some(c) => start_handoff(anchor, anchor_rssi, c.source, config, now),
                    None => (
                        HandoffState::Scanning {
                            anchor,
                            failed_attempts: 1,
                        },
                        vec![],
                    ),
                }
            }
        }

        HandoffState::Scanning {
            anchor,
            failed_attempts,
        } => {
            // Anchor recovered above the drop threshold: resume normally.
            if anchor_rssi.is_some_and(|r| r >= config.drop_threshold_dbm) {
                return (HandoffState::Attached { anchor }, vec![]);
            }
            match candidates.iter().find(|c| c.source != anchor) {
                Some(c) => start_handoff(anchor, anchor_rssi, c.source, config, now),
                None => fail_scan(failed_attempts, config, |n| HandoffState::Scanning {
                    anchor,
                    failed_attempts: n,
                }),
            }
        }
    }
}

fn fail_scan(
    failed_attempts: u32,
    config: &HandoffConfig,
    rebuild: impl FnOnce(u32) -> HandoffState,
) -> (HandoffState, Vec<HandoffAction>) {
    let attempts = failed_attempts + 1;
    if attempts > config.max_attempts {
        (HandoffState::Dropped, vec![HandoffAction::DeclareDrop])
    } else {
        (rebuild(attempts), vec![])
    }
}

fn start_handoff(
    old: NodeId,
    old_rssi: Option<f64>,
    new: NodeId,
    config: &HandoffConfig,
    now: SimTime,
) -> (HandoffState, Vec<HandoffAction>) {
    debug_assert_ne!(old, new);
    match classify_handoff_type(old_rssi, config) {
        HandoffKind::Soft => (
            HandoffState::SoftHandoff { old, new, since: now },
            vec![HandoffAction::AttachTo(new)],
        ),
        HandoffKind::Hard => (
            HandoffState::Attached { anchor: new },
            vec![
                HandoffAction::DetachFrom(old),
                HandoffAction::AttachTo(new),
            ],
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NOW: SimTime = SimTime::from_secs(5);

    fn cfg() -> HandoffConfig {
        HandoffConfig::default()
    }

    fn sample(id: u32, rx: f64) -> SignalSample {
        SignalSample {
            source: NodeId(id),
            rx_power_dbm: rx,
            measured_at: NOW,
        }
    }

    fn profile(tx: f64) -> RadioProfile {
        RadioProfile {
            tx_power_dbm: tx,
            frequency_mhz: 2400.0,
            sensitivity_dbm: -94.0,
            lock_threshold_dbm: -91.0,
            error_floor_margin_db: 6.0,
            path_loss_exponent: None,
        }
    }

    #[test]
    fn scan_empty_when_everything_too_weak() {
        let txs = vec![(NodeId(1), profile(-60.0), Position::new(5000.0, 0.0))];
        assert!(scan_candidates(Position::new(0.0, 0.0), &txs, &cfg(), NOW).is_empty());
    }

    #[test]
    fn scan_ties_break_by_ascending_node_id() {
        let txs = vec![
            (NodeId(4), profile(14.0), Position::new(100.0, 0.0)),
            (NodeId(3), profile(14.0), Position::new(-100.0, 0.0)),
        ];
        let c = scan_candidates(Position::new(0.0, 0.0), &txs, &cfg(), NOW);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].source, NodeId(3));
        assert_eq!(c[1].source, NodeId(4));
    }

    #[test]
    fn scan_at_canonical_wap_chain_midpoint() {
        // MS on the canonical circle at the midpoint between WAP 3 and
        // WAP 4 (circle angle 123.75 deg). Expected received powers were
        // computed by hand from the free-space formula for the canonical
        // coordinates: nodes 3 and 4 tie at -81.5358 dBm (595.088 m, 14 dBm
        // transmit); everything else is below the -85 dBm candidate
        // threshold (best of the rest: node 1 at -88.73 dBm).
        let mut txs = vec![
            (NodeId(1), profile(24.0), Position::new(-3000.0, -1600.0)),
            (NodeId(2), profile(24.0), Position::new(3000.0, -1600.0)),
        ];
        for (id, deg) in [(3u32, 135.0f64), (4, 112.5), (5, 90.0), (6, 67.5), (7, 45.0)] {
            let a = deg.to_radians();
            txs.push((NodeId(id), profile(14.0), Position::new(3050.0 * a.cos(), 3050.0 * a.sin())));
        }
        let a = 123.75f64.to_radians();
        let ms = Position::new(3000.0 * a.cos(), 3000.0 * a.sin());
        let c = scan_candidates(ms, &txs, &cfg(), NOW);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].source, NodeId(3), "tie resolves to lower node id");
        assert_eq!(c[1].source, NodeId(4));
        assert!((c[0].rx_power_dbm - (-81.5358)).abs() < 0.01);
        assert!((c[1].rx_power_dbm - (-81.5358)).abs() < 0.01);
    }

    #[test]
    fn select_best_cases() {
        assert_eq!(select_best(&[]), None);
        let c = vec![sample(4, -55.0), sample(3, -60.0), sample(5, -70.0)];
        assert_eq!(select_best(&c), Some(NodeId(4)));
        let tie = vec![sample(3, -55.0), sample(4, -55.0)];
        assert_eq!(select_best(&tie), Some(NodeId(3)));
    }

    #[test]
    fn classify_boundary_is_soft() {
        let c = cfg();
        assert_eq!(
            classify_handoff_type(Some(c.soft_threshold_dbm), &c),
            HandoffKind::Soft
        );
        assert_eq!(
            classify_handoff_type(Some(c.soft_threshold_dbm - 0.1), &c),
            HandoffKind::Hard
        );
        assert_eq!(classify_handoff_type(None, &c), HandoffKind::Hard);
    }

    #[test]
    fn attached_with_strong_anchor_stays() {
        let (state, actions) = step(
            HandoffState::Attached { anchor: NodeId(1) },
            Some(-60.0),
            &[sample(1, -60.0), sample(3, -61.0)],
            &cfg(),
            NOW,
        );
        assert_eq!(state, HandoffState::Attached { anchor: NodeId(1) });
        assert!(actions.is_empty());
    }

    #[test]
    fn soft_handoff_is_make_before_break() {
        let c = cfg();
        // Anchor fading below drop but still above soft threshold.
        let (state, actions) = step(
            HandoffState::Attached { anchor: NodeId(1) },
            Some(-89.0),
            &[sample(3, -70.0)],
            &c,
            NOW,
        );
        assert_eq!(
            state,
            HandoffState::SoftHandoff {
                old: NodeId(1),
                new: NodeId(3),
                since: NOW
            }
        );
        assert_eq!(actions, vec![HandoffAction::AttachTo(NodeId(3))]);
        let (state, actions) = step(state, Some(-70.0), &[sample(3, -70.0)], &c, NOW);
        assert_eq!(state, HandoffState::Attached { anchor: NodeId(3) });
        assert_eq!(actions, vec![HandoffAction::DetachFrom(NodeId(1))]);
    }

    #[test]
    fn hard_handoff_breaks_before_making() {
        let c = cfg();
        let (state, actions) = step(
            HandoffState::Attached { anchor: NodeId(1) },
            Some(-92.0), // below soft threshold
            &[sample(3, -70.0)],
            &c,
            NOW,
        );
        assert_eq!(state, HandoffState::Attached { anchor: NodeId(3) });
        assert_eq!(
            actions,
            vec![
                HandoffAction::DetachFrom(NodeId(1)),
                HandoffAction::AttachTo(NodeId(3)),
            ]
        );
    }

    #[test]
    fn hysteresis_gate_requires_strict_excess() {
        let c = cfg();
        // Candidate better but within the margin: no handoff.
        let (state, actions) = step(
            HandoffState::Attached { anchor: NodeId(1) },
            Some(-70.0),
            &[sample(3, -68.0), sample(1, -70.0)],
            &c,
            NOW,
        );
        assert_eq!(state, HandoffState::Attached { anchor: NodeId(1) });
        assert!(actions.is_empty());
        // Beyond the margin: handoff starts.
        let (state, _) = step(
            HandoffState::Attached { anchor: NodeId(1) },
            Some(-70.0),
            &[sample(3, -66.5), sample(1, -70.0)],
            &c,
            NOW,
        );
        assert!(matches!(state, HandoffState::SoftHandoff { .. }));
    }

    #[test]
    fn fading_anchor_with_no_candidates_starts_scanning() {
        let (state, actions) = step(
            HandoffState::Attached { anchor: NodeId(1) },
            Some(-93.0),
            &[],
            &cfg(),
            NOW,
        );
        assert_eq!(
            state,
            HandoffState::Scanning {
                anchor: NodeId(1),
                failed_attempts: 1
            }
        );
        assert!(actions.is_empty());
    }

    #[test]
    fn scanning_exhaustion_drops_the_call() {
        let c = cfg();
        let (state, actions) = step(
            HandoffState::Scanning {
                anchor: NodeId(1),
                failed_attempts: c.max_attempts,
            },
            None,
            &[],
            &c,
            NOW,
        );
        assert_eq!(state, HandoffState::Dropped);
        assert_eq!(actions, vec![HandoffAction::DeclareDrop]);
    }

    #[test]
    fn scanning_recovers_when_anchor_returns() {
        let (state, actions) = step(
            HandoffState::Scanning {
                anchor: NodeId(1),
                failed_attempts: 2,
            },
            Some(-80.0),
            &[],
            &cfg(),
            NOW,
        );
        assert_eq!(state, HandoffState::Attached { anchor: NodeId(1) });
        assert!(actions.is_empty());
    }

    #[test]
    fn dropped_is_terminal() {
        let (state, actions) = step(
            HandoffState::Dropped,
            Some(-50.0),
            &[sample(3, -50.0)],
            &cfg(),
            NOW,
        );
        assert_eq!(state, HandoffState::Dropped);
        assert!(actions.is_empty());
    }

    #[test]
    fn unattached_attaches_to_best() {
        let (state, actions) = step(
            HandoffState::Unattached { failed_attempts: 0 },
            None,
            &[sample(5, -70.0), sample(2, -80.0)],
            &cfg(),
            NOW,
        );
        assert_eq!(state, HandoffState::Attached { anchor: NodeId(5) });
        assert_eq!(actions, vec![HandoffAction::AttachTo(NodeId(5))]);
    }

    #[test]
    fn config_validation() {
        let mut c = cfg();
        c.drop_threshold_dbm = -80.0; // above candidate threshold
        assert!(c.validate().is_err());
        let mut c = cfg();
        c.max_attempts = 0;
        assert!(c.validate().is_err());
        assert!(cfg().validate().is_ok());
    }
}
