//! Discrete-event simulator of cellular handoff assisted by 802.11 wireless
//! access points.
//!
//! A mobile station rides a circular path between two base stations. Where
//! base-station coverage fails, nearby access points take the call over
//! (soft or hard handoff) and route it toward the mobile switching centre
//! over a distance-vector backhaul. Runs are deterministic for a given
//! scenario and seed, so a with-WAP arm and a without-WAP arm of the same
//! scene can be compared counter by counter.
//!
//! Entry points:
//! - [`scenario::load_scenario`] / [`scenario::Scenario::canonical`] to get a scene,
//! - [`sim::run`] to execute one arm,
//! - [`compare::compare`] to classify the per-layer counters of two arms
//!   and compute the QoS score.

pub mod cli;
pub mod compare;
pub mod engine;
pub mod handoff;
pub mod mac;
pub mod mobility;
pub mod radio;
pub mod report;
pub mod routing;
pub mod scenario;
pub mod sim;
pub mod stats;

/// Identifier of a simulated network element.
#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    serde::Serialize,
    serde::Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}
