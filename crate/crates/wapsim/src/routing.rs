//! Distance-vector (Bellman-Ford) routing with periodic full-dump
//! advertisements and triggered updates, RIP-style: hop-count metric with
//! infinity at 16 and poisoned withdrawals.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::engine::SimTime;
use crate::NodeId;

/// Hop count meaning "unreachable".
pub const INFINITY_METRIC: u8 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteEntry {
    pub destination: NodeId,
    pub metric: u8,
    pub next_hop: NodeId,
    pub last_refreshed: SimTime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingTable {
    owner: NodeId,
    routes: BTreeMap<NodeId, RouteEntry>,
    pending_triggered: BTreeSet<NodeId>,
}

impl RoutingTable {
    pub fn new(owner: NodeId, now: SimTime) -> Self {
        let mut routes = BTreeMap::new();
        routes.insert(
            owner,
            RouteEntry {
                destination: owner,
                metric: 0,
                next_hop: owner,
                last_refreshed: now,
            },
        );
        RoutingTable {
            owner,
            routes,
            pending_triggered: BTreeSet::new(),
        }
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn entry(&self, destination: NodeId) -> Option<&RouteEntry> {
        self.routes.get(&destination)
    }

    pub fn entries(&self) -> impl Iterator<Item = &RouteEntry> {
        self.routes.values()
    }

    pub fn has_pending_triggered(&self) -> bool {
        !self.pending_triggered.is_empty()
    }

    /// Applies a neighbor's advertisement. For each advertised `(d, m)` the
    /// candidate metric is `min(m + 1, 16)`; it is adopted when the
    /// destination is new, the candidate is strictly better, or the update
    /// came from the current next hop and changed the metric. Changed
    /// destinations are queued for a triggered update and returned.
    pub fn process_update(
        &mut self,
        from: NodeId,
        advertised: &[(NodeId, u8)],
        now: SimTime,
    ) -> Vec<NodeId> {
        let mut changed = Vec::new();
        for &(destination, metric) in advertised {
            if destination == self.owner {
                continue;
            }
            let candidate = metric.min(INFINITY_METRIC).saturating_add(1).min(INFINITY_METRIC);
            match self.routes.get_mut(&destination) {
                None => {
                    if candidate < INFINITY_METRIC {
                        self.routes.insert(
                            destination,
                            RouteEntry {
                                destination,
                                metric: candidate,
                                next_hop: from,
                                last_refreshed: now,
                            },
                        );
                        changed.push(destination);
                    }
                }
                Some(entry) => {
                    if candidate < entry.metric
                        || (entry.next_hop == from && candidate != entry.metric)
                    {
                        entry.metric = candidate;
                        entry.next_hop = from;
                        entry.last_refreshed = now;
                        changed.push(destination);
                    } else if entry.next_hop == from {
                        entry.last_refreshed = now;
                    }
                }
            }
        }
        self.pending_triggered.extend(changed.iter().copied());
        changed
    }

    /// Full table dump for the periodic advertisement.
    pub fn periodic_advertisement(&self) -> Vec<(NodeId, u8)> {
        self.routes.values().map(|e| (e.destination, e.metric)).collect()
    }

    /// Full dump with split horizon toward `peer`: routes learned through
    /// the peer are omitted.
    pub fn advertisement_for_peer(&self, peer: NodeId) -> Vec<(NodeId, u8)> {
        self.routes
            .values()
            .filter(|e| e.next_hop != peer || e.destination == self.owner)
            .map(|e| (e.destination, e.metric))
            .collect()
    }

    /// Drains the pending-change set into a triggered-update payload.
    /// Empty pending set is a no-op returning an empty list.
    pub fn emit_triggered(&mut self) -> Vec<(NodeId, u8)> {
        let pending = std::mem::take(&mut self.pending_triggered);
        pending
            .into_iter()
            .filter_map(|d| self.routes.get(&d).map(|e| (e.destination, e.metric)))
            .collect()
    }

    /// Next hop toward `destination`, or `None` when unreachable.
    pub fn next_hop(&self, destination: NodeId) -> Option<NodeId> {
        self.routes
            .get(&destination)
            .filter(|e| e.metric < INFINITY_METRIC)
            .map(|e| e.next_hop)
    }

    /// Poisons routes not refreshed within `timeout`. Returns true when any
    /// route changed (and was queued for a triggered update).
    pub fn expire_stale(&mut self, now: SimTime, timeout: SimTime) -> bool {
        let mut changed = false;
        for entry in self.routes.values_mut() {
            if entry.destination == self.owner || entry.metric == INFINITY_METRIC {
                continue;
            }
            if now.saturating_sub(entry.last_refreshed) > timeout {
                entry.metric = INFINITY_METRIC;
                self.pending_triggered.insert(entry.destination);
                changed = true;
            }
        }
        changed
    }
}
