//! The simulation world: wires the event scheduler to radio, MAC, routing,
//! mobility, handoff, and statistics for one scenario run.
//!
//! A run is single-threaded and fully deterministic: one pseudo-random
//! stream per node, seeded from (run seed, node id), so adding or removing
//! a node never perturbs the draws of the others. The with-WAP and
//! without-WAP arms of a comparison are independent runs.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Scheduler, SimTime};
use crate::handoff::{self, HandoffAction, HandoffState};
use crate::mac::{self, Frame, FrameKind, MacState, SLOT};
use crate::mobility::Position;
use crate::radio::{self, RadioProfile, ReceptionOutcome};
use crate::routing::RoutingTable;
use crate::scenario::{NodeKind, Scenario};
use crate::stats::{self, LayerStats, StatsMap};
use crate::NodeId;

const INITIAL_TTL: u8 = 64;
const SIGNALING_PAYLOAD_BYTES: u32 = 32;
const ROUTE_TIMEOUT_INTERVALS: u64 = 6;
const QUEUE_SERVICE: SimTime = SimTime::from_millis(1);
const STATS_SAMPLE_INTERVAL: SimTime = SimTime::from_secs(1);

#[derive(Debug, Clone)]
enum EventKind {
    TransmissionStart { frame: Frame, duration: SimTime },
    ReceptionComplete { tx_index: usize },
    WiredDelivery { frame: Frame, to: NodeId },
    ScanTimer,
    RoutingPeriodic { node: NodeId },
    RoutingTriggered { node: NodeId },
    TrafficGeneration,
    QueueService { node: NodeId },
    StatsSample,
}

#[derive(Debug, Clone)]
struct ActiveTransmission {
    start: SimTime,
    end: SimTime,
    src: NodeId,
    frame: Frame,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HandoffEvent {
    pub time_us: u64,
    pub from: Option<NodeId>,
    pub to: Option<NodeId>,
    pub kind: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub time_us: u64,
    pub anchor: NodeId,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RouteSnapshot {
    pub destination: NodeId,
    pub metric: u8,
    pub next_hop: NodeId,
}

/// Everything one run produces. Serialized verbatim as the run's
/// `events.json`; the counter table additionally exports as `stats.csv`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutput {
    pub schema_version: u32,
    pub scenario_name: String,
    pub fingerprint: String,
    pub seed: u64,
    pub wap_enabled: bool,
    pub duration_ms: u64,
    pub drops: u64,
    pub handoff_events: Vec<HandoffEvent>,
    pub attachment_timeline: Vec<TimelineEntry>,
    pub nodes: Vec<(NodeId, NodeKind)>,
    pub stats: StatsMap,
    pub routing_tables: BTreeMap<NodeId, Vec<RouteSnapshot>>,
    pub channel_busy_us: u64,
    pub link_utilization: f64,
    pub ms_min_anchor_rssi_dbm: Option<f64>,
    pub invariant_violations: Vec<String>,
}

struct NodeRuntime {
    kind: NodeKind,
    path: crate::mobility::Path,
    radio: Option<RadioProfile>,
    wireless_active: bool,
    wired_neighbors: Vec<NodeId>,
}

struct World {
    scenario: Scenario,
    nodes: BTreeMap<NodeId, NodeRuntime>,
    rngs: BTreeMap<NodeId, ChaCha8Rng>,
    tables: BTreeMap<NodeId, RoutingTable>,
    mac_states: BTreeMap<NodeId, MacState>,
    stats: StatsMap,
    transmissions: Vec<ActiveTransmission>,
    channel_free_at: SimTime,
    channel_busy_us: u64,
    triggered_scheduled: BTreeSet<NodeId>,
    queue_depth: BTreeMap<NodeId, u64>,
    queue_busy: BTreeSet<NodeId>,
    ms_id: NodeId,
    msc_id: NodeId,
    ms_state: HandoffState,
    attachments: BTreeSet<NodeId>,
    drops: u64,
    handoff_events: Vec<HandoffEvent>,
    timeline: Vec<TimelineEntry>,
    ms_min_anchor_rssi: Option<f64>,
    violations: Vec<String>,
    /// (time, learner, destination, metric) for every adopted route change.
    route_learned: Vec<(SimTime, NodeId, NodeId, u8)>,
}

fn node_stream_seed(run_seed: u64, node: NodeId) -> u64 {
    // splitmix64 over the combined seed; stable across platforms.
    let mut z = run_seed ^ (node.0 as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl World {
    fn new(scenario: &Scenario) -> World {
        let scenario = scenario.clone();
        let mut nodes = BTreeMap::new();
        let mut rngs = BTreeMap::new();
        let mut tables = BTreeMap::new();
        let mut mac_states = BTreeMap::new();
        let mut stats = StatsMap::new();
        for spec in &scenario.nodes {
            let wireless_active = spec.radio.is_some()
                && match spec.kind {
                    NodeKind::Msc => false,
                    NodeKind::Wap => scenario.wap_enabled,
                    _ => true,
                };
            let wired_neighbors = scenario
                .wired_links
                .iter()
                .filter_map(|&(a, b)| {
                    if a == spec.id {
                        Some(b)
                    } else if b == spec.id {
                        Some(a)
                    } else {
                        None
                    }
                })
                .collect();
            nodes.insert(
                spec.id,
                NodeRuntime {
                    kind: spec.kind,
                    path: spec.path.clone(),
                    radio: spec.radio,
                    wireless_active,
                    wired_neighbors,
                },
            );
            rngs.insert(
                spec.id,
                ChaCha8Rng::seed_from_u64(node_stream_seed(scenario.seed, spec.id)),
            );
            tables.insert(spec.id, RoutingTable::new(spec.id, SimTime::ZERO));
            mac_states.insert(spec.id, MacState::new(&scenario.mac));
            stats.insert(spec.id, LayerStats::default());
        }
        let ms_id = scenario.mobile_station().id;
        let msc_id = scenario.msc().id;
        World {
            scenario,
            nodes,
            rngs,
            tables,
            mac_states,
            stats,
            transmissions: Vec::new(),
            channel_free_at: SimTime::ZERO,
            channel_busy_us: 0,
            triggered_scheduled: BTreeSet::new(),
            queue_depth: BTreeMap::new(),
            queue_busy: BTreeSet::new(),
            ms_id,
            msc_id,
            ms_state: HandoffState::Unattached { failed_attempts: 0 },
            attachments: BTreeSet::new(),
            drops: 0,
            handoff_events: Vec::new(),
            timeline: Vec::new(),
            ms_min_anchor_rssi: None,
            violations: Vec::new(),
            route_learned: Vec::new(),
        }
    }

    fn prime(&mut self, sched: &mut Scheduler<EventKind>) {
        if self.scenario.duration_ms == 0 {
            return;
        }
        let traffic = self.scenario.traffic;
        let node_ids: Vec<NodeId> = self.nodes.keys().copied().collect();
        for id in node_ids {
            sched
                .schedule(
                    SimTime::from_millis(traffic.advertisement_start_ms),
                    EventKind::RoutingPeriodic { node: id },
                )
                .expect("start of run");
        }
        sched
            .schedule(self.scenario.handoff.scan_interval(), EventKind::ScanTimer)
            .expect("start of run");
        sched
            .schedule(
                SimTime::from_millis(traffic.data_start_ms),
                EventKind::TrafficGeneration,
            )
            .expect("start of run");
        sched
            .schedule(STATS_SAMPLE_INTERVAL, EventKind::StatsSample)
            .expect("start of run");
    }

    /// Position sampled at the mobility tick most recently preceding `t`.
    fn position_of(&self, node: NodeId, t: SimTime) -> Position {
        let tick_us = self.scenario.traffic.mobility_tick_ms * 1_000;
        let quantized = (t.as_micros() / tick_us) * tick_us;
        self.nodes[&node]
            .path
            .position_at(SimTime::from_micros(quantized).as_secs_f64())
    }

    fn stat(&mut self, node: NodeId) -> &mut LayerStats {
        self.stats.get_mut(&node).expect("stats exist for all nodes")
    }

    fn handle(&mut self, sched: &mut Scheduler<EventKind>, now: SimTime, event: EventKind) {
        match event {
            EventKind::TransmissionStart { frame, duration } => {
                let src = frame.src;
                let s = self.stat(src);
                s.link_busy_time = s.link_busy_time + duration;
                self.transmissions.push(ActiveTransmission {
                    start: now,
                    end: now + duration,
                    src,
                    frame,
                });
                let idx = self.transmissions.len() - 1;
                sched.schedule_in(duration, EventKind::ReceptionComplete { tx_index: idx });
            }
            EventKind::ReceptionComplete { tx_index } => {
                self.complete_reception(sched, now, tx_index);
            }
            EventKind::WiredDelivery { frame, to } => {
                self.stat(to).link_frames_received += 1;
                self.receive_ip(sched, now, to, frame);
            }
            EventKind::ScanTimer => {
                self.scan_tick(sched, now);
                sched.schedule_in(self.scenario.handoff.scan_interval(), EventKind::ScanTimer);
            }
            EventKind::RoutingPeriodic { node } => {
                self.routing_periodic(sched, now, node);
                sched.schedule_in(
                    SimTime::from_millis(self.scenario.traffic.advertisement_interval_ms),
                    EventKind::RoutingPeriodic { node },
                );
            }
            EventKind::RoutingTriggered { node } => {
                self.triggered_scheduled.remove(&node);
                let entries = self.tables.get_mut(&node).expect("table").emit_triggered();
                if !entries.is_empty() {
                    self.send_routing_update(sched, now, node, entries, false);
                }
            }
            EventKind::TrafficGeneration => {
                self.generate_data(sched, now);
                sched.schedule_in(
                    SimTime::from_millis(self.scenario.traffic.data_interval_ms),
                    EventKind::TrafficGeneration,
                );
            }
            EventKind::QueueService { node } => {
                let depth = self.queue_depth.entry(node).or_insert(0);
                debug_assert!(*depth > 0);
                *depth -= 1;
                let remaining = *depth;
                self.stat(node).queue_packets_dequeued += 1;
                if remaining > 0 {
                    sched.schedule_in(QUEUE_SERVICE, EventKind::QueueService { node });
                } else {
                    self.queue_busy.remove(&node);
                }
            }
            EventKind::StatsSample => {
                for violation in stats::check_invariants(&self.stats) {
                    let msg = format!("t={now}: {violation}");
                    if !self.violations.contains(&msg) {
                        self.violations.push(msg);
                    }
                }
                sched.schedule_in(STATS_SAMPLE_INTERVAL, EventKind::StatsSample);
            }
        }
    }

    // ---- wireless path ----

    /// Queues a frame on the shared channel: contend for a backoff, start
    /// once the channel is idle for that many slots. The carrier-sense
    /// reservation serializes transmissions; the receiver-side overlap rule
    /// in `complete_reception` still voids any that do overlap.
    fn enqueue_wireless(&mut self, sched: &mut Scheduler<EventKind>, now: SimTime, frame: Frame) {
        let src = frame.src;
        if !self.nodes[&src].wireless_active {
            return;
        }
        let backoff = {
            let state = self.mac_states[&src];
            let rng = self.rngs.get_mut(&src).expect("rng");
            mac::contend(&state, rng)
        };
        let start = mac::tx_start_time(now, self.channel_free_at, backoff);
        let duration = mac::frame_duration(frame.payload_size, &self.scenario.mac);
        self.channel_free_at = start + duration;
        self.channel_busy_us += duration.as_micros();
        self.mac_states.get_mut(&src).expect("mac state").busy_until = start + duration;
        sched
            .schedule(start, EventKind::TransmissionStart { frame, duration })
            .expect("start >= now");
    }

    fn complete_reception(
        &mut self,
        sched: &mut Scheduler<EventKind>,
        now: SimTime,
        tx_index: usize,
    ) {
        let tx = self.transmissions[tx_index].clone();
        let tx_profile = self.nodes[&tx.src].radio.expect("transmitter has a radio");
        let tx_pos = self.position_of(tx.src, tx.start);
        let receiver_ids: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|(id, n)| **id != tx.src && n.wireless_active)
            .map(|(id, _)| *id)
            .collect();
        for rx_id in receiver_ids {
            let rx_profile = self.nodes[&rx_id].radio.expect("wireless node has a radio");
            let rx_pos = self.position_of(rx_id, tx.start);
            let rx_power = match radio::received_power_dbm(&tx_profile, tx_pos.distance_to(&rx_pos))
            {
                Ok(p) => p,
                Err(_) => continue,
            };
            if !radio::detectable(rx_power, &rx_profile) {
                continue;
            }
            if rx_power < rx_profile.lock_threshold_dbm {
                continue; // detectable but no lock: no draw, no counters
            }
            let draw: f64 = self.rngs.get_mut(&rx_id).expect("rng").gen();
            let outcome = radio::reception_outcome(rx_power, &rx_profile, draw);
            let collided = self.overlapping_transmission_at(tx_index, &tx, rx_id);
            let s = self.stat(rx_id);
            s.phy_signals_locked += 1;
            if outcome == ReceptionOutcome::LockedWithError || collided {
                s.phy_signals_with_errors += 1;
                continue;
            }
            s.phy_signals_to_mac += 1;
            self.deliver_to_mac(sched, now, rx_id, &tx.frame);
        }
    }

    /// Receiver-side collision rule: a concurrent transmission that is
    /// detectable at the receiver voids this reception (no capture effect).
    fn overlapping_transmission_at(
        &self,
        tx_index: usize,
        tx: &ActiveTransmission,
        receiver: NodeId,
    ) -> bool {
        let rx_profile = self.nodes[&receiver].radio.expect("wireless node has a radio");
        let rx_pos = self.position_of(receiver, tx.start);
        self.transmissions.iter().enumerate().any(|(j, other)| {
            if j == tx_index || other.src == receiver {
                return false;
            }
            if other.start >= tx.end || tx.start >= other.end {
                return false;
            }
            let Some(other_profile) = self.nodes[&other.src].radio else {
                return false;
            };
            let other_pos = self.position_of(other.src, other.start);
            radio::received_power_dbm(&other_profile, other_pos.distance_to(&rx_pos))
                .map(|p| radio::detectable(p, &rx_profile))
                .unwrap_or(false)
        })
    }

    fn deliver_to_mac(
        &mut self,
        sched: &mut Scheduler<EventKind>,
        now: SimTime,
        receiver: NodeId,
        frame: &Frame,
    ) {
        match frame.link_dst {
            None => {
                // Broadcast: delivered to every receiving MAC.
                self.stat(receiver).mac_broadcast_received += 1;
                self.stat(receiver).ip_in_receives += 1;
                let mut frame = frame.clone();
                frame.ttl = frame.ttl.saturating_sub(1);
                self.deliver_local(sched, now, receiver, &frame);
            }
            Some(dst) if dst == receiver => {
                self.stat(receiver).ip_in_receives += 1;
                let mut frame = frame.clone();
                frame.ttl = frame.ttl.saturating_sub(1);
                if frame.final_dst == Some(receiver) {
                    self.deliver_local(sched, now, receiver, &frame);
                } else {
                    self.forward(sched, now, receiver, frame);
                }
            }
            Some(_) => {} // overheard unicast for someone else
        }
    }

    // ---- wired path ----

    fn send_wired(
        &mut self,
        sched: &mut Scheduler<EventKind>,
        _now: SimTime,
        from: NodeId,
        to: NodeId,
        frame: Frame,
    ) {
        self.stat(from).link_frames_sent += 1;
        sched.schedule_in(
            SimTime::from_micros(self.scenario.mac.wired_delay_us),
            EventKind::WiredDelivery { frame, to },
        );
    }

    fn receive_ip(
        &mut self,
        sched: &mut Scheduler<EventKind>,
        now: SimTime,
        node: NodeId,
        frame: Frame,
    ) {
        self.stat(node).ip_in_receives += 1;
        let mut frame = frame;
        frame.ttl = frame.ttl.saturating_sub(1);
        let for_me = match frame.kind {
            FrameKind::RoutingUpdate => true, // link-local advertisement
            _ => frame.final_dst == Some(node),
        };
        if for_me {
            self.deliver_local(sched, now, node, &frame);
        } else {
            self.forward(sched, now, node, frame);
        }
    }

    fn forward(
        &mut self,
        sched: &mut Scheduler<EventKind>,
        now: SimTime,
        node: NodeId,
        frame: Frame,
    ) {
        if frame.ttl == 0 {
            return;
        }
        let Some(final_dst) = frame.final_dst else {
            return;
        };
        let Some(next_hop) = self.tables[&node].next_hop(final_dst) else {
            return; // unreachable: dropped at the IP layer
        };
        let mut relayed = frame;
        if self.nodes[&node].wired_neighbors.contains(&next_hop) {
            self.send_wired(sched, now, node, next_hop, relayed);
        } else {
            relayed.src = node;
            relayed.link_dst = Some(next_hop);
            self.enqueue_wireless(sched, now, relayed);
        }
    }

    /// Local IP delivery: TTL accounting, application hand-off, and the
    /// FIFO queue at the MSC.
    fn deliver_local(
        &mut self,
        sched: &mut Scheduler<EventKind>,
        now: SimTime,
        node: NodeId,
        frame: &Frame,
    ) {
        let s = self.stat(node);
        s.ip_in_delivers += 1;
        s.ip_in_delivers_ttl_sum += frame.ttl as u64;
        s.udp_to_app += 1;
        match frame.kind {
            FrameKind::RoutingUpdate => {
                self.stat(node).bellman_ford_updates_received += 1;
                let entries = frame.routing_entries.clone().unwrap_or_default();
                let changed = self
                    .tables
                    .get_mut(&node)
                    .expect("table")
                    .process_update(frame.src, &entries, now);
                for dest in changed {
                    let metric = self.tables[&node].entry(dest).expect("just adopted").metric;
                    self.route_learned.push((now, node, dest, metric));
                }
                self.schedule_triggered_if_pending(sched, now, node);
            }
            FrameKind::Data | FrameKind::HandoffSignaling => {}
        }
        if self.nodes[&node].kind == NodeKind::Msc {
            self.enqueue_packet(sched, node, frame.payload_size);
        }
    }

    fn enqueue_packet(&mut self, sched: &mut Scheduler<EventKind>, node: NodeId, size: u32) {
        let depth = self.queue_depth.entry(node).or_insert(0);
        *depth += 1;
        let depth = *depth;
        let s = self.stat(node);
        s.queue_packets_queued += 1;
        s.queue_bytes_total += size as u64;
        s.queue_peak_size = s.queue_peak_size.max(depth);
        if self.queue_busy.insert(node) {
            sched.schedule_in(QUEUE_SERVICE, EventKind::QueueService { node });
        }
    }

    // ---- routing ----

    fn routing_periodic(&mut self, sched: &mut Scheduler<EventKind>, now: SimTime, node: NodeId) {
        let timeout = SimTime::from_millis(
            self.scenario.traffic.advertisement_interval_ms * ROUTE_TIMEOUT_INTERVALS,
        );
        let table = self.tables.get_mut(&node).expect("table");
        table.expire_stale(now, timeout);
        let entries = table.periodic_advertisement();
        self.send_routing_update(sched, now, node, entries, true);
        self.schedule_triggered_if_pending(sched, now, node);
    }

    /// Sends a routing payload on every interface: one wireless broadcast
    /// (if this node radiates) and one wired copy per backhaul neighbor.
    fn send_routing_update(
        &mut self,
        sched: &mut Scheduler<EventKind>,
        now: SimTime,
        node: NodeId,
        entries: Vec<(NodeId, u8)>,
        full_dump: bool,
    ) {
        let payload_size = 4 + 6 * entries.len() as u32;
        let base = Frame {
            src: node,
            link_dst: None,
            final_dst: None,
            kind: FrameKind::RoutingUpdate,
            payload_size,
            created_at: now,
            ttl: INITIAL_TTL,
            routing_entries: Some(entries),
        };
        if self.nodes[&node].wireless_active {
            let s = self.stat(node);
            s.ip_out_requests += 1;
            s.udp_from_app += 1;
            self.enqueue_wireless(sched, now, base.clone());
        }
        let neighbors = self.nodes[&node].wired_neighbors.clone();
        for peer in neighbors {
            let mut frame = base.clone();
            if full_dump && self.scenario.split_horizon {
                let filtered = self.tables[&node].advertisement_for_peer(peer);
                frame.payload_size = 4 + 6 * filtered.len() as u32;
                frame.routing_entries = Some(filtered);
            }
            frame.link_dst = Some(peer);
            let s = self.stat(node);
            s.ip_out_requests += 1;
            s.udp_from_app += 1;
            self.send_wired(sched, now, node, peer, frame);
        }
    }

    /// Triggered updates go out after a small randomized delay (1-5 slot
    /// times) so neighboring updates do not synchronize.
    fn schedule_triggered_if_pending(
        &mut self,
        sched: &mut Scheduler<EventKind>,
        _now: SimTime,
        node: NodeId,
    ) {
        if !self.tables[&node].has_pending_triggered() {
            return;
        }
        if !self.triggered_scheduled.insert(node) {
            return;
        }
        let slots = self.rngs.get_mut(&node).expect("rng").gen_range(1..=5u64);
        sched.schedule_in(
            SimTime::from_micros(slots * SLOT.as_micros()),
            EventKind::RoutingTriggered { node },
        );
    }

    // ---- mobile station behaviour ----

    fn scan_tick(&mut self, sched: &mut Scheduler<EventKind>, now: SimTime) {
        let ms = self.ms_id;
        let ms_pos = self.position_of(ms, now);
        let transmitters: Vec<(NodeId, RadioProfile, Position)> = self
            .nodes
            .iter()
            .filter(|(id, n)| **id != ms && n.wireless_active)
            .map(|(id, n)| (*id, n.radio.expect("wireless node has a radio"), self.position_of(*id, now)))
            .collect();
        let candidates =
            handoff::scan_candidates(ms_pos, &transmitters, &self.scenario.handoff, now);

        let anchor = match self.ms_state {
            HandoffState::Attached { anchor } => Some(anchor),
            HandoffState::Scanning { anchor, .. } => Some(anchor),
            _ => None,
        };
        let ms_profile = self.nodes[&ms].radio.expect("mobile station has a radio");
        let anchor_rssi = anchor.and_then(|a| {
            let t = transmitters.iter().find(|(id, _, _)| *id == a)?;
            let rx = radio::received_power_dbm(&t.1, ms_pos.distance_to(&t.2)).ok()?;
            radio::detectable(rx, &ms_profile).then_some(rx)
        });
        if matches!(self.ms_state, HandoffState::Attached { .. }) {
            if let Some(rssi) = anchor_rssi {
                self.ms_min_anchor_rssi = Some(match self.ms_min_anchor_rssi {
                    Some(cur) => cur.min(rssi),
                    None => rssi,
                });
            }
        }

        let old_state = self.ms_state;
        let (new_state, actions) =
            handoff::step(old_state, anchor_rssi, &candidates, &self.scenario.handoff, now);
        self.ms_state = new_state;

        for action in &actions {
            match action {
                HandoffAction::AttachTo(target) => {
                    self.attachments.insert(*target);
                    self.timeline.push(TimelineEntry {
                        time_us: now.as_micros(),
                        anchor: *target,
                    });
                    self.send_signaling(sched, now, *target);
                }
                HandoffAction::DetachFrom(old) => {
                    self.attachments.remove(old);
                }
                HandoffAction::DeclareDrop => {
                    self.drops += 1;
                    self.stat(ms).calls_dropped += 1;
                }
            }
        }

        let event_kind = match (&old_state, &self.ms_state) {
            (HandoffState::Unattached { .. }, HandoffState::Attached { .. }) => {
                Some("initial_attach")
            }
            (HandoffState::Attached { .. } | HandoffState::Scanning { .. },
                HandoffState::SoftHandoff { .. }) => Some("soft"),
            (HandoffState::Attached { anchor: a, .. }, HandoffState::Attached { anchor: b })
                if a != b => Some("hard"),
            (HandoffState::Scanning { .. }, HandoffState::Attached { anchor: _ })
                if actions.iter().any(|x| matches!(x, HandoffAction::AttachTo(_))) => Some("hard"),
            (_, HandoffState::Dropped) if !matches!(old_state, HandoffState::Dropped) => {
                Some("drop")
            }
            _ => None,
        };
        if let Some(kind) = event_kind {
            match kind {
                "soft" => self.stat(ms).handoffs_soft += 1,
                "hard" => self.stat(ms).handoffs_hard += 1,
                _ => {}
            }
            let to = match self.ms_state {
                HandoffState::Attached { anchor } => Some(anchor),
                HandoffState::SoftHandoff { new, .. } => Some(new),
                _ => None,
            };
            self.handoff_events.push(HandoffEvent {
                time_us: now.as_micros(),
                from: match old_state {
                    HandoffState::Attached { anchor } => Some(anchor),
                    HandoffState::Scanning { anchor, .. } => Some(anchor),
                    _ => None,
                },
                to,
                kind: kind.to_string(),
            });
        }
    }

    /// Attachment signaling toward the MSC through the new anchor.
    fn send_signaling(&mut self, sched: &mut Scheduler<EventKind>, now: SimTime, anchor: NodeId) {
        let ms = self.ms_id;
        let s = self.stat(ms);
        s.ip_out_requests += 1;
        s.udp_from_app += 1;
        let frame = Frame {
            src: ms,
            link_dst: Some(anchor),
            final_dst: Some(self.msc_id),
            kind: FrameKind::HandoffSignaling,
            payload_size: SIGNALING_PAYLOAD_BYTES,
            created_at: now,
            ttl: INITIAL_TTL,
            routing_entries: None,
        };
        self.enqueue_wireless(sched, now, frame);
    }

    /// Call traffic: one uplink datagram toward the MSC per interval while
    /// a call is up (attached or mid-soft-handoff).
    fn generate_data(&mut self, sched: &mut Scheduler<EventKind>, now: SimTime) {
        let first_hop = match self.ms_state {
            HandoffState::Attached { anchor } => anchor,
            HandoffState::SoftHandoff { new, .. } => new,
            _ => return,
        };
        let ms = self.ms_id;
        let s = self.stat(ms);
        s.ip_out_requests += 1;
        s.udp_from_app += 1;
        let frame = Frame {
            src: ms,
            link_dst: Some(first_hop),
            final_dst: Some(self.msc_id),
            kind: FrameKind::Data,
            payload_size: self.scenario.traffic.data_payload_bytes,
            created_at: now,
            ttl: INITIAL_TTL,
            routing_entries: None,
        };
        self.enqueue_wireless(sched, now, frame);
    }

    fn finish(mut self) -> RunOutput {
        for violation in stats::check_invariants(&self.stats) {
            let msg = format!("final: {violation}");
            if !self.violations.contains(&msg) {
                self.violations.push(msg);
            }
        }
        let duration = self.scenario.duration();
        let busy = SimTime::from_micros(self.channel_busy_us.min(duration.as_micros()));
        let link_utilization = if duration == SimTime::ZERO {
            0.0
        } else {
            mac::link_utilization(busy, duration).expect("busy clamped to duration")
        };
        let routing_tables = self
            .tables
            .iter()
            .map(|(id, t)| {
                let snap = t
                    .entries()
                    .map(|e| RouteSnapshot {
                        destination: e.destination,
                        metric: e.metric,
                        next_hop: e.next_hop,
                    })
                    .collect();
                (*id, snap)
            })
            .collect();
        RunOutput {
            schema_version: 1,
            scenario_name: self.scenario.name.clone(),
            fingerprint: self.scenario.fingerprint(),
            seed: self.scenario.seed,
            wap_enabled: self.scenario.wap_enabled,
            duration_ms: self.scenario.duration_ms,
            drops: self.drops,
            handoff_events: self.handoff_events,
            attachment_timeline: self.timeline,
            nodes: self
                .nodes
                .iter()
                .map(|(id, n)| (*id, n.kind))
                .collect(),
            stats: self.stats,
            routing_tables,
            channel_busy_us: self.channel_busy_us,
            link_utilization,
            ms_min_anchor_rssi_dbm: self.ms_min_anchor_rssi,
            invariant_violations: self.violations,
        }
    }
}

/// Executes one scenario arm to completion.
pub fn run(scenario: &Scenario) -> RunOutput {
    let mut sched: Scheduler<EventKind> = Scheduler::new();
    let mut world = World::new(scenario);
    world.prime(&mut sched);
    sched
        .run_until(scenario.duration(), |s, t, ev| world.handle(s, t, ev))
        .expect("duration is non-negative");
    world.finish()
}
