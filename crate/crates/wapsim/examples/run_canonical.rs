//! Runs the bundled canonical scenario (WAPs enabled) and prints the
//! attachment timeline, handoff events, and a digest of the per-node
//! counters.
//!
//! Run with: `cargo run --example run_canonical`

use wapsim::scenario::Scenario;
use wapsim::sim::run;

fn main() {
    let scenario = Scenario::canonical();
    let out = run(&scenario);

    println!(
        "scenario '{}', seed {}, {} ms, WAPs {}",
        out.scenario_name,
        out.seed,
        out.duration_ms,
        if out.wap_enabled { "on" } else { "off" }
    );
    println!("fingerprint {}", out.fingerprint);

    println!("\nattachment timeline:");
    for entry in &out.attachment_timeline {
        println!("  t={:>8.3} s  anchor node {}", entry.time_us as f64 / 1e6, entry.anchor);
    }

    println!("\nhandoff events:");
    for ev in &out.handoff_events {
        println!(
            "  t={:>8.3} s  {:>14}  {} -> {}",
            ev.time_us as f64 / 1e6,
            ev.kind,
            ev.from.map(|n| n.to_string()).unwrap_or_else(|| "-".into()),
            ev.to.map(|n| n.to_string()).unwrap_or_else(|| "-".into()),
        );
    }

    println!("\ncall drops: {}", out.drops);
    println!("channel utilization: {:.6}", out.link_utilization);
    if let Some(rssi) = out.ms_min_anchor_rssi_dbm {
        println!("weakest anchor signal while attached: {rssi:.2} dBm");
    }

    println!("\nper-node counters (selected):");
    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "node", "phy_locked", "mac_bcast", "ip_in_recv", "wired_sent", "wired_recv"
    );
    for (node, s) in &out.stats {
        println!(
            "{:>5} {:>12} {:>12} {:>12} {:>12} {:>12}",
            node.to_string(),
            s.phy_signals_locked,
            s.mac_broadcast_received,
            s.ip_in_receives,
            s.link_frames_sent,
            s.link_frames_received
        );
    }
}
