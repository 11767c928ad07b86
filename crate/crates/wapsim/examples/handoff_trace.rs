//! Walks the handoff state machine directly on a synthetic drive: the
//! mobile starts on a healthy base station whose signal fades while an
//! access point's signal rises, producing a soft handoff; the signals then
//! all collapse, producing scanning and finally a declared drop.
//!
//! Run with: `cargo run --example handoff_trace`

use wapsim::engine::SimTime;
use wapsim::handoff::{step, HandoffConfig, HandoffState};
use wapsim::radio::SignalSample;
use wapsim::NodeId;

fn main() {
    let config = HandoffConfig::default();
    let bs = NodeId(1);
    let wap = NodeId(3);
    let mut state = HandoffState::Attached { anchor: bs };

    println!(
        "thresholds: candidate {} dBm, drop {} dBm, soft {} dBm, hysteresis {} dB, {} attempts",
        config.candidate_threshold_dbm,
        config.drop_threshold_dbm,
        config.soft_threshold_dbm,
        config.hysteresis_margin_db,
        config.max_attempts
    );
    println!("\n{:>6} {:>10} {:>10}  {:<38} actions", "tick", "BS dBm", "WAP dBm", "state");

    for tick in 0u64..16 {
        let now = SimTime::from_millis(500 * (tick + 1));
        // Scripted drive: BS fades 2 dB per tick from -72; the WAP rises
        // toward -60 then everything dies after tick 9.
        let (bs_rssi, wap_rssi): (Option<f64>, Option<f64>) = if tick < 10 {
            (Some(-72.0 - 2.0 * tick as f64), Some(-96.0 + 4.0 * tick as f64))
        } else {
            (None, None)
        };
        let anchor_rssi = match state {
            HandoffState::Attached { anchor } | HandoffState::Scanning { anchor, .. } => {
                if anchor == bs { bs_rssi } else { wap_rssi }
            }
            _ => None,
        };
        let mut candidates: Vec<SignalSample> = [(bs, bs_rssi), (wap, wap_rssi)]
            .into_iter()
            .filter_map(|(id, rssi)| {
                let rx = rssi?;
                (rx >= config.candidate_threshold_dbm).then_some(SignalSample {
                    source: id,
                    rx_power_dbm: rx,
                    measured_at: now,
                })
            })
            .collect();
        candidates.sort_by(|a, b| b.rx_power_dbm.partial_cmp(&a.rx_power_dbm).unwrap());

        let (next, actions) = step(state, anchor_rssi, &candidates, &config, now);
        println!(
            "{:>6} {:>10} {:>10}  {:<38} {:?}",
            tick,
            bs_rssi.map(|v| format!("{v:.0}")).unwrap_or_else(|| "-".into()),
            wap_rssi.map(|v| format!("{v:.0}")).unwrap_or_else(|| "-".into()),
            format!("{next:?}"),
            actions
        );
        state = next;
    }
}
