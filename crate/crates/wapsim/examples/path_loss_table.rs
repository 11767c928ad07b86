//! Prints a free-space path-loss and received-power table for the canonical
//! radio profiles, showing the 6.02 dB-per-doubling law and where each
//! transmitter class crosses the receiver thresholds.
//!
//! Run with: `cargo run --example path_loss_table`

use wapsim::radio::{path_loss_db, received_power_dbm, RadioProfile};

fn main() {
    let freq = 2400.0;
    let profiles = [
        ("base station", 24.0),
        ("access point", 14.0),
        ("mobile station", 21.0),
    ];
    println!("free-space path loss at {freq} MHz");
    let rx_heading = "rx power (dBm) per transmitter";
    println!("{:>10}  {:>10}  {rx_heading}", "d (m)", "loss (dB)");
    print!("{:>24}", "");
    for (name, _) in &profiles {
        print!("  {name:>15}");
    }
    println!();
    let mut d = 1.0;
    while d <= 8192.0 {
        let loss = path_loss_db(d, freq).unwrap();
        print!("{d:>10.0}  {loss:>10.2}");
        for (_, tx_dbm) in &profiles {
            let p = RadioProfile {
                tx_power_dbm: *tx_dbm,
                frequency_mhz: freq,
                sensitivity_dbm: -94.0,
                lock_threshold_dbm: -91.0,
                error_floor_margin_db: 6.0,
                path_loss_exponent: None,
            };
            let rx = received_power_dbm(&p, d).unwrap();
            let marker = if rx < -94.0 {
                " (lost)"
            } else if rx < -91.0 {
                " (no lock)"
            } else if rx < -85.0 {
                " (weak)"
            } else {
                ""
            };
            print!("  {:>15}", format!("{rx:.1}{marker}"));
        }
        println!();
        d *= 2.0;
    }
    println!();
    let delta = path_loss_db(2.0, freq).unwrap() - path_loss_db(1.0, freq).unwrap();
    println!("each doubling of distance adds {delta:.4} dB");
}
