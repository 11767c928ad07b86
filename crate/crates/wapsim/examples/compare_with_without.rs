//! Runs the canonical scene twice — once with access points, once without —
//! classifies the seventeen reported parameters, and prints the comparison
//! report with its QoS score.
//!
//! Run with: `cargo run --example compare_with_without`

use wapsim::compare::{compare, PolarityTable};
use wapsim::report::report_txt;
use wapsim::scenario::Scenario;
use wapsim::sim::run;

fn main() {
    let mut scenario = Scenario::canonical();
    scenario.wap_enabled = false;
    let without = run(&scenario);
    scenario.wap_enabled = true;
    let with_wap = run(&scenario);

    println!(
        "without WAPs: {} drop(s); with WAPs: {} drop(s)\n",
        without.drops, with_wap.drops
    );

    let table = PolarityTable::bundled();
    let report = compare(&without, &with_wap, &table, table.epsilon)
        .expect("arms share a scenario fingerprint");
    print!("{}", report_txt(&report));
}
