//! Rendering of run and comparison artifacts: `stats.csv`, `events.json`,
//! `comparison.csv`, and the human-readable `report.txt`.

use std::fmt::Write as _;

use crate::compare::ComparisonReport;
use crate::sim::RunOutput;

/// Per-node counters as CSV (`node,parameter,value`), nodes in ascending id
/// order, rows in the fixed counter order, followed by run-level rows under
/// the pseudo-node `global`.
pub fn stats_csv(run: &RunOutput) -> String {
    let mut out = String::from("node,parameter,value\n");
    for (node, stats) in &run.stats {
        for (name, value) in stats.rows() {
            writeln!(out, "{node},{name},{value}").expect("string write");
        }
    }
    writeln!(out, "global,channel_busy_us,{}", run.channel_busy_us).expect("string write");
    writeln!(out, "global,link_utilization,{}", run.link_utilization).expect("string write");
    writeln!(out, "global,calls_dropped,{}", run.drops).expect("string write");
    out
}

/// Full run record (handoff events, attachment timeline, counters, routing
/// tables) as deterministic pretty-printed JSON.
pub fn events_json(run: &RunOutput) -> String {
    let mut s = serde_json::to_string_pretty(run).expect("run output serializes");
    s.push('\n');
    s
}

/// Comparison as CSV: `parameter,without,with,classification`.
pub fn comparison_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("parameter,without,with,classification\n");
    for row in &report.rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.parameter, row.without, row.with_wap, row.classification
        )
        .expect("string write");
    }
    out
}

/// Human-readable comparison table. The final line is always
/// `QoS score: NN.NN%`, or `QoS score: n/a` when undefined.
pub fn report_txt(report: &ComparisonReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{:<32} {:>16} {:>16}  classification",
        "parameter", "without", "with"
    )
    .expect("string write");
    for row in &report.rows {
        writeln!(
            out,
            "{:<32} {:>16} {:>16}  {}",
            row.parameter,
            fmt_value(row.without),
            fmt_value(row.with_wap),
            row.classification
        )
        .expect("string write");
    }
    writeln!(
        out,
        "\nimproved: {}  undesirable: {}  insignificant: {}",
        report.improved, report.undesirable, report.insignificant
    )
    .expect("string write");
    match report.qos_score {
        Some(score) => writeln!(out, "QoS score: {score:.2}%"),
        None => writeln!(out, "QoS score: n/a"),
    }
    .expect("string write");
    out
}

fn fmt_value(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e12 {
        format!("{}", v as i64)
    } else {
        format!("{v:.6}")
    }
}
