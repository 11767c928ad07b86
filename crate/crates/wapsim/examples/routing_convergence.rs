//! Converges distance-vector tables on the canonical backhaul star plus a
//! wireless mobile, printing each synchronous advertisement round until the
//! tables go quiet, then demonstrates a withdrawal propagating as a
//! triggered update.
//!
//! Run with: `cargo run --example routing_convergence`

use wapsim::engine::SimTime;
use wapsim::routing::{RoutingTable, INFINITY_METRIC};
use wapsim::NodeId;

fn main() {
    // Star backhaul: base stations 1-2 and access points 3-7 all wired to
    // the switching centre 9; the mobile 10 is a wireless neighbor of
    // base station 1 only.
    let ids = [1u32, 2, 3, 4, 5, 6, 7, 9, 10];
    let neighbors: Vec<(u32, u32)> = vec![
        (1, 9), (2, 9), (3, 9), (4, 9), (5, 9), (6, 9), (7, 9), (10, 1),
    ];
    let mut tables: Vec<RoutingTable> = ids
        .iter()
        .map(|&id| RoutingTable::new(NodeId(id), SimTime::ZERO))
        .collect();
    let index = |id: u32| ids.iter().position(|&x| x == id).unwrap();

    let mut round = 0;
    loop {
        round += 1;
        let ads: Vec<Vec<(NodeId, u8)>> =
            tables.iter().map(|t| t.periodic_advertisement()).collect();
        let mut changes = 0;
        for &(a, b) in &neighbors {
            let now = SimTime::from_secs(round);
            changes += tables[index(a)]
                .process_update(NodeId(b), &ads[index(b)], now)
                .len();
            changes += tables[index(b)]
                .process_update(NodeId(a), &ads[index(a)], now)
                .len();
        }
        println!("round {round}: {changes} route change(s)");
        if changes == 0 {
            break;
        }
    }

    println!("\nconverged table at the switching centre (node 9):");
    for e in tables[index(9)].entries() {
        println!(
            "  dest {:>2}  metric {:>2}  via {}",
            e.destination.to_string(),
            e.metric,
            e.next_hop
        );
    }
    println!("\nroute to the mobile from node 5: next hop {:?}", tables[index(5)].next_hop(NodeId(10)));

    // The mobile leaves base station 1's cell: 1 withdraws the route and a
    // triggered update carries the poison through the star.
    println!("\nnode 1 loses the mobile; triggered updates propagate the withdrawal:");
    let now = SimTime::from_secs(100);
    tables[index(1)].process_update(NodeId(10), &[(NodeId(10), INFINITY_METRIC)], now);
    let mut wave: Vec<u32> = vec![1];
    while !wave.is_empty() {
        let mut next_wave = Vec::new();
        for node in wave {
            let payload = tables[index(node)].emit_triggered();
            if payload.is_empty() {
                continue;
            }
            for &(a, b) in &neighbors {
                let peer = if a == node { b } else if b == node { a } else { continue };
                let changed = tables[index(peer)].process_update(NodeId(node), &payload, now);
                if !changed.is_empty() {
                    println!("  node {node} -> node {peer}: {payload:?} adopted");
                    next_wave.push(peer);
                }
            }
        }
        wave = next_wave;
    }
    println!(
        "route to the mobile from node 5 is now {:?}",
        tables[index(5)].next_hop(NodeId(10))
    );
}
