//! Virtual-clock run of the newest-wins limiter: frames every `interval`,
//! each taking `service` to process.
//!
//! ```text
//! cargo run --example flow_limiter_sim -- 10 1 2 1
//! ```
//! Arguments: frame count, interval, service time, max in flight.

use faceatlas::pipeline::{simulate_stream, SimEventKind};

fn main() {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("integer argument"))
        .collect();
    let get = |i: usize, d: u64| args.get(i).copied().unwrap_or(d);
    let (count, interval, service, cap) = (get(0, 10), get(1, 1), get(2, 2), get(3, 1));

    let arrivals: Vec<u64> = (0..count).map(|i| i * interval).collect();
    let report = simulate_stream(&arrivals, |_| service, cap as usize);
    for e in &report.events {
        let (what, frame) = match e.kind {
            SimEventKind::Arrive(i) => ("arrive", i),
            SimEventKind::Admit(i) => ("admit", i),
            SimEventKind::Drop(i) => ("drop", i),
            SimEventKind::Complete(i) => ("complete", i),
        };
        println!("t={:<4} {:<9} frame {:<3} in flight {}", e.time, what, frame, e.in_flight);
    }
    println!(
        "admitted {} dropped {} (max in flight {})",
        report.admitted.len(),
        report.dropped.len(),
        report.max_in_flight_seen
    );
}
