//! Compile an atlas file and show the census, evaluation order and the
//! complexity class of every definition.
//!
//! ```text
//! cargo run --example validate_atlas -- data/bench_atlas.csv
//! ```

use faceatlas::adl::{census, load_atlas};
use faceatlas::fixture;

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).expect("readable atlas file"),
        None => fixture::SAMPLE_ATLAS_CSV.to_string(),
    };
    let program = match load_atlas(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    println!("{}\n", census(&program));
    for id in program.evaluation_order_ids() {
        let def = program.get(id).unwrap();
        println!(
            "{:<6} {:<12} x = {:<32} y = {}",
            id.to_string(),
            program.complexity(id).unwrap().label(),
            def.expr_x.to_string(),
            def.expr_y
        );
    }
}
