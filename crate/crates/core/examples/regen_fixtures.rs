//! Rewrites the bundled fixture files from their generators.
//!
//! `cargo run -p gridplan --example regen_fixtures`

use std::path::Path;

use gridplan::io::{build_ieee9_mod, build_toy3, scenario_to_json, write_atomic};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for s in [build_ieee9_mod(), build_toy3()] {
        let path = dir.join(format!("{}.json", s.name));
        write_atomic(&path, scenario_to_json(&s).as_bytes()).expect("write fixture");
        println!("{}", path.display());
    }
}
