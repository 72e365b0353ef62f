use gridplan::expansion::{build_planning_model, ModelOptions};
use gridplan::io::{fixture, FIXTURES};

fn main() {
    for name in FIXTURES {
        for hp in [false, true] {
            let mut s = fixture(name).unwrap();
            s.heat_pump.enabled = hp;
            let pm = build_planning_model(&s, ModelOptions::default()).unwrap();
            println!("{name} hp={hp}: {:?}", pm.census);
        }
    }
}
