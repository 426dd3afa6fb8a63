//! Anticorrelated pair measured along the same axis on both sides.

use collapse_sim::harness::{correlation, Experiment, Setup};
use collapse_sim::pathspace::Axis;
use collapse_sim::pipeline::epr_scenario;

fn main() {
    let exp = Experiment::new(Setup::Epr {
        setup: epr_scenario(Axis::Z, Axis::Z, 1.0),
        b_first: false,
    });
    let mut engine = exp.engine().unwrap();
    let sign = |l: &str| if l == "up" { 1.0 } else { -1.0 };
    let pairs: Vec<(f64, f64)> = (0..10_000)
        .map(|t| {
            let o = exp.run_trial(&mut engine, 4, t, false).unwrap();
            (sign(&o.records[0].detector_label), sign(&o.records[1].detector_label))
        })
        .collect();
    println!("correlation over {} pairs: {}", pairs.len(), correlation(&pairs).unwrap());

    // measuring B along another axis is outside the model
    let misaligned = Experiment::new(Setup::Epr {
        setup: epr_scenario(Axis::Z, Axis::X, 1.0),
        b_first: false,
    });
    let mut engine = misaligned.engine().unwrap();
    match misaligned.run_trial(&mut engine, 4, 0, false) {
        Ok(_) => println!("misaligned bases measured"),
        Err(e) => println!("misaligned bases: {e}"),
    }
}
