//! Repeating a soft measurement sharpens the outcome distribution.

use collapse_sim::constants::Constants;
use collapse_sim::harness::{asymmetry_sweep, Family};
use collapse_sim::pathspace::Axis;

fn main() {
    let family = Family::Repeated {
        axis: Axis::Z,
        strength: 1.0,
        sharpness: 0.8,
    };
    let ks = [1.0, 2.0, 4.0, 8.0, 16.0];
    let r = asymmetry_sweep(&family, &ks, 10_000, 0, Constants::default()).unwrap();
    println!("k\tpeak\tse");
    for i in 0..ks.len() {
        println!("{}\t{:.4}\t{:.4}", ks[i], r.metrics[i], r.std_errors[i]);
    }
    println!("nondecreasing within one SE: {}", r.nondecreasing);
}
