//! Spin up along x through a z magnet, twice: the first reading is a coin
//! flip, the second always repeats it.

use collapse_sim::constants::ParticleType;
use collapse_sim::pathspace::{Axis, EntanglementRegistry};
use collapse_sim::pipeline::{run_measurement, spin_input, stern_gerlach_scenario};
use collapse_sim::trace::TracedRng;

fn main() {
    let apparatus = stern_gerlach_scenario(Axis::Z, 1.0);
    let mut engine = apparatus.engine().unwrap();
    let (mut ups, mut repeats) = (0, 0);
    let n = 5000;
    for t in 0..n {
        let mut reg = EntanglementRegistry::default();
        let mut rng = TracedRng::for_trial(9, t);
        let p = reg.spawn(ParticleType::Electron, spin_input(Axis::X, Axis::Z)).unwrap();
        let a = run_measurement(&apparatus, &mut engine, &mut reg, p, &mut rng).unwrap();
        let b = run_measurement(&apparatus, &mut engine, &mut reg, a.particle, &mut rng).unwrap();
        ups += usize::from(a.record.detector_label == "up");
        repeats += usize::from(a.record.detector_label == b.record.detector_label);
        if t == 0 {
            println!("first trial: {}", serde_json::to_string(&a.record).unwrap());
        }
    }
    println!("up fraction {:.4}, repeated {repeats}/{n}", ups as f64 / n as f64);
}
