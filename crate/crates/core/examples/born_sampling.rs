//! Draw rows of a four-path table and compare frequencies with |a|^2.

use collapse_sim::pathspace::{born_probabilities, Amplitude, PathRow, PathSampler, PathState, PathTable, StateComponent};
use collapse_sim::trace::{Decision, TracedRng};

fn main() {
    let amps = [(0.5, 0.0), (0.0, 0.5), (0.5, 0.5), (-0.5, 0.0)];
    let rows = amps
        .iter()
        .enumerate()
        .map(|(i, &(re, im))| {
            let s = PathState::new(vec![StateComponent::Position([i as f64, 0.0, 0.0])]).unwrap();
            PathRow::single(s, Amplitude::new(re, im))
        })
        .collect();
    let table = PathTable::new(1, rows).unwrap();
    let probs = born_probabilities(&table).unwrap();
    let sampler = PathSampler::new(&table).unwrap();

    let n = 200_000;
    let mut rng = TracedRng::from_seed(1).without_trace();
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..n {
        counts[sampler.sample(&mut rng, Decision::Sample)] += 1;
    }
    println!("row\tborn\tobserved");
    for (i, (p, c)) in probs.iter().zip(&counts).enumerate() {
        println!("{i}\t{p:.4}\t{:.4}", *c as f64 / n as f64);
    }
}
