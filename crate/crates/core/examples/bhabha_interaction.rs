//! One full interaction between an electron and a positron: the six logged
//! actions, the three draws, and the exit collection it leaves behind.

use collapse_sim::constants::ParticleType;
use collapse_sim::engine::{InteractionConfig, InteractionEngine};
use collapse_sim::pathspace::{Amplitude, Axis, EntanglementRegistry, PathState, Spin, StateComponent};
use collapse_sim::trace::TracedRng;

fn beam(pz: f64, up: bool) -> Vec<(PathState, Amplitude)> {
    let spin = if up { Spin::up(Axis::Z) } else { Spin::down(Axis::Z) };
    let s = PathState::new(vec![
        StateComponent::Position([0.0; 3]),
        StateComponent::Momentum([0.0, 0.0, pz]),
        StateComponent::Spin(spin),
    ])
    .unwrap();
    vec![(s, Amplitude::new(1.0, 0.0))]
}

fn main() {
    let mut reg = EntanglementRegistry::default();
    let e = reg.spawn(ParticleType::Electron, beam(150.0, true)).unwrap();
    let p = reg.spawn(ParticleType::Positron, beam(-150.0, false)).unwrap();
    let mut engine = InteractionEngine::new(InteractionConfig::default()).unwrap();
    let mut rng = TracedRng::for_trial(2025, 0);

    let r = engine.run_interaction(&mut reg, e, p, &mut rng).unwrap();
    for line in &r.log {
        println!("{line}");
    }
    let exit = reg.collection(r.exit_collection).unwrap();
    println!(
        "exit {:?}: {} rows over {} members; entry total {:?}",
        r.exit_types,
        exit.table().rows().len(),
        exit.members().len(),
        r.entry_total().unwrap()
    );
    reg.audit().unwrap();
}
