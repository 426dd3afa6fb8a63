//! Spin-averaged e- e+ -> e- e+ |M|^2 across angles at sqrt(s) = 1 GeV,
//! next to the massless textbook formula.

use collapse_sim::constants::{Constants, ParticleType};
use collapse_sim::pathspace::Axis;
use collapse_sim::qft::{direction, mandelstam_st, spin_averaged_sqr, Couplings, FourMomentum, LeptonState, PairState, SpinLabel};

fn lepton(ptype: ParticleType, m: f64, p: [f64; 3]) -> LeptonState {
    LeptonState {
        ptype,
        mass: m,
        momentum: FourMomentum::on_shell(m, p),
        spin: SpinLabel::up(Axis::Z),
    }
}

fn main() {
    let m = Constants::default().electron_mass;
    let c = Couplings::default();
    let k = 500.0;
    let entry = PairState {
        fermion: lepton(ParticleType::Electron, m, [0.0, 0.0, k]),
        antifermion: lepton(ParticleType::Positron, m, [0.0, 0.0, -k]),
    };
    println!("cos\t<|M|^2>\tmassless");
    for i in 0..9 {
        let cos = -0.9 + 0.225 * i as f64;
        let d = direction(cos, 0.3);
        let exit = PairState {
            fermion: lepton(ParticleType::Electron, m, [k * d[0], k * d[1], k * d[2]]),
            antifermion: lepton(ParticleType::Positron, m, [-k * d[0], -k * d[1], -k * d[2]]),
        };
        let got = spin_averaged_sqr(&entry, &exit, &c).unwrap();
        let (s, t) = mandelstam_st(&entry, &exit);
        let u = -s - t;
        let e4 = c.e.powi(4);
        let textbook = 2.0 * e4 * ((s * s + u * u) / (t * t) + 2.0 * u * u / (s * t) + (u * u + t * t) / (s * s));
        println!("{cos:+.3}\t{got:.6e}\t{textbook:.6e}");
    }
}
