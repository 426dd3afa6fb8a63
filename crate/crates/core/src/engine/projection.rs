use std::f64::consts::PI;

use super::{EngineError, InteractionConfig};
use crate::constants::{Constants, ParticleType};
use crate::pathspace::{Amplitude, Axis, ComponentKind, ParticleId, PathRow, PathState, StateComponent};
use crate::qft::{
    bhabha_amplitude, conserves, two_body_final_state, Channel, FourMomentum, LeptonState, PairState, SpinLabel,
};

/// Discretized exit kinematics: `cos_bins x phi_bins` angular cells in the
/// centre-of-mass frame times the two spin labels of each exit particle.
///
/// The polar angle is measured from the entry fermion's direction in the
/// centre-of-mass frame; cells cover `[-cos_max, cos_max] x [0, 2 pi)` and are
/// represented by their centres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitGrid {
    pub cos_bins: usize,
    pub phi_bins: usize,
    pub cos_max: f64,
    pub spin_axis: Axis,
}

impl Default for ExitGrid {
    fn default() -> Self {
        Self {
            cos_bins: 16,
            phi_bins: 8,
            cos_max: 0.999,
            spin_axis: Axis::Z,
        }
    }
}

impl ExitGrid {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.cos_bins == 0 || self.phi_bins == 0 {
            return Err(EngineError::InvalidConfig("exit grid needs at least one bin".into()));
        }
        if !(self.cos_max > 0.0 && self.cos_max <= 1.0) {
            return Err(EngineError::InvalidConfig("cos_max must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// `(cos theta, phi)` cell centres, cos-major.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let dc = 2.0 * self.cos_max / self.cos_bins as f64;
        let dp = 2.0 * PI / self.phi_bins as f64;
        let mut out = Vec::with_capacity(self.cos_bins * self.phi_bins);
        for i in 0..self.cos_bins {
            let c = -self.cos_max + (i as f64 + 0.5) * dc;
            for j in 0..self.phi_bins {
                out.push((c, (j as f64 + 0.5) * dp));
            }
        }
        out
    }

    /// Index of the cos bin containing `c`, if inside the declared range.
    pub fn cos_bin(&self, c: f64) -> Option<usize> {
        if !(c >= -self.cos_max && c <= self.cos_max) {
            return None;
        }
        let dc = 2.0 * self.cos_max / self.cos_bins as f64;
        Some((((c + self.cos_max) / dc) as usize).min(self.cos_bins - 1))
    }

    pub fn len(&self) -> usize {
        self.cos_bins * self.phi_bins * 4
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One definite entry particle line handed to the projection.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryLine {
    pub particle: ParticleId,
    pub ptype: ParticleType,
    pub mass: f64,
    pub state: PathState,
}

impl EntryLine {
    fn momentum(&self) -> Result<FourMomentum, EngineError> {
        let p = self.state.momentum().ok_or(self.missing(ComponentKind::Momentum))?;
        Ok(FourMomentum::on_shell(self.mass, p))
    }

    fn spin(&self) -> Result<SpinLabel, EngineError> {
        let s = self.state.spin().ok_or(self.missing(ComponentKind::Spin))?;
        Ok(SpinLabel::try_from(s)?)
    }

    fn lepton(&self) -> Result<LeptonState, EngineError> {
        Ok(LeptonState {
            ptype: self.ptype,
            mass: self.mass,
            momentum: self.momentum()?,
            spin: self.spin()?,
        })
    }

    fn missing(&self, kind: ComponentKind) -> EngineError {
        EngineError::MissingComponent {
            particle: self.particle,
            kind,
        }
    }
}

/// Exit rows of a lepton-antilepton interaction at definite entry states.
///
/// Every grid cell and exit spin pair becomes a row carrying the tree-level
/// amplitude at the cell centre. Rows that miss four-momentum conservation by
/// more than `config.tolerance` per component, or whose amplitude vanishes,
/// are left out. Row states are `[fermion, antifermion]`, both at the entry
/// fermion's position.
pub fn probabilistic_projection(
    entry: [&EntryLine; 2],
    channel: Channel,
    config: &InteractionConfig,
    constants: &Constants,
) -> Result<Vec<PathRow>, EngineError> {
    config.grid.validate()?;
    let [a, b] = entry;
    let (f, af) = if a.ptype.is_antiparticle() { (b, a) } else { (a, b) };
    let in_pair = PairState {
        fermion: f.lepton()?,
        antifermion: af.lepton()?,
    };
    let position = f.state.position().ok_or(f.missing(ComponentKind::Position))?;
    let total = in_pair.total();
    let (m3, m4) = (constants.mass(channel.fermion), constants.mass(channel.antifermion));

    let beta = total.velocity();
    let axis = cm_direction(&in_pair.fermion.momentum.boost([-beta[0], -beta[1], -beta[2]]));
    let (e1, e2) = perpendicular_pair(axis);

    let mut rows = Vec::new();
    for (c, phi) in config.grid.cells() {
        let s = (1.0 - c * c).max(0.0).sqrt();
        let (sx, sy) = (s * phi.cos(), s * phi.sin());
        let dir: [f64; 3] = std::array::from_fn(|k| sx * e1[k] + sy * e2[k] + c * axis[k]);
        let Some((p3, p4)) = two_body_final_state(total, m3, m4, dir) else {
            return Err(EngineError::NoOpenExitStates);
        };
        if !conserves(&total, &(p3 + p4), config.tolerance) {
            continue;
        }
        for s3 in SpinLabel::both(config.grid.spin_axis) {
            for s4 in SpinLabel::both(config.grid.spin_axis) {
                let out = PairState {
                    fermion: LeptonState {
                        ptype: channel.fermion,
                        mass: m3,
                        momentum: p3,
                        spin: s3,
                    },
                    antifermion: LeptonState {
                        ptype: channel.antifermion,
                        mass: m4,
                        momentum: p4,
                        spin: s4,
                    },
                };
                let amp = bhabha_amplitude(&in_pair, &out, &config.couplings)?;
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                rows.push(PathRow::new(
                    vec![exit_state(position, &p3, s3), exit_state(position, &p4, s4)],
                    amp,
                ));
            }
        }
    }
    if rows.is_empty() {
        return Err(EngineError::NoOpenExitStates);
    }
    Ok(rows)
}

fn exit_state(position: [f64; 3], p: &FourMomentum, s: SpinLabel) -> PathState {
    PathState::new(vec![
        StateComponent::Position(position),
        StateComponent::Momentum(p.p),
        StateComponent::Spin(s.into()),
    ])
    .expect("distinct component kinds")
}

fn cm_direction(p: &FourMomentum) -> [f64; 3] {
    let n = p.p_abs();
    if n > 0.0 {
        p.p.map(|x| x / n)
    } else {
        [0.0, 0.0, 1.0]
    }
}

/// Two unit vectors completing `n` to a right-handed orthonormal basis.
fn perpendicular_pair(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = helper[0] * n[0] + helper[1] * n[1] + helper[2] * n[2];
    let mut e1: [f64; 3] = std::array::from_fn(|k| helper[k] - d * n[k]);
    let len = e1.iter().map(|x| x * x).sum::<f64>().sqrt();
    e1 = e1.map(|x| x / len);
    let e2 = [
        n[1] * e1[2] - n[2] * e1[1],
        n[2] * e1[0] - n[0] * e1[2],
        n[0] * e1[1] - n[1] * e1[0],
    ];
    (e1, e2)
}

/// Declared projection rule for interactions with a classical object such as
/// a field or a screen: maps one definite entry state to weighted exit states.
pub trait AmplitudeMap {
    fn project(&self, entry: &PathState) -> Result<Vec<(PathState, Amplitude)>, EngineError>;

    fn describe(&self) -> String {
        "declared map".into()
    }
}

impl<F> AmplitudeMap for F
where
    F: Fn(&PathState) -> Result<Vec<(PathState, Amplitude)>, EngineError>,
{
    fn project(&self, entry: &PathState) -> Result<Vec<(PathState, Amplitude)>, EngineError> {
        self(entry)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathspace::{born_probabilities, PathTable, Spin};
    use crate::qft::Couplings;

    fn line(ptype: ParticleType, p: [f64; 3], up: bool) -> EntryLine {
        let spin = if up { Spin::up(Axis::Z) } else { Spin::down(Axis::Z) };
        EntryLine {
            particle: ParticleId(0),
            ptype,
            mass: Constants::default().mass(ptype),
            state: PathState::new(vec![
                StateComponent::Position([0.0; 3]),
                StateComponent::Momentum(p),
                StateComponent::Spin(spin),
            ])
            .unwrap(),
        }
    }

    fn ee() -> Channel {
        Channel {
            fermion: ParticleType::Electron,
            antifermion: ParticleType::Positron,
        }
    }

    #[test]
    fn zero_coupling_closes_everything() {
        let cfg = InteractionConfig {
            couplings: Couplings { e: 0.0 },
            ..Default::default()
        };
        let a = line(ParticleType::Electron, [0.0, 0.0, 50.0], true);
        let b = line(ParticleType::Positron, [0.0, 0.0, -50.0], false);
        assert_eq!(
            probabilistic_projection([&a, &b], ee(), &cfg, &Constants::default()),
            Err(EngineError::NoOpenExitStates)
        );
    }

    #[test]
    fn weights_match_cellwise_reevaluation() {
        let cfg = InteractionConfig {
            grid: ExitGrid {
                cos_bins: 8,
                phi_bins: 8,
                ..Default::default()
            },
            ..Default::default()
        };
        let k = Constants::default();
        let a = line(ParticleType::Electron, [3.0, -2.0, 80.0], true);
        let b = line(ParticleType::Positron, [1.0, 0.5, -60.0], true);
        let rows = probabilistic_projection([&b, &a], ee(), &cfg, &k).unwrap();
        let table = PathTable::new(2, rows.clone()).unwrap();
        let probs = born_probabilities(&table).unwrap();
        // oracle: rebuild every row's amplitude from its stored exit states
        let in_pair = PairState {
            fermion: a.lepton().unwrap(),
            antifermion: b.lepton().unwrap(),
        };
        let mut direct = Vec::new();
        for r in &rows {
            let mk = |st: &PathState, t: ParticleType| LeptonState {
                ptype: t,
                mass: k.mass(t),
                momentum: FourMomentum::on_shell(k.mass(t), st.momentum().unwrap()),
                spin: SpinLabel::try_from(st.spin().unwrap()).unwrap(),
            };
            let out = PairState {
                fermion: mk(&r.states[0], ParticleType::Electron),
                antifermion: mk(&r.states[1], ParticleType::Positron),
            };
            direct.push(bhabha_amplitude(&in_pair, &out, &cfg.couplings).unwrap().norm_sqr());
        }
        let total: f64 = direct.iter().sum();
        for (p, d) in probs.iter().zip(&direct) {
            assert!((p - d / total).abs() <= 1e-9 * p.max(1e-12), "{p} vs {}", d / total);
        }
        for r in &rows {
            let sum = FourMomentum::on_shell(k.mass(ParticleType::Electron), r.states[0].momentum().unwrap())
                + FourMomentum::on_shell(k.mass(ParticleType::Positron), r.states[1].momentum().unwrap());
            assert!(conserves(&in_pair.total(), &sum, 1e-9));
        }
    }

    #[test]
    fn closed_channel_has_no_exit_states() {
        let cfg = InteractionConfig::default();
        let a = line(ParticleType::Electron, [0.0, 0.0, 10.0], true);
        let b = line(ParticleType::Positron, [0.0, 0.0, -10.0], true);
        let mumu = Channel {
            fermion: ParticleType::MuonMinus,
            antifermion: ParticleType::MuonPlus,
        };
        assert_eq!(
            probabilistic_projection([&a, &b], mumu, &cfg, &Constants::default()),
            Err(EngineError::NoOpenExitStates)
        );
    }

    #[test]
    fn toy_map_two_cells() {
        let st = |x: f64| PathState::new(vec![StateComponent::Position([x, 0.0, 0.0])]).unwrap();
        let map = |_: &PathState| -> Result<Vec<(PathState, Amplitude)>, EngineError> {
            Ok(vec![(st(0.0), Amplitude::new(1.0, 0.0)), (st(1.0), Amplitude::new(0.0, 1.0))])
        };
        let rows = map.project(&st(0.0)).unwrap();
        let t = PathTable::new(1, rows.into_iter().map(|(s, a)| PathRow::single(s, a)).collect()).unwrap();
        assert_eq!(born_probabilities(&t).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn grid_cells_cover_range() {
        let g = ExitGrid::default();
        let cells = g.cells();
        assert_eq!(cells.len(), 128);
        assert!(cells.iter().all(|(c, p)| c.abs() < g.cos_max && (0.0..2.0 * PI).contains(p)));
        assert_eq!(g.cos_bin(-0.999), Some(0));
        assert_eq!(g.cos_bin(0.999), Some(15));
        assert_eq!(g.cos_bin(1.0), None);
    }

    #[test]
    fn basis_is_orthonormal() {
        for n in [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.6, 0.0, 0.8]] {
            let (a, b) = perpendicular_pair(n);
            let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
            assert!(dot(a, n).abs() < 1e-15 && dot(b, n).abs() < 1e-15 && dot(a, b).abs() < 1e-15);
            assert!((dot(b, b) - 1.0).abs() < 1e-15);
        }
    }
}
