use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::quadrature::gauss_legendre;
use super::{
    direction, spin_averaged_sqr, two_body_momentum, Couplings, Diagrams, FourMomentum, LeptonState, PairState,
    QftError, SpinLabel,
};
use crate::constants::{Constants, Flavor, ParticleType};
use crate::pathspace::Axis;

/// Exit particle-type pair of a lepton-antilepton interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Channel {
    pub fermion: ParticleType,
    pub antifermion: ParticleType,
}

impl Channel {
    pub fn pair(flavor: Flavor) -> Self {
        Self {
            fermion: ParticleType::lepton(flavor),
            antifermion: ParticleType::antilepton(flavor),
        }
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.fermion, self.antifermion)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let short = match s {
            "ee" => Some(Flavor::Electron),
            "mumu" => Some(Flavor::Muon),
            "tautau" => Some(Flavor::Tau),
            _ => None,
        };
        if let Some(f) = short {
            return Ok(Channel::pair(f));
        }
        let (a, b) = s.split_once('/').ok_or_else(|| format!("bad channel `{s}`"))?;
        Ok(Channel {
            fermion: a.parse()?,
            antifermion: b.parse()?,
        })
    }
}

/// Candidate exit channels for an entry pair, in a fixed order.
pub fn candidate_channels(entry: (ParticleType, ParticleType)) -> Vec<Channel> {
    let mut out = Vec::new();
    let mut push = |c: Channel| {
        if !out.contains(&c) && Diagrams::for_process(entry, (c.fermion, c.antifermion)).is_ok() {
            out.push(c);
        }
    };
    push(Channel {
        fermion: entry.0,
        antifermion: entry.1,
    });
    for f in [Flavor::Electron, Flavor::Muon, Flavor::Tau] {
        push(Channel::pair(f));
    }
    out
}

/// Angular integration settings for [`channel_weights`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelQuadrature {
    /// Gauss-Legendre order.
    pub nodes: usize,
    /// `|cos theta|` bound applied to channels with a t-channel pole.
    pub forward_cutoff: f64,
}

impl Default for ChannelQuadrature {
    fn default() -> Self {
        Self {
            nodes: 64,
            forward_cutoff: 0.999,
        }
    }
}

/// Probability of each exit channel at centre-of-mass energy `sqrt_s`.
///
/// A channel's weight is proportional to its final-state momentum times the
/// spin-averaged `|M|^2` integrated over the exit solid angle; closed channels
/// get zero. The t-channel pole of elastic scattering is integrated in the
/// variable `ln(1 - cos theta)` over `|cos theta| <= forward_cutoff`, other
/// channels use the full range in `cos theta`.
pub fn channel_weights(
    entry: (ParticleType, ParticleType),
    sqrt_s: f64,
    constants: &Constants,
    couplings: &Couplings,
    quadrature: ChannelQuadrature,
) -> Result<Vec<(Channel, f64)>, QftError> {
    let (m1, m2) = (constants.mass(entry.0), constants.mass(entry.1));
    let k_in = two_body_momentum(sqrt_s, m1, m2).ok_or(QftError::BelowThreshold { sqrt_s })?;
    let in_pair = PairState {
        fermion: lepton(entry.0, m1, [0.0, 0.0, k_in]),
        antifermion: lepton(entry.1, m2, [0.0, 0.0, -k_in]),
    };
    let channels = candidate_channels(entry);
    let mut weights = Vec::with_capacity(channels.len());
    for c in channels {
        let (n1, n2) = (constants.mass(c.fermion), constants.mass(c.antifermion));
        let w = match two_body_momentum(sqrt_s, n1, n2) {
            None => 0.0,
            Some(k_out) => {
                let diagrams = Diagrams::for_process(entry, (c.fermion, c.antifermion))?;
                let msq = |cos: f64| -> Result<f64, QftError> {
                    let d = direction(cos, 0.0);
                    let exit = PairState {
                        fermion: lepton(c.fermion, n1, [k_out * d[0], k_out * d[1], k_out * d[2]]),
                        antifermion: lepton(c.antifermion, n2, [-k_out * d[0], -k_out * d[1], -k_out * d[2]]),
                    };
                    spin_averaged_sqr(&in_pair, &exit, couplings)
                };
                let (x, wq) = gauss_legendre(quadrature.nodes);
                let mut integral = 0.0;
                if diagrams.exchange {
                    let c = quadrature.forward_cutoff;
                    let (lo, hi) = ((1.0 - c).ln(), (1.0 + c).ln());
                    let (half, mid) = (0.5 * (hi - lo), 0.5 * (hi + lo));
                    for (xi, wi) in x.iter().zip(&wq) {
                        let y = mid + half * xi;
                        let one_minus = y.exp();
                        integral += wi * half * msq(1.0 - one_minus)? * one_minus;
                    }
                } else {
                    for (xi, wi) in x.iter().zip(&wq) {
                        integral += wi * msq(*xi)?;
                    }
                }
                2.0 * std::f64::consts::PI * k_out * integral
            }
        };
        weights.push((c, w));
    }
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(QftError::NoOpenChannel { sqrt_s });
    }
    for (_, w) in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

fn lepton(ptype: ParticleType, mass: f64, p: [f64; 3]) -> LeptonState {
    LeptonState {
        ptype,
        mass,
        momentum: FourMomentum::on_shell(mass, p),
        spin: SpinLabel::up(Axis::Z),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ParticleType::*;

    fn weights(sqrt_s: f64, nodes: usize) -> Vec<(Channel, f64)> {
        channel_weights(
            (Electron, Positron),
            sqrt_s,
            &Constants::default(),
            &Couplings::default(),
            ChannelQuadrature {
                nodes,
                forward_cutoff: 0.999,
            },
        )
        .unwrap()
    }

    #[test]
    fn below_muon_threshold_only_electrons() {
        let w = weights(100.0, 64);
        assert_eq!(w[0], (Channel::pair(Flavor::Electron), 1.0));
        assert!(w[1..].iter().all(|(_, x)| *x == 0.0));
    }

    #[test]
    fn muon_weight_grows_from_threshold() {
        let thr = 2.0 * 105.66;
        let a = weights(thr + 0.5, 64)[1].1;
        let b = weights(thr + 5.0, 64)[1].1;
        assert!(a > 0.0 && a < b && b < 0.01, "{a} {b}");
    }

    #[test]
    fn weights_normalized_and_converged() {
        for sqrt_s in [300.0, 4000.0] {
            let w64 = weights(sqrt_s, 64);
            let w128 = weights(sqrt_s, 128);
            assert!((w64.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
            for (a, b) in w64.iter().zip(&w128) {
                assert!((a.1 - b.1).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn zero_coupling_has_no_open_channel() {
        let r = channel_weights(
            (Electron, Positron),
            500.0,
            &Constants::default(),
            &Couplings { e: 0.0 },
            ChannelQuadrature::default(),
        );
        assert_eq!(r, Err(QftError::NoOpenChannel { sqrt_s: 500.0 }));
    }

    #[test]
    fn below_pair_threshold() {
        let r = channel_weights(
            (Electron, Positron),
            1.0,
            &Constants::default(),
            &Couplings::default(),
            ChannelQuadrature::default(),
        );
        assert_eq!(r, Err(QftError::BelowThreshold { sqrt_s: 1.0 }));
    }

    #[test]
    fn different_flavors_scatter_elastically() {
        assert_eq!(
            candidate_channels((Electron, MuonPlus)),
            vec![Channel {
                fermion: Electron,
                antifermion: MuonPlus
            }]
        );
        assert_eq!(candidate_channels((Electron, Positron)).len(), 3);
    }

    #[test]
    fn channel_parsing() {
        assert_eq!("mumu".parse::<Channel>().unwrap(), Channel::pair(Flavor::Muon));
        assert_eq!(
            "electron/muon+".parse::<Channel>().unwrap(),
            Channel {
                fermion: Electron,
                antifermion: MuonPlus
            }
        );
    }
}
