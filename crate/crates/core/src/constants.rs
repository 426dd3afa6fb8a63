//! Particle catalogue and physical constants (natural units, energies in MeV).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const ELECTRON_MASS: f64 = 0.5110;
pub const MUON_MASS: f64 = 105.66;
pub const TAU_MASS: f64 = 1776.9;
pub const FINE_STRUCTURE: f64 = 1.0 / 137.035999;

/// Mass table and electromagnetic coupling. Scenario files may override any entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub electron_mass: f64,
    pub muon_mass: f64,
    pub tau_mass: f64,
    pub alpha: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            electron_mass: ELECTRON_MASS,
            muon_mass: MUON_MASS,
            tau_mass: TAU_MASS,
            alpha: FINE_STRUCTURE,
        }
    }
}

impl Constants {
    pub fn mass(&self, ptype: ParticleType) -> f64 {
        match ptype.flavor() {
            Some(Flavor::Electron) => self.electron_mass,
            Some(Flavor::Muon) => self.muon_mass,
            Some(Flavor::Tau) => self.tau_mass,
            None => 0.0,
        }
    }

    /// Electric coupling `e = sqrt(4 pi alpha)`.
    pub fn coupling(&self) -> f64 {
        (4.0 * std::f64::consts::PI * self.alpha).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flavor {
    Electron,
    Muon,
    Tau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParticleType {
    Electron,
    Positron,
    MuonMinus,
    MuonPlus,
    TauonMinus,
    TauonPlus,
    Photon,
}

impl ParticleType {
    pub const ALL: [ParticleType; 7] = [
        ParticleType::Electron,
        ParticleType::Positron,
        ParticleType::MuonMinus,
        ParticleType::MuonPlus,
        ParticleType::TauonMinus,
        ParticleType::TauonPlus,
        ParticleType::Photon,
    ];

    pub fn flavor(self) -> Option<Flavor> {
        use ParticleType::*;
        match self {
            Electron | Positron => Some(Flavor::Electron),
            MuonMinus | MuonPlus => Some(Flavor::Muon),
            TauonMinus | TauonPlus => Some(Flavor::Tau),
            Photon => None,
        }
    }

    pub fn is_antiparticle(self) -> bool {
        matches!(
            self,
            ParticleType::Positron | ParticleType::MuonPlus | ParticleType::TauonPlus
        )
    }

    pub fn is_lepton(self) -> bool {
        self.flavor().is_some()
    }

    /// Negatively charged lepton of a flavor.
    pub fn lepton(flavor: Flavor) -> Self {
        match flavor {
            Flavor::Electron => ParticleType::Electron,
            Flavor::Muon => ParticleType::MuonMinus,
            Flavor::Tau => ParticleType::TauonMinus,
        }
    }

    /// Positively charged antilepton of a flavor.
    pub fn antilepton(flavor: Flavor) -> Self {
        match flavor {
            Flavor::Electron => ParticleType::Positron,
            Flavor::Muon => ParticleType::MuonPlus,
            Flavor::Tau => ParticleType::TauonPlus,
        }
    }

    pub fn name(self) -> &'static str {
        use ParticleType::*;
        match self {
            Electron => "electron",
            Positron => "positron",
            MuonMinus => "muon-",
            MuonPlus => "muon+",
            TauonMinus => "tauon-",
            TauonPlus => "tauon+",
            Photon => "photon",
        }
    }

    /// Forces the particle couples to. Every charged lepton and the photon are
    /// electro-weak only; gravity is listed for completeness but never interacts.
    pub fn force_tags(self) -> Vec<ForceTag> {
        vec![ForceTag::ElectroWeak, ForceTag::Gravity]
    }
}

impl fmt::Display for ParticleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParticleType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParticleType::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown particle type `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ForceTag {
    ElectroWeak,
    Strong,
    Gravity,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masses_follow_flavor() {
        let c = Constants::default();
        assert_eq!(c.mass(ParticleType::Electron), c.mass(ParticleType::Positron));
        assert_eq!(c.mass(ParticleType::TauonPlus), TAU_MASS);
        assert_eq!(c.mass(ParticleType::Photon), 0.0);
    }

    #[test]
    fn names_round_trip() {
        for p in ParticleType::ALL {
            assert_eq!(p.name().parse::<ParticleType>().unwrap(), p);
        }
        assert!("quark".parse::<ParticleType>().is_err());
    }

    #[test]
    fn default_coupling() {
        let e = Constants::default().coupling();
        assert!((e * e / (4.0 * std::f64::consts::PI) - FINE_STRUCTURE).abs() < 1e-15);
    }
}
