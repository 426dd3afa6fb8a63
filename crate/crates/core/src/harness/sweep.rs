use std::fmt;
use std::str::FromStr;

use super::{peak_metric, run_trials, Experiment, HarnessError, OutcomeHistogram, Setup};
use crate::constants::{Constants, ParticleType};
use crate::engine::InteractionConfig;
use crate::pathspace::Axis;
use crate::pipeline::{beam_scenario, repeated_field_scenario, spin_input};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    MassRatio,
    EnergyRatio,
    RepetitionCount,
}

impl SweepParameter {
    pub fn keyword(&self) -> &'static str {
        match self {
            SweepParameter::MassRatio => "mass_ratio",
            SweepParameter::EnergyRatio => "energy_ratio",
            SweepParameter::RepetitionCount => "repetitions",
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for SweepParameter {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mass_ratio" => Ok(SweepParameter::MassRatio),
            "energy_ratio" => Ok(SweepParameter::EnergyRatio),
            "repetitions" | "repetition_count" => Ok(SweepParameter::RepetitionCount),
            _ => Err(HarnessError::InvalidParameter(format!("unknown sweep parameter `{s}`"))),
        }
    }
}

/// A scenario family with one free asymmetry parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `k` soft fields on a spin-up eigenstate; the parameter is `k`.
    Repeated { axis: Axis, strength: f64, sharpness: f64 },
    /// Electron with momentum `p_projectile` on an antimuon at rest whose
    /// mass is the parameter times the electron mass.
    MassRatio {
        p_projectile: f64,
        detector_bins: usize,
        config: InteractionConfig,
    },
    /// Head-on electron and positron with `E(e+) = ratio * E(e-)`.
    EnergyRatio {
        p_projectile: f64,
        detector_bins: usize,
        config: InteractionConfig,
    },
}

impl Family {
    pub fn parameter(&self) -> SweepParameter {
        match self {
            Family::Repeated { .. } => SweepParameter::RepetitionCount,
            Family::MassRatio { .. } => SweepParameter::MassRatio,
            Family::EnergyRatio { .. } => SweepParameter::EnergyRatio,
        }
    }

    pub fn experiment(&self, value: f64, constants: Constants) -> Result<Experiment, HarnessError> {
        let bad = || HarnessError::InvalidParameter(format!("{} = {value} is out of range", self.parameter()));
        if !(value.is_finite() && value > 0.0) {
            return Err(bad());
        }
        let mut constants = constants;
        let setup = match self {
            Family::Repeated {
                axis,
                strength,
                sharpness,
            } => {
                if value.fract() != 0.0 {
                    return Err(bad());
                }
                Setup::Single {
                    ptype: ParticleType::Electron,
                    input: spin_input(*axis, *axis),
                    apparatus: repeated_field_scenario(*axis, *strength, *sharpness, value as usize),
                    repeats: 1,
                }
            }
            Family::MassRatio {
                p_projectile,
                detector_bins,
                config,
            } => {
                constants.muon_mass = value * constants.electron_mass;
                let b = beam_scenario(
                    ParticleType::Electron,
                    *p_projectile,
                    ParticleType::MuonPlus,
                    0.0,
                    config.clone(),
                    *detector_bins,
                );
                Setup::Single {
                    ptype: b.projectile,
                    input: b.input_rows,
                    apparatus: b.apparatus,
                    repeats: 1,
                }
            }
            Family::EnergyRatio {
                p_projectile,
                detector_bins,
                config,
            } => {
                let m = constants.electron_mass;
                let e_target = value * (p_projectile * p_projectile + m * m).sqrt();
                if e_target < m {
                    return Err(bad());
                }
                let p_target = (e_target * e_target - m * m).sqrt();
                let b = beam_scenario(
                    ParticleType::Electron,
                    *p_projectile,
                    ParticleType::Positron,
                    p_target,
                    config.clone(),
                    *detector_bins,
                );
                Setup::Single {
                    ptype: b.projectile,
                    input: b.input_rows,
                    apparatus: b.apparatus,
                    repeats: 1,
                }
            }
        };
        Ok(Experiment { constants, setup })
    }
}

/// Peak metric per parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakReport {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub metrics: Vec<f64>,
    /// Binomial standard error of each metric.
    pub std_errors: Vec<f64>,
    pub histograms: Vec<OutcomeHistogram>,
    /// Whether each metric is at least its predecessor minus their combined
    /// standard error.
    pub nondecreasing: bool,
}

/// Runs `n` trials per value, all from the same master seed.
pub fn asymmetry_sweep(
    family: &Family,
    values: &[f64],
    n: u64,
    master_seed: u64,
    constants: Constants,
) -> Result<PeakReport, HarnessError> {
    if values.len() < 2 {
        return Err(HarnessError::InvalidParameter("a sweep needs at least two values".into()));
    }
    let mut metrics = Vec::new();
    let mut std_errors = Vec::new();
    let mut histograms = Vec::new();
    for &v in values {
        let h = run_trials(&family.experiment(v, constants)?, n, master_seed)?;
        let m = peak_metric(&h).expect("n >= 1");
        metrics.push(m);
        std_errors.push((m * (1.0 - m) / n as f64).sqrt());
        histograms.push(h);
    }
    let nondecreasing = (1..metrics.len()).all(|i| {
        let slack = (std_errors[i - 1].powi(2) + std_errors[i].powi(2)).sqrt();
        metrics[i] >= metrics[i - 1] - slack
    });
    Ok(PeakReport {
        parameter: family.parameter(),
        values: values.to_vec(),
        metrics,
        std_errors,
        histograms,
        nondecreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn repeated(sharpness: f64) -> Family {
        Family::Repeated {
            axis: Axis::Z,
            strength: 1.0,
            sharpness,
        }
    }

    #[test]
    fn repetition_peaks_grow() {
        let r = asymmetry_sweep(&repeated(0.8), &[1.0, 2.0, 4.0], 4000, 5, Constants::default()).unwrap();
        assert!(r.nondecreasing, "{:?}", r.metrics);
    }

    #[test]
    fn equal_values_equal_metrics() {
        let r = asymmetry_sweep(&repeated(0.8), &[2.0, 2.0], 1000, 9, Constants::default()).unwrap();
        assert_eq!(r.metrics[0], r.metrics[1]);
    }

    #[test]
    fn sharp_fields_always_peak() {
        let r = asymmetry_sweep(&repeated(1.0), &[1.0, 3.0], 200, 1, Constants::default()).unwrap();
        assert_eq!(r.metrics, vec![1.0, 1.0]);
    }

    #[test]
    fn bad_values() {
        assert!(repeated(0.8).experiment(1.5, Constants::default()).is_err());
        assert!(asymmetry_sweep(&repeated(0.8), &[1.0], 10, 0, Constants::default()).is_err());
        assert_eq!("repetition_count".parse::<SweepParameter>().unwrap(), SweepParameter::RepetitionCount);
    }

    #[test]
    fn mass_ratio_family_runs() {
        let f = Family::MassRatio {
            p_projectile: 5.0,
            detector_bins: 4,
            config: InteractionConfig {
                grid: crate::engine::ExitGrid {
                    cos_bins: 4,
                    phi_bins: 2,
                    ..Default::default()
                },
                ..Default::default()
            },
        };
        let e = f.experiment(10.0, Constants::default()).unwrap();
        assert!((e.constants.muon_mass - 5.11).abs() < 1e-12);
        let r = asymmetry_sweep(&f, &[1.0, 100.0], 30, 2, Constants::default()).unwrap();
        assert_eq!(r.histograms[0].total, 30);
    }
}
