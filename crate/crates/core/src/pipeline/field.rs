use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::engine::{AmplitudeMap, EngineError};
use crate::pathspace::{Amplitude, Axis, ComponentKind, PathState, Spin, StateComponent};
use crate::qft::pauli_eigenvectors;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    InhomogeneousMagnetic,
}

/// Declared two-outcome spin-to-deflection mapping of a field gradient.
///
/// A spin eigenstate along `axis` leaves with amplitude `sqrt(sharpness)` in
/// the matching deflection (`+axis` for up) and `sqrt(1 - sharpness)` in the
/// opposite one. The deflection adds `kick() * axis` to the momentum; position
/// and spin are unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldObject {
    pub kind: FieldKind,
    pub axis: Axis,
    /// Momentum transfer per unit of gradient, MeV.
    pub strength: f64,
    /// Born weight of the matching deflection, in `[0.5, 1]`.
    pub sharpness: f64,
    /// Multiplies the transfer of this field; lets a chain of soft fields
    /// break ties in favour of its first stage.
    pub weight: f64,
    pub peak_threshold: f64,
}

impl FieldObject {
    pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.999;

    /// Ideal magnet: the matching deflection has amplitude one.
    pub fn sharp(axis: Axis, strength: f64) -> Self {
        Self {
            kind: FieldKind::InhomogeneousMagnetic,
            axis,
            strength,
            sharpness: 1.0,
            weight: 1.0,
            peak_threshold: Self::DEFAULT_PEAK_THRESHOLD,
        }
    }

    pub fn soft(axis: Axis, strength: f64, sharpness: f64) -> Self {
        Self {
            sharpness,
            ..Self::sharp(axis, strength)
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.strength > 0.0 && self.strength.is_finite()) {
            return Err("field strength must be positive".into());
        }
        if !(0.5..=1.0).contains(&self.sharpness) {
            return Err("field sharpness must lie in [0.5, 1]".into());
        }
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err("field weight must be positive".into());
        }
        Ok(())
    }

    pub fn kick(&self) -> f64 {
        self.strength * self.weight
    }

    /// Whether eigenstates reach the matching deflection with amplitude
    /// modulus at least `peak_threshold`.
    pub fn is_sharp(&self) -> bool {
        self.sharpness.sqrt() >= self.peak_threshold
    }
}

fn same_axis(a: &Axis, b: &Axis) -> bool {
    let (u, v) = (a.vector(), b.vector());
    (0..3).all(|k| (u[k] - v[k]).abs() <= 1e-12)
}

impl AmplitudeMap for FieldObject {
    fn project(&self, entry: &PathState) -> Result<Vec<(PathState, Amplitude)>, EngineError> {
        let spin = entry.spin().ok_or(EngineError::StateLacks(ComponentKind::Spin))?;
        let p = entry.momentum().ok_or(EngineError::StateLacks(ComponentKind::Momentum))?;
        if !same_axis(&spin.axis, &self.axis) {
            return Err(EngineError::UnsupportedBasis {
                found: spin.axis.to_string(),
                field: self.axis.to_string(),
            });
        }
        let (hit, miss) = (self.sharpness.sqrt(), (1.0 - self.sharpness).max(0.0).sqrt());
        let n = self.axis.vector();
        let deflect = |sign: f64| {
            let q = std::array::from_fn(|k| p[k] + sign * self.kick() * n[k]);
            entry.clone().with(StateComponent::Momentum(q))
        };
        let (plus, minus) = if spin.is_up() { (hit, miss) } else { (miss, hit) };
        Ok(vec![
            (deflect(1.0), Amplitude::new(plus, 0.0)),
            (deflect(-1.0), Amplitude::new(minus, 0.0)),
        ])
    }

    fn describe(&self) -> String {
        format!("field {} x{}", self.axis, self.sharpness)
    }
}

/// Deterministic screen: the sign of the momentum along `axis` decides
/// whether the particle lands at `+distance` or `-distance` along it.
/// Zero transverse momentum lands on the axis origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenMapping {
    pub axis: Axis,
    pub distance: f64,
}

impl AmplitudeMap for ScreenMapping {
    fn project(&self, entry: &PathState) -> Result<Vec<(PathState, Amplitude)>, EngineError> {
        let p = entry.momentum().ok_or(EngineError::StateLacks(ComponentKind::Momentum))?;
        let along = self.axis.dot(&p);
        let d = if along > 0.0 {
            self.distance
        } else if along < 0.0 {
            -self.distance
        } else {
            0.0
        };
        let n = self.axis.vector();
        let pos = n.map(|x| x * d);
        Ok(vec![(entry.clone().with(StateComponent::Position(pos)), Amplitude::new(1.0, 0.0))])
    }

    fn describe(&self) -> String {
        format!("screen {}", self.axis)
    }
}

/// Rows of a spin-1/2 state pointing along `direction`, expanded in the
/// eigenbasis of `axis`. Components below 1e-12 in modulus are dropped.
pub fn spin_direction_rows(direction: Axis, axis: Axis, base: &PathState) -> Vec<(PathState, Amplitude)> {
    let (n_up, _) = pauli_eigenvectors(direction);
    let (up, down) = pauli_eigenvectors(axis);
    let overlap = |b: [Complex64; 2]| b[0].conj() * n_up[0] + b[1].conj() * n_up[1];
    [(Spin::up(axis), overlap(up)), (Spin::down(axis), overlap(down))]
        .into_iter()
        .filter(|(_, a)| a.norm() > 1e-12)
        .map(|(s, a)| (base.clone().with(StateComponent::Spin(s)), a))
        .collect()
}

/// Anticorrelated two-member spin table along `axis`, equal amplitudes.
pub fn singlet_rows(axis: Axis, base_a: &PathState, base_b: &PathState) -> Vec<crate::pathspace::PathRow> {
    let a = Amplitude::new(FRAC_1_SQRT_2, 0.0);
    [(true, a), (false, -a)]
        .into_iter()
        .map(|(up, amp)| {
            let (sa, sb) = if up { (Spin::up(axis), Spin::down(axis)) } else { (Spin::down(axis), Spin::up(axis)) };
            crate::pathspace::PathRow::new(
                vec![
                    base_a.clone().with(StateComponent::Spin(sa)),
                    base_b.clone().with(StateComponent::Spin(sb)),
                ],
                amp,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> PathState {
        PathState::new(vec![
            StateComponent::Position([0.0; 3]),
            StateComponent::Momentum([0.0, 1.0, 0.0]),
        ])
        .unwrap()
    }

    #[test]
    fn sharp_field_sends_eigenstates_one_way() {
        let f = FieldObject::sharp(Axis::Z, 0.5);
        assert!(f.is_sharp());
        let up = base().with(StateComponent::Spin(Spin::up(Axis::Z)));
        let rows = f.project(&up).unwrap();
        assert_eq!(rows[0].1, Amplitude::new(1.0, 0.0));
        assert_eq!(rows[1].1, Amplitude::new(0.0, 0.0));
        assert_eq!(rows[0].0.momentum().unwrap(), [0.0, 1.0, 0.5]);
        assert_eq!(rows[0].0.spin().unwrap(), Spin::up(Axis::Z));
    }

    #[test]
    fn soft_field_split() {
        let f = FieldObject::soft(Axis::X, 1.0, 0.8);
        assert!(!f.is_sharp());
        let dn = base().with(StateComponent::Spin(Spin::down(Axis::X)));
        let rows = f.project(&dn).unwrap();
        assert!((rows[0].1.norm_sqr() - 0.2).abs() < 1e-15);
        assert!((rows[1].1.norm_sqr() - 0.8).abs() < 1e-15);
        assert_eq!(rows[1].0.momentum().unwrap(), [-1.0, 1.0, 0.0]);
    }

    #[test]
    fn rotated_basis_is_refused() {
        let f = FieldObject::sharp(Axis::Z, 1.0);
        let s = base().with(StateComponent::Spin(Spin::up(Axis::X)));
        assert!(matches!(f.project(&s), Err(EngineError::UnsupportedBasis { .. })));
        assert_eq!(
            f.project(&PathState::new(vec![]).unwrap()),
            Err(EngineError::StateLacks(ComponentKind::Spin))
        );
    }

    #[test]
    fn screen_maps_sign() {
        let s = ScreenMapping {
            axis: Axis::Z,
            distance: 2.0,
        };
        let st = base().with(StateComponent::Momentum([0.0, 1.0, -0.3]));
        assert_eq!(s.project(&st).unwrap()[0].0.position().unwrap(), [0.0, 0.0, -2.0]);
    }

    #[test]
    fn plus_x_is_even_in_z() {
        let rows = spin_direction_rows(Axis::X, Axis::Z, &base());
        assert_eq!(rows.len(), 2);
        for (_, a) in &rows {
            assert!((a.norm_sqr() - 0.5).abs() < 1e-15);
        }
        let tilted = Axis::normalized([1.0, 0.0, 1.0]).unwrap();
        let rows = spin_direction_rows(tilted, Axis::Z, &base());
        // cos^2(pi/8)
        let expected = (std::f64::consts::PI / 8.0).cos().powi(2);
        assert!((rows[0].1.norm_sqr() - expected).abs() < 1e-14);
        let down = Axis::normalized([0.0, 0.0, -1.0]).unwrap();
        let rows = spin_direction_rows(down, Axis::Z, &base());
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].0.spin().unwrap(), Spin::down(Axis::Z));
    }
}
