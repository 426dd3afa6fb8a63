use std::fmt;

use serde::{Deserialize, Serialize};

use super::PathspaceError;

/// Unit 3-vector used as a spin quantization or field axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis([f64; 3]);

impl Axis {
    pub const X: Axis = Axis([1.0, 0.0, 0.0]);
    pub const Y: Axis = Axis([0.0, 1.0, 0.0]);
    pub const Z: Axis = Axis([0.0, 0.0, 1.0]);

    /// Accepts only vectors that are already unit length within 1e-12.
    pub fn new(v: [f64; 3]) -> Result<Self, PathspaceError> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if v.iter().all(|c| c.is_finite()) && (norm - 1.0).abs() <= 1e-12 {
            Ok(Axis(v))
        } else {
            Err(PathspaceError::NotUnitAxis(v))
        }
    }

    pub fn normalized(v: [f64; 3]) -> Result<Self, PathspaceError> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(PathspaceError::NotUnitAxis(v));
        }
        Ok(Axis([v[0] / norm, v[1] / norm, v[2] / norm]))
    }

    pub fn vector(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, v: &[f64; 3]) -> f64 {
        self.0[0] * v[0] + self.0[1] * v[1] + self.0[2] * v[2]
    }

    /// Short keyword for the coordinate axes, `None` otherwise.
    pub fn keyword(&self) -> Option<&'static str> {
        if *self == Axis::X {
            Some("x")
        } else if *self == Axis::Y {
            Some("y")
        } else if *self == Axis::Z {
            Some("z")
        } else {
            None
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.keyword() {
            Some(k) => f.write_str(k),
            None => write!(f, "{} {} {}", self.0[0], self.0[1], self.0[2]),
        }
    }
}

/// Spin projection along an axis, stored as twice the magnetic quantum number
/// so that spin-1/2 (±1) and photon helicity (±2) share one integer label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spin {
    pub twice_m: i8,
    pub axis: Axis,
}

impl Spin {
    pub fn up(axis: Axis) -> Self {
        Spin { twice_m: 1, axis }
    }

    pub fn down(axis: Axis) -> Self {
        Spin { twice_m: -1, axis }
    }

    pub fn new(twice_m: i8, axis: Axis) -> Result<Self, PathspaceError> {
        if matches!(twice_m, -2 | -1 | 1 | 2) {
            Ok(Spin { twice_m, axis })
        } else {
            Err(PathspaceError::InvalidSpin(twice_m))
        }
    }

    pub fn is_up(&self) -> bool {
        self.twice_m > 0
    }

    pub fn label(&self) -> &'static str {
        match self.twice_m {
            1 => "+1/2",
            -1 => "-1/2",
            2 => "+1",
            -2 => "-1",
            _ => "?",
        }
    }

    pub fn parse_label(s: &str) -> Option<i8> {
        match s {
            "+1/2" | "1/2" => Some(1),
            "-1/2" => Some(-1),
            "+1" | "1" => Some(2),
            "-1" => Some(-2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Position,
    Momentum,
    Spin,
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComponentKind::Position => "position",
            ComponentKind::Momentum => "momentum",
            ComponentKind::Spin => "spin",
        })
    }
}

/// One observable value of a path. Positions are grid-cell representatives in
/// natural length units; momenta are in MeV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateComponent {
    Position([f64; 3]),
    Momentum([f64; 3]),
    Spin(Spin),
}

impl StateComponent {
    pub fn kind(&self) -> ComponentKind {
        match self {
            StateComponent::Position(_) => ComponentKind::Position,
            StateComponent::Momentum(_) => ComponentKind::Momentum,
            StateComponent::Spin(_) => ComponentKind::Spin,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            StateComponent::Position(v) | StateComponent::Momentum(v) => {
                v.iter().all(|c| c.is_finite())
            }
            StateComponent::Spin(_) => true,
        }
    }
}

impl fmt::Display for StateComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateComponent::Position(v) => write!(f, "pos {} {} {}", v[0], v[1], v[2]),
            StateComponent::Momentum(v) => write!(f, "mom {} {} {}", v[0], v[1], v[2]),
            StateComponent::Spin(s) => write!(f, "spin {} {}", s.label(), s.axis),
        }
    }
}

/// The observable values of one particle along one path.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PathState {
    components: Vec<StateComponent>,
}

impl PathState {
    pub fn new(components: Vec<StateComponent>) -> Result<Self, PathspaceError> {
        for (i, c) in components.iter().enumerate() {
            if !c.is_finite() {
                return Err(PathspaceError::NonFiniteState);
            }
            if components[..i].iter().any(|d| d.kind() == c.kind()) {
                return Err(PathspaceError::DuplicateComponent(c.kind()));
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[StateComponent] {
        &self.components
    }

    pub fn get(&self, kind: ComponentKind) -> Option<&StateComponent> {
        self.components.iter().find(|c| c.kind() == kind)
    }

    pub fn position(&self) -> Option<[f64; 3]> {
        match self.get(ComponentKind::Position) {
            Some(StateComponent::Position(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn momentum(&self) -> Option<[f64; 3]> {
        match self.get(ComponentKind::Momentum) {
            Some(StateComponent::Momentum(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn spin(&self) -> Option<Spin> {
        match self.get(ComponentKind::Spin) {
            Some(StateComponent::Spin(s)) => Some(*s),
            _ => None,
        }
    }

    /// Replaces the component of the same kind, or appends it.
    pub fn with(mut self, component: StateComponent) -> Self {
        match self
            .components
            .iter_mut()
            .find(|c| c.kind() == component.kind())
        {
            Some(slot) => *slot = component,
            None => self.components.push(component),
        }
        self
    }
}

impl fmt::Display for PathState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_kind_rejected() {
        let r = PathState::new(vec![
            StateComponent::Position([0.0; 3]),
            StateComponent::Position([1.0, 0.0, 0.0]),
        ]);
        assert_eq!(r, Err(PathspaceError::DuplicateComponent(ComponentKind::Position)));
    }

    #[test]
    fn with_replaces_in_place() {
        let s = PathState::new(vec![
            StateComponent::Position([0.0; 3]),
            StateComponent::Spin(Spin::up(Axis::Z)),
        ])
        .unwrap()
        .with(StateComponent::Spin(Spin::down(Axis::Z)));
        assert_eq!(s.components().len(), 2);
        assert_eq!(s.spin(), Some(Spin::down(Axis::Z)));
    }

    #[test]
    fn axis_must_be_unit() {
        assert!(Axis::new([0.0, 0.0, 2.0]).is_err());
        assert!(Axis::new([0.6, 0.8, 0.0]).is_ok());
        assert_eq!(Axis::normalized([0.0, 0.0, 5.0]).unwrap(), Axis::Z);
    }

    #[test]
    fn spin_labels() {
        assert!(Spin::new(3, Axis::Z).is_err());
        for m in [-2i8, -1, 1, 2] {
            let s = Spin::new(m, Axis::Z).unwrap();
            assert_eq!(Spin::parse_label(s.label()), Some(m));
        }
    }
}
