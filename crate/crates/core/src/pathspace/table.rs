use num_complex::Complex64;

use super::{ComponentKind, PathState, PathspaceError, StateComponent};
use crate::trace::{Decision, TracedRng};

/// Complex probability amplitude of one path row.
pub type Amplitude = Complex64;

/// One row of a path table: a state per member plus the row's amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRow {
    pub states: Vec<PathState>,
    pub amplitude: Amplitude,
}

impl PathRow {
    pub fn new(states: Vec<PathState>, amplitude: Amplitude) -> Self {
        Self { states, amplitude }
    }

    /// Single-member row.
    pub fn single(state: PathState, amplitude: Amplitude) -> Self {
        Self {
            states: vec![state],
            amplitude,
        }
    }
}

/// Joint path table over `width` members: the rows of a pw-collection.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTable {
    width: usize,
    rows: Vec<PathRow>,
}

impl PathTable {
    /// Validates shape and amplitudes. Amplitudes are kept as given.
    pub fn new(width: usize, rows: Vec<PathRow>) -> Result<Self, PathspaceError> {
        if width == 0 || rows.is_empty() {
            return Err(PathspaceError::EmptyTable);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.states.len() != width {
                return Err(PathspaceError::ShapeMismatch {
                    row: i,
                    expected: width,
                    found: row.states.len(),
                });
            }
            if !(row.amplitude.re.is_finite() && row.amplitude.im.is_finite()) {
                return Err(PathspaceError::NonFiniteAmplitude { row: i });
            }
        }
        if rows.iter().all(|r| r.amplitude.norm_sqr() == 0.0) {
            return Err(PathspaceError::AllAmplitudesZero);
        }
        Ok(Self { width, rows })
    }

    pub fn single(state: PathState) -> Self {
        Self {
            width: 1,
            rows: vec![PathRow::single(state, Amplitude::new(1.0, 0.0))],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> &[PathRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.rows.iter().map(|r| r.amplitude.norm_sqr()).sum()
    }

    /// Rescales all amplitudes so that the squared moduli sum to one.
    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        for r in &mut self.rows {
            r.amplitude /= n;
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub(crate) fn into_rows(self) -> Vec<PathRow> {
        self.rows
    }
}

/// Born weights `|a_i|^2 / sum_j |a_j|^2`, in row order.
pub fn born_probabilities(table: &PathTable) -> Result<Vec<f64>, PathspaceError> {
    born_from_amplitudes(table.rows.iter().map(|r| r.amplitude))
}

pub(crate) fn born_from_amplitudes(
    amps: impl Iterator<Item = Amplitude>,
) -> Result<Vec<f64>, PathspaceError> {
    let weights: Vec<f64> = amps.map(|a| a.norm_sqr()).collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(PathspaceError::AllAmplitudesZero);
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Picks one row with probability equal to its Born weight using a single
/// uniform draw tagged [`Decision::Sample`].
pub fn select_path(table: &PathTable, rng: &mut TracedRng) -> Result<usize, PathspaceError> {
    Ok(PathSampler::new(table)?.sample(rng, Decision::Sample))
}

/// Cumulative-distribution sampler over nonnegative weights.
///
/// One uniform draw `u` selects the first row whose cumulative weight reaches
/// `u * total`. A draw that lands exactly on a boundary goes to the lower row;
/// rows of zero weight are never selected.
#[derive(Debug, Clone)]
pub struct PathSampler {
    cumulative: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

impl PathSampler {
    pub fn new(table: &PathTable) -> Result<Self, PathspaceError> {
        Self::from_weights(table.rows.iter().map(|r| r.amplitude.norm_sqr()).collect())
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self, PathspaceError> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(PathspaceError::InvalidWeight);
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if !(acc > 0.0) {
            return Err(PathspaceError::AllAmplitudesZero);
        }
        Ok(Self {
            cumulative,
            weights,
            total: acc,
        })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total).collect()
    }

    pub fn sample(&self, rng: &mut TracedRng, decision: Decision) -> usize {
        self.pick(rng.draw(decision))
    }

    /// Deterministic selection for a given uniform value in `[0, 1)`.
    pub fn pick(&self, u: f64) -> usize {
        let target = u * self.total;
        let first = self.cumulative.partition_point(|&c| c < target);
        // partition_point can land on a zero-weight row when target == 0 or
        // through rounding; move forward to the next row that carries weight.
        (first..self.weights.len())
            .find(|&i| self.weights[i] > 0.0)
            .or_else(|| self.weights.iter().rposition(|&w| w > 0.0))
            .expect("total weight is positive")
    }
}

/// Distribution of one member's component values, summed over rows, in order
/// of first appearance.
pub fn marginal_probabilities(
    table: &PathTable,
    member: usize,
    kind: ComponentKind,
) -> Result<Vec<(StateComponent, f64)>, PathspaceError> {
    if member >= table.width {
        return Err(PathspaceError::MemberOutOfRange {
            member,
            width: table.width,
        });
    }
    let probs = born_probabilities(table)?;
    let mut out: Vec<(StateComponent, f64)> = Vec::new();
    for (row, p) in table.rows.iter().zip(probs) {
        let value = *row.states[member]
            .get(kind)
            .ok_or(PathspaceError::UnknownComponentKind(kind))?;
        match out.iter_mut().find(|(v, _)| *v == value) {
            Some((_, acc)) => *acc += p,
            None => out.push((value, p)),
        }
    }
    Ok(out)
}
