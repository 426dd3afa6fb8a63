use super::EngineError;
use crate::constants::ForceTag;
use crate::pathspace::{
    marginal_probabilities, ComponentKind, EntanglementRegistry, ParticleId, PathSampler,
    PathspaceError, PwCollection, StateComponent,
};
use crate::trace::{Decision, TracedRng};

/// Born-weighted position cells of one particle, in row order of first appearance.
pub fn positional_support(
    registry: &EntanglementRegistry,
    particle: ParticleId,
) -> Result<Vec<([f64; 3], f64)>, EngineError> {
    let p = registry.particle(particle)?;
    let c = registry.collection(p.collection)?;
    let marginal = match marginal_probabilities(c.table(), p.member_index, ComponentKind::Position) {
        Err(PathspaceError::UnknownComponentKind(kind)) => {
            return Err(EngineError::MissingComponent { particle, kind })
        }
        r => r?,
    };
    Ok(marginal
        .into_iter()
        .filter_map(|(v, w)| match v {
            StateComponent::Position(x) => Some((x, w)),
            _ => None,
        })
        .collect())
}

/// Draws the fluctuation position from the summed, renormalized positional
/// densities of `particles`. One [`Decision::Position`] draw.
pub fn sample_fluctuation_position(
    registry: &EntanglementRegistry,
    particles: &[ParticleId],
    rng: &mut TracedRng,
) -> Result<[f64; 3], EngineError> {
    let mut cells: Vec<([f64; 3], f64)> = Vec::new();
    for &p in particles {
        for (x, w) in positional_support(registry, p)? {
            match cells.iter_mut().find(|(y, _)| *y == x) {
                Some((_, acc)) => *acc += w,
                None => cells.push((x, w)),
            }
        }
    }
    let sampler = PathSampler::from_weights(cells.iter().map(|c| c.1).collect())
        .map_err(|_| EngineError::EmptySupport)?;
    Ok(cells[sampler.sample(rng, Decision::Position)].0)
}

/// Uniform choice among candidates that couple through `force` and have
/// amplitude at `position`.
///
/// Draws ([`Decision::Partner`]) only when there is an actual choice to make.
pub fn select_partner(
    registry: &EntanglementRegistry,
    position: [f64; 3],
    candidates: &[ParticleId],
    force: ForceTag,
    rng: &mut TracedRng,
) -> Result<Option<ParticleId>, EngineError> {
    let mut qualifying = Vec::new();
    for &c in candidates {
        if !registry.particle(c)?.supports(force) {
            continue;
        }
        let present = positional_support(registry, c)?
            .iter()
            .any(|(x, w)| *x == position && *w > 0.0);
        if present {
            qualifying.push(c);
        }
    }
    Ok(match qualifying.len() {
        0 => None,
        1 => Some(qualifying[0]),
        n => {
            let u = rng.draw(Decision::Partner);
            Some(qualifying[((u * n as f64) as usize).min(n - 1)])
        }
    })
}

/// Row weights of `collection` with rows whose `members` are not all at
/// `position` set to zero.
pub fn conditioned_weights(
    collection: &PwCollection,
    members: &[usize],
    position: [f64; 3],
) -> Vec<f64> {
    collection
        .table()
        .rows()
        .iter()
        .map(|r| {
            let here = members
                .iter()
                .all(|&m| r.states[m].position() == Some(position));
            if here {
                r.amplitude.norm_sqr()
            } else {
                0.0
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ParticleType;
    use crate::pathspace::{Amplitude, PathState};

    fn at(x: f64) -> PathState {
        PathState::new(vec![StateComponent::Position([x, 0.0, 0.0])]).unwrap()
    }

    fn a(re: f64) -> Amplitude {
        Amplitude::new(re, 0.0)
    }

    #[test]
    fn single_cell_always() {
        let mut reg = EntanglementRegistry::default();
        let p = reg.spawn(ParticleType::Electron, vec![(at(2.0), a(1.0))]).unwrap();
        let mut rng = TracedRng::from_seed(1);
        for _ in 0..100 {
            assert_eq!(sample_fluctuation_position(&reg, &[p], &mut rng).unwrap(), [2.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn quarter_three_quarters() {
        let mut reg = EntanglementRegistry::default();
        let p = reg
            .spawn(ParticleType::Electron, vec![(at(0.0), a(0.5)), (at(1.0), a(0.75f64.sqrt()))])
            .unwrap();
        let mut rng = TracedRng::from_seed(5).without_trace();
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| sample_fluctuation_position(&reg, &[p], &mut rng).unwrap()[0] == 0.0)
            .count();
        let f = hits as f64 / n as f64;
        assert!((f - 0.25).abs() < 3.0 * (0.25f64 * 0.75 / n as f64).sqrt(), "{f}");
    }

    #[test]
    fn disjoint_supports_split_evenly() {
        let mut reg = EntanglementRegistry::default();
        let p = reg.spawn(ParticleType::Electron, vec![(at(0.0), a(1.0))]).unwrap();
        let q = reg.spawn(ParticleType::Positron, vec![(at(1.0), a(3.0))]).unwrap();
        let mut rng = TracedRng::from_seed(9).without_trace();
        let n = 20_000;
        let hits = (0..n)
            .filter(|_| sample_fluctuation_position(&reg, &[p, q], &mut rng).unwrap()[0] == 0.0)
            .count();
        assert!((hits as f64 / n as f64 - 0.5).abs() < 0.015);
    }

    #[test]
    fn no_position_component() {
        let mut reg = EntanglementRegistry::default();
        let st = PathState::new(vec![StateComponent::Momentum([0.0; 3])]).unwrap();
        let p = reg.spawn(ParticleType::Electron, vec![(st, a(1.0))]).unwrap();
        let mut rng = TracedRng::from_seed(1);
        assert!(matches!(
            sample_fluctuation_position(&reg, &[p], &mut rng),
            Err(EngineError::MissingComponent { .. })
        ));
        assert_eq!(
            sample_fluctuation_position(&reg, &[], &mut rng),
            Err(EngineError::EmptySupport)
        );
    }

    #[test]
    fn partner_selection() {
        let mut reg = EntanglementRegistry::default();
        let p = reg.spawn(ParticleType::Positron, vec![(at(0.0), a(1.0))]).unwrap();
        let q = reg.spawn(ParticleType::Positron, vec![(at(0.0), a(1.0))]).unwrap();
        let far = reg.spawn(ParticleType::Positron, vec![(at(5.0), a(1.0))]).unwrap();
        let mut rng = TracedRng::from_seed(3);
        let origin = [0.0; 3];
        assert_eq!(select_partner(&reg, origin, &[far], ForceTag::ElectroWeak, &mut rng).unwrap(), None);
        assert_eq!(select_partner(&reg, origin, &[p, far], ForceTag::ElectroWeak, &mut rng).unwrap(), Some(p));
        assert_eq!(select_partner(&reg, origin, &[p], ForceTag::Strong, &mut rng).unwrap(), None);
        assert!(rng.trace().is_empty());
        let n = 10_000;
        let mut rng = rng.without_trace();
        let picks_p = (0..n)
            .filter(|_| select_partner(&reg, origin, &[p, q], ForceTag::ElectroWeak, &mut rng).unwrap() == Some(p))
            .count();
        assert!((picks_p as f64 / n as f64 - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn conditioning_zeroes_other_positions() {
        let mut reg = EntanglementRegistry::default();
        let p = reg
            .spawn(ParticleType::Electron, vec![(at(0.0), a(1.0)), (at(1.0), a(1.0))])
            .unwrap();
        let c = reg.collection_of(p).unwrap();
        let w = conditioned_weights(c, &[0], [1.0, 0.0, 0.0]);
        assert_eq!(w[0], 0.0);
        assert!((w[1] - 0.5).abs() < 1e-15);
    }
}
