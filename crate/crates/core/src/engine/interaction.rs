use std::collections::HashMap;

use super::{
    conditioned_weights, positional_support, probabilistic_projection, sample_fluctuation_position,
    Action, ActionLog, AmplitudeMap, ChannelPolicy, EngineError, EntryLine, InteractionConfig, PwFluctuation,
};
use crate::constants::{ForceTag, ParticleType};
use crate::pathspace::{CollectionId, EntanglementRegistry, ParticleId, PathRow, PathSampler, PathState};
use crate::qft::{channel_weights, Channel, FourMomentum};
use crate::trace::{Decision, Draw, TracedRng};

/// Record of one completed interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionResult {
    pub fluctuation: PwFluctuation,
    /// Selected row of each entry collection, after conditioning on position.
    pub selected_entry_rows: Vec<(CollectionId, usize)>,
    /// Definite entry state of each participant, in participant order.
    pub entry_states: Vec<PathState>,
    pub entry_masses: Vec<f64>,
    pub exit_types: Vec<ParticleType>,
    pub exit_particles: Vec<ParticleId>,
    pub exit_collection: CollectionId,
    /// Entry collections removed by the collapse.
    pub collapsed_ids: Vec<CollectionId>,
    /// Draws consumed by this interaction, in order. Empty when the stream
    /// does not keep a trace.
    pub draws: Vec<Draw>,
    pub log: Vec<ActionLog>,
}

impl InteractionResult {
    /// Total entry four-momentum, when every participant state carries a momentum.
    pub fn entry_total(&self) -> Option<FourMomentum> {
        let mut total = FourMomentum::new(0.0, [0.0; 3]);
        for (s, m) in self.entry_states.iter().zip(&self.entry_masses) {
            total = total + FourMomentum::on_shell(*m, s.momentum()?);
        }
        Some(total)
    }
}

/// Runs interactions under one [`InteractionConfig`], caching channel weights
/// per entry pair and energy.
#[derive(Debug, Clone)]
pub struct InteractionEngine {
    config: InteractionConfig,
    channel_cache: HashMap<(ParticleType, ParticleType, u64), Vec<(Channel, f64)>>,
}

struct Reduction {
    selected: Vec<(CollectionId, usize)>,
    states: Vec<PathState>,
}

impl InteractionEngine {
    pub fn new(config: InteractionConfig) -> Result<Self, EngineError> {
        config.validate()?;
        Ok(Self {
            config,
            channel_cache: HashMap::new(),
        })
    }

    pub fn config(&self) -> &InteractionConfig {
        &self.config
    }

    /// Channel distribution for an entry pair at `sqrt_s`, memoized.
    pub fn channel_distribution(
        &mut self,
        registry: &EntanglementRegistry,
        entry: (ParticleType, ParticleType),
        sqrt_s: f64,
    ) -> Result<&[(Channel, f64)], EngineError> {
        let key = (entry.0, entry.1, sqrt_s.to_bits());
        if !self.channel_cache.contains_key(&key) {
            let w = channel_weights(
                entry,
                sqrt_s,
                registry.constants(),
                &self.config.couplings,
                self.config.quadrature,
            )?;
            self.channel_cache.insert(key, w);
        }
        Ok(&self.channel_cache[&key])
    }

    /// Lepton-antilepton interaction between a measured particle and an
    /// apparatus particle.
    pub fn run_interaction(
        &mut self,
        registry: &mut EntanglementRegistry,
        measured: ParticleId,
        ma_object: ParticleId,
        rng: &mut TracedRng,
    ) -> Result<InteractionResult, EngineError> {
        if measured == ma_object {
            return Err(EngineError::SelfInteraction);
        }
        let participants = [measured, ma_object];
        check_force(registry, &participants, ForceTag::ElectroWeak)?;
        let start = rng.mark();
        let mut log = Vec::with_capacity(6);

        let position = self.position_action(registry, &participants, rng, &mut log)?;
        let reduction = reduce(registry, &participants, position, rng, &mut log)?;

        let lines: Vec<EntryLine> = participants
            .iter()
            .zip(&reduction.states)
            .map(|(&p, s)| {
                let w = registry.particle(p)?;
                Ok(EntryLine {
                    particle: p,
                    ptype: w.ptype,
                    mass: w.mass,
                    state: s.clone(),
                })
            })
            .collect::<Result<_, EngineError>>()?;

        let mark = rng.mark();
        let (f, a) = if lines[0].ptype.is_antiparticle() { (&lines[1], &lines[0]) } else { (&lines[0], &lines[1]) };
        let channel = match self.config.channel_policy {
            ChannelPolicy::Fixed(c) => {
                rng.draw(Decision::Channel);
                c
            }
            ChannelPolicy::Dynamic => {
                let total = FourMomentum::on_shell(f.mass, momentum_of(f)?) + FourMomentum::on_shell(a.mass, momentum_of(a)?);
                let dist = self.channel_distribution(registry, (f.ptype, a.ptype), total.mass())?;
                let sampler = PathSampler::from_weights(dist.iter().map(|c| c.1).collect())?;
                dist[sampler.sample(rng, Decision::Channel)].0
            }
        };
        log.push(ActionLog {
            action: Action::Channel,
            draws: rng.since(mark).to_vec(),
            detail: channel.label(),
        });

        let rows = probabilistic_projection([&lines[0], &lines[1]], channel, &self.config, registry.constants())?;
        log.push(ActionLog {
            action: Action::Projection,
            draws: vec![],
            detail: format!("{} exit rows", rows.len()),
        });

        let exit_types = vec![channel.fermion, channel.antifermion];
        finish(registry, &participants, reduction, position, exit_types, rows, rng, start, log)
    }

    /// Interaction with a classical object described by a declared amplitude
    /// map. The measured particle is the only participant and keeps its type.
    pub fn run_field_interaction(
        &mut self,
        registry: &mut EntanglementRegistry,
        measured: ParticleId,
        map: &dyn AmplitudeMap,
        rng: &mut TracedRng,
    ) -> Result<InteractionResult, EngineError> {
        let participants = [measured];
        check_force(registry, &participants, ForceTag::ElectroWeak)?;
        let start = rng.mark();
        let mut log = Vec::with_capacity(6);

        let position = self.position_action(registry, &participants, rng, &mut log)?;
        let reduction = reduce(registry, &participants, position, rng, &mut log)?;

        let ptype = registry.particle(measured)?.ptype;
        let mark = rng.mark();
        rng.draw(Decision::Channel);
        log.push(ActionLog {
            action: Action::Channel,
            draws: rng.since(mark).to_vec(),
            detail: ptype.name().to_string(),
        });

        let rows: Vec<PathRow> = map
            .project(&reduction.states[0])?
            .into_iter()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(s, a)| PathRow::single(s, a))
            .collect();
        if rows.is_empty() {
            return Err(EngineError::NoOpenExitStates);
        }
        log.push(ActionLog {
            action: Action::Projection,
            draws: vec![],
            detail: format!("{}: {} exit rows", map.describe(), rows.len()),
        });

        finish(registry, &participants, reduction, position, vec![ptype], rows, rng, start, log)
    }

    fn position_action(
        &self,
        registry: &EntanglementRegistry,
        participants: &[ParticleId],
        rng: &mut TracedRng,
        log: &mut Vec<ActionLog>,
    ) -> Result<[f64; 3], EngineError> {
        let mark = rng.mark();
        let position = sample_fluctuation_position(registry, participants, rng)?;
        log.push(ActionLog {
            action: Action::Position,
            draws: rng.since(mark).to_vec(),
            detail: format!("{} {} {}", position[0], position[1], position[2]),
        });
        Ok(position)
    }
}

fn momentum_of(line: &EntryLine) -> Result<[f64; 3], EngineError> {
    line.state.momentum().ok_or(EngineError::MissingComponent {
        particle: line.particle,
        kind: crate::pathspace::ComponentKind::Momentum,
    })
}

fn check_force(registry: &EntanglementRegistry, participants: &[ParticleId], force: ForceTag) -> Result<(), EngineError> {
    for &p in participants {
        if !registry.particle(p)?.supports(force) {
            return Err(EngineError::ForceMismatch { particle: p, force });
        }
    }
    Ok(())
}

/// Path reduction: one draw over the joint, position-conditioned rows of all
/// entry collections involved.
fn reduce(
    registry: &EntanglementRegistry,
    participants: &[ParticleId],
    position: [f64; 3],
    rng: &mut TracedRng,
    log: &mut Vec<ActionLog>,
) -> Result<Reduction, EngineError> {
    for &p in participants {
        let here = positional_support(registry, p)?
            .iter()
            .any(|(x, w)| *x == position && *w > 0.0);
        if !here {
            return Err(EngineError::IsolatedFluctuation(p));
        }
    }
    // group participants by owning collection, preserving first appearance
    let mut groups: Vec<(CollectionId, Vec<usize>)> = Vec::new();
    for &p in participants {
        let w = registry.particle(p)?;
        match groups.iter_mut().find(|g| g.0 == w.collection) {
            Some(g) => g.1.push(w.member_index),
            None => groups.push((w.collection, vec![w.member_index])),
        }
    }
    let per_group: Vec<Vec<f64>> = groups
        .iter()
        .map(|(cid, members)| Ok(conditioned_weights(registry.collection(*cid)?, members, position)))
        .collect::<Result<_, EngineError>>()?;
    let mut joint = vec![1.0];
    for w in &per_group {
        joint = joint.iter().flat_map(|a| w.iter().map(move |b| a * b)).collect();
    }
    let sampler = PathSampler::from_weights(joint).map_err(|_| EngineError::IsolatedFluctuation(participants[participants.len() - 1]))?;
    let mark = rng.mark();
    let mut flat = sampler.sample(rng, Decision::Path);
    let mut rows = vec![0; groups.len()];
    for (i, w) in per_group.iter().enumerate().rev() {
        rows[i] = flat % w.len();
        flat /= w.len();
    }
    let selected: Vec<(CollectionId, usize)> = groups.iter().map(|g| g.0).zip(rows).collect();
    let mut states = Vec::with_capacity(participants.len());
    for &p in participants {
        let w = registry.particle(p)?;
        let row = selected.iter().find(|s| s.0 == w.collection).expect("grouped above").1;
        states.push(registry.collection(w.collection)?.table().rows()[row].states[w.member_index].clone());
    }
    log.push(ActionLog {
        action: Action::Path,
        draws: rng.since(mark).to_vec(),
        detail: selected
            .iter()
            .map(|(c, r)| format!("{c}:{r}"))
            .collect::<Vec<_>>()
            .join(" "),
    });
    Ok(Reduction { selected, states })
}

#[allow(clippy::too_many_arguments)]
fn finish(
    registry: &mut EntanglementRegistry,
    participants: &[ParticleId],
    reduction: Reduction,
    position: [f64; 3],
    exit_types: Vec<ParticleType>,
    rows: Vec<PathRow>,
    rng: &TracedRng,
    start: usize,
    mut log: Vec<ActionLog>,
) -> Result<InteractionResult, EngineError> {
    let entry_masses = participants
        .iter()
        .map(|&p| Ok(registry.particle(p)?.mass))
        .collect::<Result<Vec<_>, EngineError>>()?;
    let (exit_collection, exit_particles) = registry.spawn_entangled(&exit_types, rows)?;
    log.push(ActionLog {
        action: Action::Entanglement,
        draws: vec![],
        detail: format!(
            "{exit_collection} {}",
            exit_particles.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
        ),
    });

    let mut collapsed_ids = Vec::new();
    for &(cid, row) in &reduction.selected {
        let c = registry.collapse(cid, row)?;
        collapsed_ids.push(c.removed);
        for (pid, _) in c.products {
            if participants.contains(&pid) {
                registry.retire(pid)?;
            }
        }
    }
    log.push(ActionLog {
        action: Action::Collapse,
        draws: vec![],
        detail: collapsed_ids.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
    });

    Ok(InteractionResult {
        fluctuation: PwFluctuation {
            position,
            force: ForceTag::ElectroWeak,
            participants: participants.to_vec(),
        },
        selected_entry_rows: reduction.selected,
        entry_states: reduction.states,
        entry_masses,
        exit_types,
        exit_particles,
        exit_collection,
        collapsed_ids,
        draws: rng.since(start).to_vec(),
        log,
    })
}
