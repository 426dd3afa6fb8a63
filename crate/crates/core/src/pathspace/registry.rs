use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Amplitude, PathRow, PathState, PathTable, PathspaceError};
use crate::constants::{Constants, ForceTag, ParticleType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParticleId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CollectionId(pub u64);

impl fmt::Display for ParticleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pw#{}", self.0)
    }
}

impl fmt::Display for CollectionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "coll#{}", self.0)
    }
}

/// A typed quantum object. Its paths live in the collection it references.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleWave {
    pub id: ParticleId,
    pub ptype: ParticleType,
    pub mass: f64,
    pub force_tags: Vec<ForceTag>,
    pub collection: CollectionId,
    pub member_index: usize,
}

impl ParticleWave {
    pub fn supports(&self, force: ForceTag) -> bool {
        self.force_tags.contains(&force)
    }
}

/// Joint path table over one or more particles, one amplitude per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PwCollection {
    id: CollectionId,
    members: Vec<ParticleId>,
    table: PathTable,
    normalized: bool,
}

impl PwCollection {
    pub fn id(&self) -> CollectionId {
        self.id
    }

    pub fn members(&self) -> &[ParticleId] {
        &self.members
    }

    pub fn table(&self) -> &PathTable {
        &self.table
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn member_index(&self, particle: ParticleId) -> Option<usize> {
        self.members.iter().position(|&m| m == particle)
    }

    /// Same members and rows, ignoring the collection id.
    pub fn same_content(&self, other: &PwCollection) -> bool {
        self.members == other.members && self.table == other.table
    }
}

/// Result of collapsing a collection onto one of its rows.
///
/// Carries the definite states of the surviving row but never its amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Collapse {
    pub removed: CollectionId,
    pub states: Vec<PathState>,
    /// One fresh single-row collection per former member, in member order.
    pub products: Vec<(ParticleId, CollectionId)>,
}

/// Global bookkeeping of live collections and the particles that own them.
#[derive(Debug, Clone)]
pub struct EntanglementRegistry {
    constants: Constants,
    particles: BTreeMap<ParticleId, ParticleWave>,
    collections: BTreeMap<CollectionId, PwCollection>,
    next_particle: u64,
    next_collection: u64,
}

impl Default for EntanglementRegistry {
    fn default() -> Self {
        Self::new(Constants::default())
    }
}

impl EntanglementRegistry {
    pub fn new(constants: Constants) -> Self {
        Self {
            constants,
            particles: BTreeMap::new(),
            collections: BTreeMap::new(),
            next_particle: 1,
            next_collection: 1,
        }
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    fn fresh_collection_id(&mut self) -> CollectionId {
        let id = CollectionId(self.next_collection);
        self.next_collection += 1;
        id
    }

    fn fresh_particle(&mut self, ptype: ParticleType) -> ParticleId {
        let id = ParticleId(self.next_particle);
        self.next_particle += 1;
        self.particles.insert(
            id,
            ParticleWave {
                id,
                ptype,
                mass: self.constants.mass(ptype),
                force_tags: ptype.force_tags(),
                collection: CollectionId(0),
                member_index: 0,
            },
        );
        id
    }

    fn register(&mut self, members: Vec<ParticleId>, table: PathTable) -> CollectionId {
        let id = self.fresh_collection_id();
        for (i, m) in members.iter().enumerate() {
            let p = self.particles.get_mut(m).expect("member registered");
            p.collection = id;
            p.member_index = i;
        }
        self.collections.insert(
            id,
            PwCollection {
                id,
                members,
                table: table.normalized(),
                normalized: true,
            },
        );
        id
    }

    /// Creates a particle with its own single-member collection.
    pub fn spawn(
        &mut self,
        ptype: ParticleType,
        rows: Vec<(PathState, Amplitude)>,
    ) -> Result<ParticleId, PathspaceError> {
        let table = PathTable::new(
            1,
            rows.into_iter().map(|(s, a)| PathRow::single(s, a)).collect(),
        )?;
        let id = self.fresh_particle(ptype);
        self.register(vec![id], table);
        Ok(id)
    }

    /// Creates new particles that start life sharing one joint collection.
    pub fn spawn_entangled(
        &mut self,
        ptypes: &[ParticleType],
        rows: Vec<PathRow>,
    ) -> Result<(CollectionId, Vec<ParticleId>), PathspaceError> {
        let table = PathTable::new(ptypes.len(), rows)?;
        let ids: Vec<ParticleId> = ptypes.iter().map(|&t| self.fresh_particle(t)).collect();
        let cid = self.register(ids.clone(), table);
        Ok((cid, ids))
    }

    /// Merges particles that currently own single-member collections into one
    /// normalized joint collection.
    pub fn join_entangled(
        &mut self,
        members: &[ParticleId],
        rows: Vec<PathRow>,
    ) -> Result<CollectionId, PathspaceError> {
        for (i, m) in members.iter().enumerate() {
            if members[..i].contains(m) {
                return Err(PathspaceError::DuplicateMember(*m));
            }
            let c = self.collection_of(*m)?;
            if c.members.len() != 1 {
                return Err(PathspaceError::MemberAlreadyEntangled(*m));
            }
        }
        let table = PathTable::new(members.len(), rows)?;
        for m in members {
            let old = self.particles[m].collection;
            self.collections.remove(&old);
        }
        Ok(self.register(members.to_vec(), table))
    }

    /// Reduces a live collection to one of its rows.
    ///
    /// The collection is removed and every former member, including members
    /// that took no part in whatever triggered the collapse, receives its own
    /// single-row collection with amplitude one.
    pub fn collapse(
        &mut self,
        collection: CollectionId,
        selected: usize,
    ) -> Result<Collapse, PathspaceError> {
        let c = self
            .collections
            .get(&collection)
            .ok_or(PathspaceError::StaleCollection(collection))?;
        if selected >= c.table.len() {
            return Err(PathspaceError::RowOutOfRange {
                row: selected,
                rows: c.table.len(),
            });
        }
        let c = self.collections.remove(&collection).expect("checked above");
        let states = c.table.into_rows().swap_remove(selected).states;
        let products = c
            .members
            .iter()
            .zip(&states)
            .map(|(&m, s)| (m, self.register(vec![m], PathTable::single(s.clone()))))
            .collect();
        Ok(Collapse {
            removed: collection,
            states,
            products,
        })
    }

    /// Removes a particle together with its single-member collection.
    pub fn retire(&mut self, particle: ParticleId) -> Result<CollectionId, PathspaceError> {
        let c = self.collection_of(particle)?;
        if c.members.len() != 1 {
            return Err(PathspaceError::MemberAlreadyEntangled(particle));
        }
        let cid = c.id;
        self.collections.remove(&cid);
        self.particles.remove(&particle);
        Ok(cid)
    }

    pub fn particle(&self, id: ParticleId) -> Result<&ParticleWave, PathspaceError> {
        self.particles
            .get(&id)
            .ok_or(PathspaceError::UnknownParticle(id))
    }

    pub fn collection(&self, id: CollectionId) -> Result<&PwCollection, PathspaceError> {
        self.collections
            .get(&id)
            .ok_or(PathspaceError::StaleCollection(id))
    }

    pub fn collection_of(&self, particle: ParticleId) -> Result<&PwCollection, PathspaceError> {
        let p = self.particle(particle)?;
        self.collection(p.collection)
    }

    pub fn is_live(&self, id: CollectionId) -> bool {
        self.collections.contains_key(&id)
    }

    pub fn is_particle_live(&self, id: ParticleId) -> bool {
        self.particles.contains_key(&id)
    }

    pub fn live_collections(&self) -> impl Iterator<Item = &PwCollection> {
        self.collections.values()
    }

    pub fn particles(&self) -> impl Iterator<Item = &ParticleWave> {
        self.particles.values()
    }

    /// Largest member count among live collections.
    pub fn max_members(&self) -> usize {
        self.collections
            .values()
            .map(|c| c.members.len())
            .max()
            .unwrap_or(0)
    }

    /// Full scan of the registry invariants.
    pub fn audit(&self) -> Result<(), AuditError> {
        for p in self.particles.values() {
            let c = self
                .collections
                .get(&p.collection)
                .ok_or(AuditError::DanglingReference(p.id, p.collection))?;
            if c.members.get(p.member_index) != Some(&p.id) {
                return Err(AuditError::BackReference(p.id, c.id));
            }
            if (p.mass - self.constants.mass(p.ptype)).abs() > 1e-12 * p.mass.max(1.0) {
                return Err(AuditError::MassMismatch(p.id));
            }
        }
        for c in self.collections.values() {
            for (i, m) in c.members.iter().enumerate() {
                let p = self
                    .particles
                    .get(m)
                    .ok_or(AuditError::UnknownMember(c.id, *m))?;
                if p.collection != c.id || p.member_index != i {
                    return Err(AuditError::SharedOwnership(*m));
                }
            }
            if c.table.width() != c.members.len() {
                return Err(AuditError::Shape(c.id));
            }
            if c.normalized && (c.table.norm_sqr() - 1.0).abs() > 1e-12 {
                return Err(AuditError::Normalization(c.id, c.table.norm_sqr()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AuditError {
    #[error("{0} references missing {1}")]
    DanglingReference(ParticleId, CollectionId),
    #[error("{1} does not list {0} at its member index")]
    BackReference(ParticleId, CollectionId),
    #[error("{0} is listed in more than one collection")]
    SharedOwnership(ParticleId),
    #[error("{0} lists unknown member {1}")]
    UnknownMember(CollectionId, ParticleId),
    #[error("{0} rows do not match its member count")]
    Shape(CollectionId),
    #[error("{0} has squared norm {1}")]
    Normalization(CollectionId, f64),
    #[error("{0} mass disagrees with the constants table")]
    MassMismatch(ParticleId),
}
