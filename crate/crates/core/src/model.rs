//! Counterpart models and ultimately periodic traces through them.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::algebra::{Algebra, Elem, PreservationViolation, RelMorphism, Signature, SortId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorldId(pub usize);

pub type RelId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("world `{0}` declared twice")]
    DuplicateWorld(String),
    #[error("relation `{0}` declared twice")]
    DuplicateRelation(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("world `{0}` is not over the model signature")]
    SignatureMismatch(String),
    #[error("relation `{relation}` does not connect the algebras of its declared worlds")]
    AlgebraMismatch { relation: String },
    #[error("relation `{relation}` is not structure-preserving: {violation}")]
    NotPreserving {
        relation: String,
        violation: PreservationViolation,
    },
    #[error("label `{label}` marks `{elem}`, which is not in world `{world}`")]
    LabelOutsideCarrier {
        label: String,
        world: String,
        elem: String,
    },
    #[error("trace cycle must not be empty")]
    EmptyCycle,
    #[error("trace step `{from}` ends in world `{world}` but `{to}` starts elsewhere")]
    BrokenChain {
        from: String,
        to: String,
        world: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct World {
    pub name: String,
    pub algebra: Arc<Algebra>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomicRelation {
    pub name: String,
    pub source: WorldId,
    pub target: WorldId,
    pub morphism: RelMorphism,
}

/// Unary predicates: for each (label, sort), the marked elements per world.
/// Worlds with no marked element are not stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PredicateLabeling {
    entries: BTreeMap<(String, SortId), BTreeMap<WorldId, BTreeSet<Elem>>>,
}

impl PredicateLabeling {
    pub fn insert(&mut self, label: &str, sort: SortId, world: WorldId, elem: Elem) {
        self.entries
            .entry((label.to_string(), sort))
            .or_default()
            .entry(world)
            .or_default()
            .insert(elem);
    }

    pub fn holds(&self, label: &str, sort: SortId, world: WorldId, elem: Elem) -> bool {
        self.marked(label, sort, world)
            .is_some_and(|set| set.contains(&elem))
    }

    pub fn marked(&self, label: &str, sort: SortId, world: WorldId) -> Option<&BTreeSet<Elem>> {
        self.entries
            .get(&(label.to_string(), sort))
            .and_then(|m| m.get(&world))
    }

    pub fn labels(&self) -> impl Iterator<Item = (&str, SortId)> {
        self.entries.keys().map(|(l, s)| (l.as_str(), *s))
    }

    /// Labels marking some element of `world`, sorted by (name, sort).
    pub fn labels_at(&self, world: WorldId) -> Vec<(&str, SortId, &BTreeSet<Elem>)> {
        self.entries
            .iter()
            .filter_map(|((l, s), m)| m.get(&world).map(|set| (l.as_str(), *s, set)))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Worlds assigned to algebras over one signature, plus the named atomic
/// counterpart relations between them. Pairs of worlds with no listed
/// relation have none.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterpartModel {
    signature: Arc<Signature>,
    worlds: Vec<World>,
    relations: Vec<AtomicRelation>,
    labeling: PredicateLabeling,
}

impl CounterpartModel {
    pub fn new(signature: Arc<Signature>) -> Self {
        CounterpartModel {
            signature,
            worlds: Vec::new(),
            relations: Vec::new(),
            labeling: PredicateLabeling::default(),
        }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn add_world(&mut self, name: &str, algebra: Arc<Algebra>) -> Result<WorldId, ModelError> {
        if self.world_id(name).is_some() {
            return Err(ModelError::DuplicateWorld(name.to_string()));
        }
        if **algebra.signature() != *self.signature {
            return Err(ModelError::SignatureMismatch(name.to_string()));
        }
        self.worlds.push(World {
            name: name.to_string(),
            algebra,
        });
        Ok(WorldId(self.worlds.len() - 1))
    }

    /// Adds an atomic relation; it must be a structure-preserving relation
    /// between the algebras of `source` and `target`.
    pub fn add_relation(
        &mut self,
        name: &str,
        source: WorldId,
        target: WorldId,
        morphism: RelMorphism,
    ) -> Result<RelId, ModelError> {
        if self.relation_id(name).is_some() {
            return Err(ModelError::DuplicateRelation(name.to_string()));
        }
        let fits = |w: WorldId, a: &Arc<Algebra>| {
            let alg = &self.worlds[w.0].algebra;
            Arc::ptr_eq(alg, a) || **alg == **a
        };
        if !fits(source, morphism.source()) || !fits(target, morphism.target()) {
            return Err(ModelError::AlgebraMismatch {
                relation: name.to_string(),
            });
        }
        if let Some(violation) = morphism.preservation_violation() {
            return Err(ModelError::NotPreserving {
                relation: name.to_string(),
                violation,
            });
        }
        self.relations.push(AtomicRelation {
            name: name.to_string(),
            source,
            target,
            morphism,
        });
        Ok(self.relations.len() - 1)
    }

    pub fn add_label(
        &mut self,
        label: &str,
        sort: SortId,
        world: WorldId,
        elem: &str,
    ) -> Result<(), ModelError> {
        let w = &self.worlds[world.0];
        let e = w
            .algebra
            .elem(sort, elem)
            .ok_or_else(|| ModelError::LabelOutsideCarrier {
                label: label.to_string(),
                world: w.name.clone(),
                elem: elem.to_string(),
            })?;
        self.labeling.insert(label, sort, world, e);
        Ok(())
    }

    pub fn labeling(&self) -> &PredicateLabeling {
        &self.labeling
    }

    pub fn labeling_mut(&mut self) -> &mut PredicateLabeling {
        &mut self.labeling
    }

    pub fn worlds(&self) -> &[World] {
        &self.worlds
    }

    pub fn world(&self, id: WorldId) -> &World {
        &self.worlds[id.0]
    }

    pub fn algebra(&self, id: WorldId) -> &Arc<Algebra> {
        &self.worlds[id.0].algebra
    }

    pub fn world_id(&self, name: &str) -> Option<WorldId> {
        self.worlds.iter().position(|w| w.name == name).map(WorldId)
    }

    pub fn relations(&self) -> &[AtomicRelation] {
        &self.relations
    }

    pub fn relation(&self, id: RelId) -> &AtomicRelation {
        &self.relations[id]
    }

    pub fn relation_id(&self, name: &str) -> Option<RelId> {
        self.relations.iter().position(|r| r.name == name)
    }

    /// The atomic relations from `source` to `target`.
    pub fn relations_between(
        &self,
        source: WorldId,
        target: WorldId,
    ) -> impl Iterator<Item = (RelId, &AtomicRelation)> {
        self.relations
            .iter()
            .enumerate()
            .filter(move |(_, r)| r.source == source && r.target == target)
    }

    pub fn outgoing(&self, source: WorldId) -> impl Iterator<Item = (RelId, &AtomicRelation)> {
        self.relations
            .iter()
            .enumerate()
            .filter(move |(_, r)| r.source == source)
    }

    /// Every atomic relation is functional (each element has at most one
    /// counterpart).
    pub fn is_functional(&self) -> bool {
        self.relations.iter().all(|r| r.morphism.is_functional())
    }
}

/// A position on a lasso, always normalized into `[0, prefix + cycle)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TracePosition(usize);

impl TracePosition {
    pub fn index(self) -> usize {
        self.0
    }
}

/// An infinite trace `prefix · cycle^ω` of atomic relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoTrace {
    model: Arc<CounterpartModel>,
    steps: Vec<RelId>,
    prefix_len: usize,
}

impl LassoTrace {
    pub fn new(
        model: Arc<CounterpartModel>,
        prefix: Vec<RelId>,
        cycle: Vec<RelId>,
    ) -> Result<Self, ModelError> {
        if cycle.is_empty() {
            return Err(ModelError::EmptyCycle);
        }
        let prefix_len = prefix.len();
        let mut steps = prefix;
        steps.extend(cycle);
        for (i, &r) in steps.iter().enumerate() {
            let next = if i + 1 < steps.len() {
                steps[i + 1]
            } else {
                steps[prefix_len]
            };
            let (a, b) = (model.relation(r), model.relation(next));
            if a.target != b.source {
                return Err(ModelError::BrokenChain {
                    from: a.name.clone(),
                    to: b.name.clone(),
                    world: model.world(a.target).name.clone(),
                });
            }
        }
        Ok(LassoTrace {
            model,
            steps,
            prefix_len,
        })
    }

    pub fn from_names(
        model: Arc<CounterpartModel>,
        prefix: &[&str],
        cycle: &[&str],
    ) -> Result<Self, ModelError> {
        let ids = |names: &[&str]| {
            names
                .iter()
                .map(|n| {
                    model
                        .relation_id(n)
                        .ok_or_else(|| ModelError::UnknownRelation(n.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let (p, c) = (ids(prefix)?, ids(cycle)?);
        LassoTrace::new(model, p, c)
    }

    pub fn model(&self) -> &Arc<CounterpartModel> {
        &self.model
    }

    /// Number of distinct positions, `|prefix| + |cycle|`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix_len
    }

    pub fn cycle_len(&self) -> usize {
        self.steps.len() - self.prefix_len
    }

    pub fn prefix(&self) -> &[RelId] {
        &self.steps[..self.prefix_len]
    }

    pub fn cycle(&self) -> &[RelId] {
        &self.steps[self.prefix_len..]
    }

    pub fn normalize(&self, i: usize) -> TracePosition {
        TracePosition(self.normalize_index(i))
    }

    pub(crate) fn normalize_index(&self, i: usize) -> usize {
        if i < self.steps.len() {
            i
        } else {
            self.prefix_len + (i - self.prefix_len) % self.cycle_len()
        }
    }

    pub(crate) fn next_index(&self, i: usize) -> usize {
        self.normalize_index(i + 1)
    }

    pub fn relation_at(&self, p: TracePosition) -> RelId {
        self.steps[p.0]
    }

    pub(crate) fn relation_index(&self, i: usize) -> RelId {
        self.steps[i]
    }

    /// The world at a position is the source world of the relation there.
    pub fn world_at(&self, p: TracePosition) -> WorldId {
        self.model.relation(self.steps[p.0]).source
    }

    pub(crate) fn world_index(&self, i: usize) -> WorldId {
        self.model.relation(self.steps[i]).source
    }

    /// The atomic relation at `p` together with the following position.
    pub fn step(&self, p: TracePosition) -> (&RelMorphism, TracePosition) {
        let r = &self.model.relation(self.steps[p.0]).morphism;
        (r, TracePosition(self.next_index(p.0)))
    }

    /// The `(world, relation)` steps, prefix then cycle.
    pub fn steps(&self) -> impl Iterator<Item = (WorldId, RelId)> + '_ {
        self.steps
            .iter()
            .map(|&r| (self.model.relation(r).source, r))
    }

    /// Composite of the `i` relations starting at `p`; the identity on the
    /// world at `p` when `i = 0`.
    pub fn prefix_composite(&self, p: TracePosition, i: usize) -> RelMorphism {
        let mut acc = RelMorphism::identity(self.model.algebra(self.world_at(p)));
        let mut pos = p;
        for _ in 0..i {
            let (r, next) = self.step(pos);
            acc = acc.compose(r).expect("trace steps chain");
            pos = next;
        }
        acc
    }

    /// The same infinite trace presented with the cycle unrolled once into
    /// the prefix.
    pub fn unrolled(&self) -> LassoTrace {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(self.cycle());
        LassoTrace {
            model: self.model.clone(),
            steps,
            prefix_len: self.steps.len(),
        }
    }
}

/// A parsed model file: the model and its named traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelDocument {
    pub model: Arc<CounterpartModel>,
    pub traces: IndexMap<String, LassoTrace>,
}

impl ModelDocument {
    pub fn trace(&self, name: &str) -> Option<&LassoTrace> {
        self.traces.get(name)
    }
}
