//! Batch engine: precompute every cumulus in one pass over the relation, then
//! emit one cluster per tuple with structural deduplication.

use alloc::vec::Vec;

use smallvec::SmallVec;

use crate::cluster::{self, ClusterSet, Cumulus, DensityMode, MultimodalCluster};
use crate::context::{PolyContext, Tuple, TupleSet};
use crate::exec::{chunk_count, chunk_range, Executor, Sequential};
use crate::{Error, HashMap, IndexMap, Result};

/// A tuple with one mode left out; the grouping key of a cumulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubRelationKey {
    omitted: usize,
    remaining: Tuple,
}

impl SubRelationKey {
    pub fn new(omitted: usize, remaining: Tuple) -> Self {
        SubRelationKey { omitted, remaining }
    }

    /// Key of `t` with position `omitted` removed.
    pub fn of(t: &[u32], omitted: usize) -> Self {
        let remaining = t
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != omitted)
            .map(|(_, &e)| e);
        SubRelationKey {
            omitted,
            remaining: Tuple::new(remaining),
        }
    }

    pub fn omitted(&self) -> usize {
        self.omitted
    }

    /// Entities of the other modes, in ascending mode order.
    pub fn remaining(&self) -> &Tuple {
        &self.remaining
    }

    /// The full tuple obtained by putting `entity` back at the omitted mode.
    pub fn restore(&self, entity: u32) -> Tuple {
        let rest = &self.remaining;
        let ids = rest[..self.omitted]
            .iter()
            .copied()
            .chain(core::iter::once(entity))
            .chain(rest[self.omitted..].iter().copied());
        Tuple::new(ids)
    }
}

#[derive(Clone, Debug, Default)]
struct ModeSlots {
    slots: HashMap<Tuple, u32>,
    keys: Vec<Tuple>,
    members: Vec<Vec<u32>>,
}

/// Per-mode maps from sub-relation key to cumulus.
///
/// Each key owns a slot; members are appended in arrival order and sorted
/// when resolved.
#[derive(Clone, Debug)]
pub struct CumulusTable {
    modes: Vec<ModeSlots>,
}

pub(crate) type Slots = SmallVec<[u32; 4]>;

impl CumulusTable {
    pub fn new(arity: usize) -> Self {
        CumulusTable {
            modes: (0..arity).map(|_| ModeSlots::default()).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.modes.len()
    }

    /// Adds every entity of `t` to its cumulus. The caller guarantees `t`
    /// was not added before. Returns the slot used in each mode.
    pub(crate) fn add(&mut self, t: &[u32]) -> Slots {
        let mut used = Slots::new();
        let mut rest: SmallVec<[u32; 4]> = SmallVec::new();
        for (k, table) in self.modes.iter_mut().enumerate() {
            rest.clear();
            rest.extend(t.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &e)| e));
            let slot = match table.slots.get(rest.as_slice()) {
                Some(&slot) => slot,
                None => {
                    let slot = table.keys.len() as u32;
                    let key = Tuple::from_slice(&rest);
                    table.slots.insert(key.clone(), slot);
                    table.keys.push(key);
                    table.members.push(Vec::new());
                    slot
                }
            };
            table.members[slot as usize].push(t[k]);
            used.push(slot);
        }
        used
    }

    pub(crate) fn slot_of(&self, mode: usize, t: &[u32]) -> Option<u32> {
        let rest: SmallVec<[u32; 4]> = t
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != mode)
            .map(|(_, &e)| e)
            .collect();
        self.modes[mode].slots.get(rest.as_slice()).copied()
    }

    pub fn get(&self, key: &SubRelationKey) -> Option<Cumulus> {
        let table = self.modes.get(key.omitted)?;
        let &slot = table.slots.get(&key.remaining)?;
        Some(Cumulus::new(
            key.omitted,
            table.members[slot as usize].iter().copied(),
        ))
    }

    /// Number of distinct keys with mode `mode` omitted.
    pub fn key_count(&self, mode: usize) -> usize {
        self.modes[mode].keys.len()
    }

    pub fn entries(&self, mode: usize) -> impl Iterator<Item = (SubRelationKey, Cumulus)> + '_ {
        let table = &self.modes[mode];
        table.keys.iter().zip(&table.members).map(move |(key, members)| {
            (
                SubRelationKey::new(mode, key.clone()),
                Cumulus::new(mode, members.iter().copied()),
            )
        })
    }

    /// Canonical cumuli, indexed by mode then slot.
    pub(crate) fn resolve(&self) -> Vec<Vec<Cumulus>> {
        self.modes
            .iter()
            .enumerate()
            .map(|(k, table)| {
                table
                    .members
                    .iter()
                    .map(|m| Cumulus::new(k, m.iter().copied()))
                    .collect()
            })
            .collect()
    }
}

/// Populates the cumulus of every sub-relation key in a single pass.
pub fn precompute_primes(ctx: &PolyContext) -> CumulusTable {
    let mut table = CumulusTable::new(ctx.arity());
    for t in ctx.tuples() {
        table.add(t);
    }
    table
}

/// Deduplicated, density-filtered clusters of every tuple of the relation.
pub fn batch_cluster(ctx: &PolyContext, theta: f64, mode: DensityMode) -> ClusterSet {
    batch_cluster_with(ctx, theta, mode, &Sequential, 1)
}

/// [`batch_cluster`] with density evaluation spread over `workers`.
pub fn batch_cluster_with<E: Executor>(
    ctx: &PolyContext,
    theta: f64,
    mode: DensityMode,
    exec: &E,
    workers: usize,
) -> ClusterSet {
    let mut table = CumulusTable::new(ctx.arity());
    let slots: Vec<Slots> = ctx.tuples().iter().map(|t| table.add(t)).collect();
    let resolved = table.resolve();
    let generators = ctx.tuples().iter().zip(slots.iter().map(|s| s.as_slice()));
    assemble(
        &resolved,
        generators,
        &Filter {
            theta,
            mode,
            relation: Some(ctx.relation()),
        },
        exec,
        workers,
    )
    .expect("relation is available and every generated cluster is non-empty")
}

pub(crate) struct Filter<'a> {
    pub theta: f64,
    pub mode: DensityMode,
    pub relation: Option<&'a TupleSet>,
}

const DENSITY_CHUNK: usize = 64;

/// Merges generators whose resolved clusters coincide, then measures and
/// filters each distinct cluster.
///
/// `resolved[k][slot]` is the canonical cumulus of `slot` in mode `k`; each
/// generator names its slot per mode.
pub(crate) fn assemble<'a, E: Executor>(
    resolved: &[Vec<Cumulus>],
    generators: impl Iterator<Item = (&'a Tuple, &'a [u32])>,
    filter: &Filter<'_>,
    exec: &E,
    workers: usize,
) -> Result<ClusterSet> {
    if filter.mode == DensityMode::Exact && filter.relation.is_none() {
        return Err(Error::Config(
            "exact density requires the ingested tuples to be retained".into(),
        ));
    }
    // Equal cumuli under different keys share one content id.
    let content_ids: Vec<Vec<u32>> = resolved
        .iter()
        .map(|cumuli| {
            let mut seen: HashMap<&[u32], u32> = HashMap::new();
            cumuli
                .iter()
                .map(|c| {
                    let next = seen.len() as u32;
                    *seen.entry(c.members()).or_insert(next)
                })
                .collect()
        })
        .collect();

    let mut merged: IndexMap<Slots, (usize, &'a Tuple, &'a [u32])> = IndexMap::default();
    for (t, slots) in generators {
        let key: Slots = slots
            .iter()
            .enumerate()
            .map(|(k, &s)| content_ids[k][s as usize])
            .collect();
        merged
            .entry(key)
            .and_modify(|(count, rep, _)| {
                *count += 1;
                if t < *rep {
                    *rep = t;
                }
            })
            .or_insert((1, t, slots));
    }

    let distinct: Vec<(usize, &Tuple, &[u32])> = merged.into_values().collect();
    let chunks = exec.execute(workers, chunk_count(distinct.len(), DENSITY_CHUNK), |i| {
        distinct[chunk_range(distinct.len(), DENSITY_CHUNK, i)]
            .iter()
            .map(|&(count, rep, slots)| {
                let components: Vec<Cumulus> = slots
                    .iter()
                    .enumerate()
                    .map(|(k, &s)| resolved[k][s as usize].clone())
                    .collect();
                let density =
                    cluster::density(filter.mode, filter.relation, &components, count)?;
                if density < filter.theta {
                    return Ok(None);
                }
                let mut cluster = MultimodalCluster::new(components);
                cluster.generator_count = count;
                cluster.representative = Some(rep.clone());
                cluster.density = Some(density);
                Ok(Some(cluster))
            })
            .collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::new();
    for chunk in chunks {
        out.extend(chunk?.into_iter().flatten());
    }
    Ok(ClusterSet::from_unsorted(out))
}
