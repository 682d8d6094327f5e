//! Cumuli, multimodal clusters, and density.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::context::{Tuple, TupleSet};
use crate::{Error, Result};

/// A mode-tagged set of entity ids, kept sorted strictly ascending.
///
/// Members are shared, so clones are cheap.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cumulus {
    mode: usize,
    members: Arc<[u32]>,
}

impl Cumulus {
    pub fn new(mode: usize, members: impl IntoIterator<Item = u32>) -> Self {
        let mut members: Vec<u32> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Cumulus {
            mode,
            members: members.into(),
        }
    }

    /// Caller guarantees `members` is sorted and free of duplicates.
    pub(crate) fn from_sorted(mode: usize, members: &[u32]) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Cumulus {
            mode,
            members: members.into(),
        }
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.members.binary_search(&id).is_ok()
    }

    pub fn is_subset(&self, other: &Cumulus) -> bool {
        self.mode == other.mode && self.members.iter().all(|&e| other.contains(e))
    }
}

/// How a cluster's density is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DensityMode {
    /// Fraction of the cluster's box present in the relation.
    #[default]
    Exact,
    /// Number of distinct generating tuples over the box volume. A lower
    /// bound on the exact density.
    Generators,
}

/// One cumulus per mode plus generator bookkeeping.
///
/// Identity is the component sequence; see [`MultimodalCluster::components`].
#[derive(Clone, Debug, PartialEq)]
pub struct MultimodalCluster {
    components: Vec<Cumulus>,
    /// Number of relation tuples generating exactly this cluster.
    pub generator_count: usize,
    /// Lexicographically smallest generating tuple.
    pub representative: Option<Tuple>,
    /// Density under the mode the producing engine was run with.
    pub density: Option<f64>,
}

impl MultimodalCluster {
    /// `components[k]` must carry mode `k`.
    pub fn new(components: Vec<Cumulus>) -> Self {
        debug_assert!(components.iter().enumerate().all(|(k, c)| c.mode == k));
        MultimodalCluster {
            components,
            generator_count: 0,
            representative: None,
            density: None,
        }
    }

    pub fn components(&self) -> &[Cumulus] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Cumulus> {
        self.components
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    pub fn volume(&self) -> u128 {
        volume(&self.components)
    }

    /// Whether `ids` lies in the Cartesian product of the components.
    pub fn box_contains(&self, ids: &[u32]) -> bool {
        ids.len() == self.components.len()
            && self.components.iter().zip(ids).all(|(c, &e)| c.contains(e))
    }

    /// Canonical order: lexicographic over components.
    pub fn cmp_components(&self, other: &Self) -> Ordering {
        self.components.cmp(&other.components)
    }
}

/// Product of component cardinalities.
pub fn volume(components: &[Cumulus]) -> u128 {
    components.iter().map(|c| c.len() as u128).product()
}

/// `|box ∩ I| / volume`, where box is the Cartesian product of `components`.
///
/// Walks the box when it is no larger than the relation, otherwise scans the
/// relation and tests box membership.
pub fn exact_density(relation: &TupleSet, components: &[Cumulus]) -> Result<f64> {
    let vol = volume(components);
    if vol == 0 {
        return Err(Error::ZeroVolume);
    }
    let hits = if vol <= relation.len() as u128 {
        count_box_hits(relation, components)
    } else {
        relation
            .iter()
            .filter(|t| components.iter().zip(t.iter()).all(|(c, &e)| c.contains(e)))
            .count() as u128
    };
    Ok(hits as f64 / vol as f64)
}

fn count_box_hits(relation: &TupleSet, components: &[Cumulus]) -> u128 {
    let n = components.len();
    let mut cursor = alloc::vec![0usize; n];
    let mut probe: Vec<u32> = components.iter().map(|c| c.members()[0]).collect();
    let mut hits = 0u128;
    loop {
        if relation.contains(&probe) {
            hits += 1;
        }
        // odometer, last mode fastest
        let mut k = n;
        loop {
            if k == 0 {
                return hits;
            }
            k -= 1;
            cursor[k] += 1;
            if cursor[k] < components[k].len() {
                probe[k] = components[k].members()[cursor[k]];
                break;
            }
            cursor[k] = 0;
            probe[k] = components[k].members()[0];
        }
    }
}

/// Density of a cluster under `mode`. Exact mode needs the relation.
pub fn density(
    mode: DensityMode,
    relation: Option<&TupleSet>,
    components: &[Cumulus],
    generators: usize,
) -> Result<f64> {
    match mode {
        DensityMode::Exact => {
            let relation = relation.ok_or_else(|| {
                Error::Config("exact density requires the relation to be available".into())
            })?;
            exact_density(relation, components)
        }
        DensityMode::Generators => {
            let vol = volume(components);
            if vol == 0 {
                return Err(Error::ZeroVolume);
            }
            Ok(generators as f64 / vol as f64)
        }
    }
}

/// A set of clusters in canonical order with pairwise distinct components.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClusterSet(Vec<MultimodalCluster>);

impl ClusterSet {
    /// Sorts canonically. Panics in debug builds on duplicate components.
    pub fn from_unsorted(mut clusters: Vec<MultimodalCluster>) -> Self {
        clusters.sort_by(MultimodalCluster::cmp_components);
        debug_assert!(clusters
            .windows(2)
            .all(|w| w[0].components != w[1].components));
        ClusterSet(clusters)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, MultimodalCluster> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[MultimodalCluster] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<MultimodalCluster> {
        self.0
    }

    /// Keeps clusters whose component `k` has at least `min[k]` members.
    pub fn retain_min_cardinality(&mut self, min: &[usize]) {
        self.0.retain(|c| {
            c.components
                .iter()
                .zip(min)
                .all(|(comp, &m)| comp.len() >= m)
        });
    }

    /// Total number of generating tuples over all clusters, i.e. the cluster
    /// count before deduplication.
    pub fn generated_count(&self) -> usize {
        self.0.iter().map(|c| c.generator_count).sum()
    }
}

impl<'a> IntoIterator for &'a ClusterSet {
    type Item = &'a MultimodalCluster;
    type IntoIter = core::slice::Iter<'a, MultimodalCluster>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}
