//! Clustering of many-valued contexts.
//!
//! Each tuple generates a cluster from tolerance-restricted cumuli: only
//! entities whose tuple value lies within `delta` of the generating tuple's
//! value are kept. A cluster is reported when it is valid, i.e. its exact
//! density reaches `rho_min` and every component has at least the minimum
//! support of its mode.

use alloc::format;
use alloc::vec::Vec;

use crate::batch::{CumulusTable, Slots};
use crate::cluster::{exact_density, volume, ClusterSet, Cumulus, MultimodalCluster};
use crate::context::{PolyContext, Tuple};
use crate::exec::{chunk_count, chunk_range, Executor, Sequential};
use crate::operators::within;
use crate::{Error, IndexMap, Result};

/// Minimum component cardinality, for all modes or per mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinSupport {
    Uniform(usize),
    PerMode(Vec<usize>),
}

impl MinSupport {
    pub fn for_mode(&self, mode: usize) -> usize {
        match self {
            MinSupport::Uniform(m) => *m,
            MinSupport::PerMode(v) => v.get(mode).copied().unwrap_or(0),
        }
    }
}

impl Default for MinSupport {
    fn default() -> Self {
        MinSupport::Uniform(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoacParams {
    pub delta: f64,
    pub rho_min: f64,
    pub min_sup: MinSupport,
    /// Treat an unvalued context as constant-valued instead of failing.
    pub binary_fallback: bool,
}

impl NoacParams {
    pub fn new(delta: f64, rho_min: f64, min_sup: usize) -> Self {
        NoacParams {
            delta,
            rho_min,
            min_sup: MinSupport::Uniform(min_sup),
            binary_fallback: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta.is_nan() || self.delta < 0.0 {
            return Err(Error::Config(format!("delta must be >= 0, got {}", self.delta)));
        }
        if !(0.0..=1.0).contains(&self.rho_min) {
            return Err(Error::Config(format!(
                "minimum density must lie in [0, 1], got {}",
                self.rho_min
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct NoacOutput {
    pub clusters: ClusterSet,
    /// Clusters generated, one per tuple.
    pub candidates: usize,
    /// Distinct generated clusters.
    pub distinct_candidates: usize,
    /// Valid clusters counted once per generating tuple.
    pub valid_generated: usize,
}

/// Whether `components` satisfies the density and cardinality constraints.
pub fn is_valid(components: &[Cumulus], ctx: &PolyContext, params: &NoacParams) -> Result<bool> {
    if volume(components) == 0 {
        return Err(Error::ZeroVolume);
    }
    let supported = components
        .iter()
        .enumerate()
        .all(|(k, c)| c.len() >= params.min_sup.for_mode(k));
    Ok(supported && exact_density(ctx.relation(), components)? >= params.rho_min)
}

const CHUNK: usize = 1024;

/// Generated cluster of every tuple, in relation order, before validation
/// and deduplication.
pub fn noac_candidates<E: Executor>(
    ctx: &PolyContext,
    params: &NoacParams,
    exec: &E,
    workers: usize,
) -> Result<Vec<MultimodalCluster>> {
    params.validate()?;
    let values = match (ctx.values(), params.binary_fallback) {
        (Some(v), _) => Some(v),
        (None, true) => None,
        (None, false) => {
            return Err(Error::Config(
                "valued context required (or enable the binary fallback)".into(),
            ))
        }
    };
    let mut table = CumulusTable::new(ctx.arity());
    let slots: Vec<Slots> = ctx.tuples().iter().map(|t| table.add(t)).collect();
    let resolved = table.resolve();
    let tuples = ctx.tuples();

    let chunks = exec.execute(workers, chunk_count(tuples.len(), CHUNK), |i| {
        let range = chunk_range(tuples.len(), CHUNK, i);
        tuples[range.clone()]
            .iter()
            .zip(&slots[range])
            .map(|(t, slots)| {
                let components = slots
                    .iter()
                    .enumerate()
                    .map(|(k, &s)| {
                        let full = &resolved[k][s as usize];
                        match values {
                            Some(values) => restrict(ctx, values, t, k, full, params.delta),
                            None => full.clone(),
                        }
                    })
                    .collect();
                let mut cluster = MultimodalCluster::new(components);
                cluster.generator_count = 1;
                cluster.representative = Some(t.clone());
                cluster
            })
            .collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

fn restrict(
    ctx: &PolyContext,
    values: &[f64],
    t: &Tuple,
    mode: usize,
    full: &Cumulus,
    delta: f64,
) -> Cumulus {
    let anchor = values[ctx.relation().position(t).expect("tuple of the relation")];
    let mut probe = t.clone();
    let kept: Vec<u32> = full
        .members()
        .iter()
        .copied()
        .filter(|&e| {
            probe = probe.replaced(mode, e);
            let pos = ctx.relation().position(&probe).expect("cumulus member");
            within(values[pos], anchor, delta)
        })
        .collect();
    if kept.len() == full.len() {
        full.clone()
    } else {
        Cumulus::from_sorted(mode, &kept)
    }
}

/// Valid, deduplicated clusters of a many-valued context.
pub fn noac_cluster(ctx: &PolyContext, params: &NoacParams) -> Result<ClusterSet> {
    noac_cluster_with(ctx, params, &Sequential, 1).map(|o| o.clusters)
}

/// [`noac_cluster`] with generation and validation spread over `workers`.
pub fn noac_cluster_with<E: Executor>(
    ctx: &PolyContext,
    params: &NoacParams,
    exec: &E,
    workers: usize,
) -> Result<NoacOutput> {
    let candidates = noac_candidates(ctx, params, exec, workers)?;
    let total = candidates.len();

    let mut merged: IndexMap<Vec<Cumulus>, (usize, Tuple)> = IndexMap::default();
    for c in candidates {
        let rep = c.representative.clone().expect("set by generation");
        merged
            .entry(c.into_components())
            .and_modify(|(count, r)| {
                *count += 1;
                if rep < *r {
                    *r = rep.clone();
                }
            })
            .or_insert((1, rep));
    }
    let distinct: Vec<(Vec<Cumulus>, (usize, Tuple))> = merged.into_iter().collect();

    let chunks = exec.execute(workers, chunk_count(distinct.len(), CHUNK / 16), |i| {
        let mut kept = Vec::new();
        for (components, (count, rep)) in &distinct[chunk_range(distinct.len(), CHUNK / 16, i)] {
            let supported = components
                .iter()
                .enumerate()
                .all(|(k, c)| c.len() >= params.min_sup.for_mode(k));
            if !supported {
                continue;
            }
            let density = exact_density(ctx.relation(), components)?;
            if density >= params.rho_min {
                let mut cluster = MultimodalCluster::new(components.clone());
                cluster.generator_count = *count;
                cluster.representative = Some(rep.clone());
                cluster.density = Some(density);
                kept.push(cluster);
            }
        }
        Ok(kept)
    });
    let mut out = Vec::new();
    for chunk in chunks {
        out.extend(chunk?);
    }
    let clusters = ClusterSet::from_unsorted(out);
    Ok(NoacOutput {
        valid_generated: clusters.generated_count(),
        distinct_candidates: distinct.len(),
        candidates: total,
        clusters,
    })
}
