//! Cumulus and tolerance operators, single-tuple cluster generation, and the
//! brute-force reference enumeration that every engine is checked against.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::cluster::{ClusterSet, Cumulus, DensityMode, MultimodalCluster};
use crate::context::{PolyContext, Tuple};
use crate::{Error, Result};

fn check(ctx: &PolyContext, t: &[u32], mode: usize) -> Result<()> {
    if mode >= ctx.arity() {
        return Err(Error::ModeOutOfRange {
            mode,
            arity: ctx.arity(),
        });
    }
    if !ctx.contains(t) {
        return Err(Error::NotInRelation);
    }
    Ok(())
}

/// All mode-`mode` entities that can replace position `mode` of `t` while
/// staying inside the relation. `t` must belong to the relation.
pub fn cumulus(ctx: &PolyContext, t: &[u32], mode: usize) -> Result<Cumulus> {
    check(ctx, t, mode)?;
    let mut probe = Tuple::from_slice(t);
    let members = (0..ctx.mode_size(mode) as u32).filter(|&e| {
        probe = probe.replaced(mode, e);
        ctx.contains(&probe)
    });
    Ok(Cumulus::new(mode, members.collect::<Vec<_>>()))
}

/// The cumulus restricted to entities whose tuple value lies within `delta`
/// of the value of `t` (inclusive).
pub fn delta_cumulus(ctx: &PolyContext, t: &[u32], mode: usize, delta: f64) -> Result<Cumulus> {
    if !ctx.is_valued() {
        return Err(Error::Config(
            "tolerance operators need a valued context".into(),
        ));
    }
    check(ctx, t, mode)?;
    let anchor = ctx.value(t).expect("member of a valued context");
    let mut probe = Tuple::from_slice(t);
    let members = (0..ctx.mode_size(mode) as u32).filter(|&e| {
        probe = probe.replaced(mode, e);
        ctx.value(&probe)
            .is_some_and(|v| within(v, anchor, delta))
    });
    Ok(Cumulus::new(mode, members.collect::<Vec<_>>()))
}

#[inline]
pub(crate) fn within(value: f64, anchor: f64, delta: f64) -> bool {
    let diff = value - anchor;
    let diff = if diff < 0.0 { -diff } else { diff };
    diff <= delta
}

/// The cluster generated by `t`: its cumulus in every mode.
pub fn generate_cluster(ctx: &PolyContext, t: &[u32]) -> Result<MultimodalCluster> {
    let components = (0..ctx.arity())
        .map(|k| cumulus(ctx, t, k))
        .collect::<Result<Vec<_>>>()?;
    let mut cluster = MultimodalCluster::new(components);
    cluster.generator_count = 1;
    cluster.representative = Some(Tuple::from_slice(t));
    Ok(cluster)
}

/// Reference enumeration: generate from every tuple, merge equal clusters,
/// keep those with density `>= theta`.
///
/// Exact density is counted by walking the whole box, independently of
/// [`crate::exact_density`].
pub fn oracle_enumerate(ctx: &PolyContext, theta: f64, mode: DensityMode) -> ClusterSet {
    let mut merged: BTreeMap<Vec<Cumulus>, (usize, Tuple)> = BTreeMap::new();
    for t in ctx.tuples() {
        let cluster = generate_cluster(ctx, t).expect("tuple of the relation");
        merged
            .entry(cluster.into_components())
            .and_modify(|(count, rep)| {
                *count += 1;
                if t < rep {
                    *rep = t.clone();
                }
            })
            .or_insert((1, t.clone()));
    }
    let mut out = Vec::new();
    for (components, (count, rep)) in merged {
        let vol: u128 = components.iter().map(|c| c.len() as u128).product();
        let density = match mode {
            DensityMode::Exact => box_tuples(&components)
                .filter(|b| ctx.contains(b))
                .count() as f64
                / vol as f64,
            DensityMode::Generators => count as f64 / vol as f64,
        };
        if density >= theta {
            let mut cluster = MultimodalCluster::new(components);
            cluster.generator_count = count;
            cluster.representative = Some(rep);
            cluster.density = Some(density);
            out.push(cluster);
        }
    }
    ClusterSet::from_unsorted(out)
}

/// Every tuple of the Cartesian product of `components`.
fn box_tuples(components: &[Cumulus]) -> impl Iterator<Item = Vec<u32>> + '_ {
    let total: usize = components.iter().map(Cumulus::len).product();
    (0..total).map(move |mut i| {
        let mut t = alloc::vec![0; components.len()];
        for (k, c) in components.iter().enumerate().rev() {
            t[k] = c.members()[i % c.len()];
            i /= c.len();
        }
        t
    })
}
