use alloc::format;
use alloc::vec::Vec;

use super::PipelineConfig;
use crate::batch::SubRelationKey;
use crate::cluster::{self, Cumulus, MultimodalCluster};
use crate::context::{EntityId, Tuple, TupleSet};
use crate::{Error, Result};

/// One ⟨sub-relation, entity⟩ pair per mode of `t`.
pub fn map1(t: &Tuple) -> impl Iterator<Item = (SubRelationKey, EntityId)> + '_ {
    (0..t.arity()).map(move |k| (SubRelationKey::of(t, k), t.entity(k)))
}

/// Unions the entities of one key into a cumulus.
pub fn reduce1<'a>(
    key: &SubRelationKey,
    values: impl IntoIterator<Item = &'a EntityId>,
) -> Result<(SubRelationKey, Cumulus)> {
    let mode = key.omitted();
    let mut members = Vec::new();
    for e in values {
        if e.mode != mode {
            return Err(Error::Integrity {
                stage: "reduce1",
                detail: format!("entity of mode {} under key {key:?}", e.mode),
            });
        }
        members.push(e.id);
    }
    Ok((key.clone(), Cumulus::new(mode, members)))
}

/// Re-expands a cumulus into one ⟨tuple, cumulus⟩ pair per member.
pub fn map2<'a>(
    key: &'a SubRelationKey,
    cumulus: &'a Cumulus,
) -> impl Iterator<Item = (Tuple, Cumulus)> + 'a {
    cumulus
        .members()
        .iter()
        .map(move |&e| (key.restore(e), cumulus.clone()))
}

/// Assembles the cumuli received for one tuple into its cluster. Exactly one
/// cumulus per mode is required.
pub fn reduce2<'a>(
    key: &Tuple,
    cumuli: impl IntoIterator<Item = &'a Cumulus>,
) -> Result<(Tuple, MultimodalCluster)> {
    let arity = key.arity();
    let mut slots: Vec<Option<Cumulus>> = alloc::vec![None; arity];
    for c in cumuli {
        let integrity = |detail| Error::Integrity {
            stage: "reduce2",
            detail,
        };
        let slot = slots
            .get_mut(c.mode())
            .ok_or_else(|| integrity(format!("cumulus of mode {} for tuple {key:?}", c.mode())))?;
        if slot.is_some() {
            return Err(integrity(format!(
                "two cumuli of mode {} for tuple {key:?}",
                c.mode()
            )));
        }
        *slot = Some(c.clone());
    }
    let components = slots
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            c.ok_or_else(|| Error::Integrity {
                stage: "reduce2",
                detail: format!("no cumulus of mode {k} for tuple {key:?}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cluster = MultimodalCluster::new(components);
    cluster.representative = Some(key.clone());
    Ok((key.clone(), cluster))
}

/// Swaps key and value so equal clusters meet in one reducer.
pub fn map3(key: &Tuple, cluster: &MultimodalCluster) -> (Vec<Cumulus>, Tuple) {
    (cluster.components().to_vec(), key.clone())
}

/// Merges the generators of one cluster and keeps it if its density reaches
/// `cfg.theta`. Exact mode needs the relation.
pub fn reduce3<'a>(
    components: &[Cumulus],
    generators: impl IntoIterator<Item = &'a Tuple>,
    cfg: &PipelineConfig,
    relation: Option<&TupleSet>,
) -> Result<Option<MultimodalCluster>> {
    let mut gens: Vec<&Tuple> = generators.into_iter().collect();
    gens.sort_unstable();
    gens.dedup();
    let Some(&rep) = gens.first() else {
        return Err(Error::Integrity {
            stage: "reduce3",
            detail: format!("cluster {components:?} has no generators"),
        });
    };
    let density = cluster::density(cfg.density_mode, relation, components, gens.len())?;
    if density < cfg.theta {
        return Ok(None);
    }
    let mut cluster = MultimodalCluster::new(components.to_vec());
    cluster.generator_count = gens.len();
    cluster.representative = Some(rep.clone());
    cluster.density = Some(density);
    Ok(Some(cluster))
}
