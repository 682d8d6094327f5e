use alloc::vec::Vec;

use super::stages::{map1, map2, map3, reduce1, reduce2, reduce3};
use super::{partition_of, Phase, PipelineConfig, ShuffleKey, StageRecord};
use crate::cluster::{ClusterSet, DensityMode};
use crate::context::PolyContext;
use crate::exec::{chunk_count, chunk_range, Executor};
use crate::{IndexMap, Result};

/// Observation and interception points of a pipeline run.
pub trait PipelineHooks {
    /// Receives every intermediate stream in deterministic order and returns
    /// the records the next phase consumes. The default keeps them in memory.
    fn exchange<R: StageRecord>(&mut self, records: Vec<R>) -> Result<Vec<R>> {
        Ok(records)
    }

    /// Called when a phase (including the shuffle feeding a reduce) is done.
    fn phase_done(&mut self, _phase: Phase, _records: usize) {}
}

/// Hooks that do nothing.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoHooks;

impl PipelineHooks for NoHooks {}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PipelineStats {
    /// Records in each intermediate stream S1..S5.
    pub stage_records: [usize; 5],
    /// Distinct keys seen by reduce1, reduce2, reduce3.
    pub reduce_groups: [usize; 3],
}

impl PipelineStats {
    pub fn peak_records(&self) -> usize {
        self.stage_records.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub clusters: ClusterSet,
    pub stats: PipelineStats,
}

fn map_phase<E, I, R, F>(exec: &E, workers: usize, split: usize, inputs: &[I], f: F) -> Vec<R>
where
    E: Executor,
    I: Sync,
    R: Send,
    F: Fn(&I, &mut Vec<R>) + Sync,
{
    let parts = exec.execute(workers, chunk_count(inputs.len(), split), |i| {
        let mut out = Vec::new();
        for x in &inputs[chunk_range(inputs.len(), split, i)] {
            f(x, &mut out);
        }
        out
    });
    let mut all = Vec::with_capacity(parts.iter().map(Vec::len).sum());
    for p in parts {
        all.extend(p);
    }
    all
}

/// Hash-partitions `records`, then reduces each partition's key groups in
/// order of first appearance. Output is concatenated in partition order.
fn reduce_phase<E, K, V, R, F>(
    exec: &E,
    cfg: &PipelineConfig,
    records: &[(K, V)],
    f: F,
) -> Result<(Vec<R>, usize)>
where
    E: Executor,
    K: ShuffleKey,
    V: Sync,
    R: Send,
    F: Fn(&K, Vec<&V>) -> Result<Option<R>> + Sync,
{
    let n = records.len();
    let assignment = exec.execute(cfg.map_workers, chunk_count(n, cfg.split_size), |i| {
        records[chunk_range(n, cfg.split_size, i)]
            .iter()
            .map(|(k, _)| partition_of(k, cfg.partitions, cfg.hash_seed) as u32)
            .collect::<Vec<_>>()
    });
    let mut buckets: Vec<Vec<u32>> = alloc::vec![Vec::new(); cfg.partitions];
    for (i, p) in assignment.into_iter().flatten().enumerate() {
        buckets[p as usize].push(i as u32);
    }

    let outs = exec.execute(cfg.reduce_workers, cfg.partitions, |p| {
        let mut groups: IndexMap<&K, Vec<&V>> = IndexMap::default();
        for &i in &buckets[p] {
            let (k, v) = &records[i as usize];
            groups.entry(k).or_default().push(v);
        }
        let group_count = groups.len();
        let mut out = Vec::new();
        for (k, vs) in groups {
            if let Some(r) = f(k, vs)? {
                out.push(r);
            }
        }
        Ok((out, group_count))
    });
    let mut all = Vec::new();
    let mut groups = 0;
    for part in outs {
        let (out, g) = part?;
        all.extend(out);
        groups += g;
    }
    Ok((all, groups))
}

/// Runs the three map/reduce rounds over the relation of `ctx`.
///
/// The result equals [`crate::operators::oracle_enumerate`] with the same
/// threshold and density mode, for any worker and partition counts.
pub fn run_pipeline<E: Executor, H: PipelineHooks>(
    ctx: &PolyContext,
    cfg: &PipelineConfig,
    exec: &E,
    hooks: &mut H,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    let relation = (cfg.density_mode == DensityMode::Exact).then(|| ctx.relation());
    let split = cfg.split_size;
    let mut stats = PipelineStats::default();

    // round 1: cumuli per sub-relation
    let s1 = map_phase(exec, cfg.map_workers, split, ctx.tuples(), |t, out| {
        out.extend(map1(t))
    });
    hooks.phase_done(Phase::Map1, s1.len());
    let s1 = hooks.exchange(s1)?;
    stats.stage_records[0] = s1.len();

    let (s2, g) = reduce_phase(exec, cfg, &s1, |k, vs| reduce1(k, vs).map(Some))?;
    drop(s1);
    stats.reduce_groups[0] = g;
    hooks.phase_done(Phase::Reduce1, s2.len());
    let s2 = hooks.exchange(s2)?;
    stats.stage_records[1] = s2.len();

    // round 2: clusters per generating tuple
    let s3 = map_phase(exec, cfg.map_workers, split, &s2, |(k, c), out| {
        out.extend(map2(k, c))
    });
    drop(s2);
    hooks.phase_done(Phase::Map2, s3.len());
    let s3 = hooks.exchange(s3)?;
    stats.stage_records[2] = s3.len();

    let (s4, g) = reduce_phase(exec, cfg, &s3, |k, cs| reduce2(k, cs).map(Some))?;
    drop(s3);
    stats.reduce_groups[1] = g;
    hooks.phase_done(Phase::Reduce2, s4.len());
    let s4 = hooks.exchange(s4)?;
    stats.stage_records[3] = s4.len();

    // round 3: deduplication and density
    let s5 = map_phase(exec, cfg.map_workers, split, &s4, |(t, c), out| {
        out.push(map3(t, c))
    });
    drop(s4);
    hooks.phase_done(Phase::Map3, s5.len());
    let s5 = hooks.exchange(s5)?;
    stats.stage_records[4] = s5.len();

    let (kept, g) = reduce_phase(exec, cfg, &s5, |k, gens| reduce3(k, gens, cfg, relation))?;
    drop(s5);
    stats.reduce_groups[2] = g;
    hooks.phase_done(Phase::Reduce3, kept.len());

    Ok(PipelineOutput {
        clusters: ClusterSet::from_unsorted(kept),
        stats,
    })
}
