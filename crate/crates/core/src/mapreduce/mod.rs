//! Three-stage map/shuffle/reduce pipeline.
//!
//! 1. `map1` splits each tuple into one ⟨sub-relation key, entity⟩ pair per
//!    mode; `reduce1` unions the entities of a key into a cumulus.
//! 2. `map2` re-expands each cumulus into ⟨tuple, cumulus⟩ pairs; `reduce2`
//!    assembles the N cumuli of a tuple into its cluster.
//! 3. `map3` swaps to ⟨cluster, tuple⟩; `reduce3` merges generators of equal
//!    clusters and applies the density threshold.
//!
//! Records are hash-partitioned between every map and reduce, and each phase
//! completes before the next starts.

mod pipeline;
mod record;
mod shuffle;
mod stages;

use alloc::format;

pub use pipeline::{run_pipeline, NoHooks, PipelineHooks, PipelineOutput, PipelineStats};
pub use record::{KeyValueRecord, StageRecord};
pub use shuffle::{partition_of, shuffle, Fnv1a64, ShuffleKey};
pub use stages::{map1, map2, map3, reduce1, reduce2, reduce3};

use crate::cluster::DensityMode;
use crate::{Error, Result};

/// Seed mixed into the partitioning hash unless configured otherwise.
pub const DEFAULT_HASH_SEED: u64 = 0x6f61_6321;

/// An intermediate record stream, named by the phase that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    /// map1 output: ⟨sub-relation, entity⟩
    S1,
    /// reduce1 output: ⟨sub-relation, cumulus⟩
    S2,
    /// map2 output: ⟨tuple, cumulus⟩
    S3,
    /// reduce2 output: ⟨tuple, cluster⟩
    S4,
    /// map3 output: ⟨cluster, tuple⟩
    S5,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::S1, Stage::S2, Stage::S3, Stage::S4, Stage::S5];

    pub fn id(self) -> &'static str {
        match self {
            Stage::S1 => "S1",
            Stage::S2 => "S2",
            Stage::S3 => "S3",
            Stage::S4 => "S4",
            Stage::S5 => "S5",
        }
    }

    pub fn from_id(id: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.id() == id)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Map1,
    Reduce1,
    Map2,
    Reduce2,
    Map3,
    Reduce3,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Map1 => "map1",
            Phase::Reduce1 => "reduce1",
            Phase::Map2 => "map2",
            Phase::Reduce2 => "reduce2",
            Phase::Map3 => "map3",
            Phase::Reduce3 => "reduce3",
        }
    }

    /// 1, 2 or 3.
    pub fn round(self) -> usize {
        match self {
            Phase::Map1 | Phase::Reduce1 => 1,
            Phase::Map2 | Phase::Reduce2 => 2,
            Phase::Map3 | Phase::Reduce3 => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub map_workers: usize,
    pub reduce_workers: usize,
    pub partitions: usize,
    pub theta: f64,
    pub density_mode: DensityMode,
    pub hash_seed: u64,
    /// Tuples per map task. Independent of the worker count so that stage
    /// outputs are identical for any number of workers.
    pub split_size: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            map_workers: 1,
            reduce_workers: 1,
            partitions: 1,
            theta: 0.0,
            density_mode: DensityMode::Exact,
            hash_seed: DEFAULT_HASH_SEED,
            split_size: 8192,
        }
    }
}

impl PipelineConfig {
    /// Same worker count for map and reduce phases.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.map_workers = workers;
        self.reduce_workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("pipeline: {msg}")));
        if self.map_workers == 0 || self.reduce_workers == 0 {
            return bad("worker counts must be at least 1");
        }
        if self.partitions == 0 {
            return bad("partition count must be at least 1");
        }
        if self.split_size == 0 {
            return bad("split size must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return bad("theta must lie in [0, 1]");
        }
        Ok(())
    }
}
