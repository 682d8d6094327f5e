//! Multimodal (N-ary) clustering with prime operators.
//!
//! A [`PolyContext`] holds an N-ary relation over interned entities. Every
//! tuple of the relation generates one cluster: for each mode `k`, the set of
//! mode-`k` entities that can replace position `k` of the tuple while staying
//! inside the relation (its *cumulus*). Clusters are deduplicated and filtered
//! by density.
//!
//! Four engines produce the same canonical cluster set:
//!
//! * [`batch`] precomputes every cumulus, then makes one pass over the relation.
//! * [`online`] ingests tuples incrementally and resolves clusters on demand.
//! * [`mapreduce`] runs a three-stage map/shuffle/reduce pipeline.
//! * [`nvalued`] works on many-valued contexts with tolerance-restricted cumuli
//!   and minimum density/cardinality constraints.
//!
//! [`operators::oracle_enumerate`] is a brute-force reference that the engines
//! are tested against.
//!
//! The crate is `no_std` and only needs `alloc`. Parallelism is injected via
//! the [`Executor`] trait; [`Sequential`] is the built-in single-threaded one.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod batch;
pub mod cluster;
pub mod context;
mod error;
pub mod exec;
pub mod mapreduce;
pub mod nvalued;
pub mod online;
pub mod operators;

pub(crate) type HashMap<K, V> = hashbrown::HashMap<K, V>;
pub(crate) type IndexMap<K, V> = indexmap::IndexMap<K, V, hashbrown::DefaultHashBuilder>;

pub use cluster::{exact_density, volume, ClusterSet, Cumulus, DensityMode, MultimodalCluster};
pub use context::{
    build_context, ContextBuilder, Dictionary, EntityId, LoadStats, PolyContext, Tuple, TupleSet,
};
pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
