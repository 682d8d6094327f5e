//! One-pass online engine.
//!
//! Each incoming tuple adds its entities to the shared cumulus table and
//! appends a record naming the table slots it touched. Records are resolved
//! against the table only when clusters are requested, so a record always
//! sees the cumuli as they stand at resolution time.

use alloc::vec::Vec;

use hashbrown::HashSet;

use crate::batch::{assemble, CumulusTable, Filter, SubRelationKey, Slots};
use crate::cluster::{ClusterSet, DensityMode, MultimodalCluster};
use crate::context::{Tuple, TupleSet};
use crate::exec::Sequential;
use crate::{Error, Result};

#[derive(Clone, Debug)]
struct Record {
    generator: Tuple,
    slots: Slots,
}

#[derive(Clone, Debug)]
pub struct OnlineState {
    arity: usize,
    table: CumulusTable,
    records: Vec<Record>,
    /// (mode-0 slot, mode-0 entity) of every ingested tuple. The slot fixes
    /// all other positions, so the pair identifies the tuple.
    seen: HashSet<u64>,
    offered: usize,
}

fn seen_key(slot: u32, entity: u32) -> u64 {
    (u64::from(slot) << 32) | u64::from(entity)
}

impl OnlineState {
    pub fn new(arity: usize) -> Result<Self> {
        if arity < 2 {
            return Err(Error::InvalidArity(arity));
        }
        Ok(OnlineState {
            arity,
            table: CumulusTable::new(arity),
            records: Vec::new(),
            seen: HashSet::new(),
            offered: 0,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Ingests one tuple. Returns `false` if it was seen before.
    pub fn add(&mut self, t: &[u32]) -> Result<bool> {
        self.offered += 1;
        if t.len() != self.arity {
            return Err(Error::Format {
                row: self.offered,
                expected: self.arity,
                found: t.len(),
            });
        }
        let duplicate = self
            .table
            .slot_of(0, t)
            .is_some_and(|slot| self.seen.contains(&seen_key(slot, t[0])));
        if duplicate {
            return Ok(false);
        }
        let slots = self.table.add(t);
        self.seen.insert(seen_key(slots[0], t[0]));
        self.records.push(Record {
            generator: Tuple::from_slice(t),
            slots,
        });
        Ok(true)
    }

    /// Ingests a batch in order. Returns how many tuples were new.
    pub fn add_batch<T: AsRef<[u32]>>(&mut self, batch: impl IntoIterator<Item = T>) -> Result<usize> {
        let mut added = 0;
        for t in batch {
            if self.add(t.as_ref())? {
                added += 1;
            }
        }
        Ok(added)
    }

    /// Number of records, equal to the number of distinct tuples ingested.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn table(&self) -> &CumulusTable {
        &self.table
    }

    /// The distinct tuples ingested so far, in arrival order, with a fresh
    /// membership index.
    pub fn relation(&self) -> TupleSet {
        TupleSet::from_tuples(self.arity, self.records.iter().map(|r| &r.generator))
    }

    /// Current cumulus under `key`.
    pub fn cumulus(&self, key: &SubRelationKey) -> Option<crate::Cumulus> {
        self.table.get(key)
    }

    /// One cluster per record, resolved against the current table. Equal
    /// clusters from different generators are all kept.
    pub fn snapshot_clusters(&self) -> Vec<MultimodalCluster> {
        let resolved = self.table.resolve();
        self.records
            .iter()
            .map(|r| {
                let components = r
                    .slots
                    .iter()
                    .enumerate()
                    .map(|(k, &s)| resolved[k][s as usize].clone())
                    .collect();
                let mut cluster = MultimodalCluster::new(components);
                cluster.generator_count = 1;
                cluster.representative = Some(r.generator.clone());
                cluster
            })
            .collect()
    }

    /// Resolves, deduplicates, and filters by density and optional per-mode
    /// minimum cardinalities.
    pub fn post_process(
        &self,
        theta: f64,
        mode: DensityMode,
        min_cardinality: Option<&[usize]>,
    ) -> Result<ClusterSet> {
        let resolved = self.table.resolve();
        let generators = self
            .records
            .iter()
            .map(|r| (&r.generator, r.slots.as_slice()));
        let relation = (mode == DensityMode::Exact).then(|| self.relation());
        let filter = Filter {
            theta,
            mode,
            relation: relation.as_ref(),
        };
        let mut set = assemble(&resolved, generators, &filter, &Sequential, 1)?;
        if let Some(min) = min_cardinality {
            set.retain_min_cardinality(min);
        }
        Ok(set)
    }
}
