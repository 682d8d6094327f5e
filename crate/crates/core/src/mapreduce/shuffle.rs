use alloc::vec::Vec;
use core::hash::Hash;

use crate::batch::SubRelationKey;
use crate::cluster::Cumulus;
use crate::context::Tuple;
use crate::IndexMap;

/// 64-bit FNV-1a.
#[derive(Clone, Copy, Debug)]
pub struct Fnv1a64(u64);

impl Fnv1a64 {
    const OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;

    /// Unseeded FNV-1a.
    pub fn new() -> Self {
        Fnv1a64(Self::OFFSET_BASIS)
    }

    /// FNV-1a whose stream starts with the little-endian bytes of `seed`.
    pub fn with_seed(seed: u64) -> Self {
        let mut h = Self::new();
        h.write(&seed.to_le_bytes());
        h
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(Self::PRIME);
        }
    }

    pub fn write_u32(&mut self, v: u32) {
        self.write(&v.to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a64 {
    fn default() -> Self {
        Self::new()
    }
}

/// A shuffle key with a platform-independent byte serialization.
pub trait ShuffleKey: Hash + Eq + Sync {
    fn write_key(&self, h: &mut Fnv1a64);
}

fn write_ids(ids: &[u32], h: &mut Fnv1a64) {
    for &id in ids {
        h.write_u32(id);
    }
}

impl ShuffleKey for SubRelationKey {
    fn write_key(&self, h: &mut Fnv1a64) {
        h.write_u32(self.omitted() as u32);
        write_ids(self.remaining(), h);
    }
}

impl ShuffleKey for Tuple {
    fn write_key(&self, h: &mut Fnv1a64) {
        write_ids(self, h);
    }
}

impl ShuffleKey for Vec<Cumulus> {
    fn write_key(&self, h: &mut Fnv1a64) {
        for c in self {
            h.write_u32(c.mode() as u32);
            h.write_u32(c.len() as u32);
            write_ids(c.members(), h);
        }
    }
}

/// Partition of `key`: FNV-1a of its serialization modulo `partitions`.
pub fn partition_of<K: ShuffleKey>(key: &K, partitions: usize, seed: u64) -> usize {
    let mut h = Fnv1a64::with_seed(seed);
    key.write_key(&mut h);
    (h.finish() % partitions as u64) as usize
}

/// Partitions records and groups each partition by key, in order of first
/// appearance.
pub fn shuffle<K: ShuffleKey, V>(
    records: Vec<(K, V)>,
    partitions: usize,
    seed: u64,
) -> Vec<Vec<(K, Vec<V>)>> {
    let mut groups: Vec<IndexMap<K, Vec<V>>> =
        (0..partitions).map(|_| IndexMap::default()).collect();
    for (k, v) in records {
        let p = partition_of(&k, partitions, seed);
        groups[p].entry(k).or_default().push(v);
    }
    groups
        .into_iter()
        .map(|g| g.into_iter().collect())
        .collect()
}
