//! N-modal contexts: interned entity dictionaries plus a deduplicated,
//! optionally valued relation.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::borrow::Borrow;
use core::hash::{Hash, Hasher};
use core::ops::Deref;

use smallvec::SmallVec;

use crate::{Error, HashMap, Result};

/// An entity of a given mode, identified by its per-mode interned index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId {
    pub mode: usize,
    pub id: u32,
}

/// One element of the relation: an entity id per mode, position `k` holding
/// the mode-`k` entity.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tuple(SmallVec<[u32; 4]>);

impl Tuple {
    pub fn new(ids: impl IntoIterator<Item = u32>) -> Self {
        Tuple(ids.into_iter().collect())
    }

    pub fn from_slice(ids: &[u32]) -> Self {
        Tuple(SmallVec::from_slice(ids))
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn ids(&self) -> &[u32] {
        &self.0
    }

    pub fn entity(&self, mode: usize) -> EntityId {
        EntityId {
            mode,
            id: self.0[mode],
        }
    }

    /// Copy of this tuple with position `mode` replaced by `id`.
    pub fn replaced(&self, mode: usize, id: u32) -> Tuple {
        let mut t = self.clone();
        t.0[mode] = id;
        t
    }
}

// Hash must agree with `[u32]` so sets keyed by `Tuple` can be probed by slice.
impl Hash for Tuple {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.as_slice().hash(state)
    }
}

impl Borrow<[u32]> for Tuple {
    fn borrow(&self) -> &[u32] {
        &self.0
    }
}

impl AsRef<[u32]> for Tuple {
    fn as_ref(&self) -> &[u32] {
        &self.0
    }
}

impl Deref for Tuple {
    type Target = [u32];

    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl From<&[u32]> for Tuple {
    fn from(ids: &[u32]) -> Self {
        Tuple::from_slice(ids)
    }
}

impl From<Vec<u32>> for Tuple {
    fn from(ids: Vec<u32>) -> Self {
        Tuple(SmallVec::from_vec(ids))
    }
}

impl<const N: usize> From<[u32; N]> for Tuple {
    fn from(ids: [u32; N]) -> Self {
        Tuple::from_slice(&ids)
    }
}

/// Bijection between entity strings of one mode and dense ids `0..len`.
/// Ids are assigned in first-seen order.
#[derive(Clone, Debug, Default)]
pub struct Dictionary {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<S> for Dictionary {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut dict = Dictionary::new();
        for name in iter {
            dict.intern(name.as_ref());
        }
        dict
    }
}

#[derive(Clone, Debug)]
enum TupleIndex {
    /// Tuples encoded in mixed radix over the mode sizes.
    Packed {
        sizes: Vec<u32>,
        map: HashMap<u64, u32>,
    },
    Wide(HashMap<Tuple, u32>),
}

/// A deduplicated set of tuples with insertion order and O(1) membership.
#[derive(Clone, Debug)]
pub struct TupleSet {
    arity: usize,
    tuples: Vec<Tuple>,
    index: TupleIndex,
}

impl TupleSet {
    pub fn new(arity: usize) -> Self {
        TupleSet {
            arity,
            tuples: Vec::new(),
            index: TupleIndex::Wide(HashMap::new()),
        }
    }

    /// Set whose ids are expected to stay below `sizes`; uses a packed
    /// integer index when the full cuboid fits in 64 bits.
    pub fn with_mode_sizes(sizes: &[usize]) -> Self {
        let fits = sizes
            .iter()
            .try_fold(1u64, |acc, &s| acc.checked_mul(s.max(1) as u64))
            .is_some()
            && sizes.iter().all(|&s| s <= u32::MAX as usize);
        let index = if fits {
            TupleIndex::Packed {
                sizes: sizes.iter().map(|&s| s as u32).collect(),
                map: HashMap::new(),
            }
        } else {
            TupleIndex::Wide(HashMap::new())
        };
        TupleSet {
            arity: sizes.len(),
            tuples: Vec::new(),
            index,
        }
    }

    fn pack(sizes: &[u32], ids: &[u32]) -> Option<u64> {
        if ids.len() != sizes.len() {
            return None;
        }
        let mut code = 0u64;
        for (&id, &size) in ids.iter().zip(sizes) {
            if id >= size {
                return None;
            }
            code = code * size as u64 + id as u64;
        }
        Some(code)
    }

    fn widen(&mut self) {
        let map = self
            .tuples
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        self.index = TupleIndex::Wide(map);
    }

    /// Inserts `t` unless present. Returns its position and whether it was new.
    pub fn insert(&mut self, t: Tuple) -> (usize, bool) {
        debug_assert_eq!(t.arity(), self.arity);
        if let TupleIndex::Packed { sizes, .. } = &self.index {
            if Self::pack(sizes, &t).is_none() {
                self.widen();
            }
        }
        let next = self.tuples.len() as u32;
        let pos = match &mut self.index {
            TupleIndex::Packed { sizes, map } => {
                let code = Self::pack(sizes, &t).expect("checked above");
                *map.entry(code).or_insert(next)
            }
            TupleIndex::Wide(map) => *map.entry(t.clone()).or_insert(next),
        };
        if pos == next {
            self.tuples.push(t);
            (pos as usize, true)
        } else {
            (pos as usize, false)
        }
    }

    pub fn position(&self, ids: &[u32]) -> Option<usize> {
        match &self.index {
            TupleIndex::Packed { sizes, map } => {
                Self::pack(sizes, ids).and_then(|c| map.get(&c)).map(|&p| p as usize)
            }
            TupleIndex::Wide(map) => map.get(ids).map(|&p| p as usize),
        }
    }

    pub fn contains(&self, ids: &[u32]) -> bool {
        self.position(ids).is_some()
    }

    /// Collects distinct tuples, sizing a packed index to the largest id
    /// of each mode when it fits.
    pub fn from_tuples<'a, I>(arity: usize, tuples: I) -> Self
    where
        I: IntoIterator<Item = &'a Tuple>,
        I::IntoIter: Clone,
    {
        let tuples = tuples.into_iter();
        let mut sizes = alloc::vec![0usize; arity];
        for t in tuples.clone() {
            for (s, &id) in sizes.iter_mut().zip(t.iter()) {
                *s = (*s).max(id as usize + 1);
            }
        }
        let mut set = TupleSet::with_mode_sizes(&sizes);
        set.tuples.reserve(tuples.size_hint().0);
        for t in tuples {
            set.insert(t.clone());
        }
        set
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn get(&self, pos: usize) -> Option<&Tuple> {
        self.tuples.get(pos)
    }

    pub fn as_slice(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Tuple> {
        self.tuples.iter()
    }
}

/// Load statistics reported by [`ContextBuilder`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub rows: usize,
    pub duplicates: usize,
}

/// An N-modal relation over interned entities, optionally carrying a real
/// value per tuple. Immutable once built.
#[derive(Clone, Debug)]
pub struct PolyContext {
    mode_names: Vec<String>,
    dictionaries: Vec<Dictionary>,
    relation: TupleSet,
    values: Option<Vec<f64>>,
    stats: LoadStats,
}

impl PolyContext {
    pub fn arity(&self) -> usize {
        self.dictionaries.len()
    }

    pub fn mode_names(&self) -> &[String] {
        &self.mode_names
    }

    pub fn mode_size(&self, mode: usize) -> usize {
        self.dictionaries[mode].len()
    }

    pub fn mode_sizes(&self) -> Vec<usize> {
        self.dictionaries.iter().map(Dictionary::len).collect()
    }

    pub fn dictionary(&self, mode: usize) -> &Dictionary {
        &self.dictionaries[mode]
    }

    pub fn dictionaries(&self) -> &[Dictionary] {
        &self.dictionaries
    }

    pub fn entity_name(&self, entity: EntityId) -> Option<&str> {
        self.dictionaries.get(entity.mode)?.name(entity.id)
    }

    /// Looks up a tuple by entity names; `None` if any name is unknown.
    pub fn tuple_of<S: AsRef<str>>(&self, names: &[S]) -> Option<Tuple> {
        if names.len() != self.arity() {
            return None;
        }
        names
            .iter()
            .zip(&self.dictionaries)
            .map(|(n, d)| d.id(n.as_ref()))
            .collect::<Option<Vec<_>>>()
            .map(Tuple::from)
    }

    pub fn relation(&self) -> &TupleSet {
        &self.relation
    }

    pub fn tuples(&self) -> &[Tuple] {
        self.relation.as_slice()
    }

    pub fn len(&self) -> usize {
        self.relation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relation.is_empty()
    }

    /// Membership test in the relation.
    pub fn contains(&self, ids: &[u32]) -> bool {
        self.relation.contains(ids)
    }

    pub fn is_valued(&self) -> bool {
        self.values.is_some()
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    pub fn value(&self, ids: &[u32]) -> Option<f64> {
        let values = self.values.as_ref()?;
        self.relation.position(ids).map(|p| values[p])
    }

    pub fn stats(&self) -> LoadStats {
        self.stats
    }

    /// `|I|` over the product of mode sizes; zero for an empty cuboid.
    pub fn density(&self) -> f64 {
        let cells: f64 = self.dictionaries.iter().map(|d| d.len() as f64).product();
        if cells == 0.0 {
            0.0
        } else {
            self.len() as f64 / cells
        }
    }

    /// The same relation with every tuple valued `value`.
    pub fn with_constant_value(mut self, value: f64) -> Self {
        self.values = Some(alloc::vec![value; self.len()]);
        self
    }
}

/// Incremental construction of a [`PolyContext`].
#[derive(Clone, Debug)]
pub struct ContextBuilder {
    mode_names: Vec<String>,
    dictionaries: Vec<Dictionary>,
    relation: TupleSet,
    values: Option<Vec<f64>>,
    stats: LoadStats,
}

impl ContextBuilder {
    pub fn new(arity: usize) -> Result<Self> {
        if arity < 2 {
            return Err(Error::InvalidArity(arity));
        }
        Ok(ContextBuilder {
            mode_names: (0..arity).map(|k| format!("mode{k}")).collect(),
            dictionaries: (0..arity).map(|_| Dictionary::new()).collect(),
            relation: TupleSet::new(arity),
            values: None,
            stats: LoadStats::default(),
        })
    }

    /// Starts from pre-populated dictionaries, for callers that push ids.
    pub fn with_dictionaries(dictionaries: Vec<Dictionary>) -> Result<Self> {
        let mut builder = Self::new(dictionaries.len())?;
        let sizes: Vec<usize> = dictionaries.iter().map(Dictionary::len).collect();
        builder.relation = TupleSet::with_mode_sizes(&sizes);
        builder.dictionaries = dictionaries;
        Ok(builder)
    }

    pub fn valued(mut self) -> Self {
        self.values = Some(Vec::new());
        self
    }

    pub fn mode_names<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self> {
        if names.len() != self.dictionaries.len() {
            return Err(Error::Config(format!(
                "{} mode names given for arity {}",
                names.len(),
                self.dictionaries.len()
            )));
        }
        self.mode_names = names.iter().map(|n| n.as_ref().to_owned()).collect();
        Ok(self)
    }

    pub fn arity(&self) -> usize {
        self.dictionaries.len()
    }

    pub fn is_valued(&self) -> bool {
        self.values.is_some()
    }

    pub fn dictionaries(&self) -> &[Dictionary] {
        &self.dictionaries
    }

    /// Interns `fields` and adds the tuple. Returns `false` for a duplicate.
    pub fn push<S: AsRef<str>>(&mut self, fields: &[S], value: Option<f64>) -> Result<bool> {
        let row = self.stats.rows + 1;
        if fields.len() != self.arity() {
            return Err(Error::Format {
                row,
                expected: self.arity(),
                found: fields.len(),
            });
        }
        self.check_value(row, value)?;
        let ids: SmallVec<[u32; 4]> = fields
            .iter()
            .zip(&mut self.dictionaries)
            .map(|(f, d)| d.intern(f.as_ref()))
            .collect();
        self.insert(row, Tuple(ids), value)
    }

    /// Adds a tuple of already interned ids.
    pub fn push_ids(&mut self, ids: &[u32], value: Option<f64>) -> Result<bool> {
        let row = self.stats.rows + 1;
        if ids.len() != self.arity() {
            return Err(Error::Format {
                row,
                expected: self.arity(),
                found: ids.len(),
            });
        }
        for (mode, (&id, d)) in ids.iter().zip(&self.dictionaries).enumerate() {
            if id as usize >= d.len() {
                return Err(Error::Config(format!(
                    "row {row}: id {id} is not registered in mode {mode}"
                )));
            }
        }
        self.check_value(row, value)?;
        self.insert(row, Tuple::from_slice(ids), value)
    }

    fn check_value(&self, row: usize, value: Option<f64>) -> Result<()> {
        match (self.values.is_some(), value.is_some()) {
            (true, false) => Err(Error::Config(format!("row {row}: missing value"))),
            (false, true) => Err(Error::Config(format!(
                "row {row}: value given for an unvalued context"
            ))),
            _ => Ok(()),
        }
    }

    fn insert(&mut self, row: usize, t: Tuple, value: Option<f64>) -> Result<bool> {
        let (pos, fresh) = self.relation.insert(t);
        if let (Some(values), Some(v)) = (&mut self.values, value) {
            if fresh {
                values.push(v);
            } else if values[pos] != v {
                return Err(Error::Functionality {
                    row,
                    existing: values[pos],
                    conflicting: v,
                });
            }
        }
        self.stats.rows += 1;
        if !fresh {
            self.stats.duplicates += 1;
        }
        Ok(fresh)
    }

    pub fn build(self) -> PolyContext {
        let sizes: Vec<usize> = self.dictionaries.iter().map(Dictionary::len).collect();
        let mut relation = TupleSet::with_mode_sizes(&sizes);
        for t in self.relation.tuples {
            relation.insert(t);
        }
        PolyContext {
            mode_names: self.mode_names,
            dictionaries: self.dictionaries,
            relation,
            values: self.values,
            stats: self.stats,
        }
    }
}

/// Builds a context from string rows, deduplicating repeated tuples.
///
/// Repeated rows of a valued context must agree on their value.
pub fn build_context<R, S>(rows: &[R], arity: usize, values: Option<&[f64]>) -> Result<PolyContext>
where
    R: AsRef<[S]>,
    S: AsRef<str>,
{
    let mut builder = ContextBuilder::new(arity)?;
    if let Some(values) = values {
        if values.len() != rows.len() {
            return Err(Error::ValueCount {
                rows: rows.len(),
                values: values.len(),
            });
        }
        builder = builder.valued();
    }
    for (i, row) in rows.iter().enumerate() {
        builder.push(row.as_ref(), values.map(|v| v[i]))?;
    }
    Ok(builder.build())
}
