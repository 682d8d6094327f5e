//! File-backed pipeline intermediates.
//!
//! Each stream is written to `<dir>/<stage>.tsv`, one record per line as
//! `stage<TAB>key<TAB>value`, and read back before the next phase runs:
//!
//! ```text
//! S1  k=0|i1,l1          u2
//! S2  k=0|i1,l1          c=0|u1,u2,u3
//! S3  u2,i1,l1           c=0|u1,u2,u3
//! S4  u2,i1,l1           c=0|u1,u2,u3;c=1|i1,i2;c=2|l1,l2
//! S5  c=0|u1,u2,u3;...   u2,i1,l1
//! ```
//!
//! Entities are written by name, so files from runs with different worker
//! or partition counts can be compared byte for byte.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use polyclust_core::batch::SubRelationKey;
use polyclust_core::mapreduce::{KeyValueRecord, PipelineHooks, Stage, StageRecord};
use polyclust_core::{Cumulus, EntityId, MultimodalCluster, PolyContext, Tuple};
use tempfile::TempDir;

use crate::escape::{escape, join_names, split, split_names, split_once, unescape};
use crate::{Error, Result};

/// Serializes records over the dictionaries of a context.
pub struct RecordCodec<'a> {
    ctx: &'a PolyContext,
    cumuli: HashMap<String, Cumulus>,
}

impl<'a> RecordCodec<'a> {
    pub fn new(ctx: &'a PolyContext) -> Self {
        RecordCodec {
            ctx,
            cumuli: HashMap::new(),
        }
    }

    fn name(&self, mode: usize, id: u32) -> &'a str {
        self.ctx.dictionary(mode).name(id).expect("interned id")
    }

    fn tuple(&self, modes: impl Iterator<Item = usize>, ids: &[u32]) -> String {
        join_names(modes.zip(ids).map(|(k, &id)| self.name(k, id)))
    }

    fn cumulus(&self, c: &Cumulus) -> String {
        format!(
            "c={}|{}",
            c.mode(),
            join_names(c.members().iter().map(|&id| self.name(c.mode(), id)))
        )
    }

    fn cluster(&self, comps: &[Cumulus]) -> String {
        comps
            .iter()
            .map(|c| self.cumulus(c))
            .collect::<Vec<_>>()
            .join(";")
    }

    fn sub_key(&self, key: &SubRelationKey) -> String {
        let omitted = key.omitted();
        let modes = (0..self.ctx.arity()).filter(|&k| k != omitted);
        format!("k={omitted}|{}", self.tuple(modes, key.remaining()))
    }

    pub fn encode(&self, record: &KeyValueRecord) -> String {
        let (key, value) = match record {
            KeyValueRecord::SubRelationEntity { key, entity } => {
                (self.sub_key(key), escape(self.name(entity.mode, entity.id)))
            }
            KeyValueRecord::SubRelationCumulus { key, cumulus } => {
                (self.sub_key(key), self.cumulus(cumulus))
            }
            KeyValueRecord::TupleCumulus { key, cumulus } => {
                (self.tuple(0.., key), self.cumulus(cumulus))
            }
            KeyValueRecord::TupleCluster { key, cluster } => {
                (self.tuple(0.., key), self.cluster(cluster.components()))
            }
            KeyValueRecord::ClusterTuple { key, generator } => {
                (self.cluster(key), self.tuple(0.., generator))
            }
        };
        format!("{}\t{key}\t{value}", record.stage().id())
    }

    fn id(&self, mode: usize, name: &str) -> std::result::Result<u32, String> {
        let dict = self
            .ctx
            .dictionaries()
            .get(mode)
            .ok_or_else(|| format!("mode {mode} out of range"))?;
        dict.id(name)
            .ok_or_else(|| format!("unknown entity {name:?} in mode {mode}"))
    }

    fn parse_tuple(&self, modes: &[usize], s: &str) -> std::result::Result<Tuple, String> {
        let names = split_names(s)?;
        if names.len() != modes.len() {
            return Err(format!("{} entities where {} were expected", names.len(), modes.len()));
        }
        modes
            .iter()
            .zip(&names)
            .map(|(&k, n)| self.id(k, n))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Tuple::from)
    }

    fn parse_mode(s: &str) -> std::result::Result<usize, String> {
        s.parse().map_err(|_| format!("bad mode {s:?}"))
    }

    fn parse_sub_key(&self, s: &str) -> std::result::Result<SubRelationKey, String> {
        let (head, rest) = split_once(s, '|').ok_or_else(|| format!("bad key {s:?}"))?;
        let omitted = head
            .strip_prefix("k=")
            .ok_or_else(|| format!("bad key {s:?}"))
            .and_then(Self::parse_mode)?;
        let modes: Vec<usize> = (0..self.ctx.arity()).filter(|&k| k != omitted).collect();
        if omitted >= self.ctx.arity() {
            return Err(format!("mode {omitted} out of range"));
        }
        Ok(SubRelationKey::new(omitted, self.parse_tuple(&modes, rest)?))
    }

    fn parse_cumulus(&mut self, s: &str) -> std::result::Result<Cumulus, String> {
        if let Some(c) = self.cumuli.get(s) {
            return Ok(c.clone());
        }
        let (head, rest) = split_once(s, '|').ok_or_else(|| format!("bad cumulus {s:?}"))?;
        let mode = head
            .strip_prefix("c=")
            .ok_or_else(|| format!("bad cumulus {s:?}"))
            .and_then(Self::parse_mode)?;
        let ids = split_names(rest)?
            .iter()
            .map(|n| self.id(mode, n))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let c = Cumulus::new(mode, ids);
        self.cumuli.insert(s.to_owned(), c.clone());
        Ok(c)
    }

    fn parse_cluster(&mut self, s: &str) -> std::result::Result<Vec<Cumulus>, String> {
        let comps = split(s, ';')
            .into_iter()
            .map(|c| self.parse_cumulus(c))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if comps.len() != self.ctx.arity() || comps.iter().enumerate().any(|(k, c)| c.mode() != k) {
            return Err(format!("cluster {s:?} does not list one cumulus per mode in order"));
        }
        Ok(comps)
    }

    pub fn decode(&mut self, line_no: usize, line: &str) -> Result<KeyValueRecord> {
        self.decode_inner(line)
            .map_err(|m| Error::parse(line_no, m))
    }

    fn decode_inner(&mut self, line: &str) -> std::result::Result<KeyValueRecord, String> {
        let fields = split(line, '\t');
        let [stage, key, value] = fields[..] else {
            return Err(format!("expected 3 tab-separated fields, found {}", fields.len()));
        };
        let stage = Stage::from_id(stage).ok_or_else(|| format!("unknown stage {stage:?}"))?;
        let all: Vec<usize> = (0..self.ctx.arity()).collect();
        Ok(match stage {
            Stage::S1 => {
                let key = self.parse_sub_key(key)?;
                let mode = key.omitted();
                let id = self.id(mode, &unescape(value)?)?;
                KeyValueRecord::SubRelationEntity {
                    key,
                    entity: EntityId { mode, id },
                }
            }
            Stage::S2 => KeyValueRecord::SubRelationCumulus {
                key: self.parse_sub_key(key)?,
                cumulus: self.parse_cumulus(value)?,
            },
            Stage::S3 => KeyValueRecord::TupleCumulus {
                key: self.parse_tuple(&all, key)?,
                cumulus: self.parse_cumulus(value)?,
            },
            Stage::S4 => {
                let key = self.parse_tuple(&all, key)?;
                let mut cluster = MultimodalCluster::new(self.parse_cluster(value)?);
                cluster.representative = Some(key.clone());
                KeyValueRecord::TupleCluster { key, cluster }
            }
            Stage::S5 => KeyValueRecord::ClusterTuple {
                key: self.parse_cluster(key)?,
                generator: self.parse_tuple(&all, value)?,
            },
        })
    }
}

/// Pipeline hooks that route every intermediate stream through a file.
pub struct FileSpill<'a> {
    dir: PathBuf,
    _temp: Option<TempDir>,
    codec: RecordCodec<'a>,
    bytes: u64,
}

impl<'a> FileSpill<'a> {
    /// Spills into `dir`, which is created if needed and left in place.
    pub fn in_dir(ctx: &'a PolyContext, dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(Error::file(&dir))?;
        Ok(FileSpill {
            dir,
            _temp: None,
            codec: RecordCodec::new(ctx),
            bytes: 0,
        })
    }

    /// Spills into a temporary directory removed on drop.
    pub fn temporary(ctx: &'a PolyContext) -> Result<Self> {
        let temp = tempfile::tempdir()?;
        let mut spill = Self::in_dir(ctx, temp.path())?;
        spill._temp = Some(temp);
        Ok(spill)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn stage_path(&self, stage: Stage) -> PathBuf {
        self.dir.join(format!("{}.tsv", stage.id()))
    }

    pub fn bytes_written(&self) -> u64 {
        self.bytes
    }
}

impl PipelineHooks for FileSpill<'_> {
    fn exchange<R: StageRecord>(&mut self, records: Vec<R>) -> polyclust_core::Result<Vec<R>> {
        self.spill(records).map_err(|e| polyclust_core::Error::Integrity {
            stage: R::STAGE.id(),
            detail: e.to_string(),
        })
    }
}

impl FileSpill<'_> {
    fn spill<R: StageRecord>(&mut self, records: Vec<R>) -> Result<Vec<R>> {
        let path = self.stage_path(R::STAGE);
        let count = records.len();
        {
            let file = File::create(&path).map_err(Error::file(&path))?;
            let mut w = BufWriter::new(file);
            for r in records {
                let line = self.codec.encode(&r.into_record());
                self.bytes += line.len() as u64 + 1;
                w.write_all(line.as_bytes())?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        let file = File::open(&path).map_err(Error::file(&path))?;
        let mut out = Vec::with_capacity(count);
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let record = self.codec.decode(i + 1, &line?)?;
            out.push(R::from_record(record)?);
        }
        self.codec.cumuli.clear();
        Ok(out)
    }
}
