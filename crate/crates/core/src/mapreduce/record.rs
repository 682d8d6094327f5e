use alloc::format;
use alloc::vec::Vec;

use super::Stage;
use crate::batch::SubRelationKey;
use crate::cluster::{Cumulus, MultimodalCluster};
use crate::context::{EntityId, Tuple};
use crate::{Error, Result};

/// A key-value pair flowing between pipeline phases, tagged by stage.
#[derive(Clone, Debug, PartialEq)]
pub enum KeyValueRecord {
    SubRelationEntity {
        key: SubRelationKey,
        entity: EntityId,
    },
    SubRelationCumulus {
        key: SubRelationKey,
        cumulus: Cumulus,
    },
    TupleCumulus {
        key: Tuple,
        cumulus: Cumulus,
    },
    TupleCluster {
        key: Tuple,
        cluster: MultimodalCluster,
    },
    /// Keyed by the canonical component sequence of the cluster.
    ClusterTuple {
        key: Vec<Cumulus>,
        generator: Tuple,
    },
}

impl KeyValueRecord {
    pub fn stage(&self) -> Stage {
        match self {
            KeyValueRecord::SubRelationEntity { .. } => Stage::S1,
            KeyValueRecord::SubRelationCumulus { .. } => Stage::S2,
            KeyValueRecord::TupleCumulus { .. } => Stage::S3,
            KeyValueRecord::TupleCluster { .. } => Stage::S4,
            KeyValueRecord::ClusterTuple { .. } => Stage::S5,
        }
    }
}

/// A typed stage record convertible to and from [`KeyValueRecord`].
pub trait StageRecord: Sized + Send + Sync {
    const STAGE: Stage;

    fn into_record(self) -> KeyValueRecord;

    fn from_record(record: KeyValueRecord) -> Result<Self>;
}

fn mismatch(expected: Stage, got: &KeyValueRecord) -> Error {
    Error::Integrity {
        stage: expected.id(),
        detail: format!("record of stage {} where {} was expected", got.stage().id(), expected.id()),
    }
}

impl StageRecord for (SubRelationKey, EntityId) {
    const STAGE: Stage = Stage::S1;

    fn into_record(self) -> KeyValueRecord {
        KeyValueRecord::SubRelationEntity {
            key: self.0,
            entity: self.1,
        }
    }

    fn from_record(record: KeyValueRecord) -> Result<Self> {
        match record {
            KeyValueRecord::SubRelationEntity { key, entity } => Ok((key, entity)),
            other => Err(mismatch(Self::STAGE, &other)),
        }
    }
}

impl StageRecord for (SubRelationKey, Cumulus) {
    const STAGE: Stage = Stage::S2;

    fn into_record(self) -> KeyValueRecord {
        KeyValueRecord::SubRelationCumulus {
            key: self.0,
            cumulus: self.1,
        }
    }

    fn from_record(record: KeyValueRecord) -> Result<Self> {
        match record {
            KeyValueRecord::SubRelationCumulus { key, cumulus } => Ok((key, cumulus)),
            other => Err(mismatch(Self::STAGE, &other)),
        }
    }
}

impl StageRecord for (Tuple, Cumulus) {
    const STAGE: Stage = Stage::S3;

    fn into_record(self) -> KeyValueRecord {
        KeyValueRecord::TupleCumulus {
            key: self.0,
            cumulus: self.1,
        }
    }

    fn from_record(record: KeyValueRecord) -> Result<Self> {
        match record {
            KeyValueRecord::TupleCumulus { key, cumulus } => Ok((key, cumulus)),
            other => Err(mismatch(Self::STAGE, &other)),
        }
    }
}

impl StageRecord for (Tuple, MultimodalCluster) {
    const STAGE: Stage = Stage::S4;

    fn into_record(self) -> KeyValueRecord {
        KeyValueRecord::TupleCluster {
            key: self.0,
            cluster: self.1,
        }
    }

    fn from_record(record: KeyValueRecord) -> Result<Self> {
        match record {
            KeyValueRecord::TupleCluster { key, cluster } => Ok((key, cluster)),
            other => Err(mismatch(Self::STAGE, &other)),
        }
    }
}

impl StageRecord for (Vec<Cumulus>, Tuple) {
    const STAGE: Stage = Stage::S5;

    fn into_record(self) -> KeyValueRecord {
        KeyValueRecord::ClusterTuple {
            key: self.0,
            generator: self.1,
        }
    }

    fn from_record(record: KeyValueRecord) -> Result<Self> {
        match record {
            KeyValueRecord::ClusterTuple { key, generator } => Ok((key, generator)),
            other => Err(mismatch(Self::STAGE, &other)),
        }
    }
}
