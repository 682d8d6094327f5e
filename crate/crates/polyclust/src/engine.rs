//! One entry point over the four clustering engines.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use polyclust_core::batch::batch_cluster_with;
use polyclust_core::mapreduce::{run_pipeline, NoHooks, PipelineConfig, DEFAULT_HASH_SEED};
use polyclust_core::nvalued::{noac_cluster_with, MinSupport, NoacParams};
use polyclust_core::online::OnlineState;
use polyclust_core::{ClusterSet, DensityMode, PolyContext};

use crate::report::{PhaseTimer, RunReport};
use crate::spill::FileSpill;
use crate::{Error, Result, Threads};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum EngineKind {
    #[default]
    Batch,
    Online,
    MapReduce,
    NValued,
}

impl EngineKind {
    pub const ALL: [EngineKind; 4] = [
        EngineKind::Batch,
        EngineKind::Online,
        EngineKind::MapReduce,
        EngineKind::NValued,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Batch => "batch",
            EngineKind::Online => "online",
            EngineKind::MapReduce => "mapreduce",
            EngineKind::NValued => "nvalued",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown engine {s:?}")))
    }
}

pub fn parse_density_mode(s: &str) -> Result<DensityMode> {
    match s {
        "exact" => Ok(DensityMode::Exact),
        "generators" => Ok(DensityMode::Generators),
        other => Err(Error::Usage(format!("unknown density mode {other:?}"))),
    }
}

fn density_mode_name(mode: DensityMode) -> &'static str {
    match mode {
        DensityMode::Exact => "exact",
        DensityMode::Generators => "generators",
    }
}

/// Where the mapreduce engine keeps intermediate streams.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Intermediate {
    #[default]
    Memory,
    /// Files in the given directory, or in a temporary one.
    Files(Option<PathBuf>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunParams {
    pub engine: EngineKind,
    pub theta: f64,
    pub density_mode: DensityMode,
    pub delta: f64,
    pub rho_min: f64,
    pub min_sup: MinSupport,
    pub workers: usize,
    pub partitions: usize,
    pub intermediate: Intermediate,
    pub hash_seed: u64,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            engine: EngineKind::Batch,
            theta: 0.0,
            density_mode: DensityMode::Exact,
            delta: 0.0,
            rho_min: 0.0,
            min_sup: MinSupport::Uniform(0),
            workers: 1,
            partitions: 1,
            intermediate: Intermediate::Memory,
            hash_seed: DEFAULT_HASH_SEED,
        }
    }
}

impl RunParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Usage(format!("theta {} is not in [0, 1]", self.theta)));
        }
        if self.workers == 0 || self.partitions == 0 {
            return Err(Error::Usage("workers and partitions must be at least 1".into()));
        }
        Ok(())
    }

    fn min_cardinality(&self, arity: usize) -> Option<Vec<usize>> {
        let min: Vec<usize> = (0..arity).map(|k| self.min_sup.for_mode(k)).collect();
        min.iter().any(|&m| m > 0).then_some(min)
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            partitions: self.partitions,
            theta: self.theta,
            density_mode: self.density_mode,
            hash_seed: self.hash_seed,
            ..PipelineConfig::default().with_workers(self.workers)
        }
    }

    /// NOAC parameters; unvalued contexts are treated as constant-valued.
    pub fn noac_params(&self) -> NoacParams {
        NoacParams {
            delta: self.delta,
            rho_min: self.rho_min,
            min_sup: self.min_sup.clone(),
            binary_fallback: true,
        }
    }
}

fn min_sup_text(m: &MinSupport) -> String {
    match m {
        MinSupport::Uniform(n) => n.to_string(),
        MinSupport::PerMode(v) => v.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
    }
}

#[derive(Clone, Debug)]
pub struct Run {
    pub clusters: ClusterSet,
    pub report: RunReport,
}

pub fn run(ctx: &PolyContext, params: &RunParams) -> Result<Run> {
    params.validate()?;
    let mut report = RunReport::for_context(params.engine.name(), ctx);
    report.param("workers", params.workers);
    let start = Instant::now();
    let min_card = params.min_cardinality(ctx.arity());
    let mut clusters = match params.engine {
        EngineKind::Batch => {
            report.param("theta", params.theta);
            report.param("density_mode", density_mode_name(params.density_mode));
            let set = batch_cluster_with(ctx, params.theta, params.density_mode, &Threads, params.workers);
            report.timings.push(("cluster".into(), start.elapsed()));
            set
        }
        EngineKind::Online => {
            report.param("theta", params.theta);
            report.param("density_mode", density_mode_name(params.density_mode));
            let mut state = OnlineState::new(ctx.arity())?;
            state.add_batch(ctx.tuples())?;
            report.timings.push(("ingest".into(), start.elapsed()));
            let post = Instant::now();
            let set = state.post_process(params.theta, params.density_mode, min_card.as_deref())?;
            report.timings.push(("post_process".into(), post.elapsed()));
            set
        }
        EngineKind::MapReduce => {
            let cfg = params.pipeline_config();
            report.param("theta", params.theta);
            report.param("density_mode", density_mode_name(params.density_mode));
            report.param("partitions", params.partitions);
            let out = match &params.intermediate {
                Intermediate::Memory => {
                    report.param("intermediate", "memory");
                    let mut timer = PhaseTimer::new(NoHooks);
                    let out = run_pipeline(ctx, &cfg, &Threads, &mut timer)?;
                    report.timings.extend(timer.timings());
                    out
                }
                Intermediate::Files(dir) => {
                    report.param("intermediate", "files");
                    let spill = match dir {
                        Some(d) => FileSpill::in_dir(ctx, d)?,
                        None => FileSpill::temporary(ctx)?,
                    };
                    let mut timer = PhaseTimer::new(spill);
                    let out = run_pipeline(ctx, &cfg, &Threads, &mut timer)?;
                    report.timings.extend(timer.timings());
                    out
                }
            };
            report.stage_records = Some(out.stats.stage_records);
            out.clusters
        }
        EngineKind::NValued => {
            let noac = params.noac_params();
            report.param("delta", noac.delta);
            report.param("rho_min", noac.rho_min);
            report.param("min_sup", min_sup_text(&noac.min_sup));
            report.param("valued", ctx.is_valued());
            let out = noac_cluster_with(ctx, &noac, &Threads, params.workers)?;
            report.candidates = out.candidates;
            report.timings.push(("cluster".into(), start.elapsed()));
            out.clusters
        }
    };
    if let Some(min) = &min_card {
        if params.engine != EngineKind::NValued {
            report.param("min_sup", min_sup_text(&params.min_sup));
        }
        // online and nvalued already filtered
        if matches!(params.engine, EngineKind::Batch | EngineKind::MapReduce) {
            clusters.retain_min_cardinality(min);
        }
    }
    report.timings.push(("total".into(), start.elapsed()));
    report.clusters_pre_dedup = clusters.generated_count();
    report.clusters = clusters.len();
    Ok(Run { clusters, report })
}
