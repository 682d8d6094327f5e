//! Command line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};
use polyclust_core::nvalued::MinSupport;
use polyclust_core::{DensityMode, PolyContext};

use crate::engine::{self, EngineKind, Intermediate, RunParams};
use crate::output::{self, Format};
use crate::synth::{self, RandomSpec};
use crate::{tsv, Error};

#[derive(Debug, Parser)]
#[command(name = "polyclust", version, about = "Prime-based clustering of polyadic relations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a TSV relation.
    Cluster(ClusterArgs),
    /// Write a synthetic relation as TSV.
    Gen(GenArgs),
    /// Time engines on a synthetic relation.
    Bench(BenchArgs),
    /// Compare two machine-format outputs as sets; exits 1 when they differ.
    Diff { left: PathBuf, right: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Batch,
    Online,
    #[value(name = "mapreduce")]
    MapReduce,
    #[value(name = "nvalued")]
    NValued,
}

impl From<EngineArg> for EngineKind {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Batch => EngineKind::Batch,
            EngineArg::Online => EngineKind::Online,
            EngineArg::MapReduce => EngineKind::MapReduce,
            EngineArg::NValued => EngineKind::NValued,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DensityArg {
    Exact,
    Generators,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StorageArg {
    Memory,
    Files,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Display,
    Machine,
}

fn parse_minsup(s: &str) -> Result<MinSupport, String> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad count {p:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(match parts[..] {
        [n] => MinSupport::Uniform(n),
        _ => MinSupport::PerMode(parts),
    })
}

/// Options shared by `cluster` and `bench`.
#[derive(Debug, Args)]
pub struct EngineOpts {
    /// Minimum density of reported clusters.
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, value_enum, default_value = "exact")]
    pub density_mode: DensityArg,
    /// Value tolerance of the nvalued engine.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Minimum exact density of the nvalued engine.
    #[arg(long, default_value_t = 0.0)]
    pub rho_min: f64,
    /// Minimum component size, one number or one per mode.
    #[arg(long, value_parser = parse_minsup)]
    pub minsup: Option<MinSupport>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Shuffle partitions of the mapreduce engine; defaults to the worker count.
    #[arg(long)]
    pub partitions: Option<usize>,
    #[arg(long, value_enum, default_value = "memory")]
    pub intermediate: StorageArg,
    /// Keep intermediate files in this directory.
    #[arg(long)]
    pub spill_dir: Option<PathBuf>,
}

impl EngineOpts {
    pub fn params(&self, engine: EngineKind) -> RunParams {
        RunParams {
            engine,
            theta: self.theta,
            density_mode: match self.density_mode {
                DensityArg::Exact => DensityMode::Exact,
                DensityArg::Generators => DensityMode::Generators,
            },
            delta: self.delta,
            rho_min: self.rho_min,
            min_sup: self.minsup.clone().unwrap_or_default(),
            workers: self.workers,
            partitions: self.partitions.unwrap_or(self.workers),
            intermediate: match self.intermediate {
                StorageArg::Memory => Intermediate::Memory,
                StorageArg::Files => Intermediate::Files(self.spill_dir.clone()),
            },
            ..RunParams::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long, value_enum, default_value = "batch")]
    pub engine: EngineArg,
    #[arg(long, default_value_t = 3)]
    pub arity: usize,
    /// Input lines carry a trailing numeric value.
    #[arg(long)]
    pub valued: bool,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "machine")]
    pub format: FormatArg,
    #[command(flatten)]
    pub opts: EngineOpts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Cube minus its diagonal.
    K1,
    /// Disjoint full cubes.
    K2,
    /// One full cuboid.
    K3,
    /// Bernoulli-filled cuboid.
    Random,
}

#[derive(Debug, Args)]
pub struct GenSpec {
    #[arg(long, default_value_t = 10)]
    pub size: usize,
    /// Cube count for k2.
    #[arg(long, default_value_t = 3)]
    pub blocks: usize,
    /// Mode count for k3 and random.
    #[arg(long, default_value_t = 3)]
    pub arity: usize,
    /// Cell probability for random.
    #[arg(long, default_value_t = 0.5)]
    pub fill: f64,
    /// Draw integer values from 0..LEVELS for random.
    #[arg(long)]
    pub levels: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl GenSpec {
    pub fn generate(&self, kind: GenKind) -> crate::Result<PolyContext> {
        match kind {
            GenKind::K1 => synth::gen_k1(self.size),
            GenKind::K2 => synth::gen_k2(self.size, self.blocks),
            GenKind::K3 => synth::gen_k3(self.size, self.arity),
            GenKind::Random => synth::gen_random(&RandomSpec {
                mode_sizes: vec![self.size; self.arity],
                fill: self.fill,
                levels: self.levels,
                seed: self.seed,
            }),
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    #[command(flatten)]
    pub spec: GenSpec,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "batch,online,mapreduce")]
    pub engines: Vec<EngineArg>,
    #[arg(long = "gen", value_enum, default_value = "k1")]
    pub kind: GenKind,
    #[command(flatten)]
    pub spec: GenSpec,
    #[arg(long, default_value_t = 5)]
    pub repeat: usize,
    #[command(flatten)]
    pub opts: EngineOpts,
}

fn sink(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        ),
        None => Box::new(io::stdout().lock()),
    })
}

fn cluster(args: &ClusterArgs) -> anyhow::Result<i32> {
    let ctx = tsv::read_tsv(&args.input, args.arity, args.valued)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let run = engine::run(&ctx, &args.opts.params(args.engine.into()))?;
    let format = match args.format {
        FormatArg::Display => Format::Display,
        FormatArg::Machine => Format::Machine,
    };
    output::write_clusters(&ctx, &run.clusters, format, sink(args.out.as_deref())?)?;
    eprint!("{}", run.report);
    Ok(0)
}

fn generate(args: &GenArgs) -> anyhow::Result<i32> {
    let ctx = args.spec.generate(args.kind)?;
    tsv::write_tsv(&ctx, sink(args.out.as_deref())?)?;
    eprintln!("tuples: {}", ctx.len());
    Ok(0)
}

fn median(times: &mut [Duration]) -> Duration {
    times.sort_unstable();
    times[times.len() / 2]
}

fn bench(args: &BenchArgs) -> anyhow::Result<i32> {
    if args.repeat == 0 {
        return Err(Error::Usage("--repeat must be at least 1".into()).into());
    }
    let ctx = args.spec.generate(args.kind)?;
    eprintln!(
        "context: {:?} size {} with {} tuples, {} runs per engine",
        args.kind,
        args.spec.size,
        ctx.len(),
        args.repeat
    );
    let mut out = io::stdout().lock();
    writeln!(out, "engine\truns\tmedian_ms\tmin_ms\tmax_ms\tclusters")?;
    for &engine in &args.engines {
        let params = args.opts.params(engine.into());
        let mut times = Vec::with_capacity(args.repeat);
        let mut clusters = 0;
        for _ in 0..args.repeat {
            let run = engine::run(&ctx, &params)?;
            times.push(run.report.timing("total").unwrap_or_default());
            clusters = run.clusters.len();
        }
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        let m = median(&mut times);
        writeln!(
            out,
            "{}\t{}\t{:.3}\t{:.3}\t{:.3}\t{clusters}",
            EngineKind::from(engine),
            args.repeat,
            ms(m),
            ms(times[0]),
            ms(times[times.len() - 1])
        )?;
    }
    Ok(0)
}

fn read_machine_file(path: &Path) -> anyhow::Result<Vec<output::MachineRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    output::read_machine(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn diff(left: &Path, right: &Path) -> anyhow::Result<i32> {
    let d = output::diff(read_machine_file(left)?, read_machine_file(right)?);
    let mut out = io::stdout().lock();
    for r in &d.only_left {
        writeln!(out, "< {r}")?;
    }
    for r in &d.only_right {
        writeln!(out, "> {r}")?;
    }
    eprintln!("only_left: {}\nonly_right: {}", d.only_left.len(), d.only_right.len());
    Ok(i32::from(!d.is_empty()))
}

pub fn execute(cli: &Cli) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Cluster(args) => cluster(args),
        Command::Gen(args) => generate(args),
        Command::Bench(args) => bench(args),
        Command::Diff { left, right } => diff(left, right),
    }
}

/// Parses `args` and runs the command. Returns the process exit code:
/// 0 on success, 1 on failure or when `diff` finds differences, 2 on
/// usage errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Usage(_)) => 2,
                _ => 1,
            }
        }
    }
}
