//! Acceptance checks. Prints one line per criterion and exits non-zero when
//! any criterion fails. Numeric arguments select criteria, e.g.
//! `cargo test --test acceptance -- 1 6`.

use std::collections::HashMap;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use polyclust::engine::{self, EngineKind, Intermediate, RunParams};
use polyclust::exec::available_threads;
use polyclust::output::{write_clusters, Format};
use polyclust::spill::FileSpill;
use polyclust::synth::{gen_k1, gen_k2, gen_k3, gen_random, RandomSpec};
use polyclust::Threads;
use polyclust_core::batch::batch_cluster;
use polyclust_core::mapreduce::{
    run_pipeline, KeyValueRecord, NoHooks, PipelineConfig, PipelineHooks, Stage, StageRecord,
};
use polyclust_core::nvalued::{noac_cluster, NoacParams};
use polyclust_core::online::OnlineState;
use polyclust_core::operators::oracle_enumerate;
use polyclust_core::{build_context, ClusterSet, DensityMode, PolyContext, Tuple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FULL_SCALE_LIMIT: Duration = Duration::from_secs(300);
const SMALL_LIMIT: Duration = Duration::from_secs(1);
const RANDOM_CONTEXTS: u64 = 200;
const THETAS: [f64; 4] = [0.0, 0.3, 0.7, 1.0];
const WORKERS: [usize; 4] = [1, 2, 4, 8];
const PARTITIONS: [usize; 4] = [1, 3, 7, 16];
const INGEST_RATIO: (f64, f64) = (1.5, 3.0);
const SPEEDUP_MAX: f64 = 0.8;
const SPEEDUP_THREADS: usize = 4;
const REPEATS: usize = 5;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn machine(ctx: &PolyContext, set: &ClusterSet) -> String {
    let mut buf = Vec::new();
    write_clusters(ctx, set, Format::Machine, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn toy() -> PolyContext {
    let rows = [
        ["u1", "i1", "l1"],
        ["u2", "i1", "l1"],
        ["u2", "i2", "l1"],
        ["u3", "i2", "l1"],
        ["u1", "i1", "l2"],
        ["u2", "i1", "l2"],
        ["u2", "i2", "l2"],
        ["u3", "i1", "l2"],
    ];
    build_context(&rows, 3, None).unwrap()
}

fn params(engine: EngineKind, theta: f64) -> RunParams {
    RunParams {
        engine,
        theta,
        rho_min: theta,
        workers: available_threads(),
        partitions: 8,
        ..RunParams::default()
    }
}

/// Runs `engine` and fails when it exceeds `limit`.
fn run_within(ctx: &PolyContext, p: &RunParams, limit: Duration) -> Result<(ClusterSet, Duration), String> {
    let (run, t) = timed(|| engine::run(ctx, p));
    let run = run.map_err(|e| format!("{}: {e}", p.engine))?;
    ensure(t < limit, || format!("{} took {} (limit {})", p.engine, secs(t), secs(limit)))?;
    Ok((run.clusters, t))
}

fn criterion_1() -> Check {
    // worked out by hand from the eight triples
    let all = "\
u1,u2\ti1\tl1,l2\t1\t1.000000
u1,u2\ti1,i2\tl1,l2\t1\t0.750000
u1,u2,u3\ti1\tl1,l2\t1\t0.833333
u1,u2,u3\ti1\tl2\t1\t1.000000
u1,u2,u3\ti1,i2\tl1,l2\t1\t0.666667
u2\ti1,i2\tl1,l2\t1\t1.000000
u2,u3\ti1,i2\tl1,l2\t1\t0.750000
u2,u3\ti2\tl1\t1\t1.000000
";
    let dense: String = all
        .lines()
        .filter(|l| l.ends_with("\t1.000000"))
        .map(|l| format!("{l}\n"))
        .collect();
    let ctx = toy();
    let valued = toy().with_constant_value(1.0);
    let (_, t) = timed(|| -> Result<(), String> {
        for (theta, want) in [(0.0, all), (1.0, dense.as_str())] {
            let mut outputs = vec![
                ("batch", batch_cluster(&ctx, theta, DensityMode::Exact)),
                ("oracle", oracle_enumerate(&ctx, theta, DensityMode::Exact)),
            ];
            let mut online = OnlineState::new(3).unwrap();
            online.add_batch(ctx.tuples()).unwrap();
            outputs.push(("online", online.post_process(theta, DensityMode::Exact, None).unwrap()));
            let cfg = PipelineConfig { theta, partitions: 4, ..PipelineConfig::default() };
            outputs.push(("mapreduce", run_pipeline(&ctx, &cfg, &Threads, &mut NoHooks).unwrap().clusters));
            outputs.push(("noac", noac_cluster(&valued, &NoacParams::new(0.0, theta, 0)).unwrap()));
            for (name, set) in &outputs {
                let got = machine(&ctx, set);
                ensure(got == want, || format!("{name} at theta {theta} wrote\n{got}"))?;
            }
        }
        Ok(())
    });
    ensure(t < SMALL_LIMIT, || format!("took {}", secs(t)))?;
    Ok(format!(
        "8 clusters at theta 0 and 4 at theta 1, byte-identical machine output from batch, online, mapreduce and noac ({})",
        secs(t)
    ))
}

fn full_cuboid(set: &ClusterSet, side: usize, arity: usize) -> Result<(), String> {
    ensure(set.len() == 1, || format!("{} clusters", set.len()))?;
    let c = &set.as_slice()[0];
    let full: Vec<u32> = (0..side as u32).collect();
    ensure(c.arity() == arity && c.components().iter().all(|p| p.members() == full), || {
        "cluster is not the full cuboid".into()
    })?;
    ensure(c.generator_count == side.pow(arity as u32), || format!("{} generators", c.generator_count))?;
    ensure(c.density == Some(1.0), || format!("density {:?}", c.density))
}

fn criterion_2() -> Check {
    let small = gen_k3(8, 4).unwrap();
    let (set, t_small) = run_within(&small, &params(EngineKind::MapReduce, 1.0), SMALL_LIMIT)?;
    full_cuboid(&set, 8, 4)?;
    for engine in EngineKind::ALL {
        let (other, _) = run_within(&small, &params(engine, 1.0), SMALL_LIMIT)?;
        ensure(other == set, || format!("{engine} differs at size 8"))?;
    }

    let ctx = gen_k3(30, 4).unwrap();
    ensure(ctx.len() == 810_000, || format!("{} tuples", ctx.len()))?;
    let (set, t) = run_within(&ctx, &params(EngineKind::MapReduce, 1.0), FULL_SCALE_LIMIT)?;
    full_cuboid(&set, 30, 4)?;
    Ok(format!(
        "genK3(30): 810000 tuples, mapreduce finds exactly the full cuboid in {}; genK3(8) in {}",
        secs(t),
        secs(t_small)
    ))
}

fn criterion_3() -> Check {
    let small = gen_k2(3, 3).unwrap();
    let oracle = oracle_enumerate(&small, 1.0, DensityMode::Exact);
    ensure(oracle.len() == 3, || format!("oracle found {} clusters at size 3", oracle.len()))?;
    for engine in EngineKind::ALL {
        let (set, _) = run_within(&small, &params(engine, 1.0), SMALL_LIMIT)?;
        ensure(set == oracle, || format!("{engine} differs from the oracle at size 3"))?;
    }

    let s = 50;
    let ctx = gen_k2(s, 3).unwrap();
    ensure(ctx.len() == 375_000, || format!("{} tuples", ctx.len()))?;
    let mut times = Vec::new();
    for engine in EngineKind::ALL {
        let (set, t) = run_within(&ctx, &params(engine, 1.0), FULL_SCALE_LIMIT)?;
        ensure(set.len() == 3, || format!("{engine}: {} clusters", set.len()))?;
        for (b, c) in set.iter().enumerate() {
            let block: Vec<u32> = (b * s..(b + 1) * s).map(|i| i as u32).collect();
            ensure(c.components().iter().all(|p| p.members() == block), || {
                format!("{engine}: cluster {b} is not block {b}")
            })?;
            ensure(c.density == Some(1.0) && c.generator_count == s * s * s, || {
                format!("{engine}: cluster {b} has density {:?}", c.density)
            })?;
        }
        times.push(format!("{engine} {}", secs(t)));
    }
    Ok(format!(
        "genK2(50): 375000 tuples, 3 full blocks on every engine ({}); oracle match at genK2(3)",
        times.join(", ")
    ))
}

fn criterion_4() -> Check {
    let small = gen_k1(8).unwrap();
    let oracle = oracle_enumerate(&small, 0.0, DensityMode::Exact);
    ensure(oracle.len() == 3 * 8 + 1, || format!("oracle found {} clusters at size 8", oracle.len()))?;
    for engine in EngineKind::ALL {
        let (set, _) = run_within(&small, &params(engine, 0.0), SMALL_LIMIT)?;
        ensure(set == oracle, || format!("{engine} differs from the oracle at size 8"))?;
    }

    let ctx = gen_k1(60).unwrap();
    ensure(ctx.len() == 215_940, || format!("{} tuples", ctx.len()))?;
    let mut reference: Option<ClusterSet> = None;
    let mut times = Vec::new();
    for engine in EngineKind::ALL {
        let (set, t) = run_within(&ctx, &params(engine, 0.0), FULL_SCALE_LIMIT)?;
        match &reference {
            None => reference = Some(set),
            Some(r) => ensure(*r == set, || format!("{engine} differs from batch"))?,
        }
        times.push(format!("{engine} {}", secs(t)));
    }
    let n = reference.map_or(0, |r| r.len());
    ensure(n == 3 * 60 + 1, || format!("{n} clusters, expected 181"))?;
    Ok(format!(
        "genK1(60): 215940 tuples, identical 181 clusters on every engine ({}); oracle match at genK1(8)",
        times.join(", ")
    ))
}

fn random_spec(seed: u64) -> RandomSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arity = rng.gen_range(2..=4);
    RandomSpec {
        mode_sizes: (0..arity).map(|_| rng.gen_range(1..=6)).collect(),
        fill: rng.gen_range(0.1..0.9),
        levels: None,
        seed,
    }
}

fn criterion_5() -> Check {
    let mut checks = 0usize;
    let (result, t) = timed(|| -> Result<(), String> {
        for seed in 0..RANDOM_CONTEXTS {
            let ctx = gen_random(&random_spec(seed)).unwrap();
            let mut online = OnlineState::new(ctx.arity()).unwrap();
            online.add_batch(ctx.tuples()).unwrap();
            for theta in THETAS {
                for mode in [DensityMode::Exact, DensityMode::Generators] {
                    let oracle = oracle_enumerate(&ctx, theta, mode);
                    let fail = |what: &str| format!("seed {seed}, theta {theta}, {mode:?}: {what} differs");
                    ensure(batch_cluster(&ctx, theta, mode) == oracle, || fail("batch"))?;
                    ensure(online.post_process(theta, mode, None).unwrap() == oracle, || fail("online"))?;
                    for workers in WORKERS {
                        for partitions in PARTITIONS {
                            let cfg = PipelineConfig {
                                theta,
                                density_mode: mode,
                                partitions,
                                split_size: 16,
                                ..PipelineConfig::default().with_workers(workers)
                            };
                            let out = run_pipeline(&ctx, &cfg, &Threads, &mut NoHooks).unwrap();
                            ensure(out.clusters == oracle, || {
                                fail(&format!("mapreduce with {workers} workers, {partitions} partitions"))
                            })?;
                        }
                    }
                    checks += 1;
                }
            }
        }
        Ok(())
    });
    result?;
    Ok(format!(
        "{RANDOM_CONTEXTS} seeded contexts, {checks} (theta, density mode) cases: batch == online == mapreduce == oracle over {} worker/partition pairs ({})",
        WORKERS.len() * PARTITIONS.len(),
        secs(t)
    ))
}

fn criterion_6() -> Check {
    let ctx = toy();
    let valued = toy().with_constant_value(1.0);
    let noac = |rho: f64, sup: usize| noac_cluster(&valued, &NoacParams::new(0.0, rho, sup)).unwrap();
    let prime = noac(0.0, 0);
    ensure(prime == batch_cluster(&ctx, 0.0, DensityMode::Exact), || "delta 0 differs from prime clustering".into())?;
    ensure(prime.len() == 8, || format!("{} clusters", prime.len()))?;
    let sup2 = machine(&ctx, &noac(0.0, 2));
    let want2 = "\
u1,u2\ti1,i2\tl1,l2\t1\t0.750000
u1,u2,u3\ti1,i2\tl1,l2\t1\t0.666667
u2,u3\ti1,i2\tl1,l2\t1\t0.750000
";
    ensure(sup2 == want2, || format!("minSup 2 gave\n{sup2}"))?;
    let dense = machine(&ctx, &noac(0.7, 2));
    let want_dense = "\
u1,u2\ti1,i2\tl1,l2\t1\t0.750000
u2,u3\ti1,i2\tl1,l2\t1\t0.750000
";
    ensure(dense == want_dense, || format!("rhoMin 0.7, minSup 2 gave\n{dense}"))?;
    Ok("delta 0 equals prime clustering (8), minSup 2 keeps 3, rhoMin 0.7 with minSup 2 keeps 2".into())
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort_unstable();
    v[v.len() / 2]
}

fn criterion_7a() -> Check {
    let sizes = [30, 38, 48];
    let mut medians = Vec::new();
    let mut counts = Vec::new();
    for n in sizes {
        let ctx = gen_k1(n).unwrap();
        let runs = (0..REPEATS)
            .map(|_| {
                let mut state = OnlineState::new(3).unwrap();
                timed(|| state.add_batch(ctx.tuples()).unwrap()).1
            })
            .collect();
        medians.push(median(runs));
        counts.push(ctx.len());
    }
    let mut parts = Vec::new();
    for i in 1..sizes.len() {
        let ratio = medians[i].as_secs_f64() / medians[i - 1].as_secs_f64();
        let size_ratio = counts[i] as f64 / counts[i - 1] as f64;
        parts.push(format!("{}->{}: x{size_ratio:.2} tuples, x{ratio:.2} time", sizes[i - 1], sizes[i]));
        ensure((INGEST_RATIO.0..=INGEST_RATIO.1).contains(&ratio), || {
            format!("ratio {ratio:.2} outside [{}, {}]; {}", INGEST_RATIO.0, INGEST_RATIO.1, parts.join("; "))
        })?;
    }
    Ok(format!(
        "online ingestion scales linearly, median of {REPEATS}: {} (bounds [{}, {}])",
        parts.join("; "),
        INGEST_RATIO.0,
        INGEST_RATIO.1
    ))
}

fn speedup(ctx: &PolyContext, base: RunParams) -> f64 {
    let time = |workers| {
        let p = RunParams { workers, ..base.clone() };
        median((0..REPEATS).map(|_| engine::run(ctx, &p).unwrap().report.timing("total").unwrap()).collect())
    };
    time(SPEEDUP_THREADS).as_secs_f64() / time(1).as_secs_f64()
}

fn criterion_7b() -> Outcome {
    let threads = available_threads();
    if threads < SPEEDUP_THREADS {
        return Outcome::Skip(format!(
            "parallel speedup needs {SPEEDUP_THREADS} hardware threads, this machine has {threads}"
        ));
    }
    let k1 = gen_k1(40).unwrap();
    let mr = speedup(&k1, RunParams { engine: EngineKind::MapReduce, partitions: 16, ..RunParams::default() });
    let valued = gen_random(&RandomSpec { mode_sizes: vec![50, 50, 50], fill: 0.8, levels: Some(5), seed: 7 }).unwrap();
    let noac = speedup(&valued, RunParams { engine: EngineKind::NValued, delta: 1.0, ..RunParams::default() });
    let detail = format!(
        "{SPEEDUP_THREADS}-worker/1-worker time, median of {REPEATS}: mapreduce genK1(40) {mr:.2}, noac on {} valued tuples {noac:.2} (max {SPEEDUP_MAX})",
        valued.len()
    );
    if mr <= SPEEDUP_MAX && noac <= SPEEDUP_MAX {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

/// Records the modes of the cumuli each tuple receives before reduce2.
#[derive(Default)]
struct ModesPerTuple(HashMap<Tuple, Vec<usize>>);

impl PipelineHooks for ModesPerTuple {
    fn exchange<R: StageRecord>(&mut self, records: Vec<R>) -> polyclust_core::Result<Vec<R>> {
        if R::STAGE != Stage::S3 {
            return Ok(records);
        }
        records
            .into_iter()
            .map(|r| {
                let rec = r.into_record();
                if let KeyValueRecord::TupleCumulus { key, cumulus } = &rec {
                    self.0.entry(key.clone()).or_default().push(cumulus.mode());
                }
                R::from_record(rec)
            })
            .collect()
    }
}

fn criterion_8() -> Check {
    let ctx = gen_k2(5, 3).unwrap();
    let n = ctx.len();
    ensure(n == 375, || format!("{n} tuples"))?;
    let cfg = PipelineConfig { partitions: 7, ..PipelineConfig::default().with_workers(available_threads()) };
    let mut modes = ModesPerTuple::default();
    let mem = run_pipeline(&ctx, &cfg, &Threads, &mut modes).map_err(|e| e.to_string())?;
    let s = mem.stats.stage_records;
    ensure(s[0] == 3 * n, || format!("stage 1 emitted {} records", s[0]))?;
    ensure(s[2] == 3 * n && mem.stats.reduce_groups[1] == n && s[3] == n, || format!("stage counts {s:?}"))?;
    ensure(modes.0.len() == n, || format!("{} tuples reached reduce2", modes.0.len()))?;
    for (t, m) in &mut modes.0 {
        m.sort_unstable();
        ensure(*m == [0, 1, 2], || format!("tuple {t:?} received cumuli of modes {m:?}"))?;
    }

    let mut spill = FileSpill::temporary(&ctx).map_err(|e| e.to_string())?;
    let files = run_pipeline(&ctx, &cfg, &Threads, &mut spill).map_err(|e| e.to_string())?;
    ensure(files.clusters == mem.clusters && files.stats == mem.stats, || "file-backed run differs".into())?;
    let p = RunParams { engine: EngineKind::MapReduce, intermediate: Intermediate::Files(None), ..RunParams::default() };
    let via_engine = engine::run(&ctx, &p).map_err(|e| e.to_string())?;
    ensure(via_engine.clusters == mem.clusters, || "engine front end with files differs".into())?;
    Ok(format!(
        "genK2(5): stage 1 emits {} = 3 x {n} records, every tuple gets one cumulus per mode, files == memory ({} clusters, {} bytes spilled)",
        s[0],
        mem.clusters.len(),
        spill.bytes_written()
    ))
}

fn check(f: fn() -> Check) -> Outcome {
    match f() {
        Ok(detail) => Outcome::Pass(detail),
        Err(reason) => Outcome::Fail(reason),
    }
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 9] = [
        ("1", "toy golden", || check(criterion_1)),
        ("2", "K3 reproduction", || check(criterion_2)),
        ("3", "K2 reproduction", || check(criterion_3)),
        ("4", "K1 consistency", || check(criterion_4)),
        ("5", "engine equivalence", || check(criterion_5)),
        ("6", "NOAC reduction and filters", || check(criterion_6)),
        ("7a", "online ingestion scaling", || check(criterion_7a)),
        ("7b", "parallel speedup", criterion_7b),
        ("8", "pipeline conservation", || check(criterion_8)),
    ];
    let selected: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| a.chars().next().is_some_and(|c| c.is_ascii_digit()))
        .collect();
    let mut failed = 0;
    println!("acceptance: {} hardware thread(s)", available_threads());
    for (id, title, run) in criteria {
        if !selected.is_empty() && !selected.iter().any(|s| id.starts_with(s.as_str())) {
            continue;
        }
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        let (status, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("criterion {id:<2} {status} {title}: {detail}");
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
}
