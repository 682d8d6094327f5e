//! Run statistics, printed as `key: value` lines.

use std::fmt;
use std::time::{Duration, Instant};

use polyclust_core::mapreduce::{Phase, PipelineHooks, StageRecord};
use polyclust_core::PolyContext;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub engine: String,
    pub arity: usize,
    pub mode_sizes: Vec<usize>,
    pub tuples: usize,
    pub duplicates: usize,
    /// |I| over the product of mode sizes.
    pub context_density: f64,
    pub parameters: Vec<(String, String)>,
    /// Generated clusters, one per tuple, before deduplication and filtering.
    pub candidates: usize,
    /// Kept clusters counted once per generating tuple.
    pub clusters_pre_dedup: usize,
    pub clusters: usize,
    pub timings: Vec<(String, Duration)>,
    /// Records per intermediate stream, mapreduce only.
    pub stage_records: Option<[usize; 5]>,
}

impl RunReport {
    pub fn for_context(engine: &str, ctx: &PolyContext) -> Self {
        RunReport {
            engine: engine.to_owned(),
            arity: ctx.arity(),
            mode_sizes: ctx.mode_sizes(),
            tuples: ctx.len(),
            duplicates: ctx.stats().duplicates,
            context_density: ctx.density(),
            candidates: ctx.len(),
            ..RunReport::default()
        }
    }

    pub fn param(&mut self, name: &str, value: impl fmt::Display) {
        self.parameters.push((name.to_owned(), value.to_string()));
    }

    pub fn peak_intermediate(&self) -> Option<usize> {
        self.stage_records.map(|s| s.into_iter().max().unwrap_or(0))
    }

    pub fn total_time(&self) -> Duration {
        self.timings
            .iter()
            .filter(|(name, _)| name != "total")
            .map(|(_, d)| *d)
            .sum()
    }

    pub fn timing(&self, name: &str) -> Option<Duration> {
        self.timings.iter().find(|(n, _)| n == name).map(|(_, d)| *d)
    }
}

fn ms(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1e3)
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<String> = self.mode_sizes.iter().map(ToString::to_string).collect();
        writeln!(f, "engine: {}", self.engine)?;
        writeln!(f, "arity: {}", self.arity)?;
        writeln!(f, "mode_sizes: {}", sizes.join(","))?;
        writeln!(f, "tuples: {}", self.tuples)?;
        writeln!(f, "duplicates_dropped: {}", self.duplicates)?;
        writeln!(f, "context_density: {:.6}", self.context_density)?;
        for (name, value) in &self.parameters {
            writeln!(f, "param.{name}: {value}")?;
        }
        writeln!(f, "candidates: {}", self.candidates)?;
        writeln!(f, "clusters_pre_dedup: {}", self.clusters_pre_dedup)?;
        writeln!(f, "clusters: {}", self.clusters)?;
        for (name, d) in &self.timings {
            writeln!(f, "time_ms.{name}: {}", ms(*d))?;
        }
        if let Some(stages) = self.stage_records {
            for (i, n) in stages.iter().enumerate() {
                writeln!(f, "records.S{}: {n}", i + 1)?;
            }
            writeln!(f, "peak_intermediate_records: {}", self.peak_intermediate().unwrap_or(0))?;
        }
        Ok(())
    }
}

/// Hook wrapper timing every pipeline phase. Time spent inside the wrapped
/// hook's `exchange` is booked separately as `spill`.
pub struct PhaseTimer<H> {
    inner: H,
    mark: Instant,
    phases: Vec<(Phase, Duration)>,
    spill: Duration,
}

impl<H: PipelineHooks> PhaseTimer<H> {
    pub fn new(inner: H) -> Self {
        PhaseTimer {
            inner,
            mark: Instant::now(),
            phases: Vec::new(),
            spill: Duration::ZERO,
        }
    }

    pub fn phases(&self) -> &[(Phase, Duration)] {
        &self.phases
    }

    pub fn spill_time(&self) -> Duration {
        self.spill
    }

    pub fn into_inner(self) -> H {
        self.inner
    }

    /// Per-phase timings, per-round sums, and spill time when non-zero.
    pub fn timings(&self) -> Vec<(String, Duration)> {
        let mut out: Vec<(String, Duration)> = self
            .phases
            .iter()
            .map(|(p, d)| (p.name().to_owned(), *d))
            .collect();
        for round in 1..=3 {
            let sum = self
                .phases
                .iter()
                .filter(|(p, _)| p.round() == round)
                .map(|(_, d)| *d)
                .sum();
            out.push((format!("round{round}"), sum));
        }
        if !self.spill.is_zero() {
            out.push(("spill".into(), self.spill));
        }
        out
    }
}

impl<H: PipelineHooks> PipelineHooks for PhaseTimer<H> {
    fn exchange<R: StageRecord>(&mut self, records: Vec<R>) -> polyclust_core::Result<Vec<R>> {
        let start = Instant::now();
        let out = self.inner.exchange(records);
        self.spill += start.elapsed();
        self.mark = Instant::now();
        out
    }

    fn phase_done(&mut self, phase: Phase, records: usize) {
        self.phases.push((phase, self.mark.elapsed()));
        self.inner.phase_done(phase, records);
        self.mark = Instant::now();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use polyclust_core::build_context;

    #[test]
    fn context_stats() {
        let rows = [["a", "x"], ["a", "y"], ["a", "x"], ["b", "x"]];
        let ctx = build_context(&rows, 2, None).unwrap();
        let mut r = RunReport::for_context("batch", &ctx);
        r.param("theta", 0.5);
        r.timings.push(("cluster".into(), Duration::from_millis(3)));
        assert_eq!(r.context_density, 3.0 / 4.0);
        let text = r.to_string();
        assert!(text.contains("mode_sizes: 2,2\n"));
        assert!(text.contains("duplicates_dropped: 1\n"));
        assert!(text.contains("context_density: 0.750000\n"));
        assert!(text.contains("param.theta: 0.5\n"));
        assert!(text.contains("time_ms.cluster: 3.000\n"));
        assert!(!text.contains("peak_intermediate"));
        r.stage_records = Some([6, 5, 6, 3, 3]);
        assert_eq!(r.peak_intermediate(), Some(6));
    }
}
