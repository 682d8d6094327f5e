//! File formats, synthetic generators, a threaded executor and the command
//! line front end for [`polyclust_core`].
//!
//! ```no_run
//! use polyclust::{engine, output, tsv};
//!
//! let ctx = tsv::read_tsv("toy.tsv", 3, false)?;
//! let run = engine::run(&ctx, &engine::RunParams::default())?;
//! output::write_clusters(&ctx, &run.clusters, output::Format::Display, std::io::stdout())?;
//! eprint!("{}", run.report);
//! # Ok::<(), polyclust::Error>(())
//! ```

pub mod cli;
pub mod engine;
mod error;
mod escape;
pub mod exec;
pub mod output;
pub mod report;
pub mod spill;
pub mod synth;
pub mod tsv;

pub use error::{Error, Result};
pub use exec::Threads;
pub use polyclust_core as core;
