//! Cluster writers and the machine-format reader.
//!
//! Display format, one block per cluster:
//!
//! ```text
//! {
//! {u2}
//! {i1, i2}
//! {l1, l2}
//! }
//! ```
//!
//! Machine format, one line per cluster: tab-separated components of
//! comma-separated entity names, then the generator count and the density
//! with six decimals (`-` when unknown). Entities are listed in dictionary
//! order and names are backslash-escaped.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, BufWriter, Write};
use std::str::FromStr;

use polyclust_core::{ClusterSet, Cumulus, MultimodalCluster, PolyContext};

use crate::escape::{join_names, split, split_names};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    Display,
    #[default]
    Machine,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "display" => Ok(Format::Display),
            "machine" => Ok(Format::Machine),
            other => Err(Error::Usage(format!("unknown output format {other:?}"))),
        }
    }
}

fn names<'a>(ctx: &'a PolyContext, c: &'a Cumulus) -> impl Iterator<Item = &'a str> + 'a {
    let dict = ctx.dictionary(c.mode());
    c.members()
        .iter()
        .map(move |&id| dict.name(id).expect("interned id"))
}

pub fn machine_line(ctx: &PolyContext, cluster: &MultimodalCluster) -> String {
    let mut line = String::new();
    for c in cluster.components() {
        line.push_str(&join_names(names(ctx, c)));
        line.push('\t');
    }
    line.push_str(&cluster.generator_count.to_string());
    line.push('\t');
    match cluster.density {
        Some(d) => line.push_str(&format!("{d:.6}")),
        None => line.push('-'),
    }
    line
}

pub fn display_block(ctx: &PolyContext, cluster: &MultimodalCluster) -> String {
    let mut block = String::from("{\n");
    for c in cluster.components() {
        block.push('{');
        block.push_str(&names(ctx, c).collect::<Vec<_>>().join(", "));
        block.push_str("}\n");
    }
    block.push_str("}\n");
    block
}

pub fn write_clusters(
    ctx: &PolyContext,
    clusters: &ClusterSet,
    format: Format,
    writer: impl Write,
) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for c in clusters {
        match format {
            Format::Display => w.write_all(display_block(ctx, c).as_bytes())?,
            Format::Machine => writeln!(w, "{}", machine_line(ctx, c))?,
        }
    }
    w.flush()?;
    Ok(())
}

/// A machine-format line at the level of names.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MachineRecord {
    pub components: Vec<Vec<String>>,
    pub generators: usize,
    pub density: String,
}

impl MachineRecord {
    pub fn parse(line_no: usize, line: &str) -> Result<Self> {
        let fields = split(line, '\t');
        if fields.len() < 4 {
            return Err(Error::parse(
                line_no,
                format!("expected at least 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let (components, tail) = fields.split_at(fields.len() - 2);
        let components = components
            .iter()
            .map(|f| split_names(f).map_err(|m| Error::parse(line_no, m)))
            .collect::<Result<Vec<_>>>()?;
        let generators = tail[0]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad generator count {:?}", tail[0])))?;
        let density = tail[1].to_owned();
        if density != "-" && density.parse::<f64>().is_err() {
            return Err(Error::parse(line_no, format!("bad density {density:?}")));
        }
        Ok(MachineRecord {
            components,
            generators,
            density,
        })
    }

    /// Entity names sorted within each component, so that files produced
    /// from differently ordered inputs compare equal.
    pub fn normalized(mut self) -> Self {
        for c in &mut self.components {
            c.sort();
        }
        self
    }
}

impl fmt::Display for MachineRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.components {
            write!(f, "{}\t", join_names(c.iter().map(String::as_str)))?;
        }
        write!(f, "{}\t{}", self.generators, self.density)
    }
}

pub fn read_machine(reader: impl BufRead) -> Result<Vec<MachineRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        out.push(MachineRecord::parse(i + 1, &line)?);
    }
    Ok(out)
}

/// Reads machine output back into clusters over the dictionaries of `ctx`.
/// Densities keep the six decimals of the file; representatives are unset.
pub fn parse_machine(reader: impl BufRead, ctx: &PolyContext) -> Result<ClusterSet> {
    let mut clusters = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let line_no = i + 1;
        let rec = MachineRecord::parse(line_no, &line)?;
        if rec.components.len() != ctx.arity() {
            return Err(Error::parse(
                line_no,
                format!("{} components for arity {}", rec.components.len(), ctx.arity()),
            ));
        }
        let components = rec
            .components
            .iter()
            .enumerate()
            .map(|(k, names)| {
                let ids = names
                    .iter()
                    .map(|n| {
                        ctx.dictionary(k)
                            .id(n)
                            .ok_or_else(|| Error::parse(line_no, format!("unknown entity {n:?} in mode {k}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Cumulus::new(k, ids))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cluster = MultimodalCluster::new(components);
        cluster.generator_count = rec.generators;
        cluster.density = rec.density.parse().ok();
        clusters.push(cluster);
    }
    Ok(ClusterSet::from_unsorted(clusters))
}

/// Set difference of two machine outputs after normalization.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Diff {
    pub only_left: Vec<MachineRecord>,
    pub only_right: Vec<MachineRecord>,
}

impl Diff {
    pub fn is_empty(&self) -> bool {
        self.only_left.is_empty() && self.only_right.is_empty()
    }
}

pub fn diff(left: Vec<MachineRecord>, right: Vec<MachineRecord>) -> Diff {
    let l: BTreeSet<_> = left.into_iter().map(MachineRecord::normalized).collect();
    let r: BTreeSet<_> = right.into_iter().map(MachineRecord::normalized).collect();
    Diff {
        only_left: l.difference(&r).cloned().collect(),
        only_right: r.difference(&l).cloned().collect(),
    }
}
