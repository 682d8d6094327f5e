//! Synthetic contexts. Entities are named `<mode letter><index>` with
//! 1-based indices: `a1, a2, …` for mode 0, `b1, …` for mode 1, and so on.

use polyclust_core::{ContextBuilder, Dictionary, PolyContext};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

fn mode_letter(mode: usize) -> char {
    (b'a' + (mode % 26) as u8) as char
}

fn dictionaries(sizes: &[usize]) -> Vec<Dictionary> {
    sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| (1..=n).map(|i| format!("{}{i}", mode_letter(k))).collect())
        .collect()
}

fn positive(what: &str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Usage(format!("{what} must be at least 1")));
    }
    Ok(())
}

/// Calls `f` with every point of the cuboid, last mode varying fastest.
fn for_each_cell(sizes: &[usize], mut f: impl FnMut(&[u32]) -> Result<()>) -> Result<()> {
    if sizes.contains(&0) {
        return Ok(());
    }
    let mut cell = vec![0u32; sizes.len()];
    loop {
        f(&cell)?;
        let mut k = sizes.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            cell[k] += 1;
            if (cell[k] as usize) < sizes[k] {
                break;
            }
            cell[k] = 0;
        }
    }
}

/// Cube of side `n` minus its diagonal: `n³ − n` triples.
pub fn gen_k1(n: usize) -> Result<PolyContext> {
    positive("size", n)?;
    let mut b = ContextBuilder::with_dictionaries(dictionaries(&[n; 3]))?;
    for_each_cell(&[n; 3], |c| {
        if !(c[0] == c[1] && c[1] == c[2]) {
            b.push_ids(c, None)?;
        }
        Ok(())
    })?;
    Ok(b.build())
}

/// `blocks` disjoint full cubes of side `s`: `blocks · s³` triples.
pub fn gen_k2(s: usize, blocks: usize) -> Result<PolyContext> {
    positive("size", s)?;
    positive("block count", blocks)?;
    let mut b = ContextBuilder::with_dictionaries(dictionaries(&[s * blocks; 3]))?;
    for block in 0..blocks {
        let base = (block * s) as u32;
        for_each_cell(&[s; 3], |c| {
            b.push_ids(&[base + c[0], base + c[1], base + c[2]], None)?;
            Ok(())
        })?;
    }
    Ok(b.build())
}

/// Full cuboid with `arity` modes of size `s`: `s^arity` tuples.
pub fn gen_k3(s: usize, arity: usize) -> Result<PolyContext> {
    positive("size", s)?;
    let sizes = vec![s; arity];
    let mut b = ContextBuilder::with_dictionaries(dictionaries(&sizes))?;
    for_each_cell(&sizes, |c| {
        b.push_ids(c, None)?;
        Ok(())
    })?;
    Ok(b.build())
}

/// Parameters of [`gen_random`].
#[derive(Clone, Debug, PartialEq)]
pub struct RandomSpec {
    pub mode_sizes: Vec<usize>,
    /// Probability that a cell of the cuboid is in the relation.
    pub fill: f64,
    /// Integer values drawn uniformly from `0..levels` when set.
    pub levels: Option<u32>,
    pub seed: u64,
}

/// Bernoulli-filled cuboid, reproducible from the seed. Every entity is
/// interned even when it ends up in no tuple.
pub fn gen_random(spec: &RandomSpec) -> Result<PolyContext> {
    if !(0.0..=1.0).contains(&spec.fill) {
        return Err(Error::Usage(format!("fill {} is not in [0, 1]", spec.fill)));
    }
    if spec.levels == Some(0) {
        return Err(Error::Usage("levels must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut b = ContextBuilder::with_dictionaries(dictionaries(&spec.mode_sizes))?;
    if spec.levels.is_some() {
        b = b.valued();
    }
    for_each_cell(&spec.mode_sizes, |c| {
        if rng.gen_bool(spec.fill) {
            let value = spec.levels.map(|l| f64::from(rng.gen_range(0..l)));
            b.push_ids(c, value)?;
        }
        Ok(())
    })?;
    Ok(b.build())
}
