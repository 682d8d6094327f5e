#![allow(dead_code)]

use polyclust_core::{build_context, ContextBuilder, Dictionary, MultimodalCluster, PolyContext};

pub const TOY: [[&str; 3]; 8] = [
    ["u1", "i1", "l1"],
    ["u2", "i1", "l1"],
    ["u2", "i2", "l1"],
    ["u3", "i2", "l1"],
    ["u1", "i1", "l2"],
    ["u2", "i1", "l2"],
    ["u2", "i2", "l2"],
    ["u3", "i1", "l2"],
];

pub fn toy() -> PolyContext {
    build_context(&TOY, 3, None).unwrap()
}

/// Cluster rendered with entity names, for readable assertions.
pub fn named(ctx: &PolyContext, c: &MultimodalCluster) -> Vec<Vec<String>> {
    c.components()
        .iter()
        .map(|comp| {
            comp.members()
                .iter()
                .map(|&id| ctx.dictionary(comp.mode()).name(id).unwrap().to_string())
                .collect()
        })
        .collect()
}

pub fn parts(spec: &[&[&str]]) -> Vec<Vec<String>> {
    spec.iter()
        .map(|p| p.iter().map(|s| s.to_string()).collect())
        .collect()
}

/// Context over `sizes` containing the cells selected by `mask`
/// (row-major, last mode fastest).
pub fn from_mask(sizes: &[usize], mask: &[bool], values: Option<&[f64]>) -> PolyContext {
    let dicts: Vec<Dictionary> = sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| (0..n).map(|i| format!("{}{}", (b'a' + k as u8) as char, i)).collect())
        .collect();
    let mut b = ContextBuilder::with_dictionaries(dicts).unwrap();
    if values.is_some() {
        b = b.valued();
    }
    for (cell, _) in mask.iter().enumerate().filter(|(_, &on)| on) {
        let mut rest = cell;
        let mut ids = vec![0u32; sizes.len()];
        for k in (0..sizes.len()).rev() {
            ids[k] = (rest % sizes[k]) as u32;
            rest /= sizes[k];
        }
        b.push_ids(&ids, values.map(|v| v[cell])).unwrap();
    }
    b.build()
}

/// Full cuboids over disjoint entity groups.
pub fn disjoint_cuboids(side: usize, blocks: usize) -> PolyContext {
    let mut rows = Vec::new();
    for b in 0..blocks {
        for x in 0..side {
            for y in 0..side {
                for z in 0..side {
                    let i = b * side;
                    rows.push([
                        format!("a{}", i + x),
                        format!("b{}", i + y),
                        format!("c{}", i + z),
                    ]);
                }
            }
        }
    }
    build_context(&rows, 3, None).unwrap()
}

pub fn full_cuboid(side: usize, arity: usize) -> PolyContext {
    let sizes = vec![side; arity];
    let mask = vec![true; side.pow(arity as u32)];
    from_mask(&sizes, &mask, None)
}
