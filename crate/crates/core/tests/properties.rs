mod common;

use common::from_mask;
use polyclust_core::batch::{batch_cluster, precompute_primes, SubRelationKey};
use polyclust_core::mapreduce::{run_pipeline, NoHooks, PipelineConfig};
use polyclust_core::nvalued::{noac_candidates, noac_cluster, MinSupport, NoacParams};
use polyclust_core::online::OnlineState;
use polyclust_core::operators::{cumulus, delta_cumulus, generate_cluster, oracle_enumerate};
use polyclust_core::{build_context, exact_density, DensityMode, PolyContext, Sequential};
use proptest::prelude::*;

/// Mode sizes, an occupancy mask drawn at a random fill ratio, and values.
fn context_parts() -> impl Strategy<Value = (Vec<usize>, Vec<bool>, Vec<f64>)> {
    (2usize..=4)
        .prop_flat_map(|arity| proptest::collection::vec(1usize..=6, arity))
        .prop_filter("bounded cuboid", |sizes| sizes.iter().product::<usize>() <= 400)
        .prop_flat_map(|sizes| {
            let cells: usize = sizes.iter().product();
            (0.1f64..0.9).prop_flat_map(move |fill| {
                let sizes = sizes.clone();
                (
                    Just(sizes),
                    proptest::collection::vec(proptest::bool::weighted(fill), cells),
                    proptest::collection::vec((0u8..10).prop_map(f64::from), cells),
                )
            })
        })
}

fn contexts() -> impl Strategy<Value = PolyContext> {
    context_parts().prop_map(|(sizes, mask, _)| from_mask(&sizes, &mask, None))
}

fn valued_contexts() -> impl Strategy<Value = PolyContext> {
    context_parts().prop_map(|(sizes, mask, values)| from_mask(&sizes, &mask, Some(&values)))
}

const THETAS: [f64; 4] = [0.0, 0.3, 0.7, 1.0];
const MODES: [DensityMode; 2] = [DensityMode::Exact, DensityMode::Generators];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn batch_equals_oracle(ctx in contexts()) {
        for theta in THETAS {
            for mode in MODES {
                prop_assert_eq!(batch_cluster(&ctx, theta, mode), oracle_enumerate(&ctx, theta, mode));
            }
        }
    }

    #[test]
    fn pipeline_equals_oracle(ctx in contexts(), partitions in 1usize..8, split in 1usize..40) {
        for theta in THETAS {
            for mode in MODES {
                let cfg = PipelineConfig {
                    theta,
                    density_mode: mode,
                    partitions,
                    split_size: split,
                    ..PipelineConfig::default()
                };
                let out = run_pipeline(&ctx, &cfg, &Sequential, &mut NoHooks).unwrap();
                prop_assert_eq!(out.clusters, oracle_enumerate(&ctx, theta, mode));
            }
        }
    }

    #[test]
    fn pipeline_conservation(ctx in contexts(), partitions in 1usize..8) {
        let cfg = PipelineConfig { partitions, ..PipelineConfig::default() };
        let out = run_pipeline(&ctx, &cfg, &Sequential, &mut NoHooks).unwrap();
        let n = ctx.arity() * ctx.len();
        let table = precompute_primes(&ctx);
        let keys: usize = (0..ctx.arity()).map(|k| table.key_count(k)).sum();
        prop_assert_eq!(out.stats.stage_records[0], n);
        prop_assert_eq!(out.stats.reduce_groups[0], keys);
        prop_assert_eq!(out.stats.stage_records[1], keys);
        prop_assert_eq!(out.stats.stage_records[2], n);
        prop_assert_eq!(out.stats.reduce_groups[1], ctx.len());
        prop_assert_eq!(out.stats.stage_records[3], ctx.len());
    }

    #[test]
    fn online_is_order_and_batching_independent(
        ctx in contexts(),
        seed in any::<u64>(),
        cuts in proptest::collection::vec(0usize..50, 0..4),
    ) {
        let mut tuples = ctx.tuples().to_vec();
        // deterministic shuffle from the seed
        let mut s = seed | 1;
        for i in (1..tuples.len()).rev() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            tuples.swap(i, (s % (i as u64 + 1)) as usize);
        }
        // replay a prefix to exercise duplicate skipping
        let replay = tuples.len() / 3;
        tuples.extend_from_slice(&ctx.tuples()[..replay]);

        let mut state = OnlineState::new(ctx.arity()).unwrap();
        let mut bounds: Vec<usize> = cuts.iter().map(|c| c % (tuples.len() + 1)).collect();
        bounds.sort_unstable();
        let mut start = 0;
        for end in bounds.into_iter().chain([tuples.len()]) {
            state.add_batch(&tuples[start..end]).unwrap();
            start = end;
        }
        prop_assert_eq!(state.len(), ctx.len());
        for theta in THETAS {
            for mode in MODES {
                prop_assert_eq!(
                    state.post_process(theta, mode, None).unwrap(),
                    batch_cluster(&ctx, theta, mode)
                );
            }
        }
    }

    #[test]
    fn online_cumuli_only_grow(ctx in contexts()) {
        let mut state = OnlineState::new(ctx.arity()).unwrap();
        let mut before: Vec<(SubRelationKey, usize)> = Vec::new();
        for chunk in ctx.tuples().chunks(5) {
            state.add_batch(chunk).unwrap();
            for (key, len) in &before {
                prop_assert!(state.cumulus(key).unwrap().len() >= *len);
            }
            before = (0..ctx.arity())
                .flat_map(|k| state.table().entries(k).map(|(key, c)| (key, c.len())).collect::<Vec<_>>())
                .collect();
        }
    }

    #[test]
    fn cumulus_sound_and_complete(ctx in contexts()) {
        for t in ctx.tuples() {
            for k in 0..ctx.arity() {
                let c = cumulus(&ctx, t, k).unwrap();
                prop_assert!(c.contains(t[k]));
                for e in 0..ctx.mode_size(k) as u32 {
                    prop_assert_eq!(c.contains(e), ctx.contains(&t.replaced(k, e)));
                }
            }
        }
    }

    #[test]
    fn generated_box_holds_generator(ctx in contexts()) {
        let all = oracle_enumerate(&ctx, 0.0, DensityMode::Exact);
        prop_assert!(all.len() <= ctx.len());
        for t in ctx.tuples() {
            let c = generate_cluster(&ctx, t).unwrap();
            prop_assert!(c.box_contains(t));
            prop_assert!(all.iter().any(|o| o.components() == c.components()));
        }
        let generated: usize = all.iter().map(|c| c.generator_count).sum();
        prop_assert_eq!(generated, ctx.len());
    }

    #[test]
    fn density_bounds(ctx in contexts()) {
        for c in &oracle_enumerate(&ctx, 0.0, DensityMode::Exact) {
            let d = exact_density(ctx.relation(), c.components()).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
            let full = (0..c.volume()).all(|mut i| {
                let mut probe = vec![0u32; c.arity()];
                for (k, comp) in c.components().iter().enumerate().rev() {
                    probe[k] = comp.members()[(i % comp.len() as u128) as usize];
                    i /= comp.len() as u128;
                }
                ctx.contains(&probe)
            });
            prop_assert_eq!(d == 1.0, full);
            let g = oracle_enumerate(&ctx, 0.0, DensityMode::Generators);
            let gc = g.iter().find(|x| x.components() == c.components()).unwrap();
            prop_assert!(gc.density.unwrap() <= d);
        }
    }

    #[test]
    fn delta_is_monotone(ctx in valued_contexts(), d1 in 0f64..5.0, extra in 0f64..5.0) {
        let d2 = d1 + extra;
        for t in ctx.tuples() {
            for k in 0..ctx.arity() {
                let narrow = delta_cumulus(&ctx, t, k, d1).unwrap();
                let wide = delta_cumulus(&ctx, t, k, d2).unwrap();
                prop_assert!(narrow.contains(t[k]));
                prop_assert!(narrow.is_subset(&wide));
                prop_assert_eq!(delta_cumulus(&ctx, t, k, f64::INFINITY).unwrap(), cumulus(&ctx, t, k).unwrap());
            }
        }
    }

    #[test]
    fn noac_reduces_to_prime_clustering(ctx in contexts()) {
        let valued = ctx.clone().with_constant_value(0.0);
        for theta in THETAS {
            prop_assert_eq!(
                noac_cluster(&valued, &NoacParams::new(0.0, theta, 0)).unwrap(),
                batch_cluster(&ctx, theta, DensityMode::Exact)
            );
        }
    }

    #[test]
    fn noac_filters_are_monotone(ctx in valued_contexts(), delta in 0f64..4.0, sup in 0usize..3, rho in 0f64..1.0) {
        let base = NoacParams::new(delta, rho, sup);
        let out = noac_cluster(&ctx, &base).unwrap();
        let mut per_mode = vec![sup; ctx.arity()];
        per_mode[0] += 1;
        let tighter = [
            NoacParams::new(delta, (rho + 0.2).min(1.0), sup),
            NoacParams { min_sup: MinSupport::PerMode(per_mode), ..base.clone() },
        ];
        for params in tighter {
            let sub = noac_cluster(&ctx, &params).unwrap();
            prop_assert!(sub.len() <= out.len());
            for c in &sub {
                prop_assert!(out.iter().any(|o| o.components() == c.components()));
            }
        }
        // candidates do not depend on the validity constraints
        let a = noac_candidates(&ctx, &base, &Sequential, 1).unwrap();
        let b = noac_candidates(&ctx, &NoacParams::new(delta, 1.0, 5), &Sequential, 1).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn loading_is_idempotent_under_duplication(ctx in contexts(), dup in proptest::collection::vec(any::<prop::sample::Index>(), 0..10)) {
        let names = |t: &polyclust_core::Tuple| -> Vec<String> {
            t.iter().enumerate().map(|(k, &id)| ctx.dictionary(k).name(id).unwrap().to_string()).collect()
        };
        let mut rows: Vec<Vec<String>> = ctx.tuples().iter().map(names).collect();
        if !rows.is_empty() {
            for i in &dup {
                let r = rows[i.index(ctx.len())].clone();
                rows.push(r);
            }
        }
        let once = build_context(&rows[..ctx.len()], ctx.arity(), None).unwrap();
        let twice = build_context(&rows, ctx.arity(), None).unwrap();
        prop_assert_eq!(once.tuples(), twice.tuples());
        prop_assert_eq!(twice.stats().duplicates, rows.len() - ctx.len());
        prop_assert_eq!(
            batch_cluster(&once, 0.0, DensityMode::Exact),
            batch_cluster(&twice, 0.0, DensityMode::Exact)
        );
    }
}
