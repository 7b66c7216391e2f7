mod common;

use std::collections::BTreeSet;

use common::literal_cosine;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use tagsim::baselines::{
    cosine_similarity_matrix, lsi_similarity_matrix, simrank_compute, LsiConfig, SimRankConfig,
};
use tagsim::corpus::{
    build_tag_resource_matrix, ingest_assignments, Folksonomy, TagResourceMatrix,
};
use tagsim::expand::{expansion_size, total_score, Expander};
use tagsim::search::{tfidf_weight, SearchIndex};
use tagsim::simcore::{
    compute_similarities, init_similarity, mrs_step, pairwise_step_oracle, tag_numerators,
    EngineConfig, Side, SimilarityMatrix,
};

fn counts(max_tags: usize, max_resources: usize) -> impl Strategy<Value = TagResourceMatrix> {
    (1..=max_tags, 1..=max_resources).prop_flat_map(|(nt, nr)| {
        proptest::collection::vec(prop_oneof![3 => Just(0u32), 1 => 1u32..5], nt * nr).prop_map(
            move |cells| {
                let rows: Vec<Vec<u32>> = cells.chunks(nr).map(<[u32]>::to_vec).collect();
                TagResourceMatrix::from_dense(&rows).unwrap()
            },
        )
    })
}

/// A few reinforcement steps from the identity.
fn iterate(tr: &TagResourceMatrix, psi: f64, steps: usize) -> (SimilarityMatrix, SimilarityMatrix) {
    let mut st = init_similarity(tr.n_tags()).unwrap();
    let mut sr = init_similarity(tr.n_resources()).unwrap();
    for _ in 0..steps {
        let s = mrs_step(tr, &st, &sr, psi).unwrap();
        st = s.st;
        sr = s.sr;
    }
    (st, sr)
}

fn assert_similarity(m: &SimilarityMatrix) {
    let n = m.dim();
    for a in 0..n {
        assert_eq!(m.get(a, a), 1.0);
        for b in 0..n {
            let x = m.get(a, b);
            assert_eq!(x, m.get(b, a));
            assert!((-1e-12..=1.0 + 1e-12).contains(&x), "({a},{b}) = {x}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_matches_oracle(tr in counts(7, 8), psi in 0.0..=1.0f64, steps in 0usize..3) {
        let (st, sr) = iterate(&tr, psi, steps);
        let next = mrs_step(&tr, &st, &sr, psi).unwrap();
        for a in 0..tr.n_tags() {
            for b in 0..tr.n_tags() {
                let want = pairwise_step_oracle(&tr, &st, &sr, psi, a, b, Side::Tag).unwrap();
                prop_assert!((next.st.get(a, b) - want).abs() <= 1e-9);
            }
        }
        for a in 0..tr.n_resources() {
            for b in 0..tr.n_resources() {
                let want = pairwise_step_oracle(&tr, &st, &sr, psi, a, b, Side::Resource).unwrap();
                prop_assert!((next.sr.get(a, b) - want).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn zero_psi_is_cosine(tr in counts(8, 10), steps in 1usize..4) {
        let (st, _) = iterate(&tr, 0.0, steps);
        let cos = cosine_similarity_matrix(&tr).unwrap();
        for a in 0..tr.n_tags() {
            for b in 0..tr.n_tags() {
                prop_assert!((st.get(a, b) - literal_cosine(&tr, a, b)).abs() <= 1e-9);
                prop_assert!((cos.get(a, b) - literal_cosine(&tr, a, b)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn iterates_are_similarity_matrices(tr in counts(8, 10), psi in 0.0..=1.0f64, steps in 1usize..5) {
        let (st, sr) = iterate(&tr, psi, steps);
        assert_similarity(&st);
        assert_similarity(&sr);
    }

    #[test]
    fn numerators_grow_with_psi(tr in counts(6, 8), lo in 0.0..=1.0f64, hi in 0.0..=1.0f64) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let (_, sr) = iterate(&tr, 0.5, 2);
        let a = tag_numerators(&tr, &sr, lo).unwrap();
        let b = tag_numerators(&tr, &sr, hi).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(*x <= *y + 1e-9);
        }
    }

    #[test]
    fn baselines_are_similarity_matrices(tr in counts(8, 10)) {
        let (st, sr) = simrank_compute(&tr, &SimRankConfig::default()).unwrap();
        assert_similarity(&st);
        assert_similarity(&sr);
        assert_similarity(&cosine_similarity_matrix(&tr).unwrap());
    }

    #[test]
    fn full_rank_lsi_is_cosine(tr in counts(6, 6)) {
        let k = tr.n_tags().min(tr.n_resources());
        let lsi = lsi_similarity_matrix(&tr, &LsiConfig { k, ..LsiConfig::default() }).unwrap();
        let cos = cosine_similarity_matrix(&tr).unwrap();
        for a in 0..tr.n_tags() {
            for b in 0..tr.n_tags() {
                if tr.resource_frequency(a) > 0 && tr.resource_frequency(b) > 0 {
                    prop_assert!((lsi.get(a, b) - cos.get(a, b)).abs() <= 1e-6);
                }
            }
        }
    }

    #[test]
    fn expansion_matches_exhaustive_scoring(
        tr in counts(10, 8),
        picks in proptest::collection::btree_set(0usize..10, 1..4),
        k in proptest::option::of(0usize..6),
    ) {
        let set: BTreeSet<usize> = picks.into_iter().filter(|&t| t < tr.n_tags()).collect();
        prop_assume!(!set.is_empty());
        let st = compute_similarities(&tr, &EngineConfig::default()).unwrap().st;
        let res = Expander::new(&st, &tr).unwrap().expand(&set, k).unwrap();
        let k = k.unwrap_or_else(|| expansion_size(set.len()).unwrap());
        prop_assert_eq!(res.k_used, k);

        let mut want: Vec<(usize, f64)> = (0..tr.n_tags())
            .filter(|t| !set.contains(t))
            .map(|t| (t, total_score(t, &set, &st, &tr).unwrap()))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        want.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        want.truncate(k);
        prop_assert_eq!(res.added.len(), want.len());
        for ((t, s), (_, ws)) in res.added.iter().zip(&want) {
            prop_assert!((s - ws).abs() <= 1e-9);
            prop_assert!(!set.contains(t));
            prop_assert!((s - total_score(*t, &set, &st, &tr).unwrap()).abs() <= 1e-9);
        }
        prop_assert!(res.added.windows(2).all(|w| w[0].1 >= w[1].1));
        prop_assert!(res.expanded().is_superset(&set));
        prop_assert_eq!(res.expanded().len(), set.len() + res.added.len());
    }

    #[test]
    fn ranking_matches_brute_force(
        tr in counts(8, 12),
        picks in proptest::collection::btree_set(0usize..8, 1..4),
        q in 1usize..6,
    ) {
        let set: BTreeSet<usize> = picks.into_iter().filter(|&t| t < tr.n_tags()).collect();
        prop_assume!(!set.is_empty());
        let ranked = SearchIndex::new(&tr).rank(&set, q).unwrap();
        let mut want: Vec<(usize, f64)> = (0..tr.n_resources())
            .map(|r| (r, set.iter().map(|&t| tfidf_weight(t, r, &tr).unwrap()).sum::<f64>()))
            .filter(|&(_, s)| s > 0.0)
            .collect();
        want.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        want.truncate(q);
        prop_assert_eq!(ranked.len(), want.len());
        for ((r, s), (_, ws)) in ranked.iter().zip(&want) {
            prop_assert!((s - ws).abs() <= 1e-9);
            let direct: f64 = set.iter().map(|&t| tfidf_weight(t, *r, &tr).unwrap()).sum();
            prop_assert!((s - direct).abs() <= 1e-9);
        }
        prop_assert!(ranked.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn corpus_round_trip(
        triples in proptest::collection::vec((0usize..6, 0usize..8, 0usize..10), 1..60),
    ) {
        let mut f = Folksonomy::new();
        let mut distinct = BTreeSet::new();
        for &(u, r, t) in &triples {
            f.add(&format!("u{u}"), &format!("r{r}"), &format!("t{t}"));
            distinct.insert((u, r, t));
        }
        let tr = build_tag_resource_matrix(&f).unwrap();
        prop_assert_eq!(tr.total(), distinct.len() as u64);
        prop_assert_eq!(f.assignments().len(), distinct.len());

        let mut buf = Vec::new();
        f.write_tsv(&mut buf).unwrap();
        let g = ingest_assignments(buf.as_slice()).unwrap();
        let back = build_tag_resource_matrix(&g).unwrap();
        for t in 0..f.n_tags() {
            let gt = g.tags().get(f.tags().name(t)).unwrap();
            for r in 0..f.n_resources() {
                let gr = g.resources().get(f.resources().name(r)).unwrap();
                prop_assert_eq!(tr.get(t, r), back.get(gt, gr));
            }
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..8 {
        let tr = counts(20, 25).new_tree(&mut runner).unwrap().current();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    let cfg = EngineConfig::default();
                    let out = compute_similarities(&tr, &cfg).unwrap();
                    let simrank = simrank_compute(&tr, &SimRankConfig::default()).unwrap();
                    (out.st.to_dense(), out.sr.to_dense(), simrank.0.to_dense())
                })
        };
        assert_eq!(run(1), run(3));
    }
}
