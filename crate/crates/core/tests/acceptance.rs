mod common;

use std::time::Instant;

use common::{dense, instances, literal_cosine, max_abs_diff, report, PSIS};
use nalgebra::DMatrix;
use tagsim::baselines::{
    cosine_similarity_matrix, lsi_similarity_matrix, simrank_compute, LsiConfig, SimRankConfig,
};
use tagsim::corpus::build_tag_resource_matrix;
use tagsim::evalharness::{
    generate_synthetic, run_retrieval_experiment, Method, MethodConfig, SplitSpec, SynthSpec,
};
use tagsim::expand::expansion_size;
use tagsim::simcore::{
    compute_similarities, init_similarity, mrs_step, pairwise_step_oracle, EngineConfig, Side,
};

const SEED: u64 = 20_240_601;
const INSTANCES: usize = 50;
const STEPS: usize = 6;
const EXACT: f64 = 1e-9;
const RANGE_SLACK: f64 = 1e-12;
const MONOTONE_SLACK: f64 = 1e-9;

#[test]
fn c1_oracle_equivalence() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut entries = 0usize;
    for (i, tr) in instances(SEED, INSTANCES).iter().enumerate() {
        let psi = PSIS[i % PSIS.len()];
        let mut st = init_similarity(tr.n_tags()).unwrap();
        let mut sr = init_similarity(tr.n_resources()).unwrap();
        for _ in 0..3 {
            let step = mrs_step(tr, &st, &sr, psi).unwrap();
            for (side, n, got) in [
                (Side::Tag, tr.n_tags(), &step.st),
                (Side::Resource, tr.n_resources(), &step.sr),
            ] {
                for a in 0..n {
                    for b in 0..n {
                        let want = pairwise_step_oracle(tr, &st, &sr, psi, a, b, side).unwrap();
                        worst = worst.max((got.get(a, b) - want).abs());
                        entries += 1;
                    }
                }
            }
            st = step.st;
            sr = step.sr;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= EXACT && secs < 60.0;
    report(
        1,
        "oracle equivalence",
        pass,
        format!("{entries} entries, max |diff| {worst:.2e}, {secs:.1}s"),
    );
    assert!(pass);
}

#[test]
fn c2_cosine_reduction() {
    let mut worst: f64 = 0.0;
    for tr in instances(SEED, INSTANCES) {
        let cos = cosine_similarity_matrix(&tr).unwrap();
        let mut st = init_similarity(tr.n_tags()).unwrap();
        let mut sr = init_similarity(tr.n_resources()).unwrap();
        for _ in 0..STEPS {
            let step = mrs_step(&tr, &st, &sr, 0.0).unwrap();
            worst = worst.max(max_abs_diff(&step.st, &cos));
            for a in 0..tr.n_tags() {
                for b in 0..tr.n_tags() {
                    worst = worst.max((step.st.get(a, b) - literal_cosine(&tr, a, b)).abs());
                }
            }
            st = step.st;
            sr = step.sr;
        }
    }
    let pass = worst <= EXACT;
    report(
        2,
        "cosine reduction at psi = 0",
        pass,
        format!("{STEPS} iterations, max |diff| {worst:.2e}"),
    );
    assert!(pass);
}

#[test]
fn c3_structural_invariants() {
    let mut asym: f64 = 0.0;
    let mut diag: f64 = 0.0;
    let mut out_of_range = 0usize;
    let mut decreases = 0usize;
    let mut worst_drop: f64 = 0.0;
    let mut first_drop = None;
    for (i, tr) in instances(SEED, INSTANCES).iter().enumerate() {
        let psi = PSIS[i % PSIS.len()];
        let mut st = init_similarity(tr.n_tags()).unwrap();
        let mut sr = init_similarity(tr.n_resources()).unwrap();
        for k in 1..=STEPS {
            let step = mrs_step(tr, &st, &sr, psi).unwrap();
            for (prev, next) in [(&st, &step.st), (&sr, &step.sr)] {
                let n = next.dim();
                for a in 0..n {
                    diag = diag.max((next.get(a, a) - 1.0).abs());
                    for b in 0..n {
                        let x = next.get(a, b);
                        asym = asym.max((x - next.get(b, a)).abs());
                        if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&x) {
                            out_of_range += 1;
                        }
                        let drop = prev.get(a, b) - x;
                        if drop > MONOTONE_SLACK {
                            decreases += 1;
                            if drop > worst_drop {
                                worst_drop = drop;
                                first_drop = Some((i, psi, k));
                            }
                        }
                    }
                }
            }
            st = step.st;
            sr = step.sr;
        }
    }
    let structural = asym <= RANGE_SLACK && diag <= RANGE_SLACK && out_of_range == 0;
    let pass = structural && decreases == 0;
    report(
        3,
        "structural invariants",
        pass,
        format!(
            "asymmetry {asym:.1e}, diagonal error {diag:.1e}, {out_of_range} out of range, \
             {decreases} decreasing entries, largest drop {worst_drop:.2e} at {first_drop:?}"
        ),
    );
    assert!(structural, "symmetry, diagonal or range violated");
    assert_eq!(decreases, 0, "iterates are not entrywise non-decreasing");
}

#[test]
fn c4_convergence_speed() {
    let start = Instant::now();
    let spec = SynthSpec::default();
    let f = generate_synthetic(&spec).unwrap();
    let tr = build_tag_resource_matrix(&f).unwrap();
    let out = compute_similarities(&tr, &EngineConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let last = out.trace.steps.last().unwrap();
    let pass = out.trace.converged && out.trace.iterations_run <= 6 && secs < 600.0;
    report(
        4,
        "convergence speed",
        pass,
        format!(
            "{} tags x {} resources, {} iterations, final deltas {:.4}/{:.4}, {secs:.1}s",
            tr.n_tags(),
            tr.n_resources(),
            out.trace.iterations_run,
            last.delta_t,
            last.delta_r
        ),
    );
    assert!(pass);
}

#[test]
fn c5_expansion_rule() {
    let closed = |n: usize| if n > 6 { n / 2 + n % 2 } else { 3 };
    let mismatches: Vec<usize> = (1..=20)
        .filter(|&n| expansion_size(n).unwrap() != closed(n))
        .collect();
    let named = [(7, 4), (6, 3), (13, 7)]
        .iter()
        .all(|&(n, k)| expansion_size(n).unwrap() == k);
    let pass = mismatches.is_empty() && named;
    report(
        5,
        "expansion rule",
        pass,
        format!("n = 1..20, mismatches {mismatches:?}"),
    );
    assert!(pass);
}

#[test]
fn c6_directional_reproduction() {
    let start = Instant::now();
    let f = generate_synthetic(&SynthSpec::default()).unwrap();
    let split = SplitSpec {
        repeats: 10,
        ..SplitSpec::default()
    };
    let methods = [Method::None, Method::Cosine, Method::Simrank, Method::Mrs];
    let rep =
        run_retrieval_experiment(&f, &split, &methods, &[10], &MethodConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let none = rep.row(Method::None, 10, false).unwrap().mean_ratio;
    let ratio = |m| rep.row(m, 10, true).unwrap().mean_ratio;
    let (cos, sim, mrs) = (
        ratio(Method::Cosine),
        ratio(Method::Simrank),
        ratio(Method::Mrs),
    );
    let pass = mrs > none && mrs > cos && mrs > sim && secs < 1800.0;
    report(
        6,
        "directional reproduction",
        pass,
        format!(
            "q = 10: none {none:.4}, cosine {cos:.4}, simrank {sim:.4}, mrs {mrs:.4}, {secs:.1}s"
        ),
    );
    assert!(mrs > none, "mrs-enriched {mrs} <= unenriched {none}");
    assert!(mrs > cos, "mrs-enriched {mrs} <= cosine-enriched {cos}");
    assert!(mrs > sim, "mrs-enriched {mrs} <= simrank-enriched {sim}");
}

/// Top-`k` left singular directions scaled by their singular values.
fn exact_lsi(rows: &[&[u32]], k: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j] as f64);
    let svd = a.svd(true, false);
    let u = svd.u.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    DMatrix::from_fn(rows.len(), k, |i, c| {
        u[(i, order[c])] * svd.singular_values[order[c]]
    })
}

#[test]
fn c7_baseline_sanity() {
    let hand = dense(&[&[1, 1], &[0, 1]]);
    let one_step = SimRankConfig {
        iterations: 1,
        ..SimRankConfig::default()
    };
    let simrank = simrank_compute(&hand, &one_step).unwrap().0.get(0, 1);

    let cos_cases: [(&[&[u32]], f64); 3] = [
        (&[&[2, 1], &[1, 0]], 2.0 / 5f64.sqrt()),
        (&[&[1, 1, 0], &[1, 1, 0]], 1.0),
        (&[&[1, 0], &[0, 1]], 0.0),
    ];
    let cos_err = cos_cases
        .iter()
        .map(|(rows, want)| {
            (cosine_similarity_matrix(&dense(rows)).unwrap().get(0, 1) - want).abs()
        })
        .fold(0.0, f64::max);

    let blocks: &[&[u32]] = &[
        &[3, 1, 0, 0, 0],
        &[2, 1, 0, 0, 0],
        &[0, 0, 2, 2, 1],
        &[0, 0, 1, 2, 2],
    ];
    let lsi = lsi_similarity_matrix(
        &dense(blocks),
        &LsiConfig {
            k: 2,
            ..LsiConfig::default()
        },
    )
    .unwrap();
    let cross = [(0, 2), (0, 3), (1, 2), (1, 3)]
        .iter()
        .map(|&(a, b)| lsi.get(a, b).abs())
        .fold(0.0, f64::max);
    let latent = exact_lsi(blocks, 2);
    let oracle_err = (0..4)
        .flat_map(|a| (0..4).map(move |b| (a, b)))
        .map(|(a, b)| {
            let (x, y) = (latent.row(a), latent.row(b));
            let want = x.dot(&y) / (x.norm() * y.norm());
            (lsi.get(a, b) - want).abs()
        })
        .fold(0.0, f64::max);

    let pass =
        (simrank - 0.4).abs() <= EXACT && cos_err <= EXACT && cross <= 1e-6 && oracle_err <= 1e-6;
    report(
        7,
        "baseline sanity",
        pass,
        format!(
            "simrank {simrank}, cosine error {cos_err:.1e}, lsi cross-block {cross:.1e}, \
             lsi vs exact svd {oracle_err:.1e}"
        ),
    );
    assert!(pass);
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn c8_determinism() {
    let spec = SynthSpec {
        n_resources: 600,
        n_tags: 500,
        synonym_groups: 60,
        n_bookmarks: 1_500,
        n_general_tags: 10,
        ..SynthSpec::default()
    };
    let f = generate_synthetic(&spec).unwrap();
    let split = SplitSpec {
        repeats: 3,
        ..SplitSpec::default()
    };
    let eval = |threads| {
        in_pool(threads, || {
            run_retrieval_experiment(&f, &split, &Method::ALL, &[5, 10], &MethodConfig::default())
                .unwrap()
                .to_json()
                .unwrap()
        })
    };
    let first = eval(1);
    let eval_same = first == eval(1) && first == eval(4);

    let tr = build_tag_resource_matrix(&f).unwrap();
    let sim = |threads| {
        in_pool(threads, || {
            let out = compute_similarities(&tr, &EngineConfig::default()).unwrap();
            let mut buf = Vec::new();
            out.st.write_tsv(&[], &mut buf).unwrap();
            out.sr.write_tsv(&[], &mut buf).unwrap();
            buf
        })
    };
    let serial = sim(1);
    let sim_same = [2, 4, 8].iter().all(|&n| sim(n) == serial);

    let pass = eval_same && sim_same;
    report(
        8,
        "determinism",
        pass,
        format!(
            "eval JSON identical: {eval_same}, sim identical across 1/2/4/8 threads: {sim_same}"
        ),
    );
    assert!(pass);
}
