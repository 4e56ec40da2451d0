// SPDX-License-Identifier: Apache-2.0

mod common;

use std::time::Instant;

use common::rb_brute_force;
use misconf::fault::{inject_config_fault_with, sample_true_config, FaultClass};
use misconf::graph::{generate_synthetic, TopologyParams};
use misconf::protocol::prot;
use misconf::rb::{default_weight_table, rb_classify, rb_classify_counts, WeightTable};
use misconf::rng::seeded;
use misconf::specs::{diff_specs, generate_queries_clamped, SpecificationSet};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng as _;

fn table_from_cents(cents: &[[u32; 3]; 7]) -> WeightTable {
    WeightTable::new(cents.map(|row| row.map(|c| c as f64 / 100.0))).unwrap()
}

#[test]
fn scores_match_brute_force_recount() {
    let mut rng = seeded(4);
    let mut ties = 0;
    for case in 0..10_000 {
        let mut cents = [[0u32; 3]; 7];
        // Few distinct values so ties occur regularly.
        let palette: Vec<u32> = (0..rng.gen_range(2..=101)).map(|_| rng.gen_range(0..=100)).collect();
        for row in &mut cents {
            for c in row.iter_mut() {
                *c = palette[rng.gen_range(0..palette.len())];
            }
        }
        let n = rng.gen_range(1..=60);
        let kinds: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let mut counts = [0usize; 3];
        for &k in &kinds {
            counts[k] += 1;
        }
        let table = table_from_cents(&cents);
        let verdict = rb_classify_counts(counts, &table).unwrap();
        let (best, num, tie) = rb_brute_force(&kinds, &cents);
        assert_eq!(verdict.f_hat, FaultClass::FAULTS[best], "case {case}");
        assert_eq!(verdict.tie, tie, "case {case}");
        for f in 0..7 {
            let exact = num[f] as f64 / (100.0 * n as f64);
            assert!((verdict.scores[f] - exact).abs() <= 1e-12, "case {case}");
        }
        ties += tie as usize;
    }
    assert!(ties > 100, "tie handling barely exercised: {ties}");
}

#[test]
fn verdict_ignores_specification_order() {
    let params = TopologyParams::baseline();
    let table = default_weight_table();
    let mut rng = seeded(6);
    for seed in 0..40 {
        let graph = generate_synthetic(&params.with_seed(seed)).unwrap();
        let config = sample_true_config(&graph, seed);
        let (queries, _) = generate_queries_clamped(&graph, &config, [12, 7, 30], seed).unwrap();
        let faulty = inject_config_fault_with(&config, FaultClass::F1, 4).unwrap();
        let observed = prot(&graph, &faulty, &queries).unwrap();
        let delta = diff_specs(&queries, &observed).unwrap();
        if delta.is_empty() {
            continue;
        }
        let verdict = rb_classify(&delta, &table).unwrap();
        let mut shuffled = queries.specs().to_vec();
        shuffled.shuffle(&mut rng);
        let shuffled = SpecificationSet::new(shuffled).unwrap();
        let observed2 = prot(&graph, &faulty, &shuffled).unwrap();
        let verdict2 = rb_classify(&diff_specs(&shuffled, &observed2).unwrap(), &table).unwrap();
        assert_eq!(verdict, verdict2);
    }
}

#[test]
fn ospf_fault_scenarios_are_diagnosed_as_ospf() {
    let params = TopologyParams::baseline();
    let table = default_weight_table();
    let (mut alarms, mut correct) = (0, 0);
    for seed in 0..100 {
        let graph = generate_synthetic(&params.with_seed(seed)).unwrap();
        let config = sample_true_config(&graph, seed + 500);
        let (queries, _) = generate_queries_clamped(&graph, &config, [10, 5, 20], seed).unwrap();
        let faulty = inject_config_fault_with(&config, FaultClass::F1, 1 + seed as u32 % 4).unwrap();
        let delta = diff_specs(&queries, &prot(&graph, &faulty, &queries).unwrap()).unwrap();
        if delta.is_empty() {
            continue;
        }
        alarms += 1;
        correct += (rb_classify(&delta, &table).unwrap().f_hat == FaultClass::F1) as usize;
    }
    assert!(alarms > 0);
    assert!(2 * correct > alarms, "{correct} of {alarms}");
}

#[test]
fn classification_time_grows_linearly() {
    let table = default_weight_table();
    let time = |n: usize| {
        let mut rng = seeded(n as u64);
        let kinds: Vec<[usize; 3]> = (0..2000)
            .map(|_| {
                let a = rng.gen_range(0..=n);
                let b = rng.gen_range(0..=n - a);
                [a, b, n - a - b]
            })
            .collect();
        let deltas: Vec<_> = kinds.iter().map(|&c| misconf::specs::DeltaS::from_counts(c)).collect();
        let mut best = f64::INFINITY;
        for _ in 0..5 {
            let start = Instant::now();
            for d in &deltas {
                std::hint::black_box(rb_classify(std::hint::black_box(d), &table).unwrap());
            }
            best = best.min(start.elapsed().as_secs_f64());
        }
        best / deltas.len() as f64
    };
    let (t2, t3, t4) = (time(100), time(1_000), time(10_000));
    println!("rb_classify: {t2:.3e} s, {t3:.3e} s, {t4:.3e} s");
    // Per-violation cost must not grow: within 1.5x of linear.
    assert!(t4 / t3 <= 15.0 && t3 / t2 <= 15.0, "{t2} {t3} {t4}");
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn argmax_is_scale_invariant(
        cells in proptest::array::uniform7(proptest::array::uniform3(0.0f64..=1.0)),
        counts in proptest::array::uniform3(0usize..50),
        c in 0.01f64..1.0,
    ) {
        prop_assume!(counts.iter().sum::<usize>() > 0);
        let base = WeightTable::new(cells).unwrap();
        let scaled = WeightTable::new(cells.map(|r| r.map(|x| x * c))).unwrap();
        let a = rb_classify_counts(counts, &base).unwrap();
        let b = rb_classify_counts(counts, &scaled).unwrap();
        // Clear winners stay winners; only near-ties can reorder under rounding.
        let mut sorted = a.scores;
        sorted.sort_by(|x, y| y.total_cmp(x));
        if sorted[0] - sorted[1] > 1e-9 {
            prop_assert_eq!(a.f_hat, b.f_hat);
        }
        for (x, y) in a.scores.iter().zip(&b.scores) {
            prop_assert!((x * c - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn scores_stay_within_row_range(
        cells in proptest::array::uniform7(proptest::array::uniform3(0.0f64..=1.0)),
        counts in proptest::array::uniform3(0usize..50),
    ) {
        prop_assume!(counts.iter().sum::<usize>() > 0);
        let v = rb_classify_counts(counts, &WeightTable::new(cells).unwrap()).unwrap();
        for (s, row) in v.scores.iter().zip(&cells) {
            let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(*s >= lo - 1e-12 && *s <= hi + 1e-12);
        }
        prop_assert!(v.scores[v.f_hat.label().unwrap()] >= v.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max) - 1e-12);
    }
}
