mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{naive_census, naive_is_primitive, naive_is_synchronizing, permutations};
use sync_census::analysis::{is_primitive, is_strongly_connected};
use sync_census::canon::canonical_key;
use sync_census::census::{
    census, count_via_sink, distinct_automata_count, CensusMode, CensusOptions,
};
use sync_census::digraph::{format_digraph, parse_digraph};
use sync_census::experiments::{random_experiment, ClassFilter, RandomModelConfig};
use sync_census::sync::{is_synchronizing, shortest_reset_word};
use sync_census::{Automaton, Digraph};

fn random_rows(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|_| (0..k).map(|_| rng.random_range(0..n)).collect())
        .collect()
}

fn digraph(rows: &[Vec<usize>]) -> Digraph {
    Digraph::from_unsorted_rows(rows.len(), rows[0].len(), rows.to_vec()).unwrap()
}

#[test]
fn census_matches_edge_coloring_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..400 {
        let n = rng.random_range(1..=4);
        let k = rng.random_range(1..=3);
        let rows = random_rows(&mut rng, n, k);
        let d = digraph(&rows);
        let (sync, total) = naive_census(&rows);
        for mode in [CensusMode::Full, CensusMode::SymmetryReduced] {
            let c = census(&d, mode).unwrap();
            assert_eq!(
                (c.sync_colorings, c.total_colorings),
                (sync, total),
                "{rows:?} {mode:?}"
            );
        }
    }
}

#[test]
fn primitivity_matches_matrix_powers() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3000 {
        let n = rng.random_range(1..=8);
        let k = rng.random_range(1..=3);
        let rows = random_rows(&mut rng, n, k);
        assert_eq!(
            is_primitive(&digraph(&rows)),
            naive_is_primitive(&rows),
            "{rows:?}"
        );
    }
}

#[test]
fn distinct_automata_count_matches_permuted_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let n = rng.random_range(1..=5);
        let k = rng.random_range(1..=4);
        let rows = random_rows(&mut rng, n, k);
        let per_vertex: u128 = rows
            .iter()
            .map(|row| {
                permutations(k)
                    .iter()
                    .map(|p| p.iter().map(|&i| row[i]).collect::<Vec<_>>())
                    .collect::<HashSet<_>>()
                    .len() as u128
            })
            .product();
        assert_eq!(
            distinct_automata_count(&digraph(&rows)).unwrap(),
            per_vertex
        );
    }
}

#[test]
fn sink_counting_matches_direct_census() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut tested = 0;
    while tested < 300 {
        let n = rng.random_range(2..=6);
        let d = digraph(&random_rows(&mut rng, n, 2));
        if is_strongly_connected(&d) {
            continue;
        }
        tested += 1;
        let direct = census(&d, CensusMode::Full).unwrap();
        assert_eq!(
            count_via_sink(&d, &CensusOptions::default()).unwrap(),
            direct,
            "{d:?}"
        );
    }
}

#[test]
fn reset_words_reset_and_oracles_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..5000 {
        let n = rng.random_range(1..=7);
        let k = rng.random_range(1..=3);
        let table = random_rows(&mut rng, n, k);
        let a = Automaton::new(n, k, table.clone()).unwrap();
        let word = shortest_reset_word(&a).unwrap();
        assert_eq!(is_synchronizing(&a), naive_is_synchronizing(&table));
        assert_eq!(word.is_some(), naive_is_synchronizing(&table));
        if let Some(w) = word {
            let ends: HashSet<usize> = (0..n).map(|q| a.run(q, &w)).collect();
            assert_eq!(ends.len(), 1);
        }
    }
}

#[test]
fn labeled_random_fraction_matches_labeled_space() {
    // every slot table on 4 vertices with out-degree 2, filtered to primitive
    let (mut primitive, mut totally) = (0u64, 0u64);
    for code in 0u32..4u32.pow(8) {
        let rows: Vec<Vec<usize>> = (0..4)
            .map(|v| {
                (0..2)
                    .map(|i| (code >> (2 * (2 * v + i)) & 3) as usize)
                    .collect()
            })
            .collect();
        if !naive_is_primitive(&rows) {
            continue;
        }
        primitive += 1;
        let (sync, total) = naive_census(&rows);
        totally += (sync == total) as u64;
    }
    assert_eq!((primitive, totally), (20448, 11520));
    let p = totally as f64 / primitive as f64;
    let cfg = RandomModelConfig::new(4, 2, 30_000, 21, ClassFilter::StronglyConnectedAperiodic);
    let r = random_experiment(&cfg, &CensusOptions::default()).unwrap();
    let radius = 3.0 * (p * (1.0 - p) / 30_000.0).sqrt();
    assert!((r.estimate - p).abs() <= radius, "{} vs {p}", r.estimate);
}

fn arb_rows() -> impl Strategy<Value = Vec<Vec<usize>>> {
    (1usize..=9, 1usize..=4)
        .prop_flat_map(|(n, k)| prop::collection::vec(prop::collection::vec(0..n, k), n))
}

proptest! {
    #[test]
    fn text_format_round_trips(rows in arb_rows()) {
        let d = digraph(&rows);
        let text = format_digraph(&d);
        prop_assert_eq!(parse_digraph(&text).unwrap(), d);
    }

    #[test]
    fn json_round_trips(rows in arb_rows()) {
        let d = digraph(&rows);
        let json = serde_json::to_string(&d).unwrap();
        prop_assert_eq!(serde_json::from_str::<Digraph>(&json).unwrap(), d);
    }

    #[test]
    fn relabeling_preserves_key_and_ratio(rows in arb_rows(), seed in any::<u64>()) {
        let d = digraph(&rows);
        let mut perm: Vec<usize> = (0..d.n()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let e = d.relabel(&perm);
        prop_assert_eq!(canonical_key(&d).unwrap(), canonical_key(&e).unwrap());
        if d.n() <= 5 && d.k() <= 3 {
            prop_assert_eq!(census(&d, CensusMode::SymmetryReduced).unwrap().ratio,
                            census(&e, CensusMode::SymmetryReduced).unwrap().ratio);
        }
    }
}
