//! Invariants checked over shrinking random inputs.

mod common;

use common::checks::{check_map, check_numeric_column, check_plan, random_predicate};
use common::tables::random_table;
use factflow::anonymize::{build_map, deanonymize_literals};
use factflow::chart::pie_angles;
use factflow::ingest::DataClass;
use factflow::layout::LayoutMode;
use factflow::query::run_sql;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn layout_is_optimal(scores in proptest::collection::vec(40u64..=1000, 1..=6)) {
        check_plan(&scores, LayoutMode::ExhaustivePermuting).map_err(TestCaseError::fail)?;
        check_plan(&scores, LayoutMode::OrderPreserving).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn anonymization_map_properties(seed in any::<u64>(), map_seed in any::<u64>()) {
        let ds = random_table(&mut ChaCha8Rng::seed_from_u64(seed));
        check_map(&ds, map_seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn integer_stats_match_the_oracle(
        cells in proptest::collection::vec(proptest::option::weighted(0.9, -10_000i64..10_000), 1..200)
    ) {
        let mut cells: Vec<Option<String>> = cells.into_iter().map(|c| c.map(|v| v.to_string())).collect();
        cells.push(Some("0".into()));
        check_numeric_column(&cells, DataClass::Discrete).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn real_stats_match_the_oracle(
        cells in proptest::collection::vec(proptest::option::weighted(0.9, -1e6..1e6f64), 1..200)
    ) {
        let mut cells: Vec<Option<String>> = cells.into_iter().map(|c| c.map(|v| v.to_string())).collect();
        cells.push(Some("0.5".into()));
        check_numeric_column(&cells, DataClass::Continuous).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn deanonymized_predicates_return_original_results(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = random_table(&mut rng);
        let map = build_map(&ds, seed).unwrap();
        if let Some((anon, orig)) = random_predicate(&mut rng, &ds, &map) {
            let rewritten = deanonymize_literals(&anon, &map);
            prop_assert_eq!(run_sql(&rewritten, &ds).unwrap(), run_sql(&orig, &ds).unwrap(), "{} -> {}", anon, rewritten);
        }
    }

    #[test]
    fn pie_sweeps_cover_the_circle(values in proptest::collection::vec(0.001..1e6f64, 1..=12)) {
        let angles = pie_angles(&values);
        prop_assert_eq!(angles.len(), values.len());
        let sweep: f64 = angles.iter().map(|(s, e)| e - s).sum();
        prop_assert!((sweep - std::f64::consts::TAU).abs() < 1e-9);
        prop_assert_eq!(angles[0].0, 0.0);
        for w in angles.windows(2) {
            prop_assert_eq!(w[0].1, w[1].0);
        }
    }
}
