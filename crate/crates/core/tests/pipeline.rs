use artiforest::compact::{deserialize, serialize, CompactForest};
use artiforest::dataset::{build_feature_table, synth_corpus, SplitFilter, SplitPlan, SynthConfig};
use artiforest::eval::{evaluate, prune_curve, AlphaGrid};
use artiforest::forest::{grow_forest, prune_to_budget, Classifier, GrowParams, LabeledSet};
use artiforest::LabelScheme;
use proptest::prelude::*;

fn table(seed: u64) -> artiforest::dataset::FeatureTable {
    let corpus = synth_corpus(&SynthConfig {
        n_patients: 4,
        duration_s: 60.0,
        seed,
        ..SynthConfig::default()
    })
    .unwrap();
    build_feature_table(
        &corpus,
        SplitPlan::PatientIndependent {
            ratios: [0.5, 0.25, 0.25],
            seed,
        },
    )
    .unwrap()
}

#[test]
fn every_scheme_trains_packs_and_agrees() {
    let t = table(1);
    for scheme in [LabelScheme::Bc, LabelScheme::Mc, LabelScheme::Mmc] {
        let train = t.labeled_set(scheme, SplitFilter::Train).unwrap();
        let test = t.labeled_set(scheme, SplitFilter::Test).unwrap();
        let forest = grow_forest(&train, 8, &GrowParams::default(), 3, 8).unwrap();
        let compact = CompactForest::from_forest(&forest).unwrap();
        let reloaded = deserialize(&serialize(&compact).unwrap()).unwrap();
        assert_eq!(reloaded, compact);
        for x in &test.features {
            assert_eq!(forest.predict(x).unwrap(), reloaded.predict(x).unwrap());
        }
        let a = evaluate(&forest, &test).unwrap();
        let b = evaluate(&reloaded, &test).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.confusion.total() as usize, test.len() * test.n_outputs);
    }
}

#[test]
fn separable_data_scores_no_better_when_fully_pruned() {
    let features: Vec<Vec<f64>> = (0..200).map(|i| vec![(i % 100) as f64, (i / 100) as f64]).collect();
    let labels = features.iter().map(|f| vec![u16::from(f[0] >= 50.0)]).collect();
    let set = LabeledSet::new(LabelScheme::Bc, features, labels).unwrap();
    let forest = grow_forest(&set, 8, &GrowParams::default(), 9, 8).unwrap();
    let curve = prune_curve(&forest, &set, &AlphaGrid::Auto { max_points: None }).unwrap();
    let first = curve.rows.first().unwrap();
    let last = curve.rows.last().unwrap();
    assert_eq!(first.accuracy, 1.0);
    assert_eq!(last.nodes, 8);
    assert!(last.accuracy <= first.accuracy);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn budget_prune_fits_and_never_grows(seed in 0u64..1000, budget_frac in 0.05f64..1.2) {
        let t = table(seed % 3);
        let train = t.labeled_set(LabelScheme::Bc, SplitFilter::Train).unwrap();
        let forest = grow_forest(&train, 8, &GrowParams::default(), seed, 8).unwrap();
        let full = forest.node_count() * 9;
        let budget = ((full as f64 * budget_frac) as usize).max(72);
        let pruned = prune_to_budget(&forest, budget).unwrap();
        prop_assert!(pruned.payload_bytes <= budget);
        prop_assert_eq!(pruned.payload_bytes, pruned.forest.node_count() * 9);
        prop_assert!(pruned.forest.node_count() <= forest.node_count());
        prop_assert_eq!(pruned.forest.tree_count(), 8);
    }
}
