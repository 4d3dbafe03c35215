use std::path::{Path, PathBuf};

use super::{BenchArgs, CommonArgs, EvalArgs, FeaturesArgs, PruneArgs, SweepArgs, SynthArgs, TrainArgs};
use crate::compact::{packed_size_bytes, read_ctf, write_ctf, CompactForest};
use crate::dataset::{
    build_feature_table, extract_group, load_corpus, synth_corpus, write_corpus, FeatureTable,
    SplitFilter, SplitPlan, SynthConfig,
};
use crate::eval::{bench_inference, evaluate, prune_curve, AlphaGrid};
use crate::forest::{
    alpha_to_f64, forest_sequences, grow_forest, prune_to_budget, Classifier, Forest, GrowParams,
    LabeledSet,
};
use crate::{Error, Result};

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| Error::invalid(format!("missing required --{flag}")))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn synth(common: &CommonArgs, args: &SynthArgs) -> Result<()> {
    let out = required(&args.out, "out")?;
    let corpus = synth_corpus(&SynthConfig {
        n_patients: args.n_patients,
        n_channels: args.n_channels,
        fs: args.fs,
        duration_s: args.duration_s,
        artifact_rate: args.artifact_rate,
        class_count: args.class_count,
        seed: common.seed,
    })?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let written = write_corpus(out, &corpus)?;
    eprintln!("wrote {} files to {}", written.len(), out.display());
    Ok(())
}

pub fn features(common: &CommonArgs, args: &FeaturesArgs) -> Result<()> {
    let corpus_dir = required(&args.corpus, "corpus")?;
    let out = required(&args.out, "out")?;
    let plan = if args.no_split {
        SplitPlan::AllTrain
    } else {
        let ratios: [f64; 3] = args.split_ratios.as_slice().try_into().map_err(|_| {
            Error::invalid(format!(
                "--split-ratios needs 3 values, got {}",
                args.split_ratios.len()
            ))
        })?;
        SplitPlan::PatientIndependent {
            ratios,
            seed: common.seed,
        }
    };
    let corpus = extract_group(&load_corpus(corpus_dir)?, common.group)?;
    let table = build_feature_table(&corpus, plan)?;
    table.write(out)?;
    eprintln!(
        "{} recordings, {} windows, {} features per window",
        corpus.len(),
        table.rows.len(),
        table.n_channels * crate::signal::FEATURES_PER_CHANNEL
    );
    Ok(())
}

pub fn train(common: &CommonArgs, args: &TrainArgs) -> Result<()> {
    let features = required(&args.features, "features")?;
    let out = required(&args.out, "out")?;
    let set = FeatureTable::read(features)?.labeled_set(common.scheme, args.split)?;
    let params = GrowParams {
        k_features: args.k_features,
        max_depth: args.max_depth,
        min_samples_leaf: args.min_samples_leaf,
        ..GrowParams::default()
    };
    let forest = grow_forest(&set, args.n_trees, &params, common.seed, args.lane_width)?;
    let compact = CompactForest::from_forest(&forest)?;
    write_ctf(out, &compact)?;
    eprintln!(
        "{} trees, {} nodes, {} bytes",
        forest.tree_count(),
        forest.node_count(),
        packed_size_bytes(&compact)
    );
    Ok(())
}

/// Reloads a model with node statistics recomputed from `split` rows.
fn load_with_counts(model: &Path, features: &Path, split: SplitFilter) -> Result<(Forest, FeatureTable)> {
    let compact = read_ctf(model)?;
    let table = FeatureTable::read(features)?;
    let set = table.labeled_set(compact.scheme, split)?;
    let mut forest = compact.to_forest(0)?;
    forest.refit_counts(&set)?;
    Ok((forest, table))
}

pub fn prune(args: &PruneArgs) -> Result<()> {
    let model = required(&args.model, "model")?;
    let features = required(&args.features, "features")?;
    let out = required(&args.out, "out")?;
    let (forest, _) = load_with_counts(model, features, args.split)?;
    let (pruned, alpha) = match (args.budget, args.alpha) {
        (Some(budget), None) => {
            let result = prune_to_budget(&forest, budget)?;
            (result.forest, alpha_to_f64(&result.alpha))
        }
        (None, Some(alpha)) => {
            if !(alpha >= 0.0) {
                return Err(Error::invalid(format!("--alpha must be non-negative, got {alpha}")));
            }
            let sequences = forest_sequences(&forest);
            let outputs = forest
                .outputs()
                .iter()
                .zip(&sequences)
                .map(|(trees, seqs)| trees.iter().zip(seqs).map(|(t, s)| s.prune_f64(t, alpha)).collect())
                .collect();
            (forest.with_outputs(outputs), alpha)
        }
        _ => return Err(Error::invalid("give exactly one of --budget and --alpha")),
    };
    let compact = CompactForest::from_forest(&pruned)?;
    write_ctf(out, &compact)?;
    eprintln!(
        "alpha {alpha}: {} -> {} nodes, {} bytes",
        forest.node_count(),
        pruned.node_count(),
        packed_size_bytes(&compact)
    );
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let model = required(&args.model, "model")?;
    let features = required(&args.features, "features")?;
    let (forest, table) = load_with_counts(model, features, args.fit_split)?;
    let eval_set = table.labeled_set(forest.scheme(), args.eval_split)?;
    let grid = if args.alphas.is_empty() {
        AlphaGrid::Auto {
            max_points: args.max_points,
        }
    } else {
        AlphaGrid::Explicit(args.alphas.clone())
    };
    emit(&args.out, &prune_curve(&forest, &eval_set, &grid)?.to_csv())
}

fn model_and_set(model: &Option<PathBuf>, features: &Option<PathBuf>, split: SplitFilter) -> Result<(CompactForest, LabeledSet)> {
    let model = read_ctf(required(model, "model")?)?;
    let set = FeatureTable::read(required(features, "features")?)?.labeled_set(model.scheme, split)?;
    Ok((model, set))
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let (model, set) = model_and_set(&args.model, &args.features, args.split)?;
    let metrics = evaluate(&model, &set)?;
    eprintln!(
        "accuracy {:.4}, f1 {:.4} on {} rows",
        metrics.accuracy,
        metrics.headline_f1(model.scheme),
        set.len()
    );
    emit(&args.out, &metrics.to_csv())
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    let (model, set) = model_and_set(&args.model, &args.features, args.split)?;
    let report = bench_inference(&model, &set.features, args.repetitions)?;
    emit(&args.out, &report.to_csv())
}
