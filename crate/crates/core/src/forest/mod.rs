//! Extra-Trees ensembles and cost-complexity pruning.

mod grow;
mod prune;
mod tree;

pub use grow::{grow_tree, weighted_gini, GrowParams, Samples};
pub use prune::{
    alpha_to_f64, cost_complexity_sequence, forest_payload_bytes, forest_sequences,
    merged_alphas, prune_at_alpha, prune_forest, prune_to_budget, Alpha, BudgetPrune,
    PruneSequence,
};
pub use tree::{majority, ClassId, Node, NodeId, Tree};

use rayon::prelude::*;

use crate::{Error, LabelScheme, Result};

/// Default ensemble lane width: tree counts must be a multiple of this.
pub const DEFAULT_LANE_WIDTH: usize = 8;

/// Feature rows with one label per output.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub scheme: LabelScheme,
    pub n_outputs: usize,
    pub features: Vec<Vec<f64>>,
    /// `labels[i][o]` is the class of row `i` for output `o`.
    pub labels: Vec<Vec<ClassId>>,
}

impl LabeledSet {
    pub fn new(
        scheme: LabelScheme,
        features: Vec<Vec<f64>>,
        labels: Vec<Vec<ClassId>>,
    ) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} label rows",
                features.len(),
                labels.len()
            )));
        }
        let n_outputs = labels.first().map_or(0, Vec::len);
        if scheme == LabelScheme::Bc && !labels.is_empty() && n_outputs != 1 {
            return Err(Error::invalid("binary scheme takes exactly one label per row"));
        }
        if labels.iter().any(|l| l.len() != n_outputs) {
            return Err(Error::invalid("label rows have different arities"));
        }
        let n_classes = scheme.n_classes();
        if let Some(bad) = labels.iter().flatten().find(|&&c| c as usize >= n_classes) {
            return Err(Error::invalid(format!(
                "label {bad} out of range for scheme {scheme}"
            )));
        }
        if let Some(w) = features.first().map(Vec::len) {
            if features.iter().any(|r| r.len() != w) {
                return Err(Error::invalid("feature rows have different widths"));
            }
        }
        Ok(Self {
            scheme,
            n_outputs,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn output_labels(&self, output: usize) -> Vec<ClassId> {
        self.labels.iter().map(|l| l[output]).collect()
    }
}

/// Anything that maps a feature row to one class per output.
pub trait Classifier: Sync {
    fn scheme(&self) -> LabelScheme;
    fn n_outputs(&self) -> usize;
    fn n_classes(&self) -> usize;
    fn n_features(&self) -> usize;
    fn predict(&self, features: &[f64]) -> Result<Vec<ClassId>>;
}

/// Plurality vote; ties go to the smallest class id.
pub fn vote(predictions: impl IntoIterator<Item = ClassId>, n_classes: usize) -> ClassId {
    let mut tally = vec![0u64; n_classes.max(1)];
    for p in predictions {
        let p = p as usize;
        if p >= tally.len() {
            tally.resize(p + 1, 0);
        }
        tally[p] += 1;
    }
    majority(&tally)
}

/// Independent tree ensembles, one per output.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    scheme: LabelScheme,
    n_classes: usize,
    n_features: usize,
    lane_width: usize,
    outputs: Vec<Vec<Tree>>,
}

impl Forest {
    pub fn new(
        scheme: LabelScheme,
        n_classes: usize,
        n_features: usize,
        lane_width: usize,
        outputs: Vec<Vec<Tree>>,
    ) -> Result<Self> {
        if lane_width == 0 {
            return Err(Error::invalid("lane width must be positive"));
        }
        let per_output = outputs.first().map_or(0, Vec::len);
        if outputs.iter().any(|o| o.len() != per_output) {
            return Err(Error::invalid("outputs have different tree counts"));
        }
        if !per_output.is_multiple_of(lane_width) {
            return Err(Error::invalid(format!(
                "tree count {per_output} is not a multiple of {lane_width}"
            )));
        }
        for t in outputs.iter().flatten() {
            if t.n_classes() != n_classes {
                return Err(Error::invalid("tree class count differs from forest"));
            }
            if t.max_feature().is_some_and(|f| f >= n_features) {
                return Err(Error::invalid("tree reads a feature past the forest width"));
            }
        }
        Ok(Self {
            scheme,
            n_classes,
            n_features,
            lane_width,
            outputs,
        })
    }

    pub(crate) fn with_outputs(&self, outputs: Vec<Vec<Tree>>) -> Self {
        Self {
            outputs,
            ..self.clone()
        }
    }

    pub fn lane_width(&self) -> usize {
        self.lane_width
    }

    pub fn outputs(&self) -> &[Vec<Tree>] {
        &self.outputs
    }

    pub fn outputs_mut(&mut self) -> &mut [Vec<Tree>] {
        &mut self.outputs
    }

    pub fn trees_per_output(&self) -> usize {
        self.outputs.first().map_or(0, Vec::len)
    }

    pub fn tree_count(&self) -> usize {
        self.outputs.iter().map(Vec::len).sum()
    }

    pub fn node_count(&self) -> usize {
        self.outputs.iter().flatten().map(Tree::node_count).sum()
    }

    pub fn trees(&self) -> impl Iterator<Item = &Tree> {
        self.outputs.iter().flatten()
    }

    /// Recomputes node class counts from `set` (labels per output).
    pub fn refit_counts(&mut self, set: &LabeledSet) -> Result<()> {
        if set.n_outputs != self.outputs.len() {
            return Err(Error::invalid(format!(
                "label set has {} outputs, forest has {}",
                set.n_outputs,
                self.outputs.len()
            )));
        }
        for (o, trees) in self.outputs.iter_mut().enumerate() {
            let labels = set.output_labels(o);
            trees
                .par_iter_mut()
                .try_for_each(|t| t.refit_counts(&set.features, &labels))?;
        }
        Ok(())
    }
}

impl Classifier for Forest {
    fn scheme(&self) -> LabelScheme {
        self.scheme
    }

    fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict(&self, features: &[f64]) -> Result<Vec<ClassId>> {
        predict_forest(self, features)
    }
}

/// Per-output plurality vote over tree predictions.
pub fn predict_forest(forest: &Forest, features: &[f64]) -> Result<Vec<ClassId>> {
    if features.len() != forest.n_features {
        return Err(Error::invalid(format!(
            "expected {} features, got {}",
            forest.n_features,
            features.len()
        )));
    }
    Ok(forest
        .outputs
        .iter()
        .map(|trees| vote(trees.iter().map(|t| t.predict(features)), forest.n_classes))
        .collect())
}

/// Grows `n_trees` trees per output. Tree `i` of output `o` uses seed
/// `seed + o·n_trees + i`.
pub fn grow_forest(
    set: &LabeledSet,
    n_trees: usize,
    params: &GrowParams,
    seed: u64,
    lane_width: usize,
) -> Result<Forest> {
    if lane_width == 0 || n_trees == 0 || !n_trees.is_multiple_of(lane_width) {
        return Err(Error::invalid(format!(
            "tree count must be a positive multiple of {lane_width}, got {n_trees}"
        )));
    }
    if set.is_empty() {
        return Err(Error::invalid("cannot train on an empty set"));
    }
    let n_classes = set.scheme.n_classes();
    let mut outputs = Vec::with_capacity(set.n_outputs);
    for o in 0..set.n_outputs {
        let labels = set.output_labels(o);
        let samples = Samples::new(&set.features, &labels, n_classes)?;
        let trees = (0..n_trees)
            .into_par_iter()
            .map(|i| {
                let tree_seed = seed.wrapping_add((o * n_trees + i) as u64);
                grow_tree(samples, params, tree_seed)
            })
            .collect::<Result<Vec<_>>>()?;
        outputs.push(trees);
    }
    Forest::new(set.scheme, n_classes, set.n_features(), lane_width, outputs)
}
