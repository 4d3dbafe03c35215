//! Minimal cost-complexity (weakest-link) pruning.
//!
//! Node risk is the training misclassification count of the node's majority
//! class divided by the root sample count. For an internal node `t`,
//! `g(t) = (R(t) - R(T_t)) / (|leaves(T_t)| - 1)`; the nodes with the
//! smallest `g` are collapsed together and the process repeats until only
//! the root is left. Alphas are exact rationals so ties are detected exactly.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_rational::Ratio;

use super::tree::{NodeId, Tree};
use super::Forest;
use crate::compact::NODE_BYTES;
use crate::{Error, Result};

/// Exact complexity parameter.
pub type Alpha = Ratio<u64>;

pub fn alpha_to_f64(alpha: &Alpha) -> f64 {
    *alpha.numer() as f64 / *alpha.denom() as f64
}

/// Weakest-link pruning path of one tree.
///
/// Entry `k` is `(alphas[k], T_k)` where `T_k` is the smallest subtree
/// minimizing `R(T) + α·|leaves(T)|` for `α` in `[alphas[k], alphas[k+1])`.
/// `alphas[0]` is always zero; the last entry is the root-only tree.
#[derive(Debug, Clone, PartialEq)]
pub struct PruneSequence {
    alphas: Vec<Alpha>,
    node_counts: Vec<usize>,
    collapse_at: Vec<Option<Alpha>>,
}

impl PruneSequence {
    pub fn alphas(&self) -> &[Alpha] {
        &self.alphas
    }

    /// Node count of `T_k` for each entry.
    pub fn node_counts(&self) -> &[usize] {
        &self.node_counts
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Alpha at which `node` turns into a leaf, if it ever does on its own.
    pub fn collapse_alpha(&self, node: NodeId) -> Option<&Alpha> {
        self.collapse_at[node].as_ref()
    }

    /// Index of the entry in effect at `alpha`.
    pub fn entry_at(&self, alpha: &Alpha) -> usize {
        self.alphas.partition_point(|a| a <= alpha).saturating_sub(1)
    }

    pub fn node_count_at(&self, alpha: &Alpha) -> usize {
        self.node_counts[self.entry_at(alpha)]
    }

    /// Collapse mask for `T(alpha)`: nodes whose own collapse alpha is
    /// `<= alpha` become leaves.
    pub fn collapse_mask(&self, alpha: &Alpha) -> Vec<bool> {
        self.collapse_at
            .iter()
            .map(|c| c.as_ref().is_some_and(|c| c <= alpha))
            .collect()
    }

    /// Nodes of `T(alpha)`, ascending by id.
    pub fn subtree_nodes(&self, tree: &Tree, alpha: &Alpha) -> Vec<NodeId> {
        let mask = self.collapse_mask(alpha);
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            out.push(i);
            if !mask[i] {
                if let Some((l, r)) = tree.node(i).children() {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn prune(&self, tree: &Tree, alpha: &Alpha) -> Tree {
        tree.collapsed(&self.collapse_mask(alpha))
    }

    /// Float-alpha variant: node collapses when its alpha, as `f64`, is `<= alpha`.
    pub fn prune_f64(&self, tree: &Tree, alpha: f64) -> Tree {
        let mask: Vec<bool> = self
            .collapse_at
            .iter()
            .map(|c| c.as_ref().is_some_and(|c| alpha_to_f64(c) <= alpha))
            .collect();
        tree.collapsed(&mask)
    }
}

/// Weakest-link sequence of `tree` from its stored class counts.
pub fn cost_complexity_sequence(tree: &Tree) -> PruneSequence {
    let n = tree.node_count();
    let total = tree.n_samples(0).max(1);
    let parents = tree.parents();

    // errors of the node as a leaf, errors and leaves of its current subtree
    let node_err: Vec<u64> = (0..n)
        .map(|i| {
            let c = tree.class_counts(i);
            c.iter().sum::<u64>() - c.iter().max().copied().unwrap_or(0)
        })
        .collect();
    let mut sub_err = vec![0u64; n];
    let mut leaves = vec![0u64; n];
    for i in tree.postorder() {
        match tree.node(i).children() {
            None => {
                sub_err[i] = node_err[i];
                leaves[i] = 1;
            }
            Some((l, r)) => {
                sub_err[i] = sub_err[l] + sub_err[r];
                leaves[i] = leaves[l] + leaves[r];
            }
        }
    }

    let g = |i: usize, sub_err: &[u64], leaves: &[u64]| -> Alpha {
        // Subtree error never exceeds the node's own majority error.
        let gain = node_err[i].saturating_sub(sub_err[i]);
        Alpha::new(gain, (leaves[i] - 1) * total)
    };

    let mut version = vec![0u32; n];
    let mut dead = vec![false; n];
    let mut heap = BinaryHeap::new();
    for i in 0..n {
        if !tree.node(i).is_leaf() {
            heap.push(Reverse((g(i, &sub_err, &leaves), i, 0u32)));
        }
    }

    let mut alphas = vec![Alpha::from_integer(0)];
    let mut node_counts = vec![(2 * leaves[0] - 1) as usize];
    let mut collapse_at = vec![None; n];

    while leaves[0] > 1 {
        let current = loop {
            let Reverse((a, i, v)) = *heap.peek().expect("an internal node remains");
            if dead[i] || v != version[i] || leaves[i] == 1 {
                heap.pop();
            } else {
                break a;
            }
        };
        while let Some(Reverse((a, i, v))) = heap.peek().cloned() {
            if a != current {
                break;
            }
            heap.pop();
            if dead[i] || v != version[i] || leaves[i] == 1 {
                continue;
            }
            collapse_at[i] = Some(current);
            let removed_leaves = leaves[i] - 1;
            let err_drop = sub_err[i];
            sub_err[i] = node_err[i];
            leaves[i] = 1;
            if let Some((l, r)) = tree.node(i).children() {
                let mut stack = vec![l, r];
                while let Some(d) = stack.pop() {
                    if dead[d] {
                        continue;
                    }
                    dead[d] = true;
                    if let Some((l, r)) = tree.node(d).children() {
                        stack.push(l);
                        stack.push(r);
                    }
                }
            }
            let mut up = parents[i];
            while let Some(p) = up {
                sub_err[p] = sub_err[p] - err_drop + node_err[i];
                leaves[p] -= removed_leaves;
                version[p] += 1;
                heap.push(Reverse((g(p, &sub_err, &leaves), p, version[p])));
                up = parents[p];
            }
        }
        let count = (2 * leaves[0] - 1) as usize;
        if current == alphas[0] && alphas.len() == 1 {
            node_counts[0] = count;
        } else {
            alphas.push(current);
            node_counts.push(count);
        }
    }

    PruneSequence {
        alphas,
        node_counts,
        collapse_at,
    }
}

/// Smallest optimally pruned subtree of `tree` for `alpha`.
pub fn prune_at_alpha(tree: &Tree, alpha: f64) -> Result<Tree> {
    if !(alpha >= 0.0) {
        return Err(Error::invalid(format!("alpha must be non-negative, got {alpha}")));
    }
    Ok(cost_complexity_sequence(tree).prune_f64(tree, alpha))
}

/// Prunes every tree of `forest` with the same exact alpha.
pub fn prune_forest(forest: &Forest, sequences: &[Vec<PruneSequence>], alpha: &Alpha) -> Forest {
    use rayon::prelude::*;
    let outputs = forest
        .outputs()
        .iter()
        .zip(sequences)
        .map(|(trees, seqs)| {
            trees
                .par_iter()
                .zip(seqs.par_iter())
                .map(|(t, s)| s.prune(t, alpha))
                .collect()
        })
        .collect();
    forest.with_outputs(outputs)
}

/// Per-tree pruning sequences, grouped like `forest.outputs()`.
pub fn forest_sequences(forest: &Forest) -> Vec<Vec<PruneSequence>> {
    use rayon::prelude::*;
    forest
        .outputs()
        .iter()
        .map(|trees| trees.par_iter().map(cost_complexity_sequence).collect())
        .collect()
}

/// Every tree's critical alphas, merged, sorted and deduplicated; starts at 0.
pub fn merged_alphas(sequences: &[Vec<PruneSequence>]) -> Vec<Alpha> {
    let mut all: Vec<Alpha> = sequences
        .iter()
        .flatten()
        .flat_map(|s| s.alphas().iter().copied())
        .collect();
    all.push(Alpha::from_integer(0));
    all.sort_unstable();
    all.dedup();
    all
}

/// Node payload of a forest: 9 bytes per node.
pub fn forest_payload_bytes(forest: &Forest) -> usize {
    forest.node_count() * NODE_BYTES
}

/// Outcome of [`prune_to_budget`].
#[derive(Debug, Clone)]
pub struct BudgetPrune {
    pub forest: Forest,
    pub alpha: Alpha,
    pub payload_bytes: usize,
}

/// Prunes all trees with one shared alpha, the smallest critical alpha whose
/// node payload (9 bytes per node) fits `budget_bytes`.
pub fn prune_to_budget(forest: &Forest, budget_bytes: usize) -> Result<BudgetPrune> {
    let n_trees = forest.tree_count();
    let minimum = n_trees * NODE_BYTES;
    if budget_bytes < minimum {
        return Err(Error::invalid(format!(
            "budget of {budget_bytes} bytes is below the {minimum} bytes needed for {n_trees} single-leaf trees"
        )));
    }
    let current = forest_payload_bytes(forest);
    if current <= budget_bytes {
        return Ok(BudgetPrune {
            forest: forest.clone(),
            alpha: Alpha::from_integer(0),
            payload_bytes: current,
        });
    }

    let sequences = forest_sequences(forest);
    let candidates = merged_alphas(&sequences);
    let bytes_at = |alpha: &Alpha| -> usize {
        sequences
            .iter()
            .flatten()
            .map(|s| s.node_count_at(alpha))
            .sum::<usize>()
            * NODE_BYTES
    };
    // payload is non-increasing in alpha; the last candidate leaves only roots
    let pos = candidates.partition_point(|a| bytes_at(a) > budget_bytes);
    let alpha = candidates[pos.min(candidates.len() - 1)];
    let pruned = prune_forest(forest, &sequences, &alpha);
    let payload_bytes = forest_payload_bytes(&pruned);
    debug_assert!(payload_bytes <= budget_bytes);
    Ok(BudgetPrune {
        forest: pruned,
        alpha,
        payload_bytes,
    })
}
