//! Extremely randomized tree growth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{majority, ClassId, Node, NodeId, Tree};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrowParams {
    /// Candidate features per node; `None` means `ceil(sqrt(n_features))`.
    pub k_features: Option<usize>,
    /// Uniform threshold draws per candidate feature.
    pub n_candidate_thresholds: usize,
    pub min_samples_leaf: usize,
    pub max_depth: usize,
}

impl Default for GrowParams {
    fn default() -> Self {
        Self {
            k_features: None,
            n_candidate_thresholds: 1,
            min_samples_leaf: 1,
            max_depth: 20,
        }
    }
}

impl GrowParams {
    pub fn resolved_k(&self, n_features: usize) -> usize {
        self.k_features
            .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
            .clamp(1, n_features.max(1))
    }
}

/// Training rows and their class labels for one output.
#[derive(Debug, Clone, Copy)]
pub struct Samples<'a> {
    pub features: &'a [Vec<f64>],
    pub labels: &'a [ClassId],
    pub n_classes: usize,
}

impl<'a> Samples<'a> {
    pub fn new(features: &'a [Vec<f64>], labels: &'a [ClassId], n_classes: usize) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::invalid("cannot grow a tree from zero samples"));
        }
        if features.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let width = features[0].len();
        if width == 0 || features.iter().any(|r| r.len() != width) {
            return Err(Error::invalid("feature rows must share a positive width"));
        }
        if let Some(bad) = labels.iter().find(|&&l| l as usize >= n_classes) {
            return Err(Error::invalid(format!(
                "label {bad} out of range for {n_classes} classes"
            )));
        }
        Ok(Self {
            features,
            labels,
            n_classes,
        })
    }

    pub fn n_features(&self) -> usize {
        self.features[0].len()
    }
}

/// Weighted Gini impurity `Σ n_c (1 - Σ p²)` of a count vector, i.e. Gini
/// times the sample count.
pub fn weighted_gini(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    n - sq / n
}

struct Frame {
    start: usize,
    end: usize,
    depth: usize,
    parent: Option<(NodeId, bool)>,
}

/// Grows one Extra-Trees classifier tree.
///
/// At each node `k` distinct non-constant features are drawn; each gets
/// uniform random thresholds between its node-local min and max, and the
/// candidate with the lowest weighted Gini wins. Thresholds are rounded to
/// `f32` before partitioning, so training and inference agree on every
/// sample. Growth stops on purity, `min_samples_leaf`, `max_depth`, or when
/// no candidate yields a valid split.
pub fn grow_tree(samples: Samples<'_>, params: &GrowParams, seed: u64) -> Result<Tree> {
    if params.min_samples_leaf == 0 {
        return Err(Error::invalid("min_samples_leaf must be at least 1"));
    }
    if params.n_candidate_thresholds == 0 {
        return Err(Error::invalid("need at least one candidate threshold"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_classes = samples.n_classes;
    let n_features = samples.n_features();
    let k = params.resolved_k(n_features);

    let mut idx: Vec<usize> = (0..samples.features.len()).collect();
    let mut feature_pool: Vec<usize> = (0..n_features).collect();
    let mut nodes: Vec<Node> = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    let mut stack = vec![Frame {
        start: 0,
        end: idx.len(),
        depth: 0,
        parent: None,
    }];

    while let Some(frame) = stack.pop() {
        let id = nodes.len();
        if let Some((p, is_left)) = frame.parent {
            if let Node::Split { left, right, .. } = &mut nodes[p] {
                if is_left {
                    *left = id;
                } else {
                    *right = id;
                }
            }
        }
        let rows = &mut idx[frame.start..frame.end];
        let mut node_counts = vec![0u64; n_classes];
        for &r in rows.iter() {
            node_counts[samples.labels[r] as usize] += 1;
        }
        let n = rows.len();
        let pure = node_counts.iter().filter(|&&c| c > 0).count() <= 1;

        let split = if pure || frame.depth >= params.max_depth || n < 2 * params.min_samples_leaf {
            None
        } else {
            best_split(samples, rows, &mut feature_pool, k, params, &node_counts, &mut rng)
        };

        match split {
            None => nodes.push(Node::Leaf {
                class: majority(&node_counts),
            }),
            Some((feature, threshold)) => {
                let cut = partition(rows, |r| samples.features[r][feature] <= f64::from(threshold));
                nodes.push(Node::Split {
                    feature,
                    threshold,
                    left: usize::MAX,
                    right: usize::MAX,
                });
                let mid = frame.start + cut;
                stack.push(Frame {
                    start: mid,
                    end: frame.end,
                    depth: frame.depth + 1,
                    parent: Some((id, false)),
                });
                stack.push(Frame {
                    start: frame.start,
                    end: mid,
                    depth: frame.depth + 1,
                    parent: Some((id, true)),
                });
            }
        }
        counts.extend_from_slice(&node_counts);
    }
    Tree::from_parts(n_classes, nodes, counts)
}

fn best_split(
    samples: Samples<'_>,
    rows: &[usize],
    pool: &mut [usize],
    k: usize,
    params: &GrowParams,
    parent_counts: &[u64],
    rng: &mut ChaCha8Rng,
) -> Option<(usize, f32)> {
    let n_classes = parent_counts.len();
    let mut best: Option<(f64, usize, f32)> = None;
    let mut drawn = 0;
    let mut left = vec![0u64; n_classes];
    let mut right = vec![0u64; n_classes];

    // partial Fisher-Yates over the feature pool until k usable features
    for i in 0..pool.len() {
        if drawn == k {
            break;
        }
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
        let f = pool[i];

        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &r in rows {
            let v = samples.features[r][f];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(hi > lo) {
            continue;
        }
        drawn += 1;

        for _ in 0..params.n_candidate_thresholds {
            let threshold = rng.gen_range(lo..hi) as f32;
            let t = f64::from(threshold);
            left.iter_mut().for_each(|c| *c = 0);
            for &r in rows {
                if samples.features[r][f] <= t {
                    left[samples.labels[r] as usize] += 1;
                }
            }
            for c in 0..n_classes {
                right[c] = parent_counts[c] - left[c];
            }
            let nl: u64 = left.iter().sum();
            let nr: u64 = right.iter().sum();
            let min_leaf = params.min_samples_leaf as u64;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let score = weighted_gini(&left) + weighted_gini(&right);
            if best.is_none_or(|(s, _, _)| score < s) {
                best = Some((score, f, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

/// Moves rows satisfying `goes_left` to the front; returns their count.
fn partition(rows: &mut [usize], goes_left: impl Fn(usize) -> bool) -> usize {
    let mut cut = 0;
    for i in 0..rows.len() {
        if goes_left(rows[i]) {
            rows.swap(i, cut);
            cut += 1;
        }
    }
    cut
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_samples_make_a_leaf() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![1, 1, 1];
        let t = grow_tree(Samples::new(&x, &y, 2).unwrap(), &GrowParams::default(), 0).unwrap();
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.predict(&[0.0]), 1);
        assert_eq!(t.class_counts(0), &[0, 3]);
    }

    #[test]
    fn two_clusters_are_separated() {
        let x: Vec<Vec<f64>> = (0..10).chain(100..110).map(|v| vec![v as f64]).collect();
        let y: Vec<ClassId> = (0..20).map(|i| u16::from(i >= 10)).collect();
        let params = GrowParams {
            k_features: Some(1),
            ..GrowParams::default()
        };
        let mut saw_stump = false;
        for seed in 0..50 {
            let t = grow_tree(Samples::new(&x, &y, 2).unwrap(), &params, seed).unwrap();
            for (xi, yi) in x.iter().zip(&y) {
                assert_eq!(t.predict(xi), *yi);
            }
            if let Node::Split { threshold, .. } = t.node(0) {
                if *threshold > 9.0 && *threshold < 100.0 {
                    assert_eq!(t.depth(), 1);
                    assert_eq!(t.node_count(), 3);
                    saw_stump = true;
                }
            }
        }
        assert!(saw_stump);
    }

    #[test]
    fn same_seed_same_tree() {
        let x: Vec<Vec<f64>> = (0..200)
            .map(|i| vec![(i * 37 % 101) as f64, (i * 13 % 17) as f64, i as f64])
            .collect();
        let y: Vec<ClassId> = (0..200).map(|i| ((i * 7) % 3) as u16).collect();
        let s = Samples::new(&x, &y, 3).unwrap();
        let p = GrowParams::default();
        assert_eq!(grow_tree(s, &p, 4).unwrap(), grow_tree(s, &p, 4).unwrap());
        assert_ne!(grow_tree(s, &p, 4).unwrap(), grow_tree(s, &p, 5).unwrap());
    }

    #[test]
    fn limits_are_respected() {
        let x: Vec<Vec<f64>> = (0..300).map(|i| vec![(i * 7919 % 300) as f64, (i % 7) as f64]).collect();
        let y: Vec<ClassId> = (0..300).map(|i| (i % 2) as u16).collect();
        let s = Samples::new(&x, &y, 2).unwrap();
        let shallow = GrowParams {
            max_depth: 3,
            ..GrowParams::default()
        };
        assert!(grow_tree(s, &shallow, 1).unwrap().depth() <= 3);

        let big_leaves = GrowParams {
            min_samples_leaf: 20,
            ..GrowParams::default()
        };
        let t = grow_tree(s, &big_leaves, 1).unwrap();
        for (i, n) in t.nodes().iter().enumerate() {
            if n.is_leaf() {
                assert!(t.n_samples(i) >= 20);
            }
        }
    }

    #[test]
    fn constant_features_stop_growth() {
        let x = vec![vec![1.0, 2.0]; 6];
        let y = vec![0, 1, 0, 1, 0, 1];
        let t = grow_tree(Samples::new(&x, &y, 2).unwrap(), &GrowParams::default(), 0).unwrap();
        assert_eq!(t.node_count(), 1);
    }

    #[test]
    fn bad_inputs() {
        assert!(Samples::new(&[], &[], 2).is_err());
        assert!(Samples::new(&[vec![1.0]], &[2], 2).is_err());
        assert!(Samples::new(&[vec![1.0], vec![]], &[0, 0], 2).is_err());
    }

    #[test]
    fn gini_weights() {
        assert_eq!(weighted_gini(&[0, 0]), 0.0);
        assert_eq!(weighted_gini(&[4, 0]), 0.0);
        assert!((weighted_gini(&[2, 2]) - 2.0).abs() < 1e-12);
    }
}
