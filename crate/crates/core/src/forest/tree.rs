use crate::{Error, Result};

pub type NodeId = usize;
pub type ClassId = u16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Leaf {
        class: ClassId,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f32,
        left: NodeId,
        right: NodeId,
    },
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }

    pub fn children(&self) -> Option<(NodeId, NodeId)> {
        match *self {
            Node::Split { left, right, .. } => Some((left, right)),
            Node::Leaf { .. } => None,
        }
    }
}

/// Binary classification tree stored as an arena rooted at node 0.
///
/// Every node keeps its per-class training counts, which pruning needs.
/// Trees produced by growth or pruning are laid out in preorder.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    n_classes: usize,
    nodes: Vec<Node>,
    // n_classes counts per node, row-major
    counts: Vec<u64>,
}

impl Tree {
    /// Builds a tree, checking that it is a proper binary tree rooted at 0.
    pub fn from_parts(n_classes: usize, nodes: Vec<Node>, counts: Vec<u64>) -> Result<Self> {
        if n_classes == 0 {
            return Err(Error::invalid("a tree needs at least one class"));
        }
        if nodes.is_empty() {
            return Err(Error::Corrupt("tree has no nodes".into()));
        }
        if counts.len() != nodes.len() * n_classes {
            return Err(Error::invalid("class count table does not match node count"));
        }
        let tree = Self {
            n_classes,
            nodes,
            counts,
        };
        tree.check_structure()?;
        Ok(tree)
    }

    pub fn leaf(n_classes: usize, class: ClassId, counts: Vec<u64>) -> Result<Self> {
        Self::from_parts(n_classes, vec![Node::Leaf { class }], counts)
    }

    fn check_structure(&self) -> Result<()> {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(i) = stack.pop() {
            if let Some((l, r)) = self.nodes[i].children() {
                for c in [l, r] {
                    if c >= n {
                        return Err(Error::Corrupt(format!(
                            "node {i} points to {c}, past the {n} nodes"
                        )));
                    }
                    if seen[c] {
                        return Err(Error::Corrupt(format!(
                            "node {c} is reached twice (cycle or shared child)"
                        )));
                    }
                    seen[c] = true;
                    reached += 1;
                    stack.push(c);
                }
            }
        }
        if reached != n {
            return Err(Error::Corrupt(format!(
                "{} of {n} nodes are unreachable from the root",
                n - reached
            )));
        }
        Ok(())
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn class_counts(&self, id: NodeId) -> &[u64] {
        &self.counts[id * self.n_classes..(id + 1) * self.n_classes]
    }

    pub fn n_samples(&self, id: NodeId) -> u64 {
        self.class_counts(id).iter().sum()
    }

    /// Depth of the deepest leaf; a single leaf has depth 0.
    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0, 0)];
        while let Some((i, d)) = stack.pop() {
            max = max.max(d);
            if let Some((l, r)) = self.nodes[i].children() {
                stack.push((l, d + 1));
                stack.push((r, d + 1));
            }
        }
        max
    }

    /// Largest feature index any split reads.
    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    pub fn predict(&self, x: &[f64]) -> ClassId {
        self.predict_counted(x).0
    }

    /// Prediction and number of nodes touched, leaf included.
    pub fn predict_counted(&self, x: &[f64]) -> (ClassId, usize) {
        let mut i = 0;
        let mut visited = 1;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return (class, visited),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[feature] <= f64::from(threshold) {
                        left
                    } else {
                        right
                    };
                    visited += 1;
                }
            }
        }
    }

    /// Parent of every node; `None` for the root.
    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut parents = vec![None; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some((l, r)) = n.children() {
                parents[l] = Some(i);
                parents[r] = Some(i);
            }
        }
        parents
    }

    /// Nodes ordered so every child comes before its parent.
    pub fn postorder(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            order.push(i);
            if let Some((l, r)) = self.nodes[i].children() {
                stack.push(l);
                stack.push(r);
            }
        }
        order.reverse();
        order
    }

    /// Recomputes every node's class counts by routing `samples` down the tree.
    /// Leaf predictions are left unchanged.
    pub fn refit_counts(&mut self, features: &[Vec<f64>], labels: &[ClassId]) -> Result<()> {
        if features.len() != labels.len() {
            return Err(Error::invalid("feature and label counts differ"));
        }
        if let Some(max) = self.max_feature() {
            if let Some(short) = features.iter().find(|x| x.len() <= max) {
                return Err(Error::invalid(format!(
                    "sample has {} features, tree reads feature {max}",
                    short.len()
                )));
            }
        }
        if let Some(bad) = labels.iter().find(|&&l| l as usize >= self.n_classes) {
            return Err(Error::invalid(format!(
                "label {bad} out of range for {} classes",
                self.n_classes
            )));
        }
        self.counts.iter_mut().for_each(|c| *c = 0);
        for (x, &y) in features.iter().zip(labels) {
            let mut i = 0;
            loop {
                self.counts[i * self.n_classes + y as usize] += 1;
                match self.nodes[i] {
                    Node::Leaf { .. } => break,
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        i = if x[feature] <= f64::from(threshold) {
                            left
                        } else {
                            right
                        };
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy of the tree where each node in `collapse` becomes a leaf
    /// predicting its majority class. The result is laid out in preorder.
    pub fn collapsed(&self, collapse: &[bool]) -> Tree {
        let mut nodes = Vec::new();
        let mut counts = Vec::new();
        // (old id, parent slot to patch: (new parent id, is_left))
        let mut stack: Vec<(NodeId, Option<(NodeId, bool)>)> = vec![(0, None)];
        while let Some((old, parent)) = stack.pop() {
            let new = nodes.len();
            if let Some((p, is_left)) = parent {
                if let Node::Split { left, right, .. } = &mut nodes[p] {
                    if is_left {
                        *left = new;
                    } else {
                        *right = new;
                    }
                }
            }
            let node = match self.nodes[old] {
                Node::Split { .. } if collapse[old] => Node::Leaf {
                    class: majority(self.class_counts(old)),
                },
                n => n,
            };
            if let Node::Split { left, right, .. } = node {
                stack.push((right, Some((new, false))));
                stack.push((left, Some((new, true))));
            }
            nodes.push(node);
            counts.extend_from_slice(self.class_counts(old));
        }
        Tree {
            n_classes: self.n_classes,
            nodes,
            counts,
        }
    }
}

/// Most frequent class, smallest id on ties.
pub fn majority(counts: &[u64]) -> ClassId {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best as ClassId
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn stump() -> Tree {
        Tree::from_parts(
            2,
            vec![
                Node::Split {
                    feature: 0,
                    threshold: 0.5,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { class: 0 },
                Node::Leaf { class: 1 },
            ],
            vec![3, 2, 3, 0, 0, 2],
        )
        .unwrap()
    }

    #[test]
    fn structure_checks() {
        let leaf = Node::Leaf { class: 0 };
        let split = |l, r| Node::Split {
            feature: 0,
            threshold: 0.0,
            left: l,
            right: r,
        };
        assert!(Tree::from_parts(2, vec![split(1, 3), leaf, leaf], vec![0; 6]).is_err());
        assert!(Tree::from_parts(2, vec![split(1, 1), leaf], vec![0; 4]).is_err());
        assert!(Tree::from_parts(2, vec![split(0, 1), leaf], vec![0; 4]).is_err());
        assert!(Tree::from_parts(2, vec![leaf, leaf], vec![0; 4]).is_err());
        // children before the parent are fine
        assert!(Tree::from_parts(2, vec![split(2, 1), leaf, leaf], vec![0; 6]).is_ok());
    }

    #[test]
    fn predict_boundary_goes_left() {
        let t = stump();
        assert_eq!(t.predict_counted(&[0.5]), (0, 2));
        assert_eq!(t.predict(&[0.50001]), 1);
        assert_eq!(t.depth(), 1);
        assert_eq!(t.leaf_count(), 2);
    }

    #[test]
    fn refit_and_collapse() {
        let mut t = stump();
        t.refit_counts(&[vec![0.0], vec![1.0], vec![2.0]], &[1, 1, 0]).unwrap();
        assert_eq!(t.class_counts(0), &[1, 2]);
        assert_eq!(t.class_counts(2), &[1, 1]);
        let c = t.collapsed(&[true, false, false]);
        assert_eq!(c.node_count(), 1);
        assert_eq!(c.predict(&[0.0]), 1);
        assert!(t.refit_counts(&[vec![]], &[0]).is_err());
        assert!(t.refit_counts(&[vec![0.0]], &[2]).is_err());
    }

    #[test]
    fn majority_ties_to_smallest() {
        assert_eq!(majority(&[2, 2, 1]), 0);
        assert_eq!(majority(&[0, 3, 3]), 1);
        assert_eq!(majority(&[0, 0]), 0);
    }
}
