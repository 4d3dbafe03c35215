//! Flat four-array tree encoding and the `.ctf` file format.
//!
//! A node is `feature: u8`, `threshold: f32`, `left: u16`, `right: u16`,
//! 9 bytes in total. A leaf has `left == 0xFFFF`, stores its class in
//! `right`, and has zero feature and threshold.
//!
//! File layout, little-endian:
//!
//! ```text
//! magic "CTF1" | version u16 | scheme u8 | n_outputs u8 | n_classes u16
//! | n_features u16 | lane_width u8 | pad u8 | tree_count u32
//! | node_count u32 × tree_count
//! | per tree: feature[n] threshold[n] left[n] right[n]
//! ```
//!
//! Trees are stored output by output, `tree_count / n_outputs` trees each.

use std::path::Path;

use crate::forest::{vote, ClassId, Classifier, Forest, Node, Tree};
use crate::{Error, LabelScheme, Result};

pub const NODE_BYTES: usize = 9;
pub const LEAF_SENTINEL: u16 = 0xFFFF;
/// 0xFFFF is reserved for the leaf marker, leaving indices 0..=65533.
pub const MAX_NODES: usize = 65534;
pub const MAGIC: [u8; 4] = *b"CTF1";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_BYTES: usize = 18;

/// Payload size of `n_nodes` nodes.
pub const fn node_payload_bytes(n_nodes: usize) -> usize {
    n_nodes * NODE_BYTES
}

/// Read access to the four node arrays.
pub trait NodeArrays {
    fn node_count(&self) -> usize;
    fn left(&self, i: usize) -> u16;
    fn right(&self, i: usize) -> u16;
    fn feature(&self, i: usize) -> u8;
    fn threshold(&self, i: usize) -> f32;
}

/// Walks from node 0 to a leaf. Returns the leaf class and the number of
/// nodes touched, leaf included. Leaf nodes only have `left` and `right`
/// read.
pub fn traverse_arrays<A: NodeArrays + ?Sized>(arrays: &A, x: &[f64]) -> Result<(ClassId, usize)> {
    let n = arrays.node_count();
    let mut i = 0usize;
    let mut visited = 0usize;
    loop {
        if i >= n {
            return Err(Error::Corrupt(format!("node index {i} out of range for {n} nodes")));
        }
        visited += 1;
        if visited > n {
            return Err(Error::Corrupt("traversal revisits nodes".into()));
        }
        let left = arrays.left(i);
        if left == LEAF_SENTINEL {
            return Ok((arrays.right(i), visited));
        }
        let f = arrays.feature(i) as usize;
        let v = *x.get(f).ok_or_else(|| {
            Error::invalid(format!("tree reads feature {f}, row has {}", x.len()))
        })?;
        i = if v <= f64::from(arrays.threshold(i)) {
            left as usize
        } else {
            arrays.right(i) as usize
        };
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompactTree {
    feature: Vec<u8>,
    threshold: Vec<f32>,
    left: Vec<u16>,
    right: Vec<u16>,
}

impl NodeArrays for CompactTree {
    fn node_count(&self) -> usize {
        self.left.len()
    }
    fn left(&self, i: usize) -> u16 {
        self.left[i]
    }
    fn right(&self, i: usize) -> u16 {
        self.right[i]
    }
    fn feature(&self, i: usize) -> u8 {
        self.feature[i]
    }
    fn threshold(&self, i: usize) -> f32 {
        self.threshold[i]
    }
}

impl CompactTree {
    /// Validates and wraps the four arrays.
    pub fn from_arrays(
        feature: Vec<u8>,
        threshold: Vec<f32>,
        left: Vec<u16>,
        right: Vec<u16>,
    ) -> Result<Self> {
        let n = left.len();
        if feature.len() != n || threshold.len() != n || right.len() != n {
            return Err(Error::Corrupt("node arrays have different lengths".into()));
        }
        let tree = Self {
            feature,
            threshold,
            left,
            right,
        };
        tree.validate()?;
        Ok(tree)
    }

    fn validate(&self) -> Result<()> {
        let n = self.node_count();
        if n == 0 {
            return Err(Error::Corrupt("tree has no nodes".into()));
        }
        if n > MAX_NODES {
            return Err(Error::Corrupt(format!("{n} nodes exceeds the {MAX_NODES} limit")));
        }
        let mut parents = vec![0u32; n];
        for i in 0..n {
            if self.left[i] == LEAF_SENTINEL {
                if self.feature[i] != 0 || self.threshold[i].to_bits() != 0 {
                    return Err(Error::Corrupt(format!("leaf {i} has a non-zero feature or threshold")));
                }
                continue;
            }
            for c in [self.left[i] as usize, self.right[i] as usize] {
                if c >= n {
                    return Err(Error::Corrupt(format!("node {i} points to {c}, past {n} nodes")));
                }
                parents[c] += 1;
            }
        }
        if parents[0] != 0 {
            return Err(Error::Corrupt("root has a parent".into()));
        }
        if let Some(i) = (1..n).find(|&i| parents[i] != 1) {
            return Err(Error::Corrupt(format!(
                "node {i} has {} parents (orphan or shared)",
                parents[i]
            )));
        }
        // n-1 edges with every non-root having exactly one parent; a cycle
        // would leave some nodes unreachable from the root
        let mut reached = 0;
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            reached += 1;
            if reached > n {
                return Err(Error::Corrupt("cycle detected".into()));
            }
            if self.left[i] != LEAF_SENTINEL {
                stack.push(self.left[i] as usize);
                stack.push(self.right[i] as usize);
            }
        }
        if reached != n {
            return Err(Error::Corrupt("nodes unreachable from the root".into()));
        }
        Ok(())
    }

    pub fn features(&self) -> &[u8] {
        &self.feature
    }

    pub fn thresholds(&self) -> &[f32] {
        &self.threshold
    }

    pub fn lefts(&self) -> &[u16] {
        &self.left
    }

    pub fn rights(&self) -> &[u16] {
        &self.right
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        self.left[i] == LEAF_SENTINEL
    }

    pub fn payload_bytes(&self) -> usize {
        node_payload_bytes(self.len())
    }

    pub fn traverse(&self, x: &[f64]) -> Result<(ClassId, usize)> {
        traverse_arrays(self, x)
    }

    pub fn max_feature(&self) -> Option<usize> {
        (0..self.len())
            .filter(|&i| !self.is_leaf(i))
            .map(|i| self.feature[i] as usize)
            .max()
    }

    /// The four arrays back to back: feature, threshold, left, right.
    pub fn write_payload(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.feature);
        for t in &self.threshold {
            out.extend_from_slice(&t.to_le_bytes());
        }
        for l in &self.left {
            out.extend_from_slice(&l.to_le_bytes());
        }
        for r in &self.right {
            out.extend_from_slice(&r.to_le_bytes());
        }
    }
}

/// Encodes a pointer-form tree, keeping its node order (preorder for grown
/// and pruned trees).
pub fn pack(tree: &Tree) -> Result<CompactTree> {
    let n = tree.node_count();
    if n > MAX_NODES {
        return Err(Error::Capacity {
            what: "node count",
            value: n,
            limit: MAX_NODES,
        });
    }
    let mut feature = Vec::with_capacity(n);
    let mut threshold = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for node in tree.nodes() {
        match *node {
            Node::Leaf { class } => {
                feature.push(0);
                threshold.push(0.0);
                left.push(LEAF_SENTINEL);
                right.push(class);
            }
            Node::Split {
                feature: f,
                threshold: t,
                left: l,
                right: r,
            } => {
                let f = u8::try_from(f).map_err(|_| Error::Capacity {
                    what: "feature index",
                    value: f,
                    limit: u8::MAX as usize,
                })?;
                feature.push(f);
                threshold.push(t);
                left.push(l as u16);
                right.push(r as u16);
            }
        }
    }
    Ok(CompactTree {
        feature,
        threshold,
        left,
        right,
    })
}

/// Decodes to pointer form with identical node order. Leaves get
/// `n_samples_hint` samples of their class; internal counts are the sums.
pub fn unpack(compact: &CompactTree, n_classes: usize, n_samples_hint: u64) -> Result<Tree> {
    compact.validate()?;
    let n = compact.len();
    let nodes: Vec<Node> = (0..n)
        .map(|i| {
            if compact.is_leaf(i) {
                Node::Leaf {
                    class: compact.right[i],
                }
            } else {
                Node::Split {
                    feature: compact.feature[i] as usize,
                    threshold: compact.threshold[i],
                    left: compact.left[i] as usize,
                    right: compact.right[i] as usize,
                }
            }
        })
        .collect();
    let mut counts = vec![0u64; n * n_classes];
    let skeleton = Tree::from_parts(n_classes, nodes.clone(), counts.clone())?;
    for i in skeleton.postorder() {
        match nodes[i] {
            Node::Leaf { class } => {
                if class as usize >= n_classes {
                    return Err(Error::Corrupt(format!(
                        "leaf {i} predicts class {class}, forest has {n_classes}"
                    )));
                }
                counts[i * n_classes + class as usize] = n_samples_hint;
            }
            Node::Split { left, right, .. } => {
                for c in 0..n_classes {
                    counts[i * n_classes + c] =
                        counts[left * n_classes + c] + counts[right * n_classes + c];
                }
            }
        }
    }
    Tree::from_parts(n_classes, nodes, counts)
}

/// Header fields plus per-output compact trees.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactForest {
    pub scheme: LabelScheme,
    pub n_classes: u16,
    pub n_features: u16,
    pub lane_width: u8,
    pub outputs: Vec<Vec<CompactTree>>,
}

impl CompactForest {
    pub fn from_forest(forest: &Forest) -> Result<Self> {
        let cap = |what, value: usize, limit: usize| {
            if value > limit {
                Err(Error::Capacity { what, value, limit })
            } else {
                Ok(())
            }
        };
        cap("output count", forest.n_outputs(), u8::MAX as usize)?;
        cap("class count", forest.n_classes(), u16::MAX as usize)?;
        cap("feature count", forest.n_features(), u16::MAX as usize)?;
        cap("lane width", forest.lane_width(), u8::MAX as usize)?;
        let outputs = forest
            .outputs()
            .iter()
            .map(|trees| trees.iter().map(pack).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            scheme: forest.scheme(),
            n_classes: forest.n_classes() as u16,
            n_features: forest.n_features() as u16,
            lane_width: forest.lane_width() as u8,
            outputs,
        })
    }

    pub fn to_forest(&self, n_samples_hint: u64) -> Result<Forest> {
        let outputs = self
            .outputs
            .iter()
            .map(|trees| {
                trees
                    .iter()
                    .map(|t| unpack(t, self.n_classes as usize, n_samples_hint))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Forest::new(
            self.scheme,
            self.n_classes as usize,
            self.n_features as usize,
            self.lane_width as usize,
            outputs,
        )
    }

    pub fn tree_count(&self) -> usize {
        self.outputs.iter().map(Vec::len).sum()
    }

    pub fn node_count(&self) -> usize {
        self.outputs.iter().flatten().map(CompactTree::len).sum()
    }

    pub fn payload_bytes(&self) -> usize {
        node_payload_bytes(self.node_count())
    }

    pub fn trees(&self) -> impl Iterator<Item = &CompactTree> {
        self.outputs.iter().flatten()
    }

    /// Predictions plus the total number of nodes touched across all trees.
    pub fn predict_counted(&self, x: &[f64]) -> Result<(Vec<ClassId>, usize)> {
        if x.len() != self.n_features as usize {
            return Err(Error::invalid(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        let mut visited = 0;
        let mut out = Vec::with_capacity(self.outputs.len());
        for trees in &self.outputs {
            let mut classes = Vec::with_capacity(trees.len());
            for t in trees {
                let (c, v) = t.traverse(x)?;
                classes.push(c);
                visited += v;
            }
            out.push(vote(classes, self.n_classes as usize));
        }
        Ok((out, visited))
    }
}

impl Classifier for CompactForest {
    fn scheme(&self) -> LabelScheme {
        self.scheme
    }
    fn n_outputs(&self) -> usize {
        self.outputs.len()
    }
    fn n_classes(&self) -> usize {
        self.n_classes as usize
    }
    fn n_features(&self) -> usize {
        self.n_features as usize
    }
    fn predict(&self, features: &[f64]) -> Result<Vec<ClassId>> {
        self.predict_counted(features).map(|(p, _)| p)
    }
}

/// Exact serialized size: header, node-count table and node payload.
pub fn packed_size_bytes(forest: &CompactForest) -> usize {
    HEADER_BYTES + 4 * forest.tree_count() + forest.payload_bytes()
}

pub fn serialize(forest: &CompactForest) -> Result<Vec<u8>> {
    let n_outputs = u8::try_from(forest.outputs.len()).map_err(|_| Error::Capacity {
        what: "output count",
        value: forest.outputs.len(),
        limit: u8::MAX as usize,
    })?;
    let per_output = forest.outputs.first().map_or(0, Vec::len);
    if forest.outputs.iter().any(|o| o.len() != per_output) {
        return Err(Error::invalid("outputs have different tree counts"));
    }
    let tree_count = u32::try_from(forest.tree_count()).map_err(|_| Error::Capacity {
        what: "tree count",
        value: forest.tree_count(),
        limit: u32::MAX as usize,
    })?;

    let mut out = Vec::with_capacity(packed_size_bytes(forest));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(forest.scheme.code());
    out.push(n_outputs);
    out.extend_from_slice(&forest.n_classes.to_le_bytes());
    out.extend_from_slice(&forest.n_features.to_le_bytes());
    out.push(forest.lane_width);
    out.push(0);
    out.extend_from_slice(&tree_count.to_le_bytes());
    for t in forest.trees() {
        out.extend_from_slice(&(t.len() as u32).to_le_bytes());
    }
    for t in forest.trees() {
        t.write_payload(&mut out);
    }
    debug_assert_eq!(out.len(), packed_size_bytes(forest));
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(
            Error::Truncated {
                needed: self.pos.saturating_add(n),
                available: self.bytes.len(),
            },
        )?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

pub fn deserialize(bytes: &[u8]) -> Result<CompactForest> {
    let mut r = Reader { bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4)?.try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let scheme_code = r.u8()?;
    let scheme = LabelScheme::from_code(scheme_code)
        .ok_or_else(|| Error::Corrupt(format!("unknown scheme code {scheme_code}")))?;
    let n_outputs = r.u8()? as usize;
    let n_classes = r.u16()?;
    let n_features = r.u16()?;
    let lane_width = r.u8()?;
    let _pad = r.u8()?;
    let tree_count = r.u32()? as usize;

    if tree_count > 0 && (n_outputs == 0 || !tree_count.is_multiple_of(n_outputs)) {
        return Err(Error::SizeMismatch(format!(
            "{tree_count} trees cannot be split over {n_outputs} outputs"
        )));
    }
    let table_bytes = tree_count.checked_mul(4).ok_or(Error::Truncated {
        needed: usize::MAX,
        available: bytes.len(),
    })?;
    let table = r.take(table_bytes)?;
    let counts: Vec<usize> = table
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")) as usize)
        .collect();
    if let Some(&bad) = counts.iter().find(|&&c| c == 0 || c > MAX_NODES) {
        return Err(Error::SizeMismatch(format!(
            "node count {bad} outside 1..={MAX_NODES}"
        )));
    }
    let payload: usize = counts.iter().map(|&c| node_payload_bytes(c)).sum();
    let expected = r.pos + payload;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            needed: expected,
            available: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::SizeMismatch(format!(
            "{} trailing bytes after the last tree",
            bytes.len() - expected
        )));
    }

    let mut trees = Vec::with_capacity(tree_count);
    for &n in &counts {
        let feature = r.take(n)?.to_vec();
        let threshold = r
            .take(4 * n)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        let left = r
            .take(2 * n)?
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes(c.try_into().expect("2 bytes")))
            .collect();
        let right = r
            .take(2 * n)?
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes(c.try_into().expect("2 bytes")))
            .collect();
        trees.push(CompactTree::from_arrays(feature, threshold, left, right)?);
    }

    let outputs = if tree_count == 0 {
        vec![Vec::new(); n_outputs]
    } else {
        let per = tree_count / n_outputs;
        let mut it = trees.into_iter();
        (0..n_outputs).map(|_| it.by_ref().take(per).collect()).collect()
    };
    Ok(CompactForest {
        scheme,
        n_classes,
        n_features,
        lane_width,
        outputs,
    })
}

pub fn write_ctf(path: impl AsRef<Path>, forest: &CompactForest) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, serialize(forest)?).map_err(|e| Error::io(path, e))
}

pub fn read_ctf(path: impl AsRef<Path>) -> Result<CompactForest> {
    let path = path.as_ref();
    deserialize(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
