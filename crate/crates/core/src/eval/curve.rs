use std::fmt::Write as _;

use super::metrics::evaluate;
use crate::compact::{packed_size_bytes, CompactForest};
use crate::forest::{alpha_to_f64, forest_sequences, merged_alphas, Forest, LabeledSet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub alpha: f64,
    pub nodes: usize,
    /// Serialized `.ctf` size.
    pub bytes: usize,
    pub accuracy: f64,
    pub f1: f64,
}

/// Accuracy-vs-size rows, sorted by strictly increasing alpha.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PruneCurve {
    pub rows: Vec<CurveRow>,
}

impl PruneCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,nodes,bytes,accuracy,f1\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{}", r.alpha, r.nodes, r.bytes, r.accuracy, r.f1);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlphaGrid {
    /// The merged critical alphas of all trees, evenly thinned to at most
    /// `max_points` (first and last kept) when given.
    Auto { max_points: Option<usize> },
    Explicit(Vec<f64>),
}

/// Evaluates `forest` pruned with one shared alpha per grid point. Node
/// statistics for pruning come from the forest's stored class counts.
pub fn prune_curve(forest: &Forest, eval: &LabeledSet, grid: &AlphaGrid) -> Result<PruneCurve> {
    let sequences = forest_sequences(forest);
    let mut rows = Vec::new();
    let mut push_row = |pruned: Forest, alpha: f64| -> Result<()> {
        let metrics = evaluate(&pruned, eval)?;
        let bytes = packed_size_bytes(&CompactForest::from_forest(&pruned)?);
        rows.push(CurveRow {
            alpha,
            nodes: pruned.node_count(),
            bytes,
            accuracy: metrics.accuracy,
            f1: metrics.headline_f1(eval.scheme),
        });
        Ok(())
    };

    match grid {
        AlphaGrid::Explicit(alphas) => {
            let mut alphas = alphas.clone();
            if let Some(bad) = alphas.iter().find(|a| !(**a >= 0.0)) {
                return Err(Error::invalid(format!("alpha must be non-negative, got {bad}")));
            }
            alphas.sort_by(f64::total_cmp);
            alphas.dedup();
            for alpha in alphas {
                let outputs = forest
                    .outputs()
                    .iter()
                    .zip(&sequences)
                    .map(|(trees, seqs)| {
                        trees.iter().zip(seqs).map(|(t, s)| s.prune_f64(t, alpha)).collect()
                    })
                    .collect();
                push_row(forest.with_outputs(outputs), alpha)?;
            }
        }
        AlphaGrid::Auto { max_points } => {
            let all = merged_alphas(&sequences);
            let picked: Vec<_> = match *max_points {
                Some(m) if m >= 2 && all.len() > m => (0..m)
                    .map(|i| all[(i * (all.len() - 1) + (m - 1) / 2) / (m - 1)])
                    .collect(),
                Some(1) => vec![all[0]],
                _ => all,
            };
            let mut last = f64::NEG_INFINITY;
            for alpha in picked {
                let a = alpha_to_f64(&alpha);
                if a <= last {
                    continue;
                }
                last = a;
                push_row(crate::forest::prune_forest(forest, &sequences, &alpha), a)?;
            }
        }
    }
    Ok(PruneCurve { rows })
}
