//! Classification metrics, accuracy-vs-size curves and inference timing.

mod bench;
mod curve;
mod metrics;

pub use bench::{bench_inference, BenchReport};
pub use curve::{prune_curve, AlphaGrid, CurveRow, PruneCurve};
pub use metrics::{evaluate, f1, ClassStats, ConfusionMatrix, Metrics};
