use std::time::Instant;

use crate::compact::CompactForest;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub inferences: usize,
    pub windows_per_s: f64,
    pub mean_us: f64,
    pub p99_us: f64,
    /// Mean nodes touched per tree per inference, leaf included.
    pub mean_nodes_visited: f64,
    pub max_nodes_visited: usize,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        format!(
            "metric,value\ninferences,{}\nwindows_per_s,{}\nmean_us,{}\np99_us,{}\nmean_nodes_visited,{}\nmax_nodes_visited,{}\n",
            self.inferences,
            self.windows_per_s,
            self.mean_us,
            self.p99_us,
            self.mean_nodes_visited,
            self.max_nodes_visited
        )
    }
}

/// Times whole-forest inference on each vector `repetitions` times after one
/// warm-up pass. Traversal runs in place on the node arrays.
pub fn bench_inference(
    forest: &CompactForest,
    vectors: &[Vec<f64>],
    repetitions: usize,
) -> Result<BenchReport> {
    if vectors.is_empty() {
        return Err(Error::invalid("benchmark needs at least one feature vector"));
    }
    let repetitions = repetitions.max(1);
    for v in vectors {
        forest.predict_counted(v)?;
    }

    let mut latencies = Vec::with_capacity(vectors.len() * repetitions);
    let mut visited_total = 0usize;
    let mut max_visited = 0usize;
    let trees = forest.tree_count().max(1);
    let started = Instant::now();
    for _ in 0..repetitions {
        for v in vectors {
            let t0 = Instant::now();
            let (pred, visited) = forest.predict_counted(v)?;
            latencies.push(t0.elapsed().as_secs_f64() * 1e6);
            std::hint::black_box(pred);
            visited_total += visited;
        }
    }
    let wall = started.elapsed().as_secs_f64();
    for t in forest.trees() {
        for v in vectors {
            max_visited = max_visited.max(t.traverse(v)?.1);
        }
    }

    let n = latencies.len();
    latencies.sort_by(f64::total_cmp);
    let p99_idx = ((n as f64 * 0.99).ceil() as usize).clamp(1, n) - 1;
    Ok(BenchReport {
        inferences: n,
        windows_per_s: if wall > 0.0 { n as f64 / wall } else { f64::INFINITY },
        mean_us: latencies.iter().sum::<f64>() / n as f64,
        p99_us: latencies[p99_idx],
        mean_nodes_visited: visited_total as f64 / (n * trees) as f64,
        max_nodes_visited: max_visited,
    })
}
