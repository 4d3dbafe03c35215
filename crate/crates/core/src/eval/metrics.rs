use std::fmt::Write as _;

use rayon::prelude::*;

use crate::forest::{ClassId, Classifier, LabeledSet};
use crate::{Error, LabelScheme, Result};

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        Self {
            n_classes,
            counts: vec![0; n_classes * n_classes],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("confusion matrix must be square"));
        }
        Ok(Self {
            n_classes: n,
            counts: rows.concat(),
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn add(&mut self, truth: ClassId, predicted: ClassId) {
        self.counts[truth as usize * self.n_classes + predicted as usize] += 1;
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.n_classes + predicted]
    }

    pub fn merge(mut self, other: &Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|c| self.get(c, c)).sum()
    }

    pub fn support(&self, class: usize) -> u64 {
        (0..self.n_classes).map(|p| self.get(class, p)).sum()
    }

    pub fn predicted(&self, class: usize) -> u64 {
        (0..self.n_classes).map(|t| self.get(t, class)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassStats {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_class: Vec<ClassStats>,
    /// Mean F1 over classes that occur in the truth or the predictions.
    pub macro_f1: f64,
    /// Support-weighted mean F1.
    pub weighted_f1: f64,
    /// Pooled micro F1 (equals accuracy for single-label outputs).
    pub micro_f1: f64,
    /// F1 of class 1 when there are exactly two classes.
    pub binary_f1: Option<f64>,
    pub confusion: ConfusionMatrix,
}

impl Metrics {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Self {
        let n = confusion.n_classes();
        let total = confusion.total();
        let per_class: Vec<ClassStats> = (0..n)
            .map(|c| {
                let tp = confusion.get(c, c) as f64;
                let support = confusion.support(c);
                let predicted = confusion.predicted(c);
                let precision = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
                let recall = if support == 0 { 0.0 } else { tp / support as f64 };
                ClassStats {
                    precision,
                    recall,
                    f1: f1(precision, recall),
                    support,
                }
            })
            .collect();
        let accuracy = if total == 0 {
            0.0
        } else {
            confusion.trace() as f64 / total as f64
        };
        let present: Vec<&ClassStats> = per_class
            .iter()
            .enumerate()
            .filter(|(c, s)| s.support > 0 || confusion.predicted(*c) > 0)
            .map(|(_, s)| s)
            .collect();
        let macro_f1 = if present.is_empty() {
            0.0
        } else {
            present.iter().map(|s| s.f1).sum::<f64>() / present.len() as f64
        };
        let weighted_f1 = if total == 0 {
            0.0
        } else {
            per_class.iter().map(|s| s.support as f64 * s.f1).sum::<f64>() / total as f64
        };
        Metrics {
            accuracy,
            macro_f1,
            weighted_f1,
            micro_f1: accuracy,
            binary_f1: (n == 2).then(|| per_class[1].f1),
            per_class,
            confusion,
        }
    }

    /// F1 figure reported alongside accuracy: the artifact-class F1 for the
    /// binary schemes, the weighted F1 for the multi-class scheme.
    pub fn headline_f1(&self, scheme: LabelScheme) -> f64 {
        match scheme {
            LabelScheme::Bc | LabelScheme::Mc => self.binary_f1.unwrap_or(self.weighted_f1),
            LabelScheme::Mmc => self.weighted_f1,
        }
    }

    /// `metric,class,value` table.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("metric,class,value\n");
        let _ = writeln!(s, "accuracy,,{}", self.accuracy);
        let _ = writeln!(s, "macro_f1,,{}", self.macro_f1);
        let _ = writeln!(s, "weighted_f1,,{}", self.weighted_f1);
        let _ = writeln!(s, "micro_f1,,{}", self.micro_f1);
        if let Some(b) = self.binary_f1 {
            let _ = writeln!(s, "binary_f1,,{b}");
        }
        let _ = writeln!(s, "count,,{}", self.confusion.total());
        for (c, st) in self.per_class.iter().enumerate() {
            let _ = writeln!(s, "support,{c},{}", st.support);
            let _ = writeln!(s, "precision,{c},{}", st.precision);
            let _ = writeln!(s, "recall,{c},{}", st.recall);
            let _ = writeln!(s, "f1,{c},{}", st.f1);
        }
        let n = self.confusion.n_classes();
        for t in 0..n {
            for p in 0..n {
                let v = self.confusion.get(t, p);
                if v > 0 {
                    let _ = writeln!(s, "confusion,{t}:{p},{v}");
                }
            }
        }
        s
    }
}

/// Scores `model` on `set`, pooling every (row, output) pair into one
/// confusion matrix.
pub fn evaluate<C: Classifier + ?Sized>(model: &C, set: &LabeledSet) -> Result<Metrics> {
    if set.scheme != model.scheme() {
        return Err(Error::invalid(format!(
            "labels are {} but the model predicts {}",
            set.scheme,
            model.scheme()
        )));
    }
    if !set.is_empty() && set.n_outputs != model.n_outputs() {
        return Err(Error::invalid(format!(
            "labels have {} outputs, model has {}",
            set.n_outputs,
            model.n_outputs()
        )));
    }
    if !set.is_empty() && set.n_features() != model.n_features() {
        return Err(Error::invalid(format!(
            "rows have {} features, model expects {}",
            set.n_features(),
            model.n_features()
        )));
    }
    let n_classes = model.n_classes();
    let confusion = set
        .features
        .par_iter()
        .zip(set.labels.par_iter())
        .try_fold(
            || ConfusionMatrix::new(n_classes),
            |mut cm, (x, y)| -> Result<ConfusionMatrix> {
                let pred = model.predict(x)?;
                for (&t, &p) in y.iter().zip(&pred) {
                    cm.add(t, p);
                }
                Ok(cm)
            },
        )
        .try_reduce(|| ConfusionMatrix::new(n_classes), |a, b| Ok(a.merge(&b)))?;
    Ok(Metrics::from_confusion(confusion))
}
