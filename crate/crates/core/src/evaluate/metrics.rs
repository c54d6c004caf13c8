use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::EvaluateError;
use crate::scene::ClassLabel;

/// Confusion matrix plus macro-averaged scores in percent.
///
/// Rows are true classes and columns predicted classes, both over the union
/// of labels seen in either role. A class never predicted has precision 0;
/// a class whose precision and recall are both 0 has F1 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub classes: Vec<ClassLabel>,
    pub confusion: Vec<Vec<u64>>,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// The same scores as exact fractions in [0, 1].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMetrics {
    pub accuracy: BigRational,
    pub precision: BigRational,
    pub recall: BigRational,
    pub f1: BigRational,
    pub per_class: Vec<ClassScores>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassScores {
    pub class: ClassLabel,
    pub support: u64,
    pub precision: BigRational,
    pub recall: BigRational,
    pub f1: BigRational,
}

fn ratio(num: u64, den: u64) -> BigRational {
    if den == 0 {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

fn percent(x: &BigRational) -> f64 {
    (x * BigRational::from_integer(BigInt::from(100)))
        .to_f64()
        .unwrap_or(f64::NAN)
}

fn mean(values: impl ExactSizeIterator<Item = BigRational>) -> BigRational {
    let n = values.len() as u64;
    let sum = values.fold(BigRational::zero(), |acc, v| acc + v);
    sum / ratio(n, 1)
}

impl Metrics {
    /// Scores `(truth, predicted)` pairs.
    pub fn from_pairs(pairs: &[(ClassLabel, ClassLabel)]) -> Result<Self, EvaluateError> {
        if pairs.is_empty() {
            return Err(EvaluateError::Empty);
        }
        let classes: Vec<ClassLabel> = pairs
            .iter()
            .flat_map(|&(t, p)| [t, p])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let pos = |c: ClassLabel| classes.binary_search(&c).expect("collected above");
        let mut confusion = vec![vec![0u64; classes.len()]; classes.len()];
        for &(t, p) in pairs {
            confusion[pos(t)][pos(p)] += 1;
        }
        Self::from_confusion(classes, confusion)
    }

    pub fn from_confusion(
        classes: Vec<ClassLabel>,
        confusion: Vec<Vec<u64>>,
    ) -> Result<Self, EvaluateError> {
        let n = classes.len();
        if confusion.len() != n || confusion.iter().any(|r| r.len() != n) {
            return Err(EvaluateError::Shape);
        }
        if confusion.iter().flatten().all(|&c| c == 0) {
            return Err(EvaluateError::Empty);
        }
        let mut metrics = Metrics {
            classes,
            confusion,
            accuracy: 0.0,
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        };
        let exact = metrics.exact();
        metrics.accuracy = percent(&exact.accuracy);
        metrics.precision = percent(&exact.precision);
        metrics.recall = percent(&exact.recall);
        metrics.f1 = percent(&exact.f1);
        Ok(metrics)
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    pub fn exact(&self) -> ExactMetrics {
        let n = self.classes.len();
        let trace: u64 = (0..n).map(|i| self.confusion[i][i]).sum();
        let per_class: Vec<ClassScores> = (0..n)
            .map(|i| {
                let support: u64 = self.confusion[i].iter().sum();
                let predicted: u64 = self.confusion.iter().map(|r| r[i]).sum();
                let tp = self.confusion[i][i];
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                let sum = &precision + &recall;
                let f1 = if sum.is_zero() {
                    BigRational::zero()
                } else {
                    BigRational::from_integer(BigInt::from(2)) * &precision * &recall / sum
                };
                ClassScores {
                    class: self.classes[i],
                    support,
                    precision,
                    recall,
                    f1,
                }
            })
            .collect();
        ExactMetrics {
            accuracy: ratio(trace, self.total()),
            precision: mean(per_class.iter().map(|c| c.precision.clone())),
            recall: mean(per_class.iter().map(|c| c.recall.clone())),
            f1: mean(per_class.iter().map(|c| c.f1.clone())),
            per_class,
        }
    }

    /// Human-readable summary and confusion matrix.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str("| Accuracy | Precision | Recall | F1 |\n|---|---|---|---|\n");
        out.push_str(&format!(
            "| {:.2} | {:.2} | {:.2} | {:.2} |\n\n",
            self.accuracy, self.precision, self.recall, self.f1
        ));
        out.push_str("true \\ predicted");
        for c in &self.classes {
            out.push_str(&format!("\t{c}"));
        }
        out.push('\n');
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            out.push_str(&c.to_string());
            for v in row {
                out.push_str(&format!("\t{v}"));
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Metrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "accuracy {:.2}, precision {:.2}, recall {:.2}, F1 {:.2}",
            self.accuracy, self.precision, self.recall, self.f1
        )
    }
}

/// Sample mean and standard deviation (n − 1 denominator; 0 for one run).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        if values.is_empty() {
            return MeanStd {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        MeanStd { mean, std }
    }
}

impl fmt::Display for MeanStd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ± {:.2}", self.mean, self.std)
    }
}
