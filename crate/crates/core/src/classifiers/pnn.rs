use super::{real_query, squared_distances, Classifier, FeatureMatrix, Vectors};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Probabilistic neural network: a Gaussian Parzen window per training
/// vector, summed per class. Binary training data is stored as real 0/1.
#[derive(Debug, Clone, PartialEq)]
pub struct PnnModel {
    training: FeatureMatrix,
    spread: f64,
}

pub fn pnn_train(data: FeatureMatrix, spread: f64) -> Result<PnnModel> {
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::BadConfig(format!("spread must be positive and finite, got {spread}")));
    }
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    Ok(PnnModel {
        training: data.to_real(),
        spread,
    })
}

impl PnnModel {
    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn training(&self) -> &FeatureMatrix {
        &self.training
    }

    fn query_distances(&self, query: &FeatureVector) -> Result<Vec<f64>> {
        let dim = self.training.dim();
        if query.len() != dim {
            return Err(Error::LengthMismatch {
                left: dim,
                right: query.len(),
            });
        }
        let Vectors::Real { values, .. } = self.training.vectors() else {
            unreachable!("PNN training data is stored as reals")
        };
        Ok(squared_distances(values, dim, &real_query(query)))
    }

    /// Per-class sums of `exp(-d^2 / (2 spread^2))`.
    pub fn scores(&self, query: &FeatureVector) -> Result<Vec<f64>> {
        let dists = self.query_distances(query)?;
        let denom = 2.0 * self.spread * self.spread;
        let mut scores = vec![0.0; self.class_count()];
        for (d, &label) in dists.iter().zip(self.training.labels()) {
            scores[label] += (-d / denom).exp();
        }
        Ok(scores)
    }

    /// Natural logarithms of [`PnnModel::scores`], evaluated without
    /// underflow; classes without training samples get `-inf`.
    pub fn log_scores(&self, query: &FeatureVector) -> Result<Vec<f64>> {
        let dists = self.query_distances(query)?;
        Ok(log_scores(&dists, self.training.labels(), self.spread, self.class_count()))
    }
}

pub(crate) fn log_scores(dists: &[f64], labels: &[usize], spread: f64, class_count: usize) -> Vec<f64> {
    let denom = 2.0 * spread * spread;
    let mut peak = vec![f64::NEG_INFINITY; class_count];
    for (d, &label) in dists.iter().zip(labels) {
        peak[label] = peak[label].max(-d / denom);
    }
    let mut sums = vec![0.0; class_count];
    for (d, &label) in dists.iter().zip(labels) {
        sums[label] += (-d / denom - peak[label]).exp();
    }
    peak.iter()
        .zip(sums)
        .map(|(&p, s)| if p == f64::NEG_INFINITY { p } else { p + s.ln() })
        .collect()
}

pub(crate) fn decide(log_scores: &[f64]) -> usize {
    let mut best = 0;
    for (c, &s) in log_scores.iter().enumerate().skip(1) {
        if s > log_scores[best] {
            best = c;
        }
    }
    best
}

impl Classifier for PnnModel {
    fn class_count(&self) -> usize {
        self.training.class_count()
    }

    fn classify(&self, query: &FeatureVector) -> Result<usize> {
        pnn_classify(self, query)
    }
}

/// Class with the largest summed kernel response; ties go to the smaller
/// class id.
pub fn pnn_classify(model: &PnnModel, query: &FeatureVector) -> Result<usize> {
    Ok(decide(&model.log_scores(query)?))
}
