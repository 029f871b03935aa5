use std::cmp::Ordering;

use super::{real_query, squared_distances, Classifier, FeatureMatrix, Vectors};
use crate::error::{Error, Result};
use crate::features::{hamming_words, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Euclidean,
    /// Bit-count distance on packed vectors; only valid for binary features.
    Hamming,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Hamming => "hamming",
        }
    }
}

/// k-nearest-neighbour model.
///
/// Ranking uses squared Euclidean distance for [`Metric::Euclidean`], which
/// orders neighbours exactly like Euclidean distance and coincides with the
/// Hamming distance on 0/1 vectors. With the Euclidean metric, binary
/// training data is expanded to reals at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    training: FeatureMatrix,
    k: usize,
    metric: Metric,
}

impl KnnModel {
    pub fn new(training: FeatureMatrix, k: usize, metric: Metric) -> Result<Self> {
        if k == 0 {
            return Err(Error::BadConfig("k must be at least 1".into()));
        }
        if training.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let training = match metric {
            Metric::Hamming if !training.is_binary() => {
                return Err(Error::BadConfig("Hamming metric needs binary feature vectors".into()))
            }
            Metric::Hamming => training,
            Metric::Euclidean => training.to_real(),
        };
        Ok(Self { training, k, metric })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn training(&self) -> &FeatureMatrix {
        &self.training
    }

    /// Ranking distance from `query` to every training vector.
    pub fn distances(&self, query: &FeatureVector) -> Result<Vec<f64>> {
        let dim = self.training.dim();
        if query.len() != dim {
            return Err(Error::LengthMismatch {
                left: dim,
                right: query.len(),
            });
        }
        match (self.training.vectors(), query) {
            (Vectors::Bits { vectors, .. }, FeatureVector::Bits(q)) => Ok(vectors
                .iter()
                .map(|v| hamming_words(v.words(), q.words()) as f64)
                .collect()),
            (Vectors::Bits { .. }, FeatureVector::Real(_)) => Err(Error::BadConfig(
                "Hamming metric needs a binary query".into(),
            )),
            (Vectors::Real { dim, values }, q) => Ok(squared_distances(values, *dim, &real_query(q))),
        }
    }
}

impl Classifier for KnnModel {
    fn class_count(&self) -> usize {
        self.training.class_count()
    }

    fn classify(&self, query: &FeatureVector) -> Result<usize> {
        knn_classify(self, query)
    }
}

/// Majority vote among the `k` nearest training vectors.
///
/// Equal distances at the cut-off admit the earlier training sample. Equal
/// vote counts go to the class with the smaller summed ranking distance,
/// then to the smaller class id.
pub fn knn_classify(model: &KnnModel, query: &FeatureVector) -> Result<usize> {
    let dists = model.distances(query)?;
    Ok(vote(&dists, model.training.labels(), model.k, model.class_count()))
}

pub(crate) fn vote(dists: &[f64], labels: &[usize], k: usize, class_count: usize) -> usize {
    let by_rank = |&a: &usize, &b: &usize| {
        dists[a]
            .partial_cmp(&dists[b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    };
    let mut order: Vec<usize> = (0..dists.len()).collect();
    let k = k.min(order.len());
    if k < order.len() {
        order.select_nth_unstable_by(k - 1, by_rank);
    }
    let nearest = &order[..k];

    let mut votes = vec![0usize; class_count];
    let mut summed = vec![0.0f64; class_count];
    for &i in nearest {
        votes[labels[i]] += 1;
        summed[labels[i]] += dists[i];
    }
    let mut best = 0;
    for c in 1..class_count {
        let better = votes[c] > votes[best] || (votes[c] == votes[best] && summed[c] < summed[best]);
        if better {
            best = c;
        }
    }
    best
}
