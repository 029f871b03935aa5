//! Classifiers over feature vectors: k-nearest neighbours, a probabilistic
//! neural network and a single-hidden-layer backpropagation network.
//!
//! All three share [`FeatureMatrix`] as training input and the
//! [`Classifier`] trait for prediction. Trained models are immutable.

mod fbpn;
mod knn;
mod model_io;
mod pnn;

pub use fbpn::{
    fbpn_gradient, fbpn_loss, fbpn_predict, fbpn_train, FbpnConfig, FbpnGradient, FbpnModel,
    InputScaling, TrainingHistory,
};
pub use knn::{knn_classify, KnnModel, Metric};
pub use model_io::Model;
pub use pnn::{pnn_classify, pnn_train, PnnModel};

use crate::error::{Error, Result};
use crate::features::{BitFeatureVector, FeatureVector};

pub trait Classifier {
    fn class_count(&self) -> usize;

    fn classify(&self, query: &FeatureVector) -> Result<usize>;
}

/// Training vectors stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub enum Vectors {
    /// Row-major `len x dim` reals.
    Real { dim: usize, values: Vec<f64> },
    /// Packed bit vectors of `dim` bits each.
    Bits { dim: usize, vectors: Vec<BitFeatureVector> },
}

impl Vectors {
    pub fn dim(&self) -> usize {
        match self {
            Vectors::Real { dim, .. } | Vectors::Bits { dim, .. } => *dim,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Vectors::Real { dim, values } => {
                if *dim == 0 {
                    0
                } else {
                    values.len() / dim
                }
            }
            Vectors::Bits { vectors, .. } => vectors.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Vectors::Bits { .. })
    }
}

/// Homogeneous labeled feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    vectors: Vectors,
    labels: Vec<usize>,
    class_count: usize,
}

impl FeatureMatrix {
    /// Builds a matrix; every vector must have the same kind and length and
    /// every label must lie in `0..class_count`.
    pub fn new(vectors: Vec<FeatureVector>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: vectors.len(),
                right: labels.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::BadLabel { label, class_count });
        }
        let dim = vectors.first().map_or(0, FeatureVector::len);
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::LengthMismatch {
                left: dim,
                right: v.len(),
            });
        }
        let binary = matches!(vectors.first(), Some(FeatureVector::Bits(_)));
        let stored = if binary {
            let mut bits = Vec::with_capacity(vectors.len());
            for v in vectors {
                match v {
                    FeatureVector::Bits(b) => bits.push(b),
                    FeatureVector::Real(_) => {
                        return Err(Error::BadConfig("mixed real and binary feature vectors".into()))
                    }
                }
            }
            Vectors::Bits { dim, vectors: bits }
        } else {
            let mut values = Vec::with_capacity(vectors.len() * dim);
            for v in vectors {
                match v {
                    FeatureVector::Real(r) => values.extend(r),
                    FeatureVector::Bits(_) => {
                        return Err(Error::BadConfig("mixed real and binary feature vectors".into()))
                    }
                }
            }
            Vectors::Real { dim, values }
        };
        Ok(Self {
            vectors: stored,
            labels,
            class_count,
        })
    }

    /// Real rows, `dim` values each.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>, class_count: usize) -> Result<Self> {
        Self::new(rows.iter().cloned().map(FeatureVector::Real).collect(), labels, class_count)
    }

    pub(crate) fn from_parts(vectors: Vectors, labels: Vec<usize>, class_count: usize) -> Self {
        Self {
            vectors,
            labels,
            class_count,
        }
    }

    pub fn vectors(&self) -> &Vectors {
        &self.vectors
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }

    pub fn is_binary(&self) -> bool {
        self.vectors.is_binary()
    }

    /// Expands binary storage to real 0/1 rows.
    pub fn to_real(&self) -> Self {
        match &self.vectors {
            Vectors::Real { .. } => self.clone(),
            Vectors::Bits { dim, vectors } => Self {
                vectors: Vectors::Real {
                    dim: *dim,
                    values: vectors.iter().flat_map(|b| b.to_f64()).collect(),
                },
                labels: self.labels.clone(),
                class_count: self.class_count,
            },
        }
    }

    /// Row `i` as reals (bits expanded).
    pub fn row_real(&self, i: usize) -> Vec<f64> {
        match &self.vectors {
            Vectors::Real { dim, values } => values[i * dim..(i + 1) * dim].to_vec(),
            Vectors::Bits { vectors, .. } => vectors[i].to_f64(),
        }
    }

    /// Row `i` as a feature vector.
    pub fn row(&self, i: usize) -> FeatureVector {
        match &self.vectors {
            Vectors::Real { dim, values } => FeatureVector::Real(values[i * dim..(i + 1) * dim].to_vec()),
            Vectors::Bits { vectors, .. } => FeatureVector::Bits(vectors[i].clone()),
        }
    }
}

/// Squared Euclidean distances from `query` to every row of real storage.
pub(crate) fn squared_distances(values: &[f64], dim: usize, query: &[f64]) -> Vec<f64> {
    values
        .chunks_exact(dim.max(1))
        .map(|row| {
            row.iter()
                .zip(query)
                .map(|(a, b)| {
                    let d = a - b;
                    d * d
                })
                .sum()
        })
        .collect()
}

/// Borrowed real view of a query, expanding bits when needed.
pub(crate) fn real_query(query: &FeatureVector) -> std::borrow::Cow<'_, [f64]> {
    match query {
        FeatureVector::Real(v) => std::borrow::Cow::Borrowed(v.as_slice()),
        FeatureVector::Bits(b) => std::borrow::Cow::Owned(b.to_f64()),
    }
}
