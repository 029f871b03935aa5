//! Celled-projection and classic statistical features for binary
//! character images, three classifiers over them (k-nearest neighbours,
//! a probabilistic neural network and a one-hidden-layer backpropagation
//! network), and an experiment harness that runs the feature x classifier
//! evaluation grid.

pub mod classifiers;
pub mod dataset;
pub mod error;
pub mod features;
pub mod harness;
pub mod image;
pub mod pbm;

pub use error::{Error, Result};
