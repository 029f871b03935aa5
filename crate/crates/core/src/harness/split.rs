use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Stratified train/test split.
///
/// Each class is shuffled with a generator seeded by `seed`, then its first
/// `round(n * train_fraction)` samples go to training and the next
/// `round(n * test_fraction)` (capped by what is left) to testing. Both
/// outputs keep the original sample order.
pub fn split_dataset(
    data: &LabeledDataset,
    train_fraction: f64,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_fraction > 0.0 && test_fraction > 0.0 && train_fraction + test_fraction <= 1.0 + 1e-9) {
        return Err(Error::BadConfig(format!(
            "split fractions {train_fraction}/{test_fraction} must be positive and sum to at most 1"
        )));
    }
    let counts = data.class_counts();
    if let Some((class, &count)) = counts.iter().enumerate().find(|(_, &c)| c == 1) {
        return Err(Error::TooFewSamples { class, count });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for class in 0..data.class_count {
        let mut members: Vec<usize> = (0..data.len()).filter(|&i| data.samples[i].label == class).collect();
        if members.is_empty() {
            continue;
        }
        members.shuffle(&mut rng);
        let n = members.len();
        let n_train = ((n as f64 * train_fraction).round() as usize).min(n);
        let n_test = ((n as f64 * test_fraction).round() as usize).min(n - n_train);
        train_idx.extend_from_slice(&members[..n_train]);
        test_idx.extend_from_slice(&members[n_train..n_train + n_test]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let subset = |idx: &[usize], suffix: &str| LabeledDataset {
        name: format!("{}:{suffix}", data.name),
        class_count: data.class_count,
        samples: idx.iter().map(|&i| data.samples[i].clone()).collect(),
    };
    Ok((subset(&train_idx, "train"), subset(&test_idx, "test")))
}
