use std::hint::black_box;
use std::time::Instant;

use crate::classifiers::{Classifier, FeatureMatrix, KnnModel, Metric};
use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureVector};
use crate::image::BinaryImage;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractorTiming {
    pub feature: FeatureKind,
    /// Median over runs.
    pub ns_per_image: f64,
    pub images_per_second: f64,
    /// Nanoseconds per image of every run.
    pub runs: Vec<f64>,
}

/// Median time of one 3-NN query over 128-bit celled-projection vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnLatency {
    pub train_size: usize,
    pub queries: usize,
    pub packed_hamming_ns: f64,
    pub expanded_euclidean_ns: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub images: usize,
    pub reps: usize,
    pub extractors: Vec<ExtractorTiming>,
    pub knn: Option<KnnLatency>,
}

const MAX_QUERIES: usize = 200;

pub fn default_extractors() -> Vec<FeatureKind> {
    [
        ("cp", "kh=4,kv=0"),
        ("cp", "kh=8,kv=0"),
        ("cp", "kh=4,kv=4"),
        ("crossings", ""),
        ("fourier", ""),
        ("moments", ""),
        ("hu", ""),
        ("hist", ""),
        ("zoning", "rows=4,cols=4"),
    ]
    .iter()
    .map(|(n, p)| FeatureKind::parse(n, p).expect("built-in feature"))
    .collect()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Per-image extraction time of one feature, `reps` runs over all images.
pub fn time_extractor(images: &[BinaryImage], feature: &FeatureKind, reps: usize) -> Result<ExtractorTiming> {
    if reps == 0 {
        return Err(Error::BadConfig("repetitions must be at least 1".into()));
    }
    let mut runs = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        for img in images {
            black_box(feature.extract(black_box(img))?);
        }
        runs.push(start.elapsed().as_nanos() as f64 / images.len().max(1) as f64);
    }
    let ns = median(&runs);
    Ok(ExtractorTiming {
        feature: *feature,
        ns_per_image: ns,
        images_per_second: 1e9 / ns,
        runs,
    })
}

/// Times every default extractor that accepts the images, then compares
/// packed and expanded KNN queries on celled-projection vectors.
pub fn bench_extractors(images: &[BinaryImage], reps: usize) -> Result<BenchReport> {
    if reps == 0 {
        return Err(Error::BadConfig("repetitions must be at least 1".into()));
    }
    let mut report = BenchReport {
        images: images.len(),
        reps,
        extractors: Vec::new(),
        knn: None,
    };
    if images.is_empty() {
        return Ok(report);
    }
    for feature in default_extractors() {
        // extractors that reject these image sizes are left out
        if let Ok(t) = time_extractor(images, &feature, reps) {
            report.extractors.push(t);
        }
    }
    report.knn = knn_latency(images, reps)?;
    Ok(report)
}

fn knn_latency(images: &[BinaryImage], reps: usize) -> Result<Option<KnnLatency>> {
    let cp = FeatureKind::parse("cp", "kh=4,kv=4")?;
    let Ok(vectors) = images.iter().map(|i| cp.extract(i)).collect::<Result<Vec<FeatureVector>>>() else {
        return Ok(None);
    };
    let labels = (0..vectors.len()).map(|i| i % 10).collect();
    let matrix = FeatureMatrix::new(vectors.clone(), labels, 10)?;
    let packed = KnnModel::new(matrix.clone(), 3, Metric::Hamming)?;
    let expanded = KnnModel::new(matrix, 3, Metric::Euclidean)?;
    let queries = &vectors[..vectors.len().min(MAX_QUERIES)];
    let time = |model: &KnnModel| -> Result<f64> {
        let mut runs = Vec::with_capacity(reps);
        for _ in 0..reps {
            let start = Instant::now();
            for q in queries {
                black_box(model.classify(black_box(q))?);
            }
            runs.push(start.elapsed().as_nanos() as f64 / queries.len() as f64);
        }
        Ok(median(&runs))
    };
    // interleave so drift in machine load hits both sides
    let mut packed_ns = Vec::new();
    let mut expanded_ns = Vec::new();
    for _ in 0..3 {
        packed_ns.push(time(&packed)?);
        expanded_ns.push(time(&expanded)?);
    }
    Ok(Some(KnnLatency {
        train_size: vectors.len(),
        queries: queries.len(),
        packed_hamming_ns: median(&packed_ns),
        expanded_euclidean_ns: median(&expanded_ns),
    }))
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("images: {}  reps: {}\n", self.images, self.reps);
        out.push_str(&format!("{:<10} {:<14} {:>14} {:>14}\n", "feature", "params", "ns/image", "images/s"));
        for t in &self.extractors {
            out.push_str(&format!(
                "{:<10} {:<14} {:>14.1} {:>14.0}\n",
                t.feature.name(),
                t.feature.params(),
                t.ns_per_image,
                t.images_per_second
            ));
        }
        if let Some(k) = &self.knn {
            out.push_str(&format!(
                "knn k=3 on {} cp kh=4,kv=4 vectors, {} queries: packed hamming {:.1} ns/query, expanded euclidean {:.1} ns/query\n",
                k.train_size, k.queries, k.packed_hamming_ns, k.expanded_euclidean_ns
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_images(n: usize, side: usize, seed: u64) -> Vec<BinaryImage> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let px = (0..side * side).map(|_| rng.gen_bool(0.3) as u8).collect();
                BinaryImage::new(side, side, px).unwrap()
            })
            .collect()
    }

    #[test]
    fn no_images_no_rows() {
        let r = bench_extractors(&[], 3).unwrap();
        assert!(r.extractors.is_empty());
        assert!(r.knn.is_none());
        assert!(bench_extractors(&[], 0).is_err());
    }

    #[test]
    fn timings_are_positive_and_finite() {
        let r = bench_extractors(&random_images(20, 16, 1), 3).unwrap();
        assert_eq!(r.extractors.len(), default_extractors().len());
        for t in &r.extractors {
            assert_eq!(t.runs.len(), 3);
            assert!(t.ns_per_image > 0.0 && t.ns_per_image.is_finite());
            assert!(t.images_per_second > 0.0 && t.images_per_second.is_finite());
        }
        let k = r.knn.unwrap();
        assert!(k.packed_hamming_ns > 0.0 && k.expanded_euclidean_ns > 0.0);
    }

    #[test]
    fn small_images_skip_fourier() {
        let r = bench_extractors(&random_images(5, 4, 2), 1).unwrap();
        assert!(r.extractors.iter().all(|t| t.feature.name() != "fourier"));
        assert!(r.knn.is_some());
    }

    #[test]
    fn median_of_runs() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn celled_projection_cost_scales_with_pixels() {
        let cp = FeatureKind::parse("cp", "kh=4,kv=4").unwrap();
        let small = random_images(400, 16, 3);
        let large = random_images(400, 32, 4);
        // warm up caches and the allocator before measuring
        time_extractor(&large, &cp, 3).unwrap();
        let mut ratios = Vec::new();
        for _ in 0..5 {
            let a = time_extractor(&small, &cp, 9).unwrap().ns_per_image;
            let b = time_extractor(&large, &cp, 9).unwrap().ns_per_image;
            ratios.push(b / a);
        }
        let ratio = median(&ratios);
        assert!(ratio <= 4.5, "32x32 / 16x16 cost ratio {ratio}");
    }
}
