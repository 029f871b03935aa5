use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::spec::ExperimentSpec;
use super::{builtin_templates, load_templates, split_dataset, synth_generate};
use crate::classifiers::{fbpn_train, pnn_train, Classifier, FbpnConfig, FeatureMatrix, KnnModel, Metric};
use crate::dataset::{load_dataset, LabeledDataset};
use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureVector};

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierConfig {
    Knn { k: usize },
    Pnn { spread: f64 },
    Fbpn(FbpnConfig),
}

impl ClassifierConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Knn { .. } => "knn",
            Self::Pnn { .. } => "pnn",
            Self::Fbpn(_) => "fbpn",
        }
    }

    pub fn params(&self) -> String {
        match self {
            Self::Knn { k } => format!("k={k}"),
            Self::Pnn { spread } => format!("spread={spread}"),
            Self::Fbpn(cfg) => format!("hidden={}", cfg.hidden),
        }
    }

    fn slug(&self) -> String {
        format!("{}-{}", self.name(), self.params().replace('=', ""))
    }

    fn rank(&self) -> usize {
        match self {
            Self::Knn { .. } => 0,
            Self::Pnn { .. } => 1,
            Self::Fbpn(_) => 2,
        }
    }
}

/// Counts indexed by (true class, predicted class).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn from_counts(classes: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != classes * classes {
            return Err(Error::DimensionMismatch {
                expected: classes * classes,
                found: counts.len(),
            });
        }
        Ok(Self { classes, counts })
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth * self.classes + predicted] += 1;
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|c| self.get(c, c)).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.chunks(self.classes.max(1)).map(|r| r.iter().sum()).collect()
    }

    /// Percentage of correct predictions; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.trace() as f64 / n as f64 * 100.0,
        }
    }
}

/// One evaluated (feature, classifier configuration) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub feature: FeatureKind,
    pub classifier: ClassifierConfig,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub seconds: f64,
}

/// The best configuration of one classifier subrange for one feature.
#[derive(Debug, Clone, PartialEq)]
pub struct BestCell {
    pub feature: FeatureKind,
    pub classifier: &'static str,
    pub subrange: String,
    pub best: ClassifierConfig,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    /// Time spent on every configuration of the subrange.
    pub seconds: f64,
}

impl BestCell {
    /// `k=3`, or `spread=0.5 in 0-1` when the subrange holds several values.
    pub fn classifier_params(&self) -> String {
        let params = self.best.params();
        if params.split_once('=').map(|(_, v)| v) == Some(self.subrange.as_str()) {
            params
        } else {
            format!("{params} in {}", self.subrange)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetMeta {
    pub name: String,
    pub classes: usize,
    pub train: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub dataset: DatasetMeta,
    pub seed: u64,
    pub spec_hash: String,
    pub features: Vec<FeatureKind>,
    /// (classifier, subrange label) in column order.
    pub columns: Vec<(&'static str, String)>,
    /// Every configuration evaluated, in canonical order.
    pub runs: Vec<CellResult>,
    /// Best-of cells, feature-major in column order.
    pub cells: Vec<BestCell>,
}

impl ExperimentReport {
    pub fn empty() -> Self {
        Self {
            dataset: DatasetMeta {
                name: String::new(),
                classes: 0,
                train: 0,
                test: 0,
            },
            seed: 0,
            spec_hash: String::new(),
            features: Vec::new(),
            columns: Vec::new(),
            runs: Vec::new(),
            cells: Vec::new(),
        }
    }

    pub fn cell(&self, feature: &FeatureKind, classifier: &str, subrange: &str) -> Option<&BestCell> {
        self.cells
            .iter()
            .find(|c| &c.feature == feature && c.classifier == classifier && c.subrange == subrange)
    }
}

/// Features of every sample in `data`.
pub fn extract_all(data: &LabeledDataset, feature: &FeatureKind) -> Result<Vec<FeatureVector>> {
    data.samples.iter().map(|s| feature.extract(&s.image)).collect()
}

fn train_and_test(
    train: &FeatureMatrix,
    test: &[FeatureVector],
    test_labels: &[usize],
    classifier: &ClassifierConfig,
) -> Result<ConfusionMatrix> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let model: Box<dyn Classifier> = match classifier {
        ClassifierConfig::Knn { k } => {
            let metric = if train.is_binary() { Metric::Hamming } else { Metric::Euclidean };
            Box::new(KnnModel::new(train.clone(), *k, metric)?)
        }
        ClassifierConfig::Pnn { spread } => Box::new(pnn_train(train.clone(), *spread)?),
        ClassifierConfig::Fbpn(cfg) => Box::new(fbpn_train(train, cfg)?),
    };
    let mut confusion = ConfusionMatrix::new(train.class_count());
    for (q, &label) in test.iter().zip(test_labels) {
        confusion.record(label, model.classify(q)?);
    }
    Ok(confusion)
}

/// Extracts features, trains one classifier and scores it on `test`.
pub fn evaluate(
    train: &LabeledDataset,
    test: &LabeledDataset,
    feature: &FeatureKind,
    classifier: &ClassifierConfig,
) -> Result<CellResult> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if test.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let start = Instant::now();
    let classes = train.class_count.max(test.class_count);
    let matrix = FeatureMatrix::new(extract_all(train, feature)?, train.labels(), classes)?;
    let queries = extract_all(test, feature)?;
    let confusion = train_and_test(&matrix, &queries, &test.labels(), classifier)?;
    Ok(CellResult {
        feature: *feature,
        classifier: classifier.clone(),
        accuracy: confusion.accuracy(),
        confusion,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Builds the experiment's dataset and splits it. Relative dataset and template
/// paths resolve against `base`.
pub fn prepare_data(spec: &ExperimentSpec, base: &Path) -> Result<(LabeledDataset, LabeledDataset)> {
    spec.validate()?;
    let data = if spec.is_synthetic() {
        let templates = match &spec.dataset.templates {
            Some(dir) => load_templates(base.join(dir))?,
            None => builtin_templates(),
        };
        synth_generate(&templates, &spec.synth_config()?)?
    } else {
        let raw = load_dataset(spec.dataset_path(base), spec.dataset.threshold, spec.polarity()?)?;
        raw.normalized(spec.size, spec.size)?
    };
    split_dataset(&data, spec.split.train, spec.split.test, spec.split_seed())
}

struct Column {
    classifier: &'static str,
    label: String,
    configs: Vec<ClassifierConfig>,
}

fn columns(spec: &ExperimentSpec) -> Vec<Column> {
    let mut out = Vec::new();
    if let Some(knn) = spec.knn.as_ref().filter(|k| k.enabled) {
        for &k in &knn.k {
            out.push(Column {
                classifier: "knn",
                label: k.to_string(),
                configs: vec![ClassifierConfig::Knn { k }],
            });
        }
    }
    if let Some(pnn) = spec.pnn.as_ref().filter(|p| p.enabled) {
        for s in &pnn.subrange {
            out.push(Column {
                classifier: "pnn",
                label: s.label.clone(),
                configs: s.values.iter().map(|&spread| ClassifierConfig::Pnn { spread }).collect(),
            });
        }
    }
    if let Some(fbpn) = spec.fbpn.as_ref().filter(|f| f.enabled) {
        for s in &fbpn.subrange {
            out.push(Column {
                classifier: "fbpn",
                label: s.label.clone(),
                configs: s.values.iter().map(|&h| ClassifierConfig::Fbpn(fbpn.config(h, spec.seed))).collect(),
            });
        }
    }
    out
}

/// Called once per finished configuration; the flag tells whether the
/// result came from the cache.
pub type Progress<'a> = &'a (dyn Fn(&CellResult, bool) + Sync);

/// Runs every feature and classifier configuration of `spec` on the given
/// split. With a cache root, results are stored under
/// `<root>/<spec hash>/<cell id>.csv` and reused on later runs.
pub fn run_grid(
    spec: &ExperimentSpec,
    train: &LabeledDataset,
    test: &LabeledDataset,
    cache_root: Option<&Path>,
    progress: Option<Progress>,
) -> Result<ExperimentReport> {
    spec.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if test.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let features = spec.enabled_features()?;
    let columns = columns(spec);
    let hash = spec.hash();
    let cache_dir = cache_root.map(|r| r.join(&hash));
    if let Some(dir) = &cache_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let classes = train.class_count.max(test.class_count);
    let test_labels = test.labels();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs.max(1))
        .build()
        .map_err(|e| Error::BadConfig(e.to_string()))?;

    pool.install(|| {
        let extracted: Vec<(FeatureMatrix, Vec<FeatureVector>)> = features
            .par_iter()
            .map(|f| {
                let matrix = FeatureMatrix::new(extract_all(train, f)?, train.labels(), classes)?;
                Ok((matrix, extract_all(test, f)?))
            })
            .collect::<Result<_>>()?;

        let mut tasks: Vec<(usize, &ClassifierConfig)> = features
            .iter()
            .enumerate()
            .flat_map(|(fi, _)| columns.iter().flat_map(|c| c.configs.iter()).map(move |cfg| (fi, cfg)))
            .collect();
        // slowest cells last
        tasks.sort_by_key(|(_, cfg)| matches!(cfg, ClassifierConfig::Fbpn(_)));

        let runs: Vec<CellResult> = tasks
            .par_iter()
            .map(|&(fi, cfg)| {
                let feature = &features[fi];
                let path = cache_dir
                    .as_ref()
                    .map(|d| d.join(format!("{}__{}.csv", feature.slug(), cfg.slug())));
                if let Some(hit) = path.as_ref().and_then(|p| read_cached(p, feature, cfg, classes)) {
                    if let Some(cb) = progress {
                        cb(&hit, true);
                    }
                    return Ok(hit);
                }
                let start = Instant::now();
                let (matrix, queries) = &extracted[fi];
                let confusion = train_and_test(matrix, queries, &test_labels, cfg)?;
                let result = CellResult {
                    feature: *feature,
                    classifier: cfg.clone(),
                    accuracy: confusion.accuracy(),
                    confusion,
                    seconds: start.elapsed().as_secs_f64(),
                };
                if let Some(p) = &path {
                    write_cached(p, &result)?;
                }
                if let Some(cb) = progress {
                    cb(&result, false);
                }
                Ok(result)
            })
            .collect::<Result<_>>()?;
        let mut runs = runs;
        let position = |r: &CellResult| {
            let fi = features.iter().position(|f| f == &r.feature).unwrap_or(usize::MAX);
            let ci = columns
                .iter()
                .flat_map(|c| c.configs.iter())
                .position(|c| c == &r.classifier)
                .unwrap_or(usize::MAX);
            (fi, r.classifier.rank(), ci)
        };
        runs.sort_by_key(position);

        let mut cells = Vec::new();
        for feature in &features {
            for column in &columns {
                let mut best: Option<&CellResult> = None;
                let mut seconds = 0.0;
                for cfg in &column.configs {
                    let run = runs
                        .iter()
                        .find(|r| &r.feature == feature && &r.classifier == cfg)
                        .expect("every configuration was run");
                    seconds += run.seconds;
                    if best.is_none_or(|b| run.accuracy > b.accuracy) {
                        best = Some(run);
                    }
                }
                let best = best.expect("subranges are nonempty");
                cells.push(BestCell {
                    feature: *feature,
                    classifier: column.classifier,
                    subrange: column.label.clone(),
                    best: best.classifier.clone(),
                    confusion: best.confusion.clone(),
                    accuracy: best.accuracy,
                    seconds,
                });
            }
        }

        Ok(ExperimentReport {
            dataset: DatasetMeta {
                name: train.name.split(':').next().unwrap_or_default().to_string(),
                classes,
                train: train.len(),
                test: test.len(),
            },
            seed: spec.seed,
            spec_hash: hash,
            features: features.clone(),
            columns: columns.iter().map(|c| (c.classifier, c.label.clone())).collect(),
            runs,
            cells,
        })
    })
}

const CACHE_HEADER: [&str; 6] = ["feature", "feature_params", "classifier", "classifier_params", "seconds", "confusion"];

fn write_cached(path: &PathBuf, result: &CellResult) -> Result<()> {
    let confusion = result
        .confusion
        .counts()
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(" ");
    let mut w = csv::Writer::from_writer(Vec::new());
    let record = [
        result.feature.name().to_string(),
        result.feature.params(),
        result.classifier.name().to_string(),
        result.classifier.params(),
        format!("{:?}", result.seconds),
        confusion,
    ];
    w.write_record(CACHE_HEADER).and_then(|_| w.write_record(&record)).expect("in-memory write");
    let bytes = w.into_inner().expect("in-memory flush");
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// A cached result, or `None` when the file is missing, unreadable or
/// describes a different cell.
fn read_cached(path: &Path, feature: &FeatureKind, cfg: &ClassifierConfig, classes: usize) -> Option<CellResult> {
    let mut reader = csv::Reader::from_path(path).ok()?;
    let row = reader.records().next()?.ok()?;
    if row.len() != CACHE_HEADER.len()
        || row[0] != *feature.name()
        || row[1] != feature.params()
        || row[2] != *cfg.name()
        || row[3] != cfg.params()
    {
        return None;
    }
    let seconds: f64 = row[4].parse().ok()?;
    let counts: Vec<u64> = row[5].split_whitespace().map(str::parse).collect::<std::result::Result<_, _>>().ok()?;
    let confusion = ConfusionMatrix::from_counts(classes, counts).ok()?;
    Some(CellResult {
        feature: *feature,
        classifier: cfg.clone(),
        accuracy: confusion.accuracy(),
        confusion,
        seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::spec::{FeatureSpec, KnnSpec};
    use crate::image::BinaryImage;

    fn small_spec() -> ExperimentSpec {
        let mut spec = ExperimentSpec::full_grid();
        spec.dataset.per_class = 12;
        spec.split.train = 0.5;
        spec.split.test = 0.5;
        spec.features.truncate(1);
        spec.features.push(FeatureSpec {
            name: "zoning".into(),
            params: String::new(),
            enabled: true,
        });
        let fbpn = spec.fbpn.as_mut().unwrap();
        fbpn.max_epochs = 20;
        fbpn.subrange.truncate(1);
        spec
    }

    fn data(spec: &ExperimentSpec) -> (LabeledDataset, LabeledDataset) {
        prepare_data(spec, Path::new(".")).unwrap()
    }

    #[test]
    fn confusion_bookkeeping() {
        let mut m = ConfusionMatrix::new(3);
        for (t, p) in [(0, 0), (0, 1), (1, 1), (2, 2), (2, 0), (2, 2)] {
            m.record(t, p);
        }
        assert_eq!(m.total(), 6);
        assert_eq!(m.trace(), 4);
        assert_eq!(m.row_sums(), vec![2, 1, 3]);
        assert_eq!(m.accuracy(), 4.0 / 6.0 * 100.0);
        assert_eq!(ConfusionMatrix::new(2).accuracy(), 0.0);
    }

    #[test]
    fn test_equals_train_with_one_nn_is_perfect() {
        let mut ds = LabeledDataset::new("t", 4);
        for i in 0..16u32 {
            let bits = (0..16).map(|b| ((i >> (b % 4)) & 1) as u8).collect();
            ds.push(BinaryImage::new(4, 4, bits).unwrap(), (i % 4) as usize).unwrap();
        }
        let feature = FeatureKind::parse("zoning", "rows=1,cols=4").unwrap();
        let cell = evaluate(&ds, &ds, &feature, &ClassifierConfig::Knn { k: 1 }).unwrap();
        assert_eq!(cell.accuracy, 100.0);
    }

    #[test]
    fn constant_prediction_scores_ten_percent() {
        // every training sample of class 3: any classifier answers 3
        let spec = small_spec();
        let (train, test) = data(&spec);
        let mut lone = LabeledDataset::new("one", 10);
        for s in train.samples.iter().filter(|s| s.label == 3) {
            lone.push(s.image.clone(), 3).unwrap();
        }
        let feature = FeatureKind::parse("hist", "").unwrap();
        for cfg in [ClassifierConfig::Knn { k: 3 }, ClassifierConfig::Pnn { spread: 1.0 }] {
            let cell = evaluate(&lone, &test, &feature, &cfg).unwrap();
            assert_eq!(test.class_counts(), vec![6; 10]);
            assert_eq!(cell.accuracy, 10.0);
            assert_eq!(cell.confusion.row_sums(), vec![6; 10]);
        }
    }

    #[test]
    fn grid_shape_and_best_of() {
        let spec = small_spec();
        let (train, test) = data(&spec);
        let report = run_grid(&spec, &train, &test, None, None).unwrap();
        // 2 features x (3 knn + 3 pnn + 1 fbpn)
        assert_eq!(report.cells.len(), 14);
        assert_eq!(report.runs.len(), 2 * (3 + 13 + 2));
        for cell in &report.cells {
            assert_eq!(cell.confusion.total(), test.len() as u64);
            assert_eq!(cell.accuracy, cell.confusion.accuracy());
            let peers = report
                .runs
                .iter()
                .filter(|r| r.feature == cell.feature && r.classifier.name() == cell.classifier);
            let column = spec_column_values(&spec, cell);
            let best = peers
                .filter(|r| column.contains(&r.classifier))
                .map(|r| r.accuracy)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(cell.accuracy, best);
        }
        assert_eq!(report.dataset.train, 60);
    }

    fn spec_column_values(spec: &ExperimentSpec, cell: &BestCell) -> Vec<ClassifierConfig> {
        columns(spec)
            .into_iter()
            .find(|c| c.classifier == cell.classifier && c.label == cell.subrange)
            .unwrap()
            .configs
    }

    #[test]
    fn single_cell_grid() {
        let mut spec = small_spec();
        spec.features.truncate(1);
        spec.knn = Some(KnnSpec { k: vec![3], enabled: true });
        spec.pnn = None;
        spec.fbpn = None;
        let (train, test) = data(&spec);
        let report = run_grid(&spec, &train, &test, None, None).unwrap();
        assert_eq!(report.cells.len(), 1);
        assert_eq!(report.cells[0].classifier_params(), "k=3");
    }

    #[test]
    fn parallelism_and_cache_do_not_change_results() {
        let spec = small_spec();
        let (train, test) = data(&spec);
        let strip = |r: ExperimentReport| -> Vec<(String, String, ConfusionMatrix)> {
            r.runs
                .into_iter()
                .map(|c| (c.feature.slug(), c.classifier.slug(), c.confusion))
                .collect()
        };
        let serial = strip(run_grid(&spec, &train, &test, None, None).unwrap());
        let parallel = strip(run_grid(&ExperimentSpec { jobs: 3, ..spec.clone() }, &train, &test, None, None).unwrap());
        assert_eq!(serial, parallel);

        let dir = tempfile::tempdir().unwrap();
        let counted = std::sync::atomic::AtomicUsize::new(0);
        let hits = |_: &CellResult, cached: bool| {
            if cached {
                counted.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            }
        };
        let first = strip(run_grid(&spec, &train, &test, Some(dir.path()), Some(&hits)).unwrap());
        assert_eq!(counted.load(std::sync::atomic::Ordering::Relaxed), 0);
        let cached_files = fs::read_dir(dir.path().join(spec.hash())).unwrap().count();
        assert_eq!(cached_files, serial.len());
        let second = strip(run_grid(&spec, &train, &test, Some(dir.path()), Some(&hits)).unwrap());
        assert_eq!(counted.load(std::sync::atomic::Ordering::Relaxed), serial.len());
        assert_eq!(first, serial);
        assert_eq!(second, serial);
    }

    #[test]
    fn corrupt_cache_entries_are_recomputed() {
        let mut spec = small_spec();
        spec.pnn = None;
        spec.fbpn = None;
        let (train, test) = data(&spec);
        let dir = tempfile::tempdir().unwrap();
        let fresh = run_grid(&spec, &train, &test, Some(dir.path()), None).unwrap();
        for entry in fs::read_dir(dir.path().join(spec.hash())).unwrap() {
            fs::write(entry.unwrap().path(), "garbage").unwrap();
        }
        let again = run_grid(&spec, &train, &test, Some(dir.path()), None).unwrap();
        assert_eq!(
            fresh.cells.iter().map(|c| c.accuracy).collect::<Vec<_>>(),
            again.cells.iter().map(|c| c.accuracy).collect::<Vec<_>>()
        );
    }
}
