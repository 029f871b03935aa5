use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cellproj::classifiers::{fbpn_train, pnn_train, FbpnConfig, FeatureMatrix, KnnModel, Metric, Model};
use cellproj::dataset::{idx_labels_path, load_dataset, save_idx_pair, save_manifest_dir, LabeledDataset};
use cellproj::features::{format_records, FeatureKind, FeatureRecord};
use cellproj::harness::{
    bench_extractors, builtin_templates, emit_report, evaluate, extract_all, load_templates, prepare_data,
    run_grid, synth_generate, CellResult, ClassifierConfig, ExperimentSpec, ReportFormat, SynthConfig,
};
use cellproj::image::{normalize, BinaryImage, Polarity};
use cellproj::pbm::load_pbm;
use cellproj::Error;

#[derive(Parser)]
#[command(name = "cellproj", version, about = "Binary character image features, classifiers and evaluation grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract one feature from a PBM image or every image of a dataset
    Extract(ExtractArgs),
    /// Run a feature x classifier evaluation grid
    Grid(GridArgs),
    /// Generate a synthetic digit dataset
    Synth(SynthArgs),
    /// Train on one dataset and score another
    Eval(EvalArgs),
    /// Time the feature extractors and KNN queries
    Bench(BenchArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Gray level separating foreground from background in IDX images
    #[arg(long, default_value_t = 128)]
    threshold: u8,
    #[arg(long, value_enum, default_value_t = PolarityArg::Dark)]
    polarity: PolarityArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolarityArg {
    Dark,
    Light,
}

impl From<PolarityArg> for Polarity {
    fn from(p: PolarityArg) -> Self {
        match p {
            PolarityArg::Dark => Polarity::DarkForeground,
            PolarityArg::Light => Polarity::LightForeground,
        }
    }
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    feature: String,
    /// Feature parameters such as `kh=4,kv=4`
    #[arg(long, default_value = "")]
    params: String,
    /// A `.pbm` image or a dataset (directory, `.csv` manifest, `.idx`)
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Normalize images to this side length first
    #[arg(long)]
    size: Option<usize>,
    #[command(flatten)]
    input_args: InputArgs,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for the report, timings and cache
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Md,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory of `.pbm` templates, one per class in file name order
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long, default_value_t = 300)]
    per_class: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// `<name>.idx` (labels go to `<name>.labels.idx`) or a directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    feature: String,
    #[arg(long, default_value = "")]
    params: String,
    #[arg(long, value_enum)]
    classifier: ClassifierArg,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    #[arg(long, default_value_t = 30)]
    hidden: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    size: usize,
    /// Also write the trained model here
    #[arg(long)]
    save_model: Option<PathBuf>,
    #[command(flatten)]
    input_args: InputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierArg {
    Knn,
    Pnn,
    Fbpn,
}

#[derive(Args)]
struct BenchArgs {
    /// Dataset to time on; synthetic digits when absent
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 16)]
    size: usize,
    #[command(flatten)]
    input_args: InputArgs,
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_io() {
            3
        } else if matches!(
            e,
            Error::Spec(_) | Error::UnknownFeature(_) | Error::BadParams { .. } | Error::BadConfig(_)
        ) {
            2
        } else {
            4
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 3,
        message: format!("{}: {e}", path.display()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Extract(a) => extract(a),
        Command::Grid(a) => grid(a),
        Command::Synth(a) => synth(a),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn is_pbm(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "pbm")
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_failure(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn extract(a: ExtractArgs) -> Result<(), Failure> {
    let feature = FeatureKind::parse(&a.feature, &a.params)?;
    let mut images: Vec<BinaryImage> = if is_pbm(&a.input) {
        vec![load_pbm(&a.input)?]
    } else {
        let data = load_dataset(&a.input, a.input_args.threshold, a.input_args.polarity.into())?;
        data.samples.into_iter().map(|s| s.image).collect()
    };
    if let Some(size) = a.size {
        images = images.iter().map(|i| normalize(i, size, size)).collect::<Result<_, _>>()?;
    }
    let records = images
        .iter()
        .map(|img| {
            Ok(FeatureRecord {
                kind: feature,
                vector: feature.extract(img)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    write_file(&a.out, &format_records(&records))
}

fn grid(a: GridArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.spec).map_err(|e| io_failure(&a.spec, e))?;
    let mut spec = ExperimentSpec::parse(&text)?;
    if let Some(jobs) = a.jobs {
        spec.jobs = jobs;
    }
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let base = a.spec.parent().unwrap_or(Path::new(".")).to_path_buf();
    let (train, test) = prepare_data(&spec, &base)?;
    fs::create_dir_all(&a.out).map_err(|e| io_failure(&a.out, e))?;
    let cache = a.out.join("cache");
    let progress = |r: &CellResult, cached: bool| {
        eprintln!(
            "{} {} {} {} {:.2}{}",
            r.feature.name(),
            r.feature.params(),
            r.classifier.name(),
            r.classifier.params(),
            r.accuracy,
            if cached { " (cached)" } else { "" }
        );
    };
    let report = run_grid(&spec, &train, &test, Some(&cache), Some(&progress))?;
    let (name, format) = match a.format {
        FormatArg::Csv => ("report.csv", ReportFormat::Csv),
        FormatArg::Md => ("report.md", ReportFormat::Markdown),
    };
    write_file(&a.out.join(name), &emit_report(&report, format, false))?;
    write_file(&a.out.join("timings.csv"), &emit_report(&report, ReportFormat::Csv, true))?;
    let summary = emit_report(&report, ReportFormat::Markdown, false);
    let _ = std::io::stdout().write_all(summary.as_bytes());
    Ok(())
}

fn synth(a: SynthArgs) -> Result<(), Failure> {
    let templates = match &a.templates {
        Some(dir) => load_templates(dir)?,
        None => builtin_templates(),
    };
    let cfg = SynthConfig {
        seed: a.seed,
        per_class: a.per_class,
        ..SynthConfig::default()
    };
    let data = synth_generate(&templates, &cfg)?;
    if a.out.extension().is_some_and(|e| e == "idx") {
        if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| io_failure(parent, e))?;
        }
        save_idx_pair(&data, &a.out, idx_labels_path(&a.out))?;
    } else {
        save_manifest_dir(&data, &a.out)?;
    }
    println!("{} samples, {} classes", data.len(), data.class_count);
    Ok(())
}

fn load_normalized(path: &Path, size: usize, input: &InputArgs) -> Result<LabeledDataset, Failure> {
    let data = load_dataset(path, input.threshold, input.polarity.into())?;
    Ok(data.normalized(size, size)?)
}

fn eval(a: EvalArgs) -> Result<(), Failure> {
    let feature = FeatureKind::parse(&a.feature, &a.params)?;
    let train = load_normalized(&a.train, a.size, &a.input_args)?;
    let test = load_normalized(&a.test, a.size, &a.input_args)?;
    let classifier = match a.classifier {
        ClassifierArg::Knn => ClassifierConfig::Knn { k: a.k },
        ClassifierArg::Pnn => ClassifierConfig::Pnn { spread: a.spread },
        ClassifierArg::Fbpn => ClassifierConfig::Fbpn(FbpnConfig {
            hidden: a.hidden,
            seed: a.seed,
            ..FbpnConfig::default()
        }),
    };
    let cell = evaluate(&train, &test, &feature, &classifier)?;
    println!(
        "{} {} {} {} accuracy {:.2}",
        feature.name(),
        feature.params(),
        classifier.name(),
        classifier.params(),
        cell.accuracy
    );
    let m = &cell.confusion;
    for t in 0..m.classes() {
        let row: Vec<String> = (0..m.classes()).map(|p| format!("{:>5}", m.get(t, p))).collect();
        println!("{}", row.join(""));
    }
    if let Some(path) = &a.save_model {
        let classes = train.class_count.max(test.class_count);
        let matrix = FeatureMatrix::new(extract_all(&train, &feature)?, train.labels(), classes)?;
        let model = match &classifier {
            ClassifierConfig::Knn { k } => {
                let metric = if matrix.is_binary() { Metric::Hamming } else { Metric::Euclidean };
                Model::Knn(KnnModel::new(matrix, *k, metric)?)
            }
            ClassifierConfig::Pnn { spread } => Model::Pnn(pnn_train(matrix, *spread)?),
            ClassifierConfig::Fbpn(cfg) => Model::Fbpn(fbpn_train(&matrix, cfg)?),
        };
        write_file(path, &model.to_text())?;
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<(), Failure> {
    let images: Vec<BinaryImage> = match &a.input {
        Some(path) => load_normalized(path, a.size, &a.input_args)?
            .samples
            .into_iter()
            .map(|s| s.image)
            .collect(),
        None => {
            let cfg = SynthConfig {
                per_class: 100,
                size: a.size,
                ..SynthConfig::default()
            };
            synth_generate(&builtin_templates(), &cfg)?
                .samples
                .into_iter()
                .map(|s| s.image)
                .collect()
        }
    };
    let report = bench_extractors(&images, a.reps)?;
    print!("{}", report.to_text());
    Ok(())
}
