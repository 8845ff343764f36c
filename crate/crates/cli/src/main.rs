//! `semg`: synthesize datasets, extract features, train classifiers and run
//! the benchmark grid from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use semg_core::classify::{ModelKind, Pipeline};
use semg_core::eval::{
    metrics, prepare_features, read_bundle, render_csv, render_table, run_benchmark, stratified_split,
    write_bundle, BenchConfig, ConfusionMatrix, DatasetConfig, SplitMode,
};
use semg_core::features::{FeatureFamily, FeatureMatrix};
use semg_core::signal::{write_dataset, SyntheticSpec};

const VERSION_LINE: &str = concat!("# written by semg ", env!("CARGO_PKG_VERSION"), "\n");

#[derive(Parser)]
#[command(name = "semg", version, about = "sEMG gesture recognition with classical descriptors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic multi-channel dataset as canonical CSV plus manifest.
    Synth(SynthArgs),
    /// Filter, window and extract one feature family into a CSV matrix.
    Extract(ExtractArgs),
    /// Fit one classifier and save it as JSON.
    Train(TrainArgs),
    /// Run the family x classifier grid and write a report bundle.
    Bench(BenchArgs),
    /// Print the table of an existing report bundle.
    Report(ReportArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 8)]
    classes: usize,
    #[arg(long, default_value_t = 8)]
    channels: usize,
    #[arg(long, default_value_t = 2048.0)]
    fs: f64,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value_t = 10.0)]
    seconds: f64,
    #[arg(long, env = "EMG_SEED", default_value_t = 7)]
    seed: u64,
    /// Write into a non-empty output directory.
    #[arg(long)]
    force: bool,
}

/// Dataset selection plus every pipeline hyperparameter. Flags override the
/// values read from `--config`.
#[derive(Args)]
struct PipelineArgs {
    /// TOML benchmark config; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSON manifest of the dataset.
    #[arg(long, conflicts_with = "synthetic")]
    manifest: Option<PathBuf>,
    /// Use the default synthetic dataset, seeded by --seed.
    #[arg(long)]
    synthetic: bool,
    #[arg(long, env = "EMG_SEED")]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores. Results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    test_fraction: Option<f64>,
    /// `window` or `subject`.
    #[arg(long, value_parser = parse_split_mode)]
    split_mode: Option<SplitMode>,
    #[arg(long)]
    low_hz: Option<f64>,
    #[arg(long)]
    high_hz: Option<f64>,
    #[arg(long)]
    filter_order: Option<usize>,
    #[arg(long)]
    window_ms: Option<f64>,
    #[arg(long)]
    overlap: Option<f64>,
    #[arg(long)]
    tdd_k: Option<f64>,
    #[arg(long)]
    wavelet_levels: Option<usize>,
    #[arg(long)]
    knn_k: Option<usize>,
    #[arg(long)]
    svm_c: Option<f64>,
    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    bagging_estimators: Option<usize>,
    #[arg(long)]
    boost_rounds: Option<usize>,
    #[arg(long)]
    boost_trees: Option<usize>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long, value_parser = parse_family)]
    family: FeatureFamily,
    /// Feature CSV to write; the resolved config goes next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Train from a feature CSV written by `extract` instead of a dataset.
    #[arg(long, conflicts_with_all = ["manifest", "synthetic"])]
    features: Option<PathBuf>,
    #[arg(long, value_parser = parse_family, default_value = "ftdd")]
    family: FeatureFamily,
    #[arg(long, value_parser = parse_model)]
    model: ModelKind,
    /// Model JSON to write; the resolved config goes next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Comma-separated feature families.
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    families: Option<Vec<FeatureFamily>>,
    /// Comma-separated classifiers.
    #[arg(long, value_delimiter = ',', value_parser = parse_model)]
    models: Option<Vec<ModelKind>>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// A bundle directory written by `bench`.
    dir: PathBuf,
    #[arg(long)]
    csv: bool,
}

fn parse_family(s: &str) -> Result<FeatureFamily, String> {
    s.parse().map_err(|e: semg_core::Error| e.to_string())
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: semg_core::Error| e.to_string())
}

fn parse_split_mode(s: &str) -> Result<SplitMode, String> {
    match s {
        "window" => Ok(SplitMode::Window),
        "subject" => Ok(SplitMode::Subject),
        other => Err(format!("unknown split mode `{other}` (expected window or subject)")),
    }
}

/// Failures that map to exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

impl PipelineArgs {
    fn resolve(&self) -> anyhow::Result<BenchConfig> {
        let mut cfg = match &self.config {
            Some(p) => BenchConfig::from_file(p).map_err(|e| usage(e.to_string()))?,
            None => BenchConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = &self.manifest {
            cfg.dataset = DatasetConfig {
                manifest: Some(m.clone()),
                synthetic: None,
            };
        } else if self.synthetic {
            cfg.dataset = DatasetConfig {
                manifest: None,
                synthetic: Some(SyntheticSpec {
                    seed: cfg.seed,
                    ..SyntheticSpec::default()
                }),
            };
        }
        macro_rules! set {
            ($flag:ident => $($target:tt)+) => {
                if let Some(v) = self.$flag {
                    cfg.$($target)+ = v;
                }
            };
        }
        set!(jobs => jobs);
        set!(test_fraction => test_fraction);
        set!(split_mode => split_mode);
        set!(low_hz => bandpass.low_hz);
        set!(high_hz => bandpass.high_hz);
        set!(filter_order => bandpass.order);
        set!(window_ms => window.window_ms);
        set!(overlap => window.overlap);
        set!(tdd_k => features.tdd.k);
        set!(wavelet_levels => features.wavelet_levels);
        set!(knn_k => classifiers.knn_k);
        set!(svm_c => classifiers.svm.c);
        set!(n_trees => classifiers.forest.n_trees);
        set!(bagging_estimators => classifiers.bagging_estimators);
        set!(boost_rounds => classifiers.boost_rounds);
        set!(boost_trees => classifiers.boost_trees);
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        if let Some(m) = &cfg.dataset.manifest {
            if !m.exists() {
                return Err(usage(format!("dataset manifest {} does not exist", m.display())));
            }
        }
        Ok(cfg)
    }

    /// Like [`PipelineArgs::resolve`], but a dataset is optional when the
    /// input is a feature CSV.
    fn resolve_for_features(&self, from_csv: bool) -> anyhow::Result<BenchConfig> {
        let cfg = self.resolve()?;
        if !from_csv && cfg.dataset.manifest.is_none() && cfg.dataset.synthetic.is_none() {
            return Err(usage("no dataset given (use --manifest, --synthetic, --config or --features)"));
        }
        Ok(cfg)
    }
}

fn ensure_dir(dir: &Path, force: bool) -> anyhow::Result<()> {
    if dir.is_file() {
        return Err(usage(format!("{} is a file, expected a directory", dir.display())));
    }
    let non_empty = fs::read_dir(dir).map(|mut d| d.next().is_some()).unwrap_or(false);
    if non_empty && !force {
        return Err(usage(format!(
            "output directory {} is not empty (use --force to write into it)",
            dir.display()
        )));
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn ensure_file(path: &Path, force: bool) -> anyhow::Result<()> {
    if path.exists() && !force {
        return Err(usage(format!("{} already exists (use --force to overwrite)", path.display())));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("config.toml")
}

fn write_config(path: &Path, cfg: &BenchConfig) -> anyhow::Result<()> {
    let text = format!("{VERSION_LINE}{}", cfg.to_toml()?);
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn synth(args: &SynthArgs) -> anyhow::Result<ExitCode> {
    let spec = SyntheticSpec {
        n_classes: args.classes,
        n_channels: args.channels,
        fs: args.fs,
        trials_per_class: args.trials,
        trial_seconds: args.seconds,
        seed: args.seed,
    };
    let records = spec.generate().map_err(|e| usage(e.to_string()))?;
    ensure_dir(&args.out, args.force)?;
    let manifest = write_dataset(&args.out, &records, &spec.class_names())?;
    #[derive(serde::Serialize)]
    struct Resolved<'a> {
        synthetic: &'a SyntheticSpec,
    }
    let text = format!("{VERSION_LINE}{}", toml::to_string(&Resolved { synthetic: &spec })?);
    fs::write(args.out.join("config.resolved.toml"), text)?;
    println!("wrote {} records to {}", records.len(), manifest.display());
    Ok(ExitCode::SUCCESS)
}

/// Runs the front of the pipeline for one family and returns the full
/// matrix along with the train/test row indices.
fn single_family(cfg: &mut BenchConfig, family: FeatureFamily) -> anyhow::Result<(FeatureMatrix, Vec<usize>, Vec<usize>)> {
    cfg.families = vec![family];
    let prepared = prepare_features(cfg)?;
    let fam = prepared
        .families
        .into_iter()
        .next()
        .ok_or_else(|| anyhow!("no feature family extracted"))?;
    Ok((fam.matrix?, prepared.train, prepared.test))
}

fn extract(args: &ExtractArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = args.pipeline.resolve_for_features(false)?;
    ensure_file(&args.out, args.force)?;
    let (matrix, _, _) = single_family(&mut cfg, args.family)?;
    matrix.write_csv(&args.out)?;
    write_config(&sidecar(&args.out), &cfg)?;
    println!(
        "wrote {} windows x {} features to {}",
        matrix.n_rows(),
        matrix.n_features(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn train(args: &TrainArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = args.pipeline.resolve_for_features(args.features.is_some())?;
    cfg.models = vec![args.model];
    ensure_file(&args.out, args.force)?;
    let (matrix, train_idx, test_idx) = match &args.features {
        Some(path) => {
            let m = FeatureMatrix::read_csv(path)?;
            let (tr, te) = stratified_split(&m.labels, cfg.test_fraction, semg_core::eval::cell_seed(cfg.seed, "split"))?;
            (m, tr, te)
        }
        None => single_family(&mut cfg, args.family)?,
    };
    let train = matrix.select(&train_idx);
    let test = matrix.select(&test_idx);
    let seed = semg_core::eval::cell_seed(cfg.seed, &format!("{}_{}", args.family, args.model));
    let pipeline = Pipeline::fit(args.model, &train, &cfg.classifiers, seed)?;
    let pred = pipeline.predict(&test.values)?;
    let names: Vec<String> = (0..matrix.n_classes()).map(|c| format!("class_{c}")).collect();
    let cm = ConfusionMatrix::from_predictions(&test.labels, &pred, &names)?;
    let m = metrics(&cm)?;
    fs::write(&args.out, pipeline.to_json()?).with_context(|| format!("writing {}", args.out.display()))?;
    write_config(&sidecar(&args.out), &cfg)?;
    println!(
        "{} on {}: held-out accuracy {:.2}% ({} train / {} test), model written to {}",
        args.model.display_name(),
        args.family.title(),
        100.0 * m.accuracy,
        train.n_rows(),
        test.n_rows(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn bench(args: &BenchArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = args.pipeline.resolve_for_features(false)?;
    if let Some(f) = &args.families {
        cfg.families = f.clone();
    }
    if let Some(m) = &args.models {
        cfg.models = m.clone();
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    ensure_dir(&args.out, args.force)?;
    let result = run_benchmark(&cfg)?;
    write_bundle(&args.out, &result, &cfg)?;
    print!("{}", render_table(&result.reports));
    let failed: Vec<_> = result.reports.iter().filter(|r| !r.is_ok()).collect();
    for r in &failed {
        eprintln!("cell {} failed: {}", r.cell_id, r.error.as_deref().unwrap_or("unknown error"));
    }
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn report(args: &ReportArgs) -> anyhow::Result<ExitCode> {
    if !args.dir.join("cells").is_dir() {
        bail!(usage(format!("{} is not a report bundle", args.dir.display())));
    }
    let reports = read_bundle(&args.dir)?;
    if args.csv {
        print!("{}", render_csv(&reports));
    } else {
        print!("{}", render_table(&reports));
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<semg_core::Error>() {
        Some(
            semg_core::Error::Training(_)
            | semg_core::Error::SingleClass
            | semg_core::Error::Eval(_)
            | semg_core::Error::Feature(_),
        ) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a),
        Command::Bench(a) => bench(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
