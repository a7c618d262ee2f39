//! Command-line front end for the multi-modal feature extraction
//! library: fit models, rank and select features, project samples into
//! the latent space, generate synthetic benchmarks, and score every
//! pipeline on a held-out split.
//!
//! Every command is a pure function of its flags, its seed, and its
//! input files, so rerunning a command reproduces its artifacts byte for
//! byte. Exit code 0 means success (for `fit`: the stopping rule fired),
//! 2 means `fit` ran out of sweeps (the model is still written), and 1
//! means any other failure, reported as a single line on stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Axis;

use lm3fe::baseline::{self, ConcatProblem, ReferencePipeline};
use lm3fe::eval::{self, EvalReport, FeatureRanking, Predictions};
use lm3fe::io::{self, DatasetManifest};
use lm3fe::synth::{generate_synthetic, SynthConfig};
use lm3fe::{LabelEncoding, Model, MultiModalDataset, SolverConfig};

/// Exit code when `fit` exhausts its sweep budget before converging.
const BUDGET_EXHAUSTED: u8 = 2;

#[derive(Parser)]
#[command(name = "lm3fe", version, about = "Multi-modal multi-task feature extraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit extraction matrices, a prediction matrix, and modality weights.
    Fit(FitArgs),
    /// Rank features by a fitted model and write a reduced dataset.
    Select(SelectArgs),
    /// Project every sample into the fitted latent space.
    Transform(TransformArgs),
    /// Score a pipeline on a deterministic train/test split.
    Eval(EvalArgs),
    /// Generate a synthetic benchmark with planted informative features.
    Synth(SynthArgs),
    /// Fit a single-matrix baseline or run a reference pipeline.
    Baseline(BaselineArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Dataset manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,
    /// Ridge weight on the prediction matrix.
    #[arg(long)]
    gamma_a: f64,
    /// Row-sparsity weight on the extraction matrices.
    #[arg(long)]
    gamma_b: f64,
    /// Ridge weight on the modality weights.
    #[arg(long)]
    gamma_c: f64,
    /// Smoothing parameter of the hinge loss.
    #[arg(long, default_value_t = 5.0)]
    sigma: f64,
    /// Relative-improvement stopping threshold.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Latent dimension; defaults to the number of tasks.
    #[arg(long)]
    latent_dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Outer sweep budget.
    #[arg(long, default_value_t = 50)]
    max_outer: usize,
    /// Iteration budget of each inner solver.
    #[arg(long, default_value_t = 500)]
    max_inner: usize,
    /// Directory for model.json and trace.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Fitted model (model.json from `fit`).
    #[arg(long)]
    model: PathBuf,
    /// Kept fraction per modality, comma separated; a single value
    /// applies to every modality.
    #[arg(long)]
    fractions: String,
    /// Directory for ranking.csv and the reduced dataset.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Directory for transformed.csv (samples as rows).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalMode {
    /// Nearest neighbor on the raw concatenated features.
    Knn,
    /// Nearest neighbor on the model-selected features.
    Select,
    /// Nearest neighbor on the latent projection.
    Transform,
    /// Rank test samples by the model's decision values.
    Scores,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum)]
    mode: EvalMode,
    /// Fitted model; required by every mode except `knn`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Kept fraction per modality (mode `select` only).
    #[arg(long)]
    fractions: Option<String>,
    /// Share of samples held out for testing.
    #[arg(long, default_value_t = 0.25)]
    test_fraction: f64,
    /// Seed of the train/test shuffle.
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// Directory for report.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Feature count per modality, comma separated.
    #[arg(long)]
    dims: String,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    classes: usize,
    /// Informative feature rows per modality.
    #[arg(long)]
    informative: usize,
    /// Noise on the informative rows.
    #[arg(long, default_value_t = 0.5)]
    noise: f64,
    /// Scale of the class means.
    #[arg(long, default_value_t = 1.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the dataset files, manifest.json, and truth.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaselineMethod {
    /// Row-sparse least squares on the concatenated features.
    Mtfs,
    /// Row-sparse robust regression on the concatenated features.
    Rfs,
    /// Nearest neighbor on the concatenated features.
    Cat,
    /// Nearest neighbor on the best single modality.
    Bsf,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum)]
    method: BaselineMethod,
    /// Regularization weight (mtfs/rfs only).
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    /// Kept fraction of the concatenated features (mtfs/rfs only).
    #[arg(long, default_value_t = 0.3)]
    fraction: f64,
    /// Reweighting sweep budget (mtfs/rfs only).
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Relative objective-change stopping threshold (mtfs/rfs only).
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 0.25)]
    test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// Directory for report.json (and ranking.csv for mtfs/rfs).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors exit 1 (2 is reserved for budget exhaustion);
            // --help and --version print to stdout and exit 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    init_threads()?;
    match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Select(args) => cmd_select(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Baseline(args) => cmd_baseline(args),
    }
}

/// Cap the worker pool when LM3FE_THREADS is set.
fn init_threads() -> Result<()> {
    let raw = match std::env::var("LM3FE_THREADS") {
        Ok(raw) => raw,
        Err(_) => return Ok(()),
    };
    let threads: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("LM3FE_THREADS={:?} is not a thread count", raw))?;
    if threads == 0 {
        bail!("LM3FE_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("initializing the thread pool")?;
    Ok(())
}

fn ensure_out_dir(out: &PathBuf) -> Result<()> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))
}

/// A comma-separated fraction list; one value broadcasts to all
/// modalities.
fn parse_fractions(raw: &str, n_modalities: usize) -> Result<Vec<f64>> {
    let parts = raw
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("cannot parse fraction {:?}", s.trim()))
        })
        .collect::<Result<Vec<f64>>>()?;
    if parts.len() == 1 {
        Ok(vec![parts[0]; n_modalities])
    } else if parts.len() == n_modalities {
        Ok(parts)
    } else {
        bail!("{} fractions for {} modalities", parts.len(), n_modalities)
    }
}

fn load_model_for(data: &MultiModalDataset, path: &PathBuf) -> Result<Model> {
    let model = io::read_model(path)?;
    model.validate_against(data)?;
    Ok(model)
}

fn cmd_fit(args: FitArgs) -> Result<u8> {
    let data = io::load_dataset(&args.manifest)?;
    let mut config = SolverConfig::new(args.gamma_a, args.gamma_b, args.gamma_c);
    config.sigma = args.sigma;
    config.epsilon = args.epsilon;
    config.latent_dim = args.latent_dim;
    config.rng_seed = args.seed;
    config.max_outer_iters = args.max_outer;
    config.max_inner_iters = args.max_inner;

    let (model, trace) = lm3fe::fit(&data, &config)?;

    ensure_out_dir(&args.out)?;
    io::write_model(args.out.join("model.json"), &model)?;
    io::write_json(args.out.join("trace.json"), &trace)?;

    for v in &trace.monotonicity_violations {
        eprintln!(
            "warning: sweep {}, {} stage raised the objective from {} to {}",
            v.sweep, v.stage, v.before, v.after
        );
    }
    let objective = trace.outer.last().map(|o| o.total).unwrap_or(f64::NAN);
    println!(
        "sweeps={} converged={} objective={}",
        trace.sweeps.len(),
        trace.converged,
        objective
    );
    Ok(if trace.converged { 0 } else { BUDGET_EXHAUSTED })
}

fn cmd_select(args: SelectArgs) -> Result<u8> {
    let source: DatasetManifest = io::read_json(&args.manifest)?;
    let data = io::load_dataset(&args.manifest)?;
    let model = load_model_for(&data, &args.model)?;
    let fractions = parse_fractions(&args.fractions, data.n_modalities())?;
    let ranking = eval::rank_features(&model);
    let kept = eval::select_indices(&ranking, &fractions)?;
    let selected = eval::extract_selected(&data, &kept)?;

    ensure_out_dir(&args.out)?;
    io::write_ranking_csv(args.out.join("ranking.csv"), &ranking)?;
    io::write_matrix_csv(args.out.join("selected.csv"), selected.view())?;
    io::write_matrix_csv(args.out.join("labels.csv"), data.labels())?;
    // The reduced dataset is a single already-normalized modality; keep
    // the source's normalization, which is idempotent on its own output.
    let manifest = DatasetManifest {
        modalities: vec![PathBuf::from("selected.csv")],
        labels: PathBuf::from("labels.csv"),
        encoding: LabelEncoding::PlusMinusOne,
        normalization: source.normalization,
    };
    io::write_manifest(args.out.join("manifest.json"), &manifest)?;

    let total: usize = data.modality_dims().iter().sum();
    println!(
        "kept {} of {} features -> selected.csv, ranking.csv, manifest.json",
        selected.nrows(),
        total
    );
    Ok(0)
}

fn cmd_transform(args: TransformArgs) -> Result<u8> {
    let data = io::load_dataset(&args.manifest)?;
    let model = load_model_for(&data, &args.model)?;
    let transformed = eval::transform_features(&data, &model)?;
    ensure_out_dir(&args.out)?;
    io::write_matrix_csv(args.out.join("transformed.csv"), transformed.view())?;
    println!(
        "projected {} samples into {} dimensions -> transformed.csv",
        transformed.nrows(),
        transformed.ncols()
    );
    Ok(0)
}

fn cmd_eval(args: EvalArgs) -> Result<u8> {
    let data = io::load_dataset(&args.manifest)?;
    let (train_idx, test_idx) =
        eval::train_test_split(data.n_samples(), args.test_fraction, args.split_seed)?;
    let train = data.subset(&train_idx)?;
    let test = data.subset(&test_idx)?;
    let train_classes = eval::single_label_classes(train.labels())?;
    let test_classes = eval::single_label_classes(test.labels())?;
    let n_classes = if data.n_tasks() == 1 { 2 } else { data.n_tasks() };

    let predictions = match args.mode {
        EvalMode::Knn => {
            let train_x = train.concat_features();
            let test_x = test.concat_features();
            Predictions::Labels(eval::knn_classify(
                train_x.t(),
                &train_classes,
                test_x.t(),
            )?)
        }
        EvalMode::Select => {
            let model_path = args.model.as_ref().context("mode select needs --model")?;
            let model = load_model_for(&data, model_path)?;
            let raw = args
                .fractions
                .as_deref()
                .context("mode select needs --fractions")?;
            let fractions = parse_fractions(raw, data.n_modalities())?;
            let ranking = eval::rank_features(&model);
            let kept = eval::select_indices(&ranking, &fractions)?;
            let train_x = eval::extract_selected(&train, &kept)?;
            let test_x = eval::extract_selected(&test, &kept)?;
            Predictions::Labels(eval::knn_classify(
                train_x.t(),
                &train_classes,
                test_x.t(),
            )?)
        }
        EvalMode::Transform => {
            let model_path = args.model.as_ref().context("mode transform needs --model")?;
            let model = load_model_for(&data, model_path)?;
            let train_x = eval::transform_features(&train, &model)?;
            let test_x = eval::transform_features(&test, &model)?;
            Predictions::Labels(eval::knn_classify(
                train_x.view(),
                &train_classes,
                test_x.view(),
            )?)
        }
        EvalMode::Scores => {
            let model_path = args.model.as_ref().context("mode scores needs --model")?;
            let model = load_model_for(&data, model_path)?;
            if data.n_tasks() < 2 {
                bail!("mode scores needs at least two tasks");
            }
            Predictions::Scores(model.scores(&test))
        }
    };

    let metrics = eval::compute_metrics(&predictions, &test_classes, n_classes)?;
    let report = EvalReport::from_metrics(metrics, train_idx.len(), test_idx.len());
    ensure_out_dir(&args.out)?;
    io::write_json(args.out.join("report.json"), &report)?;
    print_report(&report);
    Ok(0)
}

fn cmd_synth(args: SynthArgs) -> Result<u8> {
    let dims = args
        .dims
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .with_context(|| format!("cannot parse dimension {:?}", s.trim()))
        })
        .collect::<Result<Vec<usize>>>()?;
    let config = SynthConfig {
        modality_dims: dims,
        n_samples: args.samples,
        n_classes: args.classes,
        n_informative: args.informative,
        noise_level: args.noise,
        mean_separation: args.separation,
        seed: args.seed,
    };
    let (data, truth) = generate_synthetic(&config)?;

    ensure_out_dir(&args.out)?;
    let mut modality_files = Vec::with_capacity(data.n_modalities());
    for (v, features) in data.modalities().iter().enumerate() {
        let name = format!("x{}.csv", v);
        io::write_matrix_csv(args.out.join(&name), features.view())?;
        modality_files.push(PathBuf::from(name));
    }
    io::write_matrix_csv(args.out.join("labels.csv"), data.labels())?;
    let manifest = DatasetManifest {
        modalities: modality_files,
        labels: PathBuf::from("labels.csv"),
        encoding: LabelEncoding::PlusMinusOne,
        normalization: Default::default(),
    };
    io::write_manifest(args.out.join("manifest.json"), &manifest)?;
    io::write_json(args.out.join("truth.json"), &truth)?;
    println!(
        "wrote {} modalities x {} samples -> manifest.json, truth.json",
        data.n_modalities(),
        data.n_samples()
    );
    Ok(0)
}

fn cmd_baseline(args: BaselineArgs) -> Result<u8> {
    let data = io::load_dataset(&args.manifest)?;
    let (train_idx, test_idx) =
        eval::train_test_split(data.n_samples(), args.test_fraction, args.split_seed)?;
    let train = data.subset(&train_idx)?;
    let test = data.subset(&test_idx)?;
    let train_classes = eval::single_label_classes(train.labels())?;
    let test_classes = eval::single_label_classes(test.labels())?;
    let n_classes = if data.n_tasks() == 1 { 2 } else { data.n_tasks() };
    ensure_out_dir(&args.out)?;

    let predictions = match args.method {
        BaselineMethod::Mtfs | BaselineMethod::Rfs => {
            let problem = ConcatProblem::from_dataset(&train, args.gamma)?;
            let solver = match args.method {
                BaselineMethod::Mtfs => baseline::solve_mtfs,
                _ => baseline::solve_rfs,
            };
            let fit = solver(&problem, args.max_iters, args.tol, 1e-12)?;
            println!(
                "converged={} sweeps={} ridge_bumps={}",
                fit.converged,
                fit.objective_trace.len(),
                fit.ridge_bumps
            );
            let ranking = FeatureRanking {
                modalities: vec![eval::rank_rows_by_norm(fit.feature_rows())],
            };
            io::write_ranking_csv(args.out.join("ranking.csv"), &ranking)?;
            let kept = eval::select_indices(&ranking, &[args.fraction])?;
            let train_x = train.concat_features().select(Axis(0), &kept[0]);
            let test_x = test.concat_features().select(Axis(0), &kept[0]);
            Predictions::Labels(eval::knn_classify(
                train_x.t(),
                &train_classes,
                test_x.t(),
            )?)
        }
        BaselineMethod::Cat | BaselineMethod::Bsf => {
            let pipeline = match args.method {
                BaselineMethod::Cat => ReferencePipeline::Concatenation,
                _ => ReferencePipeline::BestSingleModality,
            };
            let run = baseline::run_reference(&train, &test, pipeline)?;
            if let Some(v) = run.chosen_modality {
                println!("chosen_modality={}", v);
            }
            Predictions::Labels(run.predictions)
        }
    };

    let metrics = eval::compute_metrics(&predictions, &test_classes, n_classes)?;
    let report = EvalReport::from_metrics(metrics, train_idx.len(), test_idx.len());
    io::write_json(args.out.join("report.json"), &report)?;
    print_report(&report);
    Ok(0)
}

fn print_report(report: &EvalReport) {
    match report.mean_average_precision {
        Some(map) => println!(
            "accuracy={} macro_f1={} map={}",
            report.accuracy, report.macro_f1, map
        ),
        None => println!("accuracy={} macro_f1={}", report.accuracy, report.macro_f1),
    }
}
