//! Batch pipeline driver: synthesize scenarios, derive GPS context labels,
//! segment streams into windows and walking bouts, extract DMO tables, and
//! run cross-validated classification campaigns. Commands communicate
//! through CSV files in a shared data directory.

mod config;
mod data;
mod render;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gaitctx::context::{
    detect_staypoints, label_stream, read_gps_csv, read_label_csv, write_label_csv,
};
use gaitctx::dmo::{
    aggregate_window_dmos, extract_basic_dmos, import_dmo_table, write_dmo_csv,
    write_window_dmo_csv, StepDetectionConfig,
};
use gaitctx::eval::{
    make_custom_folds, make_loso_folds, make_stratified_folds, run_campaign, MetricsReport,
    ModelSpec, Normalization,
};
use gaitctx::pipeline::{
    count_artifacts, segment_subject, Channel, LengthHandling, PipelineConfig,
};
use gaitctx::segmentation::{
    chunk_windows, import_bout_annotations, read_window_label_csv, write_bout_csv,
    write_window_label_csv, GaitHeuristicConfig,
};
use gaitctx::signal::{read_imu_csv, vertical_channel, write_imu_csv, Axis};
use gaitctx::synth::{generate_scenario, write_truth_csv, ScenarioConfig};
use gaitctx::tabular::{default_alpha_grid, LogisticConfig};
use gaitctx::tsc::{MiniRocketConfig, SymbolicLinearConfig};

use config::{DatasetKind, FoldSpec, ModelKind, RunConfig};

#[derive(Parser)]
#[command(
    name = "gaitctx",
    about = "Indoor/outdoor context detection experiments on IMU gait recordings",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic scenario (IMU + GPS + ground truth).
    Synth(SynthArgs),
    /// Turn a GPS track into a 1 Hz indoor-probability stream.
    Label(LabelArgs),
    /// Chunk a stream into labeled windows and walking bouts.
    Segment(SegmentArgs),
    /// Extract bout-level DMOs and their per-window aggregation.
    Dmo(DmoArgs),
    /// Run one cross-validated classification campaign.
    TrainEval(TrainEvalArgs),
    /// Render one or more report JSON files as an aligned table.
    Report(ReportArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory (also via GAITCTX_OUT).
    #[arg(long, env = "GAITCTX_OUT")]
    out: PathBuf,
    #[arg(long, default_value_t = 9)]
    subjects: usize,
    /// Observation length per subject, seconds.
    #[arg(long, default_value_t = 1800)]
    duration: u32,
    /// Target outdoor fraction applied to every subject.
    #[arg(long, default_value_t = 0.25)]
    outdoor_fraction: f64,
    /// Use the skewed 9-subject cohort preset instead of a uniform fraction.
    #[arg(long)]
    cohort: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    gps: PathBuf,
    #[arg(long)]
    subject: String,
    #[arg(long, env = "GAITCTX_OUT")]
    out: PathBuf,
    #[arg(long, default_value_t = 50.0)]
    dist: f64,
    #[arg(long, default_value_t = 300.0)]
    time: f64,
    #[arg(long, default_value_t = 60.0)]
    gap: f64,
    #[arg(long, default_value_t = 50.0)]
    proximity: f64,
    /// First labeled second (epoch seconds).
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    /// Labeled span in seconds; inferred from the track when omitted.
    #[arg(long)]
    duration: Option<usize>,
}

#[derive(Args)]
struct SegmentArgs {
    #[arg(long)]
    imu: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    subject: String,
    #[arg(long, env = "GAITCTX_OUT")]
    out: PathBuf,
    /// Window length in seconds.
    #[arg(long, default_value_t = 60)]
    window: usize,
    /// Axis carrying the vertical acceleration (depends on mounting).
    #[arg(long, default_value = "y")]
    axis: String,
    #[arg(long, default_value_t = 2)]
    min_bout_epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    energy_min: f64,
    #[arg(long, default_value_t = 0.5)]
    f_min: f64,
    #[arg(long, default_value_t = 3.0)]
    f_max: f64,
    #[arg(long, default_value_t = 0.4)]
    periodicity_min: f64,
}

#[derive(Args)]
struct DmoArgs {
    #[arg(long)]
    imu: PathBuf,
    #[arg(long)]
    windows: PathBuf,
    #[arg(long)]
    bouts: PathBuf,
    #[arg(long)]
    subject: String,
    #[arg(long, env = "GAITCTX_OUT")]
    out: PathBuf,
    #[arg(long, default_value_t = 60)]
    window: usize,
    #[arg(long, default_value = "y")]
    axis: String,
    /// Ingest a precomputed bout DMO table instead of the native extractor.
    #[arg(long)]
    import: Option<PathBuf>,
}

#[derive(Args)]
struct TrainEvalArgs {
    /// Data directory produced by segment/dmo.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    channel: Option<String>,
    #[arg(long)]
    length: Option<String>,
    #[arg(long)]
    normalize: Option<String>,
    /// stratified[:k], loso, or custom:FILE.
    #[arg(long)]
    folds: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    axis: Option<String>,
    #[arg(long)]
    kernels: Option<usize>,
    #[arg(long)]
    knn_k: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    top_k_words: Option<usize>,
    /// Bound on worker threads for the internal parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    /// Flat key=value config file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report JSON path; a rendered .txt table is written beside it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Report JSON files to render together.
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Label(args) => cmd_label(args),
        Command::Segment(args) => cmd_segment(args),
        Command::Dmo(args) => cmd_dmo(args),
        Command::TrainEval(args) => cmd_train_eval(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let cfg = if args.cohort {
        let mut cfg = ScenarioConfig::table_shaped(args.duration, args.seed);
        cfg.n_subjects = 9;
        cfg
    } else {
        ScenarioConfig::uniform(args.subjects, args.duration, args.outdoor_fraction, args.seed)
    };
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let scenario = generate_scenario(&cfg)?;
    for subject in &scenario {
        let id = &subject.stream.subject_id;
        write_imu_csv(args.out.join(format!("imu_{id}.csv")), &subject.stream)?;
        gaitctx::context::write_gps_csv(args.out.join(format!("gps_{id}.csv")), &subject.gps)?;
        write_truth_csv(args.out.join(format!("truth_{id}.csv")), &subject.truth)?;
    }
    std::fs::write(
        args.out.join("scenario.json"),
        serde_json::to_string_pretty(&cfg)?,
    )?;
    println!(
        "wrote {} subjects x {} s to {}",
        scenario.len(),
        args.duration,
        args.out.display()
    );
    Ok(())
}

fn cmd_label(args: LabelArgs) -> Result<()> {
    let track = read_gps_csv(&args.gps, &args.subject)?;
    let duration = match args.duration {
        Some(d) => d,
        None => {
            let last = track
                .points
                .last()
                .context("GPS track is empty; pass an explicit --duration")?;
            (last.t - args.t0).ceil() as usize + 1
        }
    };
    let staypoints = detect_staypoints(&track, args.dist, args.time, args.gap)?;
    let labels = label_stream(&track, &staypoints, args.proximity, args.t0, duration)?;
    std::fs::create_dir_all(&args.out)?;
    let path = args.out.join(format!("labels_{}.csv", args.subject));
    write_label_csv(&path, &labels)?;
    let indoor = labels.probs.iter().filter(|&&p| p == 1.0).count();
    println!(
        "{}: {} staypoints, {}/{} indoor seconds -> {}",
        args.subject,
        staypoints.len(),
        indoor,
        labels.probs.len(),
        path.display()
    );
    Ok(())
}

fn cmd_segment(args: SegmentArgs) -> Result<()> {
    let axis: Axis = args.axis.parse()?;
    let stream = read_imu_csv(&args.imu, &args.subject)?;
    let labels = read_label_csv(&args.labels, &args.subject)?;
    let cfg = PipelineConfig {
        window_len_s: args.window,
        vertical_axis: axis,
        gait: GaitHeuristicConfig {
            energy_min: args.energy_min,
            f_min: args.f_min,
            f_max: args.f_max,
            periodicity_min: args.periodicity_min,
        },
        min_bout_epochs: args.min_bout_epochs,
        step: StepDetectionConfig::default(),
    };
    let artifacts = segment_subject(stream, &labels, &cfg)?;
    std::fs::create_dir_all(&args.out)?;
    write_window_label_csv(
        args.out.join(format!("windows_{}.csv", args.subject)),
        &artifacts.windows,
    )?;
    write_bout_csv(
        args.out.join(format!("bouts_{}.csv", args.subject)),
        &artifacts.bouts,
    )?;
    let counts = count_artifacts(std::slice::from_ref(&artifacts));
    println!(
        "{}: {} windows ({} labeled: {} indoor / {} outdoor), {} DMO windows, {} labeled bouts",
        args.subject,
        counts.windows,
        counts.labeled_windows,
        counts.indoor_windows,
        counts.outdoor_windows,
        counts.dmo_windows,
        counts.labeled_bouts,
    );
    Ok(())
}

fn cmd_dmo(args: DmoArgs) -> Result<()> {
    let axis: Axis = args.axis.parse()?;
    std::fs::create_dir_all(&args.out)?;
    let bout_path = args.out.join(format!("dmo_bouts_{}.csv", args.subject));
    let window_path = args.out.join(format!("dmo_windows_{}.csv", args.subject));

    let records = if let Some(import) = &args.import {
        import_dmo_table(import)?
    } else {
        let stream = read_imu_csv(&args.imu, &args.subject)?;
        let vertical = vertical_channel(&stream, axis)?;
        let mut windows = chunk_windows(&stream, args.window);
        let rows = read_window_label_csv(&args.windows)?;
        for w in &mut windows {
            if let Some(row) = rows.iter().find(|r| r.window_index == w.index) {
                w.label = row.label;
                w.label_confidence = row.confidence;
            }
        }
        let bouts = import_bout_annotations(&windows, &args.bouts)?;
        let mut records = Vec::new();
        let mut per_window_counter = std::collections::BTreeMap::new();
        for bout in &bouts {
            let bout_index = per_window_counter
                .entry(bout.window_index)
                .and_modify(|c| *c += 1)
                .or_insert(0usize);
            let window = windows
                .iter()
                .find(|w| w.index == bout.window_index)
                .expect("import validated window references");
            let channel = window.series(&vertical)?;
            let series = bout.series(&channel, *bout_index)?;
            records.push(extract_basic_dmos(
                bout,
                &series,
                window.sample_rate_hz,
                &StepDetectionConfig::default(),
                *bout_index,
            )?);
        }
        records
    };

    write_dmo_csv(&bout_path, &records)?;

    let mut by_window: std::collections::BTreeMap<usize, Vec<gaitctx::dmo::DmoRecord>> =
        std::collections::BTreeMap::new();
    for r in &records {
        by_window.entry(r.bout.window_index).or_default().push(r.clone());
    }
    let window_dmos = by_window
        .values()
        .map(|group| aggregate_window_dmos(group))
        .collect::<gaitctx::Result<Vec<_>>>()?;
    write_window_dmo_csv(&window_path, &window_dmos)?;
    println!(
        "{}: {} bout records -> {}, {} window aggregates -> {}",
        args.subject,
        records.len(),
        bout_path.display(),
        window_dmos.len(),
        window_path.display()
    );
    Ok(())
}

fn resolve_run_config(args: &TrainEvalArgs) -> Result<RunConfig> {
    let file = match &args.config {
        Some(path) => config::read_config_file(path)?,
        None => Default::default(),
    };
    let pick = |flag: Option<String>, key: &str| -> Option<String> {
        flag.or_else(|| file.get(key).cloned())
    };

    let data_dir = args
        .data
        .as_ref()
        .map(|p| p.display().to_string())
        .or_else(|| file.get("data").cloned())
        .context("missing --data (or data= in the config file)")?;
    let dataset = DatasetKind::parse(
        &pick(args.dataset.clone(), "dataset").context("missing --dataset")?,
    )?;
    let model = ModelKind::parse(&pick(args.model.clone(), "model").context("missing --model")?)?;
    let channel = match pick(args.channel.clone(), "channel").as_deref() {
        None | Some("vertical") => Channel::Vertical,
        Some("magnitude") => Channel::Magnitude,
        Some(other) => bail!("unknown channel {other:?} (expected vertical or magnitude)"),
    };
    let length = match pick(args.length.clone(), "length").as_deref() {
        None | Some("pad") => LengthHandling::Pad,
        Some("resample") => LengthHandling::Resample,
        Some("original") => LengthHandling::Original,
        Some(other) => bail!("unknown length mode {other:?} (expected pad, resample or original)"),
    };
    let normalization = match pick(args.normalize.clone(), "normalize").as_deref() {
        None | Some("none") => Normalization::None,
        Some("zscore") => Normalization::Zscore,
        Some(other) => bail!("unknown normalization {other:?} (expected zscore or none)"),
    };
    let folds = FoldSpec::parse(&pick(args.folds.clone(), "folds").unwrap_or("stratified:5".into()))?;
    let parse_num = |value: Option<String>, key: &str| -> Result<Option<u64>> {
        value
            .map(|v| v.parse::<u64>().with_context(|| format!("bad {key}: {v:?}")))
            .transpose()
    };
    let seed = args
        .seed
        .or(parse_num(file.get("seed").cloned(), "seed")?)
        .unwrap_or(42);
    let window_len_s = args
        .window
        .or(parse_num(file.get("window").cloned(), "window")?.map(|v| v as usize))
        .unwrap_or(60);
    let axis: Axis = pick(args.axis.clone(), "axis").unwrap_or("y".into()).parse()?;
    let kernels = args
        .kernels
        .or(parse_num(file.get("kernels").cloned(), "kernels")?.map(|v| v as usize))
        .unwrap_or(10_000);
    let knn_k = args
        .knn_k
        .or(parse_num(file.get("knn-k").cloned(), "knn-k")?.map(|v| v as usize))
        .unwrap_or(5);
    let l2_strength = match args.l2 {
        Some(v) => v,
        None => file
            .get("l2")
            .map(|v| v.parse::<f64>().with_context(|| format!("bad l2: {v:?}")))
            .transpose()?
            .unwrap_or(1.0),
    };
    let max_iter = args
        .max_iter
        .or(parse_num(file.get("max-iter").cloned(), "max-iter")?.map(|v| v as usize))
        .unwrap_or(1000);
    let top_k_words = args
        .top_k_words
        .or(parse_num(file.get("top-k-words").cloned(), "top-k-words")?.map(|v| v as usize))
        .unwrap_or(10_000);

    let cfg = RunConfig {
        data_dir,
        dataset,
        model,
        channel,
        length,
        normalization,
        folds,
        seed,
        window_len_s,
        axis,
        kernels,
        knn_k,
        l2_strength,
        max_iter,
        top_k_words,
        jobs: args.jobs,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn model_spec(cfg: &RunConfig) -> ModelSpec {
    match cfg.model {
        ModelKind::Logistic => ModelSpec::Logistic(LogisticConfig {
            l2_strength: cfg.l2_strength,
            max_iter: cfg.max_iter,
            ..LogisticConfig::default()
        }),
        ModelKind::Ridge => ModelSpec::Ridge {
            alphas: default_alpha_grid(),
        },
        ModelKind::Knn => ModelSpec::Knn { k: cfg.knn_k },
        ModelKind::Gnb => ModelSpec::Gnb,
        ModelKind::Rocket => ModelSpec::Rocket {
            num_kernels: cfg.kernels,
            seed: cfg.seed,
        },
        ModelKind::MiniRocket => ModelSpec::MiniRocket(MiniRocketConfig {
            seed: cfg.seed,
            ..MiniRocketConfig::default()
        }),
        ModelKind::Dtw => ModelSpec::Knn1Dtw,
        ModelKind::Symbolic => ModelSpec::Symbolic(SymbolicLinearConfig {
            top_k_words: cfg.top_k_words,
            ..SymbolicLinearConfig::default()
        }),
    }
}

fn cmd_train_eval(args: TrainEvalArgs) -> Result<()> {
    let cfg = resolve_run_config(&args)?;
    if let Some(jobs) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("cannot configure the worker pool")?;
    }

    let dataset = data::load_dataset(&cfg)?;
    let plan = match &cfg.folds {
        FoldSpec::Stratified(k) => make_stratified_folds(dataset.labels(), *k, cfg.seed)?,
        FoldSpec::Loso => make_loso_folds(dataset.subjects(), dataset.labels())?,
        FoldSpec::Custom(path) => {
            let assignment = data::read_custom_split_csv(Path::new(path))?;
            make_custom_folds(dataset.subjects(), dataset.labels(), &assignment)?
        }
    };

    let spec = model_spec(&cfg);
    let mut report = run_campaign(&dataset, &spec, &plan, cfg.normalization, &cfg.campaign_id())?;
    // Embed the resolved run configuration so the report is reproducible
    // from its own contents.
    report.config = serde_json::json!({
        "run": cfg.to_json(),
        "model": spec,
    });

    let json = report.to_json()?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&args.out, &json)?;

    // The kernel bank is reproducible from a seeded descriptor; save it next
    // to the report so the exact transform can be rebuilt.
    if cfg.model == ModelKind::Rocket {
        if let gaitctx::eval::CampaignDataset::Series(series) = &dataset {
            let descriptor = gaitctx::tsc::RocketKernelBank::generate(
                cfg.kernels,
                series.fixed_len()?,
                cfg.seed,
            )?
            .descriptor();
            let bank_path = args.out.with_extension("bank.json");
            std::fs::write(&bank_path, serde_json::to_string_pretty(&descriptor)?)?;
        }
    }
    let table = render::render_table(std::slice::from_ref(&report));
    let table_path = args.out.with_extension("txt");
    std::fs::write(&table_path, &table)?;
    print!("{table}");
    println!("report: {} (table: {})", args.out.display(), table_path.display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let mut reports = Vec::new();
    for path in &args.inputs {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read report {}", path.display()))?;
        let report: MetricsReport = serde_json::from_str(&text)
            .with_context(|| format!("{} is not a valid report", path.display()))?;
        reports.push(report);
    }
    print!("{}", render::render_table(&reports));
    Ok(())
}
