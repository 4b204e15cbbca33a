//! `pivotsvr` — turning-point detection, oscillator regression, and the
//! buy-low/sell-high evaluation pipeline, on the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/configuration error,
//! 3 solver convergence failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pivotsvr::error::{Error, Result};
use pivotsvr::experiment::{
    aggregate, read_per_task_csv, render_report, run_experiment, write_artifacts,
    ExperimentConfig, TaskOutcome, TaskRecord,
};
use pivotsvr::features::{build_dataset, feature_vector, FeatureLayout};
use pivotsvr::oscillator::build_oscillator;
use pivotsvr::pivots::{alternate, find_candidates, PivotSpec};
use pivotsvr::selection::{select_model, SvrGrid, ThresholdGrid, Thresholds};
use pivotsvr::series::{load_csv, CsvSchema, PriceSeries};
use pivotsvr::stats::{bonferroni_dunn, friedman, RankTable};
use pivotsvr::svr::{SvrModel, TrainConfig};
use pivotsvr::trading::{
    bah_report, execute_signals, generate_signals, max_drawdown_absolute, performance_report,
    roc_curve, PerformanceReport, Segment,
};

#[derive(Parser)]
#[command(
    name = "pivotsvr",
    version,
    about = "Turning-point prediction on price series with epsilon-SVR and a trading backtest"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CsvArgs {
    /// Input price CSV with a header row.
    #[arg(long)]
    csv: PathBuf,
    /// Date column name (ISO-8601 dates).
    #[arg(long, default_value = "date")]
    date_column: String,
    /// Close price column name.
    #[arg(long, default_value = "close")]
    close_column: String,
    /// Open price column name (used for trade execution when present).
    #[arg(long, default_value = "open")]
    open_column: String,
}

impl CsvArgs {
    fn load(&self) -> Result<PriceSeries> {
        let schema = CsvSchema {
            date: self.date_column.clone(),
            close: self.close_column.clone(),
            open: self.open_column.clone(),
        };
        load_csv(&self.csv, &schema)
    }
}

#[derive(Args)]
struct PivotArgs {
    /// Turning-point criterion: impact, momentum or degree.
    #[arg(long, default_value = "impact")]
    criterion: String,
    /// Importance threshold for impact/momentum (0.02 = 2%).
    #[arg(long, default_value_t = 0.02)]
    gamma: f64,
    /// Degree K (criterion = degree).
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// Lookahead window in days (criterion = momentum).
    #[arg(long, default_value_t = 6)]
    lookahead: usize,
}

impl PivotArgs {
    fn to_spec(&self) -> Result<PivotSpec> {
        let spec = match self.criterion.as_str() {
            "impact" => PivotSpec::Impact { gamma: self.gamma },
            "momentum" => PivotSpec::Momentum { gamma: self.gamma, lookahead: self.lookahead },
            "degree" => PivotSpec::Degree { k: self.degree },
            other => {
                return Err(Error::Config(format!(
                    "unknown criterion `{other}` (expected impact, momentum or degree)"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Detect turning points and emit the alternating pivot sequence.
    Pivots {
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        pivot: PivotArgs,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the turning-point oscillator as (date, gamma) rows.
    Oscillator {
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        pivot: PivotArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid-search SVR hyper-parameters and thresholds on a
    /// train/validation split and store the fitted model.
    Train {
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        pivot: PivotArgs,
        /// Backward window length m.
        #[arg(long, default_value_t = 8)]
        window: usize,
        /// Error-cost grid.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0, 100.0])]
        grid_c: Vec<f64>,
        /// Kernel-width grid.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0, 100.0])]
        grid_sigma: Vec<f64>,
        /// Tube-width grid.
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.05, 0.1])]
        grid_eps: Vec<f64>,
        /// Step of the threshold grid over [0, 1].
        #[arg(long, default_value_t = 0.01)]
        threshold_step: f64,
        /// Training segment length.
        #[arg(long, default_value_t = 504)]
        n_train: usize,
        /// Validation segment length.
        #[arg(long, default_value_t = 60)]
        n_valid: usize,
        /// Start index of the training segment (defaults to the tail of
        /// the series).
        #[arg(long)]
        start: Option<usize>,
        /// Where to write the model file.
        #[arg(long)]
        model_out: PathBuf,
        /// Where to write the JSON metadata (defaults to the model path
        /// with a .json extension).
        #[arg(long)]
        meta_out: Option<PathBuf>,
    },
    /// Predict the oscillator for every eligible day with a stored model.
    Predict {
        #[command(flatten)]
        csv: CsvArgs,
        /// Model file written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Backtest a stored model with explicit thresholds over a segment.
    Backtest {
        #[command(flatten)]
        csv: CsvArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        t_low: f64,
        #[arg(long)]
        t_high: f64,
        /// Segment start index (default: first day with a full backward
        /// window).
        #[arg(long)]
        start: Option<usize>,
        /// Segment length in days (default: to the end of the series).
        #[arg(long)]
        len: Option<usize>,
        /// Also report the literal maximum drop of the raw daily-factor
        /// sequence.
        #[arg(long)]
        mdd_absolute: bool,
        /// JSON report path (stdout when omitted).
        #[arg(long)]
        report_out: Option<PathBuf>,
        /// Per-day CSV (date, close, position, roc, wealth).
        #[arg(long)]
        daily_out: Option<PathBuf>,
    },
    /// Run the sampled-task experiment and write its artifact set.
    Experiment {
        /// TOML configuration file; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Output directory for artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_train: Option<usize>,
        #[arg(long)]
        n_valid: Option<usize>,
        #[arg(long)]
        n_test: Option<usize>,
        #[arg(long)]
        n_tasks: Option<usize>,
        #[arg(long)]
        criterion: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Summarize per-task CSVs into comparison tables; with several
    /// files, adds a Friedman rank comparison across them.
    Report {
        /// Per-task CSV files written by `experiment`.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Method labels, one per file (defaults to file stems).
        #[arg(long, value_delimiter = ',')]
        labels: Vec<String>,
        /// Significance level for the tests.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

fn output_writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn write_failed(e: std::io::Error) -> Error {
    Error::Io { path: PathBuf::from("<output>"), source: e }
}

fn cmd_pivots(csv: &CsvArgs, pivot: &PivotArgs, out: &Option<PathBuf>) -> Result<()> {
    let series = csv.load()?;
    let spec = pivot.to_spec()?;
    let candidates = find_candidates(series.closes(), &spec)?;
    let alt = alternate(&candidates);
    let mut w = output_writer(out)?;
    writeln!(w, "date,kind,value").map_err(write_failed)?;
    for p in alt.pivots() {
        writeln!(w, "{},{},{}", series.date(p.t), p.kind.label(), p.value).map_err(write_failed)?;
    }
    w.flush().map_err(write_failed)
}

fn cmd_oscillator(csv: &CsvArgs, pivot: &PivotArgs, out: &Option<PathBuf>) -> Result<()> {
    let series = csv.load()?;
    let spec = pivot.to_spec()?;
    let candidates = find_candidates(series.closes(), &spec)?;
    let alt = alternate(&candidates);
    let osc = build_oscillator(series.closes(), &alt)?;
    let mut w = output_writer(out)?;
    writeln!(w, "date,gamma").map_err(write_failed)?;
    for (t, v) in osc.iter() {
        writeln!(w, "{},{}", series.date(t), v).map_err(write_failed)?;
    }
    w.flush().map_err(write_failed)
}

#[derive(serde::Serialize)]
struct TrainMeta<'a> {
    criterion: &'a str,
    gamma: f64,
    degree: usize,
    lookahead: usize,
    window: usize,
    train_start: usize,
    train_end: usize,
    valid_start: usize,
    valid_end: usize,
    c: f64,
    sigma: f64,
    epsilon: f64,
    t_low: f64,
    t_high: f64,
    validation_tprmse: f64,
    n_support_vectors: usize,
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    csv: &CsvArgs,
    pivot: &PivotArgs,
    window: usize,
    grid_c: Vec<f64>,
    grid_sigma: Vec<f64>,
    grid_eps: Vec<f64>,
    threshold_step: f64,
    n_train: usize,
    n_valid: usize,
    start: Option<usize>,
    model_out: &Path,
    meta_out: Option<PathBuf>,
) -> Result<()> {
    let series = csv.load()?;
    let spec = pivot.to_spec()?;
    let total = n_train + n_valid;
    if series.len() < total {
        return Err(Error::Capacity { needed: total, available: series.len() });
    }
    let start = start.unwrap_or(series.len() - total);
    if start + total > series.len() {
        return Err(Error::Capacity { needed: start + total, available: series.len() });
    }
    let train_range = start..start + n_train;
    let valid_range = train_range.end..train_range.end + n_valid;

    let prices = series.closes();
    let train_set = build_dataset(prices, train_range.clone(), &spec, window)?;
    let grid = SvrGrid::new(grid_c, grid_sigma, grid_eps)?;
    let threshold_grid = ThresholdGrid::from_step(threshold_step)?;
    let fitted = select_model(
        &train_set,
        &prices[..valid_range.end],
        valid_range.clone(),
        &spec,
        window,
        &grid,
        &threshold_grid,
        &TrainConfig::default(),
    )?;

    fitted.model.save(model_out)?;
    let meta = TrainMeta {
        criterion: &pivot.criterion,
        gamma: pivot.gamma,
        degree: pivot.degree,
        lookahead: pivot.lookahead,
        window,
        train_start: train_range.start,
        train_end: train_range.end,
        valid_start: valid_range.start,
        valid_end: valid_range.end,
        c: fitted.model.params().c,
        sigma: fitted.model.params().sigma,
        epsilon: fitted.model.params().epsilon,
        t_low: fitted.thresholds.low,
        t_high: fitted.thresholds.high,
        validation_tprmse: fitted.validation_score,
        n_support_vectors: fitted.model.coefficients().len(),
    };
    let meta_path = meta_out.unwrap_or_else(|| model_out.with_extension("json"));
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(&meta_path, json + "\n").map_err(|source| Error::Io {
        path: meta_path.clone(),
        source,
    })?;
    log::info!(
        "model written to {} (meta {}), validation TpRMSE {}",
        model_out.display(),
        meta_path.display(),
        fitted.validation_score
    );
    Ok(())
}

/// Window length implied by a stored model's feature dimension.
fn model_window(model: &SvrModel) -> Result<usize> {
    Ok(FeatureLayout::from_dim(model.dim())?.prices)
}

fn cmd_predict(csv: &CsvArgs, model_path: &Path, out: &Option<PathBuf>) -> Result<()> {
    let series = csv.load()?;
    let model = SvrModel::load(model_path)?;
    let m = model_window(&model)?;
    let prices = series.closes();
    let mut w = output_writer(out)?;
    writeln!(w, "date,gamma_hat").map_err(write_failed)?;
    for t in m..series.len() {
        let features = feature_vector(&prices[t - m..t])?;
        let value = model.predict(&features)?;
        writeln!(w, "{},{}", series.date(t), value).map_err(write_failed)?;
    }
    w.flush().map_err(write_failed)
}

#[derive(serde::Serialize)]
struct BacktestReport {
    segment_start: usize,
    segment_len: usize,
    t_low: f64,
    t_high: f64,
    strategy: PerformanceReport,
    bah: PerformanceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    mdd_absolute: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_backtest(
    csv: &CsvArgs,
    model_path: &Path,
    t_low: f64,
    t_high: f64,
    start: Option<usize>,
    len: Option<usize>,
    mdd_absolute: bool,
    report_out: &Option<PathBuf>,
    daily_out: &Option<PathBuf>,
) -> Result<()> {
    let series = csv.load()?;
    let model = SvrModel::load(model_path)?;
    let m = model_window(&model)?;
    let thresholds = Thresholds::new(t_low, t_high)?;

    let start = start.unwrap_or(m).max(m);
    let end = match len {
        Some(len) => start + len,
        None => series.len(),
    };
    if start >= series.len() || end > series.len() || end - start < 2 {
        return Err(Error::OutOfRange(format!(
            "segment {start}..{end} not usable in a series of length {}",
            series.len()
        )));
    }

    let prices = series.closes();
    let mut gamma_hat = Vec::with_capacity(end - start);
    for t in start..end {
        gamma_hat.push(model.predict(&feature_vector(&prices[t - m..t])?)?);
    }
    let signals = generate_signals(&gamma_hat, thresholds);
    let closes = &prices[start..end];
    let opens = series.opens().map(|o| &o[start..end]);
    let segment = Segment::new(closes, opens)?;
    let log = execute_signals(&segment, &signals);
    let n_days = end - start;
    let strategy = performance_report(&segment, &log, n_days);
    let bah = bah_report(closes, n_days)?;
    let roc = roc_curve(closes, &log);

    let report = BacktestReport {
        segment_start: start,
        segment_len: n_days,
        t_low,
        t_high,
        strategy,
        bah,
        mdd_absolute: mdd_absolute.then(|| max_drawdown_absolute(&roc)),
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?;
    let mut w = output_writer(report_out)?;
    writeln!(w, "{json}").map_err(write_failed)?;
    w.flush().map_err(write_failed)?;

    if let Some(path) = daily_out {
        let mut in_position = vec![false; n_days];
        for trade in &log.trades {
            for t in trade.entry_index..=trade.exit_index {
                in_position[t] = true;
            }
        }
        let mut w = output_writer(&Some(path.clone()))?;
        writeln!(w, "date,close,position,roc,wealth").map_err(write_failed)?;
        let mut wealth = 1.0;
        for (i, &r) in roc.iter().enumerate() {
            wealth *= r;
            writeln!(
                w,
                "{},{},{},{},{}",
                series.date(start + i),
                closes[i],
                u8::from(in_position[i]),
                r,
                wealth
            )
            .map_err(write_failed)?;
        }
        w.flush().map_err(write_failed)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    config_path: Option<PathBuf>,
    csv: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    n_train: Option<usize>,
    n_valid: Option<usize>,
    n_test: Option<usize>,
    n_tasks: Option<usize>,
    criterion: Option<String>,
    gamma: Option<f64>,
    window: Option<usize>,
) -> Result<()> {
    let mut config = match config_path {
        Some(path) => ExperimentConfig::from_toml_path(&path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(csv) = csv {
        config.csv = csv;
    }
    if let Some(out) = out {
        config.output_dir = out;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(v) = n_train {
        config.n_train = v;
    }
    if let Some(v) = n_valid {
        config.n_valid = v;
    }
    if let Some(v) = n_test {
        config.n_test = v;
    }
    if let Some(v) = n_tasks {
        config.n_tasks = v;
    }
    if let Some(v) = criterion {
        config.criterion = v;
    }
    if let Some(v) = gamma {
        config.gamma = v;
    }
    if let Some(v) = window {
        config.window = v;
    }
    config.validate()?;
    if config.csv.as_os_str().is_empty() {
        return Err(Error::Config("no input CSV (set csv in the config or pass --csv)".into()));
    }

    let schema = CsvSchema::default();
    let series = load_csv(&config.csv, &schema)?;
    log::info!(
        "running {} tasks over {} prices from {}",
        config.n_tasks,
        series.len(),
        config.csv.display()
    );
    let result = run_experiment(&config, &series)?;
    write_artifacts(&config.output_dir, &config, &result)?;
    print!("{}", render_report(&result.aggregate));
    log::info!("artifacts written to {}", config.output_dir.display());
    Ok(())
}

fn cmd_report(files: &[PathBuf], labels: &[String], alpha: f64) -> Result<()> {
    let mut methods: Vec<(String, Vec<TaskRecord>)> = Vec::new();
    for (i, path) in files.iter().enumerate() {
        let label = labels.get(i).cloned().unwrap_or_else(|| {
            path.file_stem().map_or_else(|| format!("method {i}"), |s| s.to_string_lossy().into_owned())
        });
        methods.push((label, read_per_task_csv(path)?));
    }

    let mut out = std::io::stdout().lock();
    for (label, records) in &methods {
        writeln!(out, "== {label} ==").map_err(write_failed)?;
        write!(out, "{}", render_report(&aggregate(records))).map_err(write_failed)?;
        writeln!(out).map_err(write_failed)?;
    }

    if methods.len() >= 2 {
        render_rank_comparison(&mut out, &methods, alpha)?;
    }
    Ok(())
}

/// Friedman rank comparison across methods, per metric, over the tasks
/// every method completed. Higher-is-better metrics are negated before
/// ranking so rank 1 always means best.
fn render_rank_comparison(
    out: &mut impl Write,
    methods: &[(String, Vec<TaskRecord>)],
    alpha: f64,
) -> Result<()> {
    use std::collections::BTreeMap;

    let mut by_task: Vec<BTreeMap<usize, &TaskOutcome>> = Vec::new();
    for (_, records) in methods {
        by_task.push(records.iter().map(|r| (r.task_id, &r.outcome)).collect());
    }
    let shared: Vec<usize> = by_task[0]
        .keys()
        .copied()
        .filter(|id| {
            by_task.iter().all(|m| matches!(m.get(id), Some(TaskOutcome::Success(_))))
        })
        .collect();
    writeln!(out, "== rank comparison over {} shared tasks ==", shared.len())
        .map_err(write_failed)?;
    if shared.len() < 2 {
        writeln!(out, "not enough shared completed tasks for the Friedman test")
            .map_err(write_failed)?;
        return Ok(());
    }

    // (metric, per-task value extractor, higher is better)
    type Extract = fn(&pivotsvr::experiment::TaskSuccess) -> Option<f64>;
    let metrics: [(&str, Extract, bool); 3] = [
        ("return", |s| Some(s.strategy.ret), true),
        ("MDD", |s| Some(s.strategy.mdd), false),
        ("ASR", |s| s.strategy.asr, true),
    ];
    for (name, extract, higher_better) in metrics {
        let mut rows = Vec::new();
        'tasks: for id in &shared {
            let mut row = Vec::with_capacity(methods.len());
            for m in &by_task {
                let Some(TaskOutcome::Success(s)) = m.get(id) else { continue 'tasks };
                let Some(v) = extract(s) else { continue 'tasks };
                row.push(if higher_better { -v } else { v });
            }
            rows.push(row);
        }
        if rows.len() < 2 {
            writeln!(out, "{name:<8} insufficient defined tasks").map_err(write_failed)?;
            continue;
        }
        let n_rows = rows.len();
        let fr = friedman(&RankTable::new(rows).map_err(|e| Error::Stats(e.to_string()))?)?;
        let ranks: Vec<String> = methods
            .iter()
            .zip(&fr.mean_ranks)
            .map(|((label, _), r)| format!("{label} {r:.2}"))
            .collect();
        write!(
            out,
            "{name:<8} n={n_rows:<5} Friedman chi2 {:>8.3} p {:<10.4} ranks: {}",
            fr.statistic,
            fr.p_value,
            ranks.join(", ")
        )
        .map_err(write_failed)?;
        if fr.p_value < alpha {
            let dunn = bonferroni_dunn(&fr, alpha)?;
            let top: Vec<&str> =
                dunn.groups[0].iter().map(|&i| methods[i].0.as_str()).collect();
            writeln!(
                out,
                "  | CD {:.3}, top group: {}",
                dunn.critical_difference,
                top.join(", ")
            )
            .map_err(write_failed)?;
        } else {
            writeln!(out, "  | not significant at {alpha}").map_err(write_failed)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pivots { csv, pivot, out } => cmd_pivots(&csv, &pivot, &out),
        Command::Oscillator { csv, pivot, out } => cmd_oscillator(&csv, &pivot, &out),
        Command::Train {
            csv,
            pivot,
            window,
            grid_c,
            grid_sigma,
            grid_eps,
            threshold_step,
            n_train,
            n_valid,
            start,
            model_out,
            meta_out,
        } => cmd_train(
            &csv,
            &pivot,
            window,
            grid_c,
            grid_sigma,
            grid_eps,
            threshold_step,
            n_train,
            n_valid,
            start,
            &model_out,
            meta_out,
        ),
        Command::Predict { csv, model, out } => cmd_predict(&csv, &model, &out),
        Command::Backtest {
            csv,
            model,
            t_low,
            t_high,
            start,
            len,
            mdd_absolute,
            report_out,
            daily_out,
        } => cmd_backtest(
            &csv,
            &model,
            t_low,
            t_high,
            start,
            len,
            mdd_absolute,
            &report_out,
            &daily_out,
        ),
        Command::Experiment {
            config,
            csv,
            out,
            seed,
            n_train,
            n_valid,
            n_test,
            n_tasks,
            criterion,
            gamma,
            window,
        } => cmd_experiment(
            config, csv, out, seed, n_train, n_valid, n_test, n_tasks, criterion, gamma, window,
        ),
        Command::Report { files, labels, alpha } => cmd_report(&files, &labels, alpha),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            std::process::exit(if is_help { 0 } else { 1 });
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
