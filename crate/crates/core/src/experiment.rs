//! The experiment harness: sampled prediction tasks, per-task model
//! selection and backtest, persisted artifacts, and the aggregate report
//! with statistical comparison against buy-and-hold.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{build_dataset, feature_vector};
use crate::pivots::PivotSpec;
use crate::selection::{select_model, SvrGrid, ThresholdGrid};
use crate::series::{sample_tasks, PredictionTask, PriceSeries};
use crate::stats::{wilcoxon_signed_rank, PairedSample, WilcoxonMode};
use crate::svr::TrainConfig;
use crate::trading::{
    bah_report, execute_signals, generate_signals, performance_report, PerformanceReport, Segment,
};

/// Full configuration of one experiment. Serializable to and from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Input price CSV (date, close, optional open).
    pub csv: PathBuf,
    /// Directory for the artifact set.
    pub output_dir: PathBuf,
    /// Pivot criterion: "impact", "momentum" or "degree".
    pub criterion: String,
    /// Importance threshold for impact/momentum pivots (0.02 = 2%).
    pub gamma: f64,
    /// Degree K, when criterion = "degree".
    pub degree: usize,
    /// Lookahead window in days, when criterion = "momentum".
    pub lookahead: usize,
    /// Backward window length m.
    pub window: usize,
    pub n_train: usize,
    pub n_valid: usize,
    pub n_test: usize,
    pub n_tasks: usize,
    pub seed: u64,
    pub grid_c: Vec<f64>,
    pub grid_sigma: Vec<f64>,
    pub grid_epsilon: Vec<f64>,
    pub threshold_step: f64,
    pub kkt_tol: f64,
    pub max_iter: Option<usize>,
    /// Reserved: the weighted TpRMSE variant is not implemented (its
    /// weight coefficients are not published). Must remain false.
    pub beta_weighted_tprmse: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            csv: PathBuf::new(),
            output_dir: PathBuf::from("experiment-out"),
            criterion: "impact".to_string(),
            gamma: 0.02,
            degree: 1,
            lookahead: 6,
            window: 8,
            n_train: 504,
            n_valid: 60,
            n_test: 60,
            n_tasks: 300,
            seed: 0,
            grid_c: vec![0.1, 1.0, 100.0],
            grid_sigma: vec![0.1, 1.0, 100.0],
            grid_epsilon: vec![0.01, 0.05, 0.1],
            threshold_step: 0.01,
            kkt_tol: 1e-3,
            max_iter: None,
            beta_weighted_tprmse: false,
        }
    }
}

impl ExperimentConfig {
    pub fn pivot_spec(&self) -> Result<PivotSpec> {
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

    pub fn svr_grid(&self) -> Result<SvrGrid> {
        SvrGrid::new(self.grid_c.clone(), self.grid_sigma.clone(), self.grid_epsilon.clone())
    }

    pub fn threshold_grid(&self) -> Result<ThresholdGrid> {
        ThresholdGrid::from_step(self.threshold_step)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { kkt_tol: self.kkt_tol, max_iter: self.max_iter }
    }

    pub fn validate(&self) -> Result<()> {
        self.pivot_spec()?;
        self.svr_grid()?;
        self.threshold_grid()?;
        if self.window < 2 || self.window % 2 != 0 {
            return Err(Error::Config(format!(
                "window must be even and >= 2, got {}",
                self.window
            )));
        }
        if self.n_train + self.n_valid < self.window {
            return Err(Error::Config(
                "n_train + n_valid must cover at least one backward window".to_string(),
            ));
        }
        if self.n_train == 0 || self.n_valid == 0 || self.n_test < 2 {
            return Err(Error::Config("segment lengths too small".to_string()));
        }
        if self.n_tasks == 0 {
            return Err(Error::Config("n_tasks must be >= 1".to_string()));
        }
        if !(self.kkt_tol.is_finite() && self.kkt_tol > 0.0) {
            return Err(Error::Config("kkt_tol must be positive".to_string()));
        }
        if self.beta_weighted_tprmse {
            return Err(Error::Config(
                "beta_weighted_tprmse is reserved: the weight coefficients are not available"
                    .to_string(),
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self =
            toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Result of one successfully completed task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSuccess {
    pub c: f64,
    pub sigma: f64,
    pub epsilon: f64,
    pub t_low: f64,
    pub t_high: f64,
    pub valid_tprmse: f64,
    pub strategy: PerformanceReport,
    pub bah: PerformanceReport,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskOutcome {
    Success(TaskSuccess),
    Failure(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskRecord {
    pub task_id: usize,
    pub task: PredictionTask,
    pub outcome: TaskOutcome,
}

/// Runs a single prediction task end to end: dataset from the training
/// range, grid-search selection against the validation range, oscillator
/// prediction over the test range, signal backtest, and the buy-and-hold
/// benchmark on the same test segment.
pub fn run_task(
    series: &PriceSeries,
    task: &PredictionTask,
    spec: &PivotSpec,
    m: usize,
    grid: &SvrGrid,
    threshold_grid: &ThresholdGrid,
    train_cfg: &TrainConfig,
) -> Result<TaskSuccess> {
    let prices = series.closes();
    let train_set = build_dataset(prices, task.train.clone(), spec, m)?;
    let fitted = select_model(
        &train_set,
        &prices[..task.validation.end],
        task.validation.clone(),
        spec,
        m,
        grid,
        threshold_grid,
        train_cfg,
    )?;

    let mut gamma_hat = Vec::with_capacity(task.test.len());
    for t in task.test.clone() {
        let features = feature_vector(&prices[t - m..t])?;
        gamma_hat.push(fitted.model.predict(&features)?);
    }
    let signals = generate_signals(&gamma_hat, fitted.thresholds);

    let test_closes = &prices[task.test.clone()];
    let test_opens = series.opens().map(|o| &o[task.test.clone()]);
    let segment = Segment::new(test_closes, test_opens)?;
    let log = execute_signals(&segment, &signals);
    let strategy = performance_report(&segment, &log, task.test.len());
    let bah = bah_report(test_closes, task.test.len())?;

    let params = fitted.model.params();
    Ok(TaskSuccess {
        c: params.c,
        sigma: params.sigma,
        epsilon: params.epsilon,
        t_low: fitted.thresholds.low,
        t_high: fitted.thresholds.high,
        valid_tprmse: fitted.validation_score,
        strategy,
        bah,
    })
}

/// Mean, standard error and paired Wilcoxon p for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub n: usize,
    pub svr_mean: Option<f64>,
    pub svr_stderr: Option<f64>,
    pub bah_mean: Option<f64>,
    pub bah_stderr: Option<f64>,
    pub wilcoxon_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n_tasks: usize,
    pub n_ok: usize,
    pub n_failed: usize,
    /// Completed segments in which the strategy never traded.
    pub n_no_trades: usize,
    pub mean_trades: Option<f64>,
    pub ret: MetricSummary,
    pub ret_annual: MetricSummary,
    pub mdd: MetricSummary,
    pub sharpe: MetricSummary,
    pub asr: MetricSummary,
    pub success_rate: MetricSummary,
}

fn mean_stderr(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

fn summarize(pairs: &[(f64, f64)]) -> MetricSummary {
    let svr: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let bah: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (svr_mean, svr_stderr) = mean_stderr(&svr);
    let (bah_mean, bah_stderr) = mean_stderr(&bah);
    let wilcoxon_p = PairedSample::new(svr, bah)
        .ok()
        .and_then(|s| wilcoxon_signed_rank(&s, WilcoxonMode::Auto).ok())
        .map(|r| r.p_value);
    MetricSummary { n: pairs.len(), svr_mean, svr_stderr, bah_mean, bah_stderr, wilcoxon_p }
}

/// Recomputes the aggregate from per-task records alone; the experiment
/// keeps no other state, so artifacts can always be re-derived.
pub fn aggregate(records: &[TaskRecord]) -> Aggregate {
    let ok: Vec<&TaskSuccess> = records
        .iter()
        .filter_map(|r| match &r.outcome {
            TaskOutcome::Success(s) => Some(s),
            TaskOutcome::Failure(_) => None,
        })
        .collect();
    let n_failed = records.len() - ok.len();
    let n_no_trades = ok.iter().filter(|s| s.strategy.n_trades == 0).count();

    let both = |f: fn(&TaskSuccess) -> (f64, f64)| -> Vec<(f64, f64)> {
        ok.iter().map(|s| f(s)).collect()
    };
    let defined = |f: fn(&TaskSuccess) -> (Option<f64>, Option<f64>)| -> Vec<(f64, f64)> {
        ok.iter()
            .filter_map(|s| match f(s) {
                (Some(a), Some(b)) => Some((a, b)),
                _ => None,
            })
            .collect()
    };

    let trades: Vec<f64> = ok.iter().map(|s| s.strategy.n_trades as f64).collect();
    let (mean_trades, _) = mean_stderr(&trades);

    // Success rate has no meaningful buy-and-hold pairing; summarize the
    // defined strategy values only.
    let success: Vec<f64> = ok.iter().filter_map(|s| s.strategy.success_rate).collect();
    let (succ_mean, succ_stderr) = mean_stderr(&success);
    let success_rate = MetricSummary {
        n: success.len(),
        svr_mean: succ_mean,
        svr_stderr: succ_stderr,
        bah_mean: None,
        bah_stderr: None,
        wilcoxon_p: None,
    };

    Aggregate {
        n_tasks: records.len(),
        n_ok: ok.len(),
        n_failed,
        n_no_trades,
        mean_trades,
        ret: summarize(&both(|s| (s.strategy.ret, s.bah.ret))),
        ret_annual: summarize(&both(|s| (s.strategy.ret_annual, s.bah.ret_annual))),
        mdd: summarize(&both(|s| (s.strategy.mdd, s.bah.mdd))),
        sharpe: summarize(&defined(|s| (s.strategy.sharpe, s.bah.sharpe))),
        asr: summarize(&defined(|s| (s.strategy.asr, s.bah.asr))),
        success_rate,
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub records: Vec<TaskRecord>,
    pub aggregate: Aggregate,
}

fn worker_count() -> usize {
    match std::env::var("PIVOTSVR_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) => n,
            Err(_) => {
                log::warn!("ignoring unparsable PIVOTSVR_THREADS={v:?}");
                0
            }
        },
        Err(_) => 0, // rayon default
    }
}

/// Runs the configured experiment over a loaded series. Tasks execute in
/// a bounded worker pool (capped by `PIVOTSVR_THREADS`); results are
/// collected in task order, so output is deterministic regardless of
/// scheduling.
pub fn run_experiment(config: &ExperimentConfig, series: &PriceSeries) -> Result<ExperimentResult> {
    config.validate()?;
    let spec = config.pivot_spec()?;
    let grid = config.svr_grid()?;
    let threshold_grid = config.threshold_grid()?;
    let train_cfg = config.train_config();
    let tasks = sample_tasks(
        series,
        config.n_tasks,
        config.n_train,
        config.n_valid,
        config.n_test,
        config.seed,
    )?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let done = AtomicUsize::new(0);
    let total = tasks.len();
    let records: Vec<TaskRecord> = pool.install(|| {
        tasks
            .par_iter()
            .enumerate()
            .map(|(task_id, task)| {
                let outcome =
                    match run_task(series, task, &spec, config.window, &grid, &threshold_grid, &train_cfg)
                    {
                        Ok(success) => TaskOutcome::Success(success),
                        Err(e) => {
                            log::warn!("task {task_id} failed: {e}");
                            TaskOutcome::Failure(e.to_string())
                        }
                    };
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                if n % 25 == 0 || n == total {
                    log::info!("completed {n}/{total} tasks");
                }
                TaskRecord { task_id, task: task.clone(), outcome }
            })
            .collect()
    });

    let aggregate = aggregate(&records);
    Ok(ExperimentResult { records, aggregate })
}

// ---------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------

const PER_TASK_HEADER: [&str; 30] = [
    "task_id", "train_start", "train_end", "valid_start", "valid_end", "test_start", "test_end",
    "status", "c", "sigma", "epsilon", "t_low", "t_high", "valid_tprmse", "ret", "ret_annual",
    "mdd", "sharpe", "asr", "success_rate", "n_trades", "open_position", "bah_ret",
    "bah_ret_annual", "bah_mdd", "bah_sharpe", "bah_asr", "bah_success_rate", "bah_n_trades",
    "error",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Writes the per-task CSV, the aggregate JSON, the rendered report and
/// an echo of the configuration into `dir`.
pub fn write_artifacts(dir: &Path, config: &ExperimentConfig, result: &ExperimentResult) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source: std::io::Error| Error::Io { path, source }
    };

    let per_task = dir.join("per_task.csv");
    {
        let mut w = csv::Writer::from_path(&per_task)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", per_task.display())))?;
        w.write_record(PER_TASK_HEADER)
            .map_err(|e| Error::Config(e.to_string()))?;
        for r in &result.records {
            let mut row: Vec<String> = vec![
                r.task_id.to_string(),
                r.task.train.start.to_string(),
                r.task.train.end.to_string(),
                r.task.validation.start.to_string(),
                r.task.validation.end.to_string(),
                r.task.test.start.to_string(),
                r.task.test.end.to_string(),
            ];
            match &r.outcome {
                TaskOutcome::Success(s) => {
                    row.push("ok".to_string());
                    row.extend([
                        s.c.to_string(),
                        s.sigma.to_string(),
                        s.epsilon.to_string(),
                        s.t_low.to_string(),
                        s.t_high.to_string(),
                        s.valid_tprmse.to_string(),
                        s.strategy.ret.to_string(),
                        s.strategy.ret_annual.to_string(),
                        s.strategy.mdd.to_string(),
                        opt(s.strategy.sharpe),
                        opt(s.strategy.asr),
                        opt(s.strategy.success_rate),
                        s.strategy.n_trades.to_string(),
                        s.strategy.has_open_position.to_string(),
                        s.bah.ret.to_string(),
                        s.bah.ret_annual.to_string(),
                        s.bah.mdd.to_string(),
                        opt(s.bah.sharpe),
                        opt(s.bah.asr),
                        opt(s.bah.success_rate),
                        s.bah.n_trades.to_string(),
                        String::new(),
                    ]);
                }
                TaskOutcome::Failure(message) => {
                    row.push("failed".to_string());
                    row.extend(std::iter::repeat_n(String::new(), 21));
                    row.push(message.clone());
                }
            }
            w.write_record(&row).map_err(|e| Error::Config(e.to_string()))?;
        }
        w.flush().map_err(io_err(&per_task))?;
    }

    let summary = dir.join("summary.json");
    let json = serde_json::to_string_pretty(&result.aggregate)
        .map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&summary, json + "\n").map_err(io_err(&summary))?;

    let report = dir.join("report.txt");
    fs::write(&report, render_report(&result.aggregate)).map_err(io_err(&report))?;

    let config_echo = dir.join("config.toml");
    fs::write(&config_echo, config.to_toml_string()).map_err(io_err(&config_echo))?;
    Ok(())
}

/// Reads a per-task CSV back into records.
pub fn read_per_task_csv(path: &Path) -> Result<Vec<TaskRecord>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
    if headers.len() != PER_TASK_HEADER.len() {
        return Err(Error::Validation(format!(
            "unexpected per-task CSV header: {} columns",
            headers.len()
        )));
    }
    let mut records = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let parse_err = |message: String| Error::Parse { line, message };
        let usize_at = |i: usize| -> Result<usize> {
            row[i].parse().map_err(|e| parse_err(format!("column {}: {e}", PER_TASK_HEADER[i])))
        };
        let f64_at = |i: usize| -> Result<f64> {
            row[i].parse().map_err(|e| parse_err(format!("column {}: {e}", PER_TASK_HEADER[i])))
        };
        let opt_at = |i: usize| -> Result<Option<f64>> {
            if row[i].is_empty() { Ok(None) } else { f64_at(i).map(Some) }
        };
        let task = PredictionTask {
            train: usize_at(1)?..usize_at(2)?,
            validation: usize_at(3)?..usize_at(4)?,
            test: usize_at(5)?..usize_at(6)?,
        };
        let outcome = match &row[7] {
            "ok" => TaskOutcome::Success(TaskSuccess {
                c: f64_at(8)?,
                sigma: f64_at(9)?,
                epsilon: f64_at(10)?,
                t_low: f64_at(11)?,
                t_high: f64_at(12)?,
                valid_tprmse: f64_at(13)?,
                strategy: PerformanceReport {
                    ret: f64_at(14)?,
                    ret_annual: f64_at(15)?,
                    mdd: f64_at(16)?,
                    sharpe: opt_at(17)?,
                    asr: opt_at(18)?,
                    success_rate: opt_at(19)?,
                    n_trades: usize_at(20)?,
                    has_open_position: row[21].parse().map_err(|e| {
                        parse_err(format!("column open_position: {e}"))
                    })?,
                },
                bah: PerformanceReport {
                    ret: f64_at(22)?,
                    ret_annual: f64_at(23)?,
                    mdd: f64_at(24)?,
                    sharpe: opt_at(25)?,
                    asr: opt_at(26)?,
                    success_rate: opt_at(27)?,
                    n_trades: usize_at(28)?,
                    has_open_position: false,
                },
            }),
            "failed" => TaskOutcome::Failure(row[29].to_string()),
            other => return Err(parse_err(format!("unknown status `{other}`"))),
        };
        records.push(TaskRecord { task_id: usize_at(0)?, task, outcome });
    }
    Ok(records)
}

fn fmt_pct(mean: Option<f64>, stderr: Option<f64>) -> String {
    match mean {
        None => "--".to_string(),
        Some(m) => {
            let m = (m - 1.0) * 100.0;
            match stderr {
                Some(s) => format!("{m:.2}% +/- {:.2}%", s * 100.0),
                None => format!("{m:.2}%"),
            }
        }
    }
}

fn fmt_frac_pct(mean: Option<f64>, stderr: Option<f64>) -> String {
    match mean {
        None => "--".to_string(),
        Some(m) => match stderr {
            Some(s) => format!("{:.2}% +/- {:.2}%", m * 100.0, s * 100.0),
            None => format!("{:.2}%", m * 100.0),
        },
    }
}

fn fmt_plain(mean: Option<f64>, stderr: Option<f64>) -> String {
    match mean {
        None => "--".to_string(),
        Some(m) => match stderr {
            Some(s) => format!("{m:.2} +/- {s:.2}"),
            None => format!("{m:.2}"),
        },
    }
}

fn fmt_p(p: Option<f64>) -> String {
    match p {
        None => "--".to_string(),
        Some(p) => {
            let marker = if p < 0.05 { " (*)" } else { "" };
            format!("{p:.4}{marker}")
        }
    }
}

/// Renders the aggregate as a plain-text comparison table (mean +/-
/// standard error per metric, Wilcoxon p against buy-and-hold,
/// significance marked at the 5% level).
pub fn render_report(agg: &Aggregate) -> String {
    let mut out = String::new();
    out.push_str("turning-point SVR vs buy-and-hold\n");
    out.push_str("=================================\n");
    out.push_str(&format!(
        "segments: {} sampled, {} completed, {} failed; {} completed without trades\n",
        agg.n_tasks, agg.n_ok, agg.n_failed, agg.n_no_trades
    ));
    if let Some(t) = agg.mean_trades {
        out.push_str(&format!("mean trades per segment: {t:.2}\n"));
    }
    out.push('\n');
    out.push_str(&format!(
        "{:<14} {:>5} {:>22} {:>22} {:>14}\n",
        "metric", "n", "SVR", "BAH", "Wilcoxon p"
    ));
    let mut row = |name: &str, s: &MetricSummary, svr: String, bah: String| {
        out.push_str(&format!("{name:<14} {:>5} {svr:>22} {bah:>22} {:>14}\n", s.n, fmt_p(s.wilcoxon_p)));
    };
    row(
        "return",
        &agg.ret,
        fmt_pct(agg.ret.svr_mean, agg.ret.svr_stderr),
        fmt_pct(agg.ret.bah_mean, agg.ret.bah_stderr),
    );
    row(
        "ann. return",
        &agg.ret_annual,
        fmt_pct(agg.ret_annual.svr_mean, agg.ret_annual.svr_stderr),
        fmt_pct(agg.ret_annual.bah_mean, agg.ret_annual.bah_stderr),
    );
    row(
        "MDD",
        &agg.mdd,
        fmt_frac_pct(agg.mdd.svr_mean, agg.mdd.svr_stderr),
        fmt_frac_pct(agg.mdd.bah_mean, agg.mdd.bah_stderr),
    );
    row(
        "Sharpe",
        &agg.sharpe,
        fmt_plain(agg.sharpe.svr_mean, agg.sharpe.svr_stderr),
        fmt_plain(agg.sharpe.bah_mean, agg.sharpe.bah_stderr),
    );
    row(
        "ASR",
        &agg.asr,
        fmt_plain(agg.asr.svr_mean, agg.asr.svr_stderr),
        fmt_plain(agg.asr.bah_mean, agg.asr.bah_stderr),
    );
    row(
        "success rate",
        &agg.success_rate,
        fmt_frac_pct(agg.success_rate.svr_mean, agg.success_rate.svr_stderr),
        "--".to_string(),
    );
    out
}
