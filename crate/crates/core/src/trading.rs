//! The buy-low/sell-high trading application: signal generation from
//! oscillator predictions, trade execution, performance metrics and the
//! buy-and-hold benchmark.

use crate::error::{Error, Result};
use crate::selection::Thresholds;

/// Matched buy/sell trigger pairs produced by scanning a prediction
/// sequence. Indices are trigger days (signal evaluated at that day's
/// close); execution happens one day later and is resolved against
/// prices by [`execute_signals`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalLog {
    /// (buy trigger, sell trigger) pairs, chronological, non-overlapping.
    pub pairs: Vec<(usize, usize)>,
    /// A buy trigger that never found its sell trigger.
    pub open_buy: Option<usize>,
}

/// Stateful scan over the prediction sequence: out of position and the
/// prediction drops below `low` -> buy trigger; in position and it rises
/// above `high` -> sell trigger. A position counts as held from the
/// execution day (trigger + 1) onward, so the earliest sell trigger for a
/// buy at `t` is `t + 1`.
pub fn generate_signals(gamma_hat: &[f64], th: Thresholds) -> SignalLog {
    let mut pairs = Vec::new();
    let mut open: Option<usize> = None;
    for (t, &g) in gamma_hat.iter().enumerate() {
        match open {
            None if g < th.low => open = Some(t),
            Some(b) if g > th.high && t > b => {
                pairs.push((b, t));
                open = None;
            }
            _ => {}
        }
    }
    SignalLog { pairs, open_buy: open }
}

/// One executed round trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trade {
    pub entry_index: usize,
    pub exit_index: usize,
    pub entry_price: f64,
    pub exit_price: f64,
}

impl Trade {
    pub fn return_factor(&self) -> f64 {
        self.exit_price / self.entry_price
    }
}

/// Executed trades over one segment, plus an optional entry that was
/// still open when the segment ended (excluded from all metrics).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TradeLog {
    pub trades: Vec<Trade>,
    pub open_position: Option<usize>,
}

/// A price segment to trade over: closes, with optional opening prices
/// used for execution when available.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    closes: &'a [f64],
    opens: Option<&'a [f64]>,
}

impl<'a> Segment<'a> {
    pub fn new(closes: &'a [f64], opens: Option<&'a [f64]>) -> Result<Self> {
        if let Some(opens) = opens {
            if opens.len() != closes.len() {
                return Err(Error::DimensionMismatch { left: closes.len(), right: opens.len() });
            }
        }
        Ok(Self { closes, opens })
    }

    pub fn closes(&self) -> &'a [f64] {
        self.closes
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    /// Execution price for day `t`: the open when present, else the close.
    fn execution_price(&self, t: usize) -> f64 {
        match self.opens {
            Some(opens) => opens[t],
            None => self.closes[t],
        }
    }
}

/// Resolves trigger pairs into executed trades on a segment. A trigger at
/// day `t` executes at day `t + 1`; a sell whose execution day falls past
/// the segment end leaves the position open, and a buy that cannot
/// execute at all is dropped.
pub fn execute_signals(segment: &Segment, signals: &SignalLog) -> TradeLog {
    let n = segment.len();
    let mut log = TradeLog::default();
    for &(buy, sell) in &signals.pairs {
        let entry = buy + 1;
        let exit = sell + 1;
        if entry >= n {
            continue;
        }
        if exit >= n {
            log.open_position = Some(entry);
            continue;
        }
        log.trades.push(Trade {
            entry_index: entry,
            exit_index: exit,
            entry_price: segment.execution_price(entry),
            exit_price: segment.execution_price(exit),
        });
    }
    if let Some(buy) = signals.open_buy {
        if buy + 1 < n {
            log.open_position = Some(buy + 1);
        }
    }
    log
}

/// Total wealth factor over the closed trades, with full reinvestment.
/// An empty log is the empty product, 1.
pub fn cumulative_return(log: &TradeLog) -> f64 {
    log.trades.iter().map(Trade::return_factor).product()
}

/// Annualizes a return factor earned over `n_days` business days:
/// `ret^(252/n)`.
pub fn annualized_return(ret: f64, n_days: usize) -> f64 {
    ret.powf(252.0 / n_days as f64)
}

/// Daily wealth factors of the strategy: `x_t / x_{t-1}` while holding a
/// position (the exit day included, the entry day excluded, so the
/// product over one trade telescopes to its return factor), 1 otherwise.
pub fn roc_curve(closes: &[f64], log: &TradeLog) -> Vec<f64> {
    let mut roc = vec![1.0; closes.len()];
    for trade in &log.trades {
        for t in trade.entry_index + 1..=trade.exit_index {
            roc[t] = closes[t] / closes[t - 1];
        }
    }
    roc
}

/// Maximum drawdown of the wealth curve implied by the daily factors,
/// as a fraction of the running peak.
pub fn max_drawdown(roc: &[f64]) -> f64 {
    let mut wealth = 1.0;
    let mut peak = f64::MIN;
    let mut mdd: f64 = 0.0;
    for &r in roc {
        wealth *= r;
        if wealth > peak {
            peak = wealth;
        }
        mdd = mdd.max((peak - wealth) / peak);
    }
    mdd
}

/// The literal drawdown formula applied to the raw daily-factor sequence
/// (maximum drop from a running maximum of the factors themselves).
/// Kept for comparison; `max_drawdown` is the reported measure.
pub fn max_drawdown_absolute(roc: &[f64]) -> f64 {
    let mut running_max = f64::MIN;
    let mut mdd: f64 = 0.0;
    for &r in roc {
        running_max = running_max.max(r);
        mdd = mdd.max(running_max - r);
    }
    mdd
}

/// Sample standard deviation; 0 for fewer than two values.
fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    var.sqrt()
}

/// Sharpe ratio `(ret - 1) / std(roc)`; undefined when the factors never
/// move (no trades).
pub fn sharpe(ret: f64, roc: &[f64]) -> Option<f64> {
    let sd = std_dev(roc);
    if sd == 0.0 {
        None
    } else {
        Some((ret - 1.0) / sd)
    }
}

/// Annualized Sharpe ratio `(RET - 1) / (std(roc) * sqrt(252))`.
pub fn annualized_sharpe(ret_annual: f64, roc: &[f64]) -> Option<f64> {
    let sd = std_dev(roc);
    if sd == 0.0 {
        None
    } else {
        Some((ret_annual - 1.0) / (sd * 252.0f64.sqrt()))
    }
}

/// Fraction of closed trades that exited above their entry; undefined
/// for an empty log.
pub fn success_rate(log: &TradeLog) -> Option<f64> {
    if log.trades.is_empty() {
        return None;
    }
    let wins = log.trades.iter().filter(|t| t.exit_price > t.entry_price).count();
    Some(wins as f64 / log.trades.len() as f64)
}

/// The four evaluation measures plus trade counts for one segment.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PerformanceReport {
    pub ret: f64,
    pub ret_annual: f64,
    pub mdd: f64,
    pub sharpe: Option<f64>,
    pub asr: Option<f64>,
    pub success_rate: Option<f64>,
    pub n_trades: usize,
    pub has_open_position: bool,
}

/// Computes every metric for a trade log over a segment. `n_days` is the
/// segment length used for annualization.
pub fn performance_report(segment: &Segment, log: &TradeLog, n_days: usize) -> PerformanceReport {
    let ret = cumulative_return(log);
    let ret_annual = annualized_return(ret, n_days);
    let roc = roc_curve(segment.closes(), log);
    PerformanceReport {
        ret,
        ret_annual,
        mdd: max_drawdown(&roc),
        sharpe: sharpe(ret, &roc),
        asr: annualized_sharpe(ret_annual, &roc),
        success_rate: success_rate(log),
        n_trades: log.trades.len(),
        has_open_position: log.open_position.is_some(),
    }
}

/// The buy-and-hold benchmark: one trade spanning the whole segment
/// (entry at the first close, exit at the last), run through the same
/// metric pipeline.
pub fn bah_report(closes: &[f64], n_days: usize) -> Result<PerformanceReport> {
    if closes.len() < 2 {
        return Err(Error::Validation(format!(
            "buy-and-hold needs at least 2 prices, got {}",
            closes.len()
        )));
    }
    let log = TradeLog {
        trades: vec![Trade {
            entry_index: 0,
            exit_index: closes.len() - 1,
            entry_price: closes[0],
            exit_price: closes[closes.len() - 1],
        }],
        open_position: None,
    };
    let segment = Segment::new(closes, None)?;
    Ok(performance_report(&segment, &log, n_days))
}
