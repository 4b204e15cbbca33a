//! Price-series ingestion, slicing, backward windows and the construction
//! of train/validation/test prediction tasks.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::Range;
use std::path::Path;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Column names expected in a price CSV.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub date: String,
    pub close: String,
    pub open: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            date: "date".to_string(),
            close: "close".to_string(),
            open: "open".to_string(),
        }
    }
}

/// A dated sequence of daily close prices, optionally with opening prices.
///
/// Immutable after construction. Invariants: dates strictly increasing,
/// every price positive, all columns the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
    opens: Option<Vec<f64>>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, closes: Vec<f64>, opens: Option<Vec<f64>>) -> Result<Self> {
        if dates.len() != closes.len() {
            return Err(Error::Validation(format!(
                "{} dates but {} close prices",
                dates.len(),
                closes.len()
            )));
        }
        if let Some(opens) = &opens {
            if opens.len() != closes.len() {
                return Err(Error::Validation(format!(
                    "{} opens but {} closes",
                    opens.len(),
                    closes.len()
                )));
            }
        }
        for pair in dates.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::Validation(format!(
                    "dates not strictly increasing near {}",
                    pair[1]
                )));
            }
        }
        let positive = |p: &f64| p.is_finite() && *p > 0.0;
        if !closes.iter().all(positive) || !opens.iter().flatten().all(positive) {
            return Err(Error::Validation("all prices must be positive".to_string()));
        }
        Ok(Self { dates, closes, opens })
    }

    /// Builds a series from bare closes with synthetic consecutive dates.
    /// Convenient for synthetic experiments and tests.
    pub fn from_closes(closes: Vec<f64>) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        let dates = (0..closes.len() as i64)
            .map(|i| start + chrono::Duration::days(i))
            .collect();
        Self::new(dates, closes, None)
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn opens(&self) -> Option<&[f64]> {
        self.opens.as_deref()
    }

    pub fn date(&self, t: usize) -> NaiveDate {
        self.dates[t]
    }

    pub fn close(&self, t: usize) -> f64 {
        self.closes[t]
    }

    /// The backward window of day `t`: the `m` prices `x[t-m] ..= x[t-1]`,
    /// exclusive of `x[t]` itself.
    pub fn backward_window(&self, t: usize, m: usize) -> Result<&[f64]> {
        backward_window(&self.closes, t, m)
    }
}

/// Slice out the backward window `x[t-m] ..= x[t-1]` of a raw price slice.
pub fn backward_window(prices: &[f64], t: usize, m: usize) -> Result<&[f64]> {
    if t < m {
        return Err(Error::OutOfRange(format!(
            "backward window of length {m} needs t >= {m}, got t = {t}"
        )));
    }
    if t > prices.len() {
        return Err(Error::OutOfRange(format!(
            "t = {t} beyond series of length {}",
            prices.len()
        )));
    }
    Ok(&prices[t - m..t])
}

/// Reads a price CSV with a header row. Rows are sorted by date after
/// parsing; duplicate dates and non-positive prices are rejected.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<PriceSeries> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let date_col = find(&schema.date).ok_or_else(|| Error::Validation(format!(
        "missing required column `{}`",
        schema.date
    )))?;
    let close_col = find(&schema.close).ok_or_else(|| Error::Validation(format!(
        "missing required column `{}`",
        schema.close
    )))?;
    let open_col = find(&schema.open);

    let mut rows: Vec<(NaiveDate, f64, Option<f64>)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // header is line 1
        let record = record.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let field = |col: usize| -> Result<&str> {
            record.get(col).ok_or(Error::Parse {
                line,
                message: format!("missing field {col}"),
            })
        };
        let date = NaiveDate::parse_from_str(field(date_col)?.trim(), "%Y-%m-%d").map_err(|e| {
            Error::Parse {
                line,
                message: format!("bad date: {e}"),
            }
        })?;
        let parse_price = |s: &str| -> Result<f64> {
            let v: f64 = s.trim().parse().map_err(|e| Error::Parse {
                line,
                message: format!("bad price `{s}`: {e}"),
            })?;
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Validation(format!(
                    "non-positive price {v} at line {line}"
                )));
            }
            Ok(v)
        };
        let close = parse_price(field(close_col)?)?;
        let open = match open_col {
            Some(col) => Some(parse_price(field(col)?)?),
            None => None,
        };
        rows.push((date, close, open));
    }

    rows.sort_by_key(|r| r.0);
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::Validation(format!("duplicate date {}", pair[0].0)));
        }
    }

    let dates: Vec<NaiveDate> = rows.iter().map(|r| r.0).collect();
    let closes: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let opens = if open_col.is_some() {
        Some(rows.iter().map(|r| r.2.unwrap()).collect())
    } else {
        None
    };
    PriceSeries::new(dates, closes, opens)
}

/// Writes a series back out in the same CSV layout `load_csv` reads.
/// Floats are printed with their shortest round-trip representation, so
/// load -> save -> load is the identity.
pub fn save_csv(series: &PriceSeries, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(opens) = series.opens() {
        writeln!(w, "date,close,open").map_err(io_err)?;
        for t in 0..series.len() {
            writeln!(w, "{},{},{}", series.date(t), series.close(t), opens[t]).map_err(io_err)?;
        }
    } else {
        writeln!(w, "date,close").map_err(io_err)?;
        for t in 0..series.len() {
            writeln!(w, "{},{}", series.date(t), series.close(t)).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// A chronologically ordered train/validation/test triple of index ranges
/// into one series.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionTask {
    pub train: Range<usize>,
    pub validation: Range<usize>,
    pub test: Range<usize>,
}

impl PredictionTask {
    /// Lays the three contiguous segments out from `start`.
    pub fn from_start(start: usize, n_train: usize, n_valid: usize, n_test: usize) -> Self {
        let train = start..start + n_train;
        let validation = train.end..train.end + n_valid;
        let test = validation.end..validation.end + n_test;
        Self { train, validation, test }
    }

    pub fn end(&self) -> usize {
        self.test.end
    }
}

/// Draws `n_tasks` task start offsets uniformly at random (with
/// replacement) from the feasible placements. Deterministic for a fixed
/// seed.
pub fn sample_tasks(
    series: &PriceSeries,
    n_tasks: usize,
    n_train: usize,
    n_valid: usize,
    n_test: usize,
    seed: u64,
) -> Result<Vec<PredictionTask>> {
    let total = n_train + n_valid + n_test;
    if n_train == 0 || n_valid == 0 || n_test == 0 {
        return Err(Error::Config("segment lengths must be positive".to_string()));
    }
    if series.len() < total {
        return Err(Error::Capacity {
            needed: total,
            available: series.len(),
        });
    }
    let max_start = series.len() - total;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_tasks)
        .map(|_| {
            let start = rng.random_range(0..=max_start);
            PredictionTask::from_start(start, n_train, n_valid, n_test)
        })
        .collect())
}
