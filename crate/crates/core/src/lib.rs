//! Turning-point prediction for daily price series.
//!
//! The pipeline: detect turning points (peaks and troughs) under a
//! configurable importance criterion, clean them into an alternating
//! sequence, build the [0, 1] turning-point oscillator as a regression
//! target, fit an epsilon-SVR with RBF kernel on windowed price features
//! (normalized prices plus Fourier coefficients), pick hyper-parameters
//! and decision thresholds by grid search on a validation segment, and
//! evaluate out of sample with a buy-low/sell-high backtest against the
//! buy-and-hold benchmark, with nonparametric significance tests over
//! many sampled tasks.

pub mod error;
pub mod experiment;
pub mod features;
pub mod oscillator;
pub mod pivots;
pub mod selection;
pub mod series;
pub mod stats;
pub mod svr;
pub mod trading;

pub use error::{Error, Result};
