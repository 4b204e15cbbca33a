//! Feature extraction: min-max normalized backward windows enriched with
//! the amplitude and phase coefficients of their discrete Fourier
//! transform. Every feature component lands in [0, 1] so no single
//! coordinate dominates the RBF distance.

use std::f64::consts::PI;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::oscillator::build_oscillator;
use crate::pivots::{alternate, find_candidates, PivotSpec};

/// Shape of a feature vector: `prices` normalized window components,
/// `amplitudes` and `phases` DFT components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureLayout {
    pub prices: usize,
    pub amplitudes: usize,
    pub phases: usize,
}

impl FeatureLayout {
    /// Layout for a backward window of length `m` (must be even and at
    /// least 2). The DC term is dropped, amplitudes run over bins
    /// `1..=m/2` and phases over `1..=m/2-1` (the Nyquist phase is
    /// degenerate). For `m = 8` this gives 8 + 4 + 3 = 15 features.
    pub fn for_window(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!("window length must be >= 2, got {m}")));
        }
        if m % 2 != 0 {
            return Err(Error::Config(format!(
                "window length must be even for the real DFT, got {m}"
            )));
        }
        Ok(Self {
            prices: m,
            amplitudes: m / 2,
            phases: m / 2 - 1,
        })
    }

    pub fn dim(&self) -> usize {
        self.prices + self.amplitudes + self.phases
    }

    /// Recovers the layout from a total dimension (`dim = 2m - 1` for a
    /// window of length `m`). Lets a consumer of a stored model infer the
    /// window length it was trained with.
    pub fn from_dim(dim: usize) -> Result<Self> {
        if dim % 2 == 0 {
            return Err(Error::Config(format!(
                "feature dimension must be odd (2m - 1), got {dim}"
            )));
        }
        Self::for_window((dim + 1) / 2)
    }
}

/// Min-max normalizes a window into [0, 1]. A constant window maps to
/// all 0.5 (midpoint keeps zero-range windows away from both decision
/// thresholds).
pub fn normalize_window(window: &[f64]) -> Vec<f64> {
    debug_assert!(window.len() >= 2);
    let min = window.iter().cloned().fold(f64::MAX, f64::min);
    let max = window.iter().cloned().fold(f64::MIN, f64::max);
    let range = max - min;
    if range == 0.0 {
        return vec![0.5; window.len()];
    }
    window.iter().map(|x| (x - min) / range).collect()
}

/// Amplitude and phase coefficients of the real DFT of `window`.
///
/// Amplitudes are `|c_k| * 2/m` for `k = 1..=m/2`; phases are
/// `atan2(Im c_k, Re c_k)` mapped from (-pi, pi] to [0, 1] for
/// `k = 1..=m/2-1`. The DC term carries no shape information for a
/// normalized window and is dropped.
pub fn dft_features(window: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = window.len();
    if m < 2 || m % 2 != 0 {
        return Err(Error::Config(format!(
            "DFT features need an even window length >= 2, got {m}"
        )));
    }
    let mut amplitudes = Vec::with_capacity(m / 2);
    let mut phases = Vec::with_capacity(m / 2 - 1);
    for k in 1..=m / 2 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, &x) in window.iter().enumerate() {
            let angle = 2.0 * PI * (j * k) as f64 / m as f64;
            re += x * angle.cos();
            im -= x * angle.sin();
        }
        amplitudes.push((re * re + im * im).sqrt() * 2.0 / m as f64);
        if k < m / 2 {
            let phi = im.atan2(re);
            phases.push((phi + PI) / (2.0 * PI));
        }
    }
    Ok((amplitudes, phases))
}

/// Full feature vector of a backward window: normalized prices followed
/// by the DFT amplitudes and phases of the normalized window.
pub fn feature_vector(window: &[f64]) -> Result<Vec<f64>> {
    let layout = FeatureLayout::for_window(window.len())?;
    let normalized = normalize_window(window);
    let (amplitudes, phases) = dft_features(&normalized)?;
    let mut out = normalized;
    out.reserve(layout.amplitudes + layout.phases);
    out.extend_from_slice(&amplitudes);
    out.extend_from_slice(&phases);
    debug_assert_eq!(out.len(), layout.dim());
    Ok(out)
}

/// One training row: features of the backward window of day `t` and the
/// oscillator target at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRow {
    pub t: usize,
    pub features: Vec<f64>,
    pub target: f64,
}

/// A chronological set of labeled feature rows sharing one layout.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub layout: FeatureLayout,
    pub rows: Vec<LabeledRow>,
}

impl LabeledSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Builds the labeled dataset for `range`: pivots and the oscillator are
/// computed from the prices of `range` alone (hindsight confined to the
/// segment), while backward windows may reach into earlier data. A row
/// exists for every `t` in `range` with `t >= m` and a defined target.
pub fn build_dataset(
    prices: &[f64],
    range: Range<usize>,
    spec: &PivotSpec,
    m: usize,
) -> Result<LabeledSet> {
    if range.end > prices.len() || range.start >= range.end {
        return Err(Error::OutOfRange(format!(
            "range {range:?} not inside series of length {}",
            prices.len()
        )));
    }
    let layout = FeatureLayout::for_window(m)?;
    let segment = &prices[range.clone()];
    let candidates = find_candidates(segment, spec)?;
    let alt = alternate(&candidates);
    if alt.len() < 2 {
        return Err(Error::EmptyDataset);
    }
    let osc = build_oscillator(segment, &alt)?;

    let mut rows = Vec::new();
    for t in range.clone() {
        if t < m {
            continue;
        }
        let Some(target) = osc.value(t - range.start) else {
            continue;
        };
        let features = feature_vector(&prices[t - m..t])?;
        rows.push(LabeledRow { t, features, target });
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(LabeledSet { layout, rows })
}
