//! Turning-point detection under three importance criteria (degree,
//! impact, momentum) and extraction of a cleaned alternating pivot
//! sequence.
//!
//! All detection here relies on hindsight; it is only valid for building
//! training targets, never as a causal signal.

use crate::error::{Error, Result};

/// Whether a pivot is a local maximum or a local minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotKind {
    Peak,
    Trough,
}

impl PivotKind {
    pub fn opposite(self) -> Self {
        match self {
            PivotKind::Peak => PivotKind::Trough,
            PivotKind::Trough => PivotKind::Peak,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PivotKind::Peak => "peak",
            PivotKind::Trough => "trough",
        }
    }
}

/// A detected turning point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pivot {
    pub t: usize,
    pub kind: PivotKind,
    pub value: f64,
}

/// Selection criterion for which turning points count.
///
/// `gamma` is a fractional threshold (0.02 = 2%); a trough qualifies when
/// its ratio is at least `1 + gamma`, a peak when its ratio is at most
/// `1 - gamma` (both inclusive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PivotSpec {
    /// Strict extremum against `k` neighbors on each side.
    Degree { k: usize },
    /// Post-pivot move, measured until price first crosses back through
    /// the pivot level.
    Impact { gamma: f64 },
    /// Post-pivot move within a fixed lookahead window of `w` days.
    Momentum { gamma: f64, lookahead: usize },
}

impl PivotSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PivotSpec::Degree { k } if k < 1 => {
                Err(Error::Config("pivot degree K must be >= 1".to_string()))
            }
            PivotSpec::Impact { gamma } | PivotSpec::Momentum { gamma, .. }
                if !(gamma.is_finite() && gamma > 0.0) =>
            {
                Err(Error::Config("gamma must be a positive fraction".to_string()))
            }
            PivotSpec::Momentum { lookahead, .. } if lookahead < 1 => {
                Err(Error::Config("momentum lookahead must be >= 1".to_string()))
            }
            _ => Ok(()),
        }
    }
}

/// Finds all pivots of degree `k`: indices strictly above (peaks) or
/// strictly below (troughs) their `k` neighbors on both sides. Indices
/// within `k` of either boundary are never pivots.
pub fn find_pivots_degree(prices: &[f64], k: usize) -> Result<Vec<Pivot>> {
    if k < 1 {
        return Err(Error::Config("pivot degree K must be >= 1".to_string()));
    }
    let n = prices.len();
    let mut out = Vec::new();
    if n < 2 * k + 1 {
        return Ok(out);
    }
    for t in k..n - k {
        let x = prices[t];
        let peak = (1..=k).all(|j| x > prices[t - j] && x > prices[t + j]);
        let trough = (1..=k).all(|j| x < prices[t - j] && x < prices[t + j]);
        if peak {
            out.push(Pivot { t, kind: PivotKind::Peak, value: x });
        } else if trough {
            out.push(Pivot { t, kind: PivotKind::Trough, value: x });
        }
    }
    Ok(out)
}

/// Impact ratio of a pivot at `t`.
///
/// Trough: `max(x[t..=n]) / x[t]` where `n` is the first index after `t`
/// with `x[n] < x[t]`; if the price never dips back below, the maximum of
/// the remaining series is used. Result is >= 1.
///
/// Peak: conversely, `min(x[t..=n]) / x[t]` with `n` the first index back
/// above `x[t]`. Result is <= 1.
pub fn impact_of(prices: &[f64], t: usize, kind: PivotKind) -> Result<f64> {
    if t + 1 >= prices.len() {
        return Err(Error::OutOfRange(format!(
            "impact undefined at t = {t}: nothing after the pivot"
        )));
    }
    let x = prices[t];
    let crossed = |p: f64| match kind {
        PivotKind::Trough => p < x,
        PivotKind::Peak => p > x,
    };
    let end = (t + 1..prices.len())
        .find(|&i| crossed(prices[i]))
        .unwrap_or(prices.len() - 1);
    let window = &prices[t..=end];
    let extreme = match kind {
        PivotKind::Trough => window.iter().cloned().fold(f64::MIN, f64::max),
        PivotKind::Peak => window.iter().cloned().fold(f64::MAX, f64::min),
    };
    Ok(extreme / x)
}

/// Momentum ratio of a pivot at `t` with a lookahead of `w` days:
/// `max(x[t+1..=t+w]) / x[t]` for a trough, `min(...) / x[t]` for a peak.
pub fn momentum_of(prices: &[f64], t: usize, w: usize, kind: PivotKind) -> Result<f64> {
    if w < 1 {
        return Err(Error::Config("momentum lookahead must be >= 1".to_string()));
    }
    if t + w >= prices.len() {
        return Err(Error::OutOfRange(format!(
            "momentum at t = {t} needs {w} future prices, series has {}",
            prices.len()
        )));
    }
    let window = &prices[t + 1..=t + w];
    let extreme = match kind {
        PivotKind::Trough => window.iter().cloned().fold(f64::MIN, f64::max),
        PivotKind::Peak => window.iter().cloned().fold(f64::MAX, f64::min),
    };
    Ok(extreme / prices[t])
}

/// Finds all candidate pivots satisfying `spec`, sorted by index.
///
/// Degree uses `find_pivots_degree` directly; impact and momentum start
/// from degree-1 pivots and keep those whose ratio clears the threshold.
/// Pivots whose property cannot be evaluated near the end of the series
/// are excluded.
pub fn find_candidates(prices: &[f64], spec: &PivotSpec) -> Result<Vec<Pivot>> {
    spec.validate()?;
    match *spec {
        PivotSpec::Degree { k } => find_pivots_degree(prices, k),
        PivotSpec::Impact { gamma } => {
            let base = find_pivots_degree(prices, 1)?;
            let mut out = Vec::new();
            for p in base {
                let Ok(ratio) = impact_of(prices, p.t, p.kind) else {
                    continue;
                };
                let keep = match p.kind {
                    PivotKind::Trough => ratio >= 1.0 + gamma,
                    PivotKind::Peak => ratio <= 1.0 - gamma,
                };
                if keep {
                    out.push(p);
                }
            }
            Ok(out)
        }
        PivotSpec::Momentum { gamma, lookahead } => {
            let base = find_pivots_degree(prices, 1)?;
            let mut out = Vec::new();
            for p in base {
                let Ok(ratio) = momentum_of(prices, p.t, lookahead, p.kind) else {
                    continue;
                };
                let keep = match p.kind {
                    PivotKind::Trough => ratio >= 1.0 + gamma,
                    PivotKind::Peak => ratio <= 1.0 - gamma,
                };
                if keep {
                    out.push(p);
                }
            }
            Ok(out)
        }
    }
}

/// A pivot sequence that strictly alternates between peaks and troughs.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingPivots {
    pivots: Vec<Pivot>,
}

impl AlternatingPivots {
    pub fn pivots(&self) -> &[Pivot] {
        &self.pivots
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn first(&self) -> Option<&Pivot> {
        self.pivots.first()
    }

    pub fn last(&self) -> Option<&Pivot> {
        self.pivots.last()
    }
}

/// Cleans a sorted candidate list into an alternating pivot sequence.
///
/// Phase 1 walks the candidates keeping the first pivot and then
/// repeatedly the next pivot of opposite kind; same-kind pivots in
/// between go to a discard set. Phase 2 improves the result: each
/// interior pivot is replaced by a strictly better discarded candidate of
/// the same kind lying strictly between its two neighbors, when one
/// exists (highest wins for peaks, lowest for troughs; ties keep the
/// earliest).
///
/// An empty candidate list yields an empty result.
pub fn alternate(candidates: &[Pivot]) -> AlternatingPivots {
    debug_assert!(
        candidates.windows(2).all(|w| w[0].t < w[1].t),
        "candidates must be sorted by index"
    );
    let mut kept: Vec<Pivot> = Vec::new();
    let mut discarded: Vec<Pivot> = Vec::new();
    for &c in candidates {
        match kept.last() {
            Some(last) if last.kind == c.kind => discarded.push(c),
            _ => kept.push(c),
        }
    }

    // Phase 2: improve interior pivots against the discard set.
    for i in 1..kept.len().saturating_sub(1) {
        let lo = kept[i - 1].t;
        let hi = kept[i + 1].t;
        let current = kept[i];
        let better = |cand: &Pivot, best: &Pivot| match current.kind {
            PivotKind::Peak => cand.value > best.value,
            PivotKind::Trough => cand.value < best.value,
        };
        let mut best = current;
        for d in &discarded {
            if d.kind == current.kind && d.t > lo && d.t < hi && better(d, &best) {
                best = *d;
            }
        }
        kept[i] = best;
    }

    AlternatingPivots { pivots: kept }
}
