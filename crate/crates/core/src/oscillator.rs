//! The turning-point oscillator: the regression target mapping prices to
//! [0, 1], pinned to 0 at troughs and 1 at peaks and interpolated in
//! between.

use crate::error::{Error, Result};
use crate::pivots::{AlternatingPivots, PivotKind};

/// Oscillator values aligned to series indices between the first and last
/// pivot (inclusive). Outside that span the oscillator is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct Oscillator {
    values: Vec<f64>,
    offset: usize,
}

impl Oscillator {
    /// Value at series index `t`, or `None` outside the defined span.
    pub fn value(&self, t: usize) -> Option<f64> {
        if t < self.offset {
            return None;
        }
        self.values.get(t - self.offset).copied()
    }

    /// Index of the first defined value.
    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Index of the last defined value.
    pub fn last_t(&self) -> usize {
        self.offset + self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(t, value)` pairs over the defined span.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (i + self.offset, v))
    }
}

/// Builds the oscillator for `prices` from its alternating pivot
/// sequence.
///
/// Pivot indices are assigned exactly 0 (troughs) or 1 (peaks). Between
/// an adjacent trough/peak pair the value is `(x - T) / (P - T)` where `T`
/// and `P` are the surrounding trough and peak prices; interior values
/// that stray outside [0, 1] (possible when the true extremum between two
/// retained pivots was filtered out) are clamped.
pub fn build_oscillator(prices: &[f64], alt: &AlternatingPivots) -> Result<Oscillator> {
    let pivots = alt.pivots();
    if pivots.len() < 2 {
        return Err(Error::Validation(format!(
            "oscillator needs at least two pivots, got {}",
            pivots.len()
        )));
    }
    let first = pivots[0].t;
    let last = pivots[pivots.len() - 1].t;
    debug_assert!(last < prices.len());

    let mut values = vec![0.0f64; last - first + 1];
    for pair in pivots.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (trough, peak) = match a.kind {
            PivotKind::Trough => (a.value, b.value),
            PivotKind::Peak => (b.value, a.value),
        };
        let denom = peak - trough;
        if denom == 0.0 {
            return Err(Error::DegenerateSwing(peak));
        }
        for t in a.t..=b.t {
            values[t - first] = ((prices[t] - trough) / denom).clamp(0.0, 1.0);
        }
    }
    // Pin pivots to their exact boundary values.
    for p in pivots {
        values[p.t - first] = match p.kind {
            PivotKind::Trough => 0.0,
            PivotKind::Peak => 1.0,
        };
    }
    Ok(Oscillator { values, offset: first })
}
