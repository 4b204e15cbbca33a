//! Model selection: the turning-point-specific error function (TpRMSE),
//! exhaustive threshold optimization, and the grid search that picks the
//! SVR hyper-parameter triple with minimal validation TpRMSE.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::features::{feature_vector, LabeledSet};
use crate::oscillator::build_oscillator;
use crate::pivots::{alternate, find_candidates, PivotSpec};
use crate::svr::{train, SvrModel, SvrParams, TrainConfig};

/// Decision thresholds turning oscillator predictions into trough/peak
/// calls. Invariant: `0 <= low <= high <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub low: f64,
    pub high: f64,
}

impl Thresholds {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&low) || !(0.0..=1.0).contains(&high) || low > high {
            return Err(Error::Config(format!(
                "thresholds must satisfy 0 <= low <= high <= 1, got ({low}, {high})"
            )));
        }
        Ok(Self { low, high })
    }
}

/// Root mean square error between two aligned sequences.
pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch { left: predicted.len(), right: actual.len() });
    }
    if predicted.is_empty() {
        return Err(Error::Validation("rmse of empty sequences".to_string()));
    }
    let sum: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok((sum / predicted.len() as f64).sqrt())
}

/// The trimmed reference sequence. Per index the five cases are checked
/// in order and the first match wins:
///
/// 1. target is 1 and prediction below `high`  -> `high`  (missed peak)
/// 2. target is not 1 and prediction above `high` -> `high` (false peak)
/// 3. target is 0 and prediction above `low`   -> `low`   (missed trough)
/// 4. target is not 0 and prediction below `low` -> `low` (false trough)
/// 5. otherwise the prediction itself (no penalty).
///
/// Targets hit 0 and 1 exactly at pivots, so the equality tests are
/// exact; clamped interior values that reach 0 or 1 are deliberately
/// treated the same way.
pub fn trim_reference(gamma: &[f64], gamma_hat: &[f64], th: Thresholds) -> Vec<f64> {
    assert_eq!(gamma.len(), gamma_hat.len(), "sequences must be aligned");
    gamma
        .iter()
        .zip(gamma_hat)
        .map(|(&g, &gh)| {
            if g == 1.0 && gh < th.high {
                th.high
            } else if g != 1.0 && gh > th.high {
                th.high
            } else if g == 0.0 && gh > th.low {
                th.low
            } else if g != 0.0 && gh < th.low {
                th.low
            } else {
                gh
            }
        })
        .collect()
}

/// RMSE between the trimmed reference and the prediction: zero exactly
/// when no threshold-relative mistake was made.
pub fn tprmse(gamma: &[f64], gamma_hat: &[f64], th: Thresholds) -> Result<f64> {
    let reference = trim_reference(gamma, gamma_hat, th);
    rmse(&reference, gamma_hat)
}

/// A one-dimensional grid of threshold values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    values: Vec<f64>,
}

impl ThresholdGrid {
    /// Uniform grid over [0, 1] with the given step (default 0.01).
    pub fn from_step(step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0 && step <= 1.0) {
            return Err(Error::Config(format!("threshold step must be in (0, 1], got {step}")));
        }
        let count = (1.0 / step).round() as usize;
        let values = (0..=count).map(|i| (i as f64 * step).min(1.0)).collect();
        Ok(Self { values })
    }

    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        if values.is_empty() || values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Config("threshold grid must be non-empty within [0, 1]".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        Self::from_step(0.01).unwrap()
    }
}

/// Exhaustive search over all feasible (low <= high) grid pairs for the
/// pair minimizing TpRMSE. Ties resolve to the smallest `low`, then the
/// smallest `high` (the iteration order makes this automatic with strict
/// improvement).
pub fn optimize_thresholds(
    gamma: &[f64],
    gamma_hat: &[f64],
    grid: &ThresholdGrid,
) -> Result<(Thresholds, f64)> {
    if grid.values.is_empty() {
        return Err(Error::Config("empty threshold grid".to_string()));
    }
    let mut best: Option<(Thresholds, f64)> = None;
    for (i, &low) in grid.values.iter().enumerate() {
        for &high in &grid.values[i..] {
            let th = Thresholds { low, high };
            let score = tprmse(gamma, gamma_hat, th)?;
            if best.as_ref().is_none_or(|(_, s)| score < *s) {
                best = Some((th, score));
            }
        }
    }
    best.ok_or_else(|| Error::Config("no feasible threshold pair".to_string()))
}

/// The SVR hyper-parameter grid. Values are kept sorted ascending so the
/// documented tie-break order (first by C, then sigma, then epsilon) is
/// the iteration order.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrGrid {
    c: Vec<f64>,
    sigma: Vec<f64>,
    epsilon: Vec<f64>,
}

impl SvrGrid {
    pub fn new(mut c: Vec<f64>, mut sigma: Vec<f64>, mut epsilon: Vec<f64>) -> Result<Self> {
        for (name, values) in [("c", &mut c), ("sigma", &mut sigma), ("epsilon", &mut epsilon)] {
            if values.is_empty() {
                return Err(Error::Config(format!("empty {name} grid")));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("non-finite value in {name} grid")));
            }
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            values.dedup();
        }
        Ok(Self { c, sigma, epsilon })
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn epsilon(&self) -> &[f64] {
        &self.epsilon
    }

    /// All triples in tie-break order.
    pub fn triples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.c.iter().flat_map(move |&c| {
            self.sigma.iter().flat_map(move |&sigma| {
                self.epsilon.iter().map(move |&epsilon| (c, sigma, epsilon))
            })
        })
    }
}

impl Default for SvrGrid {
    /// The coarse experiment grid: {0.1, 1, 100}^2 x {0.01, 0.05, 0.1}.
    fn default() -> Self {
        Self::new(
            vec![0.1, 1.0, 100.0],
            vec![0.1, 1.0, 100.0],
            vec![0.01, 0.05, 0.1],
        )
        .unwrap()
    }
}

/// A fully fitted predictor: the trained SVR, its thresholds, and the
/// validation score that selected it.
#[derive(Debug, Clone)]
pub struct FittedPredictor {
    pub model: SvrModel,
    pub thresholds: Thresholds,
    pub spec: PivotSpec,
    pub window: usize,
    pub validation_score: f64,
}

/// Grid-search model selection.
///
/// For every hyper-parameter triple: train on `train_set`, predict the
/// oscillator over the validation range, optimize thresholds there, and
/// keep the triple with minimal validation TpRMSE (ties go to the first
/// triple in grid order). Validation targets come from the validation
/// segment's own pivots; backward windows may reach into earlier data.
///
/// `prices` must end exactly at `valid_range.end`, which makes it
/// impossible to read anything after the validation segment here.
pub fn select_model(
    train_set: &LabeledSet,
    prices: &[f64],
    valid_range: Range<usize>,
    spec: &PivotSpec,
    m: usize,
    grid: &SvrGrid,
    threshold_grid: &ThresholdGrid,
    cfg: &TrainConfig,
) -> Result<FittedPredictor> {
    if valid_range.end != prices.len() {
        return Err(Error::Config(format!(
            "price slice must end at the validation boundary: range {valid_range:?}, len {}",
            prices.len()
        )));
    }
    if valid_range.start >= valid_range.end {
        return Err(Error::Config("empty validation range".to_string()));
    }

    // Validation targets from the validation segment's own oscillator.
    let segment = &prices[valid_range.clone()];
    let candidates = find_candidates(segment, spec)?;
    let alt = alternate(&candidates);
    if alt.len() < 2 {
        return Err(Error::Selection(format!(
            "validation segment has {} pivot(s); oscillator undefined",
            alt.len()
        )));
    }
    let osc = build_oscillator(segment, &alt)?;

    let mut eligible: Vec<(usize, f64)> = Vec::new(); // (t, gamma)
    for t in valid_range.clone() {
        if t < m {
            continue;
        }
        if let Some(g) = osc.value(t - valid_range.start) {
            eligible.push((t, g));
        }
    }
    if eligible.is_empty() {
        return Err(Error::Selection("no eligible validation rows".to_string()));
    }
    let gamma: Vec<f64> = eligible.iter().map(|&(_, g)| g).collect();
    let windows: Vec<Vec<f64>> = eligible
        .iter()
        .map(|&(t, _)| feature_vector(&prices[t - m..t]))
        .collect::<Result<_>>()?;

    let mut best: Option<FittedPredictor> = None;
    let mut last_error: Option<Error> = None;
    for (c, sigma, epsilon) in grid.triples() {
        let params = match SvrParams::new(c, epsilon, sigma) {
            Ok(p) => p,
            Err(e) => {
                log::warn!("skipping grid point (C={c}, sigma={sigma}, eps={epsilon}): {e}");
                last_error = Some(e);
                continue;
            }
        };
        let model = match train(train_set, &params, cfg) {
            Ok(m) => m,
            Err(e) => {
                log::warn!("skipping grid point (C={c}, sigma={sigma}, eps={epsilon}): {e}");
                last_error = Some(e);
                continue;
            }
        };
        let gamma_hat: Vec<f64> = match windows.iter().map(|w| model.predict(w)).collect() {
            Ok(v) => v,
            Err(e) => {
                log::warn!("skipping grid point (C={c}, sigma={sigma}, eps={epsilon}): {e}");
                last_error = Some(e);
                continue;
            }
        };
        let (thresholds, score) = optimize_thresholds(&gamma, &gamma_hat, threshold_grid)?;
        if best.as_ref().is_none_or(|b| score < b.validation_score) {
            best = Some(FittedPredictor {
                model,
                thresholds,
                spec: *spec,
                window: m,
                validation_score: score,
            });
        }
    }

    best.ok_or_else(|| {
        Error::Selection(format!(
            "every grid point failed; last error: {}",
            last_error.map_or_else(|| "none".to_string(), |e| e.to_string())
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rmse_matches_direct_summation() {
        let mut state = 3u64;
        let mut rand = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as f64 / (1u64 << 31) as f64
        };
        let a: Vec<f64> = (0..100).map(|_| rand()).collect();
        let b: Vec<f64> = (0..100).map(|_| rand()).collect();
        let direct = {
            let mut s = 0.0;
            for i in 0..100 {
                s += (a[i] - b[i]).powi(2);
            }
            (s / 100.0).sqrt()
        };
        assert!((rmse(&a, &b).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn trim_reference_passes_clean_predictions_through() {
        let th = Thresholds::new(0.2, 0.8).unwrap();
        let gamma = [0.0, 0.4, 1.0, 0.5, 0.0];
        let gamma_hat = [0.1, 0.4, 0.9, 0.5, 0.15];
        let trimmed = trim_reference(&gamma, &gamma_hat, th);
        assert_eq!(trimmed, gamma_hat);
        assert_eq!(tprmse(&gamma, &gamma_hat, th).unwrap(), 0.0);
    }

    #[test]
    fn trim_reference_high_false_positive() {
        let th = Thresholds::new(0.2, 0.8).unwrap();
        let trimmed = trim_reference(&[0.5], &[0.9], th);
        assert_eq!(trimmed, vec![0.8]);
        assert!((tprmse(&[0.5], &[0.9], th).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn trim_reference_high_false_negative() {
        let th = Thresholds::new(0.2, 0.8).unwrap();
        let trimmed = trim_reference(&[1.0], &[0.6], th);
        assert_eq!(trimmed, vec![0.8]);
        assert!((tprmse(&[1.0], &[0.6], th).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn trim_reference_case_order_first_match_wins() {
        let th = Thresholds::new(0.2, 0.8).unwrap();
        // Target 0 with a prediction above high: the "false peak" case
        // (2) fires before the "missed trough" case (3).
        assert_eq!(trim_reference(&[0.0], &[0.95], th), vec![0.8]);
        // Target 1 with a prediction below low: case (1) fires first.
        assert_eq!(trim_reference(&[1.0], &[0.1], th), vec![0.8]);
    }

    proptest! {
        #[test]
        fn tprmse_bounded_and_permutation_invariant(
            pairs in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..40),
            low in 0.0f64..=1.0,
            spread in 0.0f64..=1.0,
        ) {
            let high = (low + spread * (1.0 - low)).min(1.0);
            let th = Thresholds::new(low, high).unwrap();
            let gamma: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let gamma_hat: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let v = tprmse(&gamma, &gamma_hat, th).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));

            let mut reversed_g = gamma.clone();
            let mut reversed_gh = gamma_hat.clone();
            reversed_g.reverse();
            reversed_gh.reverse();
            let w = tprmse(&reversed_g, &reversed_gh, th).unwrap();
            prop_assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn tprmse_zero_iff_reference_equals_prediction() {
        let th = Thresholds::new(0.3, 0.7).unwrap();
        let gamma = [0.0, 0.5, 1.0];
        let gamma_hat = [0.2, 0.5, 0.8];
        assert_eq!(tprmse(&gamma, &gamma_hat, th).unwrap(), 0.0);
        let gamma_hat_bad = [0.35, 0.5, 0.8];
        assert!(tprmse(&gamma, &gamma_hat_bad, th).unwrap() > 0.0);
    }

    /// Naive double-loop oracle for the threshold search.
    fn threshold_oracle(gamma: &[f64], gamma_hat: &[f64], values: &[f64]) -> (Thresholds, f64) {
        let mut best: Option<(Thresholds, f64)> = None;
        for &low in values {
            for &high in values {
                if low > high {
                    continue;
                }
                let th = Thresholds { low, high };
                let s = tprmse(gamma, gamma_hat, th).unwrap();
                let replace = match &best {
                    None => true,
                    Some((b, bs)) => {
                        s < *bs
                            || (s == *bs && (low < b.low || (low == b.low && high < b.high)))
                    }
                };
                if replace {
                    best = Some((th, s));
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn optimize_thresholds_matches_oracle_on_coarse_grid() {
        let grid = ThresholdGrid::from_step(0.1).unwrap();
        let mut state = 99u64;
        let mut rand = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as f64 / (1u64 << 31) as f64
        };
        for _ in 0..100 {
            let n = 1 + (rand() * 30.0) as usize;
            let gamma: Vec<f64> = (0..n)
                .map(|_| {
                    let v = rand();
                    if v < 0.1 { 0.0 } else if v > 0.9 { 1.0 } else { v }
                })
                .collect();
            let gamma_hat: Vec<f64> = (0..n).map(|_| rand()).collect();
            let (th, score) = optimize_thresholds(&gamma, &gamma_hat, &grid).unwrap();
            let (oth, oscore) = threshold_oracle(&gamma, &gamma_hat, grid.values());
            assert_eq!(th, oth);
            assert_eq!(score, oscore);
        }
    }

    #[test]
    fn optimize_thresholds_finds_zero_error_pair() {
        let gamma = [0.0, 0.5, 1.0];
        let gamma_hat = [0.2, 0.5, 0.8];
        let grid = ThresholdGrid::from_values(vec![0.25, 0.5, 0.75]).unwrap();
        let (th, score) = optimize_thresholds(&gamma, &gamma_hat, &grid).unwrap();
        assert_eq!(score, 0.0);
        // Several pairs reach zero error; the tie-break keeps the
        // smallest low, then the smallest high.
        assert_eq!(th, Thresholds { low: 0.25, high: 0.5 });
    }

    #[test]
    fn default_grid_matches_experiment_values() {
        let g = SvrGrid::default();
        assert_eq!(g.c(), &[0.1, 1.0, 100.0]);
        assert_eq!(g.sigma(), &[0.1, 1.0, 100.0]);
        assert_eq!(g.epsilon(), &[0.01, 0.05, 0.1]);
        assert_eq!(g.triples().count(), 27);
        assert_eq!(ThresholdGrid::default().values().len(), 101);
    }
}
