//! Nonparametric statistical validation: Wilcoxon signed-rank for paired
//! comparisons, the Friedman test for multiple methods over multiple
//! tasks, and the Bonferroni-Dunn post-hoc grouping.
//!
//! The chi-square tail and normal distribution functions are implemented
//! here via the regularized incomplete gamma function (series +
//! continued fraction) and checked against tabulated quantiles in the
//! test suite.

use crate::error::{Error, Result};

// ---------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------

const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let t = x + 7.5;
        let mut a = LANCZOS[0];
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    let fpmin = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / fpmin;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = b + an / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized upper incomplete gamma Q(a, x).
pub(crate) fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

/// Survival function of the chi-square distribution with `dof` degrees
/// of freedom.
pub fn chi_square_sf(x: f64, dof: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    regularized_gamma_q(dof as f64 / 2.0, x / 2.0)
}

/// Standard normal CDF via the incomplete gamma route:
/// `erfc(z) = Q(1/2, z^2)` for `z >= 0`.
pub fn normal_cdf(x: f64) -> f64 {
    let z = -x / std::f64::consts::SQRT_2;
    let erfc = if z >= 0.0 {
        regularized_gamma_q(0.5, z * z)
    } else {
        2.0 - regularized_gamma_q(0.5, z * z)
    };
    0.5 * erfc
}

/// Standard normal quantile by bisection on the CDF. Accurate far beyond
/// the 1e-3 the critical-difference formula needs.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::Stats(format!("quantile needs p in (0, 1), got {p}")));
    }
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------
// Ranking
// ---------------------------------------------------------------------

/// 1-based ranks with ties sharing their average rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

// ---------------------------------------------------------------------
// Wilcoxon signed-rank
// ---------------------------------------------------------------------

/// Two equal-length metric sequences, one value per task for each of two
/// methods.
#[derive(Debug, Clone)]
pub struct PairedSample {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PairedSample {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { left: a.len(), right: b.len() });
        }
        if a.is_empty() {
            return Err(Error::Stats("empty paired sample".to_string()));
        }
        if !a.iter().chain(&b).all(|v| v.is_finite()) {
            return Err(Error::Stats("non-finite value in paired sample".to_string()));
        }
        Ok(Self { a, b })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WilcoxonMode {
    /// Full enumeration of the 2^n sign assignments. Used up to n = 25.
    Exact,
    /// Normal approximation with tie and continuity corrections.
    Normal,
    /// Exact when n <= 25, normal otherwise.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonResult {
    /// Sum of ranks of the positive differences (W+).
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Pairs remaining after zero differences are dropped.
    pub n_used: usize,
    pub exact: bool,
}

const EXACT_LIMIT: usize = 25;

/// Two-sided Wilcoxon signed-rank test of `a` against `b`. Zero
/// differences are dropped before ranking; if every difference is zero
/// the result is the degenerate p = 1.
pub fn wilcoxon_signed_rank(sample: &PairedSample, mode: WilcoxonMode) -> Result<WilcoxonResult> {
    let diffs: Vec<f64> = sample
        .a
        .iter()
        .zip(&sample.b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult { statistic: 0.0, p_value: 1.0, n_used: 0, exact: true });
    }

    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();

    let exact = match mode {
        WilcoxonMode::Exact => true,
        WilcoxonMode::Normal => false,
        WilcoxonMode::Auto => n <= EXACT_LIMIT,
    };

    let p_value = if exact {
        if n > EXACT_LIMIT {
            return Err(Error::Stats(format!(
                "exact enumeration limited to n <= {EXACT_LIMIT}, got {n}"
            )));
        }
        exact_p(&ranks, w_plus)
    } else {
        normal_p(&abs, &ranks, w_plus)
    };

    Ok(WilcoxonResult { statistic: w_plus, p_value, n_used: n, exact })
}

/// Exact two-sided p by enumerating all 2^n sign assignments with a Gray
/// code. Average ranks are half-integers, so doubling them makes every
/// subset sum an exact integer.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len();
    let scaled: Vec<u64> = ranks.iter().map(|r| (2.0 * r).round() as u64).collect();
    let w2 = (2.0 * w_plus).round() as u64;
    let total = 1u128 << n;
    let mut sum = 0u64; // subset sum for the current Gray code word
    let mut le = 0u64;
    let mut ge = 0u64;
    for m in 0..total {
        if sum <= w2 {
            le += 1;
        }
        if sum >= w2 {
            ge += 1;
        }
        let next = m + 1;
        if next == total {
            break;
        }
        let bit = next.trailing_zeros() as usize;
        let gray_next = (next ^ (next >> 1)) as u64;
        if (gray_next >> bit) & 1 == 1 {
            sum += scaled[bit];
        } else {
            sum -= scaled[bit];
        }
    }
    let p = 2.0 * (le.min(ge) as f64) / total as f64;
    p.min(1.0)
}

/// Normal approximation with the tie correction on the variance and a
/// 0.5 continuity correction toward the mean.
fn normal_p(abs: &[f64], ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    // Tie groups over |d|.
    let mut sorted = abs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        var -= (t * t * t - t) / 48.0;
        i = j + 1;
    }
    if var <= 0.0 {
        return 1.0;
    }
    let centered = w_plus - mean;
    let adjusted = centered - 0.5 * centered.signum();
    let z = if centered == 0.0 { 0.0 } else { adjusted / var.sqrt() };
    (2.0 * (1.0 - normal_cdf(z.abs()))).min(1.0)
}

// ---------------------------------------------------------------------
// Friedman and Bonferroni-Dunn
// ---------------------------------------------------------------------

/// Tasks-by-methods matrix of metric values. Ranking is ascending (rank
/// 1 is the smallest value), so pass losses, or negate gains.
#[derive(Debug, Clone)]
pub struct RankTable {
    rows: Vec<Vec<f64>>,
    n_methods: usize,
}

impl RankTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_methods = rows.first().map_or(0, Vec::len);
        if n_methods < 2 {
            return Err(Error::Stats("rank table needs at least 2 methods".to_string()));
        }
        for row in &rows {
            if row.len() != n_methods {
                return Err(Error::DimensionMismatch { left: n_methods, right: row.len() });
            }
            if !row.iter().all(|v| v.is_finite()) {
                return Err(Error::Stats("non-finite value in rank table".to_string()));
            }
        }
        Ok(Self { rows, n_methods })
    }

    pub fn n_tasks(&self) -> usize {
        self.rows.len()
    }

    pub fn n_methods(&self) -> usize {
        self.n_methods
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Mean rank per method (rank 1 = best under ascending ranking).
    pub mean_ranks: Vec<f64>,
    pub n_tasks: usize,
    pub n_methods: usize,
}

/// Friedman test: within-task average ranking with ties, chi-square
/// statistic with `k - 1` degrees of freedom (tie-corrected), p from the
/// chi-square tail. Fully tied tables degenerate to statistic 0, p 1.
pub fn friedman(table: &RankTable) -> Result<FriedmanResult> {
    let k = table.n_methods();
    let n = table.n_tasks();
    if n < 2 {
        return Err(Error::Stats(format!("friedman needs at least 2 tasks, got {n}")));
    }
    let mut rank_sums = vec![0.0f64; k];
    let mut tie_term = 0.0f64;
    for row in &table.rows {
        let ranks = average_ranks(row);
        for (s, r) in rank_sums.iter_mut().zip(&ranks) {
            *s += r;
        }
        // Tie groups within the row.
        let mut sorted = row.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    let mean_ranks: Vec<f64> = rank_sums.iter().map(|s| s / n as f64).collect();
    let (nf, kf) = (n as f64, k as f64);
    let ssbn: f64 = rank_sums.iter().map(|s| s * s).sum();
    let uncorrected = 12.0 / (nf * kf * (kf + 1.0)) * ssbn - 3.0 * nf * (kf + 1.0);
    let correction = 1.0 - tie_term / (nf * kf * (kf * kf - 1.0));
    let statistic = if correction <= 0.0 {
        0.0
    } else {
        (uncorrected / correction).max(0.0)
    };
    let p_value = chi_square_sf(statistic, k - 1);
    Ok(FriedmanResult { statistic, p_value, mean_ranks, n_tasks: n, n_methods: k })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DunnResult {
    pub critical_difference: f64,
    /// Method indices grouped by statistical indistinguishability,
    /// ordered best group first.
    pub groups: Vec<Vec<usize>>,
}

/// Bonferroni-Dunn post-hoc grouping after a rejected Friedman test.
///
/// The critical difference is `q_alpha * sqrt(k (k+1) / (6 N))` with the
/// Bonferroni-adjusted normal quantile `q_alpha = z(1 - alpha / (2(k-1)))`.
/// Methods whose mean rank is within CD of the group's best share a
/// group.
pub fn bonferroni_dunn(friedman: &FriedmanResult, alpha: f64) -> Result<DunnResult> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Stats(format!("alpha must be in (0, 1), got {alpha}")));
    }
    if friedman.p_value >= alpha {
        return Err(Error::Stats(format!(
            "post-hoc test requires a rejected Friedman test (p = {:.4} >= alpha = {alpha})",
            friedman.p_value
        )));
    }
    let k = friedman.n_methods as f64;
    let n = friedman.n_tasks as f64;
    let q = normal_quantile(1.0 - alpha / (2.0 * (k - 1.0)))?;
    let cd = q * (k * (k + 1.0) / (6.0 * n)).sqrt();

    let mut order: Vec<usize> = (0..friedman.mean_ranks.len()).collect();
    order.sort_by(|&a, &b| friedman.mean_ranks[a].partial_cmp(&friedman.mean_ranks[b]).unwrap());
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut anchor = f64::NEG_INFINITY;
    for idx in order {
        let rank = friedman.mean_ranks[idx];
        if groups.is_empty() || rank - anchor > cd {
            groups.push(vec![idx]);
            anchor = rank;
        } else {
            groups.last_mut().unwrap().push(idx);
        }
    }
    Ok(DunnResult { critical_difference: cd, groups })
}
