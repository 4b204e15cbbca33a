//! Shared oracles for the integration suites. Everything here is written
//! independently of the library's solver and scan paths: the QP reference
//! uses accelerated projected gradient on the smooth split dual, and the
//! pivot checker re-derives the alternation requirements by brute force.

#![allow(dead_code)]

use pivotsvr::pivots::{Pivot, PivotKind};
use rand::Rng;

/// A random epsilon-SVR instance for the solver comparison.
#[derive(Debug, Clone)]
pub struct QpProblem {
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub c: f64,
    pub epsilon: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub beta: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
    pub iterations: usize,
}

fn kernel_matrix(p: &QpProblem) -> Vec<Vec<f64>> {
    let n = p.targets.len();
    let inv = 1.0 / (p.sigma * p.sigma);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d2: f64 = p.features[i]
                        .iter()
                        .zip(&p.features[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (-d2 * inv).exp()
                })
                .collect()
        })
        .collect()
}

/// Dual objective in net-coefficient form:
/// `0.5 b'Kb + eps ||b||_1 - z'b`.
pub fn reference_objective(k: &[Vec<f64>], targets: &[f64], beta: &[f64], eps: f64) -> f64 {
    let n = targets.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += beta[i] * beta[j] * k[i][j];
        }
    }
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let lin: f64 = beta.iter().zip(targets).map(|(b, z)| b * z).sum();
    0.5 * quad + eps * l1 - lin
}

/// Exact Euclidean projection of (plus, minus) onto the box [0, C]^{2n}
/// intersected with the hyperplane `sum(plus) - sum(minus) = 0`, by
/// bisection on the hyperplane multiplier.
fn project(plus: &[f64], minus: &[f64], c: f64) -> (Vec<f64>, Vec<f64>) {
    let clip = |v: f64| v.clamp(0.0, c);
    let balance = |lambda: f64| -> f64 {
        let p: f64 = plus.iter().map(|&v| clip(v - lambda)).sum();
        let m: f64 = minus.iter().map(|&v| clip(v + lambda)).sum();
        p - m
    };
    let mut bound = c + 1.0;
    for &v in plus.iter().chain(minus) {
        bound = bound.max(v.abs() + c + 1.0);
    }
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    (
        plus.iter().map(|&v| clip(v - lambda)).collect(),
        minus.iter().map(|&v| clip(v + lambda)).collect(),
    )
}

/// Reference solver: projected gradient with Nesterov acceleration and
/// adaptive restart on the split (plus/minus) dual, iterated until the
/// projected-gradient mapping is below `tol` in the max norm.
pub fn solve_qp_reference(p: &QpProblem, tol: f64, max_iter: usize) -> QpSolution {
    let n = p.targets.len();
    let k = kernel_matrix(p);
    let lipschitz = 2.0 * k.iter().map(|row| row.iter().sum::<f64>()).fold(1e-12, f64::max);
    let step = 1.0 / lipschitz;

    let grad = |plus: &[f64], minus: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let beta: Vec<f64> = plus.iter().zip(minus).map(|(a, b)| a - b).collect();
        let kb: Vec<f64> = (0..n)
            .map(|i| k[i].iter().zip(&beta).map(|(kk, bb)| kk * bb).sum())
            .collect();
        let gp = (0..n).map(|i| kb[i] + p.epsilon - p.targets[i]).collect();
        let gm = (0..n).map(|i| -kb[i] + p.epsilon + p.targets[i]).collect();
        (gp, gm)
    };
    let pg_step = |plus: &[f64], minus: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let (gp, gm) = grad(plus, minus);
        let moved_p: Vec<f64> = plus.iter().zip(&gp).map(|(x, g)| x - step * g).collect();
        let moved_m: Vec<f64> = minus.iter().zip(&gm).map(|(x, g)| x - step * g).collect();
        project(&moved_p, &moved_m, p.c)
    };
    let objective = |plus: &[f64], minus: &[f64]| -> f64 {
        let beta: Vec<f64> = plus.iter().zip(minus).map(|(a, b)| a - b).collect();
        let joint: f64 = plus.iter().zip(minus).map(|(a, b)| a.min(*b)).sum();
        reference_objective(&k, &p.targets, &beta, p.epsilon) + 2.0 * p.epsilon * joint
    };

    let mut x = (vec![0.0; n], vec![0.0; n]);
    let mut x_prev = x.clone();
    let mut y = x.clone();
    let mut t_k = 1.0f64;
    let mut obj_prev = objective(&x.0, &x.1);
    let mut iterations = 0;

    for iter in 0..max_iter {
        iterations = iter + 1;
        let x_new = pg_step(&y.0, &y.1);
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt());
        let momentum = (t_k - 1.0) / t_new;
        y = (
            x_new
                .0
                .iter()
                .zip(&x.0)
                .map(|(a, b)| a + momentum * (a - b))
                .collect(),
            x_new
                .1
                .iter()
                .zip(&x.1)
                .map(|(a, b)| a + momentum * (a - b))
                .collect(),
        );
        x_prev = std::mem::replace(&mut x, x_new);
        t_k = t_new;

        if iter % 50 == 49 {
            let obj = objective(&x.0, &x.1);
            if obj > obj_prev {
                // Restart the momentum.
                y = x.clone();
                t_k = 1.0;
            }
            obj_prev = obj;
            // Plain projected-gradient mapping at the current point.
            let mapped = pg_step(&x.0, &x.1);
            let gap = x
                .0
                .iter()
                .chain(&x.1)
                .zip(mapped.0.iter().chain(&mapped.1))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if gap <= tol * step.max(1e-12) {
                break;
            }
        }
    }
    let _ = x_prev;

    let beta: Vec<f64> = x.0.iter().zip(&x.1).map(|(a, b)| a - b).collect();
    let bias = reference_bias(&k, &p.targets, &beta, p.c, p.epsilon);
    let objective = reference_objective(&k, &p.targets, &beta, p.epsilon);
    QpSolution { beta, bias, objective, iterations }
}

/// Bias recovered from the KKT conditions of a (numerically) converged
/// dual iterate: average of the values pinned by free coefficients, or
/// the midpoint of the feasible interval when none are free.
pub fn reference_bias(k: &[Vec<f64>], targets: &[f64], beta: &[f64], c: f64, eps: f64) -> f64 {
    let n = targets.len();
    let boundary = 1e-7 * c.max(1.0);
    let mut pins = Vec::new();
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..n {
        let f: f64 = (0..n).map(|j| beta[j] * k[i][j]).sum();
        let d = targets[i] - f;
        let b = beta[i];
        if b > boundary && b < c - boundary {
            pins.push(d - eps);
        } else if b < -boundary && b > -(c - boundary) {
            pins.push(d + eps);
        } else if b.abs() <= boundary {
            lo = lo.max(d - eps);
            hi = hi.min(d + eps);
        } else if b > 0.0 {
            hi = hi.min(d - eps);
        } else {
            lo = lo.max(d + eps);
        }
    }
    if pins.is_empty() {
        0.5 * (lo + hi)
    } else {
        pins.iter().sum::<f64>() / pins.len() as f64
    }
}

/// RBF prediction from a net-coefficient expansion.
pub fn reference_predict(
    features: &[Vec<f64>],
    beta: &[f64],
    bias: f64,
    sigma: f64,
    x: &[f64],
) -> f64 {
    let inv = 1.0 / (sigma * sigma);
    let sum: f64 = features
        .iter()
        .zip(beta)
        .map(|(sv, b)| {
            let d2: f64 = sv.iter().zip(x).map(|(a, v)| (a - v) * (a - v)).sum();
            b * (-d2 * inv).exp()
        })
        .sum();
    sum + bias
}

/// Geometric random walk with bounded multiplicative steps.
pub fn random_walk(rng: &mut impl Rng, len: usize, start: f64, daily_move: f64) -> Vec<f64> {
    let mut x = start;
    (0..len)
        .map(|_| {
            let u: f64 = rng.random();
            x *= 1.0 + daily_move * (2.0 * u - 1.0);
            x
        })
        .collect()
}

/// Noiseless sine around a base level.
pub fn sine_series(len: usize, period: f64, amplitude: f64, base: f64) -> Vec<f64> {
    (0..len)
        .map(|t| base * (1.0 + amplitude * (2.0 * std::f64::consts::PI * t as f64 / period).sin()))
        .collect()
}

/// Brute-force verification of the alternation requirements: kinds
/// strictly alternate, and every interior pivot is the global extremum of
/// the price interval spanned by its two neighbors.
pub fn check_alternation(prices: &[f64], pivots: &[Pivot]) -> Result<(), String> {
    for w in pivots.windows(2) {
        if w[0].kind == w[1].kind {
            return Err(format!("kinds do not alternate at t = {} and t = {}", w[0].t, w[1].t));
        }
        if w[0].t >= w[1].t {
            return Err(format!("pivots out of order at t = {}", w[1].t));
        }
    }
    for i in 1..pivots.len().saturating_sub(1) {
        let seg = &prices[pivots[i - 1].t..=pivots[i + 1].t];
        let value = pivots[i].value;
        let violation = match pivots[i].kind {
            PivotKind::Peak => seg.iter().any(|&x| x > value),
            PivotKind::Trough => seg.iter().any(|&x| x < value),
        };
        if violation {
            return Err(format!(
                "interior {} at t = {} is not the interval extremum",
                pivots[i].kind.label(),
                pivots[i].t
            ));
        }
    }
    Ok(())
}

/// Candidate-relative version of the third requirement, for filtered
/// criteria where the raw extremum may not be an admissible pivot: every
/// interior pivot must be at least as extreme as every candidate of its
/// kind in its interval.
pub fn check_alternation_against_candidates(
    candidates: &[Pivot],
    pivots: &[Pivot],
) -> Result<(), String> {
    for w in pivots.windows(2) {
        if w[0].kind == w[1].kind {
            return Err(format!("kinds do not alternate at t = {} and t = {}", w[0].t, w[1].t));
        }
    }
    for i in 1..pivots.len().saturating_sub(1) {
        let (lo, hi) = (pivots[i - 1].t, pivots[i + 1].t);
        let p = pivots[i];
        for cand in candidates.iter().filter(|c| c.kind == p.kind && c.t > lo && c.t < hi) {
            let beaten = match p.kind {
                PivotKind::Peak => cand.value > p.value,
                PivotKind::Trough => cand.value < p.value,
            };
            if beaten {
                return Err(format!(
                    "candidate {} at t = {} beats kept pivot at t = {}",
                    cand.kind.label(),
                    cand.t,
                    p.t
                ));
            }
        }
    }
    Ok(())
}
