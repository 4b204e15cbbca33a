//! From-scratch epsilon-support-vector regression with an RBF kernel.
//!
//! The dual problem is solved by sequential minimal optimization over
//! pairs of coefficients: the first working index is the maximal
//! violator, the second is picked by the second-order rule (largest
//! guaranteed objective decrease for the pair, which avoids zigzagging
//! when kernel rows are nearly collinear).
//! Internally one net coefficient `beta_i` in [-C, C] is kept per
//! training point (the difference of the two classical dual variables);
//! steps stop at the kink at zero so each two-variable subproblem stays
//! exactly quadratic. The full kernel matrix is cached; datasets here top
//! out around 1250 rows, so the O(n^2) memory is a non-issue.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::LabeledSet;

/// The three hyper-parameters of an epsilon-SVR with RBF kernel: error
/// cost `c`, tube width `epsilon` and kernel resolution `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub sigma: f64,
}

impl SvrParams {
    pub fn new(c: f64, epsilon: f64, sigma: f64) -> Result<Self> {
        let p = Self { c, epsilon, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Config(format!("C must be positive, got {}", self.c)));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Config(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Solver knobs. `max_iter = None` means the default budget of `10 n^2`
/// pair updates.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub kkt_tol: f64,
    pub max_iter: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { kkt_tol: 1e-3, max_iter: None }
    }
}

/// RBF kernel exactly as parameterized throughout this crate:
/// `exp(-||x - y||^2 / sigma^2)` (note: no factor 2 in the denominator).
pub fn rbf_kernel(x: &[f64], y: &[f64], sigma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { left: x.len(), right: y.len() });
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
    }
    Ok(rbf_unchecked(x, y, 1.0 / (sigma * sigma)))
}

#[inline]
fn rbf_unchecked(x: &[f64], y: &[f64], inv_sigma_sq: f64) -> f64 {
    let mut dist = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = a - b;
        dist += d * d;
    }
    (-dist * inv_sigma_sq).exp()
}

/// Dense symmetric kernel matrix over a set of feature rows.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    n: usize,
    data: Vec<f64>,
}

impl KernelMatrix {
    pub fn rbf<R: AsRef<[f64]>>(rows: &[R], sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
        }
        let n = rows.len();
        if let Some(first) = rows.first() {
            let dim = first.as_ref().len();
            for r in rows {
                if r.as_ref().len() != dim {
                    return Err(Error::DimensionMismatch { left: dim, right: r.as_ref().len() });
                }
            }
        }
        let inv = 1.0 / (sigma * sigma);
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rbf_unchecked(rows[i].as_ref(), rows[j].as_ref(), inv);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Solution of the dual problem.
#[derive(Debug, Clone)]
pub struct DualSolution {
    /// Net dual coefficient per training point, in [-C, C], summing to 0.
    pub beta: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    /// Final maximal-violating-pair gap.
    pub kkt_gap: f64,
}

/// One candidate move in the working-set selection: which point, the
/// score `-u * G` of the move, how far it can go and where the bound is.
#[derive(Debug, Clone, Copy)]
struct Move {
    idx: usize,
    score: f64,
    headroom: f64,
    bound: f64,
}

fn select_pair(beta: &[f64], f: &[f64], targets: &[f64], c: f64, eps: f64) -> (Move, Move) {
    let mut up = Move { idx: usize::MAX, score: f64::NEG_INFINITY, headroom: 0.0, bound: 0.0 };
    let mut down = Move { idx: usize::MAX, score: f64::INFINITY, headroom: 0.0, bound: 0.0 };
    for i in 0..beta.len() {
        let d = targets[i] - f[i];
        let b = beta[i];
        // Moves that increase beta_i.
        if b >= 0.0 && b < c {
            let score = d - eps;
            if score > up.score {
                up = Move { idx: i, score, headroom: c - b, bound: c };
            }
        } else if b < 0.0 {
            let score = d + eps;
            if score > up.score {
                up = Move { idx: i, score, headroom: -b, bound: 0.0 };
            }
        }
        // Moves that decrease beta_i.
        if b <= 0.0 && b > -c {
            let score = d + eps;
            if score < down.score {
                down = Move { idx: i, score, headroom: c + b, bound: -c };
            }
        } else if b > 0.0 {
            let score = d - eps;
            if score < down.score {
                down = Move { idx: i, score, headroom: b, bound: 0.0 };
            }
        }
    }
    (up, down)
}

const QC_FLOOR: f64 = 1e-12;

/// Second-order choice of the down move to pair with `up`: among all
/// violating candidates, pick the one with the largest per-pair objective
/// decrease `delta^2 / (K_pp + K_qq - 2 K_pq)`. This is what keeps the
/// solver from zigzagging on near-duplicate kernel rows.
fn select_down_second_order(
    kernel: &KernelMatrix,
    beta: &[f64],
    f: &[f64],
    targets: &[f64],
    c: f64,
    eps: f64,
    up: &Move,
) -> Option<Move> {
    let row = kernel.row(up.idx);
    let k_up = row[up.idx];
    let mut best_gain = f64::NEG_INFINITY;
    let mut chosen: Option<Move> = None;
    let mut consider = |idx: usize, score: f64, headroom: f64, bound: f64| {
        let delta = up.score - score;
        if delta <= 0.0 {
            return;
        }
        let qc = (k_up + kernel.at(idx, idx) - 2.0 * row[idx]).max(QC_FLOOR);
        let gain = delta * delta / qc;
        if gain > best_gain {
            best_gain = gain;
            chosen = Some(Move { idx, score, headroom, bound });
        }
    };
    for i in 0..beta.len() {
        let d = targets[i] - f[i];
        let b = beta[i];
        if b <= 0.0 && b > -c {
            consider(i, d + eps, c + b, -c);
        } else if b > 0.0 {
            consider(i, d - eps, b, 0.0);
        }
    }
    chosen
}

/// Solves the epsilon-SVR dual for a precomputed kernel matrix.
///
/// The first working index is the maximal violator; the second is chosen
/// by the second-order rule (largest guaranteed objective decrease).
/// Terminates when the violating-pair gap drops to `kkt_tol`. The bias is
/// the average of the KKT-pinned values over free support vectors,
/// falling back to the midpoint of the dual bound interval when no
/// coefficient is free.
pub fn solve_epsilon_svr(
    kernel: &KernelMatrix,
    targets: &[f64],
    params: &SvrParams,
    cfg: &TrainConfig,
) -> Result<DualSolution> {
    params.validate()?;
    let n = kernel.n();
    if n == 0 || targets.len() != n {
        return Err(Error::DimensionMismatch { left: n, right: targets.len() });
    }
    let (c, eps) = (params.c, params.epsilon);
    let max_iter = cfg.max_iter.unwrap_or(10 * n * n);

    let mut beta = vec![0.0f64; n];
    let mut f = vec![0.0f64; n]; // f_i = sum_j beta_j K_ij
    let mut iterations = 0usize;
    let mut gap;

    loop {
        let (up, down_first) = select_pair(&beta, &f, targets, c, eps);
        gap = up.score - down_first.score;
        if gap <= cfg.kkt_tol {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::Convergence { iterations, violation: gap });
        }
        iterations += 1;

        let down = select_down_second_order(kernel, &beta, &f, targets, c, eps, &up)
            .unwrap_or(down_first);
        let (p, q) = (up.idx, down.idx);
        debug_assert_ne!(p, q);
        let delta = up.score - down.score;
        let qc = kernel.at(p, p) + kernel.at(q, q) - 2.0 * kernel.at(p, q);
        let step_limit = up.headroom.min(down.headroom);
        let step = if qc > QC_FLOOR { (delta / qc).min(step_limit) } else { step_limit };

        let new_p = if step >= up.headroom { up.bound } else { beta[p] + step };
        let new_q = if step >= down.headroom { down.bound } else { beta[q] - step };
        let dp = new_p - beta[p];
        let dq = new_q - beta[q];
        beta[p] = new_p;
        beta[q] = new_q;

        let row_p = kernel.row(p);
        let row_q = kernel.row(q);
        for r in 0..n {
            f[r] += dp * row_p[r] + dq * row_q[r];
        }
    }

    // Bias from KKT-interior coefficients; midpoint of the feasible
    // interval when none are free.
    let mut pinned = 0.0;
    let mut free = 0usize;
    for i in 0..n {
        if beta[i] > 0.0 && beta[i] < c {
            pinned += targets[i] - f[i] - eps;
            free += 1;
        } else if beta[i] < 0.0 && beta[i] > -c {
            pinned += targets[i] - f[i] + eps;
            free += 1;
        }
    }
    let bias = if free > 0 {
        pinned / free as f64
    } else {
        let (up, down) = select_pair(&beta, &f, targets, c, eps);
        (up.score + down.score) / 2.0
    };

    Ok(DualSolution { beta, bias, iterations, kkt_gap: gap })
}

/// Dual objective `1/2 b'Kb + eps * ||b||_1 - z'b` (minimization form).
pub fn dual_objective(kernel: &KernelMatrix, targets: &[f64], beta: &[f64], eps: f64) -> f64 {
    let n = kernel.n();
    let mut quad = 0.0;
    for i in 0..n {
        if beta[i] == 0.0 {
            continue;
        }
        let row = kernel.row(i);
        let mut dot = 0.0;
        for j in 0..n {
            dot += beta[j] * row[j];
        }
        quad += beta[i] * dot;
    }
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let lin: f64 = beta.iter().zip(targets).map(|(b, z)| b * z).sum();
    0.5 * quad + eps * l1 - lin
}

/// Per-point KKT violations of a dual iterate, given the bias.
pub fn kkt_violations(
    kernel: &KernelMatrix,
    targets: &[f64],
    beta: &[f64],
    bias: f64,
    params: &SvrParams,
) -> Vec<f64> {
    let n = kernel.n();
    let (c, eps) = (params.c, params.epsilon);
    (0..n)
        .map(|i| {
            let f: f64 = (0..n).map(|j| beta[j] * kernel.at(i, j)).sum();
            let r = targets[i] - f - bias;
            let b = beta[i];
            if b == 0.0 {
                (r.abs() - eps).max(0.0)
            } else if b >= c {
                (eps - r).max(0.0)
            } else if b <= -c {
                (r + eps).max(0.0)
            } else if b > 0.0 {
                (r - eps).abs()
            } else {
                (r + eps).abs()
            }
        })
        .collect()
}

/// A trained epsilon-SVR model: support vectors, their net dual
/// coefficients, the bias and the hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    dim: usize,
    support_vectors: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
    bias: f64,
    params: SvrParams,
}

impl SvrModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_vectors(&self) -> &[Vec<f64>] {
        &self.support_vectors
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn params(&self) -> &SvrParams {
        &self.params
    }

    /// Kernel expansion at `x`: `sum_i coef_i K(sv_i, x) + bias`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: x.len() });
        }
        let inv = 1.0 / (self.params.sigma * self.params.sigma);
        let sum: f64 = self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, coef)| coef * rbf_unchecked(sv, x, inv))
            .sum();
        Ok(sum + self.bias)
    }

    /// Serializes the model as a flat text format. Floats are written
    /// with Rust's shortest round-trip representation, so save/load is
    /// bit-exact.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "pivotsvr-model v1")?;
        writeln!(w, "c {}", self.params.c)?;
        writeln!(w, "epsilon {}", self.params.epsilon)?;
        writeln!(w, "sigma {}", self.params.sigma)?;
        writeln!(w, "bias {}", self.bias)?;
        writeln!(w, "dim {}", self.dim)?;
        writeln!(w, "nsv {}", self.support_vectors.len())?;
        for (coef, sv) in self.coefficients.iter().zip(&self.support_vectors) {
            write!(w, "sv {coef}")?;
            for v in sv {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_to(BufWriter::new(file)).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut lines = reader.lines().enumerate();
        let mut next_line = || -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(line))) => Ok((i + 1, line)),
                Some((i, Err(e))) => Err(Error::Parse { line: i + 1, message: e.to_string() }),
                None => Err(Error::Parse { line: 0, message: "unexpected end of model file".into() }),
            }
        };
        let (line_no, header) = next_line()?;
        if header.trim() != "pivotsvr-model v1" {
            return Err(Error::Parse { line: line_no, message: format!("unknown header `{header}`") });
        }
        let mut scalar = |key: &str| -> Result<f64> {
            let (line_no, line) = next_line()?;
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some(k), Some(v)) if k == key => v.parse().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad value for {key}: {e}"),
                }),
                _ => Err(Error::Parse { line: line_no, message: format!("expected `{key} <value>`") }),
            }
        };
        let c = scalar("c")?;
        let epsilon = scalar("epsilon")?;
        let sigma = scalar("sigma")?;
        let bias = scalar("bias")?;
        let dim = scalar("dim")? as usize;
        let nsv = scalar("nsv")? as usize;

        let mut support_vectors = Vec::with_capacity(nsv);
        let mut coefficients = Vec::with_capacity(nsv);
        for _ in 0..nsv {
            let (line_no, line) = next_line()?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some("sv") {
                return Err(Error::Parse { line: line_no, message: "expected `sv` row".into() });
            }
            let values: std::result::Result<Vec<f64>, _> = parts.map(str::parse).collect();
            let values = values.map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad float: {e}"),
            })?;
            if values.len() != dim + 1 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected coefficient + {dim} components, got {}", values.len()),
                });
            }
            coefficients.push(values[0]);
            support_vectors.push(values[1..].to_vec());
        }
        Ok(Self {
            dim,
            support_vectors,
            coefficients,
            bias,
            params: SvrParams::new(c, epsilon, sigma)?,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_from(file)
    }
}

/// Trains an epsilon-SVR on a labeled dataset.
pub fn train(data: &LabeledSet, params: &SvrParams, cfg: &TrainConfig) -> Result<SvrModel> {
    params.validate()?;
    if data.rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = data.layout.dim();
    for row in &data.rows {
        if row.features.len() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: row.features.len() });
        }
        if !row.features.iter().all(|v| v.is_finite()) || !row.target.is_finite() {
            return Err(Error::Validation(format!("non-finite value in row t = {}", row.t)));
        }
    }

    let features: Vec<&[f64]> = data.rows.iter().map(|r| r.features.as_slice()).collect();
    let targets: Vec<f64> = data.rows.iter().map(|r| r.target).collect();
    let kernel = KernelMatrix::rbf(&features, params.sigma)?;
    let solution = solve_epsilon_svr(&kernel, &targets, params, cfg)?;

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (i, &b) in solution.beta.iter().enumerate() {
        if b != 0.0 {
            support_vectors.push(features[i].to_vec());
            coefficients.push(b);
        }
    }
    Ok(SvrModel {
        dim,
        support_vectors,
        coefficients,
        bias: solution.bias,
        params: *params,
    })
}
