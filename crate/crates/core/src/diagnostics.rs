//! Chain traces and the statistics computed from them.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 math is only there when std is linked
use num_traits::Float;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{rows_to_matrix, sample_covariance, sigmoid, Matrix, Vector};

/// Per-iteration metadata written by the chain runner.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub warmup: bool,
    pub accepted: bool,
    pub log_rho: f64,
    /// The uniform variate the accept decision was made with.
    pub uniform: f64,
    pub hamiltonian_start: f64,
    pub hamiltonian_end: f64,
    pub log_volume_factor: f64,
    pub step_size: f64,
    pub divergent: bool,
}

impl IterationRecord {
    pub fn accept_prob(&self) -> f64 {
        if self.log_rho.is_nan() {
            0.0
        } else {
            self.log_rho.exp().min(1.0)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainTrace {
    pub dim: usize,
    /// Post-warmup states, every `thin`-th iteration.
    pub samples: Vec<Vector>,
    /// Every warm-up state, kept only when requested.
    pub warmup_samples: Vec<Vector>,
    pub records: Vec<IterationRecord>,
    /// Seconds; filled in by callers that have a clock.
    pub wall_time: f64,
    pub n_grad_evals: u64,
    pub n_warmup: usize,
    pub thin: usize,
}

impl ChainTrace {
    pub fn post_warmup(&self) -> impl Iterator<Item = &IterationRecord> {
        self.records.iter().filter(|r| !r.warmup)
    }

    /// Fraction of accepted post-warmup proposals.
    pub fn acceptance_rate(&self) -> f64 {
        let (mut n, mut acc) = (0usize, 0usize);
        for r in self.post_warmup() {
            n += 1;
            acc += r.accepted as usize;
        }
        if n == 0 {
            0.0
        } else {
            acc as f64 / n as f64
        }
    }

    pub fn sample_matrix(&self) -> Matrix {
        rows_to_matrix(&self.samples)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[j]).collect()
    }

    pub fn mean(&self) -> Vector {
        let n = self.samples.len().max(1) as f64;
        self.samples
            .iter()
            .fold(Vector::zeros(self.dim), |acc, s| acc + s)
            / n
    }

    pub fn covariance(&self) -> Result<Matrix> {
        sample_covariance(&self.sample_matrix())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssEstimate {
    pub ess: f64,
    /// Set for constant series, whose ESS is reported as 0.
    pub degenerate: bool,
}

/// Effective sample size `n / (1 + 2 Σ ρ̂_k)`, with the autocorrelation sum
/// truncated by Geyer's initial positive sequence (pairs `ρ̂_{2m} + ρ̂_{2m+1}`
/// summed while positive, made monotone). Clamped to `(0, n]`.
pub fn ess(series: &[f64]) -> Result<EssEstimate> {
    let n = series.len();
    if n < 10 {
        return Err(Error::InvalidConfig(format!(
            "ESS needs at least 10 draws, got {n}"
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ess series"));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let gamma0 = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if gamma0 <= f64::MIN_POSITIVE || centered.iter().all(|v| *v == 0.0) {
        return Ok(EssEstimate {
            ess: 0.0,
            degenerate: true,
        });
    }
    let rho = |k: usize| -> f64 {
        let s: f64 = centered[..n - k]
            .iter()
            .zip(&centered[k..])
            .map(|(a, b)| a * b)
            .sum();
        s / n as f64 / gamma0
    };

    // tau = -1 + 2 Σ_m Γ_m with Γ_m = ρ_{2m} + ρ_{2m+1}, ρ_0 = 1
    let mut tau = -1.0;
    let mut prev_pair = f64::INFINITY;
    let mut m = 0;
    while 2 * m + 1 < n {
        let lag = 2 * m;
        let pair = if lag == 0 { 1.0 } else { rho(lag) } + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        m += 1;
    }
    // Antithetic chains can drive tau to zero or below; the ESS then saturates at n.
    let ess = if tau > 0.0 { (n as f64 / tau).min(n as f64) } else { n as f64 };
    Ok(EssEstimate {
        ess: ess.max(f64::MIN_POSITIVE),
        degenerate: false,
    })
}

/// Marginal posterior summary for one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSummary {
    pub mean: f64,
    pub sd: f64,
    /// `None` when there are fewer than 10 draws.
    pub ess: Option<f64>,
    pub lower: f64,
    pub upper: f64,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-coordinate mean, sd, ESS and central credible interval at `level`.
pub fn summarize(samples: &[Vector], level: f64) -> Vec<ParamSummary> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let n = samples.len() as f64;
    let tail = 0.5 * (1.0 - level);
    (0..first.len())
        .map(|j| {
            let mut col: Vec<f64> = samples.iter().map(|s| s[j]).collect();
            let mean = col.iter().sum::<f64>() / n;
            let var = if samples.len() > 1 {
                col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            let ess = ess(&col).ok().map(|e| e.ess);
            col.sort_by(f64::total_cmp);
            ParamSummary {
                mean,
                sd: var.sqrt(),
                ess,
                lower: quantile_sorted(&col, tail),
                upper: quantile_sorted(&col, 1.0 - tail),
            }
        })
        .collect()
}

/// Fraction of `truth` coordinates inside their credible intervals.
pub fn interval_coverage(summaries: &[ParamSummary], truth: &Vector) -> Result<f64> {
    check_dim("interval_coverage", summaries.len(), truth.len())?;
    if summaries.is_empty() {
        return Ok(1.0);
    }
    let hit = summaries
        .iter()
        .zip(truth.iter())
        .filter(|(s, t)| s.lower <= **t && **t <= s.upper)
        .count();
    Ok(hit as f64 / summaries.len() as f64)
}

/// Posterior-mean predictive probabilities `mean_s sigmoid(X q_s)`.
pub fn predictive_probabilities(samples: &[Vector], x: &Matrix) -> Result<Vector> {
    if samples.is_empty() {
        return Err(Error::InvalidConfig("no posterior samples".into()));
    }
    let mut probs = Vector::zeros(x.nrows());
    for q in samples {
        check_dim("predictive_accuracy", x.ncols(), q.len())?;
        let eta = x * q;
        probs += eta.map(sigmoid);
    }
    Ok(probs / samples.len() as f64)
}

/// Test-set accuracy of the posterior-mean predictive probability,
/// thresholded at 0.5 (a tie predicts class 1).
pub fn predictive_accuracy(samples: &[Vector], x_test: &Matrix, y_test: &Vector) -> Result<f64> {
    check_dim("predictive_accuracy labels", x_test.nrows(), y_test.len())?;
    if y_test.is_empty() {
        return Err(Error::InvalidConfig("empty test set".into()));
    }
    let probs = predictive_probabilities(samples, x_test)?;
    let correct = probs
        .iter()
        .zip(y_test.iter())
        .filter(|(p, y)| (if **p >= 0.5 { 1.0 } else { 0.0 }) == **y)
        .count();
    Ok(correct as f64 / y_test.len() as f64)
}

/// Cost figures for one chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodCost {
    pub wall_time: f64,
    pub n_grad_evals: u64,
    pub time_per_grad: f64,
    /// Smallest per-coordinate ESS; `None` for chains too short to estimate it.
    pub min_ess: Option<f64>,
    pub ess_per_second: Option<f64>,
    pub acceptance_rate: f64,
}

pub fn method_cost(trace: &ChainTrace) -> MethodCost {
    let min_ess = (0..trace.dim)
        .filter_map(|j| ess(&trace.column(j)).ok().map(|e| e.ess))
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.min(e))));
    MethodCost {
        wall_time: trace.wall_time,
        n_grad_evals: trace.n_grad_evals,
        time_per_grad: if trace.n_grad_evals > 0 {
            trace.wall_time / trace.n_grad_evals as f64
        } else {
            f64::NAN
        },
        min_ess,
        ess_per_second: min_ess.map(|e| e / trace.wall_time),
        acceptance_rate: trace.acceptance_rate(),
    }
}

/// `a / b`.
#[inline]
pub fn ratio(a: f64, b: f64) -> f64 {
    a / b
}

/// Pairwise comparison of several chains; entry `(i, j)` of each matrix is
/// method `i`'s figure divided by method `j`'s.
#[derive(Debug, Clone)]
pub struct CostReport {
    pub methods: Vec<MethodCost>,
    pub wall_time_ratio: Matrix,
    pub per_grad_ratio: Matrix,
}

pub fn cost_report(traces: &[&ChainTrace]) -> Result<CostReport> {
    if traces.len() < 2 {
        return Err(Error::InvalidConfig(
            "a cost report compares at least two traces".into(),
        ));
    }
    let methods: Vec<MethodCost> = traces.iter().map(|t| method_cost(t)).collect();
    let k = methods.len();
    let wall_time_ratio = Matrix::from_fn(k, k, |i, j| ratio(methods[i].wall_time, methods[j].wall_time));
    let per_grad_ratio = Matrix::from_fn(k, k, |i, j| {
        ratio(methods[i].time_per_grad, methods[j].time_per_grad)
    });
    Ok(CostReport {
        methods,
        wall_time_ratio,
        per_grad_ratio,
    })
}
