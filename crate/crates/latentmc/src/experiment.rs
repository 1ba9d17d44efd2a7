//! The three-stage experiment: warm-up sampling with a baseline, fitting an
//! autoencoder to the warm-up draws, then sampling with the auto-encoded
//! kernel next to the baselines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use latentmc_core::autoencoder::{pca_fit, reconstruction_mse, train_autoencoder, Autoencoder};
use latentmc_core::diagnostics::{cost_report, interval_coverage, method_cost, predictive_accuracy, summarize, ChainTrace};
use latentmc_core::linalg::{rows_to_matrix, sample_covariance, sorted_symmetric_eigen};
use latentmc_core::samplers::{
    run_chain, AeHmcKernel, AePcnKernel, ChainError, ChainSettings, HmcKernel, LatentReference, LogisticPullback,
    PcnKernel, RwmKernel, SamplerConfig, TransitionKernel, TARGET_ACCEPTANCE,
};
use latentmc_core::targets::{default_sensors, GaussianTarget, GpLinearInverseTarget, LogisticRegressionTarget, Target};
use latentmc_core::{Matrix, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{AutoencoderKind, Experiment, ExperimentConfig, Method};
use crate::data::{read_dataset, synth_logistic_data, write_dataset, Dataset};
use crate::error::{io_err, Error, Result};
use crate::model_io::save_autoencoder;
use crate::trace_io::{param_records, write_json, write_trace_csv, ParamRecord};

// Fixed stream offsets from the master seed.
const DATA_STREAM: u64 = 0;
const BASELINE_STREAM: u64 = 1;
const RWM_STREAM: u64 = 2;
const AE_STREAM: u64 = 3;
const TRAIN_SEED_OFFSET: u64 = 4;

/// Share of the warm-up draws discarded as burn-in before fitting the
/// autoencoder.
pub const TRAIN_BURN_IN: f64 = 0.2;

pub fn stream(seed: u64, offset: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(offset);
    rng
}

#[derive(Debug, Clone)]
pub enum Problem {
    Gaussian(GaussianTarget),
    Logistic {
        target: LogisticRegressionTarget,
        train: Dataset,
        test: Option<Dataset>,
        beta_true: Option<Vector>,
    },
    Gp {
        target: GpLinearInverseTarget,
        truth: Vector,
    },
}

impl Problem {
    pub fn dim(&self) -> usize {
        match self {
            Problem::Gaussian(t) => t.dim(),
            Problem::Logistic { target, .. } => target.dim(),
            Problem::Gp { target, .. } => target.dim(),
        }
    }

    fn target(&self) -> &dyn Target {
        match self {
            Problem::Gaussian(t) => t,
            Problem::Logistic { target, .. } => target,
            Problem::Gp { target, .. } => target,
        }
    }
}

/// Build the target, synthesising data from the data stream where needed.
pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem> {
    let mut rng = stream(cfg.seed, DATA_STREAM);
    Ok(match cfg.experiment {
        Experiment::Gaussian3d => {
            let g = &cfg.gaussian;
            let cov = g.covariance_matrix()?;
            if let Some(m) = &g.mean {
                if m.len() != cov.nrows() {
                    return Err(Error::Config("gaussian mean and covariance sizes differ".into()));
                }
            }
            Problem::Gaussian(GaussianTarget::new(g.mean_vector(), cov)?)
        }
        Experiment::LogisticSynthetic => {
            let data = synth_logistic_data(&cfg.logistic.synth_spec(), &mut rng)?;
            let var = cfg.logistic.prior_sd * cfg.logistic.prior_sd;
            let target = LogisticRegressionTarget::new(data.train.features.clone(), data.train.labels.clone(), var)?;
            Problem::Logistic {
                target,
                train: data.train,
                test: Some(data.test),
                beta_true: Some(data.beta_true),
            }
        }
        Experiment::LogisticCsv => {
            let path = cfg.logistic.train_csv.as_ref().ok_or_else(|| Error::Config("logistic.train_csv is not set".into()))?;
            let train = read_dataset(path)?;
            let test = cfg.logistic.test_csv.as_ref().map(read_dataset).transpose()?;
            if let Some(t) = &test {
                if t.dim() != train.dim() {
                    return Err(Error::Data(format!("test set has {} features, training set {}", t.dim(), train.dim())));
                }
            }
            let var = cfg.logistic.prior_sd * cfg.logistic.prior_sd;
            let target = LogisticRegressionTarget::new(train.features.clone(), train.labels.clone(), var)?;
            Problem::Logistic {
                target,
                train,
                test,
                beta_true: None,
            }
        }
        Experiment::GpInverse => {
            let grid = cfg.gp.grid();
            let sensors = match &cfg.gp.sensors {
                Some(s) => s.clone(),
                None => default_sensors(grid.grid_size)?,
            };
            let (target, truth) = GpLinearInverseTarget::synthesize(grid, sensors, cfg.gp.snr, &mut rng)?;
            Problem::Gp { target, truth }
        }
    })
}

#[derive(Debug, Clone, Serialize)]
struct GpData<'a> {
    sensors: &'a [usize],
    observations: Vec<f64>,
    noise_sd: f64,
    truth: Vec<f64>,
}

/// Write the problem's data files into `dir`; returns the paths written.
pub fn write_problem_data(problem: &Problem, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    match problem {
        Problem::Gaussian(_) => {}
        Problem::Logistic { train, test, beta_true, .. } => {
            let p = dir.join("train.csv");
            write_dataset(&p, train)?;
            written.push(p);
            if let Some(test) = test {
                let p = dir.join("test.csv");
                write_dataset(&p, test)?;
                written.push(p);
            }
            if let Some(beta) = beta_true {
                let p = dir.join("beta_true.csv");
                let mut text = String::from("beta\n");
                for b in beta.iter() {
                    writeln!(text, "{b}").unwrap();
                }
                std::fs::write(&p, text).map_err(io_err(&p))?;
                written.push(p);
            }
        }
        Problem::Gp { target, truth } => {
            let p = dir.join("gp_data.json");
            write_json(
                &p,
                &GpData {
                    sensors: target.sensors(),
                    observations: target.observations().iter().copied().collect(),
                    noise_sd: target.noise_sd(),
                    truth: truth.iter().copied().collect(),
                },
            )?;
            written.push(p);
        }
    }
    Ok(written)
}

#[derive(Debug, Clone, Serialize)]
pub struct AutoencoderReport {
    pub kind: AutoencoderKind,
    pub latent_dim: usize,
    pub n_train: usize,
    pub reconstruction_mse: f64,
    pub volume_correction: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodReport {
    pub method: Method,
    pub acceptance_rate: f64,
    pub final_step_size: f64,
    pub n_samples: usize,
    pub n_divergent: usize,
    pub wall_time: f64,
    pub n_grad_evals: u64,
    pub min_ess: Option<f64>,
    pub ess_per_second: Option<f64>,
    pub accuracy: Option<f64>,
    /// Share of true coefficients inside their credible intervals.
    pub coverage: Option<f64>,
    /// Posterior mean of the log-likelihood per observation.
    pub mean_log_likelihood: Option<f64>,
    /// `‖Ĉ − Σ‖_F / ‖Σ‖_F` for the Gaussian target.
    pub covariance_error: Option<f64>,
    /// Largest `‖q − ψ(φ(q))‖_∞` over the draws of an auto-encoded chain.
    pub confinement: Option<f64>,
    /// Sample variances of the encodings `φ(q)`.
    pub latent_variances: Option<Vec<f64>>,
    pub params: Vec<ParamRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: Experiment,
    pub seed: u64,
    pub dim: usize,
    pub autoencoder: Option<AutoencoderReport>,
    pub methods: Vec<MethodReport>,
    /// Leading eigenvalues of the Gaussian target's covariance.
    pub target_eigenvalues: Option<Vec<f64>>,
    pub accuracy_gap: Option<f64>,
    /// `|ℓ_ae − ℓ_base| / |ℓ_base|` for the mean per-observation log-likelihood.
    pub log_likelihood_gap: Option<f64>,
    pub wall_time_ratio: Option<Vec<Vec<f64>>>,
    pub per_grad_ratio: Option<Vec<Vec<f64>>>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn method(&self, m: Method) -> Option<&MethodReport> {
        self.methods.iter().find(|r| r.method == m)
    }
}

#[derive(Debug, Clone, Serialize)]
struct MetaRecord<'a> {
    method: Method,
    seed: u64,
    step_size: f64,
    final_step_size: f64,
    n_leapfrog: usize,
    pcn_step: f64,
    proposal_sd: f64,
    volume_correction: bool,
    n_iter: usize,
    n_warmup: usize,
    thin: usize,
    n_kept: usize,
    acceptance_rate: f64,
    n_grad_evals: u64,
    wall_time: f64,
    config: &'a ExperimentConfig,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub report: Report,
    pub traces: BTreeMap<Method, ChainTrace>,
    pub autoencoder: Option<Autoencoder>,
    pub problem: Problem,
}

struct ChainRun {
    trace: ChainTrace,
    start_step: f64,
    final_step: f64,
}

fn run_timed<K: TransitionKernel>(
    kernel: &mut K,
    q0: &Vector,
    settings: &ChainSettings,
    rng: &mut ChaCha8Rng,
) -> Result<ChainRun, ChainError> {
    let start_step = kernel.step_size();
    let t = Instant::now();
    let mut trace = run_chain(kernel, q0, settings, rng)?;
    trace.wall_time = t.elapsed().as_secs_f64();
    Ok(ChainRun {
        trace,
        start_step,
        final_step: kernel.step_size(),
    })
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    dir: &'a Path,
}

impl Runner<'_> {
    /// Persist the trace (partial on failure) and its metadata.
    fn record(&self, method: Method, settings: &ChainSettings, sampler: &SamplerConfig, result: Result<ChainRun, ChainError>) -> Result<ChainRun> {
        let cols = self.cfg.trace_columns.as_deref();
        match result {
            Ok(run) => {
                write_trace_csv(self.dir.join(format!("trace_{method}.csv")), &run.trace, cols)?;
                let meta = MetaRecord {
                    method,
                    seed: self.cfg.seed,
                    step_size: run.start_step,
                    final_step_size: run.final_step,
                    n_leapfrog: sampler.n_leapfrog,
                    pcn_step: sampler.pcn_step,
                    proposal_sd: sampler.proposal_sd,
                    volume_correction: sampler.volume_correction,
                    n_iter: settings.n_iter,
                    n_warmup: settings.n_warmup,
                    thin: settings.thin,
                    n_kept: run.trace.samples.len(),
                    acceptance_rate: run.trace.acceptance_rate(),
                    n_grad_evals: run.trace.n_grad_evals,
                    wall_time: run.trace.wall_time,
                    config: self.cfg,
                };
                write_json(self.dir.join(format!("meta_{method}.json")), &meta)?;
                Ok(run)
            }
            Err(e) => {
                // Best effort: the chain error is what the caller needs to see.
                let _ = write_trace_csv(self.dir.join(format!("trace_{method}.partial.csv")), &e.partial, cols);
                Err(Error::Chain(Box::new(e)))
            }
        }
    }
}

fn fit_autoencoder(cfg: &ExperimentConfig, samples: &Matrix) -> Result<Autoencoder> {
    let r = cfg.latent_dim();
    match cfg.autoencoder.architecture(r) {
        None => Ok(pca_fit(samples, r)?),
        Some(arch) => {
            let tc = cfg.autoencoder.train_config(cfg.seed.wrapping_add(TRAIN_SEED_OFFSET))?;
            Ok(train_autoencoder(samples, &tc, &arch)?.autoencoder)
        }
    }
}

fn relative_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm() / b.norm()
}

fn evaluate(problem: &Problem, method: Method, run: &ChainRun, ae: Option<&Autoencoder>, level: f64) -> Result<MethodReport> {
    let trace = &run.trace;
    let cost = method_cost(trace);
    let summaries = summarize(&trace.samples, level);
    let mut rep = MethodReport {
        method,
        acceptance_rate: trace.acceptance_rate(),
        final_step_size: run.final_step,
        n_samples: trace.samples.len(),
        n_divergent: trace.post_warmup().filter(|r| r.divergent).count(),
        wall_time: trace.wall_time,
        n_grad_evals: trace.n_grad_evals,
        min_ess: cost.min_ess,
        ess_per_second: cost.ess_per_second,
        accuracy: None,
        coverage: None,
        mean_log_likelihood: None,
        covariance_error: None,
        confinement: None,
        latent_variances: None,
        params: param_records(trace, level),
    };
    match problem {
        Problem::Gaussian(t) => {
            if trace.samples.len() > 1 {
                rep.covariance_error = Some(relative_frobenius(&trace.covariance()?, t.covariance()));
            }
        }
        Problem::Logistic { test, beta_true, .. } => {
            if let Some(test) = test {
                rep.accuracy = Some(predictive_accuracy(&trace.samples, &test.features, &test.labels)?);
            }
            if let Some(beta) = beta_true {
                rep.coverage = Some(interval_coverage(&summaries, beta)?);
            }
        }
        Problem::Gp { target, .. } => {
            let n = target.n_obs().max(1) as f64;
            let mut total = 0.0;
            for u in &trace.samples {
                total += target.log_likelihood(u)? / n;
            }
            rep.mean_log_likelihood = Some(total / trace.samples.len().max(1) as f64);
        }
    }
    if let (Some(ae), true) = (ae, method.is_autoencoded()) {
        let mut worst: f64 = 0.0;
        let mut codes = Vec::with_capacity(trace.samples.len());
        for q in &trace.samples {
            let z = ae.encode(q)?;
            worst = worst.max((ae.decode(&z)? - q).amax());
            codes.push(z);
        }
        rep.confinement = Some(worst);
        if codes.len() > 1 {
            let cov = sample_covariance(&rows_to_matrix(&codes))?;
            rep.latent_variances = Some(cov.diagonal().iter().copied().collect());
        }
    }
    Ok(rep)
}

/// Run the configured experiment and write its artifacts to
/// `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let dir = cfg.output_dir.as_path();
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(dir.join("config.json"), cfg)?;

    let problem = build_problem(cfg)?;
    write_problem_data(&problem, dir)?;
    let d = problem.dim();
    if let Some(&bad) = cfg.trace_columns.iter().flatten().find(|&&j| j >= d) {
        return Err(Error::Config(format!("trace column {bad} is out of range for dimension {d}")));
    }
    if cfg.latent_dim() > d {
        return Err(Error::Config(format!("latent_dim {} exceeds the dimension {d}", cfg.latent_dim())));
    }

    let methods = cfg.methods();
    let runner = Runner { cfg, dir };
    let base_cfg = cfg.sampler_config();
    base_cfg.validate(d)?;
    let q0 = Vector::zeros(d);
    let mut runs: BTreeMap<Method, ChainRun> = BTreeMap::new();

    // Stage 1: the baseline. Its warm-up draws feed the autoencoder; it only
    // continues past warm-up when it was asked for as a method.
    let baseline = cfg.experiment.baseline();
    let needs_ae = methods.iter().any(|m| m.is_autoencoded());
    let mut warmup: Option<(Vec<Vector>, f64)> = None;
    if methods.contains(&baseline) || needs_ae {
        let mut settings = cfg.chain_settings();
        settings.keep_warmup = true;
        let keep = methods.contains(&baseline);
        if !keep {
            settings.n_iter = settings.n_warmup;
        }
        let mut rng = stream(cfg.seed, BASELINE_STREAM);
        let result = match &problem {
            Problem::Gp { target, .. } => {
                let mut k = PcnKernel::new(target, base_cfg.pcn_step)?;
                run_timed(&mut k, &q0, &settings, &mut rng)
            }
            other => {
                let mut k = HmcKernel::new(other.target(), &base_cfg)?;
                run_timed(&mut k, &q0, &settings, &mut rng)
            }
        };
        let run = if keep {
            runner.record(baseline, &settings, &base_cfg, result)?
        } else {
            result.map_err(|e| Error::Chain(Box::new(e)))?
        };
        warmup = Some((run.trace.warmup_samples.clone(), run.final_step));
        if keep {
            runs.insert(baseline, run);
        }
    }

    if methods.contains(&Method::Rwm) {
        let settings = cfg.chain_settings();
        let mut rng = stream(cfg.seed, RWM_STREAM);
        let mut k = RwmKernel::from_config(problem.target(), &base_cfg);
        let result = run_timed(&mut k, &q0, &settings, &mut rng);
        runs.insert(Method::Rwm, runner.record(Method::Rwm, &settings, &base_cfg, result)?);
    }

    // Stage 2: the autoencoder.
    let mut ae_report = None;
    let ae = match (&warmup, needs_ae) {
        (Some((draws, _)), true) => {
            let skip = (draws.len() as f64 * TRAIN_BURN_IN) as usize;
            let train = rows_to_matrix(&draws[skip..]);
            let ae = fit_autoencoder(cfg, &train)?;
            save_autoencoder(dir.join("autoencoder.json"), &ae)?;
            ae_report = Some(AutoencoderReport {
                kind: cfg.autoencoder.kind,
                latent_dim: ae.latent_dim(),
                n_train: train.nrows(),
                reconstruction_mse: reconstruction_mse(&ae, &train)?,
                volume_correction: base_cfg.volume_correction,
            });
            Some((ae, train))
        }
        _ => None,
    };

    // Stage 3: auto-encoded chains from the last warm-up state.
    if let (Some((ae, train)), Some((draws, tuned))) = (&ae, &warmup) {
        let start = draws.last().cloned().unwrap_or_else(|| q0.clone());
        let n_post = cfg.n_iter - cfg.n_warmup();
        let settings = ChainSettings {
            n_iter: cfg.ae_warmup + n_post,
            n_warmup: cfg.ae_warmup,
            keep_warmup: false,
            ..cfg.chain_settings()
        };
        for m in methods.iter().copied().filter(|m| m.is_autoencoded()) {
            let mut sc = base_cfg.clone();
            let mut rng = stream(cfg.seed, AE_STREAM);
            let result = match (m, &problem) {
                (Method::AePcn, Problem::Gp { target, .. }) => {
                    sc.pcn_step = cfg.sampler.ae_step_size.unwrap_or(*tuned);
                    let reference = LatentReference::from_encodings(ae, train)?;
                    let mut k = AePcnKernel::new(target, ae, reference, &sc)?;
                    run_timed(&mut k, &start, &settings, &mut rng)
                }
                (Method::AeHmc, p) => {
                    sc.step_size = match (cfg.sampler.ae_step_size, p) {
                        (Some(s), _) => s,
                        // The pCN step is not a leapfrog step; start from the configured one.
                        (None, Problem::Gp { .. }) => base_cfg.step_size,
                        (None, _) => *tuned,
                    };
                    match p {
                        Problem::Logistic { target, .. } if ae.shallow_decoder().is_some() => {
                            let pot = LogisticPullback::new(target, ae)?;
                            let mut k = AeHmcKernel::with_potential(target, ae, pot, &sc)?;
                            run_timed(&mut k, &start, &settings, &mut rng)
                        }
                        p => {
                            let mut k = AeHmcKernel::new(p.target(), ae, &sc)?;
                            run_timed(&mut k, &start, &settings, &mut rng)
                        }
                    }
                }
                _ => unreachable!("config validation restricts pCN methods to the GP experiment"),
            };
            runs.insert(m, runner.record(m, &settings, &sc, result)?);
        }
    }

    let ae_ref = ae.as_ref().map(|(a, _)| a);
    let mut method_reports = Vec::new();
    for (&m, run) in &runs {
        method_reports.push(evaluate(&problem, m, run, ae_ref, cfg.interval_level)?);
    }

    let mut warnings = Vec::new();
    for r in &method_reports {
        if r.acceptance_rate < TARGET_ACCEPTANCE.0 || r.acceptance_rate > TARGET_ACCEPTANCE.1 {
            warnings.push(format!(
                "{} acceptance rate {:.3} is outside [{}, {}]",
                r.method, r.acceptance_rate, TARGET_ACCEPTANCE.0, TARGET_ACCEPTANCE.1
            ));
        }
    }
    let pair = |f: fn(&MethodReport) -> Option<f64>| -> Option<(f64, f64)> {
        let base = method_reports.iter().find(|r| !r.method.is_autoencoded() && r.method != Method::Rwm)?;
        let aer = method_reports.iter().find(|r| r.method.is_autoencoded())?;
        Some((f(base)?, f(aer)?))
    };
    let accuracy_gap = pair(|r| r.accuracy).map(|(b, a)| (a - b).abs());
    let log_likelihood_gap = pair(|r| r.mean_log_likelihood).map(|(b, a)| (a - b).abs() / b.abs());

    let traces: BTreeMap<Method, ChainTrace> = runs.into_iter().map(|(m, r)| (m, r.trace)).collect();
    let (wall_time_ratio, per_grad_ratio) = if traces.len() >= 2 {
        let list: Vec<&ChainTrace> = traces.values().collect();
        let c = cost_report(&list)?;
        let rows = |m: &Matrix| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        (Some(rows(&c.wall_time_ratio)), Some(rows(&c.per_grad_ratio)))
    } else {
        (None, None)
    };

    let target_eigenvalues = match &problem {
        Problem::Gaussian(t) => Some(sorted_symmetric_eigen(t.covariance())?.0.iter().copied().collect()),
        _ => None,
    };

    let report = Report {
        experiment: cfg.experiment,
        seed: cfg.seed,
        dim: d,
        autoencoder: ae_report,
        methods: method_reports,
        target_eigenvalues,
        accuracy_gap,
        log_likelihood_gap,
        wall_time_ratio,
        per_grad_ratio,
        warnings,
    };
    write_json(dir.join("summary.json"), &report)?;
    let text = render_report(&report);
    std::fs::write(dir.join("report.txt"), &text).map_err(io_err(dir.join("report.txt")))?;

    Ok(ExperimentOutcome {
        report,
        traces,
        autoencoder: ae.map(|(a, _)| a),
        problem,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

pub fn render_report(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment {}  seed {}  dimension {}", r.experiment.name(), r.seed, r.dim);
    if let Some(a) = &r.autoencoder {
        let _ = writeln!(
            s,
            "autoencoder {:?}  r = {}  trained on {} draws  reconstruction mse {:.3e}  volume correction {}",
            a.kind, a.latent_dim, a.n_train, a.reconstruction_mse, if a.volume_correction { "on" } else { "off" }
        );
    }
    let _ = writeln!(
        s,
        "\n{:<8} {:>8} {:>10} {:>8} {:>10} {:>12} {:>10} {:>9} {:>9} {:>10} {:>10}",
        "method", "accept", "step", "kept", "wall (s)", "grad evals", "min ESS", "accuracy", "coverage", "loglik/obs", "cov err"
    );
    for m in &r.methods {
        let _ = writeln!(
            s,
            "{:<8} {:>8.3} {:>10.4e} {:>8} {:>10.3} {:>12} {:>10} {:>9} {:>9} {:>10} {:>10}",
            m.method.name(),
            m.acceptance_rate,
            m.final_step_size,
            m.n_samples,
            m.wall_time,
            m.n_grad_evals,
            opt(m.min_ess),
            opt(m.accuracy),
            opt(m.coverage),
            opt(m.mean_log_likelihood),
            opt(m.covariance_error),
        );
    }
    for m in r.methods.iter().filter(|m| m.confinement.is_some()) {
        let _ = writeln!(s, "\n{}: largest off-manifold component {:.3e}", m.method, m.confinement.unwrap_or(0.0));
        if let (Some(v), Some(e)) = (&m.latent_variances, &r.target_eigenvalues) {
            let _ = writeln!(s, "  latent variances {v:.4?}");
            let _ = writeln!(s, "  target eigenvalues {e:.4?}");
        }
    }
    if let Some(g) = r.accuracy_gap {
        let _ = writeln!(s, "\naccuracy gap {g:.4}");
    }
    if let Some(g) = r.log_likelihood_gap {
        let _ = writeln!(s, "\nrelative log-likelihood gap {g:.4}");
    }
    if let Some(w) = &r.wall_time_ratio {
        let names: Vec<&str> = r.methods.iter().map(|m| m.method.name()).collect();
        let _ = writeln!(s, "\nwall-time ratio (row / column) over {names:?}");
        for row in w {
            let _ = writeln!(s, "  {row:.3?}");
        }
    }
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}
