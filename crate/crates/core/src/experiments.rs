//! Simulation studies: graph sampling, estimator-versus-bound sweeps, the
//! directionality ROC, the likelihood-ratio null histogram, and the contact
//! case-study pipeline.
//!
//! Every study is deterministic for a fixed seed: replicate `r` draws from
//! its own ChaCha stream selected by `(seed, r)`, so results do not depend
//! on thread scheduling.

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beta_models::{ModelSpec, ModelVariant, ParameterVector, PreparedPanel};
use crate::error::{Error, Result};
use crate::estimator::{fit, FitOptions};
use crate::fisher_crb::{
    closed_form_crb_generalized, fim, homogeneous_parameters, scalar_crb_directed,
    scalar_crb_undirected,
};
use crate::graph_data::{
    ingest_contacts, BinningSpec, ContactRecord, CovariateDesign, GraphObservations,
    PanelObservations, TimeWindow,
};
use crate::hypothesis::{
    chi_square_pdf, chi_square_sf, glrt_directionality, glrt_significance,
    undirected_to_directed, BootstrapOptions, TestOptions,
};
use crate::math::{logit, sigmoid};

/// The RNG for one replicate: one seed, one stream per replicate index.
pub(crate) fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Draws one graph from the model: every free pair `(i, j)` succeeds
/// `Binomial(trials, p_ij)` times, with undirected pairs drawn once and
/// mirrored.
pub fn sample_graph<R: Rng + ?Sized>(
    spec: &ModelSpec,
    theta: &ParameterVector,
    trials: u64,
    rng: &mut R,
) -> Result<GraphObservations> {
    if spec.covariate_dim() != 1 {
        return Err(Error::ShapeMismatch {
            message: "sample_graph draws a single graph; covariate models sample panels".into(),
        });
    }
    let template = PanelObservations::single(GraphObservations::empty_with_uniform_trials(
        spec.n(),
        spec.variant().is_directed(),
        trials,
    )?);
    let panel = sample_panel_like(spec, &template, theta, rng)?;
    Ok(panel.graphs()[0].clone())
}

/// Draws a panel of `design.num_graphs()` graphs with uniform per-pair trial
/// counts under a covariate model.
pub fn sample_panel<R: Rng + ?Sized>(
    spec: &ModelSpec,
    theta: &ParameterVector,
    design: &CovariateDesign,
    trials: u64,
    rng: &mut R,
) -> Result<PanelObservations> {
    let graphs = (0..design.num_graphs())
        .map(|_| {
            GraphObservations::empty_with_uniform_trials(
                spec.n(),
                spec.variant().is_directed(),
                trials,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let template = PanelObservations::new(graphs, design.clone())?;
    sample_panel_like(spec, &template, theta, rng)
}

/// Draws fresh counts for every graph of `template`, keeping its trial
/// matrices and design. The workhorse behind both public samplers and the
/// parametric bootstrap.
pub fn sample_panel_like<R: Rng + ?Sized>(
    spec: &ModelSpec,
    template: &PanelObservations,
    theta: &ParameterVector,
    rng: &mut R,
) -> Result<PanelObservations> {
    let prep = PreparedPanel::new(spec, template)?;
    if theta.len() != spec.param_len() {
        return Err(Error::ShapeMismatch {
            message: format!(
                "parameter vector has length {}, model expects {}",
                theta.len(),
                spec.param_len()
            ),
        });
    }
    let exp = prep.exposures(spec, theta.values());
    let directed = spec.variant().is_directed();
    let n = template.n();
    let mut graphs = Vec::with_capacity(template.num_graphs());
    for (g, source) in template.graphs().iter().enumerate() {
        let trials = source.trials();
        let mut y = Array2::<u64>::zeros((n, n));
        for i in 0..n {
            let j_start = if directed { 0 } else { i + 1 };
            for j in j_start..n {
                if i == j || trials[(i, j)] == 0 {
                    continue;
                }
                let p = sigmoid(exp.a[(i, g)] + exp.b[(j, g)]);
                let draw = Binomial::new(trials[(i, j)], p)
                    .expect("sigmoid output is a valid probability")
                    .sample(rng);
                y[(i, j)] = draw;
                if !directed {
                    y[(j, i)] = draw;
                }
            }
        }
        graphs.push(GraphObservations::new(directed, y, trials.clone())?);
    }
    PanelObservations::new(graphs, template.design().clone())
}

/// Whether a panel's degree sequence rules out a finite fit: some node's
/// pooled success count sits at zero or at the total its trials allow. This
/// is the screen the simulation studies apply before fitting, and the
/// replicate is discarded rather than treated as a failure.
pub fn has_degenerate_degree(panel: &PanelObservations) -> bool {
    let n = panel.n();
    let mut out_deg = vec![0u64; n];
    let mut out_max = vec![0u64; n];
    let mut in_deg = vec![0u64; n];
    let mut in_max = vec![0u64; n];
    for g in panel.graphs() {
        let y = g.y();
        let trials = g.trials();
        for i in 0..n {
            for j in 0..n {
                out_deg[i] += y[(i, j)];
                out_max[i] += trials[(i, j)];
                in_deg[j] += y[(i, j)];
                in_max[j] += trials[(i, j)];
            }
        }
    }
    let stuck = |deg: &[u64], max: &[u64]| {
        deg.iter()
            .zip(max)
            .any(|(&d, &m)| m > 0 && (d == 0 || d == m))
    };
    if panel.directed() {
        stuck(&out_deg, &out_max) || stuck(&in_deg, &in_max)
    } else {
        stuck(&out_deg, &out_max)
    }
}

/// Runs `num_sims` replicate jobs on streams `stream_base..`, in parallel
/// but reduced in replicate order. A job returning `Ok(None)` marks its
/// replicate discarded; more than half discarded fails the whole study.
fn run_replicates<T, F>(
    num_sims: usize,
    seed: u64,
    stream_base: u64,
    job: F,
) -> Result<(Vec<T>, usize)>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<Option<T>> + Sync,
{
    let outcomes: Vec<Option<T>> = (0..num_sims)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, stream_base + r as u64);
            job(&mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut kept = Vec::with_capacity(num_sims);
    let mut discarded = 0usize;
    for outcome in outcomes {
        match outcome {
            Some(value) => kept.push(value),
            None => discarded += 1,
        }
    }
    if 2 * discarded > num_sims {
        return Err(Error::TooFewValidSims { discarded, requested: num_sims });
    }
    Ok((kept, discarded))
}

/// Runs a fit on a sampled panel, mapping numerical failures to a discard
/// and keeping data errors fatal.
fn fit_or_discard(
    spec: &ModelSpec,
    panel: &PanelObservations,
    opts: &FitOptions,
) -> Result<Option<crate::estimator::FitResult>> {
    match fit(spec, panel, opts) {
        Ok(result) => Ok(Some(result)),
        Err(e) if e.is_data_error() => Err(e),
        Err(_) => Ok(None),
    }
}

fn default_num_sims() -> usize {
    2000
}

fn default_num_bins() -> usize {
    40
}

/// Configuration for the estimator-versus-bound sweep.
///
/// Each grid entry is the per-dyad success probability in the homogeneous
/// special case; the covariate variant interprets it as the success
/// probability of its first design row and reports the average probability
/// across rows instead.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RmseConfig {
    pub variant: ModelVariant,
    pub n: usize,
    pub trials: u64,
    pub probabilities: Vec<f64>,
    #[serde(default = "default_num_sims")]
    pub num_sims: usize,
    #[serde(default)]
    pub seed: u64,
}

impl RmseConfig {
    fn validate(&self) -> Result<()> {
        if self.num_sims == 0 {
            return Err(Error::DegenerateInput {
                message: "num_sims must be at least 1".to_string(),
            });
        }
        if self.probabilities.is_empty() {
            return Err(Error::DegenerateInput {
                message: "the probability grid is empty".to_string(),
            });
        }
        for &p in &self.probabilities {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::DegenerateInput {
                    message: format!("grid probability {p} is outside (0, 1)"),
                });
            }
        }
        Ok(())
    }
}

/// One row of the estimator-versus-bound table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsePoint {
    /// Per-dyad success probability (row-averaged for the covariate variant).
    pub probability: f64,
    /// Root-mean-square error of the designated coordinate over the kept
    /// replicates.
    pub rmse: f64,
    /// Matching lower bound on the standard deviation.
    pub crb: f64,
    pub used: usize,
    pub discarded: usize,
}

struct GridPoint {
    spec: ModelSpec,
    template: PanelObservations,
    theta: ParameterVector,
    truth: f64,
    crb_std: f64,
    x_value: f64,
}

fn rmse_grid_point(config: &RmseConfig, p: f64) -> Result<GridPoint> {
    let n = config.n;
    let trials = config.trials;
    match config.variant {
        ModelVariant::Undirected => {
            let spec = ModelSpec::undirected(n)?;
            let theta = homogeneous_parameters(&spec, p)?;
            let truth = theta.values()[0];
            let template = PanelObservations::single(
                GraphObservations::empty_with_uniform_trials(n, false, trials)?,
            );
            let crb_std = scalar_crb_undirected(n, trials, p)?.sqrt();
            Ok(GridPoint { spec, template, theta, truth, crb_std, x_value: p })
        }
        ModelVariant::Directed => {
            let spec = ModelSpec::directed(n)?;
            let theta = homogeneous_parameters(&spec, p)?;
            let truth = theta.values()[0];
            let template = PanelObservations::single(
                GraphObservations::empty_with_uniform_trials(n, true, trials)?,
            );
            let crb_std = scalar_crb_directed(n, trials, p)?.alpha.sqrt();
            Ok(GridPoint { spec, template, theta, truth, crb_std, x_value: p })
        }
        ModelVariant::Generalized => {
            let spec = ModelSpec::generalized(n, 2)?;
            let design =
                CovariateDesign::new(ndarray::array![[1.0, 0.0], [1.0, 1.0]])?;
            let a = logit(p);
            let mut values = Array1::<f64>::zeros(spec.param_len());
            for i in 0..n {
                values[2 * i] = a;
                values[2 * i + 1] = a;
            }
            let theta = ParameterVector::new(&spec, values)?;
            let graphs = (0..design.num_graphs())
                .map(|_| GraphObservations::empty_with_uniform_trials(n, true, trials))
                .collect::<Result<Vec<_>>>()?;
            let template = PanelObservations::new(graphs, design.clone())?;
            let crb_std = closed_form_crb_generalized(n, trials, &design, &[a, a])?[(0, 0)]
                .sqrt();
            let p_bar = (p + sigmoid(2.0 * a)) / 2.0;
            Ok(GridPoint { spec, template, theta, truth: a, crb_std, x_value: p_bar })
        }
        ModelVariant::GeneralizedUndirected => Err(Error::InvalidSpecialCase {
            message: "the sweep covers the undirected, directed, and covariate-directed \
                      variants"
                .to_string(),
        }),
    }
}

/// Sweeps the probability grid: at each grid value, draws `num_sims`
/// homogeneous panels, fits each, and pairs the root-mean-square error of
/// the designated coordinate (the first free slot) with its closed-form
/// bound. Degenerate degree sequences and failed fits are discarded;
/// a grid value losing more than half its replicates fails.
pub fn rmse_vs_crb(config: &RmseConfig, fit_opts: &FitOptions) -> Result<Vec<RmsePoint>> {
    config.validate()?;
    let mut table = Vec::with_capacity(config.probabilities.len());
    for (g, &p) in config.probabilities.iter().enumerate() {
        let point = rmse_grid_point(config, p)?;
        let stream_base = (g * config.num_sims) as u64;
        let (estimates, discarded) =
            run_replicates(config.num_sims, config.seed, stream_base, |rng| {
                let panel = sample_panel_like(&point.spec, &point.template, &point.theta, rng)?;
                if has_degenerate_degree(&panel) {
                    return Ok(None);
                }
                Ok(fit_or_discard(&point.spec, &panel, fit_opts)?
                    .map(|f| f.theta_hat.values()[0]))
            })?;
        let mse = estimates.iter().map(|e| (e - point.truth).powi(2)).sum::<f64>()
            / estimates.len() as f64;
        table.push(RmsePoint {
            probability: point.x_value,
            rmse: mse.sqrt(),
            crb: point.crb_std,
            used: estimates.len(),
            discarded,
        });
    }
    Ok(table)
}

/// Configuration for the directionality detector study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RocConfig {
    pub n: usize,
    pub trials: u64,
    /// Half-widths of the uniform interval the node parameters are drawn
    /// from; one curve per entry.
    pub rhos: Vec<f64>,
    #[serde(default = "default_num_sims")]
    pub num_sims: usize,
    #[serde(default)]
    pub seed: u64,
}

impl RocConfig {
    fn validate(&self) -> Result<()> {
        if self.num_sims == 0 {
            return Err(Error::DegenerateInput {
                message: "num_sims must be at least 1".to_string(),
            });
        }
        if self.rhos.is_empty() {
            return Err(Error::DegenerateInput {
                message: "the rho grid is empty".to_string(),
            });
        }
        for &rho in &self.rhos {
            if !(rho > 0.0) || !rho.is_finite() {
                return Err(Error::DegenerateInput {
                    message: format!("rho must be positive and finite, got {rho}"),
                });
            }
        }
        Ok(())
    }
}

/// One operating point of the detector: reject when the statistic exceeds
/// `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub false_positive_rate: f64,
    pub true_positive_rate: f64,
}

/// A full sweep at one draw half-width, with its trapezoidal area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub rho: f64,
    pub auc: f64,
    pub discarded_alternative: usize,
    pub discarded_null: usize,
    pub points: Vec<RocPoint>,
}

fn roc_from_stats(
    rho: f64,
    mut positives: Vec<f64>,
    mut negatives: Vec<f64>,
    discarded_alternative: usize,
    discarded_null: usize,
) -> RocCurve {
    positives.sort_by(f64::total_cmp);
    negatives.sort_by(f64::total_cmp);
    let mut thresholds = Vec::with_capacity(positives.len() + negatives.len() + 2);
    thresholds.push(f64::NEG_INFINITY);
    thresholds.extend(positives.iter().chain(negatives.iter()).copied());
    thresholds.push(f64::INFINITY);
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let frac_above = |sorted: &[f64], eta: f64| {
        let above = sorted.len() - sorted.partition_point(|&v| v <= eta);
        above as f64 / sorted.len() as f64
    };
    let points: Vec<RocPoint> = thresholds
        .iter()
        .map(|&eta| RocPoint {
            threshold: eta,
            false_positive_rate: frac_above(&negatives, eta),
            true_positive_rate: frac_above(&positives, eta),
        })
        .collect();
    let auc = points
        .windows(2)
        .map(|w| {
            (w[0].false_positive_rate - w[1].false_positive_rate)
                * (w[0].true_positive_rate + w[1].true_positive_rate)
                / 2.0
        })
        .sum();
    RocCurve { rho, auc, discarded_alternative, discarded_null, points }
}

/// Detector sweep for directionality: per grid half-width, draws replicates
/// under both hypotheses (alternative: out- and in-parameters independent
/// uniform; null: in-parameters tied to the out-parameters), computes the
/// likelihood-ratio statistic of each, and sweeps the rejection threshold
/// over all observed statistics.
pub fn roc_directionality(
    config: &RocConfig,
    fit_opts: &FitOptions,
) -> Result<Vec<RocCurve>> {
    config.validate()?;
    let spec = ModelSpec::directed(config.n)?;
    let test_opts = TestOptions { fit: *fit_opts, bootstrap: None };
    let lambda_of = |graph: &GraphObservations| -> Result<Option<f64>> {
        match glrt_directionality(graph, &test_opts) {
            Ok(t) => Ok(Some(t.lambda_log)),
            Err(e) if e.is_data_error() => Err(e),
            Err(_) => Ok(None),
        }
    };
    let mut curves = Vec::with_capacity(config.rhos.len());
    for (g, &rho) in config.rhos.iter().enumerate() {
        let positive_base = (2 * g * config.num_sims) as u64;
        let negative_base = ((2 * g + 1) * config.num_sims) as u64;
        let (positives, discarded_alternative) =
            run_replicates(config.num_sims, config.seed, positive_base, |rng| {
                let mut values = Array1::<f64>::zeros(2 * config.n - 1);
                for v in values.iter_mut() {
                    *v = rng.random_range(-rho..rho);
                }
                let theta = ParameterVector::new(&spec, values)?;
                let graph = sample_graph(&spec, &theta, config.trials, rng)?;
                lambda_of(&graph)
            })?;
        let (negatives, discarded_null) =
            run_replicates(config.num_sims, config.seed, negative_base, |rng| {
                let mut shared = vec![0.0; config.n];
                for v in shared.iter_mut() {
                    *v = rng.random_range(-rho..rho);
                }
                let theta = ParameterVector::new(&spec, undirected_to_directed(&shared))?;
                let graph = sample_graph(&spec, &theta, config.trials, rng)?;
                lambda_of(&graph)
            })?;
        curves.push(roc_from_stats(
            rho,
            positives,
            negatives,
            discarded_alternative,
            discarded_null,
        ));
    }
    Ok(curves)
}

/// Configuration for the null-distribution histogram of the directionality
/// statistic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WilksConfig {
    pub n: usize,
    pub trials: u64,
    /// Half-width of the uniform interval the tied node parameters are
    /// drawn from.
    pub rho: f64,
    #[serde(default = "default_num_sims")]
    pub num_sims: usize,
    #[serde(default = "default_num_bins")]
    pub num_bins: usize,
    #[serde(default)]
    pub seed: u64,
}

impl WilksConfig {
    fn validate(&self) -> Result<()> {
        if self.num_sims == 0 {
            return Err(Error::DegenerateInput {
                message: "num_sims must be at least 1".to_string(),
            });
        }
        if self.num_bins == 0 {
            return Err(Error::DegenerateInput {
                message: "num_bins must be at least 1".to_string(),
            });
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::DegenerateInput {
                message: format!("rho must be positive and finite, got {}", self.rho),
            });
        }
        Ok(())
    }
}

/// One histogram bin: the sample mass it holds and the reference density at
/// its center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub mass: f64,
    pub chi2_pdf: f64,
}

/// Binned null distribution of the directionality statistic with its
/// distance to the reference chi-squared law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilksSummary {
    /// Degrees of freedom of the reference distribution (`n - 1`).
    pub df: usize,
    /// Kolmogorov-Smirnov distance between the sample and the reference.
    pub ks_statistic: f64,
    pub mean_lambda: f64,
    pub used: usize,
    pub discarded: usize,
    pub bins: Vec<HistogramBin>,
}

/// Simulates the directionality statistic under the null (tied parameters
/// drawn uniform) and bins it against the chi-squared law that Wilks'
/// theorem predicts.
pub fn wilks_histogram(config: &WilksConfig, fit_opts: &FitOptions) -> Result<WilksSummary> {
    config.validate()?;
    let spec = ModelSpec::directed(config.n)?;
    let test_opts = TestOptions { fit: *fit_opts, bootstrap: None };
    let (mut lambdas, discarded) =
        run_replicates(config.num_sims, config.seed, 0, |rng| {
            let mut shared = vec![0.0; config.n];
            for v in shared.iter_mut() {
                *v = rng.random_range(-config.rho..config.rho);
            }
            let theta = ParameterVector::new(&spec, undirected_to_directed(&shared))?;
            let graph = sample_graph(&spec, &theta, config.trials, rng)?;
            match glrt_directionality(&graph, &test_opts) {
                Ok(t) => Ok(Some(t.lambda_log)),
                Err(e) if e.is_data_error() => Err(e),
                Err(_) => Ok(None),
            }
        })?;
    lambdas.sort_by(f64::total_cmp);
    let df = config.n - 1;
    let m = lambdas.len() as f64;
    let mean_lambda = lambdas.iter().sum::<f64>() / m;
    let mut ks_statistic = 0.0f64;
    for (i, &x) in lambdas.iter().enumerate() {
        let cdf = 1.0 - chi_square_sf(x, df);
        ks_statistic = ks_statistic
            .max(((i + 1) as f64 / m - cdf).abs())
            .max((cdf - i as f64 / m).abs());
    }
    let top = lambdas.last().copied().unwrap_or(0.0);
    let width = if top > 0.0 { top / config.num_bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; config.num_bins];
    for &x in &lambdas {
        let b = ((x / width) as usize).min(config.num_bins - 1);
        counts[b] += 1;
    }
    let bins = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| {
            let left = b as f64 * width;
            let right = left + width;
            HistogramBin {
                left,
                right,
                mass: c as f64 / m,
                chi2_pdf: chi_square_pdf((left + right) / 2.0, df),
            }
        })
        .collect();
    Ok(WilksSummary {
        df,
        ks_statistic,
        mean_lambda,
        used: lambdas.len(),
        discarded,
        bins,
    })
}

fn default_trials_per_window() -> u64 {
    1
}

fn default_bootstrap_sims() -> Option<usize> {
    Some(2000)
}

/// Configuration for the contact-data pipeline: a day-by-period grid of
/// observation windows plus test options.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseStudyConfig {
    /// `windows[d][t]` is the half-open `[start, end)` window of day `d`,
    /// period `t`. All days must carry the same number of periods, and both
    /// dimensions need at least two entries.
    pub windows: Vec<Vec<(i64, i64)>>,
    #[serde(default)]
    pub whitelist: Option<Vec<String>>,
    #[serde(default = "default_trials_per_window")]
    pub trials_per_window: u64,
    /// Parametric bootstrap replicates per test; `null` skips the bootstrap.
    #[serde(default = "default_bootstrap_sims")]
    pub bootstrap_sims: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl CaseStudyConfig {
    fn dims(&self) -> Result<(usize, usize)> {
        let days = self.windows.len();
        if days < 2 {
            return Err(Error::DegenerateInput {
                message: "the window grid needs at least two days".to_string(),
            });
        }
        let periods = self.windows[0].len();
        if periods < 2 {
            return Err(Error::DegenerateInput {
                message: "the window grid needs at least two periods per day".to_string(),
            });
        }
        if self.windows.iter().any(|row| row.len() != periods) {
            return Err(Error::DegenerateInput {
                message: "every day must carry the same number of periods".to_string(),
            });
        }
        Ok((days, periods))
    }
}

/// One single-covariate test from the pipeline: the named category against
/// everything else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateTestReport {
    pub label: String,
    pub lambda_log: f64,
    pub df: usize,
    pub p_wilks: f64,
    pub p_bootstrap: Option<f64>,
    pub bootstrap_sims: usize,
    pub bootstrap_discarded: usize,
}

/// The simultaneous regression on all periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub covariate_dim: usize,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    /// `theta[i][k]`: coefficient `k` of node `i`.
    pub theta: Vec<Vec<f64>>,
    /// Matching lower bounds on each coefficient's standard deviation.
    pub crb_std: Vec<Vec<f64>>,
    /// Per-coefficient averages across nodes.
    pub column_means: Vec<f64>,
}

/// Everything the contact pipeline produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyReport {
    pub node_ids: Vec<String>,
    pub num_days: usize,
    pub num_periods: usize,
    pub used_records: usize,
    pub dropped_records: usize,
    pub total_successes: u64,
    pub total_trials: u64,
    pub success_rate: f64,
    pub tests: Vec<CovariateTestReport>,
    pub regression: RegressionReport,
}

fn two_group_panel(
    cells: &[GraphObservations],
    periods: usize,
    in_group: impl Fn(usize, usize) -> bool + Copy,
) -> Result<PanelObservations> {
    let split = |want: bool| {
        cells
            .iter()
            .enumerate()
            .filter(move |(c, _)| in_group(c / periods, c % periods) == want)
            .map(|(_, g)| g)
    };
    let focal = GraphObservations::merged(split(true))?;
    let rest = GraphObservations::merged(split(false))?;
    let design = CovariateDesign::new(ndarray::array![[1.0, 1.0], [1.0, 0.0]])?;
    PanelObservations::new(vec![focal, rest], design)
}

fn run_covariate_test(
    label: String,
    panel: &PanelObservations,
    config: &CaseStudyConfig,
    fit_opts: &FitOptions,
    test_index: u64,
) -> Result<CovariateTestReport> {
    let bootstrap = config.bootstrap_sims.map(|num_sims| BootstrapOptions {
        num_sims,
        seed: config
            .seed
            .wrapping_add((test_index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
    });
    let opts = TestOptions { fit: *fit_opts, bootstrap };
    let result = glrt_significance(panel, 1, &opts)?;
    Ok(CovariateTestReport {
        label,
        lambda_log: result.lambda_log,
        df: result.df,
        p_wilks: result.p_wilks,
        p_bootstrap: result.p_bootstrap,
        bootstrap_sims: result.num_sims,
        bootstrap_discarded: result.discarded,
    })
}

/// The full contact pipeline: bins the records into one graph per
/// `(day, period)` cell, tests every period and every day as a single
/// binary covariate against the pooled remainder, then regresses the
/// period graphs on all periods simultaneously and reports coefficient
/// estimates with their variance bounds.
pub fn case_study(
    records: &[ContactRecord],
    config: &CaseStudyConfig,
    fit_opts: &FitOptions,
) -> Result<CaseStudyReport> {
    let (days, periods) = config.dims()?;
    let mut windows = Vec::with_capacity(days * periods);
    for (d, row) in config.windows.iter().enumerate() {
        for (t, &(start, end)) in row.iter().enumerate() {
            windows.push(TimeWindow { start, end, graph: d * periods + t });
        }
    }
    let binning = BinningSpec::new(windows, config.whitelist.clone())?;
    let ingested = ingest_contacts(records, &binning, config.trials_per_window)?;
    let cells = ingested.graphs;
    let n = cells[0].n();

    let total_successes: u64 = cells.iter().map(|g| g.total_successes()).sum();
    let total_trials: u64 = cells.iter().map(|g| g.total_trials()).sum();
    if total_trials == 0 {
        return Err(Error::DegenerateInput {
            message: "the window grid carries no trials".to_string(),
        });
    }

    let mut tests = Vec::with_capacity(periods + days);
    for t_star in 0..periods {
        let panel = two_group_panel(&cells, periods, |_, t| t == t_star)?;
        tests.push(run_covariate_test(
            format!("period {}", t_star + 1),
            &panel,
            config,
            fit_opts,
            t_star as u64,
        )?);
    }
    for d_star in 0..days {
        let panel = two_group_panel(&cells, periods, |d, _| d == d_star)?;
        tests.push(run_covariate_test(
            format!("day {}", d_star + 1),
            &panel,
            config,
            fit_opts,
            (periods + d_star) as u64,
        )?);
    }

    let mut period_graphs = Vec::with_capacity(periods);
    for t in 0..periods {
        let parts = (0..days).map(|d| &cells[d * periods + t]);
        period_graphs.push(GraphObservations::merged(parts)?);
    }
    let mut x = Array2::<f64>::zeros((periods, periods));
    for t in 0..periods {
        x[(t, 0)] = 1.0;
        if t > 0 {
            x[(t, t)] = 1.0;
        }
    }
    let design = CovariateDesign::new(x)?;
    let panel = PanelObservations::new(period_graphs, design)?;
    let spec = ModelSpec::generalized_undirected(n, periods)?;
    let reg_fit = fit(&spec, &panel, fit_opts)?;
    let info = fim(&spec, &panel, &reg_fit.theta_hat)?;
    let k = periods;
    let theta: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..k).map(|c| reg_fit.theta_hat.values()[i * k + c]).collect())
        .collect();
    let crb_std: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..k).map(|c| info.crb_diag[i * k + c].sqrt()).collect())
        .collect();
    let column_means: Vec<f64> = (0..k)
        .map(|c| theta.iter().map(|row| row[c]).sum::<f64>() / n as f64)
        .collect();

    Ok(CaseStudyReport {
        node_ids: ingested.node_ids,
        num_days: days,
        num_periods: periods,
        used_records: ingested.used_records,
        dropped_records: ingested.dropped_records,
        total_successes,
        total_trials,
        success_rate: total_successes as f64 / total_trials as f64,
        tests,
        regression: RegressionReport {
            covariate_dim: k,
            iterations: reg_fit.iterations,
            converged: reg_fit.converged,
            log_likelihood: reg_fit.log_likelihood,
            theta,
            crb_std,
            column_means,
        },
    })
}
