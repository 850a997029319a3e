//! Maximum-likelihood estimation through the models' fixed-point
//! characterization of the score equations.
//!
//! Every variant is fit by sweeping node-wise updates that re-balance
//! observed against expected success totals, holding the rest of the
//! parameter vector at the previous sweep's values. For the plain variants
//! the update has the closed form `z_i + log(observed / expected)`; for the
//! generalized variants each scalar slot is the root of a strictly
//! decreasing one-dimensional function, found by bracketing and bisection.
//! Sweeps start from zero and stop when the Euclidean norm of the change
//! falls below `tol`.

use ndarray::Array1;

use crate::beta_models::{
    kernel_prepared, residual_from_expected, ModelSpec, ModelVariant, ParameterVector,
    PreparedPanel,
};
use crate::error::{Error, Result};
use crate::graph_data::{GraphObservations, PanelObservations};

/// Knobs for the fixed-point iteration.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Stop when the Euclidean norm of a full sweep's change drops below
    /// this.
    pub tol: f64,
    /// Sweep budget before giving up with `NotConverged`.
    pub max_iter: usize,
    /// Bracket width at which the one-dimensional root search of the
    /// generalized updates stops.
    pub root_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { tol: 1e-4, max_iter: 10_000, root_tol: 1e-10 }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.root_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Schema {
                message: format!(
                    "fit options need tol > 0, root_tol > 0, max_iter >= 1; got tol={}, \
                     root_tol={}, max_iter={}",
                    self.tol, self.root_tol, self.max_iter
                ),
            });
        }
        Ok(())
    }
}

/// A converged fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub theta_hat: ParameterVector,
    /// Full sweeps performed, including the one that met the tolerance.
    pub iterations: usize,
    /// Always true for results the fitters return; kept so serialized
    /// reports state it explicitly.
    pub converged: bool,
    /// Euclidean norm of the final sweep's change.
    pub final_step_norm: f64,
    /// Max-norm of the score at `theta_hat`.
    pub moment_residual_norm: f64,
    /// Log-likelihood kernel at `theta_hat`.
    pub log_likelihood: f64,
}

/// Screens for success totals pinned at their extremes, which rule out a
/// finite maximizer.
///
/// The screen is exact in spirit for the plain variants (out-degrees for
/// every node; in-degrees for all but the pinned node) and advisory for
/// generalized panels: it only applies when `K = 1` with a constant design,
/// where the panel collapses to a single aggregated graph. It is a
/// necessary condition, not a sufficient one — a fit may still fail to
/// converge when the screen passes.
pub fn check_existence(spec: &ModelSpec, panel: &PanelObservations) -> Result<()> {
    spec.check_panel(panel)?;
    if spec.covariate_dim() != 1 {
        return Ok(());
    }
    let x0 = panel.design().value(0, 0);
    if x0 == 0.0 || (0..panel.num_graphs()).any(|l| panel.design().value(l, 0) != x0) {
        return Ok(());
    }

    let n = panel.n();
    let mut d_out = vec![0u64; n];
    let mut d_in = vec![0u64; n];
    let mut t_out = vec![0u64; n];
    let mut t_in = vec![0u64; n];
    for g in panel.graphs() {
        let deg = g.degrees();
        for i in 0..n {
            d_out[i] += deg.out_successes[i];
            d_in[i] += deg.in_successes[i];
            t_out[i] += deg.out_trials[i];
            t_in[i] += deg.in_trials[i];
        }
    }

    let mut pinned = Vec::new();
    for i in 0..n {
        if d_out[i] == 0 || d_out[i] == t_out[i] {
            pinned.push(format!("out[{i}]={} of {}", d_out[i], t_out[i]));
        }
    }
    if spec.variant().is_directed() {
        for i in 0..n - 1 {
            if d_in[i] == 0 || d_in[i] == t_in[i] {
                pinned.push(format!("in[{i}]={} of {}", d_in[i], t_in[i]));
            }
        }
    }
    if pinned.is_empty() {
        Ok(())
    } else {
        Err(Error::NonexistentMle {
            message: format!("success totals pinned at an extreme: {}", pinned.join(", ")),
        })
    }
}

/// Fits the undirected model to one graph.
pub fn fit_undirected(data: &GraphObservations, opts: &FitOptions) -> Result<FitResult> {
    let spec = ModelSpec::undirected(data.n())?;
    fit(&spec, &PanelObservations::single(data.clone()), opts)
}

/// Fits the directed model to one graph.
pub fn fit_directed(data: &GraphObservations, opts: &FitOptions) -> Result<FitResult> {
    let spec = ModelSpec::directed(data.n())?;
    fit(&spec, &PanelObservations::single(data.clone()), opts)
}

/// Fits a generalized (covariate-bearing) variant to a panel.
pub fn fit_generalized(
    spec: &ModelSpec,
    panel: &PanelObservations,
    opts: &FitOptions,
) -> Result<FitResult> {
    if !spec.variant().is_generalized() {
        return Err(Error::ShapeMismatch {
            message: format!("fit_generalized expects a generalized variant, got {}", spec.variant()),
        });
    }
    fit(spec, panel, opts)
}

/// Fits any variant; dispatches on the spec.
pub fn fit(spec: &ModelSpec, panel: &PanelObservations, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    check_existence(spec, panel)?;
    let prep = PreparedPanel::new(spec, panel)?;
    match spec.variant() {
        ModelVariant::Undirected | ModelVariant::Directed => sweep_plain(spec, &prep, opts),
        ModelVariant::Generalized | ModelVariant::GeneralizedUndirected => {
            sweep_generalized(spec, &prep, opts)
        }
    }
}

/// Plain variants: every slot update is `z + log(observed / expected)`.
fn sweep_plain(spec: &ModelSpec, prep: &PreparedPanel, opts: &FitOptions) -> Result<FitResult> {
    let n = prep.n;
    let directed = spec.variant().is_directed();
    let len = spec.param_len();
    let mut z = Array1::<f64>::zeros(len);
    let mut final_step_norm = f64::INFINITY;

    for m in 1..=opts.max_iter {
        let exp = prep.exposures(spec, &z);
        let (e_out, e_in) = prep.expected_degrees(&exp);
        let mut next = z.clone();
        for i in 0..n {
            next[i] = z[i] + (prep.d_out[(i, 0)] / e_out[(i, 0)]).ln();
        }
        if directed {
            for j in 0..n - 1 {
                next[n + j] = z[n + j] + (prep.d_in[(j, 0)] / e_in[(j, 0)]).ln();
            }
        }
        let step = (&next - &z).mapv(|v| v * v).sum().sqrt();
        z = next;
        final_step_norm = step;
        if step < opts.tol {
            if let Some(result) = finish(spec, prep, &z, m, step, opts.tol)? {
                return Ok(result);
            }
        }
    }
    Err(Error::NotConverged { max_iter: opts.max_iter, final_step_norm, tol: opts.tol })
}

/// Generalized variants: each scalar slot `(node, covariate)` is updated to
/// the root of a strictly decreasing function of the shift `u` from its
/// current value,
///
/// `psi(u) = sum_l x_{lk} d_l  -  sum_l x_{lk} e^{x_{lk} u} c_l`,
///
/// where `d_l` and `c_l` are the node's observed and expected success
/// totals in graph `l` under the previous sweep's parameters. Constant
/// covariate columns admit the closed form
/// `u = log(sum d / sum c) / x_k`.
fn sweep_generalized(
    spec: &ModelSpec,
    prep: &PreparedPanel,
    opts: &FitOptions,
) -> Result<FitResult> {
    let n = prep.n;
    let k = spec.covariate_dim();
    let directed = spec.variant().is_directed();
    let len = spec.param_len();
    let num_nodes = if directed { 2 * n - 1 } else { n };
    let mut z = Array1::<f64>::zeros(len);
    let mut final_step_norm = f64::INFINITY;

    let constant_column: Vec<Option<f64>> = (0..k)
        .map(|c| {
            let v = prep.x[(0, c)];
            (1..prep.num_graphs)
                .all(|l| prep.x[(l, c)] == v)
                .then_some(v)
        })
        .collect();

    for m in 1..=opts.max_iter {
        let exp = prep.exposures(spec, &z);
        let (e_out, e_in) = prep.expected_degrees(&exp);
        let mut next = z.clone();
        for node in 0..num_nodes {
            // Nodes 0..n are out-sides (or the undirected single side);
            // nodes n.. are in-sides of nodes 0..n-1.
            let (obs, expd, i) = if node < n {
                (&prep.d_out, &e_out, node)
            } else {
                (&prep.d_in, &e_in, node - n)
            };
            for c in 0..k {
                let slot = node * k + c;
                let u = match constant_column[c] {
                    Some(w) => constant_shift(slot, w, obs.row(i), expd.row(i))?,
                    None => bracketed_shift(
                        slot,
                        prep.x.column(c),
                        obs.row(i),
                        expd.row(i),
                        opts.root_tol,
                    )?,
                };
                next[slot] = z[slot] + u;
            }
        }
        let step = (&next - &z).mapv(|v| v * v).sum().sqrt();
        z = next;
        final_step_norm = step;
        if step < opts.tol {
            if let Some(result) = finish(spec, prep, &z, m, step, opts.tol)? {
                return Ok(result);
            }
        }
    }
    Err(Error::NotConverged { max_iter: opts.max_iter, final_step_norm, tol: opts.tol })
}

/// Closed-form shift for a constant covariate column of value `w`.
fn constant_shift(
    slot: usize,
    w: f64,
    obs: ndarray::ArrayView1<f64>,
    expd: ndarray::ArrayView1<f64>,
) -> Result<f64> {
    if w == 0.0 {
        // The slot never enters any exposure; leave it unchanged.
        return Ok(0.0);
    }
    let d: f64 = obs.sum();
    let c: f64 = expd.sum();
    if d <= 0.0 || c <= 0.0 {
        return Err(Error::BracketFailure { slot });
    }
    Ok((d / c).ln() / w)
}

/// Bracketed bisection for a non-constant covariate column.
fn bracketed_shift(
    slot: usize,
    w: ndarray::ArrayView1<f64>,
    obs: ndarray::ArrayView1<f64>,
    expd: ndarray::ArrayView1<f64>,
    root_tol: f64,
) -> Result<f64> {
    let target: f64 = w.iter().zip(obs.iter()).map(|(wl, dl)| wl * dl).sum();
    let psi = |u: f64| -> f64 {
        let mut acc = target;
        for (&wl, &cl) in w.iter().zip(expd.iter()) {
            if wl == 0.0 || cl == 0.0 {
                continue;
            }
            acc -= wl * (wl * u).exp() * cl;
        }
        acc
    };

    let at_zero = psi(0.0);
    if at_zero == 0.0 {
        return Ok(0.0);
    }
    // psi is strictly decreasing with limits target (or -inf) as u -> +inf
    // and target (or +inf) as u -> -inf, the infinities appearing when some
    // active weight is positive resp. negative. A root on the needed side
    // must be ruled in before expanding, because exp underflow makes psi
    // indistinguishable from its horizontal asymptote.
    let has_positive = w.iter().zip(expd.iter()).any(|(&wl, &cl)| wl > 0.0 && cl > 0.0);
    let has_negative = w.iter().zip(expd.iter()).any(|(&wl, &cl)| wl < 0.0 && cl > 0.0);
    if at_zero > 0.0 && !(has_positive || target < 0.0) {
        return Err(Error::BracketFailure { slot });
    }
    if at_zero < 0.0 && !(has_negative || target > 0.0) {
        return Err(Error::BracketFailure { slot });
    }
    let (mut lo, mut hi);
    if at_zero > 0.0 {
        lo = 0.0;
        hi = 1.0;
        let mut found = false;
        for _ in 0..60 {
            if psi(hi) <= 0.0 {
                found = true;
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        if !found {
            return Err(Error::BracketFailure { slot });
        }
    } else {
        hi = 0.0;
        lo = -1.0;
        let mut found = false;
        for _ in 0..60 {
            if psi(lo) >= 0.0 {
                found = true;
                break;
            }
            hi = lo;
            lo *= 2.0;
        }
        if !found {
            return Err(Error::BracketFailure { slot });
        }
    }
    while hi - lo > root_tol {
        let mid = 0.5 * (lo + hi);
        if psi(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Settles a sweep that met the step tolerance: accepts only when the
/// score at the candidate also vanishes (max-norm below ten times the
/// tolerance), otherwise signals the caller to keep sweeping. The step
/// criterion alone stops short on larger panels, where a unit parameter
/// step moves the expected totals by a multiple of the trial counts.
fn finish(
    spec: &ModelSpec,
    prep: &PreparedPanel,
    z: &Array1<f64>,
    iterations: usize,
    final_step_norm: f64,
    tol: f64,
) -> Result<Option<FitResult>> {
    let exp = prep.exposures(spec, z);
    let (e_out, e_in) = prep.expected_degrees(&exp);
    let residual = residual_from_expected(spec, prep, &e_out, &e_in);
    let moment_residual_norm = residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if moment_residual_norm >= 10.0 * tol {
        return Ok(None);
    }
    let theta_hat = ParameterVector::new(spec, z.clone())?;
    let log_likelihood = kernel_prepared(spec, &theta_hat, prep)?;
    Ok(Some(FitResult {
        theta_hat,
        iterations,
        converged: true,
        final_step_norm,
        moment_residual_norm,
        log_likelihood,
    }))
}
