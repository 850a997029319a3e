//! The model family: per-pair edge probabilities driven by node-specific
//! parameters, their log-likelihood kernel, and the moment (score) residual.
//!
//! Four variants share one set of formulas. In the generalized directed
//! model each node carries an out-vector `alpha_i` and an in-vector
//! `beta_j` in R^K, and pair `(i, j)` observed under covariate `x_l` is
//! Bernoulli with success probability
//! `sigmoid(alpha_i . x_l + beta_j . x_l)`. The undirected generalized
//! variant sets `alpha_i = beta_i` and models each unordered pair once.
//! The plain directed and undirected variants are the `L = 1, K = 1,
//! x = [1]` instances. The last node's in-vector is pinned to zero in the
//! directed variants to remove the additive ambiguity
//! `alpha_i + c, beta_j - c`.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph_data::PanelObservations;
use crate::math::{log1p_exp, sigmoid};

/// Which member of the model family is in play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    Undirected,
    Directed,
    Generalized,
    GeneralizedUndirected,
}

impl ModelVariant {
    /// Whether the variant models ordered pairs.
    pub fn is_directed(self) -> bool {
        matches!(self, ModelVariant::Directed | ModelVariant::Generalized)
    }

    /// Whether the variant attaches covariate vectors to graphs.
    pub fn is_generalized(self) -> bool {
        matches!(self, ModelVariant::Generalized | ModelVariant::GeneralizedUndirected)
    }
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelVariant::Undirected => "undirected",
            ModelVariant::Directed => "directed",
            ModelVariant::Generalized => "generalized",
            ModelVariant::GeneralizedUndirected => "generalized-undirected",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "undirected" => Ok(ModelVariant::Undirected),
            "directed" => Ok(ModelVariant::Directed),
            "generalized" => Ok(ModelVariant::Generalized),
            "generalized-undirected" => Ok(ModelVariant::GeneralizedUndirected),
            other => Err(Error::Schema {
                message: format!(
                    "unknown model variant `{other}` (expected undirected, directed, \
                     generalized, or generalized-undirected)"
                ),
            }),
        }
    }
}

/// A variant together with its dimensions: node count `n` and covariate
/// dimension `K` (fixed at 1 for the non-generalized variants).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    variant: ModelVariant,
    n: usize,
    covariate_dim: usize,
}

impl ModelSpec {
    pub fn new(variant: ModelVariant, n: usize, covariate_dim: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::ShapeMismatch {
                message: format!("model needs at least two nodes, got n={n}"),
            });
        }
        if !variant.is_generalized() && covariate_dim != 1 {
            return Err(Error::ShapeMismatch {
                message: format!(
                    "variant {variant} has no covariates; covariate_dim must be 1, got \
                     {covariate_dim}"
                ),
            });
        }
        Ok(Self { variant, n, covariate_dim })
    }

    pub fn undirected(n: usize) -> Result<Self> {
        Self::new(ModelVariant::Undirected, n, 1)
    }

    pub fn directed(n: usize) -> Result<Self> {
        Self::new(ModelVariant::Directed, n, 1)
    }

    pub fn generalized(n: usize, covariate_dim: usize) -> Result<Self> {
        Self::new(ModelVariant::Generalized, n, covariate_dim)
    }

    pub fn generalized_undirected(n: usize, covariate_dim: usize) -> Result<Self> {
        Self::new(ModelVariant::GeneralizedUndirected, n, covariate_dim)
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn covariate_dim(&self) -> usize {
        self.covariate_dim
    }

    /// Number of free parameters.
    ///
    /// Layouts (0-based nodes, `K = covariate_dim`):
    /// - undirected: `[beta_0 .. beta_{n-1}]`, length `n`;
    /// - directed: `[alpha_0 .. alpha_{n-1}, beta_0 .. beta_{n-2}]`, length
    ///   `2n - 1` (`beta_{n-1}` pinned to 0);
    /// - generalized: the directed layout with each scalar replaced by a
    ///   K-vector, length `(2n - 1) K`;
    /// - generalized-undirected: `[beta_0 .. beta_{n-1}]` as K-vectors,
    ///   length `n K`.
    pub fn param_len(&self) -> usize {
        let nodes = match self.variant {
            ModelVariant::Undirected | ModelVariant::GeneralizedUndirected => self.n,
            ModelVariant::Directed | ModelVariant::Generalized => 2 * self.n - 1,
        };
        nodes * self.covariate_dim
    }

    /// Human-readable name of each parameter slot, in layout order.
    pub fn slot_labels(&self) -> Vec<String> {
        let k = self.covariate_dim;
        let mut labels = Vec::with_capacity(self.param_len());
        let push = |labels: &mut Vec<String>, side: &str, i: usize| {
            if k == 1 {
                labels.push(format!("{side}[{i}]"));
            } else {
                for c in 0..k {
                    labels.push(format!("{side}[{i}][{c}]"));
                }
            }
        };
        match self.variant {
            ModelVariant::Undirected | ModelVariant::GeneralizedUndirected => {
                for i in 0..self.n {
                    push(&mut labels, "beta", i);
                }
            }
            ModelVariant::Directed | ModelVariant::Generalized => {
                for i in 0..self.n {
                    push(&mut labels, "alpha", i);
                }
                for i in 0..self.n - 1 {
                    push(&mut labels, "beta", i);
                }
            }
        }
        labels
    }

    /// Confirms that a panel has the node count, orientation, and design
    /// width this spec expects. Non-generalized variants additionally
    /// require every design entry to be exactly 1 (the implicit `x = [1]`).
    pub fn check_panel(&self, panel: &PanelObservations) -> Result<()> {
        if panel.n() != self.n {
            return Err(Error::ShapeMismatch {
                message: format!("model has n={}, data has n={}", self.n, panel.n()),
            });
        }
        if panel.directed() != self.variant.is_directed() {
            return Err(Error::ShapeMismatch {
                message: format!(
                    "variant {} expects directed={}, data has directed={}",
                    self.variant,
                    self.variant.is_directed(),
                    panel.directed()
                ),
            });
        }
        if panel.design().dim() != self.covariate_dim {
            return Err(Error::ShapeMismatch {
                message: format!(
                    "model has K={}, design has K={}",
                    self.covariate_dim,
                    panel.design().dim()
                ),
            });
        }
        if !self.variant.is_generalized()
            && panel.design().matrix().iter().any(|&v| v != 1.0)
        {
            return Err(Error::ShapeMismatch {
                message: format!(
                    "variant {} takes no covariates; design entries must all be 1",
                    self.variant
                ),
            });
        }
        Ok(())
    }
}

/// A packed parameter vector laid out per [`ModelSpec::param_len`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    values: Array1<f64>,
}

impl ParameterVector {
    pub fn new(spec: &ModelSpec, values: Array1<f64>) -> Result<Self> {
        if values.len() != spec.param_len() {
            return Err(Error::ShapeMismatch {
                message: format!(
                    "parameter vector has length {}, model expects {}",
                    values.len(),
                    spec.param_len()
                ),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Schema {
                message: format!("parameter vector contains a non-finite entry: {bad}"),
            });
        }
        Ok(Self { values })
    }

    pub fn zeros(spec: &ModelSpec) -> Self {
        Self { values: Array1::zeros(spec.param_len()) }
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The out-vector `alpha_i` under `spec`'s layout. For the undirected
    /// variants this is the node's single vector.
    pub fn alpha(&self, spec: &ModelSpec, i: usize) -> Vec<f64> {
        let k = spec.covariate_dim();
        self.values.slice(ndarray::s![i * k..(i + 1) * k]).to_vec()
    }

    /// The in-vector `beta_j` under `spec`'s layout; the pinned last node of
    /// the directed variants yields zeros.
    pub fn beta(&self, spec: &ModelSpec, j: usize) -> Vec<f64> {
        let k = spec.covariate_dim();
        match spec.variant() {
            ModelVariant::Undirected | ModelVariant::GeneralizedUndirected => self.alpha(spec, j),
            ModelVariant::Directed | ModelVariant::Generalized => {
                if j == spec.n() - 1 {
                    vec![0.0; k]
                } else {
                    let off = (spec.n() + j) * k;
                    self.values.slice(ndarray::s![off..off + k]).to_vec()
                }
            }
        }
    }
}

/// Per-node, per-graph linear predictors: `a[(i, l)] = alpha_i . x_l` and
/// `b[(j, l)] = beta_j . x_l`. Pair `(i, j)` in graph `l` succeeds with
/// probability `sigmoid(a[(i, l)] + b[(j, l)])`.
pub(crate) struct Exposures {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
}

/// Count matrices and degree totals converted once into floating point, with
/// the design attached; shared by the likelihood, score, estimator, and
/// information-matrix code.
pub(crate) struct PreparedPanel {
    pub n: usize,
    pub num_graphs: usize,
    pub x: Array2<f64>,
    /// Per-graph trial counts `N_{ij,l}`.
    pub trials: Vec<Array2<f64>>,
    /// Out-successes `d_out[(i, l)]`; for undirected data the node degree.
    pub d_out: Array2<f64>,
    /// In-successes `d_in[(i, l)]`; equals `d_out` for undirected data.
    pub d_in: Array2<f64>,
}

impl PreparedPanel {
    pub fn new(spec: &ModelSpec, panel: &PanelObservations) -> Result<Self> {
        spec.check_panel(panel)?;
        let n = panel.n();
        let num_graphs = panel.num_graphs();
        let mut trials = Vec::with_capacity(num_graphs);
        let mut d_out = Array2::<f64>::zeros((n, num_graphs));
        let mut d_in = Array2::<f64>::zeros((n, num_graphs));
        for (l, g) in panel.graphs().iter().enumerate() {
            trials.push(g.trials().mapv(|v| v as f64));
            let deg = g.degrees();
            for i in 0..n {
                d_out[(i, l)] = deg.out_successes[i] as f64;
                d_in[(i, l)] = deg.in_successes[i] as f64;
            }
        }
        Ok(Self { n, num_graphs, x: panel.design().matrix().clone(), trials, d_out, d_in })
    }

    pub fn exposures(&self, spec: &ModelSpec, values: &Array1<f64>) -> Exposures {
        let (n, l, k) = (self.n, self.num_graphs, spec.covariate_dim());
        let mut a = Array2::<f64>::zeros((n, l));
        let mut b = Array2::<f64>::zeros((n, l));
        let dot = |node_offset: usize, graph: usize| -> f64 {
            let mut acc = 0.0;
            for c in 0..k {
                acc += values[node_offset + c] * self.x[(graph, c)];
            }
            acc
        };
        match spec.variant() {
            ModelVariant::Undirected | ModelVariant::GeneralizedUndirected => {
                for i in 0..n {
                    for g in 0..l {
                        let v = dot(i * k, g);
                        a[(i, g)] = v;
                        b[(i, g)] = v;
                    }
                }
            }
            ModelVariant::Directed | ModelVariant::Generalized => {
                for i in 0..n {
                    for g in 0..l {
                        a[(i, g)] = dot(i * k, g);
                    }
                }
                // beta of the last node stays pinned at zero.
                for j in 0..n - 1 {
                    for g in 0..l {
                        b[(j, g)] = dot((n + j) * k, g);
                    }
                }
            }
        }
        Exposures { a, b }
    }

    /// Expected success totals under the probabilities implied by `exp`:
    /// `e_out[(i, l)] = sum_j N_{ij,l} p_{ij,l}` and its column analogue.
    pub fn expected_degrees(&self, exp: &Exposures) -> (Array2<f64>, Array2<f64>) {
        let (n, l) = (self.n, self.num_graphs);
        let mut e_out = Array2::<f64>::zeros((n, l));
        let mut e_in = Array2::<f64>::zeros((n, l));
        for g in 0..l {
            let trials = &self.trials[g];
            for i in 0..n {
            for j in 0..n {
                    if i == j || trials[(i, j)] == 0.0 {
                        continue;
                    }
                    let p = sigmoid(exp.a[(i, g)] + exp.b[(j, g)]);
                    let m = trials[(i, j)] * p;
                    e_out[(i, g)] += m;
                    e_in[(j, g)] += m;
                }
            }
        }
        (e_out, e_in)
    }
}

/// Success probability of pair `(i, j)` under covariate `x` (defaults to
/// the scalar 1 for the non-generalized variants).
pub fn edge_probability(
    spec: &ModelSpec,
    theta: &ParameterVector,
    i: usize,
    j: usize,
    x: Option<&[f64]>,
) -> Result<f64> {
    if theta.len() != spec.param_len() {
        return Err(Error::ShapeMismatch {
            message: format!(
                "parameter vector has length {}, model expects {}",
                theta.len(),
                spec.param_len()
            ),
        });
    }
    let n = spec.n();
    if i >= n || j >= n {
        return Err(Error::ShapeMismatch {
            message: format!("pair ({i}, {j}) out of range for n={n}"),
        });
    }
    if i == j {
        return Err(Error::SelfLoop { i });
    }
    let one = [1.0];
    let x = match x {
        Some(x) => x,
        None => &one[..],
    };
    if x.len() != spec.covariate_dim() {
        return Err(Error::ShapeMismatch {
            message: format!(
                "covariate vector has length {}, model expects {}",
                x.len(),
                spec.covariate_dim()
            ),
        });
    }
    let alpha = theta.alpha(spec, i);
    let beta = theta.beta(spec, j);
    let z: f64 = alpha
        .iter()
        .zip(x)
        .map(|(a, v)| a * v)
        .chain(beta.iter().zip(x).map(|(b, v)| b * v))
        .sum();
    Ok(sigmoid(z))
}

/// Log-likelihood kernel of `theta` for the observed panel: the exact
/// log-likelihood minus the parameter-free binomial coefficients. Directed
/// variants sum over ordered pairs, undirected variants over each unordered
/// pair once.
pub fn log_likelihood_kernel(
    spec: &ModelSpec,
    theta: &ParameterVector,
    panel: &PanelObservations,
) -> Result<f64> {
    let prep = PreparedPanel::new(spec, panel)?;
    kernel_prepared(spec, theta, &prep)
}

pub(crate) fn kernel_prepared(
    spec: &ModelSpec,
    theta: &ParameterVector,
    prep: &PreparedPanel,
) -> Result<f64> {
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
    let n = prep.n;
    let mut acc = 0.0;
    for g in 0..prep.num_graphs {
        for i in 0..n {
            if directed {
                acc += exp.a[(i, g)] * prep.d_out[(i, g)] + exp.b[(i, g)] * prep.d_in[(i, g)];
            } else {
                acc += exp.b[(i, g)] * prep.d_out[(i, g)];
            }
        }
        let trials = &prep.trials[g];
        for i in 0..n {
            let j_start = if directed { 0 } else { i + 1 };
            for j in j_start..n {
                if i == j || trials[(i, j)] == 0.0 {
                    continue;
                }
                acc -= trials[(i, j)] * log1p_exp(exp.a[(i, g)] + exp.b[(j, g)]);
            }
        }
    }
    Ok(acc)
}

/// Gradient of the log-likelihood kernel: observed success totals minus
/// their expectations, contracted against the covariates slot by slot. The
/// maximum-likelihood equations are exactly `moment_residual = 0`.
pub fn moment_residual(
    spec: &ModelSpec,
    theta: &ParameterVector,
    panel: &PanelObservations,
) -> Result<Array1<f64>> {
    let prep = PreparedPanel::new(spec, panel)?;
    residual_prepared(spec, theta, &prep)
}

pub(crate) fn residual_prepared(
    spec: &ModelSpec,
    theta: &ParameterVector,
    prep: &PreparedPanel,
) -> Result<Array1<f64>> {
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
    let (e_out, e_in) = prep.expected_degrees(&exp);
    Ok(residual_from_expected(spec, prep, &e_out, &e_in))
}

/// Assembles residual slots from expected-degree tables; shared with the
/// estimator, which recomputes expectations on every sweep.
pub(crate) fn residual_from_expected(
    spec: &ModelSpec,
    prep: &PreparedPanel,
    e_out: &Array2<f64>,
    e_in: &Array2<f64>,
) -> Array1<f64> {
    let (n, l, k) = (prep.n, prep.num_graphs, spec.covariate_dim());
    let mut r = Array1::<f64>::zeros(spec.param_len());
    let mut slot = 0usize;
    match spec.variant() {
        ModelVariant::Undirected | ModelVariant::GeneralizedUndirected => {
            for i in 0..n {
                for c in 0..k {
                    let mut acc = 0.0;
                    for g in 0..l {
                        acc += prep.x[(g, c)] * (prep.d_out[(i, g)] - e_out[(i, g)]);
                    }
                    r[slot] = acc;
                    slot += 1;
                }
            }
        }
        ModelVariant::Directed | ModelVariant::Generalized => {
            for i in 0..n {
                for c in 0..k {
                    let mut acc = 0.0;
                    for g in 0..l {
                        acc += prep.x[(g, c)] * (prep.d_out[(i, g)] - e_out[(i, g)]);
                    }
                    r[slot] = acc;
                    slot += 1;
                }
            }
            for j in 0..n - 1 {
                for c in 0..k {
                    let mut acc = 0.0;
                    for g in 0..l {
                        acc += prep.x[(g, c)] * (prep.d_in[(j, g)] - e_in[(j, g)]);
                    }
                    r[slot] = acc;
                    slot += 1;
                }
            }
        }
    }
    r
}
