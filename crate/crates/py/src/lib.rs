//! Python bindings: graphs, panels, fitting, variance bounds, and
//! likelihood-ratio tests as an importable extension module.
//!
//! Data defects raise `ValueError`; numerical failures (nonexistent
//! estimates, non-convergence, singular information) raise `RuntimeError`.

use ndarray::{Array1, Array2};
use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use betagraph_core::beta_models::{ModelSpec, ModelVariant, ParameterVector};
use betagraph_core::estimator::{check_existence, fit as fit_model, FitOptions, FitResult};
use betagraph_core::experiments::{sample_graph, sample_panel};
use betagraph_core::fisher_crb;
use betagraph_core::graph_data::{
    parse_edge_counts_json, write_edge_counts_json, CovariateDesign, GraphObservations,
    PanelObservations,
};
use betagraph_core::hypothesis::{
    self, glrt_directionality, glrt_significance, BootstrapOptions, TestOptions, TestResult,
};
use betagraph_core::Error;

fn to_py_err(err: Error) -> PyErr {
    if err.is_data_error() {
        PyValueError::new_err(err.to_string())
    } else {
        PyRuntimeError::new_err(err.to_string())
    }
}

fn parse_model(name: &str) -> PyResult<ModelVariant> {
    match name {
        "undirected" => Ok(ModelVariant::Undirected),
        "directed" => Ok(ModelVariant::Directed),
        "generalized" => Ok(ModelVariant::Generalized),
        "generalized-undirected" => Ok(ModelVariant::GeneralizedUndirected),
        other => Err(PyValueError::new_err(format!(
            "unknown model `{other}` (expected undirected, directed, generalized, or \
             generalized-undirected)"
        ))),
    }
}

fn counts_matrix(rows: Vec<Vec<u64>>, what: &str) -> PyResult<Array2<u64>> {
    let n = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != width) {
        return Err(PyValueError::new_err(format!("{what} rows must all have equal length")));
    }
    let mut out = Array2::<u64>::zeros((n, width));
    for (i, row) in rows.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            out[(i, j)] = value;
        }
    }
    Ok(out)
}

fn float_matrix(rows: Vec<Vec<f64>>, what: &str) -> PyResult<Array2<f64>> {
    let n = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != width) {
        return Err(PyValueError::new_err(format!("{what} rows must all have equal length")));
    }
    let mut out = Array2::<f64>::zeros((n, width));
    for (i, row) in rows.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            out[(i, j)] = value;
        }
    }
    Ok(out)
}

fn matrix_rows_u64(m: &Array2<u64>) -> Vec<Vec<u64>> {
    m.rows().into_iter().map(|row| row.to_vec()).collect()
}

fn matrix_rows_f64(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|row| row.to_vec()).collect()
}

/// Binomial edge counts over one node set: `y[i][j]` successes out of
/// `trials[i][j]` observations of the ordered pair `(i, j)`. Undirected
/// graphs carry symmetric matrices; diagonals must be zero.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Graph {
    inner: GraphObservations,
}

#[pymethods]
impl Graph {
    #[new]
    #[pyo3(signature = (y, trials, directed = false))]
    fn new(y: Vec<Vec<u64>>, trials: Vec<Vec<u64>>, directed: bool) -> PyResult<Self> {
        let y = counts_matrix(y, "y")?;
        let trials = counts_matrix(trials, "trials")?;
        Ok(Self { inner: GraphObservations::new(directed, y, trials).map_err(to_py_err)? })
    }

    /// Parses the sparse form
    /// `{"n", "directed", "counts": [{"i", "j", "y", "trials"}, ...]}`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_edge_counts_json(text).map_err(to_py_err)? })
    }

    /// Serializes to the sparse form accepted by `from_json`.
    fn to_json(&self) -> String {
        write_edge_counts_json(&self.inner)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn directed(&self) -> bool {
        self.inner.directed()
    }

    #[getter]
    fn y(&self) -> Vec<Vec<u64>> {
        matrix_rows_u64(self.inner.y())
    }

    #[getter]
    fn trials(&self) -> Vec<Vec<u64>> {
        matrix_rows_u64(self.inner.trials())
    }

    /// Per-node degree statistics as the tuple
    /// `(out_successes, in_successes, out_trials, in_trials)`; the out and
    /// in sides coincide for undirected graphs.
    fn degrees(&self) -> (Vec<u64>, Vec<u64>, Vec<u64>, Vec<u64>) {
        let d = self.inner.degrees();
        (
            d.out_successes.to_vec(),
            d.in_successes.to_vec(),
            d.out_trials.to_vec(),
            d.in_trials.to_vec(),
        )
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(n={}, directed={}, successes={}, trials={})",
            self.inner.n(),
            self.inner.directed(),
            self.inner.total_successes(),
            self.inner.total_trials()
        )
    }
}

/// Several graphs over the same node set, each carrying one covariate row.
/// Without covariates every graph shares the constant regressor.
#[pyclass(frozen)]
struct Panel {
    inner: PanelObservations,
}

#[pymethods]
impl Panel {
    #[new]
    #[pyo3(signature = (graphs, covariates = None))]
    fn new(graphs: Vec<Graph>, covariates: Option<Vec<Vec<f64>>>) -> PyResult<Self> {
        let graphs: Vec<GraphObservations> = graphs.into_iter().map(|g| g.inner).collect();
        let design = match covariates {
            Some(rows) => {
                CovariateDesign::new(float_matrix(rows, "covariates")?).map_err(to_py_err)?
            }
            None => CovariateDesign::constant_one(graphs.len()),
        };
        Ok(Self { inner: PanelObservations::new(graphs, design).map_err(to_py_err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn directed(&self) -> bool {
        self.inner.directed()
    }

    #[getter]
    fn num_graphs(&self) -> usize {
        self.inner.num_graphs()
    }

    #[getter]
    fn covariates(&self) -> Vec<Vec<f64>> {
        matrix_rows_f64(self.inner.design().matrix())
    }

    fn graph(&self, index: usize) -> PyResult<Graph> {
        if index >= self.inner.num_graphs() {
            return Err(PyIndexError::new_err(format!(
                "graph index {index} out of range for a panel of {}",
                self.inner.num_graphs()
            )));
        }
        Ok(Graph { inner: self.inner.graph(index).clone() })
    }

    fn __repr__(&self) -> String {
        format!(
            "Panel(n={}, graphs={}, covariate_dim={})",
            self.inner.n(),
            self.inner.num_graphs(),
            self.inner.design().dim()
        )
    }
}

/// A converged maximum-likelihood fit.
#[pyclass(frozen, get_all)]
struct FitOutcome {
    theta_hat: Vec<f64>,
    /// Slot names in layout order; empty for the constrained fit inside a
    /// test, which lives in its own parameterization.
    labels: Vec<String>,
    iterations: usize,
    converged: bool,
    final_step_norm: f64,
    moment_residual_norm: f64,
    log_likelihood: f64,
}

#[pymethods]
impl FitOutcome {
    fn __repr__(&self) -> String {
        format!(
            "FitOutcome(params={}, iterations={}, log_likelihood={:.6})",
            self.theta_hat.len(),
            self.iterations,
            self.log_likelihood
        )
    }
}

/// The information matrix at an evaluation point, inverted: `crb_diag[s]`
/// lower-bounds the variance of any unbiased estimator of slot `s`.
#[pyclass(frozen, get_all)]
struct CrbOutcome {
    labels: Vec<String>,
    fim: Vec<Vec<f64>>,
    inverse: Vec<Vec<f64>>,
    crb_diag: Vec<f64>,
}

#[pymethods]
impl CrbOutcome {
    fn __repr__(&self) -> String {
        format!("CrbOutcome(params={})", self.labels.len())
    }
}

/// A likelihood-ratio test: the statistic, its asymptotic chi-squared
/// p-value, the optional parametric-bootstrap p-value, and both fits.
#[pyclass(frozen, get_all)]
struct TestOutcome {
    lambda_log: f64,
    df: usize,
    p_wilks: f64,
    p_bootstrap: Option<f64>,
    num_sims: usize,
    discarded: usize,
    fit_null: Py<FitOutcome>,
    fit_alt: Py<FitOutcome>,
}

#[pymethods]
impl TestOutcome {
    fn __repr__(&self) -> String {
        format!(
            "TestOutcome(lambda_log={:.6}, df={}, p_wilks={:.6})",
            self.lambda_log, self.df, self.p_wilks
        )
    }
}

fn fit_outcome(spec: Option<&ModelSpec>, result: &FitResult) -> FitOutcome {
    FitOutcome {
        theta_hat: result.theta_hat.values().to_vec(),
        labels: spec.map(ModelSpec::slot_labels).unwrap_or_default(),
        iterations: result.iterations,
        converged: result.converged,
        final_step_norm: result.final_step_norm,
        moment_residual_norm: result.moment_residual_norm,
        log_likelihood: result.log_likelihood,
    }
}

fn test_outcome(py: Python<'_>, result: &TestResult) -> PyResult<TestOutcome> {
    Ok(TestOutcome {
        lambda_log: result.lambda_log,
        df: result.df,
        p_wilks: result.p_wilks,
        p_bootstrap: result.p_bootstrap,
        num_sims: result.num_sims,
        discarded: result.discarded,
        fit_null: Py::new(py, fit_outcome(None, &result.fit_null))?,
        fit_alt: Py::new(py, fit_outcome(None, &result.fit_alt))?,
    })
}

/// Views the data argument as a panel; a Graph becomes a one-graph panel.
fn as_panel(data: &Bound<'_, PyAny>) -> PyResult<PanelObservations> {
    if let Ok(graph) = data.cast::<Graph>() {
        return Ok(PanelObservations::single(graph.get().inner.clone()));
    }
    if let Ok(panel) = data.cast::<Panel>() {
        return Ok(panel.get().inner.clone());
    }
    Err(PyValueError::new_err("data must be a Graph or a Panel"))
}

fn resolve_spec(variant: ModelVariant, panel: &PanelObservations) -> PyResult<ModelSpec> {
    if !variant.is_generalized() && (panel.num_graphs() != 1 || panel.design().dim() != 1) {
        return Err(PyValueError::new_err(format!(
            "the {variant} model takes exactly one graph and no covariates"
        )));
    }
    let spec = ModelSpec::new(variant, panel.n(), panel.design().dim()).map_err(to_py_err)?;
    spec.check_panel(panel).map_err(to_py_err)?;
    Ok(spec)
}

fn fit_options(tol: f64, max_iter: usize) -> FitOptions {
    FitOptions { tol, max_iter, ..FitOptions::default() }
}

/// Fits a model by maximum likelihood.
///
/// `model` is one of "undirected", "directed", "generalized", or
/// "generalized-undirected"; `data` is a Graph or a Panel.
#[pyfunction]
#[pyo3(signature = (model, data, tol = 1e-4, max_iter = 10_000))]
fn fit(model: &str, data: &Bound<'_, PyAny>, tol: f64, max_iter: usize) -> PyResult<FitOutcome> {
    let panel = as_panel(data)?;
    let spec = resolve_spec(parse_model(model)?, &panel)?;
    check_existence(&spec, &panel).map_err(to_py_err)?;
    let result = fit_model(&spec, &panel, &fit_options(tol, max_iter)).map_err(to_py_err)?;
    Ok(fit_outcome(Some(&spec), &result))
}

/// Evaluates the information matrix and variance bounds at `theta`, or at
/// the fitted estimate when `theta` is omitted.
#[pyfunction]
#[pyo3(signature = (model, data, theta = None, tol = 1e-4, max_iter = 10_000))]
fn crb(
    model: &str,
    data: &Bound<'_, PyAny>,
    theta: Option<Vec<f64>>,
    tol: f64,
    max_iter: usize,
) -> PyResult<CrbOutcome> {
    let panel = as_panel(data)?;
    let spec = resolve_spec(parse_model(model)?, &panel)?;
    let point = match theta {
        Some(values) => {
            ParameterVector::new(&spec, Array1::from(values)).map_err(to_py_err)?
        }
        None => {
            check_existence(&spec, &panel).map_err(to_py_err)?;
            fit_model(&spec, &panel, &fit_options(tol, max_iter)).map_err(to_py_err)?.theta_hat
        }
    };
    let result = fisher_crb::fim(&spec, &panel, &point).map_err(to_py_err)?;
    Ok(CrbOutcome {
        labels: result.labels,
        fim: matrix_rows_f64(&result.fim),
        inverse: matrix_rows_f64(&result.inverse),
        crb_diag: result.crb_diag.to_vec(),
    })
}

/// Closed-form per-node variance bound for the homogeneous undirected
/// model, where every pair shares probability `p` over `trials` draws.
#[pyfunction]
fn scalar_crb_undirected(n: usize, trials: u64, p: f64) -> PyResult<f64> {
    fisher_crb::scalar_crb_undirected(n, trials, p).map_err(to_py_err)
}

/// Closed-form bounds for the homogeneous directed model, returned as
/// `(alpha, alpha_last, beta)`: any out-parameter but the last node's, the
/// last node's out-parameter, and any free in-parameter.
#[pyfunction]
fn scalar_crb_directed(n: usize, trials: u64, p: f64) -> PyResult<(f64, f64, f64)> {
    let bounds = fisher_crb::scalar_crb_directed(n, trials, p).map_err(to_py_err)?;
    Ok((bounds.alpha, bounds.alpha_last, bounds.beta))
}

fn test_options(
    bootstrap: Option<usize>,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> TestOptions {
    TestOptions {
        fit: fit_options(tol, max_iter),
        bootstrap: bootstrap.map(|num_sims| BootstrapOptions { num_sims, seed }),
    }
}

/// Does covariate `covariate` matter? Null hypothesis: its coefficients
/// vanish at every node. Pass `bootstrap` to add a parametric-bootstrap
/// p-value to the asymptotic one.
#[pyfunction]
#[pyo3(signature = (panel, covariate, bootstrap = None, seed = 0, tol = 1e-4, max_iter = 10_000))]
fn test_significance(
    py: Python<'_>,
    panel: PyRef<'_, Panel>,
    covariate: usize,
    bootstrap: Option<usize>,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> PyResult<TestOutcome> {
    let opts = test_options(bootstrap, seed, tol, max_iter);
    let result = glrt_significance(&panel.inner, covariate, &opts).map_err(to_py_err)?;
    test_outcome(py, &result)
}

/// Do the parameters differ by direction? Null hypothesis: each node's out-
/// and in-values are tied.
#[pyfunction]
#[pyo3(signature = (graph, bootstrap = None, seed = 0, tol = 1e-4, max_iter = 10_000))]
fn test_directionality(
    py: Python<'_>,
    graph: PyRef<'_, Graph>,
    bootstrap: Option<usize>,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> PyResult<TestOutcome> {
    let opts = test_options(bootstrap, seed, tol, max_iter);
    let result = glrt_directionality(&graph.inner, &opts).map_err(to_py_err)?;
    test_outcome(py, &result)
}

/// Draws data from the model deterministically in `seed`. Returns a Graph,
/// or a Panel when `covariates` (one row per graph) is given.
#[pyfunction]
#[pyo3(signature = (model, theta, n, trials, seed = 0, covariates = None))]
fn sample(
    py: Python<'_>,
    model: &str,
    theta: Vec<f64>,
    n: usize,
    trials: u64,
    seed: u64,
    covariates: Option<Vec<Vec<f64>>>,
) -> PyResult<Py<PyAny>> {
    let variant = parse_model(model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match covariates {
        None => {
            let spec = ModelSpec::new(variant, n, 1).map_err(to_py_err)?;
            let theta = ParameterVector::new(&spec, Array1::from(theta)).map_err(to_py_err)?;
            let graph = sample_graph(&spec, &theta, trials, &mut rng).map_err(to_py_err)?;
            Ok(Graph { inner: graph }.into_pyobject(py)?.into_any().unbind())
        }
        Some(rows) => {
            let design =
                CovariateDesign::new(float_matrix(rows, "covariates")?).map_err(to_py_err)?;
            let spec = ModelSpec::new(variant, n, design.dim()).map_err(to_py_err)?;
            let theta = ParameterVector::new(&spec, Array1::from(theta)).map_err(to_py_err)?;
            let panel =
                sample_panel(&spec, &theta, &design, trials, &mut rng).map_err(to_py_err)?;
            Ok(Panel { inner: panel }.into_pyobject(py)?.into_any().unbind())
        }
    }
}

/// Survival function of the chi-squared law with `df` degrees of freedom.
#[pyfunction]
fn chi_square_sf(x: f64, df: usize) -> f64 {
    hypothesis::chi_square_sf(x, df)
}

/// Density of the chi-squared law with `df` degrees of freedom.
#[pyfunction]
fn chi_square_pdf(x: f64, df: usize) -> f64 {
    hypothesis::chi_square_pdf(x, df)
}

#[pymodule]
fn betagraph(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<Panel>()?;
    m.add_class::<FitOutcome>()?;
    m.add_class::<CrbOutcome>()?;
    m.add_class::<TestOutcome>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(crb, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_crb_undirected, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_crb_directed, m)?)?;
    m.add_function(wrap_pyfunction!(test_significance, m)?)?;
    m.add_function(wrap_pyfunction!(test_directionality, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(chi_square_sf, m)?)?;
    m.add_function(wrap_pyfunction!(chi_square_pdf, m)?)?;
    Ok(())
}
