//! The subcommand surface: argument shapes and one runner per subcommand,
//! each returning the bytes destined for standard output.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use ndarray::Array1;
use serde_json::{json, Value};

use betagraph_core::beta_models::{ModelSpec, ModelVariant, ParameterVector};
use betagraph_core::estimator::{check_existence, fit, FitOptions, FitResult};
use betagraph_core::experiments::{
    case_study, rmse_vs_crb, roc_directionality, wilks_histogram, CaseStudyConfig, RmseConfig,
    RocConfig, WilksConfig,
};
use betagraph_core::fisher_crb::{fim, FimResult};
use betagraph_core::graph_data::{
    ingest_contacts, read_contacts_file, BinningSpec, CovariateDesign, GraphObservations,
    PanelObservations,
};
use betagraph_core::hypothesis::{
    glrt_directionality, glrt_significance, BootstrapOptions, TestOptions, TestResult,
};
use betagraph_core::Error;

use crate::inputs;
use crate::render;
use crate::Failure;

type CliResult = std::result::Result<String, Failure>;

#[derive(Subcommand)]
pub enum Command {
    /// Fit a model to observed graphs by maximum likelihood.
    Fit(FitArgs),
    /// Evaluate the information matrix and the variance lower bounds.
    Crb(CrbArgs),
    /// Run a likelihood-ratio hypothesis test.
    #[command(subcommand)]
    Test(TestCommand),
    /// Run a simulation study and write its plot-ready tables.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Bin a timestamped contact log into per-window graphs.
    Ingest(IngestArgs),
    /// Full contact analysis: per-category tests plus the period regression.
    CaseStudy(CaseStudyArgs),
}

#[derive(Args)]
pub struct FitFlags {
    /// Convergence tolerance on the parameter step norm.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget before the fit gives up.
    #[arg(long)]
    max_iter: Option<usize>,
}

impl FitFlags {
    fn options(&self) -> FitOptions {
        let mut opts = FitOptions::default();
        if let Some(tol) = self.tol {
            opts.tol = tol;
        }
        if let Some(max_iter) = self.max_iter {
            opts.max_iter = max_iter;
        }
        opts
    }
}

#[derive(Args)]
pub struct FitArgs {
    /// Model variant: undirected, directed, generalized,
    /// generalized-undirected.
    #[arg(long, value_parser = inputs::parse_model)]
    model: ModelVariant,
    /// Graph observation file (sparse JSON or dense CSV); repeat the flag
    /// for a multi-graph panel.
    #[arg(long = "data", required = true)]
    data: Vec<PathBuf>,
    /// Covariate CSV with one row per graph, in --data order.
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[command(flatten)]
    fit: FitFlags,
}

#[derive(Args)]
#[group(required = true, multiple = true)]
pub struct CrbSource {
    /// JSON array giving the evaluation point; defaults to the fitted
    /// estimate when --data is present.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Graph file(s) supplying trial counts; repeat for panels.
    #[arg(long = "data")]
    data: Vec<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum MatrixChoice {
    /// The information matrix itself.
    Fim,
    /// Its inverse, whose diagonal is the variance bound.
    Inverse,
    /// The labeled bound diagonal only.
    Crb,
}

#[derive(Args)]
pub struct CrbArgs {
    /// Model variant: undirected, directed, generalized,
    /// generalized-undirected.
    #[arg(long, value_parser = inputs::parse_model)]
    model: ModelVariant,
    #[command(flatten)]
    source: CrbSource,
    /// Covariate CSV; its row count sets the panel size when no data files
    /// are given.
    #[arg(long)]
    covariates: Option<PathBuf>,
    /// Uniform trials per pair when no data files are given.
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Output form.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Which matrix --format csv prints.
    #[arg(long, value_enum, default_value_t = MatrixChoice::Inverse)]
    matrix: MatrixChoice,
    #[command(flatten)]
    fit: FitFlags,
}

#[derive(Subcommand)]
pub enum TestCommand {
    /// Does a covariate matter? Null: its coefficients vanish at every node.
    Significance(SignificanceArgs),
    /// Do parameters differ by direction? Null: tied out- and in-values.
    Directionality(DirectionalityArgs),
}

#[derive(Args)]
pub struct BootFlags {
    /// Parametric bootstrap replicates; omit to report the asymptotic
    /// p-value only.
    #[arg(long)]
    bootstrap: Option<usize>,
    /// RNG seed for the bootstrap replicates.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl BootFlags {
    fn options(&self) -> Option<BootstrapOptions> {
        self.bootstrap.map(|num_sims| BootstrapOptions { num_sims, seed: self.seed })
    }
}

#[derive(Args)]
pub struct SignificanceArgs {
    /// Covariate column under test.
    #[arg(long)]
    covariate: usize,
    /// Graph observation file; repeat the flag for the full panel.
    #[arg(long = "data", required = true)]
    data: Vec<PathBuf>,
    /// Covariate CSV with one row per graph, in --data order.
    #[arg(long)]
    covariates: Option<PathBuf>,
    #[command(flatten)]
    boot: BootFlags,
    #[command(flatten)]
    fit: FitFlags,
}

#[derive(Args)]
pub struct DirectionalityArgs {
    /// Directed graph observation file.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    boot: BootFlags,
    #[command(flatten)]
    fit: FitFlags,
}

#[derive(Subcommand)]
pub enum SimulateCommand {
    /// Estimator error against its variance bound over a probability grid.
    Rmse(SimulateArgs),
    /// Detection curves for the directionality test across signal strengths.
    Roc(SimulateArgs),
    /// Null distribution of the test statistic against its chi-squared law.
    Wilks(SimulateArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Study configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration file.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving the output tables (created if absent).
    #[arg(long)]
    out: PathBuf,
    /// Replicate worker threads; 0 uses one per available core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[command(flatten)]
    fit: FitFlags,
}

#[derive(Args)]
pub struct IngestArgs {
    /// Contact log: one record per line, time then two node ids.
    #[arg(long)]
    contacts: PathBuf,
    /// JSON array of [start, end) windows or {start, end, graph} objects.
    #[arg(long)]
    windows: PathBuf,
    /// Node ids to keep, one per line; omit to keep every observed node.
    #[arg(long)]
    whitelist: Option<PathBuf>,
    /// Bernoulli trials each window contributes per pair.
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Output file for the binned graphs.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct CaseStudyArgs {
    /// Contact log: one record per line, time then two node ids.
    #[arg(long)]
    contacts: PathBuf,
    /// Analysis configuration JSON: the day-by-period window grid, node
    /// whitelist, trials per window, bootstrap size, and seed.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration file.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving the report (created if absent).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    fit: FitFlags,
}

pub fn run(command: Command) -> CliResult {
    match command {
        Command::Fit(args) => run_fit(&args),
        Command::Crb(args) => run_crb(&args),
        Command::Test(TestCommand::Significance(args)) => run_significance(&args),
        Command::Test(TestCommand::Directionality(args)) => run_directionality(&args),
        Command::Simulate(command) => run_simulate(&command),
        Command::Ingest(args) => run_ingest(&args),
        Command::CaseStudy(args) => run_case_study(&args),
    }
}

fn run_fit(args: &FitArgs) -> CliResult {
    let panel = inputs::load_panel(&args.data, args.covariates.as_ref())?;
    let spec = inputs::resolve_spec(args.model, &panel)?;
    check_existence(&spec, &panel)?;
    let result = fit(&spec, &panel, &args.fit.options())?;
    Ok(render::to_json_text(&fit_json(&spec, &result)))
}

fn run_crb(args: &CrbArgs) -> CliResult {
    let opts = args.fit.options();
    let (spec, panel, theta) = if args.source.data.is_empty() {
        let params_path = args.source.params.as_ref().expect("the source group needs one flag");
        let values = inputs::read_params(params_path)?;
        let design = match &args.covariates {
            Some(path) => inputs::read_design(path)?,
            None => CovariateDesign::constant_one(1),
        };
        let spec = inputs::spec_for_params(args.model, values.len(), design.dim())?;
        let graphs = (0..design.num_graphs())
            .map(|_| {
                GraphObservations::empty_with_uniform_trials(
                    spec.n(),
                    spec.variant().is_directed(),
                    args.trials,
                )
            })
            .collect::<betagraph_core::Result<Vec<_>>>()?;
        let panel = PanelObservations::new(graphs, design)?;
        let theta = ParameterVector::new(&spec, Array1::from(values))?;
        (spec, panel, theta)
    } else {
        let panel = inputs::load_panel(&args.source.data, args.covariates.as_ref())?;
        let spec = inputs::resolve_spec(args.model, &panel)?;
        let theta = match &args.source.params {
            Some(path) => {
                ParameterVector::new(&spec, Array1::from(inputs::read_params(path)?))?
            }
            None => {
                check_existence(&spec, &panel)?;
                fit(&spec, &panel, &opts)?.theta_hat
            }
        };
        (spec, panel, theta)
    };
    let result = fim(&spec, &panel, &theta)?;
    Ok(match args.format {
        OutputFormat::Json => render::to_json_text(&fim_json(&spec, &theta, &result)),
        OutputFormat::Csv => fim_csv(args.matrix, &result),
    })
}

fn run_significance(args: &SignificanceArgs) -> CliResult {
    let panel = inputs::load_panel(&args.data, args.covariates.as_ref())?;
    let opts = TestOptions { fit: args.fit.options(), bootstrap: args.boot.options() };
    let result = glrt_significance(&panel, args.covariate, &opts)?;
    let mut value = test_json("significance", &result);
    value
        .as_object_mut()
        .expect("test reports are objects")
        .insert("covariate".into(), json!(args.covariate));
    Ok(render::to_json_text(&value))
}

fn run_directionality(args: &DirectionalityArgs) -> CliResult {
    let graph = inputs::read_graph(&args.data)?;
    let opts = TestOptions { fit: args.fit.options(), bootstrap: args.boot.options() };
    let result = glrt_directionality(&graph, &opts)?;
    Ok(render::to_json_text(&test_json("directionality", &result)))
}

fn run_simulate(command: &SimulateCommand) -> CliResult {
    let (kind, args) = match command {
        SimulateCommand::Rmse(args) => ("rmse", args),
        SimulateCommand::Roc(args) => ("roc", args),
        SimulateCommand::Wilks(args) => ("wilks", args),
    };
    if args.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build_global()
            .map_err(|e| Failure::Usage(format!("could not size the worker pool: {e}")))?;
    }
    let config_text = inputs::read_text(&args.config)?;
    fs::create_dir_all(&args.out).map_err(Error::from)?;
    let opts = args.fit.options();

    let summary = match kind {
        "rmse" => {
            let mut config: RmseConfig =
                serde_json::from_str(&config_text).map_err(Error::from)?;
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            let points = rmse_vs_crb(&config, &opts)?;
            let rows: Vec<Vec<f64>> =
                points.iter().map(|p| vec![p.probability, p.rmse, p.crb]).collect();
            let table = args.out.join("rmse.csv");
            inputs::write_text(&table, &render::csv_table("p,rmse,crb", &rows))?;
            json!({
                "study": "rmse",
                "seed": config.seed,
                "out": table.display().to_string(),
                "points": points
                    .iter()
                    .map(|p| {
                        json!({
                            "p": render::jnum(p.probability),
                            "rmse": render::jnum(p.rmse),
                            "crb": render::jnum(p.crb),
                            "used": p.used,
                            "discarded": p.discarded,
                        })
                    })
                    .collect::<Vec<_>>(),
            })
        }
        "roc" => {
            let mut config: RocConfig =
                serde_json::from_str(&config_text).map_err(Error::from)?;
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            let curves = roc_directionality(&config, &opts)?;
            let mut reports = Vec::with_capacity(curves.len());
            for curve in &curves {
                let rows: Vec<Vec<f64>> = curve
                    .points
                    .iter()
                    .map(|p| vec![p.threshold, p.false_positive_rate, p.true_positive_rate])
                    .collect();
                let table = args.out.join(format!("roc_{}.csv", curve.rho));
                inputs::write_text(&table, &render::csv_table("threshold,fpr,tpr", &rows))?;
                reports.push(json!({
                    "rho": render::jnum(curve.rho),
                    "auc": render::jnum(curve.auc),
                    "discarded_alternative": curve.discarded_alternative,
                    "discarded_null": curve.discarded_null,
                    "out": table.display().to_string(),
                }));
            }
            json!({ "study": "roc", "seed": config.seed, "curves": reports })
        }
        _ => {
            let mut config: WilksConfig =
                serde_json::from_str(&config_text).map_err(Error::from)?;
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            let result = wilks_histogram(&config, &opts)?;
            let rows: Vec<Vec<f64>> = result
                .bins
                .iter()
                .map(|b| vec![b.left, b.right, b.mass, b.chi2_pdf])
                .collect();
            let table = args.out.join("wilks.csv");
            inputs::write_text(
                &table,
                &render::csv_table("bin_left,bin_right,mass,chi2_pdf_at_center", &rows),
            )?;
            json!({
                "study": "wilks",
                "seed": config.seed,
                "df": result.df,
                "ks_statistic": render::jnum(result.ks_statistic),
                "mean_lambda": render::jnum(result.mean_lambda),
                "used": result.used,
                "discarded": result.discarded,
                "out": table.display().to_string(),
            })
        }
    };
    Ok(render::to_json_text(&summary))
}

fn run_ingest(args: &IngestArgs) -> CliResult {
    let records = read_contacts_file(&args.contacts)?;
    let windows = inputs::read_windows(&args.windows)?;
    let whitelist = match &args.whitelist {
        Some(path) => Some(inputs::read_whitelist(path)?),
        None => None,
    };
    let binning = BinningSpec::new(windows, whitelist)?;
    let ingested = ingest_contacts(&records, &binning, args.trials)?;

    let payload = json!({
        "node_ids": ingested.node_ids,
        "used_records": ingested.used_records,
        "dropped_records": ingested.dropped_records,
        "graphs": ingested.graphs.iter().map(graph_json).collect::<Vec<_>>(),
    });
    inputs::write_text(&args.out, &render::to_json_text(&payload))?;

    Ok(render::to_json_text(&json!({
        "graphs": ingested.graphs.len(),
        "nodes": ingested.node_ids.len(),
        "used_records": ingested.used_records,
        "dropped_records": ingested.dropped_records,
        "out": args.out.display().to_string(),
    })))
}

fn run_case_study(args: &CaseStudyArgs) -> CliResult {
    let records = read_contacts_file(&args.contacts)?;
    let mut config: CaseStudyConfig =
        serde_json::from_str(&inputs::read_text(&args.config)?).map_err(Error::from)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let report = case_study(&records, &config, &args.fit.options())?;
    fs::create_dir_all(&args.out).map_err(Error::from)?;
    let value = serde_json::to_value(&report).map_err(Error::from)?;
    let text = render::to_json_text(&value);
    inputs::write_text(&args.out.join("case_study.json"), &text)?;
    Ok(text)
}

fn fit_json(spec: &ModelSpec, result: &FitResult) -> Value {
    json!({
        "model": inputs::model_name(spec.variant()),
        "n": spec.n(),
        "covariate_dim": spec.covariate_dim(),
        "labels": spec.slot_labels(),
        "theta_hat": render::jvec(result.theta_hat.values().iter().copied()),
        "iterations": result.iterations,
        "converged": result.converged,
        "final_step_norm": render::jnum(result.final_step_norm),
        "moment_residual_norm": render::jnum(result.moment_residual_norm),
        "log_likelihood": render::jnum(result.log_likelihood),
    })
}

/// A fit nested inside a test report; the null fit lives in its own
/// parameterization, so no labels are attached.
fn fit_brief_json(result: &FitResult) -> Value {
    json!({
        "theta_hat": render::jvec(result.theta_hat.values().iter().copied()),
        "iterations": result.iterations,
        "converged": result.converged,
        "final_step_norm": render::jnum(result.final_step_norm),
        "moment_residual_norm": render::jnum(result.moment_residual_norm),
        "log_likelihood": render::jnum(result.log_likelihood),
    })
}

fn test_json(test: &str, result: &TestResult) -> Value {
    json!({
        "test": test,
        "lambda_log": render::jnum(result.lambda_log),
        "df": result.df,
        "p_wilks": render::jnum(result.p_wilks),
        "p_bootstrap": result.p_bootstrap.map_or(Value::Null, render::jnum),
        "num_sims": result.num_sims,
        "discarded": result.discarded,
        "fit_null": fit_brief_json(&result.fit_null),
        "fit_alt": fit_brief_json(&result.fit_alt),
    })
}

fn fim_json(spec: &ModelSpec, theta: &ParameterVector, result: &FimResult) -> Value {
    json!({
        "model": inputs::model_name(spec.variant()),
        "n": spec.n(),
        "covariate_dim": spec.covariate_dim(),
        "labels": result.labels,
        "theta": render::jvec(theta.values().iter().copied()),
        "fim": render::jmatrix(&result.fim),
        "inverse": render::jmatrix(&result.inverse),
        "crb_diag": render::jvec(result.crb_diag.iter().copied()),
    })
}

fn fim_csv(which: MatrixChoice, result: &FimResult) -> String {
    match which {
        MatrixChoice::Fim => render::matrix_csv(&result.fim),
        MatrixChoice::Inverse => render::matrix_csv(&result.inverse),
        MatrixChoice::Crb => {
            let mut out = String::from("label,crb\n");
            for (label, value) in result.labels.iter().zip(result.crb_diag.iter()) {
                out.push_str(label);
                out.push(',');
                out.push_str(&render::num(*value));
                out.push('\n');
            }
            out
        }
    }
}

/// The sparse edge-count form, embeddable as one element of a multi-graph
/// file.
fn graph_json(graph: &GraphObservations) -> Value {
    let n = graph.n();
    let mut counts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || (!graph.directed() && j < i) {
                continue;
            }
            let (y, trials) = (graph.y()[(i, j)], graph.trials()[(i, j)]);
            if y == 0 && trials == 0 {
                continue;
            }
            counts.push(json!({ "i": i, "j": j, "y": y, "trials": trials }));
        }
    }
    json!({ "n": n, "directed": graph.directed(), "counts": counts })
}
