//! Observed graph data: per-pair binomial edge counts, covariate designs for
//! multigraph panels, and ingestion of timestamped contact records.

mod ingest;
mod io;

pub use ingest::{ingest_contacts, BinningSpec, ContactRecord, Ingested, TimeWindow};
pub use io::{
    parse_contacts, parse_covariates_csv, parse_dense_csv, parse_edge_counts_json,
    read_contacts_file, read_covariates_file, read_dense_csv_file, read_edge_counts_file,
    write_dense_csv, write_edge_counts_json,
};

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Edge counts observed on `n` labeled nodes.
///
/// Entry `(i, j)` records `y[(i, j)]` successes out of `trials[(i, j)]`
/// independent Bernoulli trials for that ordered pair. Diagonals are
/// structurally zero. Undirected data keeps both matrices symmetric; the
/// upper triangle is authoritative and writers emit only `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphObservations {
    n: usize,
    directed: bool,
    y: Array2<u64>,
    trials: Array2<u64>,
}

/// Per-node success and trial totals.
///
/// For directed data, `out_*` follows rows (pairs `(i, ·)`) and `in_*`
/// follows columns (pairs `(·, i)`); for undirected data the two sides
/// coincide.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDegrees {
    pub out_successes: Array1<u64>,
    pub in_successes: Array1<u64>,
    pub out_trials: Array1<u64>,
    pub in_trials: Array1<u64>,
}

impl GraphObservations {
    /// Validates and wraps count matrices.
    pub fn new(directed: bool, y: Array2<u64>, trials: Array2<u64>) -> Result<Self> {
        let n = y.nrows();
        if y.ncols() != n || trials.dim() != (n, n) {
            return Err(Error::ShapeMismatch {
                message: format!(
                    "count matrices must be square and equal-sized, got y {:?} and trials {:?}",
                    y.dim(),
                    trials.dim()
                ),
            });
        }
        if n < 2 {
            return Err(Error::ShapeMismatch {
                message: format!("at least two nodes are required, got n={n}"),
            });
        }
        for i in 0..n {
            if y[(i, i)] != 0 || trials[(i, i)] != 0 {
                return Err(Error::DiagonalNonzero { i });
            }
        }
        for i in 0..n {
            for j in 0..n {
                if y[(i, j)] > trials[(i, j)] {
                    return Err(Error::CountExceedsTrials {
                        i,
                        j,
                        y: y[(i, j)],
                        trials: trials[(i, j)],
                    });
                }
            }
        }
        if !directed {
            for i in 0..n {
                for j in (i + 1)..n {
                    if y[(i, j)] != y[(j, i)] {
                        return Err(Error::AsymmetricUndirected { i, j, field: "y" });
                    }
                    if trials[(i, j)] != trials[(j, i)] {
                        return Err(Error::AsymmetricUndirected { i, j, field: "trials" });
                    }
                }
            }
        }
        Ok(Self { n, directed, y, trials })
    }

    /// Builds a graph with uniform `trials` on every off-diagonal pair and no
    /// successes; useful as a scaffold before filling in counts.
    pub fn empty_with_uniform_trials(n: usize, directed: bool, trials: u64) -> Result<Self> {
        let mut t = Array2::<u64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    t[(i, j)] = trials;
                }
            }
        }
        Self::new(directed, Array2::zeros((n, n)), t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn y(&self) -> &Array2<u64> {
        &self.y
    }

    pub fn trials(&self) -> &Array2<u64> {
        &self.trials
    }

    /// Per-node totals of successes and trials along both orientations.
    pub fn degrees(&self) -> NodeDegrees {
        let n = self.n;
        let mut out_successes = Array1::<u64>::zeros(n);
        let mut in_successes = Array1::<u64>::zeros(n);
        let mut out_trials = Array1::<u64>::zeros(n);
        let mut in_trials = Array1::<u64>::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out_successes[i] += self.y[(i, j)];
                in_successes[j] += self.y[(i, j)];
                out_trials[i] += self.trials[(i, j)];
                in_trials[j] += self.trials[(i, j)];
            }
        }
        NodeDegrees { out_successes, in_successes, out_trials, in_trials }
    }

    /// Sum of all success counts (ordered pairs for directed data, each
    /// unordered pair once for undirected data).
    pub fn total_successes(&self) -> u64 {
        self.pair_fold(|y, _| y)
    }

    /// Sum of all trial counts, paired with [`Self::total_successes`].
    pub fn total_trials(&self) -> u64 {
        self.pair_fold(|_, t| t)
    }

    fn pair_fold(&self, pick: impl Fn(u64, u64) -> u64) -> u64 {
        let mut acc = 0u64;
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j || (!self.directed && j < i) {
                    continue;
                }
                acc += pick(self.y[(i, j)], self.trials[(i, j)]);
            }
        }
        acc
    }

    /// Collapses a directed graph onto unordered pairs: pair `{i, j}` pools
    /// the counts of `(i, j)` and `(j, i)`. Undirected input is returned
    /// unchanged.
    pub fn symmetrized(&self) -> Result<GraphObservations> {
        if !self.directed {
            return Ok(self.clone());
        }
        let n = self.n;
        let mut y = Array2::<u64>::zeros((n, n));
        let mut trials = Array2::<u64>::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                let ys = self.y[(i, j)] + self.y[(j, i)];
                let ts = self.trials[(i, j)] + self.trials[(j, i)];
                y[(i, j)] = ys;
                y[(j, i)] = ys;
                trials[(i, j)] = ts;
                trials[(j, i)] = ts;
            }
        }
        GraphObservations::new(false, y, trials)
    }

    /// Pools several graphs on the same node set by summing their counts.
    pub fn merged<'a>(parts: impl IntoIterator<Item = &'a GraphObservations>) -> Result<Self> {
        let mut iter = parts.into_iter();
        let first = iter.next().ok_or(Error::ShapeMismatch {
            message: "cannot merge an empty collection of graphs".to_string(),
        })?;
        let mut y = first.y.clone();
        let mut trials = first.trials.clone();
        for g in iter {
            if g.n != first.n || g.directed != first.directed {
                return Err(Error::ShapeMismatch {
                    message: format!(
                        "merged graphs must agree on node count and orientation, \
                         got ({}, directed={}) vs ({}, directed={})",
                        first.n, first.directed, g.n, g.directed
                    ),
                });
            }
            y += &g.y;
            trials += &g.trials;
        }
        GraphObservations::new(first.directed, y, trials)
    }
}

/// Covariate vectors attached to the graphs of a panel, one row per graph.
///
/// `K = 0` is permitted and describes the empty design of an intercept-free
/// null model; every linear predictor is then zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateDesign {
    x: Array2<f64>,
}

impl CovariateDesign {
    pub fn new(x: Array2<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::ShapeMismatch {
                message: "covariate design needs at least one row".to_string(),
            });
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::Schema {
                message: format!("covariate design contains a non-finite entry: {bad}"),
            });
        }
        Ok(Self { x })
    }

    /// The all-ones scalar design used to express single-graph models as
    /// one-covariate panels.
    pub fn constant_one(num_graphs: usize) -> Self {
        Self { x: Array2::ones((num_graphs, 1)) }
    }

    /// Number of graphs `L` the design covers.
    pub fn num_graphs(&self) -> usize {
        self.x.nrows()
    }

    /// Covariate dimension `K`.
    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn value(&self, graph: usize, k: usize) -> f64 {
        self.x[(graph, k)]
    }

    /// The design with covariate `k` deleted; used to form nested null models.
    pub fn drop_column(&self, k: usize) -> Result<CovariateDesign> {
        if k >= self.dim() {
            return Err(Error::ShapeMismatch {
                message: format!("covariate index {k} out of range for K={}", self.dim()),
            });
        }
        let kept: Vec<usize> = (0..self.dim()).filter(|&c| c != k).collect();
        let x = self.x.select(ndarray::Axis(1), &kept);
        Ok(CovariateDesign { x })
    }
}

/// An aligned collection of graphs observed on one node set, plus the
/// covariate design that distinguishes them.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelObservations {
    graphs: Vec<GraphObservations>,
    design: CovariateDesign,
}

impl PanelObservations {
    pub fn new(graphs: Vec<GraphObservations>, design: CovariateDesign) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::ShapeMismatch {
                message: "panel needs at least one graph".to_string(),
            });
        }
        if graphs.len() != design.num_graphs() {
            return Err(Error::ShapeMismatch {
                message: format!(
                    "panel has {} graphs but the design has {} rows",
                    graphs.len(),
                    design.num_graphs()
                ),
            });
        }
        let (n, directed) = (graphs[0].n(), graphs[0].directed());
        for g in &graphs[1..] {
            if g.n() != n || g.directed() != directed {
                return Err(Error::ShapeMismatch {
                    message: "all graphs in a panel must share node count and orientation"
                        .to_string(),
                });
            }
        }
        Ok(Self { graphs, design })
    }

    /// Wraps one graph as a panel under the all-ones scalar design.
    pub fn single(graph: GraphObservations) -> Self {
        let design = CovariateDesign::constant_one(1);
        Self { graphs: vec![graph], design }
    }

    pub fn n(&self) -> usize {
        self.graphs[0].n()
    }

    pub fn directed(&self) -> bool {
        self.graphs[0].directed()
    }

    pub fn num_graphs(&self) -> usize {
        self.graphs.len()
    }

    pub fn graphs(&self) -> &[GraphObservations] {
        &self.graphs
    }

    pub fn graph(&self, l: usize) -> &GraphObservations {
        &self.graphs[l]
    }

    pub fn design(&self) -> &CovariateDesign {
        &self.design
    }

    /// The same graphs under a different design (used by nested-model tests).
    pub fn with_design(&self, design: CovariateDesign) -> Result<PanelObservations> {
        PanelObservations::new(self.graphs.clone(), design)
    }
}
