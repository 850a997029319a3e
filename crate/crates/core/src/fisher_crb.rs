//! Fisher information matrices, their inverses, and per-parameter variance
//! lower bounds.
//!
//! Every observed pair contributes its binomial variance
//! `N_{ij,l} p_{ij,l} (1 - p_{ij,l})` to the information matrix; which slots
//! it lands in follows from the parameter layout of the variant. The inverse
//! is computed by a symmetric `L D L^T` factorization with a relative pivot
//! floor, so rank deficiency (for example a covariate design with fewer
//! graphs than covariates) surfaces as [`Error::SingularFim`] instead of a
//! silently garbage matrix. For the homogeneous special cases — uniform
//! trial counts and identical node parameters — the inverse is also
//! available in closed form, which the numerical path is tested against.

use ndarray::{Array1, Array2};

use crate::beta_models::{ModelSpec, ModelVariant, ParameterVector, PreparedPanel};
use crate::error::{Error, Result};
use crate::graph_data::{CovariateDesign, GraphObservations, PanelObservations};
use crate::math::{logit, sigmoid};

/// Pivots smaller than this fraction of the largest pivot mark the matrix as
/// numerically singular.
const PIVOT_FLOOR: f64 = 1e-12;

/// An information matrix with its inverse and the implied variance bounds.
#[derive(Debug, Clone)]
pub struct FimResult {
    /// The information matrix over the free parameters.
    pub fim: Array2<f64>,
    /// Its inverse; the covariance of any unbiased estimator dominates it.
    pub inverse: Array2<f64>,
    /// Diagonal of the inverse: per-parameter variance lower bounds.
    pub crb_diag: Array1<f64>,
    /// Slot names in layout order, matching rows and columns.
    pub labels: Vec<String>,
}

/// Information matrix of the undirected model for one graph, evaluated at
/// `theta`, inverted.
pub fn fim_undirected(data: &GraphObservations, theta: &ParameterVector) -> Result<FimResult> {
    let spec = ModelSpec::undirected(data.n())?;
    fim(&spec, &PanelObservations::single(data.clone()), theta)
}

/// Information matrix of the directed model for one graph, evaluated at
/// `theta`, inverted.
pub fn fim_directed(data: &GraphObservations, theta: &ParameterVector) -> Result<FimResult> {
    let spec = ModelSpec::directed(data.n())?;
    fim(&spec, &PanelObservations::single(data.clone()), theta)
}

/// Information matrix of a generalized (covariate-bearing) variant over a
/// panel, evaluated at `theta`, inverted.
pub fn fim_generalized(
    spec: &ModelSpec,
    panel: &PanelObservations,
    theta: &ParameterVector,
) -> Result<FimResult> {
    if !spec.variant().is_generalized() {
        return Err(Error::ShapeMismatch {
            message: format!("fim_generalized expects a generalized variant, got {}", spec.variant()),
        });
    }
    fim(spec, panel, theta)
}

/// Assembles and inverts the information matrix for any variant.
pub fn fim(spec: &ModelSpec, panel: &PanelObservations, theta: &ParameterVector) -> Result<FimResult> {
    let matrix = fim_matrix(spec, panel, theta)?;
    let (inverse, crb_diag) = invert_fim(&matrix)?;
    Ok(FimResult { fim: matrix, inverse, crb_diag, labels: spec.slot_labels() })
}

/// The information matrix alone, without inversion.
///
/// For the model family the expected outer product of the score equals the
/// negated Hessian of the log-likelihood kernel, and neither depends on the
/// observed counts — only on the trial counts and `theta`.
pub fn fim_matrix(
    spec: &ModelSpec,
    panel: &PanelObservations,
    theta: &ParameterVector,
) -> Result<Array2<f64>> {
    let prep = PreparedPanel::new(spec, panel)?;
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
    let (n, k) = (prep.n, spec.covariate_dim());
    let directed = spec.variant().is_directed();
    let mut fim = Array2::<f64>::zeros((spec.param_len(), spec.param_len()));

    // Adds `w x x^T` to the K x K block pairing parameter blocks `bi`, `bj`.
    let add_block = |fim: &mut Array2<f64>, bi: usize, bj: usize, w: f64, g: usize| {
        for c in 0..k {
            for c2 in 0..k {
                fim[(bi * k + c, bj * k + c2)] += w * prep.x[(g, c)] * prep.x[(g, c2)];
            }
        }
    };

    for g in 0..prep.num_graphs {
        let trials = &prep.trials[g];
        for i in 0..n {
            let j_start = if directed { 0 } else { i + 1 };
            for j in j_start..n {
                if i == j || trials[(i, j)] == 0.0 {
                    continue;
                }
                let p = sigmoid(exp.a[(i, g)] + exp.b[(j, g)]);
                let w = trials[(i, j)] * p * (1.0 - p);
                if directed {
                    add_block(&mut fim, i, i, w, g);
                    if j < n - 1 {
                        add_block(&mut fim, n + j, n + j, w, g);
                        add_block(&mut fim, i, n + j, w, g);
                        add_block(&mut fim, n + j, i, w, g);
                    }
                } else {
                    add_block(&mut fim, i, i, w, g);
                    add_block(&mut fim, j, j, w, g);
                    add_block(&mut fim, i, j, w, g);
                    add_block(&mut fim, j, i, w, g);
                }
            }
        }
    }
    Ok(fim)
}

/// Inverts a symmetric positive-definite matrix, returning the inverse and
/// its diagonal.
///
/// Uses an `L D L^T` factorization without pivoting; a pivot below
/// `1e-12` times the largest pivot seen (or a non-positive pivot) aborts
/// with [`Error::SingularFim`] carrying the offending ratio.
pub fn invert_fim(fim: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>)> {
    let m = fim.nrows();
    if fim.ncols() != m {
        return Err(Error::ShapeMismatch {
            message: format!("matrix is {}x{}, expected square", m, fim.ncols()),
        });
    }
    if m == 0 {
        return Ok((Array2::zeros((0, 0)), Array1::zeros(0)));
    }

    let mut lower = Array2::<f64>::zeros((m, m));
    let mut pivots = vec![0.0f64; m];
    let mut max_pivot = (0..m).map(|i| fim[(i, i)].abs()).fold(0.0f64, f64::max);
    if max_pivot == 0.0 {
        return Err(Error::SingularFim { pivot_ratio: 0.0 });
    }
    for j in 0..m {
        let mut d = fim[(j, j)];
        for q in 0..j {
            d -= lower[(j, q)] * lower[(j, q)] * pivots[q];
        }
        if d <= PIVOT_FLOOR * max_pivot {
            return Err(Error::SingularFim { pivot_ratio: d / max_pivot });
        }
        pivots[j] = d;
        max_pivot = max_pivot.max(d);
        lower[(j, j)] = 1.0;
        for i in j + 1..m {
            let mut v = fim[(i, j)];
            for q in 0..j {
                v -= lower[(i, q)] * lower[(j, q)] * pivots[q];
            }
            lower[(i, j)] = v / d;
        }
    }

    // Solve L D L^T column by column against the identity.
    let mut inverse = Array2::<f64>::zeros((m, m));
    let mut col = vec![0.0f64; m];
    for e in 0..m {
        col.iter_mut().for_each(|v| *v = 0.0);
        col[e] = 1.0;
        for i in 0..m {
            for q in 0..i {
                col[i] -= lower[(i, q)] * col[q];
            }
        }
        for (i, v) in col.iter_mut().enumerate() {
            *v /= pivots[i];
        }
        for i in (0..m).rev() {
            for q in i + 1..m {
                col[i] -= lower[(q, i)] * col[q];
            }
        }
        for i in 0..m {
            inverse[(i, e)] = col[i];
        }
    }
    // Rounding can leave the two triangles microscopically apart.
    for i in 0..m {
        for j in 0..i {
            let v = 0.5 * (inverse[(i, j)] + inverse[(j, i)]);
            inverse[(i, j)] = v;
            inverse[(j, i)] = v;
        }
    }
    let crb_diag = Array1::from_iter((0..m).map(|i| inverse[(i, i)]));
    Ok((inverse, crb_diag))
}

fn check_special_case(n: usize, trials: u64, p: f64) -> Result<()> {
    if n <= 2 {
        return Err(Error::InvalidSpecialCase {
            message: format!("the homogeneous closed forms need n > 2, got n={n}"),
        });
    }
    if trials < 1 {
        return Err(Error::InvalidSpecialCase {
            message: "the homogeneous closed forms need at least one trial per pair".into(),
        });
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidSpecialCase {
            message: format!("the homogeneous closed forms need 0 < p < 1, got p={p}"),
        });
    }
    Ok(())
}

/// Closed-form inverse information matrix of the undirected model when all
/// pairs share the trial count `trials` and success probability `p`.
pub fn closed_form_crb_undirected(n: usize, trials: u64, p: f64) -> Result<Array2<f64>> {
    check_special_case(n, trials, p)?;
    let nf = n as f64;
    let f = 1.0 / (trials as f64 * p * (1.0 - p)) / (nf - 2.0);
    let mut out = Array2::<f64>::from_elem((n, n), -f / (2.0 * (nf - 1.0)));
    for i in 0..n {
        out[(i, i)] += f;
    }
    Ok(out)
}

/// The dimensionless block structure shared by the directed and generalized
/// closed forms: the inverse of `(n-1) I` on both diagonal blocks with the
/// one-filled cross block, under the pinned last in-parameter.
fn directed_shape_matrix(n: usize) -> Array2<f64> {
    let nf = n as f64;
    let m = 2 * n - 1;
    let mut out = Array2::<f64>::zeros((m, m));

    // Out-side block: (n-1) leading rows and the distinguished last node.
    let lead = (nf - 1.0) / (nf * (nf - 2.0));
    let lead_ones = lead * (nf * nf - 3.0 * nf + 1.0) / ((nf - 1.0) * (nf - 1.0));
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            out[(i, j)] = lead_ones + if i == j { lead } else { 0.0 };
        }
        out[(i, n - 1)] = 1.0 / (nf - 1.0);
        out[(n - 1, i)] = 1.0 / (nf - 1.0);
    }
    out[(n - 1, n - 1)] = (2.0 * nf - 3.0) / ((nf - 1.0) * (nf - 2.0));

    // Cross block between out- and in-parameters.
    let c = -1.0 / (nf * (nf - 2.0));
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let v = c * ((nf - 1.0) - if i == j { 1.0 } else { 0.0 });
            out[(i, n + j)] = v;
            out[(n + j, i)] = v;
        }
    }
    for j in 0..n - 1 {
        out[(n - 1, n + j)] = c * nf;
        out[(n + j, n - 1)] = c * nf;
    }

    // In-side block.
    let b = (nf - 1.0) / (nf * (nf - 2.0));
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            out[(n + i, n + j)] = b * (1.0 + if i == j { 1.0 } else { 0.0 });
        }
    }
    out
}

/// Closed-form inverse information matrix of the directed model when all
/// ordered pairs share the trial count `trials` and success probability `p`
/// (identical out-parameters, in-parameters all zero).
pub fn closed_form_crb_directed(n: usize, trials: u64, p: f64) -> Result<Array2<f64>> {
    check_special_case(n, trials, p)?;
    let f = 1.0 / (trials as f64 * p * (1.0 - p));
    Ok(directed_shape_matrix(n).mapv(|v| v * f))
}

/// Closed-form inverse information matrix of the generalized model when all
/// pairs share the trial count `trials`, every node has out-vector `alpha`,
/// and the in-vectors are zero. Per-graph success probabilities follow from
/// the design: `p_l = sigmoid(alpha . x_l)`.
pub fn closed_form_crb_generalized(
    n: usize,
    trials: u64,
    design: &CovariateDesign,
    alpha: &[f64],
) -> Result<Array2<f64>> {
    if alpha.len() != design.dim() {
        return Err(Error::ShapeMismatch {
            message: format!(
                "alpha has length {}, design has K={}",
                alpha.len(),
                design.dim()
            ),
        });
    }
    check_special_case(n, trials, 0.5)?;
    let x = design.matrix();
    let k = design.dim();
    let mut info_x = Array2::<f64>::zeros((k, k));
    for l in 0..x.nrows() {
        let z: f64 = (0..k).map(|c| alpha[c] * x[(l, c)]).sum();
        let p = sigmoid(z);
        let w = p * (1.0 - p);
        for c in 0..k {
            for c2 in 0..k {
                info_x[(c, c2)] += w * x[(l, c)] * x[(l, c2)];
            }
        }
    }
    let (inv_x, _) = invert_fim(&info_x)?;
    let shape = directed_shape_matrix(n).mapv(|v| v / trials as f64);
    Ok(kronecker(&shape, &inv_x))
}

/// Scalar variance lower bound for any single node parameter of the
/// undirected model in the homogeneous case.
pub fn scalar_crb_undirected(n: usize, trials: u64, p: f64) -> Result<f64> {
    check_special_case(n, trials, p)?;
    let nf = n as f64;
    Ok(1.0 / (trials as f64 * p * (1.0 - p)) * (2.0 * nf - 3.0)
        / (2.0 * (nf - 1.0) * (nf - 2.0)))
}

/// Scalar variance lower bounds for the directed model in the homogeneous
/// case. The distinguished last node absorbs the pinned in-parameter, so its
/// out-parameter carries a different bound than the others.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectedScalarCrb {
    /// Bound for the out-parameter of any node but the last.
    pub alpha: f64,
    /// Bound for the out-parameter of the last node.
    pub alpha_last: f64,
    /// Bound for any free in-parameter.
    pub beta: f64,
}

pub fn scalar_crb_directed(n: usize, trials: u64, p: f64) -> Result<DirectedScalarCrb> {
    check_special_case(n, trials, p)?;
    let nf = n as f64;
    let f = 1.0 / (trials as f64 * p * (1.0 - p));
    Ok(DirectedScalarCrb {
        alpha: f * (2.0 * nf - 1.0) / (nf * (nf - 1.0)),
        alpha_last: f * (2.0 * nf - 3.0) / ((nf - 1.0) * (nf - 2.0)),
        beta: f * 2.0 * (nf - 1.0) / (nf * (nf - 2.0)),
    })
}

/// Homogeneous parameter vector reaching a target success probability:
/// every free slot of the out side gets `logit(p)` split appropriately so
/// that each pair succeeds with probability `p`.
pub fn homogeneous_parameters(spec: &ModelSpec, p: f64) -> Result<ParameterVector> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidSpecialCase {
            message: format!("need 0 < p < 1, got p={p}"),
        });
    }
    if spec.covariate_dim() != 1 {
        return Err(Error::InvalidSpecialCase {
            message: "homogeneous parameters are only defined for K=1".into(),
        });
    }
    let z = logit(p);
    let n = spec.n();
    let mut values = Array1::<f64>::zeros(spec.param_len());
    match spec.variant() {
        ModelVariant::Undirected | ModelVariant::GeneralizedUndirected => {
            values.fill(0.5 * z);
        }
        ModelVariant::Directed | ModelVariant::Generalized => {
            for i in 0..n {
                values[i] = z;
            }
        }
    }
    ParameterVector::new(spec, values)
}

/// Inverse of `a I_n + b 1_n` (`1_n` the all-ones matrix), which is
/// `(1/a) I_n - (b / a) (1 / (a + b n)) 1_n` whenever `a != 0` and
/// `b != -a/n`.
pub fn sherman_morrison_inverse(a: f64, b: f64, n: usize) -> Result<Array2<f64>> {
    if n == 0 {
        return Err(Error::DegenerateInput { message: "matrix dimension must be positive".into() });
    }
    if a == 0.0 {
        return Err(Error::DegenerateInput {
            message: "the diagonal coefficient must be nonzero".into(),
        });
    }
    let denom = a + b * n as f64;
    if denom.abs() <= 1e-12 * (a.abs() + b.abs() * n as f64) {
        return Err(Error::DegenerateInput {
            message: format!("b = -a/n makes the matrix singular (a={a}, b={b}, n={n})"),
        });
    }
    let off = -(b / a) / denom;
    let mut out = Array2::<f64>::from_elem((n, n), off);
    for i in 0..n {
        out[(i, i)] += 1.0 / a;
    }
    Ok(out)
}

/// Kronecker product `a (x) b`.
pub fn kronecker(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::<f64>::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let v = a[(i, j)];
            if v == 0.0 {
                continue;
            }
            for r in 0..br {
                for c in 0..bc {
                    out[(i * br + r, j * bc + c)] = v * b[(r, c)];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn uniform_graph(n: usize, directed: bool, trials: u64) -> GraphObservations {
        GraphObservations::empty_with_uniform_trials(n, directed, trials).unwrap()
    }

    fn assert_matrices_close(a: &Array2<f64>, b: &Array2<f64>, tol: f64) {
        assert_eq!(a.dim(), b.dim());
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!(
                (x - y).abs() <= tol * scale,
                "matrices differ: {x} vs {y} (tol {tol}, scale {scale})"
            );
        }
    }

    #[test]
    fn undirected_information_at_even_odds() {
        let spec = ModelSpec::undirected(3).unwrap();
        let theta = ParameterVector::zeros(&spec);
        let g = uniform_graph(3, false, 4);
        let res = fim_undirected(&g, &theta).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 2.0 } else { 1.0 };
                assert_abs_diff_eq!(res.fim[(i, j)], expected, epsilon = 1e-14);
            }
        }
        // With N p (1 - p) = 1 the inverse is I - ones/4.
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 0.75 } else { -0.25 };
                assert_abs_diff_eq!(res.inverse[(i, j)], expected, epsilon = 1e-12);
            }
        }
        assert_eq!(res.labels[0], "beta[0]");
    }

    #[test]
    fn directed_information_blocks_at_even_odds() {
        let spec = ModelSpec::directed(3).unwrap();
        let theta = ParameterVector::zeros(&spec);
        let g = uniform_graph(3, true, 4);
        let res = fim_directed(&g, &theta).unwrap();
        // Out-side diagonal: two partners, each 4 * 1/4.
        for i in 0..3 {
            assert_abs_diff_eq!(res.fim[(i, i)], 2.0, epsilon = 1e-14);
        }
        // Out blocks never couple distinct nodes directly.
        assert_abs_diff_eq!(res.fim[(0, 1)], 0.0, epsilon = 1e-14);
        // A pair's shared observation couples its out- and in-parameters.
        assert_abs_diff_eq!(res.fim[(0, 3 + 1)], 1.0, epsilon = 1e-14);
        // A node's own out- and in-parameters share no observation.
        assert_abs_diff_eq!(res.fim[(0, 3 + 0)], 0.0, epsilon = 1e-14);
        assert_eq!(res.labels, vec!["alpha[0]", "alpha[1]", "alpha[2]", "beta[0]", "beta[1]"]);
    }

    #[test]
    fn closed_forms_match_numerical_inversion() {
        for &(n, p) in &[(3usize, 0.3f64), (5, 0.5), (10, 0.8)] {
            let trials = 4u64;
            let spec = ModelSpec::undirected(n).unwrap();
            let theta = homogeneous_parameters(&spec, p).unwrap();
            let res = fim_undirected(&uniform_graph(n, false, trials), &theta).unwrap();
            let closed = closed_form_crb_undirected(n, trials, p).unwrap();
            assert_matrices_close(&res.inverse, &closed, 1e-10);

            let spec = ModelSpec::directed(n).unwrap();
            let theta = homogeneous_parameters(&spec, p).unwrap();
            let res = fim_directed(&uniform_graph(n, true, trials), &theta).unwrap();
            let closed = closed_form_crb_directed(n, trials, p).unwrap();
            assert_matrices_close(&res.inverse, &closed, 1e-10);
        }
    }

    #[test]
    fn generalized_closed_form_matches_numerical_inversion() {
        let n = 5;
        let trials = 3u64;
        let design = CovariateDesign::new(array![[1.0, 0.0], [1.0, 1.0]]).unwrap();
        let alpha = [0.4, 0.4];
        let spec = ModelSpec::generalized(n, 2).unwrap();
        let mut values = Array1::<f64>::zeros(spec.param_len());
        for i in 0..n {
            values[2 * i] = alpha[0];
            values[2 * i + 1] = alpha[1];
        }
        let theta = ParameterVector::new(&spec, values).unwrap();
        let graphs = vec![uniform_graph(n, true, trials), uniform_graph(n, true, trials)];
        let panel = PanelObservations::new(graphs, design.clone()).unwrap();
        let res = fim_generalized(&spec, &panel, &theta).unwrap();
        let closed = closed_form_crb_generalized(n, trials, &design, &alpha).unwrap();
        assert_matrices_close(&res.inverse, &closed, 1e-10);
    }

    #[test]
    fn trivial_design_reduces_to_the_directed_matrix() {
        let spec_d = ModelSpec::directed(4).unwrap();
        let spec_g = ModelSpec::generalized(4, 1).unwrap();
        let values = array![0.3, -0.2, 0.5, 0.0, -0.4, 0.1, 0.2];
        let theta_d = ParameterVector::new(&spec_d, values.clone()).unwrap();
        let theta_g = ParameterVector::new(&spec_g, values).unwrap();
        let panel = PanelObservations::single(uniform_graph(4, true, 3));
        let md = fim_matrix(&spec_d, &panel, &theta_d).unwrap();
        let mg = fim_matrix(&spec_g, &panel, &theta_g).unwrap();
        assert_matrices_close(&mg, &md, 1e-15);
    }

    #[test]
    fn scalar_bounds_match_the_printed_values() {
        let v = scalar_crb_undirected(10, 10, 0.5).unwrap();
        assert_abs_diff_eq!(v, 17.0 / 360.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.047222, epsilon = 1e-6);
        assert_abs_diff_eq!(v.sqrt(), 0.21731, epsilon = 1e-5);

        // The directed bounds sit roughly twice as high as the undirected
        // one for large n.
        let d = scalar_crb_directed(200, 10, 0.5).unwrap();
        let u = scalar_crb_undirected(200, 10, 0.5).unwrap();
        assert_abs_diff_eq!(d.alpha / u, 1.990, epsilon = 1e-3);
    }

    #[test]
    fn scalar_bounds_agree_with_the_matrix_diagonals() {
        let (n, trials, p) = (6usize, 5u64, 0.35f64);
        let closed = closed_form_crb_directed(n, trials, p).unwrap();
        let s = scalar_crb_directed(n, trials, p).unwrap();
        for i in 0..n - 1 {
            assert_abs_diff_eq!(closed[(i, i)], s.alpha, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(closed[(n - 1, n - 1)], s.alpha_last, epsilon = 1e-12);
        for j in 0..n - 1 {
            assert_abs_diff_eq!(closed[(n + j, n + j)], s.beta, epsilon = 1e-12);
        }

        let closed = closed_form_crb_undirected(n, trials, p).unwrap();
        let s = scalar_crb_undirected(n, trials, p).unwrap();
        for i in 0..n {
            assert_abs_diff_eq!(closed[(i, i)], s, epsilon = 1e-12);
        }
    }

    #[test]
    fn variance_bound_is_smallest_at_even_odds() {
        let mut prev = f64::INFINITY;
        let mut grid = Vec::new();
        for step in 1..19 {
            grid.push(0.05 * step as f64);
        }
        for &p in &grid {
            let v = scalar_crb_undirected(10, 10, p).unwrap();
            if p <= 0.5 {
                assert!(v < prev, "bound should fall toward p = 1/2, got {v} after {prev}");
            } else {
                assert!(v > prev, "bound should rise past p = 1/2, got {v} after {prev}");
            }
            prev = v;
        }
        let at_half = scalar_crb_undirected(10, 10, 0.5).unwrap();
        assert!(grid.iter().all(|&p| scalar_crb_undirected(10, 10, p).unwrap() >= at_half));
    }

    #[test]
    fn degenerate_special_cases_are_rejected() {
        assert!(matches!(
            closed_form_crb_undirected(2, 4, 0.5),
            Err(Error::InvalidSpecialCase { .. })
        ));
        assert!(matches!(
            closed_form_crb_directed(5, 4, 1.0),
            Err(Error::InvalidSpecialCase { .. })
        ));
        assert!(matches!(
            closed_form_crb_undirected(5, 0, 0.5),
            Err(Error::InvalidSpecialCase { .. })
        ));
    }

    #[test]
    fn identity_inverts_to_identity() {
        let eye = Array2::<f64>::eye(4);
        let (inv, diag) = invert_fim(&eye).unwrap();
        assert_matrices_close(&inv, &eye, 1e-15);
        assert!(diag.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn fewer_graphs_than_covariates_is_singular() {
        let design = CovariateDesign::new(array![[1.0, 0.5]]).unwrap();
        let spec = ModelSpec::generalized(3, 2).unwrap();
        let theta = ParameterVector::zeros(&spec);
        let panel =
            PanelObservations::new(vec![uniform_graph(3, true, 2)], design).unwrap();
        match fim_generalized(&spec, &panel, &theta) {
            Err(Error::SingularFim { pivot_ratio }) => {
                assert!(pivot_ratio.abs() < 1e-9, "ratio {pivot_ratio}");
            }
            other => panic!("expected SingularFim, got {other:?}"),
        }
    }

    #[test]
    fn product_with_the_original_recovers_identity() {
        let spec = ModelSpec::directed(5).unwrap();
        let theta = ParameterVector::new(
            &spec,
            array![0.3, -0.4, 0.1, 0.0, 0.7, -0.2, 0.5, 0.1, -0.3],
        )
        .unwrap();
        let res = fim_directed(&uniform_graph(5, true, 3), &theta).unwrap();
        let prod = res.fim.dot(&res.inverse);
        assert_matrices_close(&prod, &Array2::eye(9), 1e-8);
    }

    #[test]
    fn rank_one_update_inverse_multiplies_back_to_identity() {
        let inv = sherman_morrison_inverse(1.0, 0.0, 3).unwrap();
        assert_matrices_close(&inv, &Array2::eye(3), 1e-15);

        let inv = sherman_morrison_inverse(1.0, 1.0, 2).unwrap();
        let expected = array![[1.0 - 1.0 / 3.0, -1.0 / 3.0], [-1.0 / 3.0, 1.0 - 1.0 / 3.0]];
        assert_matrices_close(&inv, &expected, 1e-15);

        for &(a, b, n) in &[(2.0, 0.7, 4usize), (-1.5, 0.2, 3), (0.3, -0.04, 6)] {
            let inv = sherman_morrison_inverse(a, b, n).unwrap();
            let mut orig = Array2::<f64>::from_elem((n, n), b);
            for i in 0..n {
                orig[(i, i)] += a;
            }
            assert_matrices_close(&inv.dot(&orig), &Array2::eye(n), 1e-12);
        }

        assert!(matches!(
            sherman_morrison_inverse(0.0, 1.0, 3),
            Err(Error::DegenerateInput { .. })
        ));
        assert!(matches!(
            sherman_morrison_inverse(1.0, -1.0 / 3.0, 3),
            Err(Error::DegenerateInput { .. })
        ));
    }

    #[test]
    fn kronecker_inverse_factorizes() {
        let a = array![[2.0, 0.5], [0.5, 1.0]];
        let b = array![[3.0, 1.0, 0.0], [1.0, 2.0, 0.3], [0.0, 0.3, 1.5]];
        let (inv_a, _) = invert_fim(&a).unwrap();
        let (inv_b, _) = invert_fim(&b).unwrap();
        let (inv_kron, _) = invert_fim(&kronecker(&a, &b)).unwrap();
        assert_matrices_close(&inv_kron, &kronecker(&inv_a, &inv_b), 1e-10);
    }

    #[test]
    fn zero_trial_pairs_drop_out_of_the_information() {
        // A path: the 0-2 pair is never observed, making the two end nodes
        // exchangeable through the middle one.
        let mut trials = Array2::<u64>::zeros((3, 3));
        for &(i, j) in &[(0usize, 1usize), (1, 0), (1, 2), (2, 1)] {
            trials[(i, j)] = 5;
        }
        let y = Array2::<u64>::zeros((3, 3));
        let g = GraphObservations::new(false, y, trials).unwrap();
        let spec = ModelSpec::undirected(3).unwrap();
        let theta = ParameterVector::zeros(&spec);
        let m = fim_matrix(&spec, &PanelObservations::single(g), &theta).unwrap();
        assert_abs_diff_eq!(m[(0, 2)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(0, 0)], 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 1)], 2.5, epsilon = 1e-15);
    }
}
