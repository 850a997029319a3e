//! Numerical machinery for the integration suites, kept independent of the
//! library's own derivative and linear-algebra code: central finite
//! differences, a damped-Newton maximizer, a pivoted dense solver, and
//! Gauss–Legendre quadrature.
#![allow(dead_code)]

use ndarray::{Array1, Array2};

/// Central-difference gradient of `f` at `at`.
pub fn fd_gradient<F: FnMut(&Array1<f64>) -> f64>(
    mut f: F,
    at: &Array1<f64>,
    step: f64,
) -> Array1<f64> {
    let k = at.len();
    let mut grad = Array1::<f64>::zeros(k);
    let mut point = at.clone();
    for s in 0..k {
        point[s] = at[s] + step;
        let up = f(&point);
        point[s] = at[s] - step;
        let down = f(&point);
        point[s] = at[s];
        grad[s] = (up - down) / (2.0 * step);
    }
    grad
}

/// Central-difference Hessian of `f` at `at`.
pub fn fd_hessian<F: FnMut(&Array1<f64>) -> f64>(
    mut f: F,
    at: &Array1<f64>,
    step: f64,
) -> Array2<f64> {
    let k = at.len();
    let mut hess = Array2::<f64>::zeros((k, k));
    let mut point = at.clone();
    let center = f(&point);
    for s in 0..k {
        point[s] = at[s] + step;
        let up = f(&point);
        point[s] = at[s] - step;
        let down = f(&point);
        point[s] = at[s];
        hess[(s, s)] = (up - 2.0 * center + down) / (step * step);
        for t in (s + 1)..k {
            point[s] = at[s] + step;
            point[t] = at[t] + step;
            let pp = f(&point);
            point[t] = at[t] - step;
            let pm = f(&point);
            point[s] = at[s] - step;
            let mm = f(&point);
            point[t] = at[t] + step;
            let mp = f(&point);
            point[s] = at[s];
            point[t] = at[t];
            let v = (pp - pm - mp + mm) / (4.0 * step * step);
            hess[(s, t)] = v;
            hess[(t, s)] = v;
        }
    }
    hess
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting; `None`
/// when a pivot collapses.
pub fn lu_solve(mut a: Array2<f64>, mut b: Array1<f64>) -> Option<Array1<f64>> {
    let k = b.len();
    for col in 0..k {
        let pivot =
            (col..k).max_by(|&r, &s| a[(r, col)].abs().total_cmp(&a[(s, col)].abs()))?;
        if a[(pivot, col)].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for j in 0..k {
                a.swap((col, j), (pivot, j));
            }
            b.swap(col, pivot);
        }
        for r in (col + 1)..k {
            let m = a[(r, col)] / a[(col, col)];
            if m == 0.0 {
                continue;
            }
            for j in col..k {
                a[(r, j)] -= m * a[(col, j)];
            }
            b[r] -= m * b[col];
        }
    }
    let mut x = Array1::<f64>::zeros(k);
    for row in (0..k).rev() {
        let mut acc = b[row];
        for j in (row + 1)..k {
            acc -= a[(row, j)] * x[j];
        }
        x[row] = acc / a[(row, row)];
    }
    Some(x)
}

/// Maximizes a smooth strictly concave objective by damped Newton steps on
/// finite-difference derivatives, stopping when the gradient max-norm
/// drops below `grad_tol`. Panics rather than returning a bad point, since
/// callers are tests.
pub fn newton_maximize<F: FnMut(&Array1<f64>) -> f64>(
    mut f: F,
    start: &Array1<f64>,
    grad_tol: f64,
) -> Array1<f64> {
    let mut x = start.clone();
    for _ in 0..200 {
        let grad = fd_gradient(&mut f, &x, 1e-6);
        let worst = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        if worst < grad_tol {
            return x;
        }
        let hess = fd_hessian(&mut f, &x, 1e-4);
        let direction =
            lu_solve(hess, grad.mapv(|g| -g)).expect("singular Hessian in the oracle");
        if direction.iter().all(|d| d.abs() < 1e-9) {
            return &x + &direction;
        }
        let base = f(&x);
        // Ascent checks run at roundoff scale near the optimum, so a
        // noise-level non-increase is accepted.
        let slack = 1e-12 * (1.0 + base.abs());
        let mut lambda = 1.0;
        loop {
            let trial = &x + &direction.mapv(|d| lambda * d);
            if f(&trial) > base - slack {
                x = trial;
                break;
            }
            lambda /= 2.0;
            assert!(lambda > 1e-12, "no ascent direction at gradient norm {worst:.3e}");
        }
    }
    panic!("the oracle maximizer did not reach gradient norm {grad_tol:.1e}");
}

fn legendre_eval(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`,
/// found by Newton iteration from the Chebyshev-angle starting guesses.
pub fn legendre_rule(m: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_eval(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_eval(m, x);
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

/// Integrates `f` over `[a, b]` with a composite 64-point Gauss–Legendre
/// rule split into `panels` equal pieces.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let rule = legendre_rule(64);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let half = width / 2.0;
        for &(x, w) in &rule {
            total += w * half * f(mid + half * x);
        }
    }
    total
}
