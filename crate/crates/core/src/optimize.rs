//! Quasi-Newton minimization used for ansatz initialization and the VQE-MD
//! baseline.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub max_line_search: usize,
    /// Sufficient-decrease constant of the Armijo condition.
    pub armijo: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { max_iterations: 200, gradient_tolerance: 1e-6, max_line_search: 30, armijo: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfgsStatus {
    Converged,
    MaxIterations,
    LineSearchFailed,
    NonFinite,
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    /// Number of objective calls, each returning value and gradient.
    pub evaluations: usize,
    pub status: BfgsStatus,
}

impl BfgsResult {
    pub fn gradient_norm(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// BFGS with a backtracking line search. `objective` returns `(f, grad f)`.
///
/// A failed line search resets the inverse-Hessian estimate once; a second
/// consecutive failure stops the iteration.
pub fn bfgs<F>(x0: &[f64], opts: &BfgsOptions, mut objective: F) -> BfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let (mut f, g) = objective(x.as_slice());
    let mut g = DVector::from_vec(g);
    let mut evaluations = 1;
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut reset_pending = false;

    let finish = |x: DVector<f64>, f: f64, g: DVector<f64>, it: usize, ev: usize, status| BfgsResult {
        x: x.as_slice().to_vec(),
        value: f,
        gradient: g.as_slice().to_vec(),
        iterations: it,
        evaluations: ev,
        status,
    };

    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return finish(x, f, g, 0, evaluations, BfgsStatus::NonFinite);
    }
    for it in 0..opts.max_iterations {
        if g.norm() < opts.gradient_tolerance {
            return finish(x, f, g, it, evaluations, BfgsStatus::Converged);
        }
        let mut p = -(&h * &g);
        let mut slope = g.dot(&p);
        if slope >= 0.0 {
            h = DMatrix::identity(n, n);
            p = -g.clone();
            slope = -g.norm_squared();
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..opts.max_line_search {
            let trial = &x + alpha * &p;
            let (ft, gt) = objective(trial.as_slice());
            evaluations += 1;
            if ft.is_finite() && ft <= f + opts.armijo * alpha * slope {
                accepted = Some((trial, ft, DVector::from_vec(gt)));
                break;
            }
            alpha *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            if reset_pending {
                return finish(x, f, g, it + 1, evaluations, BfgsStatus::LineSearchFailed);
            }
            reset_pending = true;
            h = DMatrix::identity(n, n);
            continue;
        };
        reset_pending = false;
        if g_new.iter().any(|v| !v.is_finite()) {
            return finish(x, f, g, it + 1, evaluations, BfgsStatus::NonFinite);
        }
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if it == 0 {
                h *= sy / y.norm_squared();
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (rho * rho * yhy + rho) * (&s * s.transpose()) - rho * (&hy * s.transpose() + &s * hy.transpose());
        }
        x = x_new;
        f = f_new;
        g = g_new;
    }
    let status = if g.norm() < opts.gradient_tolerance { BfgsStatus::Converged } else { BfgsStatus::MaxIterations };
    finish(x, f, g, opts.max_iterations, evaluations, status)
}
