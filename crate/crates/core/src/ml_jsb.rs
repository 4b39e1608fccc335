//! Maximum-likelihood fitting of the Johnson SB family by BFGS on the
//! negative log-likelihood, in the natural `(delta, gamma, lambda, xi)`
//! parameterization, with central finite-difference gradients.

use serde::{Deserialize, Serialize};

use crate::distributions::{Dataset, JsbParams};

pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Relative finite-difference step, about the cube root of machine epsilon.
pub const FD_STEP: f64 = 6e-6;

const MAX_HALVINGS: usize = 80;
const ARMIJO: f64 = 1e-4;
const WOLFE: f64 = 0.9;
const NOISE: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// Gradient norm still above tolerance after `max_iter` iterations, or
    /// the line search could not make progress.
    NonConvergence,
    /// Objective or gradient evaluated to a non-finite value at an iterate.
    NonFiniteObjective,
    /// Iterate outside the parameter space or with data outside the support.
    InfeasibleIterate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlResult {
    pub converged: bool,
    /// Last accepted iterate; only meaningful when `converged`.
    pub params: JsbParams,
    pub iterations: usize,
    #[serde(with = "crate::float_serde")]
    pub gradient_norm: f64,
    #[serde(with = "crate::float_serde")]
    pub log_likelihood: f64,
    pub failure: Option<FailureReason>,
}

fn feasible(theta: &[f64; 4], data: &Dataset) -> bool {
    let p = JsbParams::from_array(*theta);
    p.validate().is_ok() && p.covers(data)
}

fn neg_ll(theta: &[f64; 4], data: &Dataset) -> f64 {
    -JsbParams::from_array(*theta).log_likelihood(data)
}

/// Central-difference gradient with per-coordinate step `h * max(|x_i|, 1)`.
pub fn central_difference_gradient<F, const K: usize>(f: F, x: &[f64; K], h: f64) -> [f64; K]
where
    F: Fn(&[f64; K]) -> f64,
{
    let mut g = [0.0; K];
    for i in 0..K {
        let step = h * x[i].abs().max(1.0);
        let mut up = *x;
        let mut down = *x;
        up[i] += step;
        down[i] -= step;
        g[i] = (f(&up) - f(&down)) / (up[i] - down[i]);
    }
    g
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64; 4]) -> f64 {
    dot(a, a).sqrt()
}

fn identity() -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

fn mat_vec(m: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(m) {
        *o = dot(row, v);
    }
    out
}

/// BFGS update of the inverse Hessian approximation.
fn bfgs_update(h: &mut [[f64; 4]; 4], s: &[f64; 4], y: &[f64; 4]) {
    let sy = dot(s, y);
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..4 {
        for j in 0..4 {
            h[i][j] += (1.0 + rho * yhy) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

type Point = ([f64; 4], f64, [f64; 4]);

/// Step along `p` satisfying the strong Wolfe conditions, by expansion and
/// bisection. Infeasible trial points count as an infinite objective. Falls
/// back on the best sufficient-decrease point, then on a gradient-norm
/// decrease when the change in objective is below its rounding level.
fn line_search<F: Fn(&[f64; 4]) -> f64>(
    objective: &F,
    x: &[f64; 4],
    f0: f64,
    g0: &[f64; 4],
    p: &[f64; 4],
    data: &Dataset,
) -> Option<Point> {
    let slope = dot(p, g0);
    let at = |t: f64| -> ([f64; 4], f64) {
        let trial: [f64; 4] = std::array::from_fn(|i| x[i] + t * p[i]);
        let ft = if feasible(&trial, data) {
            objective(&trial)
        } else {
            f64::INFINITY
        };
        (trial, if ft.is_nan() { f64::INFINITY } else { ft })
    };
    let grad = |trial: &[f64; 4]| central_difference_gradient(objective, trial, FD_STEP);
    let armijo = |t: f64, ft: f64| ft <= f0 + ARMIJO * t * slope;

    let mut best: Option<Point> = None;
    let (mut lo, mut f_lo, mut hi) = (0.0, f0, f64::NAN);
    let mut t = 1.0;
    for _ in 0..MAX_HALVINGS {
        let (trial, ft) = at(t);
        if !armijo(t, ft) || ft >= f_lo {
            hi = t;
        } else {
            let gt = grad(&trial);
            let d = dot(&gt, p);
            if d.abs() <= -WOLFE * slope {
                return Some((trial, ft, gt));
            }
            if best.as_ref().is_none_or(|b| ft < b.1) {
                best = Some((trial, ft, gt));
            }
            if d > 0.0 {
                hi = t;
            } else {
                lo = t;
                f_lo = ft;
                if hi.is_nan() {
                    t *= 2.0;
                    continue;
                }
            }
        }
        t = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    if best.as_ref().is_some_and(|b| b.2.iter().all(|v| v.is_finite())) {
        return best;
    }
    // rounding-level fallback: shrink until the gradient norm drops
    let gnorm = norm(g0);
    let mut t = 1.0;
    for _ in 0..MAX_HALVINGS {
        let (trial, ft) = at(t);
        if ft.is_finite() && ft - f0 <= NOISE * f0.abs() {
            let gt = grad(&trial);
            if norm(&gt) < gnorm {
                return Some((trial, ft, gt));
            }
        }
        t *= 0.5;
    }
    best
}

/// Maximizes the JSB log-likelihood from `init`. Never panics or errors;
/// every failure is reported in the result.
pub fn ml_fit_jsb(data: &Dataset, init: JsbParams, max_iter: usize, tol: f64) -> MlResult {
    let objective = |t: &[f64; 4]| neg_ll(t, data);
    let mut x = init.to_array();
    let fail = |x: [f64; 4], iterations, gnorm, f: f64, reason| MlResult {
        converged: false,
        params: JsbParams::from_array(x),
        iterations,
        gradient_norm: gnorm,
        log_likelihood: -f,
        failure: Some(reason),
    };

    if !feasible(&x, data) {
        return fail(x, 0, f64::NAN, f64::INFINITY, FailureReason::InfeasibleIterate);
    }
    let mut f = objective(&x);
    if !f.is_finite() {
        return fail(x, 0, f64::NAN, f, FailureReason::NonFiniteObjective);
    }
    let mut g = central_difference_gradient(objective, &x, FD_STEP);
    let mut h = identity();
    let mut fresh = true;

    for iter in 0..=max_iter {
        let gnorm = norm(&g);
        if !gnorm.is_finite() {
            return fail(x, iter, gnorm, f, FailureReason::NonFiniteObjective);
        }
        if gnorm <= tol {
            return MlResult {
                converged: true,
                params: JsbParams::from_array(x),
                iterations: iter,
                gradient_norm: gnorm,
                log_likelihood: -f,
                failure: None,
            };
        }
        if iter == max_iter {
            return fail(x, iter, gnorm, f, FailureReason::NonConvergence);
        }

        let mut p = mat_vec(&h, &g).map(|v| -v);
        if dot(&p, &g) >= 0.0 {
            h = identity();
            fresh = true;
            p = g.map(|v| -v);
        }
        let Some((x_new, f_new, g_new)) = line_search(&objective, &x, f, &g, &p, data) else {
            if fresh {
                return fail(x, iter, gnorm, f, FailureReason::NonConvergence);
            }
            h = identity();
            fresh = true;
            continue;
        };

        let s: [f64; 4] = std::array::from_fn(|i| x_new[i] - x[i]);
        let y: [f64; 4] = std::array::from_fn(|i| g_new[i] - g[i]);
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if fresh {
                // rescale the identity to the curvature seen along the step
                let scale = sy / dot(&y, &y);
                for (i, row) in h.iter_mut().enumerate() {
                    row[i] = scale;
                }
            }
            bfgs_update(&mut h, &s, &y);
            fresh = false;
        }
        x = x_new;
        f = f_new;
        g = g_new;
    }
    unreachable!("loop returns at iter == max_iter")
}
