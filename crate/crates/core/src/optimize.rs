// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Unconstrained minimizers over real parameter vectors.

use serde::{Deserialize, Serialize};

/// A smooth scalar function of `n` real variables.
pub trait Objective {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Writes the gradient into `grad` and returns the value.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

/// When to stop a local search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    /// Stop as soon as the value is at or below this.
    pub target: f64,
    pub max_iter: usize,
    /// Stop when the value improved by less than `stall_rel` (relative) over
    /// the last `stall_window` iterations.
    pub stall_window: usize,
    pub stall_rel: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { target: 0.0, max_iter: 2000, stall_window: 50, stall_rel: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn stalled(history: &[f64], rule: &StopRule) -> bool {
    let w = rule.stall_window;
    if w == 0 || history.len() <= w {
        return false;
    }
    let old = history[history.len() - 1 - w];
    let new = history[history.len() - 1];
    old - new <= rule.stall_rel * old.abs()
}

/// Bracketing line search for the weak Wolfe conditions.
struct LineSearch {
    c1: f64,
    c2: f64,
    max_evals: usize,
}

struct Step {
    alpha: f64,
    x: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
    evaluations: usize,
}

impl LineSearch {
    fn run<O: Objective + ?Sized>(
        &self,
        obj: &O,
        x: &[f64],
        f0: f64,
        g0: &[f64],
        dir: &[f64],
        alpha0: f64,
    ) -> Option<Step> {
        let slope0 = dot(g0, dir);
        let (mut lo, mut hi) = (0.0, f64::INFINITY);
        let mut alpha = alpha0;
        let mut xt = vec![0.0; x.len()];
        let mut gt = vec![0.0; x.len()];
        for evals in 1..=self.max_evals {
            for i in 0..x.len() {
                xt[i] = x[i] + alpha * dir[i];
            }
            let ft = obj.value_and_gradient(&xt, &mut gt);
            if !ft.is_finite() || ft > f0 + self.c1 * alpha * slope0 {
                hi = alpha;
            } else if dot(&gt, dir) < self.c2 * slope0 {
                lo = alpha;
            } else {
                return Some(Step { alpha, x: xt, value: ft, grad: gt, evaluations: evals });
            }
            alpha = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo };
            if hi.is_finite() && hi - lo < 1e-18 * hi.max(1.0) {
                break;
            }
        }
        None
    }
}

/// BFGS with an inverse-Hessian update and a weak-Wolfe line search.
pub fn bfgs<O: Objective + ?Sized>(obj: &O, x0: &[f64], rule: &StopRule) -> Minimum {
    let n = obj.dim();
    assert_eq!(x0.len(), n);
    let search = LineSearch { c1: 1e-4, c2: 0.9, max_evals: 60 };
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = obj.value_and_gradient(&x, &mut g);
    let mut evaluations = 1;
    let mut h = identity(n);
    let mut fresh = true;
    let mut history = vec![f];
    let mut iterations = 0;
    let mut dir = vec![0.0; n];

    while iterations < rule.max_iter && f > rule.target && f.is_finite() {
        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm < 1e-15 {
            break;
        }
        for i in 0..n {
            dir[i] = -dot(&h[i * n..(i + 1) * n], &g);
        }
        if dot(&dir, &g) >= 0.0 {
            h = identity(n);
            fresh = true;
            for i in 0..n {
                dir[i] = -g[i];
            }
        }
        let alpha0 = if fresh { (1.0 / gnorm).min(1.0) } else { 1.0 };
        let Some(step) = search.run(obj, &x, f, &g, &dir, alpha0) else {
            evaluations += search.max_evals;
            if fresh {
                break;
            }
            h = identity(n);
            fresh = true;
            continue;
        };
        evaluations += step.evaluations;
        iterations += 1;

        let s: Vec<f64> = dir.iter().map(|d| step.alpha * d).collect();
        let y: Vec<f64> = step.grad.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if fresh {
                // Scale the initial inverse Hessian to the observed curvature.
                let scale = sy / dot(&y, &y);
                for i in 0..n {
                    h[i * n + i] = scale;
                }
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            let coef = rho * rho * yhy + rho;
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + coef * s[i] * s[j];
                }
            }
            fresh = false;
        }
        x = step.x;
        f = step.value;
        g = step.grad;
        history.push(f);
        if stalled(&history, rule) {
            break;
        }
    }
    Minimum { x, value: f, iterations, evaluations }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

/// Derivative-free Nelder–Mead simplex search (standard coefficients).
pub fn nelder_mead<O: Objective + ?Sized>(obj: &O, x0: &[f64], step: f64, rule: &StopRule) -> Minimum {
    let n = obj.dim();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| obj.value(v)).collect();
    let mut evaluations = n + 1;
    let mut history = Vec::new();
    let mut iterations = 0;
    let point =
        |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(ci, wi)| ci + t * (wi - ci)).collect() };
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        history.push(values[0]);
        if values[0] <= rule.target || iterations >= rule.max_iter || stalled(&history, rule) {
            break;
        }
        iterations += 1;
        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let reflected = point(&centroid, &worst, -1.0);
        let fr = obj.value(&reflected);
        evaluations += 1;
        if fr < values[0] {
            let expanded = point(&centroid, &worst, -2.0);
            let fe = obj.value(&expanded);
            evaluations += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (candidate, fc) = if fr < values[n] {
                let c = point(&centroid, &worst, -0.5);
                let fc = obj.value(&c);
                (c, fc)
            } else {
                let c = point(&centroid, &worst, 0.5);
                let fc = obj.value(&c);
                (c, fc)
            };
            evaluations += 1;
            if fc < values[n].min(fr) {
                simplex[n] = candidate;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    simplex[i] = point(&best, &simplex[i], 0.5);
                    values[i] = obj.value(&simplex[i]);
                }
                evaluations += n;
            }
        }
    }
    Minimum { x: simplex[0].clone(), value: values[0], iterations, evaluations }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl Objective for Rosenbrock {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, x: &[f64]) -> f64 {
            (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
        }
        fn value_and_gradient(&self, x: &[f64], g: &mut [f64]) -> f64 {
            g[0] = -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]);
            g[1] = 200.0 * (x[1] - x[0] * x[0]);
            self.value(x)
        }
    }

    #[test]
    fn bfgs_solves_rosenbrock() {
        let rule = StopRule { target: 1e-20, ..StopRule::default() };
        let m = bfgs(&Rosenbrock, &[-1.2, 1.0], &rule);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn nelder_mead_solves_rosenbrock() {
        let rule = StopRule { target: 1e-14, max_iter: 5000, ..StopRule::default() };
        let m = nelder_mead(&Rosenbrock, &[-1.2, 1.0], 0.5, &rule);
        assert!((m.x[0] - 1.0).abs() < 1e-5, "{m:?}");
    }

    #[test]
    fn target_stops_immediately() {
        let rule = StopRule { target: 1e6, ..StopRule::default() };
        let m = bfgs(&Rosenbrock, &[-1.2, 1.0], &rule);
        assert_eq!(m.iterations, 0);
    }
}
