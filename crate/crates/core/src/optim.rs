//! Bound-constrained descent with a monotone backtracking line search along
//! the projected path `x(α) = P(x + α d)`.
//!
//! Two search directions are available: the plain negative gradient
//! (Barzilai-Borwein initial step) and a Newton direction preconditioned by
//! a regularized banded Hessian, optionally carrying a low-rank term that is
//! handled by the Woodbury identity.

use crate::banded::SymBanded;

/// Curvature model `H = B + Σ_k u_k u_kᵀ`.
pub(crate) struct Curvature {
    pub banded: SymBanded,
    pub low_rank: Vec<Vec<f64>>,
}

pub(crate) trait Problem {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn curvature(&self, x: &[f64]) -> Curvature;
}

/// Box `lower ≤ x ≤ upper`; `lower == upper` pins a variable.
#[derive(Debug, Clone)]
pub(crate) struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn project(&self, x: &mut [f64]) {
        for ((xi, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = xi.clamp(*lo, *hi);
        }
    }

    fn pinned(&self, i: usize) -> bool {
        self.lower[i] == self.upper[i]
    }
}

/// Search direction used by the descent loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Newton direction from the (regularized) Hessian.
    ProjectedNewton,
    /// Negative gradient with a Barzilai-Borwein initial step.
    ProjectedGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Step contraction factor.
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self {
            armijo: 1e-4,
            shrink: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Options {
    pub method: Method,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub line_search: LineSearch,
    pub record_trace: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted step (first entry: start point).
    pub trace: Vec<f64>,
}

/// Max-norm of the projected gradient.
pub(crate) fn projected_grad_norm(x: &[f64], g: &[f64], bounds: &Bounds) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..x.len() {
        if bounds.pinned(i) {
            continue;
        }
        let gi = g[i];
        if (x[i] <= bounds.lower[i] && gi > 0.0) || (x[i] >= bounds.upper[i] && gi < 0.0) {
            continue;
        }
        m = m.max(gi.abs());
    }
    m
}

// Variables sitting on a bound with the gradient pointing outward are
// excluded from the Newton solve. Gradients at round-off level count as zero,
// so degenerate bound variables stay free and may leave the bound.
fn active_set(x: &[f64], g: &[f64], bounds: &Bounds) -> Vec<bool> {
    let tau = 64.0 * f64::EPSILON * (1.0 + g.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    (0..x.len())
        .map(|i| {
            bounds.pinned(i)
                || (x[i] <= bounds.lower[i] && g[i] > tau)
                || (x[i] >= bounds.upper[i] && g[i] < -tau)
        })
        .collect()
}

const MU_FLOOR: f64 = 1e-12;
const MU_CEIL: f64 = 1e6;

/// Regularized Newton direction: solves `(H + μ s I) d = −g` on the free set.
fn newton_direction(curv: Curvature, g: &[f64], active: &[bool], mu_rel: f64) -> Option<Vec<f64>> {
    let Curvature {
        mut banded,
        mut low_rank,
    } = curv;
    let scale = banded.max_abs_diagonal().max(f64::MIN_POSITIVE);
    for (i, &a) in active.iter().enumerate() {
        if a {
            banded.fix_index(i);
            for u in low_rank.iter_mut() {
                u[i] = 0.0;
            }
        }
    }
    banded.add_diagonal(mu_rel * scale);
    let chol = banded.cholesky()?;
    let rhs: Vec<f64> = g
        .iter()
        .zip(active)
        .map(|(gi, &a)| if a { 0.0 } else { -gi })
        .collect();
    let mut d = chol.solve(&rhs);
    if !low_rank.is_empty() {
        // Woodbury: (B + U Uᵀ)⁻¹ r = z − Y (I + Uᵀ Y)⁻¹ Uᵀ z
        let k = low_rank.len();
        let ys: Vec<Vec<f64>> = low_rank.iter().map(|u| chol.solve(u)).collect();
        let mut s = vec![vec![0.0; k]; k];
        let mut rhs_small = vec![0.0; k];
        for a in 0..k {
            for b in 0..k {
                s[a][b] = dot(&low_rank[a], &ys[b]) + if a == b { 1.0 } else { 0.0 };
            }
            rhs_small[a] = dot(&low_rank[a], &d);
        }
        let c = solve_dense(s, rhs_small)?;
        for (b, cb) in c.iter().enumerate() {
            for (di, yi) in d.iter_mut().zip(&ys[b]) {
                *di -= cb * yi;
            }
        }
    }
    for (di, &a) in d.iter_mut().zip(active) {
        if a {
            *di = 0.0;
        }
    }
    if d.iter().all(|v| v.is_finite()) {
        Some(d)
    } else {
        None
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Gaussian elimination with partial pivoting for the tiny Woodbury system.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

struct Trial {
    x: Vec<f64>,
    f: f64,
}

/// Backtracking along `P(x + α d)` with the Armijo test on the actual displacement.
fn line_search(
    problem: &impl Problem,
    x: &[f64],
    f: f64,
    g: &[f64],
    d: &[f64],
    alpha0: f64,
    bounds: &Bounds,
    ls: &LineSearch,
) -> Option<(Trial, f64)> {
    let mut alpha = alpha0;
    for _ in 0..=ls.max_backtracks {
        let mut xt: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        bounds.project(&mut xt);
        let decrease: f64 = g
            .iter()
            .zip(xt.iter().zip(x))
            .map(|(gi, (a, b))| gi * (a - b))
            .sum();
        if decrease < 0.0 {
            let ft = problem.value(&xt);
            // Directional decrease below the floating resolution of f: the
            // step is accepted if it does not raise f beyond round-off.
            let resolution = 64.0 * f64::EPSILON * (1.0 + f.abs());
            if ft <= f + ls.armijo * decrease || (-decrease < resolution && ft <= f + resolution) {
                return Some((Trial { x: xt, f: ft }, alpha));
            }
        }
        alpha *= ls.shrink;
    }
    None
}

pub(crate) fn minimize(problem: &impl Problem, x0: Vec<f64>, bounds: &Bounds, opts: &Options) -> Outcome {
    let mut x = x0;
    bounds.project(&mut x);
    let mut f = problem.value(&x);
    let mut g = problem.gradient(&x);
    let mut trace = if opts.record_trace { vec![f] } else { Vec::new() };
    let mut mu_rel: f64 = 0.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut bb_step = 1.0;
    let mut iterations = 0;
    let mut grad_norm = projected_grad_norm(&x, &g, bounds);

    while iterations < opts.max_iter {
        if grad_norm <= opts.grad_tol {
            break;
        }
        iterations += 1;
        let accepted = match opts.method {
            Method::ProjectedNewton => {
                let active = active_set(&x, &g, bounds);
                let mut step = None;
                let mut mu = mu_rel;
                while mu <= MU_CEIL {
                    if let Some(d) = newton_direction(problem.curvature(&x), &g, &active, mu) {
                        if let Some((trial, alpha)) =
                            line_search(problem, &x, f, &g, &d, 1.0, bounds, &opts.line_search)
                        {
                            step = Some(trial);
                            mu_rel = if alpha == 1.0 {
                                if mu <= MU_FLOOR {
                                    MU_FLOOR
                                } else {
                                    mu / 10.0
                                }
                            } else {
                                mu.max(MU_FLOOR)
                            };
                            break;
                        }
                    }
                    mu = if mu < MU_FLOOR { MU_FLOOR * 100.0 } else { mu * 100.0 };
                }
                match step {
                    Some(t) => Some(t),
                    // fall back to a projected gradient step
                    None => {
                        let d: Vec<f64> = g.iter().map(|v| -v).collect();
                        line_search(problem, &x, f, &g, &d, bb_step, bounds, &opts.line_search)
                            .map(|(t, _)| t)
                    }
                }
            }
            Method::ProjectedGradient => {
                if let Some((xp, gp)) = &prev {
                    let s: Vec<f64> = x.iter().zip(xp).map(|(a, b)| a - b).collect();
                    let y: Vec<f64> = g.iter().zip(gp).map(|(a, b)| a - b).collect();
                    let sy = dot(&s, &y);
                    bb_step = if sy > 0.0 { dot(&s, &s) / sy } else { bb_step * 2.0 };
                } else {
                    let gn = g.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
                    bb_step = (1e-2 / gn).min(1.0);
                }
                let d: Vec<f64> = g.iter().map(|v| -v).collect();
                line_search(problem, &x, f, &g, &d, bb_step, bounds, &opts.line_search)
                    .map(|(t, _)| t)
            }
        };
        let Some(trial) = accepted else {
            break;
        };
        prev = Some((std::mem::replace(&mut x, trial.x), std::mem::take(&mut g)));
        f = trial.f;
        g = problem.gradient(&x);
        grad_norm = projected_grad_norm(&x, &g, bounds);
        if opts.record_trace {
            trace.push(f);
        }
    }
    Outcome {
        converged: grad_norm <= opts.grad_tol,
        x,
        value: f,
        grad_norm,
        iterations,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Separable quadratic `½ Σ c_i (x_i − t_i)²` plus a rank-one term.
    struct Quad {
        c: Vec<f64>,
        t: Vec<f64>,
        u: Vec<f64>,
    }

    impl Problem for Quad {
        fn value(&self, x: &[f64]) -> f64 {
            let r: Vec<f64> = x.iter().zip(&self.t).map(|(a, b)| a - b).collect();
            let base: f64 = r.iter().zip(&self.c).map(|(ri, ci)| 0.5 * ci * ri * ri).sum();
            base + 0.5 * dot(&self.u, &r).powi(2)
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            let r: Vec<f64> = x.iter().zip(&self.t).map(|(a, b)| a - b).collect();
            let ur = dot(&self.u, &r);
            r.iter()
                .zip(&self.c)
                .zip(&self.u)
                .map(|((ri, ci), ui)| ci * ri + ur * ui)
                .collect()
        }
        fn curvature(&self, _x: &[f64]) -> Curvature {
            let mut b = SymBanded::zeros(self.c.len(), 1);
            for (i, ci) in self.c.iter().enumerate() {
                b.add(i, i, *ci);
            }
            Curvature {
                banded: b,
                low_rank: vec![self.u.clone()],
            }
        }
    }

    fn problem() -> (Quad, Bounds) {
        let n = 6;
        let q = Quad {
            c: (0..n).map(|i| 1.0 + i as f64).collect(),
            t: vec![2.0, -1.0, 0.5, 0.3, 3.0, 0.0],
            u: vec![0.5, 0.1, -0.2, 0.3, 0.0, 0.4],
        };
        let b = Bounds {
            lower: vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.2],
            upper: vec![1.0, 1.0, 1.0, 1.0, 1.0, 0.2],
        };
        (q, b)
    }

    fn opts(method: Method) -> Options {
        Options {
            method,
            grad_tol: 1e-10,
            max_iter: 10_000,
            line_search: LineSearch::default(),
            record_trace: true,
        }
    }

    #[test]
    fn newton_and_gradient_agree_on_box_qp() {
        let (q, b) = problem();
        let a = minimize(&q, vec![0.5; 6], &b, &opts(Method::ProjectedNewton));
        let c = minimize(&q, vec![0.5; 6], &b, &opts(Method::ProjectedGradient));
        assert!(a.converged && c.converged);
        assert!(a.iterations < 20);
        for (p, r) in a.x.iter().zip(&c.x) {
            assert!((p - r).abs() < 1e-8);
        }
        assert_eq!(a.x[5], 0.2);
        assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(c.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn dense_solver() {
        let x = solve_dense(vec![vec![0.0, 2.0], vec![3.0, 1.0]], vec![4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }
}
