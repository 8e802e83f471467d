//! One-dimensional check of the sharp-interface limit for the harmonic trap.
//!
//! The ground state `η_ε` of the single-component Gross-Pitaevskii energy
//!
//! ```text
//! E_ε(η) = ½ ∫ η'² + t² η²/ε² + η⁴/(2ε²),   ‖η‖₂ = 1,
//! ```
//!
//! is computed on `[−M, M]` with `η(±M) = 0`. The weighted two-field energy
//! `F_{ε,β}(v, φ)` is then minimized under the mass constraints
//! `∫η²v² = 1`, `∫η²v² cos φ = α₁ − α₂`, and `ε F_{ε,β}` is compared with the
//! limit interface cost `σ̄_β ρ(t₀)^{3/2}`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::analytic::{bisect, BetaParams};
use crate::banded::SymBanded;
use crate::emit::Table;
use crate::error::{domain, Error, Result};
use crate::functional::{interleave, split, EnergyBreakdown, TwoFieldFunctional};
use crate::grid::Grid1D;
use crate::optim::{self, Bounds, Curvature, LineSearch, Method, Options, Problem};
use crate::profile_solver::{self, ProfilePair, SolverConfig, SurfaceTensionResult};
use crate::tf_geometry::tf_lambda;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsParams {
    eps: f64,
}

impl EpsParams {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return domain(format!("eps must lie in (0, 1], got {eps}"));
        }
        Ok(Self { eps })
    }

    pub fn value(self) -> f64 {
        self.eps
    }
}

/// Discrete ground state on a grid vanishing at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaField {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub eps: f64,
    /// Chemical potential of the ε²-scaled equation `−ε²η'' + (t² + η²)η = μη`.
    pub mu: f64,
    /// Max-norm of the nodal residual of that equation.
    pub residual: f64,
    pub iterations: usize,
}

impl EtaField {
    /// Discrete `‖η‖₂`.
    pub fn norm(&self) -> f64 {
        self.grid
            .integrate(&self.values.iter().map(|x| x * x).collect::<Vec<_>>())
            .sqrt()
    }

    /// `E_ε(η_ε)`.
    pub fn energy(&self) -> f64 {
        gp_energy(&self.values, self.eps, &self.grid)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `E_ε(u)` with forward differences and trapezoid weights.
pub fn gp_energy(u: &[f64], eps: f64, grid: &Grid1D) -> f64 {
    let h = grid.spacing();
    let kin: f64 = u.windows(2).map(|w| 0.5 * (w[1] - w[0]).powi(2) / h).sum();
    let pot: f64 = u
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let t = grid.node(i);
            grid.weight(i) * (0.5 * t * t * x * x + 0.25 * x.powi(4))
        })
        .sum();
    kin + pot / (eps * eps)
}

/// Grid on `[−(λ + margin), λ + margin]` with spacing at most `max_spacing`.
pub fn eta_grid(margin: f64, max_spacing: f64) -> Result<Grid1D> {
    Grid1D::with_max_spacing(tf_lambda(1)? + margin, max_spacing)
}

const BEFD_STEP: f64 = 10.0;
const BEFD_SWITCH: f64 = 1e-3;
const BEFD_MAX_STEPS: usize = 20_000;
const NEWTON_MAX_STEPS: usize = 50;
/// Target for the nodal ground-state residual.
pub const ETA_TOLERANCE: f64 = 1e-9;

struct GroundState<'a> {
    grid: &'a Grid1D,
    eps2: f64,
    pot: Vec<f64>,
    w: Vec<f64>,
}

impl GroundState<'_> {
    fn inv_h(&self) -> f64 {
        1.0 / self.grid.spacing()
    }

    /// `K η` for the ε²-scaled stiffness on interior nodes.
    fn stiffness_apply(&self, eta: &[f64]) -> Vec<f64> {
        let n = eta.len();
        let k = self.eps2 * self.inv_h();
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = k * (2.0 * eta[i] - eta[i - 1] - eta[i + 1]);
        }
        out
    }

    /// Interior matrix `K + diag(w d)` of size `n − 2`.
    fn interior_matrix(&self, diag: &[f64]) -> SymBanded {
        let n = self.w.len();
        let m = n - 2;
        let k = self.eps2 * self.inv_h();
        let mut a = SymBanded::zeros(m, 1);
        for j in 0..m {
            let i = j + 1;
            a.add(j, j, 2.0 * k + self.w[i] * diag[i]);
            if j > 0 {
                a.add(j, j - 1, -k);
            }
        }
        a
    }

    fn mass(&self, eta: &[f64]) -> f64 {
        eta.iter().zip(&self.w).map(|(x, w)| w * x * x).sum()
    }

    fn normalize(&self, eta: &mut [f64]) {
        let s = self.mass(eta).sqrt();
        eta.iter_mut().for_each(|x| *x /= s);
    }

    /// `(μ, max_i |r_i|)` with `r = (Kη)/w + (t² + η² − μ)η`.
    fn residual(&self, eta: &[f64]) -> (f64, f64) {
        let ke = self.stiffness_apply(eta);
        let n = eta.len();
        let mut num = 0.0;
        for i in 1..n - 1 {
            num += eta[i] * (ke[i] + self.w[i] * (self.pot[i] + eta[i] * eta[i]) * eta[i]);
        }
        let mu = num / self.mass(eta);
        let r = (1..n - 1)
            .map(|i| (ke[i] / self.w[i] + (self.pot[i] + eta[i] * eta[i] - mu) * eta[i]).abs())
            .fold(0.0, f64::max);
        (mu, r)
    }

    fn befd_step(&self, eta: &[f64]) -> Option<Vec<f64>> {
        let n = eta.len();
        let diag: Vec<f64> = (0..n)
            .map(|i| 1.0 / BEFD_STEP + self.pot[i] + eta[i] * eta[i])
            .collect();
        let chol = self.interior_matrix(&diag).cholesky()?;
        let rhs: Vec<f64> = (1..n - 1).map(|i| self.w[i] * eta[i] / BEFD_STEP).collect();
        let sol = chol.solve(&rhs);
        let mut next = vec![0.0; n];
        next[1..n - 1].copy_from_slice(&sol);
        self.normalize(&mut next);
        Some(next)
    }

    /// Newton step on `(η, μ)` for the equation bordered by `Σ w η² = 1`.
    fn newton_step(&self, eta: &[f64], mu: f64) -> Option<Vec<f64>> {
        let n = eta.len();
        let ke = self.stiffness_apply(eta);
        let diag: Vec<f64> = (0..n)
            .map(|i| self.pot[i] + 3.0 * eta[i] * eta[i] - mu)
            .collect();
        let chol = self.interior_matrix(&diag).cholesky()?;
        let f: Vec<f64> = (1..n - 1)
            .map(|i| -(ke[i] + self.w[i] * (self.pot[i] + eta[i] * eta[i] - mu) * eta[i]))
            .collect();
        let we: Vec<f64> = (1..n - 1).map(|i| self.w[i] * eta[i]).collect();
        let a = chol.solve(&f);
        let b = chol.solve(&we);
        let c = 0.5 * (1.0 - self.mass(eta));
        let wa: f64 = we.iter().zip(&a).map(|(x, y)| x * y).sum();
        let wb: f64 = we.iter().zip(&b).map(|(x, y)| x * y).sum();
        let dmu = (c - wa) / wb;
        let mut next = eta.to_vec();
        for j in 0..n - 2 {
            next[j + 1] += a[j] + b[j] * dmu;
        }
        next.iter().all(|x| x.is_finite()).then_some(next)
    }
}

/// Ground state by normalized backward-Euler gradient flow, polished by a
/// bordered Newton iteration.
pub fn solve_eta(eps: EpsParams, grid: &Grid1D) -> Result<EtaField> {
    let e = eps.value();
    let lambda = tf_lambda(1)?;
    if grid.half_width() < lambda + 1.0 {
        return domain(format!(
            "grid half-width {} must be at least lambda + 1 = {}",
            grid.half_width(),
            lambda + 1.0
        ));
    }
    let gs = GroundState {
        grid,
        eps2: e * e,
        pot: grid.sample(|t| t * t),
        w: grid.weights(),
    };
    let n = grid.len();
    let mut eta: Vec<f64> = grid.sample(|t| (lambda * lambda - t * t).max(0.0).sqrt() + 1e-3 * (-t * t).exp());
    eta[0] = 0.0;
    eta[n - 1] = 0.0;
    gs.normalize(&mut eta);

    let stalled = |eta: Vec<f64>, mu: f64, residual: f64, iterations: usize| Error::GroundState {
        iterations,
        residual,
        best: Box::new(EtaField {
            grid: *grid,
            values: eta,
            eps: e,
            mu,
            residual,
            iterations,
        }),
    };

    let (mut mu, mut res) = gs.residual(&eta);
    let mut iterations = 0;
    while res > BEFD_SWITCH && iterations < BEFD_MAX_STEPS {
        let Some(next) = gs.befd_step(&eta) else {
            return Err(stalled(eta, mu, res, iterations));
        };
        eta = next;
        (mu, res) = gs.residual(&eta);
        iterations += 1;
    }
    for _ in 0..NEWTON_MAX_STEPS {
        if res <= 1e-3 * ETA_TOLERANCE {
            break;
        }
        let Some(next) = gs.newton_step(&eta, mu) else {
            break;
        };
        let (mu_n, res_n) = gs.residual(&next);
        if !(res_n < res) {
            break;
        }
        eta = next;
        mu = mu_n;
        res = res_n;
        iterations += 1;
    }
    // a flow step from the clamped field restores positivity in the far tail
    let clamped: Vec<f64> = eta.iter().map(|x| x.max(0.0)).collect();
    if let Some(next) = gs.befd_step(&clamped) {
        eta = next;
    }
    (mu, res) = gs.residual(&eta);
    let positive = eta[1..n - 1].iter().all(|&x| x > 0.0);
    if res > ETA_TOLERANCE || !positive {
        return Err(stalled(eta, mu, res, iterations));
    }
    Ok(EtaField {
        grid: *grid,
        values: eta,
        eps: e,
        mu,
        residual: res,
        iterations,
    })
}

/// `F_{ε,β}` with `κ = η²`, `A = η⁴/ε²`, `B = βη⁴/ε²` scaled by `scale`.
fn weighted_functional(eta: &EtaField, beta: f64, scale: f64) -> TwoFieldFunctional {
    let e2 = eta.eps * eta.eps;
    let eta2: Vec<f64> = eta.values.iter().map(|x| x * x).collect();
    let kappa = eta2.iter().map(|x| scale * x).collect();
    let well = eta2.iter().map(|x| scale * x * x / e2).collect();
    let coupling = eta2.iter().map(|x| scale * beta * x * x / e2).collect();
    TwoFieldFunctional::weighted(&eta.grid, kappa, well, coupling)
}

/// Discrete `F_{ε,β}(v, φ)` on the grid of `eta`.
pub fn feb_energy(pair: &ProfilePair, beta: f64, eta: &EtaField) -> Result<EnergyBreakdown> {
    if !(beta >= 0.0) {
        return domain(format!("beta must be nonnegative, got {beta}"));
    }
    let f = weighted_functional(eta, beta, 1.0);
    f.check(&pair.v, &pair.phi)?;
    Ok(f.energy(&pair.v, &pair.phi))
}

/// `(∫η²v² − 1, ∫η²v² cos φ − (α₁ − α₂))`.
pub fn mass_residuals(pair: &ProfilePair, eta: &EtaField, constraints: MassConstraints) -> Result<(f64, f64)> {
    check_fields(pair, eta)?;
    let g = &eta.grid;
    let (mut m1, mut m2) = (0.0, 0.0);
    for i in 0..g.len() {
        let d = g.weight(i) * (eta.values[i] * pair.v[i]).powi(2);
        m1 += d;
        m2 += d * pair.phi[i].cos();
    }
    Ok((m1 - 1.0, m2 - constraints.difference()))
}

fn check_fields(pair: &ProfilePair, eta: &EtaField) -> Result<()> {
    if pair.v.len() != eta.len() || pair.phi.len() != eta.len() {
        return Err(Error::Structural(format!(
            "field lengths v={}, phi={} do not match the ground-state grid size {}",
            pair.v.len(),
            pair.phi.len(),
            eta.len()
        )));
    }
    Ok(())
}

/// Rescales `v` so that `∫η²v² = 1`.
pub fn normalize_mass(pair: &mut ProfilePair, eta: &EtaField) -> Result<()> {
    check_fields(pair, eta)?;
    let g = &eta.grid;
    let m = g.integrate(&pair.v.iter().zip(&eta.values).map(|(v, e)| (v * e).powi(2)).collect::<Vec<_>>());
    if !(m > 0.0) {
        return Err(Error::Degenerate("zero mass cannot be normalized".into()));
    }
    let s = m.sqrt();
    pair.v.iter_mut().for_each(|v| *v /= s);
    Ok(())
}

/// Coupled energy `E_ε(u₁) + E_ε(u₂) + (1+β)/(2ε²) ∫ u₁²u₂²`.
pub fn coupled_energy(u1: &[f64], u2: &[f64], beta: f64, eps: f64, grid: &Grid1D) -> f64 {
    let cross: f64 = (0..grid.len()).map(|i| grid.weight(i) * (u1[i] * u2[i]).powi(2)).sum();
    gp_energy(u1, eps, grid) + gp_energy(u2, eps, grid) + (1.0 + beta) / (2.0 * eps * eps) * cross
}

/// `u₁ = η v cos(φ/2)`, `u₂ = η v sin(φ/2)`.
pub fn components(pair: &ProfilePair, eta: &EtaField) -> Result<(Vec<f64>, Vec<f64>)> {
    check_fields(pair, eta)?;
    let mut u1 = Vec::with_capacity(eta.len());
    let mut u2 = Vec::with_capacity(eta.len());
    for i in 0..eta.len() {
        let a = eta.values[i] * pair.v[i];
        let (s, c) = (0.5 * pair.phi[i]).sin_cos();
        u1.push(a * c);
        u2.push(a * s);
    }
    Ok((u1, u2))
}

/// `|E_ε(u₁, u₂) − F_{ε,β}(v, φ) − E_ε(η_ε)|` with the same discretization
/// for all three energies. The continuum identity uses `∫η²v² = 1`; see
/// [`normalize_mass`].
pub fn lm_decomposition_residual(pair: &ProfilePair, beta: f64, eta: &EtaField) -> Result<f64> {
    let (u1, u2) = components(pair, eta)?;
    let coupled = coupled_energy(&u1, &u2, beta, eta.eps, &eta.grid);
    let f = feb_energy(pair, beta, eta)?.total;
    Ok((coupled - f - eta.energy()).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassConstraints {
    alpha1: f64,
    alpha2: f64,
}

impl MassConstraints {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(alpha1 > 0.0 && alpha2 > 0.0 && (alpha1 + alpha2 - 1.0).abs() <= 1e-12) {
            return domain(format!(
                "masses must be positive and sum to 1, got {alpha1} + {alpha2}"
            ));
        }
        Ok(Self { alpha1, alpha2 })
    }

    /// `(α, 1 − α)`.
    pub fn split(alpha1: f64) -> Result<Self> {
        Self::new(alpha1, 1.0 - alpha1)
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn difference(&self) -> f64 {
        self.alpha1 - self.alpha2
    }

    fn symmetric(&self) -> bool {
        self.alpha1 == self.alpha2
    }
}

/// Location `t₀` of the single jump of φ from 0 to π with `∫ρ cos φ = α₁ − α₂`.
pub fn interface_location(constraints: MassConstraints) -> Result<f64> {
    if constraints.symmetric() {
        return Ok(0.0);
    }
    let l = tf_lambda(1)?;
    let mass = |t: f64| l * l * (t + l) - (t.powi(3) + l.powi(3)) / 3.0;
    Ok(bisect(|t| mass(t) - constraints.alpha1, -l, l, 1e-15))
}

#[derive(Debug, Clone)]
pub struct FebConfig {
    /// Grid nodes per healing length: `h ≤ ε / points_per_eps`.
    pub points_per_eps: f64,
    /// `M = λ + margin`.
    pub margin: f64,
    pub grad_tol: f64,
    /// Cap per penalty round. Outside the cloud `v` is pushed up by the mass
    /// multiplier against curvature of order `η⁴`, so inner solves may stop
    /// at the cap with only those tail variables unconverged.
    pub max_inner_iter: usize,
    /// Initial penalty weight of both constraints.
    pub penalty: f64,
    pub penalty_growth: f64,
    pub stages: usize,
    /// Multiplier updates allowed after the last stage.
    pub extra_updates: usize,
    pub mass_tol: f64,
    /// Settings of the surface-tension solve behind the limit energy and the initial pair.
    pub profile: SolverConfig,
    pub warm_start: bool,
}

impl Default for FebConfig {
    fn default() -> Self {
        Self {
            points_per_eps: 10.0,
            margin: 2.0,
            grad_tol: 1e-10,
            max_inner_iter: 200,
            penalty: 10.0,
            penalty_growth: 10.0,
            stages: 4,
            extra_updates: 60,
            mass_tol: 1e-7,
            profile: SolverConfig::default(),
            warm_start: true,
        }
    }
}

impl FebConfig {
    fn validate(&self) -> Result<()> {
        if !(self.points_per_eps >= 10.0) {
            return domain(format!(
                "at least 10 grid points per eps are needed, got {}",
                self.points_per_eps
            ));
        }
        if !(self.margin >= 1.0) {
            return domain(format!("margin must be at least 1, got {}", self.margin));
        }
        if !(self.penalty > 0.0 && self.penalty_growth >= 1.0 && self.stages >= 1) {
            return domain("penalty schedule needs a positive weight, growth >= 1 and at least one stage");
        }
        if !(self.grad_tol > 0.0 && self.mass_tol > 0.0) {
            return domain("tolerances must be positive");
        }
        Ok(())
    }

    pub fn grid_for(&self, eps: f64) -> Result<Grid1D> {
        eta_grid(self.margin, eps / self.points_per_eps)
    }
}

#[derive(Debug, Clone)]
pub struct GammaRow {
    pub eps: f64,
    pub beta: f64,
    pub alpha1: f64,
    /// `ε F_{ε,β}` at the constrained minimizer.
    pub scaled_energy: f64,
    /// `σ̄_β ρ(t₀)^{3/2}`.
    pub limit_energy: f64,
    /// `scaled_energy − limit_energy`.
    pub gap: f64,
    pub mass_res_1: f64,
    pub mass_res_2: f64,
    pub interface: f64,
    pub sigma_bar: f64,
    /// `ε F_{ε,β}` of the mass-normalized rescaled optimal profile.
    pub recovery_energy: f64,
    pub multipliers: [f64; 2],
    pub iterations: usize,
    /// Projected-gradient max-norm at the end of the last inner solve.
    pub inner_grad_norm: f64,
    pub profile: ProfilePair,
    pub eta: EtaField,
}

impl GammaRow {
    pub fn relative_gap(&self) -> f64 {
        self.gap.abs() / self.limit_energy
    }
}

/// Augmented Lagrangian `ε F − Σ y_k c_k + ½ Σ ρ_k c_k²`.
struct AugLag<'a> {
    f: &'a TwoFieldFunctional,
    /// `w_i η_i²`.
    weta: Vec<f64>,
    target: f64,
    y: [f64; 2],
    rho: f64,
}

impl AugLag<'_> {
    fn constraints(&self, v: &[f64], phi: &[f64]) -> [f64; 2] {
        let (mut c1, mut c2) = (0.0, 0.0);
        for i in 0..v.len() {
            let d = self.weta[i] * v[i] * v[i];
            c1 += d;
            c2 += d * phi[i].cos();
        }
        [c1 - 1.0, c2 - self.target]
    }

    /// Interleaved constraint gradients.
    fn constraint_gradients(&self, v: &[f64], phi: &[f64]) -> [Vec<f64>; 2] {
        let n = v.len();
        let mut g1 = vec![0.0; 2 * n];
        let mut g2 = vec![0.0; 2 * n];
        for i in 0..n {
            let w = self.weta[i];
            let (s, c) = phi[i].sin_cos();
            g1[2 * i] = 2.0 * w * v[i];
            g2[2 * i] = 2.0 * w * v[i] * c;
            g2[2 * i + 1] = -w * v[i] * v[i] * s;
        }
        [g1, g2]
    }

    fn weights(&self, c: [f64; 2]) -> [f64; 2] {
        [self.rho * c[0] - self.y[0], self.rho * c[1] - self.y[1]]
    }
}

impl Problem for AugLag<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        let (v, p) = split(x);
        let c = self.constraints(&v, &p);
        self.f.energy(&v, &p).total - self.y[0] * c[0] - self.y[1] * c[1]
            + 0.5 * self.rho * (c[0] * c[0] + c[1] * c[1])
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (v, p) = split(x);
        let n = v.len();
        let mut gv = vec![0.0; n];
        let mut gp = vec![0.0; n];
        self.f.gradient(&v, &p, &mut gv, &mut gp);
        let mut g = interleave(&gv, &gp);
        let k = self.weights(self.constraints(&v, &p));
        let [g1, g2] = self.constraint_gradients(&v, &p);
        for j in 0..2 * n {
            g[j] += k[0] * g1[j] + k[1] * g2[j];
        }
        g
    }

    fn curvature(&self, x: &[f64]) -> Curvature {
        let (v, p) = split(x);
        let mut banded = self.f.hessian(&v, &p);
        let k = self.weights(self.constraints(&v, &p));
        for i in 0..v.len() {
            let w = self.weta[i];
            let (s, c) = p[i].sin_cos();
            banded.add(2 * i, 2 * i, 2.0 * w * (k[0] + k[1] * c));
            banded.add(2 * i, 2 * i + 1, -2.0 * k[1] * w * v[i] * s);
            banded.add(2 * i + 1, 2 * i + 1, -k[1] * w * v[i] * v[i] * c);
        }
        let r = self.rho.sqrt();
        let low_rank = self
            .constraint_gradients(&v, &p)
            .into_iter()
            .map(|g| g.into_iter().map(|x| r * x).collect())
            .collect();
        Curvature { banded, low_rank }
    }
}

fn feb_bounds(n: usize) -> Bounds {
    let mut lower = vec![0.0; 2 * n];
    let mut upper: Vec<f64> = (0..2 * n).map(|k| if k % 2 == 0 { 10.0 } else { PI }).collect();
    lower[0] = 1.0;
    upper[0] = 1.0;
    upper[1] = 0.0;
    lower[2 * n - 2] = 1.0;
    upper[2 * n - 2] = 1.0;
    lower[2 * n - 1] = PI;
    Bounds { lower, upper }
}

/// Optimal profile rescaled to width ε about `t₀`, mass-normalized.
pub fn recovery_pair(profile: &SurfaceTensionResult, eta: &EtaField, t0: f64) -> Result<ProfilePair> {
    let src = &profile.grid;
    let g = &eta.grid;
    let s = |t: f64| (t - t0) / eta.eps;
    let mut pair = ProfilePair {
        v: g.sample(|t| src.interpolate(&profile.profile.v, s(t))),
        phi: g.sample(|t| src.interpolate(&profile.profile.phi, s(t))),
    };
    let n = g.len();
    pair.v[0] = 1.0;
    pair.v[n - 1] = 1.0;
    pair.phi[0] = 0.0;
    pair.phi[n - 1] = PI;
    normalize_mass(&mut pair, eta)?;
    pair.v[0] = 1.0;
    pair.v[n - 1] = 1.0;
    Ok(pair)
}

fn check_beta(beta: f64) -> Result<BetaParams> {
    BetaParams::new(beta)
}

/// Constrained minimum of `ε F_{ε,β}` and its limit counterpart.
pub fn minimize_feb(
    eps: EpsParams,
    beta: f64,
    constraints: MassConstraints,
    config: &FebConfig,
) -> Result<GammaRow> {
    config.validate()?;
    let b = check_beta(beta)?;
    let profile = profile_solver::minimize(&config.profile, b)?;
    minimize_with(eps, &profile, constraints, config, [0.0; 2])
}

fn minimize_with(
    eps: EpsParams,
    profile: &SurfaceTensionResult,
    constraints: MassConstraints,
    config: &FebConfig,
    y0: [f64; 2],
) -> Result<GammaRow> {
    let e = eps.value();
    let beta = profile.beta;
    let grid = config.grid_for(e)?;
    let eta = solve_eta(eps, &grid)?;
    let t0 = interface_location(constraints)?;
    let lambda = tf_lambda(1)?;
    let limit_energy = profile.sigma * (lambda * lambda - t0 * t0).max(0.0).powf(1.5);
    let start = recovery_pair(profile, &eta, t0)?;

    let f = weighted_functional(&eta, beta, e);
    let recovery_energy = f.energy(&start.v, &start.phi).total;
    let weta: Vec<f64> = (0..grid.len())
        .map(|i| grid.weight(i) * eta.values[i] * eta.values[i])
        .collect();
    let bounds = feb_bounds(grid.len());
    let opts = Options {
        method: Method::ProjectedNewton,
        grad_tol: config.grad_tol,
        max_iter: config.max_inner_iter,
        line_search: LineSearch::default(),
        record_trace: false,
    };
    let mut al = AugLag {
        f: &f,
        weta,
        target: constraints.difference(),
        y: y0,
        rho: config.penalty,
    };
    let mut x = interleave(&start.v, &start.phi);
    let mut iterations = 0;
    let mut inner_grad_norm = f64::NAN;
    let mut c = [0.0; 2];
    let total = config.stages + config.extra_updates;
    for round in 0..total {
        let out = optim::minimize(&al, x, &bounds, &opts);
        iterations += out.iterations;
        inner_grad_norm = out.grad_norm;
        x = out.x;
        let (v, p) = split(&x);
        c = al.constraints(&v, &p);
        let done = round + 1 >= config.stages && c[0].abs().max(c[1].abs()) <= config.mass_tol;
        if done {
            break;
        }
        al.y = [al.y[0] - al.rho * c[0], al.y[1] - al.rho * c[1]];
        if round + 1 < config.stages {
            al.rho *= config.penalty_growth;
        }
    }
    let (v, phi) = split(&x);
    let pair = ProfilePair { v, phi };
    let scaled_energy = f.energy(&pair.v, &pair.phi).total;
    let row = GammaRow {
        eps: e,
        beta,
        alpha1: constraints.alpha1(),
        scaled_energy,
        limit_energy,
        gap: scaled_energy - limit_energy,
        mass_res_1: c[0].abs(),
        mass_res_2: c[1].abs(),
        interface: t0,
        sigma_bar: profile.sigma,
        recovery_energy,
        multipliers: al.y,
        iterations,
        inner_grad_norm,
        profile: pair,
        eta,
    };
    if row.mass_res_1.max(row.mass_res_2) > config.mass_tol {
        return Err(Error::Constraint {
            eps: e,
            mass_res_1: row.mass_res_1,
            mass_res_2: row.mass_res_2,
            best: Box::new(row),
        });
    }
    Ok(row)
}

/// One constrained minimization per ε, in the given decreasing order.
///
/// With `warm_start` each row starts from the multipliers of the previous
/// one and the rows run sequentially; otherwise they run in parallel.
pub fn gamma_table(
    eps_list: &[f64],
    beta: f64,
    constraints: MassConstraints,
    config: &FebConfig,
) -> Result<Vec<GammaRow>> {
    config.validate()?;
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return domain("eps list must be strictly decreasing");
    }
    if let Some(e) = eps_list.iter().find(|&&e| !(e > 0.0 && e <= 0.1)) {
        return domain(format!("eps values must lie in (0, 0.1], got {e}"));
    }
    let eps: Vec<EpsParams> = eps_list.iter().map(|&e| EpsParams::new(e)).collect::<Result<_>>()?;
    let profile = profile_solver::minimize(&config.profile, check_beta(beta)?)?;
    if config.warm_start {
        let mut rows: Vec<GammaRow> = Vec::with_capacity(eps.len());
        for e in eps {
            let y0 = rows.last().map_or([0.0; 2], |r| r.multipliers);
            rows.push(minimize_with(e, &profile, constraints, config, y0)?);
        }
        Ok(rows)
    } else {
        eps.par_iter()
            .map(|&e| minimize_with(e, &profile, constraints, config, [0.0; 2]))
            .collect()
    }
}

pub const GAMMA_CSV_HEADER: &str = "eps,beta,scaled_energy,limit_energy,gap,mass_res_1,mass_res_2";

pub fn gamma_rows_table(rows: &[GammaRow]) -> Table {
    let mut t = Table::new(GAMMA_CSV_HEADER);
    for r in rows {
        t.push(vec![
            r.eps.into(),
            r.beta.into(),
            r.scaled_energy.into(),
            r.limit_energy.into(),
            r.gap.into(),
            r.mass_res_1.into(),
            r.mass_res_2.into(),
        ]);
    }
    t
}

pub fn write_gamma_csv(out: &mut impl Write, rows: &[GammaRow]) -> std::io::Result<()> {
    gamma_rows_table(rows).write_csv(out)
}

/// Profile dump of a row with the ground state as extra column.
pub fn write_row_profile(out: &mut impl Write, row: &GammaRow) -> Result<()> {
    profile_solver::write_profile(out, &row.eta.grid, &row.profile, Some(("eta", &row.eta.values)))
}
