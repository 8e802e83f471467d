//! Discrete minimization of the transition energy `G_β` with diagnostics.
//!
//! The energy is discretized by [`crate::functional`]; minimization runs over
//! interleaved `(v, φ)` with `v ∈ [0, 1]`, `φ ∈ [0, π]` and the boundary
//! values `v(±L) = 1`, `φ(−L) = 0`, `φ(L) = π` pinned.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use crate::analytic::{self, psi_minimizer, BetaParams, TestPairParams};
use crate::banded::SymBanded;
use crate::error::{domain, Error, Result};
use crate::functional::{interleave, split, EnergyBreakdown, TwoFieldFunctional};
use crate::grid::Grid1D;
use crate::optim::{self, Bounds, Curvature, Options, Problem};

pub use crate::optim::{LineSearch, Method};

/// Amplitude `v` and phase angle `φ` sampled on grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePair {
    pub v: Vec<f64>,
    pub phi: Vec<f64>,
}

impl ProfilePair {
    /// Test pair: plateau `v = m` with φ linear from 0 to π on `[-T, T]`,
    /// tanh tails outside. Built from the right half and mirrored, so it is
    /// exactly symmetric.
    pub fn test_pair(params: TestPairParams, grid: &Grid1D) -> Result<Self> {
        let (m, t_half) = (params.m, params.half_width);
        if m > 0.0 && t_half == 0.0 {
            return domain("a test pair with m > 0 needs a positive plateau half-width");
        }
        let n = grid.len();
        let c = grid.center();
        let mut v = vec![0.0; n];
        let mut phi = vec![0.0; n];
        for k in 0..=c {
            let t = grid.node(c + k);
            let (vk, pk) = if t <= t_half {
                let p = if t_half > 0.0 {
                    FRAC_PI_2 * (1.0 + t / t_half)
                } else {
                    FRAC_PI_2
                };
                (m, p)
            } else {
                (analytic::tanh_profile(m, t - t_half)?, PI)
            };
            v[c + k] = vk;
            phi[c + k] = pk.min(PI);
            v[c - k] = vk;
            phi[c - k] = PI - phi[c + k];
        }
        phi[c] = FRAC_PI_2;
        let mut pair = Self { v, phi };
        pair.pin_boundary();
        Ok(pair)
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    fn pin_boundary(&mut self) {
        let n = self.len();
        self.v[0] = 1.0;
        self.v[n - 1] = 1.0;
        self.phi[0] = 0.0;
        self.phi[n - 1] = PI;
    }

    fn check_len(&self, grid: &Grid1D) -> Result<()> {
        if self.v.len() != grid.len() || self.phi.len() != grid.len() {
            return Err(Error::Structural(format!(
                "profile lengths v={}, phi={} do not match grid size {}",
                self.v.len(),
                self.phi.len(),
                grid.len()
            )));
        }
        Ok(())
    }

    /// Checks lengths, box constraints and pinned boundary values.
    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        self.check_len(grid)?;
        if let Some(x) = self.v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return domain(format!("v = {x} outside [0, 1]"));
        }
        if let Some(x) = self.phi.iter().find(|x| !(0.0..=PI).contains(*x)) {
            return domain(format!("phi = {x} outside [0, pi]"));
        }
        let n = self.len();
        if self.v[0] != 1.0 || self.v[n - 1] != 1.0 || self.phi[0] != 0.0 || self.phi[n - 1] != PI {
            return domain("boundary values must be v = 1, phi(-L) = 0, phi(L) = pi");
        }
        Ok(())
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return domain(format!("beta must be finite and nonnegative, got {beta}"));
    }
    Ok(())
}

/// Discrete `G_β`; `β = 0` is allowed.
pub fn discrete_energy(pair: &ProfilePair, beta: f64, grid: &Grid1D) -> Result<EnergyBreakdown> {
    check_beta(beta)?;
    pair.check_len(grid)?;
    Ok(TwoFieldFunctional::transition(grid, beta).energy(&pair.v, &pair.phi))
}

/// Exact gradient of [`discrete_energy`] in the interior nodes; the pinned
/// boundary entries are zero.
pub fn discrete_gradient(pair: &ProfilePair, beta: f64, grid: &Grid1D) -> Result<(Vec<f64>, Vec<f64>)> {
    check_beta(beta)?;
    pair.check_len(grid)?;
    let n = grid.len();
    let mut gv = vec![0.0; n];
    let mut gp = vec![0.0; n];
    TwoFieldFunctional::transition(grid, beta).gradient(&pair.v, &pair.phi, &mut gv, &mut gp);
    for g in [&mut gv, &mut gp] {
        g[0] = 0.0;
        g[n - 1] = 0.0;
    }
    Ok((gv, gp))
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// β-adapted truncation and spacing.
    Auto,
    /// β-adapted truncation with the given maximal spacing.
    Spacing(f64),
    Fixed(Grid1D),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Initialization {
    /// Test pair at `(m̄, T_{m̄})`.
    TestPair,
    Pair(ProfilePair),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub grid: GridSpec,
    /// Max-norm of the projected gradient at convergence.
    pub grad_tol: f64,
    pub max_iter: usize,
    pub init: Initialization,
    pub method: Method,
    pub line_search: LineSearch,
    /// Run [`alternating_refine`] after the main descent.
    pub refine: bool,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::Auto,
            grad_tol: 1e-8,
            max_iter: 200_000,
            init: Initialization::TestPair,
            method: Method::ProjectedNewton,
            line_search: LineSearch::default(),
            refine: false,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn grid_for(&self, beta: f64) -> Result<Grid1D> {
        match &self.grid {
            GridSpec::Auto => Grid1D::for_beta(beta),
            GridSpec::Spacing(h) => Grid1D::with_max_spacing(Grid1D::half_width_for_beta(beta), *h),
            GridSpec::Fixed(g) => Ok(*g),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return domain(format!("gradient tolerance must be positive, got {}", self.grad_tol));
        }
        let ls = &self.line_search;
        if !(ls.armijo > 0.0 && ls.armijo < 1.0 && ls.shrink > 0.0 && ls.shrink < 1.0) {
            return domain("line-search constants must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SurfaceTensionResult {
    pub beta: f64,
    /// Minimized discrete energy, the estimate of σ̄_β.
    pub sigma: f64,
    pub energy: EnergyBreakdown,
    pub inf_v: f64,
    pub argmin_v: f64,
    pub el_residual_v: f64,
    pub el_residual_phi: f64,
    pub equipartition_l2: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub grid: Grid1D,
    pub profile: ProfilePair,
    /// Energy after every accepted step, when requested.
    pub energy_trace: Vec<f64>,
}

struct Transition<'a> {
    f: &'a TwoFieldFunctional,
}

impl Problem for Transition<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        let (v, p) = split(x);
        self.f.energy(&v, &p).total
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (v, p) = split(x);
        let mut gv = vec![0.0; v.len()];
        let mut gp = vec![0.0; v.len()];
        self.f.gradient(&v, &p, &mut gv, &mut gp);
        interleave(&gv, &gp)
    }

    fn curvature(&self, x: &[f64]) -> Curvature {
        let (v, p) = split(x);
        Curvature {
            banded: self.f.hessian(&v, &p),
            low_rank: Vec::new(),
        }
    }
}

fn transition_bounds(n: usize) -> Bounds {
    let mut lower = vec![0.0; 2 * n];
    let mut upper: Vec<f64> = (0..2 * n).map(|k| if k % 2 == 0 { 1.0 } else { PI }).collect();
    lower[0] = 1.0;
    lower[2 * n - 2] = 1.0;
    upper[1] = 0.0;
    lower[2 * n - 1] = PI;
    Bounds { lower, upper }
}

/// Minimizes the discrete `G_β` and reports σ̄_β with diagnostics.
///
/// Hitting the iteration cap yields [`Error::NotConverged`] carrying the
/// best iterate.
pub fn minimize(config: &SolverConfig, beta: BetaParams) -> Result<SurfaceTensionResult> {
    config.validate()?;
    let b = beta.value();
    let grid = config.grid_for(b)?;
    let start = match &config.init {
        Initialization::TestPair => {
            let pm = psi_minimizer(beta);
            let t = analytic::optimal_plateau_halfwidth(pm.m_bar, beta)?;
            ProfilePair::test_pair(TestPairParams::new(pm.m_bar, t)?, &grid)?
        }
        Initialization::Pair(p) => {
            p.validate(&grid)?;
            p.clone()
        }
    };
    let f = TwoFieldFunctional::transition(&grid, b);
    let bounds = transition_bounds(grid.len());
    let opts = Options {
        method: config.method,
        grad_tol: config.grad_tol,
        max_iter: config.max_iter,
        line_search: config.line_search,
        record_trace: config.record_trace,
    };
    let problem = Transition { f: &f };
    let out = optim::minimize(&problem, interleave(&start.v, &start.phi), &bounds, &opts);
    let (v, phi) = split(&out.x);
    let mut profile = ProfilePair { v, phi };
    let mut trace = out.trace;
    let mut grad_norm = out.grad_norm;
    let mut converged = out.converged;
    if config.refine && out.converged {
        let (refined, energies) = refine_with(&f, &grid, profile.clone())?;
        if config.record_trace {
            trace.extend_from_slice(&energies[1..]);
        }
        profile = refined;
        let x = interleave(&profile.v, &profile.phi);
        grad_norm = optim::projected_grad_norm(&x, &problem.gradient(&x), &bounds);
        converged = grad_norm <= config.grad_tol;
    }
    let result = summarize(b, grid, profile, out.iterations, grad_norm, converged, trace)?;
    if !result.converged {
        return Err(Error::NotConverged {
            iterations: result.iterations,
            grad_norm: result.grad_norm,
            best: Box::new(result),
        });
    }
    Ok(result)
}

fn summarize(
    beta: f64,
    grid: Grid1D,
    profile: ProfilePair,
    iterations: usize,
    grad_norm: f64,
    converged: bool,
    energy_trace: Vec<f64>,
) -> Result<SurfaceTensionResult> {
    let energy = discrete_energy(&profile, beta, &grid)?;
    let (el_residual_v, el_residual_phi) = el_residual(&profile, beta, &grid)?;
    let equipartition_l2 = equipartition_residual(&profile, beta, &grid)?;
    let diag = diagnostics(&profile, &grid)?;
    Ok(SurfaceTensionResult {
        beta,
        sigma: energy.total,
        energy,
        inf_v: diag.inf_v,
        argmin_v: diag.argmin_v,
        el_residual_v,
        el_residual_phi,
        equipartition_l2,
        iterations,
        grad_norm,
        converged,
        grid,
        profile,
        energy_trace,
    })
}

/// `v`-subproblem at fixed φ in the variable `w = v²`.
struct AmplitudeStep<'a> {
    f: &'a TwoFieldFunctional,
    phi: &'a [f64],
}

impl Problem for AmplitudeStep<'_> {
    fn value(&self, w: &[f64]) -> f64 {
        let v: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
        self.f.energy(&v, self.phi).total
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let v: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
        let mut gv = vec![0.0; v.len()];
        let mut gp = vec![0.0; v.len()];
        self.f.gradient(&v, self.phi, &mut gv, &mut gp);
        gv.iter().zip(&v).map(|(g, vi)| g / (2.0 * vi)).collect()
    }

    fn curvature(&self, w: &[f64]) -> Curvature {
        let n = w.len();
        let v: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
        let mut gv = vec![0.0; n];
        let mut gp = vec![0.0; n];
        self.f.gradient(&v, self.phi, &mut gv, &mut gp);
        let full = self.f.hessian(&v, self.phi);
        let mut t = SymBanded::zeros(n, 1);
        for i in 0..n {
            t.add(i, i, full.get(2 * i, 2 * i) / (4.0 * w[i]) - gv[i] / (4.0 * w[i] * v[i]));
            if i > 0 {
                t.add(i, i - 1, full.get(2 * i, 2 * i - 2) / (4.0 * v[i] * v[i - 1]));
            }
        }
        Curvature {
            banded: t,
            low_rank: Vec::new(),
        }
    }
}

/// φ-subproblem at fixed `v`.
struct PhaseStep<'a> {
    f: &'a TwoFieldFunctional,
    v: &'a [f64],
}

impl Problem for PhaseStep<'_> {
    fn value(&self, phi: &[f64]) -> f64 {
        self.f.energy(self.v, phi).total
    }

    fn gradient(&self, phi: &[f64]) -> Vec<f64> {
        let mut gv = vec![0.0; phi.len()];
        let mut gp = vec![0.0; phi.len()];
        self.f.gradient(self.v, phi, &mut gv, &mut gp);
        gp
    }

    fn curvature(&self, phi: &[f64]) -> Curvature {
        let n = phi.len();
        let full = self.f.hessian(self.v, phi);
        let mut t = SymBanded::zeros(n, 1);
        for i in 0..n {
            t.add(i, i, full.get(2 * i + 1, 2 * i + 1));
            if i > 0 {
                t.add(i, i - 1, full.get(2 * i + 1, 2 * i - 1));
            }
        }
        Curvature {
            banded: t,
            low_rank: Vec::new(),
        }
    }
}

const REFINE_MIN_V: f64 = 1e-8;
const REFINE_SWEEPS: usize = 100;

fn refine_with(f: &TwoFieldFunctional, grid: &Grid1D, mut pair: ProfilePair) -> Result<(ProfilePair, Vec<f64>)> {
    let n = grid.len();
    let min_v = pair.v.iter().copied().fold(f64::INFINITY, f64::min);
    if min_v <= REFINE_MIN_V {
        return Err(Error::Degenerate(format!(
            "min v = {min_v:e} is too close to 0 for the w = v^2 substitution; tighten the main solve first"
        )));
    }
    let sub = Options {
        method: Method::ProjectedNewton,
        grad_tol: 1e-12,
        max_iter: 200,
        line_search: LineSearch::default(),
        record_trace: false,
    };
    let mut w_bounds = Bounds {
        lower: vec![REFINE_MIN_V * REFINE_MIN_V; n],
        upper: vec![1.0; n],
    };
    w_bounds.lower[0] = 1.0;
    w_bounds.lower[n - 1] = 1.0;
    let mut p_bounds = Bounds {
        lower: vec![0.0; n],
        upper: vec![PI; n],
    };
    p_bounds.upper[0] = 0.0;
    p_bounds.lower[n - 1] = PI;

    let mut energy = f.energy(&pair.v, &pair.phi).total;
    let mut energies = vec![energy];
    for _ in 0..REFINE_SWEEPS {
        let sweep_start = energy;

        let w0: Vec<f64> = pair.v.iter().map(|x| x * x).collect();
        let out = optim::minimize(&AmplitudeStep { f, phi: &pair.phi }, w0, &w_bounds, &sub);
        if out.value < energy {
            pair.v = out.x.iter().map(|x| x.sqrt()).collect();
            energy = f.energy(&pair.v, &pair.phi).total;
        }
        energies.push(energy);

        let out = optim::minimize(&PhaseStep { f, v: &pair.v }, pair.phi.clone(), &p_bounds, &sub);
        if out.value < energy {
            pair.phi = out.x;
            energy = f.energy(&pair.v, &pair.phi).total;
        }
        energies.push(energy);

        if sweep_start - energy <= 1e-15 * (1.0 + energy.abs()) {
            break;
        }
    }
    Ok((pair, energies))
}

/// Alternating minimization over `w = v²` at fixed φ and over φ at fixed `v`.
///
/// Refuses pairs whose amplitude touches 0.
pub fn alternating_refine(pair: &ProfilePair, beta: BetaParams, grid: &Grid1D) -> Result<ProfilePair> {
    alternating_refine_traced(pair, beta, grid).map(|(p, _)| p)
}

/// As [`alternating_refine`], also returning the energy after every half-step
/// (first entry: input energy).
pub fn alternating_refine_traced(
    pair: &ProfilePair,
    beta: BetaParams,
    grid: &Grid1D,
) -> Result<(ProfilePair, Vec<f64>)> {
    pair.validate(grid)?;
    let f = TwoFieldFunctional::transition(grid, beta.value());
    refine_with(&f, grid, pair.clone())
}

/// Max-norm over interior nodes of the central-difference residuals of the
/// Euler-Lagrange equations
/// `−v'' − (1−v²)v + ¼vφ'² + (β/2)v³sin²φ` and `−(v²φ')' + βv⁴ sinφ cosφ`.
pub fn el_residual(pair: &ProfilePair, beta: f64, grid: &Grid1D) -> Result<(f64, f64)> {
    check_beta(beta)?;
    pair.check_len(grid)?;
    let h = grid.spacing();
    let (v, p) = (&pair.v, &pair.phi);
    let (mut rv, mut rp) = (0.0_f64, 0.0_f64);
    for i in 1..grid.len() - 1 {
        let vi = v[i];
        let d1v = (v[i + 1] - v[i - 1]) / (2.0 * h);
        let d2v = (v[i + 1] - 2.0 * vi + v[i - 1]) / (h * h);
        let d1p = (p[i + 1] - p[i - 1]) / (2.0 * h);
        let d2p = (p[i + 1] - 2.0 * p[i] + p[i - 1]) / (h * h);
        let (s, c) = p[i].sin_cos();
        let res_v = -d2v - (1.0 - vi * vi) * vi + 0.25 * vi * d1p * d1p + 0.5 * beta * vi.powi(3) * s * s;
        let res_p = -(vi * vi * d2p + 2.0 * vi * d1v * d1p) + beta * vi.powi(4) * s * c;
        rv = rv.max(res_v.abs());
        rp = rp.max(res_p.abs());
    }
    Ok((rv, rp))
}

/// Discrete L² norm over interior nodes of
/// `v'² + ¼v²φ'² − W(v) − ¼βv⁴sin²φ`, derivatives by forward differences.
pub fn equipartition_residual(pair: &ProfilePair, beta: f64, grid: &Grid1D) -> Result<f64> {
    check_beta(beta)?;
    pair.check_len(grid)?;
    let h = grid.spacing();
    let (v, p) = (&pair.v, &pair.phi);
    let mut acc = 0.0;
    for i in 1..grid.len() - 1 {
        let dv = (v[i + 1] - v[i]) / h;
        let dp = (p[i + 1] - p[i]) / h;
        let v2 = v[i] * v[i];
        let s = p[i].sin();
        let r = dv * dv + 0.25 * v2 * dp * dp - 0.5 * (1.0 - v2) * (1.0 - v2) - 0.25 * beta * v2 * v2 * s * s;
        acc += r * r;
    }
    Ok((h * acc).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileDiagnostics {
    pub inf_v: f64,
    /// Node location of the minimum of `v`.
    pub argmin_v: f64,
    pub phi_monotone: bool,
    /// `max |v(t) − v(−t)|` about the φ = π/2 crossing.
    pub v_symmetric_error: f64,
    /// `max |φ(t) + φ(−t) − π|` about the φ = π/2 crossing.
    pub phi_antisymmetric_error: f64,
}

const MONOTONE_SLACK: f64 = 1e-10;

/// Fractional node index of the first crossing of φ = π/2.
fn half_crossing(phi: &[f64]) -> Option<f64> {
    let k = phi.iter().position(|&x| x >= FRAC_PI_2)?;
    if phi[k] == FRAC_PI_2 || k == 0 {
        return Some(k as f64);
    }
    let (a, b) = (phi[k - 1], phi[k]);
    Some((k - 1) as f64 + (FRAC_PI_2 - a) / (b - a))
}

/// Linear interpolation at a fractional index, clamped to the end values.
fn sample_at(values: &[f64], x: f64) -> f64 {
    let last = values.len() - 1;
    if x <= 0.0 {
        return values[0];
    }
    if x >= last as f64 {
        return values[last];
    }
    let i = x.floor() as usize;
    let frac = x - i as f64;
    if frac == 0.0 {
        values[i]
    } else {
        values[i] + frac * (values[i + 1] - values[i])
    }
}

pub fn diagnostics(pair: &ProfilePair, grid: &Grid1D) -> Result<ProfileDiagnostics> {
    pair.check_len(grid)?;
    let (imin, inf_v) = pair
        .v
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, f64::NAN));
    let phi_monotone = pair.phi.windows(2).all(|w| w[1] >= w[0] - MONOTONE_SLACK);
    let (mut ev, mut ep) = (f64::INFINITY, f64::INFINITY);
    if let Some(p) = half_crossing(&pair.phi) {
        let last = (grid.len() - 1) as f64;
        let reach = p.min(last - p).floor() as usize;
        ev = 0.0;
        ep = 0.0;
        for k in 1..=reach {
            let (r, l) = (p + k as f64, p - k as f64);
            ev = ev.max((sample_at(&pair.v, r) - sample_at(&pair.v, l)).abs());
            ep = ep.max((sample_at(&pair.phi, r) + sample_at(&pair.phi, l) - PI).abs());
        }
    }
    Ok(ProfileDiagnostics {
        inf_v,
        argmin_v: grid.node(imin),
        phi_monotone,
        v_symmetric_error: ev,
        phi_antisymmetric_error: ep,
    })
}

/// Reflects one half of the pair across the φ = π/2 crossing, recentred at
/// `t = 0`, and returns the cheaper of the two reflections.
pub fn symmetrize(pair: &ProfilePair, beta: f64, grid: &Grid1D) -> Result<ProfilePair> {
    check_beta(beta)?;
    pair.check_len(grid)?;
    let p = half_crossing(&pair.phi)
        .ok_or_else(|| Error::Domain("phi never reaches pi/2; nothing to symmetrize".into()))?;
    let n = grid.len();
    let c = grid.center();
    let reflect = |sign: f64| {
        let mut v = vec![0.0; n];
        let mut phi = vec![0.0; n];
        for k in 0..=c {
            let x = p + sign * k as f64;
            let (vk, pk) = (sample_at(&pair.v, x), sample_at(&pair.phi, x));
            let pk = if sign > 0.0 { pk } else { PI - pk };
            v[c + k] = vk;
            phi[c + k] = pk;
            v[c - k] = vk;
            phi[c - k] = PI - pk;
        }
        phi[c] = FRAC_PI_2;
        ProfilePair { v, phi }
    };
    let right = reflect(1.0);
    let left = reflect(-1.0);
    let f = TwoFieldFunctional::transition(grid, beta);
    let er = f.energy(&right.v, &right.phi).total;
    let el = f.energy(&left.v, &left.phi).total;
    Ok(if er <= el { right } else { left })
}

/// Discrete minimum of `∫₀^40 v'² + W(v)` with `v(0) = m`, free at the far end.
pub fn half_line_cost(m: f64, spacing: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&m) {
        return domain(format!("m must lie in [0, 1], got {m}"));
    }
    if !(spacing > 0.0 && spacing < 1.0) {
        return domain(format!("spacing must lie in (0, 1), got {spacing}"));
    }
    let length = 40.0;
    let cells = (length / spacing).ceil() as usize;
    let h = length / cells as f64;
    let n = cells + 1;
    let problem = HalfLine { h, n };
    let x0: Vec<f64> = (0..n)
        .map(|i| (m + (1.0 - m) * (i as f64 * h) / 3.0).min(1.0))
        .collect();
    let mut lower = vec![0.0; n];
    let mut upper = vec![1.0; n];
    lower[0] = m;
    upper[0] = m;
    let opts = Options {
        method: Method::ProjectedNewton,
        grad_tol: 1e-12,
        max_iter: 1000,
        line_search: LineSearch::default(),
        record_trace: false,
    };
    let out = optim::minimize(&problem, x0, &Bounds { lower, upper }, &opts);
    if !out.converged {
        return Err(Error::Stalled {
            what: "half-line transition",
            detail: format!("projected gradient {:.3e}", out.grad_norm),
        });
    }
    Ok(out.value)
}

struct HalfLine {
    h: f64,
    n: usize,
}

impl HalfLine {
    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5 * self.h
        } else {
            self.h
        }
    }
}

impl Problem for HalfLine {
    fn value(&self, x: &[f64]) -> f64 {
        let kin: f64 = x.windows(2).map(|w| (w[1] - w[0]).powi(2) / self.h).sum();
        let pot: f64 = x
            .iter()
            .enumerate()
            .map(|(i, v)| self.weight(i) * 0.5 * (1.0 - v * v).powi(2))
            .sum();
        kin + pot
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| -2.0 * self.weight(i) * v * (1.0 - v * v))
            .collect();
        for c in 0..self.n - 1 {
            let d = 2.0 * (x[c + 1] - x[c]) / self.h;
            g[c] -= d;
            g[c + 1] += d;
        }
        g
    }

    fn curvature(&self, x: &[f64]) -> Curvature {
        let mut b = SymBanded::zeros(self.n, 1);
        for (i, v) in x.iter().enumerate() {
            b.add(i, i, self.weight(i) * (6.0 * v * v - 2.0));
        }
        for c in 0..self.n - 1 {
            b.add(c, c, 2.0 / self.h);
            b.add(c + 1, c + 1, 2.0 / self.h);
            b.add(c + 1, c, -2.0 / self.h);
        }
        Curvature {
            banded: b,
            low_rank: Vec::new(),
        }
    }
}

/// Writes `# t v phi[ extra]` followed by one node per line.
pub fn write_profile(
    out: &mut impl Write,
    grid: &Grid1D,
    pair: &ProfilePair,
    extra: Option<(&str, &[f64])>,
) -> Result<()> {
    pair.check_len(grid)?;
    if let Some((_, col)) = extra {
        if col.len() != grid.len() {
            return Err(Error::Structural(format!(
                "extra column has {} entries, grid has {}",
                col.len(),
                grid.len()
            )));
        }
    }
    match extra {
        Some((name, _)) => writeln!(out, "# t v phi {name}")?,
        None => writeln!(out, "# t v phi")?,
    }
    for i in 0..grid.len() {
        write!(out, "{:.16e} {:.16e} {:.16e}", grid.node(i), pair.v[i], pair.phi[i])?;
        if let Some((_, col)) = extra {
            write!(out, " {:.16e}", col[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}
