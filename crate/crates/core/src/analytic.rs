//! Closed-form quantities for the one-dimensional transition problem:
//! tanh half-profiles, the plateau test pair and its optimized energy,
//! the auxiliary function Ψ with its minimizer, the dip threshold m*, and
//! rigorous lower/upper bounds on the surface tension.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::error::{domain, Result};
use crate::grid::Grid1D;
use crate::profile_solver::ProfilePair;

/// Surface tension in the strong-segregation limit, `2√2/3`.
pub const SIGMA_INFINITY: f64 = 2.0 * SQRT_2 / 3.0;

/// Constant `C` of the bound `σ̄_β ≤ C √β`, measured from the stretched
/// constant-phase construction ([`small_beta_stretch`] applied to
/// `v ≡ 1, φ ≡ π/2`). The continuum value of that construction is
/// `π²/16 + 3/8 = 0.991850…`; the discrete evaluation on the β-adapted
/// grid agrees to better than 1e-4 at β ∈ {1e-4, 1e-3, 1e-2}.
pub const SMALL_BETA_CONSTANT: f64 = 0.9919;

/// Intercomponent/intracomponent coupling excess β (the coupling ratio is `1 + β`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BetaParams(f64);

impl BetaParams {
    pub fn new(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta.is_finite() {
            Ok(Self(beta))
        } else {
            domain(format!("beta must be positive, got {beta}"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Plateau depth `m` and half-width `T` of the test pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestPairParams {
    pub m: f64,
    pub half_width: f64,
}

impl TestPairParams {
    pub fn new(m: f64, half_width: f64) -> Result<Self> {
        check_unit(m)?;
        if !(half_width >= 0.0) || !half_width.is_finite() {
            return domain(format!("plateau half-width must be >= 0, got {half_width}"));
        }
        Ok(Self { m, half_width })
    }
}

/// Bracket `lower ≤ σ̄_β ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaBracket {
    pub lower: f64,
    pub upper: f64,
}

impl SigmaBracket {
    pub fn contains(&self, sigma: f64, slack: f64) -> bool {
        sigma >= self.lower - slack && sigma <= self.upper + slack
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiMinimum {
    pub m_bar: f64,
    pub psi_min: f64,
}

fn check_unit(m: f64) -> Result<()> {
    if (0.0..=1.0).contains(&m) {
        Ok(())
    } else {
        domain(format!("m must lie in [0, 1], got {m}"))
    }
}

/// Optimal half-line profile `tanh(t/√2 + artanh m)` starting from `v(0) = m`.
pub fn tanh_profile(m: f64, t: f64) -> Result<f64> {
    check_unit(m)?;
    if m == 1.0 {
        return Ok(1.0);
    }
    Ok((t * FRAC_1_SQRT_2 + m.atanh()).tanh())
}

/// Minimal cost `∫₀^∞ v'² + W(v)` of connecting `v(0) = m` to 1,
/// `√2 (2/3 − m + m³/3)`.
pub fn mm_transition_cost(m: f64) -> Result<f64> {
    check_unit(m)?;
    Ok(SQRT_2 * (1.0 - m) * (1.0 - m) * (2.0 + m) / 3.0)
}

// (1 - m²)² + β m⁴ / 4
fn plateau_stiffness(m: f64, beta: f64) -> f64 {
    let a = 1.0 - m * m;
    a * a + 0.25 * beta * m.powi(4)
}

/// Energy of the plateau test pair: tanh shoulders, constant `v = m` on
/// `[-T, T]` and a linear phase ramp from 0 to π across the plateau.
pub fn test_pair_energy(params: TestPairParams, beta: BetaParams) -> Result<f64> {
    let TestPairParams { m, half_width: t } = params;
    let beta = beta.value();
    let shoulders = mm_transition_cost(m)?;
    if m == 0.0 {
        return Ok(shoulders + 0.5 * t);
    }
    if t == 0.0 {
        return domain("test pair with m > 0 needs a positive plateau half-width");
    }
    let a = 1.0 - m * m;
    Ok(shoulders + 0.5 * t * a * a + m * m * PI * PI / (16.0 * t) + beta * m.powi(4) * t / 8.0)
}

/// Plateau half-width `T_m` minimizing [`test_pair_energy`] at fixed `m`.
/// Returns 0 for `m = 0`, where the plateau degenerates.
pub fn optimal_plateau_halfwidth(m: f64, beta: BetaParams) -> Result<f64> {
    check_unit(m)?;
    if m == 0.0 {
        return Ok(0.0);
    }
    Ok(m * PI / (2.0 * SQRT_2 * plateau_stiffness(m, beta.value()).sqrt()))
}

/// Optimized test-pair energy `√2(2/3 − m + m³/3) + (√2/4) m π ((1−m²)² + βm⁴/4)^{1/2}`.
pub fn optimized_test_pair_energy(m: f64, beta: BetaParams) -> Result<f64> {
    Ok(mm_transition_cost(m)?
        + 0.25 * SQRT_2 * m * PI * plateau_stiffness(m, beta.value()).sqrt())
}

/// `Ψ(m) = (m³/3 − m) + (π/4) m ((1−m²)² + βm⁴/4)^{1/2}`, so that the
/// optimized test-pair energy equals `√2 (Ψ(m) + 2/3)`.
pub fn psi(m: f64, beta: BetaParams) -> Result<f64> {
    check_unit(m)?;
    Ok(psi_unchecked(m, beta.value()))
}

fn psi_unchecked(m: f64, beta: f64) -> f64 {
    m * m * m / 3.0 - m + 0.25 * PI * m * plateau_stiffness(m, beta).sqrt()
}

const PSI_PRESCAN: usize = 256;
const GOLDEN_TOL: f64 = 1e-10;

/// Global minimizer of Ψ on `[0, 1]`.
///
/// Ψ is not known to be unimodal, so a uniform pre-scan picks the best cell
/// and golden-section search refines inside its two neighbouring cells.
pub fn psi_minimizer(beta: BetaParams) -> PsiMinimum {
    let b = beta.value();
    let f = |m: f64| psi_unchecked(m, b);
    let step = 1.0 / PSI_PRESCAN as f64;
    let best = (0..=PSI_PRESCAN)
        .min_by(|&i, &j| f(i as f64 * step).total_cmp(&f(j as f64 * step)))
        .unwrap_or(0);
    let lo = (best as f64 - 1.0).max(0.0) * step;
    let hi = ((best as f64 + 1.0) * step).min(1.0);
    let m_bar = golden_section(f, lo, hi, GOLDEN_TOL);
    PsiMinimum {
        m_bar,
        psi_min: f(m_bar),
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Bisection for the root of a continuous function with a sign change on `[lo, hi]`.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dip threshold `m*(β)`: the root in `(0, 1)` of `m³/3 − m = Ψ(m̄)`.
/// Minimizers of the transition energy satisfy `inf v ≥ m*`.
pub fn m_star(beta: BetaParams) -> f64 {
    let target = psi_minimizer(beta).psi_min;
    bisect(
        |m| m * m * m / 3.0 - m - target,
        1e-12,
        1.0 - 1e-12,
        1e-12,
    )
}

/// Rigorous bracket on `σ̄_β`.
///
/// The lower bound minimizes `√2(2/3 − m + m³(1/3 + √β/(2√2)))` over
/// `m ∈ [0, 1]` (critical point of the cubic); the upper bound is the best
/// test-pair energy `√2(Ψ(m̄) + 2/3)`.
pub fn sigma_bracket(beta: BetaParams) -> SigmaBracket {
    let b = beta.value();
    let a = 1.0 / 3.0 + b.sqrt() / (2.0 * SQRT_2);
    let m = (1.0 / (3.0 * a)).sqrt().min(1.0);
    let lower = SQRT_2 * (2.0 / 3.0 - m + a * m * m * m);
    let upper = SQRT_2 * (psi_minimizer(beta).psi_min + 2.0 / 3.0);
    SigmaBracket { lower, upper }
}

/// Stretched pair of the vanishing-β construction.
///
/// Keeps `v` and `φ` on `[-1/√β, 1/√β]`, ramps φ linearly to 0 on
/// `[-2/√β, -1/√β]` and to π on `[1/√β, 2/√β]`, and is constant beyond.
/// The grid must reach `2/√β`; the sampled `v` is pinned to 1 at `±L`.
pub fn small_beta_stretch(
    source_v: impl Fn(f64) -> f64,
    source_phi: impl Fn(f64) -> f64,
    beta: BetaParams,
    grid: &Grid1D,
) -> Result<ProfilePair> {
    let b = beta.value();
    let s = b.sqrt();
    let inner = 1.0 / s;
    if grid.half_width() < 2.0 * inner {
        return domain(format!(
            "grid half-width {} does not reach the stretch endpoint 2/sqrt(beta) = {}",
            grid.half_width(),
            2.0 * inner
        ));
    }
    let phi_left = source_phi(-inner);
    let phi_right = source_phi(inner);
    let phi = |t: f64| {
        if t <= -2.0 * inner {
            0.0
        } else if t < -inner {
            s * phi_left * (t + inner) + phi_left
        } else if t <= inner {
            source_phi(t)
        } else if t < 2.0 * inner {
            s * (PI - phi_right) * (t - inner) + phi_right
        } else {
            PI
        }
    };
    let mut v = grid.sample(&source_v);
    let n = v.len();
    v[0] = 1.0;
    v[n - 1] = 1.0;
    let mut phi = grid.sample(phi);
    phi[0] = 0.0;
    phi[n - 1] = PI;
    Ok(ProfilePair { v, phi })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta(b: f64) -> BetaParams {
        BetaParams::new(b).unwrap()
    }

    #[test]
    fn tanh_profile_values() {
        assert_eq!(tanh_profile(0.0, 0.0).unwrap(), 0.0);
        assert!((tanh_profile(0.5, 0.0).unwrap() - 0.5).abs() < 1e-14);
        let far = tanh_profile(0.0, 10.0).unwrap();
        assert!((far - (10.0 / SQRT_2).tanh()).abs() < 1e-15);
        // 1 - tanh(10/√2) = 1.44e-6
        assert!(1.0 - far < 1.5e-6);
        assert_eq!(tanh_profile(1.0, -3.0).unwrap(), 1.0);
        assert!(tanh_profile(1.5, 0.0).is_err());
        assert!(tanh_profile(-0.1, 0.0).is_err());
    }

    #[test]
    fn tanh_profile_stays_in_upper_range() {
        for &m in &[0.0, 0.2, 0.9] {
            for k in 0..50 {
                let v = tanh_profile(m, k as f64 * 0.3).unwrap();
                assert!(v >= m - 1e-15 && v < 1.0);
            }
        }
    }

    #[test]
    fn transition_cost_values() {
        assert_eq!(mm_transition_cost(1.0).unwrap(), 0.0);
        assert!((mm_transition_cost(0.0).unwrap() - 0.942809041582063).abs() < 1e-12);
        let expected = SQRT_2 * (2.0 / 3.0 - 0.5 + 0.125 / 3.0);
        assert!((mm_transition_cost(0.5).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.294628).abs() < 1e-6);
        assert!(mm_transition_cost(2.0).is_err());
        let mut prev = f64::INFINITY;
        for k in 0..=100 {
            let c = mm_transition_cost(k as f64 / 100.0).unwrap();
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn test_pair_energy_cases() {
        let e = test_pair_energy(TestPairParams::new(1.0, 1.0).unwrap(), beta(3.0)).unwrap();
        assert!((e - (PI * PI / 16.0 + 3.0 / 8.0)).abs() < 1e-14);
        let e0 = test_pair_energy(TestPairParams::new(0.0, 0.0).unwrap(), beta(5.0)).unwrap();
        assert!((e0 - SIGMA_INFINITY).abs() < 1e-15);
        assert!(test_pair_energy(TestPairParams::new(0.3, 0.0).unwrap(), beta(1.0)).is_err());
    }

    #[test]
    fn plateau_halfwidth_is_stationary() {
        assert_eq!(optimal_plateau_halfwidth(0.0, beta(1.0)).unwrap(), 0.0);
        assert!(
            (optimal_plateau_halfwidth(1.0, beta(4.0)).unwrap() - PI / (2.0 * SQRT_2)).abs()
                < 1e-15
        );
        for &(m, b) in &[(0.2, 0.5), (0.5, 1.0), (0.8, 30.0), (0.05, 1e4)] {
            let t = optimal_plateau_halfwidth(m, beta(b)).unwrap();
            let e = |tt: f64| test_pair_energy(TestPairParams::new(m, tt).unwrap(), beta(b)).unwrap();
            let dt = 1e-5 * t;
            let slope = (e(t + dt) - e(t - dt)) / (2.0 * dt);
            assert!(slope.abs() <= 1e-8 * e(t) / t, "m={m} slope={slope}");
            // equals the optimized closed form
            let closed = optimized_test_pair_energy(m, beta(b)).unwrap();
            assert!((e(t) - closed).abs() <= 1e-12 * closed);
            assert!((closed - SQRT_2 * (psi(m, beta(b)).unwrap() + 2.0 / 3.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn psi_at_origin() {
        assert_eq!(psi(0.0, beta(1.0)).unwrap(), 0.0);
        let h = 1e-6;
        for &b in &[1e-3, 1.0, 1e3] {
            let d = psi(h, beta(b)).unwrap() / h;
            assert!((d - (PI / 4.0 - 1.0)).abs() < 1e-4);
        }
        let v = psi(1.0, beta(4.0)).unwrap();
        assert!((v - (PI / 4.0 - 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn psi_minimizer_beats_grid_scan() {
        for &b in &[1e-4, 1e-2, 0.5, 1.0, 10.0, 1e3, 1e5] {
            let PsiMinimum { m_bar, psi_min } = psi_minimizer(beta(b));
            assert!(m_bar > 0.0 && m_bar < 1.0);
            assert!(psi_min < 0.0 && psi_min > -2.0 / 3.0);
            let scan = (0..=10_000)
                .map(|k| psi(k as f64 / 1e4, beta(b)).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(psi_min <= scan + 1e-15, "beta={b}");
        }
    }

    #[test]
    fn m_star_root() {
        let mut prev = 1.0;
        for &b in &[1e-3, 1.0, 100.0, 1e4] {
            let ms = m_star(beta(b));
            assert!(ms > 0.0 && ms < 1.0);
            let target = psi_minimizer(beta(b)).psi_min;
            assert!((ms.powi(3) / 3.0 - ms - target).abs() < 1e-10);
            assert!(ms < prev);
            prev = ms;
        }
        assert!(m_star(beta(1.0)) > m_star(beta(100.0)));
    }

    #[test]
    fn bracket_values() {
        let br = sigma_bracket(beta(1.0));
        let a = 1.0 / 3.0 + 1.0 / (2.0 * SQRT_2);
        let m = (1.0 / (3.0 * a)).sqrt();
        let lower = SQRT_2 * (2.0 / 3.0 - m + a * m.powi(3));
        assert!((br.lower - lower).abs() < 1e-15);
        assert!((br.lower - 0.286).abs() < 5e-4);
        for k in -8..=10 {
            let b = 10f64.powf(k as f64 * 0.5);
            let br = sigma_bracket(beta(b));
            assert!(br.lower <= br.upper);
            assert!(br.upper <= SIGMA_INFINITY);
        }
    }

    #[test]
    fn bracket_upper_gap_rate() {
        // gap of the upper bound: -√2 Ψ(m̄) ~ c β^{-1/4}
        let gap = |b: f64| SIGMA_INFINITY - sigma_bracket(beta(b)).upper;
        let r = (gap(1e8) / gap(1e6)).ln() / (1e8f64 / 1e6).ln();
        assert!((r + 0.25).abs() < 0.01, "rate {r}");
    }

    #[test]
    fn stretch_endpoints() {
        let b = beta(0.01);
        let grid = Grid1D::with_max_spacing(40.0, 0.01).unwrap();
        let pair = small_beta_stretch(
            |_| 1.0,
            |t| (PI / 2.0 * (t + 1.0)).clamp(0.0, PI),
            b,
            &grid,
        )
        .unwrap();
        for (i, t) in grid.nodes().into_iter().enumerate() {
            if t >= 20.0 - 1e-12 {
                assert_eq!(pair.phi[i], PI);
            }
            if t <= -20.0 + 1e-12 {
                assert_eq!(pair.phi[i], 0.0);
            }
        }
        assert!(pair.phi.windows(2).all(|w| w[1] >= w[0]));
        let short = Grid1D::with_max_spacing(10.0, 0.01).unwrap();
        assert!(small_beta_stretch(|_| 1.0, |_| 1.0, b, &short).is_err());
    }
}
