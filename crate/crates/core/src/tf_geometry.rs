//! Thomas-Fermi cloud for the harmonic trap `V = |x|²` and the radial
//! versus non-radial comparison of the limit perimeter energy.
//!
//! The density is `ρ = (λ² − |x|²)₊` with λ fixed by `∫ρ = 1`. An interface
//! through `x` costs `σ̄ ρ(x)^{3/2}` per unit area; with `σ̄ = 2√2/3` this is
//! the strong-coupling limit.

use std::f64::consts::PI;
use std::io::Write;

use quadrature::double_exponential;

use crate::analytic::{bisect, SIGMA_INFINITY};
use crate::emit::Table;
use crate::error::{domain, Result};

/// Trapping potential. Only the isotropic harmonic trap is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TFModel {
    dim: usize,
    lambda: f64,
    potential: Potential,
}

impl TFModel {
    /// Normalized cloud in dimension `n ∈ {1, 2, 3}`.
    pub fn harmonic(dim: usize) -> Result<Self> {
        Ok(Self {
            dim,
            lambda: tf_lambda(dim)?,
            potential: Potential::Harmonic,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn potential(&self) -> Potential {
        self.potential
    }

    /// Radius of the support, equal to λ.
    pub fn radius(&self) -> f64 {
        self.lambda
    }

    /// `H^{n−1}(S^{n−1})`: 2, 2π, 4π.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.dim)
    }

    /// `H^{n−1}(S^{n−1}) λ^{n+2}`, the common prefactor of radial masses.
    fn radial_scale(&self) -> f64 {
        self.sphere_area() * self.lambda.powi(self.dim as i32 + 2)
    }
}

fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// λ with `∫(λ² − |x|²)₊ dx = 1`.
pub fn tf_lambda(dim: usize) -> Result<f64> {
    match dim {
        1 => Ok(0.75f64.powf(1.0 / 3.0)),
        2 => Ok((2.0 / PI).powf(0.25)),
        3 => Ok((15.0 / (8.0 * PI)).powf(0.2)),
        _ => domain(format!("dimension must be 1, 2 or 3, got {dim}")),
    }
}

/// `ρ(r) = (λ² − r²)₊`.
pub fn tf_density(r: f64, model: &TFModel) -> f64 {
    (model.lambda * model.lambda - r * r).max(0.0)
}

/// Mass of the ball of radius `λR`:
/// `H^{n−1}(S^{n−1}) λ^{n+2} (Rⁿ/n − R^{n+2}/(n+2))`.
pub fn ball_mass(r: f64, model: &TFModel) -> f64 {
    let n = model.dim as i32;
    let nf = n as f64;
    model.radial_scale() * (r.powi(n) / nf - r.powi(n + 2) / (nf + 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSplit {
    pub alpha: f64,
    /// Normalized radius `R_α ∈ [0, 1]`.
    pub r_alpha: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return domain(format!("alpha must lie in [0, 1], got {alpha}"));
    }
    Ok(())
}

/// `R_α` with `ball_mass(R_α) = α`.
pub fn radius_for_mass(alpha: f64, model: &TFModel) -> Result<RadialSplit> {
    check_alpha(alpha)?;
    let r_alpha = if alpha == 0.0 {
        0.0
    } else if alpha == 1.0 {
        1.0
    } else {
        bisect(|r| ball_mass(r, model) - alpha, 0.0, 1.0, 1e-15)
    };
    Ok(RadialSplit { alpha, r_alpha })
}

/// Limit energy of the ball carrying mass α:
/// `f(α) = (2√2/3) H^{n−1}(S^{n−1}) λ^{n+2} R_α^{n−1} (1 − R_α²)^{3/2}`, `f(0) = f(1) = 0`.
pub fn radial_energy_f(alpha: f64, model: &TFModel) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 0.0 || alpha == 1.0 {
        return Ok(0.0);
    }
    let r = radius_for_mass(alpha, model)?.r_alpha;
    Ok(SIGMA_INFINITY * model.radial_scale() * r.powi(model.dim as i32 - 1) * (1.0 - r * r).powf(1.5))
}

/// Closed-form `f''(α)` on `(0, 1)`, from `R_α' = (H^{n−1}λ^{n+2}(1 − R_α²)R_α^{n−1})^{−1}`:
/// `f'' = −2√2/(3 H^{n−1} λ^{n+2}) (1 − R²)^{−5/2} R^{−(n+1)} ((n − 1)(1 − R²) + 3R²)`.
pub fn radial_energy_f_second(alpha: f64, model: &TFModel) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("f'' is defined on (0, 1), got alpha = {alpha}"));
    }
    let r = radius_for_mass(alpha, model)?.r_alpha;
    let n = model.dim as f64;
    let q = 1.0 - r * r;
    Ok(-SIGMA_INFINITY / model.radial_scale()
        * q.powf(-2.5)
        * r.powf(-(n + 1.0))
        * ((n - 1.0) * q + 3.0 * r * r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcavityReport {
    pub n_grid: usize,
    /// Most negative central second difference of `f`.
    pub min_second_difference: f64,
    /// Largest central second difference; concavity needs it below 0.
    pub max_second_difference: f64,
    /// Largest closed-form `f''` on the same grid.
    pub max_closed_form: f64,
    pub pass: bool,
}

/// Second differences of `f` on `α_i = i/(N+1)`, `i = 1..=N`, with `f(0) = f(1) = 0`
/// at the ends, cross-checked against the closed-form `f''`.
pub fn concavity_report(model: &TFModel, n_grid: usize) -> Result<ConcavityReport> {
    if n_grid < 16 {
        return domain(format!("concavity grid needs at least 16 points, got {n_grid}"));
    }
    let step = 1.0 / (n_grid + 1) as f64;
    let values = (0..=n_grid + 1)
        .map(|i| radial_energy_f((i as f64 * step).min(1.0), model))
        .collect::<Result<Vec<f64>>>()?;
    let (mut lo, mut hi, mut closed) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for i in 1..=n_grid {
        let d2 = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (step * step);
        lo = lo.min(d2);
        hi = hi.max(d2);
        closed = closed.max(radial_energy_f_second(i as f64 * step, model)?);
    }
    Ok(ConcavityReport {
        n_grid,
        min_second_difference: lo,
        max_second_difference: hi,
        max_closed_form: closed,
        pass: hi < 0.0 && closed < 0.0,
    })
}

/// Limit energy of the radial annulus holding the mass between `inner` and
/// `inner + alpha`: `f(inner) + f(inner + alpha)`.
pub fn annulus_energy(inner: f64, alpha: f64, model: &TFModel) -> Result<f64> {
    if !(inner >= 0.0 && alpha >= 0.0 && inner + alpha <= 1.0 + 1e-15) {
        return domain(format!("annulus masses inner = {inner}, alpha = {alpha} do not fit in [0, 1]"));
    }
    Ok(radial_energy_f(inner, model)? + radial_energy_f((inner + alpha).min(1.0), model)?)
}

const QUAD_TOL: f64 = 1e-13;

/// Limit energy of the explicit non-radial competitor carrying mass α.
///
/// * n = 1: the half-line `{x ≤ t_α}`, energy `(2√2/3)(λ² − t_α²)^{3/2}`.
/// * n = 2: the half-plane `{x ≤ d_α}`, energy `(2√2/3) ∫ ρ^{3/2}` along the chord.
/// * n = 3: two half-balls meeting on two flat half-disks through the centre,
///   energy `(2√2/3)(2π/5)λ⁵` for every α.
pub fn nonradial_candidate_energy(alpha: f64, model: &TFModel) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("the non-radial competitor needs alpha in (0, 1), got {alpha}"));
    }
    let l = model.lambda;
    let l2 = l * l;
    match model.dim {
        1 => {
            let mass = |t: f64| l2 * (t + l) - (t.powi(3) + l.powi(3)) / 3.0;
            let t = bisect(|t| mass(t) - alpha, -l, l, 1e-15);
            Ok(SIGMA_INFINITY * (l2 - t * t).max(0.0).powf(1.5))
        }
        2 => {
            let column = |x: f64| 4.0 / 3.0 * (l2 - x * x).max(0.0).powf(1.5);
            let mass = |d: f64| double_exponential::integrate(column, -l, d, QUAD_TOL).integral;
            let d = bisect(|d| mass(d) - alpha, -l, l, 1e-14);
            let a2 = (l2 - d * d).max(0.0);
            let a = a2.sqrt();
            let chord = double_exponential::integrate(|y| (a2 - y * y).max(0.0).powf(1.5), -a, a, QUAD_TOL);
            Ok(SIGMA_INFINITY * chord.integral)
        }
        _ => Ok(SIGMA_INFINITY * 2.0 * PI / 5.0 * l.powi(5)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryBreakingReport {
    pub dim: usize,
    pub alpha: f64,
    pub r_alpha: f64,
    /// Best radial energy: `min(f(α), f(1−α))`, annuli being costlier.
    pub radial_min: f64,
    pub candidate: f64,
    /// `radial_min / candidate`.
    pub ratio: f64,
    /// Closed-form ratio at α = 1/2; `None` for other α.
    pub discriminant: Option<f64>,
    pub broken: bool,
    /// The n = 2 competitor follows an external construction rather than
    /// one carried out here.
    pub derived_from_citation: bool,
}

impl SymmetryBreakingReport {
    /// `broken` after multiplying both energies by `sigma_bar / σ̄_∞`.
    pub fn broken_with_tension(&self, sigma_bar: f64) -> bool {
        let s = sigma_bar / SIGMA_INFINITY;
        is_broken(s * self.radial_min, s * self.candidate)
    }
}

/// Radial symmetry is broken when the competitor is strictly cheaper.
pub fn is_broken(radial_min: f64, candidate: f64) -> bool {
    radial_min > candidate
}

/// Compares the radial family with the competitor at α = 1/2.
pub fn symmetry_breaking_report(model: &TFModel) -> Result<SymmetryBreakingReport> {
    symmetry_breaking_report_at(0.5, model)
}

pub fn symmetry_breaking_report_at(alpha: f64, model: &TFModel) -> Result<SymmetryBreakingReport> {
    let split = radius_for_mass(alpha, model)?;
    let radial_min = radial_energy_f(alpha, model)?.min(radial_energy_f(1.0 - alpha, model)?);
    let candidate = nonradial_candidate_energy(alpha, model)?;
    let r = split.r_alpha;
    let q = (1.0 - r * r).powf(1.5);
    let discriminant = (alpha == 0.5).then(|| match model.dim {
        1 => 2.0 * q,
        2 => 16.0 / 3.0 * r * q,
        _ => 10.0 * r * r * q,
    });
    Ok(SymmetryBreakingReport {
        dim: model.dim,
        alpha,
        r_alpha: r,
        radial_min,
        candidate,
        ratio: radial_min / candidate,
        discriminant,
        broken: is_broken(radial_min, candidate),
        derived_from_citation: model.dim == 2,
    })
}

/// Local surface tension `σ(x) = ρ(x)^{3/2} σ̄`.
pub fn sigma_x(r: f64, model: &TFModel, sigma_bar: f64) -> Result<f64> {
    if !(sigma_bar >= 0.0) {
        return domain(format!("surface tension must be nonnegative, got {sigma_bar}"));
    }
    Ok(tf_density(r, model).powf(1.5) * sigma_bar)
}

pub const TF_CSV_HEADER: &str = "dim,lambda,alpha,r_alpha,radial_min,candidate,ratio,discriminant,broken";

pub fn reports_table(reports: &[(TFModel, SymmetryBreakingReport)]) -> Table {
    let mut t = Table::new(TF_CSV_HEADER);
    for (m, r) in reports {
        t.push(vec![
            r.dim.into(),
            m.lambda.into(),
            r.alpha.into(),
            r.r_alpha.into(),
            r.radial_min.into(),
            r.candidate.into(),
            r.ratio.into(),
            r.discriminant.into(),
            r.broken.into(),
        ]);
    }
    t
}

pub fn write_reports_csv(out: &mut impl Write, reports: &[(TFModel, SymmetryBreakingReport)]) -> std::io::Result<()> {
    reports_table(reports).write_csv(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(n: usize) -> TFModel {
        TFModel::harmonic(n).unwrap()
    }

    #[test]
    fn lambda_values() {
        assert!((tf_lambda(1).unwrap() - 0.90856).abs() < 1e-5);
        assert!((tf_lambda(2).unwrap() - 0.89325).abs() < 1e-5);
        assert!((tf_lambda(3).unwrap() - 0.901925).abs() < 1e-6);
        assert!(tf_lambda(4).is_err());
        assert!(TFModel::harmonic(0).is_err());
    }

    #[test]
    fn normalization_by_quadrature() {
        for n in 1..=3 {
            let m = model(n);
            let l = m.lambda();
            let radial = |r: f64| tf_density(r, &m) * r.powi(n as i32 - 1);
            let mass = m.sphere_area() * double_exponential::integrate(radial, 0.0, l, 1e-14).integral;
            assert!((mass - 1.0).abs() < 1e-10, "n={n}: {mass}");
            assert!((ball_mass(1.0, &m) - 1.0).abs() < 1e-14);
            assert_eq!(ball_mass(0.0, &m), 0.0);
        }
    }

    #[test]
    fn density_values() {
        let m = model(2);
        let l = m.lambda();
        assert_eq!(tf_density(l, &m), 0.0);
        assert_eq!(tf_density(0.0, &m), l * l);
        assert_eq!(tf_density(2.0 * l, &m), 0.0);
        assert_eq!(m.radius(), l);
        assert_eq!(m.potential(), Potential::Harmonic);
    }

    #[test]
    fn half_mass_radii() {
        assert!((ball_mass(0.3472, &model(1)) - 0.5).abs() < 1e-3);
        assert!((ball_mass(0.6435, &model(3)) - 0.5).abs() < 1e-3);
        let r1 = radius_for_mass(0.5, &model(1)).unwrap().r_alpha;
        let r3 = radius_for_mass(0.5, &model(3)).unwrap().r_alpha;
        assert!((r1 - 0.3473).abs() < 1e-4, "{r1}");
        assert!((r3 - 0.6435).abs() < 1e-3, "{r3}");
        assert_eq!(radius_for_mass(0.0, &model(2)).unwrap().r_alpha, 0.0);
        assert_eq!(radius_for_mass(1.0, &model(2)).unwrap().r_alpha, 1.0);
        assert!(radius_for_mass(1.5, &model(2)).is_err());
    }

    #[test]
    fn mass_radius_round_trip() {
        for n in 1..=3 {
            let m = model(n);
            for i in 0..64 {
                let a = i as f64 / 63.0;
                let r = radius_for_mass(a, &m).unwrap().r_alpha;
                assert!((ball_mass(r, &m) - a).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn f_at_half_matches_displayed_forms() {
        let m1 = model(1);
        let r = radius_for_mass(0.5, &m1).unwrap().r_alpha;
        let expect = SIGMA_INFINITY * 2.0 * m1.lambda().powi(3) * (1.0 - r * r).powf(1.5);
        assert!((radial_energy_f(0.5, &m1).unwrap() - expect).abs() < 1e-14);
        let m3 = model(3);
        let r = radius_for_mass(0.5, &m3).unwrap().r_alpha;
        let expect = SIGMA_INFINITY * 4.0 * PI * m3.lambda().powi(5) * r * r * (1.0 - r * r).powf(1.5);
        assert!((radial_energy_f(0.5, &m3).unwrap() - expect).abs() < 1e-14);
        assert_eq!(radial_energy_f(0.0, &m3).unwrap(), 0.0);
        assert_eq!(radial_energy_f(1.0, &m3).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_second_derivative_matches_differences() {
        for n in 1..=3 {
            let m = model(n);
            for &a in &[0.2, 0.5, 0.8] {
                let h = 1e-4;
                let fd = (radial_energy_f(a + h, &m).unwrap() - 2.0 * radial_energy_f(a, &m).unwrap()
                    + radial_energy_f(a - h, &m).unwrap())
                    / (h * h);
                let cf = radial_energy_f_second(a, &m).unwrap();
                assert!(cf < 0.0);
                assert!((fd - cf).abs() < 1e-4 * cf.abs(), "n={n} a={a}: {fd} vs {cf}");
            }
        }
    }

    #[test]
    fn concavity_on_128_grid() {
        for n in 1..=3 {
            let rep = concavity_report(&model(n), 128).unwrap();
            assert!(rep.pass, "n={n}: {rep:?}");
            assert!(rep.min_second_difference <= rep.max_second_difference);
        }
        assert!(concavity_report(&model(1), 8).is_err());
    }

    #[test]
    fn annulus_family_maximum_is_interior() {
        for n in 1..=3 {
            let m = model(n);
            let alpha = 0.3;
            let k = 140;
            let g: Vec<f64> = (0..=k)
                .map(|i| annulus_energy(0.7 * i as f64 / k as f64, alpha, &m).unwrap())
                .collect();
            let (imax, _) = g.iter().enumerate().fold((0, f64::MIN), |b, (i, v)| if *v > b.1 { (i, *v) } else { b });
            let (imin, _) = g.iter().enumerate().fold((0, f64::MAX), |b, (i, v)| if *v < b.1 { (i, *v) } else { b });
            assert!(imax > 0 && imax < k, "n={n}");
            assert!(imin == 0 || imin == k, "n={n}");
        }
    }

    #[test]
    fn competitor_energies() {
        let m1 = model(1);
        let c = nonradial_candidate_energy(0.5, &m1).unwrap();
        assert!((c - SIGMA_INFINITY * m1.lambda().powi(3)).abs() < 1e-13);
        let m3 = model(3);
        let c3 = nonradial_candidate_energy(0.5, &m3).unwrap();
        for i in 1..=16 {
            let a = i as f64 / 17.0;
            assert_eq!(nonradial_candidate_energy(a, &m3).unwrap(), c3);
        }
        // closed form (3π/8)(λ² − d²)² of the chord integral at d = 0
        let m2 = model(2);
        let c2 = nonradial_candidate_energy(0.5, &m2).unwrap();
        assert!((c2 - SIGMA_INFINITY * 3.0 * PI / 8.0 * m2.lambda().powi(4)).abs() < 1e-10);
        assert!(nonradial_candidate_energy(0.0, &m2).is_err());
        assert!(nonradial_candidate_energy(1.0, &m1).is_err());
    }

    #[test]
    fn half_disk_wall_by_polar_quadrature() {
        let l = model(3).lambda();
        let radial = double_exponential::integrate(|s| (l * l - s * s).max(0.0).powf(1.5) * s, 0.0, l, 1e-14);
        // the angular integral over a half-disk contributes π
        let wall = PI * radial.integral;
        assert!((wall - PI * l.powi(5) / 5.0).abs() < 1e-8);
    }

    #[test]
    fn discriminants() {
        let r1 = symmetry_breaking_report(&model(1)).unwrap();
        assert!((r1.discriminant.unwrap() - 1.65).abs() < 0.02);
        assert!((r1.r_alpha - 0.35).abs() < 0.01);
        assert!((r1.ratio - r1.discriminant.unwrap()).abs() < 1e-12);
        assert!(r1.broken && !r1.derived_from_citation);
        let r3 = symmetry_breaking_report(&model(3)).unwrap();
        assert!((r3.discriminant.unwrap() - 1.86).abs() < 0.02);
        assert!((r3.r_alpha - 0.64).abs() < 0.01);
        assert!((r3.ratio - r3.discriminant.unwrap()).abs() < 1e-12);
        assert!(r3.broken);
        let r2 = symmetry_breaking_report(&model(2)).unwrap();
        assert!(r2.derived_from_citation && r2.broken);
        assert!((r2.ratio - r2.discriminant.unwrap()).abs() < 1e-9);
        assert!(symmetry_breaking_report_at(0.3, &model(1)).unwrap().discriminant.is_none());
    }

    #[test]
    fn flag_logic() {
        assert!(!is_broken(1.0, 2.0));
        assert!(is_broken(2.0, 1.0));
        assert!(!is_broken(1.0, 1.0));
    }

    #[test]
    fn local_tension() {
        let m = model(3);
        let l = m.lambda();
        assert_eq!(sigma_x(l, &m, 1.0).unwrap(), 0.0);
        assert!((sigma_x(0.0, &m, SIGMA_INFINITY).unwrap() - SIGMA_INFINITY * l.powi(3)).abs() < 1e-15);
        let a = sigma_x(0.3, &m, 0.4).unwrap();
        assert_eq!(sigma_x(0.3, &m, 0.8).unwrap(), 2.0 * a);
        assert!(sigma_x(0.3, &m, -1.0).is_err());
    }

    #[test]
    fn csv_rows() {
        let rows: Vec<_> = (1..=3)
            .map(|n| (model(n), symmetry_breaking_report(&model(n)).unwrap()))
            .collect();
        let mut buf = Vec::new();
        write_reports_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().next().unwrap(), TF_CSV_HEADER);
    }

    proptest! {
        #[test]
        fn tension_scaling_keeps_flag(s in 1e-6f64..10.0, n in 1usize..=3) {
            let rep = symmetry_breaking_report(&model(n)).unwrap();
            prop_assert_eq!(rep.broken_with_tension(s), rep.broken);
        }

        #[test]
        fn bisection_radius_inverts_mass(a in 0.0f64..=1.0, n in 1usize..=3) {
            let m = model(n);
            let r = radius_for_mass(a, &m).unwrap().r_alpha;
            prop_assert!((ball_mass(r, &m) - a).abs() < 1e-10);
        }
    }
}
