//! β sweeps and the two asymptotic regimes of the surface tension.

use std::io::Write;

use rayon::prelude::*;

use crate::analytic::{sigma_bracket, BetaParams, SIGMA_INFINITY, SMALL_BETA_CONSTANT};
use crate::emit::Table;
use crate::error::{domain, Error, Result};
use crate::profile_solver::{minimize, SolverConfig, SurfaceTensionResult};

/// Slack allowed between a converged σ and its analytic bracket.
pub const BRACKET_SLACK: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    pub sigma: f64,
    pub inf_v: f64,
    pub lower: f64,
    pub upper: f64,
    pub el_res_v: f64,
    pub el_res_phi: f64,
    pub equip_l2: f64,
    pub iters: usize,
}

impl SweepRow {
    pub fn from_result(r: &SurfaceTensionResult) -> Result<Self> {
        let br = sigma_bracket(BetaParams::new(r.beta)?);
        Ok(Self {
            beta: r.beta,
            sigma: r.sigma,
            inf_v: r.inf_v,
            lower: br.lower,
            upper: br.upper,
            el_res_v: r.el_residual_v,
            el_res_phi: r.el_residual_phi,
            equip_l2: r.equipartition_l2,
            iters: r.iterations,
        })
    }

    pub fn within_bracket(&self) -> bool {
        self.sigma >= self.lower - BRACKET_SLACK && self.sigma <= self.upper + BRACKET_SLACK
    }
}

/// Rows sorted ascending in β.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTable {
    rows: Vec<SweepRow>,
}

pub const SWEEP_CSV_HEADER: &str = "beta,sigma,inf_v,lower,upper,el_res_v,el_res_phi,equip_l2,iters";

impl SweepTable {
    pub fn from_rows(mut rows: Vec<SweepRow>) -> Self {
        rows.sort_by(|a, b| a.beta.total_cmp(&b.beta));
        Self { rows }
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(SWEEP_CSV_HEADER);
        for r in &self.rows {
            t.push(vec![
                r.beta.into(),
                r.sigma.into(),
                r.inf_v.into(),
                r.lower.into(),
                r.upper.into(),
                r.el_res_v.into(),
                r.el_res_phi.into(),
                r.equip_l2.into(),
                r.iters.into(),
            ]);
        }
        t
    }

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        self.to_table().write_csv(out)
    }
}

/// Independent solves for every β, in input order.
pub fn solve_all(betas: &[f64], config: &SolverConfig) -> Vec<Result<SurfaceTensionResult>> {
    betas
        .par_iter()
        .map(|&b| BetaParams::new(b).and_then(|bp| minimize(config, bp)))
        .collect()
}

/// One converged solve per β. If any solve fails, [`Error::Sweep`] carries
/// the surviving rows and the failed β values.
pub fn beta_sweep(betas: &[f64], config: &SolverConfig) -> Result<SweepTable> {
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
        return domain(format!("every beta must be positive, got {b}"));
    }
    if betas.windows(2).any(|w| w[1] <= w[0]) {
        return domain("betas must be strictly ascending");
    }
    let mut rows = Vec::with_capacity(betas.len());
    let mut failed = Vec::new();
    for (b, r) in betas.iter().zip(solve_all(betas, config)) {
        match r {
            Ok(r) => rows.push(SweepRow::from_result(&r)?),
            Err(_) => failed.push(*b),
        }
    }
    let table = SweepTable::from_rows(rows);
    if failed.is_empty() {
        Ok(table)
    } else {
        Err(Error::Sweep {
            partial: table,
            failed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub n_points: usize,
}

/// Ordinary least squares of `log y` on `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::Structural(format!(
            "{} abscissae but {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return domain(format!("a slope fit needs at least 3 points, got {}", xs.len()));
    }
    if let Some(v) = xs.iter().chain(ys).find(|v| !(**v > 0.0 && v.is_finite())) {
        return domain(format!("log-log fit needs positive data, got {v}"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return domain("log-log fit needs at least two distinct abscissae");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        stderr: (ssr / (n - 2.0) / sxx).sqrt(),
        n_points: lx.len(),
    })
}

/// Slopes accepted as the exponent −1/4.
pub const QUARTER_SLOPE_RANGE: (f64, f64) = (-0.30, -0.20);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeBetaReport {
    /// Fit of `2√2/3 − σ` against β.
    pub gap_slope: SlopeFit,
    /// Fit of `inf v` against β.
    pub dip_slope: SlopeFit,
    pub pass: bool,
}

/// Rate of approach to the strong-coupling limit, from rows with β ≥ 100.
pub fn large_beta_report(table: &SweepTable) -> Result<LargeBetaReport> {
    let rows: Vec<&SweepRow> = table.rows().iter().filter(|r| r.beta >= 100.0).collect();
    if rows.len() < 3 {
        return domain(format!("large-beta report needs 3 rows with beta >= 100, got {}", rows.len()));
    }
    let span = rows[rows.len() - 1].beta / rows[0].beta;
    if span < 100.0 * (1.0 - 1e-12) {
        return domain(format!("large-beta rows must span two decades, span is {span}"));
    }
    let betas: Vec<f64> = rows.iter().map(|r| r.beta).collect();
    let gaps: Vec<f64> = rows.iter().map(|r| SIGMA_INFINITY - r.sigma).collect();
    let dips: Vec<f64> = rows.iter().map(|r| r.inf_v).collect();
    let gap_slope = loglog_slope(&betas, &gaps)?;
    let dip_slope = loglog_slope(&betas, &dips)?;
    let ok = |s: &SlopeFit| (QUARTER_SLOPE_RANGE.0..=QUARTER_SLOPE_RANGE.1).contains(&s.slope);
    Ok(LargeBetaReport {
        pass: ok(&gap_slope) && ok(&dip_slope),
        gap_slope,
        dip_slope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallBetaReport {
    /// `max σ/√β` over the rows.
    pub ratio_max: f64,
    /// Informational: the bound is one-sided.
    pub measured_slope: SlopeFit,
    pub pass: bool,
}

/// Checks `σ ≤ C√β` on rows with β ≤ 10⁻², `C` from the stretched construction.
pub fn small_beta_report(table: &SweepTable) -> Result<SmallBetaReport> {
    let rows: Vec<&SweepRow> = table.rows().iter().filter(|r| r.beta <= 1e-2 * (1.0 + 1e-12)).collect();
    if rows.len() < 3 {
        return domain(format!("small-beta report needs 3 rows with beta <= 1e-2, got {}", rows.len()));
    }
    let ratio_max = rows
        .iter()
        .map(|r| r.sigma / r.beta.sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    let betas: Vec<f64> = rows.iter().map(|r| r.beta).collect();
    let sigmas: Vec<f64> = rows.iter().map(|r| r.sigma).collect();
    Ok(SmallBetaReport {
        ratio_max,
        measured_slope: loglog_slope(&betas, &sigmas)?,
        pass: ratio_max <= SMALL_BETA_CONSTANT,
    })
}

/// `n` logarithmically spaced points from `a` to `b` inclusive.
pub fn log_space(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return domain(format!("log-spaced endpoints must be positive, got {a} and {b}"));
    }
    match n {
        0 => domain("a log-spaced list needs at least one point"),
        1 => Ok(vec![a]),
        _ => {
            let (la, lb) = (a.log10(), b.log10());
            Ok((0..n)
                .map(|i| {
                    if i == 0 {
                        a
                    } else if i == n - 1 {
                        b
                    } else {
                        10f64.powf(la + (lb - la) * i as f64 / (n - 1) as f64)
                    }
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn row(beta: f64, sigma: f64, inf_v: f64) -> SweepRow {
        SweepRow {
            beta,
            sigma,
            inf_v,
            lower: 0.0,
            upper: 1.0,
            el_res_v: 0.0,
            el_res_phi: 0.0,
            equip_l2: 0.0,
            iters: 0,
        }
    }

    #[test]
    fn exact_power_laws() {
        let xs = [1.0, 10.0, 100.0, 1000.0];
        let fit = loglog_slope(&xs, &xs).unwrap();
        assert_eq!(fit.slope, 1.0);
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.25)).collect();
        let fit = loglog_slope(&xs, &ys).unwrap();
        assert!((fit.slope + 0.25).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit.stderr < 1e-12);
        assert_eq!(fit.n_points, 4);
    }

    #[test]
    fn noisy_square_root() {
        let mut rng = StdRng::seed_from_u64(5);
        let xs: Vec<f64> = (0..20).map(|i| 10f64.powf(i as f64 / 5.0)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| x.sqrt() * (1.0 + 0.01 * rng.random_range(-1.0..1.0)))
            .collect();
        let fit = loglog_slope(&xs, &ys).unwrap();
        assert!((fit.slope - 0.5).abs() < 0.02);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(loglog_slope(&[1.0, 2.0, 3.0], &[1.0, -2.0, 3.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn synthetic_large_beta_passes() {
        let rows = [1e2, 1e3, 1e4, 1e5]
            .iter()
            .map(|&b: &f64| row(b, SIGMA_INFINITY - b.powf(-0.25), 2.0 * b.powf(-0.25)))
            .collect();
        let rep = large_beta_report(&SweepTable::from_rows(rows)).unwrap();
        assert!(rep.pass);
        assert!((rep.gap_slope.slope + 0.25).abs() < 1e-12);
        let short = SweepTable::from_rows(vec![row(100.0, 0.5, 0.3), row(200.0, 0.5, 0.3), row(300.0, 0.5, 0.3)]);
        assert!(large_beta_report(&short).is_err());
    }

    #[test]
    fn synthetic_small_beta() {
        let rows = [1e-4, 1e-3, 1e-2].iter().map(|&b: &f64| row(b, b.sqrt(), 1.0)).collect();
        let rep = small_beta_report(&SweepTable::from_rows(rows)).unwrap();
        assert!((rep.ratio_max - 1.0).abs() < 1e-12);
        assert!(!rep.pass || SMALL_BETA_CONSTANT >= 1.0);
        let rows = [1e-4, 1e-3, 1e-2]
            .iter()
            .map(|&b: &f64| row(b, 0.5 * b.sqrt(), 1.0))
            .collect();
        let rep = small_beta_report(&SweepTable::from_rows(rows)).unwrap();
        assert!(rep.pass);
        assert!((rep.measured_slope.slope - 0.5).abs() < 1e-12);
        assert!(small_beta_report(&SweepTable::default()).is_err());
    }

    #[test]
    fn table_sorted_and_csv() {
        let t = SweepTable::from_rows(vec![row(10.0, 0.8, 0.5), row(1.0, 0.5, 0.7), row(3.0, 0.6, 0.6)]);
        let betas: Vec<f64> = t.rows().iter().map(|r| r.beta).collect();
        assert_eq!(betas, vec![1.0, 3.0, 10.0]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().next().unwrap(), SWEEP_CSV_HEADER);
        let mut buf = Vec::new();
        SweepTable::default().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn sweep_validates_input() {
        let cfg = SolverConfig::default();
        assert!(beta_sweep(&[1.0, 0.5], &cfg).is_err());
        assert!(beta_sweep(&[0.0, 1.0], &cfg).is_err());
    }

    #[test]
    fn sweep_reports_partial_failure() {
        let cfg = SolverConfig {
            grid: crate::profile_solver::GridSpec::Spacing(0.05),
            max_iter: 1,
            ..SolverConfig::default()
        };
        match beta_sweep(&[1.0, 2.0], &cfg) {
            Err(Error::Sweep { partial, failed }) => {
                assert!(partial.is_empty());
                assert_eq!(failed, vec![1.0, 2.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1e-2, 1e2, 5).unwrap();
        assert_eq!(v[0], 1e-2);
        assert_eq!(v[4], 1e2);
        assert!((v[2] - 1.0).abs() < 1e-12);
        assert!(log_space(0.0, 1.0, 3).is_err());
        assert_eq!(log_space(2.0, 3.0, 1).unwrap(), vec![2.0]);
    }
}
