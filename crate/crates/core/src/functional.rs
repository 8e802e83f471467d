//! Discrete two-field functional shared by the transition energy and the
//! weighted ε-functional.
//!
//! On a uniform grid with spacing `h`, nodes `i` and cells `c = [i, i+1]`,
//!
//! ```text
//! E(v, φ) = Σ_c (1/h) [ ½ a_c (Δv)² + ⅛ b_c (Δφ)² ]
//!         + Σ_i w_i ½ [ ½ A_i (1 − v_i²)² + ¼ B_i v_i⁴ sin² φ_i ]
//! ```
//!
//! with `a_c = ½(κ_c + κ_{c+1})`, `b_c = ½(κ_c v_c² + κ_{c+1} v_{c+1}²)` and
//! trapezoid weights `w_i`. The transition energy uses `κ = A = 1, B = β`.
//! Unknowns are interleaved as `x = [v_0, φ_0, v_1, φ_1, …]`, which makes the
//! Hessian banded with bandwidth 3.

use crate::banded::SymBanded;
use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// The four energy contributions and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub kinetic_v: f64,
    pub double_well: f64,
    pub kinetic_phi: f64,
    pub coupling: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn from_parts(kinetic_v: f64, double_well: f64, kinetic_phi: f64, coupling: f64) -> Self {
        Self {
            kinetic_v,
            double_well,
            kinetic_phi,
            coupling,
            total: kinetic_v + double_well + kinetic_phi + coupling,
        }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::from_parts(
            s * self.kinetic_v,
            s * self.double_well,
            s * self.kinetic_phi,
            s * self.coupling,
        )
    }
}

#[derive(Debug, Clone)]
pub(crate) struct TwoFieldFunctional {
    h: f64,
    /// `None` means κ ≡ 1.
    kappa: Option<Vec<f64>>,
    well: Coefficient,
    coupling: Coefficient,
    weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) enum Coefficient {
    Constant(f64),
    PerNode(Vec<f64>),
}

impl Coefficient {
    #[inline]
    fn at(&self, i: usize) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::PerNode(v) => v[i],
        }
    }
}

impl TwoFieldFunctional {
    /// `G_β`: unit weights, well coefficient 1, coupling β.
    pub fn transition(grid: &Grid1D, beta: f64) -> Self {
        Self {
            h: grid.spacing(),
            kappa: None,
            well: Coefficient::Constant(1.0),
            coupling: Coefficient::Constant(beta),
            weights: grid.weights(),
        }
    }

    pub fn weighted(grid: &Grid1D, kappa: Vec<f64>, well: Vec<f64>, coupling: Vec<f64>) -> Self {
        Self {
            h: grid.spacing(),
            kappa: Some(kappa),
            well: Coefficient::PerNode(well),
            coupling: Coefficient::PerNode(coupling),
            weights: grid.weights(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    fn kappa(&self, i: usize) -> f64 {
        match &self.kappa {
            None => 1.0,
            Some(k) => k[i],
        }
    }

    pub fn check(&self, v: &[f64], phi: &[f64]) -> Result<()> {
        if v.len() != self.len() || phi.len() != self.len() {
            return Err(Error::Structural(format!(
                "field lengths v={}, phi={} do not match grid size {}",
                v.len(),
                phi.len(),
                self.len()
            )));
        }
        Ok(())
    }

    pub fn energy(&self, v: &[f64], phi: &[f64]) -> EnergyBreakdown {
        let n = self.len();
        let inv_h = 1.0 / self.h;
        let (mut kv, mut kp, mut dw, mut cp) = (0.0, 0.0, 0.0, 0.0);
        for c in 0..n - 1 {
            let (k0, k1) = (self.kappa(c), self.kappa(c + 1));
            let dv = v[c + 1] - v[c];
            let dp = phi[c + 1] - phi[c];
            let a = 0.5 * (k0 + k1);
            let b = 0.5 * (k0 * v[c] * v[c] + k1 * v[c + 1] * v[c + 1]);
            kv += 0.5 * a * dv * dv * inv_h;
            kp += 0.125 * b * dp * dp * inv_h;
        }
        for i in 0..n {
            let w = self.weights[i];
            let v2 = v[i] * v[i];
            let s = phi[i].sin();
            dw += w * 0.25 * self.well.at(i) * (1.0 - v2) * (1.0 - v2);
            cp += w * 0.125 * self.coupling.at(i) * v2 * v2 * s * s;
        }
        EnergyBreakdown::from_parts(kv, dw, kp, cp)
    }

    /// Gradient into separate `v` and `φ` buffers.
    pub fn gradient(&self, v: &[f64], phi: &[f64], gv: &mut [f64], gp: &mut [f64]) {
        let n = self.len();
        let inv_h = 1.0 / self.h;
        gv.iter_mut().for_each(|g| *g = 0.0);
        gp.iter_mut().for_each(|g| *g = 0.0);
        for c in 0..n - 1 {
            let (k0, k1) = (self.kappa(c), self.kappa(c + 1));
            let dv = v[c + 1] - v[c];
            let dp = phi[c + 1] - phi[c];
            let a = 0.5 * (k0 + k1);
            let b = 0.5 * (k0 * v[c] * v[c] + k1 * v[c + 1] * v[c + 1]);
            let dp2 = dp * dp;
            gv[c] += inv_h * (-a * dv + 0.125 * k0 * v[c] * dp2);
            gv[c + 1] += inv_h * (a * dv + 0.125 * k1 * v[c + 1] * dp2);
            gp[c] -= inv_h * 0.25 * b * dp;
            gp[c + 1] += inv_h * 0.25 * b * dp;
        }
        for i in 0..n {
            let w = self.weights[i];
            let (ai, bi) = (self.well.at(i), self.coupling.at(i));
            let vi = v[i];
            let v2 = vi * vi;
            let (s, co) = phi[i].sin_cos();
            gv[i] += w * (-ai * vi * (1.0 - v2) + 0.5 * bi * v2 * vi * s * s);
            gp[i] += w * 0.25 * bi * v2 * v2 * s * co;
        }
    }

    /// Hessian in the interleaved layout (bandwidth 3).
    pub fn hessian(&self, v: &[f64], phi: &[f64]) -> SymBanded {
        let n = self.len();
        let inv_h = 1.0 / self.h;
        let mut hm = SymBanded::zeros(2 * n, 3);
        let iv = |i: usize| 2 * i;
        let ip = |i: usize| 2 * i + 1;
        for c in 0..n - 1 {
            let d = c + 1;
            let (k0, k1) = (self.kappa(c), self.kappa(d));
            let dp = phi[d] - phi[c];
            let a = 0.5 * (k0 + k1);
            let b = 0.5 * (k0 * v[c] * v[c] + k1 * v[d] * v[d]);
            let dp2 = dp * dp;
            hm.add(iv(c), iv(c), inv_h * (a + 0.125 * k0 * dp2));
            hm.add(iv(d), iv(d), inv_h * (a + 0.125 * k1 * dp2));
            hm.add(iv(d), iv(c), -inv_h * a);
            // ∂²/∂v∂φ of ⅛ b (Δφ)²/h
            hm.add(iv(c), ip(c), -inv_h * 0.25 * k0 * v[c] * dp);
            hm.add(iv(c), ip(d), inv_h * 0.25 * k0 * v[c] * dp);
            hm.add(iv(d), ip(c), -inv_h * 0.25 * k1 * v[d] * dp);
            hm.add(iv(d), ip(d), inv_h * 0.25 * k1 * v[d] * dp);
            hm.add(ip(c), ip(c), inv_h * 0.25 * b);
            hm.add(ip(d), ip(d), inv_h * 0.25 * b);
            hm.add(ip(d), ip(c), -inv_h * 0.25 * b);
        }
        for i in 0..n {
            let w = self.weights[i];
            let (ai, bi) = (self.well.at(i), self.coupling.at(i));
            let vi = v[i];
            let v2 = vi * vi;
            let (s, co) = phi[i].sin_cos();
            hm.add(iv(i), iv(i), w * (ai * (3.0 * v2 - 1.0) + 1.5 * bi * v2 * s * s));
            hm.add(iv(i), ip(i), w * bi * v2 * vi * s * co);
            hm.add(ip(i), ip(i), w * 0.25 * bi * v2 * v2 * (co * co - s * s));
        }
        hm
    }
}

pub(crate) fn interleave(v: &[f64], phi: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(2 * v.len());
    for (a, b) in v.iter().zip(phi) {
        x.push(*a);
        x.push(*b);
    }
    x
}

pub(crate) fn split(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let v = x.iter().step_by(2).copied().collect();
    let phi = x.iter().skip(1).step_by(2).copied().collect();
    (v, phi)
}
