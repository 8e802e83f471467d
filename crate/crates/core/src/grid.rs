//! Uniform, symmetric 1D grids.

use crate::error::{domain, Result};

/// Uniform grid on `[-L, L]` with an odd number of nodes, so that `t = 0`
/// is always a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    half_width: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return domain(format!("grid half-width must be positive, got {half_width}"));
        }
        if n_points < 3 || n_points % 2 == 0 {
            return domain(format!("grid needs an odd number of points >= 3, got {n_points}"));
        }
        Ok(Self {
            half_width,
            n_points,
        })
    }

    /// Smallest odd-sized grid on `[-L, L]` whose spacing does not exceed `max_spacing`.
    pub fn with_max_spacing(half_width: f64, max_spacing: f64) -> Result<Self> {
        if !(max_spacing > 0.0) {
            return domain(format!("grid spacing must be positive, got {max_spacing}"));
        }
        let cells = (2.0 * half_width / max_spacing - 1e-9).ceil().max(2.0) as usize;
        let cells = cells + cells % 2;
        Self::new(half_width, cells + 1)
    }

    /// The β-adapted grid used for surface-tension solves.
    ///
    /// `L = max(20, 10/sqrt(min(β, 1)))` covers the `1/sqrt(β)` phase
    /// transition width at small β; for β > 1 the spacing also resolves the
    /// `β^{-1/4}` dip of the amplitude.
    pub fn for_beta(beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return domain(format!("beta must be positive, got {beta}"));
        }
        let half_width = Self::half_width_for_beta(beta);
        let mut h = 0.01_f64;
        if beta > 1.0 {
            h = h.min(beta.powf(-0.25) / 20.0);
        }
        Self::with_max_spacing(half_width, h)
    }

    /// Truncation half-width `max(20, 10/sqrt(min(β, 1)))`.
    pub fn half_width_for_beta(beta: f64) -> f64 {
        (10.0 / beta.min(1.0).sqrt()).max(20.0)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    pub fn center(&self) -> usize {
        self.n_points / 2
    }

    /// Node `i`, computed from the center so that `node(c + j) == -node(c - j)` exactly.
    pub fn node(&self, i: usize) -> f64 {
        let j = i as f64 - self.center() as f64;
        j * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.n_points {
            0.5 * h
        } else {
            h
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.weight(i)).collect()
    }

    /// Trapezoid rule for node samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .enumerate()
            .map(|(i, f)| self.weight(i) * f)
            .sum()
    }

    /// Sample `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n_points).map(|i| f(self.node(i))).collect()
    }

    /// Piecewise-linear interpolation of node values, constant beyond `±L`.
    pub fn interpolate(&self, values: &[f64], t: f64) -> f64 {
        let last = self.n_points - 1;
        let x = (t + self.half_width) / self.spacing();
        if !(x > 0.0) {
            return values[0];
        }
        if x >= last as f64 {
            return values[last];
        }
        let i = x.floor() as usize;
        let frac = x - i as f64;
        values[i] + frac * (values[i + 1] - values[i])
    }
}
