//! Interpolation grids on the imaginary axis.

use crate::error::{Error, Result};
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

/// `count` logarithmically spaced frequencies `10^lo_exp ..= 10^hi_exp`
/// (rad/s). Model generators and the sampling protocol share this function,
/// so "modes on grid nodes" is exact in floating point.
pub fn log_spaced(lo_exp: f64, hi_exp: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![10f64.powf(lo_exp)];
    }
    let step = (hi_exp - lo_exp) / (count as f64 - 1.0);
    (0..count)
        .map(|i| 10f64.powf(lo_exp + step * i as f64))
        .collect()
}

/// Right/left interpolation frequencies plus the damping offset ε that
/// places the prescribed poles at λ_i = −ε + jω_i.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterpolationGrid {
    /// Right frequencies ω_i (σ_i = jω_i).
    pub omegas: Vec<f64>,
    /// Left frequencies ν_i (μ_i = jν_i).
    pub nus: Vec<f64>,
    /// Damping offset ε > 0.
    pub eps: f64,
}

impl InterpolationGrid {
    pub fn new(omegas: Vec<f64>, nus: Vec<f64>, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Config(format!("eps must be positive, got {eps}")));
        }
        let grid = Self { omegas, nus, eps };
        grid.validate()?;
        Ok(grid)
    }

    /// Matched grids: ν_i = ω_i.
    pub fn matched(omegas: Vec<f64>, eps: f64) -> Result<Self> {
        Self::new(omegas.clone(), omegas, eps)
    }

    pub fn validate(&self) -> Result<()> {
        for &w in self.omegas.iter().chain(self.nus.iter()) {
            if !w.is_finite() {
                return Err(Error::Config(format!("non-finite frequency {w}")));
            }
        }
        for (name, list) in [("right", &self.omegas), ("left", &self.nus)] {
            if list.is_empty() {
                return Err(Error::Config(format!("{name} grid is empty")));
            }
            if pairwise_min_gap(list) == 0.0 && list.len() > 1 {
                return Err(Error::Config(format!(
                    "{name} grid has duplicate frequencies"
                )));
            }
        }
        Ok(())
    }

    /// Δ_min = min_{i≠j} |ω_i − ω_j| over the right grid.
    pub fn delta_min(&self) -> f64 {
        pairwise_min_gap(&self.omegas)
    }

    /// σ_i = jω_i.
    pub fn sigmas(&self) -> Vec<c64> {
        self.omegas.iter().map(|&w| c64::new(0.0, w)).collect()
    }

    /// μ_i = jν_i.
    pub fn mus(&self) -> Vec<c64> {
        self.nus.iter().map(|&w| c64::new(0.0, w)).collect()
    }

    /// Prescribed poles λ_i = −ε + jω_i.
    pub fn lambdas(&self) -> Vec<c64> {
        self.omegas
            .iter()
            .map(|&w| c64::new(-self.eps, w))
            .collect()
    }
}

fn pairwise_min_gap(freqs: &[f64]) -> f64 {
    let mut sorted = freqs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Coincidence rule for Hermite entries: |ω−ν| ≤ 1e-12·max(1,|ω|).
pub fn coincident(omega: f64, nu: f64) -> bool {
    (omega - nu).abs() <= 1e-12 * omega.abs().max(1.0)
}
