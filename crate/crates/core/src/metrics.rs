//! Hankel-like singular values, grid-sup H∞-error estimation, and the
//! comparison reports behind the `compare` command.

use crate::balance::{eval_rom_at, ReducedModel};
use crate::error::{Error, Result};
use crate::grid::log_spaced;
use crate::la;
use crate::loewner::LoewnerQuadruplet;
use crate::par;
use crate::weights::GramianFactors;
use ndarray::prelude::*;
use ndarray_linalg::SVD;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

/// Full singular spectrum of Z_q* L Z_p, descending.
pub fn hankel_like_values(quad: &LoewnerQuadruplet, factors: &GramianFactors) -> Result<Vec<f64>> {
    la::ensure_serial_blas();
    let weighted = la::adj(&factors.zq_matrix())
        .dot(&quad.l)
        .dot(&factors.zp_matrix());
    let (_, s, _) = weighted.svd(false, false)?;
    Ok(s.to_vec())
}

/// Dense-grid H∞ estimator configuration. The coarse grid spans
/// [lo_factor·ω_min, hi_factor·ω_max] of the sampled band with `points`
/// log-spaced nodes and `refine_levels` local refinements around the
/// running maximizer; the estimate is deterministic for a fixed spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub lo_factor: f64,
    pub hi_factor: f64,
    pub refine_levels: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 2000,
            lo_factor: 1e-2,
            hi_factor: 1e2,
            refine_levels: 3,
        }
    }
}

fn sigma_max(h: &Array2<c64>) -> f64 {
    la::norm2(h)
}

/// Grid-sup of a spectral-norm functional with local refinement; returns
/// (max value, argmax frequency).
fn grid_sup<F>(f: &F, lo: f64, hi: f64, spec: &GridSpec) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let mut grid = log_spaced(lo.log10(), hi.log10(), spec.points.max(2));
    let mut best = (f64::NEG_INFINITY, grid[0]);
    for _level in 0..=spec.refine_levels {
        let vals = par::try_map(&grid, |&w| f(w))?;
        let mut arg = 0usize;
        for (i, &v) in vals.iter().enumerate() {
            if v > best.0 {
                best = (v, grid[i]);
                arg = i;
            } else if grid[i] == best.1 {
                arg = i;
            }
        }
        // refine between the argmax's neighbors
        let left = if arg == 0 { grid[0] } else { grid[arg - 1] };
        let right = if arg + 1 >= grid.len() {
            grid[grid.len() - 1]
        } else {
            grid[arg + 1]
        };
        if left <= 0.0 || right <= left {
            break;
        }
        grid = log_spaced(left.log10(), right.log10(), 41);
    }
    Ok(best)
}

/// Grid-sup estimate of max σ_max(H − H̃)/max σ_max(H) over the estimator
/// band derived from the sampled frequency range.
pub fn relative_hinf_error<F>(
    reference: &F,
    rom: &ReducedModel,
    sampled_band: (f64, f64),
    spec: &GridSpec,
) -> Result<f64>
where
    F: Fn(f64) -> Result<Array2<c64>> + Sync,
{
    let (wmin, wmax) = sampled_band;
    if !(wmin > 0.0 && wmax >= wmin) {
        return Err(Error::Config(format!(
            "sampled band must be positive, got [{wmin}, {wmax}]"
        )));
    }
    let lo = spec.lo_factor * wmin;
    let hi = spec.hi_factor * wmax;
    let err_at = |w: f64| -> Result<f64> {
        let h = reference(w)?;
        let ht = eval_rom_at(rom, w)?;
        Ok(sigma_max(&(&h - &ht)))
    };
    let ref_at = |w: f64| -> Result<f64> {
        let h = reference(w)?;
        Ok(sigma_max(&h))
    };
    let (num, _) = grid_sup(&err_at, lo, hi, spec)?;
    let (den, _) = grid_sup(&ref_at, lo, hi, spec)?;
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(num / den)
}

/// Location (frequency) of the minimum response magnitude inside a band on
/// a fixed evaluation grid; used by the anti-resonance experiment.
pub fn dip_location<F>(response: &F, band: (f64, f64), points: usize) -> Result<(usize, f64)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let grid = log_spaced(band.0.log10(), band.1.log10(), points);
    let vals = par::try_map(&grid, |&w| response(w))?;
    let mut arg = 0usize;
    for (i, &v) in vals.iter().enumerate() {
        if v < vals[arg] {
            arg = i;
        }
    }
    Ok((arg, grid[arg]))
}

/// Per-order comparison between the data-driven and intrusive spectra and
/// relative H∞ errors; rows align by reduction order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub variant: String,
    pub orders: Vec<usize>,
    /// Non-intrusive σ(Z_q*LZ_p), descending.
    pub sv_data: Vec<f64>,
    /// Intrusive √λ(PQ), descending.
    pub sv_true: Vec<f64>,
    pub rel_err_data: Vec<f64>,
    pub rel_err_intrusive: Vec<f64>,
    pub grid: String,
}

impl ComparisonReport {
    /// CSV with one row per order: variant, order, the order-th singular
    /// value from both spectra, and both relative errors.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("variant,order,sigma_data,sigma_true,rel_err_data,rel_err_intrusive\n");
        for (k, &r) in self.orders.iter().enumerate() {
            let sd = self.sv_data.get(r - 1).copied().unwrap_or(f64::NAN);
            let st = self.sv_true.get(r - 1).copied().unwrap_or(f64::NAN);
            out.push_str(&format!(
                "{},{},{:.17e},{:.17e},{:.17e},{:.17e}\n",
                self.variant, r, sd, st, self.rel_err_data[k], self.rel_err_intrusive[k]
            ));
        }
        out
    }
}

/// Frequency-response CSV: ω, |H|, |H̃| per row (plotting feed).
pub fn frequency_response_csv<F>(
    reference: &F,
    rom: &ReducedModel,
    band: (f64, f64),
    points: usize,
) -> Result<String>
where
    F: Fn(f64) -> Result<Array2<c64>> + Sync,
{
    let grid = log_spaced(band.0.log10(), band.1.log10(), points);
    let rows = par::try_map(&grid, |&w| {
        let h = sigma_max(&reference(w)?);
        let ht = sigma_max(&eval_rom_at(rom, w)?);
        Ok((w, h, ht))
    })?;
    let mut out = String::from("omega_rad_s,mag_ref,mag_rom\n");
    for (w, h, ht) in rows {
        out.push_str(&format!("{w:.17e},{h:.17e},{ht:.17e}\n"));
    }
    Ok(out)
}
