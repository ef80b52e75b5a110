//! Closed-form Sylvester solutions for pole/zero/shifted-pole placement and
//! the diagonal-dominance diagnostics that justify the per-sample weights.
//!
//! The selector matrices S_v, S_p, S_z, S_sp, L_v, L_w are never stored as
//! large matrices; every closed form works on grid scalars and m×m blocks.
//! Only the dense route of [`xsp_solution`] materializes the (small)
//! Sylvester operator inputs.

use crate::data::SampleSet;
use crate::error::{Error, Result};
use crate::grid::InterpolationGrid;
use crate::la;
use crate::oracle::solve_sylvester;
use ndarray::prelude::*;
use num_complex::Complex64 as c64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum XKind {
    Xp,
    Xz,
    Xsp,
}

/// Solution of one of the placement Sylvester equations, stored dense with
/// its block partition (block size = m).
#[derive(Debug, Clone)]
pub struct SylvesterSolution {
    pub x: Array2<c64>,
    pub kind: XKind,
    pub grid: InterpolationGrid,
    pub block_size: usize,
}

impl SylvesterSolution {
    pub fn block(&self, i: usize, j: usize) -> Array2<c64> {
        let m = self.block_size;
        self.x.slice(s![i * m..(i + 1) * m, j * m..(j + 1) * m]).to_owned()
    }

    pub fn n_s(&self) -> usize {
        self.x.nrows() / self.block_size
    }

    /// 2-norm condition estimate of X (reported, not asserted).
    pub fn condition(&self) -> Result<f64> {
        la::cond2(&self.x)
    }

    /// Row-wise block dominance margins ‖X_ii‖ − Σ_{j≠i}‖X_ij‖.
    pub fn block_dominance_margins(&self) -> Vec<f64> {
        let n = self.n_s();
        (0..n)
            .map(|i| {
                let diag = la::norm2(&self.block(i, i));
                let off: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| la::norm2(&self.block(i, j)))
                    .sum();
                diag - off
            })
            .collect()
    }
}

/// X_p = Y ⊗ I_m with Y_ij = 1/(ε + j(ω_j − ω_i)).
pub fn xp_closed_form(grid: &InterpolationGrid, block_size: usize) -> Result<SylvesterSolution> {
    grid.validate()?;
    let y = xp_y(grid);
    Ok(SylvesterSolution {
        x: kron_with_eye(&y, block_size),
        kind: XKind::Xp,
        grid: grid.clone(),
        block_size,
    })
}

fn xp_y(grid: &InterpolationGrid) -> Array2<c64> {
    let n = grid.omegas.len();
    let mut y = Array2::<c64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            y[[i, j]] = 1.0 / c64::new(grid.eps, grid.omegas[j] - grid.omegas[i]);
        }
    }
    y
}

fn kron_with_eye(y: &Array2<c64>, m: usize) -> Array2<c64> {
    let n = y.nrows();
    let mut out = Array2::<c64>::zeros((n * m, n * m));
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                out[[i * m + k, j * m + k]] = y[[i, j]];
            }
        }
    }
    out
}

/// Diagnostics of the diagonal approximation X̃_p = (1/ε)I.
#[derive(Debug, Clone, Serialize)]
pub struct Prop2Bounds {
    /// ‖X_p − (1/ε)I‖_F / ‖(1/ε)I‖_F
    pub rel_error: f64,
    /// ε·sqrt(n_s − 1)/Δ_min
    pub bound: f64,
    /// min_i(|Y_ii| − Σ_{j≠i}|Y_ij|)
    pub dominance_margin: f64,
    /// Δ_min/(n_s − 1); strict dominance is guaranteed for ε below this
    pub dominance_threshold: f64,
}

pub fn prop2_bounds(grid: &InterpolationGrid) -> Result<Prop2Bounds> {
    grid.validate()?;
    let y = xp_y(grid);
    let n = y.nrows();
    let eps = grid.eps;
    let mut err2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                err2 += y[[i, j]].norm_sqr();
            } else {
                err2 += (y[[i, j]] - c64::new(1.0 / eps, 0.0)).norm_sqr();
            }
        }
    }
    let rel_error = err2.sqrt() / ((n as f64).sqrt() / eps);
    let delta_min = grid.delta_min();
    let bound = eps * ((n as f64 - 1.0).max(0.0)).sqrt() / delta_min;
    let margin = (0..n)
        .map(|i| {
            let off: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| y[[i, j]].norm())
                .sum();
            y[[i, i]].norm() - off
        })
        .fold(f64::INFINITY, f64::min);
    let threshold = if n > 1 {
        delta_min / (n as f64 - 1.0)
    } else {
        f64::INFINITY
    };
    let out = Prop2Bounds {
        rel_error,
        bound,
        dominance_margin: margin,
        dominance_threshold: threshold,
    };
    if out.rel_error > out.bound * (1.0 + 1e-12) {
        return Err(Error::Solver(format!(
            "relative-error bound violated: {} > {}",
            out.rel_error, out.bound
        )));
    }
    if grid.eps < threshold && margin <= 0.0 {
        return Err(Error::Solver(
            "dominance margin not positive below the threshold".into(),
        ));
    }
    Ok(out)
}

/// Row dominance report for the zero-placement solution.
#[derive(Debug, Clone, Serialize)]
pub struct RowDominance {
    pub margins: Vec<f64>,
    /// Δ_min · min_i ‖M_i‖/Σ_{j≠i}‖M_j‖
    pub eps_threshold: f64,
    /// per-row bound (ε/Δ_min)·Σ_{j≠i}‖M_j‖/‖M_i‖ on the relative
    /// off-diagonal weight
    pub row_bounds: Vec<f64>,
    pub row_weights: Vec<f64>,
}

/// Zero-placement closed form X_ij = M_j/(ε + j(ω_j − ω_i)) with
/// M_j = I + R·G(jω_j).
pub fn xz_solution(
    grid: &InterpolationGrid,
    samples: &SampleSet,
    r_weight: &Array2<c64>,
) -> Result<(SylvesterSolution, RowDominance)> {
    grid.validate()?;
    let n = grid.omegas.len();
    if samples.freqs.len() != n {
        return Err(Error::Dimension(
            "grid and sample set must have matching right grids".into(),
        ));
    }
    let m = samples.num_inputs();
    let blocks: Vec<Array2<c64>> = (0..n)
        .map(|j| la::eye(m) + r_weight.dot(&samples.proper(j)))
        .collect();
    for (j, mj) in blocks.iter().enumerate() {
        if la::norm2(mj) <= 0.0 {
            return Err(Error::Solver(format!(
                "M_{j} is numerically zero; zero placement undefined"
            )));
        }
    }
    let mut x = Array2::<c64>::zeros((n * m, n * m));
    for i in 0..n {
        for j in 0..n {
            let denom = c64::new(grid.eps, grid.omegas[j] - grid.omegas[i]);
            let blk = blocks[j].mapv(|z| z / denom);
            x.slice_mut(s![i * m..(i + 1) * m, j * m..(j + 1) * m])
                .assign(&blk);
        }
    }
    let sol = SylvesterSolution {
        x,
        kind: XKind::Xz,
        grid: grid.clone(),
        block_size: m,
    };
    let norms: Vec<f64> = blocks.iter().map(la::norm2).collect();
    let delta_min = grid.delta_min();
    let eps_threshold = (0..n)
        .map(|i| {
            let others: f64 = (0..n).filter(|&j| j != i).map(|j| norms[j]).sum();
            if others == 0.0 {
                f64::INFINITY
            } else {
                delta_min * norms[i] / others
            }
        })
        .fold(f64::INFINITY, f64::min);
    let margins = sol.block_dominance_margins();
    let mut row_bounds = Vec::with_capacity(n);
    let mut row_weights = Vec::with_capacity(n);
    for i in 0..n {
        let others: f64 = (0..n).filter(|&j| j != i).map(|j| norms[j]).sum();
        row_bounds.push(grid.eps / delta_min * others / norms[i]);
        let diag = la::norm2(&sol.block(i, i));
        let off: f64 = (0..n)
            .filter(|&j| j != i)
            .map(|j| la::norm2(&sol.block(i, j)))
            .sum();
        row_weights.push(off / diag);
    }
    Ok((
        sol,
        RowDominance {
            margins,
            eps_threshold,
            row_bounds,
            row_weights,
        },
    ))
}

/// Block-dominance report for the shifted-pole solution.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftDominance {
    pub margins: Vec<f64>,
    /// max_{ij} ‖Q_ij‖₂ / ε
    pub eta: f64,
    /// hypothesis η < 1/(6 n_s)
    pub eta_limit: f64,
    /// hypothesis ε ≤ Δ_min/(2 n_s)
    pub eps_limit: f64,
    pub hypothesis_holds: bool,
}

/// Dense solve of −S_sp^* X − X (S_v − Q_shift) + L_v^T L_v = 0.
pub fn xsp_solution(
    grid: &InterpolationGrid,
    q_shift: &Array2<c64>,
    block_size: usize,
) -> Result<(SylvesterSolution, ShiftDominance)> {
    grid.validate()?;
    let n = grid.omegas.len();
    let m = block_size;
    let dim = n * m;
    if q_shift.nrows() != dim || q_shift.ncols() != dim {
        return Err(Error::Dimension(format!(
            "Q_shift must be {dim}x{dim}"
        )));
    }
    // A = −S_sp^* = diag(λ_i) ⊗ I_m, B = −(S_v − Q_shift), C = 1·1ᵀ ⊗ I_m
    let mut a = Array2::<c64>::zeros((dim, dim));
    for (i, lam) in grid.lambdas().iter().enumerate() {
        for k in 0..m {
            a[[i * m + k, i * m + k]] = *lam;
        }
    }
    let mut b = q_shift.clone();
    for (j, sig) in grid.sigmas().iter().enumerate() {
        for k in 0..m {
            b[[j * m + k, j * m + k]] -= *sig;
        }
    }
    let mut c = Array2::<c64>::zeros((dim, dim));
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                c[[i * m + k, j * m + k]] = la::ONE;
            }
        }
    }
    let x = solve_sylvester(&a, &b, &c)?;
    let sol = SylvesterSolution {
        x,
        kind: XKind::Xsp,
        grid: grid.clone(),
        block_size: m,
    };
    let mut qmax = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let blk = q_shift
                .slice(s![i * m..(i + 1) * m, j * m..(j + 1) * m])
                .to_owned();
            qmax = qmax.max(la::norm2(&blk));
        }
    }
    let eta = qmax / grid.eps;
    let eta_limit = 1.0 / (6.0 * n as f64);
    let eps_limit = grid.delta_min() / (2.0 * n as f64);
    let hypothesis_holds = eta < eta_limit && grid.eps <= eps_limit;
    let margins = sol.block_dominance_margins();
    if hypothesis_holds && margins.iter().any(|&mg| mg <= 0.0) {
        return Err(Error::Solver(
            "strict block dominance violated under the Prop-7 hypothesis".into(),
        ));
    }
    Ok((
        sol,
        ShiftDominance {
            margins,
            eta,
            eta_limit,
            eps_limit,
            hypothesis_holds,
        },
    ))
}

// ---------------------------------------------------------------------------
// placement ROMs and eigenvalue certificates
// ---------------------------------------------------------------------------

/// Interpolant built from an X-solution: Ã = S_v − B̃L_v, B̃ = X^{-1}L_vᵀ,
/// C̃ = [G(σ_1) ... G(σ_ns)].
#[derive(Debug, Clone)]
pub struct PlacementRom {
    pub a: Array2<c64>,
    pub b: Array2<c64>,
    pub c: Array2<c64>,
    pub block_size: usize,
}

pub fn placement_rom(sol: &SylvesterSolution, samples: &SampleSet) -> Result<PlacementRom> {
    let m = sol.block_size;
    let n = sol.n_s();
    let dim = n * m;
    if samples.freqs.len() != n || samples.num_inputs() != m {
        return Err(Error::Dimension(
            "sample set incompatible with the placement solution".into(),
        ));
    }
    // B̃ = X^{-1} L_vᵀ with L_v = [I ... I]
    let mut lvt = Array2::<c64>::zeros((dim, m));
    for i in 0..n {
        for k in 0..m {
            lvt[[i * m + k, k]] = la::ONE;
        }
    }
    let btil = la::solve_mat(&sol.x, &lvt)?;
    // Ã = S_v − B̃ L_v: subtract B̃ from every block column of diag(σ)
    let mut a = Array2::<c64>::zeros((dim, dim));
    for (j, sig) in sol.grid.sigmas().iter().enumerate() {
        for k in 0..m {
            a[[j * m + k, j * m + k]] = *sig;
        }
    }
    for j in 0..n {
        let mut slab = a.slice_mut(s![.., j * m..(j + 1) * m]);
        slab -= &btil;
    }
    let p = samples.num_outputs();
    let mut c = Array2::<c64>::zeros((p, dim));
    for j in 0..n {
        c.slice_mut(s![.., j * m..(j + 1) * m])
            .assign(&samples.proper(j));
    }
    Ok(PlacementRom {
        a,
        b: btil,
        c,
        block_size: m,
    })
}

impl PlacementRom {
    /// H̃(s) = C̃(sI − Ã)^{-1}B̃ (+D outside).
    pub fn eval(&self, s: c64) -> Result<Array2<c64>> {
        let dim = self.a.nrows();
        let mut m = self.a.mapv(|z| -z);
        for i in 0..dim {
            m[[i, i]] += s;
        }
        let x = la::solve_mat(&m, &self.b)?;
        Ok(self.c.dot(&x))
    }
}

/// Which spectrum the certificate examines.
pub enum CertTarget {
    /// eig(Ã) against the prescribed poles (pole placement).
    Poles,
    /// eig(Ã − B̃·R·C̃) against the prescribed zeros (zero placement).
    Zeros { r_weight: Array2<c64> },
    /// eig(Ã − Q_shift) against the prescribed shifted poles.
    ShiftedPoles { q_shift: Array2<c64> },
}

/// Max assignment distance between the computed spectrum and the targets
/// (each target carries multiplicity m), normalized by max |target|.
pub fn pole_zero_certificate(
    rom: &PlacementRom,
    kind: &CertTarget,
    targets: &[c64],
) -> Result<f64> {
    let mat = match kind {
        CertTarget::Poles => rom.a.clone(),
        CertTarget::Zeros { r_weight } => &rom.a - &rom.b.dot(r_weight).dot(&rom.c),
        CertTarget::ShiftedPoles { q_shift } => &rom.a - q_shift,
    };
    let ev = la::eigvals(&mat)?;
    let mut want: Vec<c64> = Vec::with_capacity(ev.len());
    for t in targets {
        for _ in 0..rom.block_size {
            want.push(*t);
        }
    }
    if want.len() != ev.len() {
        return Err(Error::Dimension(format!(
            "{} targets (with multiplicity) vs {} eigenvalues",
            want.len(),
            ev.len()
        )));
    }
    let scale = want.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    let cost: Vec<Vec<f64>> = ev
        .iter()
        .map(|e| want.iter().map(|t| (e - t).norm()).collect())
        .collect();
    let assignment = hungarian(&cost);
    let worst = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .fold(0.0f64, f64::max);
    Ok(worst / scale)
}

/// O(n³) shortest-augmenting-path assignment (minimizes total cost).
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j] = row matched to column j (1-based)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_model, sample_transfer, ModelKind};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(omegas: Vec<f64>, eps: f64) -> InterpolationGrid {
        InterpolationGrid::matched(omegas, eps).unwrap()
    }

    #[test]
    fn xp_two_point_example() {
        // eps = 1, omegas = (0, 1): Y = [[1, 1/(1+j)], [1/(1-j), 1]]
        let sol = xp_closed_form(&grid(vec![0.0, 1.0], 1.0), 1).unwrap();
        assert_eq!(sol.x[[0, 0]], c64::new(1.0, 0.0));
        assert!((sol.x[[0, 1]] - 1.0 / c64::new(1.0, 1.0)).norm() < 1e-15);
        assert!((sol.x[[1, 0]] - 1.0 / c64::new(1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn xp_single_point() {
        let sol = xp_closed_form(&grid(vec![3.0], 0.25), 1).unwrap();
        assert_relative_eq!(sol.x[[0, 0]].re, 4.0, max_relative = 1e-15);
    }

    /// dense Sylvester oracle: −S_p^* X − X S_v + L_vᵀL_v = 0
    #[test]
    fn xp_matches_dense_sylvester() {
        for m in [1usize, 2] {
            let g = grid(vec![0.4, 1.9, 6.5, 21.0], 0.07);
            let sol = xp_closed_form(&g, m).unwrap();
            let (xs, _) = xsp_solution(&g, &Array2::<c64>::zeros(sol.x.raw_dim()), m).unwrap();
            assert!(la::rel_err(&sol.x, &xs.x) < 1e-10);
        }
    }

    #[test]
    fn prop2_two_point_margin() {
        // n_s = 2, Δ = 1, ε = 0.5: margin ≥ 1/ε − 1 = 1
        let b = prop2_bounds(&grid(vec![0.0, 1.0], 0.5)).unwrap();
        assert!(b.dominance_margin >= 1.0 - 1e-12);
        assert!(b.rel_error <= b.bound);
    }

    #[test]
    fn prop2_bound_on_random_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let n = rng.gen_range(2..12);
            let mut omegas: Vec<f64> = (0..n)
                .map(|_| rng.gen_range(-3.0f64..3.0).exp2() * 10.0)
                .collect();
            omegas.sort_by(|a, b| a.partial_cmp(b).unwrap());
            omegas.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            let eps = rng.gen_range(1e-6f64..1e-1);
            let g = grid(omegas, eps);
            let b = prop2_bounds(&g).unwrap();
            assert!(b.rel_error <= b.bound * (1.0 + 1e-12));
            if g.eps < b.dominance_threshold {
                assert!(b.dominance_margin > 0.0);
            }
        }
    }

    #[test]
    fn prop2_rel_error_linear_in_eps() {
        // log–log slope of rel_error vs eps is 1 ± 0.1
        let omegas = vec![1.0, 3.0, 9.0, 27.0];
        let mut pts = Vec::new();
        for k in 1..=6 {
            let eps = 10f64.powi(-(k as i32));
            let b = prop2_bounds(&grid(omegas.clone(), eps)).unwrap();
            pts.push((eps.ln(), b.rel_error.ln()));
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((slope - 1.0).abs() <= 0.1, "slope {slope}");
    }

    fn passive_samples(freqs: &[f64]) -> SampleSet {
        let model = generate_model(&ModelKind::RlcLadder {
            sections: 3,
            r: 0.1,
            lind: 0.1,
            cap: 0.1,
            rload: 1.0,
            d_offset: 1.0,
        })
        .unwrap();
        sample_transfer(&model, freqs, true).unwrap()
    }

    #[test]
    fn xz_reduces_to_xp_for_zero_samples() {
        let freqs = vec![0.5, 2.0, 8.0];
        let g = grid(freqs.clone(), 0.01);
        let zero_samples = SampleSet::new(
            freqs.clone(),
            freqs.iter().map(|_| array![[c64::new(1.0, 0.0)]]).collect(),
            None,
            array![[1.0]], // G = H − D = 0
            false,
        )
        .unwrap();
        let (xz, _) = xz_solution(&g, &zero_samples, &array![[la::ONE]]).unwrap();
        let xp = xp_closed_form(&g, 1).unwrap();
        assert!(la::rel_err(&xz.x, &xp.x) < 1e-14);
    }

    /// dense Sylvester oracle for X_z: −S_z^*X − X S_v + L_vᵀ(L_v + R·Ĉ) = 0
    #[test]
    fn xz_matches_dense_sylvester() {
        let freqs = vec![0.5, 2.0, 8.0, 20.0];
        let eps = 0.02;
        let g = grid(freqs.clone(), eps);
        let samples = passive_samples(&freqs);
        let dinv = 1.0 / samples.static_gain[[0, 0]];
        let r = array![[c64::new(dinv, 0.0)]];
        let (xz, _) = xz_solution(&g, &samples, &r).unwrap();

        let n = freqs.len();
        let mut a = Array2::<c64>::zeros((n, n));
        for (i, lam) in g.lambdas().iter().enumerate() {
            a[[i, i]] = *lam;
        }
        let mut b = Array2::<c64>::zeros((n, n));
        for (j, sig) in g.sigmas().iter().enumerate() {
            b[[j, j]] = -*sig;
        }
        let mut cmat = Array2::<c64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                cmat[[i, j]] = la::ONE + r[[0, 0]] * samples.proper(j)[[0, 0]];
            }
        }
        let dense = solve_sylvester(&a, &b, &cmat).unwrap();
        assert!(la::rel_err(&xz.x, &dense) < 1e-10);
    }

    #[test]
    fn xz_row_dominance_bound_holds() {
        let freqs = vec![0.5, 2.0, 8.0, 20.0];
        let g = grid(freqs.clone(), 1e-3);
        let samples = passive_samples(&freqs);
        let r = array![[c64::new(1.0, 0.0)]];
        let (_, rep) = xz_solution(&g, &samples, &r).unwrap();
        for (w, b) in rep.row_weights.iter().zip(&rep.row_bounds) {
            assert!(w <= &(b * (1.0 + 1e-10)), "row weight {w} > bound {b}");
        }
        if g.eps < rep.eps_threshold {
            assert!(rep.margins.iter().all(|&m| m > 0.0));
        }
    }

    #[test]
    fn xsp_zero_shift_is_xp() {
        let g = grid(vec![1.0, 4.0, 12.0], 0.05);
        let (sol, rep) = xsp_solution(&g, &Array2::<c64>::zeros((3, 3)), 1).unwrap();
        let xp = xp_closed_form(&g, 1).unwrap();
        assert!(la::rel_err(&sol.x, &xp.x) < 1e-10);
        assert!(rep.hypothesis_holds || rep.eta == 0.0);
    }

    /// Q_shift = B̃ R C̃ cross-construction: X_sp equals X_z
    #[test]
    fn xsp_with_rank_structured_shift_equals_xz() {
        let freqs = vec![0.5, 2.0, 8.0];
        let eps = 0.01;
        let g = grid(freqs.clone(), eps);
        let samples = passive_samples(&freqs);
        let r = array![[c64::new(1.0 / samples.static_gain[[0, 0]], 0.0)]];
        let (xz, _) = xz_solution(&g, &samples, &r).unwrap();
        // Q_shift = B̃ R_shift C̃ with B̃ = X_z^{-1}L_vᵀ and C̃ the sample row
        let rom = placement_rom(&xz, &samples).unwrap();
        let q_shift = rom.b.dot(&r).dot(&rom.c);
        let (xsp, _) = xsp_solution(&g, &q_shift, 1).unwrap();
        assert!(la::rel_err(&xsp.x, &xz.x) < 1e-10);
    }

    #[test]
    fn prop7_random_shifts_always_dominant() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..100 {
            let n = rng.gen_range(2..8);
            let mut omegas = vec![0.0f64; n];
            let mut acc = rng.gen_range(0.5..1.5);
            for w in omegas.iter_mut() {
                *w = acc;
                acc += rng.gen_range(0.5..2.0);
            }
            let g = InterpolationGrid::matched(omegas, 1.0).unwrap();
            let delta = g.delta_min();
            let eps = delta / (2.0 * n as f64); // eps at the Prop-7 limit
            let g = InterpolationGrid::matched(g.omegas.clone(), eps).unwrap();
            let eta = 1.0 / (8.0 * n as f64);
            let mut q = Array2::<c64>::zeros((n, n));
            for v in q.iter_mut() {
                let re = rng.gen_range(-1.0f64..1.0);
                let im = rng.gen_range(-1.0f64..1.0);
                let z = c64::new(re, im);
                *v = z / z.norm().max(1.0);
            }
            q.mapv_inplace(|z| z * (eta * eps));
            let (_, rep) = xsp_solution(&g, &q, 1).unwrap();
            assert!(
                rep.hypothesis_holds,
                "trial {trial}: hypothesis violated eta={} lim={}",
                rep.eta, rep.eta_limit
            );
            assert!(rep.margins.iter().all(|&m| m > 0.0), "trial {trial}");
        }
    }

    #[test]
    fn prop1_pole_placement_certificate() {
        let freqs = vec![0.5, 2.0, 8.0, 20.0];
        let eps = 1e-3;
        let g = grid(freqs.clone(), eps);
        let samples = passive_samples(&freqs);
        let sol = xp_closed_form(&g, 1).unwrap();
        let rom = placement_rom(&sol, &samples).unwrap();
        let dev = pole_zero_certificate(&rom, &CertTarget::Poles, &g.lambdas()).unwrap();
        assert!(dev <= 1e-8, "pole placement deviation {dev}");
        // interpolation preservation at the nodes
        for (j, &w) in freqs.iter().enumerate() {
            let h = rom.eval(c64::new(0.0, w)).unwrap();
            let rel = la::rel_err(&h, &samples.proper(j));
            assert!(rel < 1e-8, "interpolation lost at {w}: {rel}");
        }
    }

    #[test]
    fn prop3_zero_placement_certificate() {
        let freqs = vec![0.5, 2.0, 8.0];
        let eps = 1e-3;
        let g = grid(freqs.clone(), eps);
        let samples = passive_samples(&freqs);
        let r = array![[c64::new(1.0 / samples.static_gain[[0, 0]], 0.0)]];
        let (sol, _) = xz_solution(&g, &samples, &r).unwrap();
        let rom = placement_rom(&sol, &samples).unwrap();
        let dev = pole_zero_certificate(
            &rom,
            &CertTarget::Zeros {
                r_weight: r.clone(),
            },
            &g.lambdas(),
        )
        .unwrap();
        assert!(dev <= 1e-8, "zero placement deviation {dev}");
    }

    #[test]
    fn scalar_pole_placement_algebra() {
        // n_s = 1: Ã = σ − B̃ = −X_p^{-1}S_p^*X_p = −(ε − jω) = −ε + jω
        let w = 2.0;
        let eps = 0.3;
        let g = grid(vec![w], eps);
        let samples = SampleSet::new(
            vec![w],
            vec![array![[c64::new(0.7, 0.1)]]],
            None,
            array![[0.0]],
            false,
        )
        .unwrap();
        let sol = xp_closed_form(&g, 1).unwrap();
        let rom = placement_rom(&sol, &samples).unwrap();
        assert!((rom.a[[0, 0]] - c64::new(-eps, w)).norm() < 1e-12);
    }

    #[test]
    fn hungarian_matches_reordered_targets() {
        let cost = vec![
            vec![5.0, 0.1, 9.0],
            vec![0.2, 7.0, 8.0],
            vec![6.0, 9.0, 0.3],
        ];
        let asg = hungarian(&cost);
        assert_eq!(asg, vec![1, 0, 2]);
    }
}
