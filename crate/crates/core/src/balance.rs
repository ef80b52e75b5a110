//! Square-root balancing of the weighted Loewner matrix and non-intrusive
//! reduced-order model assembly.

use crate::error::{Error, Result};
use crate::la;
use crate::loewner::LoewnerQuadruplet;
use crate::par;
use crate::weights::GramianFactors;
use ndarray::prelude::*;
use ndarray_linalg::SVD;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

/// Complex reduced model (Ã, B̃, C̃, D) of order r plus the full singular
/// value spectrum of Z_q* L Z_p that produced it.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub a: Array2<c64>,
    pub b: Array2<c64>,
    pub c: Array2<c64>,
    pub d: Array2<f64>,
    /// All singular values of Z_q* L Z_p, descending.
    pub sigma: Vec<f64>,
}

impl ReducedModel {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn num_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn num_outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Eigenvalues of Ã; callers use this to report instability.
    pub fn poles(&self) -> Result<Vec<c64>> {
        Ok(la::eigvals(&self.a)?.to_vec())
    }

    /// Poles with nonnegative real part (the paper's stability assumption
    /// does not always hold numerically; reporting is the default policy).
    pub fn unstable_poles(&self) -> Result<Vec<c64>> {
        Ok(self.poles()?.into_iter().filter(|l| l.re >= 0.0).collect())
    }

    /// Optional post-process: reflect unstable poles across the imaginary
    /// axis (λ → −conj(λ)) through the eigendecomposition. Off by default;
    /// changes the model and is only offered for downstream workflows that
    /// require a stable realization.
    pub fn flip_unstable(&self) -> Result<ReducedModel> {
        use ndarray_linalg::Eig;
        let (ev, vecs) = self.a.eig()?;
        let flipped: Vec<c64> = ev
            .iter()
            .map(|l| {
                if l.re >= 0.0 {
                    c64::new(-l.re.max(1e-12), l.im)
                } else {
                    *l
                }
            })
            .collect();
        let vinv = la::inv(&vecs)?;
        let mut scaled = vecs.clone();
        for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|z| z * flipped[j]);
        }
        Ok(ReducedModel {
            a: scaled.dot(&vinv),
            b: self.b.clone(),
            c: self.c.clone(),
            d: self.d.clone(),
            sigma: self.sigma.clone(),
        })
    }
}

/// Numerical rank of the weighted Loewner spectrum under the truncation
/// precondition σ_r > max(n_s, n_u)·eps_mach·σ_1.
pub fn numerical_rank(sigma: &[f64], n_s: usize, n_u: usize) -> usize {
    if sigma.is_empty() {
        return 0;
    }
    let floor = n_s.max(n_u) as f64 * f64::EPSILON * sigma[0];
    sigma.iter().take_while(|&&s| s > floor).count()
}

/// Smallest r with σ_{r+1}/σ_1 < 1e-8 (capped at the numerical rank).
pub fn auto_order(sigma: &[f64], n_s: usize, n_u: usize) -> usize {
    let rank = numerical_rank(sigma, n_s, n_u);
    for r in 1..rank {
        if sigma[r] / sigma[0] < 1e-8 {
            return r;
        }
    }
    rank
}

/// Square-root balancing: SVD of Z_q* L Z_p, projection matrices
/// W̃ = Z_q U_1 Σ_r^{-1/2}, Ṽ = Z_p V_1 Σ_r^{-1/2}, and the projected ROM
/// Ã = W̃* L_s Ṽ, B̃ = W̃* B̂, C̃ = Ĉ Ṽ with D passed through.
pub fn balance_reduce(
    quad: &LoewnerQuadruplet,
    factors: &GramianFactors,
    r: usize,
) -> Result<ReducedModel> {
    let zp = factors.zp_matrix();
    let zq = factors.zq_matrix();
    if zq.nrows() != quad.l.nrows() || zp.nrows() != quad.l.ncols() {
        return Err(Error::Dimension(format!(
            "factor shapes ({}, {}) incompatible with Loewner {}x{}",
            zq.nrows(),
            zp.nrows(),
            quad.l.nrows(),
            quad.l.ncols()
        )));
    }
    if r == 0 {
        return Err(Error::Config("order must be >= 1".into()));
    }
    la::ensure_serial_blas();
    let weighted = la::adj(&zq).dot(&quad.l).dot(&zp);
    let (u, s, vt) = weighted.svd(true, true)?;
    let u = u.ok_or_else(|| Error::Solver("svd did not return U".into()))?;
    let vt = vt.ok_or_else(|| Error::Solver("svd did not return V^T".into()))?;
    let sigma: Vec<f64> = s.to_vec();
    let rank = numerical_rank(&sigma, quad.n_s(), quad.n_u());
    if r > rank {
        return Err(Error::Rank {
            requested: r,
            max: rank,
        });
    }
    let u1 = u.slice(s![.., ..r]).to_owned();
    let v1 = la::adj(&vt.slice(s![..r, ..]).to_owned());
    let inv_sqrt: Vec<c64> = sigma[..r]
        .iter()
        .map(|&x| c64::new(1.0 / x.sqrt(), 0.0))
        .collect();
    let wt = la::scale_cols(&zq.dot(&u1), &inv_sqrt);
    let vt_proj = la::scale_cols(&zp.dot(&v1), &inv_sqrt);
    let a = la::adj(&wt).dot(&quad.ls).dot(&vt_proj);
    let b = la::adj(&wt).dot(&quad.bhat);
    let c = quad.chat.dot(&vt_proj);
    Ok(ReducedModel {
        a,
        b,
        c,
        d: quad.static_gain.clone(),
        sigma,
    })
}

/// H̃(jω) = C̃(jωI − Ã)^{-1}B̃ + D over a frequency list, parallel per
/// frequency with order preserved.
pub fn evaluate_rom(rom: &ReducedModel, freqs: &[f64]) -> Result<Vec<Array2<c64>>> {
    par::try_map(freqs, |&w| eval_rom_at(rom, w))
}

pub fn eval_rom_at(rom: &ReducedModel, omega: f64) -> Result<Array2<c64>> {
    let r = rom.order();
    let mut m = rom.a.mapv(|z| -z);
    for i in 0..r {
        m[[i, i]] += c64::new(0.0, omega);
    }
    let x = la::solve_mat(&m, &rom.b).map_err(|e| Error::SingularAtFrequency {
        freq: omega,
        detail: e.to_string(),
    })?;
    let res = la::frob(&(m.dot(&x) - &rom.b)) / la::frob(&rom.b).max(1e-300);
    if !res.is_finite() || res > 1e-6 {
        return Err(Error::SingularAtFrequency {
            freq: omega,
            detail: format!("rom resolvent residual {res:.3e}"),
        });
    }
    Ok(rom.c.dot(&x) + la::to_complex(&rom.d))
}

// ---------------------------------------------------------------------------
// serialization: {"r","m","p","A_re","A_im",...,"D","sigma"}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RomFile {
    r: usize,
    m: usize,
    p: usize,
    #[serde(rename = "A_re")]
    a_re: Vec<Vec<f64>>,
    #[serde(rename = "A_im")]
    a_im: Vec<Vec<f64>>,
    #[serde(rename = "B_re")]
    b_re: Vec<Vec<f64>>,
    #[serde(rename = "B_im")]
    b_im: Vec<Vec<f64>>,
    #[serde(rename = "C_re")]
    c_re: Vec<Vec<f64>>,
    #[serde(rename = "C_im")]
    c_im: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
    sigma: Vec<f64>,
}

fn re_part(a: &Array2<c64>) -> Vec<Vec<f64>> {
    a.rows()
        .into_iter()
        .map(|row| row.iter().map(|z| z.re).collect())
        .collect()
}

fn im_part(a: &Array2<c64>) -> Vec<Vec<f64>> {
    a.rows()
        .into_iter()
        .map(|row| row.iter().map(|z| z.im).collect())
        .collect()
}

fn zip_complex(re: &[Vec<f64>], im: &[Vec<f64>], rows: usize, cols: usize) -> Result<Array2<c64>> {
    if re.len() != rows || im.len() != rows {
        return Err(Error::Dimension("complex matrix rows mismatch".into()));
    }
    let mut out = Array2::<c64>::zeros((rows, cols));
    for i in 0..rows {
        if re[i].len() != cols || im[i].len() != cols {
            return Err(Error::Dimension("complex matrix cols mismatch".into()));
        }
        for j in 0..cols {
            out[[i, j]] = c64::new(re[i][j], im[i][j]);
        }
    }
    Ok(out)
}

impl ReducedModel {
    pub fn to_json(&self) -> Result<String> {
        let file = RomFile {
            r: self.order(),
            m: self.num_inputs(),
            p: self.num_outputs(),
            a_re: re_part(&self.a),
            a_im: im_part(&self.a),
            b_re: re_part(&self.b),
            b_im: im_part(&self.b),
            c_re: re_part(&self.c),
            c_im: im_part(&self.c),
            d: self.d.rows().into_iter().map(|r| r.to_vec()).collect(),
            sigma: self.sigma.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: RomFile = serde_json::from_str(text)?;
        let a = zip_complex(&f.a_re, &f.a_im, f.r, f.r)?;
        let b = zip_complex(&f.b_re, &f.b_im, f.r, f.m)?;
        let c = zip_complex(&f.c_re, &f.c_im, f.p, f.r)?;
        if f.d.len() != f.p || f.d.iter().any(|row| row.len() != f.m) {
            return Err(Error::Dimension("D must be p x m".into()));
        }
        let flat: Vec<f64> = f.d.iter().flatten().copied().collect();
        let d = Array2::from_shape_vec((f.p, f.m), flat)
            .map_err(|e| Error::Dimension(e.to_string()))?;
        Ok(ReducedModel {
            a,
            b,
            c,
            d,
            sigma: f.sigma,
        })
    }
}
