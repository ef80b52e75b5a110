//! Variant-specific Gramian factor matrices Z_p, Z_q.
//!
//! Each balancing variant admits an approximation P ≈ (V Z_p)(V Z_p)*,
//! Q ≈ (W Z_q)(W Z_q)* whose factors are computed per sample point from
//! G(jω_i) = H(jω_i) − D and the static gain alone. Block i depends only on
//! the data at point i (BST's Z_q also uses the matched right-grid sample
//! and divided difference), so the fill is a parallel map over the grid.

use crate::data::SampleSet;
use crate::error::{Error, Result};
use crate::grid::coincident;
use crate::la;
use crate::par;
use ndarray::prelude::*;
use ndarray_linalg::{Cholesky, UPLO};
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Balancing method selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Variant {
    Bt,
    /// Frequency band [w1, w2] rad/s.
    Flbt { w1: f64, w2: f64 },
    /// Time window [t1, t2] seconds (t2 may be infinite).
    Tlbt { t1: f64, t2: f64 },
    Swbt,
    Lqgbt,
    HinfBt { gamma: f64 },
    Prbt,
    Brbt,
    Bst,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Variant::Bt => "BT",
            Variant::Flbt { .. } => "FLBT",
            Variant::Tlbt { .. } => "TLBT",
            Variant::Swbt => "SWBT",
            Variant::Lqgbt => "LQGBT",
            Variant::HinfBt { .. } => "HinfBT",
            Variant::Prbt => "PRBT",
            Variant::Brbt => "BRBT",
            Variant::Bst => "BST",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VariantConfig {
    pub variant: Variant,
    /// Damping offset ε > 0 of the prescribed poles −ε + jω_i.
    pub eps: f64,
}

impl VariantConfig {
    pub fn new(variant: Variant, eps: f64) -> Self {
        Self { variant, eps }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::Config(format!(
                "eps must be positive and finite, got {}",
                self.eps
            )));
        }
        match self.variant {
            Variant::Flbt { w1, w2 } => {
                if !(0.0 <= w1 && w1 < w2) {
                    return Err(Error::Config(format!(
                        "FLBT band must satisfy 0 <= w1 < w2, got [{w1}, {w2}]"
                    )));
                }
            }
            Variant::Tlbt { t1, t2 } => {
                if !(0.0 <= t1 && t1 < t2) {
                    return Err(Error::Config(format!(
                        "TLBT window must satisfy 0 <= t1 < t2, got [{t1}, {t2}]"
                    )));
                }
            }
            Variant::HinfBt { gamma } => {
                // gamma = 0 is admitted and coincides with LQGBT exactly
                if !(gamma >= 0.0) || gamma == 1.0 {
                    return Err(Error::Config(format!(
                        "HinfBT needs gamma >= 0, gamma != 1, got {gamma}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Per-point diagnostic scalars (‖α_i‖, ‖β_i‖ for the Riccati-type variants).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointDiagnostic {
    pub freq: f64,
    pub alpha_norm: Option<f64>,
    pub beta_norm: Option<f64>,
}

/// Block-diagonal factors Z_p ((m·n_s)×(m·n_s)) and Z_q ((p·n_u)×(p·n_u)).
#[derive(Debug, Clone)]
pub struct GramianFactors {
    /// m×m blocks, one per right-grid point.
    pub zp_blocks: Vec<Array2<c64>>,
    /// p×p blocks, one per left-grid point.
    pub zq_blocks: Vec<Array2<c64>>,
    pub config: VariantConfig,
    pub diagnostics: Vec<PointDiagnostic>,
}

impl GramianFactors {
    pub fn zp_matrix(&self) -> Array2<c64> {
        block_diag(&self.zp_blocks)
    }

    pub fn zq_matrix(&self) -> Array2<c64> {
        block_diag(&self.zq_blocks)
    }

    /// Diagonal blocks as JSON (debugging aid).
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Dump<'a> {
            variant: String,
            eps: f64,
            zp_blocks: Vec<Vec<Vec<[f64; 2]>>>,
            zq_blocks: Vec<Vec<Vec<[f64; 2]>>>,
            diagnostics: &'a [PointDiagnostic],
        }
        let pack = |blocks: &[Array2<c64>]| {
            blocks
                .iter()
                .map(|b| {
                    b.rows()
                        .into_iter()
                        .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
                        .collect()
                })
                .collect()
        };
        Ok(serde_json::to_string(&Dump {
            variant: self.config.variant.to_string(),
            eps: self.config.eps,
            zp_blocks: pack(&self.zp_blocks),
            zq_blocks: pack(&self.zq_blocks),
            diagnostics: &self.diagnostics,
        })?)
    }
}

fn block_diag(blocks: &[Array2<c64>]) -> Array2<c64> {
    let k = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let n = blocks.len() * k;
    let mut out = Array2::<c64>::zeros((n, n));
    for (i, b) in blocks.iter().enumerate() {
        out.slice_mut(s![i * k..(i + 1) * k, i * k..(i + 1) * k])
            .assign(b);
    }
    out
}

/// Dispatch on the configured variant.
pub fn variant_factors(samples: &SampleSet, cfg: &VariantConfig) -> Result<GramianFactors> {
    cfg.validate()?;
    match cfg.variant {
        Variant::Bt => bt_factors(samples, cfg),
        Variant::Flbt { .. } => flbt_factors(samples, cfg),
        Variant::Tlbt { .. } => tlbt_factors(samples, cfg),
        Variant::Swbt => swbt_factors(samples, cfg),
        Variant::Lqgbt | Variant::HinfBt { .. } => lqg_hinf_factors(samples, cfg),
        Variant::Prbt => prbt_factors(samples, cfg),
        Variant::Brbt => brbt_factors(samples, cfg),
        Variant::Bst => bst_factors(samples, cfg),
    }
}

fn expect_variant(cfg: &VariantConfig, ok: bool, wanted: &str) -> Result<()> {
    cfg.validate()?;
    if !ok {
        return Err(Error::Config(format!(
            "configuration carries {} but {wanted} factors were requested",
            cfg.variant
        )));
    }
    Ok(())
}

fn scalar_blocks(n: usize, dim: usize, w: f64) -> Vec<Array2<c64>> {
    let b = Array2::<c64>::eye(dim).mapv(|z| z * c64::new(w, 0.0));
    vec![b; n]
}

fn no_diag(freqs: &[f64]) -> Vec<PointDiagnostic> {
    freqs
        .iter()
        .map(|&f| PointDiagnostic {
            freq: f,
            alpha_norm: None,
            beta_norm: None,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// BT / TLBT: constant diagonal weights
// ---------------------------------------------------------------------------

/// Z_p = Z_q = sqrt(ε/2)·I.
pub fn bt_factors(samples: &SampleSet, cfg: &VariantConfig) -> Result<GramianFactors> {
    expect_variant(cfg, matches!(cfg.variant, Variant::Bt), "BT")?;
    let w = (cfg.eps / 2.0).sqrt();
    Ok(GramianFactors {
        zp_blocks: scalar_blocks(samples.freqs.len(), samples.num_inputs(), w),
        zq_blocks: scalar_blocks(samples.left_freqs().len(), samples.num_outputs(), w),
        config: *cfg,
        diagnostics: no_diag(&samples.freqs),
    })
}

/// Scalar time-limited weight sqrt((ε/2)(e^{−2εt1} − e^{−2εt2})); the modulus
/// of e^{(−ε+jω)t} is frequency-independent, so the diagonal is constant.
pub fn tlbt_weight(eps: f64, t1: f64, t2: f64) -> f64 {
    (eps / 2.0 * ((-2.0 * eps * t1).exp() - (-2.0 * eps * t2).exp())).sqrt()
}

pub fn tlbt_factors(samples: &SampleSet, cfg: &VariantConfig) -> Result<GramianFactors> {
    let (t1, t2) = match cfg.variant {
        Variant::Tlbt { t1, t2 } => (t1, t2),
        _ => return Err(Error::Config(format!("expected TLBT, got {}", cfg.variant))),
    };
    cfg.validate()?;
    let w = tlbt_weight(cfg.eps, t1, t2);
    Ok(GramianFactors {
        zp_blocks: scalar_blocks(samples.freqs.len(), samples.num_inputs(), w),
        zq_blocks: scalar_blocks(samples.left_freqs().len(), samples.num_outputs(), w),
        config: *cfg,
        diagnostics: no_diag(&samples.freqs),
    })
}

// ---------------------------------------------------------------------------
// FLBT: frequency-band weights through the principal complex logarithm
// ---------------------------------------------------------------------------

/// L(a, ω) = (j/2π)·ln((jω+a)(−jω+a)^{-1}), principal branch.
pub fn scalar_log_l(a: c64, omega: f64) -> c64 {
    if omega == 0.0 {
        return c64::new(0.0, 0.0);
    }
    let jw = c64::new(0.0, omega);
    c64::new(0.0, 1.0 / (2.0 * std::f64::consts::PI)) * ((jw + a) / (a - jw)).ln()
}

/// L_Ω(a) = L(a, w2) − L(a, w1).
pub fn scalar_log_l_band(a: c64, w1: f64, w2: f64) -> c64 {
    scalar_log_l(a, w2) - scalar_log_l(a, w1)
}

pub fn flbt_factors(samples: &SampleSet, cfg: &VariantConfig) -> Result<GramianFactors> {
    let (w1, w2) = match cfg.variant {
        Variant::Flbt { w1, w2 } => (w1, w2),
        _ => return Err(Error::Config(format!("expected FLBT, got {}", cfg.variant))),
    };
    cfg.validate()?;
    let eps = cfg.eps;
    let weight_at = |w: f64| -> Result<f64> {
        let a = c64::new(-eps, w);
        let re = scalar_log_l_band(a, w1, w2).re;
        if re <= 0.0 {
            return Err(Error::Infeasible {
                variant: "FLBT".into(),
                detail: format!("Re L_Omega(-eps+j{w}) = {re:.3e} <= 0 (out-of-band sample)"),
            });
        }
        Ok((eps * re).sqrt())
    };
    let mut offending = Vec::new();
    let mut weights_right = Vec::with_capacity(samples.freqs.len());
    for &w in &samples.freqs {
        match weight_at(w) {
            Ok(v) => weights_right.push(v),
            Err(_) => offending.push(w),
        }
    }
    let mut weights_left = Vec::with_capacity(samples.left_freqs().len());
    for &w in samples.left_freqs() {
        match weight_at(w) {
            Ok(v) => weights_left.push(v),
            Err(_) => {
                if !offending.contains(&w) {
                    offending.push(w);
                }
            }
        }
    }
    if !offending.is_empty() {
        return Err(Error::Infeasible {
            variant: "FLBT".into(),
            detail: format!("Re L_Omega <= 0 at frequencies {offending:?}"),
        });
    }
    let m = samples.num_inputs();
    let p = samples.num_outputs();
    Ok(GramianFactors {
        zp_blocks: weights_right
            .iter()
            .map(|&w| Array2::<c64>::eye(m).mapv(|z| z * c64::new(w, 0.0)))
            .collect(),
        zq_blocks: weights_left
            .iter()
            .map(|&w| Array2::<c64>::eye(p).mapv(|z| z * c64::new(w, 0.0)))
            .collect(),
        config: *cfg,
        diagnostics: no_diag(&samples.freqs),
    })
}

// ---------------------------------------------------------------------------
// SWBT: self-weighted observability side
// ---------------------------------------------------------------------------

/// Z_p = sqrt(ε/2)·I; Z_q block i = sqrt(ε/2)·F_i with
/// F_i F_i* = ((G(jν_i)+D)(G(jν_i)+D)*)^{-1}, F_i from the Cholesky factor.
pub fn swbt_factors(samples: &SampleSet, cfg: &VariantConfig) -> Result<GramianFactors> {
    expect_variant(cfg, matches!(cfg.variant, Variant::Swbt), "SWBT")?;
    let (p, m) = (samples.num_outputs(), samples.num_inputs());
    if p != m {
        return Err(Error::Infeasible {
            variant: "SWBT".into(),
            detail: format!("system must be square, got {p}x{m}"),
        });
    }
    let d = la::to_complex(&samples.static_gain);
    let scale = (cfg.eps / 2.0).sqrt();
    let left_freqs: Vec<f64> = samples.left_freqs().to_vec();
    let idx: Vec<usize> = (0..left_freqs.len()).collect();
    la::ensure_serial_blas();
    let zq_blocks = par::try_map(&idx, |&i| {
        let hd = samples.left_proper(i) + &d;
        // (G+D)(G+D)* = L L*, F = L^{-*}
        let gram = hd.dot(&la::adj(&hd));
        let chol = gram.cholesky(UPLO::Lower).map_err(|_| Error::Infeasible {
            variant: "SWBT".into(),
            detail: format!("(G+D)(G+D)* not PD at {} rad/s", left_freqs[i]),
        })?;
        let linv = la::inv(&chol).map_err(|_| Error::Infeasible {
            variant: "SWBT".into(),
            detail: format!("(G+D) numerically singular at {} rad/s", left_freqs[i]),
        })?;
        let f = la::adj(&linv);
        if la::frob(&f) > 1e12 {
            return Err(Error::Infeasible {
                variant: "SWBT".into(),
                detail: format!(
                    "|(G+D)^-1| overflow at {} rad/s (non-minimum-phase-like data)",
                    left_freqs[i]
                ),
            });
        }
        Ok(f.mapv(|z| z * scale))
    })?;
    Ok(GramianFactors {
        zp_blocks: scalar_blocks(samples.freqs.len(), m, scale),
        zq_blocks,
        config: *cfg,
        diagnostics: no_diag(&samples.freqs),
    })
}

// ---------------------------------------------------------------------------
// LQGBT and H∞BT: scalar map of G*G (resp. GG*) eigenvalues
// ---------------------------------------------------------------------------

/// f(s) = ε(sqrt(1+θs) − 1)/(θs) with the continuous limit f(0) = ε/2.
fn lqg_scalar_map(eps: f64, theta: f64, s: f64) -> Result<f64> {
    let ts = theta * s;
    if 1.0 + ts <= 0.0 {
        return Err(Error::Infeasible {
            variant: "HinfBT".into(),
            detail: format!("1 + (1-gamma^2)|G|^2 = {:.3e} <= 0", 1.0 + ts),
        });
    }
    if ts.abs() < 1e-8 {
        // series: (sqrt(1+x)-1)/x = 1/2 - x/8 + ...
        Ok(eps * (0.5 - ts / 8.0))
    } else {
        Ok(eps * ((1.0 + ts).sqrt() - 1.0) / ts)
    }
}

fn lqg_block(g_gram: &Array2<c64>, eps: f64, theta: f64) -> Result<Array2<c64>> {
    let (ev, vecs) = la::eigh_herm(&la::hermitianize(g_gram))?;
    let mut sq = Array1::<c64>::zeros(ev.len());
    for (k, &s) in ev.iter().enumerate() {
        let f = lqg_scalar_map(eps, theta, s.max(0.0))?;
        sq[k] = c64::new(f.sqrt(), 0.0);
    }
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|z| z * sq[j]);
    }
    Ok(scaled.dot(&la::adj(&vecs)))
}

/// LQGBT (θ = 1) and H∞BT (θ = 1 − γ²) share the same block construction:
/// Z_pZ_p* block i = ε(θG*G)^{-1}((I+θG*G)^{1/2} − I), dual with GG*.
pub fn lqg_hinf_factors(samples: &SampleSet, cfg: &VariantConfig) -> Result<GramianFactors> {
    let theta = match cfg.variant {
        Variant::Lqgbt => 1.0,
        Variant::HinfBt { gamma } => 1.0 - gamma * gamma,
        _ => {
            return Err(Error::Config(format!(
                "expected LQGBT or HinfBT, got {}",
                cfg.variant
            )))
        }
    };
    cfg.validate()?;
    let eps = cfg.eps;
    let right_idx: Vec<usize> = (0..samples.freqs.len()).collect();
    let zp_blocks = par::try_map(&right_idx, |&i| {
        let g = samples.proper(i);
        lqg_block(&la::adj(&g).dot(&g), eps, theta)
    })?;
    let left_idx: Vec<usize> = (0..samples.left_freqs().len()).collect();
    let zq_blocks = par::try_map(&left_idx, |&i| {
        let g = samples.left_proper(i);
        lqg_block(&g.dot(&la::adj(&g)), eps, theta)
    })?;
    Ok(GramianFactors {
        zp_blocks,
        zq_blocks,
        config: *cfg,
        diagnostics: no_diag(&samples.freqs),
    })
}

// ---------------------------------------------------------------------------
// Riccati-template variants: ε·α^{-1}(I − (I − αβ)^{1/2})
// ---------------------------------------------------------------------------

/// Evaluate the per-point block ε·α^{-1}(I − (I−αβ)^{1/2}) with the two-term
/// series ε(β/2 + βαβ/8) on the removable singularity ‖αβ‖ < 1e-8, clamp to
/// Hermitian PSD, and return its factor.
fn riccati_block(
    alpha: &Array2<c64>,
    beta: &Array2<c64>,
    eps: f64,
    variant: &str,
    freq: f64,
) -> Result<Array2<c64>> {
    let m = alpha.dot(beta);
    let dim = m.nrows();
    let block = if la::norm2(&m) < 1e-8 {
        let bab = beta.dot(alpha).dot(beta);
        (beta.mapv(|z| z * 0.5) + bab.mapv(|z| z * 0.125)).mapv(|z| z * eps)
    } else {
        let rho = la::eigvals(&m)?
            .iter()
            .map(|l| l.norm())
            .fold(0.0f64, f64::max);
        if rho > 1.0 + 1e-10 {
            return Err(Error::Infeasible {
                variant: variant.into(),
                detail: format!("spectral radius of alpha*beta = {rho:.6} > 1 at {freq} rad/s"),
            });
        }
        let inner = la::eye(dim) - &m;
        let root = la::principal_sqrt(&inner)?;
        let rhs = la::eye(dim) - root;
        la::solve_mat(alpha, &rhs)
            .map(|x| x.mapv(|z| z * eps))
            .or_else(|_| {
                // α numerically singular away from the series regime
                let bab = beta.dot(alpha).dot(beta);
                Ok::<_, Error>((beta.mapv(|z| z * 0.5) + bab.mapv(|z| z * 0.125)).mapv(|z| z * eps))
            })?
    };
    la::psd_factor(&block, variant).map_err(|e| match e {
        Error::Infeasible { variant, detail } => Error::Infeasible {
            variant,
            detail: format!("{detail} at {freq} rad/s"),
        },
        other => other,
    })
}

/// PRBT: α = G*(D+Dᵀ)^{-1}G, β = (I+(D+Dᵀ)^{-1}G)^{-1}(D+Dᵀ)^{-1}(I+(D+Dᵀ)^{-1}G)^{-*};
/// duals with G ↦ G* on the left grid.
pub fn prbt_factors(samples: &SampleSet, cfg: &VariantConfig) -> Result<GramianFactors> {
    expect_variant(cfg, matches!(cfg.variant, Variant::Prbt), "PRBT")?;
    let (p, m) = (samples.num_outputs(), samples.num_inputs());
    if p != m {
        return Err(Error::Infeasible {
            variant: "PRBT".into(),
            detail: format!("system must be square, got {p}x{m}"),
        });
    }
    let d = la::to_complex(&samples.static_gain);
    let r0 = &d + &la::adj(&d);
    let r0_inv = la::inv(&r0).map_err(|_| Error::Infeasible {
        variant: "PRBT".into(),
        detail: "D+Dᵀ singular".into(),
    })?;
    let eps = cfg.eps;

    let right: Vec<(f64, Array2<c64>)> = samples
        .freqs
        .iter()
        .enumerate()
        .map(|(i, &w)| (w, samples.proper(i)))
        .collect();
    let mut diagnostics = Vec::with_capacity(right.len());
    let zp_blocks = par::try_map(&right, |(w, g)| {
        let alpha = la::adj(g).dot(&r0_inv).dot(g);
        let n = la::eye(m) + r0_inv.dot(g);
        let n_inv = la::inv(&n).map_err(|_| Error::Infeasible {
            variant: "PRBT".into(),
            detail: format!("I + (D+Dᵀ)^-1 G singular at {w} rad/s"),
        })?;
        let beta = n_inv.dot(&r0_inv).dot(&la::adj(&n_inv));
        riccati_block(&alpha, &beta, eps, "PRBT", *w)
    })?;
    for (w, g) in &right {
        let alpha = la::adj(g).dot(&r0_inv).dot(g);
        diagnostics.push(PointDiagnostic {
            freq: *w,
            alpha_norm: Some(la::norm2(&alpha)),
            beta_norm: None,
        });
    }

    let left: Vec<(f64, Array2<c64>)> = samples
        .left_freqs()
        .iter()
        .enumerate()
        .map(|(i, &w)| (w, samples.left_proper(i)))
        .collect();
    let zq_blocks = par::try_map(&left, |(w, g)| {
        let gs = la::adj(g);
        let alpha = g.dot(&r0_inv).dot(&gs);
        let n = la::eye(p) + r0_inv.dot(&gs);
        let n_inv = la::inv(&n).map_err(|_| Error::Infeasible {
            variant: "PRBT".into(),
            detail: format!("I + (D+Dᵀ)^-1 G* singular at {w} rad/s"),
        })?;
        let beta = n_inv.dot(&r0_inv).dot(&la::adj(&n_inv));
        riccati_block(&alpha, &beta, eps, "PRBT", *w)
    })?;

    Ok(GramianFactors {
        zp_blocks,
        zq_blocks,
        config: *cfg,
        diagnostics,
    })
}

/// BRBT: α = G*(I−DDᵀ)^{-1}G,
/// β = (I−Dᵀ(I−DDᵀ)^{-1}G)^{-1}(I+Dᵀ(I+DDᵀ)^{-1}D)(I−Dᵀ(I−DDᵀ)^{-1}G)^{-*};
/// duals with the transposed D products on the left grid.
pub fn brbt_factors(samples: &SampleSet, cfg: &VariantConfig) -> Result<GramianFactors> {
    expect_variant(cfg, matches!(cfg.variant, Variant::Brbt), "BRBT")?;
    let (p, m) = (samples.num_outputs(), samples.num_inputs());
    let d = la::to_complex(&samples.static_gain);
    let dt = la::adj(&d);
    let s_inv = la::inv(&(la::eye(p) - d.dot(&dt))).map_err(|_| Error::Infeasible {
        variant: "BRBT".into(),
        detail: "I − DDᵀ singular".into(),
    })?;
    let t_inv = la::inv(&(la::eye(m) - dt.dot(&d))).map_err(|_| Error::Infeasible {
        variant: "BRBT".into(),
        detail: "I − DᵀD singular".into(),
    })?;
    let mid_p = la::eye(m)
        + dt.dot(&la::inv(&(la::eye(p) + d.dot(&dt)))?)
            .dot(&d);
    let mid_q = la::eye(p)
        + d.dot(&la::inv(&(la::eye(m) + dt.dot(&d)))?)
            .dot(&dt);
    let eps = cfg.eps;

    let right: Vec<(f64, Array2<c64>)> = samples
        .freqs
        .iter()
        .enumerate()
        .map(|(i, &w)| (w, samples.proper(i)))
        .collect();
    let zp_blocks = par::try_map(&right, |(w, g)| {
        let alpha = la::adj(g).dot(&s_inv).dot(g);
        let n = la::eye(m) - dt.dot(&s_inv).dot(g);
        let n_inv = la::inv(&n).map_err(|_| Error::Infeasible {
            variant: "BRBT".into(),
            detail: format!("I − Dᵀ(I−DDᵀ)^-1 G singular at {w} rad/s"),
        })?;
        let beta = n_inv.dot(&mid_p).dot(&la::adj(&n_inv));
        riccati_block(&alpha, &beta, eps, "BRBT", *w)
    })?;

    let left: Vec<(f64, Array2<c64>)> = samples
        .left_freqs()
        .iter()
        .enumerate()
        .map(|(i, &w)| (w, samples.left_proper(i)))
        .collect();
    let zq_blocks = par::try_map(&left, |(w, g)| {
        let gs = la::adj(g);
        let alpha = g.dot(&t_inv).dot(&gs);
        let n = la::eye(p) - d.dot(&t_inv).dot(&gs);
        let n_inv = la::inv(&n).map_err(|_| Error::Infeasible {
            variant: "BRBT".into(),
            detail: format!("I − D(I−DᵀD)^-1 G* singular at {w} rad/s"),
        })?;
        let beta = n_inv.dot(&mid_q).dot(&la::adj(&n_inv));
        riccati_block(&alpha, &beta, eps, "BRBT", *w)
    })?;

    Ok(GramianFactors {
        zp_blocks,
        zq_blocks,
        config: *cfg,
        diagnostics: no_diag(&samples.freqs),
    })
}

/// BST: Z_p = sqrt(ε/2)·I; Z_q block i built from
/// K_i = G(jν_i)Dᵀ − (ε/2)·dd_i·G*(jω_i) with dd_i the divided difference
/// (G(jω_i)−G(jν_i))/(jω_i−jν_i), replaced by G′(jν_i) on coincident grids:
/// α = K(DDᵀ)^{-1}K*, β = N^{-*}(DDᵀ)^{-1}N^{-1}, N = I + K(DDᵀ)^{-1}.
pub fn bst_factors(samples: &SampleSet, cfg: &VariantConfig) -> Result<GramianFactors> {
    expect_variant(cfg, matches!(cfg.variant, Variant::Bst), "BST")?;
    let (p, m) = (samples.num_outputs(), samples.num_inputs());
    if p != m {
        return Err(Error::Infeasible {
            variant: "BST".into(),
            detail: format!("system must be square, got {p}x{m}"),
        });
    }
    let d = la::to_complex(&samples.static_gain);
    let ddt_inv = la::inv(&d.dot(&la::adj(&d))).map_err(|_| Error::Infeasible {
        variant: "BST".into(),
        detail: "DDᵀ singular".into(),
    })?;
    let eps = cfg.eps;

    // pair left point i with the matched right point (same index when the
    // grids coincide, nearest right frequency otherwise)
    let left_freqs: Vec<f64> = samples.left_freqs().to_vec();
    let matched = samples.left.is_none()
        || (left_freqs.len() == samples.freqs.len()
            && left_freqs
                .iter()
                .zip(&samples.freqs)
                .all(|(&v, &w)| coincident(w, v)));
    let pair_of = |i: usize, nu: f64| -> usize {
        if matched {
            i
        } else {
            samples
                .freqs
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    (*a - nu).abs().partial_cmp(&(*b - nu).abs()).unwrap()
                })
                .map(|(j, _)| j)
                .unwrap()
        }
    };

    let idx: Vec<usize> = (0..left_freqs.len()).collect();
    let zq_blocks = par::try_map(&idx, |&i| {
        let nu = left_freqs[i];
        let j = pair_of(i, nu);
        let omega = samples.freqs[j];
        let g_nu = samples.left_proper(i);
        let g_om = samples.proper(j);
        let dd = if coincident(omega, nu) {
            samples
                .left_derivative(i)
                .cloned()
                .ok_or(Error::MissingDerivative(nu))?
        } else {
            (&g_om - &g_nu).mapv(|z| z / (c64::new(0.0, omega) - c64::new(0.0, nu)))
        };
        let k = g_nu.dot(&la::adj(&d)) - dd.dot(&la::adj(&g_om)).mapv(|z| z * (eps / 2.0));
        let alpha = k.dot(&ddt_inv).dot(&la::adj(&k));
        let n = la::eye(p) + k.dot(&ddt_inv);
        let n_inv = la::inv(&n).map_err(|_| Error::Infeasible {
            variant: "BST".into(),
            detail: format!("inner matrix singular at {nu} rad/s"),
        })?;
        let beta = la::adj(&n_inv).dot(&ddt_inv).dot(&n_inv);
        riccati_block(&alpha, &beta, eps, "BST", nu)
    })?;

    Ok(GramianFactors {
        zp_blocks: scalar_blocks(samples.freqs.len(), m, (eps / 2.0).sqrt()),
        zq_blocks,
        config: *cfg,
        diagnostics: no_diag(&left_freqs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn siso_set(freqs: Vec<f64>, g: Vec<c64>, d: f64) -> SampleSet {
        let samples = g.into_iter().map(|z| array![[z + d]]).collect();
        SampleSet::new(freqs, samples, None, array![[d]], false).unwrap()
    }

    fn weight00(b: &Array2<c64>) -> f64 {
        b[[0, 0]].re
    }

    #[test]
    fn bt_eps_two_gives_identity() {
        let set = siso_set(vec![1.0, 2.0], vec![c64::new(0.3, 0.1); 2], 0.0);
        let f = bt_factors(&set, &VariantConfig::new(Variant::Bt, 2.0)).unwrap();
        assert_relative_eq!(weight00(&f.zp_blocks[0]), 1.0, max_relative = 1e-15);
        assert_relative_eq!(weight00(&f.zq_blocks[1]), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn bt_protocol_eps_value() {
        let set = siso_set(vec![1.0], vec![c64::new(0.0, 0.0)], 0.0);
        let f = bt_factors(&set, &VariantConfig::new(Variant::Bt, 1e-4)).unwrap();
        assert_relative_eq!(weight00(&f.zp_blocks[0]), 7.0710678e-3, max_relative = 1e-7);
    }

    /// independent oracle: numerical quadrature of
    /// Re L_Ω(a) = (1/2π)∫_{ω1<|ν|<ω2} ε/(ε²+(ν−ω)²) dν.
    /// The integrand is a width-ε Lorentzian, so the segment around the peak
    /// is refined separately from the smooth tails.
    fn quad_re_l_band(eps: f64, omega: f64, w1: f64, w2: f64) -> f64 {
        let f = |nu: f64| eps / (eps * eps + (nu - omega) * (nu - omega));
        let trapz = |lo: f64, hi: f64, n: usize| -> f64 {
            if hi <= lo {
                return 0.0;
            }
            let h = (hi - lo) / n as f64;
            let mut acc = 0.5 * (f(lo) + f(hi));
            for k in 1..n {
                acc += f(lo + h * k as f64);
            }
            acc * h
        };
        let mut total = 0.0;
        for (lo, hi) in [(w1, w2), (-w2, -w1)] {
            let pl = (omega - 2000.0 * eps).clamp(lo, hi);
            let ph = (omega + 2000.0 * eps).clamp(lo, hi);
            total += trapz(lo, pl, 200_000);
            total += trapz(pl, ph, 400_000);
            total += trapz(ph, hi, 200_000);
        }
        total / (2.0 * std::f64::consts::PI)
    }

    #[test]
    fn flbt_in_band_weight_matches_quadrature_and_half() {
        let eps = 1e-6;
        let re = scalar_log_l_band(c64::new(-eps, 10.0), 1.0, 30.0).re;
        assert!((re - 0.5).abs() < 1e-3, "Re L_band = {re}");
        let q = quad_re_l_band(eps, 10.0, 1.0, 30.0);
        assert_relative_eq!(re, q, max_relative = 1e-4);
        // milder damping where the uniform tail segments dominate
        let eps2 = 1e-3;
        let re2 = scalar_log_l_band(c64::new(-eps2, 10.0), 1.0, 30.0).re;
        let q2 = quad_re_l_band(eps2, 10.0, 1.0, 30.0);
        assert_relative_eq!(re2, q2, max_relative = 1e-6);
        let set = siso_set(vec![10.0], vec![c64::new(0.0, 0.0)], 0.0);
        let f = flbt_factors(
            &set,
            &VariantConfig::new(Variant::Flbt { w1: 1.0, w2: 30.0 }, eps),
        )
        .unwrap();
        let expected = (eps / 2.0).sqrt();
        assert!((weight00(&f.zp_blocks[0]) - expected).abs() < 2e-3 * expected);
    }

    #[test]
    fn flbt_out_of_band_weight_positive_and_small() {
        let eps = 1e-4;
        let re = scalar_log_l_band(c64::new(-eps, 1000.0), 1.0, 30.0).re;
        assert!(re > 0.0 && re < 1e-4, "Re L_band = {re}");
    }

    #[test]
    fn flbt_full_band_recovers_bt() {
        let eps = 1e-6;
        let re = scalar_log_l_band(c64::new(-eps, 5.0), 0.0, 1e9).re;
        assert!((re - 0.5).abs() < 1e-6);
    }

    #[test]
    fn tlbt_limits() {
        assert_relative_eq!(
            tlbt_weight(1e-4, 0.0, f64::INFINITY),
            (1e-4f64 / 2.0).sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(tlbt_weight(1e-4, 3.0, 3.0), 0.0);
        // [0,5] s at eps = 1e-4: sqrt(5e-5 (1 - e^-1e-3))
        let w = tlbt_weight(1e-4, 0.0, 5.0);
        let direct = (5e-5 * (1.0 - (-1e-3f64).exp())).sqrt();
        assert_relative_eq!(w, direct, max_relative = 1e-14);
        assert!((w - 2.2355e-4).abs() < 1e-7);
    }

    /// scalar-mode quadrature oracle for the TLBT weight: the time-limited
    /// Gramian of a mode −ε+jω with unit input is ∫ |e^{(−ε+jω)t}|² dt
    #[test]
    fn tlbt_weight_matches_scalar_integral() {
        let (eps, t1, t2) = (1e-4, 0.0, 5.0);
        let n = 200_000;
        let h = (t2 - t1) / n as f64;
        let f = |t: f64| (-2.0 * eps * t).exp();
        let mut acc = 0.5 * (f(t1) + f(t2));
        for k in 1..n {
            acc += f(t1 + h * k as f64);
        }
        let integral = acc * h; // equals (e^{-2εt1} - e^{-2εt2})/(2ε)
        let expected = (eps / 2.0 * (2.0 * eps * integral)).sqrt();
        assert_relative_eq!(tlbt_weight(eps, t1, t2), expected, max_relative = 1e-9);
    }

    #[test]
    fn tlbt_rejects_reversed_window() {
        let set = siso_set(vec![1.0], vec![c64::new(0.0, 0.0)], 0.0);
        let cfg = VariantConfig::new(Variant::Tlbt { t1: 5.0, t2: 1.0 }, 1e-4);
        assert!(tlbt_factors(&set, &cfg).is_err());
    }

    #[test]
    fn swbt_siso_values() {
        let eps = 1e-4;
        // G = 0, D = 2 -> weight sqrt(eps/2)/2
        let set = siso_set(vec![1.0], vec![c64::new(0.0, 0.0)], 2.0);
        let f = swbt_factors(&set, &VariantConfig::new(Variant::Swbt, eps)).unwrap();
        assert_relative_eq!(
            weight00(&f.zq_blocks[0]),
            (eps / 2.0).sqrt() / 2.0,
            max_relative = 1e-12
        );
        // G = 1+0j, D = 1 -> |G+D| = 2
        let set = siso_set(vec![1.0], vec![c64::new(1.0, 0.0)], 1.0);
        let f = swbt_factors(&set, &VariantConfig::new(Variant::Swbt, eps)).unwrap();
        assert_relative_eq!(
            weight00(&f.zq_blocks[0]).abs(),
            (eps / 2.0).sqrt() / 2.0,
            max_relative = 1e-12
        );
        // SISO closed form |G+D|^2 = D^2+|G|^2+2D Re G
        let g = c64::new(0.3, -0.7);
        let d = 1.5;
        let set = siso_set(vec![2.0], vec![g], d);
        let f = swbt_factors(&set, &VariantConfig::new(Variant::Swbt, eps)).unwrap();
        let denom = d * d + g.norm_sqr() + 2.0 * d * g.re;
        assert_relative_eq!(
            weight00(&f.zq_blocks[0]).abs(),
            (eps / 2.0 / denom).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn lqg_small_gain_limit_and_value() {
        let eps = 1e-4;
        let set = siso_set(vec![1.0], vec![c64::new(1e-9, 0.0)], 0.0);
        let f = lqg_hinf_factors(&set, &VariantConfig::new(Variant::Lqgbt, eps)).unwrap();
        assert_relative_eq!(
            weight00(&f.zp_blocks[0]),
            (eps / 2.0).sqrt(),
            max_relative = 1e-8
        );
        // |G| = 1: f = eps(sqrt(2)-1), weight = sqrt(f)
        let set = siso_set(vec![1.0], vec![c64::new(0.0, 1.0)], 0.0);
        let f = lqg_hinf_factors(&set, &VariantConfig::new(Variant::Lqgbt, eps)).unwrap();
        let expected = (eps * (2.0f64.sqrt() - 1.0)).sqrt();
        assert_relative_eq!(weight00(&f.zp_blocks[0]), expected, max_relative = 1e-12);
        assert!((expected - 6.4360e-3).abs() < 1e-6);
    }

    /// stabilizing root of the per-mode scalar Riccati −2εp + ε² − |G|²p² = 0
    /// equals the LQG scalar map at s = |G|²
    #[test]
    fn lqg_scalar_riccati_oracle() {
        let eps: f64 = 1e-4;
        for &gabs in &[0.1f64, 0.5, 1.0, 3.0, 10.0] {
            let s = gabs * gabs;
            // p = eps(sqrt(1+s)-1)/s from the quadratic formula on s p² + 2εp − ε² = 0
            let p = (-2.0 * eps + (4.0 * eps * eps + 4.0 * s * eps * eps).sqrt()) / (2.0 * s);
            let f = lqg_scalar_map(eps, 1.0, s).unwrap();
            assert_relative_eq!(f, p, max_relative = 1e-12);
        }
    }

    #[test]
    fn hinf_gamma_zero_is_lqg_bitwise() {
        let set = siso_set(
            vec![1.0, 4.0],
            vec![c64::new(0.4, 0.2), c64::new(-0.3, 0.9)],
            0.0,
        );
        let eps = 1e-4;
        let lqg = lqg_hinf_factors(&set, &VariantConfig::new(Variant::Lqgbt, eps)).unwrap();
        let hinf = lqg_hinf_factors(
            &set,
            &VariantConfig::new(Variant::HinfBt { gamma: 0.0 }, eps),
        )
        .unwrap();
        for (a, b) in lqg
            .zp_blocks
            .iter()
            .chain(lqg.zq_blocks.iter())
            .zip(hinf.zp_blocks.iter().chain(hinf.zq_blocks.iter()))
        {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn hinf_infeasible_large_gamma_large_gain() {
        let set = siso_set(vec![1.0], vec![c64::new(5.0, 0.0)], 0.0);
        let cfg = VariantConfig::new(Variant::HinfBt { gamma: 2.0 }, 1e-4);
        assert!(matches!(
            lqg_hinf_factors(&set, &cfg),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn prbt_siso_formulas() {
        let eps = 1e-4;
        // G = 0, D: alpha = 0 -> series limit weight = sqrt(eps beta / 2), beta = 1/(2D)
        let d = 1.0;
        let set = siso_set(vec![1.0], vec![c64::new(0.0, 0.0)], d);
        let f = prbt_factors(&set, &VariantConfig::new(Variant::Prbt, eps)).unwrap();
        assert_relative_eq!(
            weight00(&f.zp_blocks[0]),
            (eps / (2.0 * 2.0 * d)).sqrt(),
            max_relative = 1e-10
        );
        // alpha*beta = 3/4 -> weight^2 = eps(1 - 1/2)/alpha
        // SISO: alpha = |G|^2/(2D), beta = 1/(2D |1+G/(2D)|^2)
        let g = c64::new(0.6, 0.45); // |G|=0.75
        let d = 0.5;
        let set = siso_set(vec![2.0], vec![g], d);
        let f = prbt_factors(&set, &VariantConfig::new(Variant::Prbt, eps)).unwrap();
        let r0 = 2.0 * d;
        let alpha = g.norm_sqr() / r0;
        let beta = 1.0 / (r0 * (c64::new(1.0, 0.0) + g / r0).norm_sqr());
        let ab = alpha * beta;
        assert!(ab < 1.0);
        let expected = (eps * (1.0 - (1.0 - ab).sqrt()) / alpha).sqrt();
        assert_relative_eq!(weight00(&f.zp_blocks[0]), expected, max_relative = 1e-10);
    }

    /// quadratic-formula oracle: stabilizing (smaller) root of
    /// α p² − 2εp + ε²β = 0 equals ε(1−sqrt(1−αβ))/α
    #[test]
    fn riccati_scalar_quadratic_oracle_100_draws() {
        let eps = 1e-4;
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let alpha = 1e-3 + 10.0 * next();
            let ab = 0.999 * next();
            let beta = ab / alpha;
            let disc = (4.0 * eps * eps - 4.0 * alpha * eps * eps * beta).sqrt();
            let root_small = (2.0 * eps - disc) / (2.0 * alpha);
            let closed = eps * (1.0 - (1.0 - ab).sqrt()) / alpha;
            assert_relative_eq!(closed, root_small, max_relative = 1e-12);
            // block path agrees with the closed form
            let a = array![[c64::new(alpha, 0.0)]];
            let b = array![[c64::new(beta, 0.0)]];
            let blk = riccati_block(&a, &b, eps, "PRBT", 1.0).unwrap();
            assert_relative_eq!(blk[[0, 0]].re * blk[[0, 0]].re, closed, max_relative = 1e-9);
        }
    }

    #[test]
    fn prbt_rejects_non_positive_real_data() {
        // Re G < -D makes spectral radius of alpha*beta exceed 1
        let set = siso_set(vec![1.0], vec![c64::new(-2.0, 0.0)], 0.5);
        let cfg = VariantConfig::new(Variant::Prbt, 1e-4);
        assert!(matches!(
            prbt_factors(&set, &cfg),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn brbt_siso_d_zero() {
        let eps = 1e-4;
        // D=0: alpha = |G|^2, beta = 1
        let g = c64::new(0.3, 0.4); // |G| = 0.5
        let set = siso_set(vec![1.0], vec![g], 0.0);
        let f = brbt_factors(&set, &VariantConfig::new(Variant::Brbt, eps)).unwrap();
        let ab = g.norm_sqr();
        let expected = (eps * (1.0 - (1.0 - ab).sqrt()) / ab).sqrt();
        assert_relative_eq!(weight00(&f.zp_blocks[0]), expected, max_relative = 1e-10);
        // |G| -> 0 limit: sqrt(eps/2)
        let set = siso_set(vec![1.0], vec![c64::new(1e-9, 0.0)], 0.0);
        let f = brbt_factors(&set, &VariantConfig::new(Variant::Brbt, eps)).unwrap();
        assert_relative_eq!(
            weight00(&f.zp_blocks[0]),
            (eps / 2.0).sqrt(),
            max_relative = 1e-8
        );
    }

    #[test]
    fn bst_derivative_vs_divided_difference_paths() {
        // coincident grid uses G'(jν); a slightly split left grid must agree
        let eps = 1e-6;
        let model = crate::model::generate_model(&crate::model::ModelKind::RlcLadder {
            sections: 3,
            r: 0.1,
            lind: 0.1,
            cap: 0.1,
            rload: 1.0,
            d_offset: 0.8,
        })
        .unwrap();
        let freqs = vec![0.7, 2.0, 5.0];
        let matched = crate::model::sample_transfer(&model, &freqs, true).unwrap();
        let cfg = VariantConfig::new(Variant::Bst, eps);
        let f_matched = bst_factors(&matched, &cfg).unwrap();

        let left_freqs: Vec<f64> = freqs.iter().map(|w| w * (1.0 + 1e-6)).collect();
        let left_sampled = crate::model::sample_transfer(&model, &left_freqs, false).unwrap();
        let split = crate::model::sample_transfer(&model, &freqs, false)
            .unwrap()
            .with_left(crate::data::LeftGrid {
                freqs: left_freqs,
                samples: left_sampled.samples,
                derivatives: None,
            })
            .unwrap();
        let f_split = bst_factors(&split, &cfg).unwrap();
        for (a, b) in f_matched.zq_blocks.iter().zip(&f_split.zq_blocks) {
            let rel = la::frob(&(a - b)) / la::frob(a);
            assert!(rel < 1e-4, "paths disagree: rel {rel}");
        }
    }

    #[test]
    fn bst_eps_continuity() {
        let model = crate::model::generate_model(&crate::model::ModelKind::RlcLadder {
            sections: 3,
            r: 0.1,
            lind: 0.1,
            cap: 0.1,
            rload: 1.0,
            d_offset: 1.0,
        })
        .unwrap();
        let set = crate::model::sample_transfer(&model, &[0.7, 2.0, 5.0], true).unwrap();
        let f6 = bst_factors(&set, &VariantConfig::new(Variant::Bst, 1e-6)).unwrap();
        let f7 = bst_factors(&set, &VariantConfig::new(Variant::Bst, 1e-7)).unwrap();
        for (a, b) in f6.zq_blocks.iter().zip(&f7.zq_blocks) {
            // weights scale like sqrt(eps); compare normalized shapes
            let an = a.mapv(|z| z / c64::new(la::frob(a), 0.0));
            let bn = b.mapv(|z| z / c64::new(la::frob(b), 0.0));
            assert!(la::frob(&(&an - &bn)) < 1e-4);
        }
    }

    #[test]
    fn bst_missing_derivative_is_an_error() {
        let set = siso_set(vec![1.0, 2.0], vec![c64::new(0.1, 0.0); 2], 1.0);
        let cfg = VariantConfig::new(Variant::Bst, 1e-4);
        assert!(matches!(
            bst_factors(&set, &cfg),
            Err(Error::MissingDerivative(_))
        ));
    }

    #[test]
    fn factors_are_psd_and_conjugate_symmetric() {
        let mut model = crate::model::generate_model(&crate::model::ModelKind::RlcLadder {
            sections: 4,
            r: 0.1,
            lind: 0.1,
            cap: 0.1,
            rload: 1.0,
            d_offset: 0.6,
        })
        .unwrap();
        // scale the output so the data is bounded-real (max |H| < 1) while
        // staying strictly passive for PRBT/SWBT/BST
        model.c.mapv_inplace(|x| 0.15 * x);
        let raw = crate::model::sample_transfer(&model, &[0.5, 1.5, 4.0], true).unwrap();
        let set = crate::data::conjugate_close(&raw).unwrap();
        let eps = 1e-4;
        let configs = [
            VariantConfig::new(Variant::Bt, eps),
            VariantConfig::new(Variant::Flbt { w1: 0.1, w2: 10.0 }, eps),
            VariantConfig::new(Variant::Tlbt { t1: 0.0, t2: 5.0 }, eps),
            VariantConfig::new(Variant::Swbt, eps),
            VariantConfig::new(Variant::Lqgbt, eps),
            VariantConfig::new(Variant::HinfBt { gamma: 0.5 }, eps),
            VariantConfig::new(Variant::Prbt, eps),
            VariantConfig::new(Variant::Brbt, eps),
            VariantConfig::new(Variant::Bst, eps),
        ];
        for cfg in &configs {
            let f = variant_factors(&set, cfg).unwrap();
            // +ω and −ω positions carry equal scalar weights
            for (i, &w) in set.freqs.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                let j = set.freqs.iter().position(|&v| v == -w).unwrap();
                let wi = la::frob(&f.zq_blocks[i]);
                let wj = la::frob(&f.zq_blocks[j]);
                assert!(
                    (wi - wj).abs() <= 1e-10 * wi.max(1e-300),
                    "{}: weight asymmetry at ±{w}: {wi} vs {wj}",
                    cfg.variant
                );
            }
            // Z Z* PSD by construction; verify the assembled product
            let zq = f.zq_matrix();
            let prod = zq.dot(&la::adj(&zq));
            let (ev, _) = la::eigh_herm(&prod).unwrap();
            let scale = ev.iter().cloned().fold(0.0f64, f64::max);
            assert!(ev.iter().all(|&l| l >= -1e-12 * scale));
        }
    }
}
