//! Loewner quadruplet assembly from samples, including Hermite entries.

use crate::data::SampleSet;
use crate::error::{Error, Result};
use crate::grid::coincident;
use crate::la;
use crate::par;
use ndarray::prelude::*;
use num_complex::Complex64 as c64;

/// (L, L_s, B̂, Ĉ) with L, L_s of shape (p·n_u)×(m·n_s), B̂ (p·n_u)×m and
/// Ĉ p×(m·n_s); the strictly proper part G = H − D enters every entry.
#[derive(Debug, Clone)]
pub struct LoewnerQuadruplet {
    pub l: Array2<c64>,
    pub ls: Array2<c64>,
    pub bhat: Array2<c64>,
    pub chat: Array2<c64>,
    /// Right-grid frequencies ω_j (σ_j = jω_j).
    pub right_freqs: Vec<f64>,
    /// Left-grid frequencies ν_i (μ_i = jν_i).
    pub left_freqs: Vec<f64>,
    pub num_inputs: usize,
    pub num_outputs: usize,
    /// Static gain carried through to evaluation.
    pub static_gain: Array2<f64>,
}

impl LoewnerQuadruplet {
    pub fn n_s(&self) -> usize {
        self.right_freqs.len()
    }

    pub fn n_u(&self) -> usize {
        self.left_freqs.len()
    }

    /// Raw little-endian binary dump (shape header + doubles), a debugging
    /// aid with no stability guarantee.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for dim in [
            self.l.nrows(),
            self.l.ncols(),
            self.num_outputs,
            self.num_inputs,
        ] {
            out.extend_from_slice(&(dim as u64).to_le_bytes());
        }
        for mat in [&self.l, &self.ls, &self.bhat, &self.chat] {
            for z in mat.iter() {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }
}

/// Assemble the quadruplet. Off-coincident blocks use divided differences of
/// G; coincident blocks need derivative data and become Hermite entries.
pub fn build_loewner(samples: &SampleSet) -> Result<LoewnerQuadruplet> {
    samples.validate()?;
    let (p, m) = (samples.num_outputs(), samples.num_inputs());
    let right_freqs = samples.freqs.clone();
    let left_freqs: Vec<f64> = samples.left_freqs().to_vec();
    let n_s = right_freqs.len();
    let n_u = left_freqs.len();

    let right_g: Vec<Array2<c64>> = (0..n_s).map(|j| samples.proper(j)).collect();
    let right_dg: Vec<Option<Array2<c64>>> = (0..n_s)
        .map(|j| samples.derivatives.as_ref().map(|d| d[j].clone()))
        .collect();
    let left_g: Vec<Array2<c64>> = (0..n_u).map(|i| samples.left_proper(i)).collect();

    let rows: Vec<usize> = (0..n_u).collect();
    let blocks = par::try_map(&rows, |&i| {
        let mu = c64::new(0.0, left_freqs[i]);
        let gi = &left_g[i];
        let mut lrow = Array2::<c64>::zeros((p, m * n_s));
        let mut lsrow = Array2::<c64>::zeros((p, m * n_s));
        for j in 0..n_s {
            let sigma = c64::new(0.0, right_freqs[j]);
            let gj = &right_g[j];
            let (lb, lsb) = if coincident(right_freqs[j], left_freqs[i]) {
                let dg = right_dg[j]
                    .as_ref()
                    .ok_or(Error::MissingDerivative(right_freqs[j]))?;
                // Hermite entry: L = −G'(σ), Ls = −G(σ) − σG'(σ)
                let lb = dg.mapv(|z| -z);
                let lsb = gj.mapv(|z| -z) - dg.mapv(|z| z * sigma);
                (lb, lsb)
            } else {
                let denom = sigma - mu;
                let lb = (gj - gi).mapv(|z| -z / denom);
                let lsb = (gj.mapv(|z| z * sigma) - gi.mapv(|z| z * mu)).mapv(|z| -z / denom);
                (lb, lsb)
            };
            lrow.slice_mut(s![.., j * m..(j + 1) * m]).assign(&lb);
            lsrow.slice_mut(s![.., j * m..(j + 1) * m]).assign(&lsb);
        }
        Ok((lrow, lsrow))
    })?;

    let mut l = Array2::<c64>::zeros((p * n_u, m * n_s));
    let mut ls = Array2::<c64>::zeros((p * n_u, m * n_s));
    for (i, (lrow, lsrow)) in blocks.into_iter().enumerate() {
        l.slice_mut(s![i * p..(i + 1) * p, ..]).assign(&lrow);
        ls.slice_mut(s![i * p..(i + 1) * p, ..]).assign(&lsrow);
    }

    let mut bhat = Array2::<c64>::zeros((p * n_u, m));
    for i in 0..n_u {
        bhat.slice_mut(s![i * p..(i + 1) * p, ..]).assign(&left_g[i]);
    }
    let mut chat = Array2::<c64>::zeros((p, m * n_s));
    for j in 0..n_s {
        chat.slice_mut(s![.., j * m..(j + 1) * m]).assign(&right_g[j]);
    }

    Ok(LoewnerQuadruplet {
        l,
        ls,
        bhat,
        chat,
        right_freqs,
        left_freqs,
        num_inputs: m,
        num_outputs: p,
        static_gain: samples.static_gain.clone(),
    })
}

/// Evaluate H̃(s) = Ĉ(sL − L_s)^{-1}B̂ + D of the raw quadruplet at every
/// grid point and return the maximum relative deviation from the samples;
/// Hermite points also check H̃′ against H′. A singular pencil at a test
/// point reports deviation ∞ (the pencil is only generically invertible for
/// minimal data).
pub fn interpolation_check(quad: &LoewnerQuadruplet, samples: &SampleSet) -> Result<f64> {
    let d = la::to_complex(&samples.static_gain);
    let mut worst = 0.0f64;

    let mut points: Vec<(f64, Array2<c64>, Option<Array2<c64>>)> = Vec::new();
    for (j, &w) in samples.freqs.iter().enumerate() {
        let dh = samples.derivatives.as_ref().map(|ds| ds[j].clone());
        points.push((w, samples.samples[j].clone(), dh));
    }
    if samples.left.is_some() {
        for (i, &w) in samples.left_freqs().iter().enumerate() {
            points.push((w, samples.left_sample(i).clone(), None));
        }
    }

    let devs = par::try_map(&points, |(w, h_ref, dh_ref)| {
        Ok(point_deviation(quad, *w, h_ref, dh_ref.as_ref(), &d))
    })?;
    for dev in devs {
        worst = worst.max(dev);
    }
    Ok(worst)
}

fn point_deviation(
    quad: &LoewnerQuadruplet,
    w: f64,
    h_ref: &Array2<c64>,
    dh_ref: Option<&Array2<c64>>,
    d: &Array2<c64>,
) -> f64 {
    let s = c64::new(0.0, w);
    let pencil = quad.l.mapv(|z| z * s) - &quad.ls;
    let x = match la::solve_mat(&pencil, &quad.bhat) {
        Ok(x) => x,
        Err(_) => return f64::INFINITY,
    };
    let res = la::frob(&(pencil.dot(&x) - &quad.bhat)) / la::frob(&quad.bhat).max(1e-300);
    if !res.is_finite() || res > 1e-6 {
        return f64::INFINITY;
    }
    let h = quad.chat.dot(&x) + d;
    let scale = la::frob(h_ref).max(1e-300);
    let mut dev = la::frob(&(&h - h_ref)) / scale;
    if let Some(dh) = dh_ref {
        // H̃'(s) = −Ĉ (sL−Ls)^{-1} L (sL−Ls)^{-1} B̂
        if let Ok(y) = la::solve_mat(&pencil, &quad.l.dot(&x)) {
            let hp = quad.chat.dot(&y).mapv(|z| -z);
            let dscale = la::frob(dh).max(1e-300);
            dev = dev.max(la::frob(&(&hp - dh)) / dscale);
        } else {
            return f64::INFINITY;
        }
    }
    dev
}
