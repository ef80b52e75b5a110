//! Synthetic benchmark models and exact transfer-function sampling.
//!
//! The generators stand in for lab hardware: they produce desk-scale models
//! whose exact samples feed the non-intrusive pipeline, while the state-space
//! realization stays available to the intrusive oracle for comparison.

use crate::data::SampleSet;
use crate::error::{Error, Result};
use crate::grid::log_spaced;
use crate::la;
use crate::par;
use ndarray::prelude::*;
use ndarray_linalg::Factorize;
use ndarray_linalg::Solve;
use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Real state-space realization (A, B, C, D).
#[derive(Debug, Clone)]
pub struct StateSpaceModel {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
    pub c: Array2<f64>,
    pub d: Array2<f64>,
}

impl StateSpaceModel {
    pub fn new(a: Array2<f64>, b: Array2<f64>, c: Array2<f64>, d: Array2<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n || c.ncols() != n || d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::Dimension(format!(
                "inconsistent shapes: A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn num_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn num_outputs(&self) -> usize {
        self.c.nrows()
    }

    /// All eigenvalues of A strictly in the open left half-plane.
    pub fn is_hurwitz(&self) -> Result<bool> {
        let ev = la::eigvals_real(&self.a)?;
        Ok(ev.iter().all(|l| l.re < 0.0))
    }

    /// Largest real part over the spectrum of A.
    pub fn spectral_abscissa(&self) -> Result<f64> {
        let ev = la::eigvals_real(&self.a)?;
        Ok(ev.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max))
    }

    /// H(jω) = C (jωI − A)^{-1} B + D at a single frequency.
    pub fn eval(&self, omega: f64) -> Result<Array2<c64>> {
        let (h, _) = self.eval_inner(omega, false)?;
        Ok(h)
    }

    fn eval_inner(&self, omega: f64, with_derivative: bool) -> Result<(Array2<c64>, Option<Array2<c64>>)> {
        crate::la::ensure_serial_blas();
        let n = self.order();
        let mut m = la::to_complex(&self.a).mapv(|z| -z);
        for i in 0..n {
            m[[i, i]] += c64::new(0.0, omega);
        }
        let bc = la::to_complex(&self.b);
        let f = m.factorize().map_err(|e| Error::SingularAtFrequency {
            freq: omega,
            detail: e.to_string(),
        })?;
        let mut x = Array2::<c64>::zeros(bc.raw_dim());
        for (j, col) in bc.columns().into_iter().enumerate() {
            let xj = f.solve(&col.to_owned()).map_err(|e| Error::SingularAtFrequency {
                freq: omega,
                detail: e.to_string(),
            })?;
            x.column_mut(j).assign(&xj);
        }
        // residual certificate: flags jω numerically on the spectrum
        let res = la::frob(&(m.dot(&x) - &bc)) / la::frob(&bc).max(1e-300);
        if !res.is_finite() || res > 1e-6 {
            return Err(Error::SingularAtFrequency {
                freq: omega,
                detail: format!("resolvent solve residual {res:.3e}"),
            });
        }
        let cc = la::to_complex(&self.c);
        let h = cc.dot(&x) + la::to_complex(&self.d);
        let hp = if with_derivative {
            // H'(jω) = −C (jωI − A)^{-2} B
            let mut y = Array2::<c64>::zeros(x.raw_dim());
            for (j, col) in x.columns().into_iter().enumerate() {
                let yj = f.solve(&col.to_owned()).map_err(|e| Error::SingularAtFrequency {
                    freq: omega,
                    detail: e.to_string(),
                })?;
                y.column_mut(j).assign(&yj);
            }
            Some(cc.dot(&y).mapv(|z| -z))
        } else {
            None
        };
        Ok((h, hp))
    }
}

/// Generator selector for the two synthetic benchmark families.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ModelKind {
    /// Series-R / shunt-C ladder driven by a voltage source, output is the
    /// input current. Positive-real by construction; `d_offset > 0` makes it
    /// strictly passive for the variants that need invertible D.
    RlcLadder {
        sections: usize,
        r: f64,
        lind: f64,
        cap: f64,
        rload: f64,
        #[serde(default)]
        d_offset: f64,
    },
    /// Block-modal model with log-spaced resonances.
    Modal {
        num_modes: usize,
        freq_lo: f64,
        freq_hi: f64,
        damping_ratio: f64,
        seed: u64,
        #[serde(default)]
        zero_dip_at: Option<f64>,
        #[serde(default)]
        d_offset: f64,
    },
}

impl ModelKind {
    fn validate(&self) -> Result<()> {
        match self {
            ModelKind::RlcLadder {
                sections,
                r,
                lind,
                cap,
                rload,
                ..
            } => {
                if *sections == 0 {
                    return Err(Error::Config("sections must be >= 1".into()));
                }
                for (name, v) in [("R", r), ("Lind", lind), ("Cap", cap), ("Rload", rload)] {
                    if !(*v > 0.0) {
                        return Err(Error::Config(format!("{name} must be > 0, got {v}")));
                    }
                }
            }
            ModelKind::Modal {
                num_modes,
                freq_lo,
                freq_hi,
                damping_ratio,
                ..
            } => {
                if *num_modes == 0 {
                    return Err(Error::Config("num_modes must be >= 1".into()));
                }
                if !(*freq_lo > 0.0) || freq_lo > freq_hi {
                    return Err(Error::Config(format!(
                        "need 0 < freq_lo <= freq_hi, got [{freq_lo}, {freq_hi}]"
                    )));
                }
                if !(*damping_ratio > 0.0 && *damping_ratio < 1.0) {
                    return Err(Error::Config(format!(
                        "damping_ratio must lie in (0,1), got {damping_ratio}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Build a benchmark model; the result is guaranteed Hurwitz.
pub fn generate_model(kind: &ModelKind) -> Result<StateSpaceModel> {
    kind.validate()?;
    let model = match kind {
        ModelKind::RlcLadder {
            sections,
            r,
            lind,
            cap,
            rload,
            d_offset,
        } => rlc_ladder(*sections, *r, *lind, *cap, *rload, *d_offset)?,
        ModelKind::Modal {
            num_modes,
            freq_lo,
            freq_hi,
            damping_ratio,
            seed,
            zero_dip_at,
            d_offset,
        } => modal(
            *num_modes,
            *freq_lo,
            *freq_hi,
            *damping_ratio,
            *seed,
            *zero_dip_at,
            *d_offset,
        )?,
    };
    if !model.is_hurwitz()? {
        return Err(Error::NotHurwitz(format!(
            "generator produced spectral abscissa {:.3e}",
            model.spectral_abscissa()?
        )));
    }
    Ok(model)
}

/// States ordered (i_1..i_N, v_1..v_N):
///   Lind di_k/dt = v_{k-1} − v_k − R i_k   (v_0 = u)
///   Cap  dv_k/dt = i_k − i_{k+1}           (i_{N+1} = v_N / Rload)
/// output y = i_1.
fn rlc_ladder(
    sections: usize,
    r: f64,
    lind: f64,
    cap: f64,
    rload: f64,
    d_offset: f64,
) -> Result<StateSpaceModel> {
    let nsec = sections;
    let n = 2 * nsec;
    let mut a = Array2::<f64>::zeros((n, n));
    for k in 0..nsec {
        a[[k, k]] = -r / lind;
        if k >= 1 {
            a[[k, nsec + k - 1]] = 1.0 / lind;
        }
        a[[k, nsec + k]] = -1.0 / lind;
    }
    for k in 0..nsec {
        a[[nsec + k, k]] = 1.0 / cap;
        if k + 1 < nsec {
            a[[nsec + k, k + 1]] = -1.0 / cap;
        } else {
            a[[nsec + k, nsec + k]] = -1.0 / (cap * rload);
        }
    }
    let mut b = Array2::<f64>::zeros((n, 1));
    b[[0, 0]] = 1.0 / lind;
    let mut c = Array2::<f64>::zeros((1, n));
    c[[0, 0]] = 1.0;
    let d = array![[d_offset]];
    StateSpaceModel::new(a, b, c, d)
}

fn modal(
    num_modes: usize,
    freq_lo: f64,
    freq_hi: f64,
    zeta: f64,
    seed: u64,
    zero_dip_at: Option<f64>,
    d_offset: f64,
) -> Result<StateSpaceModel> {
    let freqs = log_spaced(freq_lo.log10(), freq_hi.log10(), num_modes);
    let n = 2 * num_modes;
    let mut a = Array2::<f64>::zeros((n, n));
    let mut b = Array2::<f64>::zeros((n, 1));
    let mut c = Array2::<f64>::zeros((1, n));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (k, &w) in freqs.iter().enumerate() {
        let dmp = zeta * w;
        a[[2 * k, 2 * k]] = -dmp;
        a[[2 * k, 2 * k + 1]] = w;
        a[[2 * k + 1, 2 * k]] = -w;
        a[[2 * k + 1, 2 * k + 1]] = -dmp;
        b[[2 * k, 0]] = 1.0;
        // lognormal-ish spread of residues
        let u: f64 = rng.gen_range(-0.5..0.5);
        c[[0, 2 * k]] = (0.6 * u).exp();
    }
    let d = array![[d_offset]];
    let mut model = StateSpaceModel::new(a, b, c, d)?;
    if let Some(dip) = zero_dip_at {
        plant_zero(&mut model, &freqs, dip)?;
    }
    Ok(model)
}

/// Plant a transmission zero at jW by re-solving the residues of the two
/// modes bracketing W so the remaining contributions cancel exactly there.
/// The solved weights come out with alternating signs.
fn plant_zero(model: &mut StateSpaceModel, freqs: &[f64], dip: f64) -> Result<()> {
    let nm = freqs.len();

    if nm < 2 {
        return Err(Error::Config(
            "zero_dip_at needs at least two modes".into(),
        ));
    }
    if dip <= freqs[0] || dip >= freqs[nm - 1] {
        return Err(Error::Config(format!(
            "zero_dip_at {dip} must lie strictly inside the mode band [{}, {}]",
            freqs[0],
            freqs[nm - 1]
        )));
    }
    let hi = freqs.iter().position(|&w| w > dip).unwrap();
    let (ka, kb) = (hi - 1, hi);
    // per-mode unit-residue responses at jW
    let s = c64::new(0.0, dip);
    let mut unit = vec![c64::new(0.0, 0.0); nm];
    for (k, &w) in freqs.iter().enumerate() {
        let dmp = -model.a[[2 * k, 2 * k]];
        // block resolvent of [[-d, w], [-w, -d]] against b = [1, 0]
        let det = (s + dmp) * (s + dmp) + c64::new(w * w, 0.0);
        unit[k] = (s + dmp) / det;
    }
    let mut rest = c64::new(0.0, 0.0);
    for k in 0..nm {
        if k != ka && k != kb {
            rest += model.c[[0, 2 * k]] * unit[k];
        }
    }
    // 2x2 real system: c_a * unit[ka] + c_b * unit[kb] = -rest
    let det = unit[ka].re * unit[kb].im - unit[ka].im * unit[kb].re;
    if det.abs() < 1e-14 * (unit[ka].norm() * unit[kb].norm()).max(1e-300) {
        return Err(Error::Config(
            "bracketing modes are collinear at the dip frequency".into(),
        ));
    }
    let ca = (-rest.re * unit[kb].im + rest.im * unit[kb].re) / det;
    let cb = (-unit[ka].re * rest.im + unit[ka].im * rest.re) / det;
    model.c[[0, 2 * ka]] = ca;
    model.c[[0, 2 * kb]] = cb;
    Ok(())
}

/// Exact samples H(jω) (and optionally H′(jω)) over a frequency list,
/// evaluated in parallel per frequency with order preserved.
pub fn sample_transfer(
    model: &StateSpaceModel,
    freqs: &[f64],
    with_derivative: bool,
) -> Result<SampleSet> {
    let rows = par::try_map(freqs, |&w| model.eval_inner(w, with_derivative))?;
    let samples: Vec<Array2<c64>> = rows.iter().map(|(h, _)| h.clone()).collect();
    let derivatives = if with_derivative {
        Some(rows.into_iter().map(|(_, hp)| hp.unwrap()).collect())
    } else {
        None
    };
    SampleSet::new(freqs.to_vec(), samples, derivatives, model.d.clone(), false)
}

// ---------------------------------------------------------------------------
// serialization: {"n","m","p","A","B","C","D"} with row-major nested arrays
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ModelFile {
    n: usize,
    m: usize,
    p: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
}

fn to_nested(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn from_nested(v: &[Vec<f64>], rows: usize, cols: usize, name: &str) -> Result<Array2<f64>> {
    if v.len() != rows || v.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension(format!(
            "{name} must be {rows}x{cols} nested arrays"
        )));
    }
    let flat: Vec<f64> = v.iter().flatten().copied().collect();
    if flat.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config(format!("{name} contains non-finite entries")));
    }
    Array2::from_shape_vec((rows, cols), flat).map_err(|e| Error::Dimension(e.to_string()))
}

impl StateSpaceModel {
    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            n: self.order(),
            m: self.num_inputs(),
            p: self.num_outputs(),
            a: to_nested(&self.a),
            b: to_nested(&self.b),
            c: to_nested(&self.c),
            d: to_nested(&self.d),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        let a = from_nested(&file.a, file.n, file.n, "A")?;
        let b = from_nested(&file.b, file.n, file.m, "B")?;
        let c = from_nested(&file.c, file.p, file.n, "C")?;
        let d = from_nested(&file.d, file.p, file.m, "D")?;
        Self::new(a, b, c, d)
    }
}
